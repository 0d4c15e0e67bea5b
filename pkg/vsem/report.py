"""Machine-readable run reports.

Reports serialize to JSON with sorted keys and no wall-clock data unless
``VSEM_REPORT_TIMINGS`` is set, so identical runs produce identical bytes.
"""

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

REPORT_VERSION = 1

logger = logging.getLogger(__name__)


def _clean(value):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


@dataclass
class SolverReport:
    """Trace of one solver stage."""

    stage: str
    iterations: int = 0
    converged: bool = False
    stalled: bool = False
    energy_trace: list[float] = field(default_factory=list)
    delta_energy_trace: list[float] = field(default_factory=list)
    merit_trace: list[float] = field(default_factory=list)
    step_sizes: list[float] = field(default_factory=list)
    flip_counts: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def warn(self, message: str) -> None:
        logger.warning(f"[{self.stage}] {message}")
        self.warnings.append(message)

    @property
    def has_warnings(self) -> bool:
        return bool(self.warnings)

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {
            "stage": self.stage,
            "iterations": self.iterations,
            "converged": self.converged,
            "stalled": self.stalled,
            "energy_trace": self.energy_trace,
            "delta_energy_trace": self.delta_energy_trace,
            "merit_trace": self.merit_trace,
            "step_sizes": self.step_sizes,
            "flip_counts": self.flip_counts,
            "warnings": self.warnings,
            "diagnostics": self.diagnostics,
            "details": self.details,
        }
        if include_timings:
            out["timings"] = self.timings
        return _clean(out)


@dataclass
class PipelineReport:
    command: str
    stages: list[SolverReport] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def add(self, report: SolverReport) -> SolverReport:
        self.stages.append(report)
        return report

    def stage(self, name: str) -> SolverReport | None:
        return next((s for s in self.stages if s.stage == name), None)

    @property
    def has_warnings(self) -> bool:
        return any(s.has_warnings for s in self.stages)

    def to_dict(self, include_timings: bool = False) -> dict:
        return _clean(
            {
                "report_version": REPORT_VERSION,
                "command": self.command,
                "success": True,
                "warnings": self.has_warnings,
                "stages": [s.to_dict(include_timings) for s in self.stages],
                "diagnostics": self.diagnostics,
                "config": self.config,
                "details": self.details,
            }
        )

    def to_json(self, include_timings: bool = False) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, sort_keys=True)
