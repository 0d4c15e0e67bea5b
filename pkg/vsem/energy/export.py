"""CSV/JSON hand-off of per-simplex diagnostics and delta + 1 histograms."""

import csv
import json
import logging
from pathlib import Path

import numpy as np

from vsem.energy.stretch import StretchDiagnostics

logger = logging.getLogger(__name__)

DIAGNOSTICS_COLUMNS = ("simplex_id", "volume", "image_volume", "mass", "delta")
RATIO_COLUMNS = ("simplex_id", "delta_plus_1")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_diagnostics_csv(path, diag: StretchDiagnostics, volumes: np.ndarray) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(DIAGNOSTICS_COLUMNS)
        for sid, (vol, image, mass, delta) in enumerate(
            zip(volumes, diag.image_volumes, diag.masses, diag.delta)
        ):
            writer.writerow([sid, _fmt(vol), _fmt(image), _fmt(mass), _fmt(delta)])
    logger.info(f"Wrote per-simplex diagnostics for {len(diag.delta)} simplices to {path}.")


def write_ratio_csv(path, delta: np.ndarray) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RATIO_COLUMNS)
        for sid, value in enumerate(np.asarray(delta) + 1.0):
            writer.writerow([sid, _fmt(value)])
    logger.info(f"Wrote {len(delta)} volume ratios to {path}.")


def ratio_histogram(delta: np.ndarray, bins: int = 64, value_range: tuple[float, float] = (0.0, 2.0)) -> dict:
    """Fixed-width histogram of delta + 1; values outside the range are counted separately."""
    if bins < 1:
        raise ValueError(f"bins must be positive, got {bins}")
    low, high = float(value_range[0]), float(value_range[1])
    if not high > low:
        raise ValueError(f"histogram range must be increasing, got {value_range}")
    ratios = np.asarray(delta, dtype=np.float64) + 1.0
    counts, edges = np.histogram(ratios, bins=bins, range=(low, high))
    return {
        "bins": bins,
        "range": [low, high],
        "edges": [float(e) for e in edges],
        "counts": [int(c) for c in counts],
        "below": int(np.sum(ratios < low)),
        "above": int(np.sum(ratios > high)),
    }


def summary_json(diag: StretchDiagnostics, **extra) -> str:
    payload = {**diag.summary(), **extra}
    return json.dumps(payload, indent=2, sort_keys=True)


def write_summary_json(path, diag: StretchDiagnostics, **extra) -> None:
    Path(path).write_text(summary_json(diag, **extra) + "\n", encoding="utf-8", newline="\n")
