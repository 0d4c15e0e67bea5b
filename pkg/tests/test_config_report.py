import json
import logging

import numpy as np
import pytest

from vsem.config import LOG_FORMAT, Settings, configure_logging, get_settings
from vsem.errors import ConfigError
from vsem.report import REPORT_VERSION, PipelineReport, SolverReport, _clean


def test_default_settings(monkeypatch):
    for name in ("LOG_LEVEL", "LOG_FILE", "CG_THRESHOLD", "FD_STEP", "RESIDUAL_LIMIT", "REPORT_TIMINGS"):
        monkeypatch.delenv(f"VSEM_{name}", raising=False)
    assert get_settings() == Settings()


def test_settings_are_read_from_the_environment(monkeypatch):
    monkeypatch.setenv("VSEM_LOG_LEVEL", "debug")
    monkeypatch.setenv("VSEM_CG_THRESHOLD", "5000")
    monkeypatch.setenv("VSEM_FD_STEP", "1e-6")
    monkeypatch.setenv("VSEM_RESIDUAL_LIMIT", "1e-8")
    monkeypatch.setenv("VSEM_REPORT_TIMINGS", "yes")
    settings = get_settings()
    assert settings.log_level == "DEBUG"
    assert settings.cg_threshold == 5000
    assert settings.fd_step == pytest.approx(1e-6)
    assert settings.residual_limit == pytest.approx(1e-8)
    assert settings.report_timings is True


@pytest.mark.parametrize(
    "name, value",
    [
        ("VSEM_LOG_LEVEL", "LOUD"),
        ("VSEM_CG_THRESHOLD", "many"),
        ("VSEM_CG_THRESHOLD", "0"),
        ("VSEM_FD_STEP", "-1e-6"),
        ("VSEM_RESIDUAL_LIMIT", "0"),
        ("VSEM_REPORT_TIMINGS", "maybe"),
    ],
)
def test_invalid_settings(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ConfigError):
        get_settings()


def test_log_file_uses_the_shared_format(tmp_path, monkeypatch):
    log_path = tmp_path / "vsem.log"
    monkeypatch.setenv("VSEM_LOG_FILE", str(log_path))
    try:
        configure_logging()
        logging.getLogger("vsem.test").info("stage finished")
        text = log_path.read_text()
    finally:
        logging.basicConfig(handlers=[logging.NullHandler()], force=True)
    assert "stage finished" in text
    assert " - INFO - [test_config_report.py:" in text
    assert LOG_FORMAT.startswith("%(asctime)s")


def test_clean_makes_values_json_safe():
    cleaned = _clean(
        {
            "nan": float("nan"),
            "inf": np.inf,
            "ninf": -np.inf,
            "scalar": np.float64(0.5),
            "count": np.int64(3),
            "flag": np.bool_(True),
            "array": np.array([1.0, np.nan]),
            1: (2, 3),
        }
    )
    assert cleaned == {
        "nan": "nan",
        "inf": "inf",
        "ninf": "-inf",
        "scalar": 0.5,
        "count": 3,
        "flag": True,
        "array": [1.0, "nan"],
        "1": [2, 3],
    }
    assert type(cleaned["count"]) is int
    json.dumps(cleaned, allow_nan=False)


def test_solver_report_warnings():
    report = SolverReport(stage="sem")
    assert not report.has_warnings
    report.warn("energy increased")
    assert report.has_warnings
    assert report.to_dict()["warnings"] == ["energy increased"]


def _pipeline() -> PipelineReport:
    report = PipelineReport(command="ball", config={"radius": 1.2})
    stage = report.add(SolverReport(stage="sphere_newton", iterations=3, converged=True))
    stage.energy_trace.extend([2.0, 1.5, np.float64(1.25)])
    stage.timings["solve"] = 0.123
    report.diagnostics["ball"] = {"epsilon": np.float64(1e-9)}
    return report


def test_pipeline_report_json_is_deterministic():
    first, second = _pipeline().to_json(), _pipeline().to_json()
    assert first == second
    payload = json.loads(first)
    assert payload["report_version"] == REPORT_VERSION
    assert payload["success"] is True
    assert payload["warnings"] is False
    assert list(payload) == sorted(payload)
    assert "timings" not in payload["stages"][0]


def test_pipeline_report_timings_are_opt_in():
    payload = _pipeline().to_dict(include_timings=True)
    assert payload["stages"][0]["timings"] == {"solve": 0.123}


def test_pipeline_report_stage_lookup():
    report = _pipeline()
    assert report.stage("sphere_newton").iterations == 3
    assert report.stage("sem") is None
    report.stage("sphere_newton").warn("line search failed")
    assert report.has_warnings
    assert report.to_dict()["warnings"] is True
