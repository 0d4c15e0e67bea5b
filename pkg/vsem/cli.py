"""Command-line entry point: ``vsem gen|sphere|ball|metrics``.

Exit codes: 0 success, 1 solver warning or failure, 2 usage or input error.
Errors are printed to stderr as ``{"success": false, "message": ...}``.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from vsem.ball_solver.pipeline import SPHERE_INITS, BallPipelineConfig, parameterize_ball, parameterize_sphere
from vsem.ball_solver.protocol import DEFAULT_PERTURBATION, EllipsoidProtocol
from vsem.complexcore.generate import disk_twist_map, gen_ball_mesh, gen_blob_mesh, gen_ellipsoid_mesh
from vsem.complexcore.nsc import read_map, read_mesh_record, write_map, write_mesh
from vsem.complexcore.simplicial import MeasuredComplex, PiecewiseAffineMap, SimplicialComplex
from vsem.complexcore.topology import check_ball_topology, orient_closed_surface
from vsem.config import configure_logging, get_settings
from vsem.energy.export import ratio_histogram, write_diagnostics_csv, write_ratio_csv
from vsem.energy.stretch import diagnostics, normalized_diagnostics
from vsem.errors import (
    ConfigError,
    DimensionMismatchError,
    MeshFormatError,
    MeshValidationError,
    PipelineStageError,
)
from vsem.report import REPORT_VERSION, PipelineReport

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_WARNING = 1
EXIT_USAGE = 2

GEN_KINDS = ("ball", "ellipsoid", "disk-twist-demo", "blob")
INPUT_ERRORS = (MeshFormatError, MeshValidationError, ConfigError, OSError, ValueError)


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one CLI invocation."""

    command: str
    inputs: tuple[Path, ...] = ()
    output: Path | None = None
    report: Path | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        for path in self.inputs:
            if not path.is_file():
                raise FileNotFoundError(f"input file not found: {path}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        inputs = tuple(Path(p) for p in (getattr(args, "mesh", None), getattr(args, "map", None)) if p)
        skip = {"command", "mesh", "map", "output", "report", "log_level"}
        options = {k: v for k, v in vars(args).items() if k not in skip}
        output = Path(args.output) if getattr(args, "output", None) else None
        report = Path(args.report) if getattr(args, "report", None) else None
        return cls(args.command, inputs, output, report, options)


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _range(text: str) -> tuple[float, float]:
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected LOW,HIGH, got {text!r}")
    return values[0], values[1]


def _emit_report(run: RunConfig, report: PipelineReport) -> None:
    text = report.to_json(include_timings=get_settings().report_timings)
    if run.report is None:
        print(text)
    else:
        run.report.write_text(text + "\n", encoding="utf-8", newline="\n")
        logger.info(f"Wrote report {run.report}.")


# --- Commands ---
def cmd_gen(run: RunConfig) -> dict:
    opts = run.options
    kind = opts["kind"]
    if run.output is None:
        raise ConfigError("gen needs an output path (-o)")
    result = {"success": True}
    if kind == "ball":
        complex = gen_ball_mesh(opts["dim"], opts["res"])
    elif kind == "ellipsoid":
        if not opts["axes"]:
            raise ConfigError("gen ellipsoid needs --axes")
        complex = gen_ellipsoid_mesh(opts["axes"], opts["res"])
    elif kind == "blob":
        complex = gen_blob_mesh(opts["dim"], opts["res"], opts["amplitude"], opts["seed"])
    else:
        complex = gen_ball_mesh(2, opts["res"])
        map_path = Path(opts["map_out"]) if opts["map_out"] else run.output.with_suffix(".map.nsc")
        write_map(map_path, disk_twist_map(complex, opts["twist"]))
        result["map"] = str(map_path)
    write_mesh(run.output, complex)
    result.update(
        {
            "message": f"Wrote {kind} mesh to {run.output}",
            "N": complex.n_vertices,
            "m": complex.n_simplices,
            "k": complex.top_dim,
            "n": complex.ambient_dim,
        }
    )
    return result


def _sphere_inputs(run: RunConfig, record) -> tuple[MeasuredComplex, PiecewiseAffineMap | None, float | None]:
    opts = run.options
    complex = record.complex
    initial = None
    target = None
    if complex.top_dim == complex.ambient_dim:
        extraction = check_ball_topology(complex)
        surface = extraction.complex
    elif complex.top_dim == complex.ambient_dim - 1:
        if opts["measure"] == "ellipsoid-exact":
            raise ConfigError("--measure ellipsoid-exact needs the solid ellipsoid mesh")
        surface, _ = orient_closed_surface(complex)
        extraction = None
    else:
        raise DimensionMismatchError(
            f"sphere needs an n-complex or a closed (n-1)-complex in R^n, got k={complex.top_dim}, n={complex.ambient_dim}"
        )

    if opts["measure"] == "uniform":
        if extraction is None and record.density is not None:
            measured = MeasuredComplex(surface, record.density)
        else:
            measured = MeasuredComplex(surface)
    elif opts["measure"] == "file":
        if not opts["measure_file"]:
            raise ConfigError("--measure file needs --measure-file")
        masses = np.loadtxt(opts["measure_file"], dtype=np.float64, ndmin=1)
        measured = MeasuredComplex.from_masses(surface, masses)
    else:
        if not opts["axes"]:
            raise ConfigError("--measure ellipsoid-exact needs --axes")
        protocol = EllipsoidProtocol(complex, opts["axes"], opts["perturbation"], opts["seed"])
        measured = protocol.measured_boundary
        target = protocol.target_volume
        initial = protocol.perturbed_boundary_map()

    if opts["init"] == "file":
        if not opts["init_file"]:
            raise ConfigError("--init file needs --init-file")
        initial = read_map(opts["init_file"])
    return measured, initial, target


def cmd_sphere(run: RunConfig) -> dict:
    opts = run.options
    record = read_mesh_record(run.inputs[0])
    measured, initial, target = _sphere_inputs(run, record)
    sphere_init = opts["init"] if opts["init"] in SPHERE_INITS else "sem"
    config = BallPipelineConfig(
        tol_boundary=opts["tol"],
        tol_kkt=opts["tol_kkt"],
        radius=opts["radius"],
        sphere_init=sphere_init,
        pca=False,
    )
    sphere_map, report = parameterize_sphere(measured, config, initial, target)
    report.details["input"] = str(run.inputs[0])
    report.details["measure"] = opts["measure"]
    if run.output is not None:
        write_map(run.output, sphere_map)
    if opts["diagnostics_csv"]:
        write_diagnostics_csv(
            opts["diagnostics_csv"], diagnostics(measured, sphere_map, with_weights=False), measured.complex.volumes
        )
    _emit_report(run, report)
    return {
        "success": True,
        "message": f"Sphere map for {run.inputs[0]} (epsilon {report.diagnostics['sphere']['epsilon']:.3e})",
        "warnings": report.has_warnings,
    }


def cmd_ball(run: RunConfig) -> dict:
    opts = run.options
    record = read_mesh_record(run.inputs[0])
    measured = record.measured()
    config = BallPipelineConfig(
        tol_boundary=opts["tol_boundary"],
        tol_kkt=opts["tol_kkt"],
        tol_interior=opts["tol_interior"],
        radius=opts["radius"],
        sphere_init=opts["sphere_init"],
        pca=opts["pca"],
        fix_orientation=opts["fix_orientation"],
    )
    extra = {}
    if opts["init_exact"]:
        protocol = EllipsoidProtocol(record.complex, opts["init_exact"], opts["perturbation"], opts["seed"])
        extra = {
            "boundary_masses": protocol.boundary_masses,
            "initial_boundary": protocol.perturbed_boundary_map(),
            "target": protocol.target_volume,
            "initial_interior": protocol.perturbed_interior_map(),
        }
    fmap, report = parameterize_ball(measured, config, **extra)
    report.details["input"] = str(run.inputs[0])
    report.details["init_exact"] = bool(opts["init_exact"])
    if run.output is not None:
        write_map(run.output, fmap)
    if opts["diagnostics_csv"]:
        write_diagnostics_csv(
            opts["diagnostics_csv"], diagnostics(measured, fmap, with_weights=False), measured.complex.volumes
        )
    _emit_report(run, report)
    return {
        "success": True,
        "message": f"Ball map for {run.inputs[0]} (epsilon {report.diagnostics['ball']['epsilon']:.3e})",
        "warnings": report.has_warnings,
    }


def _metrics_domain(record, fmap: PiecewiseAffineMap) -> MeasuredComplex:
    complex: SimplicialComplex = record.complex
    if fmap.n_vertices == complex.n_vertices:
        return record.measured()
    if complex.top_dim == complex.ambient_dim:
        extraction = check_ball_topology(complex)
        if fmap.n_vertices == extraction.boundary_idx.size:
            return MeasuredComplex(extraction.complex)
    raise DimensionMismatchError(
        f"map has {fmap.n_vertices} rows; mesh has {complex.n_vertices} vertices"
    )


def cmd_metrics(run: RunConfig) -> dict:
    opts = run.options
    record = read_mesh_record(run.inputs[0])
    fmap = read_map(run.inputs[1])
    measured = _metrics_domain(record, fmap)
    raw = diagnostics(measured, fmap)
    normalized = normalized_diagnostics(measured, fmap, with_weights=False)
    histogram = ratio_histogram(normalized.delta, opts["bins"], opts["range"])
    summary = {
        "report_version": REPORT_VERSION,
        "command": "metrics",
        "n_simplices": int(len(raw.delta)),
        "raw": raw.summary(),
        "normalized": normalized.summary(),
        "sandwich_holds": raw.sandwich_holds(),
        "histogram": histogram,
    }
    if opts["csv"]:
        write_ratio_csv(opts["csv"], normalized.delta)
    text = json.dumps(summary, indent=2, sort_keys=True)
    if opts["json"]:
        Path(opts["json"]).write_text(text + "\n", encoding="utf-8", newline="\n")
    else:
        print(text)
    return {"success": True, "message": f"Metrics for {run.inputs[1]} (epsilon {raw.epsilon:.3e})"}


COMMANDS = {
    "gen": cmd_gen,
    "sphere": cmd_sphere,
    "ball": cmd_ball,
    "metrics": cmd_metrics,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vsem",
        description="Mass-preserving parameterization of simplicial n-balls and (n-1)-spheres.",
    )
    parser.add_argument("--log-level", help="Override VSEM_LOG_LEVEL for this run.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate a test mesh in NSC format.")
    gen.add_argument("kind", choices=GEN_KINDS)
    gen.add_argument("--dim", type=int, default=3, help="Dimension n for ball and blob meshes.")
    gen.add_argument("--res", type=int, default=8, help="Cells per axis of the Kuhn grid.")
    gen.add_argument("--axes", type=_float_list, help="Ellipsoid semi-axes, e.g. 0.8,1,1.2.")
    gen.add_argument("--amplitude", type=float, default=0.15, help="Blob radial amplitude.")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--twist", type=float, default=1.0, help="Twist rate k for disk-twist-demo.")
    gen.add_argument("--map-out", help="Map path for disk-twist-demo (default <output>.map.nsc).")
    gen.add_argument("-o", "--output", required=True)

    sphere = sub.add_parser("sphere", help="Parameterize a closed boundary onto the unit sphere.")
    sphere.add_argument("mesh")
    sphere.add_argument("--tol", type=float, default=1e-12, help="Energy-change tolerance.")
    sphere.add_argument("--tol-kkt", type=float, default=1e-9, help="KKT residual tolerance.")
    sphere.add_argument("--radius", type=float, default=1.2, help="SEM interior radius.")
    sphere.add_argument("--init", choices=("dirac", "sem", "file"), default="sem")
    sphere.add_argument("--init-file", help="Initial sphere map (NSC map) for --init file.")
    sphere.add_argument("--measure", choices=("uniform", "file", "ellipsoid-exact"), default="uniform")
    sphere.add_argument("--measure-file", help="One mass per boundary simplex for --measure file.")
    sphere.add_argument("--axes", type=_float_list, help="Semi-axes for --measure ellipsoid-exact.")
    sphere.add_argument("--perturbation", type=float, default=DEFAULT_PERTURBATION)
    sphere.add_argument("--seed", type=int, default=0)
    sphere.add_argument("--diagnostics-csv", help="Per-simplex diagnostics CSV.")
    sphere.add_argument("-o", "--output", help="Output map path.")
    sphere.add_argument("--report", help="Report JSON path (default stdout).")

    ball = sub.add_parser("ball", help="Parameterize an n-ball complex onto the unit ball.")
    ball.add_argument("mesh")
    ball.add_argument("--tol-boundary", type=float, default=1e-12)
    ball.add_argument("--tol-kkt", type=float, default=1e-9)
    ball.add_argument("--tol-interior", type=float, default=1e-13)
    ball.add_argument("--radius", type=float, default=1.2)
    ball.add_argument("--sphere-init", choices=SPHERE_INITS, default="sem")
    ball.add_argument("--pca", action=argparse.BooleanOptionalAction, default=True, help="PCA boundary normalization.")
    ball.add_argument("--fix-orientation", action=argparse.BooleanOptionalAction, default=True)
    ball.add_argument("--init-exact", type=_float_list, metavar="AXES", help="Ellipsoid protocol with these semi-axes.")
    ball.add_argument("--perturbation", type=float, default=DEFAULT_PERTURBATION)
    ball.add_argument("--seed", type=int, default=0)
    ball.add_argument("--diagnostics-csv", help="Per-simplex diagnostics CSV.")
    ball.add_argument("-o", "--output", help="Output map path.")
    ball.add_argument("--report", help="Report JSON path (default stdout).")

    metrics = sub.add_parser("metrics", help="Volume-ratio metrics of a map.")
    metrics.add_argument("mesh")
    metrics.add_argument("map")
    metrics.add_argument("--bins", type=int, default=64)
    metrics.add_argument("--range", type=_range, default=(0.0, 2.0), help="Histogram range LOW,HIGH.")
    metrics.add_argument("--csv", help="Per-simplex simplex_id,delta_plus_1 CSV.")
    metrics.add_argument("--json", help="Summary JSON path (default stdout).")
    return parser


def _is_input_error(exc: BaseException) -> bool:
    # LinAlgError subclasses ValueError but signals a numerical failure.
    return isinstance(exc, INPUT_ERRORS) and not isinstance(exc, np.linalg.LinAlgError)


def _fail(message: str, code: int) -> int:
    print(json.dumps({"success": False, "message": message}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging(level=args.log_level.upper() if args.log_level else None)
    except (ConfigError, ValueError) as exc:
        return _fail(f"Invalid configuration: {exc}", EXIT_USAGE)

    handler = COMMANDS[args.command]
    try:
        run = RunConfig.from_args(args)
        result = handler(run)
    except PipelineStageError as exc:
        code = EXIT_USAGE if _is_input_error(exc.cause) else EXIT_WARNING
        return _fail(f"Command '{args.command}' failed in stage {exc.stage}: {exc.cause}", code)
    except Exception as exc:
        if _is_input_error(exc):
            logger.error(f"Command '{args.command}' rejected its input: {exc}")
            return _fail(f"Command '{args.command}' failed: {exc}", EXIT_USAGE)
        logger.error(f"Command '{args.command}' failed: {exc}", exc_info=True)
        return _fail(f"Command '{args.command}' failed: {exc}", EXIT_WARNING)

    logger.info(result["message"])
    if args.command == "gen":
        print(json.dumps(result))
    return EXIT_WARNING if result.get("warnings") else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
