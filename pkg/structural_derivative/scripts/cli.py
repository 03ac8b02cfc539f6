import concurrent.futures
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

import click

from structural_derivative.calculus import (
    Rule,
    all_passed,
    parse_rules,
    summarize,
    verify_all,
)
from structural_derivative.derivative import structural_derivative
from structural_derivative.errors import (
    ComputationError,
    InvalidJobSpec,
    SpecError,
    StructuralError,
)
from structural_derivative.models import (
    CLASSIFY_COLUMNS,
    EVAL_COLUMNS,
    ERROR_BRANCH,
    REPORT_COLUMNS,
    ClassifyRecord,
    EvalRecord,
    JobSpec,
    ReportRecord,
    dump_model,
    parse_model,
)
from structural_derivative.structfn import StructuralConfig, as_function
from structural_derivative.timescale import TimeScale, as_timescale
from structural_derivative.utils import format_number, parse_points
from structural_derivative.version import __version__

logger = logging.getLogger(__name__)

ItemT = TypeVar("ItemT")
ResultT = TypeVar("ResultT")

EXIT_OK = 0
EXIT_SPEC_ERROR = 1
EXIT_COMPUTATION_ERROR = 2


def _options(options: Sequence[Callable]) -> Callable:
    def decorator(f: Callable) -> Callable:
        for option in reversed(options):
            f = option(f)
        return f

    return decorator


_JOB_OPTIONS = [
    click.option(
        "--config",
        "config_path",
        type=click.Path(exists=True, dir_okay=False),
        help="JSON job file; command line options override its values",
    ),
    click.option("--timescale", help="Time scale preset (e.g. grid:0.5) or JSON"),
    click.option("--points", help="Comma separated points or from:to:count"),
    click.option(
        "--format", "output", type=click.Choice(["csv", "json"]), help="Output format"
    ),
    click.option("-v", "--verbose", count=True, help="Log to stderr, repeat for more"),
]

_DERIVATIVE_OPTIONS = [
    click.option("--fn", "function", help="Function to differentiate"),
    click.option("--p", "structural", help="Structural function"),
    click.option("--lambda", "lam", type=float, help="Exponent lambda > 0"),
    click.option("--tol", type=float, help="Tolerance of dense limits"),
    click.option("--max-iters", type=int, help="Iteration cap of dense limits"),
    click.option(
        "--no-richardson", is_flag=True, help="Disable Richardson extrapolation"
    ),
    click.option("--workers", type=int, help="Points evaluated concurrently"),
]


def _configure_logging(verbose: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def _read_config(path: str) -> Dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as failed_parse:
        raise InvalidJobSpec(f"Cannot read job file {path}: {failed_parse}") from failed_parse
    if not isinstance(data, dict):
        raise InvalidJobSpec(f"Job file {path} must hold a JSON object")
    return data


def _job_data(
    config_path: Optional[str],
    tol: Optional[float] = None,
    max_iters: Optional[int] = None,
    no_richardson: bool = False,
    **overrides: Any,
) -> Dict[str, Any]:
    """Job file contents with the command line options applied."""
    data = _read_config(config_path) if config_path else {}
    settings = dict(data.get("settings") or {})
    if tol is not None:
        settings["abs_tol"] = settings["rel_tol"] = tol
    if max_iters is not None:
        settings["max_iters"] = max_iters
    if no_richardson:
        settings["use_richardson"] = False
    if "lam" in overrides:
        overrides["lambda"] = overrides.pop("lam")
    if isinstance(overrides.get("rules"), str):
        overrides["rules"] = overrides["rules"].split(",")
    data.update({k: v for k, v in overrides.items() if v is not None})
    data["settings"] = settings
    return data


def _map(
    fn: Callable[[ItemT], ResultT], items: Sequence[ItemT], workers: int
) -> List[ResultT]:
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _write_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row.get(c)) for c in columns])
    click.echo(buffer.getvalue(), nl=False)


def _write_json(payload: Any) -> None:
    click.echo(json.dumps(payload, indent=2))


def _emit_eval(records: Sequence[EvalRecord], output: str, single: bool) -> None:
    rows = [dump_model(r) for r in records]
    if output == "json":
        _write_json(rows[0] if single else rows)
        return
    for row in rows:
        if row["branch"] == ERROR_BRANCH:
            row["branch"] = f"{ERROR_BRANCH}:{row['error']}"
    _write_csv(rows, EVAL_COLUMNS)


class _Job:
    """Resolved inputs of a job."""

    def __init__(self, spec: JobSpec):
        self.spec = spec
        self.timescale: TimeScale = as_timescale(spec.timescale)
        self.points = parse_points(spec.points, self.timescale)
        self.function = as_function(spec.function)
        self.cfg = StructuralConfig(as_function(spec.structural), spec.lam)
        self.settings = spec.limit_settings()
        if spec.workers < 1:
            raise InvalidJobSpec(f"workers must be at least 1, got {spec.workers}")

    def evaluate(self, t: float) -> EvalRecord:
        try:
            result = structural_derivative(
                self.function, self.timescale, self.cfg, t, self.settings
            )
        except ComputationError as error:
            logger.warning("t=%r: %s", t, error)
            return EvalRecord.from_error(t, error)
        return EvalRecord.from_result(t, result)


def run_eval(spec: JobSpec) -> int:
    job = _Job(spec)
    if len(job.points) != 1:
        raise InvalidJobSpec(f"eval takes exactly one point, got {len(job.points)}")
    record = job.evaluate(job.points[0])
    _emit_eval([record], spec.output, single=True)
    return EXIT_OK if record.error is None else EXIT_COMPUTATION_ERROR


def run_table(spec: JobSpec) -> int:
    job = _Job(spec)
    if not job.points:
        raise InvalidJobSpec("table needs at least one point")
    records = _map(job.evaluate, job.points, spec.workers)
    _emit_eval(records, spec.output, single=False)
    if any(r.error is None for r in records):
        return EXIT_OK
    return EXIT_COMPUTATION_ERROR


def run_classify(spec: JobSpec) -> int:
    T = as_timescale(spec.timescale)
    points = parse_points(spec.points, T)
    if not points:
        raise InvalidJobSpec("classify needs at least one point")

    def record(t: float) -> ClassifyRecord:
        try:
            return ClassifyRecord.from_point(
                t, T.sigma(t), T.rho(t), T.classify(t), T.in_kappa(t)
            )
        except StructuralError as error:
            return ClassifyRecord.from_error(t, error)

    rows = [dump_model(record(t)) for t in points]
    if spec.output == "json":
        _write_json(rows)
    else:
        _write_csv(rows, CLASSIFY_COLUMNS)
    return EXIT_OK if any(row["error"] is None for row in rows) else EXIT_SPEC_ERROR


def run_verify(spec: JobSpec) -> int:
    job = _Job(spec)
    rules = parse_rules(spec.rules)
    if not job.points and any(r is not Rule.SELF_SIMILAR_ORIGIN for r in rules):
        raise InvalidJobSpec("verify needs at least one point")
    g = as_function(spec.function2 or spec.function)
    reports = verify_all(
        rules,
        job.function,
        g,
        job.timescale,
        job.cfg,
        job.points,
        job.settings,
        gamma=spec.gamma,
        self_similar={"c": spec.c, "beta": spec.beta, "alpha": spec.alpha},
        workers=spec.workers,
    )
    rows = [dump_model(ReportRecord.from_report(r)) for r in reports]
    summary = summarize(reports)
    if spec.output == "json":
        _write_json({"reports": rows, "summary": summary})
    else:
        _write_csv(rows, REPORT_COLUMNS)
        for rule, entry in summary.items():
            click.echo(
                f"{rule}: max_residual={format_number(entry['max_residual'])} "
                f"checked={entry['checked']} passed={entry['passed']} "
                f"not_applicable={entry['not_applicable']}",
                err=True,
            )
    return EXIT_OK if all_passed(reports) else EXIT_COMPUTATION_ERROR


_COMMANDS: Dict[str, Callable[[JobSpec], int]] = {
    "eval": run_eval,
    "table": run_table,
    "classify": run_classify,
    "verify": run_verify,
}


def _execute(
    command: Optional[str],
    output: Optional[str],
    load: Callable[[], Dict[str, Any]],
) -> None:
    try:
        data = load()
        if data.get("output") in ("csv", "json"):
            output = data["output"]
        spec = parse_model(JobSpec, data)
        output = spec.output
        command = command or spec.command
        if command is None:
            raise InvalidJobSpec("the job file names no command")
        code = _COMMANDS[command](spec)
    except StructuralError as error:
        code = EXIT_SPEC_ERROR if isinstance(error, SpecError) else EXIT_COMPUTATION_ERROR
        if output == "json":
            _write_json({"error": error.code, "message": str(error)})
        click.echo(f"Error [{error.code}]: {error}", err=True)
    sys.exit(code)


@click.group(help="Structural derivatives on time scales")
@click.version_option(version=__version__)
def app() -> None:
    """Click group for structderiv subcommands"""
    pass


@app.command("eval")
@_options(_JOB_OPTIONS + _DERIVATIVE_OPTIONS)
def eval_command(config_path: Optional[str], verbose: int, **options: Any) -> None:
    """Evaluate the structural derivative at a single point"""
    _configure_logging(verbose)
    _execute("eval", options["output"], lambda: _job_data(config_path, **options))


@app.command()
@_options(_JOB_OPTIONS + _DERIVATIVE_OPTIONS)
def table(config_path: Optional[str], verbose: int, **options: Any) -> None:
    """Tabulate the structural derivative over a set of points"""
    _configure_logging(verbose)
    _execute("table", options["output"], lambda: _job_data(config_path, **options))


@app.command()
@_options(_JOB_OPTIONS + _DERIVATIVE_OPTIONS)
@click.option("--fn2", "function2", help="Second function (product, quotient)")
@click.option("--rules", help="Comma separated rules, 'product' or 'all'")
@click.option("--gamma", type=float, help="Constant of the scaling rule")
@click.option("--alpha", type=float, help="Exponent of p = t^alpha (self-similar)")
@click.option("--beta", type=float, help="Order of c*t^beta (self-similar)")
@click.option("--c", type=float, help="Constant of c*t^beta (self-similar)")
def verify(config_path: Optional[str], verbose: int, **options: Any) -> None:
    """Check the calculus rules against direct evaluation"""
    _configure_logging(verbose)
    _execute("verify", options["output"], lambda: _job_data(config_path, **options))


@app.command()
@_options(_JOB_OPTIONS)
def classify(config_path: Optional[str], verbose: int, **options: Any) -> None:
    """Jump operators and classification of points"""
    _configure_logging(verbose)
    _execute("classify", options["output"], lambda: _job_data(config_path, **options))


@app.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--format", "output", type=click.Choice(["csv", "json"]), help="Output format"
)
@click.option("-v", "--verbose", count=True, help="Log to stderr, repeat for more")
def run(config_path: str, output: Optional[str], verbose: int) -> None:
    """Run the command named in a JSON job file"""
    _configure_logging(verbose)
    _execute(None, output, lambda: _job_data(config_path, output=output))
