import logging
import sys
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import structlog
import typer
from prometheus_client import REGISTRY, write_to_textfile

from ..expansion import decompose, expansion_error, log_spaced_terms
from ..greens import HVector, Piecewise, green_grid, resolve, verify_resolvent
from ..problem import ProblemConfig, load_config, require_valid, validate
from ..spectrum import eigenpairs, scan
from .examples import EXAMPLES, NOTES, example_config
from .output import csv_text, emit, heatmap_svg, json_text, manifest_for
from .verify import run_suite

structlog.configure(
    processors=[
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.stdlib.add_log_level,
        structlog.processors.JSONRenderer()
    ],
    context_class=dict,
    logger_factory=structlog.stdlib.LoggerFactory(),
    wrapper_class=structlog.stdlib.BoundLogger,
    cache_logger_on_first_use=True,
)
logger = structlog.get_logger()

app = typer.Typer(
    name="slgreen",
    help="Spectral data and Green's functions of Sturm-Liouville problems with transmission conditions.",
    add_completion=False,
    no_args_is_help=True,
)


class Format(str, Enum):
    csv = "csv"
    json = "json"
    svg = "svg"


ConfigOption = typer.Option(..., "--config", "-c", help="JSON problem configuration.")
OutOption = typer.Option(None, "--out", "-o", help="Output file; stdout when omitted.")


def _range(value: str) -> Tuple[float, float]:
    try:
        lo, hi = (float(part) for part in value.split(":"))
    except ValueError:
        raise typer.BadParameter(f"expected LO:HI, got {value!r}")
    if not lo < hi:
        raise typer.BadParameter(f"range {value!r} must satisfy LO < HI")
    return lo, hi


def _cells(bounds: Tuple[float, float], grid: Optional[int]) -> int:
    if grid is not None:
        if grid < 2:
            raise typer.BadParameter("--grid needs at least 2 cells")
        return grid
    return max(2, int(round(40 * (bounds[1] - bounds[0]))))


def _formats(fmt: Format, allowed: Tuple[Format, ...]):
    if fmt not in allowed:
        raise typer.BadParameter(f"--format {fmt.value} not available here; use one of "
                                 f"{', '.join(f.value for f in allowed)}")


def _spectral(lam: float, mu_squared: bool) -> float:
    return lam * lam if mu_squared else lam


def _load(path: Path) -> ProblemConfig:
    config = load_config(path)
    require_valid(config)
    return config


def _report_path(out: Optional[Path]) -> Optional[Path]:
    return None if out is None else out.with_name(out.name + ".report.json")


def _emit_report(text: str, out: Optional[Path]):
    """JSON companion of a CSV body: beside the CSV file, or on stderr."""
    target = _report_path(out)
    if target is None:
        sys.stderr.write(text)
    else:
        target.write_bytes(text.encode("utf-8"))


@app.callback()
def main_options(
    ctx: typer.Context,
    log_level: str = typer.Option("WARNING", "--log-level", help="Standard logging level for stderr logs."),
    metrics: Optional[Path] = typer.Option(None, "--metrics", help="Write Prometheus counters here on exit."),
):
    level = logging.getLevelName(log_level.upper())
    if not isinstance(level, int):
        raise typer.BadParameter(f"unknown log level {log_level!r}", param_hint="--log-level")
    logging.basicConfig(stream=sys.stderr, level=level, format="%(message)s", force=True)
    if metrics is not None:
        ctx.call_on_close(lambda: write_to_textfile(str(metrics), REGISTRY))


@app.command("validate")
def cmd_validate(config_path: Path = ConfigOption, out: Optional[Path] = OutOption) -> int:
    """Check the problem's standing assumptions."""
    config = load_config(config_path)
    report = validate(config)
    for check in report.warnings:
        logger.warning("Assumption not met", check=check.name, detail=check.message, mode=report.mode)
    emit(json_text(report), out, manifest_for("validate", config))
    return 0 if report.ok else 2


@app.command("eigs")
def cmd_eigs(
    config_path: Path = ConfigOption,
    lam_range: str = typer.Option(..., "--range", help="Spectral window LO:HI."),
    grid: Optional[int] = typer.Option(None, "--grid", help="Scan cells; 40 per unit of λ by default."),
    tol: float = typer.Option(1e-10, "--tol", help="Root tolerance."),
    out: Optional[Path] = OutOption,
    fmt: Format = typer.Option(Format.csv, "--format"),
) -> int:
    """Eigenvalues in a window, as refined zeros of ω."""
    _formats(fmt, (Format.csv, Format.json))
    bounds = _range(lam_range)
    config = _load(config_path)
    logger.info("Scanning for eigenvalues", lo=bounds[0], hi=bounds[1])
    evs = scan(config, bounds[0], bounds[1], _cells(bounds, grid), tol)
    rows = [(i, ev.lam, ev.residual, ev.omega_derivative, ev.flag) for i, ev in enumerate(evs)]
    if fmt is Format.csv:
        text = csv_text(("index", "lambda", "residual", "omega_derivative", "flag"), rows)
    else:
        text = json_text({"eigenvalues": [
            {"index": i, "lambda": ev.lam, "residual": ev.residual, "omega_derivative": ev.omega_derivative,
             "flag": ev.flag, "bracket": list(ev.bracket)}
            for i, ev in enumerate(evs)
        ]})
    emit(text, out, manifest_for("eigs", config))
    return 0


@app.command("green")
def cmd_green(
    config_path: Path = ConfigOption,
    lam: float = typer.Option(..., "--lambda", help="Spectral parameter."),
    nx: int = typer.Option(128, "--nx", min=8),
    ny: int = typer.Option(128, "--ny", min=8),
    band: Optional[float] = typer.Option(None, "--band", help="Half-width of the band kept clear around c."),
    mu_squared: bool = typer.Option(False, "--mu-squared", help="Read --lambda as μ and use λ = μ²."),
    out: Optional[Path] = OutOption,
    fmt: Format = typer.Option(Format.csv, "--format"),
) -> int:
    """Green's function on an (nx+1) x (ny+1) grid."""
    config = _load(config_path)
    lam = _spectral(lam, mu_squared)
    grid = green_grid(config, lam, nx, ny, band)
    if fmt is Format.svg:
        text = heatmap_svg(grid, config.domain.c)
    elif fmt is Format.json:
        text = json_text({"lambda": grid.lam, "xs": grid.xs.tolist(), "ys": grid.ys.tolist(),
                          "values": grid.values.tolist()})
    else:
        rows = ((x, y, grid.values[i, j]) for i, x in enumerate(grid.xs) for j, y in enumerate(grid.ys))
        text = csv_text(("x", "y", "G"), rows)
    notes = [f"λ = μ² = {lam!r}"] if mu_squared else []
    emit(text, out, manifest_for("green", config, notes))
    return 0


@app.command("resolve")
def cmd_resolve(
    config_path: Path = ConfigOption,
    lam: float = typer.Option(..., "--lambda"),
    u_minus: str = typer.Option("0", "--u-minus", help="Right-hand side on [a, c)."),
    u_plus: str = typer.Option("0", "--u-plus", help="Right-hand side on (c, b]."),
    u1: float = typer.Option(0.0, "--u1"),
    u2: float = typer.Option(0.0, "--u2"),
    mu_squared: bool = typer.Option(False, "--mu-squared"),
    out: Optional[Path] = OutOption,
    fmt: Format = typer.Option(Format.csv, "--format"),
) -> int:
    """Solve (λ - ℓ)Y = u with boundary data u1, u2."""
    _formats(fmt, (Format.csv, Format.json))
    config = _load(config_path)
    lam = _spectral(lam, mu_squared)
    solution = resolve(config, lam, u_minus, u_plus, u1, u2)
    residuals = verify_resolvent(config, lam, solution, u_minus, u_plus, u1, u2)
    if residuals.worst > 1e-4:
        logger.warning("Resolvent residuals above tolerance", **residuals.model_dump())
    f = solution.function
    rows: List[tuple] = []
    for side in (f.left, f.right):
        rows.extend(zip(side.xs, side.y, side.yp))
    report = {"lambda": lam, "f1": solution.f1, "f2": solution.f2, "residuals": residuals.model_dump()}
    manifest = manifest_for("resolve", config)
    if fmt is Format.json:
        report["rows"] = [list(row) for row in rows]
        emit(json_text(report), out, manifest)
    else:
        emit(csv_text(("x", "Y", "Yprime"), rows), out, manifest)
        _emit_report(json_text(report), out)
    return 0


@app.command("expand")
def cmd_expand(
    config_path: Path = ConfigOption,
    lam_range: str = typer.Option(..., "--range"),
    f_minus: str = typer.Option(..., "--f-minus", help="Function on [a, c)."),
    f_plus: str = typer.Option(..., "--f-plus", help="Function on (c, b]."),
    grid: Optional[int] = typer.Option(None, "--grid"),
    tol: float = typer.Option(1e-10, "--tol"),
    terms: Optional[int] = typer.Option(None, "--terms", help="Expansion length; all eigenpairs found by default."),
    grid_m: int = typer.Option(401, "--points", help="Points for the uniform error."),
    raw_l2: bool = typer.Option(False, "--raw-l2", help="Zero boundary entries instead of the traces."),
    out: Optional[Path] = OutOption,
    fmt: Format = typer.Option(Format.csv, "--format"),
) -> int:
    """Eigenfunction expansion of a piecewise function."""
    _formats(fmt, (Format.csv, Format.json))
    bounds = _range(lam_range)
    config = _load(config_path)
    pairs = eigenpairs(config, scan(config, bounds[0], bounds[1], _cells(bounds, grid), tol))
    n = len(pairs) if terms is None else terms
    if n < 1:
        raise typer.BadParameter("no eigenvalues found in --range")
    F = HVector.from_function(config, Piecewise.from_expressions(config, f_minus, f_plus), raw=raw_l2)
    result = decompose(config, pairs, F, n, grid_m)
    report = {
        "parseval": result.parseval.model_dump(mode="json"),
        "uniform_error": [{"terms": k, "sup_error": e}
                          for k, e in expansion_error(config, pairs, F, n, grid_m, log_spaced_terms(n))],
        "boundary_entries": "zero" if raw_l2 else "traces",
    }
    rows = [(i + 1, pair.lam, c, s)
            for i, (pair, c, s) in enumerate(zip(result.pairs, result.coefficients, result.parseval.partial_sums))]
    manifest = manifest_for("expand", config)
    if fmt is Format.json:
        report["terms"] = [dict(zip(("n", "lambda", "coefficient", "partial_sum"), row)) for row in rows]
        emit(json_text(report), out, manifest)
    else:
        emit(csv_text(("n", "lambda", "coefficient", "partial_sum"), rows), out, manifest)
        _emit_report(json_text(report), out)
    return 0


@app.command("verify")
def cmd_verify(
    config_path: Path = ConfigOption,
    lam_range: str = typer.Option("-10:60", "--range"),
    grid: Optional[int] = typer.Option(None, "--grid"),
    tol: float = typer.Option(1e-10, "--tol"),
    out: Optional[Path] = OutOption,
) -> int:
    """Run the invariant suite; exit 0 only if every check passes."""
    bounds = _range(lam_range)
    config = _load(config_path)
    report = run_suite(config, bounds[0], bounds[1], _cells(bounds, grid), tol)
    for check in report.checks:
        if check.status == "fail":
            logger.error("Check failed", check=check.name, value=check.value, threshold=check.threshold,
                         reason=check.reason)
    emit(json_text(report), out, manifest_for("verify", config))
    return 0 if report.passed else 3


@app.command("example")
def cmd_example(
    name: str = typer.Argument(..., help=f"One of {', '.join(sorted(EXAMPLES))}."),
    out: Optional[Path] = OutOption,
) -> int:
    """Write a built-in configuration."""
    try:
        config = example_config(name)
    except KeyError as e:
        raise typer.BadParameter(e.args[0], param_hint="NAME")
    text = json_text(config)
    emit(text, out, manifest_for("example", config, NOTES[name.upper()]))
    return 0
