"""
Command-line interface for defect-control.

Usage:
    defect-control solve --config experiments/linear_mu1e-4.conf
    defect-control solve-constrained --config experiments/constrained.conf --out runs/constrained
    defect-control continuation --config experiments/continuation_affine.conf --lambda-sweep 1,10,100
    defect-control check --phi "shifted_cubic"

Any configuration key can be overridden on the command line as ``--key value``.
"""

import json
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from defect_control import __version__
from defect_control.config import RunConfig, load_run_config, parse_overrides
from defect_control.errors import (
    DefectControlError,
    DegenerateDirectionError,
    SolverIterationLimitError,
)
from defect_control.reporting import STATUS_CONVERGED, write_summary

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2
EXIT_ADVISORY = 3

OVERRIDE_SETTINGS = {"allow_extra_args": True, "ignore_unknown_options": True}

app = typer.Typer(
    name="defect-control",
    help="Defect-regularized optimal control of elliptic equations on the unit square",
    add_completion=False,
)
console = Console()


def _print_json(data: dict[str, Any]) -> None:
    """Print JSON output to stdout."""
    print(json.dumps(data, indent=2))


def _fail(message: str, output_format: str, code: str = "INVALID_INPUT", exit_code: int = EXIT_INVALID) -> None:
    """Report an error in the selected format and exit."""
    if output_format == "json":
        _print_json({"status": "error", "message": message, "code": code})
    else:
        console.print(f"[bold red]Error:[/bold red] {message}")
    raise typer.Exit(exit_code)


def _setup_logging(verbose: bool, debug: bool) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _load_config(ctx: typer.Context, config: Optional[Path], out: Optional[Path]) -> RunConfig:
    overrides = parse_overrides(list(ctx.args))
    if out is not None:
        overrides["output_dir"] = str(out)
    return load_run_config(config, overrides)


def _exit_code(status: str) -> int:
    return EXIT_OK if status == STATUS_CONVERGED else EXIT_NOT_CONVERGED


def _emit(summary: dict[str, Any], title: str, rows: list[tuple[str, str]], output_format: str) -> None:
    if output_format == "json":
        _print_json({"status": "success", **summary})
        return
    table = Table(title=title, show_header=False)
    table.add_column("Quantity", style="cyan")
    table.add_column("Value")
    for name, value in rows:
        table.add_row(name, value)
    console.print(table)
    files = summary.get("files", {})
    if files:
        console.print(f"[dim]Wrote {len(files)} files to {Path(next(iter(files.values()))).parent}[/dim]")


def _write_fields(out_dir: Path, **fields: Any) -> dict[str, str]:
    from defect_control.numerics.io import write_field_csv

    written = {}
    for name, field in fields.items():
        path = out_dir / f"{name}.csv"
        write_field_csv(path, field)
        written[name] = str(path)
    return written


def _run_guarded(output_format: str, body: Any) -> int:
    """Run ``body()`` and map library failures onto exit codes."""
    try:
        return int(body())
    except (SolverIterationLimitError, DegenerateDirectionError) as e:
        _fail(str(e), output_format, code="SOLVER_FAILURE", exit_code=EXIT_NOT_CONVERGED)
    except (DefectControlError, FileNotFoundError) as e:
        _fail(str(e), output_format)
    return EXIT_INVALID


# Shared option declarations
ConfigOption = typer.Option(None, "--config", "-c", help="Path to a key = value config file")
OutOption = typer.Option(None, "--out", "-o", help="Output directory (overrides output_dir)")
FormatOption = typer.Option("text", "--output-format", "-f", help="Output format: text or json")
VerboseOption = typer.Option(False, "--verbose", "-v", help="Log run progress")
DebugOption = typer.Option(False, "--debug", help="Log every iteration")


@app.command("solve", context_settings=OVERRIDE_SETTINGS)
def solve_command(
    ctx: typer.Context,
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    output_format: str = FormatOption,
    verbose: bool = VerboseOption,
    debug: bool = DebugOption,
) -> None:
    """
    Solve the unconstrained problem by steepest descent.

    Writes u.csv, v.csv, w.csv, log.csv and summary.json. Exit code 0 on
    convergence, 2 when the iteration limit is reached.
    """
    _setup_logging(verbose, debug)

    def body() -> int:
        from defect_control.model.defect import kkt_residual, state_residual
        from defect_control.solvers.descent import run_descent

        cfg = _load_config(ctx, config, out)
        spec = cfg.to_problem(constrained=False)
        K = cfg.stiffness(spec.grid)
        if output_format != "json":
            console.print(
                Panel(
                    f"[bold blue]solve[/bold blue] n={spec.grid.n} phi={spec.phi.describe()} "
                    f"mu={spec.mu:g} lambda={spec.lam:g}"
                )
            )

        state, report = run_descent(spec, cfg.descent_options(), cfg.initial_pair(spec.grid), K)
        kkt = kkt_residual(state.u, state.v, state.w, spec, K)

        out_dir = Path(cfg.output_dir)
        files = _write_fields(out_dir, u=state.u, v=state.v, w=state.w)
        files["log"] = str(report.write_csv(out_dir / "log.csv"))
        summary = {
            "command": "solve",
            "run_status": report.status,
            "iterations": state.iter,
            "cost": state.cost,
            "grad_norm": state.grad_norm,
            "residual_h1": state.residual_h1,
            "kkt_stationarity_u": kkt.stationarity_u,
            "kkt_stationarity_v": kkt.stationarity_v,
            "state_residual": state_residual(state.u, state.v, spec, K),
            "linear_solves": K.solve_count,
            "config": cfg.model_dump(by_alias=True),
            "files": files,
        }
        files["summary"] = str(out_dir / "summary.json")
        write_summary(out_dir / "summary.json", summary)

        _emit(
            summary,
            "Descent result",
            [
                ("Status", report.status),
                ("Iterations", str(state.iter)),
                ("Cost", f"{state.cost:.10g}"),
                ("|grad w|", f"{state.residual_h1:.6g}"),
                ("KKT residuals (u, v)", f"{kkt.stationarity_u:.3e}, {kkt.stationarity_v:.3e}"),
            ],
            output_format,
        )
        return _exit_code(report.status)

    raise typer.Exit(_run_guarded(output_format, body))


@app.command("solve-constrained", context_settings=OVERRIDE_SETTINGS)
def solve_constrained_command(
    ctx: typer.Context,
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    output_format: str = FormatOption,
    verbose: bool = VerboseOption,
    debug: bool = DebugOption,
) -> None:
    """
    Solve the constrained problem (u <= 0, lower_bound <= v <= upper_bound) with exponential barriers.

    Writes u.csv, v.csv, w.csv, cert_a.csv, cert_bm.csv, cert_bp.csv, log.csv
    and summary.json.
    """
    _setup_logging(verbose, debug)

    def body() -> int:
        from defect_control.solvers.barrier import constraint_violation, run_barrier, variational_gap

        cfg = _load_config(ctx, config, out)
        spec = cfg.to_problem(constrained=True)
        K = cfg.stiffness(spec.grid)
        if output_format != "json":
            console.print(
                Panel(
                    f"[bold blue]solve-constrained[/bold blue] n={spec.grid.n} "
                    f"phi={spec.phi.describe()} lambda={spec.lam:g}"
                )
            )

        state, mult, cert, report = run_barrier(
            spec, cfg.barrier_options(), cfg.initial_pair(spec.grid), K
        )
        violation_u, violation_v = constraint_violation(state.u, state.v, spec)

        out_dir = Path(cfg.output_dir)
        files = _write_fields(
            out_dir,
            u=state.u,
            v=state.v,
            w=state.w,
            cert_a=cert.state,
            cert_bm=cert.lower,
            cert_bp=cert.upper,
        )
        files["log"] = str(report.write_csv(out_dir / "log.csv"))
        summary = {
            "command": "solve-constrained",
            "run_status": report.status,
            "outer_iterations": len(report.records),
            "inner_iterations": int(sum(report.column("inner_iters"))),
            "cost": report.records[-1].cost,
            "residual_h1": state.residual_h1,
            "max_u": float(np.max(state.u.values)),
            "min_v": float(np.min(state.v.values)),
            "max_v": float(np.max(state.v.values)),
            "max_violation_u": violation_u,
            "max_violation_v": violation_v,
            "certificates_positive": [cert.p_state, cert.p_lower, cert.p_upper],
            "certificates_absolute": [cert.abs_state, cert.abs_lower, cert.abs_upper],
            "variational_gap": variational_gap(state.v, state.w, spec),
            "multiplier_range": [
                float(min(np.min(m.values) for m in (mult.a, mult.b_lower, mult.b_upper))),
                float(max(np.max(m.values) for m in (mult.a, mult.b_lower, mult.b_upper))),
            ],
            "config": cfg.model_dump(by_alias=True),
            "files": files,
        }
        files["summary"] = str(out_dir / "summary.json")
        write_summary(out_dir / "summary.json", summary)

        _emit(
            summary,
            "Barrier result",
            [
                ("Status", report.status),
                ("Outer iterations", str(summary["outer_iterations"])),
                ("Cost", f"{summary['cost']:.10g}"),
                ("max u", f"{summary['max_u']:.3e}"),
                ("v range", f"[{summary['min_v']:.4g}, {summary['max_v']:.4g}]"),
                ("|Certificates| (a, b-, b+)", ", ".join(f"{c:.2e}" for c in summary["certificates_absolute"])),
            ],
            output_format,
        )
        return _exit_code(report.status)

    raise typer.Exit(_run_guarded(output_format, body))


@app.command("continuation", context_settings=OVERRIDE_SETTINGS)
def continuation_command(
    ctx: typer.Context,
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    output_format: str = FormatOption,
    verbose: bool = VerboseOption,
    debug: bool = DebugOption,
) -> None:
    """
    Sweep lambda over lambda_sweep and compare with the classical solution.

    The problem is constrained when both bounds are configured. Writes
    continuation.csv and summary.json.
    """
    _setup_logging(verbose, debug)

    def body() -> int:
        from defect_control.numerics.fields import l2_norm
        from defect_control.study.continuation import run_continuation

        cfg = _load_config(ctx, config, out)
        constrained = cfg.lower_bound is not None and cfg.upper_bound is not None
        spec = cfg.to_problem(constrained=constrained)
        K = cfg.stiffness(spec.grid)

        result = run_continuation(
            spec,
            cfg.lambda_sweep,
            cfg.descent_options(),
            barrier_opts=cfg.barrier_options(),
            independent=cfg.independent,
            workers=cfg.workers,
            K=K,
        )

        out_dir = Path(cfg.output_dir)
        csv_path = result.write_csv(out_dir / "continuation.csv")
        summary = {
            "command": "continuation",
            "run_status": STATUS_CONVERGED if result.all_converged else "incomplete",
            "lambdas": result.lambdas,
            "statuses": [point.status for point in result.points],
            "residual_h1": result.column("residual_h1"),
            "weighted_residual": result.column("weighted_residual"),
            "state_residual": result.column("state_residual"),
            "successive_u_distance": result.successive_u_distances(),
            "dist_u_oracle": result.column("dist_u_oracle"),
            "dist_v_oracle": result.column("dist_v_oracle"),
            "oracle_u_norm": None if result.oracle is None else l2_norm(result.oracle[0]),
            "config": cfg.model_dump(by_alias=True),
            "files": {"continuation": str(csv_path), "summary": str(out_dir / "summary.json")},
        }
        write_summary(out_dir / "summary.json", summary)

        if output_format == "json":
            _print_json({"status": "success", **summary})
        else:
            table = Table(title="Lambda continuation")
            table.add_column("lambda", justify="right")
            table.add_column("status")
            table.add_column("|grad w|", justify="right")
            table.add_column("lam |w|^2", justify="right")
            table.add_column("|u - u_oracle|", justify="right")
            for point in result.points:
                table.add_row(
                    f"{point.lam:g}",
                    point.status,
                    f"{point.residual_h1:.4e}",
                    f"{point.weighted_residual:.4e}",
                    "-" if point.dist_u_oracle is None else f"{point.dist_u_oracle:.4e}",
                )
            console.print(table)
        return EXIT_OK if result.all_converged else EXIT_NOT_CONVERGED

    raise typer.Exit(_run_guarded(output_format, body))


@app.command("check", context_settings=OVERRIDE_SETTINGS)
def check_command(
    ctx: typer.Context,
    config: Optional[Path] = ConfigOption,
    output_format: str = FormatOption,
    verbose: bool = VerboseOption,
    debug: bool = DebugOption,
) -> None:
    """
    Check the structural hypotheses on phi.

    Exit code 0 when an affine witness l with (l(u) - phi(u)) u bounded above
    is found, 3 when none is (advisory).
    """
    _setup_logging(verbose, debug)

    def body() -> int:
        from defect_control.model.hypotheses import check_monotone, find_existence_witness
        from defect_control.model.nonlinearity import Nonlinearity

        cfg = _load_config(ctx, config, None)
        phi = Nonlinearity.parse(cfg.phi)
        report = find_existence_witness(phi)
        monotone = check_monotone(phi)

        summary = {
            "command": "check",
            "phi": phi.describe(),
            "existence_holds": report.holds,
            "witness_slope": report.slope,
            "witness_intercept": report.intercept,
            "bound": report.max_value,
            "bounded_at_infinity": report.bounded_at_infinity,
            "monotone": monotone,
        }
        if output_format == "json":
            _print_json({"status": "success", **summary})
        else:
            verdict = "[green]holds[/green]" if report.holds else "[yellow]fails[/yellow]"
            console.print(f"Existence hypothesis for phi={phi.describe()}: {verdict}")
            if report.holds:
                console.print(
                    f"  witness l(u) = {report.slope:g} u + {report.intercept:g}, "
                    f"sup (l(u) - phi(u)) u = {report.max_value:.6g} on the sampled interval"
                )
            console.print(f"Monotone: {'[green]yes[/green]' if monotone else '[yellow]no[/yellow]'}")
        return EXIT_OK if report.holds else EXIT_ADVISORY

    raise typer.Exit(_run_guarded(output_format, body))


@app.command("version")
def version_command() -> None:
    """Print the installed version."""
    console.print(f"defect-control {__version__}")


def main() -> None:
    app()


if __name__ == "__main__":
    main()
