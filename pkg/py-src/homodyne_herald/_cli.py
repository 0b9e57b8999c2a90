__all__ = (
    "EXIT_CONFIG",
    "EXIT_FAILURE",
    "EXIT_NUMERICAL",
    "EXIT_OK",
    "build_parser",
    "main",
    "run_command",
)

import argparse
import logging
import math
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np
import polars as pl
from rich.console import Console
from rich.logging import RichHandler

from ._asymptotic import blob_markers, branch_masses, predicted_phase, revival_time
from ._config import Command, OutputFormat, RunConfig, resolve_config
from ._dynamics import evolve
from ._errors import ConfigError, HeraldError, NumericalError
from ._hilbert import QubitLabel, tail_mass
from ._observables import (
    build_quadrature_basis,
    default_phase_space_grid,
    p_gg_trace,
    q_function,
    quadrature_mean_variance,
    quadrature_slice,
)
from ._output import (
    OutputBundle,
    distribution_chart,
    heatmap_chart,
    line_chart,
    scatter_chart,
    write_output,
)
from ._protocol import (
    TargetState,
    grid_convergence_delta,
    plateau_time,
    sample_shots,
    success_by_phase,
    success_probability,
    width_analysis,
)
from ._version import __version__

logger = logging.getLogger(__name__)
console = Console()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CONVERGENCE_PROBES = 5
CONVERGENCE_WARNING = 1e-4

_HELP = {
    Command.Revival: "P_gg(t) collapse and revival trace",
    Command.QFunc: "field Husimi Q function at one time",
    Command.XDist: "quadrature distribution by qubit channel at one time",
    Command.Ps: "heralding success probability P_s(t)",
    Command.Herald: "Monte-Carlo homodyne shots with per-shot fidelity",
    Command.Width: "plateau widths against nbar and the 1/sqrt(nbar) fit",
}


def _subtitle(config: RunConfig) -> str:
    params = config.system_params()
    return (
        f"nbar={', '.join(f'{n:g}' for n in config.nbar)} theta={config.theta:g} "
        f"omega={params.omega:g} lambda1={params.lambda1:g} lambda2={params.lambda2:g}"
    )


def _single_time(config: RunConfig) -> float:
    if config.time is not None:
        return config.time
    return 3 * math.pi / (2 * config.omega)


def _markers_frame(config: RunConfig, t: float) -> pl.DataFrame:
    markers = blob_markers(config.system_params(), config.prep(), t)
    return pl.DataFrame({
        "k": [marker.k for marker in markers],
        "re": [marker.alpha.real for marker in markers],
        "im": [marker.alpha.imag for marker in markers],
        "x": [marker.x for marker in markers],
    })


def run_revival(config: RunConfig) -> OutputBundle:
    params, prep = config.system_params(), config.prep()
    times = config.times()
    frame = pl.DataFrame({"t": times, "p_gg": p_gg_trace(params, prep, times)})
    return OutputBundle(
        data=frame,
        diagnostics={
            "n_max": prep.n_max,
            "tail_mass": tail_mass(prep),
            "revival_time": revival_time(params, prep),
            "analytic": params.is_symmetric_resonant(),
        },
        chart=line_chart(
            frame,
            "t",
            ["p_gg"],
            title="Ground-state population",
            subtitle=_subtitle(config),
        ),
    )


def run_qfunc(config: RunConfig) -> OutputBundle:
    params, prep = config.system_params(), config.prep()
    t = _single_time(config)
    grid = default_phase_space_grid(prep, config.qpoints)
    q = q_function(evolve(params, prep, t), grid)
    alphas = grid.alphas
    frame = pl.DataFrame({
        "re": alphas.real.ravel(),
        "im": alphas.imag.ravel(),
        "q": q.ravel(),
    })
    markers = _markers_frame(config, t)
    return OutputBundle(
        data=frame,
        extras={"markers": markers},
        diagnostics={
            "t": t,
            "n_max": prep.n_max,
            "tail_mass": tail_mass(prep),
            "normalisation": float(q.sum() * grid.cell_area / math.pi),
        },
        chart=heatmap_chart(
            frame,
            markers,
            title=f"Husimi Q at t={t:.4f}",
            subtitle=_subtitle(config),
        ),
    )


def run_xdist(config: RunConfig) -> OutputBundle:
    params, prep = config.system_params(), config.prep()
    t = _single_time(config)
    basis = build_quadrature_basis(prep.n_max, config.xrange, config.dx)
    quadrature = quadrature_slice(evolve(params, prep, t), basis)
    densities = quadrature.channel_densities
    frame = pl.DataFrame({
        "x": quadrature.grid,
        "p_total": quadrature.p_total,
        **{f"p_{label!s}": densities[label] for label in QubitLabel},
        "p_sym": quadrature.p_sym,
        "p_anti": quadrature.p_anti,
    })
    markers = _markers_frame(config, t)
    mean, variance = quadrature_mean_variance(quadrature)
    diagnostics = {
        "t": t,
        "n_max": prep.n_max,
        "tail_mass": tail_mass(prep),
        "normalisation": quadrature.total_probability(),
        "mean": mean,
        "variance": variance,
    }
    if params.is_symmetric_resonant() and prep.nbar > 0:
        masses = branch_masses(quadrature, blob_markers(params, prep, t))
        diagnostics["branch_masses"] = {str(k): mass for k, mass in masses.items()}
    return OutputBundle(
        data=frame,
        extras={"markers": markers.select("k", "x")},
        diagnostics=diagnostics,
        chart=distribution_chart(
            frame,
            ["p_total", "p_gg", "p_ee", "p_sym", "p_anti"],
            markers,
            title=f"Quadrature distribution at t={t:.4f}",
            subtitle=_subtitle(config),
        ),
    )


def run_ps(config: RunConfig) -> OutputBundle:
    params, prep = config.system_params(), config.prep()
    times = config.times()
    f_min = config.fmin[0]
    basis = build_quadrature_basis(prep.n_max, config.xrange, config.dx)
    columns: dict[str, np.ndarray] = {"t": times}
    curves = success_by_phase(params, prep, config.phi, f_min, times, basis)
    for phi, curve in zip(config.phi, curves, strict=True):
        name = "p_s" if len(config.phi) == 1 else f"p_s_phi_{phi:.6g}"
        columns[name] = curve
    columns["p_gg"] = p_gg_trace(params, prep, times)
    frame = pl.DataFrame(columns)
    probes = times[np.linspace(0, times.size - 1, CONVERGENCE_PROBES).astype(int)]
    delta = grid_convergence_delta(
        params,
        prep,
        TargetState(config.phi[0]),
        f_min,
        probes,
        config.dx,
    )
    if delta > CONVERGENCE_WARNING:
        logger.warning("P_s moves by %.2e under grid refinement", delta)
    return OutputBundle(
        data=frame,
        diagnostics={
            "n_max": prep.n_max,
            "tail_mass": tail_mass(prep),
            "f_min": f_min,
            "grid_convergence_delta": delta,
            "probe_times": probes,
        },
        chart=line_chart(
            frame,
            "t",
            [name for name in columns if name != "t"],
            title=f"Heralding success probability, F_min={f_min:g}",
            subtitle=_subtitle(config),
        ),
    )


def run_herald(config: RunConfig) -> OutputBundle:
    params, prep = config.system_params(), config.prep()
    target = TargetState(config.phi[0])
    f_min = config.fmin[0]
    if config.time is not None:
        t = config.time
    else:
        t = plateau_time(params, prep, target.phi, config.near)
    basis = build_quadrature_basis(prep.n_max, config.xrange, config.dx)
    quadrature = quadrature_slice(evolve(params, prep, t), basis)
    run = sample_shots(quadrature, config.seed, config.shots, target, f_min)
    frame = pl.DataFrame({
        "shot": np.arange(run.shots),
        "x": run.x,
        "fidelity": run.fidelity,
        "success": run.success,
        "probability_density": run.probability_density,
    })
    p_s = success_probability(params, prep, target, f_min, [t], basis).p_s[0]
    summary = {
        "t": t,
        "phi": target.phi,
        "f_min": f_min,
        "shots": run.shots,
        "successes": int(run.success.sum()),
        "success_rate": run.success_rate,
        "mean_success_fidelity": run.mean_success_fidelity,
        "p_s": float(p_s),
    }
    if params.is_symmetric_resonant() and prep.nbar > 0:
        summary["predicted_phase"] = predicted_phase(params, prep, t)
    logger.info(
        "%d of %d shots heralded (P_s=%.4f)",
        summary["successes"],
        run.shots,
        p_s,
    )
    return OutputBundle(
        data=frame,
        extras={"summary": pl.DataFrame([summary])},
        diagnostics={
            "n_max": prep.n_max,
            "tail_mass": tail_mass(prep),
            "seed": config.seed,
        },
        chart=scatter_chart(
            frame,
            "x",
            "fidelity",
            "success",
            title=f"Heralded shots at t={t:.4f}",
            subtitle=_subtitle(config),
        ),
    )


def run_width(config: RunConfig) -> OutputBundle:
    params = config.system_params()
    preps = config.preps()
    result = width_analysis(
        params,
        preps,
        config.fmin,
        TargetState(config.phi[0]),
        near=config.near,
        level=config.level,
        points=config.tsteps,
        dx=config.dx,
    )
    rows = []
    for row, prep in enumerate(preps):
        for column, f_min in enumerate(result.f_min):
            rows.append({
                "nbar": prep.nbar,
                "f_min": float(f_min),
                "center": float(result.centers[row]),
                "width": float(result.widths[row, column]),
                "ideal_width": float(result.ideal[column]),
                "excess": float(result.excess[row, column]),
                "k_fit": float(result.k_fit[column]),
                "status": result.status[row][column],
            })
    frame = pl.DataFrame(rows).with_columns(
        inv_sqrt_nbar=1 / pl.col("nbar").sqrt(),
        f_min_label=pl.col("f_min").cast(pl.String),
    )
    return OutputBundle(
        data=frame.drop("inv_sqrt_nbar", "f_min_label"),
        diagnostics={
            "k_fit": dict(zip(result.f_min.tolist(), result.k_fit.tolist(), strict=True)),
            "r_squared": dict(
                zip(result.f_min.tolist(), result.r_squared.tolist(), strict=True),
            ),
            "level": config.level,
            "tail_mass": {str(prep.nbar): tail_mass(prep) for prep in preps},
        },
        chart=scatter_chart(
            frame.drop_nans(subset=["excess"]),
            "inv_sqrt_nbar",
            "excess",
            "f_min_label",
            title="Plateau width excess over the ideal width",
            subtitle=_subtitle(config),
        ),
    )


RUNNERS: dict[Command, Callable[[RunConfig], OutputBundle]] = {
    Command.Revival: run_revival,
    Command.QFunc: run_qfunc,
    Command.XDist: run_xdist,
    Command.Ps: run_ps,
    Command.Herald: run_herald,
    Command.Width: run_width,
}


def run_command(config: RunConfig) -> list[Path]:
    return write_output(RUNNERS[config.command](config), config)


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value or YAML settings file")
    common.add_argument("--nbar", nargs="+", help="mean photon number(s)")
    common.add_argument("--theta", help="coherent phase, alpha = sqrt(nbar) e^{-i theta}")
    common.add_argument("--omega", help="field frequency")
    common.add_argument("--lambda", dest="lambda", help="coupling for both qubits")
    common.add_argument("--e1", help="qubit 1 energy (default omega/2)")
    common.add_argument("--e2", help="qubit 2 energy (default omega/2)")
    common.add_argument("--lambda1", help="qubit 1 coupling")
    common.add_argument("--lambda2", help="qubit 2 coupling")
    common.add_argument("--tmin")
    common.add_argument("--tmax")
    common.add_argument("--tsteps")
    common.add_argument("--time", help="evaluation time for single-time commands")
    common.add_argument("--fmin", nargs="+", help="fidelity threshold(s)")
    common.add_argument("--phi", nargs="+", help="target phase(s)")
    common.add_argument("--dx", help="quadrature grid spacing")
    common.add_argument("--xrange", help="quadrature grid half-width")
    common.add_argument("--nmax", help="Fock truncation (default from the tail bound)")
    common.add_argument("--seed")
    common.add_argument("--shots")
    common.add_argument("--qpoints", help="Q-function grid points per axis")
    common.add_argument("--near", help="plateau search anchor time")
    common.add_argument("--level", help="width level as a fraction of the peak")
    common.add_argument("--format", choices=[fmt.value for fmt in OutputFormat])
    common.add_argument("--out", help="output path")
    common.add_argument("-v", "--verbose", action="count", default=0)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homodyne-herald",
        description="Two-qubit Tavis-Cummings dynamics and homodyne heralding",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)
    common = _common_arguments()
    for command in Command:
        commands.add_parser(command.value, parents=[common], help=_HELP[command])
    return parser


def _configure_logging(verbosity: int) -> None:
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbosity, 2)]
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in {"command", "config", "verbose"}
    }
    try:
        config = resolve_config(args.command, overrides, args.config)
        written = run_command(config)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)  # noqa: TRY400
        return EXIT_CONFIG
    except NumericalError as exc:
        logger.error("numerical error: %s", exc)  # noqa: TRY400
        return EXIT_NUMERICAL
    except HeraldError as exc:
        logger.error("%s", exc)  # noqa: TRY400
        return EXIT_FAILURE
    for path in written:
        console.print(f"[bold green]wrote[/] {path}")
    return EXIT_OK
