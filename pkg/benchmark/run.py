import math
import platform
import time
from collections.abc import Callable
from pathlib import Path

import altair as alt
import cpuinfo
import homodyne_herald as hh
import numpy as np
import polars as pl

N = 5

FILE_PATH = Path(__file__).resolve().parent

PARAMS = hh.SystemParams.resonant()
REVIVAL_PREP = hh.CoherentPrep(nbar=30)
HERALD_PREP = hh.CoherentPrep(nbar=200)
REVIVAL_TIMES = np.linspace(0, 45, 4501)
PS_TIMES = np.linspace(0, 30, 301)


def benchmark(func: Callable, count: int) -> float:
    start = time.perf_counter()
    for _ in range(count):
        func()
    end = time.perf_counter()
    return end - start


def plot_benchmark(
    results: dict[str, float],
    save_path: Path,
    run_type: str,
) -> None:
    df = pl.DataFrame({
        "task": list(results.keys()),
        "exec_time": list(results.values()),
    }).sort("exec_time")

    df = df.with_columns(
        per_call=pl.col("exec_time") / N,
    )

    max_time = df.select(pl.max("exec_time")).item()

    chart = (
        alt
        .Chart(df)
        .mark_bar(cornerRadiusTopLeft=6, cornerRadiusTopRight=6)
        .encode(
            x=alt.X(
                "task:N",
                sort=None,
                title="Task",
                axis=alt.Axis(labelAngle=0),
            ),
            y=alt.Y(
                "exec_time:Q",
                title=f"Execution Time for {N} runs (seconds, lower=better)",
                scale=alt.Scale(domain=(0, max_time * 1.05)),
                axis=alt.Axis(grid=False),
            ),
            color=alt.Color("task:N", legend=None, scale=alt.Scale(scheme="dark2")),
            tooltip=[
                alt.Tooltip("task:N", title=""),
                alt.Tooltip("exec_time:Q", title="Execution Time (s)", format=".4f"),
                alt.Tooltip("per_call:Q", title="Per call (s)", format=".4f"),
            ],
        )
    )

    text = (
        chart
        .mark_text(
            align="center",
            baseline="bottom",
            dy=-2,
            fontSize=9,
            fontWeight="bold",
        )
        .transform_calculate(
            label='format(datum.per_call, ".4f") + "s per call"',
        )
        .encode(text="label:N")
    )

    cpu_info = cpuinfo.get_cpu_info()
    cpu_brand = cpu_info.get("brand_raw", "Unknown")
    py_version = f"{platform.python_version()} ({platform.system()} {platform.release()})"

    (chart + text).properties(
        width=800,
        height=600,
        title={
            "text": f"homodyne-herald {hh.__version__} ({run_type})",
            "subtitle": f"Python: {py_version} | CPU: {cpu_brand}",
        },
    ).save(save_path)


def run(run_count: int) -> None:
    basis = hh.build_quadrature_basis(HERALD_PREP.n_max)
    target = hh.TargetState(math.pi)
    plateau = hh.plateau_time(
        PARAMS,
        HERALD_PREP,
        math.pi,
        hh.revival_time(PARAMS, HERALD_PREP) / 4,
    )
    quadrature = hh.quadrature_slice(hh.evolve(PARAMS, HERALD_PREP, plateau), basis)
    grid = hh.default_phase_space_grid(HERALD_PREP)
    state = hh.evolve(PARAMS, HERALD_PREP, 3 * math.pi / 2)

    dynamics = {
        "P_gg analytic": lambda: hh.p_gg_trace(
            PARAMS,
            REVIVAL_PREP,
            REVIVAL_TIMES,
            hh.EvolutionMethod.Analytic,
        ),
        "P_gg numeric": lambda: hh.p_gg_trace(
            PARAMS,
            REVIVAL_PREP,
            REVIVAL_TIMES,
            hh.EvolutionMethod.Numeric,
        ),
    }

    heralding = {
        "Q function": lambda: hh.q_function(state, grid),
        "P_s sweep": lambda: hh.success_probability(
            PARAMS,
            HERALD_PREP,
            target,
            0.9,
            PS_TIMES,
            basis,
        ),
        "1e4 shots": lambda: hh.sample_shots(quadrature, 0, 10_000, target),
    }

    plot_benchmark(
        {name: benchmark(func, run_count) for name, func in dynamics.items()},
        FILE_PATH / "dynamics.svg",
        "dynamics",
    )
    plot_benchmark(
        {name: benchmark(func, run_count) for name, func in heralding.items()},
        FILE_PATH / "heralding.svg",
        "heralding",
    )


if __name__ == "__main__":
    run(N)
