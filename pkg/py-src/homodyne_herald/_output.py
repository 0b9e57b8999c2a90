__all__ = (
    "OutputBundle",
    "distribution_chart",
    "heatmap_chart",
    "line_chart",
    "scatter_chart",
    "write_output",
)

import json
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import altair as alt
import numpy as np
import polars as pl

from ._config import OutputFormat, RunConfig
from ._errors import ConfigError

logger = logging.getLogger(__name__)

CHART_WIDTH = 720
CHART_HEIGHT = 420
HEATMAP_CELLS = 121


@dataclass(slots=True, frozen=True, eq=False)
class OutputBundle:
    """Main table, named side tables, diagnostics and the SVG figure of one run."""

    data: pl.DataFrame
    extras: dict[str, pl.DataFrame] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)
    chart: alt.TopLevelMixin | None = None


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    return value


def _frame_payload(frame: pl.DataFrame) -> dict[str, list[Any]]:
    return _plain(frame.to_dict(as_series=False))


def write_output(bundle: OutputBundle, config: RunConfig) -> list[Path]:
    path = config.output_path
    written = [path]
    if config.output_format is OutputFormat.Csv:
        bundle.data.write_csv(path, float_scientific=True, float_precision=11)
        for name, frame in bundle.extras.items():
            extra = path.with_name(f"{path.stem}_{name}{path.suffix}")
            frame.write_csv(extra, float_scientific=True, float_precision=11)
            written.append(extra)
    elif config.output_format is OutputFormat.Json:
        payload = {
            "config": _plain(config.as_dict()),
            "data": _frame_payload(bundle.data),
            **{name: _frame_payload(frame) for name, frame in bundle.extras.items()},
            "diagnostics": _plain(bundle.diagnostics),
        }
        path.write_text(
            json.dumps(payload, indent=2, allow_nan=False) + "\n",
            encoding="utf-8",
        )
    else:
        if bundle.chart is None:
            msg = f"{config.command.value} has no figure to write"
            raise ConfigError(msg)
        with alt.data_transformers.disable_max_rows():
            bundle.chart.save(path)
    for item in written:
        logger.info("wrote %s", item)
    return written


def _titled(chart: alt.TopLevelMixin, title: str, subtitle: str) -> alt.TopLevelMixin:
    return chart.properties(
        width=CHART_WIDTH,
        height=CHART_HEIGHT,
        title={"text": title, "subtitle": subtitle},
    )


def _line_layer(
    frame: pl.DataFrame,
    x: str,
    columns: Sequence[str],
    y_title: str,
) -> alt.Chart:
    long = frame.select(x, *columns).unpivot(
        index=x,
        on=list(columns),
        variable_name="series",
        value_name="value",
    )
    chart = (
        alt
        .Chart(long)
        .mark_line(strokeWidth=1.5)
        .encode(
            x=alt.X(f"{x}:Q", title=x),
            y=alt.Y("value:Q", title=y_title),
            color=alt.Color("series:N", scale=alt.Scale(scheme="dark2")),
        )
    )
    return chart


def line_chart(
    frame: pl.DataFrame,
    x: str,
    columns: Sequence[str],
    *,
    title: str,
    subtitle: str = "",
    y_title: str = "probability",
) -> alt.TopLevelMixin:
    return _titled(_line_layer(frame, x, columns, y_title), title, subtitle)


def distribution_chart(
    frame: pl.DataFrame,
    columns: Sequence[str],
    markers: pl.DataFrame,
    *,
    title: str,
    subtitle: str = "",
) -> alt.TopLevelMixin:
    lines = _line_layer(frame, "x", columns, "P(x)")
    rules = (
        alt
        .Chart(markers)
        .mark_rule(strokeDash=(4, 4), color="gray")
        .encode(x="x:Q", tooltip=["k:N", alt.Tooltip("x:Q", format=".3f")])
    )
    return _titled(alt.layer(lines, rules), title, subtitle)


def heatmap_chart(
    frame: pl.DataFrame,
    markers: pl.DataFrame,
    *,
    title: str,
    subtitle: str = "",
) -> alt.TopLevelMixin:
    """``frame`` holds ``re, im, q`` on a square grid; it is thinned for plotting."""
    kept = {}
    for column in ("re", "im"):
        axis = frame.get_column(column).unique().sort()
        stride = max(1, math.ceil(axis.len() / HEATMAP_CELLS))
        kept[column] = axis.gather_every(stride)
    step = float(kept["re"][1] - kept["re"][0]) if kept["re"].len() > 1 else 1.0
    cells = frame.filter(
        pl.col("re").is_in(kept["re"]) & pl.col("im").is_in(kept["im"]),
    ).with_columns(
        re_end=pl.col("re") + step,
        im_end=pl.col("im") + step,
    )
    heat = (
        alt
        .Chart(cells)
        .mark_rect()
        .encode(
            x=alt.X("re:Q", title="Re alpha"),
            x2="re_end:Q",
            y=alt.Y("im:Q", title="Im alpha"),
            y2="im_end:Q",
            color=alt.Color("q:Q", scale=alt.Scale(scheme="viridis"), title="Q"),
        )
    )
    points = (
        alt
        .Chart(markers)
        .mark_point(shape="cross", size=120, color="white", filled=True)
        .encode(x="re:Q", y="im:Q", tooltip=["k:N"])
    )
    return _titled(alt.layer(heat, points), title, subtitle)


def scatter_chart(
    frame: pl.DataFrame,
    x: str,
    y: str,
    color: str,
    *,
    title: str,
    subtitle: str = "",
) -> alt.TopLevelMixin:
    chart = (
        alt
        .Chart(frame)
        .mark_point(filled=True, size=60)
        .encode(
            x=alt.X(f"{x}:Q", title=x),
            y=alt.Y(f"{y}:Q", title=y),
            color=alt.Color(f"{color}:N", scale=alt.Scale(scheme="dark2")),
            tooltip=[f"{x}:Q", f"{y}:Q", f"{color}:N"],
        )
    )
    return _titled(chart, title, subtitle)
