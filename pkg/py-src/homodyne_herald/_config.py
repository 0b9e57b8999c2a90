__all__ = (
    "Command",
    "OutputFormat",
    "RunConfig",
    "load_config_file",
    "resolve_config",
)

import enum
import math
import os
import sys
from collections.abc import Callable, Mapping
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, final

import numpy as np
import yaml_rs
from numpy.typing import NDArray

from ._errors import ConfigError
from ._hilbert import CoherentPrep, SystemParams

if sys.version_info >= (3, 11):

    @final
    @enum.unique
    class Command(enum.StrEnum):
        Revival = "revival"
        QFunc = "qfunc"
        XDist = "xdist"
        Ps = "ps"
        Herald = "herald"
        Width = "width"

    @final
    @enum.unique
    class OutputFormat(enum.StrEnum):
        Csv = "csv"
        Json = "json"
        Svg = "svg"

else:

    @final
    @enum.unique
    class Command(str, enum.Enum):
        Revival = "revival"
        QFunc = "qfunc"
        XDist = "xdist"
        Ps = "ps"
        Herald = "herald"
        Width = "width"

    @final
    @enum.unique
    class OutputFormat(str, enum.Enum):
        Csv = "csv"
        Json = "json"
        Svg = "svg"


def _number(value: Any) -> float:
    if isinstance(value, bool):
        msg = f"expected a number, got {value!r}"
        raise TypeError(msg)
    return float(value)


def _integer(value: Any) -> int:
    if isinstance(value, bool):
        msg = f"expected an integer, got {value!r}"
        raise TypeError(msg)
    if isinstance(value, str):
        return int(value.strip())
    number = float(value)
    if not number.is_integer():
        msg = f"expected an integer, got {value!r}"
        raise ValueError(msg)
    return int(number)


def _numbers(value: Any) -> tuple[float, ...]:
    if isinstance(value, str):
        items: Any = [item for item in value.split(",") if item.strip()]
    elif isinstance(value, (list, tuple)):
        items = value
    else:
        items = [value]
    return tuple(_number(item) for item in items)


def _optional(parser: Callable[[Any], Any]) -> Callable[[Any], Any]:
    def parse(value: Any) -> Any:
        if value is None or (isinstance(value, str) and value.strip().lower() == "none"):
            return None
        return parser(value)

    return parse


# flag name -> (dataclass field, parser)
_KEYS: dict[str, tuple[str, Callable[[Any], Any]]] = {
    "nbar": ("nbar", _numbers),
    "theta": ("theta", _number),
    "omega": ("omega", _number),
    "lambda": ("coupling", _number),
    "e1": ("e1", _optional(_number)),
    "e2": ("e2", _optional(_number)),
    "lambda1": ("lambda1", _optional(_number)),
    "lambda2": ("lambda2", _optional(_number)),
    "tmin": ("tmin", _number),
    "tmax": ("tmax", _number),
    "tsteps": ("tsteps", _integer),
    "time": ("time", _optional(_number)),
    "fmin": ("fmin", _numbers),
    "phi": ("phi", _numbers),
    "dx": ("dx", _number),
    "xrange": ("xrange", _optional(_number)),
    "nmax": ("nmax", _optional(_integer)),
    "seed": ("seed", _integer),
    "shots": ("shots", _integer),
    "qpoints": ("qpoints", _integer),
    "near": ("near", _optional(_number)),
    "level": ("level", _number),
    "format": ("output_format", OutputFormat),
    "out": ("out", _optional(Path)),
}

_COMMAND_DEFAULTS: dict[Command, dict[str, Any]] = {
    Command.Revival: {"nbar": (30.0,), "tmin": 0.0, "tmax": 45.0, "tsteps": 4501},
    Command.QFunc: {"nbar": (200.0,)},
    Command.XDist: {"nbar": (200.0,)},
    Command.Ps: {
        "nbar": (200.0,),
        "tmin": 0.0,
        "tmax": 30.0,
        "tsteps": 3001,
        "phi": (0.0, math.pi, math.pi / 2, -math.pi / 2),
    },
    Command.Herald: {"nbar": (200.0,)},
    Command.Width: {
        "nbar": (25.0, 50.0, 100.0, 200.0, 300.0),
        "fmin": (0.55, 0.65, 0.75, 0.85, 0.95),
        "tsteps": 315,
    },
}

_MULTI_NBAR = frozenset({Command.Width})
_MULTI_PHI = frozenset({Command.Ps})
_MULTI_FMIN = frozenset({Command.Width})


@dataclass(slots=True, frozen=True)
class RunConfig:
    command: Command
    nbar: tuple[float, ...] = (30.0,)
    theta: float = 0.0
    omega: float = 1.0
    coupling: float = 1.0
    e1: float | None = None
    e2: float | None = None
    lambda1: float | None = None
    lambda2: float | None = None
    tmin: float = 0.0
    tmax: float = 45.0
    tsteps: int = 4501
    time: float | None = None
    fmin: tuple[float, ...] = (0.9,)
    phi: tuple[float, ...] = (math.pi,)
    dx: float = 0.02
    xrange: float | None = None
    nmax: int | None = None
    seed: int = 0
    shots: int = 1000
    qpoints: int = 301
    near: float | None = None
    level: float = 0.5
    output_format: OutputFormat = OutputFormat.Csv
    out: Path | None = None

    def __post_init__(self) -> None:  # noqa: C901
        problems = []
        if not self.nbar or any(not math.isfinite(n) or n < 0 for n in self.nbar):
            problems.append(f"nbar must be non-negative numbers, got {self.nbar}")
        if self.command not in _MULTI_NBAR and len(self.nbar) != 1:
            problems.append(f"{self.command.value} takes one nbar, got {self.nbar}")
        if self.command not in _MULTI_PHI and len(self.phi) != 1:
            problems.append(f"{self.command.value} takes one phi, got {self.phi}")
        if self.command not in _MULTI_FMIN and len(self.fmin) != 1:
            problems.append(f"{self.command.value} takes one fmin, got {self.fmin}")
        if not self.fmin or any(not 0 < f < 1 for f in self.fmin):
            problems.append(f"fmin values must lie in (0, 1), got {self.fmin}")
        if self.tsteps < 2:  # noqa: PLR2004
            problems.append(f"tsteps must be at least 2, got {self.tsteps}")
        if not self.tmax > self.tmin:
            problems.append(f"tmax must exceed tmin, got [{self.tmin}, {self.tmax}]")
        if not 0 < self.dx <= 0.1:  # noqa: PLR2004
            problems.append(f"dx must lie in (0, 0.1], got {self.dx}")
        if self.nmax is not None and self.nmax < 0:
            problems.append(f"nmax must be non-negative, got {self.nmax}")
        if self.shots < 1:
            problems.append(f"shots must be positive, got {self.shots}")
        if self.qpoints < 2:  # noqa: PLR2004
            problems.append(f"qpoints must be at least 2, got {self.qpoints}")
        if not 0 < self.level < 1:
            problems.append(f"level must lie in (0, 1), got {self.level}")
        parent = self.output_path.resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            problems.append(f"output directory {parent} is not writable")
        if problems:
            msg = "; ".join(problems)
            raise ConfigError(msg)
        # raises ConfigError for bad physical parameters
        self.system_params()

    @property
    def output_path(self) -> Path:
        if self.out is not None:
            return self.out
        return Path(f"{self.command.value}.{self.output_format.value}")

    def system_params(self) -> SystemParams:
        return SystemParams(
            omega=self.omega,
            e1=self.omega / 2 if self.e1 is None else self.e1,
            e2=self.omega / 2 if self.e2 is None else self.e2,
            lambda1=self.coupling if self.lambda1 is None else self.lambda1,
            lambda2=self.coupling if self.lambda2 is None else self.lambda2,
        )

    def preps(self) -> tuple[CoherentPrep, ...]:
        n_max = -1 if self.nmax is None else self.nmax
        return tuple(CoherentPrep(nbar, self.theta, n_max) for nbar in self.nbar)

    def prep(self) -> CoherentPrep:
        return self.preps()[0]

    def times(self) -> NDArray[np.float64]:
        return np.linspace(self.tmin, self.tmax, self.tsteps)

    def as_dict(self) -> dict[str, Any]:
        resolved = {}
        for key, (name, _) in _KEYS.items():
            value = getattr(self, name)
            if isinstance(value, tuple):
                value = list(value)
            elif isinstance(value, Path):
                value = str(value)
            elif isinstance(value, enum.Enum):
                value = value.value
            resolved[key] = value
        return {"command": self.command.value, **resolved}


def _read_key_value(text: str, source: Path) -> dict[str, Any]:
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, separator, value = line.partition("=")
        if not separator:
            msg = f"{source}:{number}: expected key=value, got {raw!r}"
            raise ConfigError(msg)
        key = key.strip()
        if key in values:
            msg = f"{source}:{number}: duplicate key {key!r}"
            raise ConfigError(msg)
        values[key] = value.strip()
    return values


def load_config_file(path: Path) -> dict[str, Any]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        msg = f"cannot read config file {path}: {exc}"
        raise ConfigError(msg) from exc
    if path.suffix.lower() not in {".yaml", ".yml"}:
        return _read_key_value(text, path)
    try:
        document = yaml_rs.loads(
            text,
            parse_datetime=False,
            duplicate_key_policy=yaml_rs.DuplicateKeyPolicy.Error,
        )
    except yaml_rs.YAMLDecodeError as exc:
        msg = f"invalid YAML in {path}: {exc}"
        raise ConfigError(msg) from exc
    if document is None:
        return {}
    if not isinstance(document, dict):
        msg = f"{path} must hold a mapping of settings"
        raise ConfigError(msg)
    return {str(key): value for key, value in document.items()}


def _parse(key: str, value: Any) -> tuple[str, Any]:
    if key not in _KEYS:
        msg = f"unknown setting {key!r}"
        raise ConfigError(msg)
    name, parser = _KEYS[key]
    try:
        return name, parser(value)
    except (TypeError, ValueError) as exc:
        msg = f"invalid value for {key}: {value!r}"
        raise ConfigError(msg) from exc


def resolve_config(
    command: Command | str,
    overrides: Mapping[str, Any] | None = None,
    config_file: Path | None = None,
) -> RunConfig:
    """Merge defaults < config file < explicit overrides, keyed by flag name."""
    try:
        command = Command(command)
    except ValueError as exc:
        msg = f"unknown command {command!r}"
        raise ConfigError(msg) from exc
    merged: dict[str, Any] = dict(_COMMAND_DEFAULTS[command])
    if config_file is not None:
        merged.update(load_config_file(config_file))
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    values = dict(_parse(key, value) for key, value in merged.items())
    known = {item.name for item in fields(RunConfig)}
    return RunConfig(command=command, **{k: v for k, v in values.items() if k in known})
