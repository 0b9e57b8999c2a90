__all__ = (
    "HeraldedOutcome",
    "HeraldingRun",
    "SuccessCurve",
    "TargetState",
    "WidthFitResult",
    "best_fidelity",
    "best_phase",
    "blurred_outcome",
    "conditional_state",
    "fidelity_map",
    "grid_convergence_delta",
    "ideal_width",
    "measure_peak_width",
    "plateau_time",
    "sample_outcome",
    "sample_shots",
    "success_by_phase",
    "success_probabilities",
    "success_probability",
    "width_analysis",
)

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._asymptotic import revival_time
from ._errors import (
    ConfigError,
    PreconditionError,
    UnresolvablePeakError,
    ZeroProbabilityOutcomeError,
)
from ._hilbert import CoherentPrep, QubitLabel, SystemParams
from ._observables import (
    QuadratureBasis,
    QuadratureSlice,
    QubitDensityMatrix,
    build_quadrature_basis,
    iter_quadrature_channels,
    project_field,
)

logger = logging.getLogger(__name__)

ZERO_DENSITY = 1e-30
MIN_PEAK_POINTS = 20
FINE_BLUR_SPACINGS = 4
PLATEAU_SLACK = 1e-9


@dataclass(slots=True, frozen=True)
class TargetState:
    """``(|gg> + exp(-i phi)|ee>) / sqrt(2)``."""

    phi: float

    @property
    def vector(self) -> NDArray[np.complex128]:
        vector = np.zeros(len(QubitLabel), dtype=np.complex128)
        vector[QubitLabel.GG] = 1 / math.sqrt(2)
        vector[QubitLabel.EE] = np.exp(-1j * self.phi) / math.sqrt(2)
        return vector


def _require_threshold(f_min: float) -> None:
    if not 0 < f_min < 1:
        msg = f"fidelity threshold must lie in (0, 1), got {f_min}"
        raise ConfigError(msg)


def best_phase(rho: QubitDensityMatrix) -> float:
    return float(np.angle(rho.matrix[QubitLabel.GG, QubitLabel.EE]) % (2 * math.pi))


def best_fidelity(rho: QubitDensityMatrix) -> float:
    gg, ee = QubitLabel.GG, QubitLabel.EE
    matrix = rho.matrix
    return float((matrix[gg, gg] + matrix[ee, ee]).real / 2 + abs(matrix[gg, ee]))


@dataclass(slots=True, frozen=True, eq=False)
class HeraldedOutcome:
    t: float
    x: float
    conditional_state: QubitDensityMatrix
    fidelity: float
    success: bool
    probability_density: float


def _outcome(
    quadrature: QuadratureSlice,
    x: float,
    channels: NDArray[np.complex128],
    target: TargetState,
    f_min: float,
) -> HeraldedOutcome:
    density = float(np.vdot(channels, channels).real)
    if density <= ZERO_DENSITY:
        msg = f"outcome x={x} has vanishing probability density at t={quadrature.t}"
        raise ZeroProbabilityOutcomeError(msg)
    pure = channels / math.sqrt(density)
    rho = QubitDensityMatrix(np.outer(pure, pure.conj()))
    fidelity = rho.fidelity(target.vector)
    return HeraldedOutcome(
        t=quadrature.t,
        x=x,
        conditional_state=rho,
        fidelity=fidelity,
        success=fidelity > f_min,
        probability_density=density,
    )


def _require_on_grid(quadrature: QuadratureSlice, x: float) -> None:
    half = quadrature.dx / 2
    if not quadrature.grid[0] - half <= x <= quadrature.grid[-1] + half:
        msg = (
            f"x={x} outside the quadrature grid "
            f"[{quadrature.grid[0]}, {quadrature.grid[-1]}]"
        )
        raise PreconditionError(msg)


def conditional_state(
    quadrature: QuadratureSlice,
    x: float,
    target: TargetState,
    f_min: float = 0.9,
) -> HeraldedOutcome:
    _require_threshold(f_min)
    _require_on_grid(quadrature, x)
    channels = project_field(quadrature.amplitudes, np.array([x]))[0]
    return _outcome(quadrature, x, channels, target, f_min)


def _blur_samples(
    quadrature: QuadratureSlice,
    y: float,
    sigma_m: float,
) -> tuple[NDArray[np.float64], float, NDArray[np.complex128]]:
    if sigma_m >= FINE_BLUR_SPACINGS * quadrature.dx:
        return quadrature.grid, quadrature.dx, quadrature.channel_amplitudes
    # narrow kernels are resolved on their own grid, spacing sigma_m / 4 over +-8 sigma_m
    points = np.linspace(y - 8 * sigma_m, y + 8 * sigma_m, 65)
    channels = project_field(quadrature.amplitudes, points).T
    return points, float(points[1] - points[0]), channels


def blurred_outcome(
    quadrature: QuadratureSlice,
    y: float,
    sigma_m: float,
    target: TargetState,
    f_min: float = 0.9,
) -> HeraldedOutcome:
    """Conditional qubit state for a detector reporting ``y`` with Gaussian noise."""
    if sigma_m < 0:
        msg = f"measurement noise must be non-negative, got {sigma_m}"
        raise ConfigError(msg)
    if sigma_m == 0:
        return conditional_state(quadrature, y, target, f_min)
    _require_threshold(f_min)
    points, step, channels = _blur_samples(quadrature, y, sigma_m)
    kernel = np.exp(-((y - points) ** 2) / (2 * sigma_m**2))
    weights = kernel * step / (math.sqrt(2 * math.pi) * sigma_m)
    matrix = (channels * weights) @ channels.conj().T
    density = float(np.trace(matrix).real)
    if density <= ZERO_DENSITY:
        msg = f"blurred outcome y={y} has vanishing probability density"
        raise ZeroProbabilityOutcomeError(msg)
    rho = QubitDensityMatrix(matrix / density)
    fidelity = rho.fidelity(target.vector)
    return HeraldedOutcome(
        t=quadrature.t,
        x=y,
        conditional_state=rho,
        fidelity=fidelity,
        success=fidelity > f_min,
        probability_density=density,
    )


@dataclass(slots=True, frozen=True, eq=False)
class HeraldingRun:
    t: float
    target: TargetState
    f_min: float
    x: NDArray[np.float64]
    fidelity: NDArray[np.float64]
    success: NDArray[np.bool_]
    probability_density: NDArray[np.float64]

    @property
    def shots(self) -> int:
        return int(self.x.size)

    @property
    def success_rate(self) -> float:
        return float(self.success.mean())

    @property
    def mean_success_fidelity(self) -> float:
        if not self.success.any():
            return math.nan
        return float(self.fidelity[self.success].mean())


def _sample_positions(
    quadrature: QuadratureSlice,
    rng: np.random.Generator,
    shots: int,
) -> NDArray[np.float64]:
    # each grid point owns the cell x_k +- dx/2, linear CDF inside a cell
    masses = quadrature.p_total * quadrature.dx
    cumulative = np.cumsum(masses)
    total = cumulative[-1]
    if total <= ZERO_DENSITY:
        msg = "quadrature density carries no probability"
        raise ZeroProbabilityOutcomeError(msg)
    cumulative /= total
    draws = rng.random(shots)
    cells = np.minimum(np.searchsorted(cumulative, draws, side="right"), masses.size - 1)
    lower = np.where(cells > 0, cumulative[cells - 1], 0.0)
    fraction = np.clip((draws - lower) / (masses[cells] / total), 0.0, 1.0)
    return quadrature.grid[cells] + (fraction - 0.5) * quadrature.dx


def sample_shots(
    quadrature: QuadratureSlice,
    rng_seed: int,
    shots: int,
    target: TargetState,
    f_min: float = 0.9,
) -> HeraldingRun:
    _require_threshold(f_min)
    if shots < 1:
        msg = f"shots must be positive, got {shots}"
        raise ConfigError(msg)
    rng = np.random.default_rng(rng_seed)
    positions = _sample_positions(quadrature, rng, shots)
    channels = project_field(quadrature.amplitudes, positions)
    densities = np.sum(np.abs(channels) ** 2, axis=1)
    overlaps = np.abs(channels @ target.vector.conj()) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        fidelities = np.where(densities > ZERO_DENSITY, overlaps / densities, 0.0)
    logger.debug("sampled %d shots at t=%s", shots, quadrature.t)
    return HeraldingRun(
        t=quadrature.t,
        target=target,
        f_min=f_min,
        x=positions,
        fidelity=fidelities,
        success=fidelities > f_min,
        probability_density=densities,
    )


def sample_outcome(
    quadrature: QuadratureSlice,
    rng_seed: int,
    target: TargetState,
    f_min: float = 0.9,
) -> HeraldedOutcome:
    rng = np.random.default_rng(rng_seed)
    x = float(_sample_positions(quadrature, rng, 1)[0])
    return conditional_state(quadrature, x, target, f_min)


def _fidelity_and_density(
    channels: NDArray[np.complex128],
    target: TargetState,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    densities = np.sum(np.abs(channels) ** 2, axis=-1)
    overlaps = np.abs(channels @ target.vector.conj()) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        fidelities = np.where(densities > ZERO_DENSITY, overlaps / densities, 0.0)
    return densities, fidelities


def fidelity_map(
    params: SystemParams,
    prep: CoherentPrep,
    target: TargetState,
    t_grid: ArrayLike,
    basis: QuadratureBasis,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return ``(P(x, t), F(x, t))`` as arrays indexed ``[t, x]``."""
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    densities = np.empty((t_grid.size, basis.grid.size))
    fidelities = np.empty_like(densities)
    for window, channels in iter_quadrature_channels(params, prep, t_grid, basis):
        densities[window], fidelities[window] = _fidelity_and_density(channels, target)
    return densities, fidelities


@dataclass(slots=True, frozen=True, eq=False)
class SuccessCurve:
    t_grid: NDArray[np.float64]
    p_s: NDArray[np.float64]
    f_min: float
    target: TargetState


def success_probabilities(
    params: SystemParams,
    prep: CoherentPrep,
    target: TargetState,
    f_mins: Sequence[float],
    t_grid: ArrayLike,
    basis: QuadratureBasis,
) -> NDArray[np.float64]:
    """``P_s`` for every threshold, shape ``(len(f_mins), len(t_grid))``."""
    for f_min in f_mins:
        _require_threshold(f_min)
    thresholds = np.asarray(f_mins, dtype=np.float64)
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    p_s = np.empty((thresholds.size, t_grid.size))
    for window, channels in iter_quadrature_channels(params, prep, t_grid, basis):
        densities, fidelities = _fidelity_and_density(channels, target)
        heralded = fidelities[None, :, :] > thresholds[:, None, None]
        p_s[:, window] = np.sum(densities[None] * heralded, axis=-1) * basis.dx
    return p_s


def success_by_phase(
    params: SystemParams,
    prep: CoherentPrep,
    phis: Sequence[float],
    f_min: float,
    t_grid: ArrayLike,
    basis: QuadratureBasis,
) -> NDArray[np.float64]:
    """``P_s`` for every target phase from one sweep, shape ``(phis, t_grid)``."""
    _require_threshold(f_min)
    targets = [TargetState(phi) for phi in phis]
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    p_s = np.empty((len(targets), t_grid.size))
    for window, channels in iter_quadrature_channels(params, prep, t_grid, basis):
        for row, target in enumerate(targets):
            densities, fidelities = _fidelity_and_density(channels, target)
            heralded = densities * (fidelities > f_min)
            p_s[row, window] = np.sum(heralded, axis=-1) * basis.dx
    return p_s


def success_probability(
    params: SystemParams,
    prep: CoherentPrep,
    target: TargetState,
    f_min: float,
    t_grid: ArrayLike,
    basis: QuadratureBasis,
) -> SuccessCurve:
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    p_s = success_probabilities(params, prep, target, [f_min], t_grid, basis)[0]
    return SuccessCurve(t_grid=t_grid, p_s=p_s, f_min=f_min, target=target)


def grid_convergence_delta(
    params: SystemParams,
    prep: CoherentPrep,
    target: TargetState,
    f_min: float,
    times: ArrayLike,
    dx: float = 0.02,
) -> float:
    """Largest ``P_s`` change when ``dx`` is halved and ``n_max`` doubled."""
    coarse = success_probabilities(
        params,
        prep,
        target,
        [f_min],
        times,
        build_quadrature_basis(prep.n_max, dx=dx),
    )
    fine_prep = prep.with_n_max(2 * prep.n_max)
    fine = success_probabilities(
        params,
        fine_prep,
        target,
        [f_min],
        times,
        build_quadrature_basis(fine_prep.n_max, dx=dx / 2),
    )
    return float(np.max(np.abs(coarse - fine)))


def plateau_time(
    params: SystemParams,
    prep: CoherentPrep,
    phi: float,
    near: float | None = None,
) -> float:
    """Time closest to ``near`` at which the central branch carries phase ``phi``.

    Without ``near`` the first such time at or after ``t_r / 4`` is taken, once the
    side branches have turned at least a quarter turn away from the central one.
    """
    offset = phi / 2 - prep.theta - math.pi / 2
    if near is None:
        quarter = revival_time(params, prep) / 4
        m = math.ceil((quarter * params.omega - offset) / math.pi - PLATEAU_SLACK)
    else:
        m = round((near * params.omega - offset) / math.pi)
    return (offset + m * math.pi) / params.omega


def ideal_width(f_min: float, omega: float = 1.0) -> float:
    return math.acos(2 * f_min - 1) / omega


def _runs(mask: NDArray[np.bool_]) -> list[tuple[int, int]]:
    edges = np.diff(mask.astype(np.int8), prepend=0, append=0)
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), stops.tolist(), strict=True))


def _crossing(
    t: NDArray[np.float64],
    p: NDArray[np.float64],
    i: int,
    level: float,
) -> float:
    # linear interpolation between samples i and i + 1
    return float(t[i] + (level - p[i]) / (p[i + 1] - p[i]) * (t[i + 1] - t[i]))


def measure_peak_width(
    t_grid: ArrayLike,
    p_s: ArrayLike,
    level: float = 0.5,
    near: float | None = None,
) -> float:
    """Full width of the peak nearest ``near`` at ``level`` times its own maximum."""
    t = np.asarray(t_grid, dtype=np.float64)
    p = np.asarray(p_s, dtype=np.float64)
    if not 0 < level < 1:
        msg = f"width level must lie in (0, 1), got {level}"
        raise ConfigError(msg)
    peak = float(p.max(initial=0.0))
    if peak <= 0:
        msg = "success probability vanishes over the whole window"
        raise UnresolvablePeakError(msg)
    last = p.size - 1
    runs = [run for run in _runs(p > peak / 2) if run[0] > 0 and run[1] < last]
    if not runs:
        msg = "no plateau lies fully inside the time window"
        raise UnresolvablePeakError(msg)
    center = float(t[p.size // 2]) if near is None else near
    start, stop = min(runs, key=lambda run: abs((t[run[0]] + t[run[1]]) / 2 - center))
    summit = start + int(np.argmax(p[start : stop + 1]))
    threshold = level * float(p[summit])
    left = right = summit
    while left > 0 and p[left - 1] > threshold:
        left -= 1
    while right < last and p[right + 1] > threshold:
        right += 1
    if left == 0 or right == last:
        msg = f"plateau at level {level} runs into the edge of the time window"
        raise UnresolvablePeakError(msg)
    if right - left + 1 < MIN_PEAK_POINTS:
        msg = f"plateau spans {right - left + 1} samples, need {MIN_PEAK_POINTS}"
        raise UnresolvablePeakError(msg)
    return _crossing(t, p, right, threshold) - _crossing(t, p, left - 1, threshold)


@dataclass(slots=True, frozen=True, eq=False)
class WidthFitResult:
    """Plateau widths ``[nbar, f_min]`` and the fit ``excess = K / sqrt(nbar)``."""

    nbar: NDArray[np.float64]
    f_min: NDArray[np.float64]
    widths: NDArray[np.float64]
    ideal: NDArray[np.float64]
    k_fit: NDArray[np.float64]
    r_squared: NDArray[np.float64]
    centers: NDArray[np.float64]
    status: tuple[tuple[str, ...], ...] = field(default=())

    @property
    def excess(self) -> NDArray[np.float64]:
        return self.widths - self.ideal[None, :]


def _fit_inverse_sqrt(
    nbar: NDArray[np.float64],
    excess: NDArray[np.float64],
) -> tuple[float, float]:
    valid = np.isfinite(excess)
    if not valid.any():
        return math.nan, math.nan
    s = 1 / np.sqrt(nbar[valid])
    y = excess[valid]
    k = float(np.sum(s * y) / np.sum(s * s))
    if y.size < 3:  # noqa: PLR2004
        return k, math.nan
    slope, intercept = np.polyfit(s, y, 1)
    residual = float(np.sum((y - (slope * s + intercept)) ** 2))
    spread = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - residual / spread if spread > 0 else math.nan
    return k, r_squared


def width_analysis(
    params: SystemParams,
    preps: Sequence[CoherentPrep],
    f_mins: Sequence[float],
    target: TargetState,
    *,
    near: float | None = None,
    level: float = 0.5,
    points: int = 315,
    dx: float = 0.02,
) -> WidthFitResult:
    """Measure the plateau near ``near`` for every ``nbar``.

    Without ``near`` each ``nbar`` uses the default plateau of ``plateau_time``.
    """
    if points < MIN_PEAK_POINTS:
        msg = f"width window needs at least {MIN_PEAK_POINTS} points, got {points}"
        raise ConfigError(msg)
    thresholds = np.asarray(f_mins, dtype=np.float64)
    ideal = np.array([ideal_width(f_min, params.omega) for f_min in thresholds])
    widths = np.full((len(preps), thresholds.size), math.nan)
    centers = np.empty(len(preps))
    status: list[tuple[str, ...]] = []
    half_window = math.pi / (2 * params.omega)
    resolution = 2 * half_window / (points - 1)
    for row, prep in enumerate(preps):
        centers[row] = plateau_time(params, prep, target.phi, near)
        center = centers[row]
        t_grid = np.linspace(center - half_window, center + half_window, points)
        basis = build_quadrature_basis(prep.n_max, dx=dx)
        curves = success_probabilities(params, prep, target, thresholds, t_grid, basis)
        row_status = []
        for column, curve in enumerate(curves):
            try:
                widths[row, column] = measure_peak_width(t_grid, curve, level, center)
            except UnresolvablePeakError as exc:
                logger.warning(
                    "nbar=%s f_min=%s: %s",
                    prep.nbar,
                    thresholds[column],
                    exc,
                )
                row_status.append(f"unresolvable: {exc}")
            else:
                width = widths[row, column]
                if width < ideal[column] - resolution:
                    logger.warning(
                        "nbar=%s f_min=%s: width %.4f below the ideal %.4f",
                        prep.nbar,
                        thresholds[column],
                        width,
                        ideal[column],
                    )
                    row_status.append(f"narrow: {width:.4f} < ideal {ideal[column]:.4f}")
                else:
                    row_status.append("ok")
        status.append(tuple(row_status))
        logger.info("plateau widths for nbar=%s at t=%.4f done", prep.nbar, centers[row])

    nbar = np.array([prep.nbar for prep in preps], dtype=np.float64)
    fits = [
        _fit_inverse_sqrt(nbar, widths[:, column] - ideal[column])
        for column in range(thresholds.size)
    ]
    return WidthFitResult(
        nbar=nbar,
        f_min=thresholds,
        widths=widths,
        ideal=ideal,
        k_fit=np.array([k for k, _ in fits]),
        r_squared=np.array([r2 for _, r2 in fits]),
        centers=centers,
        status=tuple(status),
    )
