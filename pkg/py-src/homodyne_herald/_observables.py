__all__ = (
    "PhaseSpaceGrid",
    "QuadratureBasis",
    "QuadratureSlice",
    "QubitDensityMatrix",
    "build_quadrature_basis",
    "default_phase_space_grid",
    "hermite_functions",
    "iter_quadrature_channels",
    "local_maximum",
    "p_gg_trace",
    "phase_space_grid",
    "project_field",
    "q_function",
    "quadrature_mean_variance",
    "quadrature_slice",
    "reduce_to_qubits",
)

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

from ._dynamics import EvolutionMethod, iter_amplitude_series
from ._errors import ConfigError, PreconditionError
from ._hilbert import CoherentPrep, JointState, QubitLabel, SystemParams

logger = logging.getLogger(__name__)

_RESCALE_THRESHOLD = 1e100
_X_CHUNK = 8192
_CHANNEL_CHUNK_ELEMENTS = 1 << 22
_MAX_DX = 0.1


@dataclass(slots=True, frozen=True, eq=False)
class QubitDensityMatrix:
    matrix: NDArray[np.complex128]

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=np.complex128)
        if matrix.shape != (len(QubitLabel), len(QubitLabel)):
            msg = f"density matrix must be 4x4, got {matrix.shape}"
            raise ConfigError(msg)
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.matrix, self.matrix).real)

    def population(self, label: QubitLabel) -> float:
        return float(self.matrix[label, label].real)

    def eigenvalues(self) -> NDArray[np.float64]:
        return np.linalg.eigvalsh(self.matrix)

    def fidelity(self, vector: ArrayLike) -> float:
        vector = np.asarray(vector, dtype=np.complex128)
        return float(np.vdot(vector, self.matrix @ vector).real)

    def is_physical(self, tolerance: float = 1e-10) -> bool:
        hermitian = np.allclose(self.matrix, self.matrix.conj().T, atol=tolerance)
        return (
            hermitian
            and abs(self.trace() - 1) <= tolerance
            and bool(self.eigenvalues().min() >= -tolerance)
        )


def reduce_to_qubits(state: JointState) -> QubitDensityMatrix:
    amplitudes = state.amplitudes
    return QubitDensityMatrix(amplitudes @ amplitudes.conj().T)


def p_gg_trace(
    params: SystemParams,
    prep: CoherentPrep,
    times: ArrayLike,
    method: EvolutionMethod = EvolutionMethod.Auto,
) -> NDArray[np.float64]:
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    trace = np.empty(times.size)
    for window, amplitudes in iter_amplitude_series(params, prep, times, method):
        trace[window] = np.sum(np.abs(amplitudes[:, QubitLabel.GG]) ** 2, axis=-1)
    return trace


@dataclass(slots=True, frozen=True, eq=False)
class PhaseSpaceGrid:
    re: NDArray[np.float64]
    im: NDArray[np.float64]

    @property
    def alphas(self) -> NDArray[np.complex128]:
        return self.re[None, :] + 1j * self.im[:, None]

    @property
    def cell_area(self) -> float:
        return float((self.re[1] - self.re[0]) * (self.im[1] - self.im[0]))


def phase_space_grid(
    radius: float,
    points: int = 301,
    center: complex = 0j,
) -> PhaseSpaceGrid:
    if radius <= 0 or points < 2:  # noqa: PLR2004
        msg = f"phase-space grid needs radius > 0 and points >= 2, got {radius}, {points}"
        raise ConfigError(msg)
    offsets = np.linspace(-radius, radius, points)
    return PhaseSpaceGrid(re=center.real + offsets, im=center.imag + offsets)


def default_phase_space_grid(prep: CoherentPrep, points: int = 301) -> PhaseSpaceGrid:
    return phase_space_grid(math.sqrt(prep.nbar) + 6, points)


def q_function(state: JointState, grid: PhaseSpaceGrid) -> NDArray[np.float64]:
    """Husimi function ``sum_r |<alpha|psi_r>|^2`` sampled as ``[im, re]``."""
    n = np.arange(state.prep.dim)
    half_log_factorial = 0.5 * gammaln(n + 1)
    joint = state.amplitudes.T
    q = np.empty((grid.im.size, grid.re.size))
    for row, imag in enumerate(grid.im):
        alpha = grid.re + 1j * imag
        magnitude = np.abs(alpha)
        with np.errstate(divide="ignore", invalid="ignore"):
            powers = np.where(n == 0, 0.0, np.multiply.outer(np.log(magnitude), n))
        log_coefficients = -0.5 * magnitude[:, None] ** 2 + powers - half_log_factorial
        coherent = np.exp(log_coefficients) * np.exp(
            1j * np.multiply.outer(np.angle(alpha), n),
        )
        overlaps = coherent.conj() @ joint
        q[row] = np.sum(np.abs(overlaps) ** 2, axis=1)
    return q


def _hermite_recurrence(
    x: NDArray[np.float64],
    n_max: int,
) -> Iterator[NDArray[np.float64]]:
    # psi_n(x) = value * exp(log_scale); value is rescaled whenever it grows past
    # the threshold so the far tails neither underflow nor overflow
    log_scale = -(x**2) / 4 - math.log(2 * math.pi) / 4
    previous = np.zeros_like(x)
    current = np.ones_like(x)
    yield np.exp(log_scale)
    for n in range(n_max):
        following = (x * current - math.sqrt(n) * previous) / math.sqrt(n + 1)
        previous, current = current, following
        magnitude = np.abs(current)
        large = magnitude > _RESCALE_THRESHOLD
        if large.any():
            factor = np.where(large, magnitude, 1.0)
            current = current / factor
            previous = previous / factor
            log_scale = log_scale + np.log(factor)
        yield current * np.exp(log_scale)


def hermite_functions(x: ArrayLike, n_max: int) -> NDArray[np.float64]:
    """Fock-state wavefunctions of the quadrature ``a + a^dagger``, shape ``(x, n)``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    values = np.empty((x.size, n_max + 1))
    for n, column in enumerate(_hermite_recurrence(x, n_max)):
        values[:, n] = column
    return values


def project_field(
    amplitudes: NDArray[np.complex128],
    x: ArrayLike,
) -> NDArray[np.complex128]:
    """Channel amplitudes ``c_r(x) = sum_n A[r, n] psi_n(x)``, shape ``(x, 4)``."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    n_max = amplitudes.shape[-1] - 1
    channels = np.zeros((x.size, len(QubitLabel)), dtype=np.complex128)
    for start in range(0, x.size, _X_CHUNK):
        window = slice(start, start + _X_CHUNK)
        for n, column in enumerate(_hermite_recurrence(x[window], n_max)):
            channels[window] += np.multiply.outer(column, amplitudes[:, n])
    return channels


@dataclass(slots=True, frozen=True, eq=False)
class QuadratureBasis:
    grid: NDArray[np.float64]
    dx: float
    psi: NDArray[np.float64]

    @property
    def n_max(self) -> int:
        return self.psi.shape[1] - 1

    def contains(self, x: float) -> bool:
        half = self.dx / 2
        return bool(self.grid[0] - half <= x <= self.grid[-1] + half)


def build_quadrature_basis(
    n_max: int,
    half_width: float | None = None,
    dx: float = 0.02,
) -> QuadratureBasis:
    if not 0 < dx <= _MAX_DX:
        msg = f"dx must lie in (0, {_MAX_DX}], got {dx}"
        raise ConfigError(msg)
    required = 2 * math.sqrt(n_max) + 8
    if half_width is None:
        half_width = required
    if half_width < required:
        msg = (
            f"x range +-{half_width} is narrower than "
            f"+-{required:.2f} for n_max={n_max}"
        )
        raise ConfigError(msg)
    steps = math.ceil(half_width / dx)
    grid = dx * np.arange(-steps, steps + 1, dtype=np.float64)
    logger.debug("quadrature basis: %d points, n_max=%d", grid.size, n_max)
    return QuadratureBasis(grid=grid, dx=dx, psi=hermite_functions(grid, n_max))


def _field_columns(basis: QuadratureBasis, prep: CoherentPrep) -> NDArray[np.float64]:
    if basis.n_max < prep.n_max:
        msg = f"quadrature basis holds n <= {basis.n_max}, state needs {prep.n_max}"
        raise PreconditionError(msg)
    return basis.psi[:, : prep.dim]


@dataclass(slots=True, frozen=True, eq=False)
class QuadratureSlice:
    """Homodyne statistics of one joint state on a quadrature grid."""

    t: float
    grid: NDArray[np.float64]
    dx: float
    amplitudes: NDArray[np.complex128]
    channel_amplitudes: NDArray[np.complex128]

    @property
    def channel_densities(self) -> NDArray[np.float64]:
        return np.abs(self.channel_amplitudes) ** 2

    @property
    def p_total(self) -> NDArray[np.float64]:
        return self.channel_densities.sum(axis=0)

    @property
    def p_sym(self) -> NDArray[np.float64]:
        channels = self.channel_amplitudes
        return np.abs(channels[QubitLabel.GE] + channels[QubitLabel.EG]) ** 2 / 2

    @property
    def p_anti(self) -> NDArray[np.float64]:
        channels = self.channel_amplitudes
        return np.abs(channels[QubitLabel.GE] - channels[QubitLabel.EG]) ** 2 / 2

    def total_probability(self) -> float:
        return float(self.p_total.sum() * self.dx)


def quadrature_slice(state: JointState, basis: QuadratureBasis) -> QuadratureSlice:
    columns = _field_columns(basis, state.prep)
    amplitudes = state.amplitudes
    channels = (columns @ amplitudes.real.T + 1j * (columns @ amplitudes.imag.T)).T
    result = QuadratureSlice(
        t=state.t,
        grid=basis.grid,
        dx=basis.dx,
        amplitudes=amplitudes,
        channel_amplitudes=channels,
    )
    total = result.total_probability()
    if abs(total - 1) > 1e-6:  # noqa: PLR2004
        logger.warning("quadrature density at t=%s integrates to %.9f", state.t, total)
    return result


def iter_quadrature_channels(
    params: SystemParams,
    prep: CoherentPrep,
    times: ArrayLike,
    basis: QuadratureBasis,
    method: EvolutionMethod = EvolutionMethod.Auto,
) -> Iterator[tuple[slice, NDArray[np.complex128]]]:
    """Yield ``(time slice, c[t, x, r])`` for a sweep of times."""
    columns = _field_columns(basis, prep)
    chunk_size = max(1, _CHANNEL_CHUNK_ELEMENTS // (basis.grid.size * len(QubitLabel)))
    for window, amplitudes in iter_amplitude_series(
        params,
        prep,
        times,
        method,
        chunk_size=chunk_size,
    ):
        stacked = amplitudes.transpose(2, 0, 1).reshape(prep.dim, -1)
        channels = columns @ stacked.real + 1j * (columns @ stacked.imag)
        yield (
            window,
            channels.reshape(basis.grid.size, -1, len(QubitLabel)).transpose(1, 0, 2),
        )


def local_maximum(
    quadrature: QuadratureSlice,
    x_guess: float,
    half_width: float = 2.0,
) -> float:
    mask = np.abs(quadrature.grid - x_guess) <= half_width
    if not mask.any():
        msg = f"no grid points within {half_width} of x={x_guess}"
        raise PreconditionError(msg)
    window = quadrature.grid[mask]
    return float(window[np.argmax(quadrature.p_total[mask])])


def quadrature_mean_variance(quadrature: QuadratureSlice) -> tuple[float, float]:
    weights = quadrature.p_total * quadrature.dx
    mean = float(np.sum(quadrature.grid * weights))
    variance = float(np.sum((quadrature.grid - mean) ** 2 * weights))
    return mean, variance
