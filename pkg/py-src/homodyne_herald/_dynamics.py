__all__ = (
    "EvolutionMethod",
    "ExcitationBlock",
    "Propagator",
    "amplitude_series",
    "block",
    "energy",
    "evolve",
    "evolve_analytic",
    "evolve_numeric",
    "iter_amplitude_series",
    "propagator",
)

import enum
import functools
import logging
import sys
from collections.abc import Iterator
from dataclasses import dataclass
from typing import final

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._errors import PreconditionError
from ._hilbert import (
    CoherentPrep,
    JointState,
    QubitLabel,
    SystemParams,
    coherent_coefficients,
    initial_state,
)

logger = logging.getLogger(__name__)

if sys.version_info >= (3, 11):

    @final
    @enum.unique
    class EvolutionMethod(enum.StrEnum):
        Auto = "auto"
        Analytic = "analytic"
        Numeric = "numeric"

else:

    @final
    @enum.unique
    class EvolutionMethod(str, enum.Enum):
        Auto = "auto"
        Analytic = "analytic"
        Numeric = "numeric"


_DIAGONAL = np.arange(len(QubitLabel))
_DEFICITS = np.array([label.excitations for label in QubitLabel])
_SPINS = np.array([label.spins for label in QubitLabel], dtype=np.float64)
_CHUNK_ELEMENTS = 1 << 20


def _stacked_hamiltonians(
    params: SystemParams,
    totals: NDArray[np.int64],
    n_max: int | None,
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    # slot order per block: (gg, N), (ge, N-1), (eg, N-1), (ee, N-2)
    photons = totals[:, None] - _DEFICITS[None, :]
    valid = photons >= 0
    if n_max is not None:
        valid &= photons <= n_max
    diagonal = params.omega * (photons + 0.5) + _SPINS @ np.array([params.e1, params.e2])
    hamiltonians = np.zeros((totals.size, len(QubitLabel), len(QubitLabel)))
    hamiltonians[:, _DIAGONAL, _DIAGONAL] = np.where(valid, diagonal, 0.0)
    upper = np.sqrt(np.maximum(totals, 0))
    lower = np.sqrt(np.maximum(totals - 1, 0))
    couplings = (
        (QubitLabel.GG, QubitLabel.EG, params.lambda1 * upper),
        (QubitLabel.GG, QubitLabel.GE, params.lambda2 * upper),
        (QubitLabel.GE, QubitLabel.EE, params.lambda1 * lower),
        (QubitLabel.EG, QubitLabel.EE, params.lambda2 * lower),
    )
    for row, column, values in couplings:
        masked = np.where(valid[:, row] & valid[:, column], values, 0.0)
        hamiltonians[:, row, column] = masked
        hamiltonians[:, column, row] = masked
    return hamiltonians, valid


@dataclass(slots=True, frozen=True, eq=False)
class ExcitationBlock:
    total_excitation: int
    basis: tuple[tuple[QubitLabel, int], ...]
    h_matrix: NDArray[np.float64]
    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]


def block(params: SystemParams, total_excitation: int) -> ExcitationBlock:
    if total_excitation < 0:
        msg = f"total excitation must be non-negative, got {total_excitation}"
        raise PreconditionError(msg)
    hamiltonians, valid = _stacked_hamiltonians(
        params,
        np.array([total_excitation]),
        None,
    )
    slots = np.flatnonzero(valid[0])
    h_matrix = hamiltonians[0][np.ix_(slots, slots)]
    eigenvalues, eigenvectors = np.linalg.eigh(h_matrix)
    basis = tuple(
        (QubitLabel(slot), total_excitation - int(_DEFICITS[slot])) for slot in slots
    )
    return ExcitationBlock(
        total_excitation=total_excitation,
        basis=basis,
        h_matrix=h_matrix,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
    )


@dataclass(slots=True, frozen=True, eq=False)
class Propagator:
    """Every excitation block up to ``n_max + 2`` diagonalised in one batch.

    Block ``N`` stores the slots ``(gg, N), (ge, N-1), (eg, N-1), (ee, N-2)``;
    slots outside ``0..n_max`` carry zero couplings and never receive amplitude.
    """

    params: SystemParams
    n_max: int
    hamiltonians: NDArray[np.float64]
    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]

    @property
    def block_count(self) -> int:
        return self.n_max + 3

    def to_blocks(self, amplitudes: NDArray[np.complex128]) -> NDArray[np.complex128]:
        dim = self.n_max + 1
        blocks = np.zeros(
            (*amplitudes.shape[:-2], self.block_count, len(QubitLabel)),
            dtype=np.complex128,
        )
        for label in QubitLabel:
            shift = label.excitations
            blocks[..., shift : shift + dim, label] = amplitudes[..., label, :]
        return blocks

    def from_blocks(self, blocks: NDArray[np.complex128]) -> NDArray[np.complex128]:
        dim = self.n_max + 1
        amplitudes = np.empty(
            (*blocks.shape[:-2], len(QubitLabel), dim),
            dtype=np.complex128,
        )
        for label in QubitLabel:
            shift = label.excitations
            amplitudes[..., label, :] = blocks[..., shift : shift + dim, label]
        return amplitudes

    def evolve_amplitudes(
        self,
        amplitudes: NDArray[np.complex128],
        times: NDArray[np.float64],
    ) -> NDArray[np.complex128]:
        blocks = self.to_blocks(amplitudes)
        coefficients = np.einsum("bji,bj->bi", self.eigenvectors, blocks)
        phases = np.exp(-1j * np.multiply.outer(times, self.eigenvalues))
        evolved = np.einsum("bij,tbj->tbi", self.eigenvectors, phases * coefficients)
        return self.from_blocks(evolved)

    def energy(self, amplitudes: NDArray[np.complex128]) -> float:
        blocks = self.to_blocks(amplitudes)
        value = np.einsum("bi,bij,bj->", blocks.conj(), self.hamiltonians, blocks)
        return float(value.real)


@functools.lru_cache(maxsize=16)
def propagator(params: SystemParams, n_max: int) -> Propagator:
    totals = np.arange(n_max + 3)
    hamiltonians, _ = _stacked_hamiltonians(params, totals, n_max)
    eigenvalues, eigenvectors = np.linalg.eigh(hamiltonians)
    logger.debug("diagonalised %d excitation blocks for %s", totals.size, params)
    return Propagator(
        params=params,
        n_max=n_max,
        hamiltonians=hamiltonians,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
    )


def energy(state: JointState) -> float:
    return propagator(state.params, state.n_max).energy(state.amplitudes)


def evolve_numeric(state: JointState, t: float) -> JointState:
    amplitudes = propagator(state.params, state.n_max).evolve_amplitudes(
        state.amplitudes,
        np.array([t], dtype=np.float64),
    )
    return JointState(amplitudes[0], state.params, state.prep, state.t + t)


def _analytic_series(
    params: SystemParams,
    prep: CoherentPrep,
    times: NDArray[np.float64],
) -> NDArray[np.complex128]:
    if not params.is_symmetric_resonant():
        msg = f"closed form needs E1 = E2 = omega/2 and lambda1 = lambda2, got {params}"
        raise PreconditionError(msg)
    coefficients = coherent_coefficients(prep)
    n = np.arange(prep.dim, dtype=np.float64)
    odd = 2 * n - 1
    angle = np.multiply.outer(times, params.lambda1 * np.sqrt(2 * np.abs(odd)))
    cos, sin = np.cos(angle), np.sin(angle)
    weighted = coefficients * np.exp(-0.5j * params.omega * np.multiply.outer(times, odd))

    single = np.zeros_like(n)
    single[1:] = np.sqrt(n[1:] / (2 * odd[1:]))
    double = np.sqrt(n * (n - 1)) / odd

    amplitudes = np.zeros((times.size, len(QubitLabel), prep.dim), dtype=np.complex128)
    amplitudes[:, QubitLabel.GG] = weighted * (n * cos + n - 1) / odd
    # source photon number n feeds (ge, n-1), (eg, n-1) and (ee, n-2)
    side = -1j * single * sin * weighted
    amplitudes[:, QubitLabel.GE, :-1] = side[:, 1:]
    amplitudes[:, QubitLabel.EG, :-1] = side[:, 1:]
    amplitudes[:, QubitLabel.EE, :-2] = (double * (cos - 1) * weighted)[:, 2:]
    return amplitudes


def evolve_analytic(params: SystemParams, prep: CoherentPrep, t: float) -> JointState:
    amplitudes = _analytic_series(params, prep, np.array([t], dtype=np.float64))
    return JointState(amplitudes[0], params, prep, t)


def _resolve_method(params: SystemParams, method: EvolutionMethod) -> EvolutionMethod:
    method = EvolutionMethod(method)
    if method is EvolutionMethod.Auto:
        if params.is_symmetric_resonant():
            return EvolutionMethod.Analytic
        return EvolutionMethod.Numeric
    return method


def evolve(
    params: SystemParams,
    prep: CoherentPrep,
    t: float,
    method: EvolutionMethod = EvolutionMethod.Auto,
) -> JointState:
    if _resolve_method(params, method) is EvolutionMethod.Analytic:
        return evolve_analytic(params, prep, t)
    return evolve_numeric(initial_state(params, prep), t)


def iter_amplitude_series(
    params: SystemParams,
    prep: CoherentPrep,
    times: ArrayLike,
    method: EvolutionMethod = EvolutionMethod.Auto,
    chunk_size: int | None = None,
) -> Iterator[tuple[slice, NDArray[np.complex128]]]:
    """Yield ``(time slice, amplitudes[t, label, n])`` chunk by chunk."""
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    if chunk_size is None:
        chunk_size = max(1, _CHUNK_ELEMENTS // (len(QubitLabel) * (prep.dim + 2)))
    if _resolve_method(params, method) is EvolutionMethod.Analytic:
        for start in range(0, times.size, chunk_size):
            window = slice(start, min(start + chunk_size, times.size))
            yield window, _analytic_series(params, prep, times[window])
        return
    start_amplitudes = initial_state(params, prep).amplitudes
    evolver = propagator(params, prep.n_max)
    for start in range(0, times.size, chunk_size):
        window = slice(start, min(start + chunk_size, times.size))
        yield window, evolver.evolve_amplitudes(start_amplitudes, times[window])


def amplitude_series(
    params: SystemParams,
    prep: CoherentPrep,
    times: ArrayLike,
    method: EvolutionMethod = EvolutionMethod.Auto,
) -> NDArray[np.complex128]:
    times = np.atleast_1d(np.asarray(times, dtype=np.float64))
    amplitudes = np.empty((times.size, len(QubitLabel), prep.dim), dtype=np.complex128)
    for window, chunk in iter_amplitude_series(params, prep, times, method):
        amplitudes[window] = chunk
    return amplitudes
