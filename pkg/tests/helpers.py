__all__ = (
    "RESONANT",
    "circular_distance",
    "random_state",
    "resonant_slice",
)

import functools
import math

import numpy as np

from homodyne_herald import (
    CoherentPrep,
    JointState,
    QuadratureSlice,
    SystemParams,
    build_quadrature_basis,
    evolve,
    quadrature_slice,
)

RESONANT = SystemParams.resonant(omega=1.0, coupling=1.0)


def circular_distance(a: float, b: float) -> float:
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


def random_state(seed: int, params: SystemParams, n_max: int = 12) -> JointState:
    rng = np.random.default_rng(seed)
    amplitudes = rng.normal(size=(4, n_max + 1)) + 1j * rng.normal(size=(4, n_max + 1))
    amplitudes /= np.linalg.norm(amplitudes)
    return JointState(amplitudes, params, CoherentPrep(nbar=0.0, n_max=n_max))


@functools.lru_cache(maxsize=32)
def resonant_slice(nbar: float, t: float, dx: float = 0.02) -> QuadratureSlice:
    prep = CoherentPrep(nbar=nbar)
    basis = build_quadrature_basis(prep.n_max, dx=dx)
    return quadrature_slice(evolve(RESONANT, prep, t), basis)
