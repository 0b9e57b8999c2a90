__all__ = (
    "NORM_TOLERANCE",
    "TAIL_TOLERANCE",
    "CoherentPrep",
    "JointState",
    "QubitLabel",
    "SystemParams",
    "coherent_coefficients",
    "default_n_max",
    "fock_state",
    "initial_state",
    "tail_mass",
)

import cmath
import enum
import logging
import math
from dataclasses import dataclass
from typing import final

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln, pdtrc

from ._errors import ConfigError, NormalizationError, TruncationError

logger = logging.getLogger(__name__)

TAIL_TOLERANCE = 1e-12
NORM_TOLERANCE = 1e-10


@final
@enum.unique
class QubitLabel(enum.IntEnum):
    """Two-qubit basis label, first letter is qubit 1."""

    GG = 0
    GE = 1
    EG = 2
    EE = 3

    @property
    def excitations(self) -> int:
        return self.name.count("E")

    @property
    def spins(self) -> tuple[int, int]:
        first, second = (1 if letter == "E" else -1 for letter in self.name)
        return first, second

    def __str__(self) -> str:
        return self.name.lower()


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        msg = f"{name} must be finite, got {value!r}"
        raise ConfigError(msg)


@dataclass(slots=True, frozen=True)
class SystemParams:
    omega: float = 1.0
    e1: float = 0.5
    e2: float = 0.5
    lambda1: float = 1.0
    lambda2: float = 1.0

    def __post_init__(self) -> None:
        for name in ("omega", "e1", "e2", "lambda1", "lambda2"):
            _require_finite(name, getattr(self, name))
        if self.omega <= 0:
            msg = f"omega must be positive, got {self.omega}"
            raise ConfigError(msg)
        if self.lambda1 < 0 or self.lambda2 < 0:
            msg = f"couplings must be non-negative, got {self.lambda1}, {self.lambda2}"
            raise ConfigError(msg)

    @classmethod
    def resonant(cls, omega: float = 1.0, coupling: float = 1.0) -> "SystemParams":
        return cls(
            omega=omega,
            e1=omega / 2,
            e2=omega / 2,
            lambda1=coupling,
            lambda2=coupling,
        )

    @property
    def coupling(self) -> float:
        return (self.lambda1 + self.lambda2) / 2

    def is_symmetric_resonant(self) -> bool:
        half = self.omega / 2
        return self.e1 == half and self.e2 == half and self.lambda1 == self.lambda2


def default_n_max(nbar: float, tolerance: float = TAIL_TOLERANCE) -> int:
    if nbar == 0:
        return 0
    n_max = math.ceil(nbar + 10 * math.sqrt(nbar))
    # the 10 sigma rule alone is too short for small nbar
    while pdtrc(n_max, nbar) >= tolerance:
        n_max += 1
    return n_max


@dataclass(slots=True, frozen=True)
class CoherentPrep:
    """Coherent field preparation with alpha = sqrt(nbar) * exp(-i theta).

    A negative ``n_max`` selects :func:`default_n_max`.
    """

    nbar: float
    theta: float = 0.0
    n_max: int = -1

    def __post_init__(self) -> None:
        _require_finite("nbar", self.nbar)
        _require_finite("theta", self.theta)
        if self.nbar < 0:
            msg = f"nbar must be non-negative, got {self.nbar}"
            raise ConfigError(msg)
        if self.n_max < 0:
            object.__setattr__(self, "n_max", default_n_max(self.nbar))

    @property
    def alpha(self) -> complex:
        return cmath.rect(math.sqrt(self.nbar), -self.theta)

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def with_n_max(self, n_max: int) -> "CoherentPrep":
        return CoherentPrep(self.nbar, self.theta, n_max)


def tail_mass(prep: CoherentPrep) -> float:
    if prep.nbar == 0:
        return 0.0
    return float(pdtrc(prep.n_max, prep.nbar))


def coherent_coefficients(prep: CoherentPrep) -> NDArray[np.complex128]:
    tail = tail_mass(prep)
    if tail > TAIL_TOLERANCE:
        msg = (
            f"n_max={prep.n_max} leaves Poisson tail mass {tail:.3e} for "
            f"nbar={prep.nbar}, limit is {TAIL_TOLERANCE:.0e}"
        )
        raise TruncationError(msg)
    n = np.arange(prep.dim)
    if prep.nbar == 0:
        coefficients = np.zeros(prep.dim, dtype=np.complex128)
        coefficients[0] = 1.0
        return coefficients
    log_magnitude = (
        -prep.nbar / 2 + n * (0.5 * math.log(prep.nbar)) - 0.5 * gammaln(n + 1)
    )
    return np.exp(log_magnitude) * np.exp(-1j * prep.theta * n)


@dataclass(slots=True, frozen=True, eq=False)
class JointState:
    """Amplitudes indexed ``[qubit label, photon number]`` at time ``t``."""

    amplitudes: NDArray[np.complex128]
    params: SystemParams
    prep: CoherentPrep
    t: float = 0.0

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=np.complex128)
        expected = (len(QubitLabel), self.prep.dim)
        if amplitudes.shape != expected:
            msg = f"amplitudes must have shape {expected}, got {amplitudes.shape}"
            raise ConfigError(msg)
        amplitudes.flags.writeable = False
        object.__setattr__(self, "amplitudes", amplitudes)
        deviation = abs(self.norm() - 1)
        if deviation > NORM_TOLERANCE:
            msg = f"state norm deviates from 1 by {deviation:.3e}"
            raise NormalizationError(msg)

    @property
    def n_max(self) -> int:
        return self.prep.n_max

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities())))

    def probabilities(self) -> NDArray[np.float64]:
        return np.abs(self.amplitudes) ** 2

    def amplitude(self, label: QubitLabel, n: int) -> complex:
        if not 0 <= n <= self.n_max:
            return 0j
        return complex(self.amplitudes[label, n])

    def excitation_distribution(self) -> NDArray[np.float64]:
        """Probability of each total excitation number ``N = n + qubit excitations``."""
        probabilities = self.probabilities()
        distribution = np.zeros(self.n_max + 3)
        for label in QubitLabel:
            shift = label.excitations
            distribution[shift : shift + self.prep.dim] += probabilities[label]
        return distribution


def initial_state(params: SystemParams, prep: CoherentPrep) -> JointState:
    amplitudes = np.zeros((len(QubitLabel), prep.dim), dtype=np.complex128)
    amplitudes[QubitLabel.GG] = coherent_coefficients(prep)
    logger.debug(
        "initial state nbar=%s theta=%s n_max=%s tail=%.3e",
        prep.nbar,
        prep.theta,
        prep.n_max,
        tail_mass(prep),
    )
    return JointState(amplitudes, params, prep)


def fock_state(
    params: SystemParams,
    label: QubitLabel,
    n: int,
    n_max: int | None = None,
) -> JointState:
    n_max = n if n_max is None else n_max
    if not 0 <= n <= n_max:
        msg = f"photon number {n} outside 0..{n_max}"
        raise ConfigError(msg)
    prep = CoherentPrep(nbar=0.0, n_max=n_max)
    amplitudes = np.zeros((len(QubitLabel), prep.dim), dtype=np.complex128)
    amplitudes[label, n] = 1.0
    return JointState(amplitudes, params, prep)
