__all__ = (
    "BlobMarker",
    "GeaBranch",
    "blob_markers",
    "branch_masses",
    "branches",
    "gea_banacloche_state",
    "predicted_phase",
    "revival_time",
)

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ._errors import PreconditionError
from ._hilbert import (
    CoherentPrep,
    JointState,
    QubitLabel,
    SystemParams,
    coherent_coefficients,
)
from ._observables import QuadratureSlice

logger = logging.getLogger(__name__)

BRANCH_INDICES = (-1, 0, 1)


def _require_closed_form(params: SystemParams, prep: CoherentPrep) -> None:
    if not params.is_symmetric_resonant():
        msg = f"branch decomposition needs the symmetric resonant case, got {params}"
        raise PreconditionError(msg)
    if prep.nbar <= 0:
        msg = "branch decomposition needs nbar > 0"
        raise PreconditionError(msg)


def revival_time(params: SystemParams, prep: CoherentPrep) -> float:
    return 2 * math.pi * math.sqrt(prep.nbar) / params.coupling


def predicted_phase(params: SystemParams, prep: CoherentPrep, t: float) -> float:
    """Relative gg/ee phase the central branch carries at ``t``, in ``[0, 2pi)``."""
    _require_closed_form(params, prep)
    return (2 * (prep.theta + math.pi / 2 + params.omega * t)) % (2 * math.pi)


def _branch_frequency(params: SystemParams, prep: CoherentPrep, k: int) -> float:
    if prep.nbar == 0:
        return params.omega
    return params.omega + k * params.coupling / math.sqrt(prep.nbar)


@dataclass(slots=True, frozen=True)
class BlobMarker:
    k: int
    alpha: complex

    @property
    def x(self) -> float:
        return 2 * self.alpha.real


def blob_markers(
    params: SystemParams,
    prep: CoherentPrep,
    t: float,
) -> list[BlobMarker]:
    markers = []
    for k in BRANCH_INDICES:
        rotation = cmath.exp(-1j * _branch_frequency(params, prep, k) * t)
        markers.append(BlobMarker(k, rotation * prep.alpha))
    return markers


@dataclass(slots=True, frozen=True, eq=False)
class GeaBranch:
    """Large-nbar term ``global_phase * qubit_state (x) |field_alpha>``."""

    k: int
    qubit_state: NDArray[np.complex128]
    field_alpha: complex
    global_phase: complex


def branches(
    params: SystemParams,
    prep: CoherentPrep,
    t: float,
    *,
    refined: bool = False,
) -> list[GeaBranch]:
    """Three-branch decomposition valid for ``nbar >> 1`` and ``t << nbar/lambda``.

    ``refined`` adds the ``exp(i k lambda t / (2 sqrt(nbar)))`` correction to each
    global phase, which keeps the sum close to the exact state near ``t_r / 4``.
    """
    _require_closed_form(params, prep)
    root = math.sqrt(prep.nbar)
    coupling = params.coupling
    result = []
    for k in BRANCH_INDICES:
        frequency = _branch_frequency(params, prep, k)
        qubit_state = np.zeros(len(QubitLabel), dtype=np.complex128)
        if k == 0:
            qubit_state[QubitLabel.GG] = 0.5
            qubit_state[QubitLabel.EE] = 0.5 * cmath.exp(
                -2j * (prep.theta + math.pi / 2 + params.omega * t),
            )
        else:
            rotation = cmath.exp(-1j * (frequency * t + prep.theta))
            qubit_state[QubitLabel.GG] = 0.25
            qubit_state[QubitLabel.GE] = 0.25 * k * rotation
            qubit_state[QubitLabel.EG] = 0.25 * k * rotation
            qubit_state[QubitLabel.EE] = 0.25 * rotation**2
        exponent = -k * coupling * root * t
        if refined:
            exponent += k * coupling * t / (2 * root)
        result.append(
            GeaBranch(
                k=k,
                qubit_state=qubit_state,
                field_alpha=cmath.exp(-1j * frequency * t) * prep.alpha,
                global_phase=cmath.exp(1j * exponent),
            ),
        )
    return result


def gea_banacloche_state(
    params: SystemParams,
    prep: CoherentPrep,
    t: float,
    *,
    refined: bool = False,
) -> JointState:
    """Sum of the three branches in the truncated Fock basis, renormalised."""
    amplitudes = np.zeros((len(QubitLabel), prep.dim), dtype=np.complex128)
    for branch in branches(params, prep, t, refined=refined):
        field = coherent_coefficients(
            CoherentPrep(prep.nbar, -cmath.phase(branch.field_alpha), prep.n_max),
        )
        amplitudes += branch.global_phase * np.multiply.outer(branch.qubit_state, field)
    norm = float(np.linalg.norm(amplitudes))
    logger.debug("branch sum at t=%s has norm %.6f before renormalising", t, norm)
    return JointState(amplitudes / norm, params, prep, t)


def branch_masses(
    quadrature: QuadratureSlice,
    markers: list[BlobMarker],
) -> dict[int, float]:
    """Probability mass nearest to each marker; ties go to the first marker."""
    positions = np.array([marker.x for marker in markers])
    nearest = np.argmin(np.abs(quadrature.grid[:, None] - positions[None, :]), axis=1)
    weights = quadrature.p_total * quadrature.dx
    return {
        marker.k: float(weights[nearest == index].sum())
        for index, marker in enumerate(markers)
    }
