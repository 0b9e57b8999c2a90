import math

import numpy as np
import pytest
from dirty_equals import IsFloat

from homodyne_herald import (
    CoherentPrep,
    EvolutionMethod,
    PreconditionError,
    QubitLabel,
    SystemParams,
    amplitude_series,
    block,
    energy,
    evolve,
    evolve_analytic,
    evolve_numeric,
    fock_state,
    initial_state,
)

from .helpers import RESONANT, random_state

DETUNED = SystemParams(omega=1.3, e1=0.3, e2=0.7, lambda1=0.8, lambda2=1.1)


def test_vacuum_block() -> None:
    vacuum = block(DETUNED, 0)
    assert vacuum.basis == ((QubitLabel.GG, 0),)
    assert vacuum.eigenvalues.tolist() == [IsFloat(approx=1.3 / 2 - 0.3 - 0.7, delta=1e-14)]


def test_single_excitation_block() -> None:
    single = block(RESONANT, 1)
    assert single.basis == ((QubitLabel.GG, 1), (QubitLabel.GE, 0), (QubitLabel.EG, 0))
    expected = [0.5 - math.sqrt(2), 0.5, 0.5 + math.sqrt(2)]
    assert np.allclose(single.eigenvalues, expected, atol=1e-12)


def test_block_layout() -> None:
    two = block(DETUNED, 2)
    assert two.basis == (
        (QubitLabel.GG, 2),
        (QubitLabel.GE, 1),
        (QubitLabel.EG, 1),
        (QubitLabel.EE, 0),
    )
    h = two.h_matrix
    assert np.allclose(h, h.T)
    assert h[0, 2] == IsFloat(approx=0.8 * math.sqrt(2), delta=1e-14)
    assert h[0, 1] == IsFloat(approx=1.1 * math.sqrt(2), delta=1e-14)
    assert h[1, 3] == IsFloat(approx=0.8, delta=1e-14)
    assert h[2, 3] == IsFloat(approx=1.1, delta=1e-14)
    assert h[0, 3] == 0
    assert h[1, 2] == 0
    # (ee, 0): omega/2 + E1 + E2
    assert h[3, 3] == IsFloat(approx=0.65 + 1.0, delta=1e-14)


def test_block_rejects_negative_excitation() -> None:
    with pytest.raises(PreconditionError):
        block(RESONANT, -1)


@pytest.mark.parametrize("t", [0.0, 0.3, 1.7, 12.5, 40.0])
def test_single_photon_rabi(t: float) -> None:
    state = evolve_numeric(fock_state(RESONANT, QubitLabel.GG, 1, n_max=3), t)
    p_gg = float(np.sum(np.abs(state.amplitudes[QubitLabel.GG]) ** 2))
    assert p_gg == IsFloat(approx=math.cos(math.sqrt(2) * t) ** 2, delta=1e-12)
    assert state.t == t


def test_analytic_matches_numeric() -> None:
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        prep = CoherentPrep(nbar=float(rng.integers(1, 51)), theta=float(rng.uniform(0, 2 * math.pi)))
        t = float(rng.uniform(0, 50))
        analytic = evolve_analytic(RESONANT, prep, t)
        numeric = evolve_numeric(initial_state(RESONANT, prep), t)
        worst = max(worst, float(np.max(np.abs(analytic.amplitudes - numeric.amplitudes))))
    assert worst < 1e-10


def test_vacuum_field_phase() -> None:
    state = evolve_analytic(RESONANT, CoherentPrep(nbar=0.0), 2.0)
    assert abs(state.amplitude(QubitLabel.GG, 0) - np.exp(1j * 0.5 * 2.0)) < 1e-14


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_numeric_evolution_invariants(seed: int) -> None:
    state = random_state(seed, DETUNED)
    start_energy = energy(state)
    start_excitations = state.excitation_distribution()
    for t in (0.5, 7.0, 33.3):
        evolved = evolve_numeric(state, t)
        assert evolved.norm() == IsFloat(approx=1.0, delta=1e-10)
        assert np.max(np.abs(evolved.excitation_distribution() - start_excitations)) < 1e-10
        assert abs(energy(evolved) - start_energy) <= 1e-10 * abs(start_energy)


def test_evolution_composes() -> None:
    state = random_state(9, DETUNED)
    stepped = evolve_numeric(evolve_numeric(state, 2.5), 4.25)
    direct = evolve_numeric(state, 6.75)
    assert np.max(np.abs(stepped.amplitudes - direct.amplitudes)) < 1e-10
    assert stepped.t == IsFloat(approx=6.75, delta=1e-14)


def test_analytic_needs_symmetric_resonance() -> None:
    with pytest.raises(PreconditionError, match="closed form"):
        evolve_analytic(DETUNED, CoherentPrep(nbar=5.0), 1.0)
    with pytest.raises(PreconditionError):
        evolve(DETUNED, CoherentPrep(nbar=5.0), 1.0, EvolutionMethod.Analytic)


def test_auto_method_falls_back_to_numeric() -> None:
    prep = CoherentPrep(nbar=10.0)
    state = evolve(DETUNED, prep, 3.0)
    expected = evolve_numeric(initial_state(DETUNED, prep), 3.0)
    assert np.array_equal(state.amplitudes, expected.amplitudes)


def test_amplitude_series_matches_single_times() -> None:
    prep = CoherentPrep(nbar=20.0, theta=0.2)
    times = np.array([0.0, 1.0, 5.5, 17.0])
    for method in (EvolutionMethod.Analytic, EvolutionMethod.Numeric):
        series = amplitude_series(RESONANT, prep, times, method)
        assert series.shape == (4, 4, prep.dim)
        for row, t in enumerate(times):
            single = evolve(RESONANT, prep, float(t), method)
            assert np.max(np.abs(series[row] - single.amplitudes)) < 1e-12


def test_symmetric_coupling_keeps_singles_symmetric() -> None:
    state = evolve(RESONANT, CoherentPrep(nbar=15.0), 4.0)
    assert np.max(np.abs(state.amplitudes[QubitLabel.GE] - state.amplitudes[QubitLabel.EG])) < 1e-14
