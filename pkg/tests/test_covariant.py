import math

import numpy as np
import pytest
from scipy import integrate

from hbench.covariant import (
    PhaseState, admissible_profile, airy_cost_constant, dft_povm_cost, dft_vectors,
    mean_energy_solution, min_eigen_cost, optimal_sin_state, phase_bayes_cost, phase_table,
    profile_energy, tail_distribution, tridiagonal_cost_matrix,
)


class TestDiscrete:
    @pytest.mark.parametrize("N", [1, 2, 5, 17, 60])
    def test_closed_form_minimum(self, N):
        closed = 2 * (1 - math.cos(math.pi / (N + 2)))
        dense = np.linalg.eigvalsh(tridiagonal_cost_matrix(N))[0]
        assert dense == pytest.approx(closed, abs=1e-10)
        assert min_eigen_cost(N) == pytest.approx(closed, abs=1e-12)
        state, cost = optimal_sin_state(N)
        assert phase_bayes_cost(state) == pytest.approx(closed, abs=1e-12)
        assert cost == pytest.approx(closed, abs=1e-15)

    def test_asymptote(self):
        rows = phase_table(100)
        assert 0.95 * math.pi**2 <= rows[-1]["N2_cost"] <= math.pi**2

    @pytest.mark.parametrize("N", [1, 3, 8, 20])
    def test_dft_measurement_equivalence(self, N, rng):
        for state in (optimal_sin_state(N)[0], PhaseState.normalised(rng.random(N + 1))):
            assert dft_povm_cost(state) == pytest.approx(phase_bayes_cost(state), abs=1e-8)

    def test_dft_vectors_unitary(self):
        v = dft_vectors(6)
        assert np.allclose(v @ v.conj().T, np.eye(7))

    def test_invalid_state(self):
        with pytest.raises(ValueError):
            PhaseState([0.6, -0.8])
        with pytest.raises(ValueError):
            PhaseState([0.6, 0.6])

    def test_sin_state_continuum_energy(self):
        # sqrt2 sin(pi mu) on [0, 1]: unit norm and kinetic energy pi^2
        f = lambda m: math.sqrt(2) * math.sin(math.pi * m)
        df = lambda m: math.sqrt(2) * math.pi * math.cos(math.pi * m)
        norm, _, kin = profile_energy(f, df, 1.0)
        assert norm == pytest.approx(1.0, abs=1e-12)
        assert kin == pytest.approx(math.pi**2, abs=1e-6)


class TestTail:
    def test_normalised(self):
        for N in (10, 1000):
            total = integrate.quad(lambda d: tail_distribution(N, d), -np.inf, np.inf, limit=2000)[0]
            assert total == pytest.approx(1.0, abs=1e-4)

    def test_closed_normalisation(self):
        # the shape integrates to 1/(2 pi) over the real line
        assert tail_distribution(1, 0.0) == pytest.approx((2 / math.pi**4) * 2 * math.pi, rel=1e-9)

    def test_heavy_tail(self):
        # density decays as Delta^-4, so the variance is finite and the cost is O(1/N^2)
        d = np.array([100.0, 200.0])
        ratio = tail_distribution(1, d[0] + 0) / tail_distribution(1, d[1])
        assert 8 < ratio < 32


class TestMeanEnergy:
    def test_cost_constant(self):
        assert airy_cost_constant() == pytest.approx(1.8944, abs=1e-3)

    def test_solution_moments(self):
        sol, cost = mean_energy_solution(1.0)
        norm, mean, kin = sol.moments()
        assert norm == pytest.approx(1.0, abs=1e-8)
        assert mean == pytest.approx(1.0, abs=1e-8)
        assert kin == pytest.approx(cost, rel=1e-3)

    @pytest.mark.parametrize("E", [0.5, 2.0, 10.0])
    def test_energy_scaling(self, E):
        _, cost = mean_energy_solution(E)
        assert cost == pytest.approx(airy_cost_constant() / E**2, rel=1e-12)

    def test_variational_dominance(self):
        r = np.random.default_rng(7)
        c = airy_cost_constant()
        for _ in range(20):
            coeffs = r.uniform(0, 1, size=int(r.integers(1, 4)))
            f, df, up = admissible_profile(coeffs, float(r.uniform(0.5, 3.0)))
            norm, mean, kin = profile_energy(f, df, up)
            assert norm == pytest.approx(1.0, abs=1e-8)
            assert mean == pytest.approx(1.0, abs=1e-8)
            assert kin >= c - 1e-9

    def test_invalid_energy(self):
        with pytest.raises(ValueError):
            mean_energy_solution(0.0)
