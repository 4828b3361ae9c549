import json
import math

import numpy as np
import pytest

from hbench.noisy import (
    HnksViolation, KrausChannel, adaptive_bound_closed, adaptive_bound_iterative, alpha_beta,
    asymptotic_linear_coeff, channel_from_json, channel_to_json, db_to_factor, dephasing_channel,
    hnks_test, lossy_interferometer_channel, min_beta_norm, minimize_parallel_bound,
    qec_dephasing_demo, quantum_advantage_db, squeezed_mse, unitary_channel,
)
from hbench.qmcore import SIGMA_Z

from oracles import parallel_bound_sdp, random_channel


class TestChannels:
    @pytest.mark.parametrize("p", [0.0, 0.3, 1.0])
    def test_dephasing_is_cptp(self, p):
        dephasing_channel(p).check(0.4)

    def test_lossy_is_cptp(self):
        lossy_interferometer_channel(0.62).check(0.1)

    def test_non_tp_rejected(self):
        ch = KrausChannel(lambda th: [0.9 * np.eye(2)], 2)
        with pytest.raises(ValueError):
            ch.check(0.0)

    @pytest.mark.parametrize("bad", [-0.1, 1.1])
    def test_dephasing_range(self, bad):
        with pytest.raises(ValueError):
            dephasing_channel(bad)

    def test_json_round_trip(self):
        ch = dephasing_channel(0.25)
        data = json.loads(json.dumps(channel_to_json(ch, 0.3)))
        ch2, th = channel_from_json(data)
        assert th == 0.3
        assert np.allclose(ch2.ops(th), ch.ops(0.3))
        assert minimize_parallel_bound(ch2, th, 3) == pytest.approx(minimize_parallel_bound(ch, 0.3, 3), rel=1e-9)

    def test_json_central_difference(self):
        ch = dephasing_channel(0.1)
        h = 1e-6
        pack = lambda ops: [[np.real(k).tolist(), np.imag(k).tolist()] for k in ops]
        data = {"dim": 2, "theta0": 0.2, "kraus": pack(ch.ops(0.2)), "step": h,
                "kraus_plus": pack(ch.ops(0.2 + h)), "kraus_minus": pack(ch.ops(0.2 - h))}
        ch2, th = channel_from_json(data)
        assert np.allclose(ch2.dops(th), ch.dops(0.2), atol=1e-8)

    def test_json_needs_derivatives(self):
        with pytest.raises(ValueError):
            channel_from_json({"dim": 1, "kraus": [[[[1.0]], [[0.0]]]]})


class TestAlphaBeta:
    def test_cauchy_schwarz(self, rng):
        ch = random_channel(2, 3, rng)
        for _ in range(10):
            h = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            ab = alpha_beta(ch, 0.2, (h + h.conj().T) / 2)
            assert ab.alpha_norm >= ab.beta_norm**2 - 1e-9

    def test_h_must_be_hermitian(self):
        with pytest.raises(ValueError):
            alpha_beta(dephasing_channel(0.2), 0.0, np.array([[0, 1], [0, 0]]))

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.25, 0.5])
    def test_dephasing_min_beta(self, p):
        assert min_beta_norm(dephasing_channel(p), 0.3) == pytest.approx(abs(1 - 2 * p), abs=1e-6)

    @pytest.mark.parametrize("eta", [0.3, 0.5, 0.62, 0.8])
    def test_lossy_asymptotic(self, eta):
        coeff = asymptotic_linear_coeff(lossy_interferometer_channel(eta), 0.2)
        assert coeff / 4 == pytest.approx(eta / (4 * (1 - eta)), rel=1e-4)

    def test_hnks(self):
        assert hnks_test(dephasing_channel(0.3), 0.1)[0]
        assert not hnks_test(dephasing_channel(0.5), 0.1)[0]
        assert not hnks_test(lossy_interferometer_channel(0.5), 0.1)[0]
        with pytest.raises(HnksViolation):
            asymptotic_linear_coeff(dephasing_channel(0.3), 0.1)


class TestBounds:
    @pytest.mark.parametrize("n", [1, 2, 5, 10])
    def test_unitary_heisenberg(self, n):
        g = np.diag([0.0, 0.7, 2.0])
        assert minimize_parallel_bound(unitary_channel(g), 0.3, n) == pytest.approx(n * n * 4.0, rel=1e-9)

    @pytest.mark.parametrize("seed", range(3))
    @pytest.mark.parametrize("n", [1, 3])
    def test_against_sdp(self, seed, n):
        ch = random_channel(2, 2 + seed % 2, np.random.default_rng(seed))
        assert minimize_parallel_bound(ch, 0.1, n) == pytest.approx(parallel_bound_sdp(ch, 0.1, n), rel=1e-5)

    def test_dephasing_ordering(self):
        ch = dephasing_channel(0.3)
        for n in (1, 2, 5, 10):
            par = minimize_parallel_bound(ch, 0.2, n)
            it = adaptive_bound_iterative(ch, 0.2, n)
            b1, b2 = adaptive_bound_closed(ch, 0.2, n)
            assert par <= it + 1e-8
            assert it <= min(b1, b2) + 1e-8

    def test_single_use_agree(self):
        ch = dephasing_channel(0.2)
        v = minimize_parallel_bound(ch, 0.0, 1)
        assert adaptive_bound_iterative(ch, 0.0, 1) == pytest.approx(v, rel=1e-8)
        b1, b2 = adaptive_bound_closed(ch, 0.0, 1)
        assert b1 == pytest.approx(v, rel=1e-8) and b2 == pytest.approx(v, rel=1e-8)

    def test_dephasing_single_use_value(self):
        # single use: 4 ||alpha|| with alpha minimal equals the QFI 4 for a qubit phase
        assert minimize_parallel_bound(dephasing_channel(0.3), 0.0, 1) == pytest.approx(4.0, rel=1e-8)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            minimize_parallel_bound(dephasing_channel(0.3), 0.0, 0)


class TestQec:
    @pytest.mark.parametrize("p", [0.0, 0.1, 0.25, 0.4, 0.7])
    def test_identity_at_theta0(self, p):
        logical, factor = qec_dephasing_demo(p, 0.4, 0.4, 0.6, 0.8)
        assert np.allclose(logical, [[0.36, 0.48], [0.48, 0.64]], atol=1e-12)
        assert factor == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.1, 0.25, 0.4, 0.7, 1.0])
    def test_derivative_signed(self, p):
        # derivative is i (1 - 2p)[sigma_z, rho]; its magnitude is ||beta|| = |1 - 2p|
        t0, h = 0.4, 1e-6
        rho, _ = qec_dephasing_demo(p, t0, t0, 0.6, 0.8)
        d = (qec_dephasing_demo(p, t0, t0 + h, 0.6, 0.8)[0] - qec_dephasing_demo(p, t0, t0 - h, 0.6, 0.8)[0]) / (2 * h)
        ref = 1j * (1 - 2 * p) * (SIGMA_Z @ rho - rho @ SIGMA_Z)
        assert np.max(np.abs(d - ref)) < 1e-5

    @pytest.mark.parametrize("p", [0.1, 0.25, 0.7])
    @pytest.mark.parametrize("delta", [0.1, 0.3, 1.0])
    def test_off_diagonal_factor_double_angle(self, p, delta):
        # the signal rotates |0> and |1> by opposite phases, so the offset enters as 2 Delta
        _, factor = qec_dephasing_demo(p, 0.2, 0.2 + delta)
        assert factor == pytest.approx(math.sqrt(1 - 4 * p * (1 - p) * math.sin(2 * delta) ** 2), abs=1e-10)


class TestSqueezed:
    def test_shot_noise(self):
        for nbar in (10.0, 1000.0):
            assert squeezed_mse(nbar, 0.0, 0.0, 1.0, math.pi / 2) == pytest.approx(1 / nbar, rel=1e-12)

    def test_near_half_pi_formula(self):
        eta, r, nbar = 0.62, 1.0, 1e7
        approx = (eta * math.exp(-2 * r) + 1 - eta) / (eta * nbar)
        assert squeezed_mse(nbar, r, 0.0, eta, math.pi / 2) == pytest.approx(approx, rel=1e-5)

    def test_phase_misalignment_hurts(self):
        a = squeezed_mse(1e4, 1.0, 0.0, 0.9, math.pi / 2)
        b = squeezed_mse(1e4, 1.0, 0.3, 0.9, math.pi / 2)
        assert b > a

    def test_insensitive_point(self):
        with pytest.raises(ValueError):
            squeezed_mse(100, 0.1, 0, 0.9, 0.0)

    @pytest.mark.parametrize("e2r,eta,db", [(0.1, 0.62, 3.55), (0.093, 0.44, 2.2)])
    def test_advantage(self, e2r, eta, db):
        assert quantum_advantage_db(e2r=e2r, eta=eta) == pytest.approx(db, abs=0.05)

    def test_advantage_r_and_factor(self):
        r = -0.5 * math.log(0.1)
        assert quantum_advantage_db(r=r, eta=0.62) == pytest.approx(quantum_advantage_db(e2r=0.1, eta=0.62))
        assert db_to_factor(quantum_advantage_db(e2r=0.1, eta=0.62)) == pytest.approx(0.442, abs=1e-12)
        assert quantum_advantage_db(r=0.0, eta=0.5) == pytest.approx(0.0, abs=1e-12)
