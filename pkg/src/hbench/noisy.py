"""Upper bounds on Fisher information for n uses of a noisy channel.

A channel is given by Kraus operators K_k(theta) and their derivatives. For
a Hermitian h acting on the Kraus index we use the rotated derivatives
Kt_k = Kdot_k - i sum_j h_kj K_j and form

    alpha = sum_k Kt_k^dag Kt_k,    beta = sum_k K_k^dag Kt_k.

Every bound below is minimised over h. Operator norms are smoothed with a
log-sum-exp of eigenvalues whose temperature is lowered in stages, each
stage solved by L-BFGS with an analytic gradient; the reported value is the
exact (unsmoothed) objective at the best point found.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .fisher import hermitian_basis
from .qmcore import SIGMA_X, SIGMA_Z, dagger, opnorm

CPTP_TOL = 1e-9
DCPTP_TOL = 1e-7
FEAS_TOL = 1e-9
HNKS_TOL = 1e-7
TAUS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10)
WARM_TAUS = (1e-9,)


class HnksViolation(ValueError):
    """beta(h) = 0 has no solution, so no linear asymptotic coefficient exists."""


@dataclass(frozen=True)
class KrausChannel:
    """theta-parametrised CPTP map; ``dkraus`` defaults to central differences."""

    kraus: Callable[[float], Sequence[np.ndarray]]
    dim: int
    dkraus: Optional[Callable[[float], Sequence[np.ndarray]]] = None
    step: float = 1e-6
    name: str = "channel"

    def ops(self, theta: float) -> np.ndarray:
        return np.array([np.asarray(k, dtype=complex) for k in self.kraus(theta)])

    def dops(self, theta: float) -> np.ndarray:
        if self.dkraus is not None:
            return np.array([np.asarray(k, dtype=complex) for k in self.dkraus(theta)])
        h = self.step * max(1.0, abs(theta))
        return (self.ops(theta + h) - self.ops(theta - h)) / (2 * h)

    @property
    def r_plus_1(self) -> int:
        return len(self.kraus(0.0))

    def check(self, theta: float) -> None:
        ks, dks = self.ops(theta), self.dops(theta)
        if ks.shape[1:] != (self.dim, self.dim):
            raise ValueError("Kraus operators do not match the channel dimension")
        tp = np.einsum("kji,kjl->il", ks.conj(), ks)
        if np.max(np.abs(tp - np.eye(self.dim))) > CPTP_TOL:
            raise ValueError("Kraus operators are not trace preserving")
        d = np.einsum("kji,kjl->il", dks.conj(), ks)
        if np.max(np.abs(d + dagger(d))) > DCPTP_TOL:
            raise ValueError("Kraus derivatives violate the derivative of trace preservation")

    def apply(self, rho: np.ndarray, theta: float) -> np.ndarray:
        ks = self.ops(theta)
        return np.einsum("kij,jl,kml->im", ks, rho, ks.conj())


# constructors -------------------------------------------------------------------

def unitary_channel(generator: np.ndarray) -> KrausChannel:
    """Single Kraus operator exp(i theta Lambda)."""
    g = np.asarray(generator, dtype=complex)
    w, v = np.linalg.eigh(g)

    def u(th):
        return (v * np.exp(1j * th * w)) @ dagger(v)

    return KrausChannel(lambda th: [u(th)], g.shape[0], lambda th: [1j * g @ u(th)], name="unitary")


def dephasing_channel(p: float, phase_sign: int = 1) -> KrausChannel:
    """Kraus operators sqrt(p) U, sqrt(1-p) U sigma_x with U = exp(i s theta sigma_z).

    ``phase_sign`` s flips the direction of the signal rotation. Operators
    with zero weight are dropped.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    s = float(phase_sign)

    def u(th):
        return np.diag([np.exp(1j * s * th), np.exp(-1j * s * th)])

    weights = [(math.sqrt(p), np.eye(2)), (math.sqrt(1 - p), SIGMA_X)]
    weights = [(w, m) for w, m in weights if w > 0]
    kraus = lambda th: [w * u(th) @ m for w, m in weights]
    dkraus = lambda th: [1j * s * SIGMA_Z @ (w * u(th) @ m) for w, m in weights]
    return KrausChannel(kraus, 2, dkraus, name=f"dephasing(p={p})")


def lossy_interferometer_channel(eta: float) -> KrausChannel:
    """Single photon in two arms with transmission eta; basis (upper, lower, vacuum).

    The phase theta sits on the upper arm. A photon lost from either arm ends
    in the vacuum. The vacuum maps to itself through its own Kraus operator,
    so no coherence between vacuum and one-photon inputs survives.
    """
    if not (0.0 < eta < 1.0):
        raise ValueError("eta must lie in (0, 1)")
    se, sl = math.sqrt(eta), math.sqrt(1 - eta)

    def unit(i, j):
        m = np.zeros((3, 3), complex)
        m[i, j] = 1.0
        return m

    def kraus(th):
        k0 = se * (np.exp(1j * th) * unit(0, 0) + unit(1, 1))
        return [k0, sl * unit(2, 0), sl * unit(2, 1), unit(2, 2)]

    def dkraus(th):
        zero = np.zeros((3, 3), complex)
        return [1j * se * np.exp(1j * th) * unit(0, 0), zero, zero, zero]

    return KrausChannel(kraus, 3, dkraus, name=f"lossy(eta={eta})")


def _mat(obj) -> np.ndarray:
    re, im = obj
    return np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)


def channel_from_json(data) -> tuple[KrausChannel, float]:
    """Build a channel from ``{dim, theta0, kraus, dkraus}``.

    Each operator is a pair ``[re, im]`` of nested lists. Instead of
    ``dkraus`` one may give ``kraus_plus``/``kraus_minus`` tabulated at
    theta0 +- ``step`` for a central difference. The channel is known only
    at theta0, so it is returned with that point.
    """
    if isinstance(data, str):
        data = json.loads(data)
    dim = int(data["dim"])
    theta0 = float(data.get("theta0", 0.0))
    ks = [_mat(k) for k in data["kraus"]]
    if "dkraus" in data:
        dks = [_mat(k) for k in data["dkraus"]]
    elif "kraus_plus" in data and "kraus_minus" in data:
        h = float(data["step"])
        dks = [(_mat(a) - _mat(b)) / (2 * h) for a, b in zip(data["kraus_plus"], data["kraus_minus"])]
    else:
        raise ValueError("channel description needs dkraus or kraus_plus/kraus_minus with step")
    if len(dks) != len(ks):
        raise ValueError("kraus and dkraus lists differ in length")

    def at(th, ops):
        if abs(th - theta0) > 1e-12:
            raise ValueError("tabulated channel is only defined at theta0")
        return ops

    ch = KrausChannel(lambda th: at(th, ks), dim, lambda th: at(th, dks), name="tabulated")
    ch.check(theta0)
    return ch, theta0


def channel_to_json(ch: KrausChannel, theta0: float) -> dict:
    pack = lambda ops: [[np.real(k).tolist(), np.imag(k).tolist()] for k in ops]
    return {"dim": ch.dim, "theta0": theta0, "kraus": pack(ch.ops(theta0)), "dkraus": pack(ch.dops(theta0))}


# alpha and beta ----------------------------------------------------------------

@dataclass(frozen=True)
class AlphaBeta:
    alpha: np.ndarray
    beta: np.ndarray
    alpha_norm: float
    beta_norm: float


class _Structure:
    """Precomputed pieces for fast evaluation of alpha(h), beta(h)."""

    def __init__(self, ch: KrausChannel, theta: float):
        ks, dks = ch.ops(theta), ch.dops(theta)
        self.r, self.d = ks.shape[0], ks.shape[1]
        self.ks, self.dks = ks, dks
        self.basis = hermitian_basis(self.r)  # (nh, r, r)
        self.nh = self.basis.shape[0]
        # Kt = dks + sum_a y_a T_a with T_a = -i sum_j B_a[k, j] K_j
        self.t = -1j * np.einsum("akj,jmn->akmn", self.basis, ks)  # (nh, r, d, d)
        self.beta0 = np.einsum("kji,kjl->il", ks.conj(), dks)
        self.beta_lin = np.einsum("kji,akjl->ail", ks.conj(), self.t)  # (nh, d, d)
        # flattened copies so that evaluation is a pair of matrix products
        self.t_flat = self.t.reshape(self.nh, -1)
        self.dks_flat = dks.ravel()
        self.beta_lin_flat = self.beta_lin.reshape(self.nh, -1)
        self.beta0_flat = self.beta0.ravel()

    def h_of(self, y) -> np.ndarray:
        return np.einsum("a,akj->kj", y, self.basis)

    def kt(self, y) -> np.ndarray:
        return (self.dks_flat + y @ self.t_flat).reshape(self.r, self.d, self.d)

    def alpha_beta(self, y):
        kt = self.kt(y)
        stacked = kt.reshape(self.r * self.d, self.d)
        alpha = stacked.conj().T @ stacked
        beta = (self.beta0_flat + y @ self.beta_lin_flat).reshape(self.d, self.d)
        return 0.5 * (alpha + dagger(alpha)), beta, kt

    def norms(self, y) -> tuple[float, float]:
        a, b, _ = self.alpha_beta(y)
        return float(np.linalg.eigvalsh(a)[-1]), opnorm(b)


def _lse(m: np.ndarray, tau: float):
    """Smoothed largest eigenvalue of Hermitian m and its gradient matrix."""
    w, v = np.linalg.eigh(m)
    top = w[-1]
    e = np.exp((w - top) / tau)
    s = e.sum()
    return top + tau * math.log(s), (v * (e / s)) @ dagger(v)


def _smooth_terms(st: _Structure, y, tau):
    """Smoothed ||alpha||, ||beta||^2 with gradients in y."""
    a, b, kt = st.alpha_beta(y)
    na, pa = _lse(a, tau)
    nb2, pb = _lse(dagger(b) @ b, tau)
    # d||alpha|| = 2 Re tr(P_a Kt^dag dKt), dKt = T_a
    stacked = kt.reshape(st.r * st.d, st.d)
    ga = 2 * np.real(st.t_flat @ (stacked.conj() @ pa.T).ravel())
    # d||beta||^2 = 2 Re tr(P_b b^dag db), db = beta_lin_a
    gb = 2 * np.real(st.beta_lin_flat @ (b.conj() @ pb.T).ravel())
    return na, ga, max(nb2, 0.0), gb


@dataclass
class HOptResult:
    value: float
    y: np.ndarray
    alpha_norm: float
    beta_norm: float
    converged: bool
    h: np.ndarray = field(default=None)


def _minimise(st: _Structure, combine, exact, starts, scale: float, affine=None,
              taus=TAUS) -> HOptResult:
    """Minimise combine(||a||, ga, ||b||^2, gb) over y with temperature continuation.

    ``affine = (y0, null)`` restricts y to y0 + null z.
    """
    y0, null = affine if affine is not None else (np.zeros(st.nh), np.eye(st.nh))
    best = None
    converged = True
    for z in starts:
        z = np.array(z, dtype=float)
        for tau in taus:
            t = tau * scale

            def fg(zz):
                y = y0 + null @ zz
                na, ga, nb2, gb = _smooth_terms(st, y, t)
                v, g = combine(na, ga, nb2, gb)
                return v, null.T @ g

            res = optimize.minimize(fg, z, jac=True, method="L-BFGS-B",
                                    options={"maxiter": 3000, "ftol": 1e-16, "gtol": 1e-13})
            z = res.x
        y = y0 + null @ z
        an, bn = st.norms(y)
        val = exact(an, bn)
        if best is None or val < best.value - 1e-14:
            best = HOptResult(val, y, an, bn, bool(res.success), st.h_of(y))
        converged = converged and bool(np.isfinite(val))
    best.converged = best.converged and converged
    return best


def _starts(st: _Structure, n_random: int, seed: int, dim: int):
    rng = np.random.default_rng(seed)
    return [np.zeros(dim)] + [rng.standard_normal(dim) for _ in range(n_random)]


def _scale(st: _Structure) -> float:
    an, bn = st.norms(np.zeros(st.nh))
    return max(an, bn**2, 1e-12)


def alpha_beta(ch: KrausChannel, theta: float, h=None) -> AlphaBeta:
    """alpha and beta for the Kraus rotation generated by Hermitian ``h``."""
    st = _Structure(ch, theta)
    h = np.zeros((st.r, st.r)) if h is None else np.asarray(h, dtype=complex)
    if h.shape != (st.r, st.r):
        raise ValueError(f"h must be {st.r}x{st.r}")
    if np.max(np.abs(h - dagger(h))) > 1e-12:
        raise ValueError("h must be Hermitian")
    y = np.real(np.einsum("akj,jk->a", st.basis, h))
    a, b, _ = st.alpha_beta(y)
    return AlphaBeta(a, b, float(np.linalg.eigvalsh(a)[-1]), opnorm(b))


def _bound_search(ch, theta, c_alpha: float, c_beta2: float, starts=8, seed=0) -> HOptResult:
    """min_h c_alpha ||alpha|| + c_beta2 ||beta||^2."""
    st = _Structure(ch, theta)

    def combine(na, ga, nb2, gb):
        return c_alpha * na + c_beta2 * nb2, c_alpha * ga + c_beta2 * gb

    exact = lambda an, bn: c_alpha * an + c_beta2 * bn**2
    return _minimise(st, combine, exact, _starts(st, starts - 1, seed, st.nh), _scale(st))


def minimize_parallel_bound(ch: KrausChannel, theta: float, n: int, starts: int = 8,
                            seed: int = 0, full: bool = False):
    """min_h 4(n ||alpha|| + n(n-1) ||beta||^2)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    res = _bound_search(ch, theta, 4.0 * n, 4.0 * n * (n - 1), starts, seed)
    return res if full else res.value


def min_beta_norm(ch: KrausChannel, theta: float, starts: int = 8, seed: int = 0) -> float:
    """min_h ||beta||."""
    return math.sqrt(_bound_search(ch, theta, 0.0, 1.0, starts, seed).value)


def _sqrt_combine(c_alpha: float, c_beta: float):
    """Objective c_alpha ||alpha|| + c_beta ||beta|| using the smoothed ||beta||^2."""

    def combine(na, ga, nb2, gb):
        nb = math.sqrt(nb2) if nb2 > 0 else 0.0
        g = c_alpha * ga + (c_beta * gb / (2 * nb) if nb > 1e-300 else 0.0)
        return c_alpha * na + c_beta * nb, g

    return combine


def adaptive_bound_iterative(ch: KrausChannel, theta: float, n: int, starts: int = 8,
                             seed: int = 0, full: bool = False):
    """4 a_n with a_{i+1} = min_h [a_i + ||alpha|| + 2 ||beta|| sqrt(a_i)], a_0 = 0.

    The first step uses ``starts`` start points; later steps warm-start from
    the previous minimiser.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    st = _Structure(ch, theta)
    scale = _scale(st)
    a = 0.0
    prev = None
    history = []
    for i in range(n):
        c = 2 * math.sqrt(a)
        exact = lambda an, bn, c=c: an + c * bn
        if prev is None:
            res = _minimise(st, _sqrt_combine(1.0, c), exact, _starts(st, starts - 1, seed, st.nh), scale)
        else:
            # the minimiser moves slowly with i, so a short continuation from it suffices
            res = _minimise(st, _sqrt_combine(1.0, c), exact, [prev], scale, taus=WARM_TAUS)
        prev = res.y
        a += res.value
        history.append(4 * a)
    return (4 * a, history) if full else 4 * a


def adaptive_bound_closed(ch: KrausChannel, theta: float, n: int, starts: int = 8,
                          seed: int = 0) -> tuple[float, float]:
    """Two closed-form adaptive bounds, each minimised over h separately.

    bound1 = 4(n||a|| + n(n-1)||b|| sqrt||a||),
    bound2 = 4(n||a|| + n(n-1)||b||^2 + (||a|| - ||b||^2) n ln n).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    st = _Structure(ch, theta)
    scale = _scale(st)
    pts = _starts(st, starts - 1, seed, st.nh)
    c = n * (n - 1)

    def combine1(na, ga, nb2, gb):
        na = max(na, 1e-300)
        nb = math.sqrt(max(nb2, 0.0))
        v = n * na + c * nb * math.sqrt(na)
        g = n * ga + c * (math.sqrt(na) * (gb / (2 * nb) if nb > 1e-300 else 0.0) + nb * ga / (2 * math.sqrt(na)))
        return 4 * v, 4 * g

    exact1 = lambda an, bn: 4 * (n * an + c * bn * math.sqrt(an))
    b1 = _minimise(st, combine1, exact1, pts, scale).value
    ln = n * math.log(n)
    b2 = _bound_search(ch, theta, 4 * (n + ln), 4 * (c - ln), starts, seed).value
    return b1, b2


# span test and the beta = 0 affine set ----------------------------------------------

def _beta_system(st: _Structure):
    """Real linear system A y = rhs equivalent to beta(y) = 0."""
    lin = st.beta_lin.reshape(st.nh, -1).T  # (d*d, nh)
    a = np.vstack([lin.real, lin.imag])
    rhs = -np.concatenate([st.beta0.ravel().real, st.beta0.ravel().imag])
    return a, rhs


def hnks_test(ch: KrausChannel, theta: float) -> tuple[bool, float]:
    """Whether i sum K^dag Kdot lies outside the real span of {K_i^dag K_j}.

    Returns (violates_span, residual) where the residual is the Frobenius
    distance of beta(h) from zero at the least-squares h.
    """
    st = _Structure(ch, theta)
    a, rhs = _beta_system(st)
    y, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    resid = float(np.linalg.norm(a @ y - rhs))
    return resid > HNKS_TOL, resid


def asymptotic_linear_coeff(ch: KrausChannel, theta: float, starts: int = 8, seed: int = 0,
                            full: bool = False):
    """4 min ||alpha(h)|| over {h : beta(h) = 0}; the per-use Fisher information limit."""
    st = _Structure(ch, theta)
    a, rhs = _beta_system(st)
    y0, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    if np.linalg.norm(a @ y0 - rhs) > HNKS_TOL:
        raise HnksViolation("beta(h) = 0 is infeasible for this channel")
    u, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
    null = vt[rank:].T
    if null.shape[1] == 0:
        an, _ = st.norms(y0)
        return 4 * an
    combine = lambda na, ga, nb2, gb: (na, ga)
    exact = lambda an, bn: an
    pts = _starts(st, starts - 1, seed, null.shape[1])
    res = _minimise(st, combine, exact, pts, max(st.norms(y0)[0], 1e-12), affine=(y0, null))
    return (4 * res.value, res) if full else 4 * res.value


# two-qubit error-correction demo -------------------------------------------------

def _qec_recovery(theta0: float) -> list[np.ndarray]:
    def ket(b):
        v = np.zeros(4, complex)
        v[b] = 1
        return v

    k00, k01, k10, k11 = (ket(i) for i in range(4))
    r1 = np.exp(1j * theta0) * np.outer(k00, k00) + np.exp(-1j * theta0) * np.outer(k11, k11)
    r2 = np.exp(-1j * theta0) * np.outer(k00, k10) + np.exp(1j * theta0) * np.outer(k11, k01)
    return [r1, r2]


def qec_dephasing_demo(p: float, theta0: float, theta: float, a: complex = 1 / math.sqrt(2),
                       b: complex = 1 / math.sqrt(2)) -> tuple[np.ndarray, float]:
    """Encode a|00> + b|11>, send the first qubit through the dephasing channel, recover.

    The channel here rotates |0> by exp(-i theta) (``phase_sign=-1``), the
    orientation for which the recovery operators undo the rotation at theta0.
    Returns the 2x2 logical density matrix and the magnitude of the factor
    multiplying its off-diagonal entry.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    ch = dephasing_channel(p, phase_sign=-1)
    psi = np.array([a, 0, 0, b], dtype=complex)
    psi = psi / np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    out = np.zeros((4, 4), complex)
    for k in ch.ops(theta):
        kk = np.kron(k, np.eye(2))
        out += kk @ rho @ dagger(kk)
    rec = np.zeros((4, 4), complex)
    for r in _qec_recovery(theta0):
        rec += r @ out @ dagger(r)
    idx = [0, 3]
    logical = rec[np.ix_(idx, idx)]
    ref = psi[0] * np.conj(psi[3])
    factor = abs(logical[0, 1] / ref) if abs(ref) > 0 else float("nan")
    return logical, float(factor)


# squeezed light in a lossy interferometer ------------------------------------------

def squeezed_mse(nbar: float, r: float, phi: float, eta: float, theta: float) -> float:
    """Error-propagation MSE of the photon-number difference.

    Coherent light with mean photon number ``nbar`` in one port, squeezed
    vacuum in the other at relative angle ``phi``, detection efficiency
    ``eta``. The variance of N_- carries a loss term (1-eta)/eta (nbar + sinh^2 r).
    """
    s2 = math.sinh(r) ** 2
    if not (nbar > s2):
        raise ValueError("nbar must exceed sinh^2 r")
    if not (0 < eta <= 1):
        raise ValueError("eta must lie in (0, 1]")
    if abs(math.sin(theta)) < 1e-12:
        raise ValueError("sin(theta) = 0: the mean photon difference is insensitive to theta")
    a2 = nbar - s2
    # < N_- > = (eta/2) cos(theta)(nbar - sinh^2 r); derivative in theta
    slope = -(eta / 2) * math.sin(theta) * a2
    var = _squeezed_variance(nbar, r, phi, eta, theta)
    return var / slope**2


def _squeezed_variance(nbar, r, phi, eta, theta):
    s2 = math.sinh(r) ** 2
    c, s = math.cos(theta) ** 2, math.sin(theta) ** 2
    quad = nbar * (math.cos(phi) ** 2 * math.exp(-2 * r) + math.sin(phi) ** 2 * math.exp(2 * r))
    return eta**2 / 4 * (c * (nbar + 0.5 * math.sinh(2 * r) ** 2)
                         + s * (quad + s2)
                         + (1 - eta) / eta * (nbar + s2))


def quantum_advantage_db(r: float | None = None, eta: float = 1.0, e2r: float | None = None) -> float:
    """MSE reduction -10 log10(eta e^{-2r} + 1 - eta) in dB.

    Either the squeezing parameter ``r`` or the factor ``e2r`` = e^{-2r} may
    be given.
    """
    if e2r is None:
        if r is None:
            raise ValueError("give r or e2r")
        e2r = math.exp(-2 * r)
    if not (0 < eta <= 1):
        raise ValueError("eta must lie in (0, 1]")
    return -10 * math.log10(eta * e2r + 1 - eta)


def db_to_factor(db: float) -> float:
    return 10 ** (-db / 10)
