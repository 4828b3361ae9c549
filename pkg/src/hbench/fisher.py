"""Classical and quantum Fisher information and the bounds built on them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .qmcore import dagger, hermitian_part

KERNEL_EPS = 1e-10
COND_LIMIT = 1e12


class SingularModelError(ValueError):
    """An outcome has zero probability but a non-zero derivative."""


class RankChangeError(ValueError):
    """The state derivative leaks into the kernel of the state."""


class NonIdentifiableError(ValueError):
    """The Fisher matrix is singular (or too badly conditioned to invert)."""


class InsensitiveError(ValueError):
    """The observable mean does not move with the parameter."""


def fd_step(theta_i: float) -> float:
    return 1e-6 * max(1.0, abs(theta_i))


def _as_theta(theta) -> np.ndarray:
    return np.atleast_1d(np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class ProbModel:
    """Parametric outcome distribution p(x|theta).

    ``dprob(theta, i)`` is optional; without it a central difference is used.
    """

    prob: Callable[[np.ndarray], np.ndarray]
    n_params: int = 1
    dprob: Optional[Callable[[np.ndarray, int], np.ndarray]] = None
    step: Optional[float] = None

    def p(self, theta) -> np.ndarray:
        return np.asarray(self.prob(_as_theta(theta)), dtype=float)

    def dp(self, theta, i: int = 0) -> np.ndarray:
        th = _as_theta(theta)
        if self.dprob is not None:
            return np.asarray(self.dprob(th, i), dtype=float)
        h = self.step if self.step is not None else fd_step(th[i])
        e = np.zeros_like(th)
        e[i] = h
        return (self.p(th + e) - self.p(th - e)) / (2 * h)


def classical_fi(model: ProbModel, theta) -> np.ndarray:
    """Fisher matrix sum_x (1/p) d_i p d_j p."""
    th = _as_theta(theta)
    p = model.p(th)
    d = np.array([model.dp(th, i) for i in range(model.n_params)])
    small = p <= 1e-14
    if np.any(np.abs(d[:, small]) > 1e-7):
        raise SingularModelError("outcome with zero probability has non-zero derivative")
    w = np.where(small, 0.0, 1.0 / np.where(small, 1.0, p))
    return (d * w) @ d.T


@dataclass(frozen=True)
class QuantumStatFamily:
    """Parametrised density matrices with optional analytic derivatives."""

    rho: Callable[[np.ndarray], np.ndarray]
    n_params: int = 1
    drho: Optional[Callable[[np.ndarray, int], np.ndarray]] = None
    step: Optional[float] = None

    def state(self, theta) -> np.ndarray:
        return np.asarray(self.rho(_as_theta(theta)), dtype=complex)

    def derivative(self, theta, i: int = 0) -> np.ndarray:
        th = _as_theta(theta)
        if self.drho is not None:
            return np.asarray(self.drho(th, i), dtype=complex)
        h = self.step if self.step is not None else fd_step(th[i])
        e = np.zeros_like(th)
        e[i] = h
        return hermitian_part(self.state(th + e) - self.state(th - e)) / (2 * h)


def pure_family(psi: Callable, dpsi: Optional[Callable] = None, n_params: int = 1) -> QuantumStatFamily:
    """Family of projectors |psi><psi| built from a ket map and its derivatives."""

    def rho(th):
        v = np.asarray(psi(th), dtype=complex)
        return np.outer(v, v.conj())

    drho = None
    if dpsi is not None:
        def drho(th, i):
            v = np.asarray(psi(th), dtype=complex)
            dv = np.asarray(dpsi(th, i), dtype=complex)
            a = np.outer(dv, v.conj())
            return a + dagger(a)
    return QuantumStatFamily(rho, n_params, drho)


def sld(rho: np.ndarray, drho: np.ndarray, eps: float = KERNEL_EPS) -> np.ndarray:
    """Symmetric logarithmic derivative solving drho = (L rho + rho L)/2."""
    rho = np.asarray(rho, dtype=complex)
    drho = np.asarray(drho, dtype=complex)
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    d = dagger(v) @ drho @ v
    s = w[:, None] + w[None, :]
    kernel = s <= eps
    if np.any(np.abs(d[kernel]) > eps):
        raise RankChangeError("state derivative has support on the kernel of the state")
    l_eig = np.where(kernel, 0.0, 2.0 * d / np.where(kernel, 1.0, s))
    return hermitian_part(v @ l_eig @ dagger(v))


def qfi_matrix(fam: QuantumStatFamily, theta) -> np.ndarray:
    """Quantum Fisher matrix Re Tr(rho L_i L_j) from SLDs."""
    th = _as_theta(theta)
    rho = fam.state(th)
    ls = [sld(rho, fam.derivative(th, i)) for i in range(fam.n_params)]
    f = np.empty((fam.n_params, fam.n_params))
    for i, li in enumerate(ls):
        for j, lj in enumerate(ls):
            f[i, j] = np.trace(rho @ li @ lj).real
    return 0.5 * (f + f.T)


def qfi_pure(psi: np.ndarray, dpsi: list) -> np.ndarray:
    """Pure-state shortcut 4 Re(<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>)."""
    psi = np.asarray(psi, dtype=complex)
    d = np.array([np.asarray(x, dtype=complex) for x in dpsi])
    g = d.conj() @ d.T
    a = d.conj() @ psi
    return 4 * (g - np.outer(a, a.conj())).real


def safe_inverse(f: np.ndarray, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Inverse of a symmetric PSD matrix through its eigendecomposition."""
    f = 0.5 * (np.asarray(f, dtype=float) + np.asarray(f, dtype=float).T)
    w, v = np.linalg.eigh(f)
    if w[-1] <= 0 or w[0] <= w[-1] / cond_limit:
        raise NonIdentifiableError("Fisher matrix is singular or ill-conditioned")
    return (v / w) @ v.T


def error_propagation(var_a: float, dmean_a: float) -> float:
    """Variance of the moment estimator: var(A) / (d<A>/dtheta)^2."""
    if dmean_a == 0:
        raise InsensitiveError("observable mean does not depend on the parameter")
    if var_a < 0:
        raise ValueError("variance must be non-negative")
    return var_a / dmean_a**2


def mandelstam_bound(var_h: float) -> float:
    """1/(4 var H): single-shot limit set by the generator variance."""
    if var_h <= 0:
        raise ValueError("generator variance must be positive, otherwise the bound is unbounded")
    return 1.0 / (4.0 * var_h)


def prior_information(pdf: Callable, dpdf: Callable, a: float, b: float) -> float:
    """Fisher information of a prior density, integral of (p')^2/p over [a, b]."""

    def f(x):
        p = pdf(x)
        return dpdf(x) ** 2 / p if p > 0 else 0.0

    return integrate.quad(f, a, b, limit=400, epsabs=1e-12, epsrel=1e-10)[0]


def van_trees_bound(avg_fi: float, prior_info: float) -> float:
    den = avg_fi + prior_info
    if den <= 0:
        raise ValueError("average Fisher information plus prior information must be positive")
    return 1.0 / den


# Holevo bound ---------------------------------------------------------------

def hermitian_basis(d: int) -> np.ndarray:
    """Trace-orthonormal basis of d x d Hermitian matrices, shape (d*d, d, d)."""
    out = []
    for a in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[a, a] = 1
        out.append(e)
    for a in range(d):
        for b in range(a + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[a, b] = e[b, a] = 1 / np.sqrt(2)
            out.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[a, b] = -1j / np.sqrt(2)
            e[b, a] = 1j / np.sqrt(2)
            out.append(e)
    return np.array(out)


def _sqrtm_psd(c: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(c)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.T


def _trace_norm(a: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


@dataclass
class HolevoResult:
    value: float
    cr_value: float
    x: np.ndarray


def hcr_bound(fam: QuantumStatFamily, theta, cost=None, restarts: int = 4, seed: int = 0,
              full: bool = False):
    """Holevo bound for weight matrix ``cost`` (identity by default).

    The locally unbiased set {X : Tr(d_i rho X_j) = delta_ij} is parametrised
    through its null space. The trace-norm term is smoothed as
    sum sqrt(s^2 + eps^2) and eps is driven down in stages, each stage solved
    by L-BFGS. The start points are the SLD solution F^-1 L and random
    perturbations of it; the lowest exact objective wins.
    """
    th = _as_theta(theta)
    p = fam.n_params
    c = np.eye(p) if cost is None else np.asarray(cost, dtype=float)
    rho = fam.state(th)
    d = rho.shape[0]
    drhos = [fam.derivative(th, i) for i in range(p)]
    basis = hermitian_basis(d)
    nb = basis.shape[0]

    # real coordinates: X_j = sum_a x[a, j] B_a
    a_mat = np.array([[np.trace(dr @ b).real for dr in drhos] for b in basis])  # (nb, p)
    g = np.einsum("xy,ayz,bzx->ab", rho, basis, basis)
    s_re, k_im = g.real, g.imag
    s_re = 0.5 * (s_re + s_re.T)
    k_im = 0.5 * (k_im - k_im.T)

    ls = [sld(rho, dr) for dr in drhos]
    f_q = np.array([[np.trace(rho @ li @ lj).real for lj in ls] for li in ls])
    f_q = 0.5 * (f_q + f_q.T)
    finv = safe_inverse(f_q)
    cr = float(np.trace(c @ finv))
    x_sld = np.array([[np.trace(lk @ b).real for lk in ls] for b in basis]) @ finv

    # null space of a_mat^T (directions preserving the constraints)
    u, sv, _ = np.linalg.svd(a_mat, full_matrices=True)
    null = u[:, p:]
    sqc = _sqrtm_psd(c)

    def exact(x):
        re = x.T @ s_re @ x
        im = x.T @ k_im @ x
        return float(np.trace(c @ re)) + _trace_norm(sqc @ im @ sqc)

    def smooth(y, eps):
        x = x_sld + null @ y.reshape(nb - p, p)
        val = np.trace(c @ (x.T @ s_re @ x))
        grad = 2 * s_re @ x @ c
        am = sqc @ (x.T @ k_im @ x) @ sqc
        w, v = np.linalg.eigh(am.T @ am + eps**2 * np.eye(p))
        root = np.sqrt(w)
        val += np.sum(root) - p * eps
        wmat = am @ ((v / root) @ v.T)
        grad += k_im @ x @ sqc @ (wmat.T - wmat) @ sqc
        return float(val), (null.T @ grad).ravel()

    if nb == p or not np.any(k_im):
        # nothing to optimise or no imaginary part: the SLD point is optimal
        if nb == p:
            return HolevoResult(exact(x_sld), cr, x_sld) if full else exact(x_sld)

    rng = np.random.default_rng(seed)
    starts = [np.zeros((nb - p) * p)]
    scale = np.linalg.norm(x_sld) / np.sqrt(x_sld.size)
    starts += [scale * rng.standard_normal((nb - p) * p) for _ in range(max(0, restarts - 1))]
    best_val, best_x = exact(x_sld), x_sld
    for y in starts:
        for eps in (1e-2, 1e-4, 1e-6, 1e-9):
            res = optimize.minimize(smooth, y, args=(eps,), jac=True, method="L-BFGS-B",
                                    options={"maxiter": 5000, "ftol": 1e-15, "gtol": 1e-11})
            y = res.x
        x = x_sld + null @ y.reshape(nb - p, p)
        val = exact(x)
        if val < best_val - 1e-15:
            best_val, best_x = val, x
    return HolevoResult(best_val, cr, best_x) if full else best_val
