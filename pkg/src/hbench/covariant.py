"""Covariant phase estimation with a flat prior and cost 4 sin^2(error/2).

A pure probe sum_m c_m e^{i m theta}|m> with real non-negative c_m has
Bayesian cost c^T T c, where T is tridiagonal with 2 on the diagonal and
-1 beside it. The continuous, fixed-mean-energy version of the same problem
is solved by a shifted Airy function.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.linalg import eigh_tridiagonal

from .airy import airy_ai, airy_aip, airy_first_zero

QUAD_TOL = 1e-9


@dataclass(frozen=True)
class PhaseState:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if np.any(c < 0):
            raise ValueError("phase-state coefficients must be non-negative")
        if abs(np.sum(c**2) - 1) > 1e-12:
            raise ValueError("phase-state coefficients are not normalised")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def normalised(cls, c) -> "PhaseState":
        c = np.abs(np.asarray(c, dtype=float))
        return cls(c / np.linalg.norm(c))

    @property
    def N(self) -> int:
        return self.coeffs.size - 1


def tridiagonal_cost_matrix(N: int) -> np.ndarray:
    return 2 * np.eye(N + 1) - np.eye(N + 1, k=1) - np.eye(N + 1, k=-1)


def phase_bayes_cost(state: PhaseState) -> float:
    """sum_m (2 c_m^2 - c_m c_{m+1} - c_m c_{m-1})."""
    c = state.coeffs
    return float(2 * np.dot(c, c) - 2 * np.dot(c[:-1], c[1:]))


def optimal_sin_state(N: int) -> tuple[PhaseState, float]:
    """Minimal eigenvector of T and its eigenvalue, in closed form."""
    if N < 1:
        raise ValueError("N must be at least 1")
    m = np.arange(N + 1)
    c = np.sqrt(2 / (N + 2)) * np.sin((m + 1) * np.pi / (N + 2))
    return PhaseState.normalised(c), 2 * (1 - np.cos(np.pi / (N + 2)))


def min_eigen_cost(N: int) -> float:
    """Smallest eigenvalue of T from a tridiagonal eigensolver."""
    w = eigh_tridiagonal(2 * np.ones(N + 1), -np.ones(N), eigvals_only=True,
                         select="i", select_range=(0, 0))
    return float(w[0])


def dft_vectors(N: int) -> np.ndarray:
    """Columns chi_j = (N+1)^-1/2 sum_m e^{2 pi i j m/(N+1)} |m>."""
    m = np.arange(N + 1)
    return np.exp(2j * np.pi * np.outer(m, m) / (N + 1)) / np.sqrt(N + 1)


def dft_povm_cost(state: PhaseState, n_theta: int | None = None) -> float:
    """Bayesian cost of the DFT measurement with estimates 2 pi j/(N+1).

    The integrand is a trigonometric polynomial of degree N + 1 in theta, so
    the periodic trapezoid rule on more than N + 2 nodes is exact.
    """
    c = state.coeffs
    N = state.N
    n_theta = n_theta or 4 * (N + 2)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    m = np.arange(N + 1)
    psi = c[None, :] * np.exp(1j * np.outer(theta, m))  # (theta, m)
    chi = dft_vectors(N)
    prob = np.abs(psi @ chi.conj()) ** 2  # (theta, j)
    est = 2 * np.pi * np.arange(N + 1) / (N + 1)
    cost = 4 * np.sin((theta[:, None] - est[None, :]) / 2) ** 2
    return float(np.mean(np.sum(prob * cost, axis=1)))


def _tail_shape(x):
    """(1 + cos x)/(x^2 - pi^2)^2 written so x = +-pi is regular."""
    a = np.abs(np.asarray(x, dtype=float))
    return 0.5 * np.sinc((a - np.pi) / (2 * np.pi)) ** 2 / (a + np.pi) ** 2


@lru_cache(maxsize=1)
def _tail_integral(periods: int = 2000) -> float:
    """Integral of the tail shape over the real line in the variable N*Delta."""
    total = 0.0
    for k in range(periods):
        total += integrate.quad(_tail_shape, 2 * np.pi * k, 2 * np.pi * (k + 1),
                                epsabs=1e-15, epsrel=1e-13)[0]
    x = 2 * np.pi * periods
    # beyond x the shape averages to 1/x^4 (1 + 2 pi^2/x^2 + ...)
    total += 1 / (3 * x**3) + 2 * np.pi**2 / (5 * x**5)
    return 2 * total


def tail_distribution(N: int, delta):
    """Density of the estimation error of the sin state under the DFT measurement, large N.

    Proportional to (1 + cos N delta)/(N^2 delta^2 - pi^2)^2 and normalised
    numerically over the real line.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    return N * _tail_shape(N * np.asarray(delta, dtype=float)) / _tail_integral()


def phase_table(N_max: int) -> list[dict]:
    rows = []
    for N in range(1, N_max + 1):
        _, cost = optimal_sin_state(N)
        rows.append({"N": N, "cost": cost, "N2_cost": N * N * cost})
    return rows


# fixed mean energy ------------------------------------------------------------

def airy_cost_constant() -> float:
    a0 = airy_first_zero()
    return 4 * abs(a0) ** 3 / 27


@dataclass(frozen=True)
class AirySolution:
    """Optimal profile f(mu) on mu >= 0 for unit mean energy."""

    A0: float
    mu: np.ndarray
    f: np.ndarray
    cost_constant: float
    energy: float = 1.0

    @property
    def scale(self) -> float:
        return 2 * abs(self.A0) / 3

    def profile(self, mu):
        """Profile rescaled to mean energy ``energy``."""
        mu = np.asarray(mu, dtype=float) / self.energy
        s = self.scale
        u = np.minimum(self.A0 + s * mu, 10.0)
        val = np.sqrt(s) / airy_aip(self.A0) * airy_ai(u)
        return np.where(mu >= 0, val, 0.0) / np.sqrt(self.energy)

    def dprofile(self, mu):
        mu = np.asarray(mu, dtype=float) / self.energy
        s = self.scale
        u = np.minimum(self.A0 + s * mu, 10.0)
        return s**1.5 / airy_aip(self.A0) * airy_aip(u) / self.energy**1.5

    def upper(self) -> float:
        return self.energy * (10.0 - self.A0) / self.scale

    def moments(self) -> tuple[float, float, float]:
        """(norm, mean, kinetic energy) by adaptive quadrature."""
        up = self.upper()
        kw = dict(epsabs=QUAD_TOL * 1e-3, epsrel=1e-12, limit=200)
        norm = integrate.quad(lambda m: self.profile(m) ** 2, 0, up, **kw)[0]
        mean = integrate.quad(lambda m: m * self.profile(m) ** 2, 0, up, **kw)[0]
        kin = integrate.quad(lambda m: self.dprofile(m) ** 2, 0, up, **kw)[0]
        return norm, mean, kin


def mean_energy_solution(E: float = 1.0, n_grid: int = 400) -> tuple[AirySolution, float]:
    """Minimal-cost profile at mean energy ``E`` and its cost c/E^2."""
    if E <= 0:
        raise ValueError("mean energy must be positive")
    a0 = airy_first_zero()
    c = 4 * abs(a0) ** 3 / 27
    s = 2 * abs(a0) / 3
    mu = np.linspace(0, E * (10.0 - a0) / s, n_grid)
    tmp = AirySolution(a0, mu, np.zeros_like(mu), c, E)
    f = tmp.profile(mu)
    f[0] = 0.0
    return AirySolution(a0, mu, f, c, E), c / E**2


def profile_energy(f, df, upper: float) -> tuple[float, float, float]:
    """(norm, mean, kinetic energy) of an arbitrary profile on [0, upper]."""
    kw = dict(epsabs=1e-12, epsrel=1e-11, limit=400)
    norm = integrate.quad(lambda m: f(m) ** 2, 0, upper, **kw)[0]
    mean = integrate.quad(lambda m: m * f(m) ** 2, 0, upper, **kw)[0]
    kin = integrate.quad(lambda m: df(m) ** 2, 0, upper, **kw)[0]
    return norm, mean, kin


def admissible_profile(coeffs, decay: float):
    """mu * poly(mu) * exp(-decay mu), rescaled to unit norm and unit mean.

    Returns (f, df, upper) suitable for :func:`profile_energy`.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    poly = np.polynomial.Polynomial(coeffs)
    dpoly = poly.deriv()

    def g(m):
        return m * poly(m) * np.exp(-decay * m)

    def dg(m):
        return (poly(m) + m * dpoly(m) - decay * m * poly(m)) * np.exp(-decay * m)

    upper = 60.0 / decay
    n0, m0, _ = profile_energy(g, dg, upper)
    mean = m0 / n0
    # h(mu) = sqrt(mean/n0) g(mean mu) has unit norm and unit mean
    a = np.sqrt(mean / n0)

    def f(m):
        return a * g(mean * m)

    def df(m):
        return a * mean * dg(mean * m)

    return f, df, upper / mean
