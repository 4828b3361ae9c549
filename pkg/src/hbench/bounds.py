"""Finite-resource lower bounds on minimax and Bayesian phase-estimation cost.

Each bound carries a correction 1 - 8 ln(x)/x with x the product of
resources, generator span and prior width. The correction is only positive
for x >= 26.1; below that the report is marked non-informative rather than
clamped.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .covariant import airy_cost_constant

INFORMATIVE_X = 26.1


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    informative: bool
    inputs: dict = field(default_factory=dict)
    notes: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _positive(**kw):
    for k, v in kw.items():
        if not (v > 0):
            raise ValueError(f"{k} must be positive, got {v}")


def log_correction(x: float) -> float:
    return 1.0 - 8.0 * math.log(x) / x


def informative_threshold() -> float:
    """Exact larger root of x = 8 ln x (about 26.09); the reports use 26.1."""
    return optimize.brentq(log_correction, 3.0, 100.0, xtol=1e-14)


def _report(name, scale, x, inputs, bayes=False, notes=""):
    corr = 8.0 * math.log(x) / x
    factor = 1.0 - (math.sqrt(corr) if bayes and corr > 0 else corr)
    return BoundReport(name, scale * factor, x >= INFORMATIVE_X, dict(inputs), notes)


def pi_corrected_minimax(N: float, lam: float, delta: float) -> BoundReport:
    """Minimax MSE bound (pi^2/(lam N)^2)(1 - 8 ln x/x) with x = N lam delta."""
    _positive(N=N, lam=lam, delta=delta)
    x = N * lam * delta
    return _report("pi-minimax", math.pi**2 / (lam * N) ** 2, x,
                   {"N": N, "lambda": lam, "delta": delta},
                   notes="informative for N*lambda*delta >= 26.1")


def pi_corrected_bayes(N: float, lam: float, delta: float) -> BoundReport:
    """Bayesian variant with the slower correction sqrt(8 ln x/x)."""
    _positive(N=N, lam=lam, delta=delta)
    x = N * lam * delta
    return _report("pi-bayes", math.pi**2 / (lam * N) ** 2, x,
                   {"N": N, "lambda": lam, "delta": delta}, bayes=True,
                   notes="flat prior of width delta; informative for N*lambda*delta >= 26.1")


def mean_energy_minimax(E: float, delta: float) -> BoundReport:
    """Bound (4|A0|^3/27)/E^2 (1 - 8 ln(E delta)/(E delta)), ground energy 0."""
    _positive(E=E, delta=delta)
    return _report("mean-energy", airy_cost_constant() / E**2, E * delta,
                   {"E": E, "delta": delta},
                   notes="constant 4|A0|^3/27 from the first Airy zero")


def frequency_bound(N_pr: float, T: float, lam_g: float, delta_w: float) -> BoundReport:
    _positive(N_pr=N_pr, T=T, lam_g=lam_g, delta_w=delta_w)
    return _report("frequency", math.pi**2 / (N_pr * lam_g * T) ** 2, N_pr * lam_g * delta_w,
                   {"N_pr": N_pr, "T": T, "lambda_G": lam_g, "delta_omega": delta_w},
                   notes="N_pr probes evolving for total time T")


def gradient_bound(N_pr: float, t: float, gamma: float, L_x: float, hbar: float = 1.0) -> BoundReport:
    """Asymptotic bound 4 pi^2/(N_pr t hbar gamma L_x)^2 for a field gradient."""
    _positive(N_pr=N_pr, t=t, gamma=gamma, L_x=L_x, hbar=hbar)
    return BoundReport("gradient", 4 * math.pi**2 / (N_pr * t * hbar * gamma * L_x) ** 2, True,
                       {"N_pr": N_pr, "t": t, "gamma": gamma, "L_x": L_x, "hbar": hbar},
                       notes="asymptotic form, no finite-size correction")


# Kaiser-window prior ----------------------------------------------------------

def _sinc4_arg(alpha: float, x):
    """sinc^4(pi alpha sqrt(x^2 - 1)), continued with sinh for |x| < 1."""
    x = np.asarray(x, dtype=float)
    t = x * x - 1.0
    y = np.pi * alpha * np.sqrt(np.abs(t))
    out = np.ones_like(y)
    inside = (t < 0) & (y > 0)
    outside = (t > 0) & (y > 0)
    out[inside] = np.sinh(y[inside]) / y[inside]
    out[outside] = np.sin(y[outside]) / y[outside]
    return out**4


def normalization_bound(alpha: float) -> float:
    """Asymptotically tight upper bound 4 sqrt2 pi^4 alpha^{7/2} e^{-4 pi alpha}."""
    return 4 * math.sqrt(2) * math.pi**4 * alpha**3.5 * math.exp(-4 * math.pi * alpha)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(48)


def _gauss(f, edges) -> float:
    """Gauss-Legendre sum over consecutive panels given by ``edges``."""
    a, b = np.asarray(edges[:-1]), np.asarray(edges[1:])
    half = (b - a)[:, None] / 2
    x = (a + b)[:, None] / 2 + half * _GL_X[None, :]
    return float(np.sum(half * _GL_W[None, :] * f(x)))


def _half_integral(alpha: float, power: int = 0, shift: float = 0.0, lo: float = 0.0,
                   periods: int = 400) -> float:
    """Integral over x in [lo, inf) of sinc^4(...) (x + shift)^power.

    The integrand is analytic between the zeros sqrt(1 + (k/alpha)^2) of the
    oscillating tail, so each such panel gets a Gauss-Legendre rule; the main
    lobe is split into 32 panels. Past the last zero, sinc^4 is replaced by
    its mean 3/8 y^-4.
    """
    f = lambda x: _sinc4_arg(alpha, x) * (x + shift) ** power
    total = 0.0
    if lo < 1.0:
        total += _gauss(f, np.linspace(lo, 1.0, 33))
    edges = np.sqrt(1.0 + (np.arange(periods + 1) / alpha) ** 2)
    edges = np.concatenate([[max(lo, 1.0)], edges[edges > max(lo, 1.0)]])
    total += _gauss(f, edges)
    x_end = edges[-1]
    tail = lambda x: 3.0 / 8.0 / (math.pi * alpha) ** 4 / (x * x - 1) ** 2 * (x + shift) ** power
    total += integrate.quad(tail, x_end, np.inf, epsabs=0, epsrel=1e-10)[0]
    return total


@lru_cache(maxsize=256)
def kaiser_normalization(alpha: float) -> float:
    """Numerical N_alpha (independent of the bandwidth L)."""
    return 1.0 / (2.0 * 4.0 * alpha * _half_integral(alpha))


@dataclass(frozen=True)
class KaiserPrior:
    """Prior whose Fourier transform is supported on a band of width L."""

    alpha: float
    L: float
    normalization: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0.5):
            raise ValueError("alpha must exceed 1/2")
        if not (self.L > 0):
            raise ValueError("bandwidth L must be positive")
        if self.normalization == 0.0:
            object.__setattr__(self, "normalization", kaiser_normalization(float(self.alpha)))

    @property
    def main_width(self) -> float:
        return 8 * self.alpha / self.L

    def density(self, theta):
        x = self.L * np.asarray(theta, dtype=float) / (4 * self.alpha)
        return self.normalization * self.L * _sinc4_arg(self.alpha, x)

    def tail_mass(self) -> float:
        """Probability outside [-4 alpha/L, 4 alpha/L]."""
        return 2 * self.normalization * 4 * self.alpha * _half_integral(self.alpha, lo=1.0)

    def within_bound(self, slack: float = 0.0) -> bool:
        return self.normalization <= normalization_bound(self.alpha) * (1 + slack)


def kaiser_prior(alpha: float, L: float) -> KaiserPrior:
    return KaiserPrior(alpha, L)


def r2_tail_bound(alpha: float, L: float) -> float:
    """Closed upper bound 14 N_alpha L (4 alpha/L)^3 with the analytic N_alpha bound."""
    if not (alpha > 0.5):
        raise ValueError("alpha must exceed 1/2")
    return 14 * normalization_bound(alpha) * L * (4 * alpha / L) ** 3


def r2_tail_quadrature(alpha: float, L: float, delta: float | None = None) -> float:
    """Tail term 2 N_alpha int_{4alpha/L}^inf L sinc^4(...) (theta + delta/2)^2 dtheta.

    Uses the numerical normalization.
    """
    delta = 8 * alpha / L if delta is None else delta
    a = 4 * alpha / L
    # theta = a x, theta + delta/2 = a (x + delta/(2a))
    integral = _half_integral(alpha, power=2, shift=delta / (2 * a), lo=1.0)
    return 2 * kaiser_normalization(alpha) * L * a**3 * integral


def appendix_b_margin(y, n_scale: float = 1.0):
    """L^2 B_2 = pi^2 (2z)^2 (3z^2 + 2z^3)/(1+z)^2 - 14 N_{ln y} (4 ln y)^3, z = 4 ln(y)/y.

    ``n_scale`` multiplies the normalization bound (used to show the check
    can fail).
    """
    y = np.asarray(y, dtype=float)
    a = np.log(y)
    z = 4 * a / y
    lead = np.pi**2 * (2 * z) ** 2 * (3 * z**2 + 2 * z**3) / (1 + z) ** 2
    nb = 4 * np.sqrt(2) * np.pi**4 * a**3.5 * np.exp(-4 * np.pi * a)
    return lead - 14 * n_scale * nb * (4 * a) ** 3


def appendix_b_grid(y_min: float = 2.0, y_max: float = 1e6, per_decade: int = 200) -> np.ndarray:
    n = int(round(per_decade * math.log10(y_max / y_min))) + 1
    return np.logspace(math.log10(y_min), math.log10(y_max), n)


def verify_appendix_b(y_grid=None, n_scale: float = 1.0) -> tuple[bool, float]:
    """Positivity of the windowing remainder over a grid, and the smallest margin."""
    y_grid = appendix_b_grid() if y_grid is None else np.asarray(y_grid, dtype=float)
    if np.any(y_grid < 2):
        raise ValueError("grid must lie in [2, inf)")
    m = appendix_b_margin(y_grid, n_scale)
    return bool(np.all(m > 0)), float(np.min(m))
