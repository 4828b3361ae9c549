"""Estimators on finite-outcome models and their Monte Carlo error.

Repeated i.i.d. experiments are summarised by outcome counts, which are a
sufficient statistic; every estimator here maps a count vector to a number.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import xlogy

from .fisher import ProbModel, SingularModelError, classical_fi
from .rng import chunks, stream

GRID_POINTS = 10_000
GOLDEN = (np.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class ScalarModel(ProbModel):
    """Single-parameter model with vectorised evaluation.

    ``batch(thetas)`` maps an array of shape (n,) to probabilities of shape
    (n, outcomes); ``dbatch`` does the same for derivatives.
    """

    batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    dbatch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    labels: tuple = ()


def scalar_model(batch, dbatch, labels=()) -> ScalarModel:
    return ScalarModel(
        prob=lambda th: batch(np.atleast_1d(th[:1]))[0],
        n_params=1,
        dprob=lambda th, i: dbatch(np.atleast_1d(th[:1]))[0],
        batch=batch,
        dbatch=dbatch,
        labels=tuple(labels),
    )


def coin_model() -> ScalarModel:
    """Two-outcome interferometer: p(1|theta) = (1 + sin theta)/2."""

    def batch(t):
        s = np.sin(np.asarray(t, dtype=float))
        return np.stack([(1 - s) / 2, (1 + s) / 2], axis=-1)

    def dbatch(t):
        c = np.cos(np.asarray(t, dtype=float))
        return np.stack([-c / 2, c / 2], axis=-1)

    return scalar_model(batch, dbatch, labels=(0, 1))


def ml_coin(s, k):
    """Closed-form ML estimate for the coin from the number ``s`` of ones."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s > k):
        raise ValueError("outcome sum must lie in [0, k]")
    return np.arcsin(np.clip(2 * s / k - 1, -1.0, 1.0))


@dataclass(frozen=True)
class NoonMixture(ScalarModel):
    M: int = 1
    fi_closed: float = 1.0
    mean_energy: float = 0.5


def noon_mixture_model(M: int) -> NoonMixture:
    """Mixture of n00n probes m = 1..M drawn with weight proportional to m^-3.

    Outcomes are ordered (m=1,+), (m=1,-), (m=2,+), ...
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    m = np.arange(1, M + 1, dtype=float)
    norm = np.sum(m**-3.0)
    w = m**-3.0 / norm

    def batch(t):
        x = np.asarray(t, dtype=float)[..., None] * m / 2
        c2, s2 = np.cos(x) ** 2 * w, np.sin(x) ** 2 * w
        return np.stack([c2, s2], axis=-1).reshape(*np.shape(t), 2 * M)

    def dbatch(t):
        x = np.asarray(t, dtype=float)[..., None] * m
        d = np.sin(x) * m / 2 * w
        return np.stack([-d, d], axis=-1).reshape(*np.shape(t), 2 * M)

    base = scalar_model(batch, dbatch, labels=[(int(k), sgn) for k in m for sgn in "+-"])
    return NoonMixture(
        prob=base.prob, n_params=1, dprob=base.dprob, batch=batch, dbatch=dbatch,
        labels=base.labels, M=M,
        fi_closed=float(np.sum(1 / m) / norm),
        mean_energy=float(np.sum(1 / (2 * m**2)) / norm),
    )


# estimators -----------------------------------------------------------------

@dataclass(frozen=True)
class EstimatorSpec:
    """An estimator acting on count vectors of shape (..., outcomes)."""

    kind: str
    estimate: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)

    def __call__(self, counts) -> np.ndarray:
        return self.estimate(np.asarray(counts))


def coin_ml_estimator() -> EstimatorSpec:
    def est(counts):
        k = counts.sum(axis=-1)
        return ml_coin(counts[..., 1], k) if np.isscalar(k) else np.arcsin(np.clip(2 * counts[..., 1] / k - 1, -1, 1))

    return EstimatorSpec("maximum-likelihood", est, {"closed_form": "arcsin(2s/k-1)"})


def locally_unbiased_estimator(model: ProbModel, theta0: float) -> EstimatorSpec:
    """theta0 + (1/(kF)) sum_x n_x p'(x)/p(x), unbiased to first order at theta0."""
    f = float(classical_fi(model, theta0)[0, 0])
    if f <= 0:
        raise ValueError("Fisher information vanishes at theta0")
    p = model.p(theta0)
    dp = model.dp(theta0)
    score = np.where(p > 0, dp / np.where(p > 0, p, 1.0), 0.0)

    def est(counts):
        counts = np.asarray(counts, dtype=float)
        k = counts.sum(axis=-1)
        return theta0 + (counts @ score) / (k * f)

    return EstimatorSpec("locally-unbiased", est, {"theta0": theta0, "fisher": f})


def ml_estimator(model: ScalarModel, lo: float, hi: float, grid_points: int = GRID_POINTS,
                 tol: float = 1e-10) -> EstimatorSpec:
    """Grid-search ML followed by golden-section refinement inside the best cell."""
    if model.batch is None:
        raise ValueError("grid ML needs a vectorised model")
    grid = np.linspace(lo, hi, grid_points)
    with np.errstate(divide="ignore"):
        logp = np.log(np.clip(model.batch(grid), 0.0, None)).T  # (outcomes, grid)
    step = grid[1] - grid[0]

    def loglik(counts, th):
        p = model.batch(th)
        return np.sum(xlogy(counts, p), axis=-1)

    def est(counts):
        counts = np.atleast_2d(np.asarray(counts, dtype=float))
        with np.errstate(invalid="ignore"):
            ll = counts @ np.where(np.isfinite(logp), logp, -1e300)
        best = grid[np.argmax(ll, axis=1)]
        a = np.clip(best - step, lo, hi)
        b = np.clip(best + step, lo, hi)
        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        fc, fd = loglik(counts, c), loglik(counts, d)
        while np.max(b - a) > tol:
            left = fc > fd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            nc = np.where(left, b - GOLDEN * (b - a), d)
            nd = np.where(left, c, a + GOLDEN * (b - a))
            probe = np.where(left, nc, nd)
            fp = loglik(counts, probe)
            fd_new = np.where(left, fc, fp)
            fc_new = np.where(left, fp, fd)
            c, d, fc, fd = nc, nd, fc_new, fd_new
        out = (a + b) / 2
        # refinement only helps if it beats the grid point
        keep = loglik(counts, out) >= loglik(counts, best)
        return np.where(keep, out, best)

    return EstimatorSpec("maximum-likelihood", est, {"lo": lo, "hi": hi, "grid": grid_points})


# Monte Carlo ----------------------------------------------------------------

@dataclass(frozen=True)
class McResult:
    k: int
    n_samples: int
    mean_estimate: float
    mse: float
    mse_stderr: float
    seed: int


def sample_counts(p: np.ndarray, k: int, n: int, seed: int) -> np.ndarray:
    """Multinomial count vectors, shape (n, outcomes).

    Outcomes are drawn in order of increasing probability so the result does
    not depend on how the model happens to label its outcomes.
    """
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    p = p / p.sum()
    order = np.argsort(p, kind="stable")
    out = np.empty((n, p.size), dtype=np.int64)
    for idx, start, stop in chunks(n):
        out[start:stop][:, order] = stream(seed, idx).multinomial(k, p[order], size=stop - start)
    return out


def mc_squared_errors(model: ProbModel, estimator, theta: float, k: int, n_samples: int, seed: int):
    if k < 1 or n_samples < 1:
        raise ValueError("k and n_samples must be at least 1")
    counts = sample_counts(model.p(theta), k, n_samples, seed)
    est = np.asarray(estimator(counts), dtype=float).reshape(-1)
    return est, (est - theta) ** 2


def mc_mse(model: ProbModel, estimator, theta: float, k: int, n_samples: int, seed: int) -> McResult:
    """Empirical MSE of ``estimator`` from ``n_samples`` runs of k repetitions."""
    est, sq = mc_squared_errors(model, estimator, theta, k, n_samples, seed)
    stderr = float(np.std(sq, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return McResult(k, n_samples, float(np.mean(est)), float(np.mean(sq)), stderr, seed)


def derive_seed(seed: int, *tags: int) -> int:
    """Deterministic child seed for one cell of a parameter sweep."""
    ss = np.random.SeedSequence([int(seed) & ((1 << 64) - 1), *[int(t) for t in tags]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# figure data ----------------------------------------------------------------

CONV_THETA = 1.78072
CONV_M = (1, 2, 8, 128)
CONV_K = tuple(int(k) for k in np.unique(np.round(np.logspace(0, 5, 21)).astype(int)))


def convergence_study(M_list: Sequence[int] = CONV_M, k_grid: Sequence[int] = CONV_K,
                      theta: float = CONV_THETA, n_samples: int = 20, seed: int = 0,
                      repetitions: int = 100) -> list[dict]:
    """MSE of the ML estimator on n00n mixtures against 1/(k F).

    Each point averages ``repetitions`` independent MSE estimates of
    ``n_samples`` runs each. Rows are sorted by (M, k).
    """
    rows = []
    for M in sorted(M_list):
        model = noon_mixture_model(M)
        est = ml_estimator(model, 0.0, np.pi)
        for k in sorted(k_grid):
            n = n_samples * repetitions
            _, sq = mc_squared_errors(model, est, theta, int(k), n, derive_seed(seed, M, k))
            per_rep = sq.reshape(repetitions, n_samples).mean(axis=1)
            rows.append({
                "M": M, "k": int(k), "mse": float(per_rep.mean()),
                "stderr": float(per_rep.std(ddof=1) / np.sqrt(repetitions)) if repetitions > 1 else 0.0,
                "cr": 1.0 / (k * model.fi_closed),
            })
    return rows


def entry_k(rows: list[dict], M: int, band=(0.8, 1.3)) -> Optional[int]:
    """Smallest k from which mse/cr stays inside ``band`` for the rest of the grid."""
    sub = sorted((r for r in rows if r["M"] == M), key=lambda r: r["k"])
    found = None
    for r in reversed(sub):
        if band[0] <= r["mse"] / r["cr"] <= band[1]:
            found = r["k"]
        else:
            break
    return found


MSE_THETAS = tuple(np.round(np.linspace(-1.5, 1.5, 31), 6))
MSE_K = (2, 10, 100)
LUE_THETA0 = (0.0, 1.0)


def fig_mse_table(k_list: Sequence[int] = MSE_K, theta_grid: Sequence[float] = MSE_THETAS,
                  n_samples: int = 10_000, seed: int = 0, lue_theta0=LUE_THETA0, lue_k: int = 100) -> list[dict]:
    """Mean and MSE of coin estimators across a phase grid."""
    model = coin_model()
    ml = coin_ml_estimator()
    rows = []
    for ki, k in enumerate(k_list):
        for ti, th in enumerate(theta_grid):
            r = mc_mse(model, ml, float(th), int(k), n_samples, derive_seed(seed, 0, ki, ti))
            rows.append({"estimator": "ml", "theta0": "", "theta": float(th), "k": int(k),
                         "mean": r.mean_estimate, "mse": r.mse})
    for ji, t0 in enumerate(lue_theta0):
        lue = locally_unbiased_estimator(model, t0)
        for ti, th in enumerate(theta_grid):
            r = mc_mse(model, lue, float(th), lue_k, n_samples, derive_seed(seed, 1, ji, ti))
            rows.append({"estimator": "locally-unbiased", "theta0": float(t0), "theta": float(th),
                         "k": int(lue_k), "mean": r.mean_estimate, "mse": r.mse})
    return rows
