"""Multiparameter cost formulas, QFI-matrix numerics and reparametrization bounds.

Spectral spans are always the eigenvalue difference lambda_max - lambda_min
of the generator as given. Closed-form costs follow the generator
conventions stated in each docstring.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import optimize
from scipy.linalg import expm
from scipy.special import gammaln

from .covariant import airy_cost_constant
from .fisher import qfi_pure
from .qmcore import PAULIS, dagger, spectral_span

MAX_ADAPTIVE_GATES = 6


@dataclass(frozen=True)
class GeneratorSet:
    generators: tuple

    def __post_init__(self):
        gens = tuple(np.array(g, dtype=complex) for g in self.generators)
        if not gens:
            raise ValueError("generator set is empty")
        d = gens[0].shape
        for g in gens:
            if g.shape != d or d[0] != d[1]:
                raise ValueError("generators must be square and of equal dimension")
            if np.max(np.abs(g - dagger(g))) > 1e-12:
                raise ValueError("generators must be Hermitian")
            g.setflags(write=False)
        object.__setattr__(self, "generators", gens)

    @property
    def p(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return self.generators[0].shape[0]

    def combine(self, coeffs) -> np.ndarray:
        return np.tensordot(np.asarray(coeffs, dtype=float), np.array(self.generators), axes=1)

    def rotated(self, o: np.ndarray) -> "GeneratorSet":
        """Generators [O^T Lambda]_i = sum_j O_ji Lambda_j."""
        o = np.asarray(o, dtype=float)
        return GeneratorSet(tuple(self.combine(o[:, i]) for i in range(self.p)))


@dataclass(frozen=True)
class CostScenario:
    model: str
    strategy: str
    p: int
    k: float | None
    n: float | None
    N: float | None
    value: float

    def __post_init__(self):
        if not (self.value > 0):
            raise ValueError("cost must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


# generator sets ---------------------------------------------------------------

def su2_generators() -> GeneratorSet:
    """sigma/2, so each has span 1."""
    return GeneratorSet(tuple(s / 2 for s in PAULIS))


def multiphase_generators(p: int) -> GeneratorSet:
    """|i><i| for i = 1..p on a (p+1)-dimensional space with reference level 0."""
    gens = []
    for i in range(1, p + 1):
        g = np.zeros((p + 1, p + 1))
        g[i, i] = 1
        gens.append(g)
    return GeneratorSet(tuple(gens))


def two_point_generators(convention: str = "half") -> GeneratorSet:
    """|i><i| x sigma_z/2 (``half``, span 1) or |i><i| x sigma_z (``pauli``, span 2)."""
    s = {"half": 0.5, "pauli": 1.0}[convention]
    z = np.diag([1.0, -1.0]) * s
    return GeneratorSet((np.kron(np.diag([1.0, 0.0]), z), np.kron(np.diag([0.0, 1.0]), z)))


# multi-phase interferometer -------------------------------------------------------

def multiphase_joint_state(p: int, n: int, theta=None):
    """beta|0> + alpha sum_i e^{i n theta_i}|i>, alpha = (p + sqrt p)^-1/2.

    Returns (psi, dpsi list) in the (p+1)-dimensional span of the reference
    level and the n-photon-in-arm-i levels.
    """
    theta = np.zeros(p) if theta is None else np.asarray(theta, dtype=float)
    alpha = 1 / math.sqrt(p + math.sqrt(p))
    beta = 1 / math.sqrt(1 + math.sqrt(p))
    psi = np.zeros(p + 1, complex)
    psi[0] = beta
    psi[1:] = alpha * np.exp(1j * n * theta)
    dpsi = []
    for i in range(p):
        d = np.zeros(p + 1, complex)
        d[i + 1] = 1j * n * psi[i + 1]
        dpsi.append(d)
    return psi, dpsi


def multiphase_joint_cr_explicit(p: int, n: int, k: int = 1) -> float:
    """tr F^-1 /k from the explicit QFI matrix of the joint state."""
    psi, dpsi = multiphase_joint_state(p, n)
    f = qfi_pure(psi, dpsi)
    return float(np.trace(np.linalg.inv(f))) / k


def dirichlet_log(c: Sequence[float], c0: float) -> float:
    """log of the simplex integral of prod mu_i^{c_i - 1} (1 - sum mu)^{c0 - 1}."""
    c = np.asarray(c, dtype=float)
    return float(np.sum(gammaln(c)) + gammaln(c0) - gammaln(np.sum(c) + c0))


def simplex_ansatz_energy(p: int, a_exp: float, b_exp: float) -> float:
    """Dirichlet energy of f = (prod mu_i)^a (1 - sum mu)^b on the p-simplex.

    With g = f^2 = prod mu^{2a} (1-s)^{2b}:
      |d_k f|^2 = g (a^2/mu_k^2 - 2ab/(mu_k (1-s)) + b^2/(1-s)^2),
    and every term is a Dirichlet integral. Finite iff a, b > 1/2.
    """
    if not (a_exp > 0.5 and b_exp > 0.5):
        raise ValueError("exponents must exceed 1/2 for a finite energy")
    a, b = a_exp, b_exp
    base = [2 * a + 1] * p
    norm = dirichlet_log(base, 2 * b + 1)
    first = [2 * a - 1] + [2 * a + 1] * (p - 1)
    mixed = [2 * a] + [2 * a + 1] * (p - 1)
    t1 = a * a * math.exp(dirichlet_log(first, 2 * b + 1) - norm)
    t2 = 2 * a * b * math.exp(dirichlet_log(mixed, 2 * b) - norm)
    t3 = b * b * math.exp(dirichlet_log(base, 2 * b - 1) - norm)
    return p * (t1 - t2 + t3)


def ansatz_closed_form(p: int) -> float:
    """Energy of the (3/2, sqrt p) ansatz in closed form."""
    r = math.sqrt(p)
    return p * (1 + 2 * r) ** 2 * r * (4 * p + 2 * r - 1) / (8 * r - 4)


@lru_cache(maxsize=None)
def _multiphase_reparam(p: int) -> float:
    return reparam_bound(multiphase_generators(p), 1.0, restarts=2 if p > 3 else 12)


def multiphase_costs(p: int, k: float = 1, n: float = 1, N: float = 1) -> list[CostScenario]:
    """Cost table for p phases against a common reference.

    CR rows use k repetitions of n-photon probes; MM rows use N photons in
    total. JNT-MM is the larger of the two available lower bounds (the Airy
    bound and the reparametrization bound).
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if min(k, n, N) <= 0:
        raise ValueError("resources must be positive")
    r = math.sqrt(p)
    c = airy_cost_constant()
    lower = c * p**3 / N**2
    rows = [
        ("SEP-CR", p**2 / (k * n**2)),
        ("JNT-CR", (1 + r) ** 2 * p / (4 * k * n**2)),
        ("SEP-MM", p**3 * math.pi**2 / N**2),
        ("JNT-MM-lower", lower),
        ("JNT-MM-ansatz", simplex_ansatz_energy(p, 1.5, r) / N**2),
        ("JNT-MM", max(lower, _multiphase_reparam(p) / N**2)),
    ]
    return [CostScenario("multiphase", s, p, k if "CR" in s else None, n if "CR" in s else None,
                         N if "MM" in s else None, float(v)) for s, v in rows]


# SU(2) ----------------------------------------------------------------------------

def sinc(x: float) -> float:
    return 1.0 if x == 0 else math.sin(x) / x


def su2_costs(n: float, k: float, theta_norm: float, N: float = 1) -> list[CostScenario]:
    """Costs for the three components of a magnetic field, generators sigma/2."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be at least 1")
    if not (0 <= theta_norm < math.pi):
        raise ValueError("theta_norm must lie in [0, pi)")
    f = 1 + 2 / sinc(theta_norm) ** 2
    rows = [
        ("SEP-CR", 3 / (k * n**2) * f),
        ("JNT-CR-parallel", 3 / (k * n * (n + 2)) * f),
        ("JNT-CR-adaptive", 1 / (k * n**2) * f),
        ("JNT-MM", 4 * math.pi**2 / N**2),
        ("SEP-MM-lower", 27 * math.pi**2 / N**2),
    ]
    return [CostScenario("su2", s, 3, k if "CR" in s else None, n if "CR" in s else None,
                         N if "MM" in s else None, float(v)) for s, v in rows]


def gate(generators: GeneratorSet, theta) -> tuple[np.ndarray, list[np.ndarray]]:
    """U = exp(i sum theta_i Lambda_i) and its exact partial derivatives.

    The derivative is the upper-right block of exp([[A, dA], [0, A]]).
    """
    theta = np.asarray(theta, dtype=float)
    a = 1j * generators.combine(theta)
    d = generators.dim
    u = expm(a)
    derivs = []
    for g in generators.generators:
        big = np.zeros((2 * d, 2 * d), complex)
        big[:d, :d] = a
        big[d:, d:] = a
        big[:d, d:] = 1j * g
        derivs.append(expm(big)[:d, d:])
    return u, derivs


def bell_probe(d: int) -> np.ndarray:
    v = np.zeros(d * d, complex)
    for i in range(d):
        v[i * d + i] = 1
    return v / math.sqrt(d)


def adaptive_qfi(generators: GeneratorSet, theta0, n: int, controls: str = "inverse-evolution",
                 probe=None) -> np.ndarray:
    """QFI matrix of V (U x 1) ... V (U x 1) |probe> at theta0 (n gates).

    ``controls`` is ``identity`` or ``inverse-evolution`` (V = U(theta0)^dag x 1).
    The probe lives on system x ancilla with equal dimensions; the default is
    the maximally entangled state.
    """
    if n < 1 or n > MAX_ADAPTIVE_GATES:
        raise ValueError(f"n must lie in [1, {MAX_ADAPTIVE_GATES}]")
    d = generators.dim
    psi = bell_probe(d) if probe is None else np.asarray(probe, dtype=complex)
    if psi.size != d * d:
        raise ValueError("probe must live on system x ancilla of equal dimensions")
    u, du = gate(generators, theta0)
    eye = np.eye(d)
    if controls == "identity":
        v = np.eye(d * d)
    elif controls == "inverse-evolution":
        v = np.kron(dagger(u), eye)
    else:
        raise ValueError("controls must be 'identity' or 'inverse-evolution'")
    step = v @ np.kron(u, eye)
    dsteps = [v @ np.kron(x, eye) for x in du]
    dpsi = [np.zeros_like(psi) for _ in du]
    for _ in range(n):
        dpsi = [ds @ psi + step @ dp for ds, dp in zip(dsteps, dpsi)]
        psi = step @ psi
    return qfi_pure(psi, dpsi)


def single_gate_qfi(generators: GeneratorSet, theta0, probe=None) -> np.ndarray:
    return adaptive_qfi(generators, theta0, 1, "identity", probe)


# two-point field ---------------------------------------------------------------------

def two_point_field_costs(k: float = 1, n: float = 1, N: float = 1) -> list[CostScenario]:
    """Field at two points, generators |i><i| x sigma_z/2."""
    rows = [
        ("JNT-MM", 4 * math.pi**2 / N**2),
        ("SEP-MM", 8 * math.pi**2 / N**2),
        ("JNT-CR", 4 / (k * n**2)),
        ("SEP-CR", 4 / (k * n**2)),
    ]
    return [CostScenario("two-point", s, 2, k if "CR" in s else None, n if "CR" in s else None,
                         N if "MM" in s else None, float(v)) for s, v in rows]


def two_point_rotated_spans(convention: str = "half") -> tuple[float, float]:
    """Spans of (Lambda_1 +- Lambda_2)/sqrt 2."""
    g = two_point_generators(convention).generators
    return (spectral_span((g[0] + g[1]) / math.sqrt(2)), spectral_span((g[0] - g[1]) / math.sqrt(2)))


# reparametrization bounds --------------------------------------------------------------

def _orthogonal(params: np.ndarray, p: int) -> np.ndarray:
    if p == 2:
        c, s = math.cos(params[0]), math.sin(params[0])
        return np.array([[c, s], [-s, c]])
    s = np.zeros((p, p))
    s[np.triu_indices(p, 1)] = params
    s = s - s.T
    if p == 3:
        # Rodrigues formula
        t = math.sqrt(params[0] ** 2 + params[1] ** 2 + params[2] ** 2)
        if t < 1e-12:
            return np.eye(3) + s
        return np.eye(3) + math.sin(t) / t * s + (1 - math.cos(t)) / t**2 * (s @ s)
    return expm(s)


def _spans(gens: np.ndarray, o: np.ndarray) -> np.ndarray:
    p, d = gens.shape[0], gens.shape[1]
    rot = (o.T @ gens.reshape(p, d * d)).reshape(p, d, d)
    w = np.linalg.eigvalsh(rot)
    return w[:, -1] - w[:, 0]


def reparam_value(generators: GeneratorSet, o: np.ndarray, N: float = 1) -> float:
    """sum_i pi^2/(lambda^2[(O^T Lambda)_i] N^2); infinite if a span vanishes."""
    s = _spans(np.array(generators.generators), np.asarray(o, dtype=float))
    if np.any(s <= 1e-14):
        return math.inf
    return float(np.sum(math.pi**2 / (s * s * N * N)))


def reparam_bound(generators: GeneratorSet, N: float = 1, restarts: int = 12, seed: int = 0,
                  full: bool = False):
    """Largest reparametrized sum over rotations O = exp(S), S skew.

    Starts from the identity and ``restarts`` random rotations, each refined
    by L-BFGS with difference gradients; the best one is polished by
    Nelder-Mead.
    """
    p = generators.p
    gens = np.array(generators.generators)
    if p == 1:
        v = reparam_value(generators, np.eye(1), N)
        return (v, np.eye(1)) if full else v
    m = p * (p - 1) // 2
    rng = np.random.default_rng(seed)

    def neg(x):
        s = _spans(gens, _orthogonal(x, p))
        if np.any(s <= 1e-14):
            return 0.0
        return -float(np.sum(math.pi**2 / (s * s)))

    starts = [np.zeros(m)] + [rng.uniform(-math.pi, math.pi, m) for _ in range(restarts)]
    opts = {"xatol": 1e-9, "fatol": 1e-13, "maxiter": 300 * m}
    best_f, best_x = neg(starts[0]), starts[0]
    for x0 in starts:
        res = optimize.minimize(neg, x0, method="L-BFGS-B", options={"maxiter": 200})
        if res.fun < best_f:
            best_f, best_x = res.fun, res.x
    # a second pass restarts the simplex at the optimum
    res = optimize.minimize(neg, best_x, method="Nelder-Mead", options=opts)
    if res.fun < best_f:
        best_f, best_x = res.fun, res.x
    best_v, best_o = -best_f / (N * N), _orthogonal(best_x, p)
    return (best_v, best_o) if full else best_v


def max_span_direction(generators: GeneratorSet, restarts: int = 16, seed: int = 0,
                       iters: int = 400) -> tuple[float, np.ndarray]:
    """max over unit a of span(a . Lambda), by projected subgradient ascent."""
    p = generators.p
    rng = np.random.default_rng(seed)
    gens = np.array(generators.generators)

    def span_grad(a):
        w, v = np.linalg.eigh(generators.combine(a))
        top, bot = v[:, -1], v[:, 0]
        g = np.real(np.einsum("i,kij,j->k", top.conj(), gens, top) - np.einsum("i,kij,j->k", bot.conj(), gens, bot))
        return w[-1] - w[0], g

    starts = [np.eye(p)[i] for i in range(p)] + [rng.standard_normal(p) for _ in range(restarts)]
    best_v, best_a = -1.0, None
    for a in starts:
        a = a / np.linalg.norm(a)
        local_v, local_a = span_grad(a)[0], a
        for t in range(iters):
            v, g = span_grad(a)
            if v > local_v:
                local_v, local_a = v, a
            g = g - np.dot(g, a) * a
            if np.linalg.norm(g) < 1e-14:
                break
            a = a + (0.5 / (1 + t)) * g / np.linalg.norm(g)
            a = a / np.linalg.norm(a)
        if local_v > best_v:
            best_v, best_a = local_v, local_a
    return float(best_v), best_a


def sep_plus_bound(generators: GeneratorSet, p: int | None = None, k: float = 1, n: float = 1,
                   N: float = 1) -> tuple[float, float]:
    """(mm, cr) = (p^3 pi^2/N^2, p^2/(k n^2)) divided by max_{|a|=1} span(a . Lambda)^2."""
    p = generators.p if p is None else p
    lam, _ = max_span_direction(generators)
    return (p**3 * math.pi**2 / N**2) / lam**2, (p**2 / (k * n**2)) / lam**2
