"""Airy function of the first kind and its derivative, without a special-function library.

On [-9, 5] the Maclaurin series is summed in 60-digit decimal arithmetic,
which absorbs the cancellation between the two series. Outside that range
the Poincare asymptotic expansions are summed up to their smallest term;
at the switch points the truncation error is below 1e-12.
"""
from __future__ import annotations

import math
from decimal import Decimal, localcontext
from functools import lru_cache

import numpy as np

AI0 = Decimal("0.355028053887817239260063186004183176397979174199177240583327")
AIP0 = Decimal("-0.258819403792806798405183560189203963479091138354934582210002")

X_MIN, X_MAX = -15.0, 10.0
SERIES_LO, SERIES_HI = -9.0, 5.0
DIGITS = 60


class AiryDomainError(ValueError):
    pass


def _series(x: float) -> tuple[float, float]:
    with localcontext() as ctx:
        ctx.prec = DIGITS
        xd = Decimal(repr(float(x)))
        x3 = xd**3
        # f = sum 3^k (1/3)_k x^{3k}/(3k)!, g = sum 3^k (2/3)_k x^{3k+1}/(3k+1)!
        f = t = Decimal(1)
        g = u = xd
        fp = Decimal(0)
        gp = Decimal(1)
        tiny = Decimal(10) ** (-DIGITS + 5)
        k = 0
        while True:
            t = t * x3 / ((3 * k + 2) * (3 * k + 3))
            u = u * x3 / ((3 * k + 3) * (3 * k + 4))
            f += t
            g += u
            # derivatives of the new terms
            fp += t * (3 * k + 3) / xd if xd != 0 else 0
            gp += u * (3 * k + 4) / xd if xd != 0 else 0
            k += 1
            if abs(t) + abs(u) < tiny and k > 3:
                break
        c1, c2 = AI0, -AIP0
        ai = c1 * f - c2 * g
        aip = c1 * fp - c2 * gp
        return float(ai), float(aip)


@lru_cache(maxsize=None)
def _u_coeffs(n: int = 40) -> tuple[list[float], list[float]]:
    u = [1.0]
    for k in range(n):
        u.append(u[-1] * (6 * k + 5) * (6 * k + 3) * (6 * k + 1) / ((2 * k + 1) * 216 * (k + 1)))
    v = [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(n + 1)]
    return u, v


def _truncated(coeffs, zeta: float, alternate: bool) -> float:
    """Sum c_k (-1)^k zeta^-k (or without sign) stopping at the smallest term."""
    total, prev = 0.0, math.inf
    for k, c in enumerate(coeffs):
        term = c * zeta**-k * ((-1) ** k if alternate else 1)
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
    return total


def _asymptotic(x: float) -> tuple[float, float]:
    u, v = _u_coeffs()
    if x > 0:
        z = 2.0 / 3.0 * x**1.5
        pre = math.exp(-z) / (2 * math.sqrt(math.pi))
        ai = pre * x**-0.25 * _truncated(u, z, True)
        aip = -pre * x**0.25 * _truncated(v, z, True)
        return ai, aip
    a = -x
    z = 2.0 / 3.0 * a**1.5
    ph = z - math.pi / 4
    def alt(c, off):
        return [c[2 * k + off] * (-1) ** k for k in range((len(c) - off) // 2)]
    # even/odd parts with alternating signs, each summed in powers of zeta
    ue = _truncated([c for c in alt(u, 0)], z * z, False)
    uo = _truncated([c for c in alt(u, 1)], z * z, False) / z
    ve = _truncated([c for c in alt(v, 0)], z * z, False)
    vo = _truncated([c for c in alt(v, 1)], z * z, False) / z
    ai = (math.cos(ph) * ue + math.sin(ph) * uo) / (math.sqrt(math.pi) * a**0.25)
    aip = a**0.25 / math.sqrt(math.pi) * (math.sin(ph) * ve - math.cos(ph) * vo)
    return ai, aip


def _airy_pair(x: float) -> tuple[float, float]:
    x = float(x)
    if not (X_MIN <= x <= X_MAX):
        raise AiryDomainError(f"x = {x} outside supported range [{X_MIN}, {X_MAX}]")
    if SERIES_LO <= x <= SERIES_HI:
        return _series(x)
    return _asymptotic(x)


def airy_ai(x):
    """Ai(x) on [-15, 10], accurate to about 1e-12 absolute."""
    if np.ndim(x) == 0:
        return _airy_pair(x)[0]
    return np.array([_airy_pair(v)[0] for v in np.ravel(x)]).reshape(np.shape(x))


def airy_aip(x):
    """Ai'(x) on [-15, 10]."""
    if np.ndim(x) == 0:
        return _airy_pair(x)[1]
    return np.array([_airy_pair(v)[1] for v in np.ravel(x)]).reshape(np.shape(x))


@lru_cache(maxsize=1)
def airy_first_zero(tol: float = 1e-15) -> float:
    """Largest zero of Ai, by bisection on [-3, -2]."""
    lo, hi = -3.0, -2.0
    flo = airy_ai(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = airy_ai(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)
