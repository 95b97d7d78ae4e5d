"""Classical orthogonal polynomials: evaluation and high-accuracy zeros.

This module is the independent oracle of the package.  Values come from the
forward three-term recurrences (with derivative recurrences run alongside);
zeros come from the eigenvalues of the symmetric tridiagonal matrix built
from the monic recurrence coefficients, polished by a few Newton steps.
Neither path touches the energy-minimization machinery, so agreement between
the two is a genuine cross-check.

Conventions: Jacobi P_n^(a,b) and Laguerre L_n^(a) in the standard
normalization, Hermite H_n in the physicists' normalization (H_2 = 4x^2 - 2).
Zero computations require the integrable-weight regime alpha, beta > -1;
plain evaluation works for any parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

JACOBI = "jacobi"
LAGUERRE = "laguerre"
HERMITE = "hermite"


@dataclass(frozen=True)
class ClassicalFamily:
    """One of the three classical families with its parameters."""

    kind: str
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in (JACOBI, LAGUERRE, HERMITE):
            raise ValueError(f"unknown family kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == JACOBI:
            return f"jacobi(alpha={self.alpha:g}, beta={self.beta:g})"
        if self.kind == LAGUERRE:
            return f"laguerre(alpha={self.alpha:g})"
        return "hermite"


def jacobi(alpha: float, beta: float) -> ClassicalFamily:
    return ClassicalFamily(JACOBI, float(alpha), float(beta))


def laguerre(alpha: float) -> ClassicalFamily:
    return ClassicalFamily(LAGUERRE, float(alpha))


def hermite() -> ClassicalFamily:
    return ClassicalFamily(HERMITE)


def _recurrence_step(family: ClassicalFamily, k: int):
    """Coefficients (a, b, c, d) with a*p_k = (b + c*x)*p_{k-1} - d*p_{k-2}, k >= 2."""
    if family.kind == JACOBI:
        al, be = family.alpha, family.beta
        s = 2 * k + al + be
        a = 2.0 * k * (k + al + be) * (s - 2.0)
        b = (s - 1.0) * (al * al - be * be)
        c = (s - 2.0) * (s - 1.0) * s
        d = 2.0 * (k + al - 1.0) * (k + be - 1.0) * s
        return a, b, c, d
    if family.kind == LAGUERRE:
        al = family.alpha
        return float(k), 2.0 * k - 1.0 + al, -1.0, k - 1.0 + al
    return 1.0, 0.0, 2.0, 2.0 * (k - 1.0)


def evaluate_with_second(family: ClassicalFamily, n: int, x):
    """Value, first and second derivative of p_n at ``x`` by forward recurrence."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x)
    one = np.ones(x.shape, dtype=x.dtype if np.iscomplexobj(x) else float)
    zero = np.zeros_like(one)
    p, dp, d2p = one, zero, zero
    if n == 0:
        return _collapse(p, dp, d2p, x)
    if family.kind == JACOBI:
        al, be = family.alpha, family.beta
        q = ((al + be + 2.0) * x + (al - be)) / 2.0
        dq = np.full_like(one, (al + be + 2.0) / 2.0)
    elif family.kind == LAGUERRE:
        q = 1.0 + family.alpha - x
        dq = np.full_like(one, -1.0)
    else:
        q = 2.0 * x
        dq = np.full_like(one, 2.0)
    p_prev, dp_prev, d2p_prev = p, dp, d2p
    p, dp, d2p = q, dq, zero
    for k in range(2, n + 1):
        a, b, c, d = _recurrence_step(family, k)
        lin = b + c * x
        p_next = (lin * p - d * p_prev) / a
        dp_next = (lin * dp + c * p - d * dp_prev) / a
        d2p_next = (lin * d2p + 2.0 * c * dp - d * d2p_prev) / a
        p_prev, dp_prev, d2p_prev = p, dp, d2p
        p, dp, d2p = p_next, dp_next, d2p_next
    return _collapse(p, dp, d2p, x)


def _collapse(p, dp, d2p, x):
    if np.asarray(x).ndim:
        return p, dp, d2p
    caster = complex if np.iscomplexobj(x) else float
    return caster(p), caster(dp), caster(d2p)


def evaluate(family: ClassicalFamily, n: int, x):
    """Value and first derivative of p_n at ``x`` (real or complex, scalar or array)."""
    p, dp, _ = evaluate_with_second(family, n, x)
    return p, dp


def _require_classical(family: ClassicalFamily) -> None:
    if family.kind == JACOBI and not (family.alpha > -1 and family.beta > -1):
        raise ValueError(
            f"zeros need the classical regime alpha, beta > -1; got {family.label()}"
        )
    if family.kind == LAGUERRE and not (family.alpha > -1):
        raise ValueError(f"zeros need alpha > -1; got {family.label()}")


def monic_recurrence(family: ClassicalFamily, n: int):
    """Monic recurrence coefficients: diagonal a_0..a_{n-1}, off-diagonal b_1..b_{n-1}.

    The monic polynomials satisfy pi_{k+1} = (x - a_k) pi_k - b_k pi_{k-1}
    with every b_k > 0 in the classical regime.
    """
    _require_classical(family)
    if n < 1:
        raise ValueError("need n >= 1")
    if family.kind == LAGUERRE:
        al = family.alpha
        diag = np.array([2.0 * k + al + 1.0 for k in range(n)])
        off = np.array([k * (k + al) for k in range(1, n)])
        return diag, off
    if family.kind == HERMITE:
        return np.zeros(n), np.array([k / 2.0 for k in range(1, n)])
    al, be = family.alpha, family.beta
    diag = np.empty(n)
    diag[0] = (be - al) / (al + be + 2.0)
    for k in range(1, n):
        s = 2.0 * k + al + be
        diag[k] = (be * be - al * al) / (s * (s + 2.0))
    off = np.empty(n - 1)
    if n > 1:
        # k = 1 written with the common factor (1+al+be) cancelled: the raw
        # quotient is 0/0 at al+be = -1 (Chebyshev-like parameters).
        off[0] = 4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + al + be) ** 2 * (3.0 + al + be))
    for k in range(2, n):
        s = 2.0 * k + al + be
        off[k - 1] = (
            4.0 * k * (k + al) * (k + be) * (k + al + be)
            / (s * s * (s + 1.0) * (s - 1.0))
        )
    return diag, off


def zeros(family: ClassicalFamily, n: int) -> np.ndarray:
    """The n simple real zeros of p_n, strictly increasing.

    Eigenvalues of the monic-recurrence tridiagonal matrix give globally
    ordered approximations; a few Newton corrections with the recurrence
    evaluator restore full double precision.  Jacobi zeros lie in (-1, 1),
    Laguerre zeros in (0, inf).
    """
    _require_classical(family)
    if n < 1:
        raise ValueError("need n >= 1")
    diag, off = monic_recurrence(family, n)
    if n == 1:
        roots = np.array([diag[0]])
    else:
        roots = eigh_tridiagonal(diag, np.sqrt(off), eigvals_only=True)
        roots = np.sort(roots)
    for i, x0 in enumerate(roots):
        x = float(x0)
        for _ in range(5):
            p, dp = evaluate(family, n, x)
            if dp == 0.0:
                break
            step = p / dp
            x -= step
            if abs(step) <= 1e-15 * max(1.0, abs(x)):
                break
        roots[i] = x
    if np.any(np.diff(roots) <= 0.0):
        raise RuntimeError(f"zero ordering lost for {family.label()}, n={n}")
    _check_residuals(family, n, roots)
    return roots


def _check_residuals(family: ClassicalFamily, n: int, roots: np.ndarray) -> None:
    p, dp = evaluate(family, n, roots)
    scale = np.abs(dp) * np.maximum(1.0, np.abs(roots))
    if np.any(np.abs(p) > 1e-8 * scale):
        raise RuntimeError(f"zero residuals too large for {family.label()}, n={n}")


def leading_coefficient(family: ClassicalFamily, n: int) -> float:
    """Leading coefficient k_n of p_n, so p_n / k_n is monic."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n == 0:
        return 1.0
    if family.kind == HERMITE:
        return 2.0**n
    if family.kind == LAGUERRE:
        sign = -1.0 if n % 2 else 1.0
        return sign * math.exp(-math.lgamma(n + 1.0))
    al, be = family.alpha, family.beta
    return math.exp(
        math.lgamma(2.0 * n + al + be + 1.0)
        - math.lgamma(n + al + be + 1.0)
        - math.lgamma(n + 1.0)
        - n * math.log(2.0)
    )
