"""Limiting zero distributions: constrained equilibrium measures on the line.

For poles a_0 < ... < a_p and gap masses theta_1, ..., theta_p (positive,
summing to 1) the limiting measure of the Heine-Stieltjes zeros is encoded by
p - 1 points beta_1 <= ... <= beta_{p-1} in the pole hull.  With

    R(x) = prod_j (x - beta_j),   A(x) = prod_i (x - a_i),
    H(x) = sqrt(R(x) / A(x)),     H(x) ~ 1/x  at infinity,

the betas are determined by the gap conditions

    Im int_{a_{j-1}}^{a_j} H(x) dx = -pi * theta_j,   j = 1, ..., p - 1,

with H taken as its boundary value from the upper half plane (the condition
on the last gap then holds automatically and is kept as a diagnostic).  The
measure's support is the closure of {Z = 1} for the counting function
Z(x) = #{poles <= x} - #{betas <= x}, its density is |H|/pi there, and its
Cauchy transform is the branch of +-H fixed by z * mu_hat(z) -> 1.

Branch handling: H is evaluated as a product of principal-branch square-root
factors (z - c)^(+-1/2), whose values on the real axis are the limits from
the upper half plane.  The overall sign making z * mu_hat(z) -> 1 is probed
once per measure and recorded in ``branch_sign`` (the product convention
already satisfies it, so the recorded sign is +1).

The p = 1 case has no betas and gives the arcsine-type measure of the
interval [a_0, a_1]; it is the weak-* limit of the zero counting measures of
Jacobi polynomials with fixed parameters.  The module also provides the
normalized logarithmic derivative h_n = p_n'/(n p_n), which converges to the
Cauchy transform off the support, and the algebraic residual of the exact
second-order identity satisfied by h_n in the Jacobi case.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import classical
from .classical import ClassicalFamily, evaluate_with_second

CANCEL_TOL = 1e-10
BETA_RESIDUAL_BOUND = 1e-8


class BetaSolveError(RuntimeError):
    """Newton iteration on the beta system failed; carries the residual vector."""

    def __init__(self, message: str, residuals: np.ndarray):
        super().__init__(message)
        self.residuals = residuals


# ----------------------------------------------------------------------------
# quadrature with inverse-square-root endpoints
# ----------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def _integrate_endpoint_singular(func, lo: float, hi: float, tol: float = 1e-9) -> float:
    """Integrate func over (lo, hi) where half-integer powers of (x - lo) and
    (hi - x) may appear.

    The substitution x = lo + (hi - lo) sin^2 t turns such powers into
    analytic functions of t; Gauss-Legendre on t in [0, pi/2] starts at 64
    nodes and doubles until two successive estimates agree to ``tol``.
    """
    span = hi - lo
    if span <= 0.0:
        return 0.0
    previous = None
    for order in (64, 128, 256, 512, 1024):
        t, w = _leggauss(order)
        tt = 0.25 * math.pi * (t + 1.0)
        x = lo + span * np.sin(tt) ** 2
        weight = span * np.sin(2.0 * tt) * 0.25 * math.pi
        estimate = float(np.sum(w * func(x) * weight))
        if previous is not None and abs(estimate - previous) < tol * max(1.0, abs(estimate)):
            return estimate
        previous = estimate
    return previous


# ----------------------------------------------------------------------------
# the function H = sqrt(R/A): cancellation, magnitude, phase
# ----------------------------------------------------------------------------


def _active_nodes(poles, betas, tol: float | None = None):
    """Drop beta-pole pairs closer than the cancellation tolerance.

    A beta sitting on a pole removes that pole's branch point (the factors
    cancel); both lists returned here are the surviving branch points.
    """
    poles = [float(a) for a in poles]
    betas = sorted(float(b) for b in betas)
    if tol is None:
        tol = CANCEL_TOL * max(1.0, max(abs(a) for a in poles))
    used = [False] * len(poles)
    active_betas = []
    for b in betas:
        best, dist = -1, math.inf
        for i, a in enumerate(poles):
            if not used[i] and abs(b - a) < dist:
                best, dist = i, abs(b - a)
        if best >= 0 and dist <= tol:
            used[best] = True
        else:
            active_betas.append(b)
    active_poles = [a for a, u in zip(poles, used) if not u]
    return tuple(active_poles), tuple(active_betas)


def _abs_h(x, active_poles, active_betas):
    """|H(x)| = sqrt(prod |x - beta| / prod |x - a|) on the real axis."""
    x = np.asarray(x, dtype=float)
    numerator = np.ones_like(x)
    for b in active_betas:
        numerator = numerator * np.abs(x - b)
    denominator = np.ones_like(x)
    for a in active_poles:
        denominator = denominator * np.abs(x - a)
    with np.errstate(divide="ignore"):
        return np.sqrt(numerator / denominator)


def _imag_sign(x: float, active_poles, active_betas) -> int:
    """Sign of Im H on the real axis (limit from above) at a regular point x.

    Each principal-branch factor with branch point above x contributes a
    quarter turn; the net phase is i^(-m) with m = #{poles > x} - #{betas > x}.
    """
    m = sum(1 for a in active_poles if a > x) - sum(1 for b in active_betas if b > x)
    r = m % 4
    if r == 1:
        return -1
    if r == 3:
        return 1
    return 0


def _imag_integral(lo: float, hi: float, active_poles, active_betas) -> float:
    """Im of the integral of H (upper boundary values) over (lo, hi)."""
    cuts = [lo] + [b for b in active_betas if lo < b < hi] + [hi]
    total = 0.0
    for c, d in zip(cuts, cuts[1:]):
        if d <= c:
            continue
        sign = _imag_sign(0.5 * (c + d), active_poles, active_betas)
        if sign == 0:
            continue
        total += sign * _integrate_endpoint_singular(
            lambda x: _abs_h(x, active_poles, active_betas), c, d
        )
    return total


# ----------------------------------------------------------------------------
# the beta system
# ----------------------------------------------------------------------------


def _validate_masses(poles, masses):
    poles = tuple(float(a) for a in poles)
    masses = tuple(float(t) for t in masses)
    if len(poles) < 2:
        raise ValueError("need at least two poles")
    if any(b <= a for a, b in zip(poles, poles[1:])):
        raise ValueError(f"poles must be strictly increasing, got {poles}")
    if len(masses) != len(poles) - 1:
        raise ValueError(f"need {len(poles) - 1} gap masses, got {len(masses)}")
    if any(t <= 0 for t in masses):
        raise ValueError(f"gap masses must be positive, got {masses}")
    if abs(sum(masses) - 1.0) > 1e-8:
        raise ValueError(f"gap masses must sum to 1, got sum {sum(masses)}")
    return poles, masses


def beta_residuals(poles, masses, betas) -> np.ndarray:
    """Residuals of the defining gap conditions, one per constrained gap.

    Entry j-1 is Im int_{a_{j-1}}^{a_j} H dx + pi theta_j for j = 1..p-1;
    all entries vanish at the solution.
    """
    poles, masses = _validate_masses(poles, masses)
    active_poles, active_betas = _active_nodes(poles, betas)
    return np.array(
        [
            _imag_integral(poles[j - 1], poles[j], active_poles, active_betas)
            + math.pi * masses[j - 1]
            for j in range(1, len(poles) - 1)
        ]
    )


def solve_betas(
    poles,
    masses,
    *,
    residual_target: float = 1e-12,
    max_iter: int = 60,
) -> np.ndarray:
    """Solve the gap conditions for the p - 1 beta points.

    Damped Newton iteration: the Jacobian comes from central differences
    (step 1e-6), steps are halved until the residual norm decreases, and
    iterates stay sorted inside the pole hull.  For p = 1 the beta vector is
    empty.  The accepted solution drives every constrained-gap residual below
    1e-8 (usually far below); the condition on the last gap follows from mass
    conservation and is available through :func:`beta_residuals` plus the
    measure's total mass.

    Raises
    ------
    BetaSolveError
        If the residual bound 1e-8 is not reached; carries the residuals.
    """
    poles, masses = _validate_masses(poles, masses)
    p = len(poles) - 1
    if p == 1:
        return np.array([])

    def residuals(b: np.ndarray) -> np.ndarray:
        return beta_residuals(poles, masses, b)

    lo_hull, hi_hull = poles[0], poles[-1]
    b = np.array(
        [poles[j - 1] + masses[j - 1] * (poles[j] - poles[j - 1]) for j in range(1, p)]
    )
    f = residuals(b)
    norm = float(np.max(np.abs(f)))
    step = 1e-6
    for _ in range(max_iter):
        if norm < residual_target:
            break
        jac = np.empty((p - 1, p - 1))
        for i in range(p - 1):
            bp, bm = b.copy(), b.copy()
            bp[i] += step
            bm[i] -= step
            jac[:, i] = (residuals(bp) - residuals(bm)) / (2.0 * step)
        try:
            delta = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(jac, -f, rcond=None)[0]
        t = 1.0
        improved = False
        while t > 2.0**-30:
            b_try = np.sort(np.clip(b + t * delta, lo_hull, hi_hull))
            f_try = residuals(b_try)
            norm_try = float(np.max(np.abs(f_try)))
            if norm_try < norm:
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        b, f, norm = b_try, f_try, norm_try
    if norm > BETA_RESIDUAL_BOUND:
        raise BetaSolveError(
            f"beta system not solved: residual max-norm {norm:.3e}", f
        )
    return b


# ----------------------------------------------------------------------------
# counting function and support
# ----------------------------------------------------------------------------


def counting_function(poles, betas, x: float) -> int:
    """Z(x) = #{poles <= x} - #{betas <= x}, with beta-on-pole cancellation."""
    active_poles, active_betas = _active_nodes(poles, betas)
    return sum(1 for a in active_poles if a <= x) - sum(
        1 for b in active_betas if b <= x
    )


def support_intervals(poles, betas) -> tuple[tuple[float, float], ...]:
    """Closure of {Z = 1} as a tuple of disjoint closed intervals."""
    active_poles, active_betas = _active_nodes(poles, betas)
    events = sorted(
        [(a, 1) for a in active_poles] + [(b, -1) for b in active_betas]
    )
    pieces = []
    level = 0
    for (x, delta), nxt in zip(events, events[1:]):
        level += delta
        if level == 1 and nxt[0] > x:
            pieces.append([x, nxt[0]])
    merged: list[list[float]] = []
    for piece in pieces:
        if merged and piece[0] <= merged[-1][1]:
            merged[-1][1] = piece[1]
        else:
            merged.append(piece)
    return tuple((lo, hi) for lo, hi in merged)


# ----------------------------------------------------------------------------
# the measure object
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumMeasure:
    """Constrained equilibrium measure determined by poles, masses, betas.

    Construct through :func:`equilibrium_measure` (which solves for the
    betas) or :func:`arcsine_measure`.  ``branch_sign`` records the sign s in
    mu_hat = s * prod (z-beta)^(1/2) / prod (z-a)^(1/2) (principal branches)
    that realizes z * mu_hat(z) -> 1 at infinity.
    """

    poles: tuple[float, ...]
    masses: tuple[float, ...]
    betas: tuple[float, ...]
    support: tuple[tuple[float, float], ...]
    branch_sign: int = 1

    @cached_property
    def _active(self):
        return _active_nodes(self.poles, self.betas)

    @cached_property
    def _support_masses(self) -> tuple[float, ...]:
        active_poles, active_betas = self._active
        return tuple(
            _integrate_endpoint_singular(
                lambda x: _abs_h(x, active_poles, active_betas), lo, hi
            )
            / math.pi
            for lo, hi in self.support
        )

    def in_support(self, x) -> bool | np.ndarray:
        """Membership flag for the (closed) support; the companion of density."""
        x = np.asarray(x, dtype=float)
        mask = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.support:
            mask |= (x >= lo) & (x <= hi)
        return mask if mask.ndim else bool(mask)

    def density(self, x):
        """Density |H(x)|/pi on the support; zero (flagged off-support) elsewhere.

        ``in_support(x)`` distinguishes a genuine zero of the density from an
        off-support point.  Endpoints carry the integrable inverse-square-root
        singularity and evaluate to inf.
        """
        x = np.asarray(x, dtype=float)
        active_poles, active_betas = self._active
        values = _abs_h(x, active_poles, active_betas) / math.pi
        out = np.where(self.in_support(x), values, 0.0)
        return out if out.ndim else float(out)

    def interval_mass(self, lo: float, hi: float) -> float:
        """Measure of [lo, hi] by quadrature of the density."""
        active_poles, active_betas = self._active
        total = 0.0
        for (slo, shi), full in zip(self.support, self._support_masses):
            a, b = max(lo, slo), min(hi, shi)
            if b <= a:
                continue
            if a == slo and b == shi:
                total += full
            else:
                total += (
                    _integrate_endpoint_singular(
                        lambda x: _abs_h(x, active_poles, active_betas), a, b
                    )
                    / math.pi
                )
        return total

    def total_mass(self) -> float:
        return float(sum(self._support_masses))

    def cdf(self, x: float) -> float:
        """Cumulative distribution function by quadrature of the density."""
        x = float(x)
        total = 0.0
        active_poles, active_betas = self._active
        for (lo, hi), full in zip(self.support, self._support_masses):
            if x >= hi:
                total += full
            elif x > lo:
                total += (
                    _integrate_endpoint_singular(
                        lambda t: _abs_h(t, active_poles, active_betas), lo, x
                    )
                    / math.pi
                )
                break
            else:
                break
        return total

    def cauchy_transform(self, z) -> complex:
        """mu_hat(z) = int dmu(t)/(z - t) for z off the support.

        Computed as the recorded branch of sqrt(R(z)/A(z)); real arguments are
        taken as limits from the upper half plane.  Raises ``ValueError`` on
        the support, where the transform jumps.
        """
        zc = complex(z)
        if zc.imag == 0.0 and self.in_support(zc.real):
            raise ValueError(f"z = {z} lies on the support of the measure")
        active_poles, active_betas = self._active
        value = complex(self.branch_sign)
        for b in active_betas:
            value *= cmath.sqrt(zc - b)
        for a in active_poles:
            value /= cmath.sqrt(zc - a)
        return value

    def counting(self, x: float) -> int:
        return counting_function(self.poles, self.betas, x)


def equilibrium_measure(poles, masses) -> EquilibriumMeasure:
    """Solve the beta system and assemble the measure for given gap masses."""
    poles, masses = _validate_masses(poles, masses)
    betas = solve_betas(poles, masses)
    support = support_intervals(poles, betas)
    measure = EquilibriumMeasure(
        poles=poles,
        masses=masses,
        betas=tuple(float(b) for b in betas),
        support=support,
    )
    # Probe the normalization z * mu_hat -> 1 far out on the real axis and
    # record the sign realizing it.
    probe = poles[-1] + 1e4 * (poles[-1] - poles[0])
    if (probe * measure.cauchy_transform(probe)).real < 0.0:
        measure = EquilibriumMeasure(
            poles=poles,
            masses=masses,
            betas=measure.betas,
            support=support,
            branch_sign=-1,
        )
    return measure


def arcsine_measure(lo: float = -1.0, hi: float = 1.0) -> EquilibriumMeasure:
    """The arcsine measure of [lo, hi]: density 1/(pi sqrt((x-lo)(hi-x)))."""
    return equilibrium_measure((lo, hi), (1.0,))


def density(measure: EquilibriumMeasure, x):
    """Density of the measure at ``x``; see :meth:`EquilibriumMeasure.density`."""
    return measure.density(x)


def cauchy_transform(measure: EquilibriumMeasure, z) -> complex:
    """Cauchy transform of the measure at ``z`` off the support."""
    return measure.cauchy_transform(z)


# ----------------------------------------------------------------------------
# empirical distributions and the KS statistic
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Normalized counting measure of a finite sample (e.g. a zero set)."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        samples = np.sort(np.asarray(self.samples, dtype=float))
        if samples.size == 0:
            raise ValueError("need at least one sample point")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def n(self) -> int:
        return self.samples.size

    def cdf(self, x: float) -> float:
        return float(np.searchsorted(self.samples, x, side="right")) / self.n


def ks_distance(empirical: EmpiricalDistribution, measure: EquilibriumMeasure) -> float:
    """Kolmogorov-Smirnov distance sup |F_empirical - F_measure| in [0, 1].

    The supremum over the line is attained at sample points, comparing the
    measure's CDF against both the left and right limits of the empirical
    step function there.
    """
    xs = empirical.samples
    n = empirical.n
    cdf_values = np.array([measure.cdf(x) for x in xs])
    k = np.arange(1, n + 1, dtype=float)
    upper = np.max(np.abs(k / n - cdf_values))
    lower = np.max(np.abs((k - 1.0) / n - cdf_values))
    return float(max(upper, lower))


# ----------------------------------------------------------------------------
# normalized logarithmic derivative and the exact second-order identity
# ----------------------------------------------------------------------------


def normalized_log_derivative(family: ClassicalFamily, n: int, z):
    """h_n(z) = p_n'(z) / (n p_n(z)), the Stieltjes transform of the
    normalized zero counting measure of p_n."""
    if n < 1:
        raise ValueError("need degree n >= 1")
    p, dp = classical.evaluate(family, n, z)
    if p == 0:
        raise ValueError(f"z = {z} is a zero of the degree-{n} polynomial")
    return dp / (n * p)


def riccati_residual(family: ClassicalFamily, n: int, z) -> float:
    """Relative residual of the exact identity satisfied by h_n (Jacobi only).

    From the hypergeometric equation of P_n^(a,b), the function
    h_n = p_n'/(n p_n) satisfies

        (h_n'/n + h_n^2)
      + ((a+1)/(z-1) + (b+1)/(z+1)) h_n / n
      - (n + a + b + 1) / (n (z^2 - 1))  =  0

    identically.  The returned value is the magnitude of the left side
    divided by the largest magnitude among its three terms; it sits at
    rounding level for any n and any z off the zeros and +-1.  Dropping the
    O(1/n) terms yields the algebraic limit (1 - z^2) h^2 + 1 = 0 solved by
    the arcsine Cauchy transform.
    """
    if family.kind != classical.JACOBI:
        raise ValueError("the residual identity applies to the Jacobi family")
    if n < 1:
        raise ValueError("need degree n >= 1")
    zc = complex(z)
    p, dp, d2p = evaluate_with_second(family, n, zc)
    if p == 0:
        raise ValueError(f"z = {z} is a zero of the degree-{n} polynomial")
    h = dp / (n * p)
    h_prime = d2p / (n * p) - n * h * h
    al, be = family.alpha, family.beta
    term1 = h_prime / n + h * h
    term2 = ((al + 1.0) / (zc - 1.0) + (be + 1.0) / (zc + 1.0)) * h / n
    term3 = (n + al + be + 1.0) / (n * (zc * zc - 1.0))
    scale = max(abs(term1), abs(term2), abs(term3), 1e-300)
    return abs(term1 + term2 - term3) / scale
