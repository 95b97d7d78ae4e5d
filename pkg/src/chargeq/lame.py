"""Heine-Stieltjes polynomials of the generalized Lame equation.

For poles a_0 < ... < a_p with positive residues rho_0, ..., rho_p, the
equation

    A(x) E''(x) + B(x) E'(x) - C(x) E(x) = 0,
    A(x) = prod_i (x - a_i),   B(x) = sum_i rho_i * A(x) / (x - a_i),

admits, for every composition (n_1, ..., n_p) of the degree n, a unique
monic polynomial solution E with exactly n_k zeros in the k-th gap
(a_{k-1}, a_k), together with a Van Vleck coefficient C of degree at most
p - 1.  The zeros are the energy minimizer of the charge system in the field
of the p+1 fixed charges rho_i/2 under the per-gap count constraint, so the
solver here is: constrained minimization for the zeros, then recovery of C
as the exact polynomial quotient (A E'' + B E') / E.  At a true critical
configuration the division is exact; the relative remainder norm is reported
as an optimality certificate.

Polynomial coefficient vectors are ascending (c_0 + c_1 x + ...), the
convention of ``numpy.polynomial``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .equilibrium import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    ConvergenceError,
    IntervalConstraint,
    minimize,
)
from .fields import lame_field

THREADS_ENV = "CHARGE_EQ_THREADS"


@dataclass(frozen=True)
class LameSystem:
    """Poles, residues, degree, and zero composition of a Lame problem."""

    poles: tuple[float, ...]
    residues: tuple[float, ...]
    degree: int
    composition: tuple[int, ...]

    def __post_init__(self) -> None:
        poles = tuple(float(a) for a in self.poles)
        residues = tuple(float(r) for r in self.residues)
        composition = tuple(int(c) for c in self.composition)
        if len(poles) < 2:
            raise ValueError("need at least two poles")
        if len(poles) != len(residues):
            raise ValueError("poles and residues must have equal length")
        if any(b <= a for a, b in zip(poles, poles[1:])):
            raise ValueError(f"poles must be strictly increasing, got {poles}")
        if any(r <= 0 for r in residues):
            raise ValueError(f"residues must be positive, got {residues}")
        if len(composition) != len(poles) - 1:
            raise ValueError(
                f"composition needs {len(poles) - 1} entries, got {len(composition)}"
            )
        if any(c < 0 for c in composition):
            raise ValueError("composition entries must be nonnegative")
        if sum(composition) != self.degree:
            raise ValueError(
                f"composition {composition} does not sum to degree {self.degree}"
            )
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", residues)
        object.__setattr__(self, "composition", composition)

    @property
    def p(self) -> int:
        return len(self.poles) - 1

    def to_dict(self) -> dict:
        return {
            "poles": list(self.poles),
            "residues": list(self.residues),
            "degree": self.degree,
            "composition": list(self.composition),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LameSystem":
        return cls(
            poles=tuple(data["poles"]),
            residues=tuple(data["residues"]),
            degree=int(data["degree"]),
            composition=tuple(data["composition"]),
        )


@dataclass(frozen=True)
class HeineStieltjesSolution:
    """Zeros and coefficients of one Heine-Stieltjes polynomial.

    ``monic_coefficients`` are the ascending coefficients of the monic E,
    ``van_vleck`` those of C (length at most p).  The division remainder norm
    is ||remainder|| / ||A E'' + B E'|| from the quotient recovery and serves
    as the optimality certificate; ``gradient_norm`` is the final energy
    gradient of the minimizer.
    """

    composition: tuple[int, ...]
    zeros: np.ndarray
    monic_coefficients: np.ndarray
    van_vleck: np.ndarray
    division_remainder_norm: float
    gradient_norm: float
    energy: float
    converged: bool

    def __post_init__(self) -> None:
        for name in ("zeros", "monic_coefficients", "van_vleck"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class EnumerationResult:
    """All per-composition solutions, plus the failures of the sweep."""

    solutions: tuple[HeineStieltjesSolution, ...]
    failures: tuple[tuple[tuple[int, ...], str], ...] = ()


def compositions(n: int, parts: int):
    """All compositions of n into ``parts`` nonnegative parts, lexicographic."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def sigma(n: int, p: int) -> int:
    """Number of compositions of n into p parts: binomial(n + p - 1, n)."""
    return math.comb(n + p - 1, n)


def monic_from_zeros(zeros) -> np.ndarray:
    """Ascending coefficients of prod (x - z_k), multiplied pairwise.

    Zeros are paired symmetrically about their centroid (smallest with
    largest) into quadratic factors before the product is expanded, which
    limits cancellation in the accumulated coefficients.
    """
    zs = np.sort(np.asarray(zeros, dtype=float))
    n = zs.size
    if n == 0:
        return np.array([1.0])
    factors = []
    i, j = 0, n - 1
    while i < j:
        factors.append(np.array([zs[i] * zs[j], -(zs[i] + zs[j]), 1.0]))
        i += 1
        j -= 1
    if i == j:
        factors.append(np.array([-zs[i], 1.0]))
    coeffs = factors[0]
    for f in factors[1:]:
        coeffs = npoly.polymul(coeffs, f)
    return coeffs


def _pole_polynomials(system: LameSystem):
    """A(x) = prod (x - a_i) and B(x) = sum_i rho_i A(x)/(x - a_i)."""
    a = monic_from_zeros(system.poles)
    b = np.zeros(len(system.poles))
    for i, rho in enumerate(system.residues):
        others = [aj for j, aj in enumerate(system.poles) if j != i]
        b = npoly.polyadd(b, rho * monic_from_zeros(others))
    return a, b


def recover_van_vleck(zeros, system: LameSystem):
    """Van Vleck coefficients by exact long division.

    Forms N = A y'' + B y' for the monic y vanishing at ``zeros`` and divides
    by y.  Returns (quotient coefficients, relative remainder norm); at an
    equilibrium configuration the remainder vanishes up to rounding.

    Raises
    ------
    ValueError
        If some zero coincides with a pole (the quotient is singular there).
    """
    zs = np.asarray(zeros, dtype=float)
    scale = max(
        1.0,
        float(np.max(np.abs(system.poles))),
        float(np.max(np.abs(zs))) if zs.size else 0.0,
    )
    for z in zs:
        if np.min(np.abs(np.asarray(system.poles) - z)) <= 1e-12 * scale:
            raise ValueError(f"zero {z} coincides with a pole of the system")
    y = monic_from_zeros(zs)
    if zs.size == 0:
        return np.array([0.0]), 0.0
    a, b = _pole_polynomials(system)
    numerator = npoly.polyadd(
        npoly.polymul(a, npoly.polyder(y, 2)) if zs.size >= 2 else np.array([0.0]),
        npoly.polymul(b, npoly.polyder(y)),
    )
    norm_n = float(np.linalg.norm(numerator))
    if norm_n == 0.0:
        return np.array([0.0]), 0.0
    quotient, remainder = npoly.polydiv(numerator, y)
    remainder_norm = float(np.linalg.norm(remainder)) / norm_n
    return quotient, remainder_norm


def ode_residual(system: LameSystem, solution: HeineStieltjesSolution, x=None) -> float:
    """Scaled residual of A E'' + B E' - C E at sample points.

    Defaults to 20 Chebyshev points on the pole hull.  The residual is
    normalized by the largest magnitude among the three terms over the
    sample, so a solved system scores around rounding level.
    """
    if x is None:
        k = np.arange(20)
        mid = 0.5 * (system.poles[0] + system.poles[-1])
        half = 0.5 * (system.poles[-1] - system.poles[0])
        x = mid + half * np.cos((2 * k + 1) * np.pi / 40.0)
    x = np.asarray(x, dtype=float)
    a, b = _pole_polynomials(system)
    e = solution.monic_coefficients
    t1 = npoly.polyval(x, a) * npoly.polyval(x, npoly.polyder(e, 2))
    t2 = npoly.polyval(x, b) * npoly.polyval(x, npoly.polyder(e))
    t3 = npoly.polyval(x, solution.van_vleck) * npoly.polyval(x, e)
    scale = max(np.max(np.abs(t1)), np.max(np.abs(t2)), np.max(np.abs(t3)), 1e-300)
    return float(np.max(np.abs(t1 + t2 - t3)) / scale)


def zero_set_distance(z1, z2) -> float:
    """Hausdorff distance between two finite zero sets."""
    z1 = np.atleast_1d(np.asarray(z1, dtype=float))
    z2 = np.atleast_1d(np.asarray(z2, dtype=float))
    if z1.size == 0 and z2.size == 0:
        return 0.0
    if z1.size == 0 or z2.size == 0:
        return math.inf
    d = np.abs(z1[:, None] - z2[None, :])
    return float(max(np.max(np.min(d, axis=1)), np.max(np.min(d, axis=0))))


def solve(
    system: LameSystem,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    remainder_tol: float = 1e-8,
) -> HeineStieltjesSolution:
    """Solve one Lame system: zeros, monic E, and Van Vleck C.

    The zeros come from the constrained energy minimizer in the field of the
    fixed charges rho_i/2, C from :func:`recover_van_vleck`.  ``converged``
    requires both the minimizer's convergence and a division remainder below
    ``remainder_tol``.
    """
    if system.degree == 0:
        return HeineStieltjesSolution(
            composition=system.composition,
            zeros=np.array([]),
            monic_coefficients=np.array([1.0]),
            van_vleck=np.array([0.0]),
            division_remainder_norm=0.0,
            gradient_norm=0.0,
            energy=0.0,
            converged=True,
        )
    field = lame_field(system.poles, system.residues)
    constraint = IntervalConstraint.between_poles(system.poles, system.composition)
    result = minimize(field, constraint, tol=tol, max_iter=max_iter)
    zeros = result.configuration.positions
    van_vleck, remainder_norm = recover_van_vleck(zeros, system)
    return HeineStieltjesSolution(
        composition=system.composition,
        zeros=zeros,
        monic_coefficients=monic_from_zeros(zeros),
        van_vleck=van_vleck,
        division_remainder_norm=remainder_norm,
        gradient_norm=result.diagnostics.gradient_norm,
        energy=result.diagnostics.energy,
        converged=result.diagnostics.converged and remainder_norm <= remainder_tol,
    )


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def enumerate_solutions(
    poles,
    residues,
    degree: int,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EnumerationResult:
    """Solve every composition of ``degree`` over the gaps of the pole set.

    Produces sigma(n) = binomial(n + p - 1, n) systems, ordered by
    lexicographic composition.  Individual failures are collected per
    composition without aborting the sweep.  The environment variable
    ``CHARGE_EQ_THREADS`` (default 1) caps internal parallelism; the output
    order is independent of the execution order.
    """
    poles = tuple(float(a) for a in poles)
    parts = len(poles) - 1
    if parts < 1:
        raise ValueError("need at least two poles")
    comps = list(compositions(degree, parts))

    def run(comp):
        system = LameSystem(poles, tuple(residues), degree, comp)
        return solve(system, tol=tol, max_iter=max_iter)

    outcomes: dict[tuple[int, ...], object] = {}
    workers = min(_thread_count(), len(comps))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for comp, outcome in zip(comps, pool.map(_guarded(run), comps)):
                outcomes[comp] = outcome
    else:
        guarded = _guarded(run)
        for comp in comps:
            outcomes[comp] = guarded(comp)

    solutions = []
    failures = []
    for comp in comps:
        outcome = outcomes[comp]
        if isinstance(outcome, HeineStieltjesSolution):
            solutions.append(outcome)
        else:
            failures.append((comp, str(outcome)))
    return EnumerationResult(tuple(solutions), tuple(failures))


def _guarded(fn):
    def wrapper(comp):
        try:
            return fn(comp)
        except (ConvergenceError, ValueError) as exc:
            return exc

    return wrapper
