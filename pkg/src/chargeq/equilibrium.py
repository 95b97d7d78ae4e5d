"""Energy-minimizing charge configurations.

Three settings are covered:

* :func:`minimize` -- n unit charges distributed over ordered open intervals
  with prescribed per-interval counts (a free problem is the special case of
  a single interval, possibly unbounded).  A damped Newton iteration with a
  feasibility safeguard drives the gradient below tolerance; the energy is
  non-increasing along accepted iterates and the Hessian at the solution is
  checked for positive definiteness.
* :func:`project_onto_continuum` -- vertical projection of a real
  configuration onto a polyline in the plane.  Projection never increases
  pairwise distances or distances to the endpoints +-1, hence never increases
  the energy; this is the comparison argument behind the max-min
  characterization of the real equilibrium.
* :func:`minimize_on_continuum` -- local minimization of the energy of n
  charges constrained to a polyline, parameterized by arclength.  The result
  is an upper bound for the restricted infimum; one of the multi-starts is
  the vertical projection of the real equilibrium, which already realizes an
  energy no larger than the unconstrained real minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.optimize import minimize as _scipy_minimize

from .energy import (
    COALESCENCE_RTOL,
    ChargeConfiguration,
    definiteness_check,
    gradient,
    hessian,
    total_energy,
)
from .fields import ExternalField

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
STEP_TOL = 1e-13


class ConvergenceError(RuntimeError):
    """Solver gave up; carries the last iterate and its diagnostics."""

    def __init__(self, message: str, configuration: ChargeConfiguration, diagnostics):
        super().__init__(message)
        self.configuration = configuration
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class IntervalConstraint:
    """Ordered disjoint open intervals with a prescribed charge count in each."""

    intervals: tuple[tuple[float, float], ...]
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        intervals = tuple((float(a), float(b)) for a, b in self.intervals)
        counts = tuple(int(c) for c in self.counts)
        if len(intervals) != len(counts) or not intervals:
            raise ValueError("need the same positive number of intervals and counts")
        for a, b in intervals:
            if not a < b:
                raise ValueError(f"empty interval ({a}, {b})")
        for (_, b), (a2, _) in zip(intervals, intervals[1:]):
            if not b <= a2:
                raise ValueError("intervals must be ordered and pairwise disjoint")
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        if sum(counts) < 1:
            raise ValueError("total charge count must be at least 1")
        object.__setattr__(self, "intervals", intervals)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def single(cls, lo: float, hi: float, n: int) -> "IntervalConstraint":
        return cls(((lo, hi),), (n,))

    @classmethod
    def between_poles(cls, poles, counts) -> "IntervalConstraint":
        poles = [float(a) for a in poles]
        return cls(tuple(zip(poles, poles[1:])), tuple(counts))

    @property
    def total(self) -> int:
        return sum(self.counts)

    def bounds_per_charge(self):
        """Per-charge (low, high) arrays, charges listed interval by interval."""
        lows, highs, marks = [], [], []
        for idx, ((a, b), m) in enumerate(zip(self.intervals, self.counts)):
            lows.extend([a] * m)
            highs.extend([b] * m)
            marks.extend([idx] * m)
        return np.array(lows), np.array(highs), np.array(marks)

    def counts_of(self, positions: np.ndarray):
        """Charges per interval; None if some position escapes all intervals."""
        out = []
        for a, b in self.intervals:
            out.append(int(np.sum((positions > a) & (positions < b))))
        if sum(out) != positions.size:
            return None
        return tuple(out)


@dataclass(frozen=True)
class PolylineContinuum:
    """A connected polyline through the points -1 and +1.

    Vertices are complex; consecutive vertices are joined by straight
    segments.  Both -1 and +1 must appear among the vertices (membership in
    the family of admissible continua for the max-min comparison).
    """

    vertices: tuple[complex, ...]

    def __post_init__(self) -> None:
        verts = tuple(complex(v) for v in self.vertices)
        if len(verts) < 2:
            raise ValueError("a polyline needs at least two vertices")
        if any(abs(a - b) == 0.0 for a, b in zip(verts, verts[1:])):
            raise ValueError("consecutive vertices must be distinct")
        if min(abs(v - (-1.0)) for v in verts) > 1e-12 or min(
            abs(v - 1.0) for v in verts
        ) > 1e-12:
            raise ValueError("the polyline must pass through both -1 and +1")
        lengths = np.array([abs(b - a) for a, b in zip(verts, verts[1:])])
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        cum.setflags(write=False)
        lengths.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "_lengths", lengths)
        object.__setattr__(self, "_cum", cum)

    @property
    def total_length(self) -> float:
        return float(self._cum[-1])

    def _segment_of(self, s: float) -> tuple[int, float]:
        s = min(max(s, 0.0), self.total_length)
        i = int(np.searchsorted(self._cum, s, side="right") - 1)
        i = min(i, len(self.vertices) - 2)
        return i, s - float(self._cum[i])

    def point_at(self, s: float) -> complex:
        """Point at arclength ``s`` from the first vertex (clamped to [0, L])."""
        i, ds = self._segment_of(s)
        a, b = self.vertices[i], self.vertices[i + 1]
        return a + (b - a) * (ds / float(self._lengths[i]))

    def tangent_at(self, s: float) -> complex:
        """Unit tangent of the segment containing ``s`` (right-continuous)."""
        i, _ = self._segment_of(s)
        a, b = self.vertices[i], self.vertices[i + 1]
        return (b - a) / abs(b - a)

    def vertical_section(self, x: float):
        """All intersections of the vertical line Re z = x with the polyline.

        Returns a list of (point, arclength) pairs.  A segment lying entirely
        on the line contributes its point of smallest |Im|.
        """
        hits: list[tuple[complex, float]] = []
        for i, (a, b) in enumerate(zip(self.vertices, self.vertices[1:])):
            base = float(self._cum[i])
            seg = float(self._lengths[i])
            ua, ub = a.real, b.real
            if ua == ub:
                if ua != x:
                    continue
                va, vb = a.imag, b.imag
                if va == 0.0 or vb == 0.0 or (va < 0.0) != (vb < 0.0):
                    t = va / (va - vb) if va != vb else 0.0
                else:
                    t = 0.0 if abs(va) <= abs(vb) else 1.0
            else:
                if (ua - x) * (ub - x) > 0.0:
                    continue
                t = (x - ua) / (ub - ua)
            # the real part is x by construction; build the point so it holds
            # exactly in floating point as well
            hits.append((complex(x, a.imag + (b.imag - a.imag) * t), base + seg * t))
        return hits


@dataclass(frozen=True)
class SolveDiagnostics:
    iterations: int
    gradient_norm: float
    step_norm: float
    energy: float
    converged: bool
    stop_reason: str
    energies: tuple[float, ...] = ()
    hessian_definite: bool | None = None
    hessian_eigenvalue_bound: float | None = None
    start_energies: tuple[float, ...] = ()


@dataclass(frozen=True)
class EquilibriumResult:
    configuration: ChargeConfiguration
    diagnostics: SolveDiagnostics


def _chebyshev_points(m: int) -> np.ndarray:
    if m == 1:
        return np.array([0.0])
    return -np.cos(np.pi * np.arange(m) / (m - 1.0))


def _finite_box(lo: float, hi: float, m: int) -> tuple[float, float]:
    # Unbounded sides get a surrogate box at the classical zero scale.
    if math.isinf(lo) and math.isinf(hi):
        half = math.sqrt(2.0 * m + 1.0)
        return -half, half
    if math.isinf(hi):
        return lo, lo + 4.0 * m + 4.0
    if math.isinf(lo):
        return hi - 4.0 * m - 4.0, hi
    return lo, hi


def default_initial(constraint: IntervalConstraint) -> np.ndarray:
    """Chebyshev-spread starting positions in the middle 90% of each interval."""
    parts = []
    for (lo, hi), m in zip(constraint.intervals, constraint.counts):
        if m == 0:
            continue
        blo, bhi = _finite_box(lo, hi, m)
        mid = 0.5 * (blo + bhi)
        half = 0.45 * (bhi - blo)
        parts.append(mid + half * _chebyshev_points(m))
    return np.concatenate(parts)


def _check_feasible(x: np.ndarray, constraint: IntervalConstraint) -> None:
    if x.size != constraint.total:
        raise ValueError(
            f"initial guess has {x.size} positions, constraint prescribes {constraint.total}"
        )
    if np.any(np.diff(x) <= 0.0):
        raise ValueError("initial guess must be strictly increasing")
    if constraint.counts_of(x) != constraint.counts:
        raise ValueError("initial guess does not respect the per-interval counts")


def _max_feasible_step(x, d, lows, highs) -> float:
    """Largest t with x + t*d still strictly ordered and inside the intervals."""
    t = math.inf
    up = d > 0.0
    down = d < 0.0
    finite_hi = np.isfinite(highs)
    finite_lo = np.isfinite(lows)
    sel = up & finite_hi
    if np.any(sel):
        t = min(t, float(np.min((highs[sel] - x[sel]) / d[sel])))
    sel = down & finite_lo
    if np.any(sel):
        t = min(t, float(np.min((x[sel] - lows[sel]) / (-d[sel]))))
    if x.size > 1:
        rel = np.diff(d)
        gaps = np.diff(x)
        closing = rel < 0.0
        if np.any(closing):
            t = min(t, float(np.min(gaps[closing] / (-rel[closing]))))
    return t


def minimize(
    field: ExternalField,
    constraint: IntervalConstraint,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    initial=None,
) -> EquilibriumResult:
    """Find the energy-minimizing configuration under an interval constraint.

    Damped Newton iteration on the discrete energy: the Newton step (gradient
    descent when the Hessian factorization fails) is first capped at 0.9 of
    the largest step preserving ordering and interval membership, then halved
    until the energy does not increase.  Stops when the gradient max-norm
    falls below ``tol`` or the step max-norm below 1e-13.

    Parameters
    ----------
    field : ExternalField
        External field; every fixed charge must have positive mass.
    constraint : IntervalConstraint
        Intervals and per-interval charge counts.
    tol, max_iter : float, int
        Gradient tolerance and iteration cap.
    initial : array_like, optional
        Starting positions (strictly increasing, feasible).  Default: a
        Chebyshev spread in the middle 90% of each interval.

    Returns
    -------
    EquilibriumResult
        Solution configuration plus diagnostics (iterations, gradient norm,
        energy trace, Hessian definiteness at the solution).

    Raises
    ------
    ConvergenceError
        After ``max_iter`` iterations without meeting a stopping criterion,
        carrying the last iterate and its diagnostics.
    """
    if initial is None:
        x = default_initial(constraint)
    else:
        x = np.sort(np.asarray(initial, dtype=float))
        _check_feasible(x, constraint)
    lows, highs, _ = constraint.bounds_per_charge()

    config = ChargeConfiguration(x)
    energy_now = total_energy(config, field)
    if not math.isfinite(energy_now):
        raise ValueError("initial configuration has infinite energy")
    energies = [energy_now]
    gnorm = math.inf
    step_norm = math.inf
    stop_reason = "max_iterations"
    converged = False
    iterations = 0
    # Once the gradient threshold is met, up to two more full Newton steps are
    # taken; quadratic convergence pushes the iterate to rounding level, which
    # the threshold alone does not guarantee in flat directions.
    polish_left = 2

    for iterations in range(1, max_iter + 1):
        g = gradient(config, field)
        gnorm = float(np.max(np.abs(g)))
        met = gnorm < tol
        if met and (polish_left == 0 or gnorm == 0.0):
            converged = True
            stop_reason = "gradient_tolerance"
            iterations -= 1
            break
        if met:
            polish_left -= 1
        h = hessian(config, field)
        try:
            d = -cho_solve(cho_factor(h), g)
        except LinAlgError:
            d = -g
        t = min(1.0, 0.9 * _max_feasible_step(x, d, lows, highs))
        accepted = False
        while t >= 1e-18:
            x_try = x + t * d
            trial = ChargeConfiguration(x_try)
            energy_try = total_energy(trial, field)
            if math.isfinite(energy_try) and energy_try <= energy_now + 1e-12 * max(
                1.0, abs(energy_now)
            ):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if met:
                converged = True
                stop_reason = "gradient_tolerance"
            else:
                stop_reason = "line_search_failed"
            break
        x, config, energy_now = x_try, trial, energy_try
        energies.append(energy_now)
        step_norm = float(t * np.max(np.abs(d)))
        if step_norm < STEP_TOL:
            converged = True
            stop_reason = "step_tolerance"
            gnorm = float(np.max(np.abs(gradient(config, field))))
            break

    definite, eig_bound = definiteness_check(hessian(config, field))
    diagnostics = SolveDiagnostics(
        iterations=iterations,
        gradient_norm=gnorm,
        step_norm=step_norm,
        energy=energy_now,
        converged=converged,
        stop_reason=stop_reason,
        energies=tuple(energies),
        hessian_definite=definite,
        hessian_eigenvalue_bound=eig_bound,
    )
    if not converged:
        raise ConvergenceError(
            f"no convergence after {iterations} iterations "
            f"(gradient max-norm {gnorm:.3e}, reason: {stop_reason})",
            config,
            diagnostics,
        )
    if not definite:
        raise ConvergenceError(
            "converged to a critical point with non-definite Hessian",
            config,
            diagnostics,
        )
    return EquilibriumResult(config, diagnostics)


def project_onto_continuum(
    config: ChargeConfiguration, continuum: PolylineContinuum
) -> ChargeConfiguration:
    """Vertical projection: z_k on the polyline with Re z_k = x_k.

    Among several intersections the one of smallest |Im| is taken.  Raises
    ``ValueError`` naming the first charge whose vertical line misses the
    polyline.
    """
    if not config.is_real:
        raise ValueError("projection is defined for real configurations")
    points = []
    for k, x in enumerate(config.positions):
        hits = continuum.vertical_section(float(x))
        if not hits:
            raise ValueError(
                f"vertical line through charge {k} (x = {x}) does not meet the polyline"
            )
        z, _ = min(hits, key=lambda h: abs(h[0].imag))
        points.append(z)
    return ChargeConfiguration(np.asarray(points, dtype=complex))


def _energy_on_polyline(field: ExternalField, z: np.ndarray):
    """Energy and complex per-charge derivative for raw complex positions."""
    n = z.size
    if n > 1:
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        gaps = np.abs(diff)[np.triu_indices(n, k=1)]
        if np.min(gaps) <= COALESCENCE_RTOL * max(np.max(gaps), 1e-300):
            return math.inf, None
        mutual = float(-np.sum(np.log(gaps)))
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        mutual_grad = -np.sum(inv, axis=1)
    else:
        mutual = 0.0
        mutual_grad = np.zeros(1, dtype=complex)
    external = float(np.sum(field.phi(z)))
    energy = mutual + external
    if not math.isfinite(energy):
        return math.inf, None
    return energy, mutual_grad + field.phi_prime(z)


def minimize_on_continuum(
    field: ExternalField,
    continuum: PolylineContinuum,
    n: int,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = 500,
    starts: int = 5,
    seed: int = 20260810,
) -> EquilibriumResult:
    """Locally minimize the energy of n charges constrained to a polyline.

    Charges are parameterized by arclength and optimized with a quasi-Newton
    method using the exact tangential gradient dE/ds_k = Re(g_k * tau(s_k)).
    ``starts`` starting layouts are tried (equispaced, seeded jitters, and the
    vertical projection of the unconstrained real equilibrium); the best local
    minimum is returned.  Its energy is an upper bound for the restricted
    infimum over the polyline.
    """
    if n < 1:
        raise ValueError("need at least one charge")
    length = continuum.total_length

    def objective(s: np.ndarray):
        z = np.asarray([continuum.point_at(si) for si in s], dtype=complex)
        energy, g = _energy_on_polyline(field, z)
        if g is None:
            return 1e100, np.zeros_like(s)
        taus = np.asarray([continuum.tangent_at(si) for si in s], dtype=complex)
        return energy, (g * taus).real

    rng = np.random.default_rng(seed)
    starting_points = [length * (np.arange(1, n + 1)) / (n + 1.0)]
    proj = _projection_start(field, continuum, n)
    if proj is not None:
        starting_points.append(proj)
    if n == 1:
        grid = np.linspace(0.0, length, 1025)
        values = [objective(np.array([s]))[0] for s in grid]
        starting_points.append(np.array([grid[int(np.argmin(values))]]))
    while len(starting_points) < max(starts, 1):
        starting_points.append(np.sort(rng.uniform(0.02 * length, 0.98 * length, n)))

    best = None
    start_energies = []
    for s0 in starting_points:
        res = _scipy_minimize(
            objective,
            np.clip(s0, 0.0, length),
            jac=True,
            method="L-BFGS-B",
            bounds=[(0.0, length)] * n,
            options={"maxiter": max_iter, "ftol": 1e-17, "gtol": min(tol, 1e-12)},
        )
        s = np.sort(res.x)
        energy, _ = objective(s)
        start_energies.append(energy)
        if math.isfinite(energy) and (best is None or energy < best[0]):
            best = (energy, s, res)
    if best is None:
        raise ConvergenceError(
            "all starting layouts collapsed to infinite energy",
            ChargeConfiguration(np.asarray([continuum.point_at(si) for si in starting_points[0]], dtype=complex)),
            SolveDiagnostics(0, math.inf, math.inf, math.inf, False, "all_starts_failed"),
        )
    energy, s, res = best
    z = np.asarray([continuum.point_at(si) for si in s], dtype=complex)
    grad_norm = float(np.max(np.abs(objective(s)[1])))
    diagnostics = SolveDiagnostics(
        iterations=int(res.nit),
        gradient_norm=grad_norm,
        step_norm=0.0,
        energy=energy,
        converged=True,
        stop_reason="best_of_multistart",
        start_energies=tuple(start_energies),
    )
    return EquilibriumResult(ChargeConfiguration(z), diagnostics)


def _projection_start(field: ExternalField, continuum: PolylineContinuum, n: int):
    """Arclength parameters of the projected unconstrained real equilibrium."""
    locations = field.locations
    try:
        if locations.size >= 2:
            constraint = IntervalConstraint.single(
                float(np.min(locations)), float(np.max(locations)), n
            )
        elif locations.size == 1:
            constraint = IntervalConstraint.single(float(locations[0]), math.inf, n)
        else:
            constraint = IntervalConstraint.single(-math.inf, math.inf, n)
        real_result = minimize(field, constraint)
        params = []
        for x in real_result.configuration.positions:
            hits = continuum.vertical_section(float(x))
            if not hits:
                return None
            _, s = min(hits, key=lambda h: abs(h[0].imag))
            params.append(s)
        return np.sort(np.asarray(params))
    except (ConvergenceError, ValueError):
        return None
