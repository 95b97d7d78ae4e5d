"""External fields acting on movable unit charges.

A field is the potential created by a finite set of fixed positive point
charges, interacting through the logarithmic kernel, plus an optional smooth
polynomial confining term::

    phi(x) = -sum_j m_j * ln|x - c_j| + s(x),     sumable polynomial, deg <= 4

The classical families are covered by three ready-made constructors:

* ``jacobi_field(alpha, beta)``  -- charges of mass (beta+1)/2 at -1 and
  (alpha+1)/2 at +1, no smooth term.  The unit charges' equilibrium is the
  zero set of the Jacobi polynomial of matching degree.
* ``laguerre_field(alpha)``      -- one charge of mass (alpha+1)/2 at the
  origin plus the linear term x/2.
* ``hermite_field()``            -- no fixed charges, quadratic term x^2/2.

``lame_field(poles, residues)`` builds the general field of p+1 positive
charges of mass rho_j/2 at increasing real poles, the external field of the
Heine-Stieltjes problem.

Evaluation accepts real or complex points (scalars or arrays).  For a complex
argument the logarithmic terms use the modulus |z - c_j| and the smooth term
contributes its harmonic extension Re s(z), so ``phi`` is always real valued.
``phi_prime`` at a complex point returns the complex analytic derivative g(z)
whose planar gradient is (Re g, -Im g); at a real point it is the ordinary
real derivative.  Exactly at a charge location ``phi`` returns +inf (the
energy of a collision), never raises.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

MAX_SMOOTH_DEGREE = 4


@dataclass(frozen=True)
class FixedCharge:
    """A fixed point charge: ``location`` on the real axis, positive ``mass``."""

    location: float
    mass: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.location):
            raise ValueError(f"charge location must be finite, got {self.location}")
        if not (self.mass > 0):
            raise ValueError(f"charge mass must be positive, got {self.mass}")


@dataclass(frozen=True)
class ExternalField:
    """External potential: fixed logarithmic charges plus a smooth polynomial.

    Parameters
    ----------
    charges : tuple of FixedCharge
        Fixed positive point charges.
    smooth : tuple of float
        Coefficients (c0, c1, ...) of the confining polynomial, low degree
        first, degree at most 4.  Empty tuple means no smooth term.
    """

    charges: tuple[FixedCharge, ...] = ()
    smooth: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        charges = tuple(self.charges)
        smooth = tuple(float(c) for c in self.smooth)
        while smooth and smooth[-1] == 0.0:
            smooth = smooth[:-1]
        if len(smooth) > MAX_SMOOTH_DEGREE + 1:
            raise ValueError(
                f"smooth term degree {len(smooth) - 1} exceeds {MAX_SMOOTH_DEGREE}"
            )
        object.__setattr__(self, "charges", charges)
        object.__setattr__(self, "smooth", smooth)

    @property
    def locations(self) -> np.ndarray:
        return np.array([c.location for c in self.charges], dtype=float)

    @property
    def masses(self) -> np.ndarray:
        return np.array([c.mass for c in self.charges], dtype=float)

    def phi(self, x):
        """Potential at ``x`` (real or complex, scalar or array); +inf at a charge."""
        x = np.asarray(x)
        value = np.zeros(x.shape, dtype=float)
        if self.smooth:
            s = npoly.polyval(x, self.smooth)
            value = value + (s.real if np.iscomplexobj(s) else s)
        with np.errstate(divide="ignore"):
            for c in self.charges:
                value = value - c.mass * np.log(np.abs(x - c.location))
        return value if value.ndim else float(value)

    def phi_prime(self, x):
        """First derivative of the potential.

        Real input: the real derivative phi'(x).  Complex input: the analytic
        derivative g(z) = -sum m_j/(z - c_j) + s'(z); the planar gradient of
        phi is (Re g, -Im g).  Undefined exactly at a charge location.
        """
        x = np.asarray(x)
        value = np.zeros(x.shape, dtype=x.dtype if np.iscomplexobj(x) else float)
        if len(self.smooth) > 1:
            value = value + npoly.polyval(x, npoly.polyder(self.smooth))
        with np.errstate(divide="ignore", invalid="ignore"):
            for c in self.charges:
                value = value - c.mass / (x - c.location)
        if value.ndim:
            return value
        return complex(value) if np.iscomplexobj(value) else float(value)

    def phi_second(self, x):
        """Second derivative: sum m_j/(x - c_j)^2 + s''(x)."""
        x = np.asarray(x)
        value = np.zeros(x.shape, dtype=x.dtype if np.iscomplexobj(x) else float)
        if len(self.smooth) > 2:
            value = value + npoly.polyval(x, npoly.polyder(self.smooth, 2))
        with np.errstate(divide="ignore", invalid="ignore"):
            for c in self.charges:
                value = value + c.mass / (x - c.location) ** 2
        if value.ndim:
            return value
        return complex(value) if np.iscomplexobj(value) else float(value)

    def to_dict(self) -> dict:
        """JSON-ready form: {"charges": [{"location", "mass"}, ...], "smooth": [...]}."""
        return {
            "charges": [{"location": c.location, "mass": c.mass} for c in self.charges],
            "smooth": list(self.smooth),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExternalField":
        charges = tuple(
            FixedCharge(float(c["location"]), float(c["mass"]))
            for c in data.get("charges", [])
        )
        return cls(charges=charges, smooth=tuple(data.get("smooth", [])))


def jacobi_field(alpha: float, beta: float) -> ExternalField:
    """Field of the Jacobi model: mass (beta+1)/2 at -1 and (alpha+1)/2 at +1.

    Requires alpha > -1 and beta > -1, so both fixed charges are positive.
    """
    if not (alpha > -1):
        raise ValueError(f"jacobi_field requires alpha > -1, got alpha={alpha}")
    if not (beta > -1):
        raise ValueError(f"jacobi_field requires beta > -1, got beta={beta}")
    return ExternalField(
        charges=(
            FixedCharge(-1.0, (beta + 1.0) / 2.0),
            FixedCharge(+1.0, (alpha + 1.0) / 2.0),
        )
    )


def laguerre_field(alpha: float) -> ExternalField:
    """Field of the Laguerre model: mass (alpha+1)/2 at 0 plus the term x/2."""
    if not (alpha > -1):
        raise ValueError(f"laguerre_field requires alpha > -1, got alpha={alpha}")
    return ExternalField(
        charges=(FixedCharge(0.0, (alpha + 1.0) / 2.0),),
        smooth=(0.0, 0.5),
    )


def hermite_field() -> ExternalField:
    """Field of the Hermite model: no fixed charges, confining term x^2/2."""
    return ExternalField(smooth=(0.0, 0.0, 0.5))


def lame_field(poles, residues) -> ExternalField:
    """Field of p+1 positive charges of mass residues[j]/2 at ``poles[j]``.

    ``poles`` must be strictly increasing (at least two of them) and every
    residue positive.  With poles (-1, 1) and residues (beta+1, alpha+1) this
    reproduces ``jacobi_field(alpha, beta)`` exactly.
    """
    poles = [float(a) for a in poles]
    residues = [float(r) for r in residues]
    if len(poles) != len(residues):
        raise ValueError(
            f"poles and residues must have equal length, got {len(poles)} and {len(residues)}"
        )
    if len(poles) < 2:
        raise ValueError("lame_field requires at least two poles")
    if any(b <= a for a, b in zip(poles, poles[1:])):
        raise ValueError(f"poles must be strictly increasing, got {poles}")
    if any(r <= 0 for r in residues):
        raise ValueError(f"residues must all be positive, got {residues}")
    return ExternalField(
        charges=tuple(FixedCharge(a, r / 2.0) for a, r in zip(poles, residues))
    )
