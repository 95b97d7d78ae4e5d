"""Discrete logarithmic energy of a charge configuration in an external field.

The movable charges are unit charges at pairwise distinct points.  Their
energy is

    E(X) = -sum_{k<j} ln|x_k - x_j| + sum_k phi(x_k)

with ``phi`` an :class:`~chargeq.fields.ExternalField`.  Coalescence of two
charges, or a charge sitting on a fixed charge of the field, gives E = +inf;
this is reported as a value, not an error, so optimizers can treat the energy
as an extended-real barrier function.

Positions may be real or complex.  Real configurations are kept sorted in
strictly increasing order.  The gradient of a real configuration is the plain
vector of partial derivatives; for a complex configuration it is the n x 2
array of planar derivatives (d/dRe, d/dIm) per charge.  The Hessian is
supported for real configurations only, and is the literal second derivative
of E above: off-diagonal entries -(x_i - x_j)^(-2) and diagonal entries
phi''(x_i) + sum_{j != i} (x_i - x_j)^(-2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fields import ExternalField

# Pairwise gaps below this fraction of the configuration diameter count as a
# collision; keeps 1/gap arithmetic clear of overflow while preserving E=+inf.
COALESCENCE_RTOL = 1e-14


class InfiniteEnergyError(ValueError):
    """Raised when an operation needs a finite-energy configuration."""


@dataclass(frozen=True)
class ChargeConfiguration:
    """Positions of n movable unit charges (real or complex).

    Real positions are sorted ascending on construction; complex positions
    keep their given order.  The array is immutable.
    """

    positions: np.ndarray

    def __post_init__(self) -> None:
        pos = np.atleast_1d(np.asarray(self.positions))
        if pos.ndim != 1 or pos.size == 0:
            raise ValueError("positions must be a non-empty 1-d sequence")
        if np.iscomplexobj(pos):
            pos = pos.astype(np.complex128)
            if np.all(pos.imag == 0.0):
                pos = np.sort(pos.real.astype(np.float64))
        else:
            pos = np.sort(pos.astype(np.float64))
        pos = pos.copy()
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.size

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.positions)

    def min_gap(self) -> float:
        """Smallest pairwise distance (0.0 for a single charge is never reported: +inf)."""
        if self.n < 2:
            return math.inf
        d = np.abs(self.positions[:, None] - self.positions[None, :])
        return float(np.min(d[np.triu_indices(self.n, k=1)]))

    def diameter(self) -> float:
        if self.n < 2:
            return 0.0
        d = np.abs(self.positions[:, None] - self.positions[None, :])
        return float(np.max(d))


def _pair_distances(config: ChargeConfiguration) -> np.ndarray:
    pos = config.positions
    return np.abs(pos[:, None] - pos[None, :])[np.triu_indices(config.n, k=1)]


def is_coalescent(config: ChargeConfiguration) -> bool:
    """True when some pair of charges is too close to carry finite energy."""
    if config.n < 2:
        return False
    gaps = _pair_distances(config)
    diam = float(np.max(gaps))
    return bool(np.min(gaps) <= COALESCENCE_RTOL * diam)


def mutual_energy(config: ChargeConfiguration) -> float:
    """Interaction energy -sum_{k<j} ln|x_k - x_j|; +inf on coalescence."""
    if config.n < 2:
        return 0.0
    if is_coalescent(config):
        return math.inf
    return float(-np.sum(np.log(_pair_distances(config))))


def total_energy(config: ChargeConfiguration, field: ExternalField) -> float:
    """Mutual energy plus the field contribution sum_k phi(x_k); +inf on collision."""
    mutual = mutual_energy(config)
    if mutual == math.inf:
        return math.inf
    external = float(np.sum(field.phi(config.positions)))
    return mutual + external


def gradient(config: ChargeConfiguration, field: ExternalField) -> np.ndarray:
    """Gradient of the total energy.

    Real configuration: shape (n,), component k equal to
    -sum_{j != k} 1/(x_k - x_j) + phi'(x_k).  Complex configuration: shape
    (n, 2) with the planar derivatives (d/dRe, d/dIm) per charge.

    Raises
    ------
    InfiniteEnergyError
        If the configuration has infinite energy (the gradient is undefined).
    """
    if not math.isfinite(total_energy(config, field)):
        raise InfiniteEnergyError("gradient undefined: configuration has infinite energy")
    pos = config.positions
    diff = pos[:, None] - pos[None, :]
    np.fill_diagonal(diff, 1.0)
    inv = 1.0 / diff
    np.fill_diagonal(inv, 0.0)
    g = -np.sum(inv, axis=1) + field.phi_prime(pos)
    if config.is_real:
        return np.asarray(g, dtype=float)
    return np.column_stack([g.real, -g.imag])


def hessian(config: ChargeConfiguration, field: ExternalField) -> np.ndarray:
    """Second derivative matrix of the total energy (real configurations only)."""
    if not config.is_real:
        raise TypeError("hessian supports real configurations only")
    if not math.isfinite(total_energy(config, field)):
        raise InfiniteEnergyError("hessian undefined: configuration has infinite energy")
    pos = config.positions
    diff = pos[:, None] - pos[None, :]
    np.fill_diagonal(diff, 1.0)
    inv2 = 1.0 / diff**2
    np.fill_diagonal(inv2, 0.0)
    h = -inv2
    np.fill_diagonal(h, field.phi_second(pos) + np.sum(inv2, axis=1))
    return h


class DefinitenessReport(NamedTuple):
    is_positive_definite: bool
    eigenvalue_lower_bound: float


def definiteness_check(matrix: np.ndarray) -> DefinitenessReport:
    """Positive definiteness of a symmetric matrix, with a Gershgorin bound.

    The boolean comes from attempting a Cholesky factorization (success means
    every pivot is positive).  The accompanying float is the Gershgorin lower
    bound min_i (a_ii - sum_{j != i} |a_ij|) on the smallest eigenvalue; it may
    be negative even when the matrix is definite.

    Raises
    ------
    ValueError
        If the input is not square and symmetric.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(scale, 1.0)):
        raise ValueError("matrix is not symmetric")
    radii = np.sum(np.abs(a), axis=1) - np.abs(np.diag(a))
    bound = float(np.min(np.diag(a) - radii))
    try:
        np.linalg.cholesky(a)
        definite = True
    except np.linalg.LinAlgError:
        definite = False
    return DefinitenessReport(definite, bound)
