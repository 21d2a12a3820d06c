"""Cosine-basis collocation on [0, a] for Neumann problems.

The basis is cos(k*pi*x/a), k = 0..n-1, whose members all have vanishing
derivative at both endpoints.  Collocation nodes are the endpoint-inclusive
extrema grid x_j = a*j/(n-1) (the Chebyshev-Lobatto pattern mapped to
[0, a]); on it the basis interpolates exactly through a DCT-I style
transform.  The paired quadrature weights are the exact-trigonometric
(Clenshaw-Curtis type) weights for this grid, which reduce to half-weighted
endpoints: they are positive, sum to a, and integrate cos(k*pi*x/a)
exactly for every k <= 2n-3, comfortably past the k <= n-2 the rest of
the package relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import NonPositiveField

__all__ = [
    "Grid",
    "Field",
    "make_grid",
    "make_field",
    "multiple_of_pi",
    "to_coeffs",
    "from_coeffs",
    "second_derivative",
    "mean",
    "integrate_power",
]


def multiple_of_pi(a: float, tol: float = 1e-9) -> Optional[int]:
    """Return k if a == k*pi to within tol (k >= 1), else None."""
    k = int(round(a / np.pi))
    if k >= 1 and abs(a / np.pi - k) <= tol:
        return k
    return None


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=float)
    if out is arr:
        out = out.copy()
    out.flags.writeable = False
    return out


@dataclass
class Grid:
    """Collocation grid on [0, a] with its transform and quadrature data.

    Attributes
    ----------
    a : float
        Domain length.
    n : int
        Number of nodes (and cosine modes).
    nodes : ndarray
        Strictly increasing nodes, nodes[0] == 0, nodes[-1] == a.
    weights : ndarray
        Positive quadrature weights summing to a.
    """

    a: float
    n: int
    nodes: np.ndarray
    weights: np.ndarray

    @cached_property
    def frequencies(self) -> np.ndarray:
        """k*pi/a for k = 0..n-1.

        Computed as (k*pi)/a so that when a was itself produced as m*pi
        the resonant frequency comes out exactly 1.0 and the stationarity
        gain 1 - (k*pi/a)^2 annihilates the resonant mode exactly.
        """
        return _readonly((np.arange(self.n) * np.pi) / self.a)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Neumann Laplacian eigenvalues (k*pi/a)^2 on this domain."""
        return _readonly(self.frequencies**2)

    @cached_property
    def synthesis(self) -> np.ndarray:
        """Matrix S with S[j, k] = cos(k*pi*x_j/a); values = S @ coeffs."""
        m = self.n - 1
        j = np.arange(self.n)
        return _readonly(np.cos(np.pi * np.outer(j, j) / m))

    @cached_property
    def analysis(self) -> np.ndarray:
        """Inverse of synthesis via discrete cosine orthogonality."""
        m = self.n - 1
        half = np.ones(self.n)
        half[0] = half[-1] = 0.5
        mat = self.synthesis * half[np.newaxis, :] * (2.0 / m)
        mat[0, :] *= 0.5
        mat[-1, :] *= 0.5
        return _readonly(mat)

    @cached_property
    def second_derivative_matrix(self) -> np.ndarray:
        """Dense nodal operator for d^2/dx^2 in the cosine basis."""
        return _readonly(self.synthesis @ (-self.eigenvalues[:, None] * self.analysis))

    @cached_property
    def _gain_analysis(self) -> np.ndarray:
        """diag(1 - (k*pi/a)^2) @ analysis with the k = 0 row zeroed."""
        gain = 1.0 - self.eigenvalues
        gain[0] = 0.0
        return _readonly(gain[:, None] * self.analysis)

    def stationarity_apply(self, v: np.ndarray) -> np.ndarray:
        """Evaluate v_xx + v - mean(v) at the nodes.

        Staged on purpose: the quadrature mean is subtracted first, so the
        transform only ever sees the deviation from constant and every
        rounding error downstream scales with that deviation, not with
        ‖v‖.  The nodal subtraction is exact whenever v is within a factor
        of two of its mean, and the surviving constant-sized error (the
        rounding of the mean itself) is a pure k = 0 component, which the
        zeroed gain row annihilates.  A fused dense matrix would instead
        carry an error floor of order eps * (n*pi/a)^2 * ‖v‖, large enough
        to mask genuine stationarity at fine resolution.
        """
        r = v - (self.weights @ v) / self.a
        return self.synthesis @ (self._gain_analysis @ r)


def make_grid(a: float, n: int) -> Grid:
    """Build the collocation grid for domain length a with n nodes.

    Requires a > 0 (finite) and n >= 8.
    """
    if not (np.isfinite(a) and a > 0.0):
        raise ValueError(f"domain length must be positive and finite, got {a!r}")
    if int(n) != n or n < 8:
        raise ValueError(f"need at least 8 nodes, got {n!r}")
    n = int(n)
    nodes = np.linspace(0.0, a, n)
    w = np.full(n, a / (n - 1))
    w[0] = w[-1] = 0.5 * a / (n - 1)
    return Grid(a=float(a), n=n, nodes=_readonly(nodes), weights=_readonly(w))


@dataclass
class Field:
    """Nodal samples of a function on a Grid; values are frozen on creation."""

    grid: Grid
    values: np.ndarray
    _coeffs: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {vals.shape}")
        self.values = _readonly(vals)
        if self._coeffs is not None:
            self._coeffs = _readonly(np.asarray(self._coeffs, dtype=float))

    def coeffs(self) -> np.ndarray:
        """Cosine coefficients c_k with values = sum_k c_k cos(k*pi*x/a)."""
        if self._coeffs is None:
            self._coeffs = _readonly(self.grid.analysis @ self.values)
        return self._coeffs


def make_field(grid: Grid, values: np.ndarray) -> Field:
    return Field(grid=grid, values=values)


def to_coeffs(f: Field) -> np.ndarray:
    """Cosine coefficients of f; round-trips with from_coeffs to ~1e-15."""
    return f.coeffs()


def from_coeffs(coeffs: np.ndarray, grid: Grid) -> Field:
    """Synthesize a Field from cosine coefficients."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} coefficients, got shape {c.shape}")
    return Field(grid=grid, values=grid.synthesis @ c, _coeffs=c)


def second_derivative(f: Field) -> Field:
    """Spectral second derivative: coefficients scaled by -(k*pi/a)^2."""
    return from_coeffs(-f.grid.eigenvalues * f.coeffs(), f.grid)


def mean(f: Field) -> float:
    """Domain average (1/a) * integral of f; equals the k = 0 coefficient."""
    g = f.grid
    return float(g.weights @ f.values / g.a)


def integrate_power(f: Field, q: float) -> float:
    """Quadrature of f**q over [0, a].

    For q < 0 the field must be strictly positive; a zero or negative
    value anywhere raises NonPositiveField since the integrand blows up.
    """
    v = f.values
    if q < 0 and v.min() <= 0.0:
        raise NonPositiveField(
            f"integrate_power with q={q} needs a strictly positive field "
            f"(min value {v.min():.6g})"
        )
    return float(f.grid.weights @ np.power(v, q))
