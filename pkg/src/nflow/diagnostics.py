"""Conserved quantities, energy, and inequality checks for the flow.

For u_t = u^p (u_xx + u - ubar) with Neumann conditions the integral of
u^(1-p) is constant in time, the energy

    E[u] = integral( u_x^2 - (u - ubar)^2 )

is non-increasing, and on domains [0, k*pi] the weighted first moment
integral( cos(x) * u^(1-p) ) is a second conserved quantity.  Everything
here is a pure function of a Field; nothing mutates state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainNotMultipleOfPi, NonPositiveField
from .spectral import Field, integrate_power, mean, multiple_of_pi

__all__ = [
    "DiagnosticsRecord",
    "energy",
    "energy_quadrature",
    "conserved_integral",
    "dissipation_rate",
    "ls_constant",
    "ls_check",
    "closure_integral",
    "lyapunov_value",
    "stationarity_residual",
    "snapshot",
]


def energy(f: Field) -> float:
    """E[f] = integral(f_x^2) - integral((f - mean)^2), evaluated spectrally.

    In cosine coefficients this is sum_{k>=1} c_k^2 * (a/2) * ((k*pi/a)^2 - 1),
    so constants give exactly zero and any pure mode with (k*pi/a)^2 = 1
    contributes nothing.
    """
    g = f.grid
    c = f.coeffs()
    return float(np.sum(c[1:] ** 2 * (0.5 * g.a) * (g.eigenvalues[1:] - 1.0)))


def energy_quadrature(f: Field) -> float:
    """Same energy via nodal quadrature of f_x^2 - (f - mean)^2.

    Cross-check path for the spectral formula; f_x is synthesized in the
    sine basis, which is exact for every represented mode.
    """
    g = f.grid
    c = f.coeffs()
    m = g.n - 1
    j = np.arange(g.n)
    sin_synth = np.sin(np.pi * np.outer(j, j) / m)
    fx = sin_synth @ (-g.frequencies * c)
    dev = f.values - mean(f)
    return float(g.weights @ (fx**2 - dev**2))


def conserved_integral(f: Field, p: float) -> float:
    """integral of f^(1-p); constant along trajectories of the flow."""
    return integrate_power(f, 1.0 - p)


def dissipation_rate(f: Field, f_t: Field, p: float) -> float:
    """-2 * integral( f^(-p) * f_t^2 ); equals dE/dt along the flow."""
    v = f.values
    if v.min() <= 0.0:
        raise NonPositiveField("dissipation rate needs a strictly positive field")
    g = f.grid
    return float(-2.0 * (g.weights @ (np.power(v, -p) * f_t.values**2)))


def ls_constant(a: float) -> float:
    """Sharp constant C_a with E[f] <= C_a * integral((f_xx + f - fbar)^2).

    C_a = 1 / min{ (k*pi/a)^2 - 1 : k >= 1, (k*pi/a)^2 > 1 }.  Eigenvalues
    within 1e-12 of 1 are treated as exactly 1 and excluded, so domains
    a = k*pi get the constant from the next mode up.
    """
    if not (np.isfinite(a) and a > 0.0):
        raise ValueError(f"domain length must be positive, got {a!r}")
    k = max(1, math.floor(a / np.pi))
    while (k * np.pi / a) ** 2 <= 1.0 + 1e-12:
        k += 1
    return 1.0 / ((k * np.pi / a) ** 2 - 1.0)


def stationarity_residual(f: Field) -> np.ndarray:
    """Nodal values of f_xx + f - mean(f)."""
    return f.grid.stationarity_apply(f.values)


def ls_check(f: Field, tol: float = 1e-10) -> tuple[float, float, bool]:
    """Evaluate both sides of the spectral-gap inequality on f.

    Returns (lhs, rhs, holds) with lhs = E[f], rhs the quadrature of
    (f_xx + f - fbar)^2, and holds = (lhs <= C_a * rhs + tol).
    """
    g = f.grid
    lhs = energy(f)
    r = stationarity_residual(f)
    rhs = float(g.weights @ r**2)
    holds = lhs <= ls_constant(g.a) * rhs + tol
    return lhs, rhs, holds


def closure_integral(f: Field, p: float) -> float:
    """integral( cos(x) * f^(1-p) ) on [0, k*pi].

    Conserved along the flow (two integrations by parts kill every term);
    only defined when the domain length is a multiple of pi.
    """
    g = f.grid
    if multiple_of_pi(g.a) is None:
        raise DomainNotMultipleOfPi(
            f"closure integral needs a = k*pi, got a = {g.a!r}"
        )
    v = f.values
    if v.min() <= 0.0:
        raise NonPositiveField("closure integral needs a strictly positive field")
    return float(g.weights @ (np.cos(g.nodes) * np.power(v, 1.0 - p)))


def lyapunov_value(f: Field, p: float) -> float:
    """integral(f^(2-p)) for p != 2, integral(log f) for p = 2.

    Differentiates along the flow to -(2-p)*E and -E respectively.
    """
    v = f.values
    if p == 2.0:
        if v.min() <= 0.0:
            raise NonPositiveField("log Lyapunov value needs a positive field")
        return float(f.grid.weights @ np.log(v))
    return integrate_power(f, 2.0 - p)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One per-time snapshot of the standard scalar diagnostics."""

    step: int
    t: float
    dt: float
    energy: float
    conserved: float
    mean: float
    min_u: float
    max_u: float
    residual_inf: float
    dissipation: Optional[float]
    lyapunov: float
    closure: Optional[float]


def snapshot(
    f: Field,
    p: float,
    t: float = 0.0,
    step: int = 0,
    dt: float = 0.0,
    f_t: Optional[Field] = None,
) -> DiagnosticsRecord:
    """Assemble a DiagnosticsRecord for state f (and optional rate f_t)."""
    v = f.values
    resid = stationarity_residual(f)
    closure = None
    if multiple_of_pi(f.grid.a) is not None:
        closure = closure_integral(f, p)
    dissipation = None
    if f_t is not None:
        dissipation = dissipation_rate(f, f_t, p)
    return DiagnosticsRecord(
        step=step,
        t=float(t),
        dt=float(dt),
        energy=energy(f),
        conserved=conserved_integral(f, p),
        mean=mean(f),
        min_u=float(v.min()),
        max_u=float(v.max()),
        residual_inf=float(np.abs(resid).max()),
        dissipation=dissipation,
        lyapunov=lyapunov_value(f, p),
        closure=closure,
    )
