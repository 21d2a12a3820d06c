"""Steady states of the flow and the limit they pin down.

On [0, a] with a != k*pi the only nonnegative steady states are constants.
On [0, k*pi] the cosine family A*cos(x) + B with 0 <= |A| <= B joins them;
its boundary |A| = B touches zero and is reachable as a limit only when
1 < p < 3/2, where integral((cos x + 1)^(1-p)) is still finite.

The conserved integral I0 = integral(u0^(1-p)) selects the limit:

* a != k*pi: the unique constant (I0/a)^(-1/(p-1));
* a  = k*pi: the family member with B = B_A(I0) for whatever amplitude A
  the dynamics settle on, with the amplitude cap A0 = (N_p / I0)^(1/(p-1))
  (N_p the touching-zero family integral at A = 1), finite only for
  1 < p < 3/2.

The family integral integral((A cos x + B)^(1-p)) is evaluated by a graded
substituted quadrature built around the half-angle identity
1 + cos(x) = 2 cos^2(x/2): after x = pi - 2s the integrand is
(B - |A| + 2|A| sin^2 s)^(1-p), whose only delicate point is s = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np

from .errors import DomainNotMultipleOfPi, ExponentOutOfRange, NFlowError, NoRoot
from .spectral import Field, integrate_power, mean, multiple_of_pi

__all__ = [
    "Constant",
    "Cosine",
    "Degenerate",
    "NoMatch",
    "SteadyState",
    "ClassifyResult",
    "LimitPrediction",
    "classify",
    "predict_limit",
    "compute_A0",
    "solve_BA",
    "match_steady_state",
    "cosine_family_integral",
    "steady_to_json",
]

TOL_API = 1e-9

_GAUSS_ORDER = 24
_GRADE_LEVELS = 50


@dataclass(frozen=True)
class Constant:
    """Spatially constant steady state u = c."""

    c: float


@dataclass(frozen=True)
class Cosine:
    """Steady state A*cos(x) + B on [0, k*pi], |A| <= B."""

    A: float
    B: float


@dataclass(frozen=True)
class Degenerate:
    """Touching-zero steady state A*(cos(x - phase) + 1), phase in {0, pi}.

    Only reachable as a limit on [0, k*pi] with 1 < p < 3/2.
    """

    A: float
    phase: float


@dataclass(frozen=True)
class NoMatch:
    """Returned by match_steady_state when nothing in the family fits."""

    residual: float


SteadyState = Union[Constant, Cosine, Degenerate]


def steady_to_json(state: Union[SteadyState, NoMatch, None]) -> Optional[dict]:
    if state is None:
        return None
    if isinstance(state, Constant):
        return {"kind": "constant", "c": state.c}
    if isinstance(state, Cosine):
        return {"kind": "cosine", "A": state.A, "B": state.B}
    if isinstance(state, Degenerate):
        return {"kind": "degenerate", "A": state.A, "B": state.A, "phase": state.phase}
    if isinstance(state, NoMatch):
        return {"kind": "no_match", "residual": state.residual}
    raise TypeError(f"not a steady state: {state!r}")


@dataclass(frozen=True)
class ClassifyResult:
    """Description of the steady-state set for domain length a."""

    constants_only: bool
    k: Optional[int]

    def describe(self) -> str:
        if self.constants_only:
            return "nonnegative constants only"
        return (
            f"nonnegative constants plus A*cos(x) + B with 0 < |A| <= B "
            f"on [0, {self.k}*pi]; |A| = B touches zero"
        )


def classify(a: float, p: float, tol_api: float = TOL_API) -> ClassifyResult:
    """Classify the steady-state set on [0, a]."""
    if not (np.isfinite(a) and a > 0.0):
        raise ValueError(f"domain length must be positive, got {a!r}")
    if not p > 1.0:
        raise ExponentOutOfRange(f"exponent must satisfy p > 1, got {p!r}")
    k = multiple_of_pi(a, tol_api)
    return ClassifyResult(constants_only=k is None, k=k)


# ---------------------------------------------------------------------------
# family integral: graded substituted quadrature


@lru_cache(maxsize=1)
def _panel_rule() -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss rule on [0, 1], dyadically graded into both endpoints."""
    x, w = np.polynomial.legendre.leggauss(_GAUSS_ORDER)
    lo = 0.5 * 2.0 ** (-np.arange(_GRADE_LEVELS, -1, -1, dtype=float))
    cuts = np.concatenate(([0.0], lo, (1.0 - lo[:-1])[::-1], [1.0]))
    mid = 0.5 * (cuts[1:] + cuts[:-1])
    half = 0.5 * (cuts[1:] - cuts[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _sin_ratio(s: np.ndarray) -> np.ndarray:
    out = np.ones_like(s)
    m = s > 0.0
    out[m] = np.sin(s[m]) / s[m]
    return out


def cosine_family_integral(A: float, B: float, p: float, k: int) -> float:
    """integral_0^{k*pi} (A cos x + B)^(1-p) dx for B >= |A| >= 0, p > 1.

    Exact in the only limits that matter: B > |A| reduces by the half-angle
    substitution to a smooth integrand; B == |A| pulls the sin^(2-2p)
    endpoint power out analytically (finite only for p < 3/2).  The panel
    rule keeps ~1e-13 relative accuracy uniformly over the bracket range
    the root solver visits.
    """
    if not p > 1.0:
        raise ExponentOutOfRange(f"exponent must satisfy p > 1, got {p!r}")
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    k = int(k)
    alpha = abs(float(A))
    B = float(B)
    if B <= 0.0 or B < alpha:
        raise ValueError(f"need B >= |A| > 0 or a positive constant, got A={A!r}, B={B!r}")

    if alpha == 0.0:
        return float(k * np.pi * B ** (1.0 - p))

    c = 0.5 * np.pi
    t, w = _panel_rule()
    gap = B - alpha

    if gap == 0.0:
        if p >= 1.5:
            raise ExponentOutOfRange(
                f"touching-zero integrand is non-integrable for p = {p} >= 3/2"
            )
        q = 1.0 / (3.0 - 2.0 * p)
        s = c * np.power(t, q)
        phi = np.power(_sin_ratio(s), 2.0 - 2.0 * p)
        value = 2.0 * (2.0 * alpha) ** (1.0 - p) * c ** (3.0 - 2.0 * p) * q * (w @ phi)
        return float(k * value)

    if p < 1.5:
        q = min(24, max(2, math.ceil(1.0 / (3.0 - 2.0 * p))))
    else:
        q = 12
    s = c * np.power(t, q)
    base = gap + 2.0 * alpha * np.sin(s) ** 2
    integrand = np.power(base, 1.0 - p) * (c * q) * np.power(t, q - 1)
    return float(k * 2.0 * (w @ integrand))


# ---------------------------------------------------------------------------
# limit selection


def _require_k(a: float, what: str) -> int:
    k = multiple_of_pi(a)
    if k is None:
        raise DomainNotMultipleOfPi(f"{what} needs a = k*pi, got a = {a!r}")
    return k


def compute_A0(p: float, a: float, I0: float) -> float:
    """Amplitude cap for the touching-zero limit: (N_p / I0)^(1/(p-1)).

    N_p is the family integral at the touching-zero profile cos(x) + 1 on
    [0, k*pi]; finite only for 1 < p < 3/2, hence the exponent guard.
    Scaling: replacing I0 by s^(1-p)*I0 multiplies the result by s.
    """
    if not (1.0 < p < 1.5):
        raise ExponentOutOfRange(
            f"amplitude cap only exists for 1 < p < 3/2, got p = {p!r}"
        )
    k = _require_k(a, "amplitude cap")
    if not I0 > 0.0:
        raise ValueError(f"conserved integral must be positive, got {I0!r}")
    numerator = cosine_family_integral(1.0, 1.0, p, k)
    return float((numerator / I0) ** (1.0 / (p - 1.0)))


def solve_BA(A: float, p: float, a: float, I0: float, rtol: float = 1e-10) -> float:
    """Solve integral((A cos x + B)^(1-p)) = I0 for B >= |A| on [0, k*pi].

    The integral is strictly decreasing in B, so the root is bracketed and
    then refined by a secant/bisection hybrid until the integral matches
    I0 to rtol relative.  For p < 3/2 the bracket may close at B = |A|
    exactly (the touching-zero state); if even that value undershoots I0
    there is no root and NoRoot is raised.
    """
    if not p > 1.0:
        raise ExponentOutOfRange(f"exponent must satisfy p > 1, got {p!r}")
    if not I0 > 0.0:
        raise ValueError(f"conserved integral must be positive, got {I0!r}")
    k = _require_k(a, "family root solve")
    alpha = abs(float(A))

    def F(B: float) -> float:
        return cosine_family_integral(alpha, B, p, k)

    # Upper end: double until the integral falls below I0.
    scale = (I0 / (k * np.pi)) ** (-1.0 / (p - 1.0))  # constant-state guess
    hi = max(2.0 * alpha, scale, 1e-8)
    F_hi = F(hi)
    for _ in range(200):
        if F_hi < I0:
            break
        hi *= 2.0
        F_hi = F(hi)
    else:
        raise NFlowError("upper bracket search failed")

    # Lower end.
    if alpha == 0.0:
        lo, F_lo = 0.0, np.inf
    elif p < 1.5:
        lo, F_lo = alpha, F(alpha)
        if F_lo < I0 * (1.0 - max(rtol, 1e-9)):
            raise NoRoot(
                f"touching-zero integral {F_lo:.12g} already below target "
                f"{I0:.12g}: amplitude {alpha:.6g} exceeds the cap"
            )
    else:
        # integral diverges at B = |A|: shrink eps geometrically until it
        # overshoots the target.
        eps = 0.25 * max(alpha, hi - alpha)
        lo, F_lo = alpha, np.inf
        for _ in range(300):
            cand = alpha + eps
            if cand == alpha:
                break
            val = F(cand)
            if val >= I0:
                lo, F_lo = cand, val
                break
            hi, F_hi = cand, val
            eps *= 0.25

    if abs(F_lo - I0) <= rtol * I0:
        return float(lo)
    if abs(F_hi - I0) <= rtol * I0:
        return float(hi)

    best, best_res = 0.5 * (lo + hi), np.inf
    for _ in range(300):
        B = None
        if np.isfinite(F_lo):
            B = lo + (F_lo - I0) * (hi - lo) / (F_lo - F_hi)
            inset = 0.05 * (hi - lo)
            if not (lo + inset <= B <= hi - inset):
                B = None
        if B is None:
            B = 0.5 * (lo + hi)
        val = F(B)
        res = abs(val - I0)
        if res < best_res:
            best, best_res = B, res
        if res <= rtol * I0:
            return float(B)
        if val >= I0:
            lo, F_lo = B, val
        else:
            hi, F_hi = B, val
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    if best_res <= 1e-6 * I0:
        return float(best)
    raise NFlowError(f"family root refinement stalled at residual {best_res:.3g}")


@dataclass
class LimitPrediction:
    """What the conserved integral says the trajectory can converge to."""

    kind: str  # "unique" | "family"
    I0: float
    state: Optional[Constant] = None
    A0: Optional[float] = None
    B_of_A: Optional[Callable[[float], float]] = None


def predict_limit(u0: Field, p: float, a: Optional[float] = None) -> LimitPrediction:
    """Predict the limit set for initial data u0 under exponent p.

    Off multiples of pi the limit is the unique constant with the same
    conserved integral.  On [0, k*pi] the prediction is the one-parameter
    family B = B_A(I0) with amplitude cap A0 (finite only for p < 3/2).
    """
    if not p > 1.0:
        raise ExponentOutOfRange(f"exponent must satisfy p > 1, got {p!r}")
    if a is None:
        a = u0.grid.a
    I0 = integrate_power(u0, 1.0 - p)
    k = multiple_of_pi(a)
    if k is None:
        c = (I0 / a) ** (-1.0 / (p - 1.0))
        return LimitPrediction(kind="unique", I0=I0, state=Constant(c=float(c)))
    A0 = compute_A0(p, a, I0) if p < 1.5 else None
    return LimitPrediction(
        kind="family",
        I0=I0,
        A0=A0,
        B_of_A=lambda A: solve_BA(A, p, a, I0),
    )


def match_steady_state(
    f: Field,
    p: float,
    a: Optional[float] = None,
    fit_tol: float = 1e-6,
) -> Union[SteadyState, NoMatch]:
    """Fit f against the steady-state family and report what it is.

    B comes from the domain mean, A (on [0, k*pi] only) from the cos(x)
    moment; the fit is accepted when the sup-norm residual against the
    fitted profile is within fit_tol.
    """
    if a is None:
        a = f.grid.a
    g = f.grid
    v = f.values
    B_fit = mean(f)
    k = multiple_of_pi(a)
    if k is None:
        residual = float(np.abs(v - B_fit).max())
        if residual <= fit_tol:
            return Constant(c=B_fit)
        return NoMatch(residual=residual)

    cosx = np.cos(g.nodes)
    A_fit = float(2.0 / a * (g.weights @ (cosx * v)))
    if abs(A_fit) <= fit_tol:
        residual = float(np.abs(v - B_fit).max())
        if residual <= fit_tol:
            return Constant(c=B_fit)
        return NoMatch(residual=residual)

    residual = float(np.abs(v - (A_fit * cosx + B_fit)).max())
    if residual > fit_tol or abs(A_fit) > B_fit + fit_tol:
        return NoMatch(residual=residual)
    if B_fit - abs(A_fit) <= fit_tol and 1.0 < p < 1.5:
        phase = 0.0 if A_fit > 0 else float(np.pi)
        return Degenerate(A=abs(A_fit), phase=phase)
    return Cosine(A=A_fit, B=B_fit)
