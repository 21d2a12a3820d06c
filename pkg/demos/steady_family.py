"""Walk the steady-state family on a resonant domain.

On a = k*pi the steady states form the one-parameter family
A cos x + B with 0 <= |A| <= B.  Fixing the conserved integral I0 turns
the family into a curve B = B_A: each amplitude has exactly one offset
that keeps I0.  For 1 < p < 3/2 the curve ends at the degenerate state
A0 (cos x + 1) whose amplitude A0 follows from I0 in closed form; for
p >= 3/2 the touching state carries a divergent integral, so no
admissible amplitude reaches it.
"""

import numpy as np

from nflow.errors import NoRoot
from nflow.steady import compute_A0, cosine_family_integral, solve_BA

PI = np.pi


def main() -> None:
    I0 = PI
    for p in (1.25, 2.0):
        print(f"== p = {p}, I0 = pi on a = pi")
        if p < 1.5:
            A0 = compute_A0(p, PI, I0)
            print(f"   amplitude cap A0 = {A0:.12g} "
                  f"(degenerate state A0(cos x + 1))")
            amps = np.linspace(0.0, A0, 6)
        else:
            print("   no amplitude cap: the touching state is out of reach")
            amps = np.linspace(0.0, 3.0, 6)

        print(f"   {'A':>10}  {'B_A':>14}  {'gap B-|A|':>12}")
        for A in amps:
            try:
                B = solve_BA(float(A), p, PI, I0)
            except NoRoot as exc:
                print(f"   {A:10.6f}  {'-':>14}  no root: {exc}")
                continue
            check = cosine_family_integral(float(A), B, p, 1)
            assert abs(check - I0) <= 1e-8 * I0
            print(f"   {A:10.6f}  {B:14.10f}  {B - abs(A):12.3e}")
        print()


if __name__ == "__main__":
    main()
