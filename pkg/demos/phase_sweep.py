"""Outcome map over (p, a) for one-mode perturbations 1 + 0.4 cos(pi x/a).

The initial energy is amp^2 (a/2) ((pi/a)^2 - 1): positive below a = pi,
negative above, independent of p.  With 1 < p <= 2 that sign decides
everything; above p = 2 the nonnegative-energy column is not covered by
any shipped guarantee, so those cells just report what happened.
"""

import numpy as np

from nflow.evolution import SolverConfig
from nflow.experiments import run_sweep

PI = np.pi


def main() -> None:
    p_grid = [1.5, 2.0, 2.5]
    a_grid = [2.0, 2.5, PI, 4.0, 2.0 * PI]
    base = SolverConfig(p=2.0, blowup_threshold=1e6, t_max=60.0, record_every=500)
    sweep = run_sweep(p_grid, a_grid, [0.4], base, n=33)

    header = "p \\ a " + "".join(f"{a:>12.4f}" for a in a_grid)
    print(header)
    for p in p_grid:
        row = [c for c in sweep.cells if c["p"] == p]
        line = f"{p:5.2f} "
        for cell in row:
            mark = cell["outcome"] or "error"
            line += f"{mark:>12}"
        print(line)

    print()
    print("E0 per domain (independent of p):")
    for a in a_grid:
        E0 = 0.4**2 * (a / 2.0) * ((PI / a) ** 2 - 1.0)
        print(f"   a = {a:8.4f}: E0 = {E0:+.6f}")


if __name__ == "__main__":
    main()
