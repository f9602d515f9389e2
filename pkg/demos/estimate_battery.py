"""Quantitative estimates at the conical solution.

The cone in dimension 7 is the extremal object for a family of
inequalities: interior positivity lower bounds, u^{-p} integrability up
to the threshold p* = 4 + 2 sqrt(2) (per unit of homogeneity scaling,
here probed through refinement stability), Holder seminorm growth, and
an upper bound on the box dimension of small sublevel sets.  Each check
recomputes both sides of its inequality on the grid.
"""

import numpy as np

from singlab.analysis import (
    box_dimension,
    holder_quotient,
    p_integral_check,
    p_threshold,
    positivity_check,
)
from singlab.grids import RadialBall, build_grid, cone_field, integrate


def main():
    grid = build_grid(RadialBall(7, 1.0), 1.0 / 256.0)
    cone = cone_field(grid, m=1.0)
    floor = float(cone.boundary_values().min())

    rep = positivity_check(cone, np.zeros(1), 0.25)
    print(f"{rep.inequality}: passed={rep.passed}  "
          f"values={ {k: round(v, 5) for k, v in rep.values.items()} }")

    rep = p_integral_check(cone, 3.0, floor)
    print(f"{rep.inequality} (p=3): passed={rep.passed}")

    pstar = p_threshold()
    print(f"\nintegrability threshold p* = 4 + 2*sqrt(2) = {pstar:.6f}")
    for p in (pstar - 0.5, pstar + 0.5):
        coarse = integrate(build_grid_field(1.0 / 128.0), exponent=-p)
        fine = integrate(cone, exponent=-p)
        drift = abs(fine - coarse) / abs(fine)
        tag = "refinement-stable" if drift < 0.05 else "divergent"
        print(f"  p = {p:.4f}: integral drift under refinement = "
              f"{drift:6.2%}  -> {tag}")

    q = holder_quotient(cone, 0.9, (0.1, 1.0), seed=0)
    print(f"\nholder quotient (alpha=0.9, window [0.1,1]): {q:.5f}")

    rep = box_dimension(cone)
    print(f"{rep.inequality}: dim estimate = "
          f"{rep.values['dimension']:.4f} <= bound "
          f"{rep.values['bound']:.4f}  passed={rep.passed}")


def build_grid_field(h):
    g = build_grid(RadialBall(7, 1.0), h)
    return cone_field(g, m=1.0)


if __name__ == "__main__":
    main()
