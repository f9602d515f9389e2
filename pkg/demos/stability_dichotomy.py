"""The dimension split for stability of the conical solution.

The second variation at a field u is the quadratic form of
-Delta - m u^{-2}.  At the cone u = sqrt(m/(n-1)) |x| the zero-order
term is a Hardy potential with constant n-1, so stability is a contest
with the sharp Hardy constant (n-2)^2/4: the cone is stable exactly
when n >= 7.  This script computes the smallest Dirichlet eigenvalue on
a punctured ball in both regimes and, for n <= 6, exhibits explicit
test functions with negative Rayleigh quotient.
"""

from singlab.grids import RadialAnnulus, build_grid, cone_field
from singlab.stability import (
    hardy_witness,
    rayleigh_quotient,
    smallest_eigenvalue,
    stability_operator,
)


def main():
    for n in (7, 3):
        grid = build_grid(RadialAnnulus(n, 1e-3, 1.0), (1.0 - 1e-3) / 1500.0)
        cone = cone_field(grid, m=1.0)
        rep = smallest_eigenvalue(stability_operator(cone, m=1.0))
        verdict = "stable" if rep.lambda_min >= 0 else "UNSTABLE"
        print(f"n={n}: lambda_min = {rep.lambda_min:10.4f}  -> {verdict}")

    print("\nHardy witnesses (n <= 6): Rayleigh quotients that go negative")
    for n in range(2, 7):
        grid = build_grid(RadialAnnulus(n, 1e-4, 1.0), (1.0 - 1e-4) / 1500.0)
        cone = cone_field(grid, m=1.0)
        w = hardy_witness(n, grid)
        q = rayleigh_quotient(cone, w)
        print(f"  n={n}: Q[w] = {q:12.3f}")
    print("a single negative quotient certifies instability; "
          "none exists once n >= 7.")


if __name__ == "__main__":
    main()
