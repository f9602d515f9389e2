"""Drive boundary data toward the singular limit.

Two regimes.  On a planar disk, lowering constant boundary data is
stopped by nonexistence: the homotopy's solver collapses and adaptive
step halving cannot rescue it.  On a ball in dimension 7 the maximal
solutions follow the data all the way down, and their minima march
toward zero while the fields approach the stable cone.
"""

from singlab.continuation import homotopy_run, singular_sequence
from singlab.grids import Disk, RadialBall, build_grid


def main():
    disk = build_grid(Disk(1.0), 1.0 / 32.0)
    trace = homotopy_run(disk, 2.0, 0.05, steps=10, track_lambda=False)
    last = trace.last_converged
    print("disk, boundary 2.0 -> 0.05:")
    print(f"  status = {trace.status} after {len(trace.steps)} steps")
    print(f"  last solvable level = {last.level:.4f} with "
          f"min u = {last.min_u:.4f}")
    print("  below that level the iteration collapses at every retry: "
          "nonexistence.\n")

    ball = build_grid(RadialBall(7, 1.0), 1.0 / 256.0)
    steps = singular_sequence(ball, 1.0, (0.3, 0.15, 0.075))
    print("ball n=7, chasing interior minima from boundary level 1.0:")
    for s in steps:
        print(f"  target {s.target:<6g} achieved={s.achieved}  "
              f"min u = {s.min_u:.5f} at boundary level "
              f"{float(s.field.boundary_values().max()):.5f}")
    print("  every floor is reached; the minima shrink without "
          "obstruction, tracing the singular limit.")


if __name__ == "__main__":
    main()
