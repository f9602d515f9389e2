"""Boundary-data continuation: homotope Dirichlet data downward and watch
min u and lambda_min.

Singular limits are manufactured by walking constant boundary data down a
homotopy phi_t = (1-t) phi_0 + t phi_1 and re-solving with warm starts.
Because levels only decrease, the previous solution is a supersolution for
the next problem, so every warm-started T-iteration stays monotone and
lands on the maximal solution.  Where no solution exists the solver
collapses; a step is charged to nonexistence only after time-step
bisection down to 1e-4 and three perturbed restarts, which separates
genuine nonexistence from solver fragility.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grids import Field, Grid
from .solver import SolveReport, harmonic_extension, maximal_solution, newton_solve
from .stability import is_stable, smallest_eigenvalue, stability_operator


@dataclass(frozen=True)
class ContinuationStep:
    """One recorded continuation state (a converged solve, or the single
    terminal failure)."""

    t: float
    level: float
    min_u: float
    residual: float
    iterations: int
    lambda_min: float | None
    converged: bool
    status: str


@dataclass(frozen=True)
class ContinuationTrace:
    """Ordered steps of one homotopy run plus the terminal status."""

    steps: tuple
    status: str
    n: int
    h: float
    kind: str
    fields: tuple = ()

    def __post_init__(self) -> None:
        ts = [s.t for s in self.steps]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("trace times must be strictly increasing")
        for s in self.steps[:-1]:
            if not s.converged:
                raise ValueError("only the terminal record may be a failure")
        if self.status not in {
            "completed",
            "nonexistence-detected",
            "fold-detected",
            "max-steps",
        }:
            raise ValueError(f"unknown trace status {self.status!r}")

    @property
    def last_converged(self) -> ContinuationStep:
        for s in reversed(self.steps):
            if s.converged:
                return s
        raise ValueError("trace has no converged step")


def _as_boundary(grid: Grid, phi) -> np.ndarray:
    arr = np.asarray(phi, dtype=float)
    if arr.ndim == 0:
        arr = np.full(len(grid.boundary), float(arr))
    if arr.shape != (len(grid.boundary),):
        raise ValueError("boundary data must be scalar or one value per boundary node")
    if np.any(arr <= 0):
        raise ValueError("boundary data must be positive")
    return arr


def _solve_at(
    grid: Grid,
    phi: np.ndarray,
    warm: Field | None,
    tol: float,
    solver: str,
    max_iter: int,
) -> SolveReport:
    if solver == "maximal":
        return maximal_solution(
            grid, phi, tol=tol, max_iter=max_iter, initial=warm, stall_abort=True
        )
    if solver == "newton":
        init = warm if warm is not None else harmonic_extension(grid, phi)
        return newton_solve(grid, phi, init, alpha=1.0, tol=tol, max_iter=max_iter)
    raise ValueError("solver must be 'maximal' or 'newton'")


def _lambda_of(report: SolveReport, x_prev):
    op = stability_operator(report.field, m=1.0)
    rep = smallest_eigenvalue(op, x0=x_prev)
    vec = rep.eigenvector.values[report.field.grid.interior].copy()
    sim = op.meta.get("similarity") if op.meta else None
    if sim is not None:
        vec = vec * sim  # back to the symmetrized coordinates for warm starts
    return rep.lambda_min, vec


def homotopy_run(
    grid: Grid,
    phi0,
    phi1,
    steps: int = 20,
    tol: float = 1e-8,
    solver: str = "maximal",
    track_lambda: bool = True,
    dt_min: float = 1e-4,
    max_iter: int = 500,
    max_attempts: int = 400,
) -> ContinuationTrace:
    """Walk phi_t = (1-t) phi0 + t phi1 from t=0 to t=1 with warm starts.

    The t-grid is uniform with the given number of steps; a failed step is
    bisected in t until dt < dt_min, then retried from three perturbed warm
    starts (scaled 0.95x, 1.05x, and the fresh harmonic extension).  Only
    after all of that does the run stop with status nonexistence-detected,
    recording the failing solve as the single terminal failure step.
    """
    phi0 = _as_boundary(grid, phi0)
    phi1 = _as_boundary(grid, phi1)
    if np.any(phi1 > phi0):
        raise ValueError("homotopy runs downward: phi1 must not exceed phi0 anywhere")
    if steps < 1:
        raise ValueError("need at least one step")

    def phi_at(t: float) -> np.ndarray:
        return (1.0 - t) * phi0 + t * phi1

    rep0 = _solve_at(grid, phi0, None, tol, solver, max_iter)
    if not rep0.converged:
        raise ValueError(f"phi0 does not admit a converged solve (status {rep0.status})")
    lam, x_eig = (None, None)
    if track_lambda:
        lam, x_eig = _lambda_of(rep0, None)
    records = [
        ContinuationStep(
            t=0.0, level=float(np.max(phi0)), min_u=rep0.min_u,
            residual=rep0.residual, iterations=rep0.iterations,
            lambda_min=lam, converged=True, status=rep0.status,
        )
    ]
    fields = [rep0.field]
    lambdas = [lam]

    dt0 = 1.0 / steps
    dt = dt0
    t = 0.0
    u_prev = rep0.field
    status = "max-steps"
    terminal: ContinuationStep | None = None
    attempts = 0
    while t < 1.0 and attempts < max_attempts:
        t_try = t + dt
        if t_try >= 1.0 - 1e-12:  # snap accumulated roundoff to the endpoint
            t_try = 1.0
        attempts += 1
        rep = _solve_at(grid, phi_at(t_try), u_prev, tol, solver, max_iter)
        if rep.converged:
            lam = None
            if track_lambda:
                lam, x_eig = _lambda_of(rep, x_eig)
            records.append(
                ContinuationStep(
                    t=t_try, level=float(np.max(phi_at(t_try))), min_u=rep.min_u,
                    residual=rep.residual, iterations=rep.iterations,
                    lambda_min=lam, converged=True, status=rep.status,
                )
            )
            fields.append(rep.field)
            lambdas.append(lam)
            t = t_try
            u_prev = rep.field
            dt = min(dt0, 2.0 * dt)
            if t >= 1.0:
                status = "completed"
            continue
        if dt > dt_min:
            dt = max(0.5 * dt, dt_min)
            continue
        # dt exhausted: three perturbed restarts, deterministic schedule
        last = rep
        for restart in ("scale-0.95", "scale-1.05", "harmonic"):
            if restart == "scale-0.95":
                init = Field(grid, u_prev.values * 0.95)
            elif restart == "scale-1.05":
                init = Field(grid, u_prev.values * 1.05)
            else:
                init = None
            rep_r = _solve_at(grid, phi_at(t_try), init, tol, solver, max_iter)
            if rep_r.converged:
                break
            last = rep_r
        else:
            status = "nonexistence-detected"
            terminal = ContinuationStep(
                t=t_try, level=float(np.max(phi_at(t_try))), min_u=last.min_u,
                residual=last.residual, iterations=last.iterations,
                lambda_min=None, converged=False, status=last.status,
            )
            break
        rep = rep_r
        lam = None
        if track_lambda:
            lam, x_eig = _lambda_of(rep, x_eig)
        records.append(
            ContinuationStep(
                t=t_try, level=float(np.max(phi_at(t_try))), min_u=rep.min_u,
                residual=rep.residual, iterations=rep.iterations,
                lambda_min=lam, converged=True, status=rep.status,
            )
        )
        fields.append(rep.field)
        lambdas.append(lam)
        t = t_try
        u_prev = rep.field
        dt = min(dt0, 2.0 * dt)
        if t >= 1.0:
            status = "completed"

    if terminal is not None:
        records.append(terminal)
    if status == "completed" and solver == "newton" and track_lambda:
        lams = [s.lambda_min for s in records if s.lambda_min is not None]
        if any(a * b < 0 for a, b in zip(lams, lams[1:])):
            status = "fold-detected"
    return ContinuationTrace(
        steps=tuple(records),
        status=status,
        n=grid.n,
        h=grid.h,
        kind=grid.kind,
        fields=tuple(fields),
    )


@dataclass(frozen=True)
class SingularStep:
    """One floor target's outcome: the solution that reached it, or the
    obstruction that prevented it."""

    target: float
    field: Field | None
    min_u: float | None
    achieved: bool
    obstruction: str | None = None
    obstruction_level: float | None = None


def singular_sequence(
    grid: Grid,
    phi0,
    floor_targets,
    tol: float = 1e-8,
    max_iter: int = 2000,
) -> list:
    """Drive min u down through the given floors by lowering constant data.

    For each target the boundary level is bisected (warm-starting every
    solve from the converged solution at the nearest higher level) until
    min u lands within 20% below the target, i.e. in [0.8*target, target].
    A target cut off by nonexistence is reported with the obstruction
    level; subharmonicity makes targets at or above the boundary maximum
    unachievable outright.  The default iteration budget is higher than
    maximal_solution's own because near-singular Picard contraction slows
    down as min u shrinks; probes that provably cannot finish in budget
    still abort early via the stall projection.
    """
    targets = [float(x) for x in floor_targets]
    if any(b >= a for a, b in zip(targets, targets[1:])):
        raise ValueError("floor targets must be strictly decreasing")
    if any(x <= 0 for x in targets):
        raise ValueError("floor targets must be positive")
    phi0 = _as_boundary(grid, phi0)
    level0 = float(np.max(phi0))
    shape = phi0 / level0  # continuation scales the data, preserving shape

    rep = maximal_solution(grid, phi0, tol=tol, max_iter=max_iter)
    if not rep.converged:
        raise ValueError("phi0 does not admit a converged solve")
    # pool of converged solutions keyed by level, for warm starts
    pool: list[tuple[float, Field, float]] = [(level0, rep.field, rep.min_u)]
    lowest_fail: float | None = None

    def solve_level(level: float) -> SolveReport:
        above = [p for p in pool if p[0] >= level]
        warm = min(above, key=lambda p: p[0])[1] if above else None
        r = maximal_solution(
            grid, level * shape, tol=tol, max_iter=max_iter, initial=warm,
            stall_abort=True,
        )
        if r.converged:
            pool.append((level, r.field, r.min_u))
        return r

    out = []
    for target in targets:
        if target >= level0:
            out.append(
                SingularStep(
                    target=target, field=None, min_u=None, achieved=False,
                    obstruction="maximum-principle",
                    obstruction_level=level0,
                )
            )
            continue
        hit = next(
            (p for p in pool if p[2] is not None and 0.8 * target <= p[2] <= target),
            None,
        )
        lo = lowest_fail if lowest_fail is not None else 0.0
        hi = min(p[0] for p in pool if p[2] > target) if any(p[2] > target for p in pool) else level0
        obstructed = False
        while hit is None:
            if lowest_fail is not None and hi - lowest_fail <= 1e-6 * max(1.0, hi):
                obstructed = True
                break
            mid = 0.5 * (lo + hi)
            r = solve_level(mid)
            if not r.converged:
                lowest_fail = max(lowest_fail or 0.0, mid)
                lo = mid
                continue
            if r.min_u > target:
                hi = mid
            elif r.min_u < 0.8 * target:
                lo = mid
            else:
                hit = (mid, r.field, r.min_u)
            if hi - lo <= 1e-9 * max(1.0, hi):
                # bands this narrow mean min u jumps discontinuously in the
                # level, which only happens against an existence boundary
                obstructed = True
                break
        if hit is not None:
            out.append(
                SingularStep(
                    target=target, field=hit[1], min_u=hit[2], achieved=True
                )
            )
        elif obstructed:
            out.append(
                SingularStep(
                    target=target, field=None, min_u=None, achieved=False,
                    obstruction="nonexistence",
                    obstruction_level=lowest_fail if lowest_fail is not None else hi,
                )
            )
    return out


def fold_detect(trace: ContinuationTrace) -> list:
    """Intervals of t where the branch's lambda_min crosses zero, plus the
    terminal interval when the run failed on a lambda_min -> 0 trend."""
    conv = [s for s in trace.steps if s.converged]
    if any(s.lambda_min is None for s in conv):
        raise ValueError("fold detection needs lambda_min recorded at every step")
    intervals = []
    for a, b in zip(conv, conv[1:]):
        if a.lambda_min * b.lambda_min < 0:
            intervals.append((a.t, b.t))
    if trace.steps and not trace.steps[-1].converged and len(conv) >= 2:
        if conv[-1].lambda_min < conv[-2].lambda_min:
            intervals.append((conv[-1].t, trace.steps[-1].t))
    return intervals
