"""Release gate: the twelve checks the package must pass to ship.

Each ``criterion_*`` function runs one check end to end on pinned
parameters and returns a :class:`CriterionResult` with the measured
numbers, so a failure is diagnosable from the record alone.  The checks
are intentionally independent: each builds its own grids and fields and
can run in isolation or in any order.

Known state: criterion 12 (energy-unboundedness) fails by design of the
check itself; see its docstring.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .analysis import box_dimension, holder_quotient, p_threshold
from .continuation import homotopy_run, singular_sequence
from .grids import (
    Disk,
    Field,
    Interval,
    RadialAnnulus,
    RadialBall,
    SparseOperator,
    assemble_laplacian,
    build_grid,
    cone_field,
    dirichlet_energy,
    integrate,
)
from .oracles import oracle_dense_eig, oracle_integrate_radial, oracle_quadrature
from .radial import (
    bifurcation_constants,
    conical_deviation,
    integrate_radial,
    solve_dirichlet_radial,
)
from .solver import maximal_solution, newton_solve
from .stability import (
    hardy_witness,
    rayleigh_quotient,
    smallest_eigenvalue,
    stability_operator,
)


@dataclass(frozen=True)
class CriterionResult:
    """Outcome of one acceptance check."""

    index: int
    name: str
    passed: bool
    details: dict
    seconds: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"criterion {self.index:02d}  {self.name:<28s} {mark}  ({self.seconds:.2f}s)"


def _timed(index: int, name: str, passed: bool, details: dict, t0: float) -> CriterionResult:
    return CriterionResult(
        index=index,
        name=name,
        passed=bool(passed),
        details=details,
        seconds=time.perf_counter() - t0,
    )


def criterion_01() -> CriterionResult:
    """Cone exactness: zero analytic residual, O(h^2) discrete residual.

    The flux-form scheme carries genuine truncation error on the cone, so
    halving h must shrink its residual by a factor in [3.2, 4.8].  The
    centered scheme differentiates linear profiles exactly; its residual
    is recorded as roundoff-scale context, not asserted on.
    """
    t0 = time.perf_counter()
    n, m = 7, 1.0
    c_sq = m / (n - 1)
    c = math.sqrt(c_sq)
    # residual of the radial equation at u = c r reduces to
    # ((n-1) c^2 - m) / (c r); the numerator is evaluated exactly as the
    # cone slope is defined, so it vanishes in floating point too
    numerator = (n - 1) * c_sq - m
    analytic = max(abs(numerator / (c * r)) for r in (0.1, 0.5, 1.0))

    res = {}
    for label, h in (("coarse", 1.0 / 100.0), ("fine", 1.0 / 200.0)):
        grid = build_grid(RadialAnnulus(n, 0.1, 1.0), h)
        u = cone_field(grid, m=m)
        phi = u.values[grid.boundary]
        u_int = u.values[grid.interior]
        for scheme in ("divergence", "centered"):
            op = assemble_laplacian(grid, scheme=scheme)
            r_vec = op.matrix @ u_int + op.boundary_part @ phi - m / u_int
            res[(scheme, label)] = float(np.max(np.abs(r_vec)))
    ratio = res[("divergence", "coarse")] / res[("divergence", "fine")]
    passed = analytic == 0.0 and 3.2 <= ratio <= 4.8
    return _timed(1, "cone-exactness", passed, {
        "analytic_residual": analytic,
        "divergence_residual_h100": res[("divergence", "coarse")],
        "divergence_residual_h200": res[("divergence", "fine")],
        "refinement_ratio": ratio,
        "centered_residual_h100": res[("centered", "coarse")],
        "centered_residual_h200": res[("centered", "fine")],
    }, t0)


def criterion_02() -> CriterionResult:
    """Regular profiles of the rescaled equation approach the cone u = r."""
    t0 = time.perf_counter()
    details = {}
    passed = True
    for n in (3, 7):
        m = float(n - 1)
        devs = {}
        for eps in (0.2, 0.05):
            prof = integrate_radial(eps, n, m, 1.0, tol=1e-10)
            devs[eps] = conical_deviation(prof)
            if eps == 0.05:
                end = prof.end_value
        details[f"n{n}_dev_eps0.2"] = devs[0.2]
        details[f"n{n}_dev_eps0.05"] = devs[0.05]
        details[f"n{n}_end_eps0.05"] = end
        passed = passed and devs[0.05] <= devs[0.2] and 0.94 <= end <= 1.06
    return _timed(2, "radial-cone-convergence", passed, details, t0)


def criterion_03() -> CriterionResult:
    """Bifurcation constants: collapse to 1 in high dimension, strict
    dip below 1 with multiplicity just above it in low dimension."""
    t0 = time.perf_counter()
    details = {}
    passed = True
    with warnings.catch_warnings():
        # the monotone high-dimensional map has its infimum at the window
        # edge by nature; the window warning is expected there
        warnings.simplefilter("ignore")
        for n in (7, 8):
            scan = bifurcation_constants(n, float(n - 1))
            details[f"n{n}_C1"] = scan.C1
            details[f"n{n}_C2"] = scan.C2
            passed = passed and 0.99 <= scan.C1 <= 1.01 and 0.99 <= scan.C2 <= 1.01
    scan3 = bifurcation_constants(3, 2.0)
    level = scan3.C1 + 0.005
    found = solve_dirichlet_radial(3, 2.0, level)
    details["n3_C1"] = scan3.C1
    details["n3_C2"] = scan3.C2
    details["n3_probe_level"] = level
    details["n3_solution_count"] = len(found)
    passed = passed and scan3.C1 < 0.99 and len(found) >= 2
    return _timed(3, "bifurcation-constants", passed, details, t0)


def criterion_04() -> CriterionResult:
    """Stability dichotomy on a deep annulus: the cone's second variation
    is nonnegative for n = 7, and an explicit Hardy-type witness makes the
    quotient negative for every n in 2..6."""
    t0 = time.perf_counter()
    nodes = 5000
    h = (1.0 - 1e-4) / (nodes - 1)
    grid7 = build_grid(RadialAnnulus(7, 1e-4, 1.0), h)
    rep = smallest_eigenvalue(stability_operator(cone_field(grid7, m=1.0), m=1.0))
    details = {"n7_lambda_min": rep.lambda_min, "nodes": grid7.num_nodes}
    passed = rep.lambda_min >= -1e-6
    for n in range(2, 7):
        grid = build_grid(RadialAnnulus(n, 1e-4, 1.0), h)
        witness = hardy_witness(n, grid)
        q = rayleigh_quotient(cone_field(grid, m=1.0), witness, m=1.0)
        details[f"n{n}_witness_quotient"] = q
        passed = passed and q < 0.0
    return _timed(4, "stability-dichotomy", passed, details, t0)


def criterion_05() -> CriterionResult:
    """The maximal solution is the stable one and matches the largest
    shooting root; any distinct Newton solution from low starts must be
    unstable and sit strictly below it."""
    t0 = time.perf_counter()
    n, C = 3, 2.0
    grid = build_grid(RadialBall(n, 1.0), 1.0 / 256.0)
    roots = solve_dirichlet_radial(n, 1.0, C)
    prof = max(roots.profiles, key=lambda p: p.eps)
    rep = maximal_solution(grid, C, tol=1e-10)
    match = float(np.max(np.abs(rep.field.values - prof.on_grid(grid).values)))
    srep = smallest_eigenvalue(stability_operator(rep.field))
    details = {
        "shooting_roots": len(roots),
        "largest_root_eps": prof.eps,
        "max_abs_mismatch": match,
        "lambda_min_maximal": srep.lambda_min,
        "maximal_iterations": rep.iterations,
    }
    passed = rep.converged and match <= 1e-4 and srep.lambda_min >= -1e-6

    second_found = False
    second_ok = True
    for scale in (0.1, 0.3, 0.5):
        init = Field(grid, np.full(grid.num_nodes, scale * C))
        nrep = newton_solve(grid, C, init, tol=1e-10)
        if not nrep.converged:
            continue
        gap = float(np.max(np.abs(nrep.field.values - rep.field.values)))
        if gap <= 1e-6:
            continue
        second_found = True
        lam = smallest_eigenvalue(stability_operator(nrep.field)).lambda_min
        below = bool(np.all(nrep.field.values <= rep.field.values + 1e-12))
        details[f"second_from_{scale}_lambda_min"] = lam
        details[f"second_from_{scale}_below"] = below
        second_ok = second_ok and lam < 0.0 and below
    details["second_solution_found"] = second_found
    passed = passed and second_ok
    return _timed(5, "maximal-coincidence", passed, details, t0)


def criterion_06() -> CriterionResult:
    """Boundary homotopy toward small data detects nonexistence on the
    disk, at a terminal level that is grid-robust within a factor of 2;
    the direct solve at the far end exits with the nonexistence code."""
    t0 = time.perf_counter()
    details = {}
    mins = []
    for k, h in ((32, 1.0 / 32.0), (64, 1.0 / 64.0), (128, 1.0 / 128.0)):
        grid = build_grid(Disk(1.0), h)
        trace = homotopy_run(grid, 2.0, 0.05, steps=20, tol=1e-8,
                             track_lambda=False, dt_min=1e-3)
        last = trace.last_converged
        details[f"h{k}_status"] = trace.status
        details[f"h{k}_terminal_level"] = last.level
        details[f"h{k}_terminal_min_u"] = last.min_u
        mins.append(last.min_u)
        if trace.status != "nonexistence-detected":
            return _timed(6, "nonexistence-detection", False, details, t0)
    spread = max(mins) / min(mins)
    details["terminal_min_u_spread"] = spread

    from .cli import main as cli_main  # local import: cli imports this module

    with tempfile.TemporaryDirectory() as tmp:
        code = cli_main([
            "solve", "--out", os.path.join(tmp, "run"), "--quiet",
            "--override", "n=2", "--override", "domain=disk",
            "--override", "h=0.03125", "--override", "boundary=0.05",
        ])
    details["direct_solve_exit_code"] = code
    passed = spread <= 2.0 and code == 2
    return _timed(6, "nonexistence-detection", passed, details, t0)


def criterion_07() -> CriterionResult:
    """Interior singular approach: lowering boundary data drives min u
    through 0.05 while the solution closes in on the cone monotonically."""
    t0 = time.perf_counter()
    grid = build_grid(RadialBall(7, 1.0), 1.0 / 512.0)
    steps = singular_sequence(grid, 2.0, (0.2, 0.1, 0.05), tol=1e-8)
    cone = cone_field(grid, m=1.0)
    details = {}
    dists = []
    ok = len(steps) == 3
    for s in steps:
        ok = ok and s.achieved
        if not s.achieved:
            details[f"target_{s.target}_obstruction"] = s.obstruction
            continue
        d = float(np.max(np.abs(s.field.values - cone.values)))
        dists.append(d)
        details[f"target_{s.target}_min_u"] = s.min_u
        details[f"target_{s.target}_cone_dist"] = d
    if ok:
        ok = steps[-1].min_u <= 0.05
        ok = ok and all(b < a for a, b in zip(dists, dists[1:]))
    return _timed(7, "singular-approach", ok, details, t0)


def criterion_08() -> CriterionResult:
    """The integrability threshold is exactly 4 + 2*sqrt(2), is the root
    of n^2 - 8n + 8, and separates refinement-stable from refinement-
    divergent inverse-power integrals of the n = 7 cone."""
    t0 = time.perf_counter()
    thr = p_threshold()
    exact = thr == 4.0 + 2.0 * math.sqrt(2.0)
    root_residual = thr * thr - 8.0 * thr + 8.0
    hardy_identity = abs((thr - 2.0) ** 2 / 4.0 - (thr - 1.0))

    integrals = {}
    for k, h in ((256, 1.0 / 256.0), (512, 1.0 / 512.0)):
        grid = build_grid(RadialBall(7, 1.0), h)
        cone = cone_field(grid, m=1.0)
        for p in (6.5, 7.5):
            integrals[(p, k)] = integrate(cone, -p)
    change_65 = abs(integrals[(6.5, 512)] - integrals[(6.5, 256)]) / integrals[(6.5, 256)]
    change_75 = abs(integrals[(7.5, 512)] - integrals[(7.5, 256)]) / integrals[(7.5, 256)]
    passed = (
        exact
        and root_residual == 0.0
        and hardy_identity <= 1e-14
        and change_65 < 0.05
        and change_75 > 0.25
    )
    return _timed(8, "integrability-threshold", passed, {
        "threshold": thr,
        "float_equals_closed_form": exact,
        "root_residual": root_residual,
        "hardy_identity_residual": hardy_identity,
        "p6.5_integral_h256": integrals[(6.5, 256)],
        "p6.5_integral_h512": integrals[(6.5, 512)],
        "p6.5_relative_change": change_65,
        "p7.5_relative_change": change_75,
    }, t0)


def criterion_09() -> CriterionResult:
    """Hölder quotients at alpha = 0.9 stay within a factor 3 along the
    singular family, away from the singular point."""
    t0 = time.perf_counter()
    grid = build_grid(RadialBall(7, 1.0), 1.0 / 512.0)
    steps = singular_sequence(grid, 2.0, (0.2, 0.1, 0.05), tol=1e-8)
    details = {}
    if not all(s.achieved for s in steps):
        details["note"] = "singular family incomplete"
        return _timed(9, "holder-seminorms", False, details, t0)
    qs = []
    for s in steps:
        q = holder_quotient(s.field, 0.9, (0.1, 1.0))
        qs.append(q)
        details[f"target_{s.target}_quotient"] = q
    spread = max(qs) / min(qs)
    details["quotient_spread"] = spread
    return _timed(9, "holder-seminorms", spread <= 3.0, details, t0)


def criterion_10() -> CriterionResult:
    """Box-counting the cone's singular sublevel set gives a slope well
    under the admissible bound, while a full-ball control set recovers
    the ambient dimension."""
    t0 = time.perf_counter()
    n = 7
    grid = build_grid(RadialBall(n, 1.0), 1.0 / 512.0)
    cone = cone_field(grid, m=1.0)
    rep = box_dimension(cone)
    h = grid.h
    control = Field(grid, np.full(grid.num_nodes, 5e-4))
    rep_control = box_dimension(
        control, tau=1e-3,
        scales=(32.0 * h, 16.0 * h, 8.0 * h, 4.0 * h, 2.0 * h),
    )
    slope = rep.values["dimension"]
    slope_control = rep_control.values["dimension"]
    passed = (
        rep.passed
        and slope <= 0.5
        and abs(slope_control - n) <= 0.1 * n
    )
    return _timed(10, "box-dimension", passed, {
        "sublevel_slope": slope,
        "sublevel_bound": rep.values["bound"],
        "sublevel_tau": rep.params["tau"],
        "control_slope": slope_control,
        "control_target": float(n),
    }, t0)


def criterion_11() -> CriterionResult:
    """Every production/oracle pair agrees within its stated tolerance:
    radial integrator vs fixed-step march, sparse eigensolver vs dense
    eigendecomposition, grid quadrature vs compensated summation."""
    t0 = time.perf_counter()
    checks = []

    def record(name: str, prod: float, orac: float, tol: float) -> None:
        diff = abs(prod - orac)
        checks.append({
            "check": name, "production": prod, "oracle": orac,
            "difference": diff, "tolerance": tol, "ok": diff <= tol,
        })

    for n, m, eps in ((3, 2.0, 0.1), (7, 6.0, 0.05), (3, 2.0, 10.0),
                      (2, 1.0, 0.5), (3, 1.0, 1.914082), (7, 1.0, 0.3)):
        prod = integrate_radial(eps, n, m, 1.0, tol=1e-10).end_value
        orac = oracle_integrate_radial(eps, n, m, 1.0, step=1e-5).end_value
        record(f"radial_n{n}_m{m:g}_eps{eps:g}", prod, orac, 1e-7)

    eig_ops = []
    gi = build_grid(Interval(0.0, 1.0), 1.0 / 200.0)
    li = assemble_laplacian(gi)
    # -Delta so the spectrum starts near pi^2 instead of at -4/h^2, which
    # is where an absolute agreement tolerance is meaningful
    neg = SparseOperator(grid=gi, matrix=(-li.matrix).tocsr(),
                         boundary_part=(-li.boundary_part).tocsr(),
                         symmetric=li.symmetric, kind="neg-laplacian")
    eig_ops.append(("interval_dirichlet", neg))
    ga = build_grid(RadialAnnulus(7, 0.1, 1.0), 0.9 / 1024.0)
    eig_ops.append(("cone_annulus_n7", stability_operator(cone_field(ga, m=1.0), m=1.0)))
    gb = build_grid(RadialBall(3, 1.0), 1.0 / 256.0)
    mb = maximal_solution(gb, 2.0, tol=1e-10)
    eig_ops.append(("maximal_ball_n3", stability_operator(mb.field)))
    gd = build_grid(Disk(1.0), 1.0 / 16.0)
    md = maximal_solution(gd, 2.0, tol=1e-10)
    eig_ops.append(("maximal_disk", stability_operator(md.field)))
    for name, op in eig_ops:
        prod = smallest_eigenvalue(op).lambda_min
        orac = oracle_dense_eig(op)
        record(f"eig_{name}", prod, orac, 1e-8)

    gq = build_grid(RadialBall(7, 1.0), 1.0 / 512.0)
    cq = cone_field(gq, m=1.0)
    for expo in (1.0, 2.0, -6.5):
        prod = integrate(cq, expo)
        orac = oracle_quadrature(cq, expo)
        record(f"quadrature_cone_exp{expo:g}", prod, orac,
               1e-12 * (1.0 + abs(orac)))
    prod = integrate(md.field, 1.0)
    orac = oracle_quadrature(md.field, 1.0)
    record("quadrature_disk_maximal", prod, orac, 1e-12 * (1.0 + abs(orac)))

    passed = all(c["ok"] for c in checks)
    worst = max(checks, key=lambda c: c["difference"] / c["tolerance"])
    return _timed(11, "oracle-agreement", passed, {
        "pairs": checks,
        "count": len(checks),
        "worst_check": worst["check"],
        "worst_ratio": worst["difference"] / worst["tolerance"],
    }, t0)


def criterion_12() -> CriterionResult:
    """Energy depth of the admissible cutoff family on the planar disk.

    The family u_eps = phi + chi (eps - phi) with phi = 1 and a fixed
    radial cutoff chi is evaluated at eps in {0.1, 0.01, 0.001}.  The
    energy does decrease strictly, but its depth at eps = 0.001 is a few
    units, far short of the -10 this check demands: on the plane the
    logarithmic well of a fixed-support plateau grows like log(eps) times
    the plateau area, which cannot beat the O(1) gradient cost of the
    cutoff at these eps values.  The check is implemented faithfully and
    is expected to fail; it would need eps exponentially small in the
    required depth to pass.
    """
    t0 = time.perf_counter()
    grid = build_grid(Disk(1.0), 1.0 / 128.0)
    r = np.linalg.norm(grid.nodes, axis=1)
    # widest cutoff that still respects the boundary data: plateau to 0.7,
    # cubic taper to zero at the boundary; this is near the optimum over
    # plateau radii, so the measured depth is the family's best case
    s = np.clip((1.0 - r) / 0.3, 0.0, 1.0)
    chi = s * s * (3.0 - 2.0 * s)
    energies = {}
    for eps in (0.1, 0.01, 0.001):
        u = Field(grid, 1.0 + chi * (eps - 1.0))
        de = dirichlet_energy(u)
        bulk = float(np.sum(grid.weights * np.log(u.values)))
        energies[eps] = de + bulk
    vals = [energies[e] for e in (0.1, 0.01, 0.001)]
    decreasing = all(b < a for a, b in zip(vals, vals[1:]))
    deep = vals[-1] < -10.0
    return _timed(12, "energy-unboundedness", decreasing and deep, {
        "energy_eps0.1": vals[0],
        "energy_eps0.01": vals[1],
        "energy_eps0.001": vals[2],
        "strictly_decreasing": decreasing,
        "required_depth": -10.0,
        "depth_met": deep,
    }, t0)


ALL_CRITERIA = (
    criterion_01, criterion_02, criterion_03, criterion_04,
    criterion_05, criterion_06, criterion_07, criterion_08,
    criterion_09, criterion_10, criterion_11, criterion_12,
)


def run_criteria(indices=None, progress=None) -> list[CriterionResult]:
    """Run the selected criteria (all by default) in ascending order.

    progress, when given, is called with each CriterionResult as soon as
    it is available, so a caller can stream PASS/FAIL lines.
    """
    wanted = sorted(set(indices)) if indices else list(range(1, len(ALL_CRITERIA) + 1))
    if any(i < 1 or i > len(ALL_CRITERIA) for i in wanted):
        raise ValueError(f"criterion indices must lie in 1..{len(ALL_CRITERIA)}")
    results = []
    for i in wanted:
        res = ALL_CRITERIA[i - 1]()
        results.append(res)
        if progress is not None:
            progress(res)
    return results
