"""Dirichlet solvers: Newton, the monotone T-iteration, and the scaling ops."""

import numpy as np
import pytest

from singlab import (
    Disk,
    Field,
    Interval,
    RadialAnnulus,
    RadialBall,
    SolveReport,
    assemble_laplacian,
    build_grid,
    cone_field,
    harmonic_extension,
    maximal_solution,
    newton_solve,
    picard_T,
    rescale_solution,
    restrict_and_resolve,
)


@pytest.fixture(scope="module")
def ball3():
    return build_grid(RadialBall(3, 1.0), 1.0 / 64)


@pytest.fixture(scope="module")
def maximal_ball3(ball3):
    rep = maximal_solution(ball3, 2.0, tol=1e-10)
    assert rep.converged
    return rep


def test_harmonic_extension_properties(ball3):
    v = harmonic_extension(ball3, 2.0)
    op = assemble_laplacian(ball3)
    res = op.matrix @ v.values[ball3.interior] + op.boundary_part @ v.values[ball3.boundary]
    assert float(np.max(np.abs(res))) < 1e-9
    np.testing.assert_allclose(v.boundary_values(), 2.0)
    # maximum principle: interior values between the data extremes
    assert v.min > 0 and v.max <= 2.0 + 1e-12


def test_newton_converges_and_residual_is_real(ball3):
    init = harmonic_extension(ball3, 2.0)
    rep = newton_solve(ball3, 2.0, init, tol=1e-10)
    assert rep.converged and rep.status == "converged"
    assert rep.residual <= rep.tol
    assert rep.min_u > 0
    op = assemble_laplacian(ball3)
    u = rep.field.values
    res = op.matrix @ u[ball3.interior] + op.boundary_part @ u[ball3.boundary] - 1.0 / u[ball3.interior]
    assert float(np.max(np.abs(res))) <= rep.tol


def test_maximal_dominates_newton(ball3, maximal_ball3):
    init = harmonic_extension(ball3, 2.0)
    newt = newton_solve(ball3, 2.0, init, tol=1e-10)
    gap = maximal_ball3.field.values - newt.field.values
    assert float(np.min(gap)) >= -1e-8
    # on the stable branch both land on the same solution
    assert float(np.max(np.abs(gap))) < 1e-6


def test_first_iterate_decreases_from_supersolution(ball3):
    v0 = harmonic_extension(ball3, 2.0)
    v1 = picard_T(ball3, 2.0, v0)
    assert float(np.max(v1.values - v0.values)) <= 1e-12


def test_maximal_solution_is_fixed_point(ball3, maximal_ball3):
    again = picard_T(ball3, 2.0, maximal_ball3.field)
    assert float(np.max(np.abs(again.values - maximal_ball3.field.values))) < 1e-8


def test_collapse_reported_as_nonexistence_evidence():
    g = build_grid(Disk(1.0), 1.0 / 16)
    rep = maximal_solution(g, 0.05, tol=1e-8)
    assert not rep.converged
    assert rep.status == "collapse"
    assert rep.min_u < 1e-6


def test_boundary_data_validation(ball3):
    with pytest.raises(ValueError):
        maximal_solution(ball3, -1.0)
    with pytest.raises(ValueError):
        maximal_solution(ball3, np.ones(3))  # wrong trace length
    with pytest.raises(ValueError):
        newton_solve(ball3, 0.0, harmonic_extension(ball3, 1.0))


def test_solve_report_guards_its_invariant(ball3):
    f = Field(ball3, np.ones(ball3.num_nodes))
    with pytest.raises(ValueError):
        SolveReport(
            field=f, iterations=1, residual=1.0, min_u=1.0,
            converged=True, tol=1e-10, status="converged",
        )


def test_rescale_cone_is_invariant():
    g = build_grid(RadialAnnulus(7, 0.1, 1.0), 0.9 / 128)
    cone = cone_field(g, m=1.0)
    half = rescale_solution(cone, 2.0)
    assert half.grid.radii[0] == pytest.approx(0.05)
    assert half.grid.radii[-1] == pytest.approx(0.5)
    np.testing.assert_allclose(half.values, cone_field(half.grid, m=1.0).values,
                               rtol=0, atol=1e-14)


def test_rescale_identity_and_validation(ball3, maximal_ball3):
    same = rescale_solution(maximal_ball3.field, 1.0)
    np.testing.assert_array_equal(same.values, maximal_ball3.field.values)
    with pytest.raises(ValueError):
        rescale_solution(maximal_ball3.field, 0.0)


def test_rescaled_solution_still_solves(maximal_ball3):
    # u(Cx)/C on Omega/C satisfies the same equation: check the residual
    scaled = rescale_solution(maximal_ball3.field, 2.0)
    g = scaled.grid
    op = assemble_laplacian(g)
    u = scaled.values
    res = op.matrix @ u[g.interior] + op.boundary_part @ u[g.boundary] - 1.0 / u[g.interior]
    assert float(np.max(np.abs(res))) < 1e-6


def test_restriction_reproduces_maximal_solution():
    g = build_grid(RadialBall(3, 1.0), 1.0 / 32)
    rep = maximal_solution(g, 2.0, tol=1e-10)
    sub = build_grid(RadialAnnulus(3, 0.25, 1.0), 1.0 / 32)
    rr = restrict_and_resolve(rep.field, sub, tol=1e-10)
    assert rr.converged
    tag = next(n for n in rr.notes if n.startswith("restriction-max-diff="))
    assert float(tag.split("=")[1]) < 1e-8


def test_restriction_rejects_mismatched_subgrid():
    g = build_grid(RadialBall(3, 1.0), 1.0 / 32)
    rep = maximal_solution(g, 2.0, tol=1e-8)
    off = build_grid(RadialAnnulus(3, 0.26, 0.98), 0.72 / 36)  # nodes off-lattice
    with pytest.raises(ValueError):
        restrict_and_resolve(rep.field, off)
