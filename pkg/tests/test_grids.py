"""Grid construction, operator consistency, and quadrature properties."""

import math

import numpy as np
import pytest

from singlab import (
    Box,
    Disk,
    Field,
    Interval,
    RadialAnnulus,
    RadialBall,
    assemble_laplacian,
    build_grid,
    cone_field,
    dirichlet_energy,
    domain_measure,
    integrate,
    unit_ball_volume,
)


def full_apply(op, values):
    return op.matrix @ values[op.grid.interior] + op.boundary_part @ values[op.grid.boundary]


def test_unit_ball_volume_known_values():
    assert unit_ball_volume(1) == pytest.approx(2.0, rel=1e-15)
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-15)


def test_interval_grid_structure():
    g = build_grid(Interval(0.0, 1.0), 0.25)
    assert g.kind == "interval" and g.n == 1
    assert g.num_nodes == 5
    assert list(g.boundary) == [0, 4]
    assert list(g.interior) == [1, 2, 3]
    np.testing.assert_allclose(g.nodes[:, 0], [0.0, 0.25, 0.5, 0.75, 1.0])
    np.testing.assert_allclose(g.weights, [0.125, 0.25, 0.25, 0.25, 0.125])


def test_box_grid_boundary_and_weights():
    g = build_grid(Box(((0.0, 1.0), (0.0, 1.0))), 0.5)
    assert g.num_nodes == 9
    assert len(g.interior) == 1
    assert len(g.boundary) == 8
    # tensor trapezoid weights cover the unit square exactly
    assert float(np.sum(g.weights)) == pytest.approx(1.0, rel=1e-14)


def test_disk_grid_masked_lattice():
    g = build_grid(Disk(1.0), 1.0 / 16)
    r = np.linalg.norm(g.nodes, axis=1)
    assert np.all(r <= 1.0 + 1e-12)
    # interior nodes carry a full five-point stencil inside the mask
    mask = g.interior_mask()
    assert mask.sum() + len(g.boundary) == g.num_nodes
    # quadrature approaches the area at the lattice-rim rate O(h)
    assert abs(domain_measure(g) - math.pi) < 0.35
    coarse = build_grid(Disk(1.0), 0.25)
    assert abs(domain_measure(g) - math.pi) < abs(domain_measure(coarse) - math.pi)


def test_radial_ball_grid_covers_volume():
    g = build_grid(RadialBall(3, 1.0), 1.0 / 64)
    assert g.ball and g.kind == "radial"
    assert g.r0 == g.h  # default first node one spacing out
    assert len(g.boundary) == 1 and g.boundary[0] == g.num_nodes - 1
    assert g.radii[0] > 0  # never a node at the origin
    assert domain_measure(g) == pytest.approx(4.0 * math.pi / 3.0, rel=2e-4)


def test_radial_annulus_grid_structure():
    g = build_grid(RadialAnnulus(7, 0.1, 1.0), 0.9 / 128)
    assert not g.ball
    assert len(g.boundary) == 2
    assert g.radii[0] == pytest.approx(0.1) and g.radii[-1] == pytest.approx(1.0)
    shell = unit_ball_volume(7) * (1.0 - 0.1**7)
    assert domain_measure(g) == pytest.approx(shell, rel=1e-3)


def test_invalid_domain_specs_rejected():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    with pytest.raises(ValueError):
        Box(((0.0, 1.0),) * 4)
    with pytest.raises(ValueError):
        Disk(-1.0)
    with pytest.raises(ValueError):
        RadialAnnulus(3, 0.5, 0.25)
    with pytest.raises(ValueError):
        build_grid(Interval(0.0, 1.0), -0.1)
    with pytest.raises(ValueError):
        build_grid(Interval(0.0, 1.0), 0.3)  # not an integer multiple


def test_node_ordering_deterministic():
    a = build_grid(Disk(1.0), 0.125)
    b = build_grid(Disk(1.0), 0.125)
    assert a.nodes.tobytes() == b.nodes.tobytes()
    assert a.interior.tobytes() == b.interior.tobytes()
    assert a.weights.tobytes() == b.weights.tobytes()


def test_field_validation():
    g = build_grid(Interval(0.0, 1.0), 0.25)
    with pytest.raises(ValueError):
        Field(g, np.array([1.0, -1.0, 1.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        Field(g, np.array([0.0, 1.0, 1.0, 1.0, 1.0]))  # zero needs allow_zero
    with pytest.raises(ValueError):
        Field(g, np.array([-1.0, 1.0, 1.0, 1.0, 1.0]), allow_zero=True)
    with pytest.raises(ValueError):
        Field(g, np.ones(4))
    with pytest.raises(ValueError):
        Field(g, np.array([1.0, np.inf, 1.0, 1.0, 1.0]))
    f = Field(g, np.array([0.0, 1.0, 2.0, 1.0, 0.0]), allow_zero=True)
    assert f.min == 0.0 and f.max == 2.0
    s = Field(g, np.array([-1.0, 1.0, -2.0, 1.0, 0.0]), signed=True)
    assert s.min == -2.0
    np.testing.assert_allclose(f.boundary_values(), [0.0, 0.0])


# ---------------------------------------------------------------------------
# operator consistency


def test_laplacian_exact_on_quadratics_interval():
    g = build_grid(Interval(0.0, 1.0), 1.0 / 16)
    x = g.nodes[:, 0]
    u = 3.0 * x**2 - 2.0 * x + 1.0
    op = assemble_laplacian(g)
    res = full_apply(op, u) - 6.0
    assert float(np.max(np.abs(res))) < 1e-10


def test_laplacian_exact_on_quadratics_box():
    g = build_grid(Box(((0.0, 1.0), (0.0, 1.0))), 1.0 / 8)
    x, y = g.nodes[:, 0], g.nodes[:, 1]
    u = x**2 + y**2 - 3.0 * x * y + 2.0 * x + 1.0
    op = assemble_laplacian(g)
    res = full_apply(op, u) - 4.0
    assert float(np.max(np.abs(res))) < 1e-10


def test_laplacian_radial_quadratic_exact():
    # u = r^2 has u'' + (n-1)/r u' = 2n, exact for the centered stencil
    g = build_grid(RadialAnnulus(5, 0.2, 1.0), 0.8 / 100)
    u = g.radii**2
    op = assemble_laplacian(g)
    res = full_apply(op, u) - 2.0 * 5
    assert float(np.max(np.abs(res))) < 1e-9


def test_laplacian_ball_origin_closure_exact_on_even_quadratic():
    g = build_grid(RadialBall(3, 1.0), 1.0 / 32)
    u = 2.0 + 0.5 * g.radii**2
    op = assemble_laplacian(g)
    res = full_apply(op, u) - 2.0 * 0.5 * 3
    assert float(np.max(np.abs(res))) < 1e-9


def test_centered_scheme_exact_on_cone():
    # u = c r with c^2 = m/(n-1) solves the equation node by node
    g = build_grid(RadialAnnulus(7, 0.1, 1.0), 0.9 / 128)
    cone = cone_field(g, m=1.0)
    op = assemble_laplacian(g)
    res = full_apply(op, cone.values) - 1.0 / cone.values[g.interior]
    assert float(np.max(np.abs(res))) < 1e-10


def test_divergence_scheme_symmetrizable_and_second_order():
    g = build_grid(RadialAnnulus(7, 0.1, 1.0), 0.9 / 128)
    op = assemble_laplacian(g, scheme="divergence")
    # self-adjoint in the measure r^(n-1) dr: conjugating by r^((n-1)/2)
    # balances the face coefficients r_{i+1/2}^(n-1) exactly
    d = g.radii[g.interior] ** ((g.n - 1) / 2.0)
    sym = np.diag(d) @ op.matrix.toarray() @ np.diag(1.0 / d)
    assert float(np.max(np.abs(sym - sym.T))) < 1e-8
    # smooth quadratic: divergence rows converge at second order
    def residual(num):
        gg = build_grid(RadialAnnulus(7, 0.1, 1.0), 0.9 / num)
        oo = assemble_laplacian(gg, scheme="divergence")
        uu = gg.radii**2
        return float(np.max(np.abs(full_apply(oo, uu) - 2.0 * 7)))

    r1, r2 = residual(100), residual(200)
    assert r2 < r1
    assert 3.0 < r1 / r2 < 5.0


def test_cone_field_rejects_dimension_one():
    g = build_grid(Interval(0.0, 1.0), 0.25)
    with pytest.raises(ValueError):
        cone_field(g, m=1.0)


# ---------------------------------------------------------------------------
# quadrature and energy


def test_integrate_constant_equals_measure():
    g = build_grid(RadialBall(7, 1.0), 1.0 / 64)
    one = Field(g, np.ones(g.num_nodes))
    assert integrate(one, 1.0) == pytest.approx(domain_measure(g), rel=1e-14)


def test_integrate_cone_power_matches_analytic():
    n, m = 7, 1.0
    g = build_grid(RadialAnnulus(n, 0.1, 1.0), 0.9 / 600)
    cone = cone_field(g, m=m)
    c = math.sqrt(m / (n - 1))
    surf = n * unit_ball_volume(n)
    exact = c**2 * surf * (1.0 - 0.1 ** (n + 2)) / (n + 2)
    assert integrate(cone, 2.0) == pytest.approx(exact, rel=1e-4)


def test_integrate_negative_power_rejects_zero_values():
    g = build_grid(Interval(0.0, 1.0), 0.25)
    f = Field(g, np.array([0.0, 1.0, 1.0, 1.0, 1.0]), allow_zero=True)
    with pytest.raises(ValueError):
        integrate(f, -2.0)


def test_dirichlet_energy_linear_exact():
    g = build_grid(Interval(0.0, 1.0), 1.0 / 32)
    u = Field(g, 2.0 * g.nodes[:, 0] + 1.0)
    # 1/2 int |u'|^2 = 2 for u' = 2 on a unit interval
    assert dirichlet_energy(u) == pytest.approx(2.0, rel=1e-12)


def test_dirichlet_energy_cone_matches_volume_formula():
    n, m = 7, 1.0
    g = build_grid(RadialAnnulus(n, 0.1, 1.0), 0.9 / 400)
    cone = cone_field(g, m=m)
    vol = unit_ball_volume(n) * (1.0 - 0.1**n)
    assert dirichlet_energy(cone) == pytest.approx(0.5 * (m / (n - 1)) * vol, rel=1e-2)
