"""Independent oracles versus the fast paths, with frozen reference values.

The frozen numbers were produced by the oracles themselves (fixed-step
RK4 at step 1e-5, Sturm bisection, compensated summation) and are pinned
here so that any later change to either implementation that moves a value
is caught.  Production/oracle agreement at the documented tolerances is
the actual contract.
"""

import math

import numpy as np
import pytest

from singlab import (
    Interval,
    RadialAnnulus,
    RadialBall,
    SparseOperator,
    assemble_laplacian,
    build_grid,
    cone_field,
    integrate,
    integrate_radial,
    run_oracle,
    smallest_eigenvalue,
    stability_operator,
)
from singlab.oracles import oracle_dense_eig, oracle_integrate_radial, oracle_quadrature

# (n, m, eps) -> u(1) as computed by the fixed-step oracle
FROZEN_END_VALUES = {
    (3, 2.0, 0.1): 9.90311067311101e-01,
    (7, 6.0, 0.05): 1.00015096828269e00,
    (3, 2.0, 10.0): 1.00333000686001e01,
    (2, 1.0, 0.5): 9.16224726589890e-01,
}


@pytest.mark.parametrize("key", sorted(FROZEN_END_VALUES))
def test_radial_oracle_frozen_values(key):
    n, m, eps = key
    prof = oracle_integrate_radial(eps, n, m, 1.0)
    frozen = FROZEN_END_VALUES[key]
    assert abs(prof.end_value - frozen) <= 1e-12 * max(1.0, abs(frozen))


@pytest.mark.parametrize("key", sorted(FROZEN_END_VALUES))
def test_production_integrator_agrees_with_oracle(key):
    n, m, eps = key
    oracle = oracle_integrate_radial(eps, n, m, 1.0)
    prod = integrate_radial(eps, n, m, 1.0, 1e-10)
    assert abs(prod.end_value - oracle.end_value) <= 1e-7


def test_one_dimensional_instance_with_derivative():
    prof = oracle_integrate_radial(0.8, 1, 1.0, 1.0)
    assert abs(prof.end_value - 1.36373780849142) <= 1e-12
    assert abs(float(prof.du[-1]) - 1.03283383924497) <= 1e-12
    prod = integrate_radial(0.8, 1, 1.0, 1.0, 1e-10)
    assert abs(prod.end_value - prof.end_value) <= 1e-7


def test_oracle_step_guard():
    with pytest.raises(ValueError):
        oracle_integrate_radial(0.1, 3, 2.0, 1.0, step=1e-4)


def neg(op):
    return SparseOperator(
        grid=op.grid, matrix=(-op.matrix).tocsr(),
        boundary_part=(-op.boundary_part).tocsr(),
        symmetric=op.symmetric, kind="neg-" + op.kind,
    )


def test_eig_oracle_interval_ground_state():
    g = build_grid(Interval(0.0, 1.0), 1.0 / 64)
    op = neg(assemble_laplacian(g))
    lam = oracle_dense_eig(op, tol=1e-12)
    assert lam == pytest.approx(math.pi**2, abs=1e-2)
    rep = smallest_eigenvalue(op)
    assert abs(lam - rep.lambda_min) <= 1e-8


def test_eig_oracle_agrees_with_dense_and_production():
    g = build_grid(RadialAnnulus(3, 0.5, 1.0), 0.5 / 64)
    op = stability_operator(cone_field(g, m=1.0), m=1.0)
    lam_o = oracle_dense_eig(op)
    lam_dense = float(np.linalg.eigvalsh(op.matrix.toarray())[0])
    assert abs(lam_o - lam_dense) <= 1e-9
    rep = smallest_eigenvalue(op)
    assert abs(lam_o - rep.lambda_min) <= 1e-8


def test_eig_oracle_guards():
    g = build_grid(RadialAnnulus(3, 0.5, 1.0), 0.5 / 64)
    op = assemble_laplacian(g)  # not symmetric
    with pytest.raises(ValueError):
        oracle_dense_eig(op)
    big = build_grid(RadialAnnulus(3, 1e-3, 1.0), (1.0 - 1e-3) / 4000)
    big_op = stability_operator(cone_field(big, m=1.0), m=1.0)
    with pytest.raises(ValueError):
        oracle_dense_eig(big_op)


def test_quadrature_oracle_matches_fast_path():
    g = build_grid(RadialBall(7, 1.0), 1.0 / 128)
    cone = cone_field(g, m=1.0)
    for exponent in (1.0, 2.0, -2.0):
        a = oracle_quadrature(cone, exponent)
        b = integrate(cone, exponent)
        assert abs(a - b) <= 1e-12 * (1.0 + abs(a))


def test_run_oracle_dispatch_and_method_tags():
    g = build_grid(RadialBall(7, 1.0), 1.0 / 128)
    cone = cone_field(g, m=1.0)
    quad = run_oracle("quadrature", field=cone, exponent=2.0)
    assert quad.method == "fsum-compensated"
    assert quad.params == {"exponent": 2.0}  # non-scalars are dropped
    assert quad.runtime_seconds >= 0.0

    prof = run_oracle("integrate_radial", eps=0.3, n=3, m=2.0, r_max=1.0)
    assert prof.method == "rk4-fixed-step"
    # method tags must differ from the production implementations'
    assert prof.value.method != integrate_radial(0.3, 3, 2.0, 1.0, 1e-8).method

    with pytest.raises(ValueError):
        run_oracle("divination")
