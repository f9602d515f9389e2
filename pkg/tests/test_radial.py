"""Radial integration, the shooting map, and the scan constants."""

import warnings

import numpy as np
import pytest

from singlab import (
    RadialAnnulus,
    bifurcation_constants,
    build_grid,
    cone_field,
    conical_deviation,
    integrate_radial,
    series_start,
    shooting_map,
    solve_dirichlet_radial,
    weighted_deviation,
)


def test_series_start_formula():
    eps, n, m, r0 = 0.2, 3, 2.0, 1e-4
    u, du = series_start(eps, n, m, r0)
    assert u == eps + m * r0 * r0 / (2.0 * n * eps)
    assert du == m * r0 / (n * eps)


def test_series_start_rejects_large_radius():
    with pytest.raises(ValueError):
        series_start(0.01, 3, 2.0, 0.5)
    with pytest.raises(ValueError):
        series_start(-1.0, 3, 2.0, 1e-6)


def test_profile_invariants():
    prof = integrate_radial(0.2, 3, 2.0, 1.0, 1e-10)
    assert prof.r[0] == 0.0 and prof.u[0] == 0.2 and prof.du[0] == 0.0
    assert np.all(np.diff(prof.r) > 0)
    assert np.all(prof.u > 0)
    assert np.all(prof.du >= 0)  # regular solutions are nondecreasing
    assert prof.end_value >= prof.eps
    assert prof.r_max == pytest.approx(1.0, abs=1e-12)


def test_tolerance_refinement_contract():
    tol = 1e-8
    a = integrate_radial(0.2, 3, 2.0, 1.0, tol)
    b = integrate_radial(0.2, 3, 2.0, 1.0, tol / 10.0)
    assert abs(a.end_value - b.end_value) <= 10.0 * tol


def test_profile_interpolation():
    prof = integrate_radial(0.3, 3, 2.0, 1.0, 1e-10)
    # exact at the samples
    np.testing.assert_allclose(prof(prof.r), prof.u, rtol=0, atol=1e-14)
    # Hermite values between samples stay within the integration accuracy
    mids = 0.5 * (prof.r[:-1] + prof.r[1:])
    fine = integrate_radial(0.3, 3, 2.0, 1.0, 1e-12)
    assert float(np.max(np.abs(prof(mids) - fine(mids)))) < 1e-6
    with pytest.raises(ValueError):
        prof(1.5)


def test_profile_on_grid():
    prof = integrate_radial(0.3, 7, 6.0, 1.0, 1e-10)
    g = build_grid(RadialAnnulus(7, 0.1, 1.0), 0.9 / 64)
    f = prof.on_grid(g)
    assert f.grid is g
    np.testing.assert_allclose(f.values, prof(g.radii), rtol=0, atol=1e-14)


def test_shooting_map_positive_and_continuous():
    s = shooting_map(3, 2.0, 0.2)
    assert s > 0
    assert abs(shooting_map(3, 2.0, 0.2 + 1e-7) - s) < 1e-4


def test_scan_batch_agrees_with_adaptive_map():
    scan = bifurcation_constants(3, 2.0, eps_window=(0.05, 5.0), samples=32)
    for i in (0, 10, 31):
        assert scan.S[i] == pytest.approx(shooting_map(3, 2.0, scan.eps[i]), abs=1e-8)


def test_dirichlet_radial_roots_n3():
    # the unrescaled equation (m=1): the level-2 profile that the maximal
    # solution on the unit ball coincides with starts at eps ~ 1.914
    result = solve_dirichlet_radial(3, 1.0, 2.0, samples=200)
    assert len(result) >= 1
    for prof in result:
        assert abs(prof.end_value - 2.0) <= 1e-7
    top = max(prof.eps for prof in result)
    assert top == pytest.approx(1.91408, abs=1e-3)


def test_dirichlet_radial_multiplicity_below_one():
    # n=3: two crossings at levels just above the scan minimum
    scan = bifurcation_constants(3, 2.0)
    level = scan.C1 + 0.005
    result = solve_dirichlet_radial(3, 2.0, level, samples=400)
    assert len(result) >= 2


def test_bifurcation_constants_n3():
    scan = bifurcation_constants(3, 2.0)
    assert scan.C1 == pytest.approx(0.96706, abs=1e-3)
    assert scan.C1 < 0.99
    assert scan.C1 <= scan.C2
    assert scan.C1 <= float(np.min(scan.S)) + 1e-12


def test_bifurcation_constants_n7_hit_window_edge():
    # above the stability threshold the sampled map is monotone: the
    # infimum sits on the window edge and the scan says so
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        scan = bifurcation_constants(7, 6.0, samples=100)
    assert any("window boundary" in str(w.message) for w in rec)
    assert "global-minimum-on-window-boundary" in scan.notes
    assert 0.99 <= scan.C1 <= 1.01
    assert 0.99 <= scan.C2 <= 1.01


def test_conical_deviation_is_center_value():
    # sup |u - r| is attained at the origin where u = eps and r = 0
    for eps in (0.1, 0.05):
        prof = integrate_radial(eps, 3, 2.0, 1.0, 1e-10)
        assert conical_deviation(prof) == pytest.approx(eps, rel=1e-9)
    with pytest.raises(ValueError):
        conical_deviation(integrate_radial(0.1, 3, 1.0, 1.0, 1e-10))


def test_weighted_deviation_vanishes_on_exact_cone():
    g = build_grid(RadialAnnulus(7, 0.1, 1.0), 0.9 / 512)
    exact = cone_field(g, m=6.0)  # slope 1: the rescaled equation's cone
    assert weighted_deviation(exact, 1.0, 0.2) == 0.0


def test_weighted_deviation_validation():
    g = build_grid(RadialAnnulus(7, 0.1, 1.0), 0.9 / 64)
    f = cone_field(g, m=6.0)
    with pytest.raises(ValueError):
        weighted_deviation(f, 1.0, -0.1)
    with pytest.raises(ValueError):
        weighted_deviation(f, 1.0, 0.9)  # [0.9, 1.8] leaves the grid
