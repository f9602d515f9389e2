"""Boundary-data homotopy, fold bookkeeping, and the singular sequence."""

import numpy as np
import pytest

from singlab import (
    ContinuationStep,
    ContinuationTrace,
    Disk,
    RadialBall,
    build_grid,
    fold_detect,
    homotopy_run,
    singular_sequence,
)


def step(t, level, lam, converged=True):
    return ContinuationStep(
        t=t, level=level, min_u=level / 2.0, residual=1e-12, iterations=3,
        lambda_min=lam, converged=converged, status="converged" if converged else "stalled",
    )


def test_homotopy_completes_on_easy_descent():
    g = build_grid(Disk(1.0), 1.0 / 16)
    trace = homotopy_run(g, 2.0, 1.5, steps=4, tol=1e-8, track_lambda=True)
    assert trace.status == "completed"
    ts = [s.t for s in trace.steps]
    assert ts[0] == 0.0 and ts[-1] == 1.0
    assert all(b > a for a, b in zip(ts, ts[1:]))
    assert all(s.converged for s in trace.steps)
    assert trace.steps[-1].level == pytest.approx(1.5)
    # the whole branch stays stable, so every recorded lambda is positive
    assert all(s.lambda_min is not None and s.lambda_min > 0 for s in trace.steps)
    assert len(trace.fields) == len(trace.steps)


def test_homotopy_detects_nonexistence():
    g = build_grid(Disk(1.0), 1.0 / 16)
    trace = homotopy_run(g, 2.0, 0.05, steps=10, tol=1e-8,
                         track_lambda=False, dt_min=1e-3)
    assert trace.status == "nonexistence-detected"
    assert not trace.steps[-1].converged
    assert all(s.converged for s in trace.steps[:-1])
    # the branch was driven well below the starting level before dying
    assert trace.last_converged.level < 1.0


def test_homotopy_rejects_upward_data():
    g = build_grid(Disk(1.0), 1.0 / 16)
    with pytest.raises(ValueError):
        homotopy_run(g, 1.0, 2.0)


def test_trace_invariants():
    good = (step(0.0, 2.0, 1.0), step(0.5, 1.5, 0.5))
    ContinuationTrace(steps=good, status="completed", n=2, h=0.1, kind="disk")
    with pytest.raises(ValueError):
        ContinuationTrace(steps=(step(0.5, 2.0, 1.0), step(0.5, 1.5, 0.5)),
                          status="completed", n=2, h=0.1, kind="disk")
    with pytest.raises(ValueError):
        ContinuationTrace(steps=(step(0.0, 2.0, 1.0, converged=False), step(0.5, 1.5, 0.5)),
                          status="completed", n=2, h=0.1, kind="disk")
    with pytest.raises(ValueError):
        ContinuationTrace(steps=good, status="exploded", n=2, h=0.1, kind="disk")


def test_fold_detect_reports_sign_changes():
    tr = ContinuationTrace(
        steps=(step(0.0, 2.0, 1.0), step(0.4, 1.5, 0.2), step(0.8, 1.2, -0.3)),
        status="completed", n=2, h=0.1, kind="disk",
    )
    assert fold_detect(tr) == [(0.4, 0.8)]
    # terminal failure after a decreasing lambda trend flags the last interval
    tr2 = ContinuationTrace(
        steps=(step(0.0, 2.0, 1.0), step(0.4, 1.5, 0.2),
               step(0.6, 1.3, None, converged=False)),
        status="nonexistence-detected", n=2, h=0.1, kind="disk",
    )
    assert fold_detect(tr2) == [(0.4, 0.6)]
    missing = ContinuationTrace(
        steps=(step(0.0, 2.0, None), step(0.4, 1.5, 0.2)),
        status="completed", n=2, h=0.1, kind="disk",
    )
    with pytest.raises(ValueError):
        fold_detect(missing)


def test_singular_sequence_reaches_targets():
    g = build_grid(RadialBall(7, 1.0), 1.0 / 256)
    steps = singular_sequence(g, 1.0, (0.3, 0.15), tol=1e-8)
    assert [s.target for s in steps] == [0.3, 0.15]
    for s in steps:
        assert s.achieved
        assert 0.8 * s.target <= s.min_u <= s.target
        assert float(np.min(s.field.values)) == pytest.approx(s.min_u)
    assert steps[1].min_u < steps[0].min_u


def test_singular_sequence_validation():
    g = build_grid(RadialBall(7, 1.0), 1.0 / 128)
    with pytest.raises(ValueError):
        singular_sequence(g, 1.0, (0.1, 0.2))  # not decreasing
    with pytest.raises(ValueError):
        singular_sequence(g, 1.0, (0.1, -0.2))
    # a target at or above the boundary level is blocked by subharmonicity
    out = singular_sequence(g, 1.0, (2.0,), tol=1e-8)
    assert not out[0].achieved
    assert out[0].obstruction == "maximum-principle"
    assert out[0].obstruction_level == pytest.approx(1.0)
