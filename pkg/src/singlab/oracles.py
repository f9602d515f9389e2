"""Independent cross-check implementations for the core numerical kernels.

Each oracle deliberately uses a different algorithm from its production
counterpart and shares no numerical kernels with it:

* ``oracle_integrate_radial`` -- classical fixed-step fourth-order march
  (production: adaptive embedded pair).
* ``oracle_dense_eig`` -- Sturm-sequence bisection for tridiagonal
  operators, LAPACK dense solve otherwise (production: shifted inverse
  power iteration on sparse factors).
* ``oracle_quadrature`` -- compensated scalar summation via ``math.fsum``
  (production: vectorized dot product).

Oracles favor being obviously correct over being fast; node/step caps below
keep runtimes sane.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .grids import Field, SparseOperator
from .radial import RadialProfile


@dataclass(frozen=True)
class OracleResult:
    """Value computed by an oracle, with enough context to audit it."""

    value: object
    method: str
    params: dict = dc_field(default_factory=dict)
    runtime_seconds: float = 0.0


def _radial_rhs(r: float, u: float, v: float, n: int, m: float) -> tuple[float, float]:
    # u' = v ; v' = m/u - (n-1)/r * v
    return v, m / u - (n - 1) * v / r


def oracle_integrate_radial(
    eps: float, n: int, m: float, r_max: float, step: float = 1e-5
) -> RadialProfile:
    """Fixed-step classical RK4 march of u'' + (n-1)/r u' = m/u from the
    center value eps.

    Returns a RadialProfile sampled at a coarse stride (the full 1e5+ step
    history is not kept); its tol field records step**4, the global error
    scale of the march.  Raises if the profile loses positivity.  ``step``
    must be at most 1e-5 so that the truncation error sits far below every
    tolerance the production integrator is tested at.
    """
    if step > 1e-5:
        raise ValueError("oracle step must be <= 1e-5")
    if eps <= 0:
        raise ValueError("center value must be positive")
    if r_max <= 0:
        raise ValueError("r_max must be positive")

    # second-order series start very close to the origin
    r0 = min(1e-6, 1e-3 * eps)
    u = eps + m * r0 * r0 / (2.0 * n * eps)
    v = m * r0 / (n * eps)

    nsteps = int(math.ceil((r_max - r0) / step))
    hstep = (r_max - r0) / nsteps
    stride = max(1, nsteps // 2000)

    rs = [0.0, r0]
    us = [eps, u]
    vs = [0.0, v]
    r = r0
    for k in range(nsteps):
        k1u, k1v = _radial_rhs(r, u, v, n, m)
        k2u, k2v = _radial_rhs(r + hstep / 2, u + hstep * k1u / 2, v + hstep * k1v / 2, n, m)
        k3u, k3v = _radial_rhs(r + hstep / 2, u + hstep * k2u / 2, v + hstep * k2v / 2, n, m)
        k4u, k4v = _radial_rhs(r + hstep, u + hstep * k3u, v + hstep * k3v, n, m)
        u = u + hstep * (k1u + 2 * k2u + 2 * k3u + k4u) / 6.0
        v = v + hstep * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0
        r = r0 + (k + 1) * hstep
        if u <= 0:
            raise RuntimeError(f"oracle profile lost positivity at r={r}")
        if (k + 1) % stride == 0 or k == nsteps - 1:
            rs.append(r)
            us.append(u)
            vs.append(v)
    return RadialProfile(
        n=n, m=m, eps=eps,
        r=np.array(rs), u=np.array(us), du=np.array(vs),
        tol=step**4, method="rk4-fixed-step",
    )


def _sturm_count(diag: np.ndarray, off: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal matrix below x,
    via the standard Sturm sequence (LDL^T pivot signs).  Vanishing pivots
    are clamped to -pivmin, the usual bisection convention."""
    dl = diag.tolist()
    ol = off.tolist()
    pivmin = 1e-20 * max(1.0, max((o * o for o in ol), default=1.0))
    count = 0
    d = dl[0] - x
    if abs(d) < pivmin:
        d = -pivmin
    if d < 0:
        count += 1
    for i in range(1, len(dl)):
        d = (dl[i] - x) - ol[i - 1] * ol[i - 1] / d
        if abs(d) < pivmin:
            d = -pivmin
        if d < 0:
            count += 1
    return count


def _tridiagonal_parts(A) -> tuple[np.ndarray, np.ndarray] | None:
    """Extract (diag, offdiag) if the sparse matrix is symmetric tridiagonal."""
    coo = A.tocoo()
    if np.any(np.abs(coo.row - coo.col) > 1):
        return None
    dense_diag = np.zeros(A.shape[0])
    upper = np.zeros(A.shape[0] - 1)
    lower = np.zeros(A.shape[0] - 1)
    for r, c, v in zip(coo.row, coo.col, coo.data):
        if r == c:
            dense_diag[r] += v
        elif c == r + 1:
            upper[r] += v
        else:
            lower[c] += v
    if not np.allclose(upper, lower, rtol=1e-12, atol=1e-14 * max(1.0, np.abs(upper).max(initial=0.0))):
        return None
    return dense_diag, upper


def oracle_dense_eig(op: SparseOperator, tol: float = 1e-12) -> float:
    """Smallest eigenvalue of a symmetric operator, computed densely.

    Tridiagonal matrices go through Sturm-sequence bisection; anything else
    is handed to the LAPACK dense symmetric solver.  Capped at 2000 interior
    nodes -- oracle, not production.
    """
    A = op.matrix
    if A.shape[0] > 2000:
        raise ValueError("oracle_dense_eig is capped at 2000 interior nodes")
    if not op.symmetric:
        raise ValueError("oracle_dense_eig requires a symmetric operator")
    parts = _tridiagonal_parts(A)
    if parts is not None:
        diag, off = parts
        # Gershgorin bracket
        radius = np.zeros_like(diag)
        radius[:-1] += np.abs(off)
        radius[1:] += np.abs(off)
        lo = float(np.min(diag - radius))
        hi = float(np.max(diag + radius))
        # terminate on a width relative to the eigenvalue scale, not the
        # Gershgorin span: fine grids inflate the span like h^-2 while the
        # bottom eigenvalue stays O(1)
        for _ in range(256):
            if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
                break
            mid = 0.5 * (lo + hi)
            if _sturm_count(diag, off, mid) >= 1:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)
    dense = A.toarray()
    vals = np.linalg.eigvalsh(dense)
    return float(vals[0])


def oracle_quadrature(field: Field, exponent: float = 1.0) -> float:
    """Compensated-summation quadrature: sum of w_i * u_i^exponent term by
    term through ``math.fsum``.  Capped at 1e6 nodes."""
    if field.grid.num_nodes > 1_000_000:
        raise ValueError("oracle_quadrature is capped at 1e6 nodes")
    u = field.values
    if exponent < 0 and np.any(u == 0.0):
        raise ValueError("non-finite integrand: zero field value at negative exponent")
    w = field.grid.weights
    terms = (w * u**exponent).tolist()
    return math.fsum(terms)


def run_oracle(name: str, **params) -> OracleResult:
    """Dispatch an oracle by name, recording method tag, params, runtime."""
    start = time.perf_counter()
    if name == "integrate_radial":
        value = oracle_integrate_radial(**params)
        method = "rk4-fixed-step"
    elif name == "dense_eig":
        value = oracle_dense_eig(**params)
        method = "sturm-bisection/lapack"
    elif name == "quadrature":
        value = oracle_quadrature(**params)
        method = "fsum-compensated"
    else:
        raise ValueError(f"unknown oracle {name!r}")
    elapsed = time.perf_counter() - start
    clean = {k: v for k, v in params.items() if np.isscalar(v)}
    return OracleResult(value=value, method=method, params=clean, runtime_seconds=elapsed)
