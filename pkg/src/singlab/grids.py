"""Uniform finite-difference grids, fields, and discrete operators.

The domains that matter for the reciprocal-nonlinearity problem are balls,
annuli, intervals, and boxes.  Rotationally symmetric domains are reduced to
one radial coordinate with the ambient dimension ``n`` carried as a weight,
so a "radial" grid on [r0, R] stands for a ball or spherical shell in R^n.
A genuine planar disk (masked square lattice) is also supported because the
two-dimensional problem is the standard nonexistence example and is worth
resolving without assuming symmetry.

Node ordering is lexicographic in the coordinate tuple and therefore
deterministic; all operators and quadratures follow that ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


# ---------------------------------------------------------------------------
# domain descriptors


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and np.isfinite(self.b) and self.a < self.b):
            raise ValueError("interval requires finite a < b")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by per-axis (lo, hi) extents."""

    extents: tuple

    def __post_init__(self) -> None:
        if len(self.extents) < 1 or len(self.extents) > 3:
            raise ValueError("box supports 1 to 3 axes")
        for lo, hi in self.extents:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ValueError("box extents require finite lo < hi")


@dataclass(frozen=True)
class Disk:
    """Planar disk of given radius centered at the origin."""

    radius: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("disk radius must be positive")


@dataclass(frozen=True)
class RadialBall:
    """Ball of radius ``radius`` in R^n, reduced to the radial coordinate.

    No node is placed at r = 0; the first node sits at ``r0`` (default: one
    spacing h).  The origin is handled by a regularity closure in the
    operators, not by a boundary condition.
    """

    n: int
    radius: float
    r0: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("ambient dimension must be >= 1")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("ball radius must be positive")


@dataclass(frozen=True)
class RadialAnnulus:
    """Spherical shell {r_inner <= |x| <= r_outer} in R^n, radial reduction."""

    n: int
    r_inner: float
    r_outer: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("ambient dimension must be >= 1")
        if not (0 < self.r_inner < self.r_outer):
            raise ValueError("annulus requires 0 < r_inner < r_outer")


# ---------------------------------------------------------------------------
# grid and field containers


@dataclass(frozen=True)
class Grid:
    """Uniform grid over one of the supported domains.

    Attributes
    ----------
    kind : str
        One of "interval", "box", "radial", "disk".
    n : int
        Ambient dimension (for radial grids: the dimension the weight
        r^(n-1) refers to, not the storage dimension).
    h : float
        Uniform spacing, identical on every axis.
    nodes : ndarray, shape (N, d)
        Node coordinates; radial grids store the radius in column 0.
    interior, boundary : ndarray of int
        Complementary index sets into the node array.
    weights : ndarray, shape (N,)
        Quadrature weights (trapezoidal; radial weights carry the surface
        factor n*omega_n*r^(n-1)).
    r0 : float
        First node radius for radial grids, 0 otherwise.
    ball : bool
        True for radial ball grids (regularity closure at the inner node).
    shape : tuple
        Lattice shape for interval/box grids, () otherwise.
    """

    kind: str
    n: int
    h: float
    nodes: np.ndarray
    interior: np.ndarray
    boundary: np.ndarray
    weights: np.ndarray
    r0: float = 0.0
    ball: bool = False
    shape: tuple = ()
    meta: dict = dc_field(default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def radii(self) -> np.ndarray:
        if self.kind != "radial":
            raise ValueError("radii only defined for radial grids")
        return self.nodes[:, 0]

    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.num_nodes, dtype=bool)
        mask[self.interior] = True
        return mask

    def header(self) -> str:
        """Structured-text description used at the top of serialized files."""
        lines = [
            f"kind={self.kind}",
            f"n={self.n}",
            f"h={self.h:.17g}",
            f"nodes={self.num_nodes}",
            f"r0={self.r0:.17g}",
        ]
        for key, val in sorted(self.meta.items()):
            lines.append(f"{key}={val}")
        return "\n".join(lines)


@dataclass(frozen=True)
class Field:
    """Node values attached to a grid.

    Candidate solutions are strictly positive.  Verifiers that probe
    near-singular limits may carry nonnegative values but must say so via
    ``allow_zero`` at construction; sign-indefinite data (eigenvectors,
    test functions) passes ``signed`` instead.
    """

    grid: Grid
    values: np.ndarray
    allow_zero: bool = False
    signed: bool = False

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.num_nodes,):
            raise ValueError(
                f"field shape {vals.shape} does not match grid ({self.grid.num_nodes},)"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        if self.signed:
            pass
        elif self.allow_zero:
            if np.any(vals < 0):
                raise ValueError("field values must be nonnegative")
        elif np.any(vals <= 0):
            raise ValueError(
                "field values must be strictly positive (pass allow_zero=True "
                "for verifier fields that touch zero)"
            )
        object.__setattr__(self, "values", vals)

    @property
    def min(self) -> float:
        return float(np.min(self.values))

    @property
    def max(self) -> float:
        return float(np.max(self.values))

    def boundary_values(self) -> np.ndarray:
        return self.values[self.grid.boundary]


@dataclass(frozen=True)
class SparseOperator:
    """Linear operator over interior nodes with an affine boundary part.

    Applying the operator to a full field u produces, on interior nodes,

        (L u)_interior = matrix @ u[interior] + boundary_part @ u[boundary].

    ``symmetric`` marks operators that are symmetric as assembled (stability
    operators always are; the centered radial Laplacian is not).
    """

    grid: Grid
    matrix: sp.csr_matrix
    boundary_part: sp.csr_matrix
    symmetric: bool
    kind: str = "laplacian"
    meta: dict = dc_field(default_factory=dict)

    def apply(self, u) -> np.ndarray:
        vals = u.values if isinstance(u, Field) else np.asarray(u, dtype=float)
        return self.matrix @ vals[self.grid.interior] + self.boundary_part @ vals[
            self.grid.boundary
        ]


# ---------------------------------------------------------------------------
# grid construction


def _axis_nodes(lo: float, hi: float, h: float) -> np.ndarray:
    span = hi - lo
    count = int(round(span / h))
    if abs(count * h - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError(f"extent [{lo}, {hi}] is not an integer multiple of h={h}")
    if count < 2:
        raise ValueError("each axis needs at least 3 nodes (2 cells)")
    return lo + h * np.arange(count + 1)


def build_grid(spec, h: float) -> Grid:
    """Build a uniform grid for a domain descriptor.

    Raises ValueError for nonpositive spacing, fewer than 3 nodes per axis,
    or a radial inner radius at or beyond the outer radius.
    """
    if not (np.isfinite(h) and h > 0):
        raise ValueError("spacing h must be positive")

    if isinstance(spec, Interval):
        xs = _axis_nodes(spec.a, spec.b, h)
        nodes = xs[:, None]
        num = len(xs)
        interior = np.arange(1, num - 1)
        boundary = np.array([0, num - 1])
        w = np.full(num, h)
        w[[0, -1]] = h / 2.0
        return Grid(
            kind="interval", n=1, h=h, nodes=nodes, interior=interior,
            boundary=boundary, weights=w, shape=(num,),
            meta={"a": spec.a, "b": spec.b},
        )

    if isinstance(spec, Box):
        axes = [_axis_nodes(lo, hi, h) for lo, hi in spec.extents]
        d = len(axes)
        shape = tuple(len(ax) for ax in axes)
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.column_stack([m.ravel(order="C") for m in mesh])
        num = nodes.shape[0]
        idx = np.arange(num).reshape(shape)
        bmask = np.zeros(shape, dtype=bool)
        for ax in range(d):
            sl_lo = [slice(None)] * d
            sl_hi = [slice(None)] * d
            sl_lo[ax] = 0
            sl_hi[ax] = -1
            bmask[tuple(sl_lo)] = True
            bmask[tuple(sl_hi)] = True
        bflat = bmask.ravel(order="C")
        boundary = np.nonzero(bflat)[0]
        interior = np.nonzero(~bflat)[0]
        w1 = []
        for ax in axes:
            wa = np.full(len(ax), h)
            wa[[0, -1]] = h / 2.0
            w1.append(wa)
        w = w1[0]
        for wa in w1[1:]:
            w = np.multiply.outer(w, wa)
        w = w.ravel(order="C")
        return Grid(
            kind="box", n=d, h=h, nodes=nodes, interior=interior,
            boundary=boundary, weights=w, shape=shape,
            meta={"extents": tuple((float(lo), float(hi)) for lo, hi in spec.extents)},
        )

    if isinstance(spec, Disk):
        R = spec.radius
        k = int(round(R / h))
        if abs(k * h - R) > 1e-9 * max(1.0, R):
            raise ValueError("disk radius must be an integer multiple of h")
        if k < 2:
            raise ValueError("disk needs at least 3 nodes per axis")
        ax = h * np.arange(-k, k + 1)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        inside = X**2 + Y**2 <= R**2 + 1e-12 * R**2
        side = 2 * k + 1
        idx = -np.ones((side, side), dtype=int)
        order = np.nonzero(inside.ravel(order="C"))[0]
        idx.ravel(order="C")[order] = np.arange(len(order))
        nodes = np.column_stack([X.ravel(order="C")[order], Y.ravel(order="C")[order]])
        inside_pad = np.zeros((side + 2, side + 2), dtype=bool)
        inside_pad[1:-1, 1:-1] = inside
        full_stencil = (
            inside_pad[:-2, 1:-1] & inside_pad[2:, 1:-1]
            & inside_pad[1:-1, :-2] & inside_pad[1:-1, 2:]
        )
        interior_mask = inside & full_stencil
        imask_flat = interior_mask.ravel(order="C")[order]
        interior = np.nonzero(imask_flat)[0]
        boundary = np.nonzero(~imask_flat)[0]
        w = np.full(len(order), h * h)
        w[boundary] = h * h / 2.0
        return Grid(
            kind="disk", n=2, h=h, nodes=nodes, interior=interior,
            boundary=boundary, weights=w, shape=(side, side),
            meta={"radius": R, "lattice_index": idx},
        )

    if isinstance(spec, (RadialBall, RadialAnnulus)):
        if isinstance(spec, RadialBall):
            r_start = spec.r0 if spec.r0 is not None else h
            r_end = spec.radius
            ball = True
        else:
            r_start = spec.r_inner
            r_end = spec.r_outer
            ball = False
        if r_start >= r_end:
            raise ValueError("inner radius must be below the outer radius")
        if r_start <= 0:
            raise ValueError("radial grids never place a node at r = 0")
        rr = _axis_nodes(r_start, r_end, h)
        num = len(rr)
        nodes = rr[:, None]
        if ball:
            interior = np.arange(0, num - 1)
            boundary = np.array([num - 1])
        else:
            interior = np.arange(1, num - 1)
            boundary = np.array([0, num - 1])
        n = spec.n
        surf = n * unit_ball_volume(n)  # area of the unit sphere in R^n
        w = surf * rr ** (n - 1) * h
        w[0] *= 0.5
        w[-1] *= 0.5
        if ball:
            # lump the uncovered core [0, r_start] into the first node
            w[0] += unit_ball_volume(n) * r_start**n
        return Grid(
            kind="radial", n=n, h=h, nodes=nodes, interior=interior,
            boundary=boundary, weights=w, r0=float(rr[0]), ball=ball,
            shape=(num,), meta={"r_end": float(rr[-1])},
        )

    raise ValueError(f"unsupported domain descriptor: {spec!r}")


def cone_field(grid: Grid, m: float = 1.0) -> Field:
    """The conical profile u = sqrt(m/(n-1)) * |x| sampled on a grid.

    Solves div(grad u) = m/u away from the origin whenever n >= 2.
    """
    if grid.n < 2:
        raise ValueError("conical solution requires ambient dimension >= 2")
    slope = math.sqrt(m / (grid.n - 1))
    if grid.kind == "radial":
        r = grid.radii
    else:
        r = np.linalg.norm(grid.nodes, axis=1)
    vals = slope * r
    return Field(grid, vals, allow_zero=bool(np.any(vals == 0)))


# ---------------------------------------------------------------------------
# operators


def _radial_centered(grid: Grid) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Centered second-order rows for u'' + (n-1)/r u' on a radial grid.

    The first node of a ball grid has no inner neighbor; its row comes from
    the even quadratic through the origin (exact on a + b r^2), which keeps
    second-order accuracy for smooth radial functions.
    """
    r = grid.radii
    h = grid.h
    n = grid.n
    num = grid.num_nodes
    rows, cols, vals = [], [], []
    for i in grid.interior:
        if grid.ball and i == 0:
            c = 2.0 * n / (r[1] ** 2 - r[0] ** 2)
            rows += [i, i]
            cols += [i, i + 1]
            vals += [-c, c]
            continue
        drift = (n - 1) / (2.0 * h * r[i])
        rows += [i, i, i]
        cols += [i - 1, i, i + 1]
        vals += [1.0 / h**2 - drift, -2.0 / h**2, 1.0 / h**2 + drift]
    full = sp.csr_matrix((vals, (rows, cols)), shape=(num, num))
    A = full[grid.interior][:, grid.interior].tocsr()
    B = full[grid.interior][:, grid.boundary].tocsr()
    return A, B


def _radial_divergence(grid: Grid) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Flux-form rows r^(1-n) d/dr (r^(n-1) du/dr), self-adjoint in the
    weight r^(n-1).  Second order, used by the energy and stability side."""
    r = grid.radii
    h = grid.h
    n = grid.n
    num = grid.num_nodes
    a_mid = ((r[:-1] + r[1:]) / 2.0) ** (n - 1)  # flux coefficient on edges
    rows, cols, vals = [], [], []
    for i in grid.interior:
        w = r[i] ** (n - 1)
        a_lo = a_mid[i - 1] if i > 0 else 0.0  # zero flux through the origin
        a_hi = a_mid[i]
        if i > 0:
            rows.append(i)
            cols.append(i - 1)
            vals.append(a_lo / (w * h**2))
        rows.append(i)
        cols.append(i)
        vals.append(-(a_lo + a_hi) / (w * h**2))
        rows.append(i)
        cols.append(i + 1)
        vals.append(a_hi / (w * h**2))
    full = sp.csr_matrix((vals, (rows, cols)), shape=(num, num))
    A = full[grid.interior][:, grid.interior].tocsr()
    B = full[grid.interior][:, grid.boundary].tocsr()
    return A, B


def _lattice_laplacian(grid: Grid) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Standard 2nd-order stencil on interval/box/disk lattices."""
    h2 = grid.h**2
    num = grid.num_nodes
    if grid.kind == "interval":
        lo = np.arange(num) - 1
        hi = np.arange(num) + 1
        nb_ids = [
            np.where(lo >= 0, lo, -1),
            np.where(hi < num, hi, -1),
        ]
    elif grid.kind == "box":
        shape = grid.shape
        d = len(shape)
        idx = np.arange(num).reshape(shape)
        nb_ids = []
        for ax in range(d):
            for step in (-1, 1):
                nb = -np.ones(shape, dtype=int)
                src = [slice(None)] * d
                dst = [slice(None)] * d
                if step == -1:
                    dst[ax] = slice(1, None)
                    src[ax] = slice(None, -1)
                else:
                    dst[ax] = slice(None, -1)
                    src[ax] = slice(1, None)
                nb[tuple(dst)] = idx[tuple(src)]
                nb_ids.append(nb.ravel(order="C"))
    elif grid.kind == "disk":
        idx = grid.meta["lattice_index"]
        side = idx.shape[0]
        pad = -np.ones((side + 2, side + 2), dtype=int)
        pad[1:-1, 1:-1] = idx
        shifts = [pad[:-2, 1:-1], pad[2:, 1:-1], pad[1:-1, :-2], pad[1:-1, 2:]]
        present = idx >= 0
        nb_ids = [s[present] for s in shifts]
    else:
        raise ValueError(f"no lattice stencil for kind {grid.kind}")

    deg = len(nb_ids)
    diag = -deg / h2  # each of the 2d neighbor slots contributes 1/h^2
    rows, cols, vals = [], [], []
    for i in grid.interior:
        rows.append(i)
        cols.append(i)
        vals.append(diag)
        for nb in nb_ids:
            j = nb[i]
            if j < 0:
                raise ValueError("interior node with missing neighbor")
            rows.append(i)
            cols.append(j)
            vals.append(1.0 / h2)
    full = sp.csr_matrix((vals, (rows, cols)), shape=(num, num))
    A = full[grid.interior][:, grid.interior].tocsr()
    B = full[grid.interior][:, grid.boundary].tocsr()
    return A, B


def assemble_laplacian(grid: Grid, scheme: str = "centered") -> SparseOperator:
    """Second-order discrete Laplacian with boundary values as affine data.

    Radial grids add the (n-1)/r first-order term.  Two radial schemes are
    provided: "centered" differences (exact on linear profiles, the solver
    default) and the self-adjoint "divergence" flux form (used by energies
    and stability; shows the textbook O(h^2) truncation on the cone).
    Lattice kinds ignore the distinction.
    """
    if grid.kind == "radial":
        if scheme == "centered":
            A, B = _radial_centered(grid)
            symmetric = False
        elif scheme == "divergence":
            A, B = _radial_divergence(grid)
            symmetric = False
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
    else:
        A, B = _lattice_laplacian(grid)
        symmetric = True
    return SparseOperator(
        grid=grid, matrix=A, boundary_part=B, symmetric=symmetric,
        kind=f"laplacian-{scheme}" if grid.kind == "radial" else "laplacian",
    )


# ---------------------------------------------------------------------------
# quadrature and energies


def integrate(field: Field, exponent: float = 1.0) -> float:
    """Trapezoidal quadrature of u^exponent over the grid's domain.

    Radial grids integrate with the surface factor n*omega_n*r^(n-1).
    Raises for a non-finite result (zero values against a negative
    exponent).
    """
    u = field.values
    if exponent < 0 and np.any(u == 0.0):
        raise ValueError("non-finite integrand: zero field value at negative exponent")
    with np.errstate(over="raise", divide="raise"):
        try:
            integrand = u**exponent if exponent != 1.0 else u
        except FloatingPointError as exc:
            raise ValueError(f"non-finite integrand: {exc}") from None
    total = float(np.dot(field.grid.weights, integrand))
    if not np.isfinite(total):
        raise ValueError("non-finite integral")
    return total


def domain_measure(grid: Grid) -> float:
    """Discrete measure of the domain (sum of quadrature weights)."""
    return float(np.sum(grid.weights))


def _edge_list(grid: Grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Edges (i, j, weight) such that sum_e w_e (u_i - u_j)^2 approximates
    the Dirichlet integral of |grad u|^2 over the domain."""
    if grid.kind == "radial":
        r = grid.radii
        n = grid.n
        surf = n * unit_ball_volume(n)
        i = np.arange(grid.num_nodes - 1)
        j = i + 1
        w = surf * ((r[:-1] + r[1:]) / 2.0) ** (n - 1) / grid.h
        return i, j, w
    if grid.kind == "interval":
        i = np.arange(grid.num_nodes - 1)
        return i, i + 1, np.full(grid.num_nodes - 1, 1.0 / grid.h)
    if grid.kind == "box":
        shape = grid.shape
        d = len(shape)
        idx = np.arange(grid.num_nodes).reshape(shape)
        ii, jj = [], []
        for ax in range(d):
            src = [slice(None)] * d
            dst = [slice(None)] * d
            src[ax] = slice(None, -1)
            dst[ax] = slice(1, None)
            ii.append(idx[tuple(src)].ravel())
            jj.append(idx[tuple(dst)].ravel())
        i = np.concatenate(ii)
        j = np.concatenate(jj)
        w = np.full(i.shape, grid.h ** (d - 2))
        return i, j, w
    if grid.kind == "disk":
        idx = grid.meta["lattice_index"]
        ii, jj = [], []
        for a, b in ((idx[:-1, :], idx[1:, :]), (idx[:, :-1], idx[:, 1:])):
            ok = (a >= 0) & (b >= 0)
            ii.append(a[ok])
            jj.append(b[ok])
        i = np.concatenate(ii)
        j = np.concatenate(jj)
        return i, j, np.full(i.shape, 1.0)  # h^(d-2) with d = 2
    raise ValueError(f"no edge structure for kind {grid.kind}")


def dirichlet_energy(field: Field) -> float:
    """(1/2) * integral of |grad u|^2 by midpoint edge quadrature."""
    i, j, w = _edge_list(field.grid)
    du = field.values[j] - field.values[i]
    return 0.5 * float(np.dot(w, du * du))
