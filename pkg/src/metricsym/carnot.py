"""Vector-field systems and control-metric distances on lattices.

A system of smooth vector fields X_1..X_m on R^dim induces the control
metric: the infimal time to join two points along paths whose velocity
is sum_i c_i(t) X_i(x(t)) with controls in the unit ball. We approximate
it on a rectangular lattice: from each node, one edge of weight h per
sampled boundary control (sum c_i^2 = 1), landing at the lattice node
nearest x + h * sum c_i X_i(x); Dijkstra then gives shortest-path
distances, which over-estimate the metric and decrease toward it under
refinement of h, the lattice, and the direction count.

Controls are sampled on the boundary of the unit ball only: an interior
control traverses the same curve slower, so it is never part of a
shortest path.

The built-in systems satisfy the spanning (bracket-generating) condition
with step 2 by construction: for the Heisenberg fields the commutator
[X1, X2] is the missing vertical direction; for the Grushin pair,
[X1, X2] = (0, 1) spans the degenerate direction along x = 0. This is
recorded as metadata and documented, not symbolically verified for
custom systems.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from ._util import run_chunked
from .errors import ArgumentError, CoverageError
from .space import BallIndexSet, GridInfo, MetricMeasureSpace, center_index
from .verify import InequalityReport, SobolevPair, poincare_constant

__all__ = [
    "VectorFieldSystem",
    "vector_field_system",
    "CCGrid",
    "build_cc_grid",
    "cc_distance",
    "horizontal_gradient",
    "build_cc_space",
    "ball_count_dimension",
    "log_log_slope",
    "jerison_check",
]


@dataclass(frozen=True)
class VectorFieldSystem:
    """m vector fields on R^dim, as a coefficient table per point.

    coefficient_fn(points[n, dim]) returns an (m, n, dim) array: field i
    at point k is the vector [i, k, :]. step records the bracket depth at
    which the built-in system spans (metadata only).
    """

    name: str
    dim: int
    n_fields: int
    coefficient_fn: object
    step: int = 1

    def coefficients(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ArgumentError(f"points must be (n, {self.dim}) for {self.name}")
        out = np.asarray(self.coefficient_fn(pts), dtype=float)
        if out.shape != (self.n_fields, pts.shape[0], self.dim):
            raise ArgumentError("coefficient function returned a wrong shape")
        if not np.all(np.isfinite(out)):
            raise ArgumentError("coefficients must be finite on the grid")
        return out


def _heisenberg(pts):
    n = pts.shape[0]
    out = np.zeros((2, n, 3))
    out[0, :, 0] = 1.0
    out[0, :, 2] = -0.5 * pts[:, 1]
    out[1, :, 1] = 1.0
    out[1, :, 2] = 0.5 * pts[:, 0]
    return out


def _grushin(pts):
    n = pts.shape[0]
    out = np.zeros((2, n, 2))
    out[0, :, 0] = 1.0
    out[1, :, 1] = pts[:, 0]
    return out


def vector_field_system(name: str, dim: int | None = None) -> VectorFieldSystem:
    """Built-in systems: "heisenberg" (R^3), "grushin" (R^2), "euclidean"."""
    if name == "heisenberg":
        return VectorFieldSystem("heisenberg", 3, 2, _heisenberg, step=2)
    if name == "grushin":
        return VectorFieldSystem("grushin", 2, 2, _grushin, step=2)
    if name == "euclidean":
        d = 2 if dim is None else int(dim)

        def coeff(pts, _d=d):
            n = pts.shape[0]
            out = np.zeros((_d, n, _d))
            for i in range(_d):
                out[i, :, i] = 1.0
            return out

        return VectorFieldSystem("euclidean", d, d, coeff, step=1)
    raise ArgumentError(f"unknown vector-field system {name!r}")


def _directions(m: int, count: int) -> np.ndarray:
    """Boundary controls: (k, m) rows with sum of squares = 1."""
    if m == 1:
        return np.array([[1.0], [-1.0]])
    if m == 2:
        th = 2.0 * math.pi * np.arange(count) / count
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    # higher field counts: signed axes plus the full diagonal fan
    axes = np.concatenate([np.eye(m), -np.eye(m)])
    signs = np.array(
        [[(1.0 if (j >> i) & 1 else -1.0) for i in range(m)] for j in range(2**m)]
    )
    return np.concatenate([axes, signs / math.sqrt(m)])


@dataclass(frozen=True)
class CCGrid:
    """Lattice + control graph, optionally with distances from sources.

    Node order is row-major over the axes. graph is the undirected
    edge-weight matrix (every edge weighs h). distances[k] holds the
    shortest-path row from sources[k] when cc_distance has run.
    """

    system: VectorFieldSystem
    axes: tuple
    shape: tuple
    coords: np.ndarray
    h: float
    n_directions: int
    graph: object
    sources: np.ndarray | None = None
    distances: np.ndarray | None = None

    @property
    def n(self) -> int:
        return int(self.coords.shape[0])

    @property
    def spacings(self) -> tuple:
        return tuple(float(a[1] - a[0]) for a in self.axes)

    def nearest_node(self, point) -> int:
        p = np.asarray(point, dtype=float)
        if p.shape != (len(self.axes),):
            raise ArgumentError("point dimension does not match the grid")
        idx = tuple(int(np.argmin(np.abs(a - x))) for a, x in zip(self.axes, p))
        return int(np.ravel_multi_index(idx, self.shape))

    def distance_from(self, source: int) -> np.ndarray:
        if self.sources is None:
            raise CoverageError("no distances computed; run cc_distance first")
        hits = np.flatnonzero(self.sources == source)
        if hits.size == 0:
            raise CoverageError(f"node {source} was not a distance source")
        return self.distances[int(hits[0])]


def build_cc_grid(
    system: VectorFieldSystem,
    extents,
    resolution,
    h: float | None = None,
    n_directions: int = 16,
) -> CCGrid:
    """Lattice over a box with one weight-h edge per node and control.

    extents is one (lo, hi) pair per axis; resolution the node count per
    axis (endpoints included). The step from x along control c lands at
    x + h * sum_i c_i X_i(x) and is snapped to the nearest node; steps
    leaving the box or snapping back onto x are dropped. h defaults to
    twice the coarsest axis spacing so steps clear their own cell.
    """
    extents = [(float(lo), float(hi)) for lo, hi in extents]
    if len(extents) != system.dim:
        raise ArgumentError(f"{system.name} needs {system.dim} axis extents")
    if np.isscalar(resolution):
        res = (int(resolution),) * system.dim
    else:
        res = tuple(int(r) for r in resolution)
    if len(res) != system.dim or any(r < 2 for r in res):
        raise ArgumentError("resolution must give >= 2 nodes per axis")
    if any(hi <= lo for lo, hi in extents):
        raise ArgumentError("extents must have lo < hi")
    axes = tuple(np.linspace(lo, hi, r) for (lo, hi), r in zip(extents, res))
    spacings = np.array([a[1] - a[0] for a in axes])
    if h is None:
        h = 2.0 * float(spacings.max())
    if h <= 0:
        raise ArgumentError("step h must be positive")
    if n_directions < 2:
        raise ArgumentError("need at least 2 directions")
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    n = coords.shape[0]
    coeff = system.coefficients(coords)
    dirs = _directions(system.n_fields, n_directions)
    lows = np.array([a[0] for a in axes])
    src = np.arange(n)
    codes = []
    for c in dirs:
        v = np.tensordot(c, coeff, axes=(0, 0))  # (n, dim)
        end = coords + h * v
        idx = np.rint((end - lows) / spacings).astype(np.int64)
        ok = np.all((idx >= 0) & (idx < np.array(res)), axis=1)
        tgt = np.ravel_multi_index(tuple(idx[ok].T), res)
        s = src[ok]
        keep = tgt != s
        codes.append(s[keep] * n + tgt[keep])
    uniq = np.unique(np.concatenate(codes))
    rows, cols = uniq // n, uniq % n
    graph = csr_matrix(
        (np.full(uniq.size, float(h)), (rows, cols)), shape=(n, n)
    )
    return CCGrid(
        system=system,
        axes=axes,
        shape=res,
        coords=coords,
        h=float(h),
        n_directions=int(n_directions),
        graph=graph,
    )


def cc_distance(grid: CCGrid, sources, threads: int = 1) -> CCGrid:
    """Shortest-path distances from each source; unreachable stays inf.

    Sources run independently (chunked across threads) and merge by
    position, so the result is identical for any thread count.
    """
    sources = np.asarray(sources, dtype=np.int64).ravel()
    if sources.size == 0:
        raise ArgumentError("need at least one source")
    if np.any(sources < 0) or np.any(sources >= grid.n):
        raise ArgumentError("source index out of range")

    def work(start: int, stop: int):
        return dijkstra(grid.graph, directed=False, indices=sources[start:stop])

    dist = np.concatenate(run_chunked(work, sources.size, threads), axis=0)
    return dataclasses.replace(grid, sources=sources, distances=dist)


def horizontal_gradient(system: VectorFieldSystem, axes, f) -> np.ndarray:
    """|Xf| = sqrt(sum_i (X_i f)^2) from grid central differences.

    X_i f is the dot product of the discrete gradient of f with field
    i's coefficient vector; axes give the (row-major) grid the flat f
    lives on.
    """
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    if len(axes) != system.dim:
        raise ArgumentError(f"{system.name} needs {system.dim} axes")
    shape = tuple(a.size for a in axes)
    f = np.asarray(f, dtype=float)
    if f.size != int(np.prod(shape)):
        raise ArgumentError("f length does not match the grid")
    partials = np.gradient(f.reshape(shape), *axes)
    if len(shape) == 1:
        partials = [partials]
    flat = [p.ravel() for p in partials]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    coeff = system.coefficients(coords)
    total = np.zeros(f.size)
    for i in range(system.n_fields):
        xi = np.zeros(f.size)
        for j in range(system.dim):
            xi += coeff[i, :, j] * flat[j]
        total += xi**2
    return np.sqrt(total)


def build_cc_space(
    grid: CCGrid,
    window,
    threads: int = 1,
    node_cap: int = 3000,
) -> MetricMeasureSpace:
    """Metric measure space on the window's nodes with control distances.

    window is one (lo, hi) pair per axis; the nodes inside form the point
    set, each weighing one lattice cell volume. Distances are computed on
    the full ambient graph (paths may leave the window), then restricted
    and symmetrized. All-pairs mode, so the window is capped at node_cap
    nodes; unreachable pairs are a coverage error.

    The returned space carries boundary_clearance: per window node, the
    shortest-path distance to the nearest ambient node outside the window
    (inf when the window is the whole lattice). A ball of radius below a
    node's clearance is provably free of out-of-window points, which is
    what jerison_check uses to admit candidate balls.
    """
    window = [(float(lo), float(hi)) for lo, hi in window]
    if len(window) != len(grid.axes):
        raise ArgumentError("window needs one (lo, hi) pair per axis")
    picks = []
    for a, (lo, hi) in zip(grid.axes, window):
        sel = np.flatnonzero((a >= lo - 1e-12) & (a <= hi + 1e-12))
        if sel.size == 0:
            raise ArgumentError(f"window [{lo}, {hi}] contains no lattice node")
        picks.append(sel)
    sub_shape = tuple(p.size for p in picks)
    count = int(np.prod(sub_shape))
    if count > node_cap:
        raise CoverageError(
            f"window holds {count} nodes, above the all-pairs cap {node_cap}"
        )
    mesh = np.meshgrid(*picks, indexing="ij")
    members = np.ravel_multi_index(tuple(m.ravel() for m in mesh), grid.shape)
    outside = np.ones(grid.n, dtype=bool)
    outside[members] = False
    complement = np.flatnonzero(outside)

    def work(start: int, stop: int):
        block = dijkstra(grid.graph, directed=False, indices=members[start:stop])
        if complement.size:
            clear = block[:, complement].min(axis=1)
        else:
            clear = np.full(block.shape[0], np.inf)
        return block[:, members], clear

    chunks = run_chunked(work, members.size, threads)
    D = np.concatenate([c[0] for c in chunks], axis=0)
    clearance = np.concatenate([c[1] for c in chunks])
    if not np.all(np.isfinite(D)):
        bad = np.argwhere(~np.isfinite(D))[0]
        raise CoverageError(
            f"window nodes {members[bad[0]]} and {members[bad[1]]} are not "
            "connected by the control graph; refine h or the direction set"
        )
    D = np.minimum(D, D.T)
    cell = float(np.prod(grid.spacings))
    sub_axes = tuple(a[p] for a, p in zip(grid.axes, picks))
    space = MetricMeasureSpace(
        np.full(count, cell),
        dist=D,
        coords=grid.coords[members],
        grid=GridInfo(shape=sub_shape, axes=sub_axes),
    )
    space.boundary_clearance = clearance
    return space


def ball_count_dimension(dist_row: np.ndarray, r: float) -> dict:
    """Growth dimension log2 of the node-count ratio at radii r and r/2."""
    d = np.asarray(dist_row, dtype=float)
    if r <= 0:
        raise ArgumentError("radius must be positive")
    n_full = int(np.sum(d <= r))
    n_half = int(np.sum(d <= 0.5 * r))
    if n_half == 0:
        raise ArgumentError(f"no node within {r / 2}; radius under-resolved")
    return {
        "r": float(r),
        "count_r": n_full,
        "count_half_r": n_half,
        "dimension": float(math.log2(n_full / n_half)),
    }


def log_log_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 2:
        raise ArgumentError("need at least two (x, y) pairs")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ArgumentError("log-log fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def jerison_check(
    space: MetricMeasureSpace,
    system: VectorFieldSystem,
    f,
    p: float = 2.0,
    threads: int = 1,
    tol: float | None = None,
) -> InequalityReport:
    """Ball Poincare inequality with the horizontal gradient, sigma = 1.

    A ball B qualifies when 2 r(B) is below its center's boundary
    clearance, so the double of B provably contains no point outside the
    computed window. The space's distances are true ambient control
    distances (paths may leave the window), so membership alone is
    window-limited.
    """
    if space.grid is None:
        raise ArgumentError("jerison_check needs a window-grid-built space")
    clearance = getattr(space, "boundary_clearance", None)
    if clearance is None:
        raise ArgumentError(
            "jerison_check needs a space from build_cc_space "
            "(boundary clearance is missing)"
        )
    f = np.asarray(f, dtype=float)
    g = horizontal_gradient(system, space.grid.axes, f)
    pair = SobolevPair(f, g, "horizontal-gradient")
    omega = BallIndexSet(
        center=center_index(space),
        radius=math.inf,
        members=np.arange(space.n),
        mass=space.total_mass,
    )
    rep = poincare_constant(
        space,
        pair,
        p=p,
        q=p,
        sigma=1.0,
        omega=omega,
        threads=threads,
        contain_factor=2.0,
        radius_cap=clearance,
        tol=tol,
    )
    params = dict(rep.params)
    params["fields"] = system.name
    params["candidate_rule"] = "2 r(B) below the center's window clearance"
    return dataclasses.replace(rep, name="jerison", params=params)
