"""Finite weighted metric spaces, balls, and doubling statistics.

A space is a point set with strictly positive masses and a metric, held
either as a dense symmetric table or, for grid-built Euclidean spaces,
as coordinates from which distance rows are computed on demand (large
grids never materialize the n^2 table; verification scans that need the
dense form request it explicitly).

Balls are closed, {d(x, .) <= r}: on a finite space open balls make
radius sweeps discontinuous at every pairwise distance, while closed
balls give right-continuous mass in r, and the distinct meaningful radii
at a center are exactly the sorted values of its distance row.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ContainmentError

__all__ = [
    "MetricMeasureSpace",
    "BallIndexSet",
    "DoublingStats",
    "GridInfo",
    "ball",
    "doubling_stats",
    "growth_constant",
    "build_grid_space",
    "space_to_json",
    "space_from_json",
    "doubling_to_csv",
]


@dataclass(frozen=True)
class GridInfo:
    """Shape and axes of a grid-built space (row-major point order)."""

    shape: tuple
    axes: tuple  # one coordinate array per axis

    @property
    def spacings(self) -> tuple:
        return tuple(float(a[1] - a[0]) if a.size > 1 else 1.0 for a in self.axes)


class MetricMeasureSpace:
    """Finite metric measure space (X, mu).

    Construct with a dense distance table (validated) or with coordinates
    and metric="euclidean" (rows computed on demand; metric axioms hold by
    construction). Immutable after construction.
    """

    def __init__(
        self,
        weights,
        dist=None,
        coords=None,
        grid: GridInfo | None = None,
        validate: bool = True,
        rng_seed: int = 0,
    ):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ArgumentError("weights must be a nonempty 1D array")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ArgumentError("weights must be strictly positive and finite")
        self.weights = w
        self.n = int(w.size)
        self.total_mass = float(np.sum(w))
        self.grid = grid
        if dist is None and coords is None:
            raise ArgumentError("provide dist, coords, or both")
        self.coords = None
        if coords is not None:
            c = np.asarray(coords, dtype=float)
            if c.ndim != 2 or c.shape[0] != self.n or not np.all(np.isfinite(c)):
                raise ArgumentError("coords must be a finite n-by-d array")
            self.coords = c
        if dist is not None:
            # an explicit table wins over coords: the metric may be
            # non-Euclidean (shortest-path distances) with coords kept
            # only as point labels for center lookup and generators
            d = np.asarray(dist, dtype=float)
            if d.shape != (self.n, self.n):
                raise ArgumentError("dist must be an n-by-n table")
            self._dist = d
            if validate:
                self._validate_dense(rng_seed)
        else:
            self._dist = None

    def _validate_dense(self, rng_seed: int):
        d = self._dist
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ArgumentError("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0):
            raise ArgumentError("distance diagonal must be zero")
        if not np.array_equal(d, d.T):
            raise ArgumentError("distance table must be symmetric")
        scale = float(d.max()) if d.size else 0.0
        slack = 1e-9 * max(scale, 1.0)
        n = self.n
        if n <= 200:
            # full triangle check
            viol = d[:, None, :] > d[:, :, None] + d[None, :, :] + slack
            if np.any(viol):
                i, j, k = np.argwhere(viol)[0]
                raise ArgumentError(
                    f"triangle inequality fails at ({i},{j},{k}): "
                    f"{d[i, k]} > {d[i, j]} + {d[j, k]}"
                )
        else:
            rng = np.random.default_rng(rng_seed)
            remaining = 10 * n * n
            chunk = 1_000_000
            while remaining > 0:
                m = min(chunk, remaining)
                i = rng.integers(0, n, m)
                j = rng.integers(0, n, m)
                k = rng.integers(0, n, m)
                bad = d[i, k] > d[i, j] + d[j, k] + slack
                if np.any(bad):
                    b = int(np.argmax(bad))
                    raise ArgumentError(
                        f"triangle inequality fails at ({i[b]},{j[b]},{k[b]})"
                    )
                remaining -= m

    @property
    def has_dense(self) -> bool:
        return self._dist is not None

    def dist_row(self, i: int) -> np.ndarray:
        """Distances from point i to every point (length n)."""
        if not (0 <= i < self.n):
            raise ArgumentError(f"point index {i} out of range")
        if self._dist is not None:
            return self._dist[i]
        diff = self.coords - self.coords[i]
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def dist(self, i: int, j: int) -> float:
        return float(self.dist_row(i)[j])

    def dense(self) -> np.ndarray:
        """Materialize the full distance table (use sparingly on big grids)."""
        if self._dist is not None:
            return self._dist
        out = np.empty((self.n, self.n))
        for i in range(self.n):
            out[i] = self.dist_row(i)
        return out


@dataclass(frozen=True)
class BallIndexSet:
    """A closed ball realized as sorted point indices plus its mass."""

    center: int
    radius: float
    members: np.ndarray
    mass: float

    def __post_init__(self):
        if self.members.size == 0:
            raise ArgumentError("a ball always contains its center")
        if not self.mass > 0:
            raise ArgumentError("ball mass must be positive")


@dataclass(frozen=True)
class DoublingStats:
    """Sampled doubling ratios; c_d is their maximum, s = log2(c_d)."""

    c_d: float
    s: float
    samples: tuple  # (center, r, ratio) triples


def ball(space: MetricMeasureSpace, center: int, r: float) -> BallIndexSet:
    """Closed ball {i : dist(center, i) <= r} with its mass."""
    if not (0 <= center < space.n):
        raise ArgumentError(f"center {center} out of range for n={space.n}")
    if r < 0:
        raise ArgumentError("radius must be >= 0")
    members = np.flatnonzero(space.dist_row(center) <= r)
    return BallIndexSet(center, float(r), members, float(np.sum(space.weights[members])))


def doubling_stats(
    space: MetricMeasureSpace,
    centers=None,
    radii=None,
) -> DoublingStats:
    """Estimate the doubling constant by sampling mass ratios.

    centers defaults to all points; radii defaults for each center to the
    {10%, 20%, 30%, 40%, 50%} quantiles of that center's distance row,
    which keeps the doubled ball inside the sampled region. Explicit radii
    apply to every center; the caller is responsible for keeping 2r
    meaningful (no silent clipping happens, the ratio is simply reported).
    """
    if centers is None:
        centers = range(space.n)
    centers = list(centers)
    if len(centers) == 0:
        raise ArgumentError("centers must be nonempty")
    if radii is not None:
        radii = [float(r) for r in radii]
        if len(radii) == 0:
            raise ArgumentError("radii must be nonempty")
        if any(r <= 0 for r in radii):
            raise ArgumentError("radii must be positive")
    quants = (0.1, 0.2, 0.3, 0.4, 0.5)
    samples = []
    w = space.weights
    for c in centers:
        row = space.dist_row(int(c))
        rs = radii if radii is not None else [float(q) for q in np.quantile(row, quants)]
        order = np.argsort(row, kind="stable")
        sorted_d = row[order]
        cum = np.cumsum(w[order])
        for r in rs:
            if r <= 0:
                continue
            m1 = float(cum[np.searchsorted(sorted_d, r, side="right") - 1])
            m2 = float(cum[np.searchsorted(sorted_d, 2.0 * r, side="right") - 1])
            samples.append((int(c), float(r), m2 / m1))
    if not samples:
        raise ArgumentError("no usable (center, radius) samples")
    c_d = max(s[2] for s in samples)
    return DoublingStats(c_d=c_d, s=float(np.log2(c_d)), samples=tuple(samples))


def growth_constant(
    space: MetricMeasureSpace,
    big_ball: BallIndexSet,
    sub_balls,
    stats: DoublingStats,
) -> float:
    """Smallest normalized mass-growth ratio over the sub-balls.

    Returns min over B of [mu(B)/mu(B~)] / (r(B)/r(B~))^s with s taken
    from the supplied doubling statistics. Every sub-ball must be contained
    in the big ball as an index set and have positive radius.
    """
    sub_balls = list(sub_balls)
    if not sub_balls:
        raise ArgumentError("sub_balls must be nonempty")
    if big_ball.radius <= 0:
        raise ArgumentError("big ball must have positive radius")
    big_members = big_ball.members
    best = np.inf
    for b in sub_balls:
        if b.radius <= 0:
            raise ArgumentError("sub-ball radius must be positive")
        if not np.all(np.isin(b.members, big_members, assume_unique=True)):
            raise ContainmentError(
                f"sub-ball at center {b.center} is not contained in the big ball"
            )
        rel_r = b.radius / big_ball.radius
        best = min(best, (b.mass / big_ball.mass) / rel_r**stats.s)
    return float(best)


# ---------------------------------------------------------------------------
# builders


def build_grid_space(
    n_per_axis,
    lo=0.0,
    hi=1.0,
    dims: int | None = None,
) -> MetricMeasureSpace:
    """Uniform cell-centered grid on a box, Euclidean metric, cell-mass weights.

    n_per_axis is an int (same count per axis) or a per-axis sequence; lo/hi
    likewise. dims defaults to 2 when n_per_axis is an int. Points are
    ordered row-major; the GridInfo on the space records shape and axes.
    """
    if np.isscalar(n_per_axis):
        d = dims if dims is not None else 2
        ns = (int(n_per_axis),) * d
    else:
        ns = tuple(int(k) for k in n_per_axis)
        d = len(ns)
    los = (float(lo),) * d if np.isscalar(lo) else tuple(float(x) for x in lo)
    his = (float(hi),) * d if np.isscalar(hi) else tuple(float(x) for x in hi)
    if any(k < 1 for k in ns):
        raise ArgumentError("grid needs at least one cell per axis")
    axes, cell = [], 1.0
    for k, a, b in zip(ns, los, his):
        h = (b - a) / k
        axes.append(a + h * (np.arange(k) + 0.5))
        cell *= h
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    weights = np.full(coords.shape[0], cell)
    grid = GridInfo(shape=ns, axes=tuple(axes))
    return MetricMeasureSpace(weights, coords=coords, grid=grid)


def center_index(space: MetricMeasureSpace, point=None) -> int:
    """Index of the point nearest the box midpoint (or a given point)."""
    if space.coords is None:
        raise ArgumentError("center_index needs a coordinate-built space")
    target = (
        np.asarray(point, dtype=float)
        if point is not None
        else 0.5 * (space.coords.min(axis=0) + space.coords.max(axis=0))
    )
    diff = space.coords - target
    return int(np.argmin(np.einsum("ij,ij->i", diff, diff)))


# ---------------------------------------------------------------------------
# interchange


def space_to_json(space: MetricMeasureSpace) -> str:
    """Serialize; a dense table is authoritative, coordinates ride along
    as point labels when present (shortest-path spaces need both)."""
    obj: dict = {"weights": [float(x) for x in space.weights]}
    if space.has_dense:
        obj["dist"] = [[float(x) for x in row] for row in space.dense()]
        if space.coords is not None:
            obj["coords"] = [[float(x) for x in row] for row in space.coords]
    else:
        obj["coords"] = [[float(x) for x in row] for row in space.coords]
        obj["metric"] = "euclidean"
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def space_from_json(text: str, validate: bool = True) -> MetricMeasureSpace:
    obj = json.loads(text)
    if "weights" not in obj:
        raise ArgumentError("space JSON must contain weights")
    if "dist" in obj:
        return MetricMeasureSpace(
            obj["weights"], dist=obj["dist"], coords=obj.get("coords"), validate=validate
        )
    if "coords" in obj:
        metric = obj.get("metric", "euclidean")
        if metric != "euclidean":
            raise ArgumentError(f"unsupported metric {metric!r}")
        return MetricMeasureSpace(obj["weights"], coords=obj["coords"])
    raise ArgumentError("space JSON must contain dist or coords")


def doubling_to_csv(stats: DoublingStats) -> str:
    lines = ["center,r,ratio"]
    for c, r, ratio in stats.samples:
        lines.append(f"{c},{r!r},{ratio!r}")
    return "\n".join(lines) + "\n"
