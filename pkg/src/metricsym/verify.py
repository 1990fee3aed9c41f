"""Inequality scanners producing uniform reports.

Each operation evaluates the two sides of one inequality over an explicit
grid (ball ids for the local Poincare scan, rearrangement breakpoints for
the symmetrization curves), reports the exact maximum of the ratio, and
never folds out-of-window values into the reported constant. Ratio curves
use the f-rearrangement breakpoints as t-grid, refined with three
midpoints per breakpoint gap: the grid is intrinsic to f, so shrinking
the window keeps the grid a subset and window monotonicity is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import prefix_deviation
from ._util import run_chunked
from .errors import (
    ArgumentError,
    HypothesisViolation,
    ResolutionError,
    SupportError,
    WindowError,
)
from .maximal import sharp_maximal
from .rearrange import (
    RISpaceSpec,
    StepFunction,
    associate_fundamental_function,
    average_star,
    hardy_p,
    oscillation,
    rearrangement,
    ri_norm,
    ypr_norm,
)
from .space import BallIndexSet, MetricMeasureSpace, ball, build_grid_space, center_index

__all__ = [
    "InequalityReport",
    "SobolevPair",
    "euclidean_gradient_pair",
    "poincare_constant",
    "bi_curve",
    "bi_lhs_curve",
    "embedding_check",
    "support_measure",
    "faber_krahn",
    "support_gradient_ratio",
    "counterexample_run",
    "report_to_json",
    "report_to_csv",
]


@dataclass(frozen=True)
class InequalityReport:
    """One verification outcome: curves, window, and the extracted constant."""

    name: str
    params: dict
    window: tuple
    t_grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    ratio: np.ndarray
    best_constant: float
    best_at: float
    pass_: object  # bool, or "report-only" when no tolerance was supplied
    notes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SobolevPair:
    """A function and its gradient surrogate on the same space.

    provenance records the gradient convention ("supplied",
    "euclidean-gradient", "horizontal-gradient"): local constants depend
    on it, so it travels with the data into every report.
    """

    f: np.ndarray
    g: np.ndarray
    provenance: str = "supplied"

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if f.ndim != 1 or f.shape != g.shape:
            raise ArgumentError("f and g must be equal-length 1D arrays")
        if not np.all(np.isfinite(f)) or not np.all(np.isfinite(g)):
            raise ArgumentError("f and g must be finite")
        if np.any(g < 0):
            raise ArgumentError("the gradient surrogate g must be nonnegative")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)


def euclidean_gradient_pair(space: MetricMeasureSpace, f) -> SobolevPair:
    """Pair (f, |grad f|) with the discrete gradient of the space's grid.

    Central differences in the interior, one-sided at the boundary.
    """
    if space.grid is None:
        raise ArgumentError("space was not built on a grid")
    f = np.asarray(f, dtype=float)
    shaped = f.reshape(space.grid.shape)
    grads = np.gradient(shaped, *space.grid.axes)
    if len(space.grid.shape) == 1:
        grads = [grads]
    g = np.sqrt(sum(gr**2 for gr in grads)).ravel()
    return SobolevPair(f, g, "euclidean-gradient")


def _finite_or_inf(x: float) -> float:
    return float(x)


def _ratio(lhs: float, rhs: float) -> float:
    if lhs == 0.0:
        return 0.0
    if rhs == 0.0:
        return math.inf
    return lhs / rhs


def _pass(best: float, tol) -> object:
    if tol is None:
        return "report-only"
    return bool(best <= tol)


# ---------------------------------------------------------------------------
# local Poincare scan


def poincare_constant(
    space: MetricMeasureSpace,
    pair: SobolevPair,
    p: float,
    q: float,
    sigma: float,
    omega: BallIndexSet,
    threads: int = 1,
    contain_factor: float | None = None,
    radius_cap=None,
    tol: float | None = None,
) -> InequalityReport:
    """Best constant in the ball-local oscillation inequality.

    Scans every candidate ball B whose containment dilate lies inside
    omega (member-set inclusion; the dilate factor defaults to sigma) and
    maximizes LHS / (r(B) * RHS), where LHS is the p-mean deviation of f
    over B and RHS the q-mean of g over sigma B. Balls with positive LHS
    but zero r(B) * RHS witness that no finite constant exists and drive
    the result to infinity. The stored curve keeps one entry per center
    (that center's best ball); the reported constant is the exact maximum
    over all scanned balls.

    radius_cap, when given, is a per-point array further restricting
    candidates at center c to contain_factor * r(B) < radius_cap[c]; a
    window-built space uses its boundary clearance here so that the
    dilated ball provably avoids points outside the computed window.
    """
    if sigma < 1:
        raise ArgumentError("sigma must be >= 1")
    if p < 1 or q < 1:
        raise ArgumentError("p and q must be >= 1")
    contain = max(sigma, 1.0) if contain_factor is None else float(contain_factor)
    if contain < sigma:
        raise ArgumentError("containment factor cannot be smaller than sigma")
    n = space.n
    w = space.weights
    fv, gv = pair.f, pair.g
    gq = gv**q * w
    in_omega = np.zeros(n, dtype=bool)
    in_omega[omega.members] = True
    centers = omega.members
    idx = np.arange(n)
    cap = None
    if radius_cap is not None:
        cap = np.asarray(radius_cap, dtype=float)
        if cap.shape != (n,):
            raise ArgumentError("radius_cap must have one entry per point")

    def work(start: int, stop: int):
        rows = []
        for ci in range(start, stop):
            c = int(centers[ci])
            d = space.dist_row(c)
            order = np.lexsort((idx, d))
            sd = d[order]
            ino = in_omega[order]
            L = int(np.argmin(ino)) if not ino.all() else n
            if L == 0:
                continue
            valid = np.empty(n, dtype=bool)
            valid[:-1] = sd[1:] > sd[:-1]
            valid[-1] = True
            # containment: members of the dilated ball are the points with
            # d <= contain * r_k, a prefix of the same sorted row
            mc = np.searchsorted(sd, contain * sd, side="right")
            ms = np.searchsorted(sd, sigma * sd, side="right")
            eligible = valid & (mc <= L)
            if cap is not None:
                eligible &= contain * sd < cap[c]
            ks = np.flatnonzero(eligible)
            if ks.size == 0:
                continue
            kmax = int(ks[-1]) + 1
            sw = w[order][:kmax]
            sf = fv[order][:kmax]
            D = prefix_deviation(sf, sw, p)
            W = np.cumsum(sw)
            cum_gq = np.cumsum(gq[order])
            cum_w = np.cumsum(w[order])
            best = (-1.0, 0.0, 0.0, 0.0)  # ratio, r, lhs, r*rhs
            for k in ks:
                lhs = (D[k] / W[k]) ** (1.0 / p)
                m = int(ms[k])
                rhs = (cum_gq[m - 1] / cum_w[m - 1]) ** (1.0 / q)
                r = float(sd[k])
                rr = r * rhs
                ratio = _ratio(lhs, rr)
                if ratio > best[0]:
                    best = (ratio, r, lhs, rr)
            rows.append((c, *best))
        return rows

    rows = [r for chunk in run_chunked(work, centers.size, threads) for r in chunk]
    if not rows:
        raise ArgumentError("no candidate ball: omega admits no contained dilate")
    t_grid = np.array([r[0] for r in rows], dtype=float)
    ratios = np.array([r[1] for r in rows])
    radii = np.array([r[2] for r in rows])
    lhs = np.array([r[3] for r in rows])
    rhs = np.array([r[4] for r in rows])
    k = int(np.argmax(ratios))
    best = float(ratios[k])
    notes: dict = {"curve_index": "center id; one row per center, its best ball"}
    if math.isinf(best):
        notes["violation_witness"] = {
            "center": int(t_grid[k]),
            "radius": float(radii[k]),
            "lhs": float(lhs[k]),
        }
    return InequalityReport(
        name="poincare",
        params={
            "p": p,
            "q": q,
            "sigma": sigma,
            "contain_factor": contain,
            "provenance": pair.provenance,
            "omega": {"center": int(omega.center), "radius": float(omega.radius)},
        },
        window=(0.0, float(omega.mass)),
        t_grid=t_grid,
        lhs=lhs,
        rhs=rhs,
        ratio=ratios,
        best_constant=best,
        best_at=float(t_grid[k]),
        pass_=_pass(best, tol),
        notes=notes,
    )


# ---------------------------------------------------------------------------
# symmetrization curves


def _window_grid(F: StepFunction, hi: float) -> np.ndarray | None:
    """Evaluation grid inside (0, hi): in-window breakpoints plus three
    mid-quarter points per gap between consecutive in-window breakpoints.

    Returns None when F is a single piece (constant): the oscillation
    vanishes identically, so callers report a vacuous pass instead of
    scanning. A multi-piece F whose first breakpoint already exceeds the
    window is an error: the window sees none of the function's variation.
    """
    if F.pieces == 1:
        return None
    cut = hi * (1 - 1e-12)
    bp = F.breakpoints
    bps = bp[bp < cut]
    if bps.size == 0:
        raise WindowError(
            f"window (0, {hi}) holds no rearrangement breakpoint; "
            "the first piece already exceeds it"
        )
    # Fill points inside every gap (t_j, t_{j+1}) whose left end is in the
    # window: linear quarters catch dense breakpoints, geometric points
    # catch wide gaps (an indicator's oscillation peaks far from its lone
    # breakpoint). All fill points depend only on F, never on hi, so a
    # smaller window's grid is a subset of a larger one's and shrinking c2
    # can never raise the reported constant.
    lo = bp[:-1][bp[:-1] < cut]
    hi_ = bp[1:][bp[:-1] < cut]
    lin = lo[:, None] + (hi_ - lo)[:, None] * np.array([0.25, 0.5, 0.75])
    geo = lo[:, None] * (hi_ / lo)[:, None] ** (np.arange(1, 8) / 8.0)
    fill = np.concatenate([lin.ravel(), geo.ravel()])
    fill = fill[fill < cut]
    return np.unique(np.concatenate([bps, fill]))


def _masked_values(space: MetricMeasureSpace, values: np.ndarray, B0: BallIndexSet):
    mask = np.zeros(space.n, dtype=bool)
    mask[B0.members] = True
    return np.where(mask, values, 0.0)


def bi_curve(
    space: MetricMeasureSpace,
    B0: BallIndexSet,
    pair: SobolevPair,
    p: float,
    q: float,
    s: float,
    c2: float,
    tol: float | None = None,
) -> InequalityReport:
    """Symmetrization inequality curve on the window (0, c2 * mu(B0)).

    LHS(t) = t^{-1/s} * O_p([f chi_B0]*, t), with f cut off outside B0 and
    rearranged over the whole space; RHS(t) = ((g^q)**(t))^{1/q} with g
    rearranged over the whole space.
    """
    if not (0 < c2 <= 1):
        raise ArgumentError("c2 must lie in (0, 1]")
    if p < 1 or q < 1 or s <= 0:
        raise ArgumentError("need p, q >= 1 and s > 0")
    F = rearrangement(_masked_values(space, pair.f, B0), space.weights)
    Gq = rearrangement(np.abs(pair.g) ** q, space.weights)
    hi = c2 * B0.mass
    ts = _window_grid(F, hi)
    notes: dict = {}
    if ts is None:  # constant on B0: oscillation vanishes identically
        ts = np.array([hi / 2.0])
        notes["vacuous"] = "f is constant on B0; the oscillation is identically 0"
        lhs = np.zeros(1)
    else:
        lhs = np.array([t ** (-1.0 / s) * oscillation(F, float(t), p) for t in ts])
    rhs = np.array([average_star(Gq, float(t)) ** (1.0 / q) for t in ts])
    ratios = np.array([_ratio(a, b) for a, b in zip(lhs, rhs)])
    k = int(np.argmax(ratios))
    best = float(ratios[k])
    return InequalityReport(
        name="bi",
        params={
            "p": p,
            "q": q,
            "s": s,
            "c2": c2,
            "provenance": pair.provenance,
            "b0": {"center": int(B0.center), "radius": float(B0.radius)},
        },
        window=(0.0, float(hi)),
        t_grid=ts,
        lhs=lhs,
        rhs=rhs,
        ratio=ratios,
        best_constant=best,
        best_at=float(ts[k]),
        pass_=_pass(best, tol),
        notes=notes,
    )


def bi_lhs_curve(
    space: MetricMeasureSpace,
    B0: BallIndexSet,
    f,
    p: float,
    q: float,
    c2: float = 0.1,
    threads: int = 1,
    tol: float | None = None,
    b0_cap: int = 4096,
) -> InequalityReport:
    """Oscillation versus the rearranged sharp maximal field.

    LHS(t) = t^{-q/p} (integral over (0,t] of ([f chi_B0]*(s) -
    [f chi_B0]*(t))^p ds)^{1/p} = t^{(1-q)/p} O_p(F, t); RHS(t) is the
    rearrangement, over B0's members, of the sharp maximal field computed
    on the quadruple ball 4B0 (clipped to the space with a warning note
    when 4B0 exceeds it).
    """
    if not (0 < c2 <= 1):
        raise ArgumentError("c2 must lie in (0, 1]")
    fv = np.asarray(f, dtype=float)
    quad = ball(space, B0.center, 4.0 * B0.radius)
    notes: dict = {}
    max_reach = float(np.max(space.dist_row(B0.center)))
    if 4.0 * B0.radius > max_reach:
        notes["clipped"] = (
            f"4*B0 radius {4.0 * B0.radius:g} exceeds the space's reach "
            f"{max_reach:g}; the quadruple ball was clipped to the space"
        )
    sharp = sharp_maximal(space, fv, quad, p, q, threads=threads, b0_cap=b0_cap)
    F = rearrangement(_masked_values(space, fv, B0), space.weights)
    R = rearrangement(sharp.values[B0.members], space.weights[B0.members])
    hi = c2 * B0.mass
    ts = _window_grid(F, hi)
    expo = (1.0 - q) / p
    if ts is None:  # constant on B0: both sides vanish
        ts = np.array([hi / 2.0])
        notes["vacuous"] = "f is constant on B0; the oscillation is identically 0"
        lhs = np.zeros(1)
    else:
        lhs = np.array([t**expo * oscillation(F, float(t), p) for t in ts])
    rhs = R.evaluate_many(ts)
    ratios = np.array([_ratio(a, float(b)) for a, b in zip(lhs, rhs)])
    k = int(np.argmax(ratios))
    best = float(ratios[k])
    return InequalityReport(
        name="bi-lhs",
        params={
            "p": p,
            "q": q,
            "c2": c2,
            "b0": {"center": int(B0.center), "radius": float(B0.radius)},
        },
        window=(0.0, float(hi)),
        t_grid=ts,
        lhs=lhs,
        rhs=rhs,
        ratio=ratios,
        best_constant=best,
        best_at=float(ts[k]),
        pass_=_pass(best, tol),
        notes=notes,
    )


# ---------------------------------------------------------------------------
# embedding and support-size inequalities


def embedding_check(
    space: MetricMeasureSpace,
    B0: BallIndexSet,
    pair: SobolevPair,
    p: float,
    q: float,
    s: float,
    Y: RISpaceSpec,
    grid_points: int = 512,
    tol: float | None = None,
    seed: int = 0,
) -> InequalityReport:
    """Embedding ratio: weighted-oscillation norm against gradient norms.

    LHS = the Y-norm of t -> t^{-1/s} O_p([f chi_B0]*, t); RHS = the
    Y-norms of g and of f chi_B0 added. A report-only safeguard estimates
    the boundedness constant of the averaging operator of order
    max(p, q) on Y from 20 seeded random step functions; the inequality
    is only meaningful when that constant is stable.
    """
    F = rearrangement(_masked_values(space, pair.f, B0), space.weights)
    G = rearrangement(pair.g, space.weights)
    pm = max(p, q)
    rng = np.random.default_rng(seed)
    consts = []
    T = space.total_mass
    for _ in range(20):
        m = int(rng.integers(2, 12))
        bp = np.cumsum(rng.uniform(0.2, 1.0, m))
        bp = bp / bp[-1] * T
        vals = np.sort(rng.uniform(0.1, 1.0, m))[::-1]
        Fr = StepFunction(bp, vals)
        pv = np.array([hardy_p(Fr, pm, float(t)) for t in bp])
        pv = np.minimum.accumulate(pv)
        consts.append(ri_norm(StepFunction(bp, pv), Y) / ri_norm(Fr, Y))
    lhs = ypr_norm(F, Y, p, s, grid_points=grid_points)
    rhs = ri_norm(G, Y) + ri_norm(F, Y)
    best = _ratio(lhs, rhs)
    return InequalityReport(
        name="embed",
        params={
            "p": p,
            "q": q,
            "s": s,
            "Y": Y.label(),
            "grid_points": grid_points,
            "provenance": pair.provenance,
            "b0": {"center": int(B0.center), "radius": float(B0.radius)},
        },
        window=(0.0, float(B0.mass)),
        t_grid=np.array([float(B0.mass)]),
        lhs=np.array([lhs]),
        rhs=np.array([rhs]),
        ratio=np.array([best]),
        best_constant=float(best),
        best_at=float(B0.mass),
        pass_=_pass(best, tol),
        notes={
            "hardy_bound": {
                "order": pm,
                "min": float(min(consts)),
                "max": float(max(consts)),
            }
        },
    )


def support_measure(f, weights) -> float:
    """mu(supp f) with an exact zero test.

    Builders that produce numerically tiny values must threshold before
    calling: support size is discontinuous and silent thresholds would
    corrupt the hypotheses that depend on it.
    """
    f = np.asarray(f, dtype=float)
    w = np.asarray(weights, dtype=float)
    if f.shape != w.shape:
        raise ArgumentError("f and weights must have equal length")
    return float(np.sum(w[f != 0.0]))


def faber_krahn(
    space: MetricMeasureSpace,
    B0: BallIndexSet,
    pair: SobolevPair,
    p: float,
    q: float,
    s: float,
    Z: RISpaceSpec,
    c2: float,
    part: str = "both",
    tol: float | None = None,
) -> InequalityReport:
    """Support-size (Faber-Krahn type) inequality ratios.

    Part (i) bounds the p-norm of f, part (ii) its sup norm, both by the
    Z-norm of g^q, the associate fundamental function at mu(supp f), and
    powers of mu(supp f). Hypotheses enforced: supp f inside B0, and
    mu(supp f) < c2 * mu(B0); part (ii) needs p = 1 and q > s and is
    rejected (part="ii") or skipped with a notice (part="both") otherwise.
    """
    if part not in ("i", "ii", "both"):
        raise ArgumentError(f"unknown part {part!r}")
    fv, gv = pair.f, pair.g
    supp = np.flatnonzero(fv != 0.0)
    if supp.size and not np.all(np.isin(supp, B0.members)):
        raise SupportError("supp(f) is not contained in B0")
    L0 = support_measure(fv, space.weights)
    if not L0 < c2 * B0.mass:
        raise SupportError(
            f"mu(supp f) = {L0} is not below c2 * mu(B0) = {c2 * B0.mass}"
        )
    ii_ok = (p == 1.0) and (q > s)
    if part == "ii" and not ii_ok:
        raise HypothesisViolation(
            f"part (ii) requires p = 1 and q > s; got p={p}, q={q}, s={s}"
        )
    notes: dict = {}
    if part == "both" and not ii_ok:
        notes["part_ii_skipped"] = f"requires p = 1 and q > s; got p={p}, q={q}, s={s}"

    if L0 == 0.0:
        notes["trivial"] = "f vanishes identically; both sides are zero"
        return InequalityReport(
            name="faber-krahn",
            params={"p": p, "q": q, "s": s, "Z": Z.label(), "c2": c2, "part": part},
            window=(0.0, float(c2 * B0.mass)),
            t_grid=np.array([0.0]),
            lhs=np.array([0.0]),
            rhs=np.array([0.0]),
            ratio=np.array([0.0]),
            best_constant=0.0,
            best_at=0.0,
            pass_=_pass(0.0, tol),
            notes=notes,
        )

    Gq = rearrangement(gv**q, space.weights)
    core = (ri_norm(Gq, Z) * associate_fundamental_function(Z, L0)) ** (1.0 / q)
    lhs_i = float(np.sum(space.weights * np.abs(fv) ** p)) ** (1.0 / p)
    rhs_i = core * L0 ** ((s + p) / (s * p) - 1.0 / q)
    ratio_i = _ratio(lhs_i, rhs_i)
    if ii_ok and part in ("ii", "both"):
        lhs_ii = float(np.max(np.abs(fv)))
        rhs_ii = core * L0 ** (1.0 / s - 1.0 / q)
        ratio_ii = _ratio(lhs_ii, rhs_ii)
        notes["part_ii"] = {"lhs": lhs_ii, "rhs": rhs_ii, "ratio": ratio_ii}
    if part == "ii":
        lhs_main, rhs_main, ratio_main = lhs_ii, rhs_ii, ratio_ii
    else:
        lhs_main, rhs_main, ratio_main = lhs_i, rhs_i, ratio_i
    return InequalityReport(
        name="faber-krahn",
        params={
            "p": p,
            "q": q,
            "s": s,
            "Z": Z.label(),
            "c2": c2,
            "part": part,
            "support_mass": L0,
        },
        window=(0.0, float(c2 * B0.mass)),
        t_grid=np.array([L0]),
        lhs=np.array([lhs_main]),
        rhs=np.array([rhs_main]),
        ratio=np.array([ratio_main]),
        best_constant=float(ratio_main),
        best_at=float(L0),
        pass_=_pass(ratio_main, tol),
        notes=notes,
    )


def support_gradient_ratio(f, g, weights, dim: int, p: float) -> dict:
    """Euclidean special case: ||f||_1 over ||f||_0^{1/dim+1-1/p} ||g||_p.

    Scale-invariant on R^dim; returns all four numbers for reporting.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    w = np.asarray(weights, dtype=float)
    l1 = float(np.sum(np.abs(f) * w))
    l0 = support_measure(f, w)
    gp = float(np.sum(g**p * w)) ** (1.0 / p)
    if l0 == 0.0 or gp == 0.0:
        raise ArgumentError("f must have nonempty support and g must not vanish")
    expo = 1.0 / dim + 1.0 - 1.0 / p
    return {
        "l1": l1,
        "support_mass": l0,
        "gradient_norm": gp,
        "exponent": expo,
        "ratio": l1 / (l0**expo * gp),
    }


# ---------------------------------------------------------------------------
# the failure probe


def make_shrinking_pair(N: int, k: int):
    """The square-grid family: 1 outside the 1/k ball, k|x| inside.

    Returns (space, pair) on the [-1,1]^2 cell-centered N x N grid with the
    discrete-gradient surrogate. The gradient modulus is k inside the ball
    and ~0 outside, up to the smeared rim band.
    """
    if N < 4 * k:
        raise ResolutionError(
            f"N = {N} leaves fewer than 4 cells across the radius-1/{k} ball"
        )
    space = build_grid_space(N, lo=-1.0, hi=1.0)
    r = np.sqrt(np.einsum("ij,ij->i", space.coords, space.coords))
    f = np.where(r >= 1.0 / k, 1.0, k * r)
    return space, euclidean_gradient_pair(space, f)


def counterexample_run(k_list, N: int, c2_probe, threads: int = 1) -> dict:
    """Probe the symmetrization ratio beyond any admissible window.

    For each k and each probe fraction tau, evaluates
    ratio(tau) = LHS(tau * mu(X)) / RHS(tau * mu(X)) with s = 2, p = q = 1,
    f cut off on the inscribed unit ball. The ratio near tau = 1 grows
    linearly in k (no window-free constant can exist), while small-tau
    ratios stay put. Per-k diagnostics check the gradient rearrangement
    against its known one-plateau shape and the t -> mu(X) oscillation
    limit against the L1 mass.
    """
    k_list = [int(k) for k in k_list]
    probes = [float(t) for t in c2_probe]
    if not k_list or not probes:
        raise ArgumentError("need at least one k and one probe fraction")
    if any(not 0 < t <= 1 for t in probes):
        raise ArgumentError("probe fractions must lie in (0, 1]")
    rows = []
    diagnostics = {}
    for k in k_list:
        space, pair = make_shrinking_pair(N, k)
        c = center_index(space, (0.0, 0.0))
        B0 = ball(space, c, 1.0)
        F = rearrangement(_masked_values(space, pair.f, B0), space.weights)
        G = rearrangement(pair.g, space.weights)
        Fraw = rearrangement(pair.f, space.weights)
        T = space.total_mass
        for tau in probes:
            t = tau * T
            lhs = t**-0.5 * oscillation(F, t, 1.0)
            rhs = average_star(G, t)
            rows.append(
                {
                    "k": k,
                    "tau": tau,
                    "t": t,
                    "lhs": float(lhs),
                    "rhs": float(rhs),
                    "ratio": float(_ratio(lhs, rhs)),
                }
            )
        plateau = math.pi / k**2
        lo_err = 0.0
        hi_err = 0.0
        for t, v in zip(G.breakpoints, G.values):
            if t <= 0.9 * plateau:
                lo_err = max(lo_err, abs(float(v) - k) / k)
            elif t >= 1.1 * plateau:
                hi_err = max(hi_err, float(v) / k)
        limit_lhs = oscillation(Fraw, T, 1.0)
        diagnostics[str(k)] = {
            "plateau_mass": plateau,
            "gradient_band_error_inside": lo_err,
            "gradient_band_error_outside": hi_err,
            "gradient_band_ok": bool(lo_err <= 0.1 and hi_err <= 0.1),
            "limit_lhs": float(limit_lhs),
            "limit_ok": bool(limit_lhs >= 0.9),
        }
    return {
        "name": "counterexample",
        "n": N,
        "b0": "inscribed unit ball",
        "rows": rows,
        "diagnostics": diagnostics,
    }


# ---------------------------------------------------------------------------
# interchange


def _jsonable(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, np.ndarray):
        return [_jsonable(float(v)) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return _jsonable(float(x))
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def report_to_json(report: InequalityReport) -> str:
    obj = {
        "name": report.name,
        "params": _jsonable(report.params),
        "window": list(report.window),
        "t_grid": _jsonable(report.t_grid),
        "lhs": _jsonable(report.lhs),
        "rhs": _jsonable(report.rhs),
        "ratio": _jsonable(report.ratio),
        "best_constant": _jsonable(report.best_constant),
        "best_at": _jsonable(report.best_at),
        "pass": report.pass_,
        "notes": _jsonable(report.notes),
    }
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def report_to_csv(report: InequalityReport) -> str:
    lines = ["t,lhs,rhs,ratio"]
    for t, a, b, r in zip(report.t_grid, report.lhs, report.rhs, report.ratio):
        lines.append(f"{float(t)!r},{float(a)!r},{float(b)!r},{float(r)!r}")
    return "\n".join(lines) + "\n"
