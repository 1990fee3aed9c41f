"""Exact step-function calculus for decreasing rearrangements.

Everything here is built around one representation: a nonincreasing,
right-continuous, piecewise-constant function on (0, T], stored as
breakpoints 0 < t_1 < ... < t_m = T and piece values v_1 >= ... >= v_m >= 0,
where the function equals v_j on (t_{j-1}, t_j] (t_0 = 0). On this class
of functions the quantities that drive every verification —

    F*(t)   the function itself (it already is a rearrangement),
    F**(t)  = (1/t) * integral of F over (0, t],
    lambda(u) = measure of {F > u},
    O_p(F,t) = ((1/t) * integral of (F(s) - F(t))^p ds over (0,t])^{1/p},
    P_p(F,t) = ((1/t) * integral of F^p)^{1/p},

are all available in closed form per piece, so no quadrature error enters
except where a norm genuinely requires quadrature (the logarithmically
weighted norm, and norms of piecewise-linear profiles).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import ArgumentError, DomainError, UnsupportedSpecError

__all__ = [
    "StepFunction",
    "RISpaceSpec",
    "rearrangement",
    "distribution",
    "average_star",
    "average_star_derivative",
    "oscillation",
    "hardy_p",
    "ri_norm",
    "fundamental_function",
    "associate_fundamental_function",
    "ypr_norm",
    "step_to_csv",
    "step_from_csv",
]


@dataclass(frozen=True)
class StepFunction:
    """Nonincreasing right-continuous step function on (0, T].

    breakpoints: strictly increasing positive reals t_1 < ... < t_m = T.
    values: v_1 >= ... >= v_m >= 0; the function is v_j on (t_{j-1}, t_j].

    Immutable; the arrays must not be written to after construction.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    # cumulative piece integrals, cum[j] = integral over (0, t_{j+1}]
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or vals.ndim != 1 or bp.size == 0 or bp.size != vals.size:
            raise ArgumentError("breakpoints and values must be equal-length 1D and nonempty")
        if not np.all(np.isfinite(bp)) or not np.all(np.isfinite(vals)):
            raise ArgumentError("breakpoints and values must be finite")
        if bp[0] <= 0 or np.any(np.diff(bp) <= 0):
            raise ArgumentError("breakpoints must be strictly increasing and positive")
        if np.any(vals < 0):
            raise ArgumentError("values must be nonnegative")
        if np.any(np.diff(vals) > 0):
            raise ArgumentError("values must be nonincreasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        lengths = np.diff(bp, prepend=0.0)
        object.__setattr__(self, "_cum", np.cumsum(vals * lengths))

    @property
    def domain_mass(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def pieces(self) -> int:
        return int(self.breakpoints.size)

    def _piece_index(self, t: float) -> int:
        # piece j covers (t_{j-1}, t_j]; side="left" maps t_j to piece j
        return int(np.searchsorted(self.breakpoints, t, side="left"))

    def _check_t(self, t: float) -> float:
        T = self.domain_mass
        if not (t > 0):
            raise DomainError(f"t={t} outside domain (0, {T}]")
        if t > T:
            if t <= T * (1 + 1e-9):
                return T
            raise DomainError(f"t={t} outside domain (0, {T}]")
        return float(t)

    def evaluate(self, t: float) -> float:
        """F(t) for t in (0, T]."""
        t = self._check_t(t)
        return float(self.values[self._piece_index(t)])

    def evaluate_many(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        idx = np.searchsorted(self.breakpoints, ts, side="left")
        idx = np.minimum(idx, self.values.size - 1)
        return self.values[idx]

    def integral_prefix(self, t: float) -> float:
        """Exact integral of F over (0, t]."""
        t = self._check_t(t)
        j = self._piece_index(t)
        left = 0.0 if j == 0 else float(self.breakpoints[j - 1])
        head = 0.0 if j == 0 else float(self._cum[j - 1])
        return head + float(self.values[j]) * (t - left)

    def integral(self) -> float:
        """Exact integral over the whole domain (0, T]."""
        return float(self._cum[-1])

    def power_integral_prefix(self, t: float, p: float) -> float:
        """Exact integral of F^p over (0, t] (p >= 1)."""
        t = self._check_t(t)
        j = self._piece_index(t)
        bp, vals = self.breakpoints, self.values
        head = 0.0
        if j > 0:
            lengths = np.diff(bp[: j], prepend=0.0)
            head = float(np.sum(vals[: j] ** p * lengths))
        left = 0.0 if j == 0 else float(bp[j - 1])
        return head + float(vals[j]) ** p * (t - left)


def rearrangement(values, weights) -> StepFunction:
    """Decreasing rearrangement of |values| with respect to point masses.

    Sorts |values| descending, accumulates weights as breakpoints, merges
    equal adjacent values into single pieces. The result is equimeasurable
    with the input: for every u >= 0 the mass of {|f| > u} equals the
    measure of {F > u}. Zero values are kept, so the domain is the full
    total mass.
    """
    a = np.abs(np.asarray(values, dtype=float))
    w = np.asarray(weights, dtype=float)
    if a.ndim != 1 or a.size == 0 or a.shape != w.shape:
        raise ArgumentError("values and weights must be equal-length 1D and nonempty")
    if not np.all(np.isfinite(a)):
        raise ArgumentError("values must be finite")
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise ArgumentError("weights must be strictly positive and finite")
    order = np.argsort(-a, kind="stable")
    sv = a[order]
    bp = np.cumsum(w[order])
    # merge runs of equal values: keep the last breakpoint of each run
    keep = np.empty(sv.size, dtype=bool)
    keep[:-1] = sv[:-1] != sv[1:]
    keep[-1] = True
    return StepFunction(bp[keep], sv[keep])


def distribution(F: StepFunction, u: float) -> float:
    """lambda(u) = measure of {F > u}, exact from the breakpoints."""
    if u < 0:
        raise DomainError("u must be >= 0")
    # values are nonincreasing; those > u form a prefix
    k = int(np.searchsorted(-F.values, -u, side="left"))
    return float(F.breakpoints[k - 1]) if k > 0 else 0.0


def average_star(F: StepFunction, t: float) -> float:
    """F**(t) = (1/t) * integral of F over (0, t]; exact."""
    t = F._check_t(t)
    return F.integral_prefix(t) / t


def average_star_derivative(F: StepFunction, t: float) -> float:
    """d/dt F**(t) on the open interval between breakpoints containing t.

    On piece j, F**(t) = v_j + a_j/t with a_j = integral over (0, t_{j-1}]
    minus v_j * t_{j-1}, so the derivative is -a_j / t^2 in closed form.
    Equals -(F**(t) - F(t)) / t identically.
    """
    t = F._check_t(t)
    j = F._piece_index(t)
    head = 0.0 if j == 0 else float(F._cum[j - 1])
    left = 0.0 if j == 0 else float(F.breakpoints[j - 1])
    a_j = head - float(F.values[j]) * left
    return -a_j / (t * t)


def oscillation(F: StepFunction, t: float, p: float) -> float:
    """O_p(F, t) = ((1/t) * integral of (F(s) - F(t))^p over (0,t])^{1/p}.

    Exact per piece; the integrand is nonnegative since F is nonincreasing.
    For p = 1 this is F**(t) - F(t).
    """
    t = F._check_t(t)
    if p < 1:
        raise ArgumentError("p must be >= 1")
    ft = float(F.values[F._piece_index(t)])
    if p == 1:
        return average_star(F, t) - ft
    j = F._piece_index(t)
    if j == 0:
        return 0.0
    bp, vals = F.breakpoints, F.values
    lengths = np.diff(bp[: j], prepend=0.0)
    acc = float(np.sum((vals[: j] - ft) ** p * lengths))
    # the piece containing t contributes zero: F(s) = F(t) there
    return (acc / t) ** (1.0 / p)


def hardy_p(F: StepFunction, p: float, t: float) -> float:
    """P_p(F)(t) = ((1/t) * integral of F^p over (0,t])^{1/p}; exact."""
    if p < 1:
        raise ArgumentError("p must be >= 1")
    t = F._check_t(t)
    return (F.power_integral_prefix(t, p) / t) ** (1.0 / p)


@dataclass(frozen=True)
class RISpaceSpec:
    """A rearrangement-invariant norm to evaluate.

    kind: "lp" (param p), "lorentz" (params p, q), "linf",
    or "hbw" (params s > 1 and the domain mass T) for the logarithmically
    weighted borderline space with norm
    ( integral over (0,T] of (F**(t) / (1 + log(T/t)))^s dt/t )^{1/s}.
    """

    kind: str
    p: float = 0.0
    q: float = 0.0
    s: float = 0.0
    T: float = 0.0

    def __post_init__(self):
        k = self.kind
        if k == "lp":
            if self.p < 1:
                raise UnsupportedSpecError("lp requires p >= 1")
        elif k == "lorentz":
            if self.p < 1 or self.q < 1:
                raise UnsupportedSpecError("lorentz requires p >= 1 and q >= 1")
            if math.isinf(self.q):
                raise UnsupportedSpecError("lorentz q = inf is not supported")
        elif k == "linf":
            pass
        elif k == "hbw":
            if not (self.s > 1):
                raise UnsupportedSpecError("hbw requires s > 1")
            if not (self.T > 0):
                raise UnsupportedSpecError("hbw requires T > 0")
        else:
            raise UnsupportedSpecError(f"unknown space kind {k!r}")

    @staticmethod
    def parse(text: str) -> "RISpaceSpec":
        """Parse CLI syntax: "lp:2", "lorentz:2,1", "linf", "hbw:2,4.0"."""
        head, _, tail = text.strip().partition(":")
        head = head.lower()
        try:
            if head == "lp":
                return RISpaceSpec("lp", p=float(tail))
            if head == "lorentz":
                ps, qs = tail.split(",")
                return RISpaceSpec("lorentz", p=float(ps), q=float(qs))
            if head == "linf":
                return RISpaceSpec("linf")
            if head == "hbw":
                ss, ts = tail.split(",")
                return RISpaceSpec("hbw", s=float(ss), T=float(ts))
        except UnsupportedSpecError:
            raise
        except Exception as exc:
            raise UnsupportedSpecError(f"cannot parse space spec {text!r}") from exc
        raise UnsupportedSpecError(f"unknown space kind {text!r}")

    def label(self) -> str:
        if self.kind == "lp":
            return f"lp:{self.p:g}"
        if self.kind == "lorentz":
            return f"lorentz:{self.p:g},{self.q:g}"
        if self.kind == "linf":
            return "linf"
        return f"hbw:{self.s:g},{self.T:g}"


def _hbw_norm(F: StepFunction, s: float, T: float) -> float:
    """Exact-head plus per-piece quadrature for the log-weighted norm.

    Substituting u = log(T/t) turns the integral into
    integral over u >= 0 of (F**(T e^-u) / (1+u))^s du.
    On (0, t_1] (u >= u_1) F** is the constant v_1, giving the closed form
    v_1^s (1+u_1)^{1-s} / (s-1); each remaining breakpoint interval has
    F**(t) = v_j + a_j/t smooth, integrated adaptively.
    """
    if abs(F.domain_mass - T) > 1e-9 * max(T, 1.0):
        raise DomainError(
            f"hbw domain T={T} does not match the function's domain {F.domain_mass}"
        )
    bp, vals = F.breakpoints, F.values
    v1 = float(vals[0])
    if F.integral() == 0.0:
        return 0.0
    u1 = math.log(T / float(bp[0])) if bp[0] < T else 0.0
    total = v1**s * (1.0 + u1) ** (1.0 - s) / (s - 1.0)
    for j in range(1, F.pieces):
        t_lo, t_hi = float(bp[j - 1]), float(bp[j])
        head = float(F._cum[j - 1])
        vj = float(vals[j])
        a_j = head - vj * t_lo  # F**(t) = vj + a_j/t on this piece
        u_lo, u_hi = math.log(T / t_hi), math.log(T / t_lo)

        def integrand(u, vj=vj, a_j=a_j):
            return ((vj + a_j * math.exp(u) / T) / (1.0 + u)) ** s

        part, _ = quad(integrand, u_lo, u_hi, epsabs=0.0, epsrel=1e-10, limit=200)
        total += part
    return total ** (1.0 / s)


def ri_norm(F: StepFunction, Y: RISpaceSpec) -> float:
    """Norm of the step function F in the space Y.

    lp and lorentz are exact per-piece closed forms; linf is v_1; hbw uses
    an exact head plus adaptive quadrature (relative error ~1e-10).
    """
    bp, vals = F.breakpoints, F.values
    if Y.kind == "linf":
        return float(vals[0])
    if Y.kind == "lp":
        lengths = np.diff(bp, prepend=0.0)
        return float(np.sum(vals**Y.p * lengths)) ** (1.0 / Y.p)
    if Y.kind == "lorentz":
        p, q = Y.p, Y.q
        tq = bp ** (q / p)
        incr = np.diff(tq, prepend=0.0)
        return float(np.sum(vals**q * incr) * (p / q)) ** (1.0 / q)
    if Y.kind == "hbw":
        return _hbw_norm(F, Y.s, Y.T)
    raise UnsupportedSpecError(f"unknown space kind {Y.kind!r}")


def fundamental_function(Y: RISpaceSpec, t: float) -> float:
    """phi_Y(t): norm of an indicator of mass t.

    For the log-weighted space the indicator lives on the spec's domain
    (0, T], so t must not exceed T.
    """
    if not (t > 0):
        raise DomainError("t must be > 0")
    if Y.kind == "hbw":
        if t > Y.T * (1 + 1e-12):
            raise DomainError(f"indicator mass {t} exceeds hbw domain {Y.T}")
        t = min(t, Y.T)
        if t == Y.T:
            F = StepFunction(np.array([t]), np.array([1.0]))
        else:
            F = StepFunction(np.array([t, Y.T]), np.array([1.0, 0.0]))
        return ri_norm(F, Y)
    F = StepFunction(np.array([t]), np.array([1.0]))
    return ri_norm(F, Y)


def associate_fundamental_function(Z: RISpaceSpec, t: float) -> float:
    """phi of the associate space, via the identity phi_Z(t) * phi_Z'(t) = t."""
    if not (t > 0):
        raise DomainError("t must be > 0")
    return t / fundamental_function(Z, t)


# ---------------------------------------------------------------------------
# piecewise-linear profiles (for norms of t -> t^{-1/r} O_p(F, t))


class _PiecewiseLinear:
    """Nonincreasing piecewise-linear function on (0, S], for norm taking.

    Stored as node arrays (s_i, w_i) with s strictly increasing from 0 and
    w nonincreasing; linear between nodes. Only ever built as an exact
    decreasing rearrangement, so monotonicity is guaranteed by construction.
    """

    def __init__(self, s: np.ndarray, w: np.ndarray):
        self.s = np.asarray(s, dtype=float)
        self.w = np.asarray(w, dtype=float)
        # prefix integrals at the nodes (trapezoid is exact for linear pieces)
        mids = 0.5 * (self.w[1:] + self.w[:-1])
        self._cum = np.concatenate([[0.0], np.cumsum(mids * np.diff(self.s))])

    @property
    def total(self) -> float:
        return float(self.s[-1])

    def value(self, t: float) -> float:
        return float(np.interp(t, self.s, self.w))

    def integral_prefix(self, t: float) -> float:
        j = int(np.searchsorted(self.s, t, side="right")) - 1
        j = min(max(j, 0), self.s.size - 2)
        s0, s1 = self.s[j], self.s[j + 1]
        w0, w1 = self.w[j], self.w[j + 1]
        dt = t - s0
        wmid = w0 if s1 == s0 else w0 + (w1 - w0) * dt / (s1 - s0)
        return float(self._cum[j] + 0.5 * (w0 + wmid) * dt)

    def norm(self, Y: RISpaceSpec) -> float:
        if Y.kind == "linf":
            return float(self.w[0])
        if Y.kind == "lp":
            return self._lp_norm(Y.p)
        if Y.kind == "lorentz":
            return self._lorentz_norm(Y.p, Y.q)
        if Y.kind == "hbw":
            return self._hbw_norm(Y.s, Y.T)
        raise UnsupportedSpecError(f"unknown space kind {Y.kind!r}")

    def _lp_norm(self, p: float) -> float:
        s, w = self.s, self.w
        total = 0.0
        for i in range(s.size - 1):
            ds = s[i + 1] - s[i]
            if ds == 0.0:
                continue
            wa, wb = w[i], w[i + 1]
            if wa == wb:
                total += wa**p * ds
            else:
                # integral of (affine)^p over the segment, closed form
                total += ds * (wa ** (p + 1) - wb ** (p + 1)) / ((p + 1) * (wa - wb))
        return total ** (1.0 / p)

    def _lorentz_norm(self, p: float, q: float) -> float:
        # integral of w(s)^q s^{q/p - 1} ds; substitute sigma = s^{q/p}
        # so each segment becomes a smooth bounded integrand, then fixed
        # Gauss-Legendre per segment.
        nodes, wts = np.polynomial.legendre.leggauss(32)
        a = q / p
        total = 0.0
        for i in range(self.s.size - 1):
            s0, s1 = self.s[i], self.s[i + 1]
            if s1 == s0:
                continue
            g0, g1 = s0**a, s1**a
            half, mid = 0.5 * (g1 - g0), 0.5 * (g1 + g0)
            sig = mid + half * nodes
            svals = sig ** (1.0 / a)
            wvals = np.interp(svals, self.s, self.w)
            total += half * float(np.sum(wts * wvals**q)) * (p / q)
        return total ** (1.0 / q)

    def _hbw_norm(self, s_exp: float, T: float) -> float:
        if abs(self.total - T) > 1e-9 * max(T, 1.0):
            raise DomainError("hbw domain does not match the profile's domain")
        if self.w[0] == 0.0:
            return 0.0

        # u = log(T/t); the averaged profile is smooth between node images
        def integrand(u):
            t = T * math.exp(-u)
            return (self.integral_prefix(t) / t / (1.0 + u)) ** s_exp

        us = np.log(T / np.clip(self.s[self.s > 0], 1e-300, None))[::-1]
        us = np.concatenate([[0.0], us[us > 0]])
        total = 0.0
        for lo, hi in zip(us[:-1], us[1:]):
            part, _ = quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-9, limit=200)
            total += part
        # below the first positive node the profile is affine, so integrate
        # 40 more log-units (average -> w[0] with error ~e^-40) and close
        # the remainder with the constant-average tail formula
        u_top = float(us[-1])
        part, _ = quad(integrand, u_top, u_top + 40.0, epsabs=0.0, epsrel=1e-9, limit=200)
        total += part
        total += self.w[0] ** s_exp * (41.0 + u_top) ** (1.0 - s_exp) / (s_exp - 1.0)
        return total ** (1.0 / s_exp)


def _rearrange_linear(s: np.ndarray, y: np.ndarray, head: float) -> _PiecewiseLinear:
    """Exact decreasing rearrangement of a piecewise-linear profile.

    The profile takes value y[0] on (0, head] (constant head piece) and is
    linear between nodes (s[i], y[i]). The distribution function
    lambda(u) = |{profile > u}| is piecewise linear in u with kinks exactly
    at the node values, so the rearrangement is piecewise linear with one
    (or, where the profile has a plateau, two) nodes per distinct level.
    """
    levels = np.unique(y)[::-1]  # descending
    seg_lo = np.minimum(y[:-1], y[1:])
    seg_hi = np.maximum(y[:-1], y[1:])
    seg_len = np.diff(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_slope = np.where(seg_hi > seg_lo, seg_len / (seg_hi - seg_lo), 0.0)

    def lam(u: float) -> float:
        # measure of {profile > u}, strict
        m = head if y[0] > u else 0.0
        full = seg_lo > u
        partial = (~full) & (seg_hi > u)
        m += float(np.sum(seg_len[full]))
        m += float(np.sum((seg_hi[partial] - u) * inv_slope[partial]))
        return m

    def plateau(u: float) -> float:
        # measure of {profile == u}: flat segments at this exact level
        flat = (seg_lo == u) & (seg_hi == u)
        m = float(np.sum(seg_len[flat]))
        if y[0] == u:
            m += head
        return m

    ss, ww = [0.0], [float(levels[0])]
    for u in levels:
        lo = lam(float(u))
        pl = plateau(float(u))
        if lo > ss[-1] + 1e-15 * max(1.0, lo):
            ss.append(lo)
            ww.append(float(u))
        if pl > 0.0:
            ss.append(lo + pl)
            ww.append(float(u))
    total = head + float(np.sum(seg_len))
    if ss[-1] < total:
        ss.append(total)
        ww.append(float(levels[-1]))
    else:
        ss[-1] = total
    return _PiecewiseLinear(np.array(ss), np.array(ww))


def ypr_norm(
    F: StepFunction,
    Y: RISpaceSpec,
    p: float,
    r: float,
    grid_points: int = 512,
) -> float:
    """Y-norm of the weighted oscillation profile t -> t^{-1/r} O_p(F, t).

    The profile is not piecewise polynomial, so it is sampled on a
    logarithmic grid spanning [T/1e6, T] (grid_points points), linearly
    interpolated, extended constant on (0, T/1e6], exactly rearranged, and
    the Y-norm of that piecewise-linear rearrangement is returned. For a
    constant F the oscillation vanishes identically and the result is 0.
    """
    if p < 1 or r <= 0:
        raise ArgumentError("p must be >= 1 and r > 0")
    if grid_points < 8:
        raise ArgumentError("grid_points must be >= 8")
    if F.pieces == 1:
        return 0.0
    T = F.domain_mass
    ts = np.geomspace(T / 1e6, T, grid_points)
    ts[-1] = T
    h = np.array([t ** (-1.0 / r) * oscillation(F, float(t), p) for t in ts])
    profile = _rearrange_linear(ts, h, head=float(ts[0]))
    return profile.norm(Y)


# ---------------------------------------------------------------------------
# CSV interchange


def step_to_csv(F: StepFunction) -> str:
    """Serialize as CSV with columns t,value (one row per piece)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "value"])
    for t, v in zip(F.breakpoints, F.values):
        writer.writerow([repr(float(t)), repr(float(v))])
    return buf.getvalue()


def step_from_csv(text: str) -> StepFunction:
    """Parse the t,value CSV format back into a StepFunction."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ArgumentError("empty step-function CSV")
    if rows[0] and rows[0][0].strip().lower() == "t":
        rows = rows[1:]
    bp, vals = [], []
    for row in rows:
        if not row:
            continue
        bp.append(float(row[0]))
        vals.append(float(row[1]))
    return StepFunction(np.array(bp), np.array(vals))
