"""Command-line surface: build spaces, run operators, emit reports.

Exit codes: 0 on success, 1 on argument/parse/domain errors, 2 when a
mathematical hypothesis of the requested inequality is violated (the
caller asked a well-formed question whose preconditions fail on the
data). All JSON output is key-sorted with repr floats, so identical
configurations produce byte-identical files regardless of --threads.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import carnot as _carnot
from .errors import ArgumentError, HypothesisViolation, MetricSymError
from .maximal import field_to_csv, hl_maximal, sharp_maximal
from .rearrange import RISpaceSpec, rearrangement, step_to_csv
from .space import (
    MetricMeasureSpace,
    ball,
    build_grid_space,
    center_index,
    doubling_stats,
    doubling_to_csv,
    space_from_json,
    space_to_json,
)
from .verify import (
    SobolevPair,
    _jsonable,
    bi_curve,
    bi_lhs_curve,
    counterexample_run,
    embedding_check,
    euclidean_gradient_pair,
    faber_krahn,
    poincare_constant,
    report_to_csv,
    report_to_json,
    support_gradient_ratio,
)

__all__ = ["main", "load_space", "generate_values"]


# ---------------------------------------------------------------------------
# input builders


def load_space(spec: str) -> MetricMeasureSpace:
    """Build a space from "grid2d:N[,lo,hi]" / "grid1d:..." / a JSON path."""
    if spec.endswith(".json") or os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            return space_from_json(fh.read())
    name, _, rest = spec.partition(":")
    dims = {"grid1d": 1, "grid2d": 2, "grid3d": 3}.get(name)
    if dims is None:
        raise ArgumentError(
            f"unknown space spec {spec!r}; expected gridKd:N[,lo,hi] or a JSON path"
        )
    parts = rest.split(",") if rest else []
    if len(parts) not in (1, 3):
        raise ArgumentError(f"space spec {spec!r} needs N or N,lo,hi")
    n = int(parts[0])
    lo, hi = (float(parts[1]), float(parts[2])) if len(parts) == 3 else (0.0, 1.0)
    return build_grid_space(n, lo=lo, hi=hi, dims=dims)


def _box(space: MetricMeasureSpace):
    if space.coords is None:
        raise ArgumentError("this operation needs a coordinate-built space")
    return space.coords.min(axis=0), space.coords.max(axis=0)


def generate_values(space: MetricMeasureSpace, spec: str) -> np.ndarray:
    """Built-in function generators, or a one-column CSV path.

    sinprod        product over axes of sin(pi * x_i)
    cone:R         tent 1 - |x - c|/R (clipped at 0), c the box midpoint
    hat            cone with R a quarter of the narrowest box width
    fk:k           1 outside the radius-1/k ball at c, k|x - c| inside
    half           indicator of the first coordinate below its midpoint
    coord:j        the j-th coordinate
    const:v        the constant v
    """
    if spec.endswith(".csv"):
        vals = np.loadtxt(spec, dtype=float, delimiter=",").ravel()
        if vals.size != space.n:
            raise ArgumentError(
                f"{spec} holds {vals.size} values, space has {space.n} points"
            )
        return vals
    name, _, arg = spec.partition(":")
    if name == "sinprod":
        return np.prod(np.sin(math.pi * space.coords), axis=1)
    if name in ("cone", "hat", "fk", "half", "coord"):
        lo, hi = _box(space)
    if name in ("cone", "hat"):
        if name == "cone":
            if not arg:
                raise ArgumentError("cone needs a radius: cone:R")
            radius = float(arg)
        else:
            radius = 0.25 * float(np.min(hi - lo))
        if radius <= 0:
            raise ArgumentError("cone radius must be positive")
        c = 0.5 * (lo + hi)
        r = np.sqrt(np.sum((space.coords - c) ** 2, axis=1))
        return np.maximum(0.0, 1.0 - r / radius)
    if name == "fk":
        if not arg:
            raise ArgumentError("fk needs a slope: fk:k")
        k = float(arg)
        if k <= 0:
            raise ArgumentError("fk slope must be positive")
        c = 0.5 * (lo + hi)
        r = np.sqrt(np.sum((space.coords - c) ** 2, axis=1))
        return np.where(r >= 1.0 / k, 1.0, k * r)
    if name == "half":
        mid = 0.5 * (lo[0] + hi[0])
        return (space.coords[:, 0] < mid).astype(float)
    if name == "coord":
        j = int(arg) if arg else 0
        if not 0 <= j < space.coords.shape[1]:
            raise ArgumentError(f"coordinate {j} out of range")
        return space.coords[:, j].copy()
    if name == "const":
        return np.full(space.n, float(arg) if arg else 1.0)
    raise ArgumentError(f"unknown generator {spec!r}")


def _pair(space: MetricMeasureSpace, args) -> SobolevPair:
    f = generate_values(space, args.f)
    if getattr(args, "g", None):
        return SobolevPair(f, generate_values(space, args.g), "supplied")
    return euclidean_gradient_pair(space, f)


def _b0(space: MetricMeasureSpace, args):
    if getattr(args, "b0_point", None):
        c = center_index(space, _floats(args.b0_point))
    else:
        c = center_index(space)
    if getattr(args, "b0_radius", None) is not None:
        r = float(args.b0_radius)
    else:
        r = float(np.max(space.dist_row(c)))
    return ball(space, c, r)


def _floats(text: str):
    return [float(x) for x in text.split(",") if x != ""]


def _ints(text: str):
    return [int(x) for x in text.split(",") if x != ""]


def _axis_pairs(text: str):
    out = []
    for part in text.split(";"):
        vals = _floats(part)
        if len(vals) != 2:
            raise ArgumentError(f"expected lo,hi pairs separated by ';', got {text!r}")
        out.append((vals[0], vals[1]))
    return out


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_space_stats(args):
    space = load_space(args.space)
    centers = _ints(args.centers) if args.centers else None
    radii = _floats(args.radii) if args.radii else None
    stats = doubling_stats(space, centers=centers, radii=radii)
    report = {
        "name": "doubling",
        "c_d": stats.c_d,
        "s": stats.s,
        "n_samples": len(stats.samples),
        "space": {"n": space.n, "total_mass": space.total_mass},
    }
    _emit(_dump_json(report), args.out)
    if args.csv:
        _emit(doubling_to_csv(stats), args.csv)


def _cmd_rearrange(args):
    if args.infile:
        if not args.weights:
            raise ArgumentError("--in needs --weights")
        vals = np.loadtxt(args.infile, dtype=float, delimiter=",").ravel()
        wts = np.loadtxt(args.weights, dtype=float, delimiter=",").ravel()
    else:
        if not (args.space and args.f):
            raise ArgumentError("need either --in/--weights or --space/--f")
        space = load_space(args.space)
        vals = generate_values(space, args.f)
        wts = space.weights
    _emit(step_to_csv(rearrangement(vals, wts)), args.out)


def _cmd_maximal(args):
    space = load_space(args.space)
    if args.kind == "hl":
        g = generate_values(space, args.g if args.g else args.f)
        field = hl_maximal(space, np.abs(g), threads=args.threads)
    else:
        if not args.f:
            raise ArgumentError("sharp maximal needs --f")
        B0 = _b0(space, args)
        field = sharp_maximal(
            space,
            generate_values(space, args.f),
            B0,
            p=args.p,
            q=args.q,
            threads=args.threads,
            b0_cap=args.b0_cap,
        )
    _emit(field_to_csv(field), args.out)


def _report_out(report, args):
    _emit(report_to_json(report), args.out)
    if getattr(args, "csv", None):
        _emit(report_to_csv(report), args.csv)


def _cmd_verify_poincare(args):
    space = load_space(args.space)
    pair = _pair(space, args)
    if args.omega_point or args.omega_radius is not None:
        c = (
            center_index(space, _floats(args.omega_point))
            if args.omega_point
            else center_index(space)
        )
        r = (
            float(args.omega_radius)
            if args.omega_radius is not None
            else float(np.max(space.dist_row(c)))
        )
        omega = ball(space, c, r)
    else:
        c = center_index(space)
        omega = ball(space, c, float(np.max(space.dist_row(c))))
    report = poincare_constant(
        space,
        pair,
        p=args.p,
        q=args.q,
        sigma=args.sigma,
        omega=omega,
        threads=args.threads,
        contain_factor=args.contain,
        tol=args.tol,
    )
    _report_out(report, args)


def _cmd_verify_bi(args):
    space = load_space(args.space)
    report = bi_curve(
        space,
        _b0(space, args),
        _pair(space, args),
        p=args.p,
        q=args.q,
        s=args.s,
        c2=args.c2,
        tol=args.tol,
    )
    _report_out(report, args)


def _cmd_verify_bi_lhs(args):
    space = load_space(args.space)
    report = bi_lhs_curve(
        space,
        _b0(space, args),
        generate_values(space, args.f),
        p=args.p,
        q=args.q,
        c2=args.c2,
        threads=args.threads,
        tol=args.tol,
        b0_cap=args.b0_cap,
    )
    _report_out(report, args)


def _cmd_verify_embed(args):
    space = load_space(args.space)
    report = embedding_check(
        space,
        _b0(space, args),
        _pair(space, args),
        p=args.p,
        q=args.q,
        s=args.s,
        Y=RISpaceSpec.parse(args.Y),
        grid_points=args.grid_points,
        tol=args.tol,
        seed=args.seed,
    )
    _report_out(report, args)


def _cmd_verify_faber_krahn(args):
    space = load_space(args.space)
    pair = _pair(space, args)
    if args.part == "euclidean":
        if args.dim is None:
            raise ArgumentError("--part euclidean needs --dim")
        result = support_gradient_ratio(
            pair.f, pair.g, space.weights, dim=args.dim, p=args.p
        )
        _emit(_dump_json({"name": "support-gradient-ratio", **result}), args.out)
        return
    if not args.Z:
        raise ArgumentError("parts i/ii need --Z")
    report = faber_krahn(
        space,
        _b0(space, args),
        pair,
        p=args.p,
        q=args.q,
        s=args.s,
        Z=RISpaceSpec.parse(args.Z),
        c2=args.c2,
        part=args.part,
        tol=args.tol,
    )
    _report_out(report, args)


def _cmd_counterexample(args):
    result = counterexample_run(
        _ints(args.k), args.n, _floats(args.taus), threads=args.threads
    )
    _emit(_dump_json(result), args.out)


def _build_grid_from_args(args):
    system = _carnot.vector_field_system(args.fields, dim=args.dim)
    extents = _axis_pairs(args.extents)
    resolution = _ints(args.resolution)
    if len(resolution) == 1:
        resolution = resolution[0]
    return system, _carnot.build_cc_grid(
        system,
        extents,
        resolution,
        h=args.h,
        n_directions=args.directions,
    )


def _cmd_carnot_build(args):
    system, grid = _build_grid_from_args(args)
    report = {
        "name": "carnot-build",
        "fields": system.name,
        "extents": _axis_pairs(args.extents),
        "resolution": list(grid.shape),
        "h": grid.h,
        "directions": grid.n_directions,
        "nodes": grid.n,
        "edges": int(grid.graph.nnz),
    }
    src_point = _floats(args.source) if args.source else [0.0] * system.dim
    src = grid.nearest_node(src_point)
    report["source"] = {"node": src, "coords": [float(x) for x in grid.coords[src]]}
    needs_distance = args.targets or args.slope_taus or args.count_radius
    if needs_distance:
        grid = _carnot.cc_distance(grid, [src], threads=args.threads)
        row = grid.distance_from(src)
        if args.targets:
            rows = []
            for part in args.targets.split(";"):
                pt = _floats(part)
                node = grid.nearest_node(pt)
                rows.append(
                    {
                        "requested": pt,
                        "node": node,
                        "coords": [float(x) for x in grid.coords[node]],
                        "distance": float(row[node]),
                    }
                )
            report["targets"] = rows
        if args.slope_taus:
            taus = _floats(args.slope_taus)
            axis = args.slope_axis
            snapped, dists = [], []
            for tau in taus:
                pt = [0.0] * system.dim
                pt[axis] = tau
                node = grid.nearest_node(pt)
                snapped.append(float(grid.coords[node][axis]))
                dists.append(float(row[node]))
            report["slope"] = {
                "taus": taus,
                "snapped": snapped,
                "distances": dists,
                "slope": _carnot.log_log_slope(snapped, dists),
            }
        if args.count_radius:
            report["dimension"] = _carnot.ball_count_dimension(row, args.count_radius)
    if args.window:
        space = _carnot.build_cc_space(
            grid, _axis_pairs(args.window), threads=args.threads
        )
        report["window"] = {"nodes": space.n, "total_mass": space.total_mass}
        if args.out_space:
            _emit(space_to_json(space), args.out_space)
    elif args.out_space:
        raise ArgumentError("--out-space needs --window")
    _emit(_dump_json(report), args.out)


def _cmd_carnot_jerison(args):
    system, grid = _build_grid_from_args(args)
    if not args.window:
        raise ArgumentError("jerison needs --window")
    space = _carnot.build_cc_space(grid, _axis_pairs(args.window), threads=args.threads)
    f = generate_values(space, args.f)
    report = _carnot.jerison_check(
        space, system, f, p=args.p, threads=args.threads, tol=args.tol
    )
    _report_out(report, args)


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # parse problems are exit-1, not argparse's 2
        raise ArgumentError(message)


def _add_common(p, *names):
    if "space" in names:
        p.add_argument("--space", required=True, help="gridKd:N[,lo,hi] or JSON path")
    if "f" in names:
        p.add_argument("--f", required=True, help="generator spec or CSV path")
    if "g" in names:
        p.add_argument("--g", help="gradient values (default: grid |grad f|)")
    if "b0" in names:
        p.add_argument("--b0-point", help="ball center coordinates, comma-separated")
        p.add_argument("--b0-radius", type=float, help="ball radius (default: all)")
    if "threads" in names:
        p.add_argument("--threads", type=int, default=1)
    if "tol" in names:
        p.add_argument("--tol", type=float, help="pass threshold for best_constant")
    if "out" in names:
        p.add_argument("--out", help="output path (default: stdout)")
    if "csv" in names:
        p.add_argument("--csv", help="also write the curve as CSV here")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="metricsym", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("space", help="space utilities")
    spsub = sp.add_subparsers(dest="subcommand", required=True)
    st = spsub.add_parser("stats", help="doubling statistics")
    _add_common(st, "space", "out")
    st.add_argument("--centers", help="comma-separated center indices")
    st.add_argument("--radii", help="comma-separated radii")
    st.add_argument("--csv", help="write center,r,ratio samples here")
    st.set_defaults(func=_cmd_space_stats)

    re_ = sub.add_parser("rearrange", help="decreasing rearrangement CSV")
    re_.add_argument("--in", dest="infile", help="one-column CSV of values")
    re_.add_argument("--weights", help="one-column CSV of masses")
    re_.add_argument("--space", help="alternative: build the space")
    re_.add_argument("--f", help="alternative: generate values on it")
    re_.add_argument("--out", help="output path (default: stdout)")
    re_.set_defaults(func=_cmd_rearrange)

    mx = sub.add_parser("maximal", help="maximal-operator field CSV")
    _add_common(mx, "space", "b0", "threads", "out")
    mx.add_argument("--kind", choices=["hl", "sharp"], default="hl")
    mx.add_argument("--f", help="function values (sharp kind)")
    mx.add_argument("--g", help="function values (hl kind)")
    mx.add_argument("--p", type=float, default=1.0)
    mx.add_argument("--q", type=float, default=1.0)
    mx.add_argument("--b0-cap", type=int, default=4096)
    mx.set_defaults(func=_cmd_maximal)

    ver = sub.add_parser("verify", help="inequality reports")
    vsub = ver.add_subparsers(dest="subcommand", required=True)

    vp = vsub.add_parser("poincare", help="ball Poincare constant scan")
    _add_common(vp, "space", "f", "g", "threads", "tol", "out", "csv")
    vp.add_argument("--p", type=float, required=True)
    vp.add_argument("--q", type=float, required=True)
    vp.add_argument("--sigma", type=float, default=1.0)
    vp.add_argument("--omega-point", help="scan region center coordinates")
    vp.add_argument("--omega-radius", type=float)
    vp.add_argument("--contain", type=float, help="containment dilate factor")
    vp.set_defaults(func=_cmd_verify_poincare)

    vb = vsub.add_parser("bi", help="symmetrization inequality curve")
    _add_common(vb, "space", "f", "g", "b0", "threads", "tol", "out", "csv")
    vb.add_argument("--p", type=float, required=True)
    vb.add_argument("--q", type=float, required=True)
    vb.add_argument("--s", type=float, required=True)
    vb.add_argument("--c2", type=float, default=0.1)
    vb.set_defaults(func=_cmd_verify_bi)

    vl = vsub.add_parser("bi-lhs", help="oscillation vs sharp maximal curve")
    _add_common(vl, "space", "f", "b0", "threads", "tol", "out", "csv")
    vl.add_argument("--p", type=float, required=True)
    vl.add_argument("--q", type=float, required=True)
    vl.add_argument("--c2", type=float, default=0.1)
    vl.add_argument("--b0-cap", type=int, default=4096)
    vl.set_defaults(func=_cmd_verify_bi_lhs)

    ve = vsub.add_parser("embed", help="oscillation-norm embedding ratio")
    _add_common(ve, "space", "f", "g", "b0", "tol", "out", "csv")
    ve.add_argument("--p", type=float, required=True)
    ve.add_argument("--q", type=float, required=True)
    ve.add_argument("--s", type=float, required=True)
    ve.add_argument("--Y", required=True, help="norm spec: lp:P | lorentz:P,Q | linf | hbw:S,T")
    ve.add_argument("--grid-points", type=int, default=512)
    ve.add_argument("--seed", type=int, default=0)
    ve.set_defaults(func=_cmd_verify_embed)

    vf = vsub.add_parser("faber-krahn", help="support-size inequality")
    _add_common(vf, "space", "f", "g", "b0", "tol", "out", "csv")
    vf.add_argument("--p", type=float, required=True)
    vf.add_argument("--q", type=float, default=1.0)
    vf.add_argument("--s", type=float, default=1.0)
    vf.add_argument("--Z", help="norm spec for the gradient side")
    vf.add_argument("--c2", type=float, default=0.5)
    vf.add_argument("--part", choices=["i", "ii", "both", "euclidean"], default="both")
    vf.add_argument("--dim", type=int, help="ambient dimension (euclidean part)")
    vf.set_defaults(func=_cmd_verify_faber_krahn)

    cx = sub.add_parser("counterexample", help="ratio growth beyond the window")
    cx.add_argument("--k", required=True, help="comma-separated slope values")
    cx.add_argument("--n", type=int, default=512)
    cx.add_argument("--taus", default="0.999,0.5,0.1", help="probe fractions of total mass")
    cx.add_argument("--threads", type=int, default=1)
    cx.add_argument("--out")
    cx.set_defaults(func=_cmd_counterexample)

    ca = sub.add_parser("carnot", help="control-metric geometry")
    casub = ca.add_subparsers(dest="subcommand", required=True)

    cb = casub.add_parser("build", help="lattice distances, slopes, dimension")
    cb.add_argument("--fields", required=True, help="heisenberg | grushin | euclidean")
    cb.add_argument("--dim", type=int, help="dimension for euclidean fields")
    cb.add_argument("--extents", required=True, help="lo,hi;lo,hi;... per axis")
    cb.add_argument("--resolution", required=True, help="nodes per axis, comma-separated")
    cb.add_argument("--h", type=float, help="step length (default: 2x coarsest spacing)")
    cb.add_argument("--directions", type=int, default=16)
    cb.add_argument("--source", help="source point coordinates (default: origin)")
    cb.add_argument("--targets", help="semicolon-separated target points")
    cb.add_argument("--slope-taus", help="offsets for the log-log slope fit")
    cb.add_argument("--slope-axis", type=int, default=2)
    cb.add_argument("--count-radius", type=float, help="radius for growth dimension")
    cb.add_argument("--window", help="box for the exported space: lo,hi;lo,hi;...")
    cb.add_argument("--out-space", help="write the window space JSON here")
    cb.add_argument("--threads", type=int, default=1)
    cb.add_argument("--out")
    cb.set_defaults(func=_cmd_carnot_build)

    cj = casub.add_parser("jerison", help="Poincare scan on a control window")
    cj.add_argument("--fields", required=True)
    cj.add_argument("--dim", type=int)
    cj.add_argument("--extents", required=True)
    cj.add_argument("--resolution", required=True)
    cj.add_argument("--h", type=float)
    cj.add_argument("--directions", type=int, default=16)
    cj.add_argument("--window", required=True)
    cj.add_argument("--f", default="coord:0", help="generator on the window space")
    cj.add_argument("--p", type=float, default=2.0)
    cj.add_argument("--threads", type=int, default=1)
    cj.add_argument("--tol", type=float)
    cj.add_argument("--out")
    cj.add_argument("--csv")
    cj.set_defaults(func=_cmd_carnot_jerison)

    return top


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
        return 0
    except HypothesisViolation as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return 2
    except MetricSymError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
