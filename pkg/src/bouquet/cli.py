"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 numeric
limit reached (saturation, suspected infinite potential, exhausted budget).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import jsonio
from .address import AddressFormatError, parse_address
from .density import BudgetExhausted, PossiblyInfinitePotential, erdos_transform, graph_point, potential_target
from .model import (
    DEFAULT_CAP,
    DivergedBeyond,
    FailsAt,
    ModelPoint,
    OkForever,
    SaturationError,
    in_model_julia,
    min_potential,
    min_potential_oracle,
    model_step,
    t_star,
)
from .plane import (
    BranchCollapse,
    band_check,
    classify_orbit,
    endpoint,
    find_attracting_cycle,
    iterate,
    julia_membership,
    trace_ray,
)
from .strata import (
    certify_stratification,
    exhibit_successor,
    in_tree,
    parse_stratum,
    stratum_membership,
    stratum_nonempty,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3
NUMERIC_LIMITS = (SaturationError, PossiblyInfinitePotential, BudgetExhausted, BranchCollapse, OverflowError)


class InputError(ValueError):
    pass


def parse_pair(text: str, what: str) -> tuple[float, float]:
    try:
        re, im = (float(p) for p in text.split(","))
    except ValueError:
        raise InputError(f"{what} must look like 're,im', got {text!r}") from None
    return re, im


def parse_complex(text: str, what: str = "point") -> complex:
    return complex(*parse_pair(text, what))


def parse_viewport(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(p) for p in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 4:
        raise InputError(f"viewport must look like 'x0,x1,y0,y1', got {text!r}")
    return vals


def parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise InputError(f"size must look like 'WxH', got {text!r}") from None
    return w, h


def _need_address(args):
    if args.address is None:
        raise InputError("--address is required")
    return parse_address(args.address)


def _feasibility(res) -> dict:
    if isinstance(res, FailsAt):
        return {"result": "FailsAt", "n": res.n}
    if isinstance(res, OkForever):
        return {"result": "OkForever", "certified_at": res.certified_at}
    return {"result": "OkUpTo", "depth": res.depth}


# -- subcommands -------------------------------------------------------------

def cmd_potential(args):
    s = _need_address(args)
    res = min_potential(s, args.depth or 200, args.cap)
    if isinstance(res, DivergedBeyond):
        return EXIT_LIMIT, {"address": s, "diverged": True, "cap": res.cap, "lower_bound": res.lower_bound,
                            "depth_used": res.depth_used}
    out = {"address": s, "potential": res.value, "error_bound": res.error_bound,
           "depth_used": res.depth_used, "converged": res.converged}
    if args.oracle:
        out["oracle"] = min_potential_oracle(s, 30, args.tol or 1e-12, args.cap)
    return EXIT_OK, out


def cmd_tstar(args):
    s = _need_address(args)
    ts = t_star(s, args.depth or 64)
    return EXIT_OK, {"address": s, "t_star": ts.value, "stable_at": ts.stable_at}


def cmd_orbit(args):
    steps = args.steps
    if args.address is not None:
        s = _need_address(args)
        t = args.t if args.t is not None else min_potential(s).value
        p = ModelPoint(t, s)
        pts = [t]
        status = "ok"
        for _ in range(steps):
            try:
                t_next, s_next = model_step(p)
            except SaturationError:
                status = "saturated"
                break
            pts.append(t_next)
            if t_next < 0:
                status = "negative"
                break
            p = ModelPoint(t_next, s_next)
        return EXIT_OK, {"address": s, "potentials": pts, "status": status}
    if args.z is None:
        raise InputError("orbit needs --address (model orbit) or --z (plane orbit)")
    a = parse_complex(args.a, "--a")
    orb = iterate(parse_complex(args.z, "--z"), steps, a)
    return EXIT_OK, {"points": list(orb.points), "overflow_at": orb.overflow_at}


def cmd_member(args):
    depth = args.depth or 30
    if args.address is not None:
        s = _need_address(args)
        if args.t is None:
            raise InputError("model membership needs --t")
        return EXIT_OK, dict(address=s, t=args.t, **_feasibility(in_model_julia(ModelPoint(args.t, s), depth)))
    if args.z is None:
        raise InputError("member needs --address with --t, or --z")
    tol = 1e-6 if args.tol is None else args.tol
    res = julia_membership(parse_complex(args.z, "--z"), depth, tol, parse_complex(args.a, "--a"))
    return EXIT_OK, dict(z=parse_complex(args.z), **_feasibility(res))


def cmd_strata(args):
    if args.certify:
        cert = certify_stratification(args.depth or 4, args.seed, args.samples, workers=args.workers)
        return (EXIT_OK if cert.passed else EXIT_FAIL), cert
    alpha = parse_stratum(args.stratum or "")
    out = {"stratum": alpha, "admissible": alpha.is_admissible(), "nonempty": stratum_nonempty(alpha),
           "in_tree": in_tree(alpha)}
    if args.address is not None:
        s = _need_address(args)
        out["address"] = s
        out["member"] = stratum_membership(s, alpha)
        if out["member"]:
            out["successor"] = exhibit_successor(s, alpha)
    return EXIT_OK, out


def cmd_target(args):
    s = _need_address(args)
    if args.target is None:
        raise InputError("target needs --target")
    eps = 1e-3 if args.tol is None else args.tol
    res = potential_target(s, args.prefix_agree, args.target, eps, args.budget)
    gp = graph_point(res)
    return EXIT_OK, {"address": res, "potential": gp.potential, "error_bound": gp.error_bound}


def cmd_graph(args):
    gp = graph_point(_need_address(args))
    return EXIT_OK, {"address": gp.address, "potential": gp.potential, "error_bound": gp.error_bound,
                     "erdos": erdos_transform(gp.potential)}


def _ray_output(ray, args):
    tol = 1e-6 if args.tol is None else args.tol
    rep = band_check(ray, args.check_depth, tol, parse_complex(args.a, "--a"))
    return {"re": ray.point.real, "im": ray.point.imag, "error_estimate": ray.error_estimate,
            "potential": ray.potential, "pullback_depth": ray.pullback_depth, "saturated": ray.saturated,
            "checks": {"band": rep.band_ok, "julia": rep.julia_ok}}


def cmd_ray(args):
    s = _need_address(args)
    t = args.t if args.t is not None else min_potential(s).value
    ray = trace_ray(s, t, args.depth or 30, parse_complex(args.a, "--a"), adaptive=args.adaptive, dps=args.dps)
    return EXIT_OK, _ray_output(ray, args)


def cmd_endpoint(args):
    s = _need_address(args)
    ray = endpoint(s, args.depth or 30, parse_complex(args.a, "--a"), dps=args.dps)
    return EXIT_OK, _ray_output(ray, args)


def cmd_classify(args):
    if args.address is not None:
        src = _need_address(args)
    elif args.z is not None:
        src = parse_complex(args.z, "--z")
    else:
        raise InputError("classify needs --address or --z")
    res = classify_orbit(src, args.depth or 50, args.threshold, parse_complex(args.a, "--a"))
    return EXIT_OK, res


def cmd_cycle(args):
    return EXIT_OK, find_attracting_cycle(parse_complex(args.a, "--a"), args.max_period, args.tol or 1e-6)


def cmd_render(args):
    from .render import Overlay, RenderJob, ViewportSpec, render_julia, render_overlay

    w, h = parse_size(args.size)
    x0, x1, y0, y1 = parse_viewport(args.viewport)
    vp = ViewportSpec(x0, x1, y0, y1, w, h, args.max_iter)
    overlays = []
    for text in args.overlay or ():
        s = parse_address(text)
        overlays.append(Overlay(s, (0.0, args.t_max), args.samples))
    job = RenderJob(vp, parse_complex(args.a, "--a"), tuple(overlays), args.format, args.workers)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    warnings: list = []
    if job.output_format in ("ppm", "both"):
        path = out / "julia.ppm"
        path.write_bytes(render_julia(job))
        written["ppm"] = str(path)
    if job.output_format in ("svg", "both"):
        path = out / "rays.svg"
        path.write_bytes(render_overlay(job, warnings))
        written["svg"] = str(path)
    return EXIT_OK, {"files": written, "warnings": warnings}


def cmd_verify(args):
    from .plotting import write_report
    from .verify import run_verify

    code, report = run_verify(args.suite, args.seed, args.inject_bug, args.prefix_agree)
    if report is None:
        return EXIT_INPUT, {"error": f"unknown suite {args.suite!r}"}
    if args.out:
        write_report(report, args.out)
    return code, report


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--depth", type=int, default=None, help="depth (meaning depends on the command)")
    g.add_argument("--tol", type=float, default=None, help="tolerance")
    g.add_argument("--cap", type=float, default=DEFAULT_CAP, help="divergence cap for potentials")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--json", action="store_true", help="print JSON")
    g.add_argument("--out", default=None, help="output directory")
    g.add_argument("--address", default=None, help="JSON address or shorthand like '0,2,5;linear:1,0:+'")
    g.add_argument("--a", default="-1,0", help="parameter a as 're,im'")

    parser = argparse.ArgumentParser(prog="bouquet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("potential", cmd_potential, "minimal potential of an address")
    p.add_argument("--oracle", action="store_true", help="also run the forward bisection oracle")
    add("tstar", cmd_tstar, "the t* bound of an address")
    for name, fn, help_ in (("orbit", cmd_orbit, "model or plane orbit"),
                            ("member", cmd_member, "model or plane Julia membership")):
        p = add(name, fn, help_)
        p.add_argument("--t", type=float, default=None, help="model potential")
        p.add_argument("--z", default=None, help="plane point 're,im'")
        if name == "orbit":
            p.add_argument("--steps", type=int, default=10)
    p = add("strata", cmd_strata, "stratum queries and certification")
    p.add_argument("--stratum", default=None, help="node as 'N:s,N:s'")
    p.add_argument("--certify", action="store_true")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--workers", type=int, default=1)
    p = add("target", cmd_target, "raise coordinates to hit a target potential")
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--prefix-agree", type=int, default=6)
    p.add_argument("--budget", type=int, default=64)
    add("graph", cmd_graph, "graph point and its transform")
    for name, fn in (("ray", cmd_ray), ("endpoint", cmd_endpoint)):
        p = add(name, fn, "trace a ray point" if name == "ray" else "trace the endpoint of a ray")
        if name == "ray":
            p.add_argument("--t", type=float, default=None, help="potential (defaults to the endpoint)")
            p.add_argument("--adaptive", action="store_true", help="seed below the saturation height")
        p.add_argument("--dps", type=int, default=50, help="mpmath digits for the pullback")
        p.add_argument("--check-depth", type=int, default=8)
    p = add("classify", cmd_classify, "classify an address or plane orbit")
    p.add_argument("--z", default=None)
    p.add_argument("--threshold", type=float, default=100.0)
    p = add("cycle", cmd_cycle, "attracting or parabolic cycle of exp(z)+a")
    p.add_argument("--max-period", type=int, default=2)
    p = add("render", cmd_render, "render the Julia set and ray overlays")
    p.add_argument("--viewport", default=f"0,4,{-2 * math.pi!r},{8 * math.pi!r}")
    p.add_argument("--size", default="800x800")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--overlay", action="append", help="address to overlay (repeatable)")
    p.add_argument("--t-max", type=float, default=6.0)
    p.add_argument("--samples", type=int, default=40)
    p.add_argument("--format", choices=("ppm", "svg", "both"), default="both")
    p = add("verify", cmd_verify, "run a property suite")
    p.add_argument("suite", help="model, strata, density, plane, render or all")
    p.add_argument("--prefix-agree", type=int, default=6)
    p.add_argument("--inject-bug", default=None, help=argparse.SUPPRESS)
    return parser


def format_text(obj) -> str:
    if hasattr(obj, "to_json"):
        obj = obj.to_json()
    if not isinstance(obj, dict):
        return jsonio.dumps(obj)
    return "\n".join(f"{k}: {v if isinstance(v, str) else jsonio.dumps(v)}" for k, v in obj.items())


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, out = args.func(args)
    except NUMERIC_LIMITS as exc:
        code, out = EXIT_LIMIT, {"error": str(exc), "kind": type(exc).__name__}
    except (InputError, AddressFormatError, ValueError) as exc:
        code, out = EXIT_INPUT, {"error": str(exc), "kind": type(exc).__name__}
    print(jsonio.dumps(out) if args.json else format_text(out))
    return code


if __name__ == "__main__":
    sys.exit(main())
