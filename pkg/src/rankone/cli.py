"""Command-line front end.

Subcommands: validate | analyze | iso | simulate | transform.  Machine
output is JSON (or CSV for correlation sweeps) with every rational as an
exact "p/q" string; text mode shows 6-digit approximations marked with '~'.
Exit status: 0 definite result, 2 Unknown verdict, 1 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import decide, params, polyiso, simulate, spacers
from .errors import RankOneError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNKNOWN = 2


def _frac_str(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return str(x)


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return _frac_str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def load_spec(text: str) -> params.ParamSpec:
    """Builtin name, a path to a JSON file, or inline JSON."""
    text = text.strip()
    if text.startswith("{"):
        return params.spec_from_json(json.loads(text))
    if text.endswith(".json") or "/" in text:
        return params.spec_from_json(json.loads(Path(text).read_text()))
    return params.builtin_spec(text)


def _parse_int_set(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip() != "")


def _parse_t_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _emit(data, fmt: str) -> None:
    if fmt == "text":
        def render(obj, indent=0):
            pad = "  " * indent
            if isinstance(obj, dict):
                for k, v in obj.items():
                    if isinstance(v, (dict, list)):
                        print(f"{pad}{k}:")
                        render(v, indent + 1)
                    else:
                        print(f"{pad}{k}: {_textual(v)}")
            elif isinstance(obj, list):
                for v in obj:
                    render(v, indent)
            else:
                print(f"{pad}{_textual(obj)}")

        render(data)
    else:
        print(json.dumps(_jsonable(data), indent=2))


def _textual(v):
    if isinstance(v, str) and "/" in v:
        try:
            f = Fraction(v)
            return f"{v} (~{float(f):.6f})"
        except (ValueError, ZeroDivisionError):
            return v
    return v


def cmd_validate(args) -> int:
    spec = load_spec(args.spec)
    depth = args.depth
    violations = params.validate(spec, depth)
    rep = params.measure(spec, depth)
    total = rep.total
    ratios = list(rep.ratios)
    if args.normalize:
        ratios = [r / rep.total for r in ratios]
        total = Fraction(1)
    std = []
    for g in range(-args.g_range, args.g_range + 1):
        if g == 0:
            continue
        r = params.standardness_check(spec, g, args.n, depth, budget=args.budget)
        std.append({"g": g, "holds_at": r.holds_at, "ratio": _frac_str(r.ratio)})
    out = {
        "violations": [vars(v) for v in violations],
        "measure": {
            "ratios": [_frac_str(r) for r in ratios],
            "total": _frac_str(total),
            "finite": rep.finite,
            "certified": rep.certified,
        },
        "standardness": std,
    }
    _emit(out, args.format)
    return EXIT_OK if not violations else EXIT_INPUT


def cmd_analyze(args) -> int:
    spec = load_spec(args.spec)
    report = decide.classify(spec)
    _emit(report.to_json(), args.format)
    return EXIT_UNKNOWN if report.classification == decide.UNKNOWN_CLASS else EXIT_OK


def cmd_iso(args) -> int:
    spec_a = load_spec(args.spec)
    if args.mode == "inverse":
        verdict = decide.inverse_isomorphic(spec_a)
    elif args.mode == "topo-inverse":
        verdict = polyiso.topo_inverse_iso(spec_a, depth=args.depth)
    else:
        if not args.spec2:
            raise RankOneError(f"mode {args.mode} needs --spec2")
        spec_b = load_spec(args.spec2)
        if args.mode == "measure":
            verdict = decide.commensurate_isomorphic(spec_a, spec_b)
        elif args.mode == "topo":
            verdict = polyiso.topo_iso_search(
                spec_a, spec_b, horizon=args.horizon, depth=args.depth, budget=args.budget
            )
        elif args.mode == "topo-commensurate":
            verdict = polyiso.commensurate_topo_iso(spec_a, spec_b)
        else:
            raise RankOneError(f"unknown mode {args.mode}")
    out = verdict.to_json()
    if "rider" in verdict.certificate:
        out["rider"] = verdict.certificate["rider"]
    _emit(out, args.format)
    return EXIT_UNKNOWN if verdict.value == decide.UNKNOWN else EXIT_OK


def cmd_simulate(args) -> int:
    spec = load_spec(args.spec)
    A = _parse_int_set(args.A) if args.A else (0,)
    B = _parse_int_set(args.B) if args.B else A
    m = args.m
    if args.subcmd == "corr":
        t_list = _parse_t_list(args.t)
        tower = simulate.Tower(spec, m, args.budget)
        rows = []
        for t in t_list:
            pt = simulate.correlation(spec, t, args.k, A, B, m, args.budget, tower=tower)
            rows.append(pt)
        if args.format == "csv":
            print("t,numerator,denominator,error_num,error_den")
            for pt in rows:
                print(
                    f"{pt.t},{pt.value.numerator},{pt.value.denominator},"
                    f"{pt.error_bound.numerator},{pt.error_bound.denominator}"
                )
        else:
            _emit(
                [
                    {"t": pt.t, "value": _frac_str(pt.value), "error": _frac_str(pt.error_bound)}
                    for pt in rows
                ],
                args.format,
            )
        return EXIT_OK
    if args.subcmd == "rigidity":
        t_list = _parse_t_list(args.t)
        entries = simulate.rigidity_scan(spec, args.k, A, t_list, m, budget=args.budget)
        _emit(
            [{"t": e.t, "value": _frac_str(e.value), "flagged": e.flagged} for e in entries],
            args.format,
        )
        return EXIT_OK
    if args.subcmd == "weaklimit":
        rep = simulate.weak_limit_check(spec, args.n, args.k, A, B, m, args.budget)
        _emit(
            {
                "n": rep.n,
                "t": rep.t,
                "r": rep.r,
                "theta": {str(k): _frac_str(v) for k, v in rep.theta.items()},
                "residual": _frac_str(rep.residual),
                "bound": _frac_str(rep.bound),
                "ok": rep.ok,
            },
            args.format,
        )
        return EXIT_OK
    if args.subcmd == "code":
        pts = simulate.sample_points(spec, args.k, m, args.count, seed=args.seed)
        window = tuple(int(x) for x in args.window.split(","))
        words = [simulate.symbolic_code(spec, args.k, pt, window, args.budget) for pt in pts]
        _emit({"seed": args.seed, "window": list(window), "words": words}, args.format)
        return EXIT_OK
    raise RankOneError(f"unknown simulate subcommand {args.subcmd}")


def cmd_transform(args) -> int:
    spec = load_spec(args.spec)
    extra = {}
    if args.which == "telescope":
        k = args.stride if args.stride else [int(v) for v in args.k.split(",")]
        out_spec = decide.telescope(spec, k)
    elif args.which == "adapted":
        res = spacers.adapted_transform(spec, depth=args.depth)
        out_spec = res.spec
        extra = {"stabilized": res.stabilized, "carry": res.carry}
    elif args.which == "expansive":
        if spec.is_cyclic:
            spec = decide.growing_telescope(spec, args.depth)
            extra["unrolled"] = "stride n at stage n"
        res = simulate.expansive_transform(spec)
        out_spec = res.spec
        extra.update(
            {
                "stages": [
                    {"n": es.n, "i": es.i, "r_star": es.r_star, "sigma_star": list(es.sigma_star)}
                    for es in res.stages
                ],
                "summability": _frac_str(res.summability),
                "expansive_ok": res.expansive_ok,
            }
        )
    elif args.which == "inverse":
        stages = decide.inverse_params(spec, args.depth)
        _emit(
            [
                {
                    "n": s.n,
                    "C": list(s.C),
                    "C_star": list(s.C_star),
                    "F_star": list(s.F_star),
                }
                for s in stages
            ],
            args.format,
        )
        return EXIT_OK
    else:
        raise RankOneError(f"unknown transform {args.which}")
    out = {"spec": params.spec_to_json(out_spec)}
    out.update(extra)
    _emit(out, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rankone", description=__doc__)
    p.add_argument("--format", choices=["json", "csv", "text"], default="json")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--horizon", type=int, default=8)
    p.add_argument("--budget", type=int, default=params.DEFAULT_BUDGET)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true", help="rescale measures to probability")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="conditions (I)-(III), measure, standardness")
    v.add_argument("--spec", required=True)
    v.add_argument("--n", type=int, default=1)
    v.add_argument("--g-range", type=int, default=2)
    v.set_defaults(func=cmd_validate)

    a = sub.add_parser("analyze", help="full classification with certificates")
    a.add_argument("--spec", required=True)
    a.set_defaults(func=cmd_analyze)

    i = sub.add_parser("iso", help="isomorphism tests")
    i.add_argument("--spec", required=True)
    i.add_argument("--spec2")
    i.add_argument(
        "--mode",
        choices=["measure", "topo", "inverse", "topo-inverse", "topo-commensurate"],
        default="measure",
    )
    i.set_defaults(func=cmd_iso)

    s = sub.add_parser("simulate", help="tower simulations")
    s.add_argument("subcmd", choices=["corr", "rigidity", "weaklimit", "code"])
    s.add_argument("--spec", required=True)
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--A", default="0")
    s.add_argument("--B", default="")
    s.add_argument("--t", default="0")
    s.add_argument("--m", type=int, default=8)
    s.add_argument("--count", type=int, default=8)
    s.add_argument("--window", default="0,32")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("transform", help="spec-to-spec transforms")
    t.add_argument("which", choices=["telescope", "adapted", "expansive", "inverse"])
    t.add_argument("--spec", required=True)
    t.add_argument("--stride", type=int, default=0)
    t.add_argument("--k", default="")
    t.set_defaults(func=cmd_transform)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RankOneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
