"""Command-line front end.

Exit status: 0 success, 1 failed assertions (verify/golden), 2 input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analyzer, classifier, ruled, verifier
from .errors import ExpressionSyntaxError, PminError
from .profile import SurfaceProfile

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


class InputError(Exception):
    pass


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def _grid_size(text):
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError(f"grid size must be at least 2, got {text}")
    return v


def _common(p: argparse.ArgumentParser, ns: int, nt: int, formats):
    p.add_argument("profile", help="profile document (JSON)")
    p.add_argument("--ns", type=_grid_size, default=ns, help=f"samples along rulings (default {ns})")
    p.add_argument("--nt", type=_grid_size, default=nt, help=f"samples across rulings (default {nt})")
    p.add_argument("--s-range", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--t-range", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--tol-singular", type=_positive(float), default=analyzer.TOL_SINGULAR,
                   help=f"singular residual tolerance (default {analyzer.TOL_SINGULAR:g})")
    p.add_argument("--tol-parallel", type=_positive(float), default=analyzer.EPS_PARALLEL,
                   help=f"|sin| below which projected rulings count as parallel "
                        f"(default {analyzer.EPS_PARALLEL:g})")
    p.add_argument("-o", "--output", help="write here instead of stdout")
    p.add_argument("--format", choices=formats, default=formats[0])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pmin", description="Ruled p-minimal surfaces in the Heisenberg group.")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("eval", help="tabulate surface points"), 11, 11, ["csv", "json"])
    _common(sub.add_parser("analyze", help="immersion, singular set, injectivity, properness"),
            200, 200, ["json"])
    _common(sub.add_parser("classify", help="helicoid type and canonical parameters"), 200, 200, ["json"])
    v = sub.add_parser("verify", help="Legendrian identity, graph-patch residual, worked examples")
    _common(v, 100, 100, ["json"])
    v.add_argument("--patch", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"),
                   help="also check the divergence equation on this xy-rectangle")
    v.add_argument("--h", type=_positive(float), default=1 / 32, help="coarsest patch spacing (default 1/32)")
    v.add_argument("--examples", help="directory of example profiles (default: bundled)")
    _common(sub.add_parser("mesh", help="export a triangle mesh"), 50, 50, ["obj", "csv"])
    g = sub.add_parser("golden", help="run every worked example")
    g.add_argument("--examples", help="directory of example profiles (default: bundled)")
    g.add_argument("-o", "--output")
    g.add_argument("--format", choices=["table", "json"], default="table")
    return ap


def _load_profile(args) -> SurfaceProfile:
    path = Path(args.profile)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        prof = SurfaceProfile.from_dict(doc, name=(doc.get("name") if isinstance(doc, dict) else None)
                                        or path.stem)
        if args.s_range or args.t_range:
            prof = prof.with_ranges(t_range=args.t_range, s_range=args.s_range)
    except ExpressionSyntaxError as exc:
        line = next((i for i, ln in enumerate(text.splitlines(), 1) if f'"{exc.key}"' in ln), 1)
        raise InputError(f"{path}:{line}: {exc}") from None
    except (PminError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None
    return prof


def _grid(args) -> analyzer.GridSpec:
    return analyzer.GridSpec(args.ns, args.nt,
                             tuple(args.s_range) if args.s_range else None,
                             tuple(args.t_range) if args.t_range else None)


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _emit(text: str, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_eval(args):
    prof = _load_profile(args)
    s, t, pts = ruled.surface_grid(prof, args.ns, args.nt, args.s_range, args.t_range)
    if args.format == "csv":
        return EXIT_OK, ruled.write_csv(s, t, pts)
    rows = [{"s": float(sv), "t": float(tv), "x": float(p[0]), "y": float(p[1]), "z": float(p[2])}
            for tv, row in zip(t, pts) for sv, p in zip(s, row)]
    return EXIT_OK, _dump({"profile": prof.name, "points": rows})


def cmd_analyze(args):
    prof = _load_profile(args)
    rep = analyzer.analyze(prof, _grid(args), tol_singular=args.tol_singular,
                           tol_parallel=args.tol_parallel)
    doc = rep.to_dict()
    doc["profile"] = prof.name
    return EXIT_OK, _dump(doc)


def cmd_classify(args):
    prof = _load_profile(args)
    doc = classifier.classify(prof).to_dict()
    doc["profile"] = prof.name
    return EXIT_OK, _dump(doc)


def cmd_verify(args):
    prof = _load_profile(args)
    s = np.linspace(*(args.s_range or prof.s_range), args.ns)
    t = np.linspace(*(args.t_range or prof.t_range), args.nt)
    leg = verifier.legendrian_residual(prof, s[None, :], t[:, None])
    doc = {"profile": prof.name,
           "legendrian": {"max_residual": leg.max_residual, "samples": leg.n_samples, "ok": leg.ok}}
    ok = leg.ok
    if args.patch:
        x0, x1, y0, y1 = args.patch
        patch = verifier.GraphPatch.from_profile(prof, (x0, x1), (y0, y1), args.h)
        try:
            res = verifier.pde_residual(patch)
        except PminError as exc:
            doc["pde"] = {"error": str(exc)}
            ok = False
        else:
            doc["pde"] = res.to_dict()
            if not res.exact_zero:
                good = all(3.5 <= r <= 4.5 for r in res.ratios)
                doc["pde"]["second_order"] = good
                ok = ok and good
    golden = verifier.golden_examples(args.examples)
    doc["golden"] = golden.to_dict()
    ok = ok and golden.passed
    return (EXIT_OK if ok else EXIT_FAILED), _dump(doc)


def cmd_mesh(args):
    prof = _load_profile(args)
    s, t, pts = ruled.surface_grid(prof, args.ns, args.nt, args.s_range, args.t_range)
    if args.format == "obj":
        return EXIT_OK, ruled.write_obj(pts)
    return EXIT_OK, ruled.write_csv(s, t, pts)


def cmd_golden(args):
    rep = verifier.golden_examples(args.examples)
    if args.format == "json":
        text = _dump(rep.to_dict())
    else:
        text = rep.table() + "\n"
        if rep.failures:
            text += "\nfailed: " + ", ".join(f"{a.example}/{a.name}" for a in rep.failures) + "\n"
    return (EXIT_OK if rep.passed else EXIT_FAILED), text


COMMANDS = {"eval": cmd_eval, "analyze": cmd_analyze, "classify": cmd_classify,
            "verify": cmd_verify, "mesh": cmd_mesh, "golden": cmd_golden}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        code, text = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"pmin: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"pmin: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PminError, ValueError) as exc:
        print(f"pmin: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(text, args.output)
    if code == EXIT_FAILED and args.output:
        print("pmin: assertions failed; see " + args.output, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
