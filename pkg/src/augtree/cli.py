"""Command-line front end: ``augtree <subcommand> ...``.

Exit codes: 0 success (including Inconclusive verdicts), 1 usage or input
error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import fixtures
from .analysis import dimension_from_table, disconnectedness_profile, hausdorff_dimension, lipschitz_report
from .classification import classify
from .errors import AugtreeError, InvariantViolation, SpecError
from .hyperbolic import build_near_isometry, horizontal_geodesic_bound, verify_near_isometry
from .quotient import build_quotient, degree_profile, has_coincidences, reduce_to_tree
from .rearrange import is_rearrangeable, load_matrices, wlog_power
from .report import document, dumps, render_text
from .similitude import IFS, load_ifs, parse_rational
from .tree import build_snapshot, to_dot


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def load_spec(ref: str) -> IFS:
    """A JSON path, or ``fixture:NAME`` for a bundled system."""
    if ref.startswith("fixture:"):
        name = ref.split(":", 1)[1]
        try:
            return fixtures.FIXTURES[name]()
        except KeyError:
            raise SpecError(f"unknown fixture {name!r}; choose from {sorted(fixtures.FIXTURES)}") from None
    try:
        return load_ifs(ref)
    except OSError as exc:
        raise SpecError(f"cannot read {ref}: {exc.strerror}") from None


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _spec_with_kappa(args) -> IFS:
    spec = load_spec(args.spec)
    if args.kappa is not None:
        spec = spec.with_kappa(parse_rational(args.kappa))
    return spec


def _snapshot(args, spec=None):
    spec = spec or _spec_with_kappa(args)
    snap = build_snapshot(spec, args.depth, mode=args.mode, cap=args.max_vertices)
    if args.quotient == "on" or (args.quotient == "auto" and has_coincidences(snap)):
        snap = build_quotient(snap)
    return snap


def _common(p, depth=6, quotient="auto"):
    p.add_argument("--depth", type=int, default=depth, help=f"levels to build (default {depth})")
    p.add_argument("--kappa", help="edge constant as p/q (overrides the system file)")
    p.add_argument("--mode", choices=("hull", "certified"), default="hull")
    q = p.add_mutually_exclusive_group()
    q.add_argument("--quotient", dest="quotient", action="store_const", const="on", default=quotient,
                   help="identify coincident words (default: only when coincidences exist)")
    q.add_argument("--no-quotient", dest="quotient", action="store_const", const="off")
    p.add_argument("--max-vertices", type=int, default=None, help="per-level cap (env AUGTREE_MAX_VERTICES)")


def _output(p, formats=("json", "text")):
    p.add_argument("--format", choices=formats, default="json")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")
    p.add_argument("--no-metadata", action="store_true", help="omit the version metadata block")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="augtree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", help="snapshot statistics")
    p.add_argument("spec")
    _common(p, quotient="off")
    p.add_argument("--view", choices=("augmented", "vertical", "reduced"), default="augmented")
    _output(p, ("json", "text", "dot"))

    p = sub.add_parser("components", help="horizontal components per level")
    p.add_argument("spec")
    _common(p, depth=3, quotient="off")
    p.add_argument("--level", type=int, help="only this level")
    _output(p)

    p = sub.add_parser("classify", help="component and vertex classes with A, B, u")
    p.add_argument("spec")
    _common(p)
    p.add_argument("--window", type=int, default=3)
    _output(p)

    p = sub.add_parser("rearrange", help="(B,u)-rearrangeability with certificates")
    p.add_argument("spec", nargs="?")
    p.add_argument("--matrices", help="JSON file with A, B, u")
    _common(p)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--k-max", type=int, default=6)
    _output(p)

    p = sub.add_parser("quotient", help="quotient space, reduced tree and degree profiles")
    p.add_argument("spec")
    _common(p, depth=4, quotient="on")
    p.add_argument("--view", choices=("augmented", "vertical", "reduced"), default="reduced")
    _output(p, ("json", "text", "dot"))

    p = sub.add_parser("near-isometry", help="build and verify the near-isometry onto the reduced tree")
    p.add_argument("spec")
    _common(p)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--verify-depth", type=int, default=5)
    p.add_argument("--pairs", action="store_true", help="include the sigma table")
    _output(p)

    p = sub.add_parser("dimension", help="Hausdorff dimension from a spectral radius")
    p.add_argument("spec", nargs="?", help="with --from-A: use the class table's A")
    p.add_argument("--matrix", help="JSON file holding a square matrix (or {'matrix': ...})")
    p.add_argument("--ratio", help="contraction ratio r as p/q")
    p.add_argument("--from-A", action="store_true")
    _common(p)
    p.add_argument("--window", type=int, default=3)
    _output(p)

    p = sub.add_parser("disconnected", help="max component size per level")
    p.add_argument("spec")
    _common(p)
    _output(p)

    p = sub.add_parser("equivalence", help="Lipschitz-equivalence report for two systems")
    p.add_argument("spec")
    p.add_argument("spec2")
    _common(p)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--matrix1", help="finite-type matrix for the first system")
    p.add_argument("--matrix2", help="finite-type matrix for the second system")
    _output(p)
    return parser


# -- subcommand bodies ---------------------------------------------------------

def cmd_build(args):
    snap = _snapshot(args)
    if args.format == "dot":
        return to_dot(snap if args.view != "reduced" else reduce_to_tree(snap), args.view)
    snap.check_invariants()
    return snap.summary()


def cmd_components(args):
    snap = _snapshot(args)
    levels = range(snap.depth + 1) if args.level is None else [args.level]
    out = {}
    for n in levels:
        if not 0 <= n <= snap.depth:
            raise UsageError(f"level {n} outside 0..{snap.depth}")
        out[str(n)] = [snap.component_words(c) for c in snap.components(n)]
    return {"quotient": snap.quotient, "components": out}


def cmd_classify(args):
    table = classify(_snapshot(args), args.window)
    return table.to_json()


def cmd_rearrange(args):
    if args.matrices:
        A, B, u = load_matrices(_load_json(args.matrices))
        source = {"matrices": args.matrices}
    elif args.spec:
        table = classify(_snapshot(args), args.window)
        if not table.simple:
            return {"verdict": None, "class_table": table.to_json(), "reason": "class table is not simple"}
        A, B, u = table.A, table.B, table.u
        source = {"spec": args.spec, "wlog_power": wlog_power(table, args.k_max)}
    else:
        raise UsageError("rearrange needs a spec or --matrices")
    verdict = is_rearrangeable(A, B, u, args.k_max)
    return {"source": source, "A": [list(r) for r in A], "B": [list(r) for r in B], "u": [list(r) for r in u],
            "verdict": verdict.to_json()}


def cmd_quotient(args):
    spec = _spec_with_kappa(args)
    raw = build_snapshot(spec, args.depth, mode=args.mode, cap=args.max_vertices)
    q = build_quotient(raw)
    if args.format == "dot":
        return to_dot(reduce_to_tree(q) if args.view == "reduced" else q, args.view)
    merged = [
        {"level": v.level, "members": [q.label(v.id)]}
        for v in q.vertices
        if len(v.words) > 1
    ]
    return {
        "level_sizes_raw": [len(ids) for ids in raw.levels],
        "level_sizes_quotient": [len(ids) for ids in q.levels],
        "identified": merged[:200],
        "identified_total": len(merged),
        "degree_raw": degree_profile(raw).to_json(),
        "degree_quotient": degree_profile(q).to_json(),
        "certified": spec.exact,
    }


def cmd_near_isometry(args):
    snap = _snapshot(args)
    table = classify(snap, args.window)
    if not table.simple:
        return {"status": "NotStabilized", "class_table": table.to_json()}
    verdict = is_rearrangeable(table.A, table.B, table.u, args.k_max)
    if not verdict.ok:
        return {"status": "NotRearrangeable", "verdict": verdict.to_json()}
    k = verdict.power
    if k > 1:
        snap = snap.subsample(k)
        table = classify(snap, min(args.window, max(1, snap.depth - 2)))
        verdict = is_rearrangeable(table.A, table.B, table.u, 1)
        if not (table.simple and verdict.ok):
            return {"status": "Inconclusive", "reason": f"k={k} step snapshot did not yield power-1 certificates"}
    nim = build_near_isometry(table, verdict.certificates)
    report = verify_near_isometry(nim, args.verify_depth)
    out = {
        "status": "Verified",
        "step": snap.step,
        "wlog_power": wlog_power(table, args.k_max),
        "horizontal_bound": horizontal_geodesic_bound(snap, args.verify_depth).to_json(),
        "verification": report.to_json(),
    }
    if args.pairs:
        out["sigma"] = nim.to_json()
    return out


def cmd_dimension(args):
    if args.from_A:
        if not args.spec:
            raise UsageError("--from-A needs a spec")
        table = classify(_snapshot(args), args.window)
        return dimension_from_table(table).to_json()
    if not (args.matrix and args.ratio):
        raise UsageError("dimension needs --matrix and --ratio (or a spec with --from-A)")
    data = _load_json(args.matrix)
    M = data["matrix"] if isinstance(data, dict) else data
    return hausdorff_dimension(M, parse_rational(args.ratio)).to_json()


def cmd_disconnected(args):
    snap = _snapshot(args)
    return {"quotient": snap.quotient, **disconnectedness_profile(snap).to_json()}


def cmd_equivalence(args):
    s1 = _spec_with_kappa(args)
    s2 = load_spec(args.spec2)
    if args.kappa is not None:
        s2 = s2.with_kappa(parse_rational(args.kappa))
    matrices = None
    if args.matrix1 or args.matrix2:
        def grab(path):
            if not path:
                return None
            data = _load_json(path)
            return data["matrix"] if isinstance(data, dict) else data
        matrices = (grab(args.matrix1), grab(args.matrix2))
    report = lipschitz_report(s1, s2, depth=args.depth, window=args.window, k_max=args.k_max,
                              matrices=matrices, mode=args.mode)
    return report.to_json()


COMMANDS = {
    "build": cmd_build,
    "components": cmd_components,
    "classify": cmd_classify,
    "rearrange": cmd_rearrange,
    "quotient": cmd_quotient,
    "near-isometry": cmd_near_isometry,
    "dimension": cmd_dimension,
    "disconnected": cmd_disconnected,
    "equivalence": cmd_equivalence,
}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "depth", 1) is not None and getattr(args, "depth", 1) < 1:
            raise UsageError("--depth must be at least 1")
        payload = COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"augtree: internal invariant violated: {exc}", file=sys.stderr)
        return 2
    except (AugtreeError, ValueError) as exc:
        print(f"augtree: {exc}", file=sys.stderr)
        return 1
    if isinstance(payload, str):
        text = payload
    elif args.format == "text":
        text = render_text(args.command, payload)
    else:
        text = dumps(document(args.command, payload, not args.no_metadata))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
