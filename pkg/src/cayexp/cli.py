"""Command-line interface.

Exit codes: 0 success, 2 parse error, 3 non-solvable input with
--require-solvable, 4 certification failure, 5 non-symmetric multiset,
6 group too large for exact verification without --sampled. Diagnostics go
to stderr, data to files or stdout. Re-running a command with identical
inputs produces byte-identical output files; manifests differ only in their
timing fields.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

from .bsgs import schreier_sims
from .carriers import PermCarrier
from .combine import SolvabilityError, solvable_expander
from .epsbias import format_bias_space, verify_bias, zdn_bias_space
from .general import general_expander
from .multiset import (NonSymmetricError, format_perm_multiset,
                       parse_perm_multiset)
from .perm import ParseError, parse_group_file
from .series import derived_series, dixon_bound
from .spectra import ITER_CAP, FORMAT_VERSION, second_eigenvalue

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NOT_SOLVABLE = 3
EXIT_CERT_FAIL = 4
EXIT_NOT_SYMMETRIC = 5
EXIT_TOO_LARGE = 6


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_manifest(out: Path, command: str, parameters: dict,
                    inputs: list[Path], outputs: list[Path],
                    certificates: list[dict], t0: float) -> None:
    manifest = {
        "format_version": FORMAT_VERSION,
        "command": command,
        "parameters": parameters,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "certificates": certificates,
        "timings": {"wall_seconds": round(time.time() - t0, 6)},
    }
    out.write_text(_dump_json(manifest))


def cmd_build_expander(args) -> int:
    t0 = time.time()
    group_path = Path(args.group)
    try:
        gens = parse_group_file(group_path.read_text())
    except (OSError, ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    chain = derived_series(gens)
    use_solvable = chain.solvable if not args.solvable else True
    if args.require_solvable and not chain.solvable:
        print("error: group is not solvable (derived series stabilizes at "
              f"order {chain.orders[-1]})", file=sys.stderr)
        return EXIT_NOT_SOLVABLE
    if args.solvable and not chain.solvable:
        print("error: --solvable given but the group is not solvable",
              file=sys.stderr)
        return EXIT_NOT_SOLVABLE
    try:
        if use_solvable and chain.solvable:
            ms = solvable_expander(gens, target=args.lam)
        else:
            ms = general_expander(gens, lam=args.lam, mode=args.mode)
    except SolvabilityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_SOLVABLE
    carrier = PermCarrier.of(gens)
    report = second_eigenvalue(carrier, ms)
    ok = report.lambda2 <= args.lam + report.tolerance
    out = Path(args.out)
    out.write_text(format_perm_multiset(ms, gens.degree))
    cert = dict(report.as_dict(), certified_target=args.lam)
    cert_path = out.with_suffix(out.suffix + ".cert.json")
    cert_path.write_text(_dump_json(cert))
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"),
                    "build-expander",
                    {"lambda": args.lam, "mode": args.mode,
                     "solvable": use_solvable},
                    [group_path], [out, cert_path], [cert], t0)
    if args.json:
        print(_dump_json(cert), end="")
    else:
        print(f"lambda2 = {report.lambda2:.6g} (target {args.lam}) "
              f"size = {ms.total}")
    if not ok:
        print(f"error: certification failed: lambda2 = {report.lambda2} > "
              f"{args.lam}", file=sys.stderr)
        return EXIT_CERT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        gens = parse_group_file(Path(args.group).read_text())
        degree, ms = parse_perm_multiset(Path(args.multiset).read_text())
    except (OSError, ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if degree != gens.degree:
        print("error: degree mismatch between group and multiset",
              file=sys.stderr)
        return EXIT_PARSE
    carrier = PermCarrier.of(gens)
    if not ms.is_symmetric(carrier.inv):
        print("error: multiset is not symmetric (inverse-closed)",
              file=sys.stderr)
        return EXIT_NOT_SYMMETRIC
    if carrier.order > ITER_CAP:
        if not args.sampled:
            print(f"error: group order {carrier.order} exceeds the exact "
                  f"verification cap; re-run with --sampled", file=sys.stderr)
        else:
            print("error: sampled verification covers abelian character "
                  "sums only; no estimator exists for permutation groups "
                  f"of order {carrier.order}", file=sys.stderr)
        return EXIT_TOO_LARGE
    try:
        report = second_eigenvalue(carrier, ms)
    except NonSymmetricError:
        return EXIT_NOT_SYMMETRIC
    verdict = (args.target is None
               or report.lambda2 <= args.target + report.tolerance)
    payload = dict(report.as_dict(), certified_target=args.target,
                   verdict=bool(verdict))
    if args.json:
        print(_dump_json(payload), end="")
    else:
        print(f"lambda2 = {report.lambda2:.6g} method = {report.method} "
              f"verdict = {'pass' if verdict else 'FAIL'}")
    return EXIT_OK if verdict else EXIT_CERT_FAIL


def cmd_series(args) -> int:
    try:
        gens = parse_group_file(Path(args.group).read_text())
    except (OSError, ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    chain = derived_series(gens)
    bound = dixon_bound(gens.degree)
    payload = {
        "orders": list(chain.orders),
        "length": chain.length,
        "solvable": chain.solvable,
        "dixon_bound": bound,
        "dixon_ok": (not chain.solvable) or chain.length <= bound,
    }
    if args.json:
        print(_dump_json(payload), end="")
    else:
        arrow = " > ".join(str(o) for o in chain.orders)
        print(f"derived series orders: {arrow}")
        print(f"solvable: {str(chain.solvable).lower()}, length "
              f"{chain.length} <= {bound}: "
              f"{str(payload['dixon_ok']).lower()}")
    return EXIT_OK


def cmd_epsbias(args) -> int:
    t0 = time.time()
    try:
        space = zdn_bias_space(args.d, args.n, args.eps)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    out = Path(args.out)
    out.write_text(format_bias_space(space))
    side = dict(space.sidecar(), format_version=FORMAT_VERSION)
    side_path = out.with_suffix(out.suffix + ".json")
    side_path.write_text(_dump_json(side))
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"),
                    "epsbias",
                    {"d": args.d, "n": args.n, "eps": args.eps},
                    [], [out, side_path], [side], t0)
    if args.json:
        print(_dump_json(side), end="")
    else:
        print(f"size = {space.size} certified_eps = "
              f"{space.certified_eps:.6g}")
    if args.verify:
        v = verify_bias(space)
        print(f"verified bias = {v:.6g}")
        if v > space.certified_eps + 1e-9:
            return EXIT_CERT_FAIL
    return EXIT_OK


def cmd_bsgs(args) -> int:
    try:
        gens = parse_group_file(Path(args.group).read_text())
    except (OSError, ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    b = schreier_sims(gens)
    payload = {
        "order": b.order(),
        "base": [p + 1 for p in b.base],
        "strong_generators": len(b.strong_gens()),
        "orbit_sizes": [len(lv.transversal) for lv in b.levels],
    }
    if args.json:
        print(_dump_json(payload), end="")
    else:
        print(f"order = {payload['order']} base = {payload['base']} "
              f"strong generators = {payload['strong_generators']}")
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="cayexp",
        description="certified expanding generating sets for permutation "
                    "groups and eps-bias spaces")
    sub = ap.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("build-expander",
                       help="construct a certified expanding multiset")
    b.add_argument("--group", required=True)
    b.add_argument("--lambda", dest="lam", type=float, default=0.25)
    b.add_argument("--mode", choices=["adaptive", "analytic"],
                   default="adaptive")
    b.add_argument("--solvable", action="store_true",
                   help="force the solvable pipeline")
    b.add_argument("--require-solvable", action="store_true")
    b.add_argument("--out", required=True)
    b.add_argument("--json", action="store_true")
    b.set_defaults(fn=cmd_build_expander)

    v = sub.add_parser("verify", help="re-verify a multiset file")
    v.add_argument("--group", required=True)
    v.add_argument("--multiset", required=True)
    v.add_argument("--target", type=float, default=None)
    v.add_argument("--sampled", action="store_true")
    v.add_argument("--json", action="store_true")
    v.set_defaults(fn=cmd_verify)

    s = sub.add_parser("series", help="print the derived series")
    s.add_argument("--group", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(fn=cmd_series)

    e = sub.add_parser("epsbias", help="construct an eps-bias space")
    e.add_argument("--d", type=int, required=True)
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--eps", type=float, required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--verify", action="store_true")
    e.add_argument("--json", action="store_true")
    e.set_defaults(fn=cmd_epsbias)

    g = sub.add_parser("bsgs", help="base and strong generating set summary")
    g.add_argument("--group", required=True)
    g.add_argument("--json", action="store_true")
    g.set_defaults(fn=cmd_bsgs)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
