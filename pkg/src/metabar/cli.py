"""Command line front end.

Exit codes: 0 pass, 1 mathematical failure, 2 input error, 3 resource refusal.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import __version__
from .bar import ResourceCapError, bar_homotopy, build_bar_complex, check_cap
from .complex import ChainMap, complex_to_json, is_homotopy, validate_complex
from .exactlinalg import matrix_to_json, ring_from_name
from .homology import homology, long_exact_sequence
from .metagroup import (
    MalformedTableError, parse_table_spec, psi_closure, substructures, table_from_json,
    table_to_json, validate_metagroup,
)

EXIT_OK, EXIT_MATH, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3
SCHEMA = "metabar-report/1"


class InputError(Exception):
    pass


def _load_table(src: str):
    """A table file path, or a generator spec such as ``cd:3``."""
    if os.path.exists(src):
        try:
            with open(src) as fh:
                return table_from_json(fh.read())
        except (ValueError, KeyError, TypeError, MalformedTableError) as exc:
            raise InputError(f"cannot read table {src}: {exc}") from exc
    try:
        return parse_table_spec(src)
    except ValueError as exc:
        raise InputError(f"{src!r} is neither a table file nor a valid spec: {exc}") from exc


def _ring(name: str):
    try:
        return ring_from_name(name)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _emit(args, text_lines: list[str], payload: dict):
    if args.format == "json":
        payload = {"schema": SCHEMA, **payload}
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args) -> int:
    try:
        T = parse_table_spec(args.spec)
    except ValueError as exc:
        raise InputError(f"invalid spec {args.spec!r}: {exc}") from exc
    rep = validate_metagroup(T)
    if not rep.ok:
        print(f"generated table fails validation: {rep.failures[0]}", file=sys.stderr)
        return EXIT_MATH
    text = table_to_json(T)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {T.order}-element table to {args.out}")
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    T = _load_table(args.table)
    rep = validate_metagroup(T)
    lines, payload = [], {"order": T.order, "seed": args.seed}
    if not rep.ok:
        axiom, witness, msg = rep.failures[0]
        lines.append(f"FAIL {axiom}: {msg} (witness {witness})")
        payload.update(ok=False, failures=[[a, repr(w), m] for a, w, m in rep.failures[:20]])
        _emit(args, lines, payload)
        return EXIT_MATH
    sub = substructures(T)
    psi = sorted(psi_closure(T))
    names = [T.name(g) for g in psi]
    if rep.is_associative:
        lines.append("associative; t3 trivial")
    else:
        lines.append(f"metagroup; t3 nontrivial; Psi = {{{', '.join(names)}}}")
    lines.append(f"order {T.order}; nontrivial associators {rep.nontrivial_associators} of {T.order ** 3}")
    lines.append(f"nucleus {len(sub.nucleus)}; centre {len(sub.center)}; commutant {len(sub.commutant)}")
    payload.update(ok=True, associative=rep.is_associative, nontrivial_associators=rep.nontrivial_associators,
                   psi=names, nucleus=len(sub.nucleus), center=len(sub.center),
                   commutant=len(sub.commutant), central_metagroup=rep.is_central_metagroup)
    _emit(args, lines, payload)
    return EXIT_OK


def cmd_homology(args) -> int:
    T = _load_table(args.table)
    ring = _ring(args.ring)
    if not validate_metagroup(T).ok:
        print("table is not a metagroup", file=sys.stderr)
        return EXIT_MATH
    try:
        check_cap(T, args.max_n)
    except ResourceCapError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    C = build_bar_complex(T, ring, args.max_n)
    dd = validate_complex(C)
    s = bar_homotopy(C, T)
    top = C.hi
    hom = is_homotopy(s, ChainMap.zero(C, C), ChainMap.identity(C), range(C.lo, top))
    groups = {n: homology(C, n) for n in C.degrees()}
    acyclic = all(groups[n].is_zero() for n in range(C.lo, top))
    lines = [f"bar complex of {args.table} over {ring}, degrees {C.lo}..{top}",
             f"dims: {' '.join(f'{n}:{d}' for n, d in C.dims().items())}",
             f"dd = 0: {'pass' if dd.ok else 'FAIL ' + repr(dd.failures[:3])}",
             f"ds + sd = 1 (degrees {C.lo}..{top - 1}): {'pass' if hom.ok else 'FAIL ' + repr(hom.failures[:3])}"]
    for n, H in groups.items():
        note = " (top of truncation)" if n == top else ""
        lines.append(f"H_{n} = {H}{note}")
    lines.append(f"augmented homology below the top vanishes: {'yes' if acyclic else 'NO'}")
    payload = {"table": args.table, "ring": ring.name, "max_n": args.max_n, "seed": args.seed,
               "dims": {str(n): d for n, d in C.dims().items()}, "dd_zero": dd.ok, "homotopy": hom.ok,
               "homology": {str(n): H.to_dict() for n, H in groups.items()}, "acyclic": acyclic}
    if args.emit:
        os.makedirs(args.emit, exist_ok=True)
        with open(os.path.join(args.emit, "complex.json"), "w") as fh:
            fh.write(complex_to_json(C) + "\n")
        for n in range(C.lo + 1, top + 1):
            with open(os.path.join(args.emit, f"d{n}.json"), "w") as fh:
                fh.write(matrix_to_json(C.diff(n)) + "\n")
        lines.append(f"matrices written to {args.emit}")
    _emit(args, lines, payload)
    return EXIT_OK if dd.ok and hom.ok and acyclic else EXIT_MATH


def cmd_les(args) -> int:
    from .suite import random_ses
    ring = _ring(args.ring)
    if not ring.is_field:
        raise InputError("the random sequence generator needs a prime field or Q")
    S = random_ses(random.Random(args.seed), ring, 0, 4, 6)
    L = long_exact_sequence(S)
    if args.format == "json":
        payload = {"schema": SCHEMA, "seed": args.seed, "ring": ring.name, "ok": L.ok,
                   "rows": [{k: (v if k != "witness" else repr(v)) for k, v in r.items()} for r in L.rows]}
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(f"random short exact sequence over {ring}, seed {args.seed}\n{L.to_text()}\n")
    return EXIT_OK if L.ok else EXIT_MATH


def cmd_suite(args) -> int:
    from .suite import CRITERIA, run_suite
    crit = None
    if args.criteria:
        try:
            crit = sorted({int(x) for x in args.criteria.split(",")})
        except ValueError as exc:
            raise InputError(f"bad criteria list {args.criteria!r}") from exc
        if any(c not in CRITERIA for c in crit):
            raise InputError(f"criteria must be among {sorted(CRITERIA)}")
    progress = None
    if args.verbose:
        def progress(res):
            print(res.line(), file=sys.stderr, flush=True)
    report = run_suite(args.seed, crit, fault=args.inject_fault, progress=progress)
    text = report.to_json() if args.format == "json" else report.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return EXIT_OK if report.ok else EXIT_MATH


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metabar", description="Bar complexes of metagroup algebras.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("-v", "--verbose", action="store_true")

    g = sub.add_parser("generate", help="write a generated metagroup table")
    g.add_argument("spec", help="cyclic:n, dihedral:n, quaternion8, cd:k or product:A,B")
    g.add_argument("--out", "-o")
    common(g)
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="check the metagroup axioms of a table")
    v.add_argument("table", help="table file or generator spec")
    common(v)
    v.set_defaults(func=cmd_verify)

    h = sub.add_parser("homology", help="build the bar complex and check its identities")
    h.add_argument("table", help="table file or generator spec")
    h.add_argument("--ring", default="Z", help="Z, Q or Fp:<p>")
    h.add_argument("--max-n", type=int, default=2)
    h.add_argument("--emit", help="directory for the complex and per-degree matrices")
    common(h)
    h.set_defaults(func=cmd_homology)

    le = sub.add_parser("les", help="long exact sequence of a seeded random short exact sequence")
    le.add_argument("--ring", default="Fp:5")
    common(le)
    le.set_defaults(func=cmd_les)

    s = sub.add_parser("suite", help="run the acceptance battery")
    s.add_argument("--out", "-o")
    s.add_argument("--criteria", help="comma separated subset, e.g. 1,3,12")
    s.add_argument("--inject-fault", action="store_true", help="corrupt one boundary entry")
    common(s)
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_n", 0) is not None and getattr(args, "max_n", 0) < 0:
        print("--max-n must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceCapError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
