"""Command-line entry point: ``spreadforge <subcommand> ...``.

Every subcommand prints one JSON document (or a text table for ``tables``)
on stdout.  Certification failures print a witness JSON on stderr and exit
with status 1; bad flags exit with status 2.  ``--manifest PATH`` records
what was run and the SHA-256 of every primary output, and ``--replay PATH``
reruns a manifest and compares digests.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from dataclasses import field as dc_field
from importlib import metadata
from pathlib import Path

import numpy as np

DEFAULT_SEED = 20240607
CHECKPOINT_ENV = "SPREADFORGE_CHECKPOINT_DIR"


class UsageError(Exception):
    pass


def _version() -> str:
    try:
        return metadata.version("spreadforge")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _plain(x):
    """JSON fallback for numpy scalars/arrays, tuples of ints and similar."""
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    return str(x)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_plain)


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class RunManifest:
    command: list
    q: int | None = None
    e: int | None = None
    field: dict | None = None
    form_gram: list | None = None
    seed: int = DEFAULT_SEED
    tool_version: str = ""
    wall_time: float = 0.0
    output_digests: dict = dc_field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2, default=_plain)


class Run:
    """Collects outputs of one invocation so their digests can go into the manifest."""

    def __init__(self, args):
        self.args = args
        self.outputs: dict[str, bytes] = {}

    def emit_file(self, path: str, text: str):
        data = text.encode()
        Path(path).write_bytes(data)
        self.outputs[os.path.basename(path)] = data


# -- subcommands -------------------------------------------------------------------

def cmd_field_check(run: Run) -> dict:
    from .gf import GF, check_field_axioms

    return {"fields": [check_field_axioms(GF(q)) for q in run.args.q]}


def cmd_geometry(run: Run) -> dict:
    from .gf import GF
    from .projgeom import gaussian_binomial, klein_form, klein_inverse, klein_map, space
    from .spreads import quadrangle
    from .spgraph import CertificationError

    q, n = run.args.q, run.args.n
    F = GF(q)
    P = space(n, F)
    out = {"q": q, "n": n, "points": P.num_points,
           "expected_points": gaussian_binomial(n + 1, 1, q)}
    if out["points"] != out["expected_points"]:
        raise CertificationError("point count mismatch", out)
    if n == 3:
        W = quadrangle(q)
        perp_ok = all(W.perp_line[W.perp_line[i]] == i for i in range(len(W.lines)))
        Q = klein_form(F)
        images = set()
        for l in W.lines:
            p = klein_map(l, F)
            if Q(p) != 0 or klein_inverse(p, F).basis != l.basis:
                raise CertificationError("Klein map is not a bijection onto the quadric", {"line": W.line_index[l]})
            images.add(p)
        out.update({"lines": len(W.lines), "isotropic_lines": len(W.w_lines),
                    "hyperbolic_pairs": len(W.pairs), "polarity_involution": perp_ok,
                    "klein_images": len(images)})
        if not perp_ok:
            raise CertificationError("line polarity is not an involution", {})
    return out


def cmd_graph(run: Run) -> dict:
    from .spgraph import CertificationError, build_sp_graph, sp_graph_params, srg_spectrum, to_graph6, verify_srg

    e, q = run.args.e, run.args.q
    g = build_sp_graph(e, q)
    p = verify_srg(g)
    expected = sp_graph_params(e, q)
    spectrum = srg_spectrum(p)
    out = {"e": e, "q": q, "params": list(p.astuple()), "expected": list(expected),
           "spectrum": spectrum.to_json(), "r_expected": q ** (e - 1) - 1, "s_expected": -q ** (e - 1) - 1}
    if p.astuple() != tuple(expected) or (spectrum.r, spectrum.s) != (out["r_expected"], out["s_expected"]):
        raise CertificationError("symplectic graph parameters differ from the formula", out)
    if run.args.emit:
        run.emit_file(run.args.emit, to_graph6(g) + "\n")
    return out


def cmd_spread(run: Run) -> dict:
    from .spreads import (SpecialSpread, build_symplectic_spread, construct_special_spread,
                          verify_special_spread, verify_symplectic_spread)

    a = run.args
    if a.action == "construct":
        _require(a, "q")
        s, trace = construct_special_spread(a.q, which=a.which)
        out = {"spread": s.to_json(), "construction": {
            "z_class": trace.z_class, "secants_through_z": trace.secants_through_z,
            "candidates_tried": trace.candidates_tried, "ovoid_size": len(trace.ovoid)}}
        if a.verify:
            out["verification"] = verify_special_spread(s)
    elif a.action == "symplectic":
        _require(a, "q", "e")
        r = build_symplectic_spread(a.e, a.q)
        out = {"spread": r.to_json()}
        if a.verify:
            out["verification"] = verify_symplectic_spread(r)
    else:
        if not a.file:
            raise UsageError("spread verify needs --file")
        s = SpecialSpread.from_json(json.loads(Path(a.file).read_text()))
        out = {"verification": verify_special_spread(s)}
    if a.emit and "spread" in out:
        run.emit_file(a.emit, dumps(out["spread"]) + "\n")
    return out


def _checkpoint_path(a) -> Path | None:
    if a.checkpoint:
        return Path(a.checkpoint)
    d = os.environ.get(CHECKPOINT_ENV)
    if d:
        return Path(d) / f"enumerate-q{a.q}-{a.mode}.json"
    return None


def _fix_pair_worker(job):
    from .exactcover import enumerate_special_spreads

    q, rep = job
    return enumerate_special_spreads(q, "fix_pair", reps=[rep])[0]


def cmd_enumerate(run: Run) -> dict:
    from .exactcover import Checkpoint, enumerate_special_spreads, total_from_fixed

    a = run.args
    if a.mode == "fix_pair":
        from .classify import disjoint_pair_representatives

        reps = disjoint_pair_representatives(a.q)
        jobs = [(a.q, tuple(r)) for r in reps]
        if a.threads > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=a.threads) as pool:
                per_rep = list(pool.map(_fix_pair_worker, jobs))
        else:
            per_rep = [_fix_pair_worker(j) for j in jobs]
        out = {"q": a.q, "mode": a.mode, "reps": [list(r) for r in reps], "counts": [len(s) for s in per_rep]}
        sols = [s for group in per_rep for s in group]
    else:
        ck_path = _checkpoint_path(a)
        resume = None
        if ck_path is not None and ck_path.exists():
            resume = Checkpoint.from_json(json.loads(ck_path.read_text()))

        def save(ck):
            ck_path.parent.mkdir(parents=True, exist_ok=True)
            ck_path.write_text(json.dumps(ck.to_json()))

        sols = enumerate_special_spreads(a.q, a.mode, max_solutions=a.max, resume=resume,
                                         on_checkpoint=save if ck_path is not None else None)
        out = {"q": a.q, "mode": a.mode, "count": len(sols), "resumed_from": resume.emitted if resume else 0}
        if a.mode == "fix_one" and a.max is None and resume is None:
            out["total_by_double_counting"] = total_from_fixed(a.q, len(sols))
    if a.emit:
        run.emit_file(a.emit, "".join(json.dumps(list(s)) + "\n" for s in sols))
    out["digest"] = sha256("".join(json.dumps(list(s)) + "\n" for s in sols).encode())
    return out


def _classes(q: int, deep: bool) -> tuple[list[dict], dict | None]:
    """Class rows for q: group orbits when q <= 5, characteristics for q = 7.

    For q = 7 stabilizer orders come from the fix_pair counts; --deep also
    enumerates each orbit and compares.  The second value is the census, if run.
    """
    from .classify import (ClassificationError, characteristic_census, characteristic_of_spread,
                           classify_spreads, group_generators, orbit_and_stabilizer, stabilizers_from_census)
    from .exactcover import build_spread_instance, enumerate_special_spreads, solve_all
    from .spreads import SpecialSpread

    if q <= 5:
        cl = classify_spreads(q, enumerate_special_spreads(q, "full"))
        return [{"stabilizer_order": c["stabilizer_order"], "orbit_size": c["orbit_size"],
                 "characteristic": c["characteristic"], "found": c["found"],
                 "representative": c["representative"]} for c in cl], None
    census = characteristic_census(q)
    stabs = stabilizers_from_census(q, census)
    rows = [{"characteristic": list(ch), "found": seen, "stabilizer_order": stabs[ch]}
            for ch, seen in sorted(census["characteristics"].items())]
    if deep:
        G = group_generators(q)
        inst = build_spread_instance(q)
        todo = {tuple(r["characteristic"]): r for r in rows}
        for rep in census["reps"]:
            for sol in solve_all(inst, rep):
                s = SpecialSpread.from_pairs(q, sol)
                row = todo.pop(tuple(characteristic_of_spread(s)), None)
                if row is not None:
                    orb = orbit_and_stabilizer(s, G, limit=None)
                    if orb.stabilizer_order != row["stabilizer_order"]:
                        raise ClassificationError(
                            f"orbit gives stabilizer {orb.stabilizer_order} for {row['characteristic']}, "
                            f"pair counts give {row['stabilizer_order']}")
                    row["orbit_size"] = orb.orbit_size
                    row["representative"] = list(s.pair_indices)
                if not todo:
                    break
            if not todo:
                break
    return rows, census


def cmd_classify(run: Run) -> dict:
    a = run.args
    if a.q not in (3, 5, 7):
        raise UsageError("classification is implemented for q in {3, 5, 7}")
    rows, census = _classes(a.q, a.deep)
    out = {"q": a.q, "classes": rows, "class_count": len(rows)}
    if census is not None:
        out["fix_pair"] = {"reps": census["reps"], "relations": census["relations"], "counts": census["counts"]}
        from .classify import ClassificationError, spreads_through_pair, total_spreads

        table = [(r["stabilizer_order"], r["characteristic"]) for r in rows]
        out["total"] = total_spreads(a.q, table)
        out["through_pair"] = spreads_through_pair(a.q, table)
        expected = dict(zip(census["relations"], census["counts"]))
        if any(out["through_pair"][k] != v for k, v in expected.items()):
            raise ClassificationError(f"class sizes contradict fix_pair counts: {out['through_pair']}")
    return out


def cmd_tables(run: Run) -> str:
    from .classify import relation_names

    a = run.args
    if a.q not in (3, 5, 7):
        raise UsageError("tables are available for q in {3, 5, 7}")
    rows, _ = _classes(a.q, a.deep)
    rows = sorted(rows, key=lambda r: (r["stabilizer_order"] or 0, r["characteristic"]))
    head = f"# q={a.q}  relations: {', '.join(relation_names(a.q))}"
    lines = [head, f"{'class':>5}  {'stabilizer':>10}  characteristic"]
    for i, r in enumerate(rows, 1):
        size = "-" if r["stabilizer_order"] is None else str(r["stabilizer_order"])
        lines.append(f"{i:>5}  {size:>10}  {r['characteristic']}")
    return "\n".join(lines) + "\n"


def _family_graph(a):
    from . import ddg
    from .spreads import build_symplectic_spread, construct_special_spread

    fam = a.family
    if fam in (1, 2):
        _require(a, "q")
        if a.q % 2 == 0:
            raise UsageError("families 1 and 2 need odd q")
        s, _ = construct_special_spread(a.q)
        if fam == 1:
            g, part = ddg.theorem1_graph(a.q, s)
            return g, part, ddg.theorem1_params(a.q)
        m = len(s.pairing)
        bits = _parse_bits(a.assignment, m) if a.assignment else [0] * m
        g, part = ddg.theorem2_graph(a.q, s, bits, variant=a.variant)
        return g, part, ddg.theorem2_params(a.q)
    _require(a, "q", "e")
    r = build_symplectic_spread(a.e, a.q)
    if fam == 3:
        g, part = ddg.theorem3_graph(a.e, a.q, r)
        return g, part, ddg.theorem3_params(a.e, a.q)
    if a.q % 2 == 0:
        raise UsageError("family 4 needs odd q")
    m = len(r.member_points)
    bits = _parse_bits(a.assignment, m) if a.assignment else ddg.default_balanced_assignment(m)
    g, part = ddg.theorem4_graph(a.e, a.q, r, bits, variant=a.variant)
    return g, part, ddg.theorem4_params(a.e, a.q)


def _ddg_report(g, part, expected, fam) -> dict:
    from .ddg import is_equitable, verify_ddg
    from .spgraph import CertificationError, to_graph6

    p = verify_ddg(g, part)
    out = {"family": fam, "params": list(p.astuple()), "expected": list(expected), "proper": p.proper,
           "graph6": to_graph6(g)}
    if part.m == 2:
        rep = is_equitable(g, part)
        out["equitable_quotient"] = rep.matrix
    if p.astuple() != tuple(expected):
        raise CertificationError("divisible design parameters differ from the formula", out)
    return out


def cmd_ddg(run: Run) -> dict:
    a = run.args
    g, part, expected = _family_graph(a)
    out = _ddg_report(g, part, expected, a.family)
    out.update({"q": a.q, "e": a.e, "variant": a.variant if a.family in (2, 4) else None})
    if a.emit:
        run.emit_file(a.emit, out["graph6"] + "\n")
    if not a.include_graph6:
        out.pop("graph6")
    return out


def cmd_census(run: Run) -> dict:
    from . import ddg
    from .spreads import SpecialSpread, construct_special_spread

    a = run.args
    reports = []
    families = [1, 2] if a.e is None else [3, 4]
    for fam in families:
        ns = argparse.Namespace(**vars(a))
        ns.family = fam
        ns.assignment = None
        ns.variant = "within"
        if fam == 4 and a.q % 2 == 0:
            continue
        g, part, expected = _family_graph(ns)
        rep = _ddg_report(g, part, expected, fam)
        rep.update({"q": a.q, "e": a.e})
        reports.append(rep)
    out = {"reports": reports}
    if a.isomorphs:
        if a.e is not None or a.q not in (3, 5):
            raise UsageError("--isomorphs applies to family 2 with q in {3, 5}")
        from .classify import classify_spreads
        from .exactcover import enumerate_special_spreads

        classes = classify_spreads(a.q, enumerate_special_spreads(a.q, "full"))
        per_spread, union = [], {}
        for c in classes:
            s = SpecialSpread.from_pairs(a.q, c["representative"])
            res = ddg.enumerate_theorem2_graphs(a.q, s)
            per_spread.append({"stabilizer_order": c["stabilizer_order"], "classes": res["classes"],
                               "assignment_orbits": res["assignments"]})
            for cf in res["forms"]:
                union.setdefault(cf, []).append(c["stabilizer_order"])
        out["theorem2_isomorphs"] = {
            "per_spread": per_spread, "union": len(union),
            "shared_across_spreads": sum(1 for v in union.values() if len(set(v)) > 1)}
    return out


# -- plumbing ----------------------------------------------------------------------

def _require(a, *names):
    missing = [n for n in names if getattr(a, n, None) is None]
    if missing:
        raise UsageError(f"missing --{', --'.join(missing)}")


def _parse_bits(text: str, m: int) -> list[int]:
    bits = [int(c) for c in text if c in "01"]
    if len(bits) != m or len(bits) != len(text.strip()):
        raise UsageError(f"--assignment needs exactly {m} characters from 0/1")
    return bits


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--deep", action="store_true", help="allow resource-heavy q=7 orbit work")
    common.add_argument("--manifest", help="write a run manifest to this path")

    p = argparse.ArgumentParser(prog="spreadforge", description=__doc__.splitlines()[0])
    p.add_argument("--replay", metavar="MANIFEST", help="rerun a manifest and compare output digests")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("field-check", parents=[common], help="exhaustive field axiom audit")
    s.add_argument("--q", type=int, nargs="+", default=[2, 3, 4, 5, 7, 8, 9])

    s = sub.add_parser("geometry", parents=[common], help="counts and polarity checks in PG(n,q)")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--n", type=int, default=3)

    s = sub.add_parser("graph", parents=[common], help="build and certify Sp(2e,q)")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--e", type=int, default=2)
    s.add_argument("--emit", help="graph6 output path")

    s = sub.add_parser("spread", parents=[common], help="construct or verify spreads")
    s.add_argument("action", choices=["construct", "symplectic", "verify"])
    s.add_argument("--q", type=int)
    s.add_argument("--e", type=int)
    s.add_argument("--which", type=int, default=0)
    s.add_argument("--verify", action="store_true")
    s.add_argument("--file")
    s.add_argument("--emit", help="spread JSON output path")

    s = sub.add_parser("enumerate", parents=[common], help="exact-cover enumeration of special spreads")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--mode", choices=["full", "fix_one", "fix_pair"], default="full")
    s.add_argument("--max", type=int)
    s.add_argument("--checkpoint", help=f"checkpoint file (default: ${CHECKPOINT_ENV}/...)")
    s.add_argument("--emit", help="JSONL output path")

    s = sub.add_parser("classify", parents=[common], help="equivalence classes of special spreads")
    s.add_argument("--q", type=int, required=True)

    s = sub.add_parser("tables", parents=[common], help="stabilizer orders and characteristics as a table")
    s.add_argument("--q", type=int, required=True)

    s = sub.add_parser("ddg", parents=[common], help="build and certify one divisible design graph")
    s.add_argument("--family", type=int, choices=[1, 2, 3, 4], required=True)
    s.add_argument("--q", type=int)
    s.add_argument("--e", type=int)
    s.add_argument("--variant", choices=["within", "partial"], default="within")
    s.add_argument("--assignment", help="side bits, one per spread pair (2) or member (4)")
    s.add_argument("--emit", help="graph6 output path")
    s.add_argument("--include-graph6", action="store_true")

    s = sub.add_parser("census", parents=[common], help="JSON report over all families")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--e", type=int)
    s.add_argument("--isomorphs", action="store_true", help="count family-2 graphs up to isomorphism")
    return p


COMMANDS = {
    "field-check": cmd_field_check, "geometry": cmd_geometry, "graph": cmd_graph, "spread": cmd_spread,
    "enumerate": cmd_enumerate, "classify": cmd_classify, "tables": cmd_tables, "ddg": cmd_ddg,
    "census": cmd_census,
}

def _failure_types():
    from .classify import ClassificationError
    from .ddg import ReconstructionError
    from .gf import FieldError
    from .spgraph import CertificationError

    return (CertificationError, ClassificationError, ReconstructionError, FieldError)


def _manifest_for(args, argv, wall: float, outputs: dict) -> RunManifest:
    from .gf import GF
    from .projgeom import SymplecticForm

    q = getattr(args, "q", None)
    e = getattr(args, "e", None)
    fld = form = None
    if isinstance(q, int):
        F = GF(q)
        fld = F.to_json()
        form = np.asarray(SymplecticForm.standard(e or 2, F).gram).tolist()
    return RunManifest(command=list(argv), q=q if isinstance(q, int) else None, e=e, field=fld,
                       form_gram=form, seed=args.seed, tool_version=_version(), wall_time=round(wall, 3),
                       output_digests={k: sha256(v) for k, v in sorted(outputs.items())})


def _execute(argv) -> tuple[int, RunManifest | None]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    if args.replay:
        return _replay(args.replay), None
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2, None
    if args.threads < 1:
        print("spreadforge: --threads must be positive", file=sys.stderr)
        return 2, None
    run = Run(args)
    t0 = time.perf_counter()
    try:
        result = COMMANDS[args.command](run)
    except UsageError as exc:
        print(f"spreadforge {args.command}: {exc}", file=sys.stderr)
        return 2, None
    except _failure_types() as exc:
        witness = getattr(exc, "witness", None)
        print(dumps({"status": "fail", "command": args.command, "error": type(exc).__name__,
                     "message": str(exc), "stage": getattr(exc, "stage", None), "witness": witness}),
              file=sys.stderr)
        return 1, None
    text = result if isinstance(result, str) else dumps(result) + "\n"
    sys.stdout.write(text)
    run.outputs["stdout"] = text.encode()
    manifest = _manifest_for(args, argv, time.perf_counter() - t0, run.outputs)
    if args.manifest:
        Path(args.manifest).write_text(manifest.to_json())
    return 0, manifest


def _replay(path: str) -> int:
    recorded = json.loads(Path(path).read_text())
    argv = [a for a in recorded["command"]]
    # drop the manifest flag so the replay does not overwrite the original
    if "--manifest" in argv:
        i = argv.index("--manifest")
        del argv[i:i + 2]
    code, manifest = _execute(argv)
    if code != 0 or manifest is None:
        return code or 1
    ok = manifest.output_digests == recorded["output_digests"]
    print(dumps({"replay": path, "identical": ok}), file=sys.stderr)
    return 0 if ok else 1


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    code, _ = _execute(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
