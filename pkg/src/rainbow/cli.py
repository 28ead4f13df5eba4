"""Command-line front end.

Every command prints one report document (JSON by default, CSV with
``--format csv``).  Exit codes: 0 affirmative, 1 definitive negative,
2 usage or validation error, 3 inconclusive.  Inputs and outputs use
1-based parts and values.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import matcher, nullstellensatz as cn, randmatch, report, sequences, spread
from .core import FamilySystem, InstanceParams, PerfectMatching, deserialize, random_family
from .errors import RainbowError

OK, NEGATIVE, USAGE, INCONCLUSIVE = 0, 1, 2, 3


class Outcome:
    """What a handler hands back to ``dispatch``."""

    def __init__(self, status: str, exit_code: int, result: dict, table=None):
        self.status = status
        self.exit_code = exit_code
        self.result = result
        self.table = table  # (header, rows) for CSV output


class UsageError(RainbowError):
    pass


# ------------------------------------------------------------------ inputs


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _values(text: str) -> list:
    try:
        return [sequences.parse_value(x.strip()) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a number or p/q, got {text!r}")


def load_system(path: str) -> FamilySystem:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return deserialize(text)


def load_family(args):
    """Family from ``--input``/``--family`` or a seeded random family from ``--alpha``."""
    if args.input is not None:
        system = load_system(args.input)
        if not 1 <= args.family <= len(system):
            raise UsageError(f"--family must lie in [1, {len(system)}]")
        return system.families[args.family - 1], system.params.s
    if args.alpha is None or args.n is None or args.k is None:
        raise UsageError("give an input document or --alpha with -n and -k")
    params = InstanceParams(args.n, args.k)
    if not 0 <= args.alpha <= 1:
        raise UsageError("--alpha must lie in [0, 1]")
    size = round(float(args.alpha) * params.cube_size)
    return random_family(params, size, randmatch.make_rng(args.seed)), args.s


def _params(args) -> InstanceParams:
    return InstanceParams(args.n, args.k, args.s)


def _sequence(args, params: InstanceParams) -> sequences.ThresholdSequence:
    if args.f is not None:
        values = args.f
        if getattr(args, "sort", False):
            return sequences.ThresholdSequence.sorted_from(values, params)
        return sequences.ThresholdSequence(tuple(values), params)
    if getattr(args, "kind", None):
        return sequences.SEQUENCE_KINDS[args.kind](params)
    raise UsageError("give a sequence with -f or --kind")


def _blocks(blocks, k):
    return [report.block_doc(b, k) if b is not None else None for b in blocks]


def _plot(args, name: str) -> Path | None:
    if not args.plot_dir:
        return None
    return Path(args.plot_dir) / name


# ---------------------------------------------------------------- matcher


def cmd_match(args) -> Outcome:
    system = load_system(args.input)
    stats = matcher.SearchStats()
    rm = matcher.find_rainbow(system, stats)
    k = system.params.k
    if rm is None:
        cert = {"kind": "exhaustive-search", "nodes": stats.nodes, "pruned": stats.pruned}
        return Outcome("NO-MATCHING", NEGATIVE, {"found": False, "matching": None, "certificate": cert})
    cert = {"kind": "verified-disjoint", "valid": matcher.is_rainbow(system, rm.assignment), "nodes": stats.nodes}
    rows = [(i + 1, json.dumps(report.block_doc(b, k))) for i, b in enumerate(rm.assignment)]
    return Outcome(
        "MATCHING-FOUND",
        OK,
        {"found": True, "matching": _blocks(rm.assignment, k), "certificate": cert},
        (["family", "block"], rows),
    )


def cmd_cross_dep(args) -> Outcome:
    system = load_system(args.input)
    dep = matcher.is_cross_dependent(system)
    return Outcome(
        "CROSS-DEPENDENT" if dep else "NOT-CROSS-DEPENDENT",
        OK if dep else NEGATIVE,
        {"cross_dependent": dep, "sizes": list(system.sizes)},
    )


def _load_matching(path: str, params: InstanceParams) -> PerfectMatching:
    doc = json.loads(Path(path).read_text())
    rows = doc["rows"] if isinstance(doc, dict) else doc
    return PerfectMatching.from_rows(params, [[v - 1 for v in row] for row in rows])


def cmd_hall(args) -> Outcome:
    system = load_system(args.input)
    p = system.params
    if args.matching:
        M = _load_matching(args.matching, p)
    else:
        M = randmatch.sample_matching(p, randmatch.make_rng(args.seed))
    cert = matcher.hall_certificate(system, M)
    result = {
        "matching": [[v + 1 for v in row] for row in M.rows],
        "certificate": {
            "kind": cert.kind,
            "sdr": {str(i + 1): report.block_doc(M.blocks[t], p.k) for i, t in sorted(cert.sdr.items())},
            "violating": [i + 1 for i in cert.violating],
            "neighborhood": [t + 1 for t in cert.neighborhood],
            "edges": {str(i + 1): [t + 1 for t in ts] for i, ts in sorted(cert.edges.items())},
        },
    }
    if cert.kind == "SDR":
        return Outcome("SDR", OK, result)
    return Outcome("HALL-VIOLATION", NEGATIVE, result)


def cmd_greedy(args) -> Outcome:
    system = load_system(args.input)
    rm = matcher.greedy_large_n(system)
    valid = matcher.is_rainbow(system, rm.assignment)
    return Outcome(
        "MATCHING-FOUND" if valid else "INVALID",
        OK if valid else NEGATIVE,
        {"found": valid, "matching": _blocks(rm.assignment, system.params.k), "certificate": {"valid": valid}},
    )


# -------------------------------------------------------------- sequences


def _seq_doc(f: sequences.ThresholdSequence) -> list[str]:
    return [sequences.format_value(x) for x in f]


def cmd_seq_make(args) -> Outcome:
    params = _params(args)
    if args.kind == "truncated":
        f = sequences.seq_truncated(params, C=args.C)
    else:
        f = sequences.SEQUENCE_KINDS[args.kind](params)
    rows = [(i + 1, v) for i, v in enumerate(_seq_doc(f))]
    return Outcome("OK", OK, {"kind": args.kind, "sequence": _seq_doc(f)}, (["index", "value"], rows))


def cmd_seq_construct(args) -> Outcome:
    params = _params(args)
    if args.claim == 1:
        system = sequences.construct_claim1(params, b=args.b - 1)
        expected = sequences.claim1_sizes(params)
    else:
        system = sequences.construct_claim3(params)
        expected = sequences.claim3_sizes(params)
    dep = matcher.is_cross_dependent(system)
    if args.emit_system:
        from .core import serialize

        Path(args.emit_system).write_text(serialize(system))
    result = {
        "claim": args.claim,
        "sizes": list(system.sizes),
        "expected_sizes": list(expected),
        "cross_dependent": dep,
        "system": system,
    }
    return Outcome("CROSS-DEPENDENT" if dep else "NOT-CROSS-DEPENDENT", OK if dep else NEGATIVE, result)


def cmd_seq_check(args) -> Outcome:
    system = load_system(args.input)
    f = _sequence(args, system.params)
    exceeds = sequences.exceeds(system, f)
    counter = sequences.is_counterexample_for(system, f)
    result = {"sequence": _seq_doc(f), "sizes": list(system.sizes), "exceeds": exceeds, "counterexample": counter}
    if counter:
        return Outcome("COUNTEREXAMPLE", NEGATIVE, result)
    return Outcome("NOT-A-COUNTEREXAMPLE", OK, result)


def cmd_seq_witness(args) -> Outcome:
    params = _params(args)
    f = _sequence(args, params)
    rep = sequences.witness_search(params, f, budget=args.budget, symmetry=not args.no_symmetry)
    result = {
        "sequence": _seq_doc(f),
        "nodes_explored": rep.nodes_explored,
        "symmetry_group_order": rep.symmetry_group_order,
        "witness": rep.witness,
    }
    code = {sequences.SATISFYING: OK, sequences.WITNESS: NEGATIVE}.get(rep.status, INCONCLUSIVE)
    return Outcome(rep.status, code, result)


# ----------------------------------------------------------------- random


def cmd_rand_sample(args) -> Outcome:
    params = InstanceParams(args.n, args.k)
    rng = randmatch.make_rng(args.seed)
    out, rows = [], []
    for c in range(args.count):
        M = randmatch.sample_matching(params, rng)
        out.append([[v + 1 for v in r] for r in M.rows])
        rows.extend((c + 1, json.dumps([v + 1 for v in r])) for r in M.rows)
    return Outcome("OK", OK, {"matchings": out}, (["sample", "tuple"], rows))


def cmd_rand_xi(args) -> Outcome:
    F, s = load_family(args)
    exact = True if args.exact else False if args.sampled else None
    st = randmatch.estimate_xi(F, s, trials=args.trials, seed=args.seed, exact=exact)
    rows = [(x, c) for x, c in sorted(st.histogram.items())]
    path = _plot(args, "xi_histogram.png")
    if path:
        from .plotting import plot_xi_histogram

        plot_xi_histogram(st, path, s)
    return Outcome("OK", OK, {"statistics": st, "s": s}, (["xi", "count"], rows))


def cmd_rand_conc(args) -> Outcome:
    F, _ = load_family(args)
    rep = randmatch.check_concentration(F, trials=args.trials, lambdas=tuple(args.lambdas), seed=args.seed)
    header = ["lam", "delta", "count", "frequency", "bound", "sigma", "flagged"]
    rows = [[getattr(r, h) for h in header] for r in rep.rows]
    path = _plot(args, "concentration.png")
    if path:
        from .plotting import plot_concentration

        plot_concentration(rep, path)
    status = "WITHIN-BOUND" if rep.ok else "BOUND-EXCEEDED"
    return Outcome(status, OK if rep.ok else NEGATIVE, {"report": rep, "flags": rep.flags}, (header, rows))


def cmd_rand_classify(args) -> Outcome:
    F, s = load_family(args)
    if s is None:
        raise UsageError("-s is required with --alpha")
    p = args.p
    if p is None:
        p = randmatch.estimate_xi(F, s, trials=args.trials, seed=args.seed).p_neq
    c = randmatch.classify_hyperplanes(F, p, s)
    rows = []
    for cc in c.coordinates:
        for a, count in enumerate(cc.counts):
            label = "fat" if a in cc.fat else "thin" if a in cc.thin else "-"
            rows.append((cc.coord + 1, a + 1, int(count), label, cc.case))
    path = _plot(args, "hyperplane_counts.png")
    if path:
        from .plotting import plot_hyperplane_counts

        plot_hyperplane_counts(c, path)
    result = {
        "p": p,
        "s": s,
        "cases": [cc.case for cc in c.coordinates],
        "fat_hyperplanes": [[i + 1, a + 1] for i, a in c.fat_hyperplanes],
        "fat_count": c.fat_count,
        "parallel": c.parallel,
        "violations": [i + 1 for i in c.violations],
        "hypothesis_part1": c.hypothesis_part1,
        "hypothesis_part23": c.hypothesis_part23,
        "below_one_fifth": c.below_one_fifth,
        "thresholds": {
            "fat": c.fat_threshold,
            "thin": c.thin_threshold,
            "bounded": c.bounded_threshold,
        },
    }
    bad = bool(c.violations)
    return Outcome(
        randmatch.VIOLATION if bad else "CLASSIFIED",
        NEGATIVE if bad else OK,
        result,
        (["coord", "value", "count", "label", "case"], rows),
    )


def cmd_rand_mixing(args) -> Outcome:
    from .core import Family, full_cube

    if args.k < 3:
        raise UsageError("mixing needs k >= 3")
    sub = InstanceParams(args.n, args.k - 1)
    cube = full_cube(sub).sorted_blocks
    exhaustive = len(cube) <= 12 and not args.samples
    rng = randmatch.make_rng(args.seed)
    families = []
    if exhaustive:
        for bits in range(1 << len(cube)):
            families.append(Family(sub, [b for i, b in enumerate(cube) if bits >> i & 1], check=False))
    else:
        for _ in range(args.samples or 200):
            families.append(random_family(sub, int(rng.integers(0, len(cube) + 1)), rng))
    rows, failures = [], 0
    for P in families:
        count = randmatch.disjoint_pair_count(P)
        bound = randmatch.mixing_bound(args.n, args.k, len(P))
        failures += count < bound
        rows.append((len(P), count, bound, count >= bound))
    path = _plot(args, "mixing.png")
    if path:
        from .plotting import plot_mixing

        plot_mixing([r[1] for r in rows], [r[2] for r in rows], path)
    result = {"exhaustive": exhaustive, "checked": len(rows), "failures": failures}
    table = (["size", "disjoint_pairs", "bound", "holds"], rows)
    return Outcome("HOLDS" if not failures else "VIOLATED", OK if not failures else NEGATIVE, result, table)


def cmd_rand_spreadlemma(args) -> Outcome:
    F, _ = load_family(args)
    rep = randmatch.spread_lemma_check(F, args.r, args.beta, args.delta, trials=args.trials, seed=args.seed)
    code = NEGATIVE if rep.status == randmatch.FAIL else OK
    return Outcome(rep.status, code, {"report": rep})


# ----------------------------------------------------------------- spread


def cmd_spread_check(args) -> Outcome:
    F, _ = load_family(args)
    ok, violator = spread.is_r_spread(F, args.r)
    result = {"spread": ok, "violator": None if violator is None else report.block_doc(violator)}
    return Outcome("SPREAD" if ok else "NOT-SPREAD", OK if ok else NEGATIVE, result)


def _approx_doc(approx, rep) -> dict:
    k = approx.source.params.k
    return {
        "cores": [report.block_doc(S) for S in approx.cores],
        "core_family_sizes": [len(A) for _, A in approx.entries],
        "residual_size": len(approx.residual),
        "stop_core": None if approx.stop_core is None else report.block_doc(approx.stop_core, k),
        "empty_core_selected": approx.empty_core_selected,
        "lemma": rep,
    }


def cmd_spread_approx(args) -> Outcome:
    F, _ = load_family(args)
    approx = spread.spread_approximate(F, args.r)
    rep = spread.check_approximation(F, approx)
    rows = [(json.dumps(report.block_doc(S)), len(A)) for S, A in approx.entries]
    return Outcome(
        "LEMMA-HOLDS" if rep.ok else "LEMMA-FAILED",
        OK if rep.ok else NEGATIVE,
        _approx_doc(approx, rep),
        (["core", "family_size"], rows),
    )


def cmd_spread_pipeline(args) -> Outcome:
    system = load_system(args.input)
    if args.s is not None and args.s != system.params.s:
        raise UsageError(f"-s {args.s} does not match the document (s={system.params.s})")
    res = spread.spread_pipeline(system, args.r)
    ok = all(r.ok for r in res.reports)

    def cores(collections):
        return [[report.block_doc(S) for S in c] for c in collections]

    result = {
        "approximations": [_approx_doc(a, r) for a, r in zip(res.approximations, res.reports)],
        "reduced": cores(res.reduced),
        "capped": cores(res.capped),
        "cores_cross_dependent": res.cores_cross_dependent,
        "cross_matching": None if res.cross_matching is None else cores([res.cross_matching])[0],
    }
    return Outcome("LEMMA-HOLDS" if ok else "LEMMA-FAILED", OK if ok else NEGATIVE, result)


# ------------------------------------------------------------ nullstellensatz


def cmd_cn_certify(args) -> Outcome:
    cert = cn.certify_sequence_k2(args.p, args.f)
    return Outcome("VALID" if cert.valid else "INVALID", OK if cert.valid else NEGATIVE, {"certificate": cert})


def cmd_cn_catalog(args) -> Outcome:
    certs = cn.catalog_certificates(args.s, args.p)
    rows = [(" ".join(map(str, c.f)), c.coefficient, c.valid, " ".join(map(str, c.satisfying_sequence))) for c in certs]
    path = _plot(args, "catalog.png")
    if path:
        from .plotting import plot_catalog

        plot_catalog(certs, path)
    result = {"certificates": certs, "valid_count": sum(c.valid for c in certs)}
    return Outcome("OK", OK, result, (["f", "coefficient", "valid", "sequence"], rows))


def cmd_cn_verify_field(args) -> Outcome:
    field = cn.QuadExtField(args.p, args.a) if args.a is not None else cn.QuadExtField.for_prime(args.p)
    rep = cn.verify_claim_zp(field)
    result = {"p": rep.p, "a": rep.a, "pairs": rep.pairs, "failures": [list(map(list, f)) for f in rep.failures]}
    return Outcome("VERIFIED" if rep.ok else "FAILED", OK if rep.ok else NEGATIVE, result)


# -------------------------------------------------------------- reproduce


def cmd_reproduce(args) -> Outcome:
    from .battery import run_battery

    rows = run_battery(args.seed, only=args.only)
    path = _plot(args, "battery.png")
    if path:
        from .plotting import plot_battery

        plot_battery(rows, path)
    passed = all(r.passed for r in rows)
    # wall-clock times stay out of the document so reruns are byte-identical
    table = [(r.name, "PASS" if r.passed else "FAIL", r.detail, r.limit) for r in rows]
    result = {
        "criteria": [{"name": r.name, "passed": r.passed, "detail": r.detail, "limit_seconds": r.limit} for r in rows],
        "passed": sum(r.passed for r in rows),
        "total": len(rows),
    }
    return Outcome("ALL-PASS" if passed else "FAILURES", OK if passed else NEGATIVE, result,
                   (["criterion", "result", "detail", "limit_seconds"], table))


# ----------------------------------------------------------------- parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=None, help="RNG seed (default: $RAINBOW_SEED or 0)")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--out", help="write the report here instead of stdout")
    g.add_argument("--plot-dir", help="directory for figures")
    g.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs are single-threaded")
    return p


def _nks(p, s_required=True):
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("-s", type=int, required=s_required, default=1)


def _family_source(p, need_s=False):
    p.add_argument("input", nargs="?", help="family-system document ('-' for stdin)")
    p.add_argument("--family", type=int, default=1, help="1-based family index in the document")
    p.add_argument("--alpha", type=_fraction, help="use a seeded random family of density alpha instead")
    p.add_argument("-n", type=int)
    p.add_argument("-k", type=int)
    p.add_argument("-s", type=int, default=None if need_s else 1)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="rainbow", description="Rainbow matchings in [n]^k.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def leaf(subparsers, name, func, help_):
        p = subparsers.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    for name, func, help_ in (
        ("match", cmd_match, "exact rainbow matching search"),
        ("cross-dep", cmd_cross_dep, "is the system cross-dependent"),
        ("greedy", cmd_greedy, "large-n greedy matcher"),
    ):
        leaf(sub, name, func, help_).add_argument("input")
    p = leaf(sub, "hall", cmd_hall, "Hall certificate for the graph of a perfect matching")
    p.add_argument("input")
    p.add_argument("--matching", help="JSON file with n rows of k 1-based values (default: seeded sample)")

    seq = sub.add_parser("seq", help="threshold sequences").add_subparsers(dest="sub", required=True)
    p = leaf(seq, "make", cmd_seq_make, "evaluate a sequence formula")
    _nks(p)
    p.add_argument("--kind", choices=sorted(sequences.SEQUENCE_KINDS), required=True)
    p.add_argument("--C", type=float, default=20.0, help="constant for --kind truncated")
    p = leaf(seq, "construct", cmd_seq_construct, "build a lower-bound construction")
    _nks(p)
    p.add_argument("--claim", type=int, choices=(1, 3), required=True)
    p.add_argument("--b", type=int, default=1, help="distinguished value for claim 1 (1-based)")
    p.add_argument("--emit-system", help="also write the constructed system document here")
    p = leaf(seq, "check", cmd_seq_check, "test a system against a sequence")
    p.add_argument("input")
    p.add_argument("-f", type=_values)
    p.add_argument("--kind", choices=sorted(sequences.SEQUENCE_KINDS))
    p = leaf(seq, "witness", cmd_seq_witness, "search for a counterexample to a sequence")
    _nks(p)
    p.add_argument("-f", type=_values)
    p.add_argument("--kind", choices=sorted(sequences.SEQUENCE_KINDS))
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--sort", action="store_true", help="sort -f into nondecreasing order first")
    p.add_argument("--no-symmetry", action="store_true")

    rnd = sub.add_parser("rand", help="random perfect matchings").add_subparsers(dest="sub", required=True)
    p = leaf(rnd, "sample", cmd_rand_sample, "sample perfect matchings")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p = leaf(rnd, "xi", cmd_rand_xi, "distribution of xi_F")
    _family_source(p)
    p.add_argument("--trials", type=int, default=10_000)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--sampled", action="store_true")
    p = leaf(rnd, "conc", cmd_rand_conc, "concentration tails against the bound")
    _family_source(p)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--lambdas", type=_ints, default=[1, 2, 4, 8])
    p = leaf(rnd, "classify", cmd_rand_classify, "fat/thin hyperplane classification")
    _family_source(p, need_s=True)
    p.add_argument("-p", type=_fraction, help="value of p_F (default: estimated)")
    p.add_argument("--trials", type=int, default=10_000)
    p = leaf(rnd, "mixing", cmd_rand_mixing, "disjoint pairs against the mixing bound")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--samples", type=int, default=0, help="random subsets (default: exhaustive when small)")
    p = leaf(rnd, "spreadlemma", cmd_rand_spreadlemma, "random-subset hitting probability")
    _family_source(p)
    p.add_argument("-r", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--trials", type=int, default=10_000)

    spr = sub.add_parser("spread", help="spreadness and spread approximations").add_subparsers(dest="sub", required=True)
    p = leaf(spr, "check", cmd_spread_check, "is the family r-spread")
    _family_source(p)
    p.add_argument("-r", type=float, required=True)
    p = leaf(spr, "approx", cmd_spread_approx, "spread approximation of one family")
    _family_source(p)
    p.add_argument("-r", type=float, required=True)
    p = leaf(spr, "pipeline", cmd_spread_pipeline, "approximate, degree-reduce and cap every family")
    p.add_argument("input")
    p.add_argument("-r", type=float, default=None)
    p.add_argument("-s", type=int, default=None, help="expected number of families")

    cnp = sub.add_parser("cn", help="polynomial certificates for k=2").add_subparsers(dest="sub", required=True)
    p = leaf(cnp, "certify", cmd_cn_certify, "certificate for one exponent vector")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-f", type=_ints, required=True)
    p = leaf(cnp, "catalog", cmd_cn_catalog, "all nondecreasing exponent vectors")
    p.add_argument("-s", type=int, required=True)
    p.add_argument("-p", type=int, required=True)
    p = leaf(cnp, "verify-field", cmd_cn_verify_field, "row/column test in F_p(alpha)")
    p.add_argument("-p", type=int, required=True)
    p.add_argument("-a", type=int, default=None, help="non-residue (default: smallest)")

    p = leaf(sub, "reproduce", cmd_reproduce, "run the reproduction battery")
    p.add_argument("--only", type=_ints, default=None, help="criterion numbers to run")
    return parser


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("RAINBOW_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"RAINBOW_SEED must be an integer, got {env!r}")
    return 0


def _config(args) -> dict:
    skip = {"func", "command", "sub"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def render(doc: dict, outcome: Outcome, fmt: str) -> str:
    if fmt == "json":
        return report.dumps(doc)
    if outcome.table is not None:
        header, rows = outcome.table
    else:
        header = ["key", "value"]
        rows = [(key, json.dumps(report.jsonable(v), sort_keys=True)) for key, v in sorted(outcome.result.items())]
    meta = f"# command={doc['command']} status={doc['status']} exit_code={doc['exit_code']} seed={doc['config']['seed']}\n"
    return meta + report.to_csv(header, rows)


def dispatch(argv=None) -> tuple[int, dict | None]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and USAGE, None
    try:
        args.seed = resolve_seed(args.seed)
        outcome = args.func(args)
    except (RainbowError, ValueError, KeyError, OSError) as exc:
        print(f"rainbow: error: {exc}", file=sys.stderr)
        return USAGE, None
    command = " ".join(x for x in (args.command, getattr(args, "sub", None)) if x)
    doc = report.jsonable(
        {
            "command": command,
            "config": _config(args),
            "status": outcome.status,
            "exit_code": outcome.exit_code,
            "result": outcome.result,
        }
    )
    report.validate_report(doc)
    text = render(doc, outcome, args.format)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return outcome.exit_code, doc


def main(argv=None) -> int:
    code, _ = dispatch(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
