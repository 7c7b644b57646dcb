"""Command-line front end.

Subcommands:

  simulate    sample conditioned trees over an n-grid, emit per-replicate
              statistics as CSV (optionally with figures)
  scaling     tabulate a_n, b_n, h_n, V(b_n) as CSV
  verify      run a named self-check suite (bijections, oracle-tv,
              width-not-fat); exit 1 on failure
  construct   build a short-fat offspring law, emit its loadable JSON spec
              with construction metadata
  stochorder  exact expected heights for two degree sequences, with the
              skewness order checked

Exit codes: 0 success, 1 suite failure, 2 configuration error.
Replicate r of an experiment draws from the Philox stream keyed by
(seed, r), so output files are byte-identical across reruns and
scheduling orders.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from collections import Counter
from fractions import Fraction

import numpy as np

from . import construct as construct_mod
from . import dist as dist_mod
from . import foata, paths, report, sample, scaling, tree
from .rng import stream


def _load_dist_arg(text: str) -> dist_mod.OffspringDist:
    if text.strip().startswith("{"):
        return dist_mod.load_spec(text)
    if os.path.exists(text):
        with open(text) as fh:
            return dist_mod.load_spec(fh.read())
    raise dist_mod.DistError(f"--dist argument {text!r} is neither JSON nor a file")


def _parse_n_list(text: str) -> list[int]:
    out = [int(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    if not out or any(x < 1 for x in out):
        raise ValueError("--n needs a comma-separated list of positive sizes")
    return out


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _tree_stats(t: tree.PlaneTree):
    h = tree.height(t)
    w, _ = tree.width_profile(t)
    delta, v = tree.max_degree(t)
    spine = int(t.depths()[v])
    return h, w, delta, spine


def cmd_simulate(args) -> int:
    d = _load_dist_arg(args.dist)
    ns = _parse_n_list(args.n)
    rows: list[report.StatsRow] = []
    per_n = {}
    for n in ns:
        a = scaling.a_n(d, n)
        b = scaling.b_n(d, n, a) if d.is_critical else math.nan
        try:
            h = scaling.h_n(d, n)
        except ValueError:
            h = math.nan
        per_n[n] = (a, b, h)
    for n in ns:
        a, b, h = per_n[n]
        for r in range(args.reps):
            rng = stream(args.seed, r)
            if args.sampler == "exact":
                out = sample.sample_Tn_exact(d, n, rng, max_tries=args.max_tries,
                                             seed=args.seed)
            else:
                out = sample.sample_Tn_prime(d, n, rng, seed=args.seed)
            ht, wd, delta, spine = _tree_stats(out.tree)
            rows.append(report.StatsRow(
                experiment=args.experiment, n=n, replicate=r, seed=args.seed,
                height=ht, width=wd, max_degree=delta, spine_depth=spine,
                a_n=a, b_n=b, h_n=h,
                ratio_height=(ht / h) if h and not math.isnan(h) else math.nan,
                ratio_width=(wd / b) if b and not math.isnan(b) else math.nan,
                sampler=out.sampler_tag, tries=out.tries))
    rep = report.stats_report(rows)
    rep.write(args.out)
    if args.figdir:
        for p in report.render_simulate_figures(rows, args.figdir):
            print(f"figure: {p}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------

def cmd_scaling(args) -> int:
    d = _load_dist_arg(args.dist)
    ns = _parse_n_list(args.n)
    table = scaling.scaling_table(d, ns)
    rep = report.CsvReport(table.CSV_HEADER.split(","))
    for r in table.rows:
        rep.add([r.n, r.a, r.b, r.h if r.h_defined else None,
                 r.v_of_b if not math.isnan(r.v_of_b) else None])
    rep.write(args.out)
    if args.figdir:
        for p in report.render_scaling_figures(table, args.figdir):
            print(f"figure: {p}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

def _all_trees(n: int):
    for degs in sample._excursion_degree_seqs(n):
        yield tree.PlaneTree.from_bfs_degrees(np.array(degs))


def _suite_bijections(reporter) -> None:
    for n in range(1, 9):
        for t in _all_trees(n):
            for order in ("lex", "bfs"):
                p = paths.encode(t, order)
                assert paths.classify(p.values) is paths.PathKind.EXCURSION
                assert paths.decode(p, order) == t
        reporter(f"codec round trip n={n}", True)
    # every bridge rotates to an excursion; each excursion has n preimages
    for n in range(2, 8):
        exc_count = 0
        per_exc = Counter()
        for t in _all_trees(n):
            exc_count += 1
            e = paths.encode(t, "lex")
            inc = e.increments
            seen = set()
            for m in range(n):
                rot = np.concatenate([inc[m:], inc[:m]])
                b = paths.LatticePath.from_increments(rot)
                out, _ = paths.vervaat(b)
                assert out == e or tuple(rot) != tuple(e.increments)
                seen.add(bytes(rot))
                per_exc[bytes(e.increments)] += 0
            v, _ = paths.vervaat(paths.LatticePath.from_increments(inc))
            assert v == e
            assert len(seen) == n  # aperiodicity: sum = -1 forbids periods
        reporter(f"cycle lemma n={n} ({exc_count} excursions)", True)
    for n in range(1, 7):
        for d in _compressed_sequences(n):
            words = list(foata.multiset_permutations(
                np.repeat(np.arange(1, n + 1), d)))
            assert len(words) == foata.count_Sd(d)
            images = set()
            for w in words:
                t = foata.ff_decode(w, d)
                assert tuple(foata.ff_encode(t)) == tuple(w)
                images.add(t.key())
            assert len(images) == len(words)
        reporter(f"word/tree bijection n={n}", True)


def _compressed_sequences(n: int):
    def comps(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(1, total - parts + 2):
            for rest in comps(total - first, parts - 1):
                yield (first,) + rest

    if n == 1:
        yield (0,)
        return
    for m in range(1, n):
        for nz in comps(n - 1, m):
            yield nz + (0,) * (n - m)


def _suite_oracle_tv(reporter, seed: int) -> None:
    draws = 50000
    for spec, sizes in (({"kind": "geometric"}, (3, 4, 5, 6)),
                        ({"kind": "tabulated", "probs": [0.5, 0, 0.5]}, (3, 5, 7))):
        d = dist_mod.load_spec(spec)
        for n in sizes:
            exact = {bytes((t.degrees).tobytes()): float(p)
                     for t, p in sample.enumerate_conditional(d, n)}
            rng = stream(seed, n)
            exc, _ = sample.sample_bridges_exact(d, n, rng, draws)
            counts = Counter(bytes((row + 1).tobytes()) for row in exc)
            tv = 0.5 * sum(abs(counts.get(k, 0) / draws - p)
                           for k, p in exact.items())
            tv += 0.5 * sum(c / draws for k, c in counts.items() if k not in exact)
            reporter(f"oracle TV {spec['kind']} n={n}: {tv:.4f}", tv < 0.02)


def _suite_width_not_fat(reporter, seed: int) -> None:
    d = dist_mod.load_spec({"kind": "geometric"})
    reps = 1500
    freqs = []
    for i, n in enumerate((64, 256, 1024)):
        rng = stream(seed, i)
        exc, _ = sample.sample_bridges_exact(d, n, rng, reps)
        count = 0
        for row in exc:
            t = tree.PlaneTree.from_bfs_degrees(row + 1)
            w, _ = tree.width_profile(t)
            count += w >= n / 4
        freqs.append(count / reps)
    reporter(f"P(width >= n/4) over (64,256,1024): {freqs}",
             freqs[0] >= freqs[1] >= freqs[2])


def cmd_verify(args) -> int:
    failures = 0

    def reporter(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1

    suites = {
        "bijections": lambda: _suite_bijections(reporter),
        "oracle-tv": lambda: _suite_oracle_tv(reporter, args.seed),
        "width-not-fat": lambda: _suite_width_not_fat(reporter, args.seed),
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    for name in names:
        if name not in suites:
            raise ValueError(f"unknown suite {name!r}; options: {sorted(suites)} or all")
        try:
            suites[name]()
        except AssertionError as e:
            reporter(f"{name}: {e}", False)
    print(f"{'OK' if failures == 0 else 'FAILED'}: "
          f"{failures} failing check(s)")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# construct
# ---------------------------------------------------------------------------

def cmd_construct(args) -> int:
    cd = construct_mod.build_short_fat(args.growth, args.levels)
    doc = cd.to_spec()
    doc["metadata"] = cd.metadata()
    if args.verify_level is not None:
        rng = stream(args.seed, 0)
        rep = construct_mod.verify_fatness(cd, args.verify_level, rng,
                                           max_size=args.max_size)
        doc["metadata"]["fatness"] = {
            "level": rep.level, "sampler": rep.sampler, "reps": rep.reps,
            "estimate": rep.estimate, "ci": [rep.ci_low, rep.ci_high],
            "target": rep.target, "verified": rep.verified, "note": rep.note,
        }
    text = json.dumps(doc, indent=2)
    if args.out == "-":
        print(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    if args.figdir:
        for p in report.render_construct_figure(doc["metadata"], args.figdir):
            print(f"figure: {p}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# stochorder
# ---------------------------------------------------------------------------

def _majorizes(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    sa = sorted(a, reverse=True)
    sb = sorted(b, reverse=True)
    run_a = np.cumsum(sa)
    run_b = np.cumsum(sb)
    return bool(np.all(run_a >= run_b))


def exact_expected_height(degseq) -> Fraction:
    """Mean height over all trees with the given degrees, exactly.

    The compressed coupling preserves heights, so the word class of the
    compressed sequence is enumerated; capped at 1e6 words.
    """
    ds = foata.DegreeSequence(tuple(int(x) for x in degseq))
    comp, _ = foata.compress(ds)
    if foata.count_Sd(comp) > 10 ** 6:
        raise ValueError("word class too large to enumerate exactly")
    total = Fraction(0)
    count = 0
    pool = np.repeat(np.arange(1, comp.n + 1), comp.degrees)
    for w in foata.multiset_permutations(pool):
        total += foata.ff_decode(w, comp).height()
        count += 1
    return total / count


def cmd_stochorder(args) -> int:
    d1 = tuple(int(x) for x in args.deg.split(","))
    d2 = tuple(int(x) for x in args.deg2.split(","))
    e1 = exact_expected_height(d1)
    e2 = exact_expected_height(d2)
    if sorted(d1) == sorted(d2):
        relation = "equal"
        ok = e1 == e2
    elif _majorizes(d1, d2):
        relation = "first more skewed (below)"
        ok = e1 <= e2
    elif _majorizes(d2, d1):
        relation = "second more skewed (below)"
        ok = e2 <= e1
    else:
        relation = "incomparable"
        ok = True
    print(f"E[H] {args.deg} = {e1} ({float(e1):.6f})")
    print(f"E[H] {args.deg2} = {e2} ({float(e2):.6f})")
    print(f"relation: {relation}")
    if relation != "incomparable":
        print(f"stochastic-order direction holds: {ok}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bienayme-lab",
                                 description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, dist_required=True):
        p.add_argument("--dist", required=dist_required,
                       help="distribution spec: inline JSON or a file path")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="-", help="output path ('-' = stdout)")
        p.add_argument("--figdir", default=None,
                       help="directory for PNG figures (optional)")

    p = sub.add_parser("simulate", help="replicate statistics over an n-grid")
    common(p)
    p.add_argument("--n", required=True, help="comma-separated sizes")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--sampler", choices=("exact", "tprime"), default="exact")
    p.add_argument("--max-tries", type=int, default=10 ** 7, dest="max_tries")
    p.add_argument("--experiment", default="simulate")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("scaling", help="a_n, b_n, h_n, V(b_n) table")
    common(p)
    p.add_argument("--n", required=True)
    p.set_defaults(fn=cmd_scaling)

    p = sub.add_parser("verify", help="run a self-check suite")
    p.add_argument("suite", choices=("bijections", "oracle-tv",
                                     "width-not-fat", "all"))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("construct", help="build a short-fat offspring law")
    p.add_argument("--growth", default="power:0.3",
                   help="lnln | sqrtlog | power[:alpha]")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--figdir", default=None)
    p.add_argument("--verify-level", type=int, default=None, dest="verify_level")
    p.add_argument("--max-size", type=int, default=10 ** 7, dest="max_size")
    p.set_defaults(fn=cmd_construct)

    p = sub.add_parser("stochorder", help="exact expected heights of two degree sequences")
    p.add_argument("--deg", required=True, help="comma-separated degrees")
    p.add_argument("--deg2", required=True)
    p.set_defaults(fn=cmd_stochorder)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (dist_mod.DistError, construct_mod.ConstructError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
