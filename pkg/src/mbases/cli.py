"""Command line front end.

Every subcommand prints one JSON document (sorted keys) on stdout and
diagnostics on stderr.  Exit status: 0 on success, 2 when a certificate of
violation was produced, 1 on any error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import records as rec
from .arrangement import (ArrangementOracle, NearDiscriminant, check_flatness, critical_points,
                          kernel_residual, sample_points)
from .bruteforce import (BudgetExceeded, all_good_decompositions, all_splits, local_relation_graph,
                         qualified_bruteforce, random_configuration, random_system)
from .equivalence import GoodDecomposition, NotStrong, UnsupportedParameter, good_from_T1, good_decompose, walk
from .exactlin import GF, QQ
from .packing import (NotQualified, PackingError, ViolationCertificate, compute_A1, compute_A2_bruteforce,
                      is_qualified_bruteforce, split_into_bases, strong_decompose)
from .potential import MockOracle, build_L, build_Q, independent_sets, verify_potentials
from .systems import ConfigurationError, Decomposition, System, d_H

log = logging.getLogger("mbases")

OK, ERROR, CERTIFICATE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(obj) -> None:
    sys.stdout.write(rec.dumps(obj))


def _instance(args):
    config, T, l = rec.parse_instance(args.instance)
    if T is None:
        raise rec.InstanceError(f"{args.instance}: missing field 'system'")
    cli_l = getattr(args, "l", None)
    if cli_l is not None and l is not None and cli_l != l:
        raise UsageError(f"--l {cli_l} contradicts l = {l} in the instance file")
    if cli_l is not None:
        l = cli_l
    return config, T, l


def _certificate_record(config, T, l, cert: ViolationCertificate) -> dict:
    return {"kind": "certificate", "instance": rec.instance_to_json(config, T, l),
            "certificate": rec.certificate_to_json(cert)}


# --------------------------------------------------------------------------
# combinatorial subcommands


def cmd_split(args) -> int:
    config, T, l = _instance(args)
    if l is None:
        l = len(T) - config.m * config.k
    steps = []
    if l == 0:
        res = split_into_bases(config, T, on_step=lambda st: steps.append(st))
    else:
        res = strong_decompose(config, T, l)
    if isinstance(res, ViolationCertificate):
        _emit(_certificate_record(config, T, l, res))
        return CERTIFICATE
    out = {"kind": "decomposition", "instance": rec.instance_to_json(config, T, l),
           "decomposition": rec.decomposition_to_json(res)}
    if l == 0:
        out["improvements"] = [{"dim_before": st.dim_before, "dim_after": st.dim_after} for st in steps]
    _emit(out)
    return OK


def cmd_qualify(args) -> int:
    config, T, l = _instance(args)
    if l is None:
        l = len(T) - config.m * config.k
    ok, cert = is_qualified_bruteforce(config, T, l)
    if not ok:
        _emit(_certificate_record(config, T, l, cert))
        return CERTIFICATE
    _emit({"kind": "qualified", "instance": rec.instance_to_json(config, T, l), "qualified": True})
    return OK


def cmd_a1(args) -> int:
    config, T, _ = _instance(args)
    A1 = compute_A1(config, T, jobs=args.jobs)
    _emit({"kind": "a1", "instance": rec.instance_to_json(config, T, 1),
           "a1": [{"index": i, "witness": rec.decomposition_to_json(A1[i])} for i in sorted(A1)]})
    return OK


def cmd_a2(args) -> int:
    config, T, l = _instance(args)
    if l is None:
        l = len(T) - config.m * config.k
    try:
        A2 = compute_A2_bruteforce(config, T, l)
    except NotQualified:
        _, cert = is_qualified_bruteforce(config, T, l)
        _emit(_certificate_record(config, T, l, cert))
        return CERTIFICATE
    _emit({"kind": "a2", "instance": rec.instance_to_json(config, T, l), "a2": sorted(A2)})
    return OK


def cmd_good(args) -> int:
    config, T, _ = _instance(args)
    g = good_decompose(config, T)
    l = len(T) - config.m * config.k
    if isinstance(g, ViolationCertificate):
        _emit(_certificate_record(config, T, l, g))
        return CERTIFICATE
    _emit({"kind": "good", "instance": rec.instance_to_json(config, T), "good": rec.good_to_json(g)})
    return OK


def _system_arg(text: str, name: str) -> System:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"{name}: not JSON ({e.msg})") from None
    return rec.system_from_json(obj, name)


def cmd_walk(args) -> int:
    config, T, _ = _instance(args)
    left = good_from_T1(config, T, _system_arg(args.left, "--left"))
    right = good_from_T1(config, T, _system_arg(args.right, "--right"))
    chain = walk(config, left, right)
    _emit({"kind": "chain", "instance": rec.instance_to_json(config, T), "chain": rec.chain_to_json(chain)})
    return OK


def cmd_verify(args) -> int:
    record = rec.load_json(args.record)
    ok, why = rec.verify_record(record)
    _emit({"kind": "verification", "record_kind": record.get("kind"), "ok": ok, "diagnostic": why})
    return OK if ok else ERROR


# --------------------------------------------------------------------------
# potentials


def _oracle_source(args):
    """(config, oracle, basepoint, is_arrangement) from an instance or arrangement file."""
    data = rec.load_json(args.source)
    if "B" in data:
        model, base = rec.parse_arrangement(args.source)
        if base is None:
            base = sample_points(model, np.random.default_rng(args.seed), 1)[0]
        return model.configuration(), ArrangementOracle(model, base), base, model
    config, _, _ = rec.instance_from_json(data, str(args.source))
    try:
        value = Fraction(args.mock_value)
    except ValueError:
        raise UsageError(f"--mock-value {args.mock_value!r} is not a rational number") from None
    return config, MockOracle(config.n, config.k, config.m, value), None, None


def _coeffs(P) -> list:
    return [{"system": rec.system_to_json(T), "value": rec.number(c)} for T, c in P.records()]


def cmd_potential_q(args) -> int:
    config, oracle, _, _ = _oracle_source(args)
    Q = build_Q(config, oracle)
    v = verify_potentials(config, oracle, Q, samples=args.samples, seed=args.seed)
    _emit({"kind": "potential-q", "degree": config.m * config.k, "coefficients": _coeffs(Q),
           "verification": {"checks": v.q_checks, "max_abs": v.q_max_abs, "max_rel": v.q_max_rel}})
    return OK


def _basepoint(text: str, n: int):
    try:
        vals = [complex(s.strip().replace("i", "j")) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"--basepoint {text!r}: expected comma separated numbers") from None
    if len(vals) != n:
        raise UsageError(f"--basepoint needs {n} entries, got {len(vals)}")
    arr = np.array(vals)
    return arr.real if not np.any(arr.imag) else arr


def cmd_potential_l(args) -> int:
    config, oracle, base, model = _oracle_source(args)
    if args.basepoint is not None:
        base = _basepoint(args.basepoint, config.n)
        if model is not None:
            oracle = ArrangementOracle(model, base)
    if base is None:
        base = (Fraction(0),) * config.n
    mk = config.m * config.k
    D = args.degree if args.degree is not None else mk + 2
    mode = "cross-check" if args.cross_check else "first-found"
    L, report = build_L(config, oracle, base, D, mode, tolerance=float("inf"))
    report.tolerance = args.tolerance
    Q = build_Q(config, oracle)
    v = verify_potentials(config, oracle, Q, L, samples=args.samples, seed=args.seed, degree=D)
    consistency = [{"system": rec.system_to_json(T), "candidates": len(r.candidates),
                    "spread": r.spread, "relative_spread": r.relative_spread}
                   for T, r in sorted(report.records.items(), key=lambda kv: (len(kv[0]), kv[0]))]
    flagged = sorted(report.flagged) if args.cross_check else []
    out = {
        "kind": "potential-l",
        "basepoint": [rec.number(x) for x in base],
        "degree": D,
        "mode": mode,
        "coefficients": _coeffs(L),
        "zero_filled": [rec.system_to_json(T) for T in report.zero_filled],
        "consistency": consistency,
        "max_relative_spread": report.max_relative_spread,
        "flagged": [rec.system_to_json(T) for T in flagged],
        "tolerance": args.tolerance,
        "verification": {"q_checks": v.q_checks, "l_checks": v.l_checks,
                         "q_max_rel": v.q_max_rel, "l_max_rel": v.l_max_rel,
                         "q_max_abs": v.q_max_abs, "l_max_abs": v.l_max_abs},
    }
    if args.plot_dir:
        from .report import plot_consistency

        out["figures"] = plot_consistency(consistency, args.tolerance, args.plot_dir)
    _emit(out)
    if flagged:
        log.error("inconsistent candidates for %d coefficient(s)", len(flagged))
        return ERROR
    return OK


# --------------------------------------------------------------------------
# arrangement


def cmd_arrangement_check(args) -> int:
    model, base = rec.parse_arrangement(args.source)
    rng = np.random.default_rng(args.seed)
    if base is None:
        base = sample_points(model, rng, 1)[0]
    crit = critical_points(model, base)
    samples = sample_points(model, rng, args.samples)
    kernel = max([kernel_residual(model, crit)] + [kernel_residual(model, critical_points(model, z)) for z in samples])
    config = model.configuration()
    indep = independent_sets(config)
    flat = []
    for I1, I2 in itertools.combinations_with_replacement(indep, 2):
        flat.append({"I1": list(I1), "I2": list(I2), "deviation": check_flatness(model, I1, I2, samples)})
    worst = max((f["deviation"] for f in flat), default=0.0)
    out = {
        "kind": "arrangement-check",
        "n": model.n, "k": model.k, "m": model.m,
        "basepoint": [rec.number(x) for x in base],
        "certified": crit.certified,
        "critical_count": crit.count,
        "expected_count": crit.expected,
        "critical_points": [rec.number(complex(t[0])) if model.k == 1 else [rec.number(complex(x)) for x in t]
                            for t in crit.points],
        "kernel_residual": kernel,
        "kernel_tolerance": args.kernel_tolerance,
        "samples": args.samples,
        "flatness": flat,
        "flatness_max": worst,
        "flatness_tolerance": args.tolerance,
    }
    if model.k == 1:
        out["poles"] = [float(-(base[i] / model.B[i, 0]).real) for i in range(model.n)]
    out["ok"] = bool(kernel < args.kernel_tolerance and worst < args.tolerance
                     and (crit.count == crit.expected or not crit.certified))
    if args.plot_dir:
        from .report import plot_arrangement_check

        out["figures"] = plot_arrangement_check(out, args.plot_dir)
    _emit(out)
    return OK if out["ok"] else ERROR


# --------------------------------------------------------------------------
# selftest


def _selftest_trial(seed: int, index: int) -> dict:
    rng = random.Random(seed * 1_000_003 + index)
    field = rng.choice([QQ, GF(2), GF(3)])
    out = {"trial": index, "field": field.name, "problems": []}
    k, m = rng.randint(1, 2), rng.randint(1, 3)
    l = rng.randint(0, min(2, 8 - m * k))
    n = rng.randint(k, 5)
    config = random_configuration(rng, field, k, n, m)
    T = random_system(rng, n, m * k + l)
    res = strong_decompose(config, T, l)
    strong = isinstance(res, Decomposition)
    probs = res.problems(config, T) if strong else res.problems(config)
    out["problems"] += [f"strong_decompose: {p}" for p in probs]
    if strong != qualified_bruteforce(config, T, l) or strong != bool(all_splits(config, T, l)):
        out["problems"].append(f"strong/qualified mismatch on {T}")
    out["strong"] = strong
    if m >= 2 and n > k:
        S = random_system(rng, n, m * k + rng.randint(1, 2))
        goods = all_good_decompositions(config, S)
        if len(goods) >= 2:
            a, b = goods[0], goods[-1]
            try:
                ch = walk(config, GoodDecomposition(a.T1, a.T2, a.witness), GoodDecomposition(b.T1, b.T2, b.witness))
                if len(ch) > d_H(a.T2, b.T2) + 1:
                    out["problems"].append("walk chain too long")
            except AssertionError as e:
                out["problems"].append(f"walk: {e}")
            if not local_relation_graph(config, S)[1]:
                out["problems"].append(f"local relation graph of {S} is disconnected")
            out["walked"] = True
    return out


def cmd_selftest(args) -> int:
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_selftest_trial, [args.seed] * args.trials, range(args.trials)))
    else:
        results = [_selftest_trial(args.seed, i) for i in range(args.trials)]
    problems = [f"trial {r['trial']}: {p}" for r in results for p in r["problems"]]
    _emit({"kind": "selftest", "seed": args.seed, "trials": args.trials,
           "strong": sum(r["strong"] for r in results),
           "walks": sum(r.get("walked", False) for r in results),
           "problems": problems, "ok": not problems})
    return OK if not problems else ERROR


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mbases", description="Base packing, good decompositions and potentials.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def inst(name, func, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("instance", help="instance JSON file")
        s.set_defaults(func=func)
        return s

    s = inst("split", cmd_split, "split into m bases plus an l-tail")
    s.add_argument("--l", type=int, help="tail size (default |T| - mk)")
    s = inst("qualify", cmd_qualify, "brute-force qualification check")
    s.add_argument("--l", type=int)
    s = inst("a1", cmd_a1, "tail candidates of a strong (mk+1)-system")
    s.add_argument("--jobs", type=int, default=1)
    s = inst("a2", cmd_a2, "support of the minimal tight subspace")
    s.add_argument("--l", type=int)
    inst("good", cmd_good, "a good decomposition")
    s = inst("walk", cmd_walk, "chain of locally related good decompositions")
    s.add_argument("--left", required=True, help='T1 of the left end, e.g. \'{"1": 1}\'')
    s.add_argument("--right", required=True, help="T1 of the right end")

    s = sub.add_parser("verify", help="re-check an emitted record")
    s.add_argument("record")
    s.set_defaults(func=cmd_verify)

    def source(name, func, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("source", help="arrangement JSON (uses the arrangement oracle) or instance JSON (mock oracle)")
        s.add_argument("--mock-value", default="1", help="constant of the mock oracle")
        s.add_argument("--samples", type=int, help="sample this many independent tuples")
        s.add_argument("--seed", type=int, default=0)
        s.set_defaults(func=func)
        return s

    source("potential-q", cmd_potential_q, "potential of the first kind")
    s = source("potential-l", cmd_potential_l, "truncated potential of the second kind")
    s.add_argument("--degree", type=int)
    s.add_argument("--basepoint")
    s.add_argument("--cross-check", action="store_true")
    s.add_argument("--tolerance", type=float, default=1e-5)
    s.add_argument("--plot-dir")

    s = sub.add_parser("arrangement-check", help="numeric checks of an arrangement oracle")
    s.add_argument("source")
    s.add_argument("--samples", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tolerance", type=float, default=1e-6)
    s.add_argument("--kernel-tolerance", type=float, default=1e-10)
    s.add_argument("--plot-dir")
    s.set_defaults(func=cmd_arrangement_check)

    s = sub.add_parser("selftest", help="random comparison against the brute-force oracles")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=60)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"mbases: {e}", file=sys.stderr)
        return ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="mbases: %(levelname)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("mbases: --jobs must be at least 1", file=sys.stderr)
        return ERROR
    try:
        return args.func(args)
    except (UsageError, rec.InstanceError, ConfigurationError, PackingError, NotStrong,
            UnsupportedParameter, NearDiscriminant, BudgetExceeded, OSError, ValueError, KeyError) as e:
        print(f"mbases: {e}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
