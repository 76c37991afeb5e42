"""Command-line entry point: ``twofacility <subcommand> ...``.

Data goes to stdout (or ``--out``); progress and summaries go to stderr.
Exit status is 0 when every check passed, 1 when a check failed and 2 on
bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction

from twofacility.core import (
    InstanceError,
    LineInstance,
    Objective,
    agent_costs,
    format_ratio,
    instance_to_dict,
    load_instance,
    max_cost,
    parse_fraction,
    social_cost,
)
from twofacility.mechanisms import parse_mechanism
from twofacility.oracle import optimal_cost
from twofacility.verify import (
    Family,
    all_profiles,
    check_mc_lower_bounds,
    check_sc_lower_bound,
    check_technical_lemma,
    enumerate_family,
    proof_chain_search,
    ratio_sweep,
    replay_table,
    sp_scan,
)

log = logging.getLogger("twofacility")

SWEEP_COLUMNS = ["mechanism", "objective", "m", "n", "instance_id", "mech_value", "opt_value", "ratio_num", "ratio_den"]


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _ratio_json(r: Fraction | None):
    if r is None:
        return "unbounded"
    return {"num": r.numerator, "den": r.denominator, "text": f"{r.numerator}/{r.denominator}", "decimal": float(r)}


def _table(rows: list[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _load(args) -> LineInstance:
    inst = load_instance(args.instance)
    if not inst.in_domain(args.allow_empty_prefs):
        raise InstanceError(
            "domain violation: an agent approves neither facility (pass --allow-empty-prefs to widen the domain)"
        )
    return inst


def _family(args) -> Family:
    return Family(
        m_max=args.m_max,
        n_min=args.n_min,
        allow_empty_prefs=args.allow_empty_prefs,
        m_min=args.m_min,
        n_max=args.n_max,
        empty_nodes=args.empty_nodes,
    )


# -- subcommands -----------------------------------------------------------------

def cmd_eval(args) -> int:
    inst = _load(args)
    mech = parse_mechanism(args.mechanism)
    if not mech.accepts(inst):
        raise InstanceError(f"domain violation: {mech} is not defined on {inst.describe()}")
    sol = mech(inst)
    costs = agent_costs(inst, sol)
    sc, mc = social_cost(inst, sol), max_cost(inst, sol)
    if args.format == "json":
        data = {
            "mechanism": str(mech),
            "instance": instance_to_dict(inst),
            "solution": [sol.z1, sol.z2],
            "agent_costs": costs,
            "social_cost": sc,
            "max_cost": mc,
        }
        text = json.dumps(data, indent=2) + "\n"
    elif args.format == "csv":
        text = _csv(["agent", "pos", "f1", "f2", "cost"], [
            (i + 1, a.pos, int(a.prefs.f1), int(a.prefs.f2), c) for i, (a, c) in enumerate(zip(inst.agents, costs))
        ])
    else:
        rows = [("mechanism", mech), ("instance", inst.describe()), ("solution", sol)]
        rows += [(f"cost[{i + 1}]", f"{c}  (node {a.pos}, {a.prefs.label()})") for i, (a, c) in enumerate(zip(inst.agents, costs))]
        rows += [("SC", sc), ("MC", mc)]
        text = _table(rows)
    _emit(text, args.out)
    return 0


def cmd_opt(args) -> int:
    inst = _load(args)
    objective = Objective.parse(args.objective)
    res = optimal_cost(inst, objective)
    if args.format == "json":
        text = json.dumps({"objective": objective.value, "value": res.value, "witness": list(res.witness)}, indent=2) + "\n"
    elif args.format == "csv":
        text = _csv(["objective", "value", "z1", "z2"], [(objective.value, res.value, *res.witness)])
    else:
        text = _table([("instance", inst.describe()), ("objective", objective.value), ("value", res.value), ("witness", res.witness)])
    _emit(text, args.out)
    return 0


def cmd_spcheck(args) -> int:
    mech = parse_mechanism(args.mechanism)
    if args.instance:
        inst = _load(args)
        instances = [inst]
    else:
        instances = enumerate_family(_family(args))
    checked, violations = sp_scan(mech, instances, args.allow_empty_prefs, limit=args.limit)
    log.info("%s: %d instances checked, %d violations", mech, checked, len(violations))
    if args.format == "json":
        text = json.dumps({
            "mechanism": str(mech),
            "instances_checked": checked,
            "violations": [
                {
                    "instance": instance_to_dict(v.instance),
                    "agent": v.agent_index + 1,
                    "misreport": v.misreport.label(),
                    "true_cost": v.true_cost,
                    "deviated_cost": v.deviated_cost,
                }
                for v in violations
            ],
        }, indent=2) + "\n"
    elif args.format == "csv":
        text = _csv(["mechanism", "instance", "agent", "misreport", "true_cost", "deviated_cost"], [
            (str(mech), v.instance.describe(), v.agent_index + 1, v.misreport.label(), v.true_cost, v.deviated_cost)
            for v in violations
        ])
    else:
        rows = [("mechanism", mech), ("instances checked", checked), ("violations", len(violations))]
        rows += [
            (f"  #{k + 1}", f"{v.instance.describe()} agent {v.agent_index + 1} reports {v.misreport.label()}: "
                            f"{v.true_cost} -> {v.deviated_cost}")
            for k, v in enumerate(violations)
        ]
        text = _table(rows)
    _emit(text, args.out)
    # TwoExtremes carries no strategyproofness claim; its violations are reported only
    return 1 if violations and mech.claimed_strategyproof else 0


def cmd_sweep(args) -> int:
    mech = parse_mechanism(args.mechanism)
    objective = Objective.parse(args.objective)
    family = _family(args)
    keep = args.format == "csv"
    report = ratio_sweep(mech, objective, family, keep_rows=keep, workers=args.workers)
    log.info(
        "%s %s: %d instances, max ratio %s at %s",
        mech, objective.value, report.instances_checked, format_ratio(report.max_ratio),
        report.witness.describe() if report.witness else "-",
    )
    if args.format == "csv":
        rows = []
        for row in report.rows:
            r = row.ratio
            num, den = ("inf", 0) if r is None else (r.numerator, r.denominator)
            rows.append((str(mech), objective.value, row.instance.m, row.instance.n, row.instance_id,
                         row.mech_value, row.opt_value, num, den))
        text = _csv(SWEEP_COLUMNS, rows)
    else:
        summary = {
            "mechanism": str(mech),
            "objective": objective.value,
            "instances_checked": report.instances_checked,
            "max_ratio": _ratio_json(report.max_ratio),
            "witness_id": report.witness_id,
            "witness": instance_to_dict(report.witness) if report.witness else None,
        }
        if args.format == "json":
            text = json.dumps(summary, indent=2) + "\n"
        else:
            text = _table([
                ("mechanism", mech), ("objective", objective.value),
                ("instances checked", report.instances_checked),
                ("max ratio", format_ratio(report.max_ratio)),
                ("witness", report.witness.describe() if report.witness else "-"),
            ])
    _emit(text, args.out)
    if args.bound is not None:
        bound = parse_fraction(args.bound)
        if report.max_ratio is None or report.max_ratio > bound:
            log.error("max ratio %s exceeds bound %s", format_ratio(report.max_ratio), bound)
            return 1
    return 0


def cmd_lowerbound(args) -> int:
    objective = Objective.parse(args.objective)
    bound = parse_fraction(args.bound)
    try:
        positions = tuple(int(p) for p in args.positions.split(","))
    except ValueError:
        raise InstanceError(f"--positions must be comma-separated integers, got {args.positions!r}") from None
    m = args.m or positions[-1]
    LineInstance.build(m, positions, [(True, True)] * len(positions))  # validates the position profile
    profiles = all_profiles(len(positions), args.allow_empty_prefs)
    res = proof_chain_search(objective, bound, profiles, positions, m, strict=args.strict)
    data = res.to_json(positions, m)
    data.update({"objective": objective.value, "bound": f"{bound.numerator}/{bound.denominator}",
                 "strict": args.strict, "profiles": len(profiles), "nodes_explored": res.nodes_explored})
    status = 0
    if res.sat:
        problems = replay_table(res.table, objective, bound, positions, m, strict=args.strict)
        data["replay"] = "ok" if not problems else problems
        status = 1 if problems else 0
    log.info("%s bound %s over %d profiles: %s", objective.value, bound, len(profiles), data["result"])
    if args.format == "table":
        rows = [("objective", objective.value), ("bound", f"{bound} ({'strict' if args.strict else 'non-strict'})"),
                ("positions", positions), ("result", data["result"])]
        if res.sat:
            rows += [(" ".join(t.label() for t in prof), sol) for prof, sol in res.table.items()]
        text = _table(rows)
    else:
        text = json.dumps(data, indent=2) + "\n"
    _emit(text, args.out)
    if args.expect and data["result"] != args.expect.upper():
        log.error("expected %s, got %s", args.expect.upper(), data["result"])
        return 1
    return status


def cmd_lemmas(args) -> int:
    family = Family(args.m_max, allow_empty_prefs=args.allow_empty_prefs)
    checks = [check_sc_lower_bound(enumerate_family(family))]
    checks += list(check_mc_lower_bounds(enumerate_family(family)))
    checks.append(check_technical_lemma(args.grid))
    if args.format == "json":
        text = json.dumps([
            {"check": c.name, "checked": c.checked, "ok": c.ok, "failures": c.failures[:20]} for c in checks
        ], indent=2) + "\n"
    elif args.format == "csv":
        text = _csv(["check", "checked", "failures", "ok"], [(c.name, c.checked, len(c.failures), int(c.ok)) for c in checks])
    else:
        text = _table([(c.name, f"{'PASS' if c.ok else 'FAIL'}  ({c.checked} checked, {len(c.failures)} failures)") for c in checks])
    _emit(text, args.out)
    return 0 if all(c.ok for c in checks) else 1


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twofacility", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="table"):
        p.add_argument("--format", choices=["csv", "json", "table"], default=fmt_default)
        p.add_argument("--out", help="write data output here instead of stdout")
        p.add_argument("--allow-empty-prefs", action="store_true", help="admit agents approving neither facility")

    def family_opts(p):
        p.add_argument("--m-max", type=int, default=6)
        p.add_argument("--m-min", type=int, default=2)
        p.add_argument("--n-min", type=int, default=2)
        p.add_argument("--n-max", type=int)
        p.add_argument("--empty-nodes", choices=["any", "none", "some"], default="any")

    p = sub.add_parser("eval", help="run a mechanism on an instance file")
    p.add_argument("instance")
    p.add_argument("--mechanism", required=True)
    common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("opt", help="brute-force optimum of an instance file")
    p.add_argument("instance")
    p.add_argument("--objective", choices=["sc", "mc"], default="sc")
    common(p)
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("sp-check", help="search for profitable misreports")
    p.add_argument("instance", nargs="?", help="single instance file; omit to enumerate")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--limit", type=int, help="stop after this many violations")
    family_opts(p)
    common(p)
    p.set_defaults(func=cmd_spcheck)

    p = sub.add_parser("sweep", help="worst-case ratio over an enumerated family")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--objective", choices=["sc", "mc"], default="sc")
    p.add_argument("--bound", help="fail if the max ratio exceeds this rational, e.g. 17/4")
    p.add_argument("--workers", type=int, default=1)
    family_opts(p)
    common(p, fmt_default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lowerbound", help="search mechanism tables that beat a ratio bound")
    p.add_argument("--objective", choices=["sc", "mc"], default="mc")
    p.add_argument("--bound", required=True, help="ratio bound as num/den")
    p.add_argument("--strict", dest="strict", action="store_true", default=True,
                   help="require ratio < bound (default)")
    p.add_argument("--non-strict", dest="strict", action="store_false", help="allow ratio == bound")
    p.add_argument("--positions", default="1,2,3")
    p.add_argument("--m", type=int, help="line length (default: last position)")
    p.add_argument("--expect", choices=["sat", "unsat"], help="fail unless the search returns this")
    common(p, fmt_default="json")
    p.set_defaults(func=cmd_lowerbound)

    p = sub.add_parser("lemmas", help="check the optimum lower bounds against brute force")
    p.add_argument("--m-max", type=int, default=7)
    p.add_argument("--grid", type=int, default=200, help="x, y cap for the technical inequality")
    common(p)
    p.set_defaults(func=cmd_lemmas)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (InstanceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
