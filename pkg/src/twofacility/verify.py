"""Exhaustive strategyproofness checks, ratio sweeps and lower-bound table search."""
from __future__ import annotations

import itertools
import logging
from math import comb
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from twofacility.core import (
    ApprovalPair,
    InstanceError,
    LineInstance,
    Objective,
    Solution,
    costs_under,
    objective_value,
    pref_domain,
    ratio,
)
from twofacility.mechanisms import MechanismId, parse_mechanism
from twofacility.oracle import (
    feasible_solutions,
    mc_pair_bounds,
    mc_triple_bounds,
    optimal_cost,
    sc_lower_bound,
    technical_lemma_value,
)

log = logging.getLogger(__name__)

Mechanism = Callable[[LineInstance], Solution]


# -- enumeration -----------------------------------------------------------------

@dataclass(frozen=True)
class Family:
    """Parameters of an enumerated instance space.

    ``empty_nodes`` restricts to instances with no empty node (``"none"``),
    at least one (``"some"``) or either (``"any"``).
    """

    m_max: int
    n_min: int = 2
    allow_empty_prefs: bool = False
    m_min: int = 2
    n_max: int | None = None
    empty_nodes: str = "any"

    def __post_init__(self) -> None:
        if self.m_max < 2:
            raise InstanceError(f"m_max must be at least 2, got {self.m_max}")
        if self.empty_nodes not in ("any", "none", "some"):
            raise InstanceError(f"empty_nodes must be any, none or some, got {self.empty_nodes!r}")

    def shapes(self) -> list[tuple[int, int]]:
        """The (m, n) blocks of the family in enumeration order."""
        out = []
        for m in range(max(2, self.m_min), self.m_max + 1):
            hi = m if self.n_max is None else min(m, self.n_max)
            for n in range(max(2, self.n_min), hi + 1):
                if self.empty_nodes == "none" and n != m:
                    continue
                if self.empty_nodes == "some" and n == m:
                    continue
                out.append((m, n))
        return out


def enumerate_block(m: int, n: int, allow_empty_prefs: bool = False) -> Iterator[LineInstance]:
    domain = pref_domain(allow_empty_prefs)
    for positions in itertools.combinations(range(1, m + 1), n):
        for prefs in itertools.product(domain, repeat=n):
            yield LineInstance.build(m, positions, prefs)


def enumerate_family(family: Family) -> Iterator[LineInstance]:
    for m, n in family.shapes():
        yield from enumerate_block(m, n, family.allow_empty_prefs)


def enumerate_instances(m_max: int, n_min: int = 2, allow_empty_prefs: bool = False) -> Iterator[LineInstance]:
    """Every instance with n_min <= n <= m <= m_max, in a fixed order."""
    return enumerate_family(Family(m_max, n_min, allow_empty_prefs))


# -- strategyproofness ---------------------------------------------------------

@dataclass(frozen=True)
class SPViolation:
    instance: LineInstance
    agent_index: int
    misreport: ApprovalPair
    true_cost: int
    deviated_cost: int

    def replay(self, mechanism: Mechanism) -> bool:
        """Re-run both reports and confirm the strict gain."""
        agent = self.instance.agents[self.agent_index]
        truthful = costs_under(agent.prefs, agent.pos, mechanism(self.instance))
        lied = costs_under(
            agent.prefs, agent.pos, mechanism(self.instance.with_report(self.agent_index, self.misreport))
        )
        return (truthful, lied) == (self.true_cost, self.deviated_cost) and lied < truthful


def check_strategyproof(
    mechanism: Mechanism | MechanismId | str,
    instance: LineInstance,
    allow_empty_prefs: bool = False,
) -> SPViolation | None:
    if isinstance(mechanism, str):
        mechanism = parse_mechanism(mechanism)
    truthful = mechanism(instance)
    for i, (pos, prefs) in enumerate(instance.agents):
        true_cost = costs_under(prefs, pos, truthful)
        if true_cost == 0:
            continue
        for report in pref_domain(allow_empty_prefs):
            if report == prefs:
                continue
            lied = costs_under(prefs, pos, mechanism(instance.with_report(i, report)))
            if lied < true_cost:
                return SPViolation(instance, i, report, true_cost, lied)
    return None


def sp_scan(
    mechanism: Mechanism | MechanismId | str,
    instances: Iterable[LineInstance],
    allow_empty_prefs: bool = False,
    limit: int | None = None,
) -> tuple[int, list[SPViolation]]:
    """Check every instance the mechanism accepts; returns (checked, violations)."""
    mech = parse_mechanism(mechanism) if isinstance(mechanism, str) else mechanism
    accepts = getattr(mech, "accepts", lambda _: True)
    checked, found = 0, []
    for inst in instances:
        if not accepts(inst):
            continue
        checked += 1
        v = check_strategyproof(mech, inst, allow_empty_prefs)
        if v is not None:
            found.append(v)
            if limit is not None and len(found) >= limit:
                break
    return checked, found


# -- ratio sweeps ---------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    instance_id: int
    instance: LineInstance
    mech_value: int
    opt_value: int

    @property
    def ratio(self) -> Fraction | None:
        return ratio(self.mech_value, self.opt_value)


@dataclass
class RatioReport:
    """Worst case of a sweep. ``max_ratio`` None means unbounded."""

    mechanism: str
    objective: Objective
    max_ratio: Fraction | None = Fraction(0)
    witness: LineInstance | None = None
    witness_id: int | None = None
    instances_checked: int = 0
    rows: list[SweepRow] = field(default_factory=list, repr=False)

    @property
    def unbounded(self) -> bool:
        return self.max_ratio is None

    def observe(self, row: SweepRow) -> None:
        self.instances_checked += 1
        r = row.ratio
        if self.max_ratio is None:
            return
        if r is None or r > self.max_ratio:
            self.max_ratio, self.witness, self.witness_id = r, row.instance, row.instance_id

    def merge(self, other: RatioReport) -> RatioReport:
        """Combine two reports; the earlier instance id wins ties."""
        out = RatioReport(self.mechanism, self.objective)
        out.instances_checked = self.instances_checked + other.instances_checked
        out.rows = self.rows + other.rows
        best = None
        for rep in (self, other):
            if rep.witness is None:
                continue
            key = (rep.max_ratio is None, rep.max_ratio or 0, -rep.witness_id)
            if best is None or key > best[0]:
                best = (key, rep)
        if best is not None:
            rep = best[1]
            out.max_ratio, out.witness, out.witness_id = rep.max_ratio, rep.witness, rep.witness_id
        return out


def _sweep_block(args) -> RatioReport:
    mechanism, objective, m, n, allow_empty_prefs, start_id, keep_rows = args
    mech = parse_mechanism(mechanism) if isinstance(mechanism, str) else mechanism
    accepts = getattr(mech, "accepts", lambda _: True)
    report = RatioReport(str(mechanism), objective)
    k = start_id
    for inst in enumerate_block(m, n, allow_empty_prefs):
        k += 1
        if not accepts(inst):
            continue
        row = SweepRow(k, inst, objective_value(inst, mech(inst), objective), optimal_cost(inst, objective).value)
        report.observe(row)
        if keep_rows:
            report.rows.append(row)
    return report


def _block_size(m: int, n: int, allow_empty_prefs: bool) -> int:
    return comb(m, n) * len(pref_domain(allow_empty_prefs)) ** n


def ratio_sweep(
    mechanism: Mechanism | MechanismId | str,
    objective: Objective | str,
    family: Family,
    keep_rows: bool = False,
    workers: int = 1,
) -> RatioReport:
    """Worst ratio of ``mechanism`` against the brute-force optimum over ``family``.

    Instance ids count every enumerated instance of the family (1-based),
    including ones outside the mechanism's domain, so ids are stable
    across mechanisms.
    """
    objective = Objective.parse(objective)
    tasks, start = [], 0
    for m, n in family.shapes():
        tasks.append((mechanism, objective, m, n, family.allow_empty_prefs, start, keep_rows))
        start += _block_size(m, n, family.allow_empty_prefs)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sweep_block, tasks))
    else:
        parts = []
        for task in tasks:
            parts.append(_sweep_block(task))
            log.info("swept m=%d n=%d (%d instances so far)", task[2], task[3], sum(p.instances_checked for p in parts))
    report = RatioReport(str(mechanism), objective)
    for part in parts:
        report = report.merge(part)
    return report


# -- lower-bound table search --------------------------------------------------

@dataclass(frozen=True)
class TableSearchResult:
    """UNSAT, or a SAT witness table mapping each profile to a solution."""

    sat: bool
    table: Mapping[tuple[ApprovalPair, ...], Solution] | None = None
    nodes_explored: int = 0

    def to_json(self, positions: Sequence[int], m: int) -> dict:
        out = {"result": "SAT" if self.sat else "UNSAT", "m": m, "positions": list(positions)}
        if self.sat:
            out["table"] = [
                {"prefs": [t.label() for t in prof], "solution": [sol.z1, sol.z2]}
                for prof, sol in self.table.items()
            ]
        return out


def all_profiles(n: int, allow_empty_prefs: bool = False) -> list[tuple[ApprovalPair, ...]]:
    return list(itertools.product(pref_domain(allow_empty_prefs), repeat=n))


def _allowed(value: int, opt: int, bound: Fraction, strict: bool) -> bool:
    r = ratio(value, opt)
    if r is None:
        return False
    return r < bound if strict else r <= bound


def _deviation_edges(profiles: Sequence[tuple[ApprovalPair, ...]]):
    """Pairs (a, b, i): profiles a and b differ exactly in agent i's report."""
    index = {p: k for k, p in enumerate(profiles)}
    edges = []
    for a, prof in enumerate(profiles):
        for i in range(len(prof)):
            for b_prof in (q for q in profiles if q != prof and q[:i] == prof[:i] and q[i + 1:] == prof[i + 1:]):
                edges.append((a, index[b_prof], i))
    return edges


def proof_chain_search(
    objective: Objective | str,
    bound: Fraction,
    profile_family: Sequence[tuple[ApprovalPair, ...]],
    positions: Sequence[int] = (1, 2, 3),
    m: int | None = None,
    strict: bool = True,
    fixed: Mapping[tuple[ApprovalPair, ...], Solution] | None = None,
) -> TableSearchResult:
    """Search for a mechanism table over ``profile_family`` that is strategyproof
    on in-family deviations and beats ``bound`` on every profile.

    Each profile's candidates are the feasible solutions whose ratio to the
    optimum is below ``bound`` (at most ``bound`` when not ``strict``).
    ``fixed`` pins chosen profiles to given solutions.
    """
    objective = Objective.parse(objective)
    bound = Fraction(bound)
    positions = tuple(positions)
    m = m or positions[-1]
    profiles = list(dict.fromkeys(tuple(p) for p in profile_family))
    for prof in profiles:
        if len(prof) != len(positions):
            raise InstanceError("profile family mixes different agent counts / position profiles")
    fixed = dict(fixed or {})
    for prof in fixed:
        if prof not in profiles:
            raise InstanceError("fixed profile not in the family")

    instances = [LineInstance.build(m, positions, prof) for prof in profiles]
    sols = feasible_solutions(m)
    candidates = []
    for k, inst in enumerate(instances):
        opt = optimal_cost(inst, objective).value
        cands = [s for s in sols if _allowed(objective_value(inst, s, objective), opt, bound, strict)]
        if profiles[k] in fixed:
            cands = [s for s in cands if s == fixed[profiles[k]]]
        candidates.append(cands)
    if any(not c for c in candidates):
        return TableSearchResult(False)

    # constraint (a, b, i): agent i with true report profiles[a][i] must not
    # gain by switching to profiles[b][i]
    constraints: dict[int, list[tuple[int, int]]] = {k: [] for k in range(len(profiles))}
    for a, b, i in _deviation_edges(profiles):
        constraints[a].append((b, i))
        constraints[b].append((a, i))

    def consistent(a: int, b: int, i: int, sa: Solution, sb: Solution) -> bool:
        pos = positions[i]
        ta, tb = profiles[a][i], profiles[b][i]
        return costs_under(ta, pos, sa) <= costs_under(ta, pos, sb) and costs_under(tb, pos, sb) <= costs_under(
            tb, pos, sa
        )

    domains = [list(c) for c in candidates]
    assignment: dict[int, Solution] = {}
    explored = 0

    def propagate(k: int, sol: Solution) -> list[tuple[int, list[Solution]]]:
        trail = []
        for other, i in constraints[k]:
            if other in assignment:
                continue
            keep = [s for s in domains[other] if consistent(k, other, i, sol, s)]
            if len(keep) != len(domains[other]):
                trail.append((other, domains[other]))
                domains[other] = keep
                if not keep:
                    return trail
        return trail

    def search() -> bool:
        nonlocal explored
        if len(assignment) == len(profiles):
            return True
        k = min((j for j in range(len(profiles)) if j not in assignment), key=lambda j: (len(domains[j]), j))
        for sol in domains[k]:
            explored += 1
            if any(o in assignment and not consistent(k, o, i, sol, assignment[o]) for o, i in constraints[k]):
                continue
            assignment[k] = sol
            trail = propagate(k, sol)
            if all(domains[o] for o, _ in trail) and search():
                return True
            for o, dom in reversed(trail):
                domains[o] = dom
            del assignment[k]
        return False

    if search():
        table = {profiles[k]: assignment[k] for k in range(len(profiles))}
        return TableSearchResult(True, table, explored)
    return TableSearchResult(False, None, explored)


def replay_table(
    table: Mapping[tuple[ApprovalPair, ...], Solution],
    objective: Objective | str,
    bound: Fraction,
    positions: Sequence[int] = (1, 2, 3),
    m: int | None = None,
    strict: bool = True,
) -> list[str]:
    """Independently re-check a witness table; returns a list of problems (empty if valid)."""
    objective = Objective.parse(objective)
    positions = tuple(positions)
    m = m or positions[-1]
    problems = []
    for prof, sol in table.items():
        inst = LineInstance.build(m, positions, prof)
        if not inst.is_feasible(sol):
            problems.append(f"{inst.describe()}: infeasible {sol}")
            continue
        opt = optimal_cost(inst, objective).value
        if not _allowed(objective_value(inst, sol, objective), opt, Fraction(bound), strict):
            problems.append(f"{inst.describe()}: {sol} breaks the ratio cap")
        for i, pos in enumerate(positions):
            for report in {q[i] for q in table}:
                dev = prof[:i] + (report,) + prof[i + 1:]
                if dev == prof or dev not in table:
                    continue
                if costs_under(prof[i], pos, table[dev]) < costs_under(prof[i], pos, sol):
                    problems.append(f"{inst.describe()}: agent {i + 1} gains by reporting {report.label()}")
    return problems


def mechanism_table(
    mechanism: Mechanism | MechanismId | str,
    profiles: Iterable[tuple[ApprovalPair, ...]],
    positions: Sequence[int] = (1, 2, 3),
    m: int | None = None,
) -> dict[tuple[ApprovalPair, ...], Solution]:
    mech = parse_mechanism(mechanism) if isinstance(mechanism, str) else mechanism
    m = m or positions[-1]
    return {tuple(p): mech(LineInstance.build(m, positions, p)) for p in profiles}


# -- lemma checks --------------------------------------------------------------

@dataclass
class LemmaCheck:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_sc_lower_bound(instances: Iterable[LineInstance]) -> LemmaCheck:
    """The approver-count bound never exceeds the brute-force social optimum."""
    res = LemmaCheck("sc-lower-bound")
    for inst in instances:
        res.checked += 1
        bound = sc_lower_bound(len(inst.approvers(1)), len(inst.approvers(2)))
        opt = optimal_cost(inst, Objective.SC).value
        if bound > opt:
            res.failures.append(f"{inst.describe()}: bound {bound} > SC* {opt}")
    return res


def check_mc_lower_bounds(instances: Iterable[LineInstance]) -> tuple[LemmaCheck, LemmaCheck]:
    """Pair and triple bounds against the brute-force max-cost optimum."""
    pair, triple = LemmaCheck("mc-pair-bound"), LemmaCheck("mc-triple-bound")
    for inst in instances:
        pairs, triples = mc_pair_bounds(inst), mc_triple_bounds(inst)
        if not pairs and not triples:
            continue
        opt = optimal_cost(inst, Objective.MC).value
        for x, y, q, b in pairs:
            pair.checked += 1
            if b > opt:
                pair.failures.append(f"{inst.describe()}: pair ({x},{y},q={q}) bound {b} > MC* {opt}")
        for x, y, z, b in triples:
            triple.checked += 1
            if b > opt:
                triple.failures.append(f"{inst.describe()}: triple ({x},{y},{z}) bound {b} > MC* {opt}")
    return pair, triple


def check_technical_lemma(cap: int = 200) -> LemmaCheck:
    """f(x, y) <= 13/4 for all x + y >= 6 with 0 <= x, y <= cap, equality at (3, 3)."""
    res = LemmaCheck("technical-lemma")
    limit = Fraction(13, 4)
    for x in range(cap + 1):
        for y in range(max(0, 6 - x), cap + 1):
            res.checked += 1
            v = technical_lemma_value(x, y)
            if v > limit:
                res.failures.append(f"f({x},{y}) = {v} > 13/4")
    if technical_lemma_value(3, 3) != limit:
        res.failures.append("f(3,3) != 13/4")
    return res
