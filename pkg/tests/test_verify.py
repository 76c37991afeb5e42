import itertools
from fractions import Fraction
from math import comb

import pytest

from twofacility.core import (
    BOTH,
    F1,
    F2,
    InstanceError,
    LineInstance,
    Objective,
    Solution,
    costs_under,
    mirror_instance,
    objective_value,
    ratio,
)
from twofacility.golden import (
    MC_LOWER_CHAIN,
    SC_LOWER_CHAIN,
    replay_mc_chain,
    replay_sc_chain,
    symmetric_closure,
)
from twofacility.mechanisms import MechanismId, parse_mechanism
from twofacility.oracle import optimal_cost
from twofacility.verify import (
    Family,
    RatioReport,
    all_profiles,
    check_strategyproof,
    enumerate_family,
    enumerate_instances,
    mechanism_table,
    proof_chain_search,
    ratio_sweep,
    replay_table,
    sp_scan,
)


def family_size(m_max, n_min, choices):
    return sum(comb(m, n) * choices ** n for m in range(2, m_max + 1) for n in range(max(2, n_min), m + 1))


@pytest.mark.parametrize(
    "m_max, n_min, allow_empty, expected",
    [(2, 2, False, 9), (3, 3, False, 27), (2, 2, True, 16)],
)
def test_enumeration_counts(m_max, n_min, allow_empty, expected):
    got = list(enumerate_instances(m_max, n_min, allow_empty))
    assert len(got) == expected == family_size(m_max, n_min, 4 if allow_empty else 3)
    assert len(set(got)) == len(got)


def test_enumeration_is_deterministic_and_complete():
    a = list(enumerate_instances(5))
    assert a == list(enumerate_instances(5))
    assert len(a) == family_size(5, 2, 3)


def test_family_filters():
    none = list(enumerate_family(Family(6, empty_nodes="none")))
    assert all(not i.has_empty_nodes() for i in none)
    assert len(none) == sum(3 ** m for m in range(2, 7))
    some = list(enumerate_family(Family(6, empty_nodes="some")))
    assert all(i.has_empty_nodes() for i in some)
    assert len(none) + len(some) == family_size(6, 2, 3)
    assert {i.n for i in enumerate_family(Family(6, n_min=3, n_max=3))} == {3}
    with pytest.raises(InstanceError):
        Family(1)


# -- strategyproofness ---------------------------------------------------------

def rightmost_dictator(inst: LineInstance) -> Solution:
    """Facility 1 at node 1, facility 2 at the rightmost approver of facility 2."""
    n2 = inst.approvers(2)
    z2 = n2[-1] if n2 else inst.m
    return Solution(2 if z2 == 1 else 1, z2)


def broken(inst: LineInstance) -> Solution:
    """Facility 2 at the rightmost approver of facility 2, facility 1 on its left neighbour."""
    n2 = inst.approvers(2)
    z2 = n2[-1] if n2 else inst.m
    return Solution(z2 - 1 if z2 > 1 else 2, z2)


def brute_force_violation_exists(mech, profiles):
    for prof in profiles:
        inst = LineInstance.consecutive(*prof)
        truthful = mech(inst)
        for i, (x, t) in enumerate(inst.agents):
            for lie in (F1, F2, BOTH):
                if costs_under(t, x, mech(inst.with_report(i, lie))) < costs_under(t, x, truthful):
                    return True
    return False


@pytest.mark.parametrize("mech, manipulable", [(broken, True), (rightmost_dictator, False)])
def test_checker_agrees_with_brute_force(mech, manipulable):
    profiles = all_profiles(3)
    assert brute_force_violation_exists(mech, profiles) is manipulable
    checked, found = sp_scan(mech, (LineInstance.consecutive(*p) for p in profiles))
    assert checked == 27
    assert bool(found) is manipulable
    for v in found:
        assert v.deviated_cost < v.true_cost
        assert v.replay(mech)


def test_fmne_has_no_violation_on_small_lines():
    checked, found = sp_scan("fmne", enumerate_instances(5))
    assert checked == family_size(5, 2, 3) and not found


def test_check_strategyproof_returns_none_for_truthful_dictator():
    inst = LineInstance.consecutive(F1, F2, BOTH)
    assert check_strategyproof("pd3", inst) is None


def test_two_extremes_status_is_reported():
    v = check_strategyproof("two-extremes", LineInstance.build(4, (1, 2), (F2, BOTH)))
    assert v is not None
    assert (v.agent_index, v.misreport, v.true_cost, v.deviated_cost) == (0, F1, 2, 1)
    assert v.replay(parse_mechanism("two-extremes"))


def test_small_alpha_counterexample():
    # the literal mechanism lets a both-approver empty N2 and pull facility 2 left
    inst = LineInstance.consecutive(F1, BOTH, F1)
    v = check_strategyproof(MechanismId("alr", 1), inst)
    assert v is not None
    assert (v.agent_index, v.misreport, v.true_cost, v.deviated_cost) == (1, F1, 2, 1)


# -- ratio sweeps ----------------------------------------------------------------

def optimum_mechanism(objective):
    return lambda inst: optimal_cost(inst, objective).witness


@pytest.mark.parametrize("objective", list(Objective))
def test_oracle_as_mechanism_has_ratio_one(objective):
    report = ratio_sweep(optimum_mechanism(objective), objective, Family(5))
    assert report.max_ratio == 1
    assert report.instances_checked == family_size(5, 2, 3)


def test_sweep_rows_and_witness():
    report = ratio_sweep("fmne", "sc", Family(5, n_min=5, m_min=5, empty_nodes="none"), keep_rows=True)
    assert report.max_ratio == 3
    assert report.witness == LineInstance.consecutive(F2, F2, F1, F1, F1)
    assert len(report.rows) == report.instances_checked == 3 ** 5
    best = max(report.rows, key=lambda r: r.ratio)
    assert best.ratio == 3


def test_unbounded_ratio_reported():
    # two agents approving distinct facilities: optimum 0, a fixed (1,2) placement is not
    inst_family = Family(3, n_min=2, n_max=2)
    report = ratio_sweep(lambda inst: Solution(1, 2), Objective.SC, inst_family)
    assert report.unbounded
    assert optimal_cost(report.witness, Objective.SC).value == 0


def test_sweep_ignores_instances_outside_domain():
    report = ratio_sweep("pd3", "sc", Family(4))
    assert report.instances_checked == sum(comb(m, 3) * 27 for m in (3, 4))


def test_parallel_sweep_matches_serial():
    fam = Family(6)
    a = ratio_sweep("alr:auto", "mc", fam)
    b = ratio_sweep("alr:auto", "mc", fam, workers=2)
    assert (a.max_ratio, a.witness, a.witness_id, a.instances_checked) == (
        b.max_ratio, b.witness, b.witness_id, b.instances_checked,
    )


def test_merge_prefers_earlier_witness_on_ties():
    i1, i2 = LineInstance.consecutive(F1, F2), LineInstance.consecutive(F2, F1)
    a = RatioReport("x", Objective.SC, Fraction(2), i1, 5, 3)
    b = RatioReport("x", Objective.SC, Fraction(2), i2, 2, 4)
    assert a.merge(b).witness_id == 2 == b.merge(a).witness_id
    assert a.merge(b).instances_checked == 7


def test_mirror_consistency():
    mech = parse_mechanism("fmne")
    fam = Family(6, n_min=3)
    report = ratio_sweep(mech, "sc", fam)
    assert not report.unbounded
    worst = Fraction(0)
    for inst in enumerate_family(fam):
        flipped = mirror_instance(inst)
        r = ratio(objective_value(flipped, mech(flipped), Objective.SC), optimal_cost(flipped, Objective.SC).value)
        worst = max(worst, r)
    assert worst == report.max_ratio


# -- lower-bound table search --------------------------------------------------

FAMILY27 = all_profiles(3)


def test_mc_bound_two_is_unsat():
    assert not proof_chain_search(Objective.MC, Fraction(2), FAMILY27).sat


def test_sc_bound_four_thirds_is_unsat():
    assert not proof_chain_search(Objective.SC, Fraction(4, 3), FAMILY27).sat


def test_relaxed_sc_bound_is_sat_and_replays():
    bound = Fraction(4, 3) + Fraction(1, 100)
    res = proof_chain_search(Objective.SC, bound, FAMILY27)
    assert res.sat and len(res.table) == 27
    assert replay_table(res.table, Objective.SC, bound) == []
    for prof, sol in res.table.items():
        inst = LineInstance.consecutive(*prof)
        assert ratio(objective_value(inst, sol, Objective.SC), optimal_cost(inst, Objective.SC).value) < bound


def test_priority_dictatorship_table_is_a_witness():
    table = mechanism_table("pd3", FAMILY27)
    assert replay_table(table, Objective.SC, Fraction(4, 3) + Fraction(1, 100)) == []
    assert replay_table(table, Objective.SC, Fraction(4, 3), strict=False) == []
    assert replay_table(table, Objective.SC, Fraction(4, 3))


def test_non_strict_bounds_are_sat():
    assert proof_chain_search(Objective.SC, Fraction(4, 3), FAMILY27, strict=False).sat
    res = proof_chain_search(Objective.MC, Fraction(2), FAMILY27, strict=False)
    assert res.sat
    assert replay_table(res.table, Objective.MC, Fraction(2), strict=False) == []


def test_bound_one_only_admits_exact_optima():
    for strict in (True, False):
        res = proof_chain_search(Objective.MC, Fraction(1), FAMILY27, strict=strict)
        if res.sat:
            for prof, sol in res.table.items():
                inst = LineInstance.consecutive(*prof)
                assert objective_value(inst, sol, Objective.MC) == optimal_cost(inst, Objective.MC).value


def test_search_is_deterministic():
    bound = Fraction(3, 2)
    a = proof_chain_search(Objective.SC, bound, FAMILY27)
    b = proof_chain_search(Objective.SC, bound, list(reversed(FAMILY27)))
    assert a.sat and a.table == proof_chain_search(Objective.SC, bound, FAMILY27).table
    assert b.sat and replay_table(b.table, Objective.SC, bound) == []


def test_mixed_positions_rejected():
    with pytest.raises(InstanceError):
        proof_chain_search(Objective.SC, Fraction(2), [(F1, F2, F1), (F1, F2)])


def test_other_position_profiles_can_be_searched():
    res = proof_chain_search(Objective.MC, Fraction(2), FAMILY27, positions=(1, 2, 4), m=4)
    assert res.sat in (True, False)
    if res.sat:
        assert replay_table(res.table, Objective.MC, Fraction(2), positions=(1, 2, 4), m=4) == []


def test_mc_chain_replay():
    assert len(MC_LOWER_CHAIN) == 5
    for first, res in replay_mc_chain().items():
        assert not res.sat, first


def test_sc_chain_replay():
    assert not replay_sc_chain().sat


def test_bare_chain_needs_symmetry():
    # without the reflected profiles the excluded branch (2,1) escapes
    assert proof_chain_search(Objective.MC, Fraction(2), MC_LOWER_CHAIN).sat
    assert not proof_chain_search(
        Objective.MC, Fraction(2), MC_LOWER_CHAIN, fixed={MC_LOWER_CHAIN[0]: Solution(2, 3)}
    ).sat
    assert set(SC_LOWER_CHAIN) <= set(symmetric_closure(SC_LOWER_CHAIN))
