"""Named instances that attain the known bounds, and the lower-bound chains."""
from __future__ import annotations

from fractions import Fraction

from twofacility.core import BOTH, F1, F2, ApprovalPair, LineInstance, Objective, Solution, mirror_instance
from twofacility.verify import TableSearchResult, proof_chain_search

# FMNE is 3-approximate here (no empty nodes)
FMNE_FIXED_TIGHT = LineInstance.consecutive(F2, F2, F1, F1, F1)
# FMNE is 17/4-approximate here (node 7 empty)
FMNE_EMPTY_TIGHT = LineInstance.consecutive(F2, F2, F2, F1, F1, F1, m=7)

# three agents at 1..3 for the social-cost impossibility
SC_LOWER_CHAIN = (
    (BOTH, BOTH, BOTH),
    (BOTH, BOTH, F2),
)

# three agents at 1..3 for the max-cost impossibility, in chain order
MC_LOWER_CHAIN = (
    (F1, F2, F1),
    (F1, F2, F2),
    (BOTH, F2, F2),
    (F1, BOTH, F2),
    (BOTH, BOTH, F2),
)


def mirrored(profiles):
    """Profiles on nodes 1..k reflected end to end."""
    return tuple(mirror_instance(LineInstance.consecutive(*prof)).prefs for prof in profiles)


def swapped(profiles):
    """Profiles with the two facility labels exchanged."""
    return tuple(tuple(ApprovalPair(t.f2, t.f1) for t in prof) for prof in profiles)


def symmetric_closure(profiles):
    """Close a chain under reflection and facility relabelling, keeping chain order first."""
    out = tuple(profiles)
    out = out + mirrored(out)
    out = out + swapped(out)
    return tuple(dict.fromkeys(out))


def replay_mc_chain() -> dict[Solution, TableSearchResult]:
    """Run the five-instance max-cost chain under each admissible first choice.

    The first instance admits (2,3) and (2,1); the chain is argued for
    (2,3) and the other choice is its mirror image, so each branch is
    searched over the chain closed under the line's symmetries.
    """
    family = symmetric_closure(MC_LOWER_CHAIN)
    first = MC_LOWER_CHAIN[0]
    return {
        sol: proof_chain_search(Objective.MC, Fraction(2), family, fixed={first: sol})
        for sol in (Solution(2, 3), Solution(2, 1))
    }


def replay_sc_chain() -> TableSearchResult:
    family = symmetric_closure(SC_LOWER_CHAIN)
    return proof_chain_search(Objective.SC, Fraction(4, 3), family)
