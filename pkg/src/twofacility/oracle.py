"""Brute-force optima and analytic lower bounds on optimal costs."""
from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple

from twofacility.core import InstanceError, LineInstance, Objective, Solution


class OptResult(NamedTuple):
    value: int
    witness: Solution


def feasible_solutions(m: int) -> list[Solution]:
    """All ordered pairs of distinct nodes, lexicographic."""
    return [Solution(a, b) for a in range(1, m + 1) for b in range(1, m + 1) if a != b]


def optimal_cost(instance: LineInstance, objective: Objective | str) -> OptResult:
    """Exact optimum over every feasible solution.

    No symmetry reduction: each ordered pair is evaluated from the cost
    definition. The witness is the lexicographically smallest minimizer.
    """
    objective = Objective.parse(objective)
    agg = sum if objective is Objective.SC else max
    agents = [(x, t.f1, t.f2) for x, t in instance.agents]
    best = None
    for z1, z2 in feasible_solutions(instance.m):
        value = agg(
            (abs(x - z1) if a1 else 0) + (abs(x - z2) if a2 else 0) for x, a1, a2 in agents
        )
        if best is None or value < best[0]:
            best = (value, z1, z2)
    value, z1, z2 = best
    return OptResult(value, Solution(z1, z2))


def sc_lower_bound(n1: int, n2: int) -> Fraction:
    """Lower bound on optimal social cost from the approver counts alone."""
    if n1 < 0 or n2 < 0:
        raise InstanceError("approver counts must be non-negative")
    return Fraction(n1 * n1 + n2 * n2 - (n1 % 2) - (n2 % 2), 4)


def mc_lower_bound_pair(x: int, y: int, q: int) -> Fraction:
    """Bound from two agents at x < y sharing q approved facilities."""
    if y <= x:
        raise InstanceError(f"need y > x, got x={x}, y={y}")
    if q not in (0, 1, 2):
        raise InstanceError(f"q must be 0, 1 or 2, got {q}")
    return Fraction(q * (y - x), 2)


def mc_lower_bound_triple(x: int, y: int, z: int) -> int:
    """Bound from a both-approver at x, a facility-1 approver at y and a facility-2 approver at z."""
    if not x < y < z:
        raise InstanceError(f"need x < y < z, got ({x}, {y}, {z})")
    return math.ceil(Fraction(y + z - 2 * x, 3))


def technical_lemma_value(x: int, y: int) -> Fraction:
    den = x * x + y * y - 2
    if den <= 0:
        raise InstanceError(f"x^2 + y^2 - 2 must be positive, got {den}")
    return Fraction(y * y + 4 * x * y + 2 * y + 1, den)


def mc_pair_bounds(instance: LineInstance) -> list[tuple[int, int, int, Fraction]]:
    """Every agent pair with the pair bound it implies: (x, y, q, bound)."""
    out = []
    agents = instance.agents
    for i, (x, s) in enumerate(agents):
        for y, t in agents[i + 1:]:
            q = int(s.f1 and t.f1) + int(s.f2 and t.f2)
            out.append((x, y, q, mc_lower_bound_pair(x, y, q)))
    return out


def mc_triple_bounds(instance: LineInstance) -> list[tuple[int, int, int, int]]:
    """Every qualifying (both, facility-1, facility-2) triple, left to right, with its bound."""
    out = []
    agents = instance.agents
    for i, (x, s) in enumerate(agents):
        if not (s.f1 and s.f2):
            continue
        for j in range(i + 1, len(agents)):
            y, t = agents[j]
            if not t.f1:
                continue
            for z, u in agents[j + 1:]:
                if u.f2:
                    out.append((x, y, z, mc_lower_bound_triple(x, y, z)))
    return out
