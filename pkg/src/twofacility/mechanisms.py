"""Deterministic mechanisms: instance -> feasible solution.

Every mechanism is total on the default preference domain. The few
degenerate inputs that only arise with empty approval sets or with
``(0, 0)`` reports fall back to fixed, report-independent anchors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from twofacility.core import (
    InstanceError,
    LineInstance,
    Solution,
    mirror_instance,
    mirror_solution,
    occupied_window,
)

Mechanism = Callable[[LineInstance], Solution]


def leftmost_median(positions: Sequence[int]) -> int:
    """Lower median: element of rank ceil(k/2) in a sorted list of k nodes."""
    if not positions:
        raise InstanceError("median of an empty set of positions")
    return positions[(len(positions) - 1) // 2]


# -- Fixed-or-Median-Nearest-Empty --------------------------------------------

def fmne(instance: LineInstance) -> Solution:
    n = instance.n
    if not instance.has_empty_nodes():
        return Solution(n // 2, n // 2 + 1)
    anchor = instance.agents[0].pos
    n1, n2 = instance.approvers(1), instance.approvers(2)
    y1 = leftmost_median(n1) if n1 else anchor
    y2 = leftmost_median(n2) if n2 else anchor
    # ties go to the rightmost empty node, hence the -e secondary key
    z2 = min(instance.empty_nodes(), key=lambda e: (abs(e - y2), -e))
    return Solution(y1, z2)


# -- Priority-Dictatorship (three agents) ---------------------------------------

def priority_dictatorship(instance: LineInstance) -> Solution:
    if instance.n != 3:
        raise InstanceError(f"Priority-Dictatorship needs exactly 3 agents, got {instance.n}")
    (xl, _), (xc, tc), (xr, tr) = instance.agents
    if xr - xc > xc - xl:
        flipped = mirror_instance(instance)
        return mirror_solution(instance.m, priority_dictatorship(flipped))
    if tc.f1 and not tc.f2:
        return Solution(xc, xr) if tr.f2 else Solution(xc, xl)
    if tc.f2 and not tc.f1:
        return Solution(xr, xc) if tr.f1 else Solution(xl, xc)
    # c approves both (or, on the widened domain, neither)
    return Solution(xc, xc + 1) if tr.f2 else Solution(xc + 1, xc)


# -- alpha-Left-Right ------------------------------------------------------------

def span_median(positions: Sequence[int], alpha: int) -> int:
    """Middle node of the sub-line spanned by ``positions``.

    With an even number of nodes in the span the two middle candidates
    are tied; the one farther from ``alpha`` wins.
    """
    lo, hi = positions[0], positions[-1]
    left, right = (lo + hi) // 2, (lo + hi + 1) // 2
    return left if abs(left - alpha) >= abs(right - alpha) else right


def alpha_left_right(instance: LineInstance, alpha: int) -> Solution:
    window = occupied_window(instance)
    m = window.m
    if not 1 <= alpha <= m - 1:
        raise InstanceError(f"alpha={alpha} outside [1, {m - 1}] for occupied window of size {m}")

    part = {
        "L": [a for a in window.agents if a.pos <= alpha],
        "R": [a for a in window.agents if a.pos > alpha],
    }
    members = {x: frozenset(a.pos for a in part[x]) for x in part}
    approvers = {j: frozenset(window.approvers(j)) for j in (1, 2)}

    def median_of(x: str) -> int:
        return span_median(sorted(members[x]), alpha)

    # case 1: the two parts approve one, different facility each
    for x, y in (("L", "R"), ("R", "L")):
        if approvers[1] == members[x] and approvers[2] == members[y]:
            return window.unshift(Solution(median_of(x), median_of(y)))

    # case 2: one facility's approvers sit inside a single part
    for ell in (1, 2):
        for x in ("L", "R"):
            if approvers[ell] <= members[x]:
                if not approvers[ell]:
                    x = "L"
                here = median_of(x)
                other = alpha + 1 if x == "L" else alpha
                z = (here, other) if ell == 1 else (other, here)
                return window.unshift(Solution(*z))

    # case 3
    return window.unshift(Solution(alpha, alpha + 1))


def parity_alpha(instance: LineInstance) -> int:
    m = occupied_window(instance).m
    return m // 2 if m % 2 == 0 else (m + 1) // 2


def lr_for_parity(instance: LineInstance) -> Solution:
    return alpha_left_right(instance, parity_alpha(instance))


# -- TwoExtremes baseline ------------------------------------------------------

def two_extremes(instance: LineInstance) -> Solution:
    n1, n2 = instance.approvers(1), instance.approvers(2)
    z1 = n1[0] if n1 else instance.agents[0].pos
    z2 = n2[-1] if n2 else instance.agents[-1].pos
    if z1 == z2:
        # move facility 2 one node toward the middle of the line
        z2 += 1 if 2 * z2 <= instance.m else -1
    return Solution(z1, z2)


# -- ids -------------------------------------------------------------------------

@dataclass(frozen=True)
class MechanismId:
    """Parsed mechanism name.

    ``kind`` is one of ``fmne``, ``pd3``, ``alr``, ``two-extremes``; for
    ``alr`` an ``alpha`` of None means parity dispatch (``alr:auto``).
    """

    kind: str
    alpha: int | None = None

    def __str__(self) -> str:
        if self.kind == "alr":
            return f"alr:{'auto' if self.alpha is None else self.alpha}"
        return self.kind

    @property
    def claimed_strategyproof(self) -> bool:
        return self.kind != "two-extremes"

    def accepts(self, instance: LineInstance) -> bool:
        """Whether ``instance`` lies in this mechanism's domain (ignoring prefs)."""
        if self.kind == "pd3":
            return instance.n == 3
        if self.kind == "alr" and self.alpha is not None:
            first, last = instance.agents[0].pos, instance.agents[-1].pos
            return 1 <= self.alpha <= last - first
        return True

    def __call__(self, instance: LineInstance) -> Solution:
        if self.kind == "fmne":
            return fmne(instance)
        if self.kind == "pd3":
            return priority_dictatorship(instance)
        if self.kind == "two-extremes":
            return two_extremes(instance)
        if self.alpha is None:
            return lr_for_parity(instance)
        return alpha_left_right(instance, self.alpha)


_SIMPLE = {"fmne": "fmne", "pd3": "pd3", "two-extremes": "two-extremes", "twoextremes": "two-extremes"}


def parse_mechanism(text: str | MechanismId) -> MechanismId:
    if isinstance(text, MechanismId):
        return text
    key = text.strip().lower()
    if key in _SIMPLE:
        return MechanismId(_SIMPLE[key])
    if key.startswith("alr:"):
        arg = key[4:]
        if arg == "auto":
            return MechanismId("alr")
        if arg.isdigit() and int(arg) >= 1:
            return MechanismId("alr", int(arg))
        raise InstanceError(f"alr needs a positive integer alpha or 'auto', got {arg!r}")
    raise InstanceError(
        f"unknown mechanism {text!r} (expected fmne, pd3, alr:<alpha>, alr:auto, two-extremes)"
    )

