"""Instances, solutions and the two cost objectives.

Nodes are 1-based. An instance places n >= 2 agents at distinct nodes of a
line with m nodes; each agent approves a subset of the two facilities.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence


class InstanceError(ValueError):
    """Raised for malformed instances, solutions or instance files."""


class ApprovalPair(NamedTuple):
    f1: bool
    f2: bool

    def approves(self, facility: int) -> bool:
        return self.f1 if facility == 1 else self.f2

    @property
    def is_empty(self) -> bool:
        return not (self.f1 or self.f2)

    def label(self) -> str:
        return {(1, 0): "f1", (0, 1): "f2", (1, 1): "both", (0, 0): "none"}[
            (int(self.f1), int(self.f2))
        ]


F1 = ApprovalPair(True, False)
F2 = ApprovalPair(False, True)
BOTH = ApprovalPair(True, True)
NONE = ApprovalPair(False, False)

# enumeration order of the preference domain; NONE only when widened
DEFAULT_DOMAIN: tuple[ApprovalPair, ...] = (F1, F2, BOTH)
WIDE_DOMAIN: tuple[ApprovalPair, ...] = (F1, F2, BOTH, NONE)

_LABELS = {"f1": F1, "f2": F2, "both": BOTH, "none": NONE}


def pref_domain(allow_empty_prefs: bool = False) -> tuple[ApprovalPair, ...]:
    return WIDE_DOMAIN if allow_empty_prefs else DEFAULT_DOMAIN


def parse_pref(label: str) -> ApprovalPair:
    try:
        return _LABELS[label.strip().lower()]
    except KeyError:
        raise InstanceError(f"unknown preference label {label!r}") from None


class Agent(NamedTuple):
    pos: int
    prefs: ApprovalPair


class Solution(NamedTuple):
    """Facility 1 at node ``z1``, facility 2 at node ``z2``."""

    z1: int
    z2: int

    def __str__(self) -> str:
        return f"({self.z1},{self.z2})"


class Objective(enum.Enum):
    SC = "sc"
    MC = "mc"

    @classmethod
    def parse(cls, text: str | Objective) -> Objective:
        if isinstance(text, Objective):
            return text
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise InstanceError(f"unknown objective {text!r} (expected sc or mc)") from None


@dataclass(frozen=True)
class LineInstance:
    """A line of ``m`` nodes with agents at strictly increasing positions.

    ``offset`` is the number of nodes dropped on the left by
    :func:`occupied_window`; it does not take part in equality.
    """

    m: int
    agents: tuple[Agent, ...]
    offset: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        agents = tuple(Agent(int(a[0]), ApprovalPair(*map(bool, a[1]))) for a in self.agents)
        object.__setattr__(self, "agents", agents)
        if self.m < 2:
            raise InstanceError(f"line needs at least 2 nodes, got m={self.m}")
        if not 2 <= len(agents) <= self.m:
            raise InstanceError(f"need 2 <= n <= m, got n={len(agents)}, m={self.m}")
        prev = 0
        for a in agents:
            if a.pos <= prev:
                raise InstanceError("agent positions must be strictly increasing")
            if a.pos > self.m:
                raise InstanceError(f"agent position {a.pos} outside [1, {self.m}]")
            prev = a.pos

    @classmethod
    def build(cls, m: int, positions: Iterable[int], prefs: Iterable[ApprovalPair]) -> LineInstance:
        return cls(m, tuple(Agent(p, t) for p, t in zip(positions, prefs, strict=True)))

    @classmethod
    def consecutive(cls, *prefs: ApprovalPair | str, m: int | None = None) -> LineInstance:
        """Agents at nodes 1..n with the given preferences."""
        ts = [parse_pref(t) if isinstance(t, str) else t for t in prefs]
        return cls.build(m or len(ts), range(1, len(ts) + 1), ts)

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(a.pos for a in self.agents)

    @property
    def prefs(self) -> tuple[ApprovalPair, ...]:
        return tuple(a.prefs for a in self.agents)

    def approvers(self, facility: int) -> list[int]:
        """Sorted positions of the agents approving ``facility``."""
        return [a.pos for a in self.agents if a.prefs.approves(facility)]

    def empty_nodes(self) -> list[int]:
        occupied = set(self.positions)
        return [v for v in range(1, self.m + 1) if v not in occupied]

    def has_empty_nodes(self) -> bool:
        return self.n < self.m

    def with_prefs(self, prefs: Sequence[ApprovalPair]) -> LineInstance:
        return LineInstance.build(self.m, self.positions, prefs)

    def with_report(self, agent_index: int, report: ApprovalPair) -> LineInstance:
        prefs = list(self.prefs)
        prefs[agent_index] = report
        return self.with_prefs(prefs)

    def in_domain(self, allow_empty_prefs: bool = False) -> bool:
        return allow_empty_prefs or not any(t.is_empty for t in self.prefs)

    def is_feasible(self, solution: Solution) -> bool:
        z1, z2 = solution
        return z1 != z2 and 1 <= z1 <= self.m and 1 <= z2 <= self.m

    def check_feasible(self, solution: Solution) -> None:
        if not self.is_feasible(solution):
            raise InstanceError(f"infeasible solution {tuple(solution)} for m={self.m}")

    def unshift(self, solution: Solution) -> Solution:
        """Map a solution on this (windowed) instance back to the original line."""
        return Solution(solution.z1 + self.offset, solution.z2 + self.offset)

    def describe(self) -> str:
        body = " ".join(f"{a.pos}:{a.prefs.label()}" for a in self.agents)
        return f"m={self.m} [{body}]"


def agent_cost(instance: LineInstance, agent_index: int, solution: Solution) -> int:
    if not 0 <= agent_index < instance.n:
        raise InstanceError(f"agent index {agent_index} out of range for n={instance.n}")
    instance.check_feasible(solution)
    return _cost(instance.agents[agent_index], solution)


def _cost(agent: Agent, solution: Solution) -> int:
    x, t = agent
    return (abs(x - solution.z1) if t.f1 else 0) + (abs(x - solution.z2) if t.f2 else 0)


def costs_under(prefs: ApprovalPair, pos: int, solution: Solution) -> int:
    """Cost of an agent at ``pos`` with true preferences ``prefs``."""
    return _cost(Agent(pos, prefs), solution)


def agent_costs(instance: LineInstance, solution: Solution) -> list[int]:
    instance.check_feasible(solution)
    return [_cost(a, solution) for a in instance.agents]


def social_cost(instance: LineInstance, solution: Solution) -> int:
    return sum(agent_costs(instance, solution))


def max_cost(instance: LineInstance, solution: Solution) -> int:
    return max(agent_costs(instance, solution))


def objective_value(instance: LineInstance, solution: Solution, objective: Objective) -> int:
    if objective is Objective.SC:
        return social_cost(instance, solution)
    return max_cost(instance, solution)


def ratio(value: int, optimum: int) -> Fraction | None:
    """Exact ratio ``value / optimum``; ``0/0`` counts as 1 and ``x/0`` as unbounded (None)."""
    if optimum == 0:
        return Fraction(1) if value == 0 else None
    return Fraction(value, optimum)


def format_ratio(r: Fraction | None) -> str:
    if r is None:
        return "unbounded"
    return f"{r.numerator}/{r.denominator} ({float(r):.6f})"


def parse_fraction(text: str) -> Fraction:
    try:
        value = Fraction(text.replace(" ", ""))
    except (ValueError, ZeroDivisionError):
        raise InstanceError(f"cannot parse rational {text!r}") from None
    return value


def occupied_window(instance: LineInstance) -> LineInstance:
    """Restrict the line to the nodes between the first and last agent."""
    first, last = instance.agents[0].pos, instance.agents[-1].pos
    shift = first - 1
    agents = tuple(Agent(a.pos - shift, a.prefs) for a in instance.agents)
    return LineInstance(last - shift, agents, offset=instance.offset + shift)


def mirror_instance(instance: LineInstance) -> LineInstance:
    m = instance.m
    agents = tuple(Agent(m + 1 - a.pos, a.prefs) for a in reversed(instance.agents))
    return LineInstance(m, agents)


def mirror_solution(m: int, solution: Solution) -> Solution:
    return Solution(m + 1 - solution.z1, m + 1 - solution.z2)


def mirror_index(n: int, agent_index: int) -> int:
    return n - 1 - agent_index


# -- JSON interchange -------------------------------------------------------

def instance_to_dict(instance: LineInstance) -> dict:
    return {
        "m": instance.m,
        "agents": [{"pos": a.pos, "f1": a.prefs.f1, "f2": a.prefs.f2} for a in instance.agents],
    }


def instance_from_dict(data: object) -> LineInstance:
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    m = data.get("m")
    agents = data.get("agents")
    if not isinstance(m, int) or isinstance(m, bool):
        raise InstanceError("field 'm' must be an integer")
    if not isinstance(agents, list):
        raise InstanceError("field 'agents' must be a list")
    parsed = []
    for k, entry in enumerate(agents):
        if not isinstance(entry, dict):
            raise InstanceError(f"agents[{k}] must be an object")
        pos, f1, f2 = entry.get("pos"), entry.get("f1"), entry.get("f2")
        if not isinstance(pos, int) or isinstance(pos, bool):
            raise InstanceError(f"agents[{k}].pos must be an integer")
        if not isinstance(f1, bool) or not isinstance(f2, bool):
            raise InstanceError(f"agents[{k}].f1 and agents[{k}].f2 must be booleans")
        parsed.append(Agent(pos, ApprovalPair(f1, f2)))
    return LineInstance(m, tuple(parsed))


def loads_instance(text: str) -> LineInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return instance_from_dict(data)


def load_instance(path: str) -> LineInstance:
    with open(path, encoding="utf-8") as fh:
        return loads_instance(fh.read())


def dumps_instance(instance: LineInstance) -> str:
    return json.dumps(instance_to_dict(instance))
