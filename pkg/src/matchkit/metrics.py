"""Matching quality measures: profiles, cost, regret, batch summaries.

The profile of a matching for a group of agents counts, for each rank i, how
many assignments in the group land at rank i (capacitated agents contribute
one entry per assignee).  Cost is the rank-weighted sum, regret the worst
rank in use.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from .model import Instance, Matching, Role

Profile = tuple[int, ...]


class ProfileOrder(Enum):
    RANK_MAXIMAL = "rank-maximal"
    GENEROUS = "generous"


class Ordering(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class GroupStats:
    profile: Profile
    cost: int
    regret: int


@dataclass(frozen=True)
class MatchingStats:
    size: int
    groups: Mapping[Role, GroupStats]
    total_cost: int
    total_regret: int


def _group_ranks(instance: Instance, matching: Matching, role: Role) -> list[int]:
    ranks = []
    for agent in instance.agents(role):
        if not instance.has_prefs(agent):
            continue
        for partner in matching.assignees(agent):
            ranks.append(instance.rank(agent, partner))
    return ranks


def _group_R(instance: Instance, role: Role) -> int:
    lengths = [len(instance.pref(a)) for a in instance.agents(role)]
    return max(lengths, default=0)


def compute_stats(instance: Instance, matching: Matching) -> MatchingStats:
    groups: dict[Role, GroupStats] = {}
    for role in instance.roles:
        if not any(instance.has_prefs(a) for a in instance.agents(role)):
            continue
        R = _group_R(instance, role)
        counts = [0] * R
        for r in _group_ranks(instance, matching, role):
            counts[r - 1] += 1
        profile = tuple(counts)
        cost = sum(i * c for i, c in enumerate(counts, start=1))
        regret = max((i for i, c in enumerate(counts, start=1) if c), default=0)
        groups[role] = GroupStats(profile, cost, regret)
    # SPA totals count the student side only; elsewhere every group counts
    if instance.problem_class.value in ("SPA", "SPAS"):
        total_roles = [Role.STUDENT]
    else:
        total_roles = list(groups)
    total_cost = sum(groups[r].cost for r in total_roles if r in groups)
    total_regret = max((groups[r].regret for r in total_roles if r in groups), default=0)
    return MatchingStats(matching.size, groups, total_cost, total_regret)


def pad_profiles(p: Sequence[int], q: Sequence[int]) -> tuple[Profile, Profile]:
    R = max(len(p), len(q))
    return (
        tuple(p) + (0,) * (R - len(p)),
        tuple(q) + (0,) * (R - len(q)),
    )


def profile_compare(
    p: Sequence[int], q: Sequence[int], order: ProfileOrder
) -> Ordering:
    """Compare two profiles; GREATER means `p` is the better profile.

    Rank-maximal reads positions 1..R and prefers more entries at the first
    position that differs.  Generous reads R..1 and prefers fewer entries at
    the worst position that differs.
    """
    a, b = pad_profiles(p, q)
    if order is ProfileOrder.RANK_MAXIMAL:
        for x, y in zip(a, b):
            if x != y:
                return Ordering.GREATER if x > y else Ordering.LESS
        return Ordering.EQUAL
    for x, y in zip(reversed(a), reversed(b)):
        if x != y:
            return Ordering.GREATER if x < y else Ordering.LESS
    return Ordering.EQUAL


def summarize_batch(stats: Sequence[MatchingStats]) -> dict:
    """Mean/min/max of size, cost and regret over a batch of matchings."""

    def agg(values):
        vals = list(values)
        if not vals:
            return {"mean": 0.0, "min": 0, "max": 0}
        return {
            "mean": sum(vals) / len(vals),
            "min": min(vals),
            "max": max(vals),
        }

    summary = {
        "count": len(stats),
        "size": agg(s.size for s in stats),
        "totalCost": agg(s.total_cost for s in stats),
        "totalRegret": agg(s.total_regret for s in stats),
        "groups": {},
    }
    roles = sorted({r for s in stats for r in s.groups}, key=lambda r: r.value)
    for role in roles:
        entries = [s.groups[role] for s in stats if role in s.groups]
        summary["groups"][role.value] = {
            "cost": agg(e.cost for e in entries),
            "regret": agg(e.regret for e in entries),
        }
    return summary
