"""Algorithm catalog: display names, descriptions, applicability filters.

Entries are grouped per problem class in presentation order.  Each entry
carries a predicate over InstanceProperties deciding whether the
algorithm can run on a given instance, plus a flag saying whether it
still makes sense when many instances are solved in one batch (pair
sets, enumerations, counts, and structural views are single-instance
only).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .model import ProblemClass, Role
from .textio import InstanceProperties

Predicate = Callable[[InstanceProperties], bool]


@dataclass(frozen=True)
class AlgorithmEntry:
    key: str
    name: str
    description: str
    applies: Predicate
    batch_ok: bool = True


def _always(props: InstanceProperties) -> bool:
    return True


def _tie_free(props: InstanceProperties) -> bool:
    return not props.any_ties()


def _left_tie_free(props: InstanceProperties) -> bool:
    left = {
        ProblemClass.SM: Role.RESIDENT,
        ProblemClass.HR: Role.RESIDENT,
    }[props.problem_class]
    return not props.ties.get(left, False)


def _has_ties(props: InstanceProperties) -> bool:
    return props.any_ties()


def _tie_free_complete(props: InstanceProperties) -> bool:
    return _tie_free(props) and all(props.complete.values())


def _spas_stable_ready(props: InstanceProperties) -> bool:
    return (
        props.problem_class is ProblemClass.SPAS
        and props.lecturer_cover
        and _tie_free(props)
    )


def _sm_context(props: InstanceProperties) -> bool:
    if props.problem_class is ProblemClass.SM:
        return True
    return props.sm_detected


def _sm_and(pred: Predicate) -> Predicate:
    return lambda props: _sm_context(props) and pred(props)


_CHA_ENTRIES = (
    AlgorithmEntry(
        "onesided.naive",
        "Naive",
        "Produces a matching using the random serial dictatorship mechanism.",
        _tie_free,
    ),
    AlgorithmEntry(
        "onesided.min_cost",
        "Minimum Cost",
        "Produces a minimum cost maximum matching.",
        _always,
    ),
    AlgorithmEntry(
        "onesided.rank_maximal",
        "Rank-Maximal",
        "Produces a rank-maximal matching.",
        _always,
    ),
    AlgorithmEntry(
        "onesided.greedy",
        "Greedy",
        "Produces a greedy maximum matching.",
        _always,
    ),
    AlgorithmEntry(
        "onesided.generous",
        "Generous",
        "Produces a generous maximum matching.",
        _always,
    ),
    AlgorithmEntry(
        "onesided.greedy_generous",
        "Greedy-Generous",
        "Produces a greedy-generous maximum matching.",
        _always,
    ),
    AlgorithmEntry(
        "onesided.max_pareto",
        "Maximum Cardinality Pareto Optimal",
        "Produces a maximum cardinality Pareto optimal matching.",
        _tie_free,
    ),
    AlgorithmEntry(
        "onesided.popular",
        "Popular",
        "Produces a popular matching or reports that none exists.",
        _tie_free,
    ),
    AlgorithmEntry(
        "onesided.switching_graph",
        "Switching Graph",
        "Visualises the switching graph for popular matchings.",
        _tie_free,
        batch_ok=False,
    ),
)

_HA_EXTRA = (
    AlgorithmEntry(
        "onesided.rank_maximal_popular",
        "Rank-Maximal Popular",
        "Produces a rank-maximal popular matching or reports that none exists.",
        _tie_free,
    ),
    AlgorithmEntry(
        "onesided.popular_random",
        "Popular Uniform at Random",
        "Produces a popular matching uniform at random, or reports that none exists.",
        _tie_free,
    ),
    AlgorithmEntry(
        "onesided.generous_popular",
        "Generous Maximum Cardinality Popular",
        "Produces a maximum cardinality popular matching with a generous profile.",
        _tie_free,
    ),
    AlgorithmEntry(
        "onesided.min_cost_popular",
        "Minimum Cost Maximum Cardinality Popular",
        "Produces a maximum cardinality popular matching with minimum cost.",
        _tie_free,
    ),
    AlgorithmEntry(
        "onesided.popular_pairs",
        "Popular Pairs",
        "Finds all admitted popular pairs.",
        _tie_free,
        batch_ok=False,
    ),
    AlgorithmEntry(
        "onesided.count_popular",
        "Number of Popular Matchings",
        "Computes the number of popular matchings admitted by the instance.",
        _tie_free,
        batch_ok=False,
    ),
    AlgorithmEntry(
        "onesided.all_popular",
        "All Popular Matchings",
        "Finds all admitted popular matchings.",
        _tie_free,
        batch_ok=False,
    ),
)

_HR_ENTRIES = (
    AlgorithmEntry(
        "twosided.stable_no_ties",
        "No-Ties Stable",
        "Produces the resident-optimal stable matching.",
        _tie_free,
    ),
    AlgorithmEntry(
        "twosided.super_stable",
        "Super Stable",
        "Produces a super-stable matching, or reports that none exists.",
        _always,
    ),
    AlgorithmEntry(
        "twosided.kiraly_one_sided",
        "Kiraly One-Sided Ties",
        "Produces an approximation for a maximum stable matching for instances "
        "with complete or incomplete lists and ties only on the hospital side.",
        _left_tie_free,
    ),
    AlgorithmEntry(
        "twosided.kiraly_two_sided",
        "Kiraly Two-Sided Ties",
        "Produces an approximation for a maximum stable matching for instances "
        "with complete or incomplete lists and ties on both sides.",
        _always,
    ),
)

_SM_EXTRA = (
    AlgorithmEntry(
        "twosided.max_popular",
        "Maximum Popular",
        "Produces a maximum popular matching in the SMI context.",
        _sm_and(_tie_free),
    ),
    AlgorithmEntry(
        "twosided.strongly_stable",
        "Strongly Stable",
        "Produces a strongly stable matching in the SMTI context, "
        "or reports that none exists.",
        _sm_and(_has_ties),
    ),
    AlgorithmEntry(
        "twosided.egalitarian",
        "Egalitarian Stable",
        "Produces an egalitarian stable matching in the SM context "
        "(requires complete preference lists).",
        _sm_and(_tie_free_complete),
    ),
    AlgorithmEntry(
        "twosided.min_regret",
        "Minimum Regret Stable",
        "Produces a minimum regret stable matching in the SM context "
        "(requires complete preference lists).",
        _sm_and(_tie_free_complete),
    ),
    AlgorithmEntry(
        "twosided.min_m_regret",
        "Minimum M-Regret Stable",
        "Produces a stable matching in the SM context with minimum regret "
        "over the first agent set (M) (requires complete preference lists).",
        _sm_and(_tie_free_complete),
    ),
    AlgorithmEntry(
        "twosided.min_w_regret",
        "Minimum W-Regret Stable",
        "Produces a stable matching in the SM context with minimum regret "
        "over the second agent set (W) (requires complete preference lists).",
        _sm_and(_tie_free_complete),
    ),
    AlgorithmEntry(
        "twosided.all_stable_pairs",
        "All Stable Pairs",
        "Finds all stable pairs through enumeration in the SM context "
        "(requires complete preference lists).",
        _sm_and(_tie_free_complete),
        batch_ok=False,
    ),
    AlgorithmEntry(
        "twosided.all_stable",
        "All Stable Matchings",
        "Finds all stable matchings (two different algorithms for different "
        "settings, either Break-Marriage or Rotation-Elimination).",
        _sm_and(_tie_free),
        batch_ok=False,
    ),
)

_SR_ENTRIES = (
    AlgorithmEntry(
        "roommates.min_regret",
        "Minimum Regret Matching",
        "Find a minimum regret stable matching or report that none exists",
        _tie_free,
    ),
    AlgorithmEntry(
        "roommates.tan_hsueh",
        "Tan-Hsueh",
        "Produces a reduced stable partition in a given instance with "
        "arbitrary tie-breaking in the presence of ties.",
        _always,
        batch_ok=False,
    ),
    AlgorithmEntry(
        "roommates.stable_no_ties",
        "Default Stable (No Ties)",
        "Produces a stable matching or reports that none exists.",
        _tie_free,
    ),
    AlgorithmEntry(
        "roommates.max_stable",
        "Maximum Stable",
        "Produces a maximum stable matching by deleting one agent from each "
        "odd cycle of a reduced stable partition.",
        _tie_free,
    ),
    AlgorithmEntry(
        "roommates.all_stable_pairs",
        "All Stable Pairs",
        "Finds all (if any) admitted stable pairs through enumeration.",
        _tie_free,
        batch_ok=False,
    ),
    AlgorithmEntry(
        "roommates.all_stable",
        "All Stable Matchings",
        "Finds all (if any) admitted stable matchings through enumeration.",
        _tie_free,
        batch_ok=False,
    ),
    AlgorithmEntry(
        "roommates.egalitarian",
        "Egalitarian Stable Matching",
        "Find an egalitarian stable matching or report that none exists",
        _tie_free,
    ),
)

_SPA_ENTRIES = (
    AlgorithmEntry(
        "spa.min_cost",
        "Cost-Optimal One-Sided",
        "Produces a minimum cost maximum matching considering only student "
        "preferences.",
        _always,
    ),
    AlgorithmEntry(
        "spa.greedy",
        "Greedy One-Sided",
        "Produces a greedy maximum matching considering only student "
        "preferences.",
        _always,
    ),
    AlgorithmEntry(
        "spa.generous",
        "Generous One-Sided",
        "Produces a generous maximum matching considering only student "
        "preferences.",
        _always,
    ),
)

_SPAS_EXTRA = (
    AlgorithmEntry(
        "spa.student_optimal",
        "Student-Optimal Stable",
        "Produces the student-optimal stable matching.",
        _spas_stable_ready,
    ),
    AlgorithmEntry(
        "spa.lecturer_optimal",
        "Lecturer-Optimal Stable",
        "Produces the lecturer-optimal stable matching.",
        _spas_stable_ready,
    ),
)

CATALOG: dict[ProblemClass, tuple[AlgorithmEntry, ...]] = {
    ProblemClass.CHA: _CHA_ENTRIES,
    ProblemClass.HA: _CHA_ENTRIES + _HA_EXTRA,
    ProblemClass.HR: _HR_ENTRIES + _SM_EXTRA,
    ProblemClass.SM: _HR_ENTRIES + _SM_EXTRA,
    ProblemClass.SR: _SR_ENTRIES,
    ProblemClass.SPA: _SPA_ENTRIES,
    ProblemClass.SPAS: _SPA_ENTRIES + _SPAS_EXTRA,
}


def applicable_algorithms(
    props: InstanceProperties, batch: bool = False
) -> list[AlgorithmEntry]:
    """Catalog entries that can run on an instance with these properties."""
    out = []
    for entry in CATALOG[props.problem_class]:
        if batch and not entry.batch_ok:
            continue
        if entry.applies(props):
            out.append(entry)
    return out


def entry_by_name(problem_class: ProblemClass, name: str) -> AlgorithmEntry:
    for entry in CATALOG[problem_class]:
        if entry.name == name:
            return entry
    raise KeyError(name)
