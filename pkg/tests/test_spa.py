"""Student-project allocation algorithms checked against the exhaustive oracle."""

import numpy as np
import pytest

from matchkit import oracle as orc
from matchkit.errors import InapplicableError
from matchkit.generator import GeneratorParams, experiment_family, generate
from matchkit.metrics import compute_stats
from matchkit.model import (
    AgentId,
    Instance,
    ProblemClass,
    Role,
    is_stable,
)
from matchkit.spa import SPA_OBJECTIVES, spa_profile_opt, spa_s_stable
from matchkit.textio import parse

from conftest import HA_PAIR_TEXT, agent_pairs

BIG = 10 ** 9

# marriage-shaped: unit capacities, one project per lecturer, two stable matchings
TWO_STABLE_TEXT = "2 2 2\n1: 1 2\n2: 2 1\n1: 1: 2 1\n2: 1: 1 2\n1: 1: 1\n2: 1: 2"

# one lecturer of capacity 1 owning both unit projects: the serial layer binds
TIGHT_TEXT = "2 2 1\n1: 1\n2: 2\n1: 1: 1 2\n1: 1: 1\n2: 1: 1"

ONE_TEXT = "1 1 1\n1: 1\n1: 1: 1\n1: 1: 1"


def spas(text):
    return parse(text, ProblemClass.SPAS)


def student_rank(inst, matching, s):
    p = matching.partner(s)
    return BIG if p is None else inst.rank(s, p)


def random_spas(rng, tie_prob=0.0, pc=ProblemClass.SPAS):
    n_stu = int(rng.integers(1, 7))
    n_proj = int(rng.integers(1, 6))
    n_lec = int(rng.integers(1, min(n_proj, 3) + 1))
    tot_proj = int(rng.integers(n_proj, n_proj + 5))
    params = GeneratorParams(
        counts={Role.STUDENT: n_stu, Role.PROJECT: n_proj, Role.LECTURER: n_lec},
        totals={
            Role.PROJECT: tot_proj,
            Role.LECTURER: int(rng.integers(n_lec, tot_proj + 2)),
        },
        tie_prob=tie_prob,
        length_bounds=(1, n_proj),
        num_instances=1,
        seed=int(rng.integers(1 << 40)),
        even_split=bool(rng.integers(2)),
    )
    return generate(pc, params)[0]


def marriage_shaped(rng, n):
    """n students, n unit projects each owned by its own unit lecturer."""
    students = [AgentId(Role.STUDENT, i + 1) for i in range(n)]
    projects = [AgentId(Role.PROJECT, j + 1) for j in range(n)]
    lecturers = [AgentId(Role.LECTURER, k + 1) for k in range(n)]
    prefs = {}
    for s in students:
        prefs[s] = tuple((projects[j],) for j in rng.permutation(n))
    for k, l in enumerate(lecturers):
        prefs[l] = tuple((students[i],) for i in rng.permutation(n))
    return Instance(
        problem_class=ProblemClass.SPAS,
        counts={Role.STUDENT: n, Role.PROJECT: n, Role.LECTURER: n},
        capacities={},
        prefs=prefs,
        project_owner=dict(zip(projects, lecturers)),
    )


# --- profile objectives ----------------------------------------------------


def test_profile_objectives_on_tied_instance(spa_ties_instance):
    m = spa_profile_opt(spa_ties_instance, "greedy")
    stats = compute_stats(spa_ties_instance, m)
    assert agent_pairs(m) == [(1, 1), (2, 2), (3, 3)]
    assert (m.size, stats.groups[Role.STUDENT].profile) == (3, (3, 0))
    mc = spa_profile_opt(spa_ties_instance, "min-cost")
    assert (mc.size, compute_stats(spa_ties_instance, mc).total_cost) == (3, 3)


def test_lecturer_capacity_binds_below_project_capacities():
    inst = spas(TIGHT_TEXT)
    for objective in SPA_OBJECTIVES:
        assert agent_pairs(spa_profile_opt(inst, objective)) == [(1, 1)]
    assert agent_pairs(spa_s_stable(inst, "student")) == [(1, 1)]
    assert agent_pairs(spa_s_stable(inst, "lecturer")) == [(1, 1)]


def test_single_student_matched_everywhere():
    inst = spas(ONE_TEXT)
    for objective in SPA_OBJECTIVES:
        assert agent_pairs(spa_profile_opt(inst, objective)) == [(1, 1)]
    for side in ("student", "lecturer"):
        assert agent_pairs(spa_s_stable(inst, side)) == [(1, 1)]


def test_profile_objectives_match_oracle_on_random_instances(rng):
    for trial in range(40):
        tie_prob = 0.0 if trial % 2 else 0.4
        pc = ProblemClass.SPAS if trial % 3 else ProblemClass.SPA
        inst = random_spas(rng, tie_prob=tie_prob, pc=pc)
        max_rank = max(
            (len(inst.pref(s)) for s in inst.agents(Role.STUDENT)), default=0
        )

        def padded(profile):
            return tuple(profile) + (0,) * (max_rank - len(profile))

        for objective in SPA_OBJECTIVES:
            m = spa_profile_opt(inst, objective)
            _, expected = orc.oracle_optimum(inst, objective)
            stats = compute_stats(inst, m)
            if objective == "min-cost":
                assert (m.size, stats.total_cost) == expected
            else:
                group = stats.groups.get(Role.STUDENT)
                profile = padded(group.profile if group else ())
                assert (m.size, profile) == (expected[0], padded(expected[1]))


def test_profile_objective_rejects_unknown_name(spas_instance):
    with pytest.raises(ValueError):
        spa_profile_opt(spas_instance, "fastest")


# --- stable modes -----------------------------------------------------------


def test_student_mode_on_known_instance(spas_instance):
    m = spa_s_stable(spas_instance, "student")
    assert agent_pairs(m) == [(1, 1), (2, 2), (3, 3)]
    assert is_stable(spas_instance, m)


def test_modes_split_on_marriage_shaped_instance():
    inst = spas(TWO_STABLE_TEXT)
    assert agent_pairs(spa_s_stable(inst, "student")) == [(1, 1), (2, 2)]
    assert agent_pairs(spa_s_stable(inst, "lecturer")) == [(1, 2), (2, 1)]


def test_stable_modes_are_deterministic(spas_instance):
    for side in ("student", "lecturer"):
        assert spa_s_stable(spas_instance, side) == spa_s_stable(
            spas_instance, side
        )


def test_stable_modes_match_oracle_on_random_instances(rng):
    for trial in range(60):
        inst = random_spas(rng)
        try:
            stable = orc.stable_matchings(inst)
        except orc.BudgetError:
            continue
        assert stable
        ms = spa_s_stable(inst, "student")
        ml = spa_s_stable(inst, "lecturer")
        assert ms in stable and ml in stable
        for s in inst.agents(Role.STUDENT):
            ranks = [student_rank(inst, m, s) for m in stable]
            assert student_rank(inst, ms, s) == min(ranks)
            assert student_rank(inst, ml, s) == max(ranks)


def test_stable_modes_split_on_marriage_shaped_instances(rng):
    seen_multi = 0
    for _ in range(25):
        inst = marriage_shaped(rng, int(rng.integers(4, 7)))
        try:
            stable = orc.stable_matchings(inst)
        except orc.BudgetError:
            continue
        ms = spa_s_stable(inst, "student")
        ml = spa_s_stable(inst, "lecturer")
        assert ms in stable and ml in stable
        if len(stable) > 1:
            seen_multi += 1
        for s in inst.agents(Role.STUDENT):
            ranks = [student_rank(inst, m, s) for m in stable]
            assert student_rank(inst, ms, s) == min(ranks)
            assert student_rank(inst, ml, s) == max(ranks)
    assert seen_multi >= 5


def test_matched_students_identical_across_stable_set(rng):
    for _ in range(25):
        inst = random_spas(rng)
        try:
            stable = orc.stable_matchings(inst)
        except orc.BudgetError:
            continue
        students = list(inst.agents(Role.STUDENT))
        matched = {
            frozenset(s for s in students if m.partner(s) is not None)
            for m in stable
        }
        assert len(matched) == 1
        for side in ("student", "lecturer"):
            mine = frozenset(
                s
                for s in students
                if spa_s_stable(inst, side).partner(s) is not None
            )
            assert mine in matched


def test_mean_cost_hierarchy_on_experiment_batches():
    n = 25
    sums = {"stable": 0, "generous": 0, "greedy": 0, "min-cost": 0}
    for seed in range(n):
        inst = experiment_family(1, seed)
        sums["stable"] += compute_stats(
            inst, spa_s_stable(inst, "student")
        ).total_cost
        for objective in ("generous", "greedy", "min-cost"):
            m = spa_profile_opt(inst, objective)
            sums[objective] += compute_stats(inst, m).total_cost
    assert (
        sums["stable"] >= sums["generous"] >= sums["greedy"] >= sums["min-cost"]
    )


# --- applicability ----------------------------------------------------------


def test_stability_needs_lecturer_lists(spa_ties_instance):
    with pytest.raises(InapplicableError):
        spa_s_stable(spa_ties_instance, "student")


def test_stability_rejects_ties():
    text = "2 2 1\n1: (1 2)\n2: 1\n1: 2: 1 2\n1: 1: 1\n2: 1: 1"
    with pytest.raises(InapplicableError):
        spa_s_stable(spas(text), "lecturer")


def test_spa_entry_points_reject_other_classes():
    inst = parse(HA_PAIR_TEXT, ProblemClass.HA)
    with pytest.raises(InapplicableError):
        spa_profile_opt(inst, "greedy")
    with pytest.raises(InapplicableError):
        spa_s_stable(inst, "student")


def test_stable_mode_rejects_unknown_side(spas_instance):
    with pytest.raises(ValueError):
        spa_s_stable(spas_instance, "dean")
