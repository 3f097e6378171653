"""Random instance generation: goldens, determinism, statistics, wire params."""

import numpy as np
import pytest

from matchkit import ProblemClass, classify, parse, serialize
from matchkit.errors import ParamError
from matchkit.generator import (
    GeneratorParams,
    experiment_family,
    generate,
    params_from_wire,
)
from matchkit.model import Role


def _wire(pc, **payload):
    return generate(pc, params_from_wire(pc, payload))


# --- goldens ---------------------------------------------------------------


@pytest.mark.parametrize("seed", [0, 1, 7, 123456789])
def test_sr_pair_full_density_is_forced(seed):
    # two agents, full lists, no ties: only one possible instance
    [inst] = _wire(
        ProblemClass.SR,
        numOfRoommates=2,
        probabilityOfTies=0,
        preferenceListDensity=1,
        numOfInstances=1,
        seed=seed,
    )
    assert serialize(inst) == "2\n2 \n1"


def test_sr_single_agent_serializes_to_count_only():
    [inst] = _wire(ProblemClass.SR, numOfRoommates=1, preferenceListDensity=1, seed=3)
    assert serialize(inst) == "1\n"


# --- determinism -----------------------------------------------------------


def test_same_seed_reproduces_bytes():
    payload = dict(
        numOfResidents=6,
        numOfHospitals=4,
        totalCapacity=9,
        probabilityOfTies=0.25,
        skewness=3,
        numOfInstances=4,
        seed=2024,
    )
    a = [serialize(i) for i in _wire(ProblemClass.HR, **payload)]
    b = [serialize(i) for i in _wire(ProblemClass.HR, **payload)]
    assert a == b
    assert len(set(a)) > 1  # instances within a batch differ


def test_instance_streams_depend_only_on_seed_and_index():
    # instance k of a longer batch matches instance k of a shorter one
    long = _wire(ProblemClass.SM, numOfAgents=5, numOfInstances=3, seed=77)
    short = _wire(ProblemClass.SM, numOfAgents=5, numOfInstances=1, seed=77)
    assert serialize(long[0]) == serialize(short[0])


def test_omitted_seed_still_generates():
    [inst] = _wire(ProblemClass.SM, numOfAgents=4)
    assert len(list(inst.agents(Role.RESIDENT))) == 4


# --- structural properties -------------------------------------------------


def test_sr_lists_are_symmetric_and_bounded():
    n, density = 10, 0.5
    target = round(density * (n - 1))
    for inst in _wire(
        ProblemClass.SR,
        numOfRoommates=n,
        preferenceListDensity=density,
        numOfInstances=5,
        seed=8,
    ):
        listed = {
            a.index: {t.index for g in inst.pref(a) for t in g}
            for a in inst.agents(Role.ROOMMATE)
        }
        for i, targets in listed.items():
            assert i not in targets
            assert len(targets) <= target
            for j in targets:
                assert i in listed[j]


def test_two_sided_lists_rank_exactly_their_listers():
    for inst in _wire(
        ProblemClass.HR,
        numOfResidents=7,
        numOfHospitals=4,
        totalCapacity=8,
        prefListLengthLowerBound=1,
        prefListLengthUpperBound=3,
        numOfInstances=6,
        seed=13,
    ):
        listers = {h.index: set() for h in inst.agents(Role.HOSPITAL)}
        for r in inst.agents(Role.RESIDENT):
            for g in inst.pref(r):
                for h in g:
                    listers[h.index].add(r.index)
        for h in inst.agents(Role.HOSPITAL):
            ranked = {t.index for g in inst.pref(h) for t in g}
            assert ranked == listers[h.index]


def test_list_length_bounds_respected():
    lo, hi = 2, 4
    for inst in _wire(
        ProblemClass.HA,
        numOfApplicants=6,
        numOfHouses=5,
        prefListLengthLowerBound=lo,
        prefListLengthUpperBound=hi,
        numOfInstances=8,
        seed=21,
    ):
        for a in inst.agents(Role.APPLICANT):
            n = sum(len(g) for g in inst.pref(a))
            assert lo <= n <= hi


def test_even_capacity_split_gives_remainder_to_low_indices():
    [inst] = _wire(
        ProblemClass.HR,
        numOfResidents=3,
        numOfHospitals=3,
        totalCapacity=7,
        seed=5,
    )
    caps = [inst.capacity(h) for h in inst.agents(Role.HOSPITAL)]
    assert caps == [3, 2, 2]


def test_random_capacity_split_sums_and_stays_positive():
    for seed in range(6):
        [inst] = _wire(
            ProblemClass.CHA,
            numOfApplicants=5,
            numOfHouses=4,
            totalCapacity=9,
            evenPositionDistribution=False,
            seed=seed,
        )
        caps = [inst.capacity(h) for h in inst.agents(Role.HOUSE)]
        assert sum(caps) == 9
        assert min(caps) >= 1


def test_spa_project_owners_rotate_over_lecturers():
    [inst] = _wire(
        ProblemClass.SPA,
        numOfStudents=4,
        numOfProjects=7,
        numOfLecturers=3,
        totalProjectCapacity=8,
        totalLecturerCapacity=6,
        seed=2,
    )
    for p in inst.agents(Role.PROJECT):
        assert inst.owner(p).index == (p.index - 1) % 3 + 1


def test_spas_lecturers_rank_exactly_their_applicants():
    for inst in _wire(
        ProblemClass.SPAS,
        numOfStudents=6,
        numOfProjects=8,
        numOfLecturers=3,
        totalProjectCapacity=10,
        totalLecturerCapacity=8,
        prefListLengthUpperBound=4,
        numOfInstances=4,
        seed=19,
    ):
        assert classify(inst).lecturer_cover


@pytest.mark.parametrize(
    "pc,payload",
    [
        (ProblemClass.SM, dict(numOfAgents=5, probabilityOfTies=0.4, seed=1)),
        (
            ProblemClass.HR,
            dict(numOfResidents=5, numOfHospitals=3, totalCapacity=6, seed=1),
        ),
        (ProblemClass.HA, dict(numOfApplicants=4, numOfHouses=4, seed=1)),
        (
            ProblemClass.CHA,
            dict(numOfApplicants=4, numOfHouses=3, totalCapacity=5, seed=1),
        ),
        (ProblemClass.SR, dict(numOfRoommates=6, preferenceListDensity=0.7, seed=1)),
        (
            ProblemClass.SPAS,
            dict(
                numOfStudents=4,
                numOfProjects=5,
                numOfLecturers=2,
                totalProjectCapacity=6,
                totalLecturerCapacity=5,
                seed=1,
            ),
        ),
    ],
)
def test_generated_text_round_trips(pc, payload):
    for inst in _wire(pc, numOfInstances=3, **payload):
        text = serialize(inst)
        assert serialize(parse(text, pc)) == text


# --- distribution checks (seeded, so deterministic) ------------------------


def test_tie_frequency_matches_probability():
    prob = 0.3
    params = GeneratorParams(
        counts={Role.RESIDENT: 6, Role.HOSPITAL: 6},
        tie_prob=prob,
        length_bounds=(6, 6),
        num_instances=200,
        seed=99,
    )
    merges = decisions = 0
    for inst in generate(ProblemClass.SM, params):
        for a in inst.agents(Role.RESIDENT):
            plist = inst.pref(a)
            merges += sum(len(g) - 1 for g in plist)
            decisions += sum(len(g) for g in plist) - 1
    rate = merges / decisions
    band = 3 * (prob * (1 - prob) / decisions) ** 0.5
    assert abs(rate - prob) < band


def _first_choice_counts(skewness, seed):
    params = GeneratorParams(
        counts={Role.APPLICANT: 1, Role.HOUSE: 10},
        skewness=skewness,
        length_bounds=(10, 10),
        num_instances=4000,
        seed=seed,
    )
    counts = np.zeros(10, int)
    for inst in generate(ProblemClass.HA, params):
        a = next(iter(inst.agents(Role.APPLICANT)))
        counts[inst.pref(a)[0][0].index - 1] += 1
    return counts


def test_unit_skew_first_choice_is_uniform():
    counts = _first_choice_counts(1.0, seed=5)
    expected = counts.sum() / 10
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 21.67  # df=9 critical value at significance 0.01


def test_high_skew_first_choice_is_monotone():
    counts = _first_choice_counts(35.0, seed=5)
    assert (np.diff(counts) <= 0).all()
    # most popular house dominates the least popular by a wide margin
    assert counts[0] > 10 * counts[-1]


# --- experiment family -----------------------------------------------------


def test_experiment_family_shape_x1():
    inst = experiment_family(1, seed=11)
    assert len(list(inst.agents(Role.STUDENT))) == 5
    assert len(list(inst.agents(Role.PROJECT))) == 7
    assert len(list(inst.agents(Role.LECTURER))) == 1
    assert [inst.capacity(p) for p in inst.agents(Role.PROJECT)] == [2, 2, 2, 1, 1, 1, 1]
    assert [inst.capacity(l) for l in inst.agents(Role.LECTURER)] == [7]
    props = classify(inst)
    assert props.lecturer_cover
    assert not props.any_ties()
    for s in inst.agents(Role.STUDENT):
        assert sum(len(g) for g in inst.pref(s)) == 6


def test_experiment_family_scales_with_x():
    inst = experiment_family(2, seed=4)
    assert len(list(inst.agents(Role.STUDENT))) == 10
    assert len(list(inst.agents(Role.PROJECT))) == 14
    assert len(list(inst.agents(Role.LECTURER))) == 2
    assert sum(inst.capacity(p) for p in inst.agents(Role.PROJECT)) == 20
    assert sum(inst.capacity(l) for l in inst.agents(Role.LECTURER)) == 14
    assert serialize(inst) == serialize(experiment_family(2, seed=4))


# --- wire parameter handling ----------------------------------------------


def test_wire_defaults_fill_in():
    params = params_from_wire(ProblemClass.SM, {"numOfAgents": 4})
    assert params.tie_prob == 0.0
    assert params.skewness == 1.0
    assert params.num_instances == 1
    assert params.length_bounds == (1, 4)
    assert params.seed is None


@pytest.mark.parametrize(
    "payload,fragment",
    [
        ({"numOfRoommates": 2}, "missing parameter preferenceListDensity"),
        (
            {"numOfRoommates": 2, "preferenceListDensity": 1, "bogus": 1},
            "unknown parameter bogus",
        ),
        (
            {"numOfRoommates": 2, "preferenceListDensity": 0},
            "preferenceListDensity",
        ),
        (
            {"numOfRoommates": 0, "preferenceListDensity": 1},
            "count must be at least 1",
        ),
    ],
)
def test_wire_rejects_bad_sr_payloads(payload, fragment):
    with pytest.raises(ParamError, match=fragment):
        params_from_wire(ProblemClass.SR, payload)


@pytest.mark.parametrize(
    "payload,fragment",
    [
        ({"numOfAgents": 3, "probabilityOfTies": 1.5}, "probabilityOfTies"),
        ({"numOfAgents": 3, "skewness": 0.5}, "skewness"),
        ({"numOfAgents": 3, "numOfInstances": 0}, "numOfInstances"),
        ({"numOfAgents": 3, "prefListLengthUpperBound": 9}, "bounds"),
        ({"numOfAgents": 3, "prefListLengthLowerBound": 0}, "bounds"),
        ({"numOfAgents": "three"}, "must be a number"),
        ({"numOfAgents": True}, "must be a number"),
    ],
)
def test_wire_rejects_bad_sm_payloads(payload, fragment):
    with pytest.raises(ParamError, match=fragment):
        params_from_wire(ProblemClass.SM, payload)


def test_wire_rejects_insufficient_totals():
    with pytest.raises(ParamError, match="cannot cover"):
        params_from_wire(
            ProblemClass.HR,
            {"numOfResidents": 3, "numOfHospitals": 4, "totalCapacity": 3},
        )
    with pytest.raises(ParamError, match="cannot cover"):
        params_from_wire(
            ProblemClass.SPAS,
            {
                "numOfStudents": 3,
                "numOfProjects": 4,
                "numOfLecturers": 2,
                "totalProjectCapacity": 4,
                "totalLecturerCapacity": 1,
            },
        )


def test_wire_rejects_non_object_payload():
    with pytest.raises(ParamError, match="object"):
        params_from_wire(ProblemClass.SM, [1, 2])
