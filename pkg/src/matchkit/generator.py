"""Seedable random instance generation.

Popularity skew is linear: with skewness s, the most popular target is
drawn s times as often as the least popular, weights interpolating
between them.  Ties form by merging each entry into its predecessor's
tie group independently with probabilityOfTies.  Capacitated roles split
a stated total either evenly (remainder to the lowest indices) or by a
uniform random composition with every part at least 1.

Reproducibility: instance i of a batch draws from an independent Philox
substream jumped(i) off the seed, so batches are order-independent and
byte-stable across runs.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParamError
from .model import AgentId, Instance, ProblemClass, Role

_LEFT = {
    ProblemClass.SM: Role.RESIDENT,
    ProblemClass.HR: Role.RESIDENT,
    ProblemClass.HA: Role.APPLICANT,
    ProblemClass.CHA: Role.APPLICANT,
    ProblemClass.SPA: Role.STUDENT,
    ProblemClass.SPAS: Role.STUDENT,
}

_RIGHT = {
    ProblemClass.SM: Role.HOSPITAL,
    ProblemClass.HR: Role.HOSPITAL,
    ProblemClass.HA: Role.HOUSE,
    ProblemClass.CHA: Role.HOUSE,
    ProblemClass.SPA: Role.PROJECT,
    ProblemClass.SPAS: Role.PROJECT,
}


@dataclass(frozen=True)
class GeneratorParams:
    counts: dict[Role, int]
    totals: dict[Role, int] = field(default_factory=dict)
    tie_prob: float = 0.0
    skewness: float = 1.0
    length_bounds: Optional[tuple[int, int]] = None
    density: Optional[float] = None  # roommates only
    even_split: bool = True
    num_instances: int = 1
    seed: Optional[int] = None


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed).jumped(index))


def _weights(n: int, s: float) -> np.ndarray:
    if n == 1:
        return np.ones(1)
    w = np.linspace(s, 1.0, n)
    return w / w.sum()


def _skewed_order(rng, candidates: np.ndarray, weights: np.ndarray) -> list[int]:
    """All of `candidates` in a weighted random order."""
    if len(candidates) == 0:
        return []
    w = weights[candidates]
    return list(rng.choice(candidates, size=len(candidates), replace=False, p=w / w.sum()))

def _skewed_sample(rng, n: int, size: int, weights: np.ndarray) -> list[int]:
    return list(rng.choice(n, size=size, replace=False, p=weights))


def _tie_groups(rng, order: list[int], tie_prob: float) -> tuple[tuple[int, ...], ...]:
    groups: list[list[int]] = []
    for i, x in enumerate(order):
        if i > 0 and tie_prob > 0 and rng.random() < tie_prob:
            groups[-1].append(x)
        else:
            groups.append([x])
    return tuple(tuple(g) for g in groups)


def _split_total(rng, total: int, n: int, even: bool) -> list[int]:
    if even:
        base, extra = divmod(total, n)
        return [base + (1 if i < extra else 0) for i in range(n)]
    # random composition with every part >= 1
    if n == 1:
        return [total]
    cuts = np.sort(rng.choice(total - 1, size=n - 1, replace=False)) + 1
    edges = np.concatenate(([0], cuts, [total]))
    return list(np.diff(edges).astype(int))


def _validate(problem_class: ProblemClass, p: GeneratorParams) -> None:
    def bad(msg):
        raise ParamError(msg)

    for role, n in p.counts.items():
        if n < 1:
            bad(f"{role.value} count must be at least 1")
    if not 0.0 <= p.tie_prob <= 1.0:
        bad("probabilityOfTies must lie in [0, 1]")
    if p.skewness < 1.0:
        bad("skewness must be at least 1")
    if p.num_instances < 1:
        bad("numOfInstances must be at least 1")
    if problem_class is ProblemClass.SR:
        if p.density is None or not 0.0 < p.density <= 1.0:
            bad("preferenceListDensity must lie in (0, 1]")
        return
    n_targets = p.counts[_RIGHT[problem_class]]
    if p.length_bounds is not None:
        lo, hi = p.length_bounds
        if not 1 <= lo <= hi <= n_targets:
            bad(
                "preference list bounds must satisfy "
                f"1 <= lower <= upper <= {n_targets}"
            )
    for role, total in p.totals.items():
        if total < p.counts[role]:
            bad(
                f"total {role.value} capacity {total} cannot cover "
                f"{p.counts[role]} agents with capacity at least 1"
            )


def generate(problem_class: ProblemClass, params: GeneratorParams) -> list[Instance]:
    _validate(problem_class, params)
    seed = params.seed if params.seed is not None else secrets.randbits(63)
    out = []
    for i in range(params.num_instances):
        rng = _rng(seed, i)
        if problem_class is ProblemClass.SR:
            out.append(_gen_sr(rng, params))
        elif problem_class in (ProblemClass.SPA, ProblemClass.SPAS):
            out.append(_gen_spa(rng, problem_class, params))
        else:
            out.append(_gen_bipartite(rng, problem_class, params))
    return out


def _gen_sr(rng, p: GeneratorParams) -> Instance:
    n = p.counts[Role.ROOMMATE]
    agents = [AgentId(Role.ROOMMATE, i) for i in range(1, n + 1)]
    length = int(round(p.density * (n - 1)))
    w = _weights(n, p.skewness)
    draws: list[list[int]] = []
    for i in range(n):
        others = np.array([j for j in range(n) if j != i])
        if length == 0 or len(others) == 0:
            draws.append([])
            continue
        wo = w[others]
        draws.append(
            list(rng.choice(others, size=min(length, len(others)),
                            replace=False, p=wo / wo.sum()))
        )
    listed = [set(d) for d in draws]
    prefs = {}
    for i in range(n):
        kept = [j for j in draws[i] if i in listed[j]]
        groups = _tie_groups(rng, kept, p.tie_prob)
        prefs[agents[i]] = tuple(
            tuple(agents[j] for j in g) for g in groups
        )
    return Instance(
        problem_class=ProblemClass.SR,
        counts={Role.ROOMMATE: n},
        capacities={},
        prefs=prefs,
        project_owner={},
    )


def _draw_left_lists(rng, nL, nR, p: GeneratorParams):
    lo, hi = p.length_bounds if p.length_bounds else (1, nR)
    w = _weights(nR, p.skewness)
    return [
        _skewed_sample(rng, nR, int(rng.integers(lo, hi + 1)), w)
        for _ in range(nL)
    ]


def _rank_listers(rng, nL, nR, left_draws, p: GeneratorParams):
    """Right-side orders over exactly the agents that listed each target."""
    wL = _weights(nL, p.skewness)
    listers = [[] for _ in range(nR)]
    for i, draw in enumerate(left_draws):
        for j in draw:
            listers[j].append(i)
    return [
        _skewed_order(rng, np.array(listers[j], dtype=int), wL)
        for j in range(nR)
    ]


def _gen_bipartite(rng, pc: ProblemClass, p: GeneratorParams) -> Instance:
    left_role, right_role = _LEFT[pc], _RIGHT[pc]
    nL = p.counts[left_role]
    nR = p.counts[right_role]
    lefts = [AgentId(left_role, i) for i in range(1, nL + 1)]
    rights = [AgentId(right_role, j) for j in range(1, nR + 1)]

    left_draws = _draw_left_lists(rng, nL, nR, p)
    prefs = {}
    for i, draw in enumerate(left_draws):
        groups = _tie_groups(rng, draw, p.tie_prob)
        prefs[lefts[i]] = tuple(tuple(rights[j] for j in g) for g in groups)

    capacities = {}
    if pc in (ProblemClass.HR, ProblemClass.CHA):
        caps = _split_total(
            rng, p.totals[right_role], nR, p.even_split
        )
        capacities = {rights[j]: caps[j] for j in range(nR)}

    if pc in (ProblemClass.SM, ProblemClass.HR):
        for j, order in enumerate(_rank_listers(rng, nL, nR, left_draws, p)):
            groups = _tie_groups(rng, order, p.tie_prob)
            prefs[rights[j]] = tuple(tuple(lefts[i] for i in g) for g in groups)

    return Instance(
        problem_class=pc,
        counts={left_role: nL, right_role: nR},
        capacities=capacities,
        prefs=prefs,
        project_owner={},
    )


def _gen_spa(rng, pc: ProblemClass, p: GeneratorParams) -> Instance:
    nS = p.counts[Role.STUDENT]
    nP = p.counts[Role.PROJECT]
    nLec = p.counts[Role.LECTURER]
    students = [AgentId(Role.STUDENT, i) for i in range(1, nS + 1)]
    projects = [AgentId(Role.PROJECT, j) for j in range(1, nP + 1)]
    lecturers = [AgentId(Role.LECTURER, k) for k in range(1, nLec + 1)]

    # projects spread round-robin over lecturers
    owner = {projects[j]: lecturers[j % nLec] for j in range(nP)}

    student_draws = _draw_left_lists(rng, nS, nP, p)
    prefs = {}
    for i, draw in enumerate(student_draws):
        groups = _tie_groups(rng, draw, p.tie_prob)
        prefs[students[i]] = tuple(tuple(projects[j] for j in g) for g in groups)

    proj_caps = _split_total(rng, p.totals[Role.PROJECT], nP, p.even_split)
    lec_caps = _split_total(rng, p.totals[Role.LECTURER], nLec, p.even_split)
    capacities = {projects[j]: proj_caps[j] for j in range(nP)}
    capacities.update({lecturers[k]: lec_caps[k] for k in range(nLec)})

    if pc is ProblemClass.SPAS:
        wS = _weights(nS, p.skewness)
        applicants = [set() for _ in range(nLec)]
        for i, draw in enumerate(student_draws):
            for j in draw:
                applicants[owner[projects[j]].index - 1].add(i)
        for k in range(nLec):
            order = _skewed_order(
                rng, np.array(sorted(applicants[k]), dtype=int), wS
            )
            groups = _tie_groups(rng, order, p.tie_prob)
            prefs[lecturers[k]] = tuple(
                tuple(students[i] for i in g) for g in groups
            )

    return Instance(
        problem_class=pc,
        counts={Role.STUDENT: nS, Role.PROJECT: nP, Role.LECTURER: nLec},
        capacities=capacities,
        prefs=prefs,
        project_owner=owner,
    )


def experiment_family(
    x: int, seed: int, problem_class: ProblemClass = ProblemClass.SPAS
) -> Instance:
    """One instance of the 5x students / 7x projects / x lecturers family.

    Project capacities total 10x and lecturer capacities 7x, split evenly.
    Lists are uniform and tie-free; students rank min(6, 7x) projects and
    lecturers rank every student who applied to one of their projects.
    """
    if x < 1:
        raise ParamError("x must be at least 1")
    params = GeneratorParams(
        counts={Role.STUDENT: 5 * x, Role.PROJECT: 7 * x, Role.LECTURER: x},
        totals={Role.PROJECT: 10 * x, Role.LECTURER: 7 * x},
        tie_prob=0.0,
        skewness=1.0,
        length_bounds=(min(6, 7 * x), min(6, 7 * x)),
        even_split=True,
        num_instances=1,
        seed=seed,
    )
    return generate(problem_class, params)[0]


# ---------------------------------------------------------------------------
# wire parameter schemas

_COMMON_OPTIONAL = {
    "probabilityOfTies": 0.0,
    "skewness": 1.0,
    "numOfInstances": 1,
    "seed": None,
}


_MISSING = object()


def _num(value, name, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParamError(f"{name} must be a number")
    return kind(value)


def params_from_wire(problem_class: ProblemClass, payload: dict) -> GeneratorParams:
    """Translate a wire parameter object into GeneratorParams.

    Unknown fields are rejected so client typos fail loudly.
    """
    if not isinstance(payload, dict):
        raise ParamError("parameters must be an object")
    data = dict(payload)

    def take(name, default=_MISSING):
        if name in data:
            return data.pop(name)
        if default is _MISSING:
            raise ParamError(f"missing parameter {name}")
        return default

    def take_int(name, **kw):
        return int(_num(take(name, **kw), name, int))

    tie_prob = _num(take("probabilityOfTies", default=0.0), "probabilityOfTies")
    skew = _num(take("skewness", default=1.0), "skewness")
    count = take_int("numOfInstances", default=1)
    seed = take("seed", default=None)
    if seed is not None:
        seed = int(_num(seed, "seed", int))

    pc = problem_class
    if pc is ProblemClass.SR:
        n = take_int("numOfRoommates")
        density = _num(take("preferenceListDensity"), "preferenceListDensity")
        params = GeneratorParams(
            counts={Role.ROOMMATE: n}, density=density, tie_prob=tie_prob,
            skewness=skew, num_instances=count, seed=seed,
        )
    elif pc is ProblemClass.SM:
        n = take_int("numOfAgents")
        lo = take_int("prefListLengthLowerBound", default=1)
        hi = take_int("prefListLengthUpperBound", default=n)
        params = GeneratorParams(
            counts={Role.RESIDENT: n, Role.HOSPITAL: n},
            length_bounds=(lo, hi), tie_prob=tie_prob, skewness=skew,
            num_instances=count, seed=seed,
        )
    elif pc is ProblemClass.HR:
        nL = take_int("numOfResidents")
        nR = take_int("numOfHospitals")
        total = take_int("totalCapacity")
        lo = take_int("prefListLengthLowerBound", default=1)
        hi = take_int("prefListLengthUpperBound", default=nR)
        even = bool(take("evenPositionDistribution", default=True))
        params = GeneratorParams(
            counts={Role.RESIDENT: nL, Role.HOSPITAL: nR},
            totals={Role.HOSPITAL: total}, length_bounds=(lo, hi),
            tie_prob=tie_prob, skewness=skew, even_split=even,
            num_instances=count, seed=seed,
        )
    elif pc in (ProblemClass.HA, ProblemClass.CHA):
        nL = take_int("numOfApplicants")
        nR = take_int("numOfHouses")
        lo = take_int("prefListLengthLowerBound", default=1)
        hi = take_int("prefListLengthUpperBound", default=nR)
        totals = {}
        even = True
        if pc is ProblemClass.CHA:
            totals = {Role.HOUSE: take_int("totalCapacity")}
            even = bool(take("evenPositionDistribution", default=True))
        params = GeneratorParams(
            counts={Role.APPLICANT: nL, Role.HOUSE: nR}, totals=totals,
            length_bounds=(lo, hi), tie_prob=tie_prob, skewness=skew,
            even_split=even, num_instances=count, seed=seed,
        )
    else:
        nS = take_int("numOfStudents")
        nP = take_int("numOfProjects")
        nLec = take_int("numOfLecturers")
        totalP = take_int("totalProjectCapacity")
        totalL = take_int("totalLecturerCapacity")
        lo = take_int("prefListLengthLowerBound", default=1)
        hi = take_int("prefListLengthUpperBound", default=nP)
        even = bool(take("evenPositionDistribution", default=True))
        params = GeneratorParams(
            counts={Role.STUDENT: nS, Role.PROJECT: nP, Role.LECTURER: nLec},
            totals={Role.PROJECT: totalP, Role.LECTURER: totalL},
            length_bounds=(lo, hi), tie_prob=tie_prob, skewness=skew,
            even_split=even, num_instances=count, seed=seed,
        )
    if data:
        raise ParamError(f"unknown parameter {sorted(data)[0]}")
    _validate(problem_class, params)
    return params
