"""Plain-text instance formats: parsing, serialization, classification.

One format per problem class, one agent per line after a count header:

    SR        "n"            then n preference lines (no id prefix)
    HR/SM     "n1 n2"        resident lines "i: prefs", hospital lines
                             "j: cap: prefs"
    HA/CHA    "n1 n2"        applicant lines "i: prefs", house lines "j: cap"
    SPA/SPAS  "n1 n2 n3"     student lines "i: prefs", lecturer lines
                             "k: cap: prefs" (prefs may be empty), project
                             lines "j: cap: lecturer-id"

Ties are parenthesized groups "(a b ...)".  Lines starting with '#' are
comments.  CRLF and trailing blanks are tolerated; output uses LF.  Ids are
normalized to contiguous 1-based integers in order of appearance.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import ParseError
from .model import (
    AgentId,
    Instance,
    PreferenceList,
    ProblemClass,
    Role,
    _PREF_TARGET,
)

_TOKEN_RE = re.compile(r"[()]|[^\s()]+")


def _int_token(tok: str, line_no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(line_no, f"non-numeric token '{tok}'") from None


def _parse_pref_tokens(text: str, line_no: int) -> list[list[int]]:
    """Raw tie groups of integer labels (resolution to ids happens later)."""
    groups: list[list[int]] = []
    open_group: Optional[list[int]] = None
    for tok in _TOKEN_RE.findall(text):
        if tok == "(":
            if open_group is not None:
                raise ParseError(line_no, "unbalanced parentheses")
            open_group = []
        elif tok == ")":
            if open_group is None:
                raise ParseError(line_no, "unbalanced parentheses")
            if not open_group:
                raise ParseError(line_no, "empty tie group")
            groups.append(open_group)
            open_group = None
        else:
            value = _int_token(tok, line_no)
            if open_group is not None:
                open_group.append(value)
            else:
                groups.append([value])
    if open_group is not None:
        raise ParseError(line_no, "unbalanced parentheses")
    return groups


@dataclass
class _Line:
    no: int  # 1-based position in the original text
    text: str


def _significant_lines(text: str) -> list[_Line]:
    lines = []
    for i, raw in enumerate(text.split("\n"), start=1):
        stripped = raw.rstrip("\r")
        if stripped.lstrip().startswith("#"):
            continue
        lines.append(_Line(i, stripped))
    # drop trailing blank lines
    while lines and not lines[-1].text.strip():
        lines.pop()
    return lines


def _split_sections(line: _Line, expected: int, what: str) -> list[str]:
    parts = line.text.split(":")
    if len(parts) == expected + 1 and not parts[-1].strip():
        parts = parts[:-1]  # tolerate a trailing colon with nothing after it
    if len(parts) != expected:
        raise ParseError(line.no, f"malformed {what} line")
    return parts


class _LabelSpace:
    """Maps raw integer labels to normalized contiguous 1-based ids."""

    def __init__(self, what: str):
        self.what = what
        self.ids: dict[int, int] = {}

    def define(self, label: int, line_no: int) -> int:
        if label in self.ids:
            raise ParseError(line_no, f"duplicate {self.what} id {label}")
        self.ids[label] = len(self.ids) + 1
        return self.ids[label]

    def resolve(self, label: int, line_no: int) -> int:
        if label not in self.ids:
            raise ParseError(line_no, f"dangling reference to {self.what} {label}")
        return self.ids[label]


def _take(lines: list[_Line], cursor: int, count: int, what: str) -> list[_Line]:
    got = lines[cursor : cursor + count]
    if len(got) < count:
        last = lines[-1].no if lines else 1
        raise ParseError(last + 1, f"expected {count} {what} lines, found {len(got)}")
    return got


def _resolve_groups(
    raw: list[list[int]],
    space: _LabelSpace,
    role: Role,
    line_no: int,
) -> PreferenceList:
    result = []
    seen: set[int] = set()
    for group in raw:
        ids = []
        for label in group:
            norm = space.resolve(label, line_no)
            if norm in seen:
                raise ParseError(line_no, f"duplicate entry {label} in a list")
            seen.add(norm)
            ids.append(AgentId(role, norm))
        result.append(tuple(ids))
    return tuple(result)


def _header_ints(lines: list[_Line], arity: int) -> list[int]:
    if not lines:
        raise ParseError(1, "empty instance")
    head = lines[0]
    toks = head.text.split()
    if len(toks) != arity:
        raise ParseError(head.no, f"header must contain {arity} count(s)")
    values = [_int_token(t, head.no) for t in toks]
    for v in values:
        if v < 0:
            raise ParseError(head.no, f"negative count {v}")
    return values


def _capacity(tok: str, line_no: int) -> int:
    cap = _int_token(tok.strip(), line_no)
    if cap < 1:
        raise ParseError(line_no, f"non-positive capacity {cap}")
    return cap


def parse(text: str, problem_class: ProblemClass) -> Instance:
    pc = problem_class
    lines = _significant_lines(text)
    if pc is ProblemClass.SR:
        return _parse_sr(lines)
    if pc in (ProblemClass.HR, ProblemClass.SM):
        return _parse_hr(lines, pc)
    if pc in (ProblemClass.HA, ProblemClass.CHA):
        return _parse_ha(lines, pc)
    return _parse_spa(lines, pc)


def _parse_sr(lines: list[_Line]) -> Instance:
    (n,) = _header_ints(lines, 1)
    body = lines[1:]
    if len(body) > n:
        raise ParseError(body[n].no, f"expected {n} preference lines")
    prefs: dict[AgentId, PreferenceList] = {}
    for i in range(1, n + 1):
        line = body[i - 1] if i - 1 < len(body) else None
        groups: list[tuple[AgentId, ...]] = []
        if line is not None and line.text.strip():
            seen: set[int] = set()
            for raw_group in _parse_pref_tokens(line.text, line.no):
                ids = []
                for label in raw_group:
                    if not 1 <= label <= n:
                        raise ParseError(
                            line.no, f"dangling reference to agent {label}"
                        )
                    if label == i:
                        raise ParseError(line.no, f"agent {i} references itself")
                    if label in seen:
                        raise ParseError(
                            line.no, f"duplicate entry {label} in a list"
                        )
                    seen.add(label)
                    ids.append(AgentId(Role.ROOMMATE, label))
                groups.append(tuple(ids))
        prefs[AgentId(Role.ROOMMATE, i)] = tuple(groups)
    counts = {Role.ROOMMATE: n}
    caps = {a: 1 for a in (AgentId(Role.ROOMMATE, i) for i in range(1, n + 1))}
    return Instance(ProblemClass.SR, counts, caps, prefs)


def _parse_hr(lines: list[_Line], pc: ProblemClass) -> Instance:
    n_res, n_hos = _header_ints(lines, 2)
    res_lines = _take(lines, 1, n_res, "resident")
    hos_lines = _take(lines, 1 + n_res, n_hos, "hospital")
    extra = lines[1 + n_res + n_hos :]
    if extra:
        raise ParseError(extra[0].no, "unexpected extra line")

    res_space = _LabelSpace("resident")
    hos_space = _LabelSpace("hospital")
    raw_res: list[tuple[int, list[list[int]]]] = []
    for line in res_lines:
        label_s, rest = _split_sections(line, 2, "resident")
        res_space.define(_int_token(label_s.strip(), line.no), line.no)
        raw_res.append((line.no, _parse_pref_tokens(rest, line.no)))
    caps: dict[AgentId, int] = {}
    raw_hos: list[tuple[int, list[list[int]]]] = []
    for line in hos_lines:
        label_s, cap_s, rest = _split_sections(line, 3, "hospital")
        idx = hos_space.define(_int_token(label_s.strip(), line.no), line.no)
        cap = _capacity(cap_s, line.no)
        if pc is ProblemClass.SM and cap != 1:
            raise ParseError(line.no, "capacity must be 1 in SM")
        caps[AgentId(Role.HOSPITAL, idx)] = cap
        raw_hos.append((line.no, _parse_pref_tokens(rest, line.no)))

    prefs: dict[AgentId, PreferenceList] = {}
    for i, (line_no, groups) in enumerate(raw_res, start=1):
        prefs[AgentId(Role.RESIDENT, i)] = _resolve_groups(
            groups, hos_space, Role.HOSPITAL, line_no
        )
    for j, (line_no, groups) in enumerate(raw_hos, start=1):
        prefs[AgentId(Role.HOSPITAL, j)] = _resolve_groups(
            groups, res_space, Role.RESIDENT, line_no
        )
    counts = {Role.RESIDENT: n_res, Role.HOSPITAL: n_hos}
    for i in range(1, n_res + 1):
        caps[AgentId(Role.RESIDENT, i)] = 1
    return Instance(pc, counts, caps, prefs)


def _parse_ha(lines: list[_Line], pc: ProblemClass) -> Instance:
    n_app, n_house = _header_ints(lines, 2)
    app_lines = _take(lines, 1, n_app, "applicant")
    house_lines = _take(lines, 1 + n_app, n_house, "house")
    extra = lines[1 + n_app + n_house :]
    if extra:
        raise ParseError(extra[0].no, "unexpected extra line")

    app_space = _LabelSpace("applicant")
    house_space = _LabelSpace("house")
    raw_app: list[tuple[int, list[list[int]]]] = []
    for line in app_lines:
        label_s, rest = _split_sections(line, 2, "applicant")
        app_space.define(_int_token(label_s.strip(), line.no), line.no)
        raw_app.append((line.no, _parse_pref_tokens(rest, line.no)))
    caps: dict[AgentId, int] = {}
    for line in house_lines:
        label_s, cap_s = _split_sections(line, 2, "house")
        idx = house_space.define(_int_token(label_s.strip(), line.no), line.no)
        cap = _capacity(cap_s, line.no)
        if pc is ProblemClass.HA and cap != 1:
            raise ParseError(line.no, "capacity must be 1 in HA")
        caps[AgentId(Role.HOUSE, idx)] = cap

    prefs: dict[AgentId, PreferenceList] = {}
    for i, (line_no, groups) in enumerate(raw_app, start=1):
        prefs[AgentId(Role.APPLICANT, i)] = _resolve_groups(
            groups, house_space, Role.HOUSE, line_no
        )
    counts = {Role.APPLICANT: n_app, Role.HOUSE: n_house}
    for i in range(1, n_app + 1):
        caps[AgentId(Role.APPLICANT, i)] = 1
    return Instance(pc, counts, caps, prefs)


def _parse_spa(lines: list[_Line], pc: ProblemClass) -> Instance:
    n_stu, n_proj, n_lec = _header_ints(lines, 3)
    stu_lines = _take(lines, 1, n_stu, "student")
    lec_lines = _take(lines, 1 + n_stu, n_lec, "lecturer")
    proj_lines = _take(lines, 1 + n_stu + n_lec, n_proj, "project")
    extra = lines[1 + n_stu + n_lec + n_proj :]
    if extra:
        raise ParseError(extra[0].no, "unexpected extra line")

    stu_space = _LabelSpace("student")
    lec_space = _LabelSpace("lecturer")
    proj_space = _LabelSpace("project")
    raw_stu: list[tuple[int, list[list[int]]]] = []
    for line in stu_lines:
        label_s, rest = _split_sections(line, 2, "student")
        stu_space.define(_int_token(label_s.strip(), line.no), line.no)
        raw_stu.append((line.no, _parse_pref_tokens(rest, line.no)))
    caps: dict[AgentId, int] = {}
    raw_lec: list[tuple[int, list[list[int]]]] = []
    for line in lec_lines:
        label_s, cap_s, rest = _split_sections(line, 3, "lecturer")
        idx = lec_space.define(_int_token(label_s.strip(), line.no), line.no)
        caps[AgentId(Role.LECTURER, idx)] = _capacity(cap_s, line.no)
        raw_lec.append((line.no, _parse_pref_tokens(rest, line.no)))
    owner: dict[AgentId, AgentId] = {}
    for line in proj_lines:
        label_s, cap_s, lec_s = _split_sections(line, 3, "project")
        idx = proj_space.define(_int_token(label_s.strip(), line.no), line.no)
        caps[AgentId(Role.PROJECT, idx)] = _capacity(cap_s, line.no)
        lec_idx = lec_space.resolve(_int_token(lec_s.strip(), line.no), line.no)
        owner[AgentId(Role.PROJECT, idx)] = AgentId(Role.LECTURER, lec_idx)

    prefs: dict[AgentId, PreferenceList] = {}
    for i, (line_no, groups) in enumerate(raw_stu, start=1):
        prefs[AgentId(Role.STUDENT, i)] = _resolve_groups(
            groups, proj_space, Role.PROJECT, line_no
        )
    for k, (line_no, groups) in enumerate(raw_lec, start=1):
        plist = _resolve_groups(groups, stu_space, Role.STUDENT, line_no)
        if plist or pc is ProblemClass.SPAS:
            prefs[AgentId(Role.LECTURER, k)] = plist
    counts = {Role.STUDENT: n_stu, Role.PROJECT: n_proj, Role.LECTURER: n_lec}
    for i in range(1, n_stu + 1):
        caps[AgentId(Role.STUDENT, i)] = 1
    return Instance(pc, counts, caps, prefs, owner)


# -- serialization ---------------------------------------------------------


def _pref_tokens(plist: PreferenceList) -> str:
    out = []
    for group in plist:
        if len(group) == 1:
            out.append(f"{group[0].index} ")
        else:
            inner = " ".join(str(a.index) for a in group)
            out.append(f"({inner}) ")
    return "".join(out)


def serialize(instance: Instance) -> str:
    """Deterministic text form; `parse(serialize(i), pc)` reproduces `i`.

    Preference entries carry a trailing space each; trailing spaces are
    stripped from the end of the whole text only.
    """
    pc = instance.problem_class
    lines: list[str] = []
    if pc is ProblemClass.SR:
        n = instance.counts[Role.ROOMMATE]
        lines.append(str(n))
        for a in instance.agents(Role.ROOMMATE):
            lines.append(_pref_tokens(instance.pref(a)))
    elif pc in (ProblemClass.HR, ProblemClass.SM):
        lines.append(
            f"{instance.counts[Role.RESIDENT]} {instance.counts[Role.HOSPITAL]}"
        )
        for r in instance.agents(Role.RESIDENT):
            lines.append(f"{r.index}: {_pref_tokens(instance.pref(r))}")
        for h in instance.agents(Role.HOSPITAL):
            lines.append(
                f"{h.index}: {instance.capacity(h)}: {_pref_tokens(instance.pref(h))}"
            )
    elif pc in (ProblemClass.HA, ProblemClass.CHA):
        lines.append(
            f"{instance.counts[Role.APPLICANT]} {instance.counts[Role.HOUSE]}"
        )
        for a in instance.agents(Role.APPLICANT):
            lines.append(f"{a.index}: {_pref_tokens(instance.pref(a))}")
        for h in instance.agents(Role.HOUSE):
            lines.append(f"{h.index}: {instance.capacity(h)}")
    else:
        lines.append(
            "{} {} {}".format(
                instance.counts[Role.STUDENT],
                instance.counts[Role.PROJECT],
                instance.counts[Role.LECTURER],
            )
        )
        for s in instance.agents(Role.STUDENT):
            lines.append(f"{s.index}: {_pref_tokens(instance.pref(s))}")
        for l in instance.agents(Role.LECTURER):
            lines.append(
                f"{l.index}: {instance.capacity(l)}: {_pref_tokens(instance.pref(l))}"
            )
        for p in instance.agents(Role.PROJECT):
            lines.append(
                f"{p.index}: {instance.capacity(p)}: {instance.owner(p).index}"
            )
    return "\n".join(lines).rstrip(" ")


# -- classification --------------------------------------------------------


@dataclass(frozen=True)
class InstanceProperties:
    problem_class: ProblemClass
    counts: dict
    total_capacity: dict
    ties: dict
    complete: dict
    sm_detected: bool
    lecturer_cover: bool

    def any_ties(self) -> bool:
        return any(self.ties.values())


def classify(instance: Instance) -> InstanceProperties:
    """Structural facts used for algorithm applicability filtering."""
    pc = instance.problem_class
    counts = {r: instance.counts.get(r, 0) for r in instance.roles}
    total_capacity = {}
    for role in instance.roles:
        if role in (Role.HOSPITAL, Role.HOUSE, Role.PROJECT, Role.LECTURER):
            total_capacity[role] = sum(
                instance.capacity(a) for a in instance.agents(role)
            )
    ties = {}
    complete = {}
    for role in instance.roles:
        agents = [a for a in instance.agents(role) if instance.has_prefs(a)]
        if not agents and role in (Role.HOUSE, Role.PROJECT):
            continue
        if pc in (ProblemClass.SPA, ProblemClass.SPAS) and role is Role.LECTURER:
            if not any(instance.has_prefs(a) for a in instance.agents(role)):
                continue
        ties[role] = instance.has_ties(role)
        if role is Role.ROOMMATE:
            full = instance.counts[Role.ROOMMATE] - 1
        else:
            full = instance.counts.get(_PREF_TARGET[role], 0)
        complete[role] = all(
            sum(len(g) for g in instance.pref(a)) == full
            for a in instance.agents(role)
        )
    sm_detected = (
        pc is ProblemClass.HR
        and instance.counts.get(Role.RESIDENT, 0)
        == instance.counts.get(Role.HOSPITAL, 0)
        and all(instance.capacity(h) == 1 for h in instance.agents(Role.HOSPITAL))
    )
    lecturer_cover = False
    if pc is ProblemClass.SPAS:
        lecturer_cover = True
        for s in instance.agents(Role.STUDENT):
            for group in instance.pref(s):
                for p in group:
                    if instance.rank(instance.owner(p), s) is None:
                        lecturer_cover = False
    return InstanceProperties(
        pc, counts, total_capacity, ties, complete, sm_detected, lecturer_cover
    )
