"""JSON wire service: check-file, check-params, run-algorithms.

The endpoint functions are pure: a decoded request body goes in, an
(http status, payload) pair comes out, so they can be tested and reused
without a socket.  `serve` binds them behind a threaded HTTP server.

Wire conventions: handled requests answer 201 even when the payload
reports a domain error (status "error" with a message in statusText);
400/404/413 are reserved for transport-level problems.  Algorithm runs
come back as one result object per requested algorithm, in request
order, with the algorithm's display name lower-cased.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from . import onesided, roommates, spa, twosided
from .catalog import CATALOG, applicable_algorithms, entry_by_name
from .errors import (
    BudgetError,
    InapplicableError,
    ParamError,
    ParseError,
    UnsolvableError,
)
from .generator import generate, params_from_wire
from .graphs import structural_graph
from .metrics import compute_stats, pad_profiles, summarize_batch
from .model import Instance, Matching, ProblemClass, Role
from .structures import StructureGraph
from .textio import classify, parse, serialize

MAX_BODY_BYTES = 10 * 2**20
DEFAULT_TIMEOUT = 30.0

# enumerations stop here so a single run cannot produce an unbounded body
ENUM_CAP = 5000

NO_STABLE = "no stable matching exists"
NO_POPULAR = "no popular matching exists"

_CLASS_ALIASES = {"SPA-S": "SPAS"}


def _problem_class(value) -> ProblemClass:
    if not isinstance(value, str):
        raise ValueError("problemClass must be a string")
    try:
        return ProblemClass(_CLASS_ALIASES.get(value, value))
    except ValueError:
        raise ValueError(f"unknown problem class {value!r}") from None


def _envelope(available=None, instances=None) -> dict:
    return {
        "status": "success",
        "statusText": None,
        "availableAlgs": available,
        "instances": instances,
    }


def _domain_error(message: str) -> dict:
    return {
        "status": "error",
        "statusText": message,
        "availableAlgs": None,
        "instances": None,
    }


def _body_dict(body) -> dict:
    if not isinstance(body, dict):
        raise ValueError("request body must be a JSON object")
    return body


def _file_body(body):
    body = _body_dict(body)
    pc = _problem_class(body.get("problemClass"))
    text = body.get("fileContents")
    if not isinstance(text, str):
        raise ValueError("fileContents must be a string")
    return pc, text


def _params_body(body):
    body = _body_dict(body)
    pc = _problem_class(body.get("problemClass"))
    params = body.get("parameters")
    if not isinstance(params, dict):
        raise ValueError("parameters must be an object")
    return pc, params


def _run_body(body):
    body = _body_dict(body)
    pc = _problem_class(body.get("problemClass"))
    algorithms = body.get("algorithms")
    if isinstance(algorithms, str):
        names = [algorithms]
    elif (
        isinstance(algorithms, list)
        and algorithms
        and all(isinstance(a, str) for a in algorithms)
    ):
        names = list(algorithms)
    else:
        raise ValueError("algorithms must be a name or a non-empty array of names")
    texts = body.get("fileContents")
    if not (
        isinstance(texts, list)
        and texts
        and all(isinstance(t, str) for t in texts)
    ):
        raise ValueError("fileContents must be a non-empty array of instance texts")
    return pc, names, texts


# --- endpoints -------------------------------------------------------------


def check_file(body) -> tuple[int, dict]:
    """Validate an uploaded instance and list the applicable algorithms."""
    try:
        pc, text = _file_body(body)
    except ValueError as exc:
        return 400, _domain_error(str(exc))
    try:
        instance = parse(text, pc)
    except ParseError as exc:
        return 201, _domain_error(str(exc))
    algs = {
        e.name: e.description
        for e in applicable_algorithms(classify(instance))
    }
    return 201, _envelope(available=algs)


def check_params(body) -> tuple[int, dict]:
    """Generate instances from wire parameters and list shared algorithms."""
    try:
        pc, raw = _params_body(body)
    except ValueError as exc:
        return 400, _domain_error(str(exc))
    try:
        params = params_from_wire(pc, raw)
        instances = generate(pc, params)
    except ParamError as exc:
        return 201, _domain_error(str(exc))
    batch = params.num_instances > 1
    shared: Optional[set] = None
    for inst in instances:
        names = {e.name for e in applicable_algorithms(classify(inst), batch=batch)}
        shared = names if shared is None else shared & names
    algs = {
        e.name: e.description for e in CATALOG[pc] if e.name in (shared or set())
    }
    return 201, _envelope(
        available=algs, instances=[serialize(i) for i in instances]
    )


def run_algorithms(body, timeout: float = DEFAULT_TIMEOUT) -> tuple[int, list | dict]:
    """Run each named algorithm over the given instances."""
    try:
        pc, names, texts = _run_body(body)
    except ValueError as exc:
        return 400, _domain_error(str(exc))
    deadline = time.monotonic() + timeout
    try:
        instances = [parse(t, pc) for t in texts]
    except ParseError as exc:
        return 201, [_error_result(name, str(exc)) for name in names]
    batch = len(instances) > 1
    return 201, [
        _run_one(pc, name, instances, batch, deadline) for name in names
    ]


# --- algorithm dispatch ----------------------------------------------------


@dataclass
class RunOutcome:
    """Normalized algorithm output before wire formatting."""

    matchings: list[Matching]
    note: Optional[str] = None
    stats: str = ""
    expand: dict = field(default_factory=dict)
    graphs: list[StructureGraph] = field(default_factory=list)


def _opt(found: Optional[Matching], message: str) -> RunOutcome:
    if found is None:
        return RunOutcome([], note=message)
    return RunOutcome([found])


def _pairs_text(pairs) -> str:
    ordered = sorted((a.index, b.index) for a, b in pairs)
    return "".join(f"({a}, {b})\n" for a, b in ordered)


def _switching_graph_run(instance: Instance) -> RunOutcome:
    found = onesided.switch_arcs(instance)
    if found is None:
        return RunOutcome([], note=NO_POPULAR)
    base, _ = found
    return RunOutcome([base], graphs=[onesided.build_switching_graph(instance)])


def _all_popular_run(instance: Instance) -> RunOutcome:
    found, truncated = onesided.enumerate_popular(instance, cap=ENUM_CAP)
    note = NO_POPULAR if not found else _trunc_note(truncated)
    return RunOutcome(found, note=note)


def _trunc_note(truncated: bool) -> Optional[str]:
    if truncated:
        return f"enumeration truncated at {ENUM_CAP} matchings"
    return None


def _all_stable_sm_run(instance: Instance) -> RunOutcome:
    found, truncated = twosided.enumerate_stable(instance, cap=ENUM_CAP)
    graphs = []
    for kind in ("sm-rotation-poset", "sm-rotation-digraph", "sm-hasse"):
        try:
            graphs.append(structural_graph(instance, kind))
        except (InapplicableError, BudgetError):
            break  # the three kinds share their guards
    return RunOutcome(found, note=_trunc_note(truncated), graphs=graphs)


def _all_stable_sr_run(instance: Instance) -> RunOutcome:
    found, truncated = roommates.enumerate_stable_sr(instance, cap=ENUM_CAP)
    if not found:
        return RunOutcome([], note=NO_STABLE)
    graphs = []
    try:
        graphs.append(structural_graph(instance, "sr-rotation-poset"))
    except (UnsolvableError, BudgetError):
        pass
    return RunOutcome(found, note=_trunc_note(truncated), graphs=graphs)


def _tan_hsueh_run(instance: Instance) -> RunOutcome:
    partition = roommates.tan_hsueh(instance)
    lines = "".join(
        "(" + " ".join(str(a.index) for a in cycle) + ")\n"
        for cycle in partition.cycles
    )
    return RunOutcome(
        [],
        stats=f"stable partition with {len(partition.cycles)} cycles",
        expand={"Stable Partition": lines},
    )


def _stable_pairs_sm_run(instance: Instance) -> RunOutcome:
    pairs = twosided.all_stable_pairs_sm(instance)
    return RunOutcome(
        [],
        stats=f"{len(pairs)} stable pairs",
        expand={"Stable Pairs": _pairs_text(pairs)},
    )


def _stable_pairs_sr_run(instance: Instance) -> RunOutcome:
    pairs = roommates.all_stable_pairs_sr(instance)
    return RunOutcome(
        [],
        stats=f"{len(pairs)} stable pairs",
        expand={"Stable Pairs": _pairs_text(pairs)},
    )


def _popular_pairs_run(instance: Instance) -> RunOutcome:
    pairs = onesided.popular_pairs(instance)
    return RunOutcome(
        [],
        stats=f"{len(pairs)} popular pairs",
        expand={"Popular Pairs": _pairs_text(pairs)},
    )


def _count_popular_run(instance: Instance) -> RunOutcome:
    return RunOutcome(
        [], stats=f"{onesided.count_popular(instance)} popular matchings"
    )


_RUNNERS = {
    "onesided.naive": lambda i: RunOutcome([onesided.serial_dictatorship(i)]),
    "onesided.min_cost": lambda i: RunOutcome(
        [onesided.profile_optimal_max(i, "min-cost")]
    ),
    "onesided.rank_maximal": lambda i: RunOutcome(
        [onesided.profile_optimal_max(i, "rank-maximal")]
    ),
    "onesided.greedy": lambda i: RunOutcome(
        [onesided.profile_optimal_max(i, "greedy")]
    ),
    "onesided.generous": lambda i: RunOutcome(
        [onesided.profile_optimal_max(i, "generous")]
    ),
    "onesided.greedy_generous": lambda i: RunOutcome(
        [onesided.profile_optimal_max(i, "greedy-generous")]
    ),
    "onesided.max_pareto": lambda i: RunOutcome([onesided.max_pareto_optimal(i)]),
    "onesided.popular": lambda i: _opt(onesided.find_popular(i), NO_POPULAR),
    "onesided.switching_graph": _switching_graph_run,
    "onesided.rank_maximal_popular": lambda i: _opt(
        onesided.popular_select(i, "rank-maximal"), NO_POPULAR
    ),
    "onesided.popular_random": lambda i: _opt(
        onesided.popular_select(i, "uniform-random"), NO_POPULAR
    ),
    "onesided.generous_popular": lambda i: _opt(
        onesided.popular_select(i, "generous-maxcard"), NO_POPULAR
    ),
    "onesided.min_cost_popular": lambda i: _opt(
        onesided.popular_select(i, "mincost-maxcard"), NO_POPULAR
    ),
    "onesided.popular_pairs": _popular_pairs_run,
    "onesided.count_popular": _count_popular_run,
    "onesided.all_popular": _all_popular_run,
    "twosided.stable_no_ties": lambda i: RunOutcome(
        [twosided.gale_shapley(i, "residents")]
    ),
    "twosided.super_stable": lambda i: _opt(
        twosided.super_stable(i), "no super-stable matching exists"
    ),
    "twosided.kiraly_one_sided": lambda i: RunOutcome(
        [twosided.kiraly_approx(i, "one-sided")]
    ),
    "twosided.kiraly_two_sided": lambda i: RunOutcome(
        [twosided.kiraly_approx(i, "two-sided")]
    ),
    "twosided.max_popular": lambda i: RunOutcome([twosided.max_popular_smi(i)]),
    "twosided.strongly_stable": lambda i: _opt(
        twosided.strongly_stable(i), "no strongly stable matching exists"
    ),
    "twosided.egalitarian": lambda i: RunOutcome(
        [twosided.optimal_stable_sm(i, "egalitarian")]
    ),
    "twosided.min_regret": lambda i: RunOutcome(
        [twosided.optimal_stable_sm(i, "min-regret")]
    ),
    "twosided.min_m_regret": lambda i: RunOutcome(
        [twosided.optimal_stable_sm(i, "min-regret-M")]
    ),
    "twosided.min_w_regret": lambda i: RunOutcome(
        [twosided.optimal_stable_sm(i, "min-regret-W")]
    ),
    "twosided.all_stable_pairs": _stable_pairs_sm_run,
    "twosided.all_stable": _all_stable_sm_run,
    "roommates.min_regret": lambda i: _opt(
        roommates.optimal_stable_sr(i, "min-regret"), NO_STABLE
    ),
    "roommates.tan_hsueh": _tan_hsueh_run,
    "roommates.stable_no_ties": lambda i: _opt(
        roommates.irving_stable(i), NO_STABLE
    ),
    "roommates.max_stable": lambda i: RunOutcome([roommates.max_stable_sr(i)]),
    "roommates.all_stable_pairs": _stable_pairs_sr_run,
    "roommates.all_stable": _all_stable_sr_run,
    "roommates.egalitarian": lambda i: _opt(
        roommates.optimal_stable_sr(i, "egalitarian"), NO_STABLE
    ),
    "spa.min_cost": lambda i: RunOutcome([spa.spa_profile_opt(i, "min-cost")]),
    "spa.greedy": lambda i: RunOutcome([spa.spa_profile_opt(i, "greedy")]),
    "spa.generous": lambda i: RunOutcome([spa.spa_profile_opt(i, "generous")]),
    "spa.student_optimal": lambda i: RunOutcome([spa.spa_s_stable(i, "student")]),
    "spa.lecturer_optimal": lambda i: RunOutcome(
        [spa.spa_s_stable(i, "lecturer")]
    ),
}


# --- wire formatting -------------------------------------------------------


def _format_profile(profile) -> tuple[str, str]:
    # sparse rendering: positions are the ranks actually used
    positions = [i for i, c in enumerate(profile, start=1) if c]
    amounts = [profile[i - 1] for i in positions]

    def wrap(xs):
        return "(" + ", ".join(str(x) for x in xs) + ")"

    return wrap(amounts), wrap(positions)


def _total_profile(instance: Instance, stats) -> tuple[int, ...]:
    if instance.problem_class in (ProblemClass.SPA, ProblemClass.SPAS):
        roles = [Role.STUDENT]
    else:
        roles = list(stats.groups)
    total: tuple[int, ...] = ()
    for role in roles:
        if role not in stats.groups:
            continue
        total, extra = pad_profiles(total, stats.groups[role].profile)
        total = tuple(x + y for x, y in zip(total, extra))
    return total


def _pref_lines(instance: Instance, matching: Matching) -> str:
    blocks = []
    for role in instance.roles:
        agents = [a for a in instance.agents(role) if instance.has_prefs(a)]
        if not agents:
            continue
        lines = []
        for agent in agents:
            matched = set(matching.assignees(agent))
            toks = []
            for group in instance.pref(agent):
                inner = [
                    f"<{b.index}>" if b in matched else str(b.index)
                    for b in group
                ]
                toks.append(
                    inner[0] if len(group) == 1 else "(" + " ".join(inner) + ")"
                )
            lines.append(f"{agent.index}: " + " ".join(toks))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def _matching_entry(instance: Instance, matching: Matching, number: int) -> dict:
    stats = compute_stats(instance, matching)
    amount, position = _format_profile(_total_profile(instance, stats))
    return {
        "matchingNumber": number,
        "statsToDisplay": {
            "Size": str(stats.size),
            "Profile Amount": amount,
            "Profile Position": position,
            "Cost": str(stats.total_cost),
        },
        "statsToExpand": {
            "Preference Lists": _pref_lines(instance, matching),
            "Matched Pairs": _pairs_text(matching.pairs),
        },
    }


def _result(
    display_name: str,
    *,
    status: str = "success",
    description: Optional[str] = None,
    matchings: Optional[list] = None,
    iterations: int = 0,
    stats: str = "",
    expand: Optional[dict] = None,
    graphs: Optional[list] = None,
) -> dict:
    matchings = matchings or []
    return {
        "status": status,
        "description": description,
        "algorithm": display_name.lower(),
        "numberOfMatchings": len(matchings),
        "matchings": matchings,
        "numberOfIterations": iterations,
        "stats": stats,
        "expandableStats": dict(expand or {}),
        "graphs": list(graphs or []),
    }


def _error_result(display_name: str, message: str) -> dict:
    return _result(display_name, status="error", description=message)


def _agg_text(agg: dict) -> str:
    return f"mean {agg['mean']:.2f} / min {agg['min']} / max {agg['max']}"


def _summary_expand(summary: dict) -> dict:
    out = {
        "Size": _agg_text(summary["size"]),
        "Total Cost": _agg_text(summary["totalCost"]),
        "Total Regret": _agg_text(summary["totalRegret"]),
    }
    for role, entry in summary["groups"].items():
        label = role.title()
        out[f"{label} Cost"] = _agg_text(entry["cost"])
        out[f"{label} Regret"] = _agg_text(entry["regret"])
    return out


def _run_one(pc, name, instances, batch, deadline) -> dict:
    try:
        entry = entry_by_name(pc, name)
    except KeyError:
        return _error_result(name, f"unknown algorithm {name!r}")
    if batch and not entry.batch_ok:
        return _error_result(
            entry.name, "this algorithm is unavailable when solving multiple instances"
        )
    runner = _RUNNERS[entry.key]

    if not batch:
        instance = instances[0]
        if time.monotonic() > deadline:
            return _error_result(entry.name, "timeout")
        try:
            outcome = runner(instance)
        except (InapplicableError, UnsolvableError, BudgetError) as exc:
            return _error_result(entry.name, str(exc))
        entries = [
            _matching_entry(instance, m, i)
            for i, m in enumerate(outcome.matchings)
        ]
        return _result(
            entry.name,
            description=outcome.note,
            matchings=entries,
            iterations=1,
            stats=outcome.stats,
            expand=outcome.expand,
            graphs=[g.to_json() for g in outcome.graphs],
        )

    collected = []
    unsolved = 0
    for instance in instances:
        if time.monotonic() > deadline:
            return _error_result(entry.name, "timeout")
        try:
            outcome = runner(instance)
        except (InapplicableError, UnsolvableError, BudgetError) as exc:
            return _error_result(entry.name, str(exc))
        if outcome.matchings:
            collected.extend(
                compute_stats(instance, m) for m in outcome.matchings
            )
        else:
            unsolved += 1
    summary = summarize_batch(collected)
    stats_text = (
        f"{len(instances)} instances; {len(collected)} solved; "
        f"mean size {summary['size']['mean']:.2f}; "
        f"mean cost {summary['totalCost']['mean']:.2f}"
    )
    if unsolved:
        stats_text += f"; {unsolved} unsolved"
    return _result(
        entry.name,
        iterations=len(instances),
        stats=stats_text,
        expand=_summary_expand(summary),
    )


# --- HTTP layer ------------------------------------------------------------

_ROUTES = {
    "/check-file": check_file,
    "/check-params": check_params,
    "/run-algorithms": run_algorithms,
}


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, *_args):
        pass

    def _send(self, code: int, payload) -> None:
        data = json.dumps(payload).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_POST(self):
        route = _ROUTES.get(self.path)
        if route is None:
            self._send(404, _domain_error(f"unknown endpoint {self.path}"))
            return
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY_BYTES:
            self._send(413, _domain_error("request body exceeds 10 MB"))
            return
        try:
            body = json.loads(self.rfile.read(length) or b"null")
        except json.JSONDecodeError:
            self._send(400, _domain_error("request body is not valid JSON"))
            return
        code, payload = route(body)
        self._send(code, payload)


def serve(port: int = 8080, host: str = "127.0.0.1") -> ThreadingHTTPServer:
    """Bind the endpoints; the caller drives serve_forever/shutdown."""
    return ThreadingHTTPServer((host, port), _Handler)
