"""Command-line driver: generate, solve, list, benchmark, export and serve.

Exit codes: 0 success, 1 usage error, 2 instance parse error, 3 no
algorithm applicable, 4 timeout.
"""

from __future__ import annotations

import argparse
import json
import secrets
import sys
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from html import escape
from pathlib import Path
from typing import Optional, Sequence

from .catalog import CATALOG
from .errors import (
    BudgetError,
    InapplicableError,
    ParamError,
    ParseError,
    UnsolvableError,
)
from .generator import experiment_family, generate, params_from_wire
from .graphs import DEFAULT_SIZE_LIMIT, GRAPH_KINDS, emit_graph, structural_graph
from .metrics import compute_stats
from .model import ProblemClass, Role
from .service import DEFAULT_TIMEOUT, run_algorithms, serve
from .spa import spa_profile_opt, spa_s_stable
from .textio import parse, serialize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_INAPPLICABLE = 3
EXIT_TIMEOUT = 4

_CLASSES = {
    "CHA": ProblemClass.CHA,
    "HA": ProblemClass.HA,
    "HR": ProblemClass.HR,
    "SM": ProblemClass.SM,
    "SPA": ProblemClass.SPA,
    "SPA-S": ProblemClass.SPAS,
    "SR": ProblemClass.SR,
}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- generate --------------------------------------------------------------


def _coerce(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _cmd_generate(args) -> int:
    payload = {}
    for item in args.params:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            print(
                f"bad --params entry {item!r} (expected key=value)",
                file=sys.stderr,
            )
            return EXIT_USAGE
        payload[key] = _coerce(raw)
    # the resolved seed always lands in the provenance file, so a run with
    # no --seed can still be replayed exactly
    payload["seed"] = args.seed if args.seed is not None else secrets.randbits(63)
    pc = _CLASSES[args.problem_class]
    try:
        params = params_from_wire(pc, payload)
        instances = generate(pc, params)
    except ParamError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(len(instances))))
    for i, inst in enumerate(instances, start=1):
        name = f"instance_{i:0{width}d}.txt"
        (out / name).write_text(serialize(inst), encoding="utf-8")
    provenance = {"problemClass": args.problem_class, "parameters": payload}
    (out / "provenance.json").write_text(
        json.dumps(provenance, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(instances)} instance(s) to {out}")
    return EXIT_OK


# --- solve -----------------------------------------------------------------


def _text_result(res: dict) -> str:
    lines = [f"=== {res['algorithm']} ===", f"status: {res['status']}"]
    if res.get("description"):
        lines.append(res["description"])
    if res.get("stats"):
        lines.append(f"stats: {res['stats']}")
    for m in res.get("matchings") or []:
        lines.append(f"--- matching {m['matchingNumber']} ---")
        for key, value in (m.get("statsToDisplay") or {}).items():
            lines.append(f"{key}: {value}")
        pairs = (m.get("statsToExpand") or {}).get("Matched Pairs")
        if pairs:
            lines.append(pairs.rstrip("\n"))
    for key, value in (res.get("expandableStats") or {}).items():
        lines.append(f"--- {key} ---")
        lines.append(str(value).rstrip("\n"))
    return "\n".join(lines) + "\n"


_HTML_STYLE = """
body { font-family: sans-serif; margin: 2em auto; max-width: 60em; }
section.result { border: 1px solid #ccc; border-radius: 6px;
                 padding: 0 1em 1em; margin: 1em 0; }
section.error h2 { color: #a00; }
article.matching { border-top: 1px dotted #bbb; padding-top: 0.5em; }
table { border-collapse: collapse; }
th, td { border: 1px solid #ddd; padding: 0.2em 0.6em; text-align: left; }
pre { background: #f6f6f6; padding: 0.5em; overflow-x: auto; }
svg.graph { border: 1px solid #eee; margin: 0.5em 0; max-width: 100%; }
.graph-caption { font-size: 0.85em; color: #555; }
"""

_HTML_SCRIPT = """
(function () {
  var el = document.getElementById("results-data");
  if (!el) return;
  var data = JSON.parse(el.textContent);
  var sections = document.querySelectorAll("section.result");
  data.forEach(function (res, i) {
    var graphs = res.graphs || [];
    var host = sections[i] && sections[i].querySelector(".graphs");
    if (!host) return;
    graphs.forEach(function (g) { host.appendChild(render(g)); });
  });
  function render(g) {
    var depth = {};
    g.nodes.forEach(function (n) { depth[n.id] = 0; });
    for (var pass = 0; pass < g.nodes.length; pass++) {
      var moved = false;
      g.edges.forEach(function (e) {
        if (depth[e.target] < depth[e.source] + 1) {
          depth[e.target] = depth[e.source] + 1;
          moved = true;
        }
      });
      if (!moved) break;
    }
    var layers = {}, order = {}, maxDepth = 0;
    g.nodes.forEach(function (n) {
      var d = depth[n.id];
      layers[d] = layers[d] || [];
      order[n.id] = layers[d].length;
      layers[d].push(n.id);
      if (d > maxDepth) maxDepth = d;
    });
    var W = 640, rowH = 90, pad = 40, H = 2 * pad + rowH * maxDepth;
    var pos = {};
    g.nodes.forEach(function (n) {
      var d = depth[n.id], k = layers[d].length;
      pos[n.id] = {
        x: pad + (W - 2 * pad) * (order[n.id] + 1) / (k + 1),
        y: pad + rowH * d,
      };
    });
    var NS = "http://www.w3.org/2000/svg";
    var svg = document.createElementNS(NS, "svg");
    svg.setAttribute("viewBox", "0 0 " + W + " " + H);
    svg.setAttribute("class", "graph");
    var defs = document.createElementNS(NS, "defs");
    defs.innerHTML = '<marker id="arr" viewBox="0 0 10 10" refX="9" refY="5"'
      + ' markerWidth="6" markerHeight="6" orient="auto-start-reverse">'
      + '<path d="M 0 0 L 10 5 L 0 10 z" fill="#666"/></marker>';
    svg.appendChild(defs);
    g.edges.forEach(function (e) {
      var a = pos[e.source], b = pos[e.target];
      var line = document.createElementNS(NS, "line");
      line.setAttribute("x1", a.x); line.setAttribute("y1", a.y + 10);
      line.setAttribute("x2", b.x); line.setAttribute("y2", b.y - 12);
      line.setAttribute("stroke", "#666");
      if (g.directed) line.setAttribute("marker-end", "url(#arr)");
      svg.appendChild(line);
      if (e.label) {
        var t = document.createElementNS(NS, "text");
        t.setAttribute("x", (a.x + b.x) / 2 + 4);
        t.setAttribute("y", (a.y + b.y) / 2);
        t.setAttribute("font-size", "10");
        t.textContent = e.label;
        svg.appendChild(t);
      }
    });
    g.nodes.forEach(function (n) {
      var p = pos[n.id];
      var c = document.createElementNS(NS, "circle");
      c.setAttribute("cx", p.x); c.setAttribute("cy", p.y);
      c.setAttribute("r", 9);
      c.setAttribute("fill", "#fff"); c.setAttribute("stroke", "#333");
      svg.appendChild(c);
      var t = document.createElementNS(NS, "text");
      t.setAttribute("x", p.x); t.setAttribute("y", p.y + 24);
      t.setAttribute("text-anchor", "middle");
      t.setAttribute("font-size", "11");
      t.textContent = n.label;
      svg.appendChild(t);
    });
    var wrap = document.createElement("figure");
    var cap = document.createElement("figcaption");
    cap.className = "graph-caption";
    cap.textContent = g.name;
    wrap.appendChild(cap);
    wrap.appendChild(svg);
    return wrap;
  }
})();
"""


def _html_result(res: dict) -> str:
    cls = "success" if res["status"] == "success" else "error"
    out = [
        f'<section class="result {cls}">',
        f"<h2>{escape(res['algorithm'])}</h2>",
        '<p class="status">'
        f"{escape(res['status'])}: {escape(res.get('description') or '')}</p>",
    ]
    if res.get("stats"):
        out.append(f"<p>{escape(res['stats'])}</p>")
    for m in res.get("matchings") or []:
        out.append('<article class="matching">')
        out.append(f"<h3>Matching {m['matchingNumber']}</h3>")
        out.append("<table>")
        for key, value in (m.get("statsToDisplay") or {}).items():
            out.append(
                f"<tr><th>{escape(key)}</th><td>{escape(str(value))}</td></tr>"
            )
        out.append("</table>")
        for key, value in (m.get("statsToExpand") or {}).items():
            out.append(
                f"<details><summary>{escape(key)}</summary>"
                f"<pre>{escape(str(value))}</pre></details>"
            )
        out.append("</article>")
    for key, value in (res.get("expandableStats") or {}).items():
        out.append(
            f"<details><summary>{escape(key)}</summary>"
            f"<pre>{escape(str(value))}</pre></details>"
        )
    if res.get("graphs"):
        out.append('<div class="graphs"></div>')
    out.append("</section>")
    return "\n".join(out)


def _html_page(results: list, heading: str) -> str:
    # JSON payload is embedded in the page so graphs render offline;
    # "</" is escaped to keep "</script>" inside strings from closing the tag
    payload = json.dumps(results).replace("</", "<\\/")
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{escape(heading)}</title>",
        f"<style>{_HTML_STYLE}</style>",
        "</head>",
        "<body>",
        f"<h1>{escape(heading)}</h1>",
    ]
    parts.extend(_html_result(res) for res in results)
    parts.append(
        f'<script type="application/json" id="results-data">{payload}</script>'
    )
    parts.append(f"<script>{_HTML_SCRIPT}</script>")
    parts.append("</body>")
    parts.append("</html>")
    return "\n".join(parts) + "\n"


def _cmd_solve(args) -> int:
    pc = _CLASSES[args.problem_class]
    texts = []
    for name in args.files:
        try:
            text = Path(name).read_text(encoding="utf-8")
            parse(text, pc)
        except OSError as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            return EXIT_PARSE
        except ParseError as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            return EXIT_PARSE
        texts.append(text)
    body = {
        "problemClass": args.problem_class,
        "fileContents": texts,
        "algorithms": args.algs,
    }
    status, results = run_algorithms(body, timeout=args.timeout)
    if status != 201:
        print(results.get("statusText"), file=sys.stderr)
        return EXIT_USAGE
    if args.format == "json":
        rendered = json.dumps(results, indent=2) + "\n"
    elif args.format == "text":
        rendered = "".join(_text_result(res) for res in results)
    else:
        rendered = _html_page(results, f"{args.problem_class} results")
    _emit(rendered, args.out)
    if any(res["status"] == "success" for res in results):
        return EXIT_OK
    if any(res["description"] == "timeout" for res in results):
        return EXIT_TIMEOUT
    return EXIT_INAPPLICABLE


# --- list-algorithms -------------------------------------------------------


def _cmd_list(args) -> int:
    labels = [args.problem_class] if args.problem_class else sorted(_CLASSES)
    for label in labels:
        print(f"{label}:")
        for entry in CATALOG[_CLASSES[label]]:
            print(f"  {entry.name}: {entry.description}")
    return EXIT_OK


# --- bench -----------------------------------------------------------------

_BENCH_SOLVERS = {
    "Cost-Optimal One-Sided": lambda inst: spa_profile_opt(inst, "min-cost"),
    "Greedy One-Sided": lambda inst: spa_profile_opt(inst, "greedy"),
    "Generous One-Sided": lambda inst: spa_profile_opt(inst, "generous"),
    "Student-Optimal Stable": lambda inst: spa_s_stable(inst, "student"),
    "Lecturer-Optimal Stable": lambda inst: spa_s_stable(inst, "lecturer"),
}


def _bench_cell(x: int, trial: int, seed: int, algs: Sequence[str]) -> dict:
    # distinct substream per (x, trial) cell so runs are order independent
    inst = experiment_family(x, seed + 7919 * x + trial)
    students = sum(1 for _ in inst.agents(Role.STUDENT))
    row = {}
    for name in algs:
        stats = compute_stats(inst, _BENCH_SOLVERS[name](inst))
        cost = stats.groups[Role.STUDENT].cost
        row[name] = (stats.size, cost, cost / students)
    return row


def _cmd_bench(args) -> int:
    algs = args.algs or list(_BENCH_SOLVERS)
    unknown = [name for name in algs if name not in _BENCH_SOLVERS]
    if unknown:
        print(f"unknown algorithm(s): {', '.join(unknown)}", file=sys.stderr)
        print(f"choose from: {', '.join(_BENCH_SOLVERS)}", file=sys.stderr)
        return EXIT_USAGE
    cells = [(x, t) for x in args.x_values for t in range(args.trials)]
    try:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(
                pool.map(lambda c: _bench_cell(c[0], c[1], args.seed, algs), cells)
            )
    except ParamError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    samples: dict = defaultdict(lambda: defaultdict(list))
    for (x, _), row in zip(cells, rows):
        for name, triple in row.items():
            samples[x][name].append(triple)
    lines = ["x,algorithm,meanSize,meanTotalStudentCost,meanAvgStudentCost"]
    for x in sorted(samples):
        for name in sorted(samples[x]):
            cols = list(zip(*samples[x][name]))
            means = [sum(col) / len(col) for col in cols]
            lines.append(
                f"{x},{name}," + ",".join(f"{v:.4f}" for v in means)
            )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# --- serve -----------------------------------------------------------------


def _cmd_serve(args) -> int:
    try:
        server = serve(port=args.port, host=args.host)
    except (OSError, OverflowError) as exc:
        print(f"cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


# --- export ----------------------------------------------------------------


def _cmd_export(args) -> int:
    pc = _CLASSES[args.problem_class]
    try:
        text = Path(args.file).read_text(encoding="utf-8")
        instance = parse(text, pc)
    except OSError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        graph = structural_graph(instance, args.kind, size_limit=args.size_limit)
    except (InapplicableError, UnsolvableError, BudgetError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INAPPLICABLE
    rendered = emit_graph(graph, args.format)
    if not rendered.endswith("\n"):
        rendered += "\n"
    _emit(rendered, args.out)
    return EXIT_OK


# --- parser ----------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        )
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="matchkit",
        description="Matching under preferences: generate, solve, "
        "benchmark, export and serve.",
    )
    sub = parser.add_subparsers(
        dest="subcommand", required=True, parser_class=_Parser
    )
    class_names = sorted(_CLASSES)

    gen = sub.add_parser("generate", help="write generated instance files")
    gen.add_argument("--class", dest="problem_class", required=True, choices=class_names)
    gen.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    gen.add_argument("--seed", type=int, help="default: a fresh random seed")
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=_cmd_generate)

    sol = sub.add_parser("solve", help="run algorithms over instance files")
    sol.add_argument("--class", dest="problem_class", required=True, choices=class_names)
    sol.add_argument(
        "--alg", dest="algs", action="append", required=True, metavar="NAME"
    )
    sol.add_argument("--format", choices=("json", "text", "html"), default="json")
    sol.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    sol.add_argument("--out", help="output file (default: stdout)")
    sol.add_argument("files", nargs="+")
    sol.set_defaults(func=_cmd_solve)

    lst = sub.add_parser("list-algorithms", help="show the algorithm catalog")
    lst.add_argument("--class", dest="problem_class", choices=class_names)
    lst.set_defaults(func=_cmd_list)

    ben = sub.add_parser(
        "bench", help="per-size mean quality of the assignment algorithms"
    )
    ben.add_argument(
        "--x-values", dest="x_values", required=True, type=_int_list,
        metavar="X1,X2,...",
    )
    ben.add_argument("--algs", nargs="+", metavar="NAME")
    ben.add_argument("--trials", type=int, default=1)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--jobs", type=int, help="worker threads")
    ben.add_argument("--out", help="output CSV file (default: stdout)")
    ben.set_defaults(func=_cmd_bench)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--port", type=int, default=8080)
    srv.add_argument("--host", default="127.0.0.1")
    srv.set_defaults(func=_cmd_serve)

    exp = sub.add_parser(
        "export", help="emit a structural graph for an instance file"
    )
    exp.add_argument("--class", dest="problem_class", required=True, choices=class_names)
    exp.add_argument("--kind", required=True, choices=GRAPH_KINDS)
    exp.add_argument("--format", choices=("graph-json", "dot"), default="graph-json")
    exp.add_argument("--size-limit", type=int, default=DEFAULT_SIZE_LIMIT)
    exp.add_argument("--out", help="output file (default: stdout)")
    exp.add_argument("file")
    exp.set_defaults(func=_cmd_export)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
