"""JSON, DOT and plain-text renderings of a structural space and its report.

Domain values (the integers and reals a function computes with) are written
as decimal strings for integers and shortest round-trip numbers for reals.
Counts and flags stay ordinary JSON numbers and booleans.
"""
from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import __version__
from .evaluator import CallNode, LeafNode, OpNode, tree_metrics
from .mappings import ComponentMissing
from .structural import CYCLE

SCHEMA_VERSION = "report.v1"
MAX_LISTED = 1000


def input_digest(source):
    if isinstance(source, str):
        source = source.encode("utf-8")
    return "sha256:" + hashlib.sha256(source).hexdigest()


def _int_str(v):
    try:
        return str(v)
    except ValueError:
        # interpreter-wide digit limit; exact values must survive serialisation
        sys.set_int_max_str_digits(0)
        return str(v)


def value_json(v):
    """Render a domain value for JSON."""
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return _int_str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, (tuple, list)):
        return [value_json(x) for x in v]
    return v


def real_json(x):
    """Render a measured real (metric, score) for JSON; None stays null."""
    if x is None:
        return None
    return value_json(float(x))


@dataclass
class ReportDocument:
    tool_version: str
    config_echo: dict
    input_digest: str
    kind: str
    space_summary: dict
    report: dict
    mappings_check: dict
    timestamps: dict = field(default_factory=dict)

    def canonical(self):
        return {
            "schema": SCHEMA_VERSION,
            "tool_version": self.tool_version,
            "config_echo": self.config_echo,
            "input_digest": self.input_digest,
            "kind": self.kind,
            "space_summary": self.space_summary,
            "report": self.report,
            "mappings_check": self.mappings_check,
        }


def _listed(values):
    values = list(values)
    return {
        "values": [value_json(v) for v in values[:MAX_LISTED]],
        "count": len(values),
        "truncated": len(values) > MAX_LISTED,
    }


def summarize_space(space):
    if space.is_rewrite:
        exp = space.expansion
        return {
            "expansion": {
                "start_symbol": space.function.start_symbol,
                "node_count": exp.node_count,
                "depth": exp.depth,
                "max_branching": exp.max_branching,
                "caps_hit": exp.caps_hit,
                "depth_cap": exp.depth_cap,
                "node_cap": exp.node_cap,
                "terminal_leaves": sorted({n.text for n in exp.leaves() if n.is_terminal}),
            }
        }
    orbit = space.orbit
    summary = {
        "basepoint": value_json(space.basepoint),
        "orbit": {
            "points": _listed(orbit.points),
            "status": orbit.status,
            "tail": orbit.tail,
            "period": orbit.period,
            "stopped_at": orbit.stopped_at,
            "error": orbit.error.kind if orbit.error is not None else None,
            "epsilon_cycle": orbit.real and orbit.status == CYCLE,
        },
        "call_chain": None if space.call_chain is None else [value_json(v) for v in space.call_chain],
    }
    sem = space.semantic
    if sem is not None:
        pairs = list(sem.pairs.items())
        summary["semantic"] = {
            "domain": sem.domain_spec.describe(),
            "pairs": [[value_json(x), value_json(y)] for x, y in pairs[:MAX_LISTED]],
            "pair_count": len(pairs),
            "failures": {str(value_json(x)): e.kind for x, e in sem.failures.items()},
        }
    trees = []
    for k, t in enumerate(space.logical[:MAX_LISTED]):
        m = tree_metrics(t)
        trees.append({"index": k, "arg": value_json(t.node.arg), "result": value_json(t.result),
                      "depth": m.depth, "node_count": m.node_count,
                      "max_branching": m.max_branching})
    summary["logical"] = {"trees": trees, "count": len(space.logical)}
    if space.basepoint_tree is not None:
        m = tree_metrics(space.basepoint_tree)
        summary["basepoint_tree"] = {"depth": m.depth, "node_count": m.node_count,
                                     "max_branching": m.max_branching,
                                     "result": value_json(space.basepoint_tree.result)}
    return summary


def _jsonify(obj):
    """Replace floats inside metric dicts with JSON-safe renderings."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, float):
        return real_json(obj)
    return obj


def report_dict(report):
    growth = report.growth.as_dict() if report.growth else {"growth_class": report.growth_class}
    return {
        "shape": report.shape,
        "expandability": report.expandability,
        "lyapunov": real_json(report.lyapunov),
        "growth_class": report.growth_label,
        "growth": _jsonify(growth),
        "hierarchy_level": report.hierarchy_level,
        "descriptive": _jsonify(report.descriptive),
        "heuristic_logic_tags": [{"tag": t.tag, "justification": t.justification}
                                 for t in report.heuristic_logic_tags],
        "notes": list(report.notes),
        "not_assessed": list(report.not_assessed),
        "metrics": _jsonify(report.metrics),
    }


def build_document(space, report, commutativity, config_echo, source, *, timestamps=True):
    kind = "rewrite_system" if space.is_rewrite else "function"
    doc = ReportDocument(
        tool_version=__version__,
        config_echo=_jsonify(config_echo),
        input_digest=input_digest(source),
        kind=kind,
        space_summary=summarize_space(space),
        report=report_dict(report),
        mappings_check=commutativity.as_dict(),
    )
    if timestamps:
        doc.timestamps = {"generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    return doc


def dumps_canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False,
                      allow_nan=False) + "\n"


def to_json(doc, include_timestamps=True):
    """Canonical JSON: sorted keys, compact separators, LF-terminated.

    Timestamps sit outside the canonical region; drop them for golden files.
    """
    body = doc.canonical()
    if include_timestamps and doc.timestamps:
        body = dict(body, timestamps=doc.timestamps)
    return dumps_canonical(body)


def canonical_digest(doc):
    return input_digest(to_json(doc, include_timestamps=False))


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------

def _q(text):
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _fmt_value(v):
    if isinstance(v, tuple):
        return ", ".join(_fmt_value(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def tree_label(t):
    node = t.node
    if isinstance(node, CallNode):
        return f"{node.function}({_fmt_value(node.args)})={_fmt_value(t.result)}"
    if isinstance(node, OpNode):
        return f"{node.operator} = {_fmt_value(t.result)}"
    if isinstance(node, LeafNode):
        return _fmt_value(node.value)
    raise TypeError(node)


def deriv_tree_dot(tree, name="derivation"):
    lines = [f"digraph {name} {{", "  node [shape=box];"]
    ids = {}
    edges = []
    stack = [(tree, None)]
    while stack:
        t, parent = stack.pop()
        nid = f"n{len(ids)}"
        ids[id(t)] = nid
        shape = "" if isinstance(t.node, CallNode) else ", shape=ellipse"
        lines.append(f"  {nid} [label={_q(tree_label(t))}{shape}];")
        if parent is not None:
            edges.append(f"  {parent} -> {nid};")
        stack.extend((c, nid) for c in reversed(t.children))
    return "\n".join(lines + edges + ["}"]) + "\n"


def orbit_dot(orbit):
    pts = orbit.points
    if orbit.status == CYCLE:
        shown = pts[: orbit.tail + orbit.period]
    else:
        shown = pts
    lines = ["digraph orbit {", "  rankdir=LR;"]
    for i, p in enumerate(shown):
        lines.append(f"  n{i} [label={_q(_fmt_value(p))}];")
    for i in range(len(shown) - 1):
        lines.append(f"  n{i} -> n{i + 1};")
    if orbit.status == CYCLE:
        lines.append(f"  n{len(shown) - 1} -> n{orbit.tail} [style=dashed, label=\"cycle\"];")
    return "\n".join(lines + ["}"]) + "\n"


def expansion_dot(tree):
    lines = ["digraph expansion {", "  node [shape=box];"]
    edges = []
    ids = {}
    for i, n in enumerate(tree.nodes()):
        ids[id(n)] = f"n{i}"
        style = ", style=dashed" if n.truncated else ""
        lines.append(f"  n{i} [label={_q(n.text)}{style}];")
    for n in tree.nodes():
        for c in n.children:
            nt, k = c.rule
            edges.append(f"  {ids[id(n)]} -> {ids[id(c)]} [label={_q(f'{nt}#{k}')}];")
    return "\n".join(lines + edges + ["}"]) + "\n"


def to_dot(space, which="orbit", index=0):
    """``which`` is ``orbit``, ``deriv_tree`` (``index`` into the logical component),
    ``call_tree`` (T(x0)) or ``expansion``."""
    if which == "orbit":
        if space.orbit is None:
            raise ComponentMissing("no orbit in this space")
        return orbit_dot(space.orbit)
    if which == "deriv_tree":
        if not 0 <= index < len(space.logical):
            raise ComponentMissing(f"no derivation tree at index {index}")
        return deriv_tree_dot(space.logical[index])
    if which == "call_tree":
        if space.basepoint_tree is None:
            raise ComponentMissing("no call-chain tree in this space")
        return deriv_tree_dot(space.basepoint_tree)
    if which == "expansion":
        if space.expansion is None:
            raise ComponentMissing("no expansion tree in this space")
        return expansion_dot(space.expansion)
    raise ValueError(f"unknown DOT component {which!r}")


# ---------------------------------------------------------------------------
# Text
# ---------------------------------------------------------------------------

def _short(v, width=40):
    text = str(v)
    if len(text) <= width:
        return text
    return f"{text[:12]}...{text[-8:]} ({len(text)} chars)"


def to_text(doc):
    r = doc.report
    s = doc.space_summary
    out = [f"cdfkit {doc.tool_version}  {doc.kind}  {doc.input_digest[:19]}"]
    if "orbit" in s:
        o = s["orbit"]
        pts = o["points"]
        head = ", ".join(_short(v) for v in pts["values"][:12])
        more = ", ..." if pts["count"] > 12 else ""
        out.append(f"orbit from {s['basepoint']}: [{head}{more}]  ({o['status']}"
                   + (f", tail={o['tail']}, period={o['period']}" if o["status"] == CYCLE else "")
                   + ")")
        if s.get("call_chain") is not None:
            out.append("call chain: " + ", ".join(_short(v) for v in s["call_chain"]))
        if "semantic" in s:
            out.append(f"relation sample: {s['semantic']['pair_count']} pairs, "
                       f"{len(s['semantic']['failures'])} failures")
    if "expansion" in s:
        e = s["expansion"]
        out.append(f"expansion from {e['start_symbol']}: {e['node_count']} nodes, depth {e['depth']}, "
                   f"max branching {e['max_branching']}, caps hit: {e['caps_hit']}")
    out.append(f"shape:           {r['shape']}")
    out.append(f"expandability:   {r['expandability']}")
    if r["lyapunov"] is not None:
        out.append(f"lyapunov:        {r['lyapunov']}")
    out.append(f"growth class:    {r['growth_class']}")
    out.append(f"hierarchy level: {r['hierarchy_level']}")
    if r["descriptive"]:
        flags = ", ".join(f"{k}={v}" for k, v in sorted(r["descriptive"].items()) if v is not None)
        out.append(f"descriptive:     {flags}")
    for t in r["heuristic_logic_tags"]:
        out.append(f"tag {t['tag']} (heuristic): {t['justification']}")
    m = doc.mappings_check
    if m["applicable"]:
        out.append(f"commutativity:   {'holds' if m['holds'] else 'FAILS'} "
                   f"({m['checked']} checks"
                   + (f", first failure {m['failure_component']}[{m['first_failure']}]"
                      if not m["holds"] else "") + ")")
    for note in r["notes"]:
        out.append(f"note: {note}")
    return "\n".join(out) + "\n"

