import json
import math

import jsonschema
import pytest

from cdfkit.classify import ClassifyConfig, classify
from cdfkit.dsl import parse_function, parse_rewrite_system
from cdfkit.mappings import ComponentMissing, build_rewrite_space, build_space, check_commutativity
from cdfkit.report import (
    build_document, canonical_digest, dumps_canonical, input_digest, real_json, to_dot, to_json,
    to_text, value_json,
)

import dotparse
from helpers import FACT, FIB, GOLDEN, PAREN, SCHEMA, SUCC, XY

CONFIG = ClassifyConfig(n_transient=100, n_sample=1000)


def function_doc(src, x0, max_steps=10, **kw):
    space = build_space(parse_function(src), x0, max_steps=max_steps, **kw)
    report = classify(space, CONFIG)
    doc = build_document(space, report, check_commutativity(space), CONFIG.echo(), src,
                         timestamps=False)
    return space, doc


def rewrite_doc(src, depth_cap=50, node_cap=1000):
    space = build_rewrite_space(parse_rewrite_system(src), depth_cap=depth_cap, node_cap=node_cap)
    report = classify(space, CONFIG)
    doc = build_document(space, report, check_commutativity(space), {}, src, timestamps=False)
    return space, doc


def test_value_rendering():
    assert value_json(7) == "7"
    assert value_json(-12) == "-12"
    assert value_json(10**5000) == str(10**5000)
    assert value_json(0.25) == 0.25
    assert real_json(math.inf) == "inf"
    assert real_json(-math.inf) == "-inf"
    assert real_json(math.nan) == "nan"
    assert real_json(None) is None


def test_canonical_form():
    text = dumps_canonical({"b": 1, "a": ["x", "é"]})
    assert text == '{"a":["x","é"],"b":1}\n'
    with pytest.raises(ValueError):
        dumps_canonical({"x": math.nan})


def test_input_digest():
    assert input_digest("abc") == (
        "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad")


@pytest.mark.parametrize("name, make", [
    ("succ", lambda: function_doc(SUCC, 0)),
    ("fact", lambda: function_doc(FACT, 3, max_steps=2)),
    ("xy", lambda: rewrite_doc(XY)),
    ("paren", lambda: rewrite_doc(PAREN, depth_cap=3, node_cap=100)),
])
def test_golden(name, make):
    _, doc = make()
    got = to_json(doc, include_timestamps=False)
    expected = (GOLDEN / f"{name}.json").read_text(encoding="utf-8")
    assert got == expected


def test_schema_valid():
    schema = json.loads(SCHEMA.read_text())
    for _, doc in (function_doc(SUCC, 0), function_doc(FIB, 5), function_doc(FACT, 3, max_steps=2),
                   function_doc("h(x): real = 0.5 * x", 1.0), rewrite_doc(PAREN, 5, 100)):
        jsonschema.validate(json.loads(to_json(doc)), schema)


def test_timestamps_outside_canonical():
    _, doc = function_doc(SUCC, 0)
    doc.timestamps = {"generated_at": "2000-01-01T00:00:00+00:00"}
    with_ts = json.loads(to_json(doc))
    assert with_ts["timestamps"]["generated_at"].startswith("2000")
    a = canonical_digest(doc)
    doc.timestamps = {"generated_at": "2030-01-01T00:00:00+00:00"}
    assert canonical_digest(doc) == a
    assert "timestamps" not in json.loads(to_json(doc, include_timestamps=False))


def test_successor_report_fields():
    _, doc = function_doc(SUCC, 0)
    d = json.loads(to_json(doc, include_timestamps=False))
    assert d["report"]["shape"] == "Linear"
    assert d["report"]["hierarchy_level"] == 0
    assert d["space_summary"]["orbit"]["points"]["values"] == [str(i) for i in range(11)]
    assert d["mappings_check"]["holds"] is True


def test_dot_derivation_tree():
    space, _ = function_doc(FIB, 5)
    name, nodes, edges = dotparse.parse(to_dot(space, "deriv_tree", 0))
    assert name == "derivation"
    assert len(nodes) == 15
    assert dotparse.is_tree(nodes, edges)
    assert nodes["n0"]["label"] == '"fib(5)=5"'


def test_dot_call_tree_detail():
    space, _ = function_doc(FACT, 3, max_steps=1, detail=True)
    name, nodes, edges = dotparse.parse(to_dot(space, "call_tree"))
    assert dotparse.is_tree(nodes, edges)
    assert len(nodes) > 4


def test_dot_orbit_cycle_edge():
    space, _ = function_doc("s(x) = (x + 2) mod 6", 0)
    _, nodes, edges = dotparse.parse(to_dot(space, "orbit"))
    assert len(nodes) == 3
    back = [e for e in edges if e[2].get("style") == "dashed"]
    assert [(a, b) for a, b, _ in back] == [("n2", "n0")]


def test_dot_expansion():
    space, _ = rewrite_doc(XY)
    _, nodes, edges = dotparse.parse(to_dot(space, "expansion"))
    assert dotparse.is_tree(nodes, edges)
    assert [e[2]["label"] for e in edges] == ['"S#0"', '"S#1"']


def test_dot_missing_component():
    space, _ = function_doc(SUCC, 0)
    with pytest.raises(ComponentMissing):
        to_dot(space, "expansion")
    with pytest.raises(ComponentMissing):
        to_dot(space, "call_tree")


def test_dot_quotes_are_escaped():
    space, _ = rewrite_doc('S -> "a\\"b" | "c"')
    dotparse.parse(to_dot(space, "expansion"))


def test_text_summary():
    _, doc = function_doc(FACT, 3, max_steps=2)
    text = to_text(doc)
    assert "shape:           Linear" in text
    assert "call chain: 3, 2, 1, 0" in text
