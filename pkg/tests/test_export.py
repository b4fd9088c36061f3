import re
import xml.etree.ElementTree as ET

import networkx as nx
import pytest

from tweetdemog.errors import DataError
from tweetdemog.export import (
    GEXF_NS,
    PALETTE,
    UNASSIGNED_COLOR,
    export_gexf,
    node_radius,
    read_gexf,
    render_svg,
)
from tweetdemog.graph import RetweetGraph


def small_graph():
    g = RetweetGraph()
    g.add_edge("A", "B", 2)
    g.add_edge("C", "B", 1)
    return g


def test_gexf_three_node_example(tmp_path):
    export_gexf(small_graph(), tmp_path / "g.gexf")
    root = ET.parse(tmp_path / "g.gexf").getroot()
    ns = {"g": GEXF_NS}
    assert root.get("version") == "1.2"
    graph_el = root.find("g:graph", ns)
    assert graph_el.get("defaultedgetype") == "directed"
    assert len(graph_el.findall("g:nodes/g:node", ns)) == 3
    edges = graph_el.findall("g:edges/g:edge", ns)
    assert [(e.get("source"), e.get("target"), e.get("weight")) for e in edges] == [("A", "B", "2"), ("C", "B", "1")]


def test_gexf_empty_graph(tmp_path):
    export_gexf(RetweetGraph(), tmp_path / "g.gexf")
    back = read_gexf(tmp_path / "g.gexf")
    assert back.graph.n_nodes == 0 and back.graph.n_edges == 0


def test_gexf_round_trip(tmp_path):
    g = small_graph()
    stages = {"A": "young", "C": "young"}
    comms = {"A": 0, "B": 1, "C": 0}
    pos = {"A": (0.1, -3.25), "B": (1e-9, 2.0), "C": (5.5, 7.0)}
    export_gexf(g, tmp_path / "g.gexf", stages, comms, pos)
    back = read_gexf(tmp_path / "g.gexf")
    assert list(back.graph.edges()) == list(g.edges())
    assert {n: a["in_sample"] for n, a in back.graph.nodes.items()} == {"A": True, "B": False, "C": True}
    assert back.lifestages == stages and back.communities == comms and back.positions == pos


def test_gexf_readable_by_networkx(tmp_path):
    g = small_graph()
    export_gexf(g, tmp_path / "g.gexf", {"A": "young"}, {"A": 0, "B": 1, "C": 0})
    nxg = nx.read_gexf(tmp_path / "g.gexf")
    assert nxg.is_directed()
    assert sorted(nxg.nodes) == ["A", "B", "C"]
    assert nxg["A"]["B"]["weight"] == 2 and nxg["C"]["B"]["weight"] == 1
    assert nxg.nodes["B"]["community"] == 1


def test_gexf_escapes_identifiers(tmp_path):
    g = RetweetGraph()
    g.add_edge('a&"<b>', "c")
    export_gexf(g, tmp_path / "g.gexf")
    assert set(read_gexf(tmp_path / "g.gexf").graph.nodes) == {'a&"<b>', "c"}


def test_read_gexf_rejects_malformed(tmp_path):
    (tmp_path / "bad.gexf").write_text("<gexf><graph>", encoding="utf-8")
    with pytest.raises(DataError):
        read_gexf(tmp_path / "bad.gexf")


def test_read_gexf_rejects_fractional_weight(tmp_path):
    export_gexf(small_graph(), tmp_path / "g.gexf")
    text = (tmp_path / "g.gexf").read_text(encoding="utf-8").replace('weight="2"', 'weight="2.5"')
    (tmp_path / "g.gexf").write_text(text, encoding="utf-8")
    with pytest.raises(DataError):
        read_gexf(tmp_path / "g.gexf")


def test_gexf_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        export_gexf(small_graph(), tmp_path / "missing" / "g.gexf")


def svg_graph():
    g = RetweetGraph()
    g.add_edge("a", "b", 3)
    g.add_edge("c", "d", 1)
    return g


SVG_POS = {"a": (0.0, 0.0), "b": (1.0, 0.0), "c": (0.0, 1.0), "d": (1.0, 1.0)}


def test_svg_circles_and_colours(tmp_path):
    render_svg(SVG_POS, {"a": 0, "b": 0, "c": 1, "d": 1}, svg_graph(), tmp_path / "m.svg")
    text = (tmp_path / "m.svg").read_text(encoding="utf-8")
    ET.fromstring(text)
    fills = re.findall(r'<circle [^>]*fill="([^"]+)"', text)
    assert len(fills) == 4 and set(fills) == {PALETTE[0], PALETTE[1]}
    assert text.count("<line ") == 2


def test_svg_radius_floor_and_growth(tmp_path):
    render_svg(SVG_POS, {}, svg_graph(), tmp_path / "m.svg")
    text = (tmp_path / "m.svg").read_text(encoding="utf-8")
    radii = dict(zip(re.findall(r"<title>(\w+)</title>", text),
                     map(float, re.findall(r' r="([\d.]+)"', text))))
    assert radii["a"] == radii["c"] == pytest.approx(node_radius(0)) == 2.0
    assert radii["b"] > radii["d"] > radii["a"]
    assert UNASSIGNED_COLOR in text


def test_svg_edges_omitted_above_limit(tmp_path):
    render_svg(SVG_POS, {}, svg_graph(), tmp_path / "m.svg", max_edges=1)
    assert "<line " not in (tmp_path / "m.svg").read_text(encoding="utf-8")


def test_svg_byte_deterministic(tmp_path):
    for name in ("x.svg", "y.svg"):
        render_svg(SVG_POS, {"a": 2}, svg_graph(), tmp_path / name)
    assert (tmp_path / "x.svg").read_bytes() == (tmp_path / "y.svg").read_bytes()


def test_svg_single_node(tmp_path):
    g = RetweetGraph()
    g.add_node("solo")
    render_svg({"solo": (3.0, 3.0)}, {}, g, tmp_path / "m.svg")
    assert (tmp_path / "m.svg").read_text(encoding="utf-8").count("<circle") == 1
