"""GEXF export/import for gephi and a dependency-free SVG community map."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from tweetdemog.errors import DataError
from tweetdemog.graph import RetweetGraph

GEXF_NS = "http://www.gexf.net/1.2draft"
VIZ_NS = "http://www.gexf.net/1.2draft/viz"
XSI_NS = "http://www.w3.org/2001/XMLSchema-instance"

NODE_ATTRIBUTES = (("0", "lifestage", "string"), ("1", "community", "integer"), ("2", "in_sample", "boolean"))

# fixed so that maps are reproducible and comparable across runs
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")
UNASSIGNED_COLOR = "#999999"


def _fmt(x: float) -> str:
    return repr(float(x))


def export_gexf(graph: RetweetGraph, path, lifestages=None, communities=None, positions=None) -> None:
    """Write a directed GEXF 1.2draft file.

    ``lifestages`` maps node -> label, ``communities`` node -> int and
    ``positions`` node -> (x, y); nodes missing from a map get no value.
    """
    lifestages = lifestages or {}
    communities = communities or {}
    positions = positions or {}
    ET.register_namespace("", GEXF_NS)
    ET.register_namespace("viz", VIZ_NS)
    root = ET.Element(f"{{{GEXF_NS}}}gexf", {"version": "1.2"})
    meta = ET.SubElement(root, f"{{{GEXF_NS}}}meta")
    ET.SubElement(meta, f"{{{GEXF_NS}}}creator").text = "tweetdemog"
    g = ET.SubElement(root, f"{{{GEXF_NS}}}graph", {"defaultedgetype": "directed", "mode": "static"})
    attrs = ET.SubElement(g, f"{{{GEXF_NS}}}attributes", {"class": "node", "mode": "static"})
    for aid, title, typ in NODE_ATTRIBUTES:
        ET.SubElement(attrs, f"{{{GEXF_NS}}}attribute", {"id": aid, "title": title, "type": typ})

    nodes_el = ET.SubElement(g, f"{{{GEXF_NS}}}nodes")
    for node in graph.sorted_nodes():
        el = ET.SubElement(nodes_el, f"{{{GEXF_NS}}}node", {"id": node, "label": node})
        values = []
        if node in lifestages and lifestages[node] is not None:
            values.append(("0", str(lifestages[node])))
        if node in communities and communities[node] is not None:
            values.append(("1", str(int(communities[node]))))
        values.append(("2", "true" if graph.nodes[node].get("in_sample") else "false"))
        av = ET.SubElement(el, f"{{{GEXF_NS}}}attvalues")
        for aid, value in values:
            ET.SubElement(av, f"{{{GEXF_NS}}}attvalue", {"for": aid, "value": value})
        if node in positions:
            x, y = positions[node]
            ET.SubElement(el, f"{{{VIZ_NS}}}position", {"x": _fmt(x), "y": _fmt(y), "z": "0.0"})

    edges_el = ET.SubElement(g, f"{{{GEXF_NS}}}edges")
    for i, (s, t, w) in enumerate(graph.edges()):
        ET.SubElement(edges_el, f"{{{GEXF_NS}}}edge",
                      {"id": str(i), "source": s, "target": t, "weight": str(w)})

    ET.indent(root)
    data = ET.tostring(root, encoding="utf-8", xml_declaration=True)
    with open(path, "wb") as fh:
        fh.write(data + b"\n")


@dataclass
class GexfContents:
    graph: RetweetGraph
    lifestages: dict = field(default_factory=dict)
    communities: dict = field(default_factory=dict)
    positions: dict = field(default_factory=dict)


def read_gexf(path) -> GexfContents:
    """Parse a file written by :func:`export_gexf` back into its parts."""
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise DataError(f"{path}: not well-formed XML ({exc})") from None
    ns = {"g": GEXF_NS, "viz": VIZ_NS}
    graph_el = root.find("g:graph", ns)
    if graph_el is None:
        raise DataError(f"{path}: no <graph> element")
    titles = {a.get("id"): a.get("title") for a in graph_el.findall("g:attributes/g:attribute", ns)}
    out = GexfContents(RetweetGraph())
    for el in graph_el.findall("g:nodes/g:node", ns):
        node = el.get("id")
        out.graph.add_node(node)
        for av in el.findall("g:attvalues/g:attvalue", ns):
            title, value = titles.get(av.get("for")), av.get("value")
            if title == "lifestage":
                out.lifestages[node] = value
            elif title == "community":
                out.communities[node] = int(value)
            elif title == "in_sample":
                out.graph.nodes[node]["in_sample"] = value == "true"
        pos = el.find("viz:position", ns)
        if pos is not None:
            out.positions[node] = (float(pos.get("x")), float(pos.get("y")))
    for el in graph_el.findall("g:edges/g:edge", ns):
        weight = float(el.get("weight", "1"))
        if weight != int(weight):
            raise DataError(f"{path}: non-integer edge weight {weight}")
        s, t = el.get("source"), el.get("target")
        flags = (out.graph.nodes[s]["in_sample"], out.graph.nodes[t]["in_sample"])
        out.graph.add_edge(s, t, int(weight))
        # add_edge marks sources in-sample; the file is authoritative
        out.graph.nodes[s]["in_sample"], out.graph.nodes[t]["in_sample"] = flags
    return out


def node_radius(total_retweets: int, r_min: float = 2.0, scale: float = 1.5) -> float:
    """Circle radius growing with log(1 + times retweeted); never below ``r_min``."""
    return r_min + scale * math.log1p(max(total_retweets, 0))


def render_svg(positions, communities, graph: RetweetGraph, path, width: int = 800,
               height: int = 800, margin: float = 20.0, max_edges: int = 5000) -> None:
    """Static map: one circle per positioned node, coloured by community.

    Edges are drawn underneath the nodes when the graph has at most
    ``max_edges`` of them. Output bytes depend only on the inputs.
    """
    nodes = [n for n in sorted(positions) if n in graph.nodes or not graph.nodes]
    communities = communities or {}
    xs = [positions[n][0] for n in nodes] or [0.0]
    ys = [positions[n][1] for n in nodes] or [0.0]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0) or 1.0
    scale = min(width, height) - 2 * margin

    def project(node):
        x, y = positions[node]
        # SVG y grows downwards
        return margin + (x - x0) / span * scale, margin + (y1 - y) / span * scale

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    placed = set(nodes)
    if graph.n_edges <= max_edges:
        lines.append('<g stroke="#cccccc" stroke-width="0.5" stroke-opacity="0.6">')
        for s, t, _ in graph.edges():
            if s in placed and t in placed:
                (ax, ay), (bx, by) = project(s), project(t)
                lines.append(f'<line x1="{ax:.3f}" y1="{ay:.3f}" x2="{bx:.3f}" y2="{by:.3f}"/>')
        lines.append("</g>")
    lines.append('<g stroke="#333333" stroke-width="0.3">')
    for node in nodes:
        cx, cy = project(node)
        c = communities.get(node)
        fill = PALETTE[int(c) % len(PALETTE)] if c is not None else UNASSIGNED_COLOR
        r = node_radius(graph.in_weight(node))
        lines.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{r:.3f}" fill="{fill}">'
                     f"<title>{_xml_escape(node)}</title></circle>")
    lines.append("</g>")
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _xml_escape(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))
