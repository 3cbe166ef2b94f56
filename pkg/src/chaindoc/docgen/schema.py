"""Schematic capture: draw (part of) a component chain as an SVG figure.

Layout is a layered grid. Nodes are ranked by breadth-first distance from
ground; a component sits in the column of its farthest pin and components
in one column are stacked in id order. Every node is a horizontal rail above
the grid with a junction marker at its left end, and every pin is joined to
its rail by an orthogonal wire.
"""

from __future__ import annotations

from collections import defaultdict, deque

from ..chain import GROUND, ComponentChain
from ..errors import DocgenError
from ..values import Figure
from .svg import Svg

COL_W = 120
ROW_H = 64
BOX_W = 84
BOX_H = 34
RAIL_GAP = 14
MARGIN = 20

_VALUE_PARAM = {
    "voltage_source_dc": ("volts", "V"),
    "voltage_source_sine": ("amplitude_volts", "V~"),
    "current_source_dc": ("amps", "A"),
    "resistor": ("ohms", "Ω"),
    "capacitor": ("farads", "F"),
    "inductor": ("henries", "H"),
}


def node_depths(chain: ComponentChain) -> dict[str, int]:
    """BFS distance of every node from ground (unreached nodes go last), in BFS order."""
    adj = defaultdict(set)
    for c in chain.components:
        if len(c.pins) == 2 and c.pins[0] != c.pins[1]:
            adj[c.pins[0]].add(c.pins[1])
            adj[c.pins[1]].add(c.pins[0])
    depth: dict[str, int] = {}
    roots = [GROUND] + [n for n in chain.nodes if n != GROUND]
    for root in roots:
        if root in depth or (root == GROUND and GROUND not in chain.nodes):
            continue
        base = 0 if root == GROUND else max(depth.values(), default=-1) + 1
        depth[root] = base
        queue = deque([root])
        while queue:
            n = queue.popleft()
            for m in sorted(adj[n]):
                if m not in depth:
                    depth[m] = depth[n] + 1
                    queue.append(m)
    return depth


def _label(comp) -> str:
    if comp.kind in _VALUE_PARAM:
        param, unit = _VALUE_PARAM[comp.kind]
        text = comp.params.get(param, "?")
        return f"{text} {unit}" if len(text) <= 10 else f"{{expr}} {unit}"
    return {"ground": "gnd", "probe_voltage": "V probe", "probe_current": "A probe"}[comp.kind]


def capture_schema(chain: ComponentChain, name: str, selection: list[str] | None = None) -> Figure:
    """Render the chain (or the selected components) as a labelled schematic figure.

    The figure label is ``name``; the drawing's bounding box is kept in
    ``Figure.bbox``.
    """
    if selection is not None:
        missing = [cid for cid in selection if cid not in chain.ids]
        if missing:
            raise DocgenError("unknown_component", ", ".join(missing), component_ids=missing)
        wanted = set(selection)
        comps = [c for c in chain.components if c.id in wanted]
    else:
        comps = list(chain.components)
    if not comps:
        raise DocgenError("empty_selection", f"schema {name!r} selects no components")

    depth = node_depths(chain)
    node_order = sorted({p for c in comps for p in c.pins}, key=lambda n: (depth.get(n, 0), n != GROUND, n))
    columns: dict[int, list] = defaultdict(list)
    for c in comps:
        columns[max(depth.get(p, 0) for p in c.pins)].append(c)
    col_keys = sorted(columns)

    rail_y = {n: MARGIN + 14 + i * RAIL_GAP for i, n in enumerate(node_order)}
    grid_top = MARGIN + 14 + len(node_order) * RAIL_GAP + 16
    pos = {}
    for ci, key in enumerate(col_keys):
        for ri, c in enumerate(sorted(columns[key], key=lambda c: c.id)):
            pos[c.id] = (MARGIN + 40 + ci * COL_W, grid_top + ri * ROW_H)
    n_rows = max(len(v) for v in columns.values())
    width = MARGIN * 2 + 40 + len(col_keys) * COL_W
    height = grid_top + n_rows * ROW_H + MARGIN

    svg = Svg(width, height)
    wires = svg.group(class_="wires", stroke="#333", stroke_width="1.2")
    pins_x: dict[str, list[float]] = defaultdict(list)
    for c in comps:
        x, y = pos[c.id]
        for k, node in enumerate(c.pins):
            px = x + BOX_W / 2 if len(c.pins) == 1 else x + BOX_W * (0.3 + 0.4 * k)
            pins_x[node].append(px)
            svg.polyline([(px, y), (px, rail_y[node])], parent=wires, class_="wire")
    junctions = svg.group(class_="nodes")
    for n in node_order:
        xs = pins_x[n]
        jx = MARGIN + 20
        svg.polyline([(jx, rail_y[n]), (max(xs), rail_y[n])], parent=wires, class_="wire")
        svg.rect(jx - 3, rail_y[n] - 3, 6, 6, parent=junctions, class_="junction", fill="#000")
        svg.text(jx - 6, rail_y[n] + 4, n, parent=junctions, text_anchor="end")
    boxes = svg.group(class_="components")
    for c in comps:
        x, y = pos[c.id]
        g = svg.group(boxes, class_="component-group")
        svg.rect(x, y, BOX_W, BOX_H, parent=g, class_="component", fill="#fff", stroke="#000")
        svg.text(x + BOX_W / 2, y + 14, c.id, parent=g, text_anchor="middle", font_weight="bold")
        svg.text(x + BOX_W / 2, y + 27, _label(c), parent=g, text_anchor="middle")
    bbox = (0.0, 0.0, float(width), float(height))
    return Figure(svg.tostring(), caption=chain.title or name, label=name, bbox=bbox,
                  meta={"components": [c.id for c in comps], "nodes": node_order})
