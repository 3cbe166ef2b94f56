"""Minimal deterministic SVG writer (rect, line, polyline, path, text, g)."""

from __future__ import annotations

import xml.etree.ElementTree as ET

SVG_NS = "http://www.w3.org/2000/svg"


def num(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class Svg:
    def __init__(self, width: float, height: float):
        self.width = width
        self.height = height
        self.root = ET.Element("svg", {
            "xmlns": SVG_NS,
            "version": "1.1",
            "width": num(width),
            "height": num(height),
            "viewBox": f"0 0 {num(width)} {num(height)}",
            "font-family": "sans-serif",
            "font-size": "11",
        })

    def group(self, parent=None, **attrs) -> ET.Element:
        return ET.SubElement(parent if parent is not None else self.root, "g", _attrs(attrs))

    def rect(self, x, y, w, h, parent=None, **attrs):
        return ET.SubElement(parent if parent is not None else self.root, "rect",
                             {"x": num(x), "y": num(y), "width": num(w), "height": num(h), **_attrs(attrs)})

    def line(self, x1, y1, x2, y2, parent=None, **attrs):
        return ET.SubElement(parent if parent is not None else self.root, "line",
                             {"x1": num(x1), "y1": num(y1), "x2": num(x2), "y2": num(y2), **_attrs(attrs)})

    def polyline(self, points, parent=None, **attrs):
        pts = " ".join(f"{num(x)},{num(y)}" for x, y in points)
        return ET.SubElement(parent if parent is not None else self.root, "polyline",
                             {"points": pts, "fill": "none", **_attrs(attrs)})

    def path(self, d: str, parent=None, **attrs):
        return ET.SubElement(parent if parent is not None else self.root, "path", {"d": d, **_attrs(attrs)})

    def text(self, x, y, content: str, parent=None, **attrs):
        el = ET.SubElement(parent if parent is not None else self.root, "text",
                           {"x": num(x), "y": num(y), **_attrs(attrs)})
        el.text = content
        return el

    def tostring(self) -> str:
        return ET.tostring(self.root, encoding="unicode")


def _attrs(attrs: dict) -> dict:
    return {k.rstrip("_").replace("_", "-"): str(v) for k, v in attrs.items()}


def parse_points(points: str) -> list[tuple[float, float]]:
    return [tuple(float(c) for c in p.split(",")) for p in points.split()]


def find_all(svg: str, tag: str, cls: str | None = None) -> list[ET.Element]:
    root = ET.fromstring(svg)
    found = root.iter(f"{{{SVG_NS}}}{tag}")
    return [e for e in found if cls is None or e.get("class") == cls]
