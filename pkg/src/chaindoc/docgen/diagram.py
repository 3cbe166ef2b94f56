"""Diagram construction: line charts, Bode plots, parametric curves, phasors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import DocgenError
from ..render.ticks import decade_ticks, format_tick, nice_ticks
from ..values import ComplexSeries, DataValue, Figure, Scalar, Series, type_name
from .svg import Svg, num

KINDS = ("transient", "frequency_magnitude", "frequency_phase", "parametric_xy", "vector_phasor", "static_points")
WIDTH, HEIGHT = 520, 320
LEFT, RIGHT, TOP, BOTTOM = 64, 20, 24, 48
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
TICK_TARGET = 5


@dataclass(frozen=True)
class DiagramSpec:
    kind: str
    series: tuple[str, ...]
    label: str
    caption: str = ""
    x_label: str = ""
    y_label: str = ""
    log_x: bool = False
    at_freq_hz: float | None = None  # vector_phasor: pick the sample nearest this frequency

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DocgenError("unknown_diagram_kind", repr(self.kind))
        object.__setattr__(self, "series", tuple(self.series))
        if self.kind.startswith("frequency"):
            object.__setattr__(self, "log_x", True)


class _Axes:
    def __init__(self, x_lo, x_hi, y_lo, y_hi, log_x=False, width=WIDTH, height=HEIGHT):
        self.log_x = log_x
        self.width, self.height = width, height
        if log_x:
            self.x_ticks = decade_ticks(x_lo, x_hi)
            self.x_range = (self.x_ticks[0], self.x_ticks[-1])
        else:
            self.x_ticks = nice_ticks(*_pad(x_lo, x_hi), TICK_TARGET)
            self.x_range = (self.x_ticks[0], self.x_ticks[-1])
        self.y_ticks = nice_ticks(*_pad(y_lo, y_hi), TICK_TARGET)
        self.y_range = (self.y_ticks[0], self.y_ticks[-1])
        self.plot = (LEFT, TOP, width - LEFT - RIGHT, height - TOP - BOTTOM)

    def px(self, x):
        x0, x1 = self.x_range
        left, _, w, _ = self.plot
        if self.log_x:
            x, x0, x1 = np.log10(x), math.log10(x0), math.log10(x1)
        return left + (np.asarray(x) - x0) / (x1 - x0) * w

    def py(self, y):
        y0, y1 = self.y_range
        _, top, _, h = self.plot
        return top + h - (np.asarray(y) - y0) / (y1 - y0) * h

    def data_x(self, px):
        x0, x1 = self.x_range
        left, _, w, _ = self.plot
        if self.log_x:
            return 10 ** (math.log10(x0) + (px - left) / w * (math.log10(x1) - math.log10(x0)))
        return x0 + (px - left) / w * (x1 - x0)

    def data_y(self, py):
        y0, y1 = self.y_range
        _, top, _, h = self.plot
        return y0 + (top + h - py) / h * (y1 - y0)

    def draw(self, svg: Svg, x_label: str, y_label: str, x_names: Sequence[str] | None = None):
        left, top, w, h = self.plot
        g = svg.group(class_="axes", stroke="#000", stroke_width="1")
        svg.rect(left, top, w, h, parent=g, class_="frame", fill="none")
        labels = svg.group(class_="tick-labels", fill="#000")
        for i, t in enumerate(self.x_ticks):
            x = float(self.px(t))
            svg.line(x, top, x, top + h, parent=g, class_="grid", stroke="#ddd")
            svg.line(x, top + h, x, top + h + 4, parent=g, class_="tick")
            text = x_names[i] if x_names else format_tick(t)
            svg.text(x, top + h + 16, text, parent=labels, text_anchor="middle")
        for t in self.y_ticks:
            y = float(self.py(t))
            svg.line(left, y, left + w, y, parent=g, class_="grid", stroke="#ddd")
            svg.line(left - 4, y, left, y, parent=g, class_="tick")
            svg.text(left - 6, y + 4, format_tick(t), parent=labels, text_anchor="end")
        if x_label:
            svg.text(left + w / 2, self.height - 8, x_label, parent=labels, text_anchor="middle", class_="axis-label")
        if y_label:
            svg.text(14, top + h / 2, y_label, parent=labels, text_anchor="middle", class_="axis-label",
                     transform=f"rotate(-90 14 {num(top + h / 2)})")

    def meta(self) -> dict:
        return {"x_range": self.x_range, "y_range": self.y_range, "x_ticks": self.x_ticks,
                "y_ticks": self.y_ticks, "plot": self.plot, "log_x": self.log_x}


def _pad(lo: float, hi: float) -> tuple[float, float]:
    if hi > lo:
        return lo, hi
    d = abs(lo) * 0.1 or 1.0
    return lo - d, hi + d


def _get(values: Mapping[str, DataValue], ref: str, want: type | tuple) -> DataValue:
    if ref not in values:
        raise DocgenError("unresolved_reference", f"diagram series {ref!r}", ref=ref)
    v = values[ref]
    if not isinstance(v, want):
        names = " or ".join(t.__name__.lower() for t in (want if isinstance(want, tuple) else (want,)))
        raise DocgenError("shape_mismatch", f"{ref} is a {type_name(v)}, expected {names}", ref=ref)
    if len(getattr(v, "y", getattr(v, "values", [0]))) == 0:
        raise DocgenError("empty_series", ref, ref=ref)
    return v


def _legend(svg: Svg, names: Sequence[str]):
    if len(names) < 2:
        return
    g = svg.group(class_="legend")
    x = WIDTH - RIGHT - 130
    for i, n in enumerate(names):
        y = TOP + 12 + i * 14
        svg.line(x, y - 4, x + 18, y - 4, parent=g, stroke=COLORS[i % len(COLORS)], stroke_width="2")
        svg.text(x + 22, y, n, parent=g)


def _unit_label(default: str, unit: str) -> str:
    return f"{default}, {unit}" if unit else default


def build_diagram(spec: DiagramSpec, values: Mapping[str, DataValue]) -> Figure:
    """Draw the referenced values as an SVG chart figure.

    ``Figure.meta`` records axis ranges, ticks and the plotted data so the
    drawing can be checked against the numbers it came from.
    """
    if not spec.series:
        raise DocgenError("empty_series", f"diagram {spec.label!r} references no series")
    kind = spec.kind
    x_names = None
    markers = False
    curves: list[tuple[str, np.ndarray, np.ndarray]] = []
    x_label, y_label = spec.x_label, spec.y_label

    if kind == "transient":
        for ref in spec.series:
            s = _get(values, ref, Series)
            curves.append((ref, s.x, s.y))
        first = values[spec.series[0]]
        x_label = x_label or _unit_label("t", first.x_unit)
        y_label = y_label or first.y_unit
    elif kind in ("frequency_magnitude", "frequency_phase"):
        for ref in spec.series:
            s = _get(values, ref, ComplexSeries)
            if np.any(s.freq <= 0):
                raise DocgenError("shape_mismatch", f"{ref}: frequencies must be positive for a log axis")
            if kind == "frequency_magnitude":
                mag = np.abs(s.values)
                if np.any(mag == 0):
                    raise DocgenError("undefined_value", f"{ref}: zero magnitude has no dB value")
                y = 20.0 * np.log10(mag)
            else:
                y = np.degrees(np.unwrap(np.angle(s.values)))
            curves.append((ref, s.freq, y))
        x_label = x_label or "f, Hz"
        y_label = y_label or ("|H|, dB" if kind == "frequency_magnitude" else "phase, °")
    elif kind == "parametric_xy":
        if len(spec.series) != 2:
            raise DocgenError("shape_mismatch", "parametric_xy needs exactly two series (x, y)")
        sx = _get(values, spec.series[0], Series)
        sy = _get(values, spec.series[1], Series)
        if len(sx) != len(sy):
            raise DocgenError("shape_mismatch", f"parametric series lengths differ: {len(sx)} vs {len(sy)}")
        curves.append((spec.series[1], sx.y, sy.y))
        x_label = x_label or _unit_label(spec.series[0], sx.y_unit)
        y_label = y_label or _unit_label(spec.series[1], sy.y_unit)
    elif kind == "static_points":
        markers = True
        if all(isinstance(values.get(r), Scalar) for r in spec.series):
            ys = np.array([values[r].value for r in spec.series], dtype=float)
            curves.append(("values", np.arange(1, len(ys) + 1, dtype=float), ys))
            x_names = list(spec.series)
        else:
            for ref in spec.series:
                s = _get(values, ref, Series)
                curves.append((ref, s.x, s.y))
    else:
        return _phasor(spec, values)

    xs = np.concatenate([c[1] for c in curves])
    ys = np.concatenate([c[2] for c in curves])
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise DocgenError("undefined_value", f"diagram {spec.label!r} has non-finite data")
    if x_names:
        axes = _Axes(1.0, float(len(x_names)), float(ys.min()), float(ys.max()))
        axes.x_ticks = [float(i) for i in range(1, len(x_names) + 1)]
        axes.x_range = (0.5, len(x_names) + 0.5)
    else:
        axes = _Axes(float(xs.min()), float(xs.max()), float(ys.min()), float(ys.max()), log_x=spec.log_x)

    svg = Svg(WIDTH, HEIGHT)
    axes.draw(svg, x_label, y_label, x_names)
    plot = svg.group(class_="series-group")
    for i, (name, x, y) in enumerate(curves):
        color = COLORS[i % len(COLORS)]
        pts = list(zip(axes.px(x).tolist(), axes.py(y).tolist()))
        if markers:
            g = svg.group(plot, class_="points", fill=color)
            for px, py in pts:
                svg.rect(px - 3, py - 3, 6, 6, parent=g, class_="point")
        else:
            svg.polyline(pts, parent=plot, class_="series", stroke=color, stroke_width="1.5")
    _legend(svg, [c[0] for c in curves])
    meta = axes.meta()
    meta["curves"] = {name: (x, y) for name, x, y in curves}
    meta["kind"] = kind
    return Figure(svg.tostring(), spec.caption or spec.label, spec.label, (0.0, 0.0, float(WIDTH), float(HEIGHT)),
                  meta)


def _phasor(spec: DiagramSpec, values: Mapping[str, DataValue]) -> Figure:
    vecs = []
    for ref in spec.series:
        s = _get(values, ref, ComplexSeries)
        if len(s) > 1 and spec.at_freq_hz is None:
            raise DocgenError("shape_mismatch", f"{ref} has {len(s)} frequencies; set at_freq_hz to pick one")
        k = 0 if spec.at_freq_hz is None else int(np.argmin(np.abs(s.freq - spec.at_freq_hz)))
        vecs.append((ref, complex(s.values[k]), float(s.freq[k])))
    r = max(abs(v) for _, v, _ in vecs) or 1.0
    size = HEIGHT
    axes = _Axes(-r, r, -r, r, width=size + LEFT, height=size)
    lim = max(abs(axes.x_range[0]), abs(axes.x_range[1]), abs(axes.y_range[0]), abs(axes.y_range[1]))
    axes.x_ticks = axes.y_ticks = nice_ticks(-lim, lim, TICK_TARGET)
    axes.x_range = axes.y_range = (axes.x_ticks[0], axes.x_ticks[-1])
    # square plot area keeps angles true
    side = min(axes.plot[2], axes.plot[3])
    axes.plot = (LEFT, TOP, side, side)
    svg = Svg(size + LEFT, size)
    axes.draw(svg, spec.x_label or "Re", spec.y_label or "Im")
    g = svg.group(class_="phasors")
    ox, oy = float(axes.px(0.0)), float(axes.py(0.0))
    arrows = []
    for i, (name, v, f) in enumerate(vecs):
        color = COLORS[i % len(COLORS)]
        tx, ty = float(axes.px(v.real)), float(axes.py(v.imag))
        svg.path(f"M {num(ox)} {num(oy)} L {num(tx)} {num(ty)}", parent=g, class_="phasor", stroke=color,
                 stroke_width="2", fill="none")
        ang = math.atan2(ty - oy, tx - ox)
        head = []
        for da in (math.radians(155), -math.radians(155)):
            head.append((tx + 9 * math.cos(ang + da), ty + 9 * math.sin(ang + da)))
        svg.path(f"M {num(tx)} {num(ty)} L {num(head[0][0])} {num(head[0][1])} L {num(head[1][0])} {num(head[1][1])} Z",
                 parent=g, class_="arrowhead", fill=color)
        arrows.append({"name": name, "freq_hz": f, "angle_deg": math.degrees(math.atan2(v.imag, v.real)),
                       "length": abs(v), "length_px": math.hypot(tx - ox, ty - oy), "tip_px": (tx, ty)})
    _legend(svg, [a["name"] for a in arrows])
    meta = axes.meta()
    meta.update(kind="vector_phasor", arrows=arrows, origin_px=(ox, oy))
    return Figure(svg.tostring(), spec.caption or spec.label, spec.label,
                  (0.0, 0.0, float(size + LEFT), float(size)), meta)
