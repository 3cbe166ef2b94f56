import math

import numpy as np
import pytest

from chaindoc.chain import build_chain
from chaindoc.docgen.diagram import DiagramSpec, build_diagram
from chaindoc.docgen.schema import capture_schema
from chaindoc.docgen.svg import find_all, parse_points
from chaindoc.docgen.table import NumberCell, RefCell, TableSpec, build_table
from chaindoc.errors import DocgenError
from chaindoc.solver import solve_ac, solve_transient
from chaindoc.values import ComplexSeries, Scalar, Series, TableCells
from tests import oracles
from tests.conftest import DIVIDER, RC


def test_divider_schema_counts():
    fig = capture_schema(build_chain(DIVIDER), "fig_schema")
    assert fig.label == "fig_schema"
    assert len(find_all(fig.svg, "rect", "component")) == 4
    assert len(find_all(fig.svg, "rect", "junction")) == 3
    labels = [t.text for t in find_all(fig.svg, "text")]
    for cid in ("V1", "R1", "R2", "G"):
        assert cid in labels
    x, y, w, h = fig.bbox
    assert w > 0 and h > 0


def test_wires_are_orthogonal():
    fig = capture_schema(build_chain(RC), "s")
    for wire in find_all(fig.svg, "polyline", "wire"):
        pts = parse_points(wire.get("points"))
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            assert x0 == x1 or y0 == y1


def test_schema_selection():
    fig = capture_schema(build_chain(DIVIDER), "one", ["R1"])
    assert len(find_all(fig.svg, "rect", "component")) == 1
    with pytest.raises(DocgenError) as err:
        capture_schema(build_chain(DIVIDER), "bad", ["R99"])
    assert err.value.code == "unknown_component"
    with pytest.raises(DocgenError) as err:
        capture_schema(build_chain(DIVIDER), "none", [])
    assert err.value.code == "empty_selection"


def test_schema_is_deterministic():
    chain = build_chain(RC)
    assert capture_schema(chain, "s").svg == capture_schema(chain, "s").svg


def _rc_values():
    chain = build_chain(RC)
    w = solve_transient(chain, 1e-3, 1e-5)
    fr = solve_ac(chain, 1.0, 1e5, 20)
    return {
        "v": Series(w.time_s, w.series["P1"], "s", "V"),
        "h": ComplexSeries(fr.freq_hz, fr.complex_values["P1"]),
    }


def test_transient_diagram_structure():
    values = _rc_values()
    fig = build_diagram(DiagramSpec("transient", ("v",), "fig_t", "Transient"), values)
    (line,) = find_all(fig.svg, "polyline", "series")
    assert len(parse_points(line.get("points"))) == len(values["v"])
    assert fig.meta["x_range"][0] <= 0.0 and fig.meta["x_range"][1] >= 1e-3
    assert fig.meta["x_ticks"][0] == 0.0
    assert fig.meta["x_ticks"][-1] == pytest.approx(1e-3)
    assert find_all(fig.svg, "g", "legend") == []


def test_frequency_magnitude_at_cutoff():
    values = _rc_values()
    fig = build_diagram(DiagramSpec("frequency_magnitude", ("h",), "fig_m", "Bode"), values)
    assert fig.meta["log_x"] is True
    f, db = fig.meta["curves"]["h"]
    fc = 1 / (2 * math.pi * 1e-3)
    assert np.interp(math.log10(fc), np.log10(f), db) == pytest.approx(-3.01, abs=0.02)
    assert np.allclose(db, 20 * np.log10(np.abs(oracles.rc_lowpass(1e3, 1e-6, f))))


def test_frequency_phase_in_degrees():
    values = _rc_values()
    fig = build_diagram(DiagramSpec("frequency_phase", ("h",), "fig_p"), values)
    f, deg = fig.meta["curves"]["h"]
    assert np.allclose(deg, -np.degrees(np.arctan(2 * np.pi * f * 1e-3)))


def test_phasor_geometry():
    fig = build_diagram(DiagramSpec("vector_phasor", ("z",), "fig_z"), {"z": ComplexSeries([50.0], [1 + 1j])})
    (arrow,) = fig.meta["arrows"]
    assert arrow["angle_deg"] == pytest.approx(45.0)
    assert arrow["length"] == pytest.approx(math.sqrt(2))
    ox, oy = fig.meta["origin_px"]
    tx, ty = arrow["tip_px"]
    assert math.degrees(math.atan2(oy - ty, tx - ox)) == pytest.approx(45.0, abs=1e-6)
    assert math.hypot(tx - ox, ty - oy) == pytest.approx(arrow["length_px"])


def test_phasor_rejects_real_series():
    with pytest.raises(DocgenError) as err:
        build_diagram(DiagramSpec("vector_phasor", ("s",), "f"), {"s": Series([0, 1], [0, 1])})
    assert err.value.code == "shape_mismatch"


def test_parametric_needs_equal_lengths():
    values = {"a": Series([0, 1, 2], [0, 1, 4]), "b": Series([0, 1], [1, 2])}
    with pytest.raises(DocgenError) as err:
        build_diagram(DiagramSpec("parametric_xy", ("a", "b"), "f"), values)
    assert err.value.code == "shape_mismatch"
    fig = build_diagram(DiagramSpec("parametric_xy", ("a", "a"), "f"), values)
    assert len(find_all(fig.svg, "polyline", "series")) == 1


def test_legend_for_multiple_series():
    values = _rc_values()
    values["w"] = Series(values["v"].x, 2 * values["v"].y, "s", "V")
    fig = build_diagram(DiagramSpec("transient", ("v", "w"), "f"), values)
    assert len(find_all(fig.svg, "polyline", "series")) == 2
    assert len(find_all(fig.svg, "g", "legend")) == 1


def test_static_points_from_scalars():
    fig = build_diagram(DiagramSpec("static_points", ("a", "b"), "f"), {"a": Scalar(1.0), "b": Scalar(3.0)})
    assert len(find_all(fig.svg, "rect", "point")) == 2


@pytest.mark.parametrize("values,code", [({}, "unresolved_reference"), ({"v": Series([], [])}, "empty_series")])
def test_diagram_errors(values, code):
    with pytest.raises(DocgenError) as err:
        build_diagram(DiagramSpec("transient", ("v",), "f"), values)
    assert err.value.code == code


def test_manual_table_passes_through():
    t = build_table(TableSpec("t", (("a", "b"), ("c", "d"))), {})
    assert t.rows == (("a", "b"), ("c", "d"))
    assert isinstance(t, TableCells)


def test_reference_cell_format():
    spec = TableSpec("t", ((RefCell("m1", "%.1f"), NumberCell(2.0, "%.2f")),))
    assert build_table(spec, {"m1": Scalar(5.0)}).rows == (("5.0", "2.00"),)


def test_table_errors():
    with pytest.raises(DocgenError) as err:
        build_table(TableSpec("t", (("a", "b"), ("c", "d", "e"))), {})
    assert err.value.code == "ragged_rows"
    with pytest.raises(DocgenError) as err:
        build_table(TableSpec("t", ((RefCell("zz"),),)), {})
    assert err.value.code == "unresolved_cell"
    with pytest.raises(DocgenError) as err:
        build_table(TableSpec("t", ()), {})
    assert err.value.code == "empty_table"
