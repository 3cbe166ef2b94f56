"""Table builder: manual cells plus cells filled from processing blocks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from ..errors import DocgenError
from ..values import DataValue, Figure, Scalar, TableCells, Text, type_name
from .template import DEFAULT_FORMAT


@dataclass(frozen=True)
class NumberCell:
    value: float
    fmt: str = DEFAULT_FORMAT


@dataclass(frozen=True)
class RefCell:
    """A cell filled automatically from a probe, block or figure id."""

    ref: str
    fmt: str = DEFAULT_FORMAT
    with_unit: bool = False


Cell = Union[str, NumberCell, RefCell]


@dataclass(frozen=True)
class TableSpec:
    name: str
    cells: tuple[tuple[Cell, ...], ...]
    header: bool = False
    caption: str = ""
    label: str = ""

    @property
    def rows(self) -> int:
        return len(self.cells)

    @property
    def cols(self) -> int:
        return len(self.cells[0]) if self.cells else 0


def _cell_text(cell: Cell, values: Mapping[str, DataValue], where: str) -> str:
    if isinstance(cell, str):
        return cell
    if isinstance(cell, NumberCell):
        return cell.fmt % cell.value
    if isinstance(cell, RefCell):
        if cell.ref not in values:
            raise DocgenError("unresolved_cell", f"{where} references {cell.ref!r}", ref=cell.ref)
        v = values[cell.ref]
        if isinstance(v, Scalar):
            text = cell.fmt % v.value
            return f"{text} {v.unit}" if cell.with_unit and v.unit else text
        if isinstance(v, Text):
            return v.text
        if isinstance(v, Figure):
            return f"[{v.label}]"
        raise DocgenError("type_mismatch", f"{where}: a {type_name(v)} cannot fill a table cell", ref=cell.ref)
    raise DocgenError("type_mismatch", f"{where}: unsupported cell {cell!r}")


def build_table(spec: TableSpec, values: Mapping[str, DataValue]) -> TableCells:
    """Resolve every automatic cell to formatted text."""
    if not spec.cells or not spec.cells[0]:
        raise DocgenError("empty_table", f"table {spec.name!r} needs at least one row and one column")
    width = len(spec.cells[0])
    for i, row in enumerate(spec.cells):
        if len(row) != width:
            raise DocgenError("ragged_rows", f"table {spec.name!r}: row {i + 1} has {len(row)} cells, expected {width}")
    rows = tuple(
        tuple(_cell_text(c, values, f"{spec.name}[{i + 1},{j + 1}]") for j, c in enumerate(row))
        for i, row in enumerate(spec.cells)
    )
    return TableCells(spec.name, rows, spec.header, spec.caption or spec.name, spec.label or spec.name)


def table_from_rows(name: str, rows: Sequence[Sequence[Cell]], **kw) -> TableSpec:
    return TableSpec(name, tuple(tuple(r) for r in rows), **kw)
