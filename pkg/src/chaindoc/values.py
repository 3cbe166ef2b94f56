"""Values exchanged between probes, processing blocks and report components."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np


@dataclass(frozen=True)
class Scalar:
    value: float
    unit: str = ""


@dataclass(frozen=True, eq=False)
class Series:
    x: np.ndarray
    y: np.ndarray
    x_unit: str = ""
    y_unit: str = ""

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError(f"series vectors must be 1-D and equal length, got {x.shape} and {y.shape}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.y)


@dataclass(frozen=True, eq=False)
class ComplexSeries:
    freq: np.ndarray
    values: np.ndarray
    unit: str = ""

    def __post_init__(self):
        f = np.asarray(self.freq, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if f.shape != v.shape or f.ndim != 1:
            raise ValueError(f"frequency and value vectors must be 1-D and equal length, got {f.shape} and {v.shape}")
        f.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "freq", f)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Text:
    text: str


@dataclass(frozen=True)
class TableCells:
    """A resolved table: every cell already rendered to text."""

    name: str
    rows: tuple[tuple[str, ...], ...]
    header: bool = False
    caption: str = ""
    label: str = ""


@dataclass(frozen=True)
class Figure:
    svg: str
    caption: str
    label: str
    # (x, y, width, height) of the drawn content in SVG user units
    bbox: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    meta: dict = field(default_factory=dict, compare=False)


DataValue = Union[Scalar, Series, ComplexSeries, Text, TableCells, Figure]


def type_name(value) -> str:
    return {
        Scalar: "scalar",
        Series: "series",
        ComplexSeries: "complex_series",
        Text: "text",
        TableCells: "table_cells",
        Figure: "figure",
    }.get(type(value), type(value).__name__)
