"""Document blocks: the units a report body is made of."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .. import mathexpr
from ..values import Figure, TableCells


@dataclass(frozen=True)
class Heading:
    level: int
    text: str
    anchor: str = ""

    def __post_init__(self):
        if not 1 <= self.level <= 4:
            raise ValueError(f"heading level must be 1..4, got {self.level}")


@dataclass(frozen=True)
class Paragraph:
    text: str


@dataclass(frozen=True)
class Formula:
    tree: mathexpr.Expr
    name: str = ""
    value: float | None = None
    fmt: str = "%.4g"
    unit: str = ""

    @property
    def text(self) -> str:
        s = mathexpr.format_expr(self.tree)
        if self.name:
            s = f"{self.name} = {s}"
        if self.value is not None and not isinstance(self.tree, mathexpr.Num):
            s += " = " + (self.fmt % self.value)
            if self.unit:
                s += " " + self.unit
        return s


@dataclass(frozen=True)
class ListBlock:
    items: tuple[str, ...]
    ordered: bool = False


# figures and resolved tables double as blocks
Block = Union[Heading, Paragraph, Formula, Figure, TableCells, ListBlock]
