"""Result-processing blocks evaluated as a DAG over probe outputs.

Blocks are evaluated in one batch after the solve, in topological order with
ties broken by ascending block id, so the result never depends on the order
in which blocks were declared.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import mathexpr
from .errors import DataflowError, ExprError
from .values import DataValue, Scalar, Series, type_name

FUNCTIONALS = (
    "max",
    "min",
    "mean",
    "rms",
    "peak_to_peak",
    "integral_trapezoid",
    "overshoot_pct",
    "settling_time",
    "rise_time_10_90",
)
DEFAULT_BAND_PCT = 2.0


@dataclass(frozen=True)
class ProcessingBlock:
    id: str
    kind: str  # one of FUNCTIONALS, "expression" or "passthrough"
    inputs: tuple[str, ...] = ()
    expr: mathexpr.Expr | None = None
    band_pct: float = DEFAULT_BAND_PCT
    unit: str | None = None

    @classmethod
    def functional(cls, id: str, kind: str, source: str, band_pct: float = DEFAULT_BAND_PCT) -> "ProcessingBlock":
        if kind not in FUNCTIONALS:
            raise DataflowError("unknown_functional", f"{id}: {kind!r}", block=id)
        return cls(id, kind, (source,), band_pct=band_pct)

    @classmethod
    def expression(cls, id: str, text: str, unit: str | None = None) -> "ProcessingBlock":
        tree = mathexpr.parse_expr(text)
        names = tuple(n for n in mathexpr.free_names(tree) if n not in mathexpr.CONSTANTS)
        return cls(id, "expression", names, expr=tree, unit=unit)

    @classmethod
    def passthrough(cls, id: str, source: str) -> "ProcessingBlock":
        return cls(id, "passthrough", (source,))


# --------------------------------------------------------------------------
# exact composite trapezoid


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = 134217729.0 * a  # 2**27 + 1
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def trapezoid(x: np.ndarray, y: np.ndarray) -> float:
    """Composite trapezoid rule, correctly rounded.

    Every partial sum and product is carried in error-free form and summed
    with :func:`math.fsum`, so the result is the float nearest to the exact
    trapezoid sum of the given samples (exact for linear data).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return 0.0
    s, es = _two_sum(y[:-1], y[1:])
    d, ed = _two_sum(x[1:], -x[:-1])
    parts = []
    for a, b in ((s, d), (s, ed), (es, d), (es, ed)):
        p, e = _two_prod(a, b)
        parts += [p, e]
    return 0.5 * math.fsum(np.concatenate(parts))


# --------------------------------------------------------------------------
# functionals


def _final_crossing(x, y, level, rising=True):
    """First x where y reaches ``level``, linearly interpolated; None if never."""
    hit = np.nonzero(y >= level if rising else y <= level)[0]
    if not len(hit):
        return None
    k = int(hit[0])
    if k == 0:
        return float(x[0])
    y0, y1 = y[k - 1], y[k]
    return float(x[k - 1] + (level - y0) * (x[k] - x[k - 1]) / (y1 - y0))


def compute_functional(kind: str, s: Series, band_pct: float = DEFAULT_BAND_PCT) -> float:
    """Reduce a series to one parameter-functional value."""
    if not isinstance(s, Series):
        raise DataflowError("type_mismatch", f"{kind} needs a series, got {type_name(s)}")
    if kind not in FUNCTIONALS:
        raise DataflowError("unknown_functional", repr(kind))
    x, y = s.x, s.y
    if len(y) == 0:
        raise DataflowError("empty_series", kind)
    if len(y) > 1 and np.any(np.diff(x) < 0):
        raise DataflowError("type_mismatch", f"{kind}: x must be non-decreasing")
    if not np.all(np.isfinite(y)):
        raise DataflowError("undefined_functional", f"{kind}: series contains non-finite samples")
    lo, hi = float(y.min()), float(y.max())
    span = float(x[-1] - x[0])

    if kind == "max":
        return hi
    if kind == "min":
        return lo
    if kind == "peak_to_peak":
        return hi - lo
    if kind == "integral_trapezoid":
        return trapezoid(x, y)
    if kind == "mean":
        m = trapezoid(x, y) / span if span > 0 else math.fsum(y) / len(y)
        return min(max(m, lo), hi)
    if kind == "rms":
        sq = y * y
        ms = trapezoid(x, sq) / span if span > 0 else math.fsum(sq) / len(y)
        a = np.abs(y)
        return min(max(math.sqrt(max(ms, 0.0)), float(a.min())), float(a.max()))

    if len(y) < 2:
        raise DataflowError("empty_series", f"{kind} needs at least 2 samples")
    final = float(y[-1])
    if kind == "overshoot_pct":
        if final == 0:
            if hi == 0:
                return 0.0
            raise DataflowError("undefined_functional", "overshoot relative to a zero final value")
        return 100.0 * (hi - final) / final
    if kind == "settling_time":
        band = abs(final) * band_pct / 100.0
        outside = np.nonzero(np.abs(y - final) > band)[0]
        if not len(outside):
            return float(x[0])
        return float(x[int(outside[-1]) + 1])
    # rise_time_10_90
    if final == 0:
        raise DataflowError("undefined_functional", "rise time of a signal settling at zero")
    rising = final > 0
    t10 = _final_crossing(x, y, 0.1 * final, rising)
    t90 = _final_crossing(x, y, 0.9 * final, rising)
    if t10 is None or t90 is None:
        raise DataflowError("undefined_functional", "signal never crosses the 10%/90% levels")
    return t90 - t10


def _functional_unit(kind: str, s: Series) -> str:
    if kind == "overshoot_pct":
        return "%"
    if kind in ("settling_time", "rise_time_10_90"):
        return s.x_unit
    if kind == "integral_trapezoid":
        return "·".join(u for u in (s.y_unit, s.x_unit) if u)
    return s.y_unit


# --------------------------------------------------------------------------
# propagation


def _find_cycle(remaining: dict[str, ProcessingBlock]) -> list[str]:
    deps = {b.id: sorted(i for i in b.inputs if i in remaining) for b in remaining.values()}
    state: dict[str, int] = {}
    stack: list[str] = []

    def dfs(n):
        state[n] = 1
        stack.append(n)
        for m in deps[n]:
            if state.get(m) == 1:
                return stack[stack.index(m):] + [m]
            if m not in state:
                found = dfs(m)
                if found:
                    return found
        state[n] = 2
        stack.pop()
        return None

    for start in sorted(deps):
        if start not in state:
            cyc = dfs(start)
            if cyc:
                return cyc
    return sorted(remaining)


def evaluation_order(blocks: Iterable[ProcessingBlock], known: Iterable[str]) -> list[ProcessingBlock]:
    """Topological order (ties by id); checks ids, references and cycles without evaluating."""
    blocks = list(blocks)
    known = set(known)
    by_id: dict[str, ProcessingBlock] = {}
    for b in blocks:
        if b.id in by_id:
            raise DataflowError("duplicate_block", b.id, block=b.id)
        if b.id in known:
            raise DataflowError("duplicate_block", f"{b.id} shadows a source of the same name", block=b.id)
        by_id[b.id] = b
    for b in sorted(blocks, key=lambda b: b.id):
        for i in b.inputs:
            if i not in by_id and i not in known:
                raise DataflowError("unresolved_input", f"{b.id} reads {i!r}", block=b.id, input=i)

    indeg = {b.id: sum(1 for i in set(b.inputs) if i in by_id) for b in blocks}
    users: dict[str, list[str]] = {b.id: [] for b in blocks}
    for b in blocks:
        for i in set(b.inputs):
            if i in by_id:
                users[i].append(b.id)
    ready = [bid for bid, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        bid = heapq.heappop(ready)
        order.append(by_id[bid])
        for u in users[bid]:
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(ready, u)
    if len(order) != len(blocks):
        done = {b.id for b in order}
        cycle = _find_cycle({k: v for k, v in by_id.items() if k not in done})
        raise DataflowError("cycle_detected", "→".join(cycle), cycle=cycle)
    return order


def evaluate_block(block: ProcessingBlock, inputs: list[DataValue]) -> DataValue:
    if block.kind == "passthrough":
        return inputs[0]
    if block.kind == "expression":
        env = {}
        for name, v in zip(block.inputs, inputs):
            if not isinstance(v, Scalar):
                raise DataflowError("type_mismatch", f"{block.id}: {name} is {type_name(v)}, expressions take scalars",
                                    block=block.id)
            env[name] = v.value
        try:
            value = mathexpr.eval_expr(block.expr, mathexpr.Environment(env))
        except ExprError as exc:
            raise DataflowError(exc.code, f"{block.id}: {exc}", block=block.id) from exc
        return Scalar(value, block.unit or "")
    (src,) = inputs
    if not isinstance(src, Series):
        raise DataflowError("type_mismatch", f"{block.id}: {block.kind} needs a series, got {type_name(src)}",
                            block=block.id)
    try:
        value = compute_functional(block.kind, src, block.band_pct)
    except DataflowError as exc:
        raise DataflowError(exc.code, f"{block.id}: {exc}", block=block.id) from exc
    return Scalar(value, block.unit if block.unit is not None else _functional_unit(block.kind, src))


def propagate(blocks: Iterable[ProcessingBlock], sources: Mapping[str, DataValue]) -> dict[str, DataValue]:
    """Evaluate every block exactly once; returns block id -> output in evaluation order."""
    order = evaluation_order(blocks, sources.keys())
    values: dict[str, DataValue] = dict(sources)
    out: dict[str, DataValue] = {}
    for b in order:
        out[b.id] = values[b.id] = evaluate_block(b, [values[i] for i in b.inputs])
    return out
