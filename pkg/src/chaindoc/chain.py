"""Component chains: the schematic-layer model of the object under study.

Netlist grammar (UTF-8, one statement per line)::

    line      := [statement] ["#" comment]
    statement := ".title" text
               | ID [KIND] param* node+ option*
    param     := NUMBER | "{" expression "}"
    option    := ("ic" | "ac") "=" param
    KIND      := dc | sine | idc | r | c | l | gnd | vprobe | iprobe

``NUMBER`` accepts the engineering suffixes of :mod:`chaindoc.mathexpr`
(``1k``, ``4.7u``). The kind token may be omitted for resistors, capacitors
and inductors whose id starts with ``R``, ``C`` or ``L`` (``R1 1k a b``).
Positional parameters per kind:

=======  ============================================  =====
kind     parameters                                    pins
=======  ============================================  =====
dc       volts                                         2
sine     amplitude_volts freq_hz phase_rad             2
idc      amps                                          2
r        ohms                                          2
c        farads                                        2
l        henries                                       2
gnd      (none)                                        1
vprobe   (none)                                        2
iprobe   (none)                                        2
=======  ============================================  =====

Options: ``ic=`` is the initial capacitor voltage / inductor current for
transient runs, ``ac=`` the small-signal amplitude of a ``dc`` or ``idc``
source in frequency sweeps (default 0). Node ``0`` is the ground reference.
Voltage sources drive ``V(pin1) - V(pin2)``; a current source pushes its
current from ``pin1`` through itself into ``pin2``; a current probe reports
the current flowing into ``pin1`` and out of ``pin2``.
"""

from __future__ import annotations

import math
import re
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from . import mathexpr
from .errors import ChainError, ExprError, NetlistError

GROUND = "0"


@dataclass(frozen=True)
class KindSpec:
    name: str
    token: str
    params: tuple[str, ...]
    arity: int
    options: tuple[str, ...] = ()
    positive: tuple[str, ...] = ()


KINDS: dict[str, KindSpec] = {
    k.token: k
    for k in (
        KindSpec("voltage_source_dc", "dc", ("volts",), 2, ("ac",)),
        KindSpec("voltage_source_sine", "sine", ("amplitude_volts", "freq_hz", "phase_rad"), 2, positive=("freq_hz",)),
        KindSpec("current_source_dc", "idc", ("amps",), 2, ("ac",)),
        KindSpec("resistor", "r", ("ohms",), 2, positive=("ohms",)),
        KindSpec("capacitor", "c", ("farads",), 2, ("ic",), positive=("farads",)),
        KindSpec("inductor", "l", ("henries",), 2, ("ic",), positive=("henries",)),
        KindSpec("ground", "gnd", (), 1),
        KindSpec("probe_voltage", "vprobe", (), 2),
        KindSpec("probe_current", "iprobe", (), 2),
    )
}
KINDS_BY_NAME = {k.name: k for k in KINDS.values()}
_IMPLICIT_KIND = {"R": "r", "C": "c", "L": "l"}

PROBE_KINDS = ("probe_voltage", "probe_current")
# elements that fix a branch voltage (a loop of them is singular)
VOLTAGE_DEFINED = ("voltage_source_dc", "voltage_source_sine", "probe_current")
# elements that carry current between their nodes in transient / AC analysis
CONDUCTIVE = ("voltage_source_dc", "voltage_source_sine", "resistor", "capacitor", "inductor", "probe_current")

_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NODE = re.compile(r"[A-Za-z0-9_]+")
_TOKEN = re.compile(r"[^\s{]*\{[^}]*\}?|[^\s{]+")


@dataclass(frozen=True)
class Component:
    id: str
    kind: str
    pins: tuple[str, ...]
    # parameter/option name -> literal or expression text, unevaluated
    params: Mapping[str, str] = field(default_factory=dict)

    @property
    def spec(self) -> KindSpec:
        return KINDS_BY_NAME[self.kind]

    def value(self, name: str, env: mathexpr.Environment | None = None, default: float | None = None) -> float:
        text = self.params.get(name)
        if text is None:
            if default is not None:
                return default
            raise ChainError("unknown_parameter", f"{self.id} has no parameter {name!r}", component_id=self.id)
        try:
            return mathexpr.parse_number(text)
        except ValueError:
            pass
        try:
            return mathexpr.evaluate(text, env)
        except ExprError as exc:
            raise ChainError("parameter_eval", f"{self.id}.{name} = {{{text}}}: {exc}", component_id=self.id) from exc

    def to_line(self) -> str:
        spec = self.spec
        parts = [self.id, spec.token]
        parts += [_param_text(self.params[p]) for p in spec.params]
        parts += list(self.pins)
        parts += [f"{o}={_param_text(self.params[o])}" for o in spec.options if o in self.params]
        return " ".join(parts)


def _param_text(text: str) -> str:
    try:
        mathexpr.parse_number(text)
        return text
    except ValueError:
        return "{" + text + "}"


@dataclass(frozen=True)
class ComponentChain:
    components: tuple[Component, ...]
    title: str = ""

    @property
    def nodes(self) -> tuple[str, ...]:
        """Node names in order of first appearance."""
        seen = dict.fromkeys(p for c in self.components for p in c.pins)
        return tuple(seen)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.components)

    def component(self, component_id: str) -> Component:
        for c in self.components:
            if c.id == component_id:
                return c
        raise ChainError("unknown_component", component_id, component_id=component_id)

    def of_kind(self, *kinds: str) -> list[Component]:
        return [c for c in self.components if c.kind in kinds]

    def to_netlist(self) -> str:
        lines = [f".title {self.title}"] if self.title else []
        lines += [c.to_line() for c in self.components]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    component_id: str | None = None
    node: str | None = None


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[Diagnostic, ...] = ()
    warnings: tuple[Diagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> list[str]:
        return [d.code for d in self.errors]

    def raise_if_failed(self):
        if self.errors:
            first = self.errors[0]
            more = f" (+{len(self.errors) - 1} more)" if len(self.errors) > 1 else ""
            raise ChainError(first.code, first.message + more, diagnostics=self.errors)


# --------------------------------------------------------------------------
# parsing


def _check_param(text: str, line: int, col: int) -> str:
    if text.startswith("{"):
        if not text.endswith("}") or len(text) < 2:
            raise NetlistError("syntax_error", "unclosed '{'", line, col)
        inner = text[1:-1].strip()
        try:
            mathexpr.parse_expr(inner)
        except ExprError as exc:
            raise NetlistError("syntax_error", f"bad expression: {exc}", line, col + 1 + (exc.position or 0)) from None
        return inner
    try:
        mathexpr.parse_number(text)
    except ValueError:
        raise NetlistError("syntax_error", f"expected a number or {{expression}}, got {text!r}", line, col) from None
    return text


def build_chain(description: str | bytes) -> ComponentChain:
    """Parse netlist text into a :class:`ComponentChain`.

    Parameter expressions are kept as text; evaluation happens when the chain
    is solved. Raises :class:`NetlistError` on the first problem found.
    """
    if isinstance(description, bytes):
        try:
            description = description.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise NetlistError("encoding_error", f"netlist is not UTF-8 ({exc.reason} at byte {exc.start})") from None

    title = ""
    components: list[Component] = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(description.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if line.lstrip().startswith(".title"):
            title = line.strip()[len(".title"):].strip()
            continue
        toks = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(line)]
        cid, col = toks[0]
        if not _ID.fullmatch(cid):
            raise NetlistError("syntax_error", f"invalid component id {cid!r}", lineno, col)
        if cid in seen:
            raise NetlistError("duplicate_id", f"{cid} already defined on line {seen[cid]}", lineno, col, component_id=cid)
        if len(toks) >= 2 and toks[1][0] in KINDS:
            spec = KINDS[toks[1][0]]
            rest = toks[2:]
        elif cid[0] in _IMPLICIT_KIND and len(toks) >= 2 and not toks[1][0].startswith("{") and _is_number(toks[1][0]):
            spec = KINDS[_IMPLICIT_KIND[cid[0]]]
            rest = toks[1:]
        else:
            found = toks[1][0] if len(toks) >= 2 else "end of line"
            raise NetlistError("unknown_kind", f"{cid}: unknown component kind {found!r}", lineno,
                               toks[1][1] if len(toks) >= 2 else len(line) + 1, component_id=cid)

        params: dict[str, str] = {}
        positional = []
        for text, tcol in rest:
            if "=" in text and not text.startswith("{"):
                key, _, val = text.partition("=")
                if key not in spec.options:
                    raise NetlistError("syntax_error", f"{cid}: unknown option {key!r} for kind {spec.token}", lineno, tcol)
                if key in params:
                    raise NetlistError("syntax_error", f"{cid}: option {key!r} given twice", lineno, tcol)
                if not val:
                    raise NetlistError("syntax_error", f"{cid}: option {key!r} has no value", lineno, tcol)
                params[key] = _check_param(val, lineno, tcol + len(key) + 1)
            else:
                positional.append((text, tcol))
        n = len(spec.params)
        if len(positional) < n:
            raise NetlistError("syntax_error", f"{cid}: kind {spec.token} needs {n} parameter(s)", lineno, len(line) + 1)
        for pname, (text, tcol) in zip(spec.params, positional[:n]):
            params[pname] = _check_param(text, lineno, tcol)
            _check_literal_positive(spec, pname, params[pname], cid, lineno, tcol)
        pins = positional[n:]
        if len(pins) != spec.arity:
            raise NetlistError("arity", f"{cid}: expected {spec.arity} pin(s), got {len(pins)}", lineno,
                               pins[spec.arity][1] if len(pins) > spec.arity else len(line) + 1,
                               component_id=cid, expected=spec.arity, got=len(pins))
        for text, tcol in pins:
            if not _NODE.fullmatch(text):
                raise NetlistError("syntax_error", f"{cid}: invalid node name {text!r}", lineno, tcol)
        seen[cid] = lineno
        ordered = {p: params[p] for p in spec.params}
        ordered.update((o, params[o]) for o in spec.options if o in params)
        components.append(Component(cid, spec.name, tuple(t for t, _ in pins), ordered))
    return ComponentChain(tuple(components), title)


def _is_number(text: str) -> bool:
    try:
        mathexpr.parse_number(text)
        return True
    except ValueError:
        return False


def _check_literal_positive(spec: KindSpec, pname: str, text: str, cid: str, line: int, col: int):
    if pname in spec.positive and _is_number(text) and not mathexpr.parse_number(text) > 0:
        raise NetlistError("invalid_value", f"{cid}.{pname} must be > 0, got {text}", line, col, component_id=cid)


# --------------------------------------------------------------------------
# validation


class _DSU:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: str, b: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def reachable_nodes(chain: ComponentChain, kinds: Iterable[str], start: str = GROUND) -> set[str]:
    adj = defaultdict(set)
    kinds = set(kinds)
    for c in chain.components:
        if c.kind in kinds and len(c.pins) == 2:
            a, b = c.pins
            adj[a].add(b)
            adj[b].add(a)
    seen = {start}
    queue = deque([start])
    while queue:
        n = queue.popleft()
        for m in sorted(adj[n]):
            if m not in seen:
                seen.add(m)
                queue.append(m)
    return seen


def find_voltage_loop(chain: ComponentChain, kinds: Iterable[str]) -> list[str] | None:
    """Ids of a loop made only of voltage-defined branches, or None."""
    kinds = set(kinds)
    dsu = _DSU()
    tree: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for c in chain.components:
        if c.kind not in kinds:
            continue
        a, b = c.pins
        if not dsu.union(a, b):
            return _tree_path(tree, a, b) + [c.id]
        tree[a].append((b, c.id))
        tree[b].append((a, c.id))
    return None


def _tree_path(tree, src, dst) -> list[str]:
    prev = {src: None}
    queue = deque([src])
    while queue:
        n = queue.popleft()
        if n == dst:
            break
        for m, cid in tree[n]:
            if m not in prev:
                prev[m] = (n, cid)
                queue.append(m)
    path = []
    n = dst
    while prev.get(n):
        n, cid = prev[n]
        path.append(cid)
    return path[::-1]


def validate_chain(chain: ComponentChain, env: mathexpr.Environment | None = None) -> ValidationReport:
    """Check every structural invariant; the diagnostics are the return value."""
    errors: list[Diagnostic] = []
    warns: list[Diagnostic] = []

    counts = Counter(c.id for c in chain.components)
    for cid, n in sorted(counts.items()):
        if n > 1:
            errors.append(Diagnostic("duplicate_id", f"{cid} defined {n} times", cid))
    for c in chain.components:
        spec = c.spec
        if len(c.pins) != spec.arity:
            errors.append(Diagnostic("arity", f"{c.id}: expected {spec.arity} pin(s), got {len(c.pins)}", c.id))
        for pname in spec.params:
            if pname not in c.params:
                errors.append(Diagnostic("missing_parameter", f"{c.id}: {pname}", c.id))
        for pname, text in c.params.items():
            try:
                v = c.value(pname, env)
            except ChainError as exc:
                if _is_unbound(exc):
                    continue  # resolved later from the pre-calculation environment
                errors.append(Diagnostic("invalid_value", str(exc), c.id))
                continue
            if not math.isfinite(v) or (pname in spec.positive and v <= 0):
                errors.append(Diagnostic("invalid_value", f"{c.id}.{pname} = {v!r} violates its range", c.id))

    grounds = chain.of_kind("ground")
    if not grounds:
        errors.append(Diagnostic("missing_ground", "chain has no ground component"))
    elif len(grounds) > 1:
        errors.append(Diagnostic("multiple_ground", ", ".join(g.id for g in grounds)))
    for g in grounds:
        if g.pins != (GROUND,):
            errors.append(Diagnostic("bad_ground_node", f"{g.id} must connect to node {GROUND}", g.id))

    pin_count = Counter(p for c in chain.components for p in c.pins)
    probe_nodes = {p for c in chain.of_kind(*PROBE_KINDS) for p in c.pins}
    for node in chain.nodes:
        if pin_count[node] < 2 and node not in probe_nodes:
            errors.append(Diagnostic("dangling_node", f"node {node} is connected to a single pin", node=node))

    if grounds:
        live = reachable_nodes(chain, CONDUCTIVE + ("ground",))
        dc_live = reachable_nodes(chain, tuple(k for k in CONDUCTIVE if k != "capacitor"))
        for node in chain.nodes:
            if node not in live:
                errors.append(Diagnostic("floating_node", f"node {node} has no conducting path to ground", node=node))
            elif node not in dc_live:
                warns.append(Diagnostic("dc_floating_node",
                                        f"node {node} reaches ground only through capacitors; DC analysis will fail",
                                        node=node))

    loop = find_voltage_loop(chain, VOLTAGE_DEFINED)
    if loop:
        errors.append(Diagnostic("source_loop", "loop of voltage sources / current probes: " + " -> ".join(loop), loop[0]))
    else:
        loop = find_voltage_loop(chain, VOLTAGE_DEFINED + ("inductor",))
        if loop:
            warns.append(Diagnostic("dc_inductor_loop",
                                    "loop through inductors is short-circuited in DC: " + " -> ".join(loop), loop[0]))

    non_vprobe = Counter(p for c in chain.components if c.kind != "probe_voltage" for p in c.pins)
    for c in chain.of_kind("probe_current"):
        if c.pins[0] == c.pins[1] or not any(non_vprobe[p] == 2 for p in c.pins):
            errors.append(Diagnostic("iprobe_not_series",
                                     f"{c.id} must sit in series with exactly one branch", c.id))

    for c in chain.of_kind("resistor", "capacitor", "inductor", "current_source_dc"):
        if len(c.pins) == 2 and c.pins[0] == c.pins[1]:
            warns.append(Diagnostic("shorted_component", f"{c.id} has both pins on node {c.pins[0]}", c.id, c.pins[0]))
    return ValidationReport(tuple(errors), tuple(warns))


def _is_unbound(exc: ChainError) -> bool:
    cause = exc.__cause__
    return isinstance(cause, ExprError) and cause.code == "unknown_identifier"


# --------------------------------------------------------------------------
# parameters


def set_parameter(chain: ComponentChain, component_id: str, param: str, value: float) -> ComponentChain:
    """Return a copy of ``chain`` with one parameter replaced by a number."""
    comp = chain.component(component_id)
    spec = comp.spec
    if param not in spec.params and param not in spec.options:
        raise ChainError("unknown_parameter", f"{component_id} ({spec.token}) has no parameter {param!r}",
                         component_id=component_id)
    value = float(value)
    if not math.isfinite(value) or (param in spec.positive and value <= 0):
        raise ChainError("invalid_value", f"{component_id}.{param} = {value!r}", component_id=component_id)
    new = replace(comp, params={**comp.params, param: mathexpr.format_number(value)})
    return replace(chain, components=tuple(new if c.id == component_id else c for c in chain.components))


def resolve(chain: ComponentChain, env: mathexpr.Environment | None = None) -> ComponentChain:
    """Evaluate every parameter expression, returning a chain of literal values."""
    comps = []
    for c in chain.components:
        params = {}
        for name in c.params:
            v = c.value(name, env)
            if not math.isfinite(v) or (name in c.spec.positive and v <= 0):
                raise ChainError("invalid_value", f"{c.id}.{name} = {v!r}", component_id=c.id)
            params[name] = mathexpr.format_number(v)
        comps.append(replace(c, params=params))
    return replace(chain, components=tuple(comps))
