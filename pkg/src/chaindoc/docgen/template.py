"""Report templates with ``{{name}}`` tags, and binding of tags to data providers.

Template text is a small Markdown subset: ``#`` to ``####`` headings,
``- `` list items, ``$$ name = expression $$`` formula lines and
blank-line separated paragraphs. ``\\{{`` produces a literal ``{{``.
"""

from __future__ import annotations

import re
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .. import mathexpr
from ..errors import DocgenError, ExprError
from ..values import ComplexSeries, DataValue, Figure, Scalar, Series, TableCells, Text, type_name
from .blocks import Block, Formula, Heading, ListBlock, Paragraph

_TAG_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_HEADING = re.compile(r"(#{1,4})\s+(.*)")
_FORMULA = re.compile(r"\$\$(.*)\$\$")
_LIST = re.compile(r"[-*]\s+(.*)")
DEFAULT_FORMAT = "%.4g"


class UnusedBindingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TagSite:
    name: str
    start: int  # character offsets of the whole ``{{...}}`` site
    end: int
    byte_range: tuple[int, int]


@dataclass(frozen=True)
class Template:
    source: str
    tag_sites: tuple[TagSite, ...]

    @property
    def tag_names(self) -> list[str]:
        return list(dict.fromkeys(s.name for s in self.tag_sites))


@dataclass(frozen=True)
class TagBinding:
    tag: str
    provider: str
    fmt: str = DEFAULT_FORMAT
    caption: str | None = None


def _scan(text: str, offset: int = 0):
    """Yield ("text", str) and ("tag", name, start, end) pieces of ``text``."""
    i, n = 0, len(text)
    buf = []
    while i < n:
        if text.startswith("\\{{", i):
            buf.append("{{")
            i += 3
            continue
        if text.startswith("{{", i):
            close = text.find("}}", i + 2)
            nl = text.find("\n", i + 2)
            if close < 0 or (0 <= nl < close):
                raise DocgenError("malformed_tag", f"unclosed '{{{{' at offset {offset + i}", offset=offset + i)
            name = text[i + 2:close].strip()
            if not _TAG_NAME.fullmatch(name):
                raise DocgenError("invalid_tag_name", f"{name!r} at offset {offset + i}", name=name, offset=offset + i)
            if buf:
                yield ("text", "".join(buf))
                buf = []
            yield ("tag", name, offset + i, offset + close + 2)
            i = close + 2
            continue
        buf.append(text[i])
        i += 1
    if buf:
        yield ("text", "".join(buf))


def parse_template(text: str) -> Template:
    """Locate every ``{{name}}`` site in ``text``."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    sites = []
    for piece in _scan(text):
        if piece[0] == "tag":
            _, name, start, end = piece
            b0 = len(text[:start].encode("utf-8"))
            b1 = b0 + len(text[start:end].encode("utf-8"))
            sites.append(TagSite(name, start, end, (b0, b1)))
    return Template(text, tuple(sites))


def check_bindings(template: Template, bindings: Sequence[TagBinding]) -> list[str]:
    """Binding-set rules; returns the names of unused bindings.

    Raises on repeated tag names (two providers may never share a tag) and
    on template tags that have no binding.
    """
    dup = sorted(name for name, n in Counter(b.tag for b in bindings).items() if n > 1)
    if dup:
        raise DocgenError("duplicate_tag_binding", ", ".join(dup), tags=dup)
    bound = {b.tag for b in bindings}
    for site in template.tag_sites:
        if site.name not in bound:
            raise DocgenError("unresolved_tag", site.name, tag=site.name)
    used = set(template.tag_names)
    return [b.tag for b in bindings if b.tag not in used]


def render_value(value: DataValue, fmt: str = DEFAULT_FORMAT) -> str:
    """Inline text for a scalar or text value."""
    if isinstance(value, Scalar):
        s = fmt % value.value
        return f"{s} {value.unit}" if value.unit else s
    if isinstance(value, Text):
        return value.text
    raise DocgenError("type_mismatch", f"a {type_name(value)} cannot be placed inline")


def _raw_blocks(source: str):
    """Split template source into (kind, text, offset) structural pieces."""
    out = []
    para: list[tuple[str, int]] = []
    items: list[tuple[str, int]] = []

    def flush():
        if para:
            out.append(("paragraph", para[:]))
            para.clear()
        if items:
            out.append(("list", items[:]))
            items.clear()

    pos = 0
    for line in source.split("\n"):
        start = pos
        pos += len(line) + 1
        stripped = line.strip()
        lead = len(line) - len(line.lstrip())
        if not stripped:
            flush()
            continue
        m = _HEADING.fullmatch(stripped)
        if m:
            flush()
            out.append(("heading", len(m.group(1)), m.group(2), start + lead + m.start(2)))
            continue
        m = _FORMULA.fullmatch(stripped)
        if m:
            flush()
            out.append(("formula", m.group(1).strip(), start + lead + m.start(1)))
            continue
        m = _LIST.fullmatch(stripped)
        if m:
            if para:
                out.append(("paragraph", para[:]))
                para.clear()
            items.append((m.group(1), start + lead + m.start(1)))
            continue
        if items:
            out.append(("list", items[:]))
            items.clear()
        para.append((stripped, start + lead))
    flush()
    return out


def _formula_block(text: str, offset: int, env: mathexpr.Environment | None) -> Formula:
    if "{{" in text:
        raise DocgenError("malformed_tag", f"tags are not allowed inside formulas (offset {offset})")
    name, expr_text = "", text
    m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*=(?!=)(.*)", text)
    if m:
        name, expr_text = m.group(1), m.group(2)
    try:
        tree = mathexpr.parse_expr(expr_text)
    except ExprError as exc:
        raise DocgenError("formula_syntax", f"offset {offset}: {exc}") from exc
    try:
        value = mathexpr.eval_expr(tree, env if env is not None else mathexpr.Environment({}))
    except ExprError:
        value = None  # symbolic formula; shown without a numeric value
    return Formula(tree, name, value)


def bind_providers(
    template: Template,
    bindings: Sequence[TagBinding],
    values: Mapping[str, DataValue],
    env: mathexpr.Environment | None = None,
) -> list[Block]:
    """Substitute every tag and return the body as blocks.

    Scalars and text are rendered inline using the binding's number format;
    figures and tables become standalone blocks that split the surrounding
    paragraph. Formula lines are evaluated against ``env`` when given.
    """
    unused = check_bindings(template, bindings)
    for name in unused:
        warnings.warn(f"binding {name!r} is not used by the template", UnusedBindingWarning, stacklevel=2)
    by_tag = {b.tag: b for b in bindings if b.tag not in unused}
    for b in by_tag.values():
        if b.provider not in values:
            raise DocgenError("unbound_provider", f"tag {b.tag} -> {b.provider}", tag=b.tag, provider=b.provider)

    def resolve(name):
        b = by_tag[name]
        v = values[b.provider]
        if isinstance(v, Figure) and b.caption:
            v = Figure(v.svg, b.caption, v.label, v.bbox, v.meta)
        return b, v

    def inline(text: str, offset: int, where: str) -> str:
        parts = []
        for piece in _scan(text, offset):
            if piece[0] == "text":
                parts.append(piece[1])
                continue
            b, v = resolve(piece[1])
            if isinstance(v, (Figure, TableCells, Series, ComplexSeries)):
                raise DocgenError("type_mismatch", f"tag {b.tag}: a {type_name(v)} cannot be placed in a {where}")
            parts.append(render_value(v, b.fmt))
        return "".join(parts)

    blocks: list[Block] = []
    for raw in _raw_blocks(template.source):
        kind = raw[0]
        if kind == "heading":
            _, level, text, off = raw
            blocks.append(Heading(level, inline(text, off, "heading")))
        elif kind == "formula":
            blocks.append(_formula_block(raw[1], raw[2], env))
        elif kind == "list":
            blocks.append(ListBlock(tuple(inline(t, off, "list item") for t, off in raw[1])))
        else:
            # paragraph lines are joined; block-level values split it
            text_parts: list[str] = []
            for line_no, (line, off) in enumerate(raw[1]):
                if line_no:
                    text_parts.append(" ")
                for piece in _scan(line, off):
                    if piece[0] == "text":
                        text_parts.append(piece[1])
                        continue
                    b, v = resolve(piece[1])
                    if isinstance(v, (Figure, TableCells)):
                        para = "".join(text_parts).strip()
                        if para:
                            blocks.append(Paragraph(para))
                        text_parts = []
                        blocks.append(v)
                    elif isinstance(v, (Series, ComplexSeries)):
                        raise DocgenError("type_mismatch",
                                          f"tag {b.tag}: raw {type_name(v)} data needs a diagram or functional block")
                    else:
                        text_parts.append(render_value(v, b.fmt))
            para = "".join(text_parts).strip()
            if para:
                blocks.append(Paragraph(para))
    return blocks
