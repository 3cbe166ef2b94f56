"""CommonMark output with figures written as sibling SVG files."""

from __future__ import annotations

import re
from pathlib import Path

from ..docgen.blocks import Formula, Heading, ListBlock, Paragraph
from ..docgen.document import DocumentModel, Part
from ..values import Figure, TableCells

_UNSAFE = re.compile(r"[^A-Za-z0-9_.-]")


def asset_name(label: str) -> str:
    return _UNSAFE.sub("_", label) + ".svg"


def _cell(text: str) -> str:
    return text.replace("\\", "\\\\").replace("|", "\\|").replace("\n", " ")


def _table(t: TableCells) -> list[str]:
    rows = [list(r) for r in t.rows]
    if t.header:
        head, body = rows[0], rows[1:]
    else:
        head, body = [""] * len(rows[0]), rows
    out = ["| " + " | ".join(_cell(c) for c in head) + " |", "|" + "|".join(" --- " for _ in head) + "|"]
    out += ["| " + " | ".join(_cell(c) for c in r) + " |" for r in body]
    return out


def _title_page(doc: DocumentModel) -> list[str]:
    md = doc.metadata
    lines = [f'<a id="part-title_page"></a>', "", f"# {md.title}", "", f"**{doc.term(doc.doc_type)}**", ""]
    for key in ("author", "discipline", "date"):
        value = getattr(md, key)
        if value:
            lines.append(f"{doc.term(key)}: {value}  ")
    return lines


def render_markdown(doc: DocumentModel) -> tuple[str, dict[str, str]]:
    """Return the Markdown text and a map of asset file name -> SVG text."""
    lines: list[str] = []
    assets: dict[str, str] = {}
    n_fig = n_tab = 0
    for part in doc.parts:
        if part.name == "title_page":
            lines += _title_page(doc)
            lines.append("")
            continue
        lines += [f'<a id="{part.anchor}"></a>', "", f"## {part.title}", ""]
        if part.name == "toc":
            for e in doc.toc:
                lines.append("  " * (e.level - 1) + f"- [{e.text}](#{e.anchor})")
            lines.append("")
            continue
        for b in part.blocks:
            if isinstance(b, Heading):
                lines += [f'<a id="{b.anchor}"></a>', "", "#" * (b.level + 2) + " " + b.text]
            elif isinstance(b, Paragraph):
                lines.append(b.text)
            elif isinstance(b, Formula):
                lines += ["```text", b.text, "```"]
            elif isinstance(b, ListBlock):
                lines += [(f"{i}. " if b.ordered else "- ") + item for i, item in enumerate(b.items, 1)]
            elif isinstance(b, Figure):
                n_fig += 1
                name = asset_name(b.label)
                assert name not in assets, f"duplicate asset {name}"
                assets[name] = b.svg
                lines += [f'<a id="fig-{b.label}"></a>', "", f"![{b.caption}]({name})", "",
                          f"*{doc.term('figure')} {n_fig}. {b.caption}*"]
            elif isinstance(b, TableCells):
                n_tab += 1
                lines += [f'<a id="tab-{b.label}"></a>', "", f"*{doc.term('table')} {n_tab}. {b.caption}*", ""]
                lines += _table(b)
            else:
                raise TypeError(f"cannot render block {b!r}")
            lines.append("")
    text = "\n".join(lines).rstrip("\n") + "\n"
    return text, assets


def write_markdown(doc: DocumentModel, out_dir: str | Path, name: str = "report.md") -> Path:
    out_dir = Path(out_dir)
    text, assets = render_markdown(doc)
    out_dir.mkdir(parents=True, exist_ok=True)
    for fname, svg in sorted(assets.items()):
        (out_dir / fname).write_text(svg, encoding="utf-8", newline="\n")
    path = out_dir / name
    path.write_text(text, encoding="utf-8", newline="\n")
    return path
