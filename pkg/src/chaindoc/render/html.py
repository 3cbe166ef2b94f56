"""Single-file HTML output in two presentation modes.

``html_inline`` is meant for on-screen review, ``html_print`` adds page
breaks before every top-level part and a print stylesheet. Both carry the
same content; SVG figures are inlined.
"""

from __future__ import annotations

from html import escape
from html.parser import HTMLParser
from typing import Literal

from ..docgen.blocks import Formula, Heading, ListBlock, Paragraph
from ..docgen.document import DocumentModel
from ..values import Figure, TableCells

Mode = Literal["html_inline", "html_print"]
PAGE_BREAK = '<div class="page-break"></div>'

_BASE_CSS = """body { font-family: serif; max-width: 52em; margin: 2em auto; line-height: 1.45; }
figure { margin: 1.2em 0; text-align: center; }
figcaption, caption { font-style: italic; margin: 0.4em 0; }
table { border-collapse: collapse; margin: 1em auto; }
td, th { border: 1px solid #444; padding: 0.25em 0.6em; }
pre.formula { background: #f6f6f6; padding: 0.5em; }
.title-page { text-align: center; }"""
_PRINT_CSS = """
@page { size: A4; margin: 2cm; }
.page-break { page-break-before: always; break-before: page; }
.title-page { min-height: 24cm; display: flex; flex-direction: column; justify-content: center; }
nav.toc a { color: inherit; text-decoration: none; }"""


def _e(s: str) -> str:
    return escape(s, quote=True)


def _table(t: TableCells, number: int, term: str) -> list[str]:
    out = [f'<table id="tab-{_e(t.label)}">', f"<caption>{_e(term)} {number}. {_e(t.caption)}</caption>"]
    rows = list(t.rows)
    if t.header:
        out.append("<thead><tr>" + "".join(f"<th>{_e(c)}</th>" for c in rows[0]) + "</tr></thead>")
        rows = rows[1:]
    out.append("<tbody>")
    out += ["<tr>" + "".join(f"<td>{_e(c)}</td>" for c in r) + "</tr>" for r in rows]
    out.append("</tbody>")
    out.append("</table>")
    return out


def render_html(doc: DocumentModel, mode: Mode = "html_inline") -> str:
    if mode not in ("html_inline", "html_print"):
        raise ValueError(f"unknown HTML mode {mode!r}")
    printing = mode == "html_print"
    md = doc.metadata
    css = _BASE_CSS + (_PRINT_CSS if printing else "")
    out = [
        "<!DOCTYPE html>",
        f'<html lang="{doc.language}">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{_e(md.title)}</title>",
        f"<style>\n{css}\n</style>",
        "</head>",
        f'<body class="{mode.replace("_", "-")}">',
    ]
    n_fig = n_tab = 0
    for i, part in enumerate(doc.parts):
        if printing and i > 0:
            out.append(PAGE_BREAK)
        if part.name == "title_page":
            out.append(f'<section class="part title-page" id="{part.anchor}">')
            out.append(f"<h1>{_e(md.title)}</h1>")
            out.append(f'<p class="doc-type">{_e(doc.term(doc.doc_type))}</p>')
            for key in ("author", "discipline", "date"):
                value = getattr(md, key)
                if value:
                    out.append(f'<p class="{key}">{_e(doc.term(key))}: {_e(value)}</p>')
            out.append("</section>")
            continue
        out.append(f'<section class="part part-{part.name}" id="{part.anchor}">')
        out.append(f"<h2>{_e(part.title)}</h2>")
        if part.name == "toc":
            out.append('<nav class="toc"><ul>')
            for e in doc.toc:
                out.append(f'<li class="toc-{e.level}"><a href="#{e.anchor}">{_e(e.text)}</a></li>')
            out.append("</ul></nav>")
        for b in part.blocks:
            if isinstance(b, Heading):
                lvl = b.level + 2
                out.append(f'<h{lvl} id="{b.anchor}">{_e(b.text)}</h{lvl}>')
            elif isinstance(b, Paragraph):
                out.append(f"<p>{_e(b.text)}</p>")
            elif isinstance(b, Formula):
                out.append(f'<pre class="formula">{_e(b.text)}</pre>')
            elif isinstance(b, ListBlock):
                tag = "ol" if b.ordered else "ul"
                out.append(f"<{tag}>" + "".join(f"<li>{_e(x)}</li>" for x in b.items) + f"</{tag}>")
            elif isinstance(b, Figure):
                n_fig += 1
                out.append(f'<figure id="fig-{_e(b.label)}">')
                out.append(b.svg)
                out.append(f"<figcaption>{_e(doc.term('figure'))} {n_fig}. {_e(b.caption)}</figcaption>")
                out.append("</figure>")
            elif isinstance(b, TableCells):
                n_tab += 1
                out += _table(b, n_tab, doc.term("table"))
            else:
                raise TypeError(f"cannot render block {b!r}")
        out.append("</section>")
    out += ["</body>", "</html>"]
    return "\n".join(out) + "\n"


_VOID = {"meta", "link", "br", "hr", "img", "input", "col", "area", "base", "embed", "source", "track", "wbr"}


class _Checker(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.stack: list[str] = []
        self.ids: dict[str, int] = {}
        self.hrefs: list[str] = []
        self.problems: list[str] = []

    def _attrs(self, attrs):
        for k, v in attrs:
            if k == "id":
                self.ids[v] = self.ids.get(v, 0) + 1
            elif k == "href" and v and v.startswith("#"):
                self.hrefs.append(v[1:])

    def handle_starttag(self, tag, attrs):
        self._attrs(attrs)
        if tag not in _VOID:
            self.stack.append(tag)

    def handle_startendtag(self, tag, attrs):
        self._attrs(attrs)

    def handle_endtag(self, tag):
        if tag in _VOID:
            return
        if not self.stack or self.stack[-1] != tag:
            self.problems.append(f"unexpected </{tag}> (open: {self.stack[-3:]})")
            if tag in self.stack:
                while self.stack and self.stack.pop() != tag:
                    pass
            return
        self.stack.pop()


def check_well_formed(html: str) -> list[str]:
    """Structural problems: unbalanced tags, repeated ids, dangling in-page links."""
    p = _Checker()
    p.feed(html)
    p.close()
    problems = list(p.problems)
    if p.stack:
        problems.append(f"unclosed tags: {p.stack}")
    problems += [f"duplicate id {k!r}" for k, n in sorted(p.ids.items()) if n > 1]
    problems += [f"link to missing #{h}" for h in p.hrefs if h not in p.ids]
    return problems
