from dataclasses import dataclass, field

from ..docgen.document import DocumentModel
from .html import check_well_formed, render_html
from .markdown import render_markdown, write_markdown
from .ticks import nice_ticks


@dataclass(frozen=True)
class RenderedOutputs:
    markdown: str
    html_inline: str
    html_print: str
    assets: dict[str, str] = field(default_factory=dict, compare=False)


def render_all(doc: DocumentModel) -> RenderedOutputs:
    md, assets = render_markdown(doc)
    return RenderedOutputs(md, render_html(doc, "html_inline"), render_html(doc, "html_print"), assets)


__all__ = [
    "RenderedOutputs", "check_well_formed", "nice_ticks", "render_all", "render_html", "render_markdown",
    "write_markdown",
]
