"""Report skeleton: fixed part order, table of contents, labels."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from ..errors import DocgenError
from ..values import Figure, TableCells
from .blocks import Block, Heading, ListBlock, Paragraph

DOC_TYPES = ("lab_report", "calc_graphic_work", "coursework", "course_project", "diploma_work", "diploma_project")

PART_ORDER = (
    "title_page",
    "annotation",
    "abstract",
    "toc",
    "introduction",
    "main",
    "conclusion",
    "references",
    "appendices",
)
OPTIONAL_PARTS = ("annotation", "abstract", "toc", "appendices")
TOC_MAX_LEVEL = 3
_AFTER_TOC = PART_ORDER[PART_ORDER.index("toc") + 1:]

TITLES = {
    "en": {
        "title_page": "Title page",
        "annotation": "Annotation",
        "abstract": "Abstract",
        "toc": "Contents",
        "introduction": "Introduction",
        "main": "Main part",
        "conclusion": "Conclusion",
        "references": "References",
        "appendices": "Appendices",
        "figure": "Figure",
        "table": "Table",
        "author": "Author",
        "discipline": "Discipline",
        "date": "Date",
        "lab_report": "Laboratory work report",
        "calc_graphic_work": "Calculation and graphic work",
        "coursework": "Coursework",
        "course_project": "Course project",
        "diploma_work": "Diploma work",
        "diploma_project": "Diploma project",
    },
    "ru": {
        "title_page": "Титульный лист",
        "annotation": "Аннотация",
        "abstract": "Реферат",
        "toc": "Содержание",
        "introduction": "Введение",
        "main": "Основная часть",
        "conclusion": "Заключение",
        "references": "Список использованной литературы",
        "appendices": "Приложения",
        "figure": "Рисунок",
        "table": "Таблица",
        "author": "Автор",
        "discipline": "Дисциплина",
        "date": "Дата",
        "lab_report": "Отчет по лабораторной работе",
        "calc_graphic_work": "Расчетно-графическая работа",
        "coursework": "Курсовая работа",
        "course_project": "Курсовой проект",
        "diploma_work": "Дипломная работа",
        "diploma_project": "Дипломный проект",
    },
}


@dataclass(frozen=True)
class Metadata:
    author: str
    title: str
    date: str = ""
    discipline: str = ""


@dataclass(frozen=True)
class Part:
    name: str
    title: str
    blocks: tuple[Block, ...] = ()
    anchor: str = ""


@dataclass(frozen=True)
class TocEntry:
    level: int
    text: str
    anchor: str


@dataclass(frozen=True)
class DocumentOptions:
    include_annotation: bool = False
    include_abstract: bool = False
    include_toc: bool = True
    annotation: Sequence[Block] | str = ()
    abstract: Sequence[Block] | str = ()
    introduction: Sequence[Block] | str = ()
    conclusion: Sequence[Block] | str = ()
    references: Sequence[str] = ()
    appendices: Sequence[Block] = ()
    language: str = "en"


@dataclass(frozen=True)
class DocumentModel:
    doc_type: str
    metadata: Metadata
    parts: tuple[Part, ...]
    toc: tuple[TocEntry, ...] = ()
    language: str = "en"

    @property
    def part_names(self) -> list[str]:
        return [p.name for p in self.parts]

    def part(self, name: str) -> Part:
        for p in self.parts:
            if p.name == name:
                return p
        raise KeyError(name)

    def term(self, key: str) -> str:
        return TITLES[self.language][key]

    def figures(self) -> list[Figure]:
        return [b for p in self.parts for b in p.blocks if isinstance(b, Figure)]

    def tables(self) -> list[TableCells]:
        return [b for p in self.parts for b in p.blocks if isinstance(b, TableCells)]


def _as_blocks(content: Sequence[Block] | str) -> tuple[Block, ...]:
    if isinstance(content, str):
        return tuple(Paragraph(p.strip()) for p in content.split("\n\n") if p.strip())
    return tuple(content)


def assemble_document(
    doc_type: str,
    metadata: Metadata,
    main_blocks: Sequence[Block],
    options: DocumentOptions | None = None,
) -> DocumentModel:
    """Lay the body out in the fixed skeleton order.

    Annotation and abstract appear only when requested, appendices only when
    non-empty; the table of contents lists the headings (level <= 3) of the
    parts that follow it.
    """
    options = options or DocumentOptions()
    if doc_type not in DOC_TYPES:
        raise DocgenError("unknown_doc_type", repr(doc_type))
    if options.language not in TITLES:
        raise DocgenError("unknown_language", repr(options.language))
    titles = TITLES[options.language]

    content = {
        "title_page": (),
        "annotation": _as_blocks(options.annotation),
        "abstract": _as_blocks(options.abstract),
        "toc": (),
        "introduction": _as_blocks(options.introduction),
        "main": tuple(main_blocks),
        "conclusion": _as_blocks(options.conclusion),
        "references": (ListBlock(tuple(options.references), ordered=True),) if options.references else (),
        "appendices": tuple(options.appendices),
    }
    present = {
        "annotation": options.include_annotation,
        "abstract": options.include_abstract,
        "toc": options.include_toc,
        "appendices": bool(options.appendices),
    }

    labels: dict[str, str] = {}
    counter = 0
    toc: list[TocEntry] = []
    parts: list[Part] = []
    for name in PART_ORDER:
        if not present.get(name, True):
            continue
        blocks = []
        for b in content[name]:
            if isinstance(b, Heading):
                counter += 1
                b = replace(b, anchor=f"sec-{counter}")
                if b.level <= TOC_MAX_LEVEL and name in _AFTER_TOC:
                    toc.append(TocEntry(b.level, b.text, b.anchor))
            elif isinstance(b, (Figure, TableCells)):
                if not b.label:
                    raise DocgenError("missing_label", f"{type(b).__name__} without a label in part {name}")
                if not b.caption:
                    raise DocgenError("missing_caption", f"{b.label} has no caption")
                if b.label in labels:
                    raise DocgenError("duplicate_label", f"{b.label} used in {labels[b.label]} and {name}",
                                      label=b.label)
                labels[b.label] = name
            blocks.append(b)
        parts.append(Part(name, titles[name], tuple(blocks), anchor=f"part-{name}"))
    return DocumentModel(doc_type, metadata, tuple(parts), tuple(toc) if options.include_toc else (),
                         options.language)
