from .blocks import Block, Formula, Heading, ListBlock, Paragraph
from .diagram import DiagramSpec, build_diagram
from .document import DOC_TYPES, PART_ORDER, DocumentModel, DocumentOptions, Metadata, assemble_document
from .schema import capture_schema
from .table import NumberCell, RefCell, TableSpec, build_table
from .template import TagBinding, Template, bind_providers, parse_template

__all__ = [
    "Block", "DOC_TYPES", "DiagramSpec", "DocumentModel", "DocumentOptions", "Formula", "Heading", "ListBlock",
    "Metadata", "NumberCell", "PART_ORDER", "Paragraph", "RefCell", "TableSpec", "TagBinding", "Template",
    "assemble_document", "bind_providers", "build_diagram", "build_table", "capture_schema", "parse_template",
]
