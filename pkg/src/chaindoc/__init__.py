"""Component-chain simulation with automatic research-report generation."""

from .chain import ComponentChain, build_chain, set_parameter, validate_chain
from .dataflow import ProcessingBlock, compute_functional, propagate
from .docgen import (
    DiagramSpec,
    TableSpec,
    TagBinding,
    assemble_document,
    bind_providers,
    build_diagram,
    build_table,
    capture_schema,
    parse_template,
)
from .errors import ChainDocError
from .mathexpr import Environment, eval_expr, format_expr, parse_expr
from .pipeline import ProjectConfig, bundled_example, run_workflow
from .render import nice_ticks, render_html, render_markdown
from .solver import solve_ac, solve_dc, solve_transient
from .store import Store

__version__ = "0.1.0"

__all__ = [
    "ChainDocError", "ComponentChain", "DiagramSpec", "Environment", "ProcessingBlock", "ProjectConfig", "Store",
    "TableSpec", "TagBinding", "assemble_document", "bind_providers", "build_chain", "build_diagram", "build_table",
    "bundled_example", "capture_schema", "compute_functional", "eval_expr", "format_expr", "nice_ticks",
    "parse_expr", "parse_template", "propagate", "render_html", "render_markdown", "run_workflow", "set_parameter",
    "solve_ac", "solve_dc", "solve_transient", "validate_chain",
]
