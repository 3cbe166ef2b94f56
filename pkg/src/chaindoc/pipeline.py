"""Batch workflow: one JSON project file in, a rendered report bundle out.

Steps run in a fixed order and each is recorded in the bundle's trace:

    authentication      author metadata present
    chain_formation     netlist parsed
    parameterization    pre-calc expressions, parameter overrides, validation
    analysis            dc / transient / ac solves
    result_processing   processing blocks
    report_formatting   figures, tables, template binding, document, rendering
    store_submission    only when a store root is configured

Solver outputs are published under ``<analysis>.<probe>`` (for example
``tran.P1``); pre-calc values, block outputs and figure/table labels share the
same namespace. Relative paths in the config resolve against its directory.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from . import mathexpr
from .chain import ComponentChain, build_chain, resolve, set_parameter, validate_chain
from .dataflow import FUNCTIONALS, ProcessingBlock, evaluation_order, propagate
from .docgen.diagram import DiagramSpec, build_diagram
from .docgen.document import DocumentModel, DocumentOptions, Metadata, assemble_document
from .docgen.schema import capture_schema
from .docgen.table import NumberCell, RefCell, TableSpec, build_table
from .docgen.template import TagBinding, bind_providers, check_bindings, parse_template
from .errors import ChainDocError, ConfigError, DataflowError, DocgenError, WorkflowError
from .render import RenderedOutputs, render_all
from .solver import solve_ac, solve_dc, solve_transient
from .store import Store
from .values import ComplexSeries, DataValue, Scalar, Series

log = logging.getLogger(__name__)

STEPS = (
    ("authentication", "Аутентификация студента"),
    ("chain_formation", "Формирование компонентной схемы"),
    ("parameterization", "Параметризация схемы"),
    ("analysis", "Анализ"),
    ("result_processing", "Обработка результатов"),
    ("report_formatting", "Оформление отчета"),
    ("store_submission", "Загрузка в СУП"),
)
STEP_TITLES = dict(STEPS)
PROBE_UNITS = {"probe_voltage": "V", "probe_current": "A"}


def _schema() -> dict:
    return json.loads(resources.files("chaindoc").joinpath("data/project.schema.json").read_text(encoding="utf-8"))


def bundled_example() -> Path:
    """Path to the shipped RC low-pass lab-report project."""
    return Path(str(resources.files("chaindoc").joinpath("data/rc_lab/config.json")))


@dataclass(frozen=True)
class ProjectConfig:
    data: Mapping[str, Any]
    base_dir: Path
    raw: bytes = b""

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ProjectConfig":
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise ConfigError("io_failure", f"cannot read {path}: {exc.strerror}") from exc
        return cls.from_bytes(raw, path.parent)

    @classmethod
    def from_bytes(cls, raw: bytes, base_dir: str | os.PathLike = ".") -> "ProjectConfig":
        try:
            data = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ConfigError("config_syntax", str(exc)) from exc
        return cls.from_dict(data, base_dir, raw)

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: str | os.PathLike = ".", raw: bytes | None = None) -> "ProjectConfig":
        try:
            jsonschema.validate(data, _schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError("config_schema", f"{where}: {exc.message}") from None
        if raw is None:
            raw = json.dumps(data, sort_keys=True, ensure_ascii=False).encode("utf-8")
        return cls(data, Path(base_dir), raw)

    def get(self, key: str, default=None):
        return self.data.get(key, default)

    def path(self, key: str) -> Path:
        return (self.base_dir / self.data[key]).resolve()

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.raw).hexdigest()


@dataclass
class ReportBundle:
    document: DocumentModel
    outputs: RenderedOutputs
    provenance: dict[str, str]
    trace: list[str]
    values: dict[str, DataValue] = field(repr=False, default_factory=dict)
    doc_id: str | None = None
    output_dir: Path | None = None


def chain_hash(chain: ComponentChain) -> str:
    return hashlib.sha256(chain.to_netlist().encode("utf-8")).hexdigest()


class _Run:
    """Mutable state threaded through the steps of one workflow run."""

    def __init__(self, config: ProjectConfig):
        self.config = config
        self.trace: list[str] = []
        self.values: dict[str, DataValue] = {}

    def step(self, name: str, fn, *args):
        self.trace.append(name)
        log.info("step %s (%s)", name, STEP_TITLES[name])
        try:
            return fn(*args)
        except ChainDocError as exc:
            raise WorkflowError(name, STEP_TITLES[name], exc) from exc
        except (OSError, ValueError) as exc:
            raise WorkflowError(name, STEP_TITLES[name], ConfigError("io_failure" if isinstance(exc, OSError)
                                                                     else "invalid_value", str(exc))) from exc

    # -- steps ------------------------------------------------------------------

    def authenticate(self) -> Metadata:
        meta = self.config.data["metadata"]
        for key in ("author", "title"):
            if not meta[key].strip():
                raise ConfigError("invalid_metadata", f"metadata.{key} must not be empty")
        return Metadata(meta["author"], meta["title"], meta.get("date", ""), meta.get("discipline", ""))

    def form_chain(self) -> ComponentChain:
        return build_chain(self.config.path("netlist").read_bytes())

    def parameterize(self, chain: ComponentChain) -> tuple[ComponentChain, mathexpr.Environment]:
        bound: dict[str, float] = {}
        for name, text in self.config.get("precalc", {}).items():
            try:
                bound[name] = mathexpr.evaluate(text, mathexpr.Environment(dict(bound)))
            except ChainDocError as exc:
                raise ConfigError(exc.code, f"precalc {name}: {exc}") from exc
        env = mathexpr.Environment(bound)
        for p in self.config.get("parameters", []):
            value = p["value"]
            if isinstance(value, str):
                try:
                    value = mathexpr.evaluate(value, env)
                except ChainDocError as exc:
                    raise ConfigError(exc.code, f"parameter {p['component']}.{p['param']}: {exc}") from exc
            chain = set_parameter(chain, p["component"], p["param"], value)
        validate_chain(chain, env).raise_if_failed()
        for name, value in bound.items():
            self.values[name] = Scalar(value)
        return resolve(chain, env), env

    def analyse(self, chain: ComponentChain) -> None:
        units = {c.id: PROBE_UNITS[c.kind] for c in chain.components if c.kind in PROBE_UNITS}
        for a in self.config.get("analyses", []):
            name = a["name"]
            if a["type"] == "dc":
                sol = solve_dc(chain)
                for pid, v in sol.probe_values.items():
                    self._publish(f"{name}.{pid}", Scalar(float(v), units[pid]))
            elif a["type"] == "transient":
                w = solve_transient(chain, a["t_end"], a["dt"], a.get("method", "trapezoidal"))
                for pid, y in w.series.items():
                    self._publish(f"{name}.{pid}", Series(w.time_s, y, "s", units[pid]))
            else:
                fr = solve_ac(chain, a["f_start"], a["f_end"], a["ppd"])
                for pid, z in fr.complex_values.items():
                    self._publish(f"{name}.{pid}", ComplexSeries(fr.freq_hz, z, units[pid]))

    def process(self) -> None:
        for bid, value in propagate(self.blocks(), self.values).items():
            self.values[bid] = value

    def format_report(self, chain: ComponentChain, meta: Metadata, env: mathexpr.Environment) -> DocumentModel:
        cfg = self.config
        for s in cfg.get("schemas", []):
            fig = capture_schema(chain, s["label"], s.get("selection"))
            if s.get("caption"):
                fig = type(fig)(fig.svg, s["caption"], fig.label, fig.bbox, fig.meta)
            self._publish(s["label"], fig)
        for d in cfg.get("diagrams", []):
            spec = DiagramSpec(d["kind"], tuple(d["series"]), d["label"], d.get("caption", ""),
                               d.get("x_label", ""), d.get("y_label", ""), at_freq_hz=d.get("at_freq_hz"))
            self._publish(d["label"], build_diagram(spec, self.values))
        for t in cfg.get("tables", []):
            self._publish(t["label"], build_table(table_spec(t), self.values))

        template = parse_template(cfg.path("template").read_text(encoding="utf-8"))
        body = bind_providers(template, bindings(cfg), self.values, env)
        doc = cfg.get("document", {})
        options = DocumentOptions(
            include_annotation=doc.get("include_annotation", False),
            include_abstract=doc.get("include_abstract", False),
            include_toc=doc.get("include_toc", True),
            annotation=doc.get("annotation", ""),
            abstract=doc.get("abstract", ""),
            introduction=doc.get("introduction", ""),
            conclusion=doc.get("conclusion", ""),
            references=tuple(doc.get("references", ())),
            language=cfg.get("language", "en"),
        )
        return assemble_document(cfg.get("doc_type", "lab_report"), meta, body, options)

    # -- helpers ----------------------------------------------------------------

    def _publish(self, key: str, value: DataValue) -> None:
        if key in self.values:
            raise ConfigError("duplicate_id", f"{key!r} is produced twice", id=key)
        self.values[key] = value

    def blocks(self) -> list[ProcessingBlock]:
        return project_blocks(self.config)


def project_blocks(config: ProjectConfig) -> list[ProcessingBlock]:
    out = []
    for b in config.get("blocks", []):
        if "functional" in b:
            if b["functional"] not in FUNCTIONALS:
                raise DataflowError("unknown_functional", f"{b['id']}: {b['functional']!r}", block=b["id"])
            blk = ProcessingBlock.functional(b["id"], b["functional"], b["input"], b.get("band_pct", 2.0))
        elif "expr" in b:
            blk = ProcessingBlock.expression(b["id"], b["expr"])
        else:
            blk = ProcessingBlock.passthrough(b["id"], b["passthrough"])
        if "unit" in b:
            blk = ProcessingBlock(blk.id, blk.kind, blk.inputs, blk.expr, blk.band_pct, b["unit"])
        out.append(blk)
    return out


def table_spec(t: Mapping) -> TableSpec:
    def cell(c):
        if isinstance(c, str):
            return c
        if isinstance(c, (int, float)):
            return NumberCell(float(c))
        return RefCell(c["ref"], c.get("fmt", "%.4g"), c.get("unit", False))

    cells = tuple(tuple(cell(c) for c in row) for row in t["rows"])
    return TableSpec(t["label"], cells, t.get("header", False), t.get("caption", ""), t["label"])


def bindings(config: ProjectConfig) -> list[TagBinding]:
    return [TagBinding(b["tag"], b["provider"], b.get("fmt", "%.4g"), b.get("caption", ""))
            for b in config.get("bindings", [])]


def declared_ids(config: ProjectConfig, chain: ComponentChain) -> set[str]:
    """Every provider id a run of this config would publish."""
    probes = [c.id for c in chain.components if c.kind in PROBE_UNITS]
    ids = set(config.get("precalc", {}))
    ids |= {f"{a['name']}.{p}" for a in config.get("analyses", []) for p in probes}
    ids |= {b["id"] for b in config.get("blocks", [])}
    for key in ("schemas", "diagrams", "tables"):
        ids |= {x["label"] for x in config.get(key, [])}
    return ids


def check_project(config: ProjectConfig) -> dict[str, int]:
    """Dry run: everything except solving and rendering.

    Parses and validates the chain, orders the processing blocks and checks
    the template against the bindings and the declared providers.
    """
    run = _Run(config)
    run.step("authentication", run.authenticate)
    chain = run.step("chain_formation", run.form_chain)
    chain, _ = run.step("parameterization", run.parameterize, chain)

    def static_checks():
        known = declared_ids(config, chain) - {b["id"] for b in config.get("blocks", [])}
        blocks = project_blocks(config)
        evaluation_order(blocks, known)
        template = parse_template(config.path("template").read_text(encoding="utf-8"))
        binds = bindings(config)
        check_bindings(template, binds)
        provided = declared_ids(config, chain)
        for b in binds:
            if b.provider not in provided:
                raise DocgenError("unbound_provider", f"tag {b.tag} -> {b.provider}", tag=b.tag,
                                  provider=b.provider)
        return len(blocks), len(template.tag_sites)

    n_blocks, n_tags = run.step("report_formatting", static_checks)
    return {"components": len(chain.components), "nodes": len(chain.nodes), "blocks": n_blocks, "tags": n_tags}


def write_outputs(outputs: RenderedOutputs, provenance: Mapping[str, str], out_dir: str | os.PathLike) -> Path:
    """Write the bundle into ``out_dir`` as one swap.

    Files are staged in a sibling temporary directory which then replaces
    ``out_dir``; the directory is owned by the tool and its previous content
    is discarded only after the new content is complete.
    """
    out_dir = Path(out_dir).resolve()
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(dir=out_dir.parent, prefix=f".{out_dir.name}.new."))
    try:
        files = {"report.md": outputs.markdown, "report.html": outputs.html_inline,
                 "report.print.html": outputs.html_print, **outputs.assets,
                 "provenance.json": json.dumps(dict(provenance), indent=2, sort_keys=True) + "\n"}
        for name in sorted(files):
            (stage / name).write_bytes(files[name].encode("utf-8"))
        old = None
        if out_dir.exists():
            old = Path(tempfile.mkdtemp(dir=out_dir.parent, prefix=f".{out_dir.name}.old."))
            os.replace(out_dir, old / "previous")
        os.replace(stage, out_dir)
        if old is not None:
            shutil.rmtree(old, ignore_errors=True)
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    return out_dir


def run_workflow(
    config: ProjectConfig | str | os.PathLike,
    output_dir: str | os.PathLike | None = None,
    store_root: str | os.PathLike | None = None,
    write: bool = True,
) -> ReportBundle:
    """Execute the whole workflow; nothing is written unless every step succeeds."""
    if not isinstance(config, ProjectConfig):
        config = ProjectConfig.load(config)
    run = _Run(config)
    meta = run.step("authentication", run.authenticate)
    chain = run.step("chain_formation", run.form_chain)
    chain, env = run.step("parameterization", run.parameterize, chain)
    run.step("analysis", run.analyse, chain)
    run.step("result_processing", run.process)
    document = run.step("report_formatting", run.format_report, chain, meta, env)
    outputs = render_all(document)
    provenance = {"config_hash": config.config_hash, "chain_hash": chain_hash(chain)}
    bundle = ReportBundle(document, outputs, provenance, run.trace, run.values)

    if store_root is None and config.get("store_root"):
        store_root = config.path("store_root")
    if store_root is not None:
        store_meta = {"author": meta.author, "title": meta.title, "doc_type": document.doc_type,
                      "discipline": meta.discipline}
        bundle.doc_id = run.step("store_submission", Store(store_root).submit, outputs, store_meta)

    if output_dir is None and config.get("output_dir"):
        output_dir = config.path("output_dir")
    if write and output_dir is not None:
        bundle.output_dir = write_outputs(outputs, provenance, output_dir)
    return bundle
