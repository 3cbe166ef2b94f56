"""On-disk report repository with a review lifecycle.

Layout under the store root::

    index.json                 {"schema": ..., "version": N, "records": {doc_id: record}}
    index.lock                 advisory lock held by writers
    docs/<doc_id>/report.html
    docs/<doc_id>/report.print.html
    docs/<doc_id>/report.md
    docs/<doc_id>/assets/*.svg

Record ids are the first 16 hex digits of the SHA-256 of the inline HTML, so
submitting the same content again lands on the same record. Payloads are
written before the index, and the index is replaced atomically, so a crash at
any point leaves the last committed index valid and every reference in it
resolvable. Readers never take the lock.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Mapping

from filelock import FileLock

from .docgen.document import DOC_TYPES
from .errors import StoreError

INDEX_SCHEMA = "chaindoc-store/1"
STATUSES = ("submitted", "reviewed", "archived")
TRANSITIONS = frozenset({("submitted", "reviewed"), ("submitted", "archived"), ("reviewed", "archived")})
META_FIELDS = ("author", "title", "doc_type", "discipline")
VIEW_FILES = {"inline": "report.html", "print": "report.print.html", "markdown": "report.md"}

# indirection so tests can simulate a crash between temp-write and rename
_replace = os.replace


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


def _stamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def content_id(html_inline: str) -> str:
    return hashlib.sha256(html_inline.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    author: str
    title: str
    doc_type: str
    discipline: str
    created_utc: str
    revised_utc: str
    status: str
    html: str
    print_html: str
    md: str
    assets: tuple[str, ...] = ()

    @property
    def metadata(self) -> dict[str, str]:
        return {k: getattr(self, k) for k in META_FIELDS + ("created_utc", "revised_utc")}

    def to_json(self) -> dict:
        d = asdict(self)
        d["assets"] = list(self.assets)
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "DocumentRecord":
        return cls(**{**d, "assets": tuple(d.get("assets", ()))})


def _check_meta(meta: Mapping[str, str], partial: bool = False) -> dict[str, str]:
    unknown = sorted(set(meta) - set(META_FIELDS))
    if unknown:
        raise StoreError("invalid_metadata", f"unknown metadata fields: {', '.join(unknown)}")
    out = {}
    for key in META_FIELDS:
        if key not in meta:
            if partial or key == "discipline":
                continue
            raise StoreError("invalid_metadata", f"missing {key}")
        value = meta[key]
        if not isinstance(value, str):
            raise StoreError("invalid_metadata", f"{key} must be text")
        if key in ("author", "title") and not value.strip():
            raise StoreError("invalid_metadata", f"{key} must not be empty")
        if key == "doc_type" and value not in DOC_TYPES:
            raise StoreError("invalid_metadata", f"unknown doc_type {value!r}")
        out[key] = value
    return out


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        _replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Store:
    def __init__(self, root: str | os.PathLike, clock: Callable[[], datetime] = _utc_now):
        self.root = Path(root)
        self.clock = clock
        self.index_path = self.root / "index.json"
        self.docs = self.root / "docs"
        self._lock = FileLock(str(self.root / "index.lock"))

    # -- index ------------------------------------------------------------

    def _load(self) -> tuple[int, dict[str, DocumentRecord]]:
        if not self.index_path.exists():
            return 0, {}
        try:
            raw = json.loads(self.index_path.read_text(encoding="utf-8"))
            if raw.get("schema") != INDEX_SCHEMA or not isinstance(raw.get("version"), int):
                raise ValueError("bad header")
            records = {k: DocumentRecord.from_json(v) for k, v in raw["records"].items()}
            for k, r in records.items():
                if k != r.doc_id or r.status not in STATUSES:
                    raise ValueError(f"bad record {k}")
        except (ValueError, TypeError, KeyError, AttributeError) as exc:
            raise StoreError("index_corrupt", f"{self.index_path}: {exc}") from exc
        return raw["version"], records

    def _commit(self, version: int, records: Mapping[str, DocumentRecord]) -> None:
        doc = {
            "schema": INDEX_SCHEMA,
            "version": version + 1,
            "records": {k: records[k].to_json() for k in sorted(records)},
        }
        data = (json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n").encode("utf-8")
        _atomic_write(self.index_path, data)

    def _mutate(self):
        self.root.mkdir(parents=True, exist_ok=True)
        return self._lock

    @property
    def version(self) -> int:
        return self._load()[0]

    # -- operations -----------------------------------------------------------

    def submit(self, bundle, metadata: Mapping[str, str]) -> str:
        """Store rendered outputs; returns the content-derived id.

        ``bundle`` needs ``html_inline``, ``html_print``, ``markdown`` and
        ``assets`` (file name -> SVG text) attributes, or an ``outputs``
        attribute carrying them.
        """
        outputs = getattr(bundle, "outputs", bundle)
        meta = _check_meta(metadata)
        doc_id = content_id(outputs.html_inline)
        with self._mutate():
            version, records = self._load()
            now = _stamp(self.clock())
            old = records.get(doc_id)
            if old is not None and old.status == "archived":
                raise StoreError("archived_immutable", f"{doc_id} is archived", doc_id=doc_id)
            target = self.docs / doc_id
            if old is None or not target.is_dir():
                self._write_payload(doc_id, outputs)
            assets = tuple(f"assets/{n}" for n in sorted(outputs.assets))
            if old is None:
                rec = DocumentRecord(doc_id, meta["author"], meta["title"], meta["doc_type"],
                                     meta.get("discipline", ""), now, now, "submitted",
                                     VIEW_FILES["inline"], VIEW_FILES["print"], VIEW_FILES["markdown"], assets)
            else:
                rec = replace(old, **meta, revised_utc=now)
            records[doc_id] = rec
            self._commit(version, records)
        return doc_id

    def _write_payload(self, doc_id: str, outputs) -> None:
        self.docs.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(dir=self.docs, prefix=f".{doc_id}."))
        try:
            (tmp / "assets").mkdir()
            for name, text in ((VIEW_FILES["inline"], outputs.html_inline),
                               (VIEW_FILES["print"], outputs.html_print),
                               (VIEW_FILES["markdown"], outputs.markdown)):
                (tmp / name).write_bytes(text.encode("utf-8"))
            for name in sorted(outputs.assets):
                (tmp / "assets" / name).write_bytes(outputs.assets[name].encode("utf-8"))
            target = self.docs / doc_id
            if target.exists():  # orphan from an interrupted earlier run
                shutil.rmtree(target)
            os.rename(tmp, target)
        except BaseException:
            shutil.rmtree(tmp, ignore_errors=True)
            raise

    def list(self, author: str | None = None, doc_type: str | None = None,
             status: str | None = None) -> list[DocumentRecord]:
        _, records = self._load()
        out = [r for r in records.values()
               if (author is None or r.author == author)
               and (doc_type is None or r.doc_type == doc_type)
               and (status is None or r.status == status)]
        return sorted(out, key=lambda r: (r.created_utc, r.doc_id))

    def record(self, doc_id: str) -> DocumentRecord:
        _, records = self._load()
        try:
            return records[doc_id]
        except KeyError:
            raise StoreError("not_found", doc_id, doc_id=doc_id) from None

    def get(self, doc_id: str, mode: str = "inline") -> str:
        if mode not in VIEW_FILES:
            raise StoreError("invalid_argument", f"unknown view mode {mode!r}")
        rec = self.record(doc_id)
        ref = {"inline": rec.html, "print": rec.print_html, "markdown": rec.md}[mode]
        return (self.docs / doc_id / ref).read_bytes().decode("utf-8")

    def set_status(self, doc_id: str, new_status: str) -> DocumentRecord:
        if new_status not in STATUSES:
            raise StoreError("illegal_transition", f"unknown status {new_status!r}")
        with self._mutate():
            version, records = self._load()
            rec = records.get(doc_id)
            if rec is None:
                raise StoreError("not_found", doc_id, doc_id=doc_id)
            if (rec.status, new_status) not in TRANSITIONS:
                raise StoreError("illegal_transition", f"{doc_id}: {rec.status} -> {new_status}",
                                 doc_id=doc_id, current=rec.status, requested=new_status)
            rec = records[doc_id] = replace(rec, status=new_status, revised_utc=_stamp(self.clock()))
            self._commit(version, records)
        return rec

    def archive(self, doc_id: str) -> DocumentRecord:
        return self.set_status(doc_id, "archived")

    def update_meta(self, doc_id: str, metadata: Mapping[str, str]) -> DocumentRecord:
        meta = _check_meta(metadata, partial=True)
        with self._mutate():
            version, records = self._load()
            rec = records.get(doc_id)
            if rec is None:
                raise StoreError("not_found", doc_id, doc_id=doc_id)
            if rec.status == "archived":
                raise StoreError("archived_immutable", f"{doc_id} is archived", doc_id=doc_id)
            rec = records[doc_id] = replace(rec, **meta, revised_utc=_stamp(self.clock()))
            self._commit(version, records)
        return rec

    def delete(self, doc_id: str) -> None:
        with self._mutate():
            version, records = self._load()
            if doc_id not in records:
                raise StoreError("not_found", doc_id, doc_id=doc_id)
            del records[doc_id]
            self._commit(version, records)
            shutil.rmtree(self.docs / doc_id, ignore_errors=True)

    def check_consistency(self) -> list[str]:
        """References in the index that do not resolve on disk."""
        _, records = self._load()
        missing = []
        for r in records.values():
            for ref in (r.html, r.print_html, r.md, *r.assets):
                if not (self.docs / r.doc_id / ref).is_file():
                    missing.append(f"{r.doc_id}/{ref}")
        return missing

