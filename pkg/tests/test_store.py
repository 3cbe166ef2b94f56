import itertools
import json
import subprocess
import sys
import textwrap
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings, strategies as st

from chaindoc import store as store_mod
from chaindoc.errors import StoreError
from chaindoc.render import RenderedOutputs
from chaindoc.store import STATUSES, TRANSITIONS, Store

META = {"author": "A. Student", "title": "Lab 1", "doc_type": "lab_report", "discipline": "Circuits"}


def outputs(tag="a"):
    return RenderedOutputs(f"# {tag}\n", f"<html>{tag}</html>\n", f"<html class=print>{tag}</html>\n",
                           {"fig.svg": f"<svg>{tag}</svg>"})


class Clock:
    def __init__(self):
        self.t = datetime(2026, 1, 1, tzinfo=timezone.utc)

    def __call__(self):
        self.t += timedelta(seconds=1)
        return self.t


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "store", clock=Clock())


def test_submit_returns_content_id(store):
    doc_id = store.submit(outputs(), META)
    assert len(doc_id) == 16 and int(doc_id, 16) >= 0
    assert store.record(doc_id).status == "submitted"
    assert store.check_consistency() == []


def test_resubmit_is_idempotent(store):
    first = store.submit(outputs(), META)
    created = store.record(first).created_utc
    second = store.submit(outputs(), META)
    assert first == second
    rec = store.record(first)
    assert rec.created_utc == created and rec.revised_utc > created
    assert len(store.list()) == 1


@pytest.mark.parametrize("bad", [{"author": ""}, {"author": "   "}, {"title": ""}, {"doc_type": "memo"},
                                 {"extra": "x"}])
def test_invalid_metadata(store, bad):
    with pytest.raises(StoreError) as err:
        store.submit(outputs(), {**META, **bad})
    assert err.value.code == "invalid_metadata"


def test_list_filters_and_order(tmp_path):
    fixed = datetime(2026, 5, 1, tzinfo=timezone.utc)
    st = Store(tmp_path, clock=lambda: fixed)
    assert st.list() == []
    ids = [st.submit(outputs(t), META) for t in "abc"]
    assert [r.doc_id for r in st.list()] == sorted(ids)
    st.archive(ids[1])
    assert [r.doc_id for r in st.list(status="archived")] == [ids[1]]
    assert st.list(author="nobody") == []
    assert len(st.list(doc_type="lab_report")) == 3


def test_list_round_trip_preserves_metadata(store):
    doc_id = store.submit(outputs(), META)
    (rec,) = store.list()
    assert {k: getattr(rec, k) for k in META} == META
    assert rec.doc_id == doc_id


def test_get_modes(store):
    doc_id = store.submit(outputs(), META)
    assert store.get(doc_id, "inline") == outputs().html_inline
    assert store.get(doc_id, "print") == outputs().html_print
    assert store.get(doc_id, "markdown") == outputs().markdown
    with pytest.raises(StoreError) as err:
        store.get("0123456789abcdef")
    assert err.value.code == "not_found"


def test_lifecycle_chain(store):
    doc_id = store.submit(outputs(), META)
    assert store.set_status(doc_id, "reviewed").status == "reviewed"
    assert store.set_status(doc_id, "archived").status == "archived"
    with pytest.raises(StoreError) as err:
        store.set_status(doc_id, "reviewed")
    assert err.value.code == "illegal_transition"
    with pytest.raises(StoreError) as err:
        store.update_meta(doc_id, {"title": "x"})
    assert err.value.code == "archived_immutable"
    store.delete(doc_id)
    assert store.list() == []
    assert not (store.docs / doc_id).exists()


def test_update_meta(store):
    doc_id = store.submit(outputs(), META)
    rec = store.update_meta(doc_id, {"title": "Lab 1, revised"})
    assert rec.title == "Lab 1, revised" and rec.author == META["author"]
    with pytest.raises(StoreError):
        store.update_meta(doc_id, {"author": ""})


ACTIONS = ("to_submitted", "to_reviewed", "to_archived", "update_meta", "delete", "get")


def _legal(status, action):
    if action.startswith("to_"):
        return (status, action[3:]) in TRANSITIONS
    if action == "update_meta":
        return status != "archived"
    return True


def _reach(st, status):
    doc_id = st.submit(outputs(status), META)
    if status == "reviewed":
        st.set_status(doc_id, "reviewed")
    elif status == "archived":
        st.archive(doc_id)
    return doc_id


@pytest.mark.parametrize("status,action", list(itertools.product(STATUSES, ACTIONS)))
def test_transition_matrix(tmp_path, status, action):
    st = Store(tmp_path, clock=Clock())
    doc_id = _reach(st, status)
    before = st.record(doc_id)

    def act():
        if action.startswith("to_"):
            st.set_status(doc_id, action[3:])
        elif action == "update_meta":
            st.update_meta(doc_id, {"discipline": "Other"})
        elif action == "delete":
            st.delete(doc_id)
        else:
            st.get(doc_id)

    if _legal(status, action):
        act()
    else:
        with pytest.raises(StoreError) as err:
            act()
        assert err.value.code in ("illegal_transition", "archived_immutable")
        assert st.record(doc_id) == before


def test_resubmitting_archived_content_is_rejected(store):
    doc_id = store.submit(outputs(), META)
    store.archive(doc_id)
    with pytest.raises(StoreError) as err:
        store.submit(outputs(), META)
    assert err.value.code == "archived_immutable"


def test_crash_before_rename_keeps_previous_index(store, monkeypatch):
    doc_id = store.submit(outputs(), META)
    before = store.index_path.read_bytes()

    def crash(src, dst):
        raise OSError("simulated power loss")

    monkeypatch.setattr(store_mod, "_replace", crash)
    with pytest.raises(OSError):
        store.set_status(doc_id, "reviewed")
    with pytest.raises(OSError):
        store.submit(outputs("b"), META)
    assert store.index_path.read_bytes() == before
    assert store.record(doc_id).status == "submitted"
    assert store.check_consistency() == []


def test_killed_process_keeps_previous_index(tmp_path):
    root = tmp_path / "s"
    st = Store(root)
    doc_id = st.submit(outputs(), META)
    before = st.index_path.read_bytes()
    script = textwrap.dedent(f"""
        import os
        from chaindoc import store as m
        m._replace = lambda src, dst: os._exit(9)
        m.Store({str(root)!r}).set_status({doc_id!r}, "reviewed")
    """)
    proc = subprocess.run([sys.executable, "-c", script])
    assert proc.returncode == 9
    assert st.index_path.read_bytes() == before
    assert st.record(doc_id).status == "submitted"
    # leftover temp file does not disturb later writers
    st.set_status(doc_id, "reviewed")
    assert st.record(doc_id).status == "reviewed"


def test_corrupt_index(store):
    store.submit(outputs(), META)
    store.index_path.write_text("{not json")
    with pytest.raises(StoreError) as err:
        store.list()
    assert err.value.code == "index_corrupt"
    store.index_path.write_text(json.dumps({"schema": "other", "version": 1, "records": {}}))
    with pytest.raises(StoreError) as err:
        store.list()
    assert err.value.code == "index_corrupt"


def test_version_counter_increments(store):
    assert store.version == 0
    doc_id = store.submit(outputs(), META)
    store.set_status(doc_id, "reviewed")
    assert store.version == 2


@settings(max_examples=25)
@given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from(["submit", "review", "archive", "delete"])),
                max_size=12))
def test_random_operation_sequences_keep_index_consistent(tmp_path_factory, ops):
    s = Store(tmp_path_factory.mktemp("st"), clock=Clock())
    for tag, op in ops:
        doc_id = store_mod.content_id(outputs(tag).html_inline)
        try:
            if op == "submit":
                s.submit(outputs(tag), META)
            elif op == "review":
                s.set_status(doc_id, "reviewed")
            elif op == "archive":
                s.archive(doc_id)
            else:
                s.delete(doc_id)
        except StoreError as exc:
            assert exc.code in ("not_found", "illegal_transition", "archived_immutable")
        assert s.check_consistency() == []
    ids = [r.doc_id for r in s.list()]
    assert len(ids) == len(set(ids))
