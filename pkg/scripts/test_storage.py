#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests du ResultStore : écriture indexée, lecture, listing, confinement
des clés au répertoire de sortie.
"""

import hashlib
import tempfile
from pathlib import Path

import testkit  # noqa: F401  # ajoute src/ au path
from queue_bounds.core.errors import ConfigError
from queue_bounds.core.storage import ResultStore, render_cell


def test_render_cell():
    assert render_cell(0.1) == "0.1"
    assert render_cell(3.0) == "3.0"
    assert render_cell(float("inf")) == "inf"
    assert render_cell(7) == "7"
    assert render_cell("k=inf") == "k=inf"


def test_put_indexes_sha256():
    with tempfile.TemporaryDirectory() as tmp:
        store = ResultStore(tmp)
        entry = store.put("trace/rep_0000.csv", "a,b\n1,2\n")
        data = Path(tmp, "trace", "rep_0000.csv").read_bytes()
        assert entry.sha256 == hashlib.sha256(data).hexdigest()
        assert entry.bytes == len(data) == 8
        assert store.exists("trace/rep_0000.csv")
        assert not store.exists("trace/rep_0001.csv")


def test_csv_and_json_round_trip():
    with tempfile.TemporaryDirectory() as tmp:
        store = ResultStore(tmp)
        store.put_csv("samples.csv", ("rep", "A"), [(0, 4.5), (1, 0.1)])
        assert store.get("samples.csv") == "rep,A\n0,4.5\n1,0.1\n"
        store.put_json("summary.json", {"status": "ok", "b": 1})
        assert store.get_json("summary.json") == {"status": "ok", "b": 1}
        assert store.get("absent.csv") is None


def test_unreadable_json_is_none():
    with tempfile.TemporaryDirectory() as tmp:
        store = ResultStore(tmp)
        store.put("broken.json", "{not json")
        assert store.get_json("broken.json") is None


def test_index_and_listing_are_sorted():
    with tempfile.TemporaryDirectory() as tmp:
        store = ResultStore(tmp)
        for key in ("summary.json", "bound.csv", "trace/rep_0001.csv", "trace/rep_0000.csv"):
            store.put(key, "x\n")
        assert [e.path for e in store.index()] == [
            "bound.csv", "summary.json", "trace/rep_0000.csv", "trace/rep_0001.csv",
        ]
        assert [o["Key"] for o in store.list_objects("trace/")] == [
            "trace/rep_0000.csv", "trace/rep_0001.csv",
        ]
        assert all(o["Size"] == 2 for o in store.list_objects())


def test_listing_missing_root():
    with tempfile.TemporaryDirectory() as tmp:
        assert ResultStore(Path(tmp, "not-yet")).list_objects() == []


def test_key_cannot_escape_root():
    with tempfile.TemporaryDirectory() as tmp:
        store = ResultStore(Path(tmp, "run"))
        try:
            store.put("../outside.csv", "x\n")
        except ConfigError as e:
            assert e.code == "config-error"
        else:
            raise AssertionError("ConfigError attendue")
        assert not Path(tmp, "outside.csv").exists()


if __name__ == "__main__":
    testkit.run_tests(globals(), "Tests du stockage")
