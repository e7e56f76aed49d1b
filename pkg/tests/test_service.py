from __future__ import annotations

import threading

import pytest
from fastapi.testclient import TestClient

from medipipe.errors import ConfigError
from medipipe.service import ServiceConfig, create_app, load_config
from medipipe.soap import SECTION_KEYS

FIG2_SEGMENTS = [
    {"start": 0.0, "end": 4.0, "speaker": "doctor", "text": "Hi, Bryan. How are you?"},
    {"start": 5.0, "end": 9.0, "speaker": "patient", "text": "I'm doing well. I'm a little sore."},
    {
        "start": 10.0,
        "end": 14.0,
        "speaker": "doctor",
        "text": "So, Bryan is a 55-year-old male with a past medical history significant for a prior "
        "discectomy, presenting with back pain. So, Bryan, what happened to your back?",
    },
    {
        "start": 15.0,
        "end": 19.0,
        "speaker": "patient",
        "text": "You know... my wife made me push, uh, a refrigerator through the other room, and when "
        "I was helping move it, I felt something in my back on the lower right side.",
    },
    {"start": 20.0, "end": 24.0, "speaker": "doctor", "text": "Okay, on the lower right side of your back?"},
    {"start": 25.0, "end": 29.0, "speaker": "patient", "text": "Yes."},
]


@pytest.fixture
def config(tmp_path):
    return ServiceConfig(index_path=tmp_path / "index.mpvx")


@pytest.fixture
def client(config):
    with TestClient(create_app(config)) as c:
        yield c


def _capture_fixture_session(client) -> str:
    session_id = client.post("/v1/sessions").json()["session_id"]
    for seg in FIG2_SEGMENTS:
        resp = client.post(f"/v1/sessions/{session_id}/segments", json=seg)
        assert resp.status_code == 204
    return session_id


# --- sessions -------------------------------------------------------------------


def test_create_session_returns_unique_ids(client):
    first = client.post("/v1/sessions")
    assert first.status_code == 201
    assert first.json()["session_id"]
    second = client.post("/v1/sessions")
    assert first.json()["session_id"] != second.json()["session_id"]


def test_create_many_sessions_all_distinct(client):
    ids = {client.post("/v1/sessions").json()["session_id"] for _ in range(200)}
    assert len(ids) == 200


def test_segment_unknown_session_404(client):
    resp = client.post("/v1/sessions/nope/segments", json=FIG2_SEGMENTS[0])
    assert resp.status_code == 404
    assert resp.json()["error"]["code"] == "not_found"


def test_segment_validation_422(client):
    session_id = client.post("/v1/sessions").json()["session_id"]
    bad = {"start": 5.0, "end": 4.0, "speaker": "doctor", "text": "x"}
    resp = client.post(f"/v1/sessions/{session_id}/segments", json=bad)
    assert resp.status_code == 422
    assert resp.json()["error"]["code"] == "validation"


def test_segment_ordering_422(client):
    session_id = client.post("/v1/sessions").json()["session_id"]
    client.post(f"/v1/sessions/{session_id}/segments", json=FIG2_SEGMENTS[2])
    resp = client.post(f"/v1/sessions/{session_id}/segments", json=FIG2_SEGMENTS[0])
    assert resp.status_code == 422
    assert resp.json()["error"]["code"] == "ordering"


def test_segment_after_finalize_409(client):
    session_id = _capture_fixture_session(client)
    assert client.post(f"/v1/sessions/{session_id}/finalize").status_code == 200
    resp = client.post(
        f"/v1/sessions/{session_id}/segments",
        json={"start": 99.0, "end": 100.0, "speaker": "doctor", "text": "late"},
    )
    assert resp.status_code == 409


# --- finalize --------------------------------------------------------------------


def test_finalize_generates_and_stores_note(client):
    session_id = _capture_fixture_session(client)
    resp = client.post(f"/v1/sessions/{session_id}/finalize")
    assert resp.status_code == 200
    body = resp.json()
    assert body["note_id"] == f"note-{session_id}"
    note = body["note"]
    for key in SECTION_KEYS:
        assert key in note
    assert note["chief_complaint"] == "I'm doing well."
    fetched = client.get(f"/v1/notes/{body['note_id']}")
    assert fetched.status_code == 200
    assert fetched.json() == note


def test_finalize_empty_session_422(client):
    session_id = client.post("/v1/sessions").json()["session_id"]
    resp = client.post(f"/v1/sessions/{session_id}/finalize")
    assert resp.status_code == 422


def test_finalize_twice_409(client):
    session_id = _capture_fixture_session(client)
    assert client.post(f"/v1/sessions/{session_id}/finalize").status_code == 200
    assert client.post(f"/v1/sessions/{session_id}/finalize").status_code == 409


def test_finalize_unknown_session_404(client):
    assert client.post("/v1/sessions/ghost/finalize").status_code == 404


def test_finalize_provider_failure_502_nothing_ingested(tmp_path):
    config = ServiceConfig(index_path=tmp_path / "i.mpvx", generate="http://127.0.0.1:9/")
    with TestClient(create_app(config)) as client:
        session_id = _capture_fixture_session(client)
        resp = client.post(f"/v1/sessions/{session_id}/finalize")
        assert resp.status_code == 502
        body = resp.json()["error"]
        assert body["code"] == "provider_failure"
        assert body["stage"] == "generate"
        assert client.get("/v1/health").json()["index_entries"] == 0


# --- query -----------------------------------------------------------------------


def test_query_after_finalize_returns_citations(client):
    session_id = _capture_fixture_session(client)
    client.post(f"/v1/sessions/{session_id}/finalize")
    resp = client.post("/v1/query", json={"query": "back pain"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["context_used"] is True
    assert len(body["citations"]) >= 1
    assert body["citations"][0]["source_id"] == f"note-{session_id}"
    assert body["answer"]


def test_query_empty_index_reports_no_context(client):
    resp = client.post("/v1/query", json={"query": "anything"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["context_used"] is False
    assert body["citations"] == []


def test_query_empty_string_422(client):
    resp = client.post("/v1/query", json={"query": ""})
    assert resp.status_code == 422
    assert resp.json()["error"]["code"] == "validation"


def test_query_bad_k_422(client):
    resp = client.post("/v1/query", json={"query": "x", "k": 0})
    assert resp.status_code == 422


def test_query_provider_failure_carries_stage(tmp_path):
    config = ServiceConfig(index_path=tmp_path / "i.mpvx", embed="http://127.0.0.1:9/")
    with TestClient(create_app(config)) as client:
        resp = client.post("/v1/query", json={"query": "x"})
        assert resp.status_code == 502
        assert resp.json()["error"]["stage"] == "embed"


# --- notes / health -----------------------------------------------------------------


def test_get_unknown_note_404(client):
    resp = client.get("/v1/notes/ghost")
    assert resp.status_code == 404
    assert resp.json()["error"]["code"] == "not_found"


def test_health_reports_index_entries(client):
    assert client.get("/v1/health").json() == {"status": "ok", "index_entries": 0}
    session_id = _capture_fixture_session(client)
    client.post(f"/v1/sessions/{session_id}/finalize")
    body = client.get("/v1/health").json()
    assert body["status"] == "ok"
    assert body["index_entries"] >= 1


# --- durability -----------------------------------------------------------------------


def test_restart_preserves_notes_and_query_results(config):
    with TestClient(create_app(config)) as client:
        session_id = _capture_fixture_session(client)
        note_id = client.post(f"/v1/sessions/{session_id}/finalize").json()["note_id"]
        first = client.post("/v1/query", json={"query": "back pain"}).json()

    with TestClient(create_app(config)) as restarted:
        assert restarted.get(f"/v1/notes/{note_id}").status_code == 200
        second = restarted.post("/v1/query", json={"query": "back pain"}).json()
        assert [c["entry_id"] for c in second["citations"]] == [c["entry_id"] for c in first["citations"]]
        assert second["context_used"] is True
        for a, b in zip(first["citations"], second["citations"]):
            assert b["score"] == pytest.approx(a["score"], abs=1e-6)


def test_unwritable_index_dir_fails_startup(tmp_path):
    with pytest.raises(ConfigError):
        create_app(ServiceConfig(index_path=tmp_path / "missing-dir" / "i.mpvx"))


# --- concurrency ------------------------------------------------------------------------


def test_queries_never_observe_partial_ingest(config):
    # one writer finalizing, many readers polling health counts
    chunk_cfg_entries: set[int] = set()
    with TestClient(create_app(config)) as client:
        session_id = _capture_fixture_session(client)
        counts: set[int] = set()
        stop = threading.Event()

        def poll():
            while not stop.is_set():
                counts.add(client.get("/v1/health").json()["index_entries"])

        t = threading.Thread(target=poll)
        t.start()
        client.post(f"/v1/sessions/{session_id}/finalize")
        stop.set()
        t.join()
        final = client.get("/v1/health").json()["index_entries"]
        counts.add(final)
        chunk_cfg_entries = counts
    assert chunk_cfg_entries <= {0, final}


# --- config file -------------------------------------------------------------------------


def test_load_config_file(tmp_path):
    cfg_file = tmp_path / "svc.conf"
    cfg_file.write_text(
        "listen_addr = 0.0.0.0:9001\n"
        f"index_path = {tmp_path / 'x.mpvx'}\n"
        "embed = mock\n"
        "k = 2\n"
        "# comment\n"
        "chunk_size = 500\n",
        encoding="utf-8",
    )
    config = load_config(cfg_file)
    assert config.port == 9001
    assert config.k == 2
    assert config.chunk_size == 500
    assert config.embed == "mock"


def test_load_config_rejects_unknown_key(tmp_path):
    cfg_file = tmp_path / "svc.conf"
    cfg_file.write_text("bogus = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(cfg_file)
