import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from fable.cli import main
from fable.service import ServiceConfig, create_app
from fable.store import EventStore

ALL_IDS = [
    "frag-1", "frag-2", "frag-3", "frag-4", "frag-5", "frag-6",
    "act-1", "act-2", "act-3", "bel-1", "bel-2", "bel-3",
    "lik-1", "lik-2", "exp-1", "exp-2", "exp-3", "exp-4",
]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def env(tmp_path):
    return {"FABLE_DATA_DIR": str(tmp_path / "data")}


def write_answers(tmp_path, value="no", flips=None):
    flips = flips or {}
    path = tmp_path / "answers.json"
    path.write_text(json.dumps({
        "answers": [{"question_id": qid, "value": flips.get(qid, value)}
                    for qid in ALL_IDS],
    }))
    return str(path)


def import_fixture(tmp_path, n=3):
    path = tmp_path / "claims.jsonl"
    path.write_text("".join(
        json.dumps({"claim_id": f"c{i}", "text": f"claim {i}"}) + "\n"
        for i in range(n)
    ))
    return str(path)


def test_import_then_queue_lists_three(runner, env, tmp_path):
    r = runner.invoke(main, ["import", import_fixture(tmp_path)], env=env)
    assert r.exit_code == 0, r.output
    assert "imported 3 claim(s)" in r.output
    r = runner.invoke(main, ["queue", "--profile", "default"], env=env)
    assert r.exit_code == 0, r.output
    for cid in ("c0", "c1", "c2"):
        assert cid in r.output


def test_queue_default_is_pareto_with_frontier_markers(runner, env, tmp_path):
    runner.invoke(main, ["import", import_fixture(tmp_path)], env=env)
    answers = write_answers(tmp_path, "yes")
    runner.invoke(main, ["assess", "c0", "--answers", answers,
                         "--assessor", "ann"], env=env)
    r = runner.invoke(main, ["queue", "--profile", "default"], env=env)
    assert "pareto" in r.output
    assert "frontier" in r.output


def test_score_all_no_shows_zeros(runner, env, tmp_path):
    runner.invoke(main, ["import", import_fixture(tmp_path, 1)], env=env)
    answers = write_answers(tmp_path, "no")
    r = runner.invoke(main, ["assess", "c0", "--answers", answers,
                             "--assessor", "ann"], env=env)
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["score", "c0"], env=env)
    assert r.exit_code == 0, r.output
    assert r.output.count("0.00") >= 5


def test_score_includes_explanation_block(runner, env, tmp_path):
    runner.invoke(main, ["import", import_fixture(tmp_path, 1)], env=env)
    answers = write_answers(tmp_path, "no", {"frag-1": "yes"})
    runner.invoke(main, ["assess", "c0", "--answers", answers,
                         "--assessor", "ann"], env=env)
    r = runner.invoke(main, ["score", "c0"], env=env)
    assert "larger story or argument" in r.output


def test_json_score_matches_api_bytes(runner, env, tmp_path):
    runner.invoke(main, ["import", import_fixture(tmp_path, 1)], env=env)
    answers = write_answers(tmp_path, "no", {"act-1": "yes", "bel-1": "yes"})
    runner.invoke(main, ["assess", "c0", "--answers", answers,
                         "--assessor", "ann"], env=env)
    cli_out = runner.invoke(main, ["score", "c0", "--json"], env=env).output

    with EventStore(env["FABLE_DATA_DIR"]) as store:
        app = create_app(store, ServiceConfig())
        with TestClient(app) as client:
            api_bytes = client.get("/api/v1/claims/c0/score").content
    assert cli_out.strip().encode() == api_bytes


def test_json_queue_matches_api_bytes(runner, env, tmp_path):
    runner.invoke(main, ["import", import_fixture(tmp_path)], env=env)
    cli_out = runner.invoke(main, ["queue", "--json"], env=env).output
    with EventStore(env["FABLE_DATA_DIR"]) as store:
        app = create_app(store, ServiceConfig())
        with TestClient(app) as client:
            api_bytes = client.get("/api/v1/queue").content
    assert cli_out.strip().encode() == api_bytes


def test_audit_lists_events(runner, env, tmp_path):
    runner.invoke(main, ["import", import_fixture(tmp_path, 1)], env=env)
    answers = write_answers(tmp_path)
    runner.invoke(main, ["assess", "c0", "--answers", answers,
                         "--assessor", "ann"], env=env)
    r = runner.invoke(main, ["audit", "c0"], env=env)
    assert r.exit_code == 0
    assert "ClaimAdded" in r.output
    assert "AssessmentRecorded" in r.output


def test_audit_unknown_claim_exits_1(runner, env):
    r = runner.invoke(main, ["audit", "ghost"], env=env)
    assert r.exit_code == 1


def test_import_bad_rows_reported(runner, env, tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"claim_id": "x", "text": "ok"}\n{"claim_id": "y"}\n')
    r = runner.invoke(main, ["import", str(path)], env=env)
    assert "empty claim text" in r.output


def test_import_missing_file_exits_2(runner, env):
    r = runner.invoke(main, ["import", "/nonexistent/claims.jsonl"], env=env)
    assert r.exit_code == 2


def test_validate_questionnaire_ok(runner, env, tmp_path):
    from fable.questionnaire import canonical_fable, dump_questionnaire

    path = tmp_path / "q.json"
    path.write_bytes(dump_questionnaire(canonical_fable()))
    r = runner.invoke(main, ["validate-questionnaire", str(path)], env=env)
    assert r.exit_code == 0
    assert "18 questions" in r.output


def test_validate_questionnaire_invalid_exits_1(runner, env, tmp_path):
    from fable.questionnaire import canonical_fable, dump_questionnaire

    doc = json.loads(dump_questionnaire(canonical_fable()))
    doc["questions"] = [q for q in doc["questions"]
                        if q["dimension"] != "believability"]
    path = tmp_path / "q.json"
    path.write_text(json.dumps(doc))
    r = runner.invoke(main, ["validate-questionnaire", str(path)], env=env)
    assert r.exit_code == 1
    assert "Believability" in r.output


def test_assess_bad_answer_value_exits_1(runner, env, tmp_path):
    runner.invoke(main, ["import", import_fixture(tmp_path, 1)], env=env)
    path = tmp_path / "answers.json"
    path.write_text(json.dumps({
        "answers": [{"question_id": "act-1", "value": "perhaps"}],
    }))
    r = runner.invoke(main, ["assess", "c0", "--answers", str(path),
                             "--assessor", "ann"], env=env)
    assert r.exit_code == 1


def test_serve_missing_config_exits_2(runner, env):
    r = runner.invoke(main, ["serve", "--config", "/nonexistent/config.json"],
                      env=env)
    assert r.exit_code == 2


# -- remote mode (--server) against a live process ------------------------

@pytest.fixture(scope="module")
def live_server(tmp_path_factory):
    import socket
    import subprocess
    import sys as _sys
    import time

    import httpx

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    base = tmp_path_factory.mktemp("remote")
    config = base / "config.json"
    config.write_text(json.dumps({
        "listen_addr": f"127.0.0.1:{port}",
        "data_dir": str(base / "data"),
    }))
    proc = subprocess.Popen(
        [_sys.executable, "-m", "fable.cli", "serve", "--config", str(config)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    url = f"http://127.0.0.1:{port}"
    try:
        deadline = time.monotonic() + 30
        while True:
            try:
                httpx.get(url + "/api/v1/questionnaire", timeout=2)
                break
            except httpx.HTTPError:
                if time.monotonic() > deadline or proc.poll() is not None:
                    raise RuntimeError("server did not come up")
                time.sleep(0.1)
        yield url
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_remote_import_and_queue(runner, live_server, tmp_path):
    r = runner.invoke(main, ["import", import_fixture(tmp_path),
                             "--server", live_server])
    assert r.exit_code == 0, r.output
    assert "imported 3 claim(s)" in r.output
    r = runner.invoke(main, ["queue", "--server", live_server])
    assert r.exit_code == 0, r.output
    for cid in ("c0", "c1", "c2"):
        assert cid in r.output


def test_remote_assess_score_audit(runner, live_server, tmp_path):
    import httpx

    answers = write_answers(tmp_path, "no", {"frag-1": "yes"})
    r = runner.invoke(main, ["assess", "c0", "--answers", answers,
                             "--assessor", "ann", "--server", live_server])
    assert r.exit_code == 0, r.output
    r = runner.invoke(main, ["score", "c0", "--json", "--server", live_server])
    assert r.exit_code == 0, r.output
    api_bytes = httpx.get(
        live_server + "/api/v1/claims/c0/score?by=consensus").content
    assert r.output.strip().encode() == api_bytes
    r = runner.invoke(main, ["audit", "c0", "--server", live_server])
    assert r.exit_code == 0, r.output
    assert "AssessmentRecorded" in r.output


def test_remote_unknown_claim_exits_1(runner, live_server):
    r = runner.invoke(main, ["score", "ghost", "--server", live_server])
    assert r.exit_code == 1
    assert "ghost" in r.output


def test_remote_unreachable_exits_2(runner):
    r = runner.invoke(main, ["queue", "--server", "http://127.0.0.1:1"])
    assert r.exit_code == 2
