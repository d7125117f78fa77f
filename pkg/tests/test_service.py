import json

import pytest
from fastapi.testclient import TestClient

from fable.questionnaire import DIMENSIONS
from fable.service import ServiceConfig, create_app
from fable.store import EventStore


@pytest.fixture
def store(tmp_path):
    with EventStore(tmp_path / "data") as s:
        yield s


@pytest.fixture
def client(store):
    app = create_app(store, ServiceConfig())
    with TestClient(app) as c:
        yield c


def add_claim(client, claim_id, text="a claim"):
    r = client.post("/api/v1/claims", json={"claim_id": claim_id, "text": text})
    assert r.status_code == 201, r.text
    return r.json()


def full_answers(value="no", flips=None):
    flips = flips or {}
    return [
        {"question_id": qid, "value": flips.get(qid, value)}
        for qid in [
            "frag-1", "frag-2", "frag-3", "frag-4", "frag-5", "frag-6",
            "act-1", "act-2", "act-3", "bel-1", "bel-2", "bel-3",
            "lik-1", "lik-2", "exp-1", "exp-2", "exp-3", "exp-4",
        ]
    ]


def post_assessment(client, claim_id, assessor, answers, **kw):
    return client.post(
        f"/api/v1/claims/{claim_id}/assessments",
        json={"assessor_id": assessor, "answers": answers},
        **kw,
    )


class TestClaims:
    def test_create_returns_201_with_id(self, client):
        body = add_claim(client, "c1")
        assert body["claim_id"] == "c1"
        assert body["status"] == "open"

    def test_duplicate_409(self, client):
        add_claim(client, "c1")
        r = client.post("/api/v1/claims", json={"claim_id": "c1", "text": "x"})
        assert r.status_code == 409
        assert r.json()["code"] == "claim_exists"

    def test_empty_text_400(self, client):
        r = client.post("/api/v1/claims", json={"claim_id": "c1", "text": ""})
        assert r.status_code == 400
        assert r.json()["code"] == "validation_error"

    def test_status_filter(self, client):
        add_claim(client, "c1")
        add_claim(client, "c2")
        client.post("/api/v1/claims/c2/status", json={"status": "in_progress"})
        r = client.get("/api/v1/claims", params={"status": "open"})
        assert [c["claim_id"] for c in r.json()["claims"]] == ["c1"]

    def test_pagination(self, client):
        for i in range(5):
            add_claim(client, f"c{i}")
        r = client.get("/api/v1/claims", params={"limit": 2, "offset": 2})
        body = r.json()
        assert [c["claim_id"] for c in body["claims"]] == ["c2", "c3"]
        assert body["total"] == 5

    def test_stable_order(self, client):
        for cid in ["b", "a", "c"]:
            add_claim(client, cid)
        ids = [c["claim_id"] for c in client.get("/api/v1/claims").json()["claims"]]
        # created_at then claim_id; creation timestamps are distinct here
        assert ids == sorted(ids, key=lambda x: ids.index(x))


class TestAssessmentsAndScore:
    def test_assess_then_consensus_score(self, client):
        add_claim(client, "c1")
        r = post_assessment(client, "c1", "ann", full_answers("yes"))
        assert r.status_code == 201
        score = client.get("/api/v1/claims/c1/score",
                           params={"by": "consensus"}).json()
        for dim in DIMENSIONS:
            assert score["score_vector"][dim.value]["score"] == 1.0
        assert score["disagreement"] == 0.0

    def test_unknown_claim_404(self, client):
        r = post_assessment(client, "ghost", "ann", full_answers())
        assert r.status_code == 404
        assert r.json()["code"] == "claim_not_found"

    def test_unknown_question_422(self, client):
        add_claim(client, "c1")
        r = post_assessment(client, "c1", "ann",
                            [{"question_id": "ghost-9", "value": "yes"}])
        assert r.status_code == 422
        assert r.json()["code"] == "question_unknown"

    def test_version_mismatch_409(self, client):
        add_claim(client, "c1")
        r = client.post("/api/v1/claims/c1/assessments", json={
            "assessor_id": "ann", "questionnaire_version": 99,
            "answers": full_answers(),
        })
        assert r.status_code == 409
        assert r.json()["code"] == "version_mismatch"

    def test_zero_assessments_empty_state(self, client):
        add_claim(client, "c1")
        r = client.get("/api/v1/claims/c1/score")
        assert r.status_code == 200
        body = r.json()
        for dim in DIMENSIONS:
            assert body["score_vector"][dim.value]["score"] is None
        assert body["explanation"] is None

    def test_conflicting_assessments_disagreement(self, client):
        add_claim(client, "c1")
        post_assessment(client, "c1", "ann", full_answers("no"))
        post_assessment(client, "c1", "bob",
                        full_answers("no", {"act-1": "yes"}))
        body = client.get("/api/v1/claims/c1/score").json()
        assert body["disagreement"] > 0
        unresolved = [c for c in body["consensus_answers"]
                      if c["value"] == "unresolved"]
        assert [c["question_id"] for c in unresolved] == ["act-1"]

    def test_by_assessor(self, client):
        add_claim(client, "c1")
        post_assessment(client, "c1", "ann", full_answers("yes"))
        post_assessment(client, "c1", "bob", full_answers("no"))
        body = client.get("/api/v1/claims/c1/score",
                          params={"by": "assessor", "assessor": "bob"}).json()
        for dim in DIMENSIONS:
            assert body["score_vector"][dim.value]["score"] == 0.0

    def test_idempotent_resubmit(self, client, store):
        add_claim(client, "c1")
        headers = {"Idempotency-Key": "k-1"}
        r1 = post_assessment(client, "c1", "ann", full_answers("yes"),
                             headers=headers)
        events_after_first = len(store.events)
        r2 = post_assessment(client, "c1", "ann", full_answers("yes"),
                             headers=headers)
        assert r1.status_code == 201
        assert r2.status_code == 200
        assert len(store.events) == events_after_first
        assert r2.json()["created_at"] == r1.json()["created_at"]


class TestQueue:
    def test_pareto_mode_shape(self, client):
        add_claim(client, "c1")
        add_claim(client, "c2")
        post_assessment(client, "c1", "ann", full_answers("yes"))
        post_assessment(client, "c2", "ann", full_answers("no"))
        body = client.get("/api/v1/queue").json()
        assert body["profile"]["mode"] == "pareto"
        for entry in body["entries"]:
            assert entry["rank"] is None and entry["scalar"] is None
            assert isinstance(entry["pareto_frontier"], bool)
        flags = {e["claim_id"]: e["pareto_frontier"] for e in body["entries"]}
        assert flags == {"c1": True, "c2": False}

    def test_weighted_mode_shape(self, client):
        client.post("/api/v1/profiles", json={
            "name": "w", "mode": "weighted",
            "weights": {d.value: 1 for d in DIMENSIONS},
        })
        add_claim(client, "c1")
        add_claim(client, "c2")
        post_assessment(client, "c1", "ann", full_answers("no"))
        post_assessment(client, "c2", "ann", full_answers("yes"))
        body = client.get("/api/v1/queue", params={"profile": "w"}).json()
        assert [e["rank"] for e in body["entries"]] == [1, 2]
        assert body["entries"][0]["claim_id"] == "c2"
        assert body["entries"][0]["scalar"] == 1.0

    def test_unknown_profile_404(self, client):
        r = client.get("/api/v1/queue", params={"profile": "nope"})
        assert r.status_code == 404
        assert r.json()["code"] == "profile_not_found"

    def test_dismissed_claims_excluded(self, client):
        add_claim(client, "c1")
        add_claim(client, "c2")
        client.post("/api/v1/claims/c1/status", json={"status": "dismissed"})
        body = client.get("/api/v1/queue").json()
        assert [e["claim_id"] for e in body["entries"]] == ["c2"]

    def test_what_if_identity_matches_queue(self, client, store):
        add_claim(client, "c1")
        post_assessment(client, "c1", "ann", full_answers("no"))
        live = client.get("/api/v1/queue")
        hypo = client.post("/api/v1/queue/what-if", json={
            "profile": "default",
            "override": {"claim_id": "c1", "dimension": "actionability",
                         "score": 0.0},
        })
        assert [e["claim_id"] for e in hypo.json()["entries"]] == \
            [e["claim_id"] for e in live.json()["entries"]]

    def test_what_if_is_side_effect_free(self, client, store):
        add_claim(client, "c1")
        before = len(store.events)
        client.post("/api/v1/queue/what-if", json={
            "profile": "default",
            "override": {"claim_id": "c1", "dimension": "believability",
                         "score": 1.0},
        })
        assert len(store.events) == before

    def test_bad_override_400(self, client):
        add_claim(client, "c1")
        r = client.post("/api/v1/queue/what-if", json={
            "profile": "default",
            "override": {"claim_id": "c1", "dimension": "hype", "score": 0.5},
        })
        assert r.status_code == 400
        assert r.json()["code"] == "override_invalid"


class TestProfilesNotesAuditQuestionnaire:
    def test_profile_round_trip(self, client):
        doc = {"name": "custom", "mode": "weighted",
               "weights": {d.value: i + 1 for i, d in enumerate(DIMENSIONS)},
               "min_coverage": 0.75,
               "tie_break": [d.value for d in DIMENSIONS]}
        r = client.post("/api/v1/profiles", json=doc)
        assert r.status_code == 201
        listed = client.get("/api/v1/profiles").json()["profiles"]
        stored = next(p for p in listed if p["name"] == "custom")
        assert stored == doc

    def test_audit_of_fresh_claim(self, client):
        add_claim(client, "c1")
        events = client.get("/api/v1/claims/c1/audit").json()
        assert len(events) == 1 and events[0]["kind"] == "ClaimAdded"

    def test_empty_note_400(self, client):
        add_claim(client, "c1")
        r = client.post("/api/v1/claims/c1/notes",
                        json={"author_id": "ann", "body": ""})
        assert r.status_code == 400

    def test_note_appends_and_lists(self, client):
        add_claim(client, "c1")
        r = client.post("/api/v1/claims/c1/notes",
                        json={"author_id": "ann", "body": "look into this"})
        assert r.status_code == 201
        notes = client.get("/api/v1/claims/c1/notes").json()["notes"]
        assert [n["body"] for n in notes] == ["look into this"]

    def test_questionnaire_endpoint(self, client):
        body = client.get("/api/v1/questionnaire").json()
        assert body["version"] == 1
        assert len(body["questions"]) == 18


class TestInvariants:
    def test_gets_never_mutate(self, client, store):
        add_claim(client, "c1")
        post_assessment(client, "c1", "ann", full_answers("yes"))
        before = len(store.events)
        for path in ["/api/v1/claims", "/api/v1/claims/c1/score",
                     "/api/v1/queue", "/api/v1/profiles",
                     "/api/v1/claims/c1/audit", "/api/v1/questionnaire",
                     "/api/v1/claims/c1/notes"]:
            assert client.get(path).status_code == 200
        assert len(store.events) == before

    def test_each_mutation_is_one_append(self, client, store):
        n0 = len(store.events)
        add_claim(client, "c1")
        assert len(store.events) == n0 + 1
        post_assessment(client, "c1", "ann", full_answers("no"))
        assert len(store.events) == n0 + 2
        client.post("/api/v1/claims/c1/notes",
                    json={"author_id": "a", "body": "b"})
        assert len(store.events) == n0 + 3

    def test_error_shape_never_echoes_paths(self, client):
        r = client.get("/api/v1/claims/ghost/score")
        body = r.json()
        assert set(body) <= {"status", "code", "message", "details"}
        assert "/" not in body["message"].replace("'", "")


class TestAuth:
    def test_token_binds_assessor(self, store):
        app = create_app(store, ServiceConfig(tokens={"tok-ann": "ann"}))
        with TestClient(app) as client:
            r = client.post("/api/v1/claims",
                            json={"claim_id": "c1", "text": "x"})
            assert r.status_code == 401
            headers = {"Authorization": "Bearer tok-ann"}
            assert client.post("/api/v1/claims",
                               json={"claim_id": "c1", "text": "x"},
                               headers=headers).status_code == 201
            r = client.post("/api/v1/claims/c1/assessments",
                            json={"assessor_id": "spoofed",
                                  "answers": full_answers("no")},
                            headers=headers)
            assert r.json()["assessor_id"] == "ann"

    def test_unknown_token_401(self, store):
        app = create_app(store, ServiceConfig(tokens={"tok-ann": "ann"}))
        with TestClient(app) as client:
            r = client.get("/api/v1/queue",
                           headers={"Authorization": "Bearer wrong"})
            assert r.status_code == 401
            assert r.json()["code"] == "unauthorized"


GOLDEN_SCORE = {
    "claim_id": "c1",
    "by": "consensus",
    "score_vector": {
        "fragmentation": {"score": 0.0, "coverage": 1.0, "yes_count": 0,
                          "answered_count": 6, "total_count": 6},
        "actionability": {"score": 1.0, "coverage": 1.0, "yes_count": 3,
                          "answered_count": 3, "total_count": 3},
        "believability": {"score": 0.0, "coverage": 1.0, "yes_count": 0,
                          "answered_count": 3, "total_count": 3},
        "likelihood_of_spread": {"score": 0.0, "coverage": 1.0, "yes_count": 0,
                                 "answered_count": 2, "total_count": 2},
        "exploitativeness": {"score": 0.0, "coverage": 1.0, "yes_count": 0,
                             "answered_count": 4, "total_count": 4},
    },
    "provisional": {"fragmentation": False, "actionability": False,
                    "believability": False, "likelihood_of_spread": False,
                    "exploitativeness": False},
    "disagreement": 0.0,
}


class TestGoldenShapes:
    def test_score_response_schema_stable(self, client):
        add_claim(client, "c1")
        post_assessment(client, "c1", "ann", full_answers(
            "no", {"act-1": "yes", "act-2": "yes", "act-3": "yes"}))
        body = client.get("/api/v1/claims/c1/score").json()
        for key, expected in GOLDEN_SCORE.items():
            assert body[key] == expected, key
        assert set(body) == set(GOLDEN_SCORE) | {"explanation",
                                                 "consensus_answers"}
        act = body["explanation"]["actionability"]
        assert len(act["triggering"]) == 3
        assert act["contested"] == []
