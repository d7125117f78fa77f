"""HTTP API over the event store.

Versioned under /api/v1. Every mutating endpoint performs exactly one
event append; reads work off one consistent state snapshot per request.
Errors use a stable {status, code, message, details?} shape with codes
from a closed set (see ERROR_CODES).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import views
from .assessment import (
    Assessment,
    AssessmentError,
    assessment_from_dict,
    consensus,
    explain,
    score_assessment,
)
from .questionnaire import (
    Dimension,
    Questionnaire,
    QuestionnaireError,
    canonical_fable,
    load_questionnaire,
)
from .store import (
    Claim,
    EventStore,
    MaterializedState,
    Note,
    ReferentialError,
    StoreError,
    _parse_ts,
)
from .triage import (
    ClaimScores,
    PriorityProfile,
    ProfileError,
    TriageError,
    default_profile,
    profile_from_dict,
    rank_queue,
    what_if,
)

ERROR_CODES = (
    "validation_error",
    "claim_exists",
    "claim_not_found",
    "profile_not_found",
    "question_unknown",
    "version_mismatch",
    "unauthorized",
    "override_invalid",
)

DEFAULT_PAGE_LIMIT = 50
MAX_PAGE_LIMIT = 500


@dataclass
class ServiceConfig:
    listen_addr: str = "127.0.0.1:8731"
    data_dir: str = "./fable-data"
    tokens: dict[str, str] = field(default_factory=dict)  # token -> assessor_id
    questionnaire_path: str | None = None

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ServiceConfig":
        """Read the config file (JSON), then apply FABLE_* env overrides."""
        doc = {}
        path = path or os.environ.get("FABLE_CONFIG")
        if path:
            with open(path, "r", encoding="utf-8") as f:
                doc = json.load(f)
        cfg = cls(
            listen_addr=doc.get("listen_addr", cls.listen_addr),
            data_dir=doc.get("data_dir", cls.data_dir),
            tokens=doc.get("tokens", {}),
            questionnaire_path=doc.get("questionnaire_path"),
        )
        if os.environ.get("FABLE_ADDR"):
            cfg.listen_addr = os.environ["FABLE_ADDR"]
        if os.environ.get("FABLE_DATA_DIR"):
            cfg.data_dir = os.environ["FABLE_DATA_DIR"]
        return cfg


class ApiException(Exception):
    def __init__(self, status: int, code: str, message: str, details=None):
        assert code in ERROR_CODES
        self.status = status
        self.code = code
        self.message = message
        self.details = details


def _error_response(e: ApiException) -> JSONResponse:
    body = {"status": e.status, "code": e.code, "message": e.message}
    if e.details is not None:
        body["details"] = e.details
    return JSONResponse(status_code=e.status, content=body)


def ensure_questionnaire(store: EventStore, config: ServiceConfig) -> None:
    """Register the configured (or canonical) questionnaire on first run."""
    if store.state.questionnaires:
        return
    if config.questionnaire_path:
        q = load_questionnaire(Path(config.questionnaire_path).read_bytes())
    else:
        q = canonical_fable()
    store.register_questionnaire(q)


def consensus_scores(state: MaterializedState, q: Questionnaire,
                     claim_id: str):
    """Consensus result for a claim, or None when it has no assessments."""
    assessments = [
        a for a in state.assessments.get(claim_id, [])
        if a.questionnaire_version == q.version
    ]
    if not assessments:
        return None
    return consensus(q, assessments)


def empty_vector(q: Questionnaire):
    """All-Unknown score vector for a claim with no assessments."""
    from .assessment import _score_from_answers

    return _score_from_answers(q, {})


def queue_inputs(state: MaterializedState, q: Questionnaire) -> list[ClaimScores]:
    """Consensus vectors for every non-dismissed claim."""
    inputs = []
    for claim in state.claims.values():
        if claim.status == "dismissed":
            continue
        result = consensus_scores(state, q, claim.claim_id)
        vector = result.score_vector if result else empty_vector(q)
        inputs.append(ClaimScores(claim_id=claim.claim_id,
                                  created_at=claim.created_at, vector=vector))
    return inputs


def resolve_profile(state: MaterializedState, name: str) -> PriorityProfile:
    if name in state.profiles:
        return state.profiles[name]
    if name == "default":
        return default_profile()
    raise ApiException(404, "profile_not_found", f"no profile named {name!r}")


def create_app(store: EventStore, config: ServiceConfig | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="fable", docs_url=None, redoc_url=None)
    # the UI is served same-origin under /ui; CORS is for dev servers and
    # contract tests hitting the API from another origin
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    ensure_questionnaire(store, config)

    @app.exception_handler(ApiException)
    async def handle_api_exception(request: Request, exc: ApiException):
        return _error_response(exc)

    def authed_assessor(request: Request) -> str | None:
        """Token -> assessor id; None when auth is disabled (no tokens)."""
        if not config.tokens:
            return None
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise ApiException(401, "unauthorized", "missing bearer token")
        token = header[7:].strip()
        if token not in config.tokens:
            raise ApiException(401, "unauthorized", "unknown token")
        return config.tokens[token]

    def active_questionnaire() -> Questionnaire:
        q = store.state.active_questionnaire()
        if q is None:
            raise ApiException(404, "validation_error", "no questionnaire registered")
        return q

    def get_claim(state: MaterializedState, claim_id: str) -> Claim:
        claim = state.claims.get(claim_id)
        if claim is None:
            raise ApiException(404, "claim_not_found", f"no claim {claim_id!r}")
        return claim

    async def body_dict(request: Request) -> dict:
        try:
            doc = json.loads(await request.body())
        except json.JSONDecodeError:
            raise ApiException(400, "validation_error", "request body must be JSON")
        if not isinstance(doc, dict):
            raise ApiException(400, "validation_error", "request body must be a JSON object")
        return doc

    # -- claims ----------------------------------------------------------

    @app.post("/api/v1/claims", status_code=201)
    async def create_claim(request: Request):
        authed_assessor(request)
        doc = await body_dict(request)
        state = store.state
        claim_id = doc.get("claim_id") or None
        if claim_id and claim_id in state.claims:
            raise ApiException(409, "claim_exists", f"claim {claim_id!r} already exists")
        import uuid

        try:
            claim = Claim(
                claim_id=claim_id or str(uuid.uuid4()),
                text=doc.get("text", ""),
                source_url=doc.get("source_url"),
                platform=doc.get("platform"),
            )
            store.add_claim(claim)
        except StoreError as e:
            raise ApiException(400, "validation_error", str(e))
        return JSONResponse(status_code=201, content=views.claim_view(claim))

    @app.get("/api/v1/claims")
    async def list_claims(request: Request):
        authed_assessor(request)
        state = store.state
        status = request.query_params.get("status")
        try:
            limit = int(request.query_params.get("limit", DEFAULT_PAGE_LIMIT))
            offset = int(request.query_params.get("offset", 0))
        except ValueError:
            raise ApiException(400, "validation_error", "limit/offset must be integers")
        limit = max(1, min(limit, MAX_PAGE_LIMIT))
        offset = max(0, offset)
        claims = sorted(state.claims.values(),
                        key=lambda c: (c.created_at, c.claim_id))
        if status:
            claims = [c for c in claims if c.status == status]
        page = claims[offset:offset + limit]
        return {
            "claims": [views.claim_view(c) for c in page],
            "total": len(claims),
            "limit": limit,
            "offset": offset,
        }

    @app.post("/api/v1/claims/{claim_id}/status")
    async def change_status(claim_id: str, request: Request):
        authed_assessor(request)
        doc = await body_dict(request)
        get_claim(store.state, claim_id)
        try:
            store.change_status(claim_id, doc.get("status", ""))
        except StoreError as e:
            raise ApiException(400, "validation_error", str(e))
        return views.claim_view(store.state.claims[claim_id])

    # -- assessments and scores -----------------------------------------

    @app.post("/api/v1/claims/{claim_id}/assessments", status_code=201)
    async def post_assessment(claim_id: str, request: Request):
        assessor = authed_assessor(request)
        doc = await body_dict(request)
        state = store.state
        get_claim(state, claim_id)
        q = active_questionnaire()
        doc = dict(doc)
        doc["claim_id"] = claim_id
        if assessor is not None:
            doc["assessor_id"] = assessor
        doc.setdefault("questionnaire_version", q.version)
        try:
            assessment = assessment_from_dict(doc)
        except AssessmentError as e:
            raise ApiException(400, "validation_error", str(e))
        if assessment.questionnaire_version != q.version:
            raise ApiException(409, "version_mismatch",
                               f"active questionnaire is version {q.version}, "
                               f"assessment targets {assessment.questionnaire_version}")
        for ans in assessment.answers:
            if not q.has_question(ans.question_id):
                raise ApiException(422, "question_unknown",
                                   f"unknown question id: {ans.question_id!r}")
        # Idempotent re-submit: same claim, assessor, version, answers with a
        # client key returns the original record without appending.
        if request.headers.get("idempotency-key"):
            for prior in state.assessments.get(claim_id, []):
                if (prior.assessor_id == assessment.assessor_id
                        and prior.questionnaire_version == assessment.questionnaire_version
                        and prior.answers == assessment.answers):
                    return JSONResponse(status_code=200,
                                        content=views.assessment_view(prior))
        try:
            store.record_assessment(assessment)
        except (StoreError, AssessmentError) as e:
            raise ApiException(400, "validation_error", str(e))
        return JSONResponse(status_code=201,
                            content=views.assessment_view(assessment))

    @app.get("/api/v1/claims/{claim_id}/score")
    async def get_score(claim_id: str, request: Request):
        authed_assessor(request)
        state = store.state
        get_claim(state, claim_id)
        q = active_questionnaire()
        by = request.query_params.get("by", "consensus")
        profile = resolve_profile(state, request.query_params.get("profile", "default"))
        if by == "assessor":
            assessor_id = request.query_params.get("assessor")
            if not assessor_id:
                raise ApiException(400, "validation_error",
                                   "by=assessor requires &assessor=<id>")
            mine = [a for a in state.assessments.get(claim_id, [])
                    if a.assessor_id == assessor_id
                    and a.questionnaire_version == q.version]
            if not mine:
                return views.score_view(claim_id, empty_vector(q), None, None,
                                        profile.min_coverage, by)
            latest = max(mine, key=lambda a: a.created_at)
            vector = score_assessment(q, latest)
            explanation = explain(q, vector, latest)
            return views.score_view(claim_id, vector, explanation, None,
                                    profile.min_coverage, by)
        if by != "consensus":
            raise ApiException(400, "validation_error",
                               f"by must be consensus|assessor, got {by!r}")
        result = consensus_scores(state, q, claim_id)
        if result is None:
            return views.score_view(claim_id, empty_vector(q), None, None,
                                    profile.min_coverage, by)
        explanation = explain(q, result.score_vector, result.answers)
        return views.score_view(claim_id, result.score_vector, explanation,
                                result, profile.min_coverage, by)

    # -- queue -----------------------------------------------------------

    @app.get("/api/v1/queue")
    async def get_queue(request: Request):
        authed_assessor(request)
        state = store.state
        q = active_questionnaire()
        profile = resolve_profile(state, request.query_params.get("profile", "default"))
        entries = rank_queue(profile, queue_inputs(state, q))
        return views.queue_view(profile, entries)

    @app.post("/api/v1/queue/what-if")
    async def post_what_if(request: Request):
        authed_assessor(request)
        doc = await body_dict(request)
        state = store.state
        q = active_questionnaire()
        profile_ref = doc.get("profile", "default")
        if isinstance(profile_ref, dict):
            try:
                profile = profile_from_dict(profile_ref)
            except ProfileError as e:
                raise ApiException(400, "validation_error", str(e))
        else:
            profile = resolve_profile(state, profile_ref)
        override = doc.get("override")
        if not isinstance(override, dict):
            raise ApiException(400, "override_invalid", "'override' must be an object")
        try:
            dimension = Dimension(override.get("dimension"))
        except ValueError:
            raise ApiException(400, "override_invalid",
                               f"unknown dimension: {override.get('dimension')!r}")
        raw_score = override.get("score")
        if not isinstance(raw_score, (int, float)) or isinstance(raw_score, bool):
            raise ApiException(400, "override_invalid", "'score' must be a number")
        score = Fraction(raw_score).limit_denominator(10**6)
        try:
            entries = what_if(profile, queue_inputs(state, q),
                              (override.get("claim_id", ""), dimension, score))
        except TriageError as e:
            raise ApiException(400, "override_invalid", str(e))
        return views.queue_view(profile, entries)

    # -- profiles, notes, audit, questionnaire ---------------------------

    @app.post("/api/v1/profiles", status_code=201)
    async def save_profile(request: Request):
        authed_assessor(request)
        doc = await body_dict(request)
        try:
            profile = profile_from_dict(doc)
            store.save_profile(profile)
        except (ProfileError, StoreError) as e:
            raise ApiException(400, "validation_error", str(e))
        return JSONResponse(status_code=201, content=views.profile_view(profile))

    @app.get("/api/v1/profiles")
    async def list_profiles(request: Request):
        authed_assessor(request)
        state = store.state
        profiles = dict(state.profiles)
        profiles.setdefault("default", default_profile())
        return {"profiles": [views.profile_view(p)
                             for _, p in sorted(profiles.items())]}

    @app.post("/api/v1/claims/{claim_id}/notes", status_code=201)
    async def post_note(claim_id: str, request: Request):
        assessor = authed_assessor(request)
        doc = await body_dict(request)
        get_claim(store.state, claim_id)
        try:
            note = Note(claim_id=claim_id,
                        author_id=assessor or doc.get("author_id", "anonymous"),
                        body=doc.get("body", ""))
            store.add_note(note)
        except StoreError as e:
            raise ApiException(400, "validation_error", str(e))
        return JSONResponse(status_code=201, content=views.note_view(note))

    @app.get("/api/v1/claims/{claim_id}/notes")
    async def list_notes(claim_id: str, request: Request):
        authed_assessor(request)
        state = store.state
        get_claim(state, claim_id)
        return {"notes": [views.note_view(n)
                          for n in state.notes.get(claim_id, [])]}

    @app.get("/api/v1/claims/{claim_id}/audit")
    async def get_audit(claim_id: str, request: Request):
        authed_assessor(request)
        get_claim(store.state, claim_id)
        try:
            events = store.export_audit(claim_id)
        except ReferentialError as e:
            raise ApiException(404, "claim_not_found", str(e))
        return [views.event_view(e) for e in events]

    @app.get("/api/v1/questionnaire")
    async def get_questionnaire(request: Request):
        authed_assessor(request)
        return views.questionnaire_view(active_questionnaire())

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
