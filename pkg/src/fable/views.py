"""Response shaping shared by the HTTP service and the CLI's --json output.

Both surfaces serialize through these functions so `fable score --json`
is byte-identical to GET /api/v1/claims/{id}/score for the same state.
Fractions become floats here; exact rationals exist only internally.
"""

from __future__ import annotations

from fractions import Fraction

from .assessment import (
    Assessment,
    ConsensusResult,
    Explanation,
    ScoreVector,
)
from .questionnaire import DIMENSIONS, Questionnaire
from .store import Claim, EventRecord, Note, _ts
from .triage import PriorityProfile, QueueEntry, profile_to_dict


def _frac(f: Fraction | None) -> float | None:
    return None if f is None else float(f)


def claim_view(c: Claim) -> dict:
    return {
        "claim_id": c.claim_id,
        "text": c.text,
        "source_url": c.source_url,
        "platform": c.platform,
        "created_at": _ts(c.created_at),
        "status": c.status,
    }


def questionnaire_view(q: Questionnaire) -> dict:
    return {
        "version": q.version,
        "title": q.title,
        "locale": q.locale,
        "questions": [
            {
                "id": question.id,
                "dimension": question.dimension.value,
                "text": question.text,
                "guidance": question.guidance,
                "key": question.key,
            }
            for question in q.questions
        ],
    }


def score_vector_view(v: ScoreVector) -> dict:
    return {
        ds.dimension.value: {
            "score": _frac(ds.score),
            "coverage": _frac(ds.coverage),
            "yes_count": ds.yes_count,
            "answered_count": ds.answered_count,
            "total_count": ds.total_count,
        }
        for ds in v.scores
    }


def explanation_view(e: Explanation) -> dict:
    return {
        d.dimension.value: {
            "score": _frac(d.score),
            "coverage": _frac(d.coverage),
            "triggering": list(d.triggering),
            "contested": list(d.contested),
        }
        for d in e.dimensions
    }


def score_view(claim_id: str, v: ScoreVector, explanation: Explanation | None,
               consensus: ConsensusResult | None, min_coverage: Fraction,
               by: str) -> dict:
    provisional = {
        ds.dimension.value: ds.coverage < min_coverage for ds in v.scores
    }
    view = {
        "claim_id": claim_id,
        "by": by,
        "score_vector": score_vector_view(v),
        "provisional": provisional,
        "explanation": explanation_view(explanation) if explanation else None,
    }
    if consensus is not None:
        view["disagreement"] = float(consensus.disagreement)
        view["consensus_answers"] = [
            {
                "question_id": c.question_id,
                "value": c.value.value,
                "votes": {val.value: n for val, n in c.votes},
            }
            for c in consensus.answers
        ]
    else:
        view["disagreement"] = None
        view["consensus_answers"] = None
    return view


def assessment_view(a: Assessment) -> dict:
    return {
        "claim_id": a.claim_id,
        "assessor_id": a.assessor_id,
        "questionnaire_version": a.questionnaire_version,
        "created_at": _ts(a.created_at),
        "answers": [
            {"question_id": ans.question_id, "value": ans.value.value}
            for ans in a.answers
        ],
    }


def note_view(n: Note) -> dict:
    return {
        "claim_id": n.claim_id,
        "author_id": n.author_id,
        "body": n.body,
        "created_at": _ts(n.created_at),
    }


def event_view(e: EventRecord) -> dict:
    return e.to_dict()


def queue_entry_view(entry: QueueEntry) -> dict:
    return {
        "claim_id": entry.claim_id,
        "created_at": _ts(entry.created_at),
        "score_vector": score_vector_view(entry.vector),
        "scalar": _frac(entry.scalar),
        "rank": entry.rank,
        "pareto_frontier": entry.pareto_frontier,
        "provisional": entry.provisional,
    }


def queue_view(profile: PriorityProfile, entries: list[QueueEntry]) -> dict:
    return {
        "profile": profile_to_dict(profile),
        "entries": [queue_entry_view(e) for e in entries],
    }


def profile_view(p: PriorityProfile) -> dict:
    return profile_to_dict(p)


def dimension_order() -> list[str]:
    return [d.value for d in DIMENSIONS]
