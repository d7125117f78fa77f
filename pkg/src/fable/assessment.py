"""Assessment records and scoring.

One assessor's answer vector for one claim is scored per dimension as the
ratio of Yes answers to answered (non-Unknown) questions, with coverage
reported alongside. Multiple assessors combine by per-question majority;
ties stay visible as Unresolved instead of being averaged away.

All functions here are pure; all values immutable.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from fractions import Fraction

from .questionnaire import DIMENSIONS, Dimension, Questionnaire


class AnswerValue(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class ConsensusValue(str, Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"
    UNRESOLVED = "unresolved"


class AssessmentError(ValueError):
    """Assessment inconsistent with its questionnaire or with peers."""


@dataclass(frozen=True)
class Answer:
    question_id: str
    value: AnswerValue


@dataclass(frozen=True)
class Assessment:
    claim_id: str
    assessor_id: str
    questionnaire_version: int
    answers: tuple[Answer, ...]
    created_at: datetime

    def __post_init__(self):
        seen: set[str] = set()
        for a in self.answers:
            if a.question_id in seen:
                raise AssessmentError(f"duplicate answer for question {a.question_id!r}")
            seen.add(a.question_id)

    def answer_map(self) -> dict[str, AnswerValue]:
        return {a.question_id: a.value for a in self.answers}


@dataclass(frozen=True)
class DimensionScore:
    dimension: Dimension
    yes_count: int
    answered_count: int
    total_count: int

    def __post_init__(self):
        if not (0 <= self.yes_count <= self.answered_count <= self.total_count):
            raise AssessmentError(
                f"{self.dimension.value}: inconsistent counts "
                f"({self.yes_count}/{self.answered_count}/{self.total_count})"
            )
        if self.total_count < 1:
            raise AssessmentError(f"{self.dimension.value}: total_count must be >= 1")

    @property
    def score(self) -> Fraction | None:
        """Yes ratio over answered questions; None when nothing answered."""
        if self.answered_count == 0:
            return None
        return Fraction(self.yes_count, self.answered_count)

    @property
    def coverage(self) -> Fraction:
        return Fraction(self.answered_count, self.total_count)


@dataclass(frozen=True)
class ScoreVector:
    """One DimensionScore per dimension, keyed in F/A/B/L/E order."""

    scores: tuple[DimensionScore, ...]

    def __post_init__(self):
        dims = tuple(s.dimension for s in self.scores)
        if dims != DIMENSIONS:
            raise AssessmentError(f"score vector must cover all five dimensions in order, got {dims}")

    def __getitem__(self, dimension: Dimension) -> DimensionScore:
        return self.scores[list(DIMENSIONS).index(dimension)]

    def fully_defined(self) -> bool:
        return all(s.score is not None for s in self.scores)


@dataclass(frozen=True)
class ConsensusAnswer:
    question_id: str
    value: ConsensusValue
    votes: tuple[tuple[AnswerValue, int], ...]

    def vote_count(self, value: AnswerValue) -> int:
        return dict(self.votes).get(value, 0)


@dataclass(frozen=True)
class DimensionExplanation:
    dimension: Dimension
    score: Fraction | None
    coverage: Fraction
    triggering: tuple[str, ...]      # texts of Yes questions, questionnaire order
    contested: tuple[str, ...]       # texts of Unresolved questions (consensus only)


@dataclass(frozen=True)
class Explanation:
    dimensions: tuple[DimensionExplanation, ...]


def _check_binding(q: Questionnaire, a: Assessment) -> None:
    if a.questionnaire_version != q.version:
        raise AssessmentError(
            f"assessment is for questionnaire version {a.questionnaire_version}, "
            f"got version {q.version}"
        )
    for ans in a.answers:
        if not q.has_question(ans.question_id):
            raise AssessmentError(f"unknown question id: {ans.question_id!r}")


def _score_from_answers(q: Questionnaire,
                        answers: dict[str, AnswerValue]) -> ScoreVector:
    scores = []
    for dim in DIMENSIONS:
        questions = q.questions_for(dim)
        yes = answered = 0
        for question in questions:
            value = answers.get(question.id, AnswerValue.UNKNOWN)
            if value == AnswerValue.UNKNOWN:
                continue
            answered += 1
            if value == AnswerValue.YES:
                yes += 1
        scores.append(DimensionScore(dimension=dim, yes_count=yes,
                                     answered_count=answered,
                                     total_count=len(questions)))
    return ScoreVector(scores=tuple(scores))


def score_assessment(q: Questionnaire, a: Assessment) -> ScoreVector:
    """Per-dimension yes ratio for a single assessor. Questions without a
    recorded answer count as Unknown."""
    _check_binding(q, a)
    return _score_from_answers(q, a.answer_map())


@dataclass(frozen=True)
class ConsensusResult:
    answers: tuple[ConsensusAnswer, ...]
    score_vector: ScoreVector
    disagreement: Fraction


def consensus(q: Questionnaire, assessments: list[Assessment]) -> ConsensusResult:
    """Per-question majority across assessors for one claim.

    Majority is over non-Unknown votes; an exact tie is Unresolved and is
    excluded from both yes and answered counts of the dimension score.
    Disagreement is the fraction of questionnaire questions on which at
    least two distinct non-Unknown values were recorded. Order of the
    assessments list does not affect the result.
    """
    if not assessments:
        raise AssessmentError("consensus requires at least one assessment")
    claim_ids = {a.claim_id for a in assessments}
    if len(claim_ids) > 1:
        raise AssessmentError(f"mixed claim ids: {sorted(claim_ids)}")
    versions = {a.questionnaire_version for a in assessments}
    if len(versions) > 1:
        raise AssessmentError(f"mixed questionnaire versions: {sorted(versions)}")
    for a in assessments:
        _check_binding(q, a)

    per_assessor = [a.answer_map() for a in assessments]
    consensus_answers: list[ConsensusAnswer] = []
    effective: dict[str, AnswerValue] = {}
    contested_count = 0

    for question in q.questions:
        tally: Counter[AnswerValue] = Counter()
        for answers in per_assessor:
            tally[answers.get(question.id, AnswerValue.UNKNOWN)] += 1
        yes, no = tally[AnswerValue.YES], tally[AnswerValue.NO]
        if yes > 0 and no > 0:
            contested_count += 1
        if yes == no == 0:
            value = ConsensusValue.UNKNOWN
        elif yes > no:
            value = ConsensusValue.YES
        elif no > yes:
            value = ConsensusValue.NO
        else:
            value = ConsensusValue.UNRESOLVED
        # Unresolved stays out of the ratio: absence of agreement is not a
        # negative finding.
        if value == ConsensusValue.YES:
            effective[question.id] = AnswerValue.YES
        elif value == ConsensusValue.NO:
            effective[question.id] = AnswerValue.NO
        votes = tuple((v, tally[v]) for v in AnswerValue if tally[v] > 0)
        consensus_answers.append(
            ConsensusAnswer(question_id=question.id, value=value, votes=votes)
        )

    return ConsensusResult(
        answers=tuple(consensus_answers),
        score_vector=_score_from_answers(q, effective),
        disagreement=Fraction(contested_count, len(q.questions)),
    )


def explain(q: Questionnaire, v: ScoreVector,
            source: Assessment | tuple[ConsensusAnswer, ...]) -> Explanation:
    """Why each dimension scored what it did: the triggering (Yes) question
    texts in questionnaire order, plus contested questions for consensus
    input. Recomputes the vector from the source and refuses a mismatch."""
    if isinstance(source, Assessment):
        _check_binding(q, source)
        answer_of = source.answer_map()
        yes_ids = {qid for qid, val in answer_of.items() if val == AnswerValue.YES}
        no_ids = {qid for qid, val in answer_of.items() if val == AnswerValue.NO}
        contested_ids: set[str] = set()
    else:
        yes_ids = {c.question_id for c in source if c.value == ConsensusValue.YES}
        no_ids = {c.question_id for c in source if c.value == ConsensusValue.NO}
        contested_ids = {c.question_id for c in source if c.value == ConsensusValue.UNRESOLVED}
        for c in source:
            if not q.has_question(c.question_id):
                raise AssessmentError(f"unknown question id: {c.question_id!r}")

    effective = {qid: AnswerValue.YES for qid in yes_ids}
    effective.update({qid: AnswerValue.NO for qid in no_ids})
    recomputed = _score_from_answers(q, effective)
    if recomputed != v:
        raise AssessmentError("score vector does not match the provided answers")

    dims = []
    for dim in DIMENSIONS:
        questions = q.questions_for(dim)
        ds = v[dim]
        dims.append(DimensionExplanation(
            dimension=dim,
            score=ds.score,
            coverage=ds.coverage,
            triggering=tuple(qq.text for qq in questions if qq.id in yes_ids),
            contested=tuple(qq.text for qq in questions if qq.id in contested_ids),
        ))
    return Explanation(dimensions=tuple(dims))


@dataclass(frozen=True)
class CoverageWarning:
    dimension: Dimension
    unanswered_ids: tuple[str, ...]


def validate_assessment(q: Questionnaire, a: Assessment) -> list[CoverageWarning]:
    """Completeness check: one warning per dimension with unanswered (missing
    or Unknown) questions. Unknown question ids are an error, not a warning."""
    _check_binding(q, a)
    answer_of = a.answer_map()
    warnings = []
    for dim in DIMENSIONS:
        missing = tuple(
            question.id for question in q.questions_for(dim)
            if answer_of.get(question.id, AnswerValue.UNKNOWN) == AnswerValue.UNKNOWN
        )
        if missing:
            warnings.append(CoverageWarning(dimension=dim, unanswered_ids=missing))
    return warnings


def load_assessment(source: bytes | str) -> Assessment:
    """Parse the UTF-8 JSON assessment exchange document."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as e:
        raise AssessmentError(f"document is not valid JSON: {e}") from e
    return assessment_from_dict(doc)


def assessment_from_dict(doc: dict) -> Assessment:
    if not isinstance(doc, dict):
        raise AssessmentError("assessment document must be a JSON object")
    try:
        claim_id = doc["claim_id"]
        assessor_id = doc["assessor_id"]
        version = doc["questionnaire_version"]
        raw_answers = doc["answers"]
    except KeyError as e:
        raise AssessmentError(f"missing required field: {e.args[0]}") from None
    if not isinstance(version, int) or isinstance(version, bool):
        raise AssessmentError("'questionnaire_version' must be an integer")
    if not isinstance(raw_answers, list):
        raise AssessmentError("'answers' must be a list")
    created_raw = doc.get("created_at")
    if created_raw is None:
        created_at = datetime.now(timezone.utc)
    else:
        try:
            created_at = datetime.fromisoformat(created_raw.replace("Z", "+00:00"))
        except (ValueError, AttributeError):
            raise AssessmentError(f"invalid created_at timestamp: {created_raw!r}") from None
        if created_at.tzinfo is None:
            created_at = created_at.replace(tzinfo=timezone.utc)
    answers = []
    for i, raw in enumerate(raw_answers):
        if not isinstance(raw, dict):
            raise AssessmentError(f"answers[{i}] must be an object")
        try:
            value = AnswerValue(raw.get("value"))
        except ValueError:
            raise AssessmentError(
                f"answers[{i}]: value must be yes|no|unknown, got {raw.get('value')!r}"
            ) from None
        qid = raw.get("question_id")
        if not isinstance(qid, str) or not qid:
            raise AssessmentError(f"answers[{i}]: 'question_id' must be a nonempty string")
        answers.append(Answer(question_id=qid, value=value))
    return Assessment(claim_id=str(claim_id), assessor_id=str(assessor_id),
                      questionnaire_version=version, answers=tuple(answers),
                      created_at=created_at)


def assessment_to_dict(a: Assessment) -> dict:
    return {
        "claim_id": a.claim_id,
        "assessor_id": a.assessor_id,
        "questionnaire_version": a.questionnaire_version,
        "created_at": a.created_at.isoformat().replace("+00:00", "Z"),
        "answers": [
            {"question_id": ans.question_id, "value": ans.value.value}
            for ans in a.answers
        ],
    }
