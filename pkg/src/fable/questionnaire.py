"""Questionnaire definitions: the five FABLE dimensions, question documents,
validation, and version diffing.

A questionnaire is a versioned, ordered list of yes/no/unknown questions,
each belonging to exactly one of the five dimensions. Values are immutable
after load and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

SCHEMA_TOKEN = "fable-questionnaire/1"


class Dimension(str, Enum):
    """The five urgency dimensions, in display order F, A, B, L, E."""

    FRAGMENTATION = "fragmentation"
    ACTIONABILITY = "actionability"
    BELIEVABILITY = "believability"
    LIKELIHOOD_OF_SPREAD = "likelihood_of_spread"
    EXPLOITATIVENESS = "exploitativeness"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def letter(self) -> str:
        return _LETTERS[self]


DIMENSIONS: tuple[Dimension, ...] = tuple(Dimension)

_LABELS = {
    Dimension.FRAGMENTATION: "Fragmentation",
    Dimension.ACTIONABILITY: "Actionability",
    Dimension.BELIEVABILITY: "Believability",
    Dimension.LIKELIHOOD_OF_SPREAD: "Likelihood of spread",
    Dimension.EXPLOITATIVENESS: "Exploitativeness",
}

_LETTERS = {
    Dimension.FRAGMENTATION: "F",
    Dimension.ACTIONABILITY: "A",
    Dimension.BELIEVABILITY: "B",
    Dimension.LIKELIHOOD_OF_SPREAD: "L",
    Dimension.EXPLOITATIVENESS: "E",
}


class QuestionnaireError(ValueError):
    """Malformed or invalid questionnaire document."""


@dataclass(frozen=True)
class Question:
    id: str
    dimension: Dimension
    text: str
    guidance: str | None = None
    key: bool = True
    locale: str = "en"


@dataclass(frozen=True)
class Questionnaire:
    version: int
    title: str
    questions: tuple[Question, ...]
    locale: str = "en"

    _by_id: dict[str, Question] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _validate(self.version, self.title, self.questions)
        object.__setattr__(self, "_by_id", {q.id: q for q in self.questions})

    def question(self, question_id: str) -> Question:
        try:
            return self._by_id[question_id]
        except KeyError:
            raise QuestionnaireError(f"unknown question id: {question_id!r}") from None

    def has_question(self, question_id: str) -> bool:
        return question_id in self._by_id

    def questions_for(self, dimension: Dimension) -> tuple[Question, ...]:
        return tuple(q for q in self.questions if q.dimension == dimension)


def _validate(version: int, title: str, questions: tuple[Question, ...]) -> None:
    if not isinstance(version, int) or version < 1:
        raise QuestionnaireError(f"version must be an integer >= 1, got {version!r}")
    if not title:
        raise QuestionnaireError("title must be nonempty")
    seen: set[str] = set()
    for q in questions:
        if not q.id:
            raise QuestionnaireError("question id must be nonempty")
        if q.id in seen:
            raise QuestionnaireError(f"duplicate question id: {q.id!r}")
        seen.add(q.id)
        if not q.text:
            raise QuestionnaireError(f"question {q.id!r}: text must be nonempty")
    for dim in DIMENSIONS:
        if not any(q.dimension == dim for q in questions):
            raise QuestionnaireError(
                f"dimension {dim.label} has no questions; every dimension needs at least one"
            )


def load_questionnaire(source: bytes | str) -> Questionnaire:
    """Parse and validate a UTF-8 JSON questionnaire document.

    Raises QuestionnaireError on malformed JSON, unsupported schema token,
    or any invariant violation; violations name the offending question id.
    """
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as e:
            raise QuestionnaireError(f"document is not valid UTF-8: {e}") from e
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as e:
        raise QuestionnaireError(f"document is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise QuestionnaireError("document root must be a JSON object")
    schema = doc.get("schema")
    if schema != SCHEMA_TOKEN:
        raise QuestionnaireError(f"unsupported schema: {schema!r} (expected {SCHEMA_TOKEN!r})")

    raw_questions = doc.get("questions")
    if not isinstance(raw_questions, list):
        raise QuestionnaireError("'questions' must be a list")
    default_locale = doc.get("locale", "en")
    if not isinstance(default_locale, str) or not default_locale:
        raise QuestionnaireError("'locale' must be a nonempty string")

    questions = []
    for i, raw in enumerate(raw_questions):
        if not isinstance(raw, dict):
            raise QuestionnaireError(f"questions[{i}] must be an object")
        qid = raw.get("id")
        if not isinstance(qid, str):
            raise QuestionnaireError(f"questions[{i}]: 'id' must be a string")
        dim_token = raw.get("dimension")
        try:
            dimension = Dimension(dim_token)
        except ValueError:
            raise QuestionnaireError(
                f"question {qid!r}: unknown dimension {dim_token!r}"
            ) from None
        text = raw.get("text")
        if not isinstance(text, str):
            raise QuestionnaireError(f"question {qid!r}: 'text' must be a string")
        guidance = raw.get("guidance")
        if guidance is not None and not isinstance(guidance, str):
            raise QuestionnaireError(f"question {qid!r}: 'guidance' must be a string")
        key = raw.get("key", True)
        if not isinstance(key, bool):
            raise QuestionnaireError(f"question {qid!r}: 'key' must be a boolean")
        questions.append(
            Question(id=qid, dimension=dimension, text=text, guidance=guidance,
                     key=key, locale=default_locale)
        )

    version = doc.get("version")
    title = doc.get("title")
    if not isinstance(title, str):
        raise QuestionnaireError("'title' must be a string")
    if not isinstance(version, int) or isinstance(version, bool):
        raise QuestionnaireError("'version' must be an integer")
    return Questionnaire(version=version, title=title, questions=tuple(questions),
                         locale=default_locale)


def dump_questionnaire(q: Questionnaire) -> bytes:
    """Serialize to the document format accepted by load_questionnaire."""
    doc = {
        "schema": SCHEMA_TOKEN,
        "version": q.version,
        "title": q.title,
        "locale": q.locale,
        "questions": [
            {
                "id": question.id,
                "dimension": question.dimension.value,
                "text": question.text,
                **({"guidance": question.guidance} if question.guidance is not None else {}),
                "key": question.key,
            }
            for question in q.questions
        ],
    }
    return json.dumps(doc, ensure_ascii=False, indent=2).encode("utf-8")


@dataclass(frozen=True)
class ChangeSet:
    """Difference between two questionnaire versions, by question id."""

    added: tuple[str, ...]
    removed: tuple[str, ...]
    reworded: tuple[str, ...]

    @property
    def empty(self) -> bool:
        return not (self.added or self.removed or self.reworded)


def diff_versions(old: Questionnaire, new: Questionnaire) -> ChangeSet:
    """Compare two versions: ids present in exactly one side are added or
    removed; ids in both with different text are reworded."""
    if old.version >= new.version:
        raise QuestionnaireError(
            f"old version ({old.version}) must be less than new version ({new.version})"
        )
    old_ids = {q.id for q in old.questions}
    new_ids = {q.id for q in new.questions}
    added = tuple(q.id for q in new.questions if q.id not in old_ids)
    removed = tuple(q.id for q in old.questions if q.id not in new_ids)
    reworded = tuple(
        q.id for q in new.questions
        if q.id in old_ids and q.text != old.question(q.id).text
    )
    return ChangeSet(added=added, removed=removed, reworded=reworded)


_CANONICAL_QUESTIONS: tuple[tuple[str, Dimension, str], ...] = (
    ("frag-1", Dimension.FRAGMENTATION,
     "Does the message fit into a larger story or argument, for example about "
     "how the world works or how people think?"),
    ("frag-2", Dimension.FRAGMENTATION,
     "Does the message question trust in or the functioning of public institutions?"),
    ("frag-3", Dimension.FRAGMENTATION,
     "Does the message question trust in or the functioning of the scientific "
     "community as a whole?"),
    ("frag-4", Dimension.FRAGMENTATION,
     "Does the message question the functioning of or trust in news sources/ "
     "the media in general?"),
    ("frag-5", Dimension.FRAGMENTATION,
     "Does the message question the trustworthiness of other people in general "
     "within a community or society?"),
    ("frag-6", Dimension.FRAGMENTATION,
     "In a democratic country where there are elections, does the message "
     "directly attack the election process?"),
    ("act-1", Dimension.ACTIONABILITY,
     "Does the message content include an explicit call to action?"),
    ("act-2", Dimension.ACTIONABILITY,
     "Does the piece of content incorporate coordination efforts, such as "
     "dates/times or other arrangements for follow-up?"),
    ("act-3", Dimension.ACTIONABILITY,
     "Does the message provide a name or otherwise any identifying information "
     "about an individual, an address, or a place of work in such a way that "
     "people might be directly harmed?"),
    ("bel-1", Dimension.BELIEVABILITY,
     "Is there a lack of high-quality information that is publicly accessible "
     "and is refuting the message's claim?"),
    ("bel-2", Dimension.BELIEVABILITY,
     "Does the poster and/or organization/outlet have a noteworthy number of "
     "social media/community followers?"),
    ("bel-3", Dimension.BELIEVABILITY,
     "Is the content published by an organization/outlet with uncertain "
     "editorial control (e.g., is not a recognized news publisher)?"),
    ("lik-1", Dimension.LIKELIHOOD_OF_SPREAD,
     "Do the people or entities who are spreading the piece of content have a "
     "broad reach (size of following on social media, \"influencer,\" presence "
     "on TV or other news media)?"),
    ("lik-2", Dimension.LIKELIHOOD_OF_SPREAD,
     "Are the people or entities known to be repeat spreaders of questionable "
     "information?"),
    ("exp-1", Dimension.EXPLOITATIVENESS,
     "Does the message directly address or reference children or use language "
     "aimed at a younger audience?"),
    ("exp-2", Dimension.EXPLOITATIVENESS,
     "Does the message directly address or reference elderly community members, "
     "or discuss topics aimed at them?"),
    ("exp-3", Dimension.EXPLOITATIVENESS,
     "Does the message introduce a degree of fear or feelings of uneasiness?"),
    ("exp-4", Dimension.EXPLOITATIVENESS,
     "Is the message content complicated to understand?"),
)


def canonical_fable() -> Questionnaire:
    """The built-in version-1 questionnaire: the five dimensions' key
    questions. Deterministic; identical across calls."""
    return Questionnaire(
        version=1,
        title="FABLE Misinformation Harms Questionnaire",
        locale="en",
        questions=tuple(
            Question(id=qid, dimension=dim, text=text, key=True, locale="en")
            for qid, dim, text in _CANONICAL_QUESTIONS
        ),
    )
