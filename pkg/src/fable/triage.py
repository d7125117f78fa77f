"""Claim prioritization: weighted ranking under an explicit profile,
Pareto-dominance analysis, and queue materialization.

The five-dimension vector stays primary. A single scalar exists only in
weighted mode under a named profile; the default profile is Pareto-only so
nobody gets an implicit sum of dimensions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction

from .assessment import ScoreVector
from .questionnaire import DIMENSIONS, Dimension


class ProfileError(ValueError):
    """Priority profile violates its invariants."""


class TriageError(ValueError):
    """Bad triage input (unknown claim, invalid override)."""


MODE_WEIGHTED = "weighted"
MODE_PARETO = "pareto"

DEFAULT_TIE_BREAK = DIMENSIONS


@dataclass(frozen=True)
class PriorityProfile:
    name: str
    weights: tuple[tuple[Dimension, Fraction], ...]
    mode: str = MODE_PARETO
    min_coverage: Fraction = Fraction(1, 2)
    tie_break: tuple[Dimension, ...] = DEFAULT_TIE_BREAK

    def __post_init__(self):
        if not self.name:
            raise ProfileError("profile name must be nonempty")
        if self.mode not in (MODE_WEIGHTED, MODE_PARETO):
            raise ProfileError(f"unknown mode: {self.mode!r}")
        dims = tuple(d for d, _ in self.weights)
        if dims != DIMENSIONS:
            raise ProfileError("weights must cover all five dimensions in order")
        for dim, w in self.weights:
            if w < 0:
                raise ProfileError(f"weight for {dim.value} must be non-negative")
        if sum(w for _, w in self.weights) == 0:
            raise ProfileError("at least one weight must be positive")
        if not (0 <= self.min_coverage <= 1):
            raise ProfileError("min_coverage must be in [0, 1]")
        if tuple(sorted(self.tie_break, key=list(DIMENSIONS).index)) != DIMENSIONS \
                or len(set(self.tie_break)) != 5:
            raise ProfileError("tie_break must be a permutation of the five dimensions")

    def weight(self, dimension: Dimension) -> Fraction:
        return dict(self.weights)[dimension]


def default_profile() -> PriorityProfile:
    """Equal weights, Pareto-only, min_coverage 1/2. The weighted scalar is
    never the default."""
    return PriorityProfile(
        name="default",
        weights=tuple((d, Fraction(1)) for d in DIMENSIONS),
        mode=MODE_PARETO,
        min_coverage=Fraction(1, 2),
        tie_break=DEFAULT_TIE_BREAK,
    )


def load_profile(source: bytes | str) -> PriorityProfile:
    """Parse the UTF-8 JSON profile document."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as e:
        raise ProfileError(f"profile document is not valid JSON: {e}") from e
    return profile_from_dict(doc)


def profile_from_dict(doc: dict) -> PriorityProfile:
    if not isinstance(doc, dict):
        raise ProfileError("profile document must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str):
        raise ProfileError("'name' must be a string")
    mode = doc.get("mode", MODE_PARETO)
    raw_weights = doc.get("weights", {})
    if not isinstance(raw_weights, dict):
        raise ProfileError("'weights' must be an object")
    weights = []
    for dim in DIMENSIONS:
        raw = raw_weights.get(dim.value, 1)
        try:
            w = Fraction(raw).limit_denominator(10**9) if isinstance(raw, float) else Fraction(raw)
        except (TypeError, ValueError):
            raise ProfileError(f"weight for {dim.value} must be a number, got {raw!r}") from None
        weights.append((dim, w))
    for token in raw_weights:
        if token not in {d.value for d in DIMENSIONS}:
            raise ProfileError(f"unknown dimension token in weights: {token!r}")
    raw_cov = doc.get("min_coverage", 0.5)
    try:
        min_coverage = Fraction(raw_cov).limit_denominator(10**9) if isinstance(raw_cov, float) \
            else Fraction(raw_cov)
    except (TypeError, ValueError):
        raise ProfileError(f"'min_coverage' must be a number, got {raw_cov!r}") from None
    raw_tb = doc.get("tie_break", [d.value for d in DIMENSIONS])
    if not isinstance(raw_tb, list):
        raise ProfileError("'tie_break' must be a list of dimension tokens")
    tie_break = []
    for token in raw_tb:
        try:
            tie_break.append(Dimension(token))
        except ValueError:
            raise ProfileError(f"unknown dimension token in tie_break: {token!r}") from None
    return PriorityProfile(name=name, weights=tuple(weights), mode=mode,
                           min_coverage=min_coverage, tie_break=tuple(tie_break))


def profile_to_dict(p: PriorityProfile) -> dict:
    return {
        "name": p.name,
        "mode": p.mode,
        "weights": {dim.value: _num(w) for dim, w in p.weights},
        "min_coverage": _num(p.min_coverage),
        "tie_break": [d.value for d in p.tie_break],
    }


def _num(f: Fraction) -> int | float:
    return int(f) if f.denominator == 1 else float(f)


def weighted_score(p: PriorityProfile, v: ScoreVector) -> Fraction | None:
    """Normalized weighted mean over dimensions that are both defined and
    positively weighted; None when no such dimension exists."""
    if p.mode != MODE_WEIGHTED:
        raise ProfileError(f"weighted_score requires mode {MODE_WEIGHTED!r}, profile is {p.mode!r}")
    num = den = Fraction(0)
    for dim, w in p.weights:
        if w == 0:
            continue
        score = v[dim].score
        if score is None:
            continue
        num += w * score
        den += w
    if den == 0:
        return None
    return num / den


def dominates(a: ScoreVector, b: ScoreVector) -> bool:
    """Pareto dominance: a is at least as high on every dimension and
    strictly higher on one. Any Undefined dimension on either side makes
    the pair incomparable."""
    if not a.fully_defined() or not b.fully_defined():
        return False
    strictly = False
    for dim in DIMENSIONS:
        sa, sb = a[dim].score, b[dim].score
        if sa < sb:
            return False
        if sa > sb:
            strictly = True
    return strictly


def pareto_frontier(entries: list[ScoreVector]) -> set[int]:
    """Indices of vectors not dominated by any other entry. Duplicates of a
    frontier vector all stay on the frontier."""
    return {
        i for i, v in enumerate(entries)
        if not any(dominates(other, v) for j, other in enumerate(entries) if j != i)
    }


@dataclass(frozen=True)
class ClaimScores:
    claim_id: str
    created_at: datetime
    vector: ScoreVector


@dataclass(frozen=True)
class QueueEntry:
    claim_id: str
    created_at: datetime
    vector: ScoreVector
    scalar: Fraction | None       # populated only in weighted mode
    rank: int | None              # assigned iff scalar is present
    pareto_frontier: bool
    provisional: bool


def _provisional(p: PriorityProfile, v: ScoreVector) -> bool:
    return any(
        v[dim].coverage < p.min_coverage
        for dim, w in p.weights if w > 0
    )


def _tie_break_key(p: PriorityProfile, entry: ClaimScores):
    # Undefined sorts below 0 so unscored dimensions never win a tie.
    dim_scores = tuple(
        -(entry.vector[d].score if entry.vector[d].score is not None else Fraction(-1))
        for d in p.tie_break
    )
    return (*dim_scores, entry.created_at, entry.claim_id)


def rank_queue(p: PriorityProfile, claims: list[ClaimScores]) -> list[QueueEntry]:
    """Materialize the queue under a profile.

    Weighted mode: scalar descending, then tie-break dimensions descending
    in profile order, then created_at ascending, then claim_id ascending;
    claims whose scalar is undefined sort last. Pareto mode: frontier
    entries first, no rank numbers. Total and deterministic either way.
    """
    frontier = pareto_frontier([c.vector for c in claims])
    indices = list(range(len(claims)))

    if p.mode == MODE_WEIGHTED:
        scalars = [weighted_score(p, c.vector) for c in claims]

        def key(i: int):
            s = scalars[i]
            # (has-scalar first, scalar desc) then published tie-break chain
            return (s is None, -(s if s is not None else Fraction(0)),
                    *_tie_break_key(p, claims[i]))

        entries = []
        rank = 0
        for i in sorted(indices, key=key):
            c, s = claims[i], scalars[i]
            if s is not None:
                rank += 1
            entries.append(QueueEntry(
                claim_id=c.claim_id, created_at=c.created_at, vector=c.vector,
                scalar=s, rank=rank if s is not None else None,
                pareto_frontier=i in frontier,
                provisional=_provisional(p, c.vector),
            ))
        return entries

    def pareto_key(i: int):
        return (i not in frontier, *_tie_break_key(p, claims[i]))

    return [
        QueueEntry(
            claim_id=claims[i].claim_id, created_at=claims[i].created_at,
            vector=claims[i].vector, scalar=None, rank=None,
            pareto_frontier=i in frontier,
            provisional=_provisional(p, claims[i].vector),
        )
        for i in sorted(indices, key=pareto_key)
    ]


def what_if(p: PriorityProfile, claims: list[ClaimScores],
            override: tuple[str, Dimension, Fraction]) -> list[QueueEntry]:
    """rank_queue over a hypothetically adjusted copy of one claim's
    dimension score. Pure; persists nothing."""
    claim_id, dimension, hypothetical = override
    if not (0 <= hypothetical <= 1):
        raise TriageError(f"hypothetical score must be in [0, 1], got {hypothetical}")
    if not any(c.claim_id == claim_id for c in claims):
        raise TriageError(f"unknown claim id: {claim_id!r}")
    adjusted = [
        c if c.claim_id != claim_id
        else ClaimScores(claim_id=c.claim_id, created_at=c.created_at,
                         vector=_with_score(c.vector, dimension, hypothetical))
        for c in claims
    ]
    return rank_queue(p, adjusted)


def _with_score(v: ScoreVector, dimension: Dimension, score: Fraction) -> ScoreVector:
    """Replace one dimension with a synthetic fully-answered score equal to
    the hypothetical value (closest representable yes/answered pair)."""
    scores = []
    for ds in v.scores:
        if ds.dimension != dimension:
            scores.append(ds)
            continue
        total = ds.total_count
        # represent the hypothetical exactly by scaling counts
        denom = score.denominator
        scores.append(_SyntheticScore(
            dimension=dimension,
            yes_count=score.numerator,
            answered_count=denom,
            total_count=max(total, denom),
            _coverage=ds.coverage,
        ))
    return ScoreVector(scores=tuple(scores))


@dataclass(frozen=True)
class _SyntheticScore:
    """Stand-in DimensionScore carrying an exact hypothetical ratio while
    preserving the original coverage for provisional flagging."""

    dimension: Dimension
    yes_count: int
    answered_count: int
    total_count: int
    _coverage: Fraction = Fraction(1)

    @property
    def score(self) -> Fraction | None:
        if self.answered_count == 0:
            return None
        return Fraction(self.yes_count, self.answered_count)

    @property
    def coverage(self) -> Fraction:
        return self._coverage
