"""Claim triage built on five urgency dimensions: structured yes/no/unknown
assessments, per-dimension scores, multi-assessor consensus, and weighted
or Pareto prioritization over an append-only audit log."""

from .questionnaire import (  # noqa: F401
    DIMENSIONS,
    Dimension,
    Question,
    Questionnaire,
    QuestionnaireError,
    canonical_fable,
    diff_versions,
    dump_questionnaire,
    load_questionnaire,
)
from .assessment import (  # noqa: F401
    Answer,
    AnswerValue,
    Assessment,
    AssessmentError,
    ConsensusAnswer,
    ConsensusValue,
    DimensionScore,
    ScoreVector,
    consensus,
    explain,
    score_assessment,
    validate_assessment,
)
from .triage import (  # noqa: F401
    ClaimScores,
    PriorityProfile,
    ProfileError,
    QueueEntry,
    TriageError,
    default_profile,
    dominates,
    load_profile,
    pareto_frontier,
    rank_queue,
    weighted_score,
    what_if,
)
from .store import (  # noqa: F401
    Claim,
    EventRecord,
    EventStore,
    LockError,
    LogCorruptionError,
    MaterializedState,
    Note,
    ReferentialError,
    StoreError,
    apply_event,
    replay,
    restore,
    snapshot_state,
)

__version__ = "0.1.0"
