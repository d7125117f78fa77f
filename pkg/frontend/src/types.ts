// Shapes of /api/v1 responses. Every number displayed in the UI comes
// from one of these fields.

export type DimensionToken =
  | 'fragmentation'
  | 'actionability'
  | 'believability'
  | 'likelihood_of_spread'
  | 'exploitativeness';

export const DIMENSIONS: DimensionToken[] = [
  'fragmentation',
  'actionability',
  'believability',
  'likelihood_of_spread',
  'exploitativeness',
];

export const DIMENSION_LABELS: Record<DimensionToken, string> = {
  fragmentation: 'Fragmentation',
  actionability: 'Actionability',
  believability: 'Believability',
  likelihood_of_spread: 'Likelihood of spread',
  exploitativeness: 'Exploitativeness',
};

export type AnswerValue = 'yes' | 'no' | 'unknown';

export interface Question {
  id: string;
  dimension: DimensionToken;
  text: string;
  guidance: string | null;
  key: boolean;
}

export interface Questionnaire {
  version: number;
  title: string;
  locale: string;
  questions: Question[];
}

export interface Claim {
  claim_id: string;
  text: string;
  source_url: string | null;
  platform: string | null;
  created_at: string;
  status: 'open' | 'in_progress' | 'published' | 'dismissed';
}

export interface DimensionScoreView {
  score: number | null;
  coverage: number;
  yes_count: number;
  answered_count: number;
  total_count: number;
}

export type ScoreVectorView = Record<DimensionToken, DimensionScoreView>;

export interface DimensionExplanationView {
  score: number | null;
  coverage: number;
  triggering: string[];
  contested: string[];
}

export interface ConsensusAnswerView {
  question_id: string;
  value: AnswerValue | 'unresolved';
  votes: Partial<Record<AnswerValue, number>>;
}

export interface ScoreResponse {
  claim_id: string;
  by: string;
  score_vector: ScoreVectorView;
  provisional: Record<DimensionToken, boolean>;
  explanation: Record<DimensionToken, DimensionExplanationView> | null;
  disagreement: number | null;
  consensus_answers: ConsensusAnswerView[] | null;
}

export interface QueueEntryView {
  claim_id: string;
  created_at: string;
  score_vector: ScoreVectorView;
  scalar: number | null;
  rank: number | null;
  pareto_frontier: boolean;
  provisional: boolean;
}

export interface ProfileView {
  name: string;
  mode: 'weighted' | 'pareto';
  weights: Record<DimensionToken, number>;
  min_coverage: number;
  tie_break: DimensionToken[];
}

export interface QueueResponse {
  profile: ProfileView;
  entries: QueueEntryView[];
}

export interface NoteView {
  claim_id: string;
  author_id: string;
  body: string;
  created_at: string;
}

export interface AuditEvent {
  seq: number;
  kind: string;
  recorded_at: string;
  payload: Record<string, unknown>;
}
