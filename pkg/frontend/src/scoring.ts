// Live wizard preview: the one place the client computes a score itself.
// Must follow the published rule exactly (yes / answered per dimension,
// coverage = answered / total) so the preview matches the server's score
// for the same answers.

import { AnswerValue, DIMENSIONS, DimensionToken, Question } from './types';

export interface PreviewScore {
  score: number | null;
  coverage: number;
  yesCount: number;
  answeredCount: number;
  totalCount: number;
}

export function previewScores(
  questions: Question[],
  answers: Record<string, AnswerValue>,
): Record<DimensionToken, PreviewScore> {
  const result = {} as Record<DimensionToken, PreviewScore>;
  for (const dim of DIMENSIONS) {
    const own = questions.filter((q) => q.dimension === dim);
    let yes = 0;
    let answered = 0;
    for (const q of own) {
      const value = answers[q.id] ?? 'unknown';
      if (value === 'unknown') continue;
      answered += 1;
      if (value === 'yes') yes += 1;
    }
    result[dim] = {
      score: answered > 0 ? yes / answered : null,
      coverage: own.length > 0 ? answered / own.length : 0,
      yesCount: yes,
      answeredCount: answered,
      totalCount: own.length,
    };
  }
  return result;
}
