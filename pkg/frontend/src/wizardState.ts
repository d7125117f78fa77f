// Assessment wizard state: one step per dimension in F/A/B/L/E order.
// Pure functions over a plain state object so the logic is testable
// without the DOM. Navigation never drops answers; submit stays disabled
// until every question has an explicit yes/no/unknown choice (unknown is
// a deliberate selection, never a default).

import { AnswerValue, DIMENSIONS, DimensionToken, Question } from './types';

export interface WizardState {
  claimId: string;
  stepIndex: number; // 0..4
  answers: Record<string, AnswerValue>;
  dirty: boolean;
}

export interface DraftStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const draftKey = (claimId: string) => `fable-wizard-draft:${claimId}`;

export function newWizard(claimId: string, storage?: DraftStorage): WizardState {
  if (storage) {
    const raw = storage.getItem(draftKey(claimId));
    if (raw) {
      try {
        const saved = JSON.parse(raw);
        return {
          claimId,
          stepIndex: typeof saved.stepIndex === 'number' ? saved.stepIndex : 0,
          answers: saved.answers ?? {},
          dirty: Object.keys(saved.answers ?? {}).length > 0,
        };
      } catch {
        storage.removeItem(draftKey(claimId));
      }
    }
  }
  return { claimId, stepIndex: 0, answers: {}, dirty: false };
}

export function saveDraft(state: WizardState, storage: DraftStorage): void {
  storage.setItem(
    draftKey(state.claimId),
    JSON.stringify({ stepIndex: state.stepIndex, answers: state.answers }),
  );
}

export function clearDraft(claimId: string, storage: DraftStorage): void {
  storage.removeItem(draftKey(claimId));
}

export function currentDimension(state: WizardState): DimensionToken {
  return DIMENSIONS[state.stepIndex];
}

export function answerQuestion(
  state: WizardState,
  questionId: string,
  value: AnswerValue,
): WizardState {
  return {
    ...state,
    answers: { ...state.answers, [questionId]: value },
    dirty: true,
  };
}

export function goToStep(state: WizardState, stepIndex: number): WizardState {
  if (stepIndex < 0 || stepIndex >= DIMENSIONS.length) return state;
  return { ...state, stepIndex };
}

export function nextStep(state: WizardState): WizardState {
  return goToStep(state, state.stepIndex + 1);
}

export function prevStep(state: WizardState): WizardState {
  return goToStep(state, state.stepIndex - 1);
}

export function stepComplete(state: WizardState, questions: Question[]): boolean {
  const dim = currentDimension(state);
  return questions
    .filter((q) => q.dimension === dim)
    .every((q) => state.answers[q.id] !== undefined);
}

export function canSubmit(state: WizardState, questions: Question[]): boolean {
  return questions.every((q) => state.answers[q.id] !== undefined);
}

export function toSubmission(
  state: WizardState,
): { question_id: string; value: AnswerValue }[] {
  return Object.entries(state.answers).map(([question_id, value]) => ({
    question_id,
    value,
  }));
}
