import {
  AnswerValue,
  AuditEvent,
  Claim,
  DimensionToken,
  NoteView,
  Questionnaire,
  QueueResponse,
  ScoreResponse,
} from './types';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private token: string | null = null,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const res = await fetch(`${this.baseUrl}/api/v1${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await res.json();
    if (!res.ok) {
      throw new ApiError(res.status, data.code ?? 'unknown', data.message ?? res.statusText);
    }
    return data as T;
  }

  getQuestionnaire(): Promise<Questionnaire> {
    return this.request('GET', '/questionnaire');
  }

  listClaims(status?: string): Promise<{ claims: Claim[]; total: number }> {
    const qs = status ? `?status=${encodeURIComponent(status)}` : '';
    return this.request('GET', `/claims${qs}`);
  }

  getScore(claimId: string): Promise<ScoreResponse> {
    return this.request('GET', `/claims/${encodeURIComponent(claimId)}/score?by=consensus`);
  }

  submitAssessment(
    claimId: string,
    assessorId: string,
    answers: { question_id: string; value: AnswerValue }[],
    idempotencyKey?: string,
  ): Promise<unknown> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    if (idempotencyKey) headers['Idempotency-Key'] = idempotencyKey;
    return fetch(`${this.baseUrl}/api/v1/claims/${encodeURIComponent(claimId)}/assessments`, {
      method: 'POST',
      headers,
      body: JSON.stringify({ assessor_id: assessorId, answers }),
    }).then(async (res) => {
      const data = await res.json();
      if (!res.ok) throw new ApiError(res.status, data.code ?? 'unknown', data.message ?? '');
      return data;
    });
  }

  getQueue(profile = 'default'): Promise<QueueResponse> {
    return this.request('GET', `/queue?profile=${encodeURIComponent(profile)}`);
  }

  whatIf(
    profile: string,
    override: { claim_id: string; dimension: DimensionToken; score: number },
  ): Promise<QueueResponse> {
    return this.request('POST', '/queue/what-if', { profile, override });
  }

  getAudit(claimId: string): Promise<AuditEvent[]> {
    return this.request('GET', `/claims/${encodeURIComponent(claimId)}/audit`);
  }

  listNotes(claimId: string): Promise<{ notes: NoteView[] }> {
    return this.request('GET', `/claims/${encodeURIComponent(claimId)}/notes`);
  }

  postNote(claimId: string, authorId: string, body: string): Promise<NoteView> {
    return this.request('POST', `/claims/${encodeURIComponent(claimId)}/notes`, {
      author_id: authorId,
      body,
    });
  }
}
