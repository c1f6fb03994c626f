// Typed client for the session service. Uses relative URLs so the client can
// be served from the same origin as the API (`trustcal serve --ui frontend`).

export interface CreatedSession {
  session_id: string;
  n_trials: number;
  condition_hidden: boolean;
}

export interface TrialResponse {
  trial_index: number;
  ai_prediction_color: string;
  ai_confidence: number;
  colors: string[];
}

export interface JudgmentResponse {
  was_human_correct: boolean;
  ai_was_correct: boolean;
  score_delta: number;
  bonus_accrued: number;
  finished: boolean;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class SessionApi {
  constructor(
    private base: string = '',
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return resp.json() as Promise<T>;
  }

  createSession(condition?: string): Promise<CreatedSession> {
    return this.request('/api/sessions', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(condition ? { condition } : {}),
    });
  }

  getTrial(sessionId: string): Promise<TrialResponse> {
    return this.request(`/api/sessions/${sessionId}/trial`);
  }

  postJudgment(
    sessionId: string,
    judgedCorrect: boolean,
    responseMs?: number,
  ): Promise<JudgmentResponse> {
    return this.request(`/api/sessions/${sessionId}/judgment`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ judged_correct: judgedCorrect, response_ms: responseMs ?? null }),
    });
  }

  async exportCsv(sessionId: string): Promise<string> {
    const resp = await this.fetchFn(`${this.base}/api/sessions/${sessionId}/export`);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return resp.text();
  }

  exportUrl(sessionId: string): string {
    return `${this.base}/api/sessions/${sessionId}/export`;
  }
}
