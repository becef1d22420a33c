import type { Action, Score, SessionBundle } from "./types.js";

export interface ScoreResult {
  ok: true;
  score: Score;
}

export interface ApiError {
  ok: false;
  status: number;
  detail: string;
}

export type PostResult = ScoreResult | ApiError;

/**
 * Thin fetch wrapper around the two session endpoints. The base URL is
 * injectable so tests can point it at a stubbed origin.
 */
export class SessionClient {
  private readonly baseUrl: string;

  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  async getSession(): Promise<SessionBundle> {
    const response = await fetch(`${this.baseUrl}/session`);
    if (!response.ok) {
      throw new Error(`session fetch failed: ${response.status}`);
    }
    return (await response.json()) as SessionBundle;
  }

  async postResponse(
    testId: string,
    actions: Action[],
    confidence: number,
  ): Promise<PostResult> {
    const response = await fetch(`${this.baseUrl}/response`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ test_id: testId, actions, confidence }),
    });
    const body = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      return {
        ok: false,
        status: response.status,
        detail: typeof body.detail === "string" ? body.detail : JSON.stringify(body),
      };
    }
    return { ok: true, score: body as unknown as Score };
  }
}
