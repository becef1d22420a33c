import { readFileSync } from "node:fs";
import { join } from "node:path";
import type { Action, SessionBundle } from "../src/types.js";

export function loadBundle(): SessionBundle {
  return loadJson("bundle.json") as SessionBundle;
}

export interface AnswerKey {
  session_id: string;
  bundle_integrity: string;
  weights: number[];
  items: Record<string, { actions: Action[]; overlap: number; difficulty: number }>;
}

export function loadAnswers(): AnswerKey {
  return loadJson("answers.json") as AnswerKey;
}

function loadJson(name: string): unknown {
  const path = join(process.cwd(), "tests", "fixtures", name);
  return JSON.parse(readFileSync(path, "utf-8"));
}

export interface LoggedResponse {
  test_id: string;
  actions: Action[];
  confidence: number;
  optimal: boolean;
  reward_gap: number;
  timestamp: string;
}

/**
 * In-memory stand-in for the grading service. GET /session serves the
 * fixture bundle; POST /response grades by exact match against the answer
 * key (real grading, including reward-equal alternate routes, is the
 * server's job and is covered by its own tests). Graded submissions are
 * appended to `log`, one record each, like the server's response log.
 */
export class FakeServer {
  readonly log: LoggedResponse[] = [];
  served: string[] = [];
  private failure: { status: number; detail: string } | null = null;
  private readonly bundle: SessionBundle;
  private readonly answers: AnswerKey;

  constructor(bundle: SessionBundle, answers: AnswerKey) {
    this.bundle = bundle;
    this.answers = answers;
  }

  /** Make the next POST fail with the given status, then recover. */
  failNext(status: number, detail: string): void {
    this.failure = { status, detail };
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    if (url.endsWith("/session")) {
      const text = JSON.stringify(this.bundle);
      this.served.push(text);
      return jsonResponse(200, text);
    }
    if (url.endsWith("/response")) {
      if (this.failure !== null) {
        const { status, detail } = this.failure;
        this.failure = null;
        return jsonResponse(status, JSON.stringify({ detail }));
      }
      const body = JSON.parse(String(init?.body)) as {
        test_id: string;
        actions: Action[];
        confidence: number;
      };
      const item = this.answers.items[body.test_id];
      if (item === undefined) {
        return jsonResponse(404, JSON.stringify({ detail: "unknown test id" }));
      }
      const optimal =
        body.actions.length === item.actions.length &&
        body.actions.every((a, i) => a === item.actions[i]);
      const record: LoggedResponse = {
        test_id: body.test_id,
        actions: body.actions,
        confidence: body.confidence,
        optimal,
        reward_gap: optimal ? 0.0 : 1.0,
        timestamp: new Date().toISOString(),
      };
      this.log.push(record);
      return jsonResponse(
        200,
        JSON.stringify({
          optimal,
          reward_gap: record.reward_gap,
          confidence: body.confidence,
        }),
      );
    }
    return jsonResponse(404, JSON.stringify({ detail: "no such route" }));
  };
}

function jsonResponse(status: number, text: string): Response {
  return new Response(text, {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
