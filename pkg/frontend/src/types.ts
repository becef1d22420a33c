/** Wire types for the session service. Mirrors the JSON the server exports. */

export type Action = "up" | "down" | "left" | "right" | "pickup";

export type CellKind = string;

export interface FeatureTrigger {
  kind: "exit" | "enter_once" | "action";
  cell?: CellKind;
  flag?: string;
}

export interface FeatureSpec {
  name: string;
  trigger: FeatureTrigger;
}

export interface DomainInfo {
  name: string;
  discount: number;
  features: FeatureSpec[];
  flags: Record<string, boolean>;
  legend: Record<string, CellKind>;
  pickup_flag: string | null;
}

export interface TeachingStep {
  env_id: string;
  grid: string[];
  start: [number, number];
  actions: Action[];
  info_gain: number;
}

export interface TestSpec {
  test_id: string;
  grid: string[];
  start: [number, number];
  tier: string;
}

export interface SessionBundle {
  version: number;
  session_id: string;
  domain: DomainInfo;
  teaching: TeachingStep[];
  tests: TestSpec[];
  config: Record<string, unknown>;
  integrity: string;
}

export interface Score {
  optimal: boolean;
  reward_gap: number;
  confidence: number | null;
}

export interface ResponseRecord {
  test_id: string;
  tier: string;
  score: Score;
}
