/**
 * Headless state of the design console.
 *
 * Holds the session, the working weight vector, the vicinity dial, the
 * constraint list, and one result panel per service endpoint. Panels track
 * staleness (any input change marks dependent results stale until
 * refreshed) and per-panel request generations so that a newer request
 * silently cancels a superseded one. The views layer renders this state;
 * the end-to-end test drives it directly.
 */

import {
  ApiError,
  Client,
  ConstraintBody,
  RankResponse,
  SessionInfo,
  StableResponse,
  SuggestResponse,
  UpResponse,
  AuditResponse,
  Wire,
} from "./api.js";
import { isValidTheta } from "./format.js";
import { tokenAt } from "./jsonTokens.js";

export interface Panel<T> {
  data: T | null;
  /** verbatim wire tokens for every displayed value, keyed by payload path */
  display: Record<string, string>;
  stale: boolean;
  inFlight: boolean;
  progress: number;
  error: string | null;
}

function emptyPanel<T>(): Panel<T> {
  return { data: null, display: {}, stale: false, inFlight: false, progress: 0, error: null };
}

export interface ConstraintRow extends ConstraintBody {}

const RESULT_PANELS = ["ranking", "up", "audit", "stable", "suggestion"] as const;
export type PanelName = (typeof RESULT_PANELS)[number];

export class DesignState {
  session: SessionInfo | null = null;
  weights: number[] = [];
  theta = Math.PI / 16;
  thetaUnit: "radians" | "cosine" = "radians";
  constraints: ConstraintRow[] = [];
  seed = 0;
  samples = 10_000;
  budget = 1000;
  topM = 10;

  ranking = emptyPanel<RankResponse>();
  up = emptyPanel<UpResponse>();
  audit = emptyPanel<AuditResponse>();
  stable = emptyPanel<StableResponse>();
  suggestion = emptyPanel<SuggestResponse>();
  suggestionHistory: SuggestResponse[] = [];

  private generations: Record<PanelName, number> = {
    ranking: 0,
    up: 0,
    audit: 0,
    stable: 0,
    suggestion: 0,
  };
  private controllers: Partial<Record<PanelName, AbortController>> = {};
  private listeners: (() => void)[] = [];

  constructor(readonly client: Client) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  private panel(name: PanelName): Panel<any> {
    return this[name];
  }

  /** Mark every derived result stale; called on any input change. */
  private invalidateResults(): void {
    for (const name of RESULT_PANELS) {
      const panel = this.panel(name);
      if (panel.data !== null) panel.stale = true;
    }
    this.notify();
  }

  // ---- inputs ------------------------------------------------------------

  setWeights(weights: number[]): void {
    if (this.session && weights.length !== this.session.d) {
      throw new Error(`need ${this.session.d} weights, got ${weights.length}`);
    }
    this.weights = [...weights];
    this.invalidateResults();
  }

  setWeight(index: number, value: number): void {
    const next = [...this.weights];
    next[index] = value;
    this.setWeights(next);
  }

  /** The dial rejects non-positive angles: a zero-width vicinity is not a region. */
  setTheta(theta: number): boolean {
    if (!isValidTheta(theta)) return false;
    this.theta = theta;
    this.invalidateResults();
    return true;
  }

  setThetaUnit(unit: "radians" | "cosine"): void {
    this.thetaUnit = unit;
    this.notify();
  }

  addConstraint(row: ConstraintRow): void {
    this.constraints.push({ ...row });
    this.invalidateResults();
  }

  removeConstraint(index: number): void {
    this.constraints.splice(index, 1);
    this.invalidateResults();
  }

  setSeed(seed: number): void {
    this.seed = seed;
    this.invalidateResults();
  }

  setSamples(samples: number): void {
    this.samples = samples;
    this.invalidateResults();
  }

  // ---- session -----------------------------------------------------------

  async upload(csv: string, config: { scoring_cols: string; id_col?: string; sensitive?: string }): Promise<void> {
    const wire = await this.client.uploadDataset(csv, config);
    this.session = wire.data;
    this.weights = new Array(wire.data.d).fill(1);
    for (const name of RESULT_PANELS) {
      Object.assign(this.panel(name), emptyPanel());
    }
    this.suggestionHistory = [];
    this.notify();
  }

  private requireSession(): SessionInfo {
    if (!this.session) throw new Error("upload a dataset first");
    return this.session;
  }

  // ---- result panels -----------------------------------------------------

  private async runPanel<T>(
    name: PanelName,
    request: (signal: AbortSignal) => Promise<Wire<T>>,
    displayPaths: (data: T) => string[],
  ): Promise<T | null> {
    const generation = ++this.generations[name];
    this.controllers[name]?.abort();
    const controller = new AbortController();
    this.controllers[name] = controller;
    const panel = this.panel(name);
    panel.inFlight = true;
    panel.progress = 0;
    panel.error = null;
    this.notify();
    this.client.onProgress = (fraction) => {
      if (this.generations[name] === generation) {
        panel.progress = fraction;
        this.notify();
      }
    };
    try {
      const wire = await request(controller.signal);
      if (this.generations[name] !== generation) return null; // superseded
      panel.data = wire.data;
      panel.display = {};
      for (const path of displayPaths(wire.data)) {
        const token = tokenAt(wire.tokens, wire.prefix + path);
        if (token !== null) panel.display[path] = token;
      }
      panel.stale = false;
      panel.inFlight = false;
      panel.progress = 1;
      this.notify();
      return wire.data;
    } catch (err) {
      if (this.generations[name] !== generation) return null;
      panel.inFlight = false;
      panel.error = err instanceof ApiError ? err.message : String(err);
      this.notify();
      return null;
    } finally {
      this.client.onProgress = null;
    }
  }

  refreshRanking(): Promise<RankResponse | null> {
    const session = this.requireSession();
    const k = this.constraints.length ? Math.max(...this.constraints.map((c) => c.k)) : undefined;
    return this.runPanel(
      "ranking",
      (signal) =>
        this.client.rank(
          session.session_id,
          { weights: this.weights, k, constraints: this.constraints },
          signal,
        ),
      (data) => [
        ...data.scores.map((_, i) => `scores[${i}]`),
        ...data.weights.map((_, i) => `weights[${i}]`),
        ...data.direction.map((_, i) => `direction[${i}]`),
        ...(data.fair !== undefined ? ["fair"] : []),
      ],
    );
  }

  runUp(): Promise<UpResponse | null> {
    const session = this.requireSession();
    return this.runPanel(
      "up",
      (signal) =>
        this.client.up(
          session.session_id,
          {
            weights: this.weights,
            theta: this.theta,
            constraints: this.constraints,
            samples: this.samples,
            seed: this.seed,
          },
          signal,
        ),
      () => ["up", "error", "alpha", "samples"],
    );
  }

  async runSuggestion(): Promise<SuggestResponse | null> {
    const session = this.requireSession();
    const result = await this.runPanel(
      "suggestion",
      (signal) =>
        this.client.suggest(
          session.session_id,
          {
            weights: this.weights,
            theta: this.theta,
            constraints: this.constraints,
            budget: this.budget,
            seed: this.seed,
          },
          signal,
        ),
      (data) => [
        "found",
        "samples_used",
        ...(data.found && data.function
          ? ["angular_gap", ...data.function.map((_, i) => `function[${i}]`)]
          : []),
      ],
    );
    if (result?.found) this.suggestionHistory.push(result);
    return result;
  }

  /** The feedback loop: copy the suggested weights into the sliders. */
  applySuggestion(): boolean {
    const suggestion = this.suggestion.data;
    if (!suggestion?.found || !suggestion.function) return false;
    this.setWeights(suggestion.function);
    return true;
  }

  runAudit(): Promise<AuditResponse | null> {
    const session = this.requireSession();
    return this.runPanel(
      "audit",
      (signal) =>
        this.client.audit(
          session.session_id,
          { weights: this.weights, theta: this.theta, samples: this.samples, seed: this.seed },
          signal,
        ),
      () => ["stability", "error", "alpha", "samples", "matches"],
    );
  }

  runStable(): Promise<StableResponse | null> {
    const session = this.requireSession();
    return this.runPanel(
      "stable",
      (signal) =>
        this.client.stable(
          session.session_id,
          {
            weights: this.weights,
            theta: this.theta,
            samples: this.samples,
            top: this.topM,
            seed: this.seed,
          },
          signal,
        ),
      (data) => [
        "total_samples",
        "reference_stability[0]",
        "reference_stability[1]",
        ...data.top_rankings.map((_, i) => `top_rankings[${i}].stability`),
        ...data.top_rankings.map((_, i) => `top_rankings[${i}].count`),
      ],
    );
  }

  /** Adopt the exemplar weights of the most stable observed ranking. */
  adoptMostStable(): boolean {
    const top = this.stable.data?.top_rankings[0];
    if (!top) return false;
    this.setWeights(top.weights);
    return true;
  }
}
