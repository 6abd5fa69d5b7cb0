/**
 * Typed client for the scoring-function service.
 *
 * Every call returns the parsed payload together with the raw response text
 * and a token map, so the views can display numbers byte-for-byte as they
 * arrived on the wire. Long-running jobs answer 202 with a job id; the
 * client polls the progress endpoint until done and then exposes the final
 * progress response (token paths gain the "result." prefix).
 */

import { scanTokens, TokenMap } from "./jsonTokens.js";

export interface ConstraintBody {
  group: string;
  k: number;
  min_count: number;
  max_count?: number | null;
}

export interface SessionInfo {
  session_id: string;
  n: number;
  d: number;
  columns: string[];
  groups: string[];
  digest: string;
}

export interface RankResponse {
  order: string[];
  scores: number[];
  groups: (string | null)[];
  weights: number[];
  direction: number[];
  k?: number;
  group_counts?: Record<string, number>;
  fair?: boolean;
}

export interface UpResponse {
  up: number;
  error: number;
  alpha: number;
  samples: number;
  seed: number;
}

export interface SuggestResponse {
  found: boolean;
  function: number[] | null;
  samples_used: number;
  angular_gap: number | null;
  reference: number[];
  seed: number;
}

export interface AuditResponse {
  stability: number;
  error: number;
  alpha: number;
  samples: number;
  matches: number;
  seed: number;
}

export interface StableEntry {
  fingerprint: string;
  count: number;
  stability: number;
  ids: string[];
  weights: number[];
}

export interface StableResponse {
  top_rankings: StableEntry[];
  histogram: Record<string, number>;
  total_samples: number;
  reference_stability: [number, number];
  seed: number;
}

/** A service response plus its wire bytes and token map. */
export interface Wire<T> {
  data: T;
  raw: string;
  tokens: TokenMap;
  /** token-path prefix of the payload inside `raw` ("" or "result.") */
  prefix: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function readJson(response: Response): Promise<{ raw: string; data: any }> {
  const raw = await response.text();
  let data: any = null;
  try {
    data = raw ? JSON.parse(raw) : null;
  } catch {
    throw new ApiError(response.status, `invalid JSON from service: ${raw.slice(0, 200)}`);
  }
  if (!response.ok && response.status !== 202) {
    const detail =
      data && typeof data.detail === "string" ? data.detail : JSON.stringify(data?.detail ?? raw);
    throw new ApiError(response.status, detail);
  }
  return { raw, data };
}

export class Client {
  constructor(
    readonly base: string,
    readonly pollIntervalMs = 150,
  ) {}

  private url(path: string): string {
    return `${this.base.replace(/\/$/, "")}${path}`;
  }

  async uploadDataset(
    csv: string,
    config: { scoring_cols: string; id_col?: string; sensitive?: string; normalization?: string },
  ): Promise<Wire<SessionInfo>> {
    const params = new URLSearchParams({ scoring_cols: config.scoring_cols });
    if (config.id_col) params.set("id_col", config.id_col);
    if (config.sensitive) params.set("sensitive", config.sensitive);
    if (config.normalization) params.set("normalization", config.normalization);
    const response = await fetch(this.url(`/datasets?${params}`), {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    });
    const { raw, data } = await readJson(response);
    return { data, raw, tokens: scanTokens(raw), prefix: "" };
  }

  /** POST a compute request; transparently follow the 202 + polling path. */
  private async compute<T>(
    sessionId: string,
    endpoint: string,
    body: unknown,
    signal?: AbortSignal,
  ): Promise<Wire<T>> {
    const response = await fetch(this.url(`/sessions/${sessionId}/${endpoint}`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
    const { raw, data } = await readJson(response);
    if (response.status !== 202) {
      return { data, raw, tokens: scanTokens(raw), prefix: "" };
    }
    return this.pollJob<T>(sessionId, data.job_id, signal);
  }

  async pollJob<T>(sessionId: string, jobId: string, signal?: AbortSignal): Promise<Wire<T>> {
    for (;;) {
      if (signal?.aborted) throw new ApiError(0, "cancelled");
      const response = await fetch(this.url(`/sessions/${sessionId}/progress/${jobId}`), { signal });
      const { raw, data } = await readJson(response);
      if (data.error) throw new ApiError(data.error.status, data.error.detail);
      if (data.done && data.result !== undefined) {
        return { data: data.result, raw, tokens: scanTokens(raw), prefix: "result." };
      }
      this.onProgress?.(data.done_fraction ?? 0);
      await new Promise((resolve) => setTimeout(resolve, this.pollIntervalMs));
    }
  }

  /** Optional progress hook, set by the active panel while a job runs. */
  onProgress: ((fraction: number) => void) | null = null;

  rank(sessionId: string, body: { weights: number[]; k?: number; constraints?: ConstraintBody[] }, signal?: AbortSignal) {
    return this.compute<RankResponse>(sessionId, "rank", body, signal);
  }

  up(
    sessionId: string,
    body: {
      weights: number[];
      theta: number;
      constraints: ConstraintBody[];
      samples: number;
      alpha?: number;
      seed: number;
    },
    signal?: AbortSignal,
  ) {
    return this.compute<UpResponse>(sessionId, "up", body, signal);
  }

  suggest(
    sessionId: string,
    body: {
      weights: number[];
      theta: number;
      constraints: ConstraintBody[];
      budget: number;
      seed: number;
      mode?: string;
    },
    signal?: AbortSignal,
  ) {
    return this.compute<SuggestResponse>(sessionId, "suggest", body, signal);
  }

  audit(
    sessionId: string,
    body: { weights: number[]; theta: number; samples: number; alpha?: number; seed: number; scope?: string; k?: number },
    signal?: AbortSignal,
  ) {
    return this.compute<AuditResponse>(sessionId, "audit", body, signal);
  }

  stable(
    sessionId: string,
    body: { weights: number[]; theta: number; samples: number; top: number; seed: number; scope?: string; k?: number },
    signal?: AbortSignal,
  ) {
    return this.compute<StableResponse>(sessionId, "stable", body, signal);
  }
}
