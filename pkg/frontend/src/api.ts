// Typed client for the five live-annotation session endpoints.

export type Label = 0 | 1;

export interface SessionSummary {
  session_id: string;
  phase: string;
  strategy: string;
  budget: number;
  pending_count: number;
}

export interface BatchResponse {
  session_id: string;
  phase: string;
  doc_ids: string[];
  texts: string[];
}

export interface Histogram {
  bin_edges: number[];
  counts: number[];
}

export interface RoundInfo {
  round: number;
  labelled: number;
  tuned: boolean;
  C: number;
}

export interface StatusResponse {
  session_id: string;
  phase: string;
  labelled: number;
  budget: number;
  corpus_size: number;
  pending_count: number;
  strategy: string;
  confidence_histogram: Histogram;
  rounds: RoundInfo[];
}

export interface ExportRow {
  id: string;
  label: Label;
  source: "human" | "machine";
  margin: number | null;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      if (body && body.detail) detail = String(body.detail);
    } catch {
      // keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

export class SessionApi {
  constructor(private baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  createSession(opts: {
    strategy?: string;
    batch_size?: number;
    budget?: number;
    seed?: number;
  } = {}): Promise<SessionSummary> {
    return fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(opts),
    }).then((res) => asJson<SessionSummary>(res));
  }

  getBatch(sessionId: string): Promise<BatchResponse> {
    return fetch(`${this.baseUrl}/sessions/${sessionId}/batch`).then((res) =>
      asJson<BatchResponse>(res)
    );
  }

  postLabels(
    sessionId: string,
    labels: Record<string, Label>
  ): Promise<StatusResponse> {
    return fetch(`${this.baseUrl}/sessions/${sessionId}/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ labels }),
    }).then((res) => asJson<StatusResponse>(res));
  }

  getStatus(sessionId: string): Promise<StatusResponse> {
    return fetch(`${this.baseUrl}/sessions/${sessionId}/status`).then((res) =>
      asJson<StatusResponse>(res)
    );
  }

  exportUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/export`;
  }

  async fetchExport(sessionId: string): Promise<ExportRow[]> {
    const res = await fetch(this.exportUrl(sessionId));
    if (!res.ok) throw new ApiError(res.status, res.statusText);
    const text = await res.text();
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as ExportRow);
  }
}
