// Typed client for the consultation service. Every status the UI shows
// originates here; the client never computes rule outcomes itself.

export interface ModelInfo {
  model: string;
  rule_count: number;
}

export interface SlotRef {
  concept: string;
  property: string;
}

export interface SureEntry {
  rule: string;
  consequent: string;
}

export interface ExpectedEntry extends SureEntry {
  unanswered: SlotRef[];
}

export interface ExcludedEntry {
  rule: string;
  violated: SlotRef[];
}

export interface Evaluation {
  sure: SureEntry[];
  expected: ExpectedEntry[];
  excluded: ExcludedEntry[];
  kb_version: number;
}

export interface Question extends SlotRef {
  values: string[];
}

export interface SessionStart {
  session_id: string;
  kb_version: number;
  model: string;
  evaluation: Evaluation;
  next_questions: Question[];
}

export interface FindingUpdate {
  evaluation: Evaluation;
  next_questions: Question[];
}

export interface LintViolation {
  severity: string;
  code: string;
  model: string;
  rule: string;
  finding: number;
  token: string;
  suggestions: string[];
}

export interface LintReport {
  violations: LintViolation[];
  counts: Record<string, number>;
}

export interface KbDocument {
  text: string;
  etag: string | null;
  version: string | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: Record<string, unknown>,
  ) {
    super(typeof body.detail === "string" ? body.detail : `HTTP ${status}`);
  }

  get code(): string {
    return typeof this.body.error === "string" ? this.body.error : "Error";
  }
}

async function asError(response: Response): Promise<ApiError> {
  let body: Record<string, unknown> = {};
  try {
    body = (await response.json()) as Record<string, unknown>;
  } catch {
    // non-JSON error body: keep the status only
  }
  return new ApiError(response.status, body);
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.url(path), init);
    if (!response.ok) throw await asError(response);
    return (await response.json()) as T;
  }

  models(): Promise<ModelInfo[]> {
    return this.json("/api/v1/models");
  }

  createSession(model: string): Promise<SessionStart> {
    return this.json("/api/v1/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ model }),
    });
  }

  assertFinding(sessionId: string, slot: SlotRef, value: string): Promise<FindingUpdate> {
    return this.json(`/api/v1/sessions/${encodeURIComponent(sessionId)}/findings`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ concept: slot.concept, property: slot.property, value }),
    });
  }

  retractFinding(sessionId: string, slot: SlotRef): Promise<FindingUpdate> {
    const concept = encodeURIComponent(slot.concept);
    const property = encodeURIComponent(slot.property);
    return this.json(
      `/api/v1/sessions/${encodeURIComponent(sessionId)}/findings/${concept}?property=${property}`,
      { method: "DELETE" },
    );
  }

  async explanation(sessionId: string, rule: string): Promise<string> {
    const path = `/api/v1/sessions/${encodeURIComponent(sessionId)}/explanation?rule=${encodeURIComponent(rule)}`;
    const response = await fetch(this.url(path));
    if (!response.ok) throw await asError(response);
    return response.text();
  }

  async getDocument(kind: "ontology" | "rules"): Promise<KbDocument> {
    const response = await fetch(this.url(`/api/v1/kb/${kind}`));
    if (!response.ok) throw await asError(response);
    return {
      text: await response.text(),
      etag: response.headers.get("ETag"),
      version: response.headers.get("X-Kb-Version"),
    };
  }

  async putDocument(
    kind: "ontology" | "rules",
    text: string,
    token: string,
    etag: string | null,
  ): Promise<string | null> {
    const headers: Record<string, string> = { "Content-Type": "application/xml" };
    if (token) headers["Authorization"] = `Bearer ${token}`;
    if (etag) headers["If-Match"] = etag;
    const response = await fetch(this.url(`/api/v1/kb/${kind}`), {
      method: "PUT",
      headers,
      body: text,
    });
    if (!response.ok) throw await asError(response);
    return response.headers.get("X-Kb-Version");
  }

  lint(): Promise<LintReport> {
    return this.json("/api/v1/kb/lint", { method: "POST" });
  }
}
