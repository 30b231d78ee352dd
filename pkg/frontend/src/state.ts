import type { Evaluation, ModelInfo, Question, SlotRef } from "./api";
import type { Locale } from "./i18n";

export interface Answer extends SlotRef {
  value: string;
}

export interface AdminDoc {
  text: string;
  etag: string | null;
}

export interface AdminState {
  token: string;
  docs: { ontology: AdminDoc | null; rules: AdminDoc | null };
  notice: string | null;
  error: string | null;
  issuePaths: string[];
  lint: { counts: Record<string, number>; lines: string[] } | null;
}

export interface AppState {
  locale: Locale;
  view: "picker" | "wizard" | "admin";
  pending: boolean;
  models: ModelInfo[] | null;
  modelsError: boolean;
  session: { id: string; model: string; kbVersion: number } | null;
  evaluation: Evaluation | null;
  questions: Question[];
  answers: Answer[];
  answerError: string | null;
  explanation: { rule: string; html: string } | null;
  explanationError: string | null;
  admin: AdminState;
}

export const initialState: AppState = {
  locale: "ar",
  view: "picker",
  pending: false,
  models: null,
  modelsError: false,
  session: null,
  evaluation: null,
  questions: [],
  answers: [],
  answerError: null,
  explanation: null,
  explanationError: null,
  admin: {
    token: "",
    docs: { ontology: null, rules: null },
    notice: null,
    error: null,
    issuePaths: [],
    lint: null,
  },
};

export class Store {
  private listeners = new Set<(state: AppState) => void>();

  constructor(private state: AppState = initialState) {}

  get(): AppState {
    return this.state;
  }

  set(patch: Partial<AppState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  subscribe(listener: (state: AppState) => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }
}
