import { ApiClient, ApiError, type SlotRef } from "./api";
import type { Locale } from "./i18n";
import { Store, type Answer } from "./state";

// All mutations go through a single queue: one in-flight request at a time,
// and panels only ever reflect the latest completed response.
export class Controller {
  private chain: Promise<void> = Promise.resolve();

  constructor(
    readonly store: Store,
    readonly api: ApiClient,
  ) {}

  private enqueue(work: () => Promise<void>): Promise<void> {
    const safe = () => work().catch(() => undefined);
    this.chain = this.chain.then(safe);
    return this.chain;
  }

  setLocale(locale: Locale): void {
    this.store.set({ locale });
  }

  showConsult(): void {
    this.store.set({ view: this.store.get().session ? "wizard" : "picker" });
  }

  showAdmin(): void {
    this.store.set({ view: "admin" });
  }

  leaveWizard(): void {
    this.store.set({
      view: "picker",
      session: null,
      evaluation: null,
      questions: [],
      answers: [],
      answerError: null,
      explanation: null,
      explanationError: null,
    });
  }

  loadModels(): Promise<void> {
    return this.enqueue(async () => {
      this.store.set({ pending: true });
      try {
        const models = await this.api.models();
        this.store.set({ models, modelsError: false, pending: false });
      } catch {
        this.store.set({ models: null, modelsError: true, pending: false });
      }
    });
  }

  pickRegulation(model: string): Promise<void> {
    return this.enqueue(async () => {
      this.store.set({ pending: true });
      try {
        const started = await this.api.createSession(model);
        this.store.set({
          view: "wizard",
          pending: false,
          session: { id: started.session_id, model: started.model ?? model, kbVersion: started.kb_version },
          evaluation: started.evaluation,
          questions: started.next_questions,
          answers: [],
          answerError: null,
          explanation: null,
          explanationError: null,
        });
      } catch {
        this.store.set({ modelsError: true, pending: false });
      }
    });
  }

  answerCurrent(value: string): Promise<void> {
    return this.enqueue(async () => {
      const state = this.store.get();
      const question = state.questions[0];
      if (!state.session || !question) return;
      this.store.set({ pending: true });
      try {
        const update = await this.api.assertFinding(state.session.id, question, value);
        const answer: Answer = { concept: question.concept, property: question.property, value };
        const answers = state.answers
          .filter((a) => a.concept !== answer.concept || a.property !== answer.property)
          .concat(answer);
        this.store.set({
          pending: false,
          evaluation: update.evaluation,
          questions: update.next_questions,
          answers,
          answerError: null,
        });
      } catch (error) {
        this.store.set({
          pending: false,
          answerError: error instanceof ApiError ? error.message : String(error),
        });
      }
    });
  }

  reviseAnswer(slot: SlotRef): Promise<void> {
    return this.enqueue(async () => {
      const state = this.store.get();
      if (!state.session) return;
      this.store.set({ pending: true });
      try {
        const update = await this.api.retractFinding(state.session.id, slot);
        this.store.set({
          pending: false,
          evaluation: update.evaluation,
          questions: update.next_questions,
          answers: state.answers.filter(
            (a) => a.concept !== slot.concept || a.property !== slot.property,
          ),
          answerError: null,
        });
      } catch (error) {
        this.store.set({
          pending: false,
          answerError: error instanceof ApiError ? error.message : String(error),
        });
      }
    });
  }

  viewExplanation(rule: string): Promise<void> {
    return this.enqueue(async () => {
      const state = this.store.get();
      if (!state.session) return;
      this.store.set({ pending: true });
      try {
        const html = await this.api.explanation(state.session.id, rule);
        this.store.set({ pending: false, explanation: { rule, html }, explanationError: null });
      } catch (error) {
        this.store.set({
          pending: false,
          explanation: null,
          explanationError: error instanceof ApiError ? error.message : String(error),
        });
      }
    });
  }

  closeExplanation(): void {
    this.store.set({ explanation: null, explanationError: null });
  }

  // -- admin -------------------------------------------------------------

  setToken(token: string): void {
    const admin = this.store.get().admin;
    this.store.set({ admin: { ...admin, token } });
  }

  editDocument(kind: "ontology" | "rules", text: string): void {
    const admin = this.store.get().admin;
    const doc = admin.docs[kind];
    this.store.set({
      admin: { ...admin, docs: { ...admin.docs, [kind]: { text, etag: doc?.etag ?? null } } },
    });
  }

  loadDocument(kind: "ontology" | "rules"): Promise<void> {
    return this.enqueue(async () => {
      const admin = this.store.get().admin;
      this.store.set({ pending: true });
      try {
        const doc = await this.api.getDocument(kind);
        this.store.set({
          pending: false,
          admin: {
            ...admin,
            notice: null,
            error: null,
            issuePaths: [],
            docs: { ...admin.docs, [kind]: { text: doc.text, etag: doc.etag } },
          },
        });
      } catch (error) {
        this.store.set({
          pending: false,
          admin: { ...admin, error: error instanceof Error ? error.message : String(error) },
        });
      }
    });
  }

  uploadDocument(kind: "ontology" | "rules"): Promise<void> {
    return this.enqueue(async () => {
      const admin = this.store.get().admin;
      const doc = admin.docs[kind];
      if (!doc) return;
      this.store.set({ pending: true });
      try {
        const version = await this.api.putDocument(kind, doc.text, admin.token, doc.etag);
        const refreshed = await this.api.getDocument(kind);
        this.store.set({
          pending: false,
          admin: {
            ...admin,
            notice: version,
            error: null,
            issuePaths: [],
            docs: { ...admin.docs, [kind]: { text: refreshed.text, etag: refreshed.etag } },
          },
        });
      } catch (error) {
        const paths: string[] = [];
        let code = "Error";
        if (error instanceof ApiError) {
          code = error.code;
          const issues = error.body.issues;
          if (Array.isArray(issues)) {
            for (const issue of issues) {
              paths.push(`${issue.code} at ${issue.path}: ${issue.message}`);
            }
          }
          const violations = error.body.violations;
          if (Array.isArray(violations)) {
            for (const v of violations) {
              paths.push(`${v.code} ${v.model}/${v.rule}[${v.finding}]: ${v.token}`);
            }
          }
        }
        this.store.set({
          pending: false,
          admin: { ...admin, notice: null, error: code, issuePaths: paths },
        });
      }
    });
  }

  runLint(): Promise<void> {
    return this.enqueue(async () => {
      const admin = this.store.get().admin;
      this.store.set({ pending: true });
      try {
        const report = await this.api.lint();
        const lines = report.violations.map(
          (v) => `${v.code}: ${v.model} / ${v.rule} [${v.finding}] ${v.token}`,
        );
        this.store.set({
          pending: false,
          admin: { ...admin, error: null, lint: { counts: report.counts, lines } },
        });
      } catch (error) {
        this.store.set({
          pending: false,
          admin: { ...admin, error: error instanceof Error ? error.message : String(error) },
        });
      }
    });
  }

  /** Settles once every queued mutation has completed (test hook). */
  idle(): Promise<void> {
    return this.chain;
  }
}
