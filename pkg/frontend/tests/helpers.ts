import { ApiClient, type Evaluation, type Question } from "../src/api";
import { Controller } from "../src/controller";
import { Store } from "../src/state";
import { renderApp } from "../src/views";

export const MODEL = "إنهاء الخدمة";
export const R1_CONCEPT = "الإستقالة";
export const R1_VALUE = "تقديم الإستقالة وقبولها";
export const R1_OTHER = "لم تقدم الإستقالة";
export const R1_CONSEQUENT = "إنهاء الخدمة بالإستقالة";
export const R2_CONCEPT = "طلب الإحالة على التقاعد قبل بلوغ السن النظامية";
export const R2_VALUE = "تقديم الطلب قبل بلوغ السن النظامية وقبوله";
export const R2_CONSEQUENT = "إنهاء الخدمة بطلب الإحالة على التقاعد";

export const QUESTION_1: Question = {
  concept: R1_CONCEPT,
  property: "Value",
  values: [R1_VALUE, R1_OTHER],
};

export const QUESTION_2: Question = {
  concept: R2_CONCEPT,
  property: "Value",
  values: [R2_VALUE],
};

export const FRESH_EVALUATION: Evaluation = {
  sure: [],
  expected: [
    { rule: "R1", consequent: R1_CONSEQUENT, unanswered: [{ concept: R1_CONCEPT, property: "Value" }] },
    { rule: "R2", consequent: R2_CONSEQUENT, unanswered: [{ concept: R2_CONCEPT, property: "Value" }] },
  ],
  excluded: [],
  kb_version: 1,
};

export const AFTER_R1_EVALUATION: Evaluation = {
  sure: [{ rule: "R1", consequent: R1_CONSEQUENT }],
  expected: [
    { rule: "R2", consequent: R2_CONSEQUENT, unanswered: [{ concept: R2_CONCEPT, property: "Value" }] },
  ],
  excluded: [],
  kb_version: 1,
};

export const R1_TRACE_HTML = [
  '<section class="trace trace-sure" dir="rtl">',
  `<h3>${R1_CONSEQUENT}</h3>`,
  "<table>",
  "<thead><tr><th>concept</th><th>property</th><th>required</th><th>observed</th><th>satisfied</th></tr></thead>",
  "<tbody>",
  `<tr><td>${R1_CONCEPT}</td><td>Value</td><td class="required">= ${R1_VALUE}</td><td class="observed">${R1_VALUE}</td><td class="satisfied">✓</td></tr>`,
  "</tbody>",
  "</table>",
  '<p class="status status-sure">R1: sure</p>',
  "</section>",
].join("\n");

export interface MockReply {
  status?: number;
  json?: unknown;
  text?: string;
  headers?: Record<string, string>;
}

export interface RecordedCall {
  method: string;
  url: string;
  body: string | null;
  headers: Record<string, string>;
}

export type MockHandler = (call: RecordedCall) => MockReply | undefined;

export function installMockFetch(handler: MockHandler): RecordedCall[] {
  const calls: RecordedCall[] = [];
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = typeof input === "string" ? input : input instanceof URL ? input.href : input.url;
    const call: RecordedCall = {
      method: init?.method ?? "GET",
      url,
      body: typeof init?.body === "string" ? init.body : null,
      headers: Object.fromEntries(new Headers(init?.headers ?? {}).entries()),
    };
    calls.push(call);
    const reply = handler(call);
    if (!reply) {
      return new Response(JSON.stringify({ error: "NotFound", detail: url }), { status: 404 });
    }
    const status = reply.status ?? 200;
    const body = reply.json !== undefined ? JSON.stringify(reply.json) : (reply.text ?? "");
    return new Response([204, 205, 304].includes(status) ? null : body, {
      status,
      headers: reply.headers ?? {},
    });
  }) as typeof fetch;
  return calls;
}

export interface Harness {
  root: HTMLElement;
  store: Store;
  controller: Controller;
  idle: () => Promise<void>;
  click: (selector: string) => Promise<void>;
  text: () => string;
  html: () => string;
  find: (selector: string) => HTMLElement;
}

export function mountApp(base = ""): Harness {
  const root = document.createElement("div");
  document.body.innerHTML = "";
  document.body.append(root);
  const store = new Store();
  const controller = new Controller(store, new ApiClient(base));
  const sync = () => {
    root.innerHTML = "";
    root.append(renderApp(store.get(), controller));
  };
  store.subscribe(sync);
  sync();
  void controller.loadModels();
  const idle = async () => {
    await controller.idle();
    await Promise.resolve();
  };
  const find = (selector: string): HTMLElement => {
    const node = root.querySelector<HTMLElement>(selector);
    if (!node) throw new Error(`no element matches ${selector}\n${root.innerHTML}`);
    return node;
  };
  return {
    root,
    store,
    controller,
    idle,
    find,
    click: async (selector: string) => {
      find(selector).click();
      await controller.idle();
      await Promise.resolve();
    },
    text: () => root.textContent ?? "",
    html: () => root.innerHTML,
  };
}

/** Standard happy-path transcript for the bundled termination model. */
export function wizardTranscript(overrides: Partial<Record<string, MockHandler>> = {}): MockHandler {
  const answered = new Map<string, string>();
  return (call) => {
    if (call.url.endsWith("/api/v1/models") && call.method === "GET") {
      return { json: [{ model: MODEL, rule_count: 2 }] };
    }
    if (call.url.endsWith("/api/v1/sessions") && call.method === "POST") {
      answered.clear();
      return {
        status: 201,
        json: {
          session_id: "s-1",
          kb_version: 1,
          model: MODEL,
          evaluation: FRESH_EVALUATION,
          next_questions: [QUESTION_1, QUESTION_2],
        },
      };
    }
    if (call.url.includes("/findings") && call.method === "POST") {
      const payload = JSON.parse(call.body ?? "{}");
      answered.set(payload.concept, payload.value);
      const r1Done = answered.get(R1_CONCEPT) === R1_VALUE;
      return {
        json: {
          evaluation: r1Done ? AFTER_R1_EVALUATION : FRESH_EVALUATION,
          next_questions: r1Done ? [QUESTION_2] : [QUESTION_1, QUESTION_2],
        },
      };
    }
    if (call.url.includes("/findings/") && call.method === "DELETE") {
      answered.delete(R1_CONCEPT);
      return {
        json: { evaluation: FRESH_EVALUATION, next_questions: [QUESTION_1, QUESTION_2] },
      };
    }
    if (call.url.includes("/explanation") && call.method === "GET") {
      return { text: R1_TRACE_HTML, headers: { "Content-Type": "text/html; charset=utf-8" } };
    }
    for (const handler of Object.values(overrides)) {
      const reply = handler?.(call);
      if (reply) return reply;
    }
    return undefined;
  };
}
