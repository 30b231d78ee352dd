import type { Controller } from "./controller";
import { el, kbText, sanitizeFragment } from "./dom";
import { t, type Locale } from "./i18n";
import type { AppState } from "./state";

function button(label: string, cls: string, onClick: () => void, attrs: Record<string, string> = {}) {
  const node = el("button", { class: cls, type: "button", ...attrs }, label);
  node.addEventListener("click", onClick);
  return node;
}

// -- regulation picker --------------------------------------------------------

export function renderPicker(state: AppState, ctl: Controller): HTMLElement {
  const locale = state.locale;
  const pane = el("section", { class: "picker" });
  pane.append(el("h2", {}, t(locale, "pickRegulation")));
  if (state.modelsError) {
    pane.append(
      el(
        "div",
        { class: "banner error", role: "alert" },
        t(locale, "loadFailed"),
        " ",
        button(t(locale, "retry"), "retry", () => void ctl.loadModels()),
      ),
    );
  }
  if (state.models && state.models.length === 0) {
    pane.append(el("p", { class: "empty" }, t(locale, "noModels")));
  }
  if (state.models && state.models.length > 0) {
    const list = el("ul", { class: "model-list" });
    for (const info of state.models) {
      const item = el("li", {});
      const pick = button("", "model-button", () => void ctl.pickRegulation(info.model), {
        "data-model": info.model,
      });
      pick.append(kbText("span", info.model), el("small", {}, ` ${info.rule_count} ${t(locale, "rules")}`));
      item.append(pick);
      list.append(item);
    }
    pane.append(list);
  }
  return pane;
}

// -- wizard ---------------------------------------------------------------------

function renderQuestion(state: AppState, ctl: Controller, locale: Locale): HTMLElement {
  const card = el("section", { class: "question-card" });
  card.append(el("h2", {}, t(locale, "question")));
  const question = state.questions[0];
  if (!question) {
    card.append(el("p", { class: "empty" }, t(locale, "noQuestions")));
    return card;
  }
  card.append(kbText("h3", question.concept, "question-concept"));
  if (question.values.length > 0) {
    const choices = el("div", { class: "choices" });
    for (const value of question.values) {
      choices.append(
        button("", "choice", () => void ctl.answerCurrent(value), { "data-value": value, dir: "rtl", lang: "ar" }),
      );
      (choices.lastChild as HTMLElement).textContent = value;
    }
    card.append(choices);
  } else {
    const input = el("input", {
      class: "free-answer",
      dir: "rtl",
      lang: "ar",
      placeholder: t(locale, "freeAnswer"),
    });
    const submit = button(t(locale, "submit"), "submit-answer", () => {
      if (input.value.trim()) void ctl.answerCurrent(input.value.trim());
    });
    card.append(el("div", { class: "free-row" }, input, submit));
  }
  if (state.answerError) {
    card.append(el("p", { class: "field-error", role: "alert" }, state.answerError));
  }
  return card;
}

function renderAnswers(state: AppState, ctl: Controller, locale: Locale): HTMLElement {
  const pane = el("section", { class: "answers" });
  pane.append(el("h2", {}, t(locale, "answered")));
  const list = el("ul", {});
  for (const answer of state.answers) {
    const item = el("li", { class: "answer" });
    item.append(
      kbText("span", answer.concept, "answer-concept"),
      " ← ",
      kbText("span", answer.value, "answer-value"),
      " ",
      button(t(locale, "change"), "revise", () => void ctl.reviseAnswer(answer), {
        "data-concept": answer.concept,
      }),
    );
    list.append(item);
  }
  pane.append(list);
  return pane;
}

function resultsBlock(
  title: string,
  cls: string,
  entries: { rule: string; label: string }[],
  locale: Locale,
  ctl: Controller,
): HTMLElement {
  const block = el("section", { class: `results-block ${cls}` });
  block.append(el("h2", {}, title));
  if (entries.length === 0) {
    block.append(el("p", { class: "empty" }, t(locale, "none")));
    return block;
  }
  const list = el("ul", {});
  for (const entry of entries) {
    const item = el("li", {});
    item.append(
      kbText("span", entry.label, "consequent"),
      " ",
      button(t(locale, "explain"), "explain", () => void ctl.viewExplanation(entry.rule), {
        "data-rule": entry.rule,
      }),
    );
    list.append(item);
  }
  block.append(list);
  return block;
}

function renderResults(state: AppState, ctl: Controller, locale: Locale): HTMLElement {
  const pane = el("section", { class: "results" });
  const evaluation = state.evaluation;
  if (!evaluation) return pane;
  pane.append(
    resultsBlock(
      t(locale, "sure"),
      "sure",
      evaluation.sure.map((e) => ({ rule: e.rule, label: e.consequent })),
      locale,
      ctl,
    ),
    resultsBlock(
      t(locale, "expected"),
      "expected",
      evaluation.expected.map((e) => ({ rule: e.rule, label: e.consequent })),
      locale,
      ctl,
    ),
    resultsBlock(
      t(locale, "excluded"),
      "excluded",
      evaluation.excluded.map((e) => ({ rule: e.rule, label: e.rule })),
      locale,
      ctl,
    ),
  );
  return pane;
}

function renderExplanation(state: AppState, ctl: Controller, locale: Locale): HTMLElement | null {
  if (state.explanationError) {
    return el("aside", { class: "explanation" }, el("p", { class: "field-error" }, state.explanationError));
  }
  if (!state.explanation) return null;
  const pane = el("aside", { class: "explanation", dir: "rtl" });
  pane.append(
    el(
      "header",
      { class: "explanation-header" },
      el("h2", {}, t(locale, "explanationTitle")),
      button(t(locale, "close"), "close-explanation", () => ctl.closeExplanation()),
    ),
  );
  const body = el("div", { class: "explanation-body" });
  body.append(sanitizeFragment(state.explanation.html));
  pane.append(body);
  return pane;
}

export function renderWizard(state: AppState, ctl: Controller): HTMLElement {
  const locale = state.locale;
  const pane = el("section", { class: "wizard" });
  if (!state.session) return pane;
  const heading = el("header", { class: "wizard-header" });
  heading.append(
    kbText("h3", state.session.model, "wizard-model"),
    button(t(locale, "backToPicker"), "back", () => ctl.leaveWizard()),
  );
  pane.append(heading);
  const columns = el("div", { class: "wizard-columns" });
  columns.append(renderQuestion(state, ctl, locale), renderAnswers(state, ctl, locale), renderResults(state, ctl, locale));
  pane.append(columns);
  const explanation = renderExplanation(state, ctl, locale);
  if (explanation) pane.append(explanation);
  return pane;
}

// -- admin ------------------------------------------------------------------------

function docCard(
  kind: "ontology" | "rules",
  title: string,
  state: AppState,
  ctl: Controller,
  locale: Locale,
): HTMLElement {
  const doc = state.admin.docs[kind];
  const card = el("section", { class: `doc-card doc-${kind}` });
  card.append(el("h3", {}, title));
  const area = el("textarea", { class: "doc-text", dir: "rtl", lang: "ar", rows: "10" });
  area.value = doc?.text ?? "";
  area.addEventListener("input", () => ctl.editDocument(kind, area.value));
  card.append(
    el(
      "div",
      { class: "doc-actions" },
      button(t(locale, "load"), "load-doc", () => void ctl.loadDocument(kind), { "data-kind": kind }),
      button(t(locale, "upload"), "upload-doc", () => void ctl.uploadDocument(kind), { "data-kind": kind }),
    ),
    area,
  );
  return card;
}

export function renderAdmin(state: AppState, ctl: Controller): HTMLElement {
  const locale = state.locale;
  const pane = el("section", { class: "admin" });
  const token = el("input", { class: "admin-token", type: "password", placeholder: t(locale, "adminToken") });
  token.value = state.admin.token;
  token.addEventListener("input", () => ctl.setToken(token.value));
  pane.append(el("label", { class: "token-row" }, t(locale, "adminToken"), " ", token));

  pane.append(docCard("ontology", t(locale, "ontologyDoc"), state, ctl, locale));
  pane.append(docCard("rules", t(locale, "rulesDoc"), state, ctl, locale));

  if (state.admin.notice) {
    pane.append(
      el("p", { class: "banner ok", role: "status" }, `${t(locale, "uploadOk")} ${state.admin.notice}`),
    );
  }
  if (state.admin.error === "EtagMismatch") {
    pane.append(el("p", { class: "banner error conflict" }, t(locale, "conflict")));
  } else if (state.admin.error === "Unauthorized") {
    pane.append(el("p", { class: "banner error" }, t(locale, "unauthorized")));
  } else if (state.admin.error) {
    pane.append(el("p", { class: "banner error" }, state.admin.error));
  }
  if (state.admin.issuePaths.length > 0) {
    const list = el("ul", { class: "issue-list" });
    for (const line of state.admin.issuePaths) list.append(el("li", {}, line));
    pane.append(el("section", { class: "issues" }, el("h3", {}, t(locale, "issues")), list));
  }

  pane.append(button(t(locale, "runLint"), "run-lint", () => void ctl.runLint()));
  if (state.admin.lint) {
    const report = el("section", { class: "lint-report" });
    const codes = Object.keys(state.admin.lint.counts).sort();
    if (codes.length === 0) {
      report.append(el("p", { class: "banner ok" }, t(locale, "lintClean")));
    }
    for (const code of codes) {
      const group = el("section", { class: "lint-group", "data-code": code });
      group.append(el("h4", {}, `${code} (${state.admin.lint.counts[code]})`));
      const list = el("ul", {});
      for (const line of state.admin.lint.lines.filter((l) => l.startsWith(code + ":"))) {
        list.append(el("li", { dir: "auto" }, line));
      }
      group.append(list);
      report.append(group);
    }
    pane.append(report);
  }
  return pane;
}

// -- shell -------------------------------------------------------------------------

export function renderApp(state: AppState, ctl: Controller): HTMLElement {
  const locale = state.locale;
  const root = el("div", { class: "app", dir: locale === "ar" ? "rtl" : "ltr", lang: locale });
  const header = el("header", { class: "app-header" });
  header.append(el("h1", {}, t(locale, "title")));
  const nav = el("nav", {});
  nav.append(
    button(t(locale, "consult"), state.view !== "admin" ? "nav-consult active" : "nav-consult", () =>
      ctl.showConsult(),
    ),
    button(t(locale, "admin"), state.view === "admin" ? "nav-admin active" : "nav-admin", () =>
      ctl.showAdmin(),
    ),
    button(locale === "ar" ? "EN" : "ع", "locale-toggle", () =>
      ctl.setLocale(locale === "ar" ? "en" : "ar"),
    ),
  );
  header.append(nav);
  root.append(header);
  if (state.pending) root.append(el("div", { class: "pending", role: "status" }, t(locale, "pending")));
  const main = el("main", {});
  if (state.view === "picker") main.append(renderPicker(state, ctl));
  else if (state.view === "wizard") main.append(renderWizard(state, ctl));
  else main.append(renderAdmin(state, ctl));
  root.append(main);
  return root;
}
