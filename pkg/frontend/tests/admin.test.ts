import { beforeEach, describe, expect, it } from "vitest";

import { installMockFetch, mountApp, type RecordedCall } from "./helpers";

const ONTOLOGY_XML = '<KSA_Civil_Ontology/>\n';

beforeEach(() => {
  document.body.innerHTML = "";
});

async function openAdmin() {
  const app = mountApp();
  await app.idle();
  await app.click(".nav-admin");
  return app;
}

describe("knowledge admin", () => {
  it("loads a document with its ETag and uploads it back with headers", async () => {
    const calls: RecordedCall[] = installMockFetch((call) => {
      if (call.url.endsWith("/api/v1/models")) return { json: [] };
      if (call.url.endsWith("/api/v1/kb/ontology") && call.method === "GET") {
        return {
          text: ONTOLOGY_XML,
          headers: { ETag: '"abc123"', "X-Kb-Version": "1" },
        };
      }
      if (call.url.endsWith("/api/v1/kb/ontology") && call.method === "PUT") {
        return { status: 204, headers: { ETag: '"def456"', "X-Kb-Version": "2" } };
      }
      return undefined;
    });
    const app = await openAdmin();
    app.find(".admin-token").dispatchEvent(new Event("input"));
    (app.find(".admin-token") as HTMLInputElement).value = "sekrit";
    app.find(".admin-token").dispatchEvent(new Event("input"));

    await app.click('.load-doc[data-kind="ontology"]');
    expect((app.find(".doc-ontology .doc-text") as HTMLTextAreaElement).value).toBe(ONTOLOGY_XML);

    await app.click('.upload-doc[data-kind="ontology"]');
    const put = calls.find((c) => c.method === "PUT");
    expect(put).toBeDefined();
    expect(put!.headers["authorization"]).toBe("Bearer sekrit");
    expect(put!.headers["if-match"]).toBe('"abc123"');
    // version bump shown
    expect(app.find(".banner.ok").textContent).toContain("2");
  });

  it("renders 401 as a bad-token message", async () => {
    installMockFetch((call) => {
      if (call.url.endsWith("/api/v1/models")) return { json: [] };
      if (call.method === "GET") return { text: ONTOLOGY_XML, headers: { ETag: '"x"' } };
      if (call.method === "PUT") {
        return { status: 401, json: { error: "Unauthorized", detail: "missing or bad admin token" } };
      }
      return undefined;
    });
    const app = await openAdmin();
    await app.click('.load-doc[data-kind="ontology"]');
    await app.click('.upload-doc[data-kind="ontology"]');
    expect(app.root.querySelector(".banner.error")).not.toBeNull();
  });

  it("renders a stale ETag as a conflict prompt", async () => {
    installMockFetch((call) => {
      if (call.url.endsWith("/api/v1/models")) return { json: [] };
      if (call.method === "GET") return { text: ONTOLOGY_XML, headers: { ETag: '"x"' } };
      if (call.method === "PUT") {
        return { status: 409, json: { error: "EtagMismatch", detail: "changed underneath you" } };
      }
      return undefined;
    });
    const app = await openAdmin();
    await app.click('.load-doc[data-kind="ontology"]');
    await app.click('.upload-doc[data-kind="ontology"]');
    expect(app.root.querySelector(".banner.conflict")).not.toBeNull();
  });

  it("lists issue paths from a rejected document", async () => {
    installMockFetch((call) => {
      if (call.url.endsWith("/api/v1/models")) return { json: [] };
      if (call.method === "GET") return { text: "<KSA_Civil_Regulation/>\n", headers: { ETag: '"x"' } };
      if (call.method === "PUT") {
        return {
          status: 422,
          json: {
            error: "ParseFailed",
            detail: "the rules document does not parse",
            issues: [
              {
                severity: "error",
                path: "/KSA_Civil_Regulation/Model[1]/Rule[1]",
                code: "EmptyRule",
                message: "rule R1 has no <Finding>",
              },
            ],
          },
        };
      }
      return undefined;
    });
    const app = await openAdmin();
    await app.click('.load-doc[data-kind="rules"]');
    await app.click('.upload-doc[data-kind="rules"]');
    const issues = app.find(".issue-list");
    expect(issues.textContent).toContain("/KSA_Civil_Regulation/Model[1]/Rule[1]");
    expect(issues.textContent).toContain("EmptyRule");
  });

  it("groups the lint report by code", async () => {
    installMockFetch((call) => {
      if (call.url.endsWith("/api/v1/models")) return { json: [] };
      if (call.url.endsWith("/api/v1/kb/lint")) {
        return {
          json: {
            violations: [
              {
                severity: "error",
                code: "UnknownConcept",
                model: "إنهاء الخدمة",
                rule: "R1",
                finding: 1,
                token: "الإستقالة",
                suggestions: [],
              },
              {
                severity: "error",
                code: "UnknownConcept",
                model: "إنهاء الخدمة",
                rule: "R2",
                finding: 1,
                token: "طلب الإحالة",
                suggestions: [],
              },
            ],
            counts: { UnknownConcept: 2 },
          },
        };
      }
      return undefined;
    });
    const app = await openAdmin();
    await app.click(".run-lint");
    const group = app.find('.lint-group[data-code="UnknownConcept"]');
    expect(group.querySelector("h4")!.textContent).toContain("UnknownConcept (2)");
    expect(group.querySelectorAll("li")).toHaveLength(2);
  });

  it("reports a clean lint run", async () => {
    installMockFetch((call) => {
      if (call.url.endsWith("/api/v1/models")) return { json: [] };
      if (call.url.endsWith("/api/v1/kb/lint")) return { json: { violations: [], counts: {} } };
      return undefined;
    });
    const app = await openAdmin();
    await app.click(".run-lint");
    expect(app.find(".lint-report .banner.ok")).toBeDefined();
  });
});
