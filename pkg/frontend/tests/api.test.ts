import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

const MODEL_BODY = {
  fingerprint: "a".repeat(64),
  started_at: 0,
  rows: 401,
  threshold: 0.5,
  class: { column: "outcome", positive: "malignant", negative: "benign" },
  variables: [],
  stats: { rows: 401, realisations: 160, mean_rows_per_realisation: 2.5, nonzero_leaves: 129 },
};

describe("request plumbing", () => {
  it("posts JSON bodies with the right content type", async () => {
    const fetchImpl = vi.fn(async (url: string, init?: RequestInit) => {
      expect(url).toBe("http://svc/predict");
      expect(init?.method).toBe("POST");
      expect((init?.headers as Record<string, string>)["content-type"]).toBe("application/json");
      expect(JSON.parse(String(init?.body))).toEqual({ statements: {}, raw_values: {} });
      return jsonResponse({ fingerprint: "a".repeat(64), p0: 0.5, p1: 0.5 });
    });
    const client = new ApiClient("http://svc", fetchImpl);
    await client.predict({ statements: {}, raw_values: {} });
    expect(fetchImpl).toHaveBeenCalledOnce();
  });

  it("builds fuzzy query strings with at and case", async () => {
    const fetchImpl = vi.fn(async (url: string) => {
      expect(url).toBe("http://svc/fuzzy/anemia?at=11.5&case=F");
      return jsonResponse({ fingerprint: "a".repeat(64) });
    });
    await new ApiClient("http://svc", fetchImpl).fuzzy("anemia", { at: 11.5, caseValue: "F" });
  });
});

describe("fingerprint tracking", () => {
  it("flags any response whose fingerprint differs from the loaded model", async () => {
    const bodies = [
      MODEL_BODY,
      { fingerprint: "a".repeat(64), p0: 0.5, p1: 0.5 },
      { fingerprint: "b".repeat(64), p0: 0.5, p1: 0.5 },
    ];
    const fetchImpl = vi.fn(async () => jsonResponse(bodies.shift()));
    const client = new ApiClient("http://svc", fetchImpl);
    const seen: string[] = [];
    client.onFingerprintChange = (next) => seen.push(next);

    await client.model();
    await client.predict({ statements: {}, raw_values: {} });
    expect(client.fingerprintChanged).toBe(false);

    await client.predict({ statements: {}, raw_values: {} });
    expect(client.fingerprintChanged).toBe(true);
    expect(seen).toEqual(["b".repeat(64)]);
  });

  it("accepting the new fingerprint clears the flag", async () => {
    const fetchImpl = vi
      .fn()
      .mockResolvedValueOnce(jsonResponse(MODEL_BODY))
      .mockResolvedValueOnce(jsonResponse({ fingerprint: "b".repeat(64) }));
    const client = new ApiClient("http://svc", fetchImpl);
    await client.model();
    await client.predict({ statements: {}, raw_values: {} });
    expect(client.fingerprintChanged).toBe(true);
    client.acceptFingerprint("b".repeat(64));
    expect(client.fingerprintChanged).toBe(false);
  });
});

describe("error mapping", () => {
  it("409 becomes an undefined-conditional error carrying the conditions", async () => {
    const fetchImpl = vi.fn(async () =>
      jsonResponse(
        {
          detail: {
            error: "conditional probability undefined: P(...) = 0",
            conditions: [["tirads", "TIR5"], ["sex", "F"]],
          },
        },
        409,
      ),
    );
    const client = new ApiClient("http://svc", fetchImpl);
    const err = await client
      .predict({ statements: {}, raw_values: {} })
      .then(() => null, (e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).kind).toBe("undefined-conditional");
    expect((err as ApiError).conditions).toEqual([
      ["tirads", "TIR5"],
      ["sex", "F"],
    ]);
  });

  it("422 becomes a validation error with field locations", async () => {
    const fetchImpl = vi.fn(async () =>
      jsonResponse(
        { detail: [{ loc: ["body", "large_nodule"], msg: "unknown value", type: "QueryError" }] },
        422,
      ),
    );
    const err = await new ApiClient("http://svc", fetchImpl)
      .predict({ statements: {}, raw_values: {} })
      .then(() => null, (e: unknown) => e);
    expect((err as ApiError).kind).toBe("validation");
    expect((err as ApiError).fieldErrors[0].loc).toEqual(["body", "large_nodule"]);
    expect((err as ApiError).message).toContain("unknown value");
  });

  it("other failing statuses become http errors with the status kept", async () => {
    const fetchImpl = vi.fn(async () => jsonResponse({ detail: "no job eval-9" }, 404));
    const err = await new ApiClient("http://svc", fetchImpl)
      .evaluationStatus("eval-9")
      .then(() => null, (e: unknown) => e);
    expect((err as ApiError).kind).toBe("http");
    expect((err as ApiError).status).toBe(404);
  });

  it("a rejected fetch is a network error", async () => {
    const fetchImpl = vi.fn(async () => {
      throw new TypeError("fetch failed");
    });
    const err = await new ApiClient("http://svc", fetchImpl)
      .model()
      .then(() => null, (e: unknown) => e);
    expect((err as ApiError).kind).toBe("network");
    expect((err as ApiError).message).toContain("unreachable");
  });
});
