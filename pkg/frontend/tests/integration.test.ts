/**
 * Live-service flow. Skipped unless PARACITE_SERVICE_URL points at a
 * running service (see README for starting one on the synthetic
 * corpus). Exercises the same path the browser uses: Session over
 * ApiClient over real fetch, rendered to HTML.
 */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderExplain, renderResults } from "../src/render.js";
import { Session } from "../src/state.js";

const SERVICE_URL = process.env.PARACITE_SERVICE_URL;

describe.skipIf(!SERVICE_URL)("live service flow", () => {
  const api = new ApiClient(SERVICE_URL ?? "");
  const form = {
    title: "sample article about ranking",
    abstract: "an abstract mentioning retrieval and embeddings",
    topicSentence: "prior work studied paragraph level recommendation",
    k: 5,
    maxYear: null,
  };

  it("renders exactly k rows in the API's order", async () => {
    const session = new Session(api);
    const outcome = await session.submit(form);
    expect(outcome.kind).toBe("ok");
    if (outcome.kind !== "ok") return;
    const direct = await api.recommend({
      title: form.title,
      abstract: form.abstract,
      topic_sentence: form.topicSentence,
      k: form.k,
      max_year: form.maxYear,
    });
    expect(outcome.response.results.map((r) => r.article_id)).toEqual(
      direct.results.map((r) => r.article_id),
    );
    const html = renderResults(outcome.response.results);
    const rendered = [...html.matchAll(/class="result-row" data-candidate="([^"]+)"/g)].map(
      (m) => m[1],
    );
    expect(rendered).toEqual(direct.results.map((r) => r.article_id));
    expect(rendered).toHaveLength(form.k);
  });

  it("blocks an empty topic sentence before any request", async () => {
    const session = new Session(api);
    const outcome = await session.submit({ ...form, topicSentence: "  " });
    expect(outcome.kind).toBe("error");
    expect(session.history).toHaveLength(0);
  });

  it("inspect panel shows the same delta-t and jaccard as the API", async () => {
    const session = new Session(api);
    const outcome = await session.submit(form);
    expect(outcome.kind).toBe("ok");
    if (outcome.kind !== "ok") return;
    const candidate = outcome.response.results[0]!.article_id;
    const viaSession = await session.explain(form, candidate);
    const direct = await api.explain({
      candidate_id: candidate,
      title: form.title,
      abstract: form.abstract,
      topic_sentence: form.topicSentence,
      max_year: form.maxYear,
    });
    expect(viaSession.delta_t).toBe(direct.delta_t);
    expect(viaSession.jaccard).toBeCloseTo(direct.jaccard, 12);
    const html = renderExplain(viaSession);
    expect(html).toContain(direct.jaccard.toFixed(4));
  });
});
