import { describe, expect, it } from "vitest";

import {
  escapeHtml,
  renderError,
  renderExplain,
  renderExplainUnavailable,
  renderHistory,
  renderResults,
} from "../src/render.js";

function rows(n: number) {
  return Array.from({ length: n }, (_, i) => ({
    article_id: `a${i}`,
    title: `Title ${i}`,
    year: 2000 + i,
    distance: i * 0.5,
    rank: i + 1,
  }));
}

describe("renderResults", () => {
  it("renders one row per result, in response order", () => {
    const html = renderResults(rows(5));
    const matches = [...html.matchAll(/class="result-row" data-candidate="(a\d+)"/g)];
    expect(matches.map((m) => m[1])).toEqual(["a0", "a1", "a2", "a3", "a4"]);
  });

  it("shows rank, year and distance", () => {
    const html = renderResults(rows(2));
    expect(html).toContain('<td class="rank">1</td>');
    expect(html).toContain('<td class="year">2001</td>');
    expect(html).toContain("0.5000");
  });

  it("escapes titles", () => {
    const html = renderResults([
      { article_id: "x", title: "<script>alert(1)</script>", year: null, distance: 0, rank: 1 },
    ]);
    expect(html).not.toContain("<script>alert");
    expect(html).toContain("&lt;script&gt;");
  });

  it("handles an empty pool", () => {
    expect(renderResults([])).toContain("No candidates");
  });
});

describe("renderExplain", () => {
  const base = {
    candidate_id: "a1",
    candidate_year: 2005,
    query_year: 2015,
    delta_t: 10,
    jaccard: 0.37,
    distance: 1.25,
    rank: 4,
    outside_year_filter: false,
  };

  it("bar width is proportional to the overlap", () => {
    expect(renderExplain(base)).toContain('style="width: 37%"');
    expect(renderExplain({ ...base, jaccard: 1.0 })).toContain('style="width: 100%"');
    expect(renderExplain({ ...base, jaccard: 0.0 })).toContain('style="width: 0%"');
  });

  it("shows the year gap and rank", () => {
    const html = renderExplain(base);
    expect(html).toContain('class="delta-t">10<');
    expect(html).toContain('class="rank">4<');
  });

  it("flags candidates outside the year filter", () => {
    const html = renderExplain({ ...base, outside_year_filter: true, rank: null });
    expect(html).toContain("outside year filter");
  });

  it("renders a zero year gap as 0, not as missing", () => {
    expect(renderExplain({ ...base, delta_t: 0 })).toContain('class="delta-t">0<');
    expect(renderExplain({ ...base, delta_t: null })).toContain('class="delta-t">n/a<');
  });

  it("has a fallback panel for missing candidates", () => {
    expect(renderExplainUnavailable()).toContain("candidate unavailable");
  });
});

describe("renderError", () => {
  it("offers retry only for retryable failures", () => {
    expect(renderError("server down", true)).toContain('class="retry"');
    expect(renderError("bad input", false)).not.toContain('class="retry"');
  });
});

describe("renderHistory", () => {
  it("is empty-safe (restore control absent)", () => {
    const html = renderHistory([]);
    expect(html).not.toContain("restore");
  });

  it("lists entries with restore buttons", () => {
    const html = renderHistory([
      {
        id: 3,
        form: { title: "t", abstract: "a", topicSentence: "topic", k: 5, maxYear: null },
        response: { results: [], model_version: "v", latency_ms: 0 },
      },
    ]);
    expect(html).toContain('data-entry="3"');
    expect(html).toContain("topic");
  });
});

describe("escapeHtml", () => {
  it("escapes the four risky characters", () => {
    expect(escapeHtml('<a href="x">&</a>')).toBe("&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;");
  });
});
