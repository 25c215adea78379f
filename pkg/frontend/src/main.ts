/**
 * DOM wiring: reads the form, drives a Session, renders results,
 * explain panels and history. All logic worth testing lives in
 * api.ts / state.ts / render.ts.
 */

import { ApiClient } from "./api.js";
import {
  renderError,
  renderExplain,
  renderExplainUnavailable,
  renderHealth,
  renderHistory,
  renderResults,
} from "./render.js";
import { QueryForm, Session } from "./state.js";

const api = new ApiClient("");
const session = new Session(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function readForm(): QueryForm {
  const maxYearRaw = el<HTMLInputElement>("max-year").value.trim();
  return {
    title: el<HTMLInputElement>("title").value,
    abstract: el<HTMLTextAreaElement>("abstract").value,
    topicSentence: el<HTMLTextAreaElement>("topic-sentence").value,
    k: Number(el<HTMLSelectElement>("k-select").value),
    maxYear: maxYearRaw === "" ? null : Number(maxYearRaw),
  };
}

function writeForm(form: QueryForm): void {
  el<HTMLInputElement>("title").value = form.title;
  el<HTMLTextAreaElement>("abstract").value = form.abstract;
  el<HTMLTextAreaElement>("topic-sentence").value = form.topicSentence;
  el<HTMLSelectElement>("k-select").value = String(form.k);
  el<HTMLInputElement>("max-year").value = form.maxYear === null ? "" : String(form.maxYear);
}

function refreshHistory(): void {
  el("history-box").innerHTML = renderHistory(session.history);
  for (const button of el("history-box").querySelectorAll<HTMLButtonElement>("button.restore")) {
    button.addEventListener("click", () => {
      writeForm(session.restore(Number(button.dataset.entry)));
      el("form-message").textContent = "";
    });
  }
}

function bindInspectButtons(form: QueryForm): void {
  for (const button of el("results-box").querySelectorAll<HTMLButtonElement>("button.inspect")) {
    button.addEventListener("click", async () => {
      const candidate = button.dataset.candidate ?? "";
      const panel = el("results-box").querySelector<HTMLTableRowElement>(
        `tr.panel-row[data-panel="${CSS.escape(candidate)}"]`,
      );
      if (panel === null) return;
      if (!panel.hidden) {
        panel.hidden = true;
        return;
      }
      const cell = panel.querySelector<HTMLTableCellElement>(".panel-cell");
      if (cell === null) return;
      if (cell.innerHTML === "") {
        try {
          cell.innerHTML = renderExplain(await session.explain(form, candidate));
        } catch {
          cell.innerHTML = renderExplainUnavailable();
        }
      }
      panel.hidden = false;
    });
  }
}

async function submit(): Promise<void> {
  const form = readForm();
  const message = el("form-message");
  message.textContent = "";
  const outcome = await session.submit(form);
  if (outcome.kind === "cancelled") return;
  if (outcome.kind === "error") {
    if (outcome.retryable) {
      el("results-box").innerHTML = renderError(outcome.message, true);
      el("results-box")
        .querySelector("button.retry")
        ?.addEventListener("click", () => void submit());
    } else {
      message.textContent = outcome.message;
    }
    return;
  }
  el("results-box").innerHTML = renderResults(outcome.response.results);
  bindInspectButtons(form);
  refreshHistory();
}

function bootstrap(): void {
  el("query-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void submit();
  });
  refreshHistory();
  api
    .health()
    .then((health) => {
      el("health-box").innerHTML = renderHealth(health.model_version, health.pool_size);
    })
    .catch(() => {
      el("health-box").textContent = "service unreachable";
    });
}

bootstrap();
