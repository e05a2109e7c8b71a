/** DOM glue: renders the controller state and wires user input. */

import { ReviewApi } from "./api.js";
import { ReviewController } from "./controller.js";
import type { ControllerState } from "./controller.js";
import { QUESTIONS } from "./questions.js";
import type { ReviewItem } from "./types.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? localStorage.getItem("kgx-base-url") ?? "http://127.0.0.1:8080";
localStorage.setItem("kgx-base-url", baseUrl);

const root = document.getElementById("app")!;
const api = new ReviewApi(baseUrl);
const controller = new ReviewController(api, localStorage, render, "browser-reviewer");

function esc(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

function optionRow(item: ReviewItem): string {
  return item.instance.answers
    .map((opt) => {
      const classes = ["option"];
      if (opt === item.instance.predicted_label) classes.push("predicted");
      if (opt === item.instance.label) classes.push("gold");
      return `<span class="${classes.join(" ")}">${esc(opt)}</span>`;
    })
    .join(" ");
}

function questionBlock(state: ControllerState): string {
  return QUESTIONS.map((q, idx) => {
    const selected = state.selections[q.metric];
    const preview = selected === undefined ? "&ndash;" : ((selected - 1) / 2).toFixed(1);
    const levels = ([1, 2, 3] as const)
      .map(
        (v) => `
        <label class="level ${selected === v ? "selected" : ""}" title="${esc(q.anchors[v])}">
          <input type="radio" name="${q.metric}" value="${v}" ${selected === v ? "checked" : ""}/>
          ${v}
        </label>`,
      )
      .join("");
    return `
      <fieldset class="question" data-metric="${q.metric}">
        <legend>Q${idx}: ${esc(q.text)}</legend>
        <div class="levels">${levels}<span class="preview">normalized: ${preview}</span></div>
        <details><summary>score guide</summary>
          <ol>${([1, 2, 3] as const).map((v) => `<li>${esc(q.anchors[v])}</li>`).join("")}</ol>
        </details>
      </fieldset>`;
  }).join("");
}

function render(state: ControllerState): void {
  if (state.phase === "loading") {
    root.innerHTML = `<p class="status">Loading&hellip;</p>`;
    return;
  }
  if (state.phase === "error") {
    root.innerHTML = `
      <div class="banner error">${esc(state.banner ?? "Request failed.")}
        <button id="retry">Retry</button>
      </div>`;
    document.getElementById("retry")!.onclick = () => void controller.loadNext();
    return;
  }
  if (state.phase === "empty") {
    root.innerHTML = `<p class="status">No pending items. &#127881;</p>
      <p class="muted">Reviewed this session: ${state.reviewedCount}</p>
      <button id="refresh">Check again</button>`;
    document.getElementById("refresh")!.onclick = () => void controller.loadNext();
    return;
  }
  if (state.phase === "regenerating") {
    root.innerHTML = `<p class="status">Regenerating the explanation with your notes&hellip;</p>`;
    return;
  }

  const item = state.item!;
  root.innerHTML = `
    ${state.banner ? `<div class="banner">${esc(state.banner)}</div>` : ""}
    <section class="card">
      <header>
        <span class="item-id">${esc(item.item_id)}</span>
        <span class="revision">revision ${item.revision}</span>
        <span class="muted">reviewed: ${state.reviewedCount}</span>
      </header>
      <h2>${esc(item.instance.question)}</h2>
      <p>${optionRow(item)}</p>
      <p class="chips">${item.instance.topk.map((t) => `<span class="chip">${esc(t)}</span>`).join("")}</p>
      <h3>Why</h3><p class="expl">${esc(item.instance.explanation_why)}</p>
      <h3>Why not</h3><p class="expl">${esc(item.instance.explanation_why_not)}</p>
    </section>
    <section class="card">
      ${questionBlock(state)}
      <button id="submit-scores" ${controller.formComplete() ? "" : "disabled"}>Submit scores</button>
    </section>
    <section class="card">
      <h3>Flag a discrepancy</h3>
      <textarea id="flag-note" rows="3" placeholder="Describe the inaccuracy or discrepancy">${esc(state.flagNote)}</textarea>
      <button id="submit-flag" ${state.flagNote.trim() ? "" : "disabled"}>Flag for regeneration</button>
    </section>`;

  root.querySelectorAll<HTMLInputElement>("input[type=radio]").forEach((input) => {
    input.onchange = () => {
      const metric = input.name as (typeof QUESTIONS)[number]["metric"];
      controller.select(metric, Number(input.value));
    };
  });
  const note = document.getElementById("flag-note") as HTMLTextAreaElement;
  note.oninput = () => controller.setFlagNote(note.value);
  (document.getElementById("submit-scores") as HTMLButtonElement).onclick = () =>
    void controller.submitScores();
  (document.getElementById("submit-flag") as HTMLButtonElement).onclick = () =>
    void controller.submitFlag();
}

void controller.loadNext();
