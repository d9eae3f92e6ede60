// DOM wiring: config form, KB editor, run button, result rendering.
// All linking happens server-side; this file only moves JSON around.

import { ApiError, getComponents, listKbs, runPipeline, uploadKb } from "./api.js";
import { buildPartialConfig, defaultConfigState } from "./config.js";
import { renderResult } from "./render.js";
import type { ComponentListing, KbInfo, UiConfigState } from "./types.js";
import { validateConfigState, validateKbJsonl } from "./validate.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const state: UiConfigState = defaultConfigState();
let kbs: KbInfo[] = [];
let selectedKb: string | null = null;
let running = false;

function fillSelect(select: HTMLSelectElement, names: string[], value: string) {
  select.innerHTML = "";
  for (const name of names) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    select.appendChild(option);
  }
  select.value = names.includes(value) ? value : names[0] ?? "";
}

function readConfigForm() {
  state.ner = $<HTMLSelectElement>("ner-select").value;
  state.candidateGenerator = $<HTMLSelectElement>("generator-select").value;
  state.reranker = $<HTMLSelectElement>("reranker-select").value;
  state.disambiguator = $<HTMLSelectElement>("disambiguator-select").value;
  state.nerPatterns = $<HTMLTextAreaElement>("ner-patterns").value;
  state.nerLabels = $<HTMLInputElement>("ner-labels").value;
  state.nerThreshold = Number($<HTMLInputElement>("ner-threshold").value);
  state.backendBaseUrl = $<HTMLInputElement>("backend-url").value;
  state.backendModel = $<HTMLInputElement>("backend-model").value;
  state.globals = {
    n_retrieve: Number($<HTMLInputElement>("n-retrieve").value),
    top_k: Number($<HTMLInputElement>("top-k").value),
    n_samples: Number($<HTMLInputElement>("n-samples").value),
  };
}

function refreshConditionalFields() {
  $<HTMLElement>("regex-params").hidden = state.ner !== "regex";
  $<HTMLElement>("remote-ner-params").hidden = state.ner !== "remote";
  const needsBackend =
    state.ner === "remote" ||
    state.candidateGenerator === "dense" ||
    state.reranker === "remote" ||
    state.disambiguator === "llm";
  $<HTMLElement>("backend-params").hidden = !needsBackend;
}

function refreshValidation() {
  const errors = validateConfigState(state);
  const box = $<HTMLElement>("config-errors");
  box.innerHTML = errors.map((e) => `<div class="error-line">${e}</div>`).join("");
  const runButton = $<HTMLButtonElement>("run-button");
  runButton.disabled = running || errors.length > 0 || selectedKb === null;
  return errors;
}

function onConfigChange() {
  readConfigForm();
  refreshConditionalFields();
  refreshValidation();
}

function refreshKbList() {
  const select = $<HTMLSelectElement>("kb-select");
  select.innerHTML = "";
  for (const kb of kbs) {
    const option = document.createElement("option");
    option.value = kb.kb_id;
    option.textContent = `${kb.name} (${kb.entities} entities)`;
    select.appendChild(option);
  }
  if (selectedKb && kbs.some((k) => k.kb_id === selectedKb)) {
    select.value = selectedKb;
  } else {
    selectedKb = kbs.length > 0 ? kbs[0].kb_id : null;
    if (selectedKb) select.value = selectedKb;
  }
  refreshValidation();
}

function onKbEditorChange() {
  const body = $<HTMLTextAreaElement>("kb-editor").value;
  const box = $<HTMLElement>("kb-errors");
  if (!body.trim()) {
    box.innerHTML = "";
    $<HTMLButtonElement>("kb-upload").disabled = true; // empty editor: upload disabled
    return;
  }
  const { errors, entities } = validateKbJsonl(body);
  box.innerHTML =
    errors
      .map((e) => `<div class="error-line">line ${e.line}: ${e.message}</div>`)
      .join("") +
    (errors.length === 0 ? `<div class="ok-line">${entities} entities, ready to upload</div>` : "");
  $<HTMLButtonElement>("kb-upload").disabled = errors.length > 0;
}

async function onUpload() {
  const name = $<HTMLInputElement>("kb-name").value.trim() || "unnamed";
  const body = $<HTMLTextAreaElement>("kb-editor").value;
  const box = $<HTMLElement>("kb-errors");
  try {
    const info = await uploadKb(name, body);
    kbs = await listKbs();
    selectedKb = info.kb_id; // newly created KB auto-selected
    refreshKbList();
    box.innerHTML = `<div class="ok-line">uploaded as ${info.kb_id}</div>`;
  } catch (err) {
    box.innerHTML = `<div class="error-line">${err instanceof Error ? err.message : err}</div>`;
  }
}

async function onRun() {
  if (running || selectedKb === null) return;
  readConfigForm();
  if (refreshValidation().length > 0) return; // blocked before submission
  running = true;
  refreshValidation();
  const banner = $<HTMLElement>("error-banner");
  banner.innerHTML = "";
  const text = $<HTMLTextAreaElement>("input-text").value;
  try {
    const payload = await runPipeline(selectedKb, text, buildPartialConfig(state));
    $<HTMLElement>("results").innerHTML = renderResult(text, payload);
  } catch (err) {
    if (err instanceof ApiError) {
      banner.innerHTML = `<div class="error-line">HTTP ${err.status}: ${err.message}</div>`;
    } else {
      banner.innerHTML = `<div class="error-line">${err}</div>`;
    }
  } finally {
    running = false;
    refreshValidation();
  }
}

async function init() {
  let components: ComponentListing;
  try {
    components = await getComponents();
    kbs = await listKbs();
  } catch (err) {
    $<HTMLElement>("error-banner").innerHTML =
      `<div class="error-line">cannot reach the service: ${err}</div>`;
    return;
  }
  fillSelect($<HTMLSelectElement>("ner-select"), components["ner"] ?? [], state.ner);
  fillSelect(
    $<HTMLSelectElement>("generator-select"),
    components["candidate_generator"] ?? [],
    state.candidateGenerator,
  );
  fillSelect($<HTMLSelectElement>("reranker-select"), components["reranker"] ?? [], state.reranker);
  fillSelect(
    $<HTMLSelectElement>("disambiguator-select"),
    components["disambiguator"] ?? [],
    state.disambiguator,
  );
  refreshKbList();
  onConfigChange();
  onKbEditorChange();

  for (const id of [
    "ner-select", "generator-select", "reranker-select", "disambiguator-select",
    "ner-patterns", "ner-labels", "ner-threshold", "backend-url", "backend-model",
    "n-retrieve", "top-k", "n-samples",
  ]) {
    $(id).addEventListener("input", onConfigChange);
    $(id).addEventListener("change", onConfigChange);
  }
  $<HTMLSelectElement>("kb-select").addEventListener("change", (event) => {
    selectedKb = (event.target as HTMLSelectElement).value || null;
    refreshValidation();
  });
  $("kb-editor").addEventListener("input", onKbEditorChange);
  $("kb-upload").addEventListener("click", onUpload);
  $("run-button").addEventListener("click", onRun);
}

document.addEventListener("DOMContentLoaded", () => {
  void init();
});
