/**
 * DOM wiring for the single-page console. All state round-trips through
 * the HTTP API; refresh loses nothing. Flows are edited externally (yEd
 * etc.) and only uploaded/previewed here.
 */

import { ApiClient } from './api.js';
import { chartSvg } from './chart.js';
import { choroplethSvg } from './choropleth.js';
import { renderComparisonHtml } from './comparison.js';
import {
  allowedOps,
  allowedVerbs,
  emptyForm,
  newActionRow,
  newConditionRow,
  policyFromForm,
  applicabilityLabel,
  PolicyFormState,
} from './policy-form.js';
import { pollUntilDone, sliderTicks } from './run-console.js';
import { addPolicy, draftFromServer, newDraft, setFlow, submittable, checkDraft, ScenarioDraft } from './scenario-draft.js';
import type { AgentTypeInfo } from './types.js';

const api = new ApiClient();

function el<T extends HTMLElement = HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let agentTypes: AgentTypeInfo[] = [];
let draft: ScenarioDraft = newDraft('untitled');
let form: PolicyFormState = emptyForm('');

function currentType(): AgentTypeInfo {
  const info = agentTypes.find((t) => t.name === form.agentType) ?? agentTypes[0];
  if (!info) throw new Error('no agent types loaded');
  return info;
}

function renderPolicyForm(): void {
  const info = currentType();
  const attrOptions = info.attribute_schema
    .map((s) => `<option value="${s.name}">${s.name} (${s.tag})</option>`)
    .join('');
  const conditionRows = form.conditions
    .map((c, i) => {
      const tag = info.attribute_schema.find((s) => s.name === c.attribute)?.tag ?? 'real';
      const ops = allowedOps(tag)
        .map((op) => `<option value="${op}"${op === c.op ? ' selected' : ''}>${op}</option>`)
        .join('');
      return (
        `<div class="row">${c.attribute} <select data-cond="${i}">${ops}</select>` +
        ` <input data-cond-value="${i}" value="${JSON.stringify(c.value)}"/>` +
        ` <button data-del-cond="${i}">remove</button></div>`
      );
    })
    .join('');
  const actionRows = form.actions
    .map((a, i) => {
      const tag = info.attribute_schema.find((s) => s.name === a.attribute)?.tag ?? 'real';
      const verbs = allowedVerbs(tag)
        .map((v) => `<option value="${v}"${v === a.verb ? ' selected' : ''}>${v}</option>`)
        .join('');
      return (
        `<div class="row">${a.attribute} <select data-act="${i}">${verbs}</select>` +
        ` <input data-act-value="${i}" value="${JSON.stringify(a.value)}"/>` +
        ` <button data-del-act="${i}">remove</button></div>`
      );
    })
    .join('');
  el('policy-form').innerHTML = `
    <label>name <input id="policy-name" value="${form.name}"/></label>
    <p>${applicabilityLabel(form)}</p>
    <h4>conditions</h4>${conditionRows}
    <select id="new-cond-attr">${attrOptions}</select>
    <button id="add-cond">add condition</button>
    <h4>actions</h4>${actionRows}
    <select id="new-act-attr">${attrOptions}</select>
    <button id="add-act">add action</button>
    <button id="save-policy">add policy to draft</button>`;

  el('add-cond').onclick = () => {
    form.conditions.push(newConditionRow(info, el<HTMLSelectElement>('new-cond-attr').value));
    renderPolicyForm();
  };
  el('add-act').onclick = () => {
    form.actions.push(newActionRow(info, el<HTMLSelectElement>('new-act-attr').value));
    renderPolicyForm();
  };
  el('save-policy').onclick = () => {
    form.name = el<HTMLInputElement>('policy-name').value;
    draft = addPolicy(draft, policyFromForm(form));
    form = emptyForm(info.name);
    renderDraft();
    renderPolicyForm();
  };
  document.querySelectorAll<HTMLButtonElement>('[data-del-cond]').forEach((btn) => {
    btn.onclick = () => {
      form.conditions.splice(Number(btn.dataset.delCond), 1);
      renderPolicyForm();
    };
  });
  document.querySelectorAll<HTMLButtonElement>('[data-del-act]').forEach((btn) => {
    btn.onclick = () => {
      form.actions.splice(Number(btn.dataset.delAct), 1);
      renderPolicyForm();
    };
  });
}

function renderDraft(): void {
  const check = checkDraft(draft);
  el('draft-json').textContent = JSON.stringify(draft.doc, null, 2);
  el('draft-problems').textContent = check.ok ? 'draft is schema-valid' : check.problems.join('\n');
  el<HTMLButtonElement>('submit-draft').disabled = !submittable(draft);
}

async function refreshScenarioList(): Promise<void> {
  const scenarios = await api.listScenarios();
  el('scenario-list').innerHTML = scenarios
    .map(
      (s) =>
        `<li><label><input type="checkbox" class="pick" value="${s.id}"/> ${s.id}: ${s.name}</label>` +
        ` <button data-load="${s.id}">load</button></li>`,
    )
    .join('');
  document.querySelectorAll<HTMLButtonElement>('[data-load]').forEach((btn) => {
    btn.onclick = async () => {
      const doc = await api.readScenario(btn.dataset.load!);
      draft = draftFromServer(doc);
      renderDraft();
    };
  });
}

function selectedScenarioIds(): string[] {
  return [...document.querySelectorAll<HTMLInputElement>('.pick:checked')].map((c) => c.value);
}

async function wireActions(): Promise<void> {
  el('submit-draft').onclick = async () => {
    const { id } = await api.createScenario(draft.doc);
    const diagnostics = await api.validateScenario(id);
    draft = { ...draft, dirty: false, serverDiagnostics: diagnostics };
    renderDraft();
    await refreshScenarioList();
  };

  el('use-raw-flow').onclick = async () => {
    const info = currentType();
    const xml = await api.rawFlow(info.name);
    draft = setFlow(draft, info.name, xml);
    el('flow-preview').textContent = xml;
    renderDraft();
  };

  el('upload-flow').onclick = async () => {
    const info = currentType();
    const xml = el<HTMLTextAreaElement>('flow-xml').value;
    const result = await api.uploadFlow(info.name, xml).catch((e) => {
      el('flow-preview').textContent = `rejected: ${e.message}`;
      return null;
    });
    if (result) {
      draft = setFlow(draft, info.name, xml);
      el('flow-preview').textContent = `fingerprint ${result.fingerprint}`;
      renderDraft();
    }
  };

  el('compare-btn').onclick = async () => {
    const ids = selectedScenarioIds();
    if (ids.length === 0) return;
    const table = await api.compare(ids);
    el('comparison').innerHTML = renderComparisonHtml(table);
  };

  el('launch-btn').onclick = async () => {
    const ids = selectedScenarioIds();
    if (ids.length === 0) return;
    const settings = {
      duration_steps: Number(el<HTMLInputElement>('duration').value),
      iterations_per_scenario: Number(el<HTMLInputElement>('iterations').value),
      collection_interval: Number(el<HTMLInputElement>('interval').value),
    };
    const { job_id } = await api.submitRuns(ids, settings, Number(el<HTMLInputElement>('seed').value));
    const status = await pollUntilDone(
      () => api.jobStatus(job_id),
      300,
      (s) => {
        el('job-progress').textContent = `${s.state}: ${s.progress.completed_runs}/${s.progress.total_runs}`;
      },
    );
    if (status.state !== 'completed') return;

    const reporter = el<HTMLInputElement>('reporter').value || 'mean_savings';
    const series = await Promise.all(ids.map((sid) => api.results(job_id, sid, reporter)));
    el('chart').innerHTML = chartSvg(series);

    const ticks = sliderTicks(status);
    const slider = el<HTMLInputElement>('tick-slider');
    slider.min = '0';
    slider.max = String(ticks.length - 1);
    slider.step = '1';
    slider.value = String(ticks.length - 1);
    const geo = await api.geo();
    const drawFrame = async () => {
      const tick = ticks[Number(slider.value)];
      el('tick-label').textContent = `tick ${tick}`;
      const frame = await api.choropleth(job_id, 'population_by_region', tick, ids[0]);
      el('choropleth').innerHTML = choroplethSvg(geo, frame);
    };
    slider.oninput = drawFrame;
    await drawFrame();
  };
}

async function boot(): Promise<void> {
  agentTypes = await api.agentTypes();
  form = emptyForm(agentTypes[0].name);
  renderPolicyForm();
  renderDraft();
  await refreshScenarioList();
  await wireActions();
}

boot().catch((e) => {
  document.body.insertAdjacentHTML('beforeend', `<pre class="error">${e}</pre>`);
});
