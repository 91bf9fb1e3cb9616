/** Pure HTML/SVG string builders. No DOM access: every view is a function of
 * data, which is what the tests assert on. */

import { formatDegree, formatDelta, formatProbability, formatWeight } from "./format.js";
import type { FormState, Validity } from "./state.js";
import type {
  ClassInfo,
  CounterfactualResponse,
  FuzzyCurve,
  ModelSummary,
  PathWeight,
  PredictResponse,
} from "./types.js";

export function esc(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

/* ------------------------------------------------------------------ form */

export function renderPatientForm(
  model: ModelSummary,
  form: FormState,
  validity: Validity,
): string {
  const fields = model.variables.map((variable) => {
    const error = validity.errors[variable.name];
    const errorHtml = error ? `<p class="field-error">${esc(error)}</p>` : "";
    if (variable.fuzzy) {
      const raw = form.raws[variable.name] ?? "";
      const unit = variable.raw_feature ? ` <small>(${esc(variable.raw_feature)})</small>` : "";
      return `<label class="field${error ? " invalid" : ""}" data-field="${esc(variable.name)}">
  <span>${esc(variable.name)}${unit}</span>
  <input type="number" step="any" name="${esc(variable.name)}" value="${esc(raw)}"
         data-kind="raw" data-variable="${esc(variable.name)}">
  ${errorHtml}</label>`;
    }
    const selected = form.selections[variable.name] ?? "";
    const options = [
      `<option value=""${selected === "" ? " selected" : ""} disabled>choose…</option>`,
      ...variable.values.map(
        (value) =>
          `<option value="${esc(value)}"${value === selected ? " selected" : ""}>${esc(value)}</option>`,
      ),
    ].join("");
    return `<label class="field${error ? " invalid" : ""}" data-field="${esc(variable.name)}">
  <span>${esc(variable.name)}</span>
  <select name="${esc(variable.name)}" data-kind="selection" data-variable="${esc(variable.name)}">${options}</select>
  ${errorHtml}</label>`;
  });
  return `<form id="patient-form" autocomplete="off">${fields.join("\n")}
<button type="submit" id="predict-button"${validity.valid ? "" : " disabled"}>Predict</button>
</form>`;
}

export function renderThresholdSlider(threshold: number): string {
  return `<label class="threshold">
  <span>decision threshold <output id="threshold-value">${threshold.toFixed(2)}</output></span>
  <input type="range" id="threshold-slider" min="0.01" max="0.99" step="0.01" value="${threshold.toFixed(2)}">
</label>`;
}

/* ----------------------------------------------------------- probability */

export interface ProbabilityView {
  p0: number;
  p1: number;
  threshold: number;
  label: number;
}

export function renderProbabilityBars(view: ProbabilityView, classInfo: ClassInfo): string {
  if (Math.abs(view.p0 + view.p1 - 1) > 5e-4) {
    throw new Error(`probability pair does not sum to 1: ${view.p0} + ${view.p1}`);
  }
  const labelName = view.label === 1 ? classInfo.positive : classInfo.negative;
  const bar = (name: string, p: number, cls: string) => `
  <div class="bar-row" data-class="${esc(cls)}" data-probability="${p}">
    <span class="bar-name">${esc(name)}</span>
    <div class="bar-track"><div class="bar-fill ${esc(cls)}" style="width:${(p * 100).toFixed(1)}%"></div></div>
    <span class="bar-value">${formatProbability(p)}</span>
  </div>`;
  return `<div class="probability-bars">
${bar(classInfo.positive, view.p1, "positive")}
${bar(classInfo.negative, view.p0, "negative")}
  <p class="verdict">label at threshold ${view.threshold.toFixed(2)}:
    <strong class="label-${view.label}">${esc(labelName)}</strong></p>
</div>`;
}

/* ------------------------------------------------------------- tree path */

export function renderPathWeights(weights: PathWeight[]): string {
  const rows = weights.map((w) => {
    const highlighted = w.weight > 0;
    return `<tr class="path-row${highlighted ? " highlighted" : " off"}"
    data-parent="${w.parent}" data-variable="${esc(w.variable)}"
    data-value="${esc(w.value)}" data-weight="${w.weight}" data-mode="${esc(w.mode)}">
  <td>${esc(w.variable)}</td><td>${esc(w.value)}</td>
  <td class="weight">${formatWeight(w.weight)}</td>
  <td class="mode mode-${esc(w.mode)}">${esc(w.mode)}</td>
</tr>`;
  });
  return `<table class="path-weights"><thead>
<tr><th>variable</th><th>branch</th><th>weight</th><th>how</th></tr>
</thead><tbody>${rows.join("\n")}</tbody></table>`;
}

/** Rows a reader should see as traversed: exactly the positive-weight ones. */
export function highlightedBranches(weights: PathWeight[]): PathWeight[] {
  return weights.filter((w) => w.weight > 0);
}

/* ------------------------------------------------------------ membership */

const SVG_WIDTH = 440;
const SVG_HEIGHT = 180;
const PAD = 28;

export function xToPixel(x: number, support: [number, number]): number {
  const [lo, hi] = support;
  const span = hi - lo || 1;
  return PAD + ((x - lo) / span) * (SVG_WIDTH - 2 * PAD);
}

export function degreeToPixel(degree: number): number {
  return SVG_HEIGHT - PAD - degree * (SVG_HEIGHT - 2 * PAD);
}

export function curvePoints(xs: number[], degrees: number[], support: [number, number]): string {
  return xs
    .map((x, i) => `${xToPixel(x, support).toFixed(1)},${degreeToPixel(degrees[i]).toFixed(1)}`)
    .join(" ");
}

export function renderMembershipSvg(curve: FuzzyCurve): string {
  const termLines = Object.entries(curve.terms)
    .map(
      ([term, ys], i) =>
        `<polyline class="term term-${i}" data-term="${esc(term)}" fill="none"
     points="${curvePoints(curve.x, ys, curve.support)}"><title>${esc(term)}</title></polyline>`,
    )
    .join("\n");
  const cut =
    curve.crisp_cut === null
      ? ""
      : `<line class="crisp-cut" x1="${xToPixel(curve.crisp_cut, curve.support).toFixed(1)}"
     x2="${xToPixel(curve.crisp_cut, curve.support).toFixed(1)}" y1="${PAD}" y2="${SVG_HEIGHT - PAD}"
     stroke-dasharray="4 3"/>`;
  let marker = "";
  if (curve.at) {
    const mx = xToPixel(curve.at.x, curve.support).toFixed(1);
    const dots = Object.entries(curve.at.degrees)
      .map(
        ([term, degree]) =>
          `<circle class="at-degree" data-term="${esc(term)}" data-degree="${degree}"
       cx="${mx}" cy="${degreeToPixel(degree).toFixed(1)}" r="4"><title>${esc(term)}: ${formatDegree(degree)}</title></circle>`,
      )
      .join("\n");
    marker = `<line class="at-marker" x1="${mx}" x2="${mx}" y1="${PAD}" y2="${SVG_HEIGHT - PAD}"/>\n${dots}`;
  }
  return `<svg class="membership" viewBox="0 0 ${SVG_WIDTH} ${SVG_HEIGHT}" role="img"
  aria-label="membership curves for ${esc(curve.variable)} over ${esc(curve.raw_feature)}">
<rect class="frame" x="${PAD}" y="${PAD}" width="${SVG_WIDTH - 2 * PAD}" height="${SVG_HEIGHT - 2 * PAD}" fill="none"/>
${termLines}
${cut}
${marker}
</svg>`;
}

export function renderDegreeChips(degrees: Record<string, number>): string {
  const chips = Object.entries(degrees)
    .map(
      ([term, degree]) =>
        `<span class="degree-chip" data-term="${esc(term)}" data-degree="${degree}">${esc(term)}: ${formatDegree(degree)}</span>`,
    )
    .join(" ");
  return `<div class="degree-chips">${chips}</div>`;
}

/* --------------------------------------------------------------- what-if */

export function renderWhatIfPanel(
  result: CounterfactualResponse | null,
  classInfo: ClassInfo,
  editsActive: boolean,
): string {
  if (result === null) {
    return `<div class="whatif empty"><p>Edit a value to compare an alternate patient.</p></div>`;
  }
  const side = (title: string, probability: number, label: number, readonly: boolean) => `
  <div class="whatif-side${readonly ? " readonly" : ""}">
    <h3>${esc(title)}</h3>
    ${renderProbabilityBars(
      { p0: 1 - probability, p1: probability, threshold: result.threshold, label },
      classInfo,
    )}
  </div>`;
  const subs = result.substitutions
    .map((s) => {
      const from = s.old_raw ?? s.old_value ?? "—";
      const to = s.new_raw ?? s.new_value ?? "—";
      return `<li>${esc(s.variable)}: ${esc(String(from))} → ${esc(String(to))}</li>`;
    })
    .join("");
  return `<div class="whatif${editsActive ? " editing" : ""}">
${side("factual", result.factual.probability, result.factual.label, editsActive)}
${side("what-if", result.counterfactual.probability, result.counterfactual.label, false)}
  <p class="delta">delta <strong class="delta-badge" data-delta="${result.delta}">${formatDelta(result.delta)}</strong></p>
  <ul class="substitutions">${subs}</ul>
</div>`;
}

/* ---------------------------------------------------------------- banner */

export function renderBanner(message: string, retryable: boolean): string {
  const retry = retryable ? `<button id="banner-retry" type="button">retry</button>` : "";
  return `<div class="banner error" role="alert"><span>${esc(message)}</span>${retry}</div>`;
}

export function renderStaleModelBanner(): string {
  return `<div class="banner stale" role="alert">
  <span>The model changed on the server; results shown may be from the old version.</span>
  <button id="banner-refresh" type="button">reload model</button>
</div>`;
}
