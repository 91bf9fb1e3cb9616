/** DOM wiring: connects the pure renderers and the API client to a page.
 * All logic that can live outside the DOM is in state.ts/render.ts. */

import { ApiClient, ApiError } from "./api.js";
import { labelFor } from "./format.js";
import {
  renderBanner,
  renderDegreeChips,
  renderMembershipSvg,
  renderPathWeights,
  renderPatientForm,
  renderProbabilityBars,
  renderStaleModelBanner,
  renderThresholdSlider,
  renderWhatIfPanel,
} from "./render.js";
import {
  caseFor,
  emptyForm,
  fuzzyVariables,
  latestWins,
  toPredictRequest,
  validate,
  type FormState,
} from "./state.js";
import type { ModelSummary, PredictResponse, SubstitutionBody } from "./types.js";

export class App {
  private model: ModelSummary | null = null;
  private form: FormState = emptyForm();
  private whatIf: FormState | null = null;
  private threshold = 0.5;
  private lastPrediction: PredictResponse | null = null;
  private readonly predictSeq = latestWins();
  private readonly curveSeq = latestWins();

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
  ) {
    client.onFingerprintChange = () => this.showStaleBanner();
  }

  async start(): Promise<void> {
    this.root.innerHTML = `
<div id="banner-slot"></div>
<section id="form-slot"></section>
<section id="threshold-slot"></section>
<section id="result-slot"></section>
<section id="membership-slot"></section>
<section id="path-slot"></section>
<section id="whatif-slot"></section>`;
    this.root.addEventListener("change", (event) => this.onFieldChange(event));
    this.root.addEventListener("input", (event) => this.onSliderInput(event));
    this.root.addEventListener("click", (event) => this.onClick(event));
    this.root.addEventListener("submit", (event) => event.preventDefault());
    await this.bootstrap();
  }

  private slot(id: string): HTMLElement {
    const el = this.root.querySelector<HTMLElement>(`#${id}`);
    if (!el) throw new Error(`missing slot ${id}`);
    return el;
  }

  private async bootstrap(): Promise<void> {
    try {
      this.model = await this.client.model();
      this.threshold = this.model.threshold;
      this.slot("banner-slot").innerHTML = "";
      this.slot("threshold-slot").innerHTML = renderThresholdSlider(this.threshold);
      this.renderForm();
      await this.refreshCurves();
    } catch (err) {
      this.showError(err, true);
    }
  }

  private renderForm(): void {
    if (!this.model) return;
    const validity = validate(this.model, this.form);
    this.slot("form-slot").innerHTML = renderPatientForm(this.model, this.form, validity);
  }

  private onFieldChange(event: Event): void {
    const target = event.target as HTMLElement | null;
    if (!target || !this.model) return;
    const variable = target.getAttribute("data-variable");
    const kind = target.getAttribute("data-kind");
    if (!variable || !kind) return;
    const value = (target as HTMLInputElement | HTMLSelectElement).value;
    const scope = target.closest("#whatif-slot") ? this.ensureWhatIf() : this.form;
    if (kind === "raw") scope.raws[variable] = value;
    else scope.selections[variable] = value;
    if (scope === this.form) {
      this.renderForm();
      void this.refreshCurves();
      void this.refreshPrediction();
    } else {
      void this.refreshWhatIf();
    }
  }

  private onSliderInput(event: Event): void {
    const target = event.target as HTMLElement | null;
    if (!target || target.id !== "threshold-slider") return;
    this.threshold = Number((target as HTMLInputElement).value);
    const out = this.root.querySelector<HTMLOutputElement>("#threshold-value");
    if (out) out.value = this.threshold.toFixed(2);
    this.relabelLocally();
  }

  private onClick(event: Event): void {
    const target = event.target as HTMLElement | null;
    if (!target) return;
    if (target.id === "banner-retry") void this.bootstrap();
    if (target.id === "banner-refresh") void this.bootstrap();
    if (target.id === "whatif-open") {
      this.ensureWhatIf();
      void this.refreshWhatIf();
    }
  }

  /** Classification is pure given p: the slider never needs the server. */
  private relabelLocally(): void {
    if (!this.model || !this.lastPrediction) return;
    const p = this.lastPrediction;
    this.slot("result-slot").innerHTML = renderProbabilityBars(
      {
        p0: p.p0,
        p1: p.p1,
        threshold: this.threshold,
        label: labelFor(p.probability, this.threshold),
      },
      this.model.class,
    );
  }

  private async refreshPrediction(): Promise<void> {
    if (!this.model) return;
    const validity = validate(this.model, this.form);
    if (!validity.valid) return;
    const ticket = this.predictSeq.issue();
    try {
      const response = await this.client.predict(
        toPredictRequest(this.model, this.form, this.threshold),
      );
      if (!this.predictSeq.isCurrent(ticket)) return; // superseded by a newer edit
      this.lastPrediction = response;
      this.relabelLocally();
      this.slot("path-slot").innerHTML = renderPathWeights(response.path_weights);
      this.slot("whatif-slot").innerHTML =
        `<button id="whatif-open" type="button">explore what-if</button>`;
    } catch (err) {
      if (this.predictSeq.isCurrent(ticket)) this.showError(err, false);
    }
  }

  private async refreshCurves(): Promise<void> {
    if (!this.model) return;
    const ticket = this.curveSeq.issue();
    const pieces: string[] = [];
    for (const variable of fuzzyVariables(this.model)) {
      const raw = Number(this.form.raws[variable.name]);
      const caseValue = caseFor(variable, this.form);
      if (variable.selector && caseValue === undefined) continue;
      try {
        const curve = await this.client.fuzzy(variable.name, {
          at: Number.isFinite(raw) ? raw : undefined,
          caseValue,
        });
        pieces.push(
          `<figure><figcaption>${variable.name}</figcaption>${renderMembershipSvg(curve)}` +
            (curve.at ? renderDegreeChips(curve.at.degrees) : "") +
            `</figure>`,
        );
      } catch (err) {
        if (err instanceof ApiError && err.kind === "validation") continue;
        this.showError(err, false);
        return;
      }
    }
    if (this.curveSeq.isCurrent(ticket)) {
      this.slot("membership-slot").innerHTML = pieces.join("\n");
    }
  }

  private ensureWhatIf(): FormState {
    if (!this.whatIf) {
      this.whatIf = {
        selections: { ...this.form.selections },
        raws: { ...this.form.raws },
      };
    }
    return this.whatIf;
  }

  private substitutions(): SubstitutionBody[] {
    if (!this.model || !this.whatIf) return [];
    const subs: SubstitutionBody[] = [];
    for (const variable of this.model.variables) {
      if (variable.fuzzy) {
        const before = this.form.raws[variable.name];
        const after = this.whatIf.raws[variable.name];
        if (after !== undefined && after !== before) {
          subs.push({ variable: variable.name, raw: Number(after) });
        }
      } else {
        const before = this.form.selections[variable.name];
        const after = this.whatIf.selections[variable.name];
        if (after !== undefined && after !== before) {
          subs.push({ variable: variable.name, value: after });
        }
      }
    }
    return subs;
  }

  private async refreshWhatIf(): Promise<void> {
    if (!this.model) return;
    const validity = validate(this.model, this.form);
    if (!validity.valid) return;
    const editsActive = this.substitutions().length > 0;
    try {
      const result = await this.client.counterfactual({
        ...toPredictRequest(this.model, this.form, this.threshold),
        substitutions: this.substitutions(),
      });
      const editors = this.whatIf
        ? renderPatientForm(this.model, this.whatIf, validate(this.model, this.whatIf))
        : "";
      this.slot("whatif-slot").innerHTML =
        `<div id="whatif-editors">${editors}</div>` +
        renderWhatIfPanel(result, this.model.class, editsActive);
    } catch (err) {
      this.showError(err, false);
    }
  }

  private showStaleBanner(): void {
    this.slot("banner-slot").innerHTML = renderStaleModelBanner();
  }

  private showError(err: unknown, retryable: boolean): void {
    if (err instanceof ApiError && err.kind === "validation" && this.model) {
      // field-level messages land inline next to the offending inputs
      const validity = validate(this.model, this.form);
      for (const fieldError of err.fieldErrors) {
        const name = fieldError.loc[fieldError.loc.length - 1];
        if (typeof name === "string") validity.errors[name] = fieldError.msg;
      }
      this.slot("form-slot").innerHTML = renderPatientForm(this.model, this.form, validity);
      return;
    }
    const message = err instanceof Error ? err.message : String(err);
    this.slot("banner-slot").innerHTML = renderBanner(message, retryable);
  }
}

export function mountApp(root: HTMLElement, baseUrl: string): App {
  const app = new App(root, new ApiClient(baseUrl));
  void app.start();
  return app;
}
