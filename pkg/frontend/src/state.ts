/** Form state, validation, and request sequencing — everything the views
 * need that does not touch the DOM. */

import type { ModelSummary, PredictRequest, VariableMeta } from "./types.js";

/** What the clinician has typed so far: a selected value per categorical
 * variable, and a raw measurement string per fuzzy-bound variable. */
export interface FormState {
  selections: Record<string, string>;
  raws: Record<string, string>;
}

export function emptyForm(): FormState {
  return { selections: {}, raws: {} };
}

export interface Validity {
  valid: boolean;
  /** Per-variable message; only present for invalid fields. */
  errors: Record<string, string>;
  missing: string[];
}

export function validate(model: ModelSummary, form: FormState): Validity {
  const errors: Record<string, string> = {};
  const missing: string[] = [];
  for (const variable of model.variables) {
    if (variable.fuzzy) {
      const text = (form.raws[variable.name] ?? "").trim();
      if (text === "") {
        missing.push(variable.name);
        continue;
      }
      const parsed = Number(text);
      if (!Number.isFinite(parsed)) {
        errors[variable.name] = `${variable.raw_feature ?? variable.name} must be a number`;
      }
    } else {
      const value = form.selections[variable.name] ?? "";
      if (value === "") {
        missing.push(variable.name);
      } else if (!variable.values.includes(value)) {
        errors[variable.name] = `${value} is not a declared value`;
      }
    }
  }
  return {
    valid: missing.length === 0 && Object.keys(errors).length === 0,
    errors,
    missing,
  };
}

/** Build the /predict body from a complete, valid form. */
export function toPredictRequest(
  model: ModelSummary,
  form: FormState,
  threshold?: number,
): PredictRequest {
  const statements: Record<string, string> = {};
  const raw_values: Record<string, number> = {};
  for (const variable of model.variables) {
    if (variable.fuzzy) {
      raw_values[variable.name] = Number(form.raws[variable.name]);
    } else {
      statements[variable.name] = form.selections[variable.name] ?? "";
    }
  }
  const body: PredictRequest = { statements, raw_values };
  if (threshold !== undefined) body.threshold = threshold;
  return body;
}

export function fuzzyVariables(model: ModelSummary): VariableMeta[] {
  return model.variables.filter((v) => v.fuzzy);
}

/** For selector-dependent bindings, the membership curve for a variable is
 * only defined once the selector has a value. */
export function caseFor(variable: VariableMeta, form: FormState): string | undefined {
  if (!variable.selector) return undefined;
  const selected = form.selections[variable.selector];
  return selected === "" ? undefined : selected;
}

/** Latest-write-wins sequencing: a response is applied only if no newer
 * request has been issued since it left. */
export function latestWins(): { issue(): number; isCurrent(id: number): boolean } {
  let latest = 0;
  return {
    issue() {
      latest += 1;
      return latest;
    },
    isCurrent(id: number) {
      return id === latest;
    },
  };
}
