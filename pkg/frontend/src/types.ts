/** Response bodies of the prediction service, as served. */

export interface ClassInfo {
  column: string;
  positive: string;
  negative: string;
}

export interface VariableMeta {
  name: string;
  values: string[];
  fuzzy: boolean;
  raw_feature?: string;
  crisp_cut?: number | null;
  positive_term?: string;
  selector?: string;
  cases?: string[];
}

export interface TreeStats {
  rows: number;
  realisations: number;
  mean_rows_per_realisation: number;
  nonzero_leaves: number;
}

export interface ModelSummary {
  fingerprint: string;
  started_at: number;
  rows: number;
  threshold: number;
  class: ClassInfo;
  variables: VariableMeta[];
  stats: TreeStats;
}

export interface FuzzyCurve {
  fingerprint: string;
  variable: string;
  raw_feature: string;
  support: [number, number];
  crisp_cut: number | null;
  positive_term: string;
  x: number[];
  terms: Record<string, number[]>;
  at?: { x: number; degrees: Record<string, number> };
}

export interface PathWeight {
  parent: number;
  variable: string;
  value: string;
  weight: number;
  mode: "match" | "membership";
}

export interface PredictRequest {
  statements: Record<string, string>;
  raw_values: Record<string, number>;
  threshold?: number;
  target_class?: number;
}

export interface PredictResponse {
  fingerprint: string;
  p0: number;
  p1: number;
  probability: number;
  target_class: number;
  label: number;
  threshold: number;
  path_weights: PathWeight[];
}

export interface SubstitutionBody {
  variable: string;
  value?: string | null;
  raw?: number | null;
}

export interface AppliedSubstitution {
  variable: string;
  old_value: string | null;
  new_value: string | null;
  old_raw: number | null;
  new_raw: number | null;
}

export interface DecisionBody {
  probability: number;
  label: number;
  statements: [string, string][];
}

export interface CounterfactualRequest extends PredictRequest {
  substitutions: SubstitutionBody[];
}

export interface CounterfactualResponse {
  fingerprint: string;
  factual: DecisionBody;
  counterfactual: DecisionBody;
  delta: number;
  threshold: number;
  target_class: number;
  substitutions: AppliedSubstitution[];
}

export interface FieldError {
  loc: (string | number)[];
  msg: string;
  type: string;
}

export interface EvaluationJob {
  fingerprint: string;
  job_id: string;
  status: string;
}
