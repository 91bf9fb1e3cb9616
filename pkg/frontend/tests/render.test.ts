import { describe, expect, it } from "vitest";

import {
  curvePoints,
  degreeToPixel,
  esc,
  highlightedBranches,
  renderBanner,
  renderDegreeChips,
  renderMembershipSvg,
  renderPathWeights,
  renderPatientForm,
  renderProbabilityBars,
  renderStaleModelBanner,
  renderThresholdSlider,
  renderWhatIfPanel,
  xToPixel,
} from "../src/render.js";
import type {
  ClassInfo,
  CounterfactualResponse,
  FuzzyCurve,
  ModelSummary,
  PathWeight,
} from "../src/types.js";

const CLASS_INFO: ClassInfo = { column: "outcome", positive: "malignant", negative: "benign" };

const MODEL: ModelSummary = {
  fingerprint: "f".repeat(64),
  started_at: 0,
  rows: 10,
  threshold: 0.5,
  class: CLASS_INFO,
  variables: [
    { name: "tirads", values: ["TIR3A", "TIR3B"], fuzzy: false },
    { name: "large_nodule", values: ["0", "1"], fuzzy: true, raw_feature: "nodule_mm" },
  ],
  stats: { rows: 10, realisations: 8, mean_rows_per_realisation: 1.25, nonzero_leaves: 8 },
};

describe("escaping", () => {
  it("neutralises markup in user-controlled strings", () => {
    expect(esc(`<script>"&`)).toBe("&lt;script&gt;&quot;&amp;");
  });
});

describe("patient form", () => {
  it("renders a select per categorical and a numeric input per fuzzy variable", () => {
    const html = renderPatientForm(MODEL, { selections: {}, raws: {} }, {
      valid: false,
      errors: {},
      missing: ["tirads", "large_nodule"],
    });
    expect(html).toContain('<select name="tirads"');
    expect(html).toContain('<option value="TIR3B"');
    expect(html).toContain('input type="number" step="any" name="large_nodule"');
    expect(html).toContain("(nodule_mm)");
    expect(html).toContain("disabled>Predict</button>");
  });

  it("enables submit once valid and shows inline errors otherwise", () => {
    const valid = renderPatientForm(
      MODEL,
      { selections: { tirads: "TIR3B" }, raws: { large_nodule: "18" } },
      { valid: true, errors: {}, missing: [] },
    );
    expect(valid).toContain('id="predict-button">Predict</button>');
    const invalid = renderPatientForm(
      MODEL,
      { selections: { tirads: "TIR3B" }, raws: { large_nodule: "big" } },
      { valid: false, errors: { large_nodule: "nodule_mm must be a number" }, missing: [] },
    );
    expect(invalid).toContain('class="field-error"');
    expect(invalid).toContain("nodule_mm must be a number");
  });
});

describe("probability bars", () => {
  it("shows both probabilities to three decimals and the thresholded label", () => {
    const html = renderProbabilityBars(
      { p0: 0.5733333333333333, p1: 0.4266666666666667, threshold: 0.5, label: 0 },
      CLASS_INFO,
    );
    expect(html).toContain("0.427");
    expect(html).toContain("0.573");
    expect(html).toContain("benign");
    expect(html).toContain("threshold 0.50");
  });

  it("rejects a pair that does not sum to one", () => {
    expect(() =>
      renderProbabilityBars({ p0: 0.3, p1: 0.5, threshold: 0.5, label: 1 }, CLASS_INFO),
    ).toThrow(/sum to 1/);
  });
});

describe("tree path weights", () => {
  const weights: PathWeight[] = [
    { parent: 0, variable: "tirads", value: "TIR3B", weight: 1.0, mode: "match" },
    { parent: 3, variable: "large_nodule", value: "1", weight: 0.8, mode: "membership" },
    { parent: 3, variable: "large_nodule", value: "0", weight: 0.0, mode: "membership" },
  ];

  it("highlights exactly the positive-weight branches", () => {
    const html = renderPathWeights(weights);
    expect((html.match(/ highlighted/g) ?? []).length).toBe(2);
    expect((html.match(/ off/g) ?? []).length).toBe(1);
    expect(highlightedBranches(weights).map((w) => w.value)).toEqual(["TIR3B", "1"]);
  });

  it("keeps the exact weight in a data attribute and formats the display", () => {
    const html = renderPathWeights(weights);
    expect(html).toContain('data-weight="0.8"');
    expect(html).toContain(">0.800<");
    expect(html).toContain('data-mode="membership"');
  });
});

describe("membership svg", () => {
  const curve: FuzzyCurve = {
    fingerprint: "f".repeat(64),
    variable: "large_nodule",
    raw_feature: "nodule_mm",
    support: [7.5, 22.5],
    crisp_cut: 20,
    positive_term: "1",
    x: [7.5, 15, 22.5],
    terms: { "1": [0, 0.5, 1], "0": [1, 0.5, 0] },
    at: { x: 18, degrees: { "1": 0.8, "0": 0.2 } },
  };

  it("maps the support to the plot area and degrees to the vertical axis", () => {
    expect(xToPixel(7.5, curve.support)).toBe(28);
    expect(xToPixel(22.5, curve.support)).toBe(440 - 28);
    expect(degreeToPixel(0)).toBe(180 - 28);
    expect(degreeToPixel(1)).toBe(28);
    expect(curvePoints([7.5], [1], curve.support)).toBe("28.0,28.0");
  });

  it("draws one polyline per term, the crisp cut, and the at-marker with exact degrees", () => {
    const svg = renderMembershipSvg(curve);
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
    expect(svg).toContain('data-term="1"');
    expect(svg).toContain('class="crisp-cut"');
    expect(svg).toContain('data-degree="0.8"');
    expect(svg).toContain("1: 0.80");
  });

  it("omits the marker when no point is requested", () => {
    const svg = renderMembershipSvg({ ...curve, at: undefined });
    expect(svg).not.toContain("at-marker");
  });

  it("renders degree chips", () => {
    const chips = renderDegreeChips({ "1": 0.8, "0": 0.2 });
    expect(chips).toContain("1: 0.80");
    expect(chips).toContain("0: 0.20");
  });
});

describe("what-if panel", () => {
  const result: CounterfactualResponse = {
    fingerprint: "f".repeat(64),
    factual: { probability: 0.4266666666666667, label: 0, statements: [] },
    counterfactual: { probability: 0.4, label: 0, statements: [] },
    delta: -0.026666666666666672,
    threshold: 0.5,
    target_class: 1,
    substitutions: [
      { variable: "large_nodule", old_value: "0", new_value: "1", old_raw: 18, new_raw: 25 },
    ],
  };

  it("shows factual and counterfactual side by side with a signed delta", () => {
    const html = renderWhatIfPanel(result, CLASS_INFO, true);
    expect(html).toContain("factual");
    expect(html).toContain("what-if");
    expect(html).toContain("-0.027");
    expect(html).toContain("large_nodule: 18 → 25");
    expect(html).toContain("whatif-side readonly");
  });

  it("an identity comparison shows delta 0.000", () => {
    const identity = { ...result, counterfactual: result.factual, delta: 0, substitutions: [] };
    const html = renderWhatIfPanel(identity, CLASS_INFO, false);
    expect(html).toContain(">0.000<");
    expect(html).not.toContain("readonly");
  });

  it("prompts until a comparison exists", () => {
    expect(renderWhatIfPanel(null, CLASS_INFO, false)).toContain("Edit a value");
  });
});

describe("banners and slider", () => {
  it("error banner offers retry only when asked", () => {
    expect(renderBanner("service unreachable", true)).toContain("banner-retry");
    expect(renderBanner("bad input", false)).not.toContain("banner-retry");
    expect(renderBanner("<oops>", false)).toContain("&lt;oops&gt;");
  });

  it("stale-model banner forces a reload action", () => {
    expect(renderStaleModelBanner()).toContain("banner-refresh");
  });

  it("threshold slider defaults to the model threshold", () => {
    const html = renderThresholdSlider(0.5);
    expect(html).toContain('value="0.50"');
    expect(html).toContain('id="threshold-slider"');
  });
});
