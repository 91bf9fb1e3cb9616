"""HTTP prediction service over an immutable built model.

The model (spec + data -> tree) is built once at startup. Every response
carries the model fingerprint so clients can detect a swap; POST /reload
rebuilds and swaps atomically, and an in-flight request keeps the version it
started with. Evaluation runs as background jobs polled by id.
"""

from __future__ import annotations

import itertools
import threading
import time
from dataclasses import asdict, dataclass
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .cli import fingerprint_files, make_builders, query_from_parts
from .decision import Substitution, classify, counterfactual
from .errors import FptError, SchemaViolation, UndefinedConditionalError
from .evaluation import bootstrap_compare, bootstrap_evaluate, comparison_to_json, report_to_json
from .fuzzy import ConditionalBinding, LinguisticVariable, term_degrees
from .inference import conditional_probability, predict_detailed
from .ingest import complete_rows, load_dataset, load_spec
from .tree import Statement, build_tree, tree_stats, tree_to_document


@dataclass(frozen=True)
class ModelState:
    spec_path: str
    data_path: str
    alpha: float
    spec: object
    rows: list
    tree: object
    fingerprint: str
    started_at: float


def _build_state(spec_path: str, data_path: str, alpha: float) -> ModelState:
    spec = load_spec(spec_path)
    rows, _ = load_dataset(data_path, spec)
    usable = complete_rows(rows, spec)
    tree = build_tree(usable, spec.variables, spec.bindings, alpha=alpha)
    return ModelState(
        spec_path=spec_path,
        data_path=data_path,
        alpha=alpha,
        spec=spec,
        rows=usable,
        tree=tree,
        fingerprint=fingerprint_files(spec_path, data_path),
        started_at=time.time(),
    )


class ModelHolder:
    """Single mutable cell; assignment is the atomic swap point."""

    def __init__(self, state: ModelState):
        self.current = state


@dataclass
class Job:
    status: str = "running"
    report: Optional[dict] = None
    error: Optional[str] = None


class PredictRequest(BaseModel):
    statements: dict[str, str] = {}
    raw_values: dict[str, float] = {}
    threshold: Optional[float] = None
    target_class: int = 1
    conditions: Optional[dict[str, str]] = None


class SubstitutionBody(BaseModel):
    variable: str
    value: Optional[str] = None
    raw: Optional[float] = None


class CounterfactualRequest(BaseModel):
    statements: dict[str, str] = {}
    raw_values: dict[str, float] = {}
    substitutions: list[SubstitutionBody] = []
    threshold: Optional[float] = None
    target_class: int = 1


class EvaluateRequest(BaseModel):
    resamples: int = 250
    seed: int = 0
    test_fraction: float = 0.2
    threshold: Optional[float] = None
    parallel: bool = False
    paired: bool = False


class ReloadRequest(BaseModel):
    spec_path: Optional[str] = None
    data_path: Optional[str] = None


def _branches_json(branches) -> list[dict]:
    return [
        {
            "parent": b.parent_id,
            "variable": b.variable,
            "value": b.value,
            "weight": b.weight,
            "mode": b.mode,
        }
        for b in branches
    ]


def create_app(spec_path: str, data_path: str, *, alpha: float = 0.0) -> FastAPI:
    holder = ModelHolder(_build_state(spec_path, data_path, alpha))
    jobs: dict[str, Job] = {}
    job_ids = itertools.count(1)

    app = FastAPI(title="fuzzy probability tree service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.holder = holder

    @app.exception_handler(UndefinedConditionalError)
    async def undefined_conditional(_req: Request, err: UndefinedConditionalError):
        return JSONResponse(
            status_code=409,
            content={
                "detail": {
                    "error": str(err),
                    "conditions": [[s.variable, s.value] for s in err.conditions],
                }
            },
        )

    @app.exception_handler(FptError)
    async def validation_failure(_req: Request, err: FptError):
        loc = ["body"]
        if isinstance(err, SchemaViolation) and err.variable:
            loc.append(err.variable)
        return JSONResponse(
            status_code=422,
            content={"detail": [{"loc": loc, "msg": str(err), "type": type(err).__name__}]},
        )

    @app.get("/model")
    def model_summary():
        state = holder.current
        spec = state.spec
        variables = []
        for var in spec.variables:
            entry: dict = {"name": var.name, "values": list(var.values)}
            binding = spec.bindings.get(var.name)
            if binding is not None:
                entry["fuzzy"] = True
                entry["raw_feature"] = binding.raw_feature
                if isinstance(binding, ConditionalBinding):
                    entry["selector"] = binding.selector
                    entry["cases"] = sorted(binding.cases)
                else:
                    entry["crisp_cut"] = binding.crisp_cut
                    entry["positive_term"] = binding.positive_term
            else:
                entry["fuzzy"] = False
            variables.append(entry)
        return {
            "fingerprint": state.fingerprint,
            "started_at": state.started_at,
            "rows": state.tree.n_rows,
            "threshold": spec.threshold,
            "class": {
                "column": spec.class_column,
                "positive": spec.positive_label,
                "negative": spec.negative_label,
            },
            "variables": variables,
            "stats": asdict(tree_stats(state.tree)),
        }

    @app.get("/tree")
    def tree_document():
        state = holder.current
        return {"fingerprint": state.fingerprint, "tree": tree_to_document(state.tree)}

    @app.get("/fuzzy/{variable}")
    def fuzzy_curves(variable: str, at: Optional[float] = None, case: Optional[str] = None):
        state = holder.current
        binding = state.spec.bindings.get(variable)
        if binding is None:
            return JSONResponse(
                status_code=404, content={"detail": f"no fuzzy binding for {variable!r}"}
            )
        if isinstance(binding, ConditionalBinding):
            if case is None or case not in binding.cases:
                return JSONResponse(
                    status_code=422,
                    content={
                        "detail": [
                            {
                                "loc": ["query", "case"],
                                "msg": f"{variable!r} varies by {binding.selector!r}; "
                                f"pass ?case= one of {sorted(binding.cases)}",
                                "type": "missing_case",
                            }
                        ]
                    },
                )
            lv: LinguisticVariable = binding.cases[case]
        else:
            lv = binding
        lo, hi = lv.resolved_support()
        n = 200
        xs = [lo + i * (hi - lo) / (n - 1) for i in range(n)]
        curves = {term: [lv.degree(term, x) for x in xs] for term in lv.term_labels()}
        body = {
            "fingerprint": state.fingerprint,
            "variable": variable,
            "raw_feature": lv.raw_feature,
            "support": [lo, hi],
            "crisp_cut": lv.crisp_cut,
            "positive_term": lv.positive_term,
            "x": xs,
            "terms": curves,
        }
        if at is not None:
            body["at"] = {"x": at, "degrees": term_degrees(lv, at)}
        return body

    @app.post("/predict")
    def predict_endpoint(req: PredictRequest):
        state = holder.current
        threshold = req.threshold if req.threshold is not None else state.spec.threshold
        if req.conditions is not None:
            conditions = [Statement(k, v) for k, v in req.conditions.items()]
            value = conditional_probability(state.tree, conditions, req.target_class)
            return {
                "fingerprint": state.fingerprint,
                "conditional_probability": value,
                "target_class": req.target_class,
                "conditions": [[s.variable, s.value] for s in conditions],
            }
        query = query_from_parts(state.spec, req.statements, req.raw_values, req.target_class)
        detail = predict_detailed(state.tree, query)
        p_other = predict_detailed(state.tree, query.complement()).probability
        p1 = detail.probability if req.target_class == 1 else p_other
        p0 = p_other if req.target_class == 1 else detail.probability
        decision = classify(p1, threshold)
        return {
            "fingerprint": state.fingerprint,
            "p0": p0,
            "p1": p1,
            "probability": detail.probability,
            "target_class": req.target_class,
            "label": decision.label,
            "threshold": threshold,
            "path_weights": _branches_json(detail.branches),
        }

    @app.post("/counterfactual")
    def counterfactual_endpoint(req: CounterfactualRequest):
        state = holder.current
        threshold = req.threshold if req.threshold is not None else state.spec.threshold
        query = query_from_parts(state.spec, req.statements, req.raw_values, req.target_class)
        subs = [Substitution(s.variable, s.value, s.raw) for s in req.substitutions]
        result = counterfactual(state.tree, query, subs, threshold=threshold)
        return {
            "fingerprint": state.fingerprint,
            "factual": {
                "probability": result.factual.probability,
                "label": result.factual.label,
                "statements": [[s.variable, s.value] for s in result.factual.statements],
            },
            "counterfactual": {
                "probability": result.counterfactual.probability,
                "label": result.counterfactual.label,
                "statements": [
                    [s.variable, s.value] for s in result.counterfactual.statements
                ],
            },
            "delta": result.delta,
            "threshold": threshold,
            "target_class": result.target_class,
            "substitutions": [asdict(s) for s in result.substitutions],
        }

    @app.post("/evaluate")
    def evaluate_endpoint(req: EvaluateRequest):
        state = holder.current
        job_id = f"eval-{next(job_ids)}"
        job = Job()
        jobs[job_id] = job
        threshold = req.threshold if req.threshold is not None else state.spec.threshold

        def work():
            try:
                kwargs = dict(
                    resamples=req.resamples,
                    seed=req.seed,
                    test_fraction=req.test_fraction,
                    threshold=threshold,
                    parallel=req.parallel,
                )
                if req.paired:
                    comparison = bootstrap_compare(
                        state.rows,
                        {
                            "fuzzy": make_builders(state.spec, fuzzy=True, alpha=state.alpha),
                            "crisp": make_builders(state.spec, fuzzy=False, alpha=state.alpha),
                        },
                        **kwargs,
                    )
                    job.report = comparison_to_json(comparison)
                else:
                    report = bootstrap_evaluate(
                        state.rows,
                        make_builders(state.spec, fuzzy=True, alpha=state.alpha),
                        model_name="fuzzy",
                        **kwargs,
                    )
                    job.report = report_to_json(report)
                job.status = "done"
            except Exception as err:  # surfaced via polling, not a 500
                job.error = str(err)
                job.status = "failed"

        threading.Thread(target=work, daemon=True).start()
        return {"fingerprint": state.fingerprint, "job_id": job_id, "status": job.status}

    @app.get("/evaluate/{job_id}")
    def evaluate_status(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"detail": f"no job {job_id!r}"})
        body: dict = {"job_id": job_id, "status": job.status}
        if job.report is not None:
            body["report"] = job.report
        if job.error is not None:
            body["error"] = job.error
        return body

    @app.post("/reload")
    def reload_endpoint(req: ReloadRequest):
        old = holder.current
        try:
            state = _build_state(
                req.spec_path or old.spec_path, req.data_path or old.data_path, old.alpha
            )
        except OSError as err:
            return JSONResponse(
                status_code=422,
                content={"detail": [{"loc": ["body"], "msg": str(err), "type": "OSError"}]},
            )
        holder.current = state
        return {"fingerprint": state.fingerprint, "previous": old.fingerprint}

    return app
