"""Stateless-computation HTTP facade over the estimators.

Datasets are uploaded once into in-memory sessions; every computation
endpoint is a pure function of (session dataset, request body including
seed), so concurrent requests on one session are safe and results are
reproducible. Jobs that exceed one second detach into a worker pool and are
polled through the progress endpoint.
"""

from __future__ import annotations

import argparse
import io
import math
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .data_io import IngestConfig, load_csv
from .errors import (
    EmptyDataset,
    FairscoreError,
    ParseError,
    ReferenceOutsideRegion,
    SchemaError,
)
from .estimators import (
    RankingScope,
    audit_reference,
    estimate_up,
    stable_rankings,
    suggest_fair,
)
from .rng import RngStream
from .sampler import DEFAULT_GAMMA, RegionOfInterest
from .scoring import Dataset, FairnessConstraint, check_fairness, group_counts, rank

DEFAULT_TTL_SECONDS = 3600.0
SYNC_WAIT_SECONDS = 1.0


# ---------------------------------------------------------------------------
# request / response models


class ConstraintModel(BaseModel):
    group: str
    k: int = Field(ge=1)
    min_count: int = Field(default=0, ge=0)
    max_count: int | None = None


class VicinityBody(BaseModel):
    weights: list[float]
    theta: float | None = None
    cosine_similarity: float | None = None
    seed: int = 0
    gamma: int = DEFAULT_GAMMA

    def resolve_theta(self) -> float:
        if (self.theta is None) == (self.cosine_similarity is None):
            raise HTTPException(
                status_code=422,
                detail="provide exactly one of 'theta' and 'cosine_similarity'",
            )
        if self.theta is not None:
            return self.theta
        if not -1.0 <= self.cosine_similarity <= 1.0:
            raise HTTPException(status_code=422, detail="cosine_similarity must lie in [-1, 1]")
        return math.acos(self.cosine_similarity)


class RankBody(BaseModel):
    weights: list[float]
    k: int | None = None
    constraints: list[ConstraintModel] = Field(default_factory=list)


class UpBody(VicinityBody):
    constraints: list[ConstraintModel] = Field(default_factory=list)
    samples: int = 10_000
    alpha: float = 0.05


class SuggestBody(VicinityBody):
    constraints: list[ConstraintModel] = Field(default_factory=list)
    budget: int = 1000
    mode: str = "closest"


class AuditBody(VicinityBody):
    samples: int = 10_000
    alpha: float = 0.05
    scope: str = "full"
    k: int | None = None
    ordered: bool = False


class StableBody(VicinityBody):
    samples: int = 10_000
    top: int = 10
    alpha: float = 0.05
    scope: str = "full"
    k: int | None = None
    ordered: bool = False


def _constraints(models: list[ConstraintModel]) -> list[FairnessConstraint]:
    try:
        return [
            FairnessConstraint(
                group=m.group, k=m.k, min_count=m.min_count, max_count=m.max_count
            )
            for m in models
        ]
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def _scope(kind: str, k: int | None, ordered: bool) -> RankingScope:
    if kind == "full":
        return RankingScope.full()
    if kind in ("top_k", "top-k"):
        if k is None:
            raise HTTPException(status_code=422, detail="top-k scope requires 'k'")
        return RankingScope.top_k(k, ordered=ordered)
    raise HTTPException(status_code=422, detail=f"unknown scope {kind!r}")


# ---------------------------------------------------------------------------
# sessions and jobs


@dataclass
class Job:
    id: str
    done_fraction: float = 0.0
    result: dict | None = None
    error: tuple[int, str] | None = None

    @property
    def done(self) -> bool:
        return self.result is not None or self.error is not None


@dataclass
class Session:
    id: str
    dataset: Dataset
    created: float
    last_used: float
    jobs: dict[str, Job] = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    tables_lock: threading.Lock = field(default_factory=threading.Lock)

    def cdf_table(self, roi: RegionOfInterest, gamma: int):
        """Per-session cache of polar-angle CDF tables keyed by (theta, gamma, d)."""
        if roi.dimension < 3:
            return None
        key = (roi.theta, gamma, roi.dimension)
        with self.tables_lock:
            table = self.tables.get(key)
            if table is None:
                from .sampler import build_cdf_table

                table = build_cdf_table(roi.theta, gamma, roi.dimension)
                self.tables[key] = table
            return table


class SessionStore:
    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.ttl = ttl_seconds
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, dataset: Dataset) -> Session:
        now = time.monotonic()
        session = Session(id=uuid.uuid4().hex, dataset=dataset, created=now, last_used=now)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
            now = time.monotonic()
            if now - session.last_used > self.ttl:
                del self._sessions[session_id]
                raise HTTPException(status_code=410, detail=f"session {session_id!r} expired")
            session.last_used = now
            return session


# ---------------------------------------------------------------------------
# serialization helpers


def _roi(body: VicinityBody) -> RegionOfInterest:
    try:
        return RegionOfInterest.around(np.array(body.weights, dtype=float), body.resolve_theta())
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def _rank_payload(data: Dataset, weights: list[float], k: int | None, constraints) -> dict:
    from .geometry import unit

    ranking = rank(data, np.array(weights, dtype=float))
    groups = {rid: g for rid, g in zip(data.ids, data.groups)}
    payload = {
        "order": list(ranking.order),
        "scores": list(ranking.scores),
        "groups": [groups[rid] for rid in ranking.order],
        "weights": list(weights),
        "direction": unit(np.array(weights, dtype=float)).tolist(),
    }
    if k is not None:
        payload["k"] = k
        payload["group_counts"] = group_counts(ranking, data, k)
    if constraints:
        payload["fair"] = check_fairness(ranking, data, constraints)
    return payload


def create_app(
    ttl_seconds: float = DEFAULT_TTL_SECONDS,
    max_workers: int = 4,
    sync_wait: float = SYNC_WAIT_SECONDS,
) -> FastAPI:
    app = FastAPI(title="fairscore service", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(ttl_seconds)
    pool = ThreadPoolExecutor(max_workers=max_workers)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(FairscoreError)
    async def semantic_error(request: Request, exc: FairscoreError):
        if isinstance(exc, (SchemaError, ParseError, EmptyDataset)):
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def invalid_value(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    def run_job(session: Session, compute) -> JSONResponse | dict:
        """Run ``compute(progress_cb)``; detach with a job id if it is slow."""
        job = Job(id=uuid.uuid4().hex)
        session.jobs[job.id] = job

        def progress(done: int, total: int):
            job.done_fraction = done / total

        def target():
            try:
                job.result = compute(progress)
                job.done_fraction = 1.0
            except HTTPException as exc:
                job.error = (exc.status_code, str(exc.detail))
            except (SchemaError, ParseError, EmptyDataset) as exc:
                job.error = (400, str(exc))
            except (FairscoreError, ValueError) as exc:
                job.error = (422, str(exc))
            except Exception as exc:  # pragma: no cover - defensive
                job.error = (500, str(exc))

        future = pool.submit(target)
        try:
            future.result(timeout=sync_wait)
        except FutureTimeoutError:
            return JSONResponse(status_code=202, content={"job_id": job.id, "status": "running"})
        if job.error is not None:
            status, detail = job.error
            raise HTTPException(status_code=status, detail=detail)
        return job.result

    @app.post("/datasets")
    async def upload_dataset(
        request: Request,
        scoring_cols: str,
        id_col: str | None = None,
        sensitive: str | None = None,
        normalization: str = "none",
    ):
        body = (await request.body()).decode("utf-8")
        config = IngestConfig(
            scoring_columns=tuple(c.strip() for c in scoring_cols.split(",")),
            id_column=id_col,
            sensitive_column=sensitive,
            normalization=normalization,
        )
        dataset = load_csv(io.StringIO(body), config)
        session = store.create(dataset)
        return {
            "session_id": session.id,
            "n": dataset.n,
            "d": dataset.d,
            "columns": list(dataset.attribute_names),
            "groups": sorted(dataset.group_values),
            "digest": dataset.digest(),
        }

    @app.post("/sessions/{session_id}/rank")
    async def rank_endpoint(session_id: str, body: RankBody):
        session = store.get(session_id)
        return _rank_payload(session.dataset, body.weights, body.k, _constraints(body.constraints))

    @app.post("/sessions/{session_id}/up")
    async def up_endpoint(session_id: str, body: UpBody):
        session = store.get(session_id)
        roi = _roi(body)
        constraints = _constraints(body.constraints)

        def compute(progress):
            estimate = estimate_up(
                session.dataset, constraints, roi, body.samples, body.alpha,
                RngStream(body.seed), gamma=body.gamma,
                table=session.cdf_table(roi, body.gamma), progress=progress,
            )
            return {
                "up": estimate.up,
                "error": estimate.error,
                "alpha": estimate.alpha,
                "samples": estimate.samples,
                "seed": body.seed,
            }

        return run_job(session, compute)

    @app.post("/sessions/{session_id}/suggest")
    async def suggest_endpoint(session_id: str, body: SuggestBody):
        session = store.get(session_id)
        roi = _roi(body)
        constraints = _constraints(body.constraints)

        def compute(progress):
            suggestion = suggest_fair(
                session.dataset, constraints, roi, body.budget, RngStream(body.seed),
                mode=body.mode, gamma=body.gamma,
                table=session.cdf_table(roi, body.gamma), progress=progress,
            )
            return {
                "found": suggestion.found,
                "function": suggestion.function.tolist() if suggestion.found else None,
                "samples_used": suggestion.samples_used,
                "angular_gap": suggestion.angular_gap,
                "reference": body.weights,
                "seed": body.seed,
            }

        return run_job(session, compute)

    @app.post("/sessions/{session_id}/audit")
    async def audit_endpoint(session_id: str, body: AuditBody):
        session = store.get(session_id)
        roi = _roi(body)
        scope = _scope(body.scope, body.k, body.ordered)

        def compute(progress):
            try:
                result = audit_reference(
                    session.dataset, np.array(body.weights, dtype=float), roi,
                    body.samples, body.alpha, RngStream(body.seed),
                    scope=scope, gamma=body.gamma,
                    table=session.cdf_table(roi, body.gamma), progress=progress,
                )
            except ReferenceOutsideRegion as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from None
            return {
                "stability": result.stability,
                "error": result.error,
                "alpha": result.alpha,
                "samples": result.samples,
                "matches": result.matches,
                "seed": body.seed,
            }

        return run_job(session, compute)

    @app.post("/sessions/{session_id}/stable")
    async def stable_endpoint(session_id: str, body: StableBody):
        session = store.get(session_id)
        roi = _roi(body)
        scope = _scope(body.scope, body.k, body.ordered)

        def compute(progress):
            report = stable_rankings(
                session.dataset, roi, body.samples, body.top, scope,
                RngStream(body.seed), alpha=body.alpha,
                reference=np.array(body.weights, dtype=float),
                gamma=body.gamma, table=session.cdf_table(roi, body.gamma),
                progress=progress,
            )
            return {
                "top_rankings": [
                    {
                        "fingerprint": e.fingerprint,
                        "count": e.count,
                        "stability": e.stability,
                        "ids": list(e.ids),
                        "weights": e.weights.tolist(),
                    }
                    for e in report.top_rankings
                ],
                "histogram": report.histogram,
                "total_samples": report.total_samples,
                "reference_stability": list(report.reference_stability),
                "seed": body.seed,
            }

        return run_job(session, compute)

    @app.get("/sessions/{session_id}/progress/{job_id}")
    async def progress_endpoint(session_id: str, job_id: str):
        session = store.get(session_id)
        job = session.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        out: dict = {"done_fraction": job.done_fraction, "done": job.done}
        if job.result is not None:
            out["result"] = job.result
        if job.error is not None:
            out["error"] = {"status": job.error[0], "detail": job.error[1]}
        return out

    return app


def main(argv=None) -> None:
    import uvicorn

    parser = argparse.ArgumentParser(prog="fairscore-serve", description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8080)
    parser.add_argument("--ttl", type=float, default=DEFAULT_TTL_SECONDS, help="session idle TTL in seconds")
    parser.add_argument("--workers", type=int, default=4, help="bounded pool for long jobs")
    ns = parser.parse_args(argv)
    uvicorn.run(create_app(ttl_seconds=ns.ttl, max_workers=ns.workers), host=ns.host, port=ns.port)


if __name__ == "__main__":
    main()
