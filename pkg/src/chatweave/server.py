"""HTTP API serving annotation and comparison tasks and persisting the
records the browser UI submits.

Endpoints:
    GET  /tasks?annotator=ID&n=K          next unlabeled annotation tasks
    GET  /tasks?type=comparison&judge=ID  next unjudged comparison tasks
    POST /annotations                     one good/bad record; 422 on schema break
    POST /judgments                       one forced-choice result
    GET  /stats                           corpus statistics
    GET  /kappa                           inter-annotator agreement report

Appends are serialized by the underlying record logs; reads see the log
state as of the last completed append.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .annotation import (
    AnnotationRecord,
    AnnotationStore,
    AnnotationTask,
    Justification,
    Label,
    agreement_report,
    corpus_stats,
)
from .errors import NotFoundError, SchemaError, UndefinedAgreementError
from .pairwise import ComparisonResult, ComparisonTask, Side
from .store import RecordLog


class AnnotationIn(BaseModel):
    candidate_id: str
    annotator_id: str
    label: str
    justifications: list[str] = []
    timestamp: str = ""


class JudgmentIn(BaseModel):
    task_id: str
    judge_id: str
    winner: str
    timestamp: str = ""


@dataclass
class AnnotationService:
    """Bundle of task definitions and record logs behind the API.

    ``judgments_per_task`` caps how many distinct judges see each
    comparison before it stops being served.
    """

    tasks: list[AnnotationTask] = field(default_factory=list)
    comparison_tasks: list[ComparisonTask] = field(default_factory=list)
    annotation_log: RecordLog | None = None
    judgment_log: RecordLog | None = None
    judgments_per_task: int = 1

    def __post_init__(self) -> None:
        if self.annotation_log is None or self.judgment_log is None:
            raise ValueError("both record logs are required")
        self.store = AnnotationStore(
            self.annotation_log,
            known_ids={t.candidate.candidate_id for t in self.tasks} or None,
        )
        self._tasks_by_candidate = {t.candidate.candidate_id: t for t in self.tasks}
        self._comparisons_by_id = {t.task_id: t for t in self.comparison_tasks}

    @classmethod
    def from_dir(
        cls,
        data_dir: str | Path,
        tasks: Sequence[AnnotationTask] = (),
        comparison_tasks: Sequence[ComparisonTask] = (),
        judgments_per_task: int = 1,
    ) -> AnnotationService:
        data_dir = Path(data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        return cls(
            tasks=list(tasks),
            comparison_tasks=list(comparison_tasks),
            annotation_log=RecordLog(data_dir / "annotations.log"),
            judgment_log=RecordLog(data_dir / "judgments.log"),
            judgments_per_task=judgments_per_task,
        )

    # -- annotation side ----------------------------------------------------

    def next_tasks(self, annotator_id: str, n: int) -> list[AnnotationTask]:
        done = self.store.annotated_ids(annotator_id)
        pending = [t for t in self.tasks if t.candidate.candidate_id not in done]
        return pending[:n]

    def submit_annotation(self, record: AnnotationRecord) -> dict[str, Any]:
        return self.store.record_annotation(record)

    def stats(self) -> dict[str, Any]:
        labeled = self.store.labeled(
            {cid: t.candidate for cid, t in self._tasks_by_candidate.items()}
        )
        return corpus_stats(labeled).to_dict()

    def kappa(self) -> dict[str, Any]:
        grouped = self.store.records_by_candidate()
        ratings = {
            cid: [r.label.value for r in records] for cid, records in grouped.items()
        }
        return agreement_report(ratings)

    # -- comparison side ----------------------------------------------------

    def next_comparisons(self, judge_id: str, n: int) -> list[ComparisonTask]:
        judges_by_task: dict[str, set[str]] = {}
        for record in self.judgment_log.records():
            judges_by_task.setdefault(record["task_id"], set()).add(
                record.get("judge_id", "")
            )
        pending = []
        for task in self.comparison_tasks:
            judges = judges_by_task.get(task.task_id, set())
            if judge_id in judges or len(judges) >= self.judgments_per_task:
                continue
            pending.append(task)
        return pending[:n]

    def submit_judgment(self, result: ComparisonResult) -> dict[str, Any]:
        if result.task_id not in self._comparisons_by_id:
            raise NotFoundError(f"unknown comparison task {result.task_id}")
        self.judgment_log.append(result.to_dict())
        return {"status": "ok", "task_id": result.task_id}

    def judgments(self) -> list[ComparisonResult]:
        return [ComparisonResult.from_dict(r) for r in self.judgment_log.records()]


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def create_app(service: AnnotationService) -> FastAPI:
    app = FastAPI(title="chatweave annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/tasks")
    def get_tasks(
        type: str = Query("annotation"),
        annotator: str | None = Query(None),
        judge: str | None = Query(None),
        n: int = Query(10, ge=1),
    ) -> dict[str, Any]:
        if type == "comparison":
            who = judge or annotator
            if not who:
                raise HTTPException(422, detail="judge id is required")
            return {"tasks": [t.public_dict() for t in service.next_comparisons(who, n)]}
        if type != "annotation":
            raise HTTPException(422, detail=f"unknown task type {type!r}")
        if not annotator:
            raise HTTPException(422, detail="annotator id is required")
        return {"tasks": [t.to_dict() for t in service.next_tasks(annotator, n)]}

    @app.post("/annotations")
    def post_annotation(body: AnnotationIn) -> dict[str, Any]:
        try:
            record = AnnotationRecord(
                candidate_id=body.candidate_id,
                annotator_id=body.annotator_id,
                label=Label(body.label),
                justifications=frozenset(
                    Justification(j) for j in body.justifications
                ),
                timestamp=body.timestamp or _now(),
            )
        except ValueError as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        try:
            return service.submit_annotation(record)
        except SchemaError as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        except NotFoundError as exc:
            raise HTTPException(404, detail=str(exc)) from exc

    @app.post("/judgments")
    def post_judgment(body: JudgmentIn) -> dict[str, Any]:
        try:
            result = ComparisonResult(
                task_id=body.task_id,
                judge_id=body.judge_id,
                winner=Side(body.winner),
                timestamp=body.timestamp or _now(),
            )
        except ValueError as exc:
            raise HTTPException(422, detail=str(exc)) from exc
        try:
            return service.submit_judgment(result)
        except NotFoundError as exc:
            raise HTTPException(404, detail=str(exc)) from exc

    @app.get("/stats")
    def get_stats() -> dict[str, Any]:
        return service.stats()

    @app.get("/kappa")
    def get_kappa() -> dict[str, Any]:
        try:
            return service.kappa()
        except UndefinedAgreementError as exc:
            return {"kappa": None, "detail": str(exc)}

    return app
