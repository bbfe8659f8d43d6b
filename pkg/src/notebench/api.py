"""Local HTTP API over the triage store, consumed by the reviewer UI.

Endpoints: GET /queue, GET /item/{id}, POST /verdict, GET /summary,
GET /export.  Item payloads present the notes only as A and B; author
identity never crosses the wire.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from .errors import AlreadyReviewedError, UnknownEncounterError
from .triage import ReviewCategory, ReviewVerdict, TriageStore, triage_summary


class VerdictRequest(BaseModel):
    encounter_id: str
    category: ReviewCategory
    rationale: str = ""
    reviewer_id: str = Field(default="default", min_length=1)


def create_app(store: TriageStore) -> FastAPI:
    app = FastAPI(title="notebench triage", docs_url=None, redoc_url=None)
    # the reviewer UI may be served from file:// or another local port
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.get("/queue")
    def get_queue() -> dict:
        pending = [item.public_payload("pending") for item in store.pending()]
        return {
            "pending": pending,
            "total": len(store.order),
            "done": len(store.order) - len(pending),
        }

    @app.get("/item/{encounter_id}")
    def get_item(encounter_id: str) -> dict:
        try:
            item = store.item(encounter_id)
        except UnknownEncounterError:
            raise HTTPException(status_code=404, detail=f"unknown encounter {encounter_id}")
        status = store.status(encounter_id)
        payload = item.public_payload(status)
        if status == "done":
            verdict = store.verdict_for(encounter_id)
            if verdict is not None:
                payload["verdict"] = verdict.as_dict()
        return payload

    @app.post("/verdict")
    def post_verdict(request: VerdictRequest) -> dict:
        verdict = ReviewVerdict(
            encounter_id=request.encounter_id,
            category=request.category,
            rationale=request.rationale,
            reviewer_id=request.reviewer_id,
        )
        try:
            ack = store.record_verdict(verdict)
        except UnknownEncounterError:
            raise HTTPException(
                status_code=404, detail=f"unknown encounter {request.encounter_id}"
            )
        except AlreadyReviewedError as exc:
            existing = store.verdict_for(request.encounter_id)
            raise HTTPException(
                status_code=409,
                detail={
                    "message": str(exc),
                    "recorded": existing.as_dict() if existing else None,
                },
            )
        return ack

    @app.get("/summary")
    def get_summary() -> dict:
        return triage_summary(store).as_dict()

    @app.get("/export")
    def get_export() -> dict:
        return {"verdicts": [v.as_dict() for v in store.verdicts()]}

    return app
