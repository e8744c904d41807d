"""HTTP+JSON service for the interactive loop: query -> clusters -> feedback.

Sessions hold the query's neighborhood, clusters, and diagnostics; they are
immutable after creation and evicted LRU beyond a bounded count. Re-ranking
is recomputed per feedback request (it is cheap and keeps sessions stateless
with respect to selections).
"""

from __future__ import annotations

import threading
import time
import uuid
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse
from pydantic import BaseModel

from .data import FeatureStore, TopicLabels, ValidationError
from .disambiguation import (
    ClusterSet,
    DisambiguationParams,
    EigengapDiagnostics,
    FeedbackSelection,
    disambiguate,
)
from .rerank import RerankParams, rerank_from_distances
from .retrieval import NeighborSet, Query, all_distances, knn

DEFAULT_MAX_SESSIONS = 1024
IMAGE_SUFFIXES = ("", ".jpg", ".jpeg", ".png", ".gif", ".webp")


@dataclass
class Session:
    session_id: str
    query: Query
    distances: np.ndarray
    neighbors: NeighborSet
    clusters: ClusterSet
    diagnostics: EigengapDiagnostics
    created_at: float


class SessionStore:
    """Bounded in-memory session map with LRU eviction."""

    def __init__(self, capacity: int = DEFAULT_MAX_SESSIONS):
        self.capacity = capacity
        self._lock = threading.RLock()
        self._sessions: OrderedDict[str, Session] = OrderedDict()

    def put(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.session_id] = session
            self._sessions.move_to_end(session.session_id)
            while len(self._sessions) > self.capacity:
                self._sessions.popitem(last=False)

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is not None:
                self._sessions.move_to_end(session_id)
            return session

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)


class QueryParamsModel(BaseModel):
    m: int | None = None
    eta: float | None = None
    cap: int | None = None
    r: int | None = None
    seed: int | None = None


class QueryRequest(BaseModel):
    item_index: int | None = None
    vector: list[float] | None = None
    params: QueryParamsModel | None = None


class FeedbackRequest(BaseModel):
    selected: list[int] = []
    offset: int = 0
    limit: int = 50
    gamma: float | None = None


def create_app(
    store: FeatureStore,
    labels: TopicLabels | None = None,
    images_dir: str | None = None,
    seed: int = 0,
    m: int = 200,
    eta: float | None = None,
    cap: int = 10,
    r: int = 10,
    max_sessions: int = DEFAULT_MAX_SESSIONS,
    ui_dir: str | None = None,
) -> FastAPI:
    """Build the service around one read-only dataset."""
    app = FastAPI(title="aid", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = SessionStore(max_sessions)
    defaults = {"m": m, "eta": eta, "cap": cap, "r": r, "seed": seed}

    def item_id(index: int) -> str | None:
        return store.ids[index] if store.ids is not None else None

    @app.get("/api/health")
    def health():
        payload = {
            "status": "ok",
            "items": store.n,
            "dim": store.d,
            "sessions": len(sessions),
        }
        if labels is not None:
            payload["topics"] = labels.topics
        return payload

    @app.post("/api/query")
    def create_query_session(req: QueryRequest):
        if (req.item_index is None) == (req.vector is None):
            raise HTTPException(400, "provide exactly one of item_index / vector")
        p = req.params or QueryParamsModel()
        m_eff = p.m if p.m is not None else defaults["m"]
        eta_eff = p.eta if p.eta is not None else defaults["eta"]
        cap_eff = p.cap if p.cap is not None else defaults["cap"]
        r_eff = p.r if p.r is not None else defaults["r"]
        seed_eff = p.seed if p.seed is not None else defaults["seed"]
        if req.item_index is not None:
            if not 0 <= req.item_index < store.n:
                raise HTTPException(404, f"unknown item index {req.item_index}")
            query = Query(store.doubles()[req.item_index], exclude_index=req.item_index)
        else:
            vec = np.asarray(req.vector, dtype=np.float64)
            if vec.size != store.d:
                raise HTTPException(400, f"vector has d={vec.size}, dataset has d={store.d}")
            try:
                query = Query(vec)
            except ValidationError as exc:
                raise HTTPException(400, str(exc)) from exc
        try:
            dist = all_distances(store, query)
            neighbors = knn(store, query, m_eff)
            clusters, diagnostics = disambiguate(
                neighbors,
                DisambiguationParams(eta=eta_eff, cap=cap_eff, r=r_eff, seed=seed_eff),
            )
        except ValidationError as exc:
            raise HTTPException(400, str(exc)) from exc
        session = Session(
            session_id=uuid.uuid4().hex,
            query=query,
            distances=dist,
            neighbors=neighbors,
            clusters=clusters,
            diagnostics=diagnostics,
            created_at=time.time(),
        )
        sessions.put(session)
        return {
            "session_id": session.session_id,
            "k": clusters.k,
            "clusters": [
                {
                    "id": c,
                    "size": int(clusters.members[c].size),
                    "previews": [
                        {
                            "index": int(idx),
                            "id": item_id(int(idx)),
                            "distance": float(d),
                        }
                        for idx, d in zip(
                            clusters.previews[c], clusters.preview_distances[c]
                        )
                    ],
                }
                for c in range(clusters.k)
            ],
            "eigengap": [float(v) for v in diagnostics.eigenvalues],
            "params": {
                "m": m_eff,
                "eta": diagnostics.eta,
                "cap": cap_eff,
                "r": r_eff,
                "seed": seed_eff,
            },
        }

    @app.post("/api/sessions/{session_id}/feedback")
    def submit_feedback(session_id: str, req: FeedbackRequest):
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session {session_id}")
        if req.offset < 0 or req.limit < 1:
            raise HTTPException(400, "offset must be >= 0 and limit >= 1")
        selection = FeedbackSelection(req.selected)
        for c in selection.selected:
            if not 0 <= c < session.clusters.k:
                raise HTTPException(400, f"invalid cluster id {c}")
        params = RerankParams(gamma=req.gamma if req.gamma is not None else 1.0)
        ranked = rerank_from_distances(
            store.doubles(),
            session.query.vector,
            session.distances,
            session.clusters,
            selection,
            params,
        )
        page = slice(req.offset, req.offset + req.limit)
        return {
            "total": len(ranked),
            "offset": req.offset,
            "items": [
                {
                    "index": int(idx),
                    "id": item_id(int(idx)),
                    "delta": float(d),
                    "sigma": float(s),
                    "delta_tilde": float(dt),
                }
                for idx, d, s, dt in zip(
                    ranked.order[page],
                    ranked.delta[page],
                    ranked.sigma[page],
                    ranked.delta_tilde[page],
                )
            ],
        }

    @app.get("/api/images/{index}")
    def image(index: int):
        if images_dir is None:
            raise HTTPException(404, "no images directory configured")
        if not 0 <= index < store.n:
            raise HTTPException(404, f"unknown item index {index}")
        from pathlib import Path

        stem = store.ids[index] if store.ids is not None else str(index)
        base = Path(images_dir)
        for suffix in IMAGE_SUFFIXES:
            candidate = base / f"{stem}{suffix}"
            if candidate.is_file():
                return FileResponse(candidate)
        raise HTTPException(404, f"no image for item {index}")

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
