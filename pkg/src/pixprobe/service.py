"""Session-oriented HTTP API: upload, mask, inpaint, reclassify, CAM.

Sessions live in memory with idle-TTL eviction. Each session serializes its
mutating operations behind a lock; with lock_mode="reject" a second
concurrent mutation gets 409 instead of waiting. Every edit is recorded
(mask bytes, algorithm, effective parameters), so a session can be
snapshotted and replayed bit-exactly from its original image.

Wire format: JSON bodies; image payloads are base64 PNG. Masks are
single-channel PNGs thresholded at 0.5 (an RGB PNG whose channels agree is
accepted and collapsed, since browser canvases cannot emit grayscale).
"""

import base64
import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .cam import compute_cam, heatmap_image, render_overlay
from .errors import PixprobeError, UnknownSessionError
from .image import ImageBuffer, Mask, decode_image, encode_image, mask_from_image
from .model import ClassScores, ModelGraph, classify, load_model_dir
from .patchmatch import PatchMatchParams, inpaint_patchmatch
from .telea import DEFAULT_RADIUS, inpaint_telea

ALGORITHMS = ("telea", "patchmatch")


@dataclass
class ServiceConfig:
    model_dir: str = ""
    host: str = "127.0.0.1"
    port: int = 8000
    session_ttl: float = 1800.0
    history_cap: int = 20
    max_dim: int = 2048
    lock_mode: str = "wait"  # or "reject" -> 409 on concurrent mutation
    static_dir: str | None = None
    topk: int = 5

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        env = os.environ.get
        return cls(
            model_dir=env("PIXPROBE_MODEL", ""),
            host=env("PIXPROBE_HOST", "127.0.0.1"),
            port=int(env("PIXPROBE_PORT", "8000")),
            session_ttl=float(env("PIXPROBE_SESSION_TTL", "1800")),
            history_cap=int(env("PIXPROBE_HISTORY_CAP", "20")),
            max_dim=int(env("PIXPROBE_MAX_DIM", "2048")),
            lock_mode=env("PIXPROBE_LOCK_MODE", "wait"),
            static_dir=env("PIXPROBE_STATIC") or None,
        )


@dataclass
class EditRecord:
    mask_png: bytes
    algorithm: str
    params: dict


@dataclass
class Session:
    id: str
    original: ImageBuffer
    current: ImageBuffer
    original_scores: ClassScores
    current_scores: ClassScores
    history: list[ImageBuffer] = field(default_factory=list)
    edits: list[EditRecord] = field(default_factory=list)
    created: float = field(default_factory=time.monotonic)
    last_used: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """Thread-safe in-memory session map with idle-TTL eviction."""

    def __init__(self, ttl: float, history_cap: int):
        self.ttl = ttl
        self.history_cap = history_cap
        self._sessions: dict[str, Session] = {}
        self._guard = threading.Lock()

    def evict_expired(self):
        now = time.monotonic()
        with self._guard:
            dead = [sid for sid, s in self._sessions.items() if now - s.last_used > self.ttl]
            for sid in dead:
                del self._sessions[sid]

    def add(self, session: Session):
        with self._guard:
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        self.evict_expired()
        with self._guard:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"unknown session {session_id!r}")
        session.last_used = time.monotonic()
        return session

    def push_history(self, session: Session):
        session.history.append(session.current)
        if len(session.history) > self.history_cap:
            session.history.pop(0)

    def snapshot(self, session_id: str) -> dict:
        """JSON-able record sufficient to rebuild the current image."""
        session = self.get(session_id)
        return {
            "original_png": base64.b64encode(encode_image(session.original)).decode(),
            "edits": [
                {
                    "mask_png": base64.b64encode(e.mask_png).decode(),
                    "algorithm": e.algorithm,
                    "params": e.params,
                }
                for e in session.edits
            ],
        }


def replay_snapshot(snapshot: dict) -> ImageBuffer:
    """Rebuild the current image from a session snapshot."""
    img = decode_image(base64.b64decode(snapshot["original_png"]))
    for edit in snapshot["edits"]:
        mask = _decode_mask(base64.b64decode(edit["mask_png"]))
        img = _run_inpaint(img, mask, edit["algorithm"], edit["params"])
    return img


def _decode_mask(data: bytes) -> Mask:
    img = decode_image(data)
    if img.channels == 3:
        px = img.pixels
        if not (np.array_equal(px[..., 0], px[..., 1]) and np.array_equal(px[..., 1], px[..., 2])):
            raise PixprobeError("mask PNG must be single-channel (or gray RGB)")
        img = ImageBuffer(px[..., 0:1])
    return mask_from_image(img)


def _effective_params(algorithm: str, overrides: dict | None) -> dict:
    overrides = overrides or {}
    if algorithm == "telea":
        params = {"radius": int(overrides.get("radius", DEFAULT_RADIUS))}
    elif algorithm == "patchmatch":
        defaults = PatchMatchParams()
        params = {
            "patch_size": int(overrides.get("patch_size", defaults.patch_size)),
            "iterations": int(overrides.get("iterations", defaults.iterations)),
            "pyramid_min": int(overrides.get("pyramid_min", defaults.pyramid_min)),
            "search_decay": float(overrides.get("search_decay", defaults.search_decay)),
            "rng_seed": int(overrides.get("rng_seed", overrides.get("seed", defaults.rng_seed))),
        }
    else:
        raise PixprobeError(f"unknown algorithm {algorithm!r}")
    return params


def _run_inpaint(img: ImageBuffer, mask: Mask, algorithm: str, params: dict) -> ImageBuffer:
    if algorithm == "telea":
        return inpaint_telea(img, mask, params["radius"])
    return inpaint_patchmatch(img, mask, PatchMatchParams(**params))


class CreateSessionBody(BaseModel):
    image: str  # base64 PNG or JPEG


class InpaintBody(BaseModel):
    mask: str  # base64 single-channel PNG
    algorithm: str = "telea"
    params: dict | None = None


def _b64_png(img: ImageBuffer) -> str:
    return base64.b64encode(encode_image(img)).decode()


def _session_payload(session: Session, k: int, extra: dict | None = None) -> dict:
    body = {
        "session_id": session.id,
        "width": session.original.width,
        "height": session.original.height,
        "image": _b64_png(session.current),
        "scores": session.current_scores.to_json(),
        "original_scores": session.original_scores.to_json(),
        "history_depth": len(session.history),
    }
    if extra:
        body.update(extra)
    return body


def create_app(config: ServiceConfig, graph: ModelGraph | None = None) -> FastAPI:
    if graph is None:
        if not config.model_dir:
            raise ValueError("a model directory is required (PIXPROBE_MODEL or --model)")
        graph = load_model_dir(config.model_dir)

    app = FastAPI(title="pixprobe", version="0.1.0")
    store = SessionStore(config.session_ttl, config.history_cap)
    app.state.store = store
    app.state.graph = graph
    app.state.config = config

    def fail(status: int, message: str):
        raise HTTPException(status_code=status, detail=message)

    def acquire(session: Session):
        if config.lock_mode == "reject":
            if not session.lock.acquire(blocking=False):
                fail(409, "session is busy with another operation")
        else:
            session.lock.acquire()

    @app.exception_handler(PixprobeError)
    async def _domain_error(_request: Request, exc: PixprobeError):
        status = 404 if isinstance(exc, UnknownSessionError) else 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.post("/api/session")
    def create_session(body: CreateSessionBody):
        """Decode an upload, classify it, and open a session around it."""
        try:
            raw = base64.b64decode(body.image, validate=True)
        except Exception:
            fail(400, "image field is not valid base64")
        try:
            img = decode_image(raw)
        except PixprobeError as exc:
            fail(400, f"image decode failed: {exc}")
        if max(img.width, img.height) > config.max_dim:
            fail(413, f"image exceeds the {config.max_dim}px dimension cap")
        scores = classify(graph, img, config.topk)
        session = Session(
            id=secrets.token_urlsafe(24),
            original=img,
            current=img,
            original_scores=scores,
            current_scores=scores,
        )
        store.add(session)
        return _session_payload(session, config.topk)

    @app.get("/api/session/{session_id}")
    def get_session(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return _session_payload(session, config.topk,
                                    extra={"original": _b64_png(session.original)})

    @app.post("/api/session/{session_id}/inpaint")
    def apply_inpaint(session_id: str, body: InpaintBody):
        """Fill the masked region of the current image and reclassify."""
        session = store.get(session_id)
        if body.algorithm not in ALGORITHMS:
            fail(400, f"unknown algorithm {body.algorithm!r}; choose from {ALGORITHMS}")
        try:
            mask_bytes = base64.b64decode(body.mask, validate=True)
        except Exception:
            fail(400, "mask field is not valid base64")
        try:
            mask = _decode_mask(mask_bytes)
        except PixprobeError as exc:
            fail(400, f"mask decode failed: {exc}")
        if (mask.height, mask.width) != (session.original.height, session.original.width):
            fail(400, f"mask is {mask.width}x{mask.height}, session image is "
                      f"{session.original.width}x{session.original.height}")
        if mask.bits.all():
            fail(422, "mask covers the entire image; nothing known remains")
        params = _effective_params(body.algorithm, body.params)
        acquire(session)
        try:
            result = _run_inpaint(session.current, mask, body.algorithm, params)
            store.push_history(session)
            session.current = result
            session.current_scores = classify(graph, result, config.topk)
            session.edits.append(EditRecord(mask_bytes, body.algorithm, params))
        finally:
            session.lock.release()
        return _session_payload(session, config.topk)

    @app.post("/api/session/{session_id}/undo")
    def undo(session_id: str):
        session = store.get(session_id)
        acquire(session)
        try:
            if session.history:
                session.current = session.history.pop()
                session.current_scores = classify(graph, session.current, config.topk)
                if session.edits:
                    session.edits.pop()
                empty = False
            else:
                empty = True
        finally:
            session.lock.release()
        return _session_payload(session, config.topk, extra={"history_empty": empty})

    @app.post("/api/session/{session_id}/reset")
    def reset(session_id: str):
        session = store.get(session_id)
        acquire(session)
        try:
            session.current = session.original
            session.current_scores = session.original_scores
            session.history.clear()
            session.edits.clear()
        finally:
            session.lock.release()
        return _session_payload(session, config.topk)

    @app.get("/api/session/{session_id}/cam")
    def get_cam(
        session_id: str,
        class_id: int = Query(alias="class"),
        mode: str = "overlay",
        alpha: float = 0.5,
    ):
        """Heatmap of the current image for one class, as PNG bytes."""
        if mode not in ("raw", "overlay"):
            fail(400, f"mode must be 'raw' or 'overlay', got {mode!r}")
        if not 0.0 <= alpha <= 1.0:
            fail(400, "alpha must be in [0, 1]")
        session = store.get(session_id)
        with session.lock:
            current = session.current
        heatmap = compute_cam(graph, current, class_id)
        if mode == "raw":
            png = encode_image(heatmap_image(heatmap))
        else:
            png = encode_image(render_overlay(heatmap, current, alpha))
        return Response(content=png, media_type="image/png")

    @app.get("/api/session/{session_id}/snapshot")
    def get_snapshot(session_id: str):
        """Original plus the ordered edit list; replayable bit-exactly."""
        session = store.get(session_id)
        with session.lock:
            return store.snapshot(session_id)

    @app.get("/api/labels")
    def labels():
        return {"labels": graph.labels}

    static = config.static_dir
    if static and Path(static).is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")

    return app


def run(config: ServiceConfig, graph: ModelGraph | None = None):  # pragma: no cover
    import uvicorn

    uvicorn.run(create_app(config, graph), host=config.host, port=config.port)
