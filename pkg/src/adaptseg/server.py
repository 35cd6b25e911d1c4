"""HTTP session service for interactive refinement.

Each session owns one image and one engine.  Mutations (step, undo,
strategy switches) are serialized per session with a lock; reads see a
consistent state because they take the same lock briefly.  Sessions
live in memory and are evicted after a configurable idle time; anything
worth keeping can be exported through the trace endpoint and replayed
later.

Endpoints (JSON unless noted, all fields snake_case):

    POST   /sessions                       multipart: file + config fields
    GET    /sessions/{id}/state
    POST   /sessions/{id}/step             {"count": n, optional strategy switches}
    POST   /sessions/{id}/undo             {"count": n}
    GET    /sessions/{id}/render?layer=    PNG (segmented|edges|original|labels)
    GET    /sessions/{id}/inspect?x=&y=
    GET    /sessions/{id}/trace?format=    csv or json
    DELETE /sessions/{id}
"""

import dataclasses
import threading
import time
import uuid
from dataclasses import dataclass

from fastapi import FastAPI, File, Form, HTTPException, Query, UploadFile
from fastapi.responses import PlainTextResponse, Response
from pydantic import BaseModel

from . import session as artifacts
from .engine import (CONVERGED, MULTISCALAR, MULTISCALAR_STRATEGIES, RUNNING,
                     STALLED, EngineStateError, Segmentation,
                     cutting_from_label)
from .image_io import ImageFormatError, load_image_bytes

MAX_PIXELS = 4_000_000


@dataclass
class _Session:
    engine: Segmentation
    img_hash: str
    lock: threading.Lock
    created: float
    touched: float


class StepRequest(BaseModel):
    count: int = 1
    cutting: str | None = None
    multiscalar: str | None = None


class UndoRequest(BaseModel):
    count: int = 1


def _stats(engine):
    j = engine.j_current()
    return {
        "iteration": engine.iteration,
        "n_sr": engine.n_sr(),
        "n_vr": engine.n_vr(),
        "j": j,
        "tau": engine.tau_from_j(j),
        "status": engine.status,
        "converged": engine.status == CONVERGED,
        "stalled": engine.status == STALLED,
        "diverged": not engine.coincident,
        "can_undo": engine.iteration > 0,
        "mode": engine.mode,
        "cutting": engine.cutting.label,
        "multiscalar": engine.multiscalar,
        "width": engine.img.width,
        "height": engine.img.height,
        "channels": engine.img.channel_count,
        "event_count": len(engine.history),
    }


def _apply_switches(engine, req):
    if req.cutting is not None:
        try:
            engine.set_cutting(cutting_from_label(req.cutting))
        except ValueError as exc:
            raise HTTPException(400, str(exc))
    if req.multiscalar is not None:
        if engine.mode != MULTISCALAR:
            raise HTTPException(400, "multiscalar switch on a vector session")
        try:
            engine.set_multiscalar(req.multiscalar)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        except EngineStateError as exc:
            raise HTTPException(409, str(exc))


def create_app(ttl=3600.0, ui_dir=None, max_pixels=MAX_PIXELS):
    app = FastAPI(title="adaptseg", version="0.1.0")
    sessions = {}
    registry_lock = threading.Lock()

    def _evict_idle():
        now = time.monotonic()
        with registry_lock:
            stale = [sid for sid, s in sessions.items()
                     if now - s.touched > ttl]
            for sid in stale:
                del sessions[sid]

    def _get(sid):
        with registry_lock:
            entry = sessions.get(sid)
            if entry is None:
                raise HTTPException(404, f"unknown session {sid}")
            entry.touched = time.monotonic()
            return entry

    @app.post("/sessions", status_code=201)
    def create_session(
        file: UploadFile = File(...),
        mode: str = Form("vector"),
        cutting: str = Form("overall-best"),
        multiscalar: str = Form(None),
    ):
        _evict_idle()
        data = file.file.read()
        try:
            img = load_image_bytes(data)
        except ImageFormatError as exc:
            raise HTTPException(400, str(exc))
        if img.pixel_count > max_pixels:
            raise HTTPException(
                413, f"image has {img.pixel_count} pixels, limit {max_pixels}")
        try:
            engine = Segmentation(img, mode=mode,
                                  cutting=cutting_from_label(cutting),
                                  multiscalar=multiscalar)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        sid = uuid.uuid4().hex
        now = time.monotonic()
        with registry_lock:
            sessions[sid] = _Session(engine, artifacts.image_hash(img),
                                     threading.Lock(), now, now)
        return {"id": sid, **_stats(engine)}

    @app.get("/sessions/{sid}/state")
    def get_state(sid: str):
        entry = _get(sid)
        with entry.lock:
            return _stats(entry.engine)

    @app.post("/sessions/{sid}/step")
    def step(sid: str, req: StepRequest):
        if req.count < 1:
            raise HTTPException(400, "count must be >= 1")
        entry = _get(sid)
        with entry.lock:
            engine = entry.engine
            _apply_switches(engine, req)
            events = []
            done = 0
            while done < req.count:
                if engine.status != RUNNING:
                    break
                stepped = engine.step()
                if not stepped:
                    break
                events.extend(stepped)
                done += 1
            payload = {
                "events": [dataclasses.asdict(e) for e in events],
                "committed": done,
                "requested": req.count,
                **_stats(engine),
            }
            if done < req.count:
                raise HTTPException(409, detail=payload)
            return payload

    @app.post("/sessions/{sid}/undo")
    def undo(sid: str, req: UndoRequest):
        if req.count < 1:
            raise HTTPException(400, "count must be >= 1")
        entry = _get(sid)
        with entry.lock:
            engine = entry.engine
            try:
                engine.undo(req.count)
            except EngineStateError as exc:
                raise HTTPException(409, str(exc))
            return _stats(engine)

    @app.get("/sessions/{sid}/render")
    def render(sid: str, layer: str = Query("segmented")):
        entry = _get(sid)
        with entry.lock:
            try:
                png = artifacts.render_layer(entry.engine, layer)
            except ValueError as exc:
                raise HTTPException(400, str(exc))
        return Response(content=png, media_type="image/png")

    @app.get("/sessions/{sid}/inspect")
    def inspect(sid: str, x: int, y: int):
        entry = _get(sid)
        with entry.lock:
            engine = entry.engine
            img = engine.img
            if not (0 <= x < img.width and 0 <= y < img.height):
                raise HTTPException(400, f"pixel ({x},{y}) out of bounds")
            pixel = y * img.width + x
            regions = []
            for pi, part in enumerate(engine.partitions):
                rid = int(part.labels[pixel])
                stats = part.regions[rid]
                cand = engine.caches[pi].get(rid)
                channels = engine.channel_sets[pi]
                regions.append({
                    "channel": engine._chan_label(channels),
                    "region_id": rid,
                    "pixel_count": stats.pixel_count,
                    "mean": [stats.mean(k) for k in channels],
                    "best_delta_j": cand.delta_j if cand is not None else 0.0,
                })
            return {"x": x, "y": y, "regions": regions}

    @app.get("/sessions/{sid}/trace")
    def trace(sid: str, format: str = Query("csv")):
        entry = _get(sid)
        with entry.lock:
            engine = entry.engine
            if format == "csv":
                return PlainTextResponse(artifacts.trace_text(engine.history),
                                         media_type="text/csv")
            if format == "json":
                return {"events": [dataclasses.asdict(e)
                                   for e in engine.history]}
        raise HTTPException(400, f"unknown format {format!r}")

    @app.delete("/sessions/{sid}", status_code=204)
    def delete(sid: str):
        with registry_lock:
            if sid not in sessions:
                raise HTTPException(404, f"unknown session {sid}")
            del sessions[sid]
        return Response(status_code=204)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
