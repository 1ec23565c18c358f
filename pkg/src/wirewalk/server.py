"""Session-based HTTP API for the browser labeling tool.

    POST /session                  image bytes -> session id, superpixel
                                   boundary overlay, graph JSON
    POST /session/{id}/seeds       {"version":1,"seeds":[{"x":..,"y":..}]}
    POST /session/{id}/run         -> walks, splines, overlay (base64 PNG)
    POST /session/{id}/accept      {"version":1,"accepted":[0,..]} persists
                                   the accepted objects in dataset layout
    GET  /session/{id}/export      -> persisted files, base64 encoded

Every JSON document carries "version": 1. One run may be in flight per
session; a second concurrent run answers 409.
"""

from __future__ import annotations

import base64
import io
import json
import re
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image as PILImage

from .core import Image, Point2, save_image_png
from .graph import graph_to_dict
from .model import spline_to_dict
from .pipeline import (
    PipelineConfig,
    PipelineOutput,
    SeedError,
    render_result_overlay,
    seeds_from_points,
)
from .superpixel import boundary_overlay, slic_segment
from .graph import build_graph
from .walker import run_walks, walk_to_dict
from . import pipeline as _pipeline

SCHEMA_VERSION = 1

_SESSION_RE = re.compile(r"^/session/([0-9a-f]{32})(?:/(\w+))?$")


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class Session:
    id: str
    image: Image
    spmap: object
    graph: object
    config: PipelineConfig
    directory: Path
    seeds: list[Point2] = field(default_factory=list)
    output: Optional[PipelineOutput] = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, config: PipelineConfig, workdir: Path):
        self.config = config
        self.workdir = workdir
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, image_bytes: bytes) -> Session:
        try:
            with PILImage.open(io.BytesIO(image_bytes)) as im:
                pixels = np.asarray(im.convert("RGB"), dtype=np.uint8)
        except Exception as exc:
            raise ApiError(400, f"cannot decode image: {exc}") from exc
        image = Image(pixels)
        spmap = slic_segment(image, self.config.slic_params(image))
        graph = build_graph(
            spmap, self.config.histogram_bins, self.config.graph_order
        )
        sid = uuid.uuid4().hex
        session = Session(
            id=sid,
            image=image,
            spmap=spmap,
            graph=graph,
            config=self.config,
            directory=self.workdir / sid,
        )
        with self._lock:
            self._sessions[sid] = session
        return session

    def get(self, sid: str) -> Session:
        with self._lock:
            session = self._sessions.get(sid)
        if session is None:
            raise ApiError(404, f"unknown session {sid}")
        return session


def _png_b64(image: Image) -> str:
    buf = io.BytesIO()
    PILImage.fromarray(image.pixels, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def handle_create(store: SessionStore, body: bytes) -> dict:
    session = store.create(body)
    return {
        "version": SCHEMA_VERSION,
        "session_id": session.id,
        "width": session.image.width,
        "height": session.image.height,
        "boundary_overlay_png": _png_b64(boundary_overlay(session.spmap)),
        "graph": graph_to_dict(session.graph),
    }


def handle_seeds(session: Session, doc: dict) -> dict:
    if doc.get("version") != SCHEMA_VERSION:
        raise ApiError(400, f"unsupported version {doc.get('version')}")
    try:
        points = [Point2(float(s["x"]), float(s["y"])) for s in doc["seeds"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ApiError(400, f"malformed seeds payload: {exc}") from exc
    for p in points:
        if not session.image.contains(p):
            raise ApiError(400, f"seed ({p.x}, {p.y}) outside image bounds")
    try:
        resolved = seeds_from_points(session.spmap, points)
    except SeedError as exc:
        raise ApiError(400, str(exc)) from exc
    session.seeds = points
    return {
        "version": SCHEMA_VERSION,
        "seeds": [
            {"x": s.source_point.x, "y": s.source_point.y, "vertex_id": s.vertex_id}
            for s in resolved
        ],
    }


def handle_run(session: Session) -> dict:
    if len(session.seeds) < 2:
        raise ApiError(400, f"need at least 2 seeds, have {len(session.seeds)}")
    if not session.lock.acquire(blocking=False):
        raise ApiError(409, "a run is already in flight for this session")
    try:
        # SLIC and the graph are already built per session; reuse them and
        # run only walking + model fitting here.
        seeds = seeds_from_points(session.spmap, session.seeds)
        session.graph.seed_flags[:] = False
        for s in seeds:
            session.graph.seed_flags[s.vertex_id] = True
        run = run_walks(session.graph, seeds, session.config.walker_params())
        output = _pipeline.assemble_output(
            session.spmap, session.graph, seeds, run, session.config
        )
        session.output = output
    finally:
        session.lock.release()

    diag = run.diagnostics
    return {
        "version": SCHEMA_VERSION,
        "walks": [walk_to_dict(w, session.graph) for w in output.walks],
        "splines": [
            spline_to_dict(m, session.config.spline_max_gap_px)
            for m in output.segmentation.models
        ],
        "overlay_png": _png_b64(render_result_overlay(session.image, output)),
        "diagnostics": {
            "walks_started": diag.walks_started,
            "walks_closed": diag.walks_closed,
            "walks_aborted": diag.walks_aborted,
            "walks_max_steps": diag.walks_max_steps,
            "extension_steps": diag.extension_steps,
            "unpaired_seed_ids": diag.unpaired_seed_ids,
        },
    }


def handle_accept(session: Session, doc: dict) -> dict:
    if doc.get("version") != SCHEMA_VERSION:
        raise ApiError(400, f"unsupported version {doc.get('version')}")
    if session.output is None:
        raise ApiError(400, "nothing to accept: run the session first")
    seg = session.output.segmentation
    try:
        accepted = sorted({int(i) for i in doc["accepted"]})
    except (KeyError, TypeError, ValueError) as exc:
        raise ApiError(400, f"malformed accept payload: {exc}") from exc
    if any(i < 0 or i >= len(seg.models) for i in accepted):
        raise ApiError(400, "accepted indices out of range")

    out = session.directory
    out.mkdir(parents=True, exist_ok=True)
    save_image_png(session.image, out / "image.png")
    union = np.zeros(seg.union_mask.shape, dtype=bool)
    written = ["image.png"]
    from .core import save_mask_png

    for j, i in enumerate(accepted):
        union |= seg.object_masks[i]
        save_mask_png(seg.object_masks[i], out / f"mask_{j}.png")
        (out / f"spline_{j}.json").write_text(
            json.dumps(spline_to_dict(seg.models[i], session.config.spline_max_gap_px))
        )
        written += [f"mask_{j}.png", f"spline_{j}.json"]
    save_mask_png(union, out / "mask_union.png")
    written.append("mask_union.png")
    return {
        "version": SCHEMA_VERSION,
        "directory": str(out),
        "written": sorted(written),
    }


def handle_export(session: Session) -> dict:
    out = session.directory
    if not out.is_dir():
        raise ApiError(404, "nothing exported yet: accept results first")
    files = {}
    for p in sorted(out.iterdir()):
        if p.is_file():
            files[p.name] = base64.b64encode(p.read_bytes()).decode("ascii")
    return {"version": SCHEMA_VERSION, "directory": str(out), "files": files}


class _Handler(BaseHTTPRequestHandler):
    store: SessionStore  # injected by create_server
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _send_json(self, status: int, doc: dict) -> None:
        payload = json.dumps(doc).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(payload)

    def _dispatch(self, method: str) -> None:
        try:
            doc = self._route(method)
            self._send_json(200, doc)
        except ApiError as exc:
            self._send_json(exc.status, {"version": SCHEMA_VERSION, "error": exc.message})
        except Exception as exc:  # pragma: no cover - defensive
            self._send_json(500, {"version": SCHEMA_VERSION, "error": str(exc)})

    def _route(self, method: str) -> dict:
        if method == "POST" and self.path == "/session":
            return handle_create(self.store, self._read_body())
        m = _SESSION_RE.match(self.path)
        if not m:
            raise ApiError(404, f"no such endpoint {self.path}")
        session = self.store.get(m.group(1))
        action = m.group(2)
        if method == "POST" and action == "seeds":
            return handle_seeds(session, self._read_json())
        if method == "POST" and action == "run":
            return handle_run(session)
        if method == "POST" and action == "accept":
            return handle_accept(session, self._read_json())
        if method == "GET" and action == "export":
            return handle_export(session)
        raise ApiError(404, f"no such endpoint {method} {self.path}")

    def _read_json(self) -> dict:
        try:
            return json.loads(self._read_body())
        except json.JSONDecodeError as exc:
            raise ApiError(400, f"invalid JSON body: {exc}") from exc

    def do_POST(self):
        self._dispatch("POST")

    def do_GET(self):
        self._dispatch("GET")

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()


def create_server(
    host: str, port: int, config: PipelineConfig, workdir: Path
) -> ThreadingHTTPServer:
    workdir.mkdir(parents=True, exist_ok=True)
    handler = type("BoundHandler", (_Handler,), {"store": SessionStore(config, workdir)})
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(host: str, port: int, config: PipelineConfig, workdir: Path) -> None:
    server = create_server(host, port, config, workdir)
    print(
        f"wirewalk serve listening on http://{host}:{server.server_address[1]}",
        flush=True,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
