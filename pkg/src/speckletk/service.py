"""Local HTTP tuning service: stacks in, on-demand descriptor previews out.

Responses are pure functions of (stack bytes, request parameters): the angle
is quantized to 0.5 degrees and alpha to 0.01 before computing, which makes
slider scrubbing cache-friendly without ever serving a stale payload for the
effective parameters. Loaded stacks are immutable; the result cache is
guarded by a lock with last-write-wins on identical keys.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, Form, HTTPException, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import images
from .descriptors import ActivityMap, Algorithm, DescriptorParams, compute_descriptor
from .errors import SpeckleTkError
from .postprocess import DisplayParams, render_u8
from .presets import PRESETS
from .stack_io import FrameStack, downsample, read_stack, read_stack_bytes

PREVIEW_MAX_FRAMES = 256

AlgoName = Literal["avd", "fujii", "tau", "gd"]


def _quantize_params(phi: float, alpha: float) -> tuple[float, float]:
    return round(phi * 2.0) / 2.0, round(alpha * 100.0) / 100.0


@dataclass
class LoadedStack:
    id: str
    stack: FrameStack
    preview_factor: int
    _preview: FrameStack | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def preview(self) -> FrameStack:
        with self._lock:
            if self._preview is None:
                stride = max(1, math.ceil(self.stack.n_frames / PREVIEW_MAX_FRAMES))
                self._preview = downsample(self.stack, self.preview_factor, stride)
            return self._preview

    def describe(self) -> dict:
        return {
            "id": self.id,
            "width": self.stack.width,
            "height": self.stack.height,
            "frames": self.stack.n_frames,
            "label": self.stack.metadata.label,
            "preview": True,
        }


class ComputeRequest(BaseModel):
    stack_id: str
    algo: AlgoName
    phi: float = Field(0.0, ge=0.0, le=180.0)
    alpha: float = Field(1.0, gt=0.0)
    norm: str = "minmax"
    preview: bool = True
    max_lag: int | None = Field(None, ge=1)


class ChannelRequest(BaseModel):
    stack_id: str
    algo: AlgoName
    phi: float = Field(0.0, ge=0.0, le=180.0)
    alpha: float = Field(1.0, gt=0.0)
    max_lag: int | None = Field(None, ge=1)


class ComposeChannels(BaseModel):
    r: ChannelRequest
    g: ChannelRequest
    b: ChannelRequest


class ComposeRequest(BaseModel):
    channels: ComposeChannels | None = None
    preset: str | None = None
    stack_id: str | None = None
    preview: bool = True


def _parse_service_norm(text: str):
    from .postprocess import FixedRange, MinMax

    if text == "minmax":
        return MinMax()
    if text.startswith("fixed:"):
        parts = text.split(":")
        if len(parts) == 3:
            return FixedRange(float(parts[1]), float(parts[2]))
    raise HTTPException(422, detail=f"norm must be minmax or fixed:lo:hi, got {text!r}")


def create_app(
    stack_paths: list[Path] | None = None,
    preview_factor: int = 2,
    ui_dir: Path | None = None,
) -> FastAPI:
    app = FastAPI(title="speckletk tuning service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    stacks: dict[str, LoadedStack] = {}
    map_cache: dict[tuple, ActivityMap] = {}
    cache_lock = threading.Lock()
    counter = {"n": 0}

    def register(stack: FrameStack, factor: int | None = None) -> LoadedStack:
        with cache_lock:
            counter["n"] += 1
            handle = LoadedStack(f"s{counter['n']}", stack, factor or preview_factor)
            stacks[handle.id] = handle
        return handle

    for path in stack_paths or []:
        register(read_stack(Path(path)))

    def get_handle(stack_id: str) -> LoadedStack:
        handle = stacks.get(stack_id)
        if handle is None:
            raise HTTPException(404, detail=f"unknown stack_id {stack_id!r}")
        return handle

    def cached_map(
        handle: LoadedStack, algo: str, phi_q: float, max_lag: int | None, preview: bool
    ) -> tuple[ActivityMap, bool]:
        key = (handle.id, algo, phi_q, max_lag, preview)
        with cache_lock:
            hit = map_cache.get(key)
        if hit is not None:
            return hit, True
        source = handle.preview() if preview else handle.stack
        params = DescriptorParams(Algorithm(algo), phi_q, max_lag)
        try:
            amap = compute_descriptor(source, params)
        except (SpeckleTkError, ValueError) as e:
            raise HTTPException(422, detail=str(e)) from e
        with cache_lock:
            map_cache[key] = amap
        return amap, False

    @app.get("/api/stacks")
    def list_stacks() -> list[dict]:
        return [stacks[k].describe() for k in sorted(stacks, key=lambda s: int(s[1:]))]

    @app.post("/api/stacks")
    async def upload_stack(file: UploadFile, preview_factor: int | None = Form(None)) -> dict:
        if preview_factor is not None and preview_factor < 1:
            raise HTTPException(422, detail=f"preview_factor must be >= 1, got {preview_factor}")
        data = await file.read()
        try:
            stack = read_stack_bytes(data, label=Path(file.filename or "upload").stem)
        except SpeckleTkError as e:
            raise HTTPException(422, detail=str(e)) from e
        return register(stack, preview_factor).describe()

    @app.post("/api/compute")
    def compute(req: ComputeRequest) -> Response:
        handle = get_handle(req.stack_id)
        norm = _parse_service_norm(req.norm)
        phi_q, alpha_q = _quantize_params(req.phi, req.alpha)
        t0 = time.perf_counter()
        amap, was_cached = cached_map(handle, req.algo, phi_q, req.max_lag, req.preview)
        img = render_u8(amap.values, DisplayParams(alpha=alpha_q, normalization=norm))
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        return Response(
            content=images.encode_png(img),
            media_type="image/png",
            headers={
                "X-Compute-Ms": f"{elapsed_ms:.2f}",
                "X-Degenerate-Terms": str(amap.degenerate_terms),
                "X-Map-Cache": "hit" if was_cached else "miss",
                "X-Phi-Effective": f"{phi_q:g}",
                "X-Alpha-Effective": f"{alpha_q:g}",
                "X-Map-Width": str(amap.width),
                "X-Map-Height": str(amap.height),
            },
        )

    @app.post("/api/compose")
    def compose(req: ComposeRequest) -> Response:
        if (req.channels is None) == (req.preset is None):
            raise HTTPException(422, detail="pass exactly one of channels or preset")
        if req.preset is not None:
            preset = PRESETS.get(req.preset)
            if preset is None:
                raise HTTPException(422, detail=f"unknown preset {req.preset!r}")
            if req.stack_id is None:
                raise HTTPException(422, detail="preset compose needs stack_id")
            channel_reqs = {
                ch: ChannelRequest(
                    stack_id=req.stack_id,
                    algo=binding.algorithm.value,
                    phi=binding.phi_degrees,
                    alpha=binding.alpha,
                )
                for ch, binding in preset.channels().items()
            }
        else:
            channel_reqs = {"r": req.channels.r, "g": req.channels.g, "b": req.channels.b}

        t0 = time.perf_counter()
        rendered = []
        degenerate = 0
        hits = 0
        for ch in ("r", "g", "b"):
            creq = channel_reqs[ch]
            handle = get_handle(creq.stack_id)
            phi_q, alpha_q = _quantize_params(creq.phi, creq.alpha)
            amap, was_cached = cached_map(handle, creq.algo, phi_q, creq.max_lag, req.preview)
            degenerate += amap.degenerate_terms
            hits += was_cached
            rendered.append(render_u8(amap.values, DisplayParams(alpha=alpha_q)))
        shapes = {r.shape for r in rendered}
        if len(shapes) != 1:
            raise HTTPException(422, detail=f"channel dimensions differ: {sorted(shapes)}")
        rgb = np.stack(rendered, axis=-1)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        return Response(
            content=images.encode_png(rgb),
            media_type="image/png",
            headers={
                "X-Compute-Ms": f"{elapsed_ms:.2f}",
                "X-Degenerate-Terms": str(degenerate),
                "X-Map-Cache": "hit" if hits == 3 else "miss",
                "X-Map-Width": str(rgb.shape[1]),
                "X-Map-Height": str(rgb.shape[0]),
            },
        )

    @app.get("/api/presets")
    def presets() -> dict:
        return {name: preset.as_dict() for name, preset in PRESETS.items()}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
