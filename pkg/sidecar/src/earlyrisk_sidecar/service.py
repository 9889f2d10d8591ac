"""HTTP service: POST /embed, POST /emotions, GET /meta.

Wire shapes:
  POST /embed    {"texts": [...]} -> {"vectors": [[...], ...]}
  POST /emotions {"texts": [...]} -> {"basic": [[...], ...], "fine": [[...], ...]}
  GET  /meta     -> {"encoder_dim", "basic_labels", "fine_labels", ...}
Empty batches answer 400, oversize batches 413, failed model loads 503.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .backends import BackendLoadError, ModelBundle
from .config import SidecarConfig


class TextsRequest(BaseModel):
    texts: list[str]


def create_app(config: SidecarConfig | None = None, bundle: ModelBundle | None = None) -> FastAPI:
    """Build the service; models load lazily on first use so startup never
    blocks on checkpoint downloads."""
    if config is None:
        config = SidecarConfig()
    app = FastAPI(title="earlyrisk-sidecar")
    state = {"bundle": bundle, "error": None}

    def models() -> ModelBundle:
        if state["bundle"] is None:
            if state["error"] is not None:
                raise HTTPException(status_code=503, detail=state["error"])
            try:
                state["bundle"] = ModelBundle.from_config(config)
            except BackendLoadError as exc:
                state["error"] = str(exc)
                raise HTTPException(status_code=503, detail=str(exc)) from exc
        return state["bundle"]

    def check_batch(texts: list[str]) -> None:
        if not texts:
            raise HTTPException(status_code=400, detail="texts must be non-empty")
        if len(texts) > config.max_batch:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(texts)} exceeds maximum {config.max_batch}",
            )

    @app.get("/meta")
    def meta():
        return {
            "encoder_dim": config.encoder_dim,
            "basic_labels": list(config.basic_labels),
            "fine_labels": list(config.fine_labels),
            "backend": config.backend,
            "heads": {"basic": "softmax", "fine": "sigmoid"},
            "truncation": config.truncation,
            "max_batch": config.max_batch,
        }

    @app.post("/embed")
    def embed(request: TextsRequest):
        check_batch(request.texts)
        vectors = models().encoder.encode(request.texts)
        return {"vectors": vectors.tolist()}

    @app.post("/emotions")
    def emotions(request: TextsRequest):
        check_batch(request.texts)
        bundle = models()
        return {
            "basic": bundle.basic.classify(request.texts).tolist(),
            "fine": bundle.fine.classify(request.texts).tolist(),
        }

    return app
