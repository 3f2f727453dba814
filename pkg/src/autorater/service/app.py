"""Prediction/explanation HTTP API over a bundle registry.

Endpoints: GET /health, GET /schema, GET /bundles, POST /predict,
POST /explain. Responses carry a top-level ``api_version``; every 4xx
body holds ``error.code`` and the offending ``error.field`` path.
Prediction responses are canonically serialized (sorted keys), so
identical requests yield byte-identical bodies. Bundles are immutable
after load; explanation requests queue behind a configurable concurrency
limit since they cost more than forwards.

Configuration: REGISTRY_DIR, PORT, MAX_EXPLAIN_CONCURRENCY environment
variables (or the CLI ``serve`` flags).
"""

from __future__ import annotations

import base64
import binascii
import io
import json
import os
import threading
from contextlib import asynccontextmanager
from pathlib import Path

import numpy as np
import torch
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import Response
from PIL import Image

from autorater import API_VERSION, SCORE_NAMES
from autorater.corpus.images import ImageError, compose_images
from autorater.corpus.schema import encode_parametric
from autorater.corpus.text import serialize_text
from autorater.corpus.types import CorpusError, EXTERIOR_VIEWS, INTERIOR_VIEWS
from autorater.models.bundle import ModelBundle, load_registry
from autorater.service.explain import explain_bundle

MAX_BACKGROUND_TEXTS = 40


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field: str | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.field = field


def canonical_json(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")


def json_response(payload: dict, status: int = 200) -> Response:
    return Response(content=canonical_json(payload), status_code=status, media_type="application/json")


def error_response(status: int, code: str, message: str, field: str | None = None) -> Response:
    return json_response(
        {"api_version": API_VERSION, "error": {"code": code, "message": message, "field": field}},
        status=status,
    )


class Registry:
    """Loaded bundles, grouped by family, with request-side input assembly."""

    def __init__(self, bundles: dict[str, ModelBundle]):
        self.bundles = bundles
        self.families: dict[str, list[ModelBundle]] = {}
        for b in bundles.values():
            self.families.setdefault(b.family, []).append(b)

    @property
    def schema(self):
        if not self.bundles:
            raise ApiError(503, "empty_registry", "no bundles loaded")
        return next(iter(self.bundles.values())).schema

    def resolve(self, name: str, modalities: set[str]) -> list[ModelBundle]:
        """Bundles to serve: an exact bundle id, or per-score family picks
        whose modality set matches the requested one."""
        if name in self.bundles:
            bundle = self.bundles[name]
            if not modalities <= set(bundle.modalities):
                raise ApiError(
                    422,
                    "modality_not_available",
                    f"bundle {name} supports modalities {sorted(bundle.modalities)}",
                    field="modalities",
                )
            if set(bundle.modalities) != modalities:
                raise ApiError(
                    422,
                    "missing_modality",
                    f"bundle {name} needs inputs for {sorted(set(bundle.modalities) - modalities)}",
                    field="modalities",
                )
            return [bundle]
        if name in self.families:
            picks = [b for b in self.families[name] if set(b.modalities) == modalities]
            if not picks:
                raise ApiError(
                    422,
                    "no_matching_bundle",
                    f"family {name} has no bundle for modalities {sorted(modalities)}",
                    field="modalities",
                )
            return sorted(picks, key=lambda b: SCORE_NAMES.index(b.score_name))
        raise ApiError(404, "unknown_bundle", f"no bundle or family named {name!r}", field="bundle")


def _decode_b64_image(data: str, field: str) -> np.ndarray:
    if "," in data and data.lstrip().startswith("data:"):
        data = data.split(",", 1)[1]
    try:
        raw = base64.b64decode(data, validate=True)
        with Image.open(io.BytesIO(raw)) as img:
            return np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    except (binascii.Error, OSError, ValueError) as exc:
        raise ApiError(422, "bad_image", f"cannot decode image: {exc}", field=field)


def parse_request_inputs(body: dict, registry: Registry) -> dict:
    """Validate and normalize a predict/explain body against the schema."""
    if not isinstance(body, dict):
        raise ApiError(400, "malformed_payload", "request body must be a JSON object", field="")
    name = body.get("bundle")
    if not isinstance(name, str) or not name:
        raise ApiError(422, "missing_field", "a bundle or family name is required", field="bundle")

    schema = registry.schema
    known = {f.name for f in schema.features}
    parametric = body.get("parametric") or {}
    if not isinstance(parametric, dict):
        raise ApiError(400, "malformed_payload", "parametric must be an object", field="parametric")
    for key in parametric:
        if key not in known:
            raise ApiError(422, "unknown_feature", f"feature {key!r} is not in the schema", field=f"parametric.{key}")

    provided = set()
    if parametric:
        provided.add("parametric")
    text_segments = body.get("text_segments") or {}
    if text_segments:
        if not isinstance(text_segments, dict) or not all(isinstance(v, str) for v in text_segments.values()):
            raise ApiError(400, "malformed_payload", "text_segments must map names to strings", field="text_segments")
        provided.add("text")
    images = body.get("images") or {}
    if images:
        if not isinstance(images, dict):
            raise ApiError(400, "malformed_payload", "images must be an object", field="images")
        provided.add("image")

    requested = body.get("modalities")
    if requested is not None:
        if not isinstance(requested, list) or not all(isinstance(m, str) for m in requested):
            raise ApiError(400, "malformed_payload", "modalities must be a list of strings", field="modalities")
        bad = [m for m in requested if m not in ("parametric", "text", "image")]
        if bad:
            raise ApiError(422, "unknown_modality", f"unknown modalities {bad}", field="modalities")
        missing = [m for m in requested if m not in provided]
        if missing:
            raise ApiError(422, "missing_modality", f"no input data for requested modalities {missing}", field="modalities")
        modalities = set(requested)
    else:
        modalities = provided
    if not modalities:
        raise ApiError(422, "missing_modality", "request provides no usable modality data", field="modalities")
    return {
        "name": name,
        "modalities": modalities,
        "parametric": parametric,
        "text_segments": text_segments,
        "images": images,
    }


def assemble_model_inputs(bundle: ModelBundle, parsed: dict) -> dict[str, torch.Tensor]:
    """Build the bundle's forward inputs from a parsed request."""
    inputs: dict[str, torch.Tensor] = {}
    if "parametric" in bundle.modalities:
        try:
            vec = encode_parametric(parsed["parametric"], bundle.schema)
        except CorpusError as exc:
            raise ApiError(422, "invalid_value", str(exc), field="parametric")
        inputs["parametric"] = torch.tensor(vec[None, :], dtype=torch.float32)
    if "text" in bundle.modalities:
        try:
            stext = serialize_text(parsed["text_segments"])
        except ValueError as exc:
            raise ApiError(422, "invalid_value", str(exc), field="text_segments")
        ids, mask = bundle.tokenizer.encode_batch([stext.text])
        inputs["token_ids"] = ids
        inputs["token_mask"] = mask
    if "image" in bundle.modalities:
        kind = bundle.image_kind()
        views = EXTERIOR_VIEWS if kind == "exterior" else INTERIOR_VIEWS
        supplied = parsed["images"].get(kind) or {}
        if not isinstance(supplied, dict):
            raise ApiError(400, "malformed_payload", f"images.{kind} must map views to images", field=f"images.{kind}")
        missing = [v for v in views if v not in supplied]
        if missing:
            raise ApiError(422, "missing_view", f"missing {kind} views {missing}", field=f"images.{kind}")
        decoded = {v: _decode_b64_image(supplied[v], field=f"images.{kind}.{v}") for v in views}
        try:
            composite = compose_images(decoded, kind, bundle.compose_config)
        except ImageError as exc:
            raise ApiError(422, "bad_image", str(exc), field=f"images.{kind}")
        inputs["image"] = torch.tensor(composite.transpose(2, 0, 1)[None], dtype=torch.float32)
    return inputs


def predict_with_bundle(bundle: ModelBundle, parsed: dict) -> dict:
    inputs = assemble_model_inputs(bundle, parsed)
    bundle.model.eval()
    with torch.no_grad():
        _, score = bundle.model(**inputs)
    raw = float(score[0])
    return {
        "bundle_id": bundle.bundle_id,
        "modalities": sorted(bundle.modalities),
        "raw": raw,
        "display": min(10.0, max(0.0, raw)),
    }


def create_app(registry_dir: str | Path | None = None) -> FastAPI:
    registry_dir = Path(registry_dir or os.environ.get("REGISTRY_DIR", "registry"))
    explain_limit = int(os.environ.get("MAX_EXPLAIN_CONCURRENCY", "1"))
    explain_gate = threading.Semaphore(max(1, explain_limit))

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.registry = Registry(load_registry(registry_dir))
        yield

    app = FastAPI(title="autorater", lifespan=lifespan)
    app.state.registry = None

    def registry() -> Registry:
        reg = app.state.registry
        if reg is None:
            raise ApiError(503, "registry_loading", "registry is still loading")
        return reg

    @app.exception_handler(ApiError)
    async def handle_api_error(_req: Request, exc: ApiError):
        return error_response(exc.status, exc.code, exc.message, exc.field)

    @app.exception_handler(RequestValidationError)
    async def handle_validation(_req: Request, exc: RequestValidationError):
        loc = ".".join(str(p) for p in exc.errors()[0]["loc"]) if exc.errors() else ""
        return error_response(400, "malformed_payload", "request does not parse", field=loc)

    @app.get("/health")
    def health():
        ready = app.state.registry is not None
        return json_response({"api_version": API_VERSION, "status": "ok" if ready else "loading"})

    @app.get("/schema")
    def schema():
        reg = registry()
        s = reg.schema
        return json_response(
            {
                "api_version": API_VERSION,
                "encoded_dim": s.encoded_dim,
                "features": [f.to_json() | {"width": f.width} for f in s.features],
                "categories": s.categories(),
                "subcategories": s.subcategories(),
                "scores": list(SCORE_NAMES),
                "families": sorted(reg.families),
            }
        )

    @app.get("/bundles")
    def bundles():
        reg = registry()
        return json_response(
            {
                "api_version": API_VERSION,
                "bundles": [
                    {
                        "bundle_id": b.bundle_id,
                        "family": b.family,
                        "kind": b.kind,
                        "score": b.score_name,
                        "modalities": sorted(b.modalities),
                        "test_r2": b.metrics.get("test_r2"),
                    }
                    for b in reg.bundles.values()
                ],
            }
        )

    @app.post("/predict")
    async def predict(request: Request):
        reg = registry()
        body = await _read_json(request)
        parsed = parse_request_inputs(body, reg)
        picks = reg.resolve(parsed["name"], parsed["modalities"])
        predictions = {b.score_name: predict_with_bundle(b, parsed) for b in picks}
        return json_response(
            {
                "api_version": API_VERSION,
                "bundle": parsed["name"],
                "modalities": sorted(parsed["modalities"]),
                "predictions": predictions,
            }
        )

    @app.post("/explain")
    async def explain(request: Request):
        reg = registry()
        body = await _read_json(request)
        parsed = parse_request_inputs(body, reg)
        score_name = body.get("score")
        if score_name is not None and score_name not in SCORE_NAMES:
            raise ApiError(422, "unknown_score", f"unknown score {score_name!r}", field="score")
        picks = reg.resolve(parsed["name"], parsed["modalities"])
        if score_name is not None:
            picks = [b for b in picks if b.score_name == score_name]
            if not picks:
                raise ApiError(422, "no_matching_bundle", f"no bundle for score {score_name!r}", field="score")
        bundle = picks[0]
        inputs = assemble_model_inputs(bundle, parsed)
        with explain_gate:
            payload = explain_bundle(bundle, inputs, parsed)
        return json_response({"api_version": API_VERSION} | payload)

    async def _read_json(request: Request) -> dict:
        try:
            return await request.json()
        except Exception:
            raise ApiError(400, "malformed_payload", "body is not valid JSON", field="")

    return app


def main() -> None:
    import uvicorn

    app = create_app(os.environ.get("REGISTRY_DIR", "registry"))
    uvicorn.run(app, host="0.0.0.0", port=int(os.environ.get("PORT", "8000")))


if __name__ == "__main__":
    main()
