"""HTTP service exposing the generation contract.

Endpoints:
    POST /tts    {"text": str, "voice": str}            -> WAV bytes
    POST /music  {"desc": str, "duration": number > 0}  -> WAV bytes
    POST /sfx    {"desc": str, "duration": number > 0}  -> WAV bytes
    GET  /health                                        -> mode + readiness

Malformed bodies get 400; live mode answers 503 until models are loaded.
Stub mode additionally exposes POST /debug/fail_next {"count": n} which
makes the next n generation requests return 500 — used by client retry
tests.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, HTTPException, Request, Response

from .config import GatewayConfig
from .live import LiveModels
from .stub import encode_wav, load_fixture, synth_clip, synth_speech


def _bad_request(detail: str):
    return HTTPException(status_code=400, detail=detail)


def _parse_tts(payload) -> tuple[str, str]:
    if not isinstance(payload, dict):
        raise _bad_request("body must be a JSON object")
    text = payload.get("text")
    voice = payload.get("voice")
    if not isinstance(text, str) or not text.strip():
        raise _bad_request("'text' must be a nonempty string")
    if not isinstance(voice, str) or not voice:
        raise _bad_request("'voice' must be a nonempty string")
    return text, voice


def _parse_clip(payload) -> tuple[str, float]:
    if not isinstance(payload, dict):
        raise _bad_request("body must be a JSON object")
    desc = payload.get("desc")
    duration = payload.get("duration")
    if not isinstance(desc, str) or not desc.strip():
        raise _bad_request("'desc' must be a nonempty string")
    if isinstance(duration, bool) or not isinstance(duration, (int, float)) \
            or duration <= 0:
        raise _bad_request("'duration' must be a positive number")
    return desc, float(duration)


def create_app(config: GatewayConfig) -> FastAPI:
    app = FastAPI(title="model-gateway")
    app.state.config = config
    app.state.fail_next = 0
    app.state.lock = threading.Lock()
    app.state.models = LiveModels(config) if config.mode == "live" else None

    async def _json_body(request: Request):
        try:
            return await request.json()
        except Exception:
            raise _bad_request("body is not valid JSON")

    def _maybe_fail():
        with app.state.lock:
            if app.state.fail_next > 0:
                app.state.fail_next -= 1
                raise HTTPException(status_code=500,
                                    detail="injected failure (debug)")

    def _require_live_ready() -> LiveModels:
        models = app.state.models
        if models is None or not models.ready:
            raise HTTPException(status_code=503, detail="models not loaded")
        return models

    def _wav(samples_or_bytes) -> Response:
        body = (samples_or_bytes if isinstance(samples_or_bytes, bytes)
                else encode_wav(samples_or_bytes))
        return Response(content=body, media_type="audio/wav")

    @app.get("/health")
    def health():
        ready = (config.mode == "stub"
                 or (app.state.models is not None and app.state.models.ready))
        return {"status": "ok" if ready else "loading",
                "mode": config.mode, "ready": ready}

    @app.post("/tts")
    async def tts(request: Request):
        payload = await _json_body(request)
        text, voice = _parse_tts(payload)
        _maybe_fail()
        if config.mode == "stub":
            fixture = load_fixture(config.fixture_dir, "tts",
                                   {"text": text, "voice": voice})
            return _wav(fixture if fixture is not None
                        else synth_speech(text, voice))
        return _wav(_require_live_ready().tts(text, voice))

    async def _clip(request: Request, endpoint: str):
        payload = await _json_body(request)
        desc, duration = _parse_clip(payload)
        _maybe_fail()
        if config.mode == "stub":
            fixture = load_fixture(config.fixture_dir, endpoint,
                                   {"desc": desc, "duration": duration})
            return _wav(fixture if fixture is not None
                        else synth_clip(endpoint, desc, duration))
        models = _require_live_ready()
        generate = models.music if endpoint == "music" else models.sfx
        return _wav(generate(desc, duration))

    @app.post("/music")
    async def music(request: Request):
        return await _clip(request, "music")

    @app.post("/sfx")
    async def sfx(request: Request):
        return await _clip(request, "sfx")

    if config.mode == "stub" and config.allow_debug:
        @app.post("/debug/fail_next")
        async def fail_next(request: Request):
            payload = await _json_body(request)
            count = payload.get("count") if isinstance(payload, dict) else None
            if not isinstance(count, int) or count < 0:
                raise _bad_request("'count' must be a non-negative integer")
            with app.state.lock:
                app.state.fail_next = count
            return {"fail_next": count}

    return app
