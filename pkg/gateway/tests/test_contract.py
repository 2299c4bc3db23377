"""The engine's HTTP generation client against the gateway in stub mode.

These tests exercise the same client the render engine uses, so passing
here means the gateway honours the generation contract end to end:
health, all three endpoints, malformed-body 400, and the retry-after-500
path.
"""

import socket
import threading
import time

import numpy as np
import pytest
import requests
import uvicorn

pytest.importorskip("soundscript")

from soundscript.audio.buffer import SAMPLE_RATE
from soundscript.backends import BackendConfig, HttpBackend

from model_gateway import GatewayConfig, create_app


@pytest.fixture(scope="module")
def base_url(tmp_path_factory):
    fixture_dir = tmp_path_factory.mktemp("fixtures")
    app = create_app(GatewayConfig(mode="stub", fixture_dir=fixture_dir))
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port,
                                           log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    url = f"http://127.0.0.1:{port}"
    while time.time() < deadline:
        try:
            requests.get(f"{url}/health", timeout=0.5)
            break
        except requests.ConnectionError:
            time.sleep(0.05)
    else:
        raise RuntimeError("gateway did not start")
    yield url
    server.should_exit = True
    thread.join(timeout=5)


@pytest.fixture
def backend(base_url):
    requests.post(f"{base_url}/debug/fail_next", json={"count": 0})
    config = BackendConfig(kind="http",
                           tts_url=f"{base_url}/tts",
                           music_url=f"{base_url}/music",
                           sfx_url=f"{base_url}/sfx",
                           timeout=10.0, retries=2)
    return HttpBackend(config)


class TestEndpoints:
    def test_health(self, backend):
        assert backend.health()["status"] == "ok"

    def test_speech(self, backend):
        samples, rate = backend.gen_speech("hello from the gateway", "v2/en_speaker_1")
        assert rate == SAMPLE_RATE
        assert len(samples) == int(4 * 0.4 * SAMPLE_RATE)

    def test_music(self, backend):
        samples, rate = backend.gen_music("calm piano", 3.0)
        assert rate == SAMPLE_RATE
        assert len(samples) == 3 * SAMPLE_RATE
        assert np.max(np.abs(samples)) > 0

    def test_sfx(self, backend):
        samples, rate = backend.gen_sfx("dog barking", 2.0)
        assert rate == SAMPLE_RATE
        assert len(samples) == 2 * SAMPLE_RATE

    def test_deterministic_across_calls(self, backend):
        a, _ = backend.gen_sfx("rain", 1.5)
        b, _ = backend.gen_sfx("rain", 1.5)
        np.testing.assert_array_equal(a, b)


class TestErrorPaths:
    def test_malformed_body_400(self, base_url):
        response = requests.post(f"{base_url}/sfx",
                                 json={"desc": "x", "duration": -1})
        assert response.status_code == 400

    def test_retry_after_500(self, backend, base_url):
        requests.post(f"{base_url}/debug/fail_next", json={"count": 1})
        samples, _ = backend.gen_sfx("thunder", 1.0)
        assert len(samples) == SAMPLE_RATE
        assert backend.retry_counts[f"{base_url}/sfx"] == 1


class TestEndToEndRender:
    def test_engine_renders_through_gateway(self, backend, base_url):
        import json

        from soundscript.executor import execute
        from soundscript.plan import compile_script
        from soundscript.script import parse_script
        from soundscript.voices import VoiceMap

        script = parse_script(json.dumps([
            {"audio_type": "music", "layout": "background", "id": 0,
             "action": "begin", "vol": -30, "desc": "calm piano"},
            {"audio_type": "speech", "layout": "foreground",
             "character": "Narrator", "vol": -15, "text": "hello from the gateway"},
            {"audio_type": "music", "layout": "background", "id": 0,
             "action": "end"},
            {"audio_type": "sound_effect", "layout": "foreground",
             "vol": -35, "len": 1, "desc": "door slam"},
        ]))
        plan = compile_script(script, VoiceMap(assignments={"Narrator": "v2/en_speaker_1"}))
        buf, report = execute(plan, backend)
        assert len(buf) == int((4 * 0.4 + 1) * SAMPLE_RATE)
        assert report.total_duration == pytest.approx(2.6)
