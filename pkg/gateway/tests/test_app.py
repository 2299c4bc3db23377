import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from scipy.io import wavfile

from model_gateway import GatewayConfig, create_app
from model_gateway.stub import SAMPLE_RATE, encode_wav, fixture_path


@pytest.fixture
def client(tmp_path):
    config = GatewayConfig(mode="stub", fixture_dir=tmp_path)
    return TestClient(create_app(config))


def decode(body: bytes):
    rate, data = wavfile.read(io.BytesIO(body))
    return rate, data


class TestHealth:
    def test_stub_ready(self, client):
        body = client.get("/health").json()
        assert body == {"status": "ok", "mode": "stub", "ready": True}

    def test_live_not_loaded(self):
        config = GatewayConfig(mode="live", tts_model="a", music_model="b",
                               sfx_model="c")
        live = TestClient(create_app(config))
        body = live.get("/health").json()
        assert body["status"] == "loading"
        assert body["ready"] is False


class TestSfx:
    def test_duration_and_format(self, client):
        response = client.post("/sfx", json={"desc": "dog barking",
                                             "duration": 2.0})
        assert response.status_code == 200
        assert response.headers["content-type"] == "audio/wav"
        rate, data = decode(response.content)
        assert rate == SAMPLE_RATE
        assert len(data) == 2 * SAMPLE_RATE

    def test_deterministic(self, client):
        payload = {"desc": "rain", "duration": 1.5}
        a = client.post("/sfx", json=payload).content
        b = client.post("/sfx", json=payload).content
        assert a == b

    def test_fixture_takes_precedence(self, tmp_path):
        config = GatewayConfig(mode="stub", fixture_dir=tmp_path)
        payload = {"desc": "dog barking", "duration": 2.0}
        canned = encode_wav(0.05 * np.ones(2 * SAMPLE_RATE))
        fixture_path(tmp_path, "sfx", payload).write_bytes(canned)
        client = TestClient(create_app(config))
        assert client.post("/sfx", json=payload).content == canned

    @pytest.mark.parametrize("payload", [
        {"desc": "x"},
        {"duration": 2.0},
        {"desc": "", "duration": 2.0},
        {"desc": "x", "duration": 0},
        {"desc": "x", "duration": "two"},
        {"desc": "x", "duration": True},
        [],
    ])
    def test_malformed_400(self, client, payload):
        assert client.post("/sfx", json=payload).status_code == 400

    def test_non_json_body_400(self, client):
        response = client.post("/sfx", content=b"not json",
                               headers={"Content-Type": "application/json"})
        assert response.status_code == 400


class TestMusic:
    def test_basic(self, client):
        response = client.post("/music", json={"desc": "calm piano",
                                               "duration": 3.0})
        rate, data = decode(response.content)
        assert rate == SAMPLE_RATE
        assert len(data) == 3 * SAMPLE_RATE
        assert np.max(np.abs(data)) > 0


class TestTts:
    def test_word_proportional_duration(self, client):
        response = client.post("/tts", json={"text": "hello there old friend",
                                             "voice": "v2/en_speaker_1"})
        _, data = decode(response.content)
        assert len(data) == int(4 * 0.4 * SAMPLE_RATE)

    def test_voice_changes_audio(self, client):
        a = client.post("/tts", json={"text": "same line",
                                      "voice": "va"}).content
        b = client.post("/tts", json={"text": "same line",
                                      "voice": "vb"}).content
        assert a != b

    @pytest.mark.parametrize("payload", [
        {"voice": "v"},
        {"text": "", "voice": "v"},
        {"text": "hi"},
        {"text": 3, "voice": "v"},
    ])
    def test_malformed_400(self, client, payload):
        assert client.post("/tts", json=payload).status_code == 400


class TestDebugFailNext:
    def test_injects_500s_then_recovers(self, client):
        assert client.post("/debug/fail_next",
                           json={"count": 2}).status_code == 200
        payload = {"desc": "x", "duration": 1.0}
        assert client.post("/sfx", json=payload).status_code == 500
        assert client.post("/music", json=payload).status_code == 500
        assert client.post("/sfx", json=payload).status_code == 200

    def test_disabled_outside_stub(self):
        config = GatewayConfig(mode="live", tts_model="a", music_model="b",
                               sfx_model="c")
        live = TestClient(create_app(config))
        assert live.post("/debug/fail_next",
                         json={"count": 1}).status_code in (404, 405)


class TestLiveMode:
    def test_generation_503_until_loaded(self):
        config = GatewayConfig(mode="live", tts_model="a", music_model="b",
                               sfx_model="c")
        live = TestClient(create_app(config))
        response = live.post("/sfx", json={"desc": "x", "duration": 1.0})
        assert response.status_code == 503

    def test_load_is_an_explicit_seam(self):
        from model_gateway.live import LiveModels
        config = GatewayConfig(mode="live", tts_model="a", music_model="b",
                               sfx_model="c")
        with pytest.raises(NotImplementedError):
            LiveModels(config).load()


class TestConfig:
    def test_stub_requires_fixture_dir(self):
        with pytest.raises(ValueError):
            GatewayConfig(mode="stub", fixture_dir=None)

    def test_live_requires_model_ids(self):
        with pytest.raises(ValueError):
            GatewayConfig(mode="live", tts_model="a")

    def test_env_overrides(self, tmp_path, monkeypatch):
        monkeypatch.setenv("GATEWAY_MODE", "stub")
        monkeypatch.setenv("GATEWAY_FIXTURE_DIR", str(tmp_path))
        config = GatewayConfig.from_dict({"mode": "live"})
        assert config.mode == "stub"
        assert config.fixture_dir == tmp_path
