"""Speech backends: sidecar mock, WAV validation, cloud client vs scripted server."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from mdwaist.stt import (
    CloudSttBackend,
    MockSttBackend,
    SttError,
    UnreadableAudioError,
    transcribe,
    validate_wav,
)

FIXTURES = Path(__file__).parent / "fixtures"
SMITH_WAV = FIXTURES / "smith.wav"
SMITH_TEXT = "Schedule a follow-up with Mr. Smith next Tuesday at 2"


class TestValidateWav:
    def test_fixture_is_valid(self):
        validate_wav(SMITH_WAV.read_bytes())

    def test_zero_length_audio(self):
        with pytest.raises(UnreadableAudioError):
            validate_wav(b"")

    def test_garbage_bytes(self):
        with pytest.raises(UnreadableAudioError):
            validate_wav(b"\x00\x01notwav" * 10)

    def test_truncated_header(self):
        with pytest.raises(UnreadableAudioError):
            validate_wav(SMITH_WAV.read_bytes()[:10])


class TestMockBackend:
    def test_sidecar_transcript(self):
        transcript = transcribe(SMITH_WAV.read_bytes(), MockSttBackend(), source_path=SMITH_WAV)
        assert transcript.text == SMITH_TEXT
        assert transcript.source == "mock"

    def test_missing_sidecar(self, tmp_path):
        orphan = tmp_path / "orphan.wav"
        orphan.write_bytes(SMITH_WAV.read_bytes())
        with pytest.raises(SttError):
            transcribe(orphan.read_bytes(), MockSttBackend(), source_path=orphan)

    def test_bytes_without_path(self):
        with pytest.raises(SttError):
            transcribe(SMITH_WAV.read_bytes(), MockSttBackend())


class ScriptedSttHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        audio = self.rfile.read(length)
        self.server.received.append(
            {"bytes": len(audio), "content_type": self.headers.get("Content-Type")}
        )
        if self.server.status != 200:
            self.send_response(self.server.status)
            self.end_headers()
            return
        payload = json.dumps(self.server.reply).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, fmt, *args):
        pass


@pytest.fixture
def stt_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), ScriptedSttHandler)
    server.status = 200
    server.reply = {
        "results": [
            {
                "alternatives": [
                    {"transcript": SMITH_TEXT, "confidence": 0.97},
                    {"transcript": "schedule a follow up", "confidence": 0.41},
                ]
            }
        ]
    }
    server.received = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()


class TestCloudBackend:
    def backend(self, server):
        return CloudSttBackend(
            url=f"http://127.0.0.1:{server.server_address[1]}/speech:recognize",
            api_key="key-123",
            timeout=5.0,
        )

    def test_top_alternative_returned(self, stt_server):
        audio = SMITH_WAV.read_bytes()
        transcript = transcribe(audio, self.backend(stt_server))
        assert transcript.text == SMITH_TEXT
        assert transcript.source == "cloud"
        assert stt_server.received[0]["bytes"] == len(audio)
        assert stt_server.received[0]["content_type"] == "audio/wav"

    def test_service_error_status(self, stt_server):
        stt_server.status = 503
        with pytest.raises(SttError):
            transcribe(SMITH_WAV.read_bytes(), self.backend(stt_server))

    def test_malformed_reply(self, stt_server):
        stt_server.reply = {"results": []}
        with pytest.raises(SttError):
            transcribe(SMITH_WAV.read_bytes(), self.backend(stt_server))

    def test_unreachable_endpoint(self):
        backend = CloudSttBackend(url="http://127.0.0.1:1/speech", api_key="k", timeout=0.5)
        with pytest.raises(SttError):
            transcribe(SMITH_WAV.read_bytes(), backend)

    def test_invalid_audio_rejected_before_any_network(self):
        backend = CloudSttBackend(url="http://127.0.0.1:1/speech", api_key="k", timeout=0.5)
        with pytest.raises(UnreadableAudioError):
            transcribe(b"", backend)
