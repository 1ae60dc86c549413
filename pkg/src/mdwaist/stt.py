"""Speech-to-text backends: sidecar-file mock and cloud HTTP client.

The mock backend keeps the pipeline fully offline: for an audio fixture
``x.wav`` it returns the contents of ``x.txt`` next to it. The cloud backend
posts WAV bytes to a configured endpoint and takes the top transcription
alternative from the response.
"""

from __future__ import annotations

import io
import wave
from datetime import datetime, timezone
from pathlib import Path

import httpx

from .model import SOURCE_CLOUD, SOURCE_MOCK, Transcript


class SttError(RuntimeError):
    """Transcription failed (service error, timeout, or missing sidecar)."""


class UnreadableAudioError(SttError):
    """Input is not decodable 16-bit PCM WAV."""


def validate_wav(audio: bytes) -> None:
    """Reject anything that is not 16-bit PCM WAV."""
    if not audio:
        raise UnreadableAudioError("empty audio input")
    try:
        with wave.open(io.BytesIO(audio)) as wav:
            sample_width = wav.getsampwidth()
            compression = wav.getcomptype()
    except (wave.Error, EOFError) as exc:
        raise UnreadableAudioError(f"not a readable WAV file: {exc}") from exc
    if compression != "NONE" or sample_width != 2:
        raise UnreadableAudioError("expected uncompressed 16-bit PCM WAV")


class MockSttBackend:
    """Reads the sidecar transcript file shipped alongside an audio fixture."""

    source = SOURCE_MOCK

    def transcribe(self, audio: bytes, source_path: Path | None = None) -> str:
        if source_path is None:
            raise SttError("mock transcription needs an audio file with a sidecar transcript")
        sidecar = Path(source_path).with_suffix(".txt")
        try:
            return sidecar.read_text(encoding="utf-8").strip()
        except OSError as exc:
            raise SttError(f"missing sidecar transcript {sidecar}: {exc}") from exc


class CloudSttBackend:
    """Posts WAV bytes to a speech-recognition endpoint."""

    source = SOURCE_CLOUD

    def __init__(self, url: str, api_key: str, timeout: float = 10.0):
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    def transcribe(self, audio: bytes, source_path: Path | None = None) -> str:
        try:
            response = httpx.post(
                self.url,
                content=audio,
                headers={
                    "Authorization": f"Bearer {self.api_key}",
                    "Content-Type": "audio/wav",
                },
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise SttError(f"speech service request failed: {exc}") from exc
        if response.status_code != 200:
            raise SttError(f"speech service returned HTTP {response.status_code}")
        try:
            return response.json()["results"][0]["alternatives"][0]["transcript"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise SttError(f"malformed speech service response: {exc}") from exc


def transcribe(audio: bytes, backend, source_path: Path | None = None) -> Transcript:
    """Validate the WAV payload and run it through the given backend."""
    validate_wav(audio)
    text = backend.transcribe(audio, source_path=source_path)
    return Transcript(text=text, source=backend.source, captured_at=datetime.now(timezone.utc))
