"""HTTP and SSE surface consumed by the monitor UI.

Endpoints:
  POST /api/utterance  {"text": ...} -> {"session_id": ...}
  POST /api/audio      (WAV body)    -> {"session_id": ...}
  GET  /api/stream     Server-Sent Events; each data: line is one stage event
  GET  /api/calendar?start&end       -> {"events": [...]}
  POST /api/pending/{id}/confirm | /cancel
  GET  /api/health
"""

from __future__ import annotations

import logging
import queue
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles

from .config import ConfigError, GatewayConfig, parse_instant
from .pipeline import Gateway, UnknownPendingError

logger = logging.getLogger(__name__)

SSE_KEEPALIVE_SECONDS = 15.0


def create_app(gateway: Gateway, static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="mdwaist gateway")

    @app.post("/api/utterance")
    def post_utterance(body: dict):
        text = body.get("text")
        if not isinstance(text, str):
            raise HTTPException(status_code=400, detail='body must be {"text": <string>}')
        session_id = gateway.new_session_id()
        threading.Thread(
            target=gateway.handle_utterance, args=(text, session_id), daemon=True
        ).start()
        return {"session_id": session_id}

    @app.post("/api/audio")
    async def post_audio(request: Request):
        audio = await request.body()
        session_id = gateway.new_session_id()
        threading.Thread(
            target=gateway.handle_audio, args=(audio, session_id), daemon=True
        ).start()
        return {"session_id": session_id}

    @app.get("/api/stream")
    def stream():
        subscription = gateway.bus.subscribe()

        def event_lines():
            try:
                yield ": connected\n\n"
                while True:
                    try:
                        event = subscription.get(timeout=SSE_KEEPALIVE_SECONDS)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"data: {event.to_json()}\n\n"
            finally:
                gateway.bus.unsubscribe(subscription)

        return StreamingResponse(
            event_lines(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    @app.get("/api/calendar")
    def calendar(start: str, end: str):
        try:
            range_start = parse_instant(start)
            range_end = parse_instant(end)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if not range_start < range_end:
            raise HTTPException(status_code=400, detail="start must precede end")
        records = gateway.store.list_events(range_start, range_end)
        return {"events": [record.to_dict() for record in records]}

    @app.post("/api/pending/{pending_id}/confirm")
    def confirm_pending(pending_id: str):
        try:
            event = gateway.confirm(pending_id)
        except UnknownPendingError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return event.to_wire()

    @app.post("/api/pending/{pending_id}/cancel")
    def cancel_pending(pending_id: str):
        try:
            event = gateway.cancel(pending_id)
        except UnknownPendingError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return event.to_wire()

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def serve(config: GatewayConfig, static_dir: Path | None = None) -> None:
    """Run the gateway service until signalled."""
    import uvicorn

    gateway = Gateway(config)
    app = create_app(gateway, static_dir=static_dir)
    logger.info("serving on %s:%s", config.host, config.port)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
