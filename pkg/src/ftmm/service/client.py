"""Thin synchronous client for the HTTP API.

Without a server URL, requests run in process against the ASGI app itself —
same handlers, same validation, no socket.  With one, they go over the wire.
"""

from __future__ import annotations

import asyncio
from typing import Optional

import httpx


class ApiError(RuntimeError):
    """Non-2xx API response, carrying the status code and detail payload."""

    def __init__(self, status: int, detail):
        super().__init__(f"HTTP {status}: {detail}")
        self.status = status
        self.detail = detail


_APP = None


def _app():
    global _APP
    if _APP is None:
        from .app import create_app
        _APP = create_app()
    return _APP


class ApiClient:
    def __init__(self, server: Optional[str] = None):
        self.server = server.rstrip("/") if server else None

    def get(self, path: str) -> dict:
        return self._request("GET", path, None)

    def post(self, path: str, body: dict) -> dict:
        return self._request("POST", path, body)

    # ------------------------------------------------------------------

    def _request(self, method: str, path: str, body):
        if self.server is None:
            return asyncio.run(self._in_process(method, path, body))
        resp = httpx.request(method, self.server + path, json=body, timeout=None)
        return self._unwrap(resp)

    async def _in_process(self, method: str, path: str, body):
        transport = httpx.ASGITransport(app=_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://ftmm.internal", timeout=None,
        ) as client:
            resp = await client.request(method, path, json=body)
        return self._unwrap(resp)

    @staticmethod
    def _unwrap(resp: httpx.Response) -> dict:
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise ApiError(resp.status_code, detail)
        return resp.json()
