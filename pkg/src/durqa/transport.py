"""Shared JSON-over-HTTP client with bounded retries for remote backends."""
from __future__ import annotations

import threading
import time

import httpx

from .errors import CredentialError, ProtocolError, TransportError


class HttpJsonClient:
    """POSTs JSON payloads with exponential backoff on transient failures.

    Auth failures (401/403) are never retried. 4xx responses other than
    auth are protocol errors. 5xx and network errors are retried up to
    max_attempts. A semaphore caps in-flight requests so the client is
    safe to share across concurrent request handlers.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        max_attempts: int = 3,
        backoff_base: float = 0.5,
        timeout: float = 30.0,
        max_in_flight: int = 8,
    ):
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        self.endpoint = endpoint
        self.api_key = api_key
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.timeout = timeout
        self._gate = threading.Semaphore(max_in_flight)

    def post(self, payload: dict) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(self.backoff_base * (2 ** (attempt - 1)))
            try:
                with self._gate:
                    response = httpx.post(
                        self.endpoint, json=payload, headers=headers, timeout=self.timeout
                    )
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code in (401, 403):
                raise CredentialError(f"{self.endpoint} rejected credentials ({response.status_code})")
            if response.status_code >= 500:
                last_error = TransportError(f"{self.endpoint} returned {response.status_code}")
                continue
            if response.status_code >= 400:
                raise ProtocolError(f"{self.endpoint} returned {response.status_code}: {response.text[:200]}")
            try:
                return response.json()
            except ValueError as exc:
                raise ProtocolError(f"{self.endpoint} returned non-JSON body") from exc
        raise TransportError(
            f"{self.endpoint} unreachable after {self.max_attempts} attempts: {last_error}"
        )
