"""Remote inference plumbing: OpenAI-compatible HTTP clients, retries, cache.

All model inference is consumed over the wire. Responses are cached as raw
bytes keyed by a canonical digest of the request, so identical logical
requests (regardless of JSON key order) hit the same entry.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import threading
import time
import urllib.parse
from dataclasses import dataclass

import requests

from .errors import ApiError, InvalidParams, MalformedResponse, TransportError

logger = logging.getLogger(__name__)

API_KEY_ENV = "ENTLINK_API_KEY"


@dataclass
class BackendConfig:
    base_url: str
    model: str = ""
    api_key: str | None = None
    timeout: float = 120.0
    max_retries: int = 3
    max_in_flight: int = 8
    retry_base_s: float = 0.5
    cache_sampled: bool = True  # set False to never cache temperature>0 responses

    def __post_init__(self):
        parsed = urllib.parse.urlparse(self.base_url)
        if not parsed.scheme or not parsed.netloc:
            raise InvalidParams(f"base_url must be an absolute URL, got {self.base_url!r}")
        self.base_url = self.base_url.rstrip("/")

    def resolved_api_key(self) -> str | None:
        return self.api_key or os.environ.get(API_KEY_ENV)


def canonical_body(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def cache_key(kind: str, model: str, payload: dict) -> str:
    """Digest of (endpoint kind, model, canonicalized body); key order agnostic."""
    material = canonical_body({"kind": kind, "model": model, "body": payload})
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


class ResponseCache:
    """Content-addressed on-disk store of raw response bodies.

    Storage failures log once and turn the cache off; caching is an
    optimization, never a correctness requirement.
    """

    def __init__(self, directory: str):
        self.directory = directory
        self._disabled = False
        try:
            os.makedirs(directory, exist_ok=True)
        except OSError as e:
            logger.warning("cache disabled: cannot create %s (%s)", directory, e)
            self._disabled = True

    def _path(self, key: str) -> str:
        return os.path.join(self.directory, key[:2], key + ".bin")

    def get(self, key: str) -> bytes | None:
        if self._disabled:
            return None
        try:
            with open(self._path(key), "rb") as f:
                return f.read()
        except FileNotFoundError:
            return None
        except OSError as e:
            logger.warning("cache read failed (%s); disabling cache", e)
            self._disabled = True
            return None

    def put(self, key: str, value: bytes):
        if self._disabled:
            return
        path = self._path(key)
        try:
            os.makedirs(os.path.dirname(path), exist_ok=True)
            tmp = path + f".tmp{os.getpid()}.{threading.get_ident()}"
            with open(tmp, "wb") as f:
                f.write(value)
            os.replace(tmp, path)  # last writer wins; identical keys carry identical bytes
        except OSError as e:
            logger.warning("cache write failed (%s); disabling cache", e)
            self._disabled = True


class HttpBackend:
    """requests-based JSON POST client with bounded concurrency and retries.

    Retries transport failures and 5xx with exponential backoff
    (retry_base_s * 2^attempt, jittered); 4xx raise immediately.
    """

    def __init__(self, cfg: BackendConfig, cache: ResponseCache | None = None):
        self.cfg = cfg
        self.cache = cache
        self._session = requests.Session()
        self._slots = threading.Semaphore(cfg.max_in_flight)

    def post_json(self, path: str, payload: dict, kind: str, cacheable: bool = True) -> dict:
        key = cache_key(kind, self.cfg.model, payload)
        if self.cache is not None and cacheable:
            hit = self.cache.get(key)
            if hit is not None:
                return json.loads(hit.decode("utf-8"))
        body = self._request(path, payload)
        if self.cache is not None and cacheable:
            self.cache.put(key, body)
        try:
            return json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise MalformedResponse(f"{kind} endpoint returned non-JSON body: {e}") from e

    def _request(self, path: str, payload: dict) -> bytes:
        url = self.cfg.base_url + path
        headers = {"Content-Type": "application/json"}
        api_key = self.cfg.resolved_api_key()
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        last_error: Exception | None = None
        for attempt in range(self.cfg.max_retries + 1):
            if attempt > 0:
                delay = self.cfg.retry_base_s * (2 ** (attempt - 1))
                time.sleep(delay * (1.0 + 0.25 * random.random()))
                logger.info("retrying %s (attempt %d)", url, attempt + 1)
            try:
                with self._slots:
                    resp = self._session.post(
                        url, json=payload, headers=headers, timeout=self.cfg.timeout
                    )
            except requests.RequestException as e:
                last_error = e
                continue
            if resp.status_code >= 500:
                last_error = ApiError(resp.status_code, resp.text)
                continue
            if resp.status_code >= 400:
                raise ApiError(resp.status_code, resp.text)
            return resp.content
        raise TransportError(f"{url} failed after {self.cfg.max_retries + 1} attempts: {last_error}")


def chat_complete(
    backend: HttpBackend,
    messages: list[dict],
    n: int = 1,
    temperature: float = 0.0,
) -> list[str]:
    """POST /v1/chat/completions and return the n choice contents in order."""
    if n < 1:
        raise InvalidParams(f"n must be >= 1, got {n}")
    payload = {
        "model": backend.cfg.model,
        "messages": messages,
        "n": n,
        "temperature": temperature,
    }
    cacheable = temperature == 0 or backend.cfg.cache_sampled
    resp = backend.post_json("/v1/chat/completions", payload, kind="chat", cacheable=cacheable)
    choices = resp.get("choices")
    if not isinstance(choices, list) or len(choices) < 1:
        raise MalformedResponse("chat response has no choices")
    out = []
    for choice in choices:
        content = choice.get("message", {}).get("content") if isinstance(choice, dict) else None
        if not isinstance(content, str):
            raise MalformedResponse("chat choice lacks message.content")
        out.append(content)
    return out
