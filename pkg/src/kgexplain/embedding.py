"""Text embedding clients: an HTTP client for hosted embedding models and a
deterministic feature-hashing embedder for offline use."""

from __future__ import annotations

import hashlib
import math
import os
import time
from dataclasses import dataclass

import numpy as np
import requests

from .errors import ConfigurationError, TransportError
from .kg import tokenize_text


@dataclass
class EmbeddingClientConfig:
    base_url: str = "https://api.voyageai.com/v1"
    model_name: str = "voyage-large-2"
    credential_env: str = "VOYAGE_API_KEY"
    max_retries: int = 3
    timeout: float = 60.0


class HttpEmbedder:
    """Client for ``/embeddings`` endpoints (VoyageAI/OpenAI wire shape).

    The vector dimension is recorded on first use and enforced afterwards,
    since a retrieval index must be built from a single model/dimension.
    """

    def __init__(self, config: EmbeddingClientConfig, session: requests.Session | None = None):
        self.config = config
        self.session = session or requests.Session()
        self.dimension: int | None = None

    @property
    def model_name(self) -> str:
        return self.config.model_name

    def embed(self, text: str) -> np.ndarray:
        cfg = self.config
        url = cfg.base_url.rstrip("/") + "/embeddings"
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(cfg.credential_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = {"model": cfg.model_name, "input": [text]}

        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            try:
                resp = self.session.post(url, json=body, headers=headers, timeout=cfg.timeout)
                resp.raise_for_status()
                vector = np.asarray(resp.json()["data"][0]["embedding"], dtype=np.float64)
                if self.dimension is None:
                    self.dimension = int(vector.shape[0])
                elif vector.shape[0] != self.dimension:
                    raise ConfigurationError(
                        f"embedding dimension changed from {self.dimension} to {vector.shape[0]}"
                    )
                return vector
            except ConfigurationError:
                raise
            except Exception as exc:
                last_error = exc
                if attempt < cfg.max_retries:
                    time.sleep(0.5 * (2**attempt))
        raise TransportError(f"embedding request failed after {cfg.max_retries + 1} attempts: {last_error}")


class HashingEmbedder:
    """Deterministic token feature-hashing embedder.

    Each token is hashed to a bucket and a sign; vectors are L2-normalized.
    Stable across runs and platforms, so indexes built offline reproduce the
    same rankings everywhere.
    """

    def __init__(self, dimension: int = 256):
        if dimension < 2:
            raise ConfigurationError("embedding dimension must be >= 2")
        self.dimension = dimension
        self.model_name = f"feature-hash-{dimension}"

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension)
        for token in tokenize_text(text):
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:4], "big") % self.dimension
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            vec[bucket] += sign
        norm = math.sqrt(float(vec @ vec))
        if norm == 0.0:
            vec[0] = 1.0  # empty/unknown text maps to a fixed unit vector
            return vec
        return vec / norm
