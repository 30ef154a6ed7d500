"""Dense-vector providers for prepared documents.

Two providers share one contract (one vector per input, in input order,
all vectors the same dimension, norms strictly positive):

* ``hash`` -- a hermetic signed bag-of-words hashing scheme. Deterministic
  and platform-independent, useful for tests and offline runs; the vectors
  carry no semantics beyond "more shared vocabulary, higher cosine".
* ``http`` -- a remote model server speaking the wire protocol
  ``POST {endpoint}/embed`` with body ``{"texts": [...]}`` answered by
  ``200 {"dim": int, "vectors": [[...], ...]}``, vectors aligned to texts.
  Any other status is an error.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import requests

from .errors import (
    ConnectionFailedError,
    DimMismatchError,
    NonFiniteVectorError,
    ProviderStatusError,
    RequestTimeoutError,
    ValidationError,
)
from .preprocess import PreparedDoc

# Fixed key so the 64-bit token hash never varies across runs or platforms.
_HASH_KEY = b"doppel-embed-v1"

DEFAULT_HASH_DIM = 256
DEFAULT_BATCH_SIZE = 32
_RETRY_ATTEMPTS = 3
_RETRY_BASE_DELAY = 0.5
_RETRYABLE_STATUSES = frozenset({502, 503, 504})


@dataclass(frozen=True)
class ProviderConfig:
    """Which provider to use and how: ``kind`` is ``hash`` or ``http``."""

    kind: str = "hash"
    dim: int = DEFAULT_HASH_DIM
    endpoint: str | None = None
    batch_size: int = DEFAULT_BATCH_SIZE

    def __post_init__(self):
        if self.kind not in ("hash", "http"):
            raise ValidationError(f"provider kind must be 'hash' or 'http', got {self.kind!r}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.kind == "hash" and self.dim < 8:
            raise ValidationError(f"hash provider needs dim >= 8, got {self.dim}")
        if self.kind == "http" and not self.endpoint:
            raise ValidationError("http provider requires an endpoint URL")


def hash_embed(text: str, dim: int) -> np.ndarray:
    """Signed bag-of-words embedding of whitespace tokens.

    Per token: a fixed-key 72-bit hash, whose first 64 bits pick the bucket
    (``mod dim``) and whose next bit picks the sign; signs accumulate per
    bucket and the result is L2-normalized.

    Raises:
        ValidationError: ``dim`` < 8.
        ValueError: the accumulated vector has zero norm, which signals an
            empty document leaking past the preprocessing drop step.
    """
    if dim < 8:
        raise ValidationError(f"hash embedding needs dim >= 8, got {dim}")
    acc = np.zeros(dim, dtype=np.float64)
    for token in text.split():
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=9, key=_HASH_KEY).digest()
        h64 = int.from_bytes(digest[:8], "big")
        bucket = h64 % dim
        sign = 1.0 if digest[8] & 0x80 else -1.0
        acc[bucket] += sign
    norm = float(np.linalg.norm(acc))
    if norm == 0.0:
        raise ValueError("hash embedding collapsed to zero norm (empty or cancelled text)")
    return acc / norm


def _validate_vectors(vectors: np.ndarray, expected_dim: int | None) -> int:
    if vectors.ndim != 2:
        raise NonFiniteVectorError("provider returned a malformed vector block")
    dim = vectors.shape[1]
    if expected_dim is not None and dim != expected_dim:
        raise DimMismatchError(
            f"provider changed dimension mid-run: {expected_dim} then {dim}"
        )
    if not np.all(np.isfinite(vectors)):
        raise NonFiniteVectorError("provider returned NaN or infinite components")
    return dim


def _post_with_retries(url: str, payload: dict, timeout: float) -> requests.Response:
    last_exc: Exception | None = None
    for attempt in range(_RETRY_ATTEMPTS):
        if attempt:
            time.sleep(_RETRY_BASE_DELAY * 2 ** (attempt - 1))
        try:
            resp = requests.post(url, json=payload, timeout=timeout)
        except requests.Timeout as exc:
            last_exc = RequestTimeoutError(f"embedding request timed out: {url}")
            last_exc.__cause__ = exc
            continue
        except requests.ConnectionError as exc:
            last_exc = ConnectionFailedError(f"cannot reach embedding endpoint {url}: {exc}")
            last_exc.__cause__ = exc
            continue
        if resp.status_code in _RETRYABLE_STATUSES:
            last_exc = ProviderStatusError(
                f"embedding endpoint answered HTTP {resp.status_code}", status=resp.status_code
            )
            continue
        return resp
    assert last_exc is not None
    raise last_exc


def _http_embed_batch(endpoint: str, texts: Sequence[str], timeout: float) -> np.ndarray:
    resp = _post_with_retries(endpoint.rstrip("/") + "/embed", {"texts": list(texts)}, timeout)
    if resp.status_code != 200:
        raise ProviderStatusError(
            f"embedding endpoint answered HTTP {resp.status_code}", status=resp.status_code
        )
    body = resp.json()
    vectors = np.asarray(body["vectors"], dtype=np.float64)
    if len(vectors) != len(texts):
        raise ProviderStatusError(
            f"embedding endpoint returned {len(vectors)} vectors for {len(texts)} texts"
        )
    if vectors.size and vectors.shape[1] != body.get("dim"):
        raise DimMismatchError(
            f"declared dim {body.get('dim')} does not match vectors of width {vectors.shape[1]}"
        )
    return vectors


def embed_batch(
    provider: ProviderConfig,
    docs: Sequence[PreparedDoc],
    timeout: float = 60.0,
) -> list[np.ndarray]:
    """Embed prepared documents, one vector per doc, in input order.

    The http provider sends ``batch_size`` texts per request, sequentially
    (one in-flight batch per endpoint), with duplicate texts deduplicated
    client-side so equal inputs always yield equal outputs within a run.

    Raises:
        ProviderStatusError / ConnectionFailedError / RequestTimeoutError:
            http transport failures (after 3 attempts for transient ones).
        DimMismatchError: vectors change width across batches.
        NonFiniteVectorError: NaN or infinite components.
    """
    if provider.kind == "hash":
        return [hash_embed(doc.text, provider.dim) for doc in docs]

    texts = [doc.text for doc in docs]
    unique: list[str] = []
    index: dict[str, int] = {}
    for t in texts:
        if t not in index:
            index[t] = len(unique)
            unique.append(t)

    dim: int | None = None
    blocks: list[np.ndarray] = []
    for start in range(0, len(unique), provider.batch_size):
        batch = unique[start : start + provider.batch_size]
        vectors = _http_embed_batch(provider.endpoint, batch, timeout)
        dim = _validate_vectors(vectors, dim)
        blocks.append(vectors)
    if not blocks:
        return []
    table = np.concatenate(blocks, axis=0)
    return [table[index[t]] for t in texts]
