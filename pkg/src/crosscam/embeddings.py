"""Part-structured appearance embeddings, cosine similarity, NDJSON I/O.

An embedding is a flat float64 vector made of ``parts`` blocks of ``dim``
values each. Every block carries unit Euclidean norm, so the squared norm
of the whole vector equals ``parts``. Appearance similarity is the standard
cosine of the two flat vectors, which for part-normalized inputs equals the
dot product divided by the number of parts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

import numpy as np

from .errors import (
    DuplicateObservationError,
    SchemaError,
    ShapeMismatchError,
    ValidationError,
    ZeroPartError,
)

DEFAULT_PARTS = 6
DEFAULT_DIM = 2048

# Tolerance on per-part unit norm for vectors claiming to be normalized.
PART_NORM_TOL = 1e-6
# A part with norm below this cannot be normalized at all.
ZERO_NORM_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Embedding:
    """Immutable part-normalized feature vector.

    ``vector`` is flat with length ``parts * dim``; use
    :func:`normalize_parts` to build one from raw features.
    """

    vector: np.ndarray
    parts: int
    dim: int

    def __post_init__(self):
        vec = np.array(self.vector, dtype=np.float64, copy=True)
        if self.parts < 1 or self.dim < 1:
            raise ValidationError(
                f"parts and dim must be positive, got ({self.parts}, {self.dim})")
        if vec.ndim != 1 or vec.size != self.parts * self.dim:
            raise ShapeMismatchError(
                f"expected flat vector of length {self.parts * self.dim}, "
                f"got shape {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise ValidationError("embedding contains non-finite values")
        norms = np.linalg.norm(vec.reshape(self.parts, self.dim), axis=1)
        if np.any(np.abs(norms - 1.0) > PART_NORM_TOL):
            worst = float(np.max(np.abs(norms - 1.0)))
            raise ValidationError(
                f"part norms deviate from 1 by up to {worst:.3g}; "
                "normalize raw features with normalize_parts()")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @property
    def blocks(self) -> np.ndarray:
        return self.vector.reshape(self.parts, self.dim)


def normalize_parts(raw, parts: int | None = None, dim: int | None = None) -> Embedding:
    """Scale each part of ``raw`` to unit Euclidean norm.

    ``raw`` may be a 2-D array of shape (parts, dim) or a flat sequence with
    explicit ``parts`` and ``dim``. Raises ZeroPartError when any part has
    norm below ``ZERO_NORM_FLOOR``.
    """
    arr = np.array(raw, dtype=np.float64)
    if arr.ndim == 2:
        parts, dim = arr.shape
    elif arr.ndim == 1:
        if parts is None or dim is None:
            raise ShapeMismatchError(
                "flat input requires explicit parts and dim")
        if arr.size != parts * dim:
            raise ShapeMismatchError(
                f"flat input of length {arr.size} does not match "
                f"parts*dim = {parts * dim}")
        arr = arr.reshape(parts, dim)
    else:
        raise ShapeMismatchError(f"expected 1-D or 2-D input, got {arr.ndim}-D")
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms < ZERO_NORM_FLOOR):
        bad = int(np.argmin(norms))
        raise ZeroPartError(f"part {bad} has norm {norms[bad]:.3g}, cannot normalize")
    return Embedding(vector=(arr / norms[:, None]).reshape(-1), parts=parts, dim=dim)


def sim_app(a: Embedding, b: Embedding) -> float:
    """Cosine similarity between two embeddings, in [-1, 1].

    Symmetric down to the bit: elementwise products commute and the
    reduction order depends only on the vector length, never on which
    argument comes first or on thread count.
    """
    if (a.parts, a.dim) != (b.parts, b.dim):
        raise ShapeMismatchError(
            f"embedding shapes differ: ({a.parts}, {a.dim}) vs ({b.parts}, {b.dim})")
    dot = float(np.dot(a.vector, b.vector))
    denom = float(np.linalg.norm(a.vector)) * float(np.linalg.norm(b.vector))
    return dot / denom


@dataclass(frozen=True)
class Observation:
    """One detected-person record."""

    obs_id: str
    person_id: str | None
    camera: str
    timestamp: float
    embedding: Embedding

    def __post_init__(self):
        if not self.obs_id:
            raise ValidationError("obs_id must be non-empty")


_RECORD_KEYS = ("obs_id", "person_id", "camera", "timestamp", "embedding")


def load_observations(lines: Iterable[str], parts: int | None = None,
                      dim: int | None = None,
                      source: str | None = None) -> list[Observation]:
    """Parse NDJSON observation records.

    An optional first line ``{"parts": P, "dim": D, "normalized": bool}``
    sets the embedding layout; otherwise ``parts``/``dim`` arguments apply,
    falling back to the (6, 2048) defaults. Raw features (``normalized``
    false or header absent) are part-normalized on load; vectors declared
    normalized are validated and kept bit-for-bit.
    """
    normalized = False
    observations: list[Observation] = []
    seen: set[str] = set()
    record_index = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON ({exc.msg})",
                              record=record_index + 1,
                              source=source, line=lineno) from exc
        if not isinstance(payload, dict):
            raise SchemaError("record must be a JSON object",
                              record=record_index + 1,
                              source=source, line=lineno)
        if record_index == 0 and not observations and "obs_id" not in payload:
            header_keys = set(payload) - {"parts", "dim", "normalized"}
            if header_keys:
                raise SchemaError(
                    f"unexpected header keys {sorted(header_keys)}",
                    source=source, line=lineno)
            parts = int(payload.get("parts", parts or DEFAULT_PARTS))
            dim = int(payload.get("dim", dim or DEFAULT_DIM))
            normalized = bool(payload.get("normalized", False))
            continue
        record_index += 1
        missing = [k for k in _RECORD_KEYS if k not in payload]
        if missing:
            raise SchemaError(f"missing keys {missing}",
                              record=record_index, source=source, line=lineno)
        obs_id = payload["obs_id"]
        person_id = payload["person_id"]
        camera = payload["camera"]
        timestamp = payload["timestamp"]
        values = payload["embedding"]
        if (not isinstance(obs_id, str) or not isinstance(camera, str)
                or not isinstance(timestamp, (int, float))
                or isinstance(timestamp, bool)
                or not (person_id is None or isinstance(person_id, str))
                or not isinstance(values, list)):
            raise SchemaError("field has wrong type",
                              record=record_index, source=source, line=lineno)
        if obs_id in seen:
            raise DuplicateObservationError(f"duplicate obs_id {obs_id!r}")
        seen.add(obs_id)
        eff_parts = parts or DEFAULT_PARTS
        eff_dim = dim or DEFAULT_DIM
        if len(values) != eff_parts * eff_dim:
            raise ShapeMismatchError(
                f"record {record_index}: embedding has {len(values)} values, "
                f"expected {eff_parts}*{eff_dim} = {eff_parts * eff_dim}")
        if normalized:
            embedding = Embedding(np.asarray(values, dtype=np.float64),
                                  eff_parts, eff_dim)
        else:
            embedding = normalize_parts(values, eff_parts, eff_dim)
        observations.append(Observation(obs_id=obs_id, person_id=person_id,
                                        camera=camera,
                                        timestamp=float(timestamp),
                                        embedding=embedding))
    return observations


def read_observations(path: str, parts: int | None = None,
                      dim: int | None = None) -> list[Observation]:
    with open(path, "r", encoding="utf-8") as handle:
        return load_observations(handle, parts=parts, dim=dim, source=path)


def iter_ndjson(observations: Iterable[Observation],
                header: bool = True) -> Iterator[str]:
    """Yield NDJSON lines. Floats are written at full round-trip precision."""
    first = True
    shape: tuple[int, int] | None = None
    for obs in observations:
        if first and header:
            yield json.dumps({"parts": obs.embedding.parts,
                              "dim": obs.embedding.dim,
                              "normalized": True})
        first = False
        if shape is None:
            shape = (obs.embedding.parts, obs.embedding.dim)
        elif shape != (obs.embedding.parts, obs.embedding.dim):
            raise ShapeMismatchError(
                "observations in one dataset must share (parts, dim)")
        yield json.dumps({
            "obs_id": obs.obs_id,
            "person_id": obs.person_id,
            "camera": obs.camera,
            "timestamp": obs.timestamp,
            "embedding": [float(v) for v in obs.embedding.vector],
        })


def write_observations(path: str, observations: Iterable[Observation],
                       header: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for line in iter_ndjson(observations, header=header):
            handle.write(line)
            handle.write("\n")
