"""Score fusion and cross-camera ranking.

The fused score of a query observation against a gallery observation is the
appearance cosine, clamped at zero, multiplied by the transition probability
from the query's camera to the gallery's camera. Because every probability
is at most one, fusion can only suppress a pairing, never promote it.

Gallery items from the query's own camera are always excluded; with a
transition model present, items on non-adjacent cameras score zero.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embeddings import Observation, sim_app
from .errors import (
    DuplicateObservationError,
    EmptyGalleryError,
    ShapeMismatchError,
    ValidationError,
)
from .transition import TransitionModel


@dataclass(frozen=True)
class QueryGallerySplit:
    """Query and gallery observation lists, each free of duplicate obs_ids.

    The two sides may be the same list: the paper's protocol queries every
    testing image against all the others, and same-camera exclusion removes
    the self pairing.
    """

    queries: tuple[Observation, ...]
    gallery: tuple[Observation, ...]

    def __init__(self, queries: Sequence[Observation],
                 gallery: Sequence[Observation]):
        for name, side in (("queries", queries), ("gallery", gallery)):
            ids = [o.obs_id for o in side]
            if len(set(ids)) != len(ids):
                raise DuplicateObservationError(f"duplicate obs_id in {name}")
        object.__setattr__(self, "queries", tuple(queries))
        object.__setattr__(self, "gallery", tuple(gallery))


@dataclass(frozen=True)
class RankingResult:
    """Gallery matches for one query, best first.

    Ordering is strictly by descending score with ties broken by ascending
    gallery obs_id, so identical inputs always rank identically.
    """

    query_id: str
    ranked: tuple[tuple[str, float], ...]


def fused_sim(a: Observation, b: Observation, model: TransitionModel) -> float:
    """Appearance similarity suppressed by the camera-transition prior.

    Negative cosines clamp to zero before the product; multiplying a
    negative score by a probability below one would otherwise pull it
    toward zero and promote improbable transitions.
    """
    if a.camera == b.camera:
        raise ValidationError(
            "fused_sim is defined for cross-camera pairs only")
    s = sim_app(a.embedding, b.embedding)
    p = model.prob(a.camera, b.camera)
    return (s if s > 0.0 else 0.0) * p


def _gallery_arrays(gallery: Sequence[Observation]):
    if not gallery:
        raise EmptyGalleryError("gallery is empty")
    parts, dim = gallery[0].embedding.parts, gallery[0].embedding.dim
    for g in gallery:
        if (g.embedding.parts, g.embedding.dim) != (parts, dim):
            raise ShapeMismatchError(
                "gallery embeddings must share (parts, dim)")
    matrix = np.stack([g.embedding.vector for g in gallery])
    norms = np.linalg.norm(matrix, axis=1)
    return matrix, norms, (parts, dim)


def _transition_row(model: TransitionModel, query_camera: str,
                    gallery: Sequence[Observation],
                    cache: dict[str, np.ndarray]) -> np.ndarray:
    row = cache.get(query_camera)
    if row is None:
        probs = []
        for g in gallery:
            if g.camera == query_camera:
                probs.append(0.0)  # excluded anyway
            else:
                probs.append(model.prob(query_camera, g.camera))
        row = np.asarray(probs, dtype=np.float64)
        cache[query_camera] = row
    return row


def score_rows(queries: Sequence[Observation], gallery: Sequence[Observation],
               model: TransitionModel | None = None,
               threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Raw score matrix and inclusion mask for all query/gallery pairs.

    Row i holds query i's scores under the ranking rules; mask entry (i, j)
    is False where gallery j shares query i's camera. Rows are computed
    independently, so the result is bitwise identical for any thread count.
    """
    matrix, gnorms, (parts, dim) = _gallery_arrays(gallery)
    for q in queries:
        if (q.embedding.parts, q.embedding.dim) != (parts, dim):
            raise ShapeMismatchError(
                "query embeddings must match gallery (parts, dim)")
    gallery_cams = np.asarray([g.camera for g in gallery])
    scores = np.empty((len(queries), len(gallery)), dtype=np.float64)
    included = np.empty((len(queries), len(gallery)), dtype=bool)
    prior_cache: dict[str, np.ndarray] = {}
    if model is not None:
        # Materialize priors up front: model.prob raises on undefined rows
        # and that must not depend on worker scheduling.
        for q in queries:
            _transition_row(model, q.camera, gallery, prior_cache)

    def fill(i: int) -> None:
        q = queries[i]
        qvec = q.embedding.vector
        app = (matrix @ qvec) / (np.linalg.norm(qvec) * gnorms)
        if model is None:
            row = app
        else:
            row = np.where(app > 0.0, app, 0.0) * prior_cache[q.camera]
        scores[i, :] = row
        included[i, :] = gallery_cams != q.camera

    if threads > 1 and len(queries) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(len(queries))))
    else:
        for i in range(len(queries)):
            fill(i)
    return scores, included


def _rank_from_row(query: Observation, gallery: Sequence[Observation],
                   scores: np.ndarray, included: np.ndarray,
                   id_ranks: np.ndarray) -> RankingResult:
    idx = np.nonzero(included)[0]
    if idx.size == 0:
        raise EmptyGalleryError(
            f"no gallery items left for query {query.obs_id!r} after "
            "same-camera exclusion")
    order = idx[np.lexsort((id_ranks[idx], -scores[idx]))]
    ranked = tuple((gallery[j].obs_id, float(scores[j])) for j in order)
    return RankingResult(query_id=query.obs_id, ranked=ranked)


def _id_ranks(gallery: Sequence[Observation]) -> np.ndarray:
    # Lexicographic tie-break position of each gallery obs_id.
    order = sorted(range(len(gallery)), key=lambda j: gallery[j].obs_id)
    ranks = np.empty(len(gallery), dtype=np.int64)
    for pos, j in enumerate(order):
        ranks[j] = pos
    return ranks


def rank(query: Observation, gallery: Sequence[Observation],
         model: TransitionModel | None = None) -> RankingResult:
    """Rank the gallery for one query under the fusion rules."""
    scores, included = score_rows([query], gallery, model)
    return _rank_from_row(query, gallery, scores[0], included[0],
                          _id_ranks(gallery))


def rank_all(queries: Sequence[Observation], gallery: Sequence[Observation],
             model: TransitionModel | None = None,
             threads: int = 1) -> list[RankingResult]:
    """Rank the gallery for every query; one RankingResult per query."""
    scores, included = score_rows(queries, gallery, model, threads=threads)
    id_ranks = _id_ranks(gallery)
    return [_rank_from_row(q, gallery, scores[i], included[i], id_ranks)
            for i, q in enumerate(queries)]


def similarity_matrix(split: QueryGallerySplit,
                      model: TransitionModel | None = None,
                      threads: int = 1) -> np.ndarray:
    """Dense query-by-gallery score matrix, min-max normalized to [0, 1].

    Excluded pairs hold zero. Normalization runs over the nonzero support;
    when every supported score is identical they all map to one.
    """
    scores, included = score_rows(split.queries, split.gallery, model,
                                  threads=threads)
    raw = np.where(included, scores, 0.0)
    support = raw != 0.0
    out = np.zeros_like(raw)
    if not support.any():
        return out
    lo = float(raw[support].min())
    hi = float(raw[support].max())
    if hi > lo:
        out[support] = (raw[support] - lo) / (hi - lo)
    else:
        out[support] = 1.0
    return out


def rankings_csv(results: Sequence[RankingResult],
                 labels: dict[str, str | None],
                 depth: int | None = None) -> str:
    """Render ranking results as CSV rows of
    query_obs, rank, gallery_obs, score, is_correct."""
    lines = ["query_obs,rank,gallery_obs,score,is_correct"]
    for res in results:
        qpid = labels.get(res.query_id)
        top = res.ranked if depth is None else res.ranked[:depth]
        for position, (gid, score) in enumerate(top, 1):
            gpid = labels.get(gid)
            correct = ("" if qpid is None or gpid is None
                       else str(qpid == gpid).lower())
            lines.append(f"{res.query_id},{position},{gid},{score:.6f},{correct}")
    return "\n".join(lines) + "\n"
