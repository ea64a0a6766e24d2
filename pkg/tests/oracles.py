"""Brute-force reference implementations, kept deliberately naive.

These never touch the package's vectorized paths: cosines are plain Python
sums, ranking is a list sort, and the CMC curve comes from re-scanning every
ranked list per rank. They exist to cross-check the production code, so do
not "optimize" them into calls back into crosscam.
"""

from __future__ import annotations


def oracle_cosine(a, b) -> float:
    num = sum(x * y for x, y in zip(a, b))
    na = sum(x * x for x in a) ** 0.5
    nb = sum(y * y for y in b) ** 0.5
    return num / (na * nb)


def oracle_rank(query, gallery, score_of):
    """Scored cross-camera gallery, sorted by (-score, obs_id)."""
    items = [(g.obs_id, score_of(query, g))
             for g in gallery if g.camera != query.camera]
    items.sort(key=lambda t: (-t[1], t[0]))
    return items


def oracle_cmc(queries, gallery, score_of, labels):
    """(accuracies, retained, dropped) by rescoring, resorting, rescanning."""
    firsts = []
    dropped = 0
    depth = 0
    for q in queries:
        items = oracle_rank(q, gallery, score_of)
        first = None
        for pos, (gid, _score) in enumerate(items, 1):
            if labels[gid] == labels[q.obs_id]:
                first = pos
                break
        if first is None:
            dropped += 1
        else:
            firsts.append(first)
            depth = max(depth, len(items))
    accuracies = []
    for k in range(1, depth + 1):
        hits = sum(1 for f in firsts if f <= k)
        accuracies.append(hits / len(firsts))
    return accuracies, len(firsts), dropped


def oracle_curve_from_ranks(first_correct_ranks, depth):
    """CMC curve given each retained query's first-correct rank."""
    n = len(first_correct_ranks)
    return [sum(1 for f in first_correct_ranks if f <= k) / n
            for k in range(1, depth + 1)]
