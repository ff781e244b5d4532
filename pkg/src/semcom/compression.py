"""Semantic compression: smaller knowledge bases and messages that answer
(nearly) the same queries."""

from __future__ import annotations

import itertools
from typing import Sequence

from .errors import Infeasible
from .inference import answerable, query_probs
from .kb import Item, KnowledgeBase, Message
from .measures import semantic_content

NUMERIC_SLACK = 1e-12
SUBSET_LIMIT = 16


def _probs(kb: KnowledgeBase) -> dict:
    qs = answerable(kb)
    return query_probs(kb, sorted(qs)) if qs else {}


def _close(p: dict, r: dict, common, eps: float) -> bool:
    tol = max(eps, NUMERIC_SLACK)
    return all(abs(p[q] - r[q]) <= tol for q in common)


def kb_equivalent(kb: KnowledgeBase, other: KnowledgeBase, eps: float = 0.0) -> bool:
    """Same answerable queries, and answers within ``eps`` of each other."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if answerable(kb) != answerable(other):
        return False
    return _close(_probs(kb), _probs(other), answerable(kb), eps)


def _subsets(items: Sequence[Item], limit: int):
    """All subsets by increasing size, lexicographic in canonical order."""
    if len(items) > limit:
        raise ValueError(f"subset search is capped at {limit} clauses, got {len(items)}")
    for size in range(len(items) + 1):
        for combo in itertools.combinations(items, size):
            yield KnowledgeBase.of(combo)


def compress_exact(kb: KnowledgeBase, limit: int = SUBSET_LIMIT) -> KnowledgeBase:
    """Smallest equivalent subset of ``kb`` (canonically least among ties)."""
    target_q = answerable(kb)
    target = _probs(kb)
    for cand in _subsets(kb.items(), limit):
        if answerable(cand) == target_q and _close(target, _probs(cand), target_q, 0.0):
            return cand
    return kb  # unreachable: kb itself is a subset


def _within_tolerance(kb: KnowledgeBase, base_q, base_p, delta: float, eps: float) -> bool:
    cand_q = answerable(kb)
    common = cand_q & base_q
    coverage = len(common) / len(base_q) if base_q else 1.0
    if coverage < 1.0 - delta - NUMERIC_SLACK:
        return False
    return _close(base_p, _probs(kb), common, eps)


def compress_greedy(kb: KnowledgeBase, delta: float = 0.0, eps: float = 0.0) -> KnowledgeBase:
    """Drop clauses one at a time while coverage and answers stay within tolerance.

    Coverage is the share of the original answerable queries that remain
    answerable; answers are always compared with the *original* ``kb``.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    if eps < 0:
        raise ValueError("eps must be non-negative")
    base_q = answerable(kb)
    base_p = _probs(kb)
    current = kb
    changed = True
    while changed:
        changed = False
        for item in current.items():
            cand = current.without([item])
            if _within_tolerance(cand, base_q, base_p, delta, eps):
                current = cand
                changed = True
                break
    return current


def min_message_set(pool: Sequence[Message], kb: KnowledgeBase, target: float,
                    tol: float = 0.0, limit: int = SUBSET_LIMIT) -> KnowledgeBase:
    """Fewest pool clauses whose joint semantic content is ``target`` (within ``tol``)."""
    items = KnowledgeBase.of(
        it for m in pool for it in (m.items() if isinstance(m, KnowledgeBase) else [m])
    ).items()
    slack = max(tol, NUMERIC_SLACK)
    for cand in _subsets(items, limit):
        content = semantic_content(kb, cand) if cand else 0.0
        if abs(content - target) <= slack:
            return cand
    raise Infeasible(f"no message set reaches semantic content {target} within {tol}")
