"""Receiver-side update rules for incoming messages."""

from __future__ import annotations

import enum

from .inference import QueryPolicy, query_probs
from .kb import AnnotatedDisjunction, Clause, Item, KnowledgeBase, Message, kb_union
from .measures import clause_entropy


class AssimilationOp(enum.Enum):
    UNION = "union"    # plain set union
    FRESH = "fresh"    # newest label wins for the same rule
    GUARDED = "guarded"  # replace only if the head's answer gets less uncertain


def _same_rule(kb: KnowledgeBase, item: Item) -> list[Item]:
    pool = kb.clauses if isinstance(item, Clause) else kb.disjunctions
    return [other for other in pool if other.rule == item.rule]


def _replace(kb: KnowledgeBase, item: Item) -> KnowledgeBase:
    return kb_union(kb.without(_same_rule(kb, item)), item)


def _head_entropy(kb: KnowledgeBase, item: Item) -> float:
    heads = [item.head] if isinstance(item, Clause) else list(item.heads)
    probs = query_probs(kb, heads, QueryPolicy.ERROR)
    # disjunctions are judged on the total entropy of their choice heads
    return sum(clause_entropy(probs[h]) for h in heads)


def _assimilate_one(kb: KnowledgeBase, item: Item, op: AssimilationOp) -> KnowledgeBase:
    if op is AssimilationOp.UNION or not _same_rule(kb, item):
        return kb_union(kb, item)
    candidate = _replace(kb, item)
    if op is AssimilationOp.FRESH:
        return candidate
    if _head_entropy(candidate, item) < _head_entropy(kb, item):
        return candidate
    return kb


def assimilate(kb: KnowledgeBase, message: Message, op: AssimilationOp) -> KnowledgeBase:
    """Update ``kb`` with ``message`` under ``op``.

    A multi-clause message is taken in clause by clause, in canonical order.
    """
    if isinstance(message, (Clause, AnnotatedDisjunction)):
        return _assimilate_one(kb, message, op)
    for item in message.items():
        kb = _assimilate_one(kb, item, op)
    return kb
