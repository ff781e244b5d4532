"""Entropy-based measures over knowledge bases, plus plain PMF entropies.

All logarithms are base 2 unless a ``base`` is passed explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import EmptyKnowledgeBase, PreconditionError
from .inference import QueryPolicy, answerable, query_prob, query_probs
from .kb import Atom, KnowledgeBase, Message, as_kb, kb_union


def clause_entropy(p: float, base: float = 2.0) -> float:
    """Binary entropy of a truth probability, with 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    h = 0.0
    for x in (p, 1.0 - p):
        if x > 0.0:
            h -= x * math.log(x)
    return h / math.log(base)


def query_entropy(kb: KnowledgeBase, q: Atom, policy: QueryPolicy = QueryPolicy.ERROR,
                  base: float = 2.0) -> float:
    """Entropy of the answer ``kb`` gives for ``q``."""
    return clause_entropy(query_prob(kb, q, policy), base)


def kb_uncertainty(kb: KnowledgeBase, base: float = 2.0) -> float:
    """Mean answer entropy over every query the knowledge base can answer."""
    qs = answerable(kb)
    if not qs:
        raise EmptyKnowledgeBase("knowledge base answers no queries")
    probs = query_probs(kb, sorted(qs))
    return sum(clause_entropy(p, base) for p in probs.values()) / len(qs)


def semantic_content(kb: KnowledgeBase, message: Message, base: float = 2.0) -> float:
    """Change in uncertainty caused by adding ``message``; negative is good."""
    merged = kb_union(kb, message)
    if merged == kb:
        return 0.0
    return kb_uncertainty(merged, base) - kb_uncertainty(kb, base)


def semantic_mutual_info(kb: KnowledgeBase, q: Atom, message: Message,
                         policy: QueryPolicy = QueryPolicy.ERROR,
                         require_new: bool = False) -> float:
    """Reduction of the entropy of ``q`` obtained by adding ``message``.

    Not clamped: a message can make the answer *more* uncertain, which gives
    a negative value.  With ``require_new`` a message already in ``kb`` is
    rejected instead of silently yielding 0.
    """
    if require_new and as_kb(message) in kb:
        raise PreconditionError("message is already part of the knowledge base")
    merged = kb_union(kb, message)
    if merged == kb:
        return 0.0
    return query_entropy(kb, q, policy) - query_entropy(merged, q, policy)


def entropy_difference(q: Atom, kb_b: KnowledgeBase, kb_e: KnowledgeBase,
                       policy: QueryPolicy = QueryPolicy.ERROR) -> float:
    return query_entropy(kb_b, q, policy) - query_entropy(kb_e, q, policy)


def _check_secret(message: Message, kb_b: KnowledgeBase, kb_e: KnowledgeBase) -> None:
    msg = as_kb(message)
    for item in msg.items():
        if item in kb_b or item in kb_e:
            raise PreconditionError(f"message clause '{item}' is already known to a receiver")


def secrecy_rate(q: Atom, message: Message, kb_b: KnowledgeBase, kb_e: KnowledgeBase,
                 policy: QueryPolicy = QueryPolicy.ERROR) -> float:
    """Positive part of Bob's minus Eve's semantic mutual information."""
    _check_secret(message, kb_b, kb_e)
    gap = (semantic_mutual_info(kb_b, q, message, policy)
           - semantic_mutual_info(kb_e, q, message, policy))
    return max(0.0, gap)


def secrecy_condition(q: Atom, message: Message, kb_b: KnowledgeBase, kb_e: KnowledgeBase,
                      policy: QueryPolicy = QueryPolicy.ERROR) -> bool:
    """Whether the entropy gap between Bob and Eve shrinks once both get ``message``."""
    before = entropy_difference(q, kb_b, kb_e, policy)
    after = entropy_difference(q, kb_union(kb_b, message), kb_union(kb_e, message), policy)
    return before > after


def noisy_secrecy_rate(q: Atom, message: Message, kb_b: KnowledgeBase, kb_e: KnowledgeBase,
                       ch_b, ch_e, trials: int, seed: int = 0,
                       policy: QueryPolicy = QueryPolicy.ERROR) -> float:
    """Monte-Carlo secrecy rate when Bob and Eve receive ``message`` over noisy channels.

    The message travels as its canonical program text.  A reception that
    does not reproduce the sent message exactly (unparseable or altered)
    counts as no message at all.
    """
    from .channel import reception_trials
    from .lang import serialize

    if trials <= 0:
        raise ValueError("trials must be positive")
    _check_secret(message, kb_b, kb_e)
    text = serialize(as_kb(message))
    intact_b, intact_e = reception_trials(text, ch_b, ch_e, trials, seed)
    gain_b = semantic_mutual_info(kb_b, q, message, policy)
    gain_e = semantic_mutual_info(kb_e, q, message, policy)
    total = 0.0
    for ok_b, ok_e in zip(intact_b, intact_e):
        total += max(0.0, (gain_b if ok_b else 0.0) - (gain_e if ok_e else 0.0))
    return total / trials


# -- classical discrete entropies ------------------------------------------------

@dataclass(frozen=True)
class Pmf:
    outcomes: tuple
    probs: np.ndarray

    def __init__(self, outcomes: Sequence[Hashable], probs: Sequence[float]):
        probs = np.asarray(probs, dtype=float)
        if len(outcomes) != len(probs):
            raise ValueError("outcomes and probabilities differ in length")
        _check_normalized(probs)
        object.__setattr__(self, "outcomes", tuple(outcomes))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, outcomes: Iterable[Hashable]) -> "Pmf":
        outcomes = list(outcomes)
        return cls(outcomes, np.full(len(outcomes), 1.0 / len(outcomes)))

    def given(self, event: Callable[[Hashable], bool]) -> "Pmf":
        """Distribution conditioned on the outcomes satisfying ``event``."""
        mask = np.array([bool(event(x)) for x in self.outcomes])
        mass = self.probs[mask].sum()
        if mass <= 0.0:
            raise ValueError("conditioning event has probability zero")
        kept = [x for x, m in zip(self.outcomes, mask) if m]
        return Pmf(kept, self.probs[mask] / mass)


class JointPmf:
    """Joint distribution table, one numpy axis per variable."""

    def __init__(self, table, labels: Sequence[str] | None = None):
        table = np.asarray(table, dtype=float)
        _check_normalized(table)
        self.table = table
        self.labels = tuple(labels) if labels is not None else tuple(
            f"X{i}" for i in range(table.ndim))
        if len(self.labels) != table.ndim:
            raise ValueError("one label per axis required")

    @property
    def n_vars(self) -> int:
        return self.table.ndim

    def axes(self, which) -> tuple[int, ...]:
        if isinstance(which, (int, str)):
            which = [which]
        return tuple(sorted({self.labels.index(w) if isinstance(w, str) else int(w)
                             for w in which}))

    def marginal(self, which) -> np.ndarray:
        keep = self.axes(which)
        drop = tuple(i for i in range(self.n_vars) if i not in keep)
        return self.table.sum(axis=drop) if drop else self.table


def _check_normalized(values: np.ndarray) -> None:
    if np.any(values < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(values.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {values.sum()}, not 1")


def _entropy(values: np.ndarray) -> float:
    p = values[values > 0]
    return float(-(p * np.log2(p)).sum())


def pmf_entropy(pmf: Pmf | Sequence[float]) -> float:
    probs = pmf.probs if isinstance(pmf, Pmf) else np.asarray(pmf, dtype=float)
    _check_normalized(probs)
    return _entropy(probs)


def joint_entropy(joint: JointPmf, which=None) -> float:
    if which is None:
        return _entropy(joint.table)
    if not joint.axes(which):
        return 0.0
    return _entropy(joint.marginal(which))


def conditional_entropy(joint: JointPmf, target, given=()) -> float:
    """H(target | given) = H(target, given) - H(given)."""
    t, g = joint.axes(target), joint.axes(given) if given != () else ()
    both = tuple(sorted(set(t) | set(g)))
    h_given = joint_entropy(joint, g) if g else 0.0
    return joint_entropy(joint, both) - h_given


def mutual_information(joint: JointPmf, x=0, y=1) -> float:
    """I(X;Y) = H(X) - H(X|Y)."""
    return joint_entropy(joint, x) - conditional_entropy(joint, x, y)
