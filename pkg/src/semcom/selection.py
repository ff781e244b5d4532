"""Sender-side choices: which message to send, which question to ask,
which source to poll next.

Every argmin here breaks ties deterministically: candidates are scanned in
canonical clause order (or by index) and a later candidate only wins if it
is better by more than ``TIE_SLACK``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, TypeVar

from .errors import EmptyInput, Infeasible
from .inference import QueryPolicy, answerable
from .kb import Item, KnowledgeBase, Message, as_kb, kb_union
from .lang import serialize
from .measures import JointPmf, conditional_entropy, kb_uncertainty, query_entropy

TIE_SLACK = 1e-12

T = TypeVar("T")


def _argmin(candidates: Iterable[T], score: Callable[[T], float]) -> T:
    best, best_score = None, math.inf
    for c in candidates:
        s = score(c)
        if best is None or s < best_score - TIE_SLACK:
            best, best_score = c, s
    if best is None:
        raise EmptyInput("no candidates to choose from")
    return best


def _canonical(messages: Iterable[Message]) -> list[Message]:
    msgs = list(messages)
    if not msgs:
        raise EmptyInput("no candidate messages")
    return sorted(msgs, key=_message_key)


def _message_key(m: Message) -> tuple:
    if isinstance(m, KnowledgeBase):
        return (2, tuple(it.sort_key() for it in m.items()))
    return m.sort_key()


# -- message lengths ------------------------------------------------------------

@dataclass(frozen=True)
class SymbolBits:
    """Length of the canonical text, in bits over a ``alphabet_size``-ary channel."""

    alphabet_size: int = 26

    def __call__(self, m: Message) -> float:
        text = serialize(as_kb(m)).rstrip("\n")
        return len(text) * math.log2(self.alphabet_size)


@dataclass(frozen=True)
class FixedPerClause:
    cost: float = 1.0

    def __call__(self, m: Message) -> float:
        return self.cost * len(as_kb(m))


@dataclass(frozen=True)
class Table:
    bits: Mapping[Item, float] = field(default_factory=dict)

    def __call__(self, m: Message) -> float:
        return sum(self.bits[item] for item in as_kb(m).items())


LengthFn = Callable[[Message], float]


# -- message choice -----------------------------------------------------------------

def sender_choice(pool: Sequence[Message], kb: KnowledgeBase) -> Message:
    """The pool message leaving the receiver's knowledge base least uncertain."""
    return _argmin(_canonical(pool), lambda m: kb_uncertainty(kb_union(kb, m)))


def sender_choice_expected(pool: Sequence[Message],
                           belief: Sequence[tuple[KnowledgeBase, float]]) -> Message:
    """Like ``sender_choice`` when the receiver's base is only known in distribution."""
    belief = [(k, p) for k, p in belief]
    if not belief:
        raise EmptyInput("empty belief")
    total = sum(p for _, p in belief)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"belief probabilities sum to {total}")
    live = [(k, p) for k, p in belief if p > 0.0]

    def expected(m: Message) -> float:
        return sum(p * kb_uncertainty(kb_union(k, m)) for k, p in live)

    return _argmin(_canonical(pool), expected)


def best_message_for_query(pool: Sequence[Message], kb: KnowledgeBase, q,
                           policy: QueryPolicy = QueryPolicy.ERROR) -> Message:
    """The message minimizing the entropy of the answer to ``q``."""
    return best_message_broadcast(pool, [kb], q, policy=policy)


def best_message_len_constrained(pool: Sequence[Message], kb: KnowledgeBase, q,
                                 length: LengthFn, max_bits: float,
                                 policy: QueryPolicy = QueryPolicy.ERROR) -> Message:
    return best_message_broadcast(pool, [kb], q, length, max_bits, policy)


def best_message_broadcast(pool: Sequence[Message], kbs: Sequence[KnowledgeBase], q,
                           length: LengthFn | None = None, max_bits: float = math.inf,
                           policy: QueryPolicy = QueryPolicy.ERROR) -> Message:
    """Minimax message for a query shared by several receivers, within a length budget."""
    candidates = _canonical(pool)
    if not kbs:
        raise EmptyInput("no receivers")
    if length is not None:
        candidates = [m for m in candidates if length(m) <= max_bits]
        if not candidates:
            raise Infeasible(f"no message fits in {max_bits} bits")

    def worst(m: Message) -> float:
        return max(query_entropy(kb_union(k, m), q, policy) for k in kbs)

    return _argmin(candidates, worst)


# -- query formulation ----------------------------------------------------------

@dataclass(frozen=True)
class QuerySpec:
    name: str
    prior: float
    answer_bits: float

    def __post_init__(self) -> None:
        if not 0.0 < self.prior <= 1.0:
            raise ValueError(f"query prior {self.prior} outside (0, 1]")
        if self.answer_bits < 0:
            raise ValueError("answer length must be non-negative")

    @property
    def query_bits(self) -> float:
        return -math.log2(self.prior)


def mdl_costs(queries: Sequence[QuerySpec], lam: float = 1.0) -> list[float]:
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return [q.query_bits + lam * q.answer_bits for q in queries]


def mdl_query(queries: Sequence[QuerySpec], lam: float = 1.0) -> QuerySpec:
    """Question minimizing query length plus weighted answer length."""
    if not queries:
        raise EmptyInput("no candidate queries")
    costs = mdl_costs(queries, lam)
    return queries[_argmin(range(len(queries)), costs.__getitem__)]


# -- source selection -------------------------------------------------------------

def das_objective(joint: JointPmf, collected: Iterable[int], n: int) -> float:
    collected = sorted(set(collected))
    rest = [i for i in range(joint.n_vars) if i not in collected]
    return (conditional_entropy(joint, rest, collected)
            - conditional_entropy(joint, n, collected))


def das_select_stochastic(joint: JointPmf, collected: Iterable[int]) -> int:
    """Next source axis to poll given the axes already collected (0-based)."""
    collected = set(collected)
    open_ = [i for i in range(joint.n_vars) if i not in collected]
    if not open_:
        raise EmptyInput("every source has already been collected")
    return _argmin(open_, lambda n: das_objective(joint, collected, n))


def das_select_semantic(messages: Sequence[tuple[int, Message]], kb: KnowledgeBase,
                        visited: Iterable[int] = ()) -> int:
    """Index of the unvisited source whose message lowers uncertainty the most."""
    visited = set(visited)
    open_ = sorted(((i, m) for i, m in messages if i not in visited), key=lambda im: im[0])
    if not open_:
        raise EmptyInput("every source has been visited")
    # the baseline is a constant shift; an empty base contributes nothing
    base = kb_uncertainty(kb) if answerable(kb) else 0.0
    by_index = dict(open_)
    return _argmin([i for i, _ in open_],
                   lambda i: kb_uncertainty(kb_union(kb, by_index[i])) - base)
