"""Exact success probabilities under the distribution semantics.

Two independent backends compute ``p[K |- q]``:

* ``enumerate`` walks every possible world (every inclusion choice for the
  probabilistic clauses and every pick for the annotated disjunctions) and
  sums the mass of the worlds whose least model contains ``q``.  Only used
  up to ``ENUMERATION_LIMIT`` choice variables.
* ``conditioning`` branches on one choice variable at a time, simplifying
  the residual program after each branch and memoizing on the relevant
  residual program.
"""

from __future__ import annotations

import collections
import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import SemcomError, UnanswerableQuery
from .kb import AnnotatedDisjunction, Atom, Clause, KnowledgeBase
from .lang import ground

ENUMERATION_LIMIT = 24


class QueryPolicy(enum.Enum):
    """What to answer for a query that matches no clause head."""

    ERROR = "error"
    HALF = "half"


class InferenceError(SemcomError, RuntimeError):
    pass


@dataclass(frozen=True)
class _Rule:
    var: int | None  # None: always included
    prob: float
    head: Atom
    body: frozenset


@dataclass(frozen=True)
class _Choice:
    var: int
    options: tuple  # ((prob, head), ...)


@dataclass
class _Compiled:
    rules: list[_Rule]
    choices: list[_Choice]
    heads: frozenset
    sources: dict = field(default_factory=dict)  # var -> Clause | AD

    @property
    def n_vars(self) -> int:
        return sum(r.var is not None for r in self.rules) + len(self.choices)


@functools.lru_cache(maxsize=512)
def _compile(kb: KnowledgeBase) -> _Compiled:
    g = ground(kb)
    rules: list[_Rule] = []
    choices: list[_Choice] = []
    sources: dict = {}
    var = 0
    for c in sorted(g.clauses, key=Clause.sort_key):
        if c.prob == 0.0:
            continue
        if c.prob == 1.0:
            rules.append(_Rule(None, 1.0, c.head, frozenset(c.body)))
        else:
            rules.append(_Rule(var, c.prob, c.head, frozenset(c.body)))
            sources[var] = c
            var += 1
    for ad in sorted(g.disjunctions, key=AnnotatedDisjunction.sort_key):
        options = tuple((p, h) for p, h in ad.choices if p > 0.0)
        if not options:
            continue
        choices.append(_Choice(var, options))
        sources[var] = ad
        var += 1
    return _Compiled(rules, choices, g.heads(), sources)


def answerable(kb: KnowledgeBase) -> frozenset[Atom]:
    """Queries the knowledge base can answer: heads of its ground program."""
    return _compile(kb).heads


def _least_model(facts: Iterable[Atom], rules: Iterable[tuple[Atom, frozenset]]) -> set[Atom]:
    true = set(facts)
    pending = [(h, b) for h, b in rules if h not in true]
    changed = True
    while changed:
        changed = False
        rest = []
        for h, b in pending:
            if h in true:
                continue
            if b <= true:
                true.add(h)
                changed = True
            else:
                rest.append((h, b))
        pending = rest
    return true


# -- possible worlds ----------------------------------------------------------

@dataclass(frozen=True)
class PossibleWorld:
    """One inclusion/choice assignment.

    ``inclusion`` maps probabilistic ground clauses to in/out; clauses with
    probability 1 are always in and may be omitted.  ``ad_choice`` maps each
    annotated disjunction to the index of its chosen head, or ``None``.
    """

    inclusion: Mapping[Clause, bool]
    ad_choice: Mapping[AnnotatedDisjunction, int | None] = field(default_factory=dict)


def derives(world: PossibleWorld, program: KnowledgeBase, q: Atom) -> bool:
    """True iff ``q`` is in the least model of the clauses ``world`` includes."""
    g = ground(program)
    facts, rules = [], []
    for c in g.clauses:
        included = world.inclusion.get(c, c.prob == 1.0)
        if included:
            rules.append((c.head, frozenset(c.body)))
    for ad in g.disjunctions:
        idx = world.ad_choice.get(ad)
        if idx is not None:
            facts.append(ad.choices[idx][1])
    return q in _least_model(facts, rules)


def enumerate_worlds(kb: KnowledgeBase):
    """Yield ``(probability, true_atoms)`` for every possible world."""
    comp = _compile(kb)
    if comp.n_vars > ENUMERATION_LIMIT:
        raise InferenceError(
            f"{comp.n_vars} choice variables exceed the enumeration limit {ENUMERATION_LIMIT}")
    certain = [(r.head, r.body) for r in comp.rules if r.var is None]
    prob_rules = [r for r in comp.rules if r.var is not None]
    axes = []
    for r in prob_rules:
        axes.append(((r.prob, (r.head, r.body)), (1.0 - r.prob, None)))
    for ch in comp.choices:
        opts = [(p, ("fact", h)) for p, h in ch.options]
        rest = 1.0 - sum(p for p, _ in ch.options)
        if rest > 0.0:
            opts.append((rest, None))
        axes.append(tuple(opts))
    for combo in itertools.product(*axes):
        weight = 1.0
        facts, rules = [], list(certain)
        for p, what in combo:
            weight *= p
            if what is None:
                continue
            if what[0] == "fact":
                facts.append(what[1])
            else:
                rules.append(what)
        yield weight, _least_model(facts, rules)


def enumerate_probs(kb: KnowledgeBase, queries: Iterable[Atom] | None = None) -> dict[Atom, float]:
    """Success probability of every query, by exhaustive world enumeration."""
    qs = list(answerable(kb) if queries is None else queries)
    totals = dict.fromkeys(qs, 0.0)
    mass = 0.0
    for weight, model in enumerate_worlds(kb):
        mass += weight
        for q in qs:
            if q in model:
                totals[q] += weight
    if abs(mass - 1.0) > 1e-12:
        raise InferenceError(f"world probabilities sum to {mass!r}")
    return totals


# -- recursive conditioning -----------------------------------------------------

class _Conditioner:
    def __init__(self, comp: _Compiled):
        self.memo: dict = {}
        self.probs = {r.var: r.prob for r in comp.rules if r.var is not None}
        self.options = {ch.var: ch.options for ch in comp.choices}
        # residual items: ("r", var, head, body) and ("d", var, option indexes)
        self.root = tuple(
            [("r", r.var, r.head, r.body) for r in comp.rules]
            + [("d", ch.var, tuple(range(len(ch.options)))) for ch in comp.choices]
        )

    def solve(self, items: tuple, q: Atom) -> float:
        # propagate what is already certain
        certain = [(it[2], it[3]) for it in items if it[0] == "r" and it[1] is None]
        true = _least_model((), certain)
        if q in true:
            return 1.0
        residual = []
        for it in items:
            if it[0] == "r":
                if it[2] in true:
                    continue
                residual.append(("r", it[1], it[2], it[3] - true))
            else:
                opts = self.options[it[1]]
                keep = tuple(i for i in it[2] if opts[i][1] not in true)
                if keep:
                    residual.append(("d", it[1], keep))
        # atoms derivable if every remaining choice went our way
        possible_rules = []
        facts = []
        for it in residual:
            if it[0] == "r":
                possible_rules.append((it[2], it[3]))
            else:
                facts.extend(self.options[it[1]][i][1] for i in it[2])
        possible = _least_model(facts, possible_rules)
        if q not in possible:
            return 0.0
        # keep only what q can depend on
        deps: dict[Atom, list] = {}
        for it in residual:
            if it[0] == "r" and it[3] <= possible:
                deps.setdefault(it[2], []).append(it[3])
        # breadth-first, so ``relevant`` also records the distance from q
        relevant = {q: 0}
        frontier = collections.deque([q])
        while frontier:
            a = frontier.popleft()
            for body in deps.get(a, ()):
                for b in body:
                    if b not in relevant:
                        relevant[b] = relevant[a] + 1
                        frontier.append(b)
        reduced = []
        for it in residual:
            if it[0] == "r":
                if it[2] in relevant and it[3] <= possible:
                    reduced.append(it)
            else:
                keep = tuple(i for i in it[2] if self.options[it[1]][i][1] in relevant)
                if keep:
                    reduced.append(("d", it[1], keep))
        key = (q, frozenset(reduced))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        branch = min((it for it in reduced if it[1] is not None),
                     key=lambda it: self._priority(it, relevant))
        rest = tuple(it for it in reduced if it is not branch)
        if branch[0] == "r":
            p = self.probs[branch[1]]
            taken = rest + (("r", None, branch[2], branch[3]),)
            value = p * self.solve(taken, q) + (1.0 - p) * self.solve(rest, q)
        else:
            opts = self.options[branch[1]]
            value = 0.0
            used = 0.0
            for i in branch[2]:
                p, head = opts[i]
                used += p
                value += p * self.solve(rest + (("r", None, head, frozenset()),), q)
            if used < 1.0:
                value += (1.0 - used) * self.solve(rest, q)
        self.memo[key] = value
        return value


    def _priority(self, it: tuple, dist: dict) -> tuple:
        # unconditional choices closest to the query first: fixing them either
        # settles the query or removes an item, so residual programs recur
        if it[0] == "r":
            return (0 if not it[3] else 1, dist[it[2]], it[1])
        return (0, min(dist[self.options[it[1]][i][1]] for i in it[2]), it[1])


def _conditioning_probs(comp: _Compiled, queries: Iterable[Atom]) -> dict[Atom, float]:
    solver = _Conditioner(comp)
    return {q: solver.solve(solver.root, q) for q in queries}


BACKENDS = ("conditioning", "enumerate")


def query_probs(kb: KnowledgeBase, queries: Iterable[Atom],
                policy: QueryPolicy = QueryPolicy.ERROR,
                backend: str = "conditioning") -> dict[Atom, float]:
    """Success probabilities for several ground queries at once."""
    comp = _compile(kb)
    queries = list(queries)
    out: dict[Atom, float] = {}
    asked = []
    for q in queries:
        if not q.is_ground:
            raise ValueError(f"query {q} is not ground")
        if q not in comp.heads:
            if policy is QueryPolicy.ERROR:
                raise UnanswerableQuery(q)
            out[q] = 0.5
        else:
            asked.append(q)
    if backend == "conditioning":
        out.update(_conditioning_probs(comp, asked))
    elif backend == "enumerate":
        out.update(enumerate_probs(kb, asked))
    else:
        raise ValueError(f"unknown backend {backend!r}")
    for q, p in out.items():
        # clamp accumulated rounding, never a modelling error
        out[q] = min(1.0, max(0.0, p))
    return out


def query_prob(kb: KnowledgeBase, q: Atom, policy: QueryPolicy = QueryPolicy.ERROR,
               backend: str = "conditioning") -> float:
    """``p[K |- q]``; with ``QueryPolicy.HALF`` unknown queries answer 0.5."""
    return query_probs(kb, [q], policy, backend)[q]
