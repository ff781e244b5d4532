"""Crossword scenario: Bob asks Alice for answers over a noisy letter channel
and uses his knowledge base to skip what he can already infer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..assimilation import AssimilationOp, assimilate
from ..channel import (ChannelModel, Decoder, Exact, KOfN, decode_error_trials,
                       encode_letters, simulate_retransmit_batch, success_prob)
from ..errors import ConfigError
from ..inference import QueryPolicy, query_prob
from ..kb import Clause, KnowledgeBase, atom, const
from ..lang import parse_program

IMPLIED = 1.0 - 1e-9


@dataclass(frozen=True)
class CrosswordQuery:
    name: str
    answer: str
    threshold: int
    candidates: str = ""  # program text, usually one annotated disjunction

    def __post_init__(self) -> None:
        if not self.answer or not self.answer.isascii() or not self.answer.isupper() \
                or not self.answer.isalpha():
            raise ConfigError(f"answer {self.answer!r} must be upper-case A-Z")
        if not 1 <= self.threshold <= len(self.answer):
            raise ConfigError(f"threshold {self.threshold} invalid for {self.answer!r}")


@dataclass(frozen=True)
class Crossing:
    """Letter ``pos_a`` of query ``a`` is the same cell as letter ``pos_b`` of ``b``."""

    a: str
    pos_a: int
    b: str
    pos_b: int


@dataclass
class CrosswordConfig:
    queries: list[CrosswordQuery]
    rules: str
    crossings: list[Crossing]
    orders: list[list[str]]
    epsilon_grid: list[float]
    trials: int = 10_000
    seed: int = 0
    alphabet_size: int = 26
    predicate: str = "word"

    def __post_init__(self) -> None:
        names = [q.name for q in self.queries]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate query names")
        by_name = {q.name: q for q in self.queries}
        for c in self.crossings:
            if c.a not in by_name or c.b not in by_name:
                raise ConfigError(f"crossing refers to unknown query: {c}")
            wa, wb = by_name[c.a].answer, by_name[c.b].answer
            if not (0 <= c.pos_a < len(wa) and 0 <= c.pos_b < len(wb)):
                raise ConfigError(f"crossing position out of range: {c}")
            if wa[c.pos_a] != wb[c.pos_b]:
                raise ConfigError(f"crossing letters disagree: {c}")
        for order in self.orders:
            if set(order) - set(names) or len(set(order)) != len(order):
                raise ConfigError(f"bad query order {order}")
        if any(not 0.0 <= e < 1.0 for e in self.epsilon_grid):
            raise ConfigError("crossover probabilities must lie in [0, 1)")
        if self.trials < 1:
            raise ConfigError("trials must be positive")

    def query(self, name: str) -> CrosswordQuery:
        return next(q for q in self.queries if q.name == name)

    def answer_atom(self, q: CrosswordQuery):
        return atom(self.predicate, const(q.name), const(q.answer))

    def initial_kb(self) -> KnowledgeBase:
        kb = parse_program(self.rules)
        for q in self.queries:
            if q.candidates:
                kb = kb.union(parse_program(q.candidates))
        return kb

    @classmethod
    def from_dict(cls, data: dict) -> "CrosswordConfig":
        try:
            queries = [CrosswordQuery(q["name"], q["answer"], int(q["threshold"]),
                                      q.get("candidates", "")) for q in data["queries"]]
            crossings = [Crossing(c[0], int(c[1]), c[2], int(c[3])) for c in data.get("crossings", [])]
            grid = data.get("epsilon_grid", {"start": 0.0, "stop": 0.5, "step": 0.01})
            if isinstance(grid, dict):
                n = int(round((grid["stop"] - grid["start"]) / grid["step"]))
                grid = [round(grid["start"] + k * grid["step"], 12) for k in range(n + 1)]
            return cls(queries, data.get("rules", ""), crossings,
                       [list(o) for o in data["orders"]], [float(e) for e in grid],
                       int(data.get("trials", 10_000)), int(data.get("seed", 0)),
                       int(data.get("alphabet_size", 26)), data.get("predicate", "word"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad crossword config: {exc}") from exc


@dataclass(frozen=True)
class Step:
    query: str
    letters: str  # what Alice actually sends; empty when the answer is implied
    decoder: Decoder | None


@dataclass(frozen=True)
class LetterRecord:
    order: int  # 1-based position in cfg.orders
    epsilon: float
    analytic_letters: float
    mc_letters: float
    mc_stderr: float


@dataclass(frozen=True)
class DecodeErrorRecord:
    query: str
    epsilon: float
    error_prob: float
    mc_error_prob: float
    mc_stderr: float


@dataclass
class CrosswordResult:
    plans: list[list[Step]]
    letters: list[LetterRecord] = field(default_factory=list)
    decode_errors: list[DecodeErrorRecord] = field(default_factory=list)


def _known(kb: KnowledgeBase, cfg: CrosswordConfig, q: CrosswordQuery) -> bool:
    return query_prob(kb, cfg.answer_atom(q), QueryPolicy.HALF) >= IMPLIED


def plan_order(cfg: CrosswordConfig, order: Sequence[str]) -> list[Step]:
    """What Alice sends for each query of ``order``, given Bob's inferences so far.

    Implied answers are skipped; letters shared with an already known word are
    left out and the remainder must then arrive intact.
    """
    kb = cfg.initial_kb()
    steps = []
    for name in order:
        q = cfg.query(name)
        if _known(kb, cfg, q):
            steps.append(Step(name, "", None))
            continue
        omitted = set()
        for c in cfg.crossings:
            for me, pos, other in ((c.a, c.pos_a, c.b), (c.b, c.pos_b, c.a)):
                if me == name and _known(kb, cfg, cfg.query(other)):
                    omitted.add(pos)
        letters = "".join(ch for i, ch in enumerate(q.answer) if i not in omitted)
        dec = Exact() if omitted else KOfN(q.threshold)
        steps.append(Step(name, letters, dec))
        kb = assimilate(kb, Clause(1.0, cfg.answer_atom(q)), AssimilationOp.UNION)
    return steps


def analytic_letters(plan: Sequence[Step], ch: ChannelModel) -> float:
    total = 0.0
    for s in plan:
        if s.letters:
            total += len(s.letters) / success_prob(ch, len(s.letters), s.decoder)
    return total


def run_crossword(cfg: CrosswordConfig) -> CrosswordResult:
    plans = [plan_order(cfg, order) for order in cfg.orders]
    result = CrosswordResult(plans)
    for oi, plan in enumerate(plans):
        for ei, eps in enumerate(cfg.epsilon_grid):
            ch = ChannelModel(cfg.alphabet_size, eps)
            totals = np.zeros(cfg.trials)
            for si, s in enumerate(plan):
                if not s.letters:
                    continue
                seq = np.random.SeedSequence([cfg.seed, oi, ei, si])
                rounds, _ = simulate_retransmit_batch(ch, encode_letters(s.letters), s.decoder,
                                                      cfg.trials, rng_seed=seq)
                totals += rounds * len(s.letters)
            result.letters.append(LetterRecord(
                oi + 1, eps, analytic_letters(plan, ch), float(totals.mean()),
                float(totals.std(ddof=1) / math.sqrt(cfg.trials)) if cfg.trials > 1 else 0.0))
    for qi, q in enumerate(cfg.queries):
        for ei, eps in enumerate(cfg.epsilon_grid):
            ch = ChannelModel(cfg.alphabet_size, eps)
            dec = KOfN(q.threshold)
            seq = np.random.SeedSequence([cfg.seed, len(cfg.orders) + qi, ei])
            fails = decode_error_trials(ch, encode_letters(q.answer), dec, cfg.trials, seq)
            exact = 1.0 - success_prob(ch, len(q.answer), dec)
            # binomial standard error at the analytic rate; the sample one is 0 for rare events
            result.decode_errors.append(DecodeErrorRecord(
                q.name, eps, exact, float(fails.mean()),
                math.sqrt(max(exact, 0.0) * (1.0 - exact) / cfg.trials)))
    return result
