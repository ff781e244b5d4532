"""Clinical-test scenario: Alice sends edge clauses of a causal graph to Bob.

Node probabilities follow the noisy-OR recursion

    Pr(X_1) = 1,   Pr(X_i) = 1 - prod_j (1 - p_ji * Pr(X_j))

over the parents j of node i.  This is the scenario's own inference rule;
it ignores correlations through shared ancestors and therefore differs from
distribution-semantics inference on non-tree graphs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import ConfigError
from ..kb import Clause, KnowledgeBase, atom
from ..measures import clause_entropy

GAIN_SLACK = 1e-12

Edge = tuple[int, int]


@dataclass(frozen=True)
class CausalGraph:
    n_nodes: int
    edges: tuple[tuple[int, int, float], ...]

    def __init__(self, n_nodes: int, edges: Mapping[Edge, float] | Iterable[tuple[int, int, float]]):
        items = edges.items() if isinstance(edges, Mapping) else (((i, j), p) for i, j, p in edges)
        table: dict[Edge, float] = {}
        for (i, j), p in items:
            i, j, p = int(i), int(j), float(p)
            if not 1 <= i < j <= n_nodes:
                raise ValueError(f"edge {i}->{j} must satisfy 1 <= i < j <= {n_nodes}")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"edge {i}->{j} probability {p} outside [0, 1]")
            if (i, j) in table:
                raise ValueError(f"duplicate edge {i}->{j}")
            table[(i, j)] = p
        object.__setattr__(self, "n_nodes", int(n_nodes))
        object.__setattr__(self, "edges", tuple((i, j, table[(i, j)]) for i, j in sorted(table)))

    @property
    def edge_keys(self) -> list[Edge]:
        return [(i, j) for i, j, _ in self.edges]

    def prob(self, edge: Edge) -> float:
        for i, j, p in self.edges:
            if (i, j) == edge:
                return p
        raise KeyError(edge)

    def with_edge(self, edge: Edge, p: float) -> "CausalGraph":
        table = {(i, j): q for i, j, q in self.edges}
        table[edge] = p
        return CausalGraph(self.n_nodes, table)

    def node_probs(self) -> list[float]:
        """Pr(X_1) .. Pr(X_n), evaluated in index (= topological) order."""
        probs = [0.0] * (self.n_nodes + 1)
        parents: dict[int, list[tuple[int, float]]] = {}
        for i, j, p in self.edges:
            parents.setdefault(j, []).append((i, p))
        for node in range(1, self.n_nodes + 1):
            if node == 1:
                probs[node] = 1.0
                continue
            miss = 1.0
            for parent, p in parents.get(node, ()):
                miss *= 1.0 - p * probs[parent]
            probs[node] = 1.0 - miss if node in parents else 0.0
        return probs[1:]

    def to_kb(self) -> KnowledgeBase:
        """The graph as clauses ``p::x<j> :- x<i>.`` plus the certain root fact."""
        clauses = [Clause(1.0, atom("x1"))]
        clauses += [Clause(p, atom(f"x{j}"), (atom(f"x{i}"),)) for i, j, p in self.edges]
        return KnowledgeBase.of(clauses)


def causal_query(g: CausalGraph, i: int) -> float:
    if not 1 <= i <= g.n_nodes:
        raise ValueError(f"node {i} outside 1..{g.n_nodes}")
    return g.node_probs()[i - 1]


def ground_truth_merge(alice: CausalGraph, bob: CausalGraph) -> CausalGraph:
    """Per edge, keep whichever side's probability has lower entropy (Alice on ties)."""
    if alice.n_nodes != bob.n_nodes or alice.edge_keys != bob.edge_keys:
        raise ValueError("graphs must share nodes and edges")
    merged = {}
    for (i, j, pa), (_, _, pb) in zip(alice.edges, bob.edges):
        merged[(i, j)] = pb if clause_entropy(pb) < clause_entropy(pa) else pa
    return CausalGraph(alice.n_nodes, merged)


class RuleKind(enum.Enum):
    A1 = "A1"  # random unsent clause
    A2 = "A2"  # maximum edge probability
    A3 = "A3"  # minimum edge entropy
    A4 = "A4"  # minimum knowledge-base entropy
    A5 = "A5"  # maximum average answer probability


@dataclass(frozen=True)
class TransmissionRule:
    kind: RuleKind
    task: int | None = None  # only send edges into this node

    @classmethod
    def parse(cls, text: str, task_node: int = 5) -> "TransmissionRule":
        text = text.strip().upper()
        if text.endswith("-1"):
            return cls(RuleKind(text[:-2]), task_node)
        try:
            return cls(RuleKind(text))
        except ValueError:
            raise ConfigError(f"unknown transmission rule {text!r}") from None

    @property
    def label(self) -> str:
        return self.kind.value + ("-1" if self.task is not None else "")


@dataclass(frozen=True)
class RoundRecord:
    round: int
    sent_edge: tuple[int, int, float] | None
    avg_error: float
    kb_entropy: float


def kb_entropy(g: CausalGraph, mode: str = "node") -> float:
    """Mean answer entropy over X_2..X_n (``node``) or mean edge entropy (``edge``)."""
    if mode == "node":
        probs = g.node_probs()[1:]
    elif mode == "edge":
        probs = [p for _, _, p in g.edges]
    else:
        raise ValueError(f"unknown entropy mode {mode!r}")
    return sum(clause_entropy(p) for p in probs) / len(probs)


def _avg_error(g: CausalGraph, truth: list[float], nodes: Sequence[int]) -> float:
    probs = g.node_probs()
    return sum(abs(probs[i - 1] - truth[i - 1]) for i in nodes) / len(nodes)


def query_nodes(queries, n_nodes: int) -> list[int]:
    if queries == "uniform":
        return list(range(1, n_nodes + 1))
    nodes = [queries] if isinstance(queries, int) else list(queries)
    for n in nodes:
        if not 1 <= n <= n_nodes:
            raise ConfigError(f"query node {n} outside 1..{n_nodes}")
    return nodes


def _pick(scores: list[tuple[Edge, float | None]]) -> Edge | None:
    """Highest score wins; earlier edges keep ties; ``None`` marks ineligible."""
    best, best_score = None, -math.inf
    for edge, score in scores:
        if score is not None and (best is None or score > best_score + GAIN_SLACK):
            best, best_score = edge, score
    return best


def run_clinical(alice: CausalGraph, bob: CausalGraph, rule: TransmissionRule,
                 queries="uniform", seed: int = 0, entropy_mode: str = "node") -> list[RoundRecord]:
    """Play the transmission rule until it stops; one record per round (round 0 = start)."""
    truth = ground_truth_merge(alice, bob).node_probs()
    nodes = query_nodes(queries, alice.n_nodes)
    candidates = [e for e in alice.edge_keys if rule.task is None or e[1] == rule.task]
    state = bob
    records = [RoundRecord(0, None, _avg_error(state, truth, nodes), kb_entropy(state, entropy_mode))]
    if rule.kind is RuleKind.A1:
        rng = np.random.default_rng(seed)
        order = [candidates[k] for k in rng.permutation(len(candidates))]
    sent = 0
    while True:
        if rule.kind is RuleKind.A1:
            if sent == len(order):
                break
            edge = order[sent]
        else:
            edge = _pick([(e, _score(rule.kind, state, alice, e, nodes, entropy_mode))
                          for e in candidates])
            if edge is None:
                break
        p = alice.prob(edge)
        state = state.with_edge(edge, p)
        sent += 1
        records.append(RoundRecord(sent, (edge[0], edge[1], p),
                                   _avg_error(state, truth, nodes),
                                   kb_entropy(state, entropy_mode)))
    return records


def _score(kind: RuleKind, state: CausalGraph, alice: CausalGraph, edge: Edge,
           nodes: Sequence[int], entropy_mode: str) -> float | None:
    new_p, old_p = alice.prob(edge), state.prob(edge)
    if kind is RuleKind.A2:
        # any edge Bob still disagrees on, highest probability first
        return new_p if abs(new_p - old_p) > GAIN_SLACK else None
    if kind is RuleKind.A3:
        gain = clause_entropy(old_p) - clause_entropy(new_p)
    else:
        after = state.with_edge(edge, new_p)
        if kind is RuleKind.A4:
            gain = kb_entropy(state, entropy_mode) - kb_entropy(after, entropy_mode)
        else:
            before_probs, after_probs = state.node_probs(), after.node_probs()
            gain = sum(after_probs[i - 1] - before_probs[i - 1] for i in nodes) / len(nodes)
    return gain if gain > GAIN_SLACK else None


# reference setting: Alice knows the treatment side, Bob the patient side
REFERENCE_ALICE = CausalGraph(5, {(1, 2): 0.5, (1, 5): 0.5, (2, 3): 0.7, (2, 4): 0.3,
                              (2, 5): 0.0, (3, 4): 0.7, (3, 5): 0.3})
REFERENCE_BOB = CausalGraph(5, {(1, 2): 0.7, (1, 5): 0.3, (2, 3): 0.5, (2, 4): 0.5,
                            (2, 5): 0.5, (3, 4): 0.5, (3, 5): 0.5})


@dataclass
class ClinicalRun:
    rule: TransmissionRule
    queries: object = "uniform"


@dataclass
class ClinicalConfig:
    alice: CausalGraph = REFERENCE_ALICE
    bob: CausalGraph = REFERENCE_BOB
    runs: list[ClinicalRun] = field(default_factory=list)
    entropy_mode: str = "node"
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "ClinicalConfig":
        try:
            n = int(data.get("n_nodes", 5))
            alice = CausalGraph(n, data["alice"]) if "alice" in data else REFERENCE_ALICE
            bob = CausalGraph(n, data["bob"]) if "bob" in data else REFERENCE_BOB
            task_node = int(data.get("task_node", n))
            runs = []
            for r in data.get("runs", []):
                if isinstance(r, str):
                    r = {"rule": r}
                rule = TransmissionRule.parse(r["rule"], task_node)
                default_q = rule.task if rule.task is not None else "uniform"
                runs.append(ClinicalRun(rule, r.get("queries", default_q)))
            return cls(alice, bob, runs, data.get("entropy_mode", "node"), int(data.get("seed", 0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad clinical config: {exc}") from exc
