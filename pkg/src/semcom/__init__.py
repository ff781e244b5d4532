"""Probabilistic-logic knowledge bases and the measures, operators and
scenarios used to study semantic communication."""

from __future__ import annotations

from .assimilation import AssimilationOp, assimilate
from .channel import ChannelModel, Exact, KOfN, expected_symbols, success_prob
from .compression import compress_exact, compress_greedy, kb_equivalent, min_message_set
from .errors import (ConfigError, EmptyInput, EmptyKnowledgeBase, GroundingError, Infeasible,
                     ParseError, PreconditionError, SemcomError, UnanswerableQuery)
from .inference import QueryPolicy, answerable, query_prob, query_probs
from .kb import AnnotatedDisjunction, Atom, Clause, KnowledgeBase, atom, fact
from .lang import ground, parse_atom, parse_clause, parse_program, serialize
from .measures import (clause_entropy, kb_uncertainty, query_entropy, secrecy_rate,
                       semantic_content, semantic_mutual_info)

__version__ = "0.1.0"

__all__ = [
    "AssimilationOp", "assimilate",
    "ChannelModel", "Exact", "KOfN", "expected_symbols", "success_prob",
    "compress_exact", "compress_greedy", "kb_equivalent", "min_message_set",
    "ConfigError", "EmptyInput", "EmptyKnowledgeBase", "GroundingError", "Infeasible",
    "ParseError", "PreconditionError", "SemcomError", "UnanswerableQuery",
    "QueryPolicy", "answerable", "query_prob", "query_probs",
    "AnnotatedDisjunction", "Atom", "Clause", "KnowledgeBase", "atom", "fact",
    "ground", "parse_atom", "parse_clause", "parse_program", "serialize",
    "clause_entropy", "kb_uncertainty", "query_entropy", "secrecy_rate",
    "semantic_content", "semantic_mutual_info",
]
