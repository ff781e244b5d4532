"""Value types for atoms, clauses and knowledge bases.

Everything here is immutable.  Clause identity compares the *full* clause
(probability, head and body), with probabilities rounded to 12 decimal
places so that a re-parsed program equals its source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Union

PROB_DIGITS = 12


def prob_key(p: float) -> float:
    return round(float(p), PROB_DIGITS)


@dataclass(frozen=True)
class Const:
    """A constant argument: an integer, a bare identifier or a quoted string."""

    value: Union[str, int]
    quoted: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.value, bool) or not isinstance(self.value, (str, int)):
            raise TypeError(f"bad constant {self.value!r}")
        if isinstance(self.value, int):
            object.__setattr__(self, "quoted", False)
        elif not self.quoted and not _is_bare_ident(self.value):
            # text that cannot be written bare is a string
            object.__setattr__(self, "quoted", True)

    @property
    def is_int(self) -> bool:
        return isinstance(self.value, int)

    @property
    def is_text(self) -> bool:
        return isinstance(self.value, str)

    def sort_key(self) -> tuple:
        if self.is_int:
            return (0, self.value, "")
        return (1, int(self.quoted), self.value)

    def __str__(self) -> str:
        if self.is_int:
            return str(self.value)
        if self.quoted or not _is_bare_ident(self.value):
            escaped = self.value.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        return self.value


@dataclass(frozen=True)
class Var:
    name: str

    def sort_key(self) -> tuple:
        return (2, 0, self.name)

    def __str__(self) -> str:
        return self.name


Term = Union[Const, Var]


def _is_bare_ident(text: str) -> bool:
    return bool(text) and text[0].islower() and all(c.isalnum() or c == "_" for c in text)


def const(value: Union[str, int]) -> Const:
    """Build the constant the parser would produce for ``value``.

    Lower-case identifiers (``tom``) stay bare; any other text (``"APPLE"``)
    becomes a quoted string.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not constants")
    if isinstance(value, int):
        return Const(value)
    return Const(value, quoted=not _is_bare_ident(value))


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    @property
    def is_ground(self) -> bool:
        return all(isinstance(a, Const) for a in self.args)

    def variables(self) -> set[str]:
        return {a.name for a in self.args if isinstance(a, Var)}

    def sort_key(self) -> tuple:
        return (self.predicate, len(self.args), tuple(a.sort_key() for a in self.args))

    def __lt__(self, other: "Atom") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"


class BuiltinOp(Enum):
    GE = ">="
    LE = "=<"
    GT = ">"
    LT = "<"
    EQ = "=="
    ENDSWITH = "endswith"
    CHARAT = "charAt"


BUILTIN_ARITY = {
    BuiltinOp.GE: 2,
    BuiltinOp.LE: 2,
    BuiltinOp.GT: 2,
    BuiltinOp.LT: 2,
    BuiltinOp.EQ: 2,
    BuiltinOp.ENDSWITH: 2,
    BuiltinOp.CHARAT: 3,
}

COMPARISONS = {BuiltinOp.GE, BuiltinOp.LE, BuiltinOp.GT, BuiltinOp.LT, BuiltinOp.EQ}


@dataclass(frozen=True)
class Builtin:
    op: BuiltinOp
    args: tuple[Term, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != BUILTIN_ARITY[self.op]:
            raise ValueError(f"{self.op.value} takes {BUILTIN_ARITY[self.op]} arguments")

    def variables(self) -> set[str]:
        return {a.name for a in self.args if isinstance(a, Var)}

    def sort_key(self) -> tuple:
        return (self.op.value, tuple(a.sort_key() for a in self.args))

    def __str__(self) -> str:
        if self.op in COMPARISONS:
            return f"{self.args[0]} {self.op.value} {self.args[1]}"
        return f"{self.op.value}({','.join(str(a) for a in self.args)})"


Literal = Union[Atom, Builtin]


def _literal_key(lit: Literal) -> tuple:
    if isinstance(lit, Atom):
        return (0, lit.sort_key())
    return (1, lit.sort_key())


def format_prob(p: float) -> str:
    return repr(float(p))


@dataclass(frozen=True, eq=False)
class Clause:
    """``prob::head :- body``; an empty body makes it a fact."""

    prob: float
    head: Atom
    body: tuple[Literal, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.body, tuple):
            object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "prob", float(self.prob))
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"probability {self.prob} outside [0, 1]")
        if not isinstance(self.head, Atom):
            raise TypeError("clause head must be an atom")

    @property
    def is_fact(self) -> bool:
        return not self.body

    @property
    def is_ground(self) -> bool:
        return self.head.is_ground and all(
            isinstance(lit, Atom) and lit.is_ground for lit in self.body
        )

    def variables(self) -> set[str]:
        names = self.head.variables()
        for lit in self.body:
            names |= lit.variables()
        return names

    @property
    def rule(self) -> tuple:
        """The (head, body) pair, i.e. the clause without its label."""
        return (self.head, self.body)

    def with_prob(self, p: float) -> "Clause":
        return Clause(p, self.head, self.body)

    def _identity(self) -> tuple:
        return (prob_key(self.prob), self.head, self.body)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Clause):
            return NotImplemented
        return self._identity() == other._identity()

    def __hash__(self) -> int:
        return hash(self._identity())

    def sort_key(self) -> tuple:
        return (
            0,
            self.head.sort_key(),
            tuple(_literal_key(lit) for lit in self.body),
            prob_key(self.prob),
        )

    def __lt__(self, other: "Clause | AnnotatedDisjunction") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        text = "" if self.prob == 1.0 else f"{format_prob(self.prob)}::"
        text += str(self.head)
        if self.body:
            text += " :- " + ", ".join(str(lit) for lit in self.body)
        return text + "."


@dataclass(frozen=True, eq=False)
class AnnotatedDisjunction:
    """Mutually exclusive probabilistic facts; leftover mass picks none."""

    choices: tuple[tuple[float, Atom], ...]

    def __post_init__(self) -> None:
        choices = tuple((float(p), h) for p, h in self.choices)
        object.__setattr__(self, "choices", choices)
        if not choices:
            raise ValueError("annotated disjunction needs at least one choice")
        for p, h in choices:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
            if not isinstance(h, Atom):
                raise TypeError("choice heads must be atoms")
        if sum(p for p, _ in choices) > 1.0 + 1e-9:
            raise ValueError("annotated disjunction probabilities sum to more than 1")

    @property
    def heads(self) -> tuple[Atom, ...]:
        return tuple(h for _, h in self.choices)

    @property
    def rule(self) -> tuple:
        return ("ad", self.heads)

    @property
    def is_ground(self) -> bool:
        return all(h.is_ground for h in self.heads)

    def _identity(self) -> tuple:
        return tuple((prob_key(p), h) for p, h in self.choices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AnnotatedDisjunction):
            return NotImplemented
        return self._identity() == other._identity()

    def __hash__(self) -> int:
        return hash(self._identity())

    def sort_key(self) -> tuple:
        return (1, tuple((h.sort_key(), prob_key(p)) for p, h in self.choices))

    def __lt__(self, other: "Clause | AnnotatedDisjunction") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return "; ".join(f"{format_prob(p)}::{h}" for p, h in self.choices) + "."


Item = Union[Clause, AnnotatedDisjunction]


@dataclass(frozen=True)
class KnowledgeBase:
    """A set of clauses and annotated disjunctions."""

    clauses: frozenset[Clause] = field(default_factory=frozenset)
    disjunctions: frozenset[AnnotatedDisjunction] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "clauses", frozenset(self.clauses))
        object.__setattr__(self, "disjunctions", frozenset(self.disjunctions))

    @classmethod
    def of(cls, items: Iterable[Item]) -> "KnowledgeBase":
        clauses, ads = [], []
        for item in items:
            if isinstance(item, Clause):
                clauses.append(item)
            elif isinstance(item, AnnotatedDisjunction):
                ads.append(item)
            else:
                raise TypeError(f"not a clause: {item!r}")
        return cls(frozenset(clauses), frozenset(ads))

    def items(self) -> list[Item]:
        """Clauses then disjunctions, in canonical order."""
        return sorted([*self.clauses, *self.disjunctions], key=lambda it: it.sort_key())

    def __iter__(self) -> Iterator[Item]:
        return iter(self.items())

    def __len__(self) -> int:
        return len(self.clauses) + len(self.disjunctions)

    def __contains__(self, item: object) -> bool:
        if isinstance(item, KnowledgeBase):
            return item.clauses <= self.clauses and item.disjunctions <= self.disjunctions
        return item in self.clauses or item in self.disjunctions

    def __bool__(self) -> bool:
        return len(self) > 0

    @property
    def is_ground(self) -> bool:
        return all(c.is_ground for c in self.clauses) and all(
            d.is_ground for d in self.disjunctions
        )

    def heads(self) -> frozenset[Atom]:
        return heads(self)

    def union(self, message: "Message") -> "KnowledgeBase":
        return kb_union(self, message)

    def without(self, items: Iterable[Item]) -> "KnowledgeBase":
        drop = set(items)
        return KnowledgeBase(
            frozenset(c for c in self.clauses if c not in drop),
            frozenset(d for d in self.disjunctions if d not in drop),
        )

    def __str__(self) -> str:
        return "\n".join(str(item) for item in self.items())


Message = Union[Clause, AnnotatedDisjunction, KnowledgeBase]


def as_kb(message: Message) -> KnowledgeBase:
    if isinstance(message, KnowledgeBase):
        return message
    return KnowledgeBase.of([message])


def heads(kb: KnowledgeBase) -> frozenset[Atom]:
    """Deduplicated head atoms over clauses and disjunction choices."""
    out = {c.head for c in kb.clauses}
    for ad in kb.disjunctions:
        out.update(ad.heads)
    return frozenset(out)


def kb_union(kb: KnowledgeBase, message: Message) -> KnowledgeBase:
    other = as_kb(message)
    return KnowledgeBase(kb.clauses | other.clauses, kb.disjunctions | other.disjunctions)


def atom(predicate: str, *args: Union[str, int, Term]) -> Atom:
    """Build an atom; plain values are converted with ``const``."""
    terms = tuple(a if isinstance(a, (Const, Var)) else const(a) for a in args)
    return Atom(predicate, terms)


def fact(prob: float, predicate: str, *args: Union[str, int, Term]) -> Clause:
    return Clause(prob, atom(predicate, *args))
