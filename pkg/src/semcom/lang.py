"""Parser, serializer and grounder for the propositional ProbLog fragment.

Grammar::

    program    := (statement ".")*
    statement  := [prob "::"] atom [":-" body]
                | prob "::" atom (";" prob "::" atom)+
    body       := literal ("," literal)*
    literal    := atom | term cmp term | endswith(T, T) | charAt(T, T, T)

``%`` starts a line comment.  An omitted label means probability 1.0.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator

from .errors import GroundingError, GroundingSizeError, ParseError
from .kb import (
    COMPARISONS,
    AnnotatedDisjunction,
    Atom,
    Builtin,
    BuiltinOp,
    Clause,
    Const,
    KnowledgeBase,
    Literal,
    Term,
    Var,
)

DEFAULT_MAX_INSTANCES = 10**6

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<number>-?(?:\d+\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<op>::|:-|>=|=<|<=|==|=|>|<|\(|\)|,|;|\.)
    """,
    re.VERBOSE,
)

_CMP_OPS = {
    ">=": BuiltinOp.GE,
    "=<": BuiltinOp.LE,
    "<=": BuiltinOp.LE,
    ">": BuiltinOp.GT,
    "<": BuiltinOp.LT,
    "==": BuiltinOp.EQ,
    "=": BuiltinOp.EQ,
}
_NAMED_BUILTINS = {"endswith": BuiltinOp.ENDSWITH, "charAt": BuiltinOp.CHARAT}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _peek(self, offset: int = 1) -> _Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def advance(self) -> _Token:
        tok = self.tok
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind not in ("op",):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def program(self) -> KnowledgeBase:
        clauses, ads = [], []
        while self.tok.kind != "eof":
            item = self.statement()
            (ads if isinstance(item, AnnotatedDisjunction) else clauses).append(item)
        return KnowledgeBase(frozenset(clauses), frozenset(ads))

    def statement(self) -> Clause | AnnotatedDisjunction:
        start = self.tok
        if self.tok.kind == "number":
            prob = self.prob()
            self.expect("::")
        else:
            prob = 1.0
        head = self.atom()
        if self.tok.text == ";" and self.tok.kind == "op":
            if start.kind != "number":
                raise self.error("annotated disjunction choices need probabilities")
            choices = [(prob, head)]
            while self.tok.text == ";":
                self.advance()
                p = self.prob()
                self.expect("::")
                choices.append((p, self.atom()))
            if self.tok.text == ":-":
                raise self.error("annotated disjunctions with bodies are not supported")
            self.expect(".")
            if sum(p for p, _ in choices) > 1.0 + 1e-9:
                raise ParseError("annotated disjunction probabilities sum to more than 1",
                                 start.line, start.col)
            return AnnotatedDisjunction(tuple(choices))
        body: list[Literal] = []
        if self.tok.text == ":-":
            self.advance()
            body.append(self.literal())
            while self.tok.text == ",":
                self.advance()
                body.append(self.literal())
        self.expect(".")
        return Clause(prob, head, tuple(body))

    def prob(self) -> float:
        tok = self.tok
        if tok.kind != "number":
            raise self.error("expected a probability")
        self.advance()
        value = float(tok.text)
        if not 0.0 <= value <= 1.0:
            raise self.error(f"probability {tok.text} outside [0, 1]", tok)
        return value

    def atom(self) -> Atom:
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"expected a predicate name, found {tok.text or 'end of input'!r}")
        if tok.text in _NAMED_BUILTINS:
            raise self.error(f"builtin {tok.text} cannot be used here")
        self.advance()
        return Atom(tok.text, self.arguments())

    def arguments(self) -> tuple[Term, ...]:
        if self.tok.text != "(":
            return ()
        self.advance()
        args = [self.term()]
        while self.tok.text == ",":
            self.advance()
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "number":
            if not re.fullmatch(r"-?\d+", tok.text):
                raise self.error("only integer numbers may appear as arguments")
            self.advance()
            return Const(int(tok.text))
        if tok.kind == "string":
            self.advance()
            return Const(_unescape(tok.text[1:-1]), quoted=True)
        if tok.kind == "ident":
            self.advance()
            return Const(tok.text)
        if tok.kind == "var":
            self.advance()
            return Var(tok.text)
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def literal(self) -> Literal:
        tok = self.tok
        if tok.kind == "ident" and tok.text in _NAMED_BUILTINS and self._peek().text == "(":
            self.advance()
            args = self.arguments()
            op = _NAMED_BUILTINS[tok.text]
            try:
                return Builtin(op, args)
            except ValueError as exc:
                raise self.error(str(exc), tok) from None
        nxt = self._peek()
        if nxt.kind == "op" and nxt.text in _CMP_OPS:
            left = self.term()
            op = _CMP_OPS[self.advance().text]
            return Builtin(op, (left, self.term()))
        return self.atom()


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", r"\1", body)


def parse_program(text: str) -> KnowledgeBase:
    """Parse program text into a knowledge base (raises ``ParseError``)."""
    return _Parser(text).program()


def parse_clause(text: str) -> Clause | AnnotatedDisjunction:
    kb = parse_program(text)
    if len(kb) != 1:
        raise ParseError(f"expected exactly one clause, got {len(kb)}")
    return kb.items()[0]


def parse_atom(text: str) -> Atom:
    p = _Parser(text)
    result = p.atom()
    if p.tok.text == ".":
        p.advance()
    if p.tok.kind != "eof":
        raise p.error("trailing input after atom")
    return result


def serialize(kb: KnowledgeBase) -> str:
    """Canonical program text: one statement per line, sorted."""
    return "".join(f"{item}\n" for item in kb.items())


# -- grounding --------------------------------------------------------------

def _herbrand(kb: KnowledgeBase):
    """All constants, and the constant kinds seen at each argument position."""
    constants: set[Const] = set()
    kinds: dict[tuple[str, int, int], set[str]] = {}

    def visit(a: Atom) -> None:
        for i, arg in enumerate(a.args):
            if isinstance(arg, Const):
                constants.add(arg)
                kinds.setdefault((a.predicate, len(a.args), i), set()).add(_kind(arg))

    for c in kb.clauses:
        visit(c.head)
        for lit in c.body:
            if isinstance(lit, Atom):
                visit(lit)
            else:
                constants.update(a for a in lit.args if isinstance(a, Const))
    for ad in kb.disjunctions:
        for h in ad.heads:
            visit(h)
    return constants, kinds


def _kind(c: Const) -> str:
    return "int" if c.is_int else "text"


def _var_kinds(clause: Clause, kinds) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {v: set() for v in clause.variables()}
    atoms = [clause.head] + [lit for lit in clause.body if isinstance(lit, Atom)]
    for a in atoms:
        for i, arg in enumerate(a.args):
            if isinstance(arg, Var):
                out[arg.name] |= kinds.get((a.predicate, len(a.args), i), set())
    for lit in clause.body:
        if isinstance(lit, Builtin):
            expected = _builtin_kinds(lit.op)
            for arg, kind in zip(lit.args, expected):
                if isinstance(arg, Var) and kind is not None:
                    out[arg.name].add(kind)
    return out


def _builtin_kinds(op: BuiltinOp) -> tuple:
    if op is BuiltinOp.EQ:
        return (None, None)
    if op in COMPARISONS:
        return ("int", "int")
    if op is BuiltinOp.ENDSWITH:
        return ("text", "text")
    return ("text", "int", "text")


def eval_builtin(b: Builtin) -> bool:
    """Evaluate a ground builtin; ill-typed arguments make it false."""
    args = b.args
    if any(isinstance(a, Var) for a in args):
        raise GroundingError(f"builtin {b} is not ground")
    if b.op is BuiltinOp.EQ:
        return args[0] == args[1]
    if b.op in COMPARISONS:
        x, y = args
        if not (x.is_int and y.is_int):
            return False
        if b.op is BuiltinOp.GE:
            return x.value >= y.value
        if b.op is BuiltinOp.LE:
            return x.value <= y.value
        if b.op is BuiltinOp.GT:
            return x.value > y.value
        return x.value < y.value
    if b.op is BuiltinOp.ENDSWITH:
        s, suffix = args
        return s.is_text and suffix.is_text and s.value.endswith(suffix.value)
    s, idx, ch = args
    if not (s.is_text and idx.is_int and ch.is_text) or len(ch.value) != 1:
        return False
    return 0 <= idx.value < len(s.value) and s.value[idx.value] == ch.value


def _substitute(a, binding: dict[str, Const]):
    args = tuple(binding[t.name] if isinstance(t, Var) else t for t in a.args)
    if isinstance(a, Atom):
        return Atom(a.predicate, args)
    return Builtin(a.op, args)


def _matches(ground_atom: Atom, pattern: Atom) -> bool:
    if ground_atom.predicate != pattern.predicate or len(ground_atom.args) != len(pattern.args):
        return False
    bound: dict[str, Const] = {}
    for value, arg in zip(ground_atom.args, pattern.args):
        if isinstance(arg, Var):
            if bound.setdefault(arg.name, value) != value:
                return False
        elif arg != value:
            return False
    return True


class _HeadIndex:
    """Answers 'could any clause head produce this ground atom?'."""

    def __init__(self, kb: KnowledgeBase):
        self.patterns: dict[tuple[str, int], list[Atom]] = {}
        heads = [c.head for c in kb.clauses]
        for ad in kb.disjunctions:
            heads.extend(ad.heads)
        for h in heads:
            self.patterns.setdefault((h.predicate, len(h.args)), []).append(h)
        self._cache: dict[Atom, bool] = {}

    def __call__(self, a: Atom) -> bool:
        hit = self._cache.get(a)
        if hit is None:
            pats = self.patterns.get((a.predicate, len(a.args)), ())
            hit = self._cache[a] = any(_matches(a, p) for p in pats)
        return hit


def _instances(clause: Clause, constants, kinds, budget: list[int],
               producible: _HeadIndex) -> Iterator[Clause]:
    names = sorted(clause.variables())
    var_kinds = _var_kinds(clause, kinds)
    domains = []
    for name in names:
        wanted = var_kinds[name] or {"int", "text"}
        dom = sorted((c for c in constants if _kind(c) in wanted), key=Const.sort_key)
        if not dom:
            raise GroundingError(f"variable {name} in '{clause}' has an empty domain")
        domains.append(dom)
    size = 1
    for dom in domains:
        size *= len(dom)
    budget[0] -= size
    if budget[0] < 0:
        raise GroundingSizeError("grounding exceeds the instantiation cap")
    for values in itertools.product(*domains):
        binding = dict(zip(names, values))
        body = []
        for lit in clause.body:
            lit = _substitute(lit, binding)
            if isinstance(lit, Builtin):
                if not eval_builtin(lit):
                    break
            elif not producible(lit):
                # no head can ever derive this body atom
                break
            else:
                body.append(lit)
        else:
            yield Clause(clause.prob, _substitute(clause.head, binding), tuple(body))


def ground(kb: KnowledgeBase, max_instances: int = DEFAULT_MAX_INSTANCES) -> KnowledgeBase:
    """Instantiate variables over the Herbrand constants and drop builtins.

    Each variable ranges over the constants whose kind (integer or text)
    occurs at the argument positions it fills.  Instances with a false
    builtin, or with a body atom that no clause head can produce, are
    dropped; the rest inherit the source clause's probability.
    """
    if all(not c.variables() and all(isinstance(l, Atom) for l in c.body) for c in kb.clauses):
        if not kb.is_ground:
            raise GroundingError("annotated disjunctions must be ground")
        return kb
    for ad in kb.disjunctions:
        if not ad.is_ground:
            raise GroundingError(f"annotated disjunction '{ad}' is not ground")
    constants, kinds = _herbrand(kb)
    budget = [max_instances]
    producible = _HeadIndex(kb)
    out: set[Clause] = set()
    for clause in sorted(kb.clauses, key=Clause.sort_key):
        if not clause.variables() and all(isinstance(l, Atom) for l in clause.body):
            out.add(clause)
            continue
        out.update(_instances(clause, constants, kinds, budget, producible))
    return KnowledgeBase(frozenset(out), kb.disjunctions)
