from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import strategies as st

from semcom.kb import AnnotatedDisjunction, Clause, KnowledgeBase, atom
from semcom.lang import parse_program

FIXTURES = Path(__file__).parent / "fixtures"
ATOMS = [atom(n) for n in "abcde"]


def load(name: str) -> KnowledgeBase:
    return parse_program((FIXTURES / name).read_text())


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


probs = st.one_of(
    st.sampled_from([0.0, 0.5, 1.0]),
    st.floats(0.0, 1.0, allow_nan=False).map(lambda p: round(p, 3)),
)


@st.composite
def clauses(draw, max_body: int = 2):
    head = draw(st.sampled_from(ATOMS))
    body = draw(st.lists(st.sampled_from(ATOMS), max_size=max_body, unique=True))
    return Clause(draw(probs), head, tuple(body))


@st.composite
def disjunctions(draw):
    heads = draw(st.lists(st.sampled_from(ATOMS), min_size=2, max_size=3, unique=True))
    raw = draw(st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=len(heads),
                        max_size=len(heads)))
    total = sum(raw)
    scale = draw(st.floats(0.3, 1.0)) / total if total > 1.0 else 1.0
    ps = [round(r * scale, 3) * 0.999 for r in raw]
    return AnnotatedDisjunction(tuple(zip(ps, heads)))


@st.composite
def programs(draw, max_choices: int = 12, with_ads: bool = True):
    n_ads = draw(st.integers(0, 3)) if with_ads else 0
    ads = draw(st.lists(disjunctions(), max_size=n_ads))
    cs = draw(st.lists(clauses(), min_size=1, max_size=max_choices - len(ads)))
    return KnowledgeBase.of([*cs, *ads])


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, title = results[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {title}")
