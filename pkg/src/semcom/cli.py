"""Command-line front end: ``semcom <command> ...``.

Exit codes: 0 ok, 2 parse or config error, 3 unanswerable query,
4 infeasible or empty input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import scenarios
from .assimilation import AssimilationOp, assimilate
from .compression import compress_exact, compress_greedy, min_message_set
from .errors import (ConfigError, EmptyInput, EmptyKnowledgeBase, GroundingError, Infeasible,
                     ParseError, PreconditionError, UnanswerableQuery)
from .inference import QueryPolicy, query_prob
from .kb import KnowledgeBase, Message
from .lang import parse_atom, parse_program, serialize
from .measures import (clause_entropy, kb_uncertainty, secrecy_rate, semantic_content,
                       semantic_mutual_info)
from .selection import (QuerySpec, SymbolBits, best_message_broadcast,
                        best_message_len_constrained, best_message_for_query,
                        das_select_semantic, mdl_query, sender_choice)

EXIT_OK, EXIT_PARSE, EXIT_UNANSWERABLE, EXIT_INFEASIBLE = 0, 2, 3, 4


def _read_kb(path: str) -> KnowledgeBase:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_program(text)


def _pool(path: str) -> list[Message]:
    """Every statement of the file is one candidate message."""
    return list(_read_kb(path).items())


def _policy(args) -> QueryPolicy:
    return QueryPolicy.HALF if args.unanswerable == "half" else QueryPolicy.ERROR


def _base(text: str) -> float:
    return math.e if text == "e" else float(text)


def _show(m: Message) -> str:
    return serialize(m).rstrip("\n") if isinstance(m, KnowledgeBase) else str(m)


# -- commands -------------------------------------------------------------------

def cmd_query(args) -> None:
    kb = _read_kb(args.kb)
    p = query_prob(kb, parse_atom(args.atom), _policy(args), args.backend)
    print(f"{p:.6f} {clause_entropy(p):.6f}")


def cmd_measure(args) -> None:
    kb = _read_kb(args.kb)
    base = _base(args.base)
    if args.measure == "ukb":
        value = kb_uncertainty(kb, base)
    elif args.measure == "content":
        value = semantic_content(kb, _read_kb(args.message), base)
    elif args.measure == "mi":
        value = semantic_mutual_info(kb, parse_atom(args.query), _read_kb(args.message),
                                     _policy(args))
    else:
        value = secrecy_rate(parse_atom(args.query), _read_kb(args.message), kb,
                             _read_kb(args.eve), _policy(args))
    print(f"{value:.6f}")


def _load_mdl_table(path: str) -> tuple[list[QuerySpec], float]:
    try:
        data = json.loads(Path(path).read_text("utf-8"))
        specs = []
        for q in data["queries"]:
            bits = q["answer_bits"] if "answer_bits" in q else math.log2(q["answer_values"])
            specs.append(QuerySpec(str(q["name"]), float(q["prior"]), float(bits)))
        return specs, float(data.get("lambda", 1.0))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad query table: {exc}") from exc


def cmd_select(args) -> None:
    rule = args.rule
    if rule == "mdl":
        specs, lam = _load_mdl_table(args.table)
        print(mdl_query(specs, args.lam if args.lam is not None else lam).name)
        return
    if rule == "das":
        kb = _read_kb(args.kb)
        sources = [(i, _read_kb(p)) for i, p in enumerate(args.sources)]
        print(das_select_semantic(sources, kb, args.visited))
        return
    pool = _pool(args.pool)
    if rule == "sender":
        chosen = sender_choice(pool, _read_kb(args.kb))
    elif rule == "best":
        kb, q = _read_kb(args.kb), parse_atom(args.query)
        if args.max_bits is None:
            chosen = best_message_for_query(pool, kb, q, _policy(args))
        else:
            chosen = best_message_len_constrained(pool, kb, q, SymbolBits(args.alphabet),
                                                  args.max_bits, _policy(args))
    else:
        kbs = [_read_kb(p) for p in args.kbs]
        length = SymbolBits(args.alphabet) if args.max_bits is not None else None
        chosen = best_message_broadcast(pool, kbs, parse_atom(args.query), length,
                                        args.max_bits if args.max_bits is not None else math.inf,
                                        _policy(args))
    print(_show(chosen))


def cmd_compress(args) -> None:
    kb = _read_kb(args.kb)
    if args.mode == "exact":
        out = compress_exact(kb)
    elif args.mode == "greedy":
        out = compress_greedy(kb, args.delta, args.epsilon)
    else:
        out = min_message_set(_pool(args.pool), kb, args.target, args.tol)
    sys.stdout.write(serialize(out))


def cmd_assimilate(args) -> None:
    kb = assimilate(_read_kb(args.kb), _read_kb(args.message), AssimilationOp(args.op))
    sys.stdout.write(serialize(kb))


def cmd_sim(args) -> None:
    cfg = scenarios.load_config(args.scenario, args.config)
    cfg.seed = args.seed
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create {out}: {exc.strerror}") from exc
    if args.scenario == "crossword":
        if args.trials is not None:
            cfg.trials = args.trials
        result = scenarios.run_crossword(cfg)
        with open(out / "crossword_letters.csv", "w", encoding="utf-8", newline="") as fh:
            scenarios.write_letters_csv(result, fh)
        with open(out / "crossword_decode_errors.csv", "w", encoding="utf-8", newline="") as fh:
            scenarios.write_decode_errors_csv(result, fh)
        at_zero = [r for r in result.letters if r.epsilon == 0.0]
        summary = " ".join(f"order{r.order}={r.analytic_letters:g}" for r in at_zero)
        print(f"crossword: {len(result.letters)} rows; letters at eps=0: {summary}")
        return
    runs = cfg.runs
    if args.rule:
        rule = scenarios.TransmissionRule.parse(args.rule)
        runs = [scenarios.ClinicalRun(rule, rule.task if rule.task is not None else "uniform")]
    if not runs:
        raise ConfigError("clinical config lists no runs")
    rows = scenarios.clinical_rows(cfg, runs)
    with open(out / "clinical.csv", "w", encoding="utf-8", newline="") as fh:
        scenarios.write_clinical_csv(rows, fh)
    for run, records in rows:
        last = records[-1]
        print(f"{run.rule.label}: {last.round} rounds, avg_error {last.avg_error:.6f}, "
              f"kb_entropy {last.kb_entropy:.6f}")


# -- parser -----------------------------------------------------------------------

def _add_policy(p: argparse.ArgumentParser) -> None:
    p.add_argument("--unanswerable", choices=("error", "half"), default="error",
                   help="treat queries with no matching head as errors or as 0.5")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semcom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("query", help="success probability and entropy of a ground atom")
    p.add_argument("kb")
    p.add_argument("atom")
    p.add_argument("--backend", choices=("conditioning", "enumerate"), default="conditioning")
    _add_policy(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("measure", help="knowledge-base and message measures")
    msub = p.add_subparsers(dest="measure", required=True)
    m = msub.add_parser("ukb", help="mean answer entropy")
    m.add_argument("kb")
    m = msub.add_parser("content", help="semantic content of a message")
    m.add_argument("kb")
    m.add_argument("message")
    m = msub.add_parser("mi", help="semantic mutual information for a query")
    m.add_argument("kb")
    m.add_argument("query")
    m.add_argument("message")
    m = msub.add_parser("secrecy", help="secrecy rate of a message against an eavesdropper")
    m.add_argument("kb", help="legitimate receiver's knowledge base")
    m.add_argument("query")
    m.add_argument("message")
    m.add_argument("eve", help="eavesdropper's knowledge base")
    for m in msub.choices.values():
        m.add_argument("--base", default="2", help="logarithm base (a number or 'e')")
        _add_policy(m)
        m.set_defaults(func=cmd_measure)

    p = sub.add_parser("select", help="message, query and source selection")
    ssub = p.add_subparsers(dest="rule", required=True)
    s = ssub.add_parser("sender", help="pool message minimizing the receiver's uncertainty")
    s.add_argument("kb")
    s.add_argument("pool", help="file whose statements are the candidate messages")
    s = ssub.add_parser("best", aliases=["best-message"], help="best pool message for one query")
    s.add_argument("kb")
    s.add_argument("query")
    s.add_argument("pool")
    s.add_argument("--max-bits", type=float)
    s.add_argument("--alphabet", type=int, default=26)
    s.set_defaults(rule="best")
    s = ssub.add_parser("broadcast", help="minimax pool message over several receivers")
    s.add_argument("query")
    s.add_argument("pool")
    s.add_argument("kbs", nargs="+")
    s.add_argument("--max-bits", type=float)
    s.add_argument("--alphabet", type=int, default=26)
    s = ssub.add_parser("mdl", help="question with the shortest total description")
    s.add_argument("table", help="JSON with 'queries': [{name, prior, answer_bits}]")
    s.add_argument("--lambda", dest="lam", type=float)
    s = ssub.add_parser("das", help="next source to poll (0-based index)")
    s.add_argument("kb")
    s.add_argument("sources", nargs="+")
    s.add_argument("--visited", type=int, nargs="*", default=[])
    for s in {id(s): s for s in ssub.choices.values()}.values():  # aliases repeat parsers
        _add_policy(s)
        s.set_defaults(func=cmd_select)

    p = sub.add_parser("compress", help="smaller equivalent knowledge bases")
    csub = p.add_subparsers(dest="mode", required=True)
    c = csub.add_parser("exact")
    c.add_argument("kb")
    c = csub.add_parser("greedy")
    c.add_argument("kb")
    c.add_argument("--delta", type=float, default=0.0)
    c.add_argument("--epsilon", type=float, default=0.0)
    c = csub.add_parser("min-message")
    c.add_argument("kb")
    c.add_argument("pool")
    c.add_argument("--target", type=float, required=True)
    c.add_argument("--tol", type=float, default=0.0)
    for c in csub.choices.values():
        c.set_defaults(func=cmd_compress)

    p = sub.add_parser("assimilate", help="update a knowledge base with a message")
    p.add_argument("kb")
    p.add_argument("message")
    p.add_argument("--op", choices=[o.value for o in AssimilationOp], default="union")
    p.set_defaults(func=cmd_assimilate)

    p = sub.add_parser("sim", help="run a scenario and write CSV results")
    p.add_argument("scenario", choices=("crossword", "clinical"))
    p.add_argument("--config", help="JSON config (defaults to the built-in setting)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--rule", help="clinical only: run just this rule, e.g. A3 or A3-1")
    p.add_argument("--trials", type=int, help="crossword only: override Monte-Carlo trials")
    p.set_defaults(func=cmd_sim)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except UnanswerableQuery as exc:
        print(f"error: query {exc.query} is not answerable", file=sys.stderr)
        return EXIT_UNANSWERABLE
    except (Infeasible, EmptyInput, EmptyKnowledgeBase, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ParseError, ConfigError, GroundingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
