"""Reproducible end-to-end scenarios and their config/CSV plumbing."""

from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path
from typing import IO

from ..errors import ConfigError
from .clinical import (CausalGraph, ClinicalConfig, ClinicalRun, RoundRecord, RuleKind,
                       TransmissionRule, causal_query, ground_truth_merge, kb_entropy,
                       run_clinical)
from .crossword import (Crossing, CrosswordConfig, CrosswordQuery, CrosswordResult,
                        plan_order, run_crossword)

__all__ = [
    "CausalGraph", "ClinicalConfig", "ClinicalRun", "RoundRecord", "RuleKind",
    "TransmissionRule", "causal_query", "ground_truth_merge", "kb_entropy", "run_clinical",
    "Crossing", "CrosswordConfig", "CrosswordQuery", "CrosswordResult", "plan_order",
    "run_crossword", "load_config", "default_config", "write_letters_csv",
    "write_decode_errors_csv", "write_clinical_csv", "clinical_rows",
]


def _read_json(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def default_config(kind: str):
    text = resources.files(__package__).joinpath("data", f"{kind}.json").read_text("utf-8")
    return _build(kind, _read_json(text))


def load_config(kind: str, path: str | Path | None = None):
    if path is None:
        return default_config(kind)
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return _build(kind, _read_json(text))


def _build(kind: str, data: dict):
    if kind == "crossword":
        return CrosswordConfig.from_dict(data)
    if kind == "clinical":
        return ClinicalConfig.from_dict(data)
    raise ConfigError(f"unknown scenario {kind!r}")


def _f(x: float) -> str:
    return f"{x:.6f}"


def write_letters_csv(result: CrosswordResult, out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["order", "epsilon", "analytic_letters", "mc_letters", "mc_stderr"])
    for r in result.letters:
        w.writerow([r.order, _f(r.epsilon), _f(r.analytic_letters), _f(r.mc_letters), _f(r.mc_stderr)])


def write_decode_errors_csv(result: CrosswordResult, out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["query", "epsilon", "error_prob"])
    for r in result.decode_errors:
        w.writerow([r.query, _f(r.epsilon), _f(r.error_prob)])


def clinical_rows(cfg: ClinicalConfig, runs=None) -> list[tuple[ClinicalRun, list[RoundRecord]]]:
    out = []
    for run in runs if runs is not None else cfg.runs:
        out.append((run, run_clinical(cfg.alice, cfg.bob, run.rule, run.queries,
                                      cfg.seed, cfg.entropy_mode)))
    return out


def write_clinical_csv(rows, out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["rule", "task", "round", "sent_edge", "avg_error", "kb_entropy"])
    for run, records in rows:
        task = "uniform" if run.queries == "uniform" else f"X{run.queries}"
        for r in records:
            edge = "" if r.sent_edge is None else f"{r.sent_edge[0]}->{r.sent_edge[1]}:{r.sent_edge[2]:g}"
            w.writerow([run.rule.label, task, r.round, edge, _f(r.avg_error), _f(r.kb_entropy)])
