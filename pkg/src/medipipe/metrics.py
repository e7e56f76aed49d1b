"""Summarization metrics: ROUGE-1/2/L/Lsum and BERTScore, from scratch.

All metrics tokenize with the corpus tokenizer (lowercase, punctuation
separated, no stemming or stopword removal) so scores are reproducible.
BERTScore embeds tokens through whatever embedding provider is configured;
the deterministic hash embedder makes the whole harness runnable offline.
BLEURT is a pluggable external scorer slot only.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .corpus import Tokenizer, split_sentences, tokenize
from .errors import ReportError, ValidationError

REPORT_COLUMNS = (
    "Rouge1",
    "Rouge2",
    "RougeL",
    "RougeLsum",
    "BERTScore-precision",
    "BERTScore-recall",
    "BERTScore-F1",
    "BLEURT",
)


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class BertScoreTriple:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalRow:
    system_name: str
    rouge1: RougeScore
    rouge2: RougeScore
    rougeL: RougeScore
    rougeLsum: RougeScore
    bert: BertScoreTriple
    bleurt: float | None = None


@dataclass(frozen=True)
class RenderedReport:
    table: str
    csv: str


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(cand: Sequence[str], ref: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap F-measure between candidate and reference."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    cand_grams = _ngrams(cand, n)
    ref_grams = _ngrams(ref, n)
    match = sum(min(count, ref_grams[g]) for g, count in cand_grams.items())
    cand_total = sum(cand_grams.values())
    ref_total = sum(ref_grams.values())
    p = match / cand_total if cand_total else 0.0
    r = match / ref_total if ref_total else 0.0
    return RougeScore(p, r, _f1(p, r))


def _to_ids(*sequences: Sequence[str]) -> list[np.ndarray]:
    vocab: dict[str, int] = {}
    out = []
    for seq in sequences:
        ids = np.empty(len(seq), dtype=np.int64)
        for i, tok in enumerate(seq):
            ids[i] = vocab.setdefault(tok, len(vocab))
        out.append(ids)
    return out


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length over token lists."""
    a_ids, b_ids = _to_ids(a, b)
    return kernels.lcs_length(a_ids, b_ids)


def rouge_l(cand: Sequence[str], ref: Sequence[str]) -> RougeScore:
    """LCS-based F-measure over whole token sequences."""
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    length = lcs_length(cand, ref)
    p = length / len(cand)
    r = length / len(ref)
    return RougeScore(p, r, _f1(p, r))


def rouge_lsum(cand_text: str, ref_text: str, tokenizer: Tokenizer = tokenize) -> RougeScore:
    """Summary-level LCS: per reference sentence, union the token positions
    matched against every candidate sentence, then score the pooled hits.
    """
    cand_sents = [tokenizer(s) for s in split_sentences(cand_text)]
    ref_sents = [tokenizer(s) for s in split_sentences(ref_text)]
    cand_sents = [s for s in cand_sents if s]
    ref_sents = [s for s in ref_sents if s]
    cand_total = sum(len(s) for s in cand_sents)
    ref_total = sum(len(s) for s in ref_sents)
    if cand_total == 0 or ref_total == 0:
        return RougeScore(0.0, 0.0, 0.0)

    vocab: dict[str, int] = {}
    cand_ids = [
        np.array([vocab.setdefault(t, len(vocab)) for t in s], dtype=np.int64) for s in cand_sents
    ]
    ref_ids = [
        np.array([vocab.setdefault(t, len(vocab)) for t in s], dtype=np.int64) for s in ref_sents
    ]

    hits = 0
    for r_ids in ref_ids:
        union = np.zeros(len(r_ids), dtype=bool)
        for c_ids in cand_ids:
            union |= kernels.lcs_match_mask(r_ids, c_ids)
        hits += int(union.sum())
    p = hits / cand_total
    r = hits / ref_total
    return RougeScore(p, r, _f1(p, r))


def bertscore(cand: Sequence[str], ref: Sequence[str], embedder) -> BertScoreTriple:
    """Greedy max-cosine token alignment between candidate and reference.

    Each token is embedded individually via ``embedder.embed_texts``; no idf
    weighting and no baseline rescaling.
    """
    if not cand or not ref:
        raise ValidationError("bertscore requires nonempty candidate and reference token lists")
    uniq = sorted(set(cand) | set(ref))
    vectors = np.asarray(embedder.embed_texts(uniq), dtype=np.float64)
    row = {tok: vectors[i] for i, tok in enumerate(uniq)}
    cand_mat = np.stack([row[t] for t in cand])
    ref_mat = np.stack([row[t] for t in ref])
    sim = ref_mat @ cand_mat.T  # (|ref|, |cand|) cosine matrix for unit vectors
    recall = float(sim.max(axis=1).mean())
    precision = float(sim.max(axis=0).mean())
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return BertScoreTriple(precision, recall, f1)


def _mean_rouge(scores: list[RougeScore]) -> RougeScore:
    n = len(scores)
    return RougeScore(
        sum(s.precision for s in scores) / n,
        sum(s.recall for s in scores) / n,
        sum(s.f1 for s in scores) / n,
    )


def evaluate_system(
    pairs: Iterable[tuple[str, str]],
    name: str,
    embedder,
    tokenizer: Tokenizer = tokenize,
    bleurt_scorer: Callable[[str, str], float] | None = None,
) -> EvalRow:
    """Score (generated, reference) text pairs and average into one row."""
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("evaluate_system requires at least one pair")
    r1, r2, rl, rlsum, bp, br, bf, bl = [], [], [], [], [], [], [], []
    for generated, reference in pairs:
        cand = tokenizer(generated)
        ref = tokenizer(reference)
        r1.append(rouge_n(cand, ref, 1))
        r2.append(rouge_n(cand, ref, 2))
        rl.append(rouge_l(cand, ref))
        rlsum.append(rouge_lsum(generated, reference, tokenizer))
        bert = bertscore(cand, ref, embedder)
        bp.append(bert.precision)
        br.append(bert.recall)
        bf.append(bert.f1)
        if bleurt_scorer is not None:
            bl.append(bleurt_scorer(generated, reference))
    n = len(pairs)
    return EvalRow(
        system_name=name,
        rouge1=_mean_rouge(r1),
        rouge2=_mean_rouge(r2),
        rougeL=_mean_rouge(rl),
        rougeLsum=_mean_rouge(rlsum),
        bert=BertScoreTriple(sum(bp) / n, sum(br) / n, sum(bf) / n),
        bleurt=(sum(bl) / n) if bl else None,
    )


def _row_cells(row: EvalRow) -> list[str]:
    values = [
        row.rouge1.f1,
        row.rouge2.f1,
        row.rougeL.f1,
        row.rougeLsum.f1,
        row.bert.precision,
        row.bert.recall,
        row.bert.f1,
    ]
    cells = [f"{v * 100:.2f}" for v in values]
    cells.append("n/a" if row.bleurt is None else f"{row.bleurt * 100:.2f}")
    return cells


def render_report(rows: Sequence[EvalRow]) -> RenderedReport:
    """Render rows as an aligned text table and a CSV document.

    Values are x100 with two decimals; the BLEURT column prints "n/a" when
    no external scorer was configured.
    """
    if not rows:
        raise ReportError("report requires at least one row")
    names = [r.system_name for r in rows]
    if len(set(names)) != len(names):
        raise ReportError("duplicate system names: " + ", ".join(sorted({n for n in names if names.count(n) > 1})))

    header = ["system", *REPORT_COLUMNS]
    data = [[r.system_name, *_row_cells(r)] for r in rows]

    widths = [max(len(header[i]), *(len(d[i]) for d in data)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    for d in data:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(d)))
    table = "\n".join(lines) + "\n"

    csv_lines = [",".join(header)]
    csv_lines.extend(",".join(d) for d in data)
    csv = "\n".join(csv_lines) + "\n"
    return RenderedReport(table=table, csv=csv)
