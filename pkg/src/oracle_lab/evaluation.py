"""Labeled bracketing precision/recall/F1 and a per-arity breakdown.

Simplifications relative to canonical evalb runs on treebank data: exact
label match, no punctuation or label-equivalence parameter file.  The
corpora here are synthetic, so none of that machinery earns its keep.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass

from .trees import constituents_with_arity

log = logging.getLogger(__name__)

ARITY_BUCKETS = (1, 2, 3, 4, 5)  # bucket 5 holds arity >= 5


def _bucket(arity: int) -> int:
    return min(arity, ARITY_BUCKETS[-1])


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    matched: int
    predicted: int
    gold: int

    @classmethod
    def from_counts(cls, matched, predicted, gold):
        # empty prediction (or gold) side scores 0, not an error
        p = 100.0 * matched / predicted if predicted else 0.0
        r = 100.0 * matched / gold if gold else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f1, matched, predicted, gold)


@dataclass(frozen=True)
class ArityTable:
    """Per-arity PRF rows; a pair counts for a row only when both sides put
    the constituent in that row, so cross_arity_matches can be nonzero."""

    rows: dict
    pooled_matched: int

    @property
    def cross_arity_matches(self):
        return self.pooled_matched - sum(r.matched for r in self.rows.values())


def _check_aligned(gold, pred):
    if len(gold) != len(pred):
        raise ValueError(
            f"corpus length mismatch: {len(gold)} gold vs {len(pred)} predicted"
        )
    for idx, (g, p) in enumerate(zip(gold, pred)):
        if tuple(g.tokens) != tuple(p.tokens):
            raise ValueError(f"sentence {idx}: token sequences differ")


def _span_counter(tree):
    return Counter((c.label, c.l, c.r) for c, _ in constituents_with_arity(tree))


def prf(gold, pred) -> PRF:
    """Micro-averaged labeled bracketing score over parallel corpora.

    Constituents are (label, l, r) triples with multiplicity; preterminals
    never enter the constituent set so they are excluded by construction.
    """
    _check_aligned(gold, pred)
    matched = predicted = gold_total = 0
    for g, p in zip(gold, pred):
        gc = _span_counter(g)
        pc = _span_counter(p)
        matched += sum((gc & pc).values())
        predicted += sum(pc.values())
        gold_total += sum(gc.values())
    return PRF.from_counts(matched, predicted, gold_total)


def arity_breakdown(gold, pred) -> ArityTable:
    """PRF restricted to each child-count bucket, arity taken from each
    side's own tree.  Matches where the two sides disagree on arity count
    toward no bucket; the discrepancy against the pooled score is logged."""
    _check_aligned(gold, pred)
    matched = {b: 0 for b in ARITY_BUCKETS}
    predicted = {b: 0 for b in ARITY_BUCKETS}
    gold_total = {b: 0 for b in ARITY_BUCKETS}
    pooled = 0
    for g, p in zip(gold, pred):
        gc = {b: Counter() for b in ARITY_BUCKETS}
        pc = {b: Counter() for b in ARITY_BUCKETS}
        for c, arity in constituents_with_arity(g):
            gc[_bucket(arity)][(c.label, c.l, c.r)] += 1
        for c, arity in constituents_with_arity(p):
            pc[_bucket(arity)][(c.label, c.l, c.r)] += 1
        for b in ARITY_BUCKETS:
            matched[b] += sum((gc[b] & pc[b]).values())
            predicted[b] += sum(pc[b].values())
            gold_total[b] += sum(gc[b].values())
        all_g = Counter()
        all_p = Counter()
        for b in ARITY_BUCKETS:
            all_g.update(gc[b])
            all_p.update(pc[b])
        pooled += sum((all_g & all_p).values())
    rows = {
        b: PRF.from_counts(matched[b], predicted[b], gold_total[b])
        for b in ARITY_BUCKETS
    }
    table = ArityTable(rows=rows, pooled_matched=pooled)
    if table.cross_arity_matches:
        log.info(
            "%d matched spans bucketed differently on the two sides",
            table.cross_arity_matches,
        )
    return table


def _row_name(b):
    return f"arity {b}+" if b == ARITY_BUCKETS[-1] else f"arity {b}"


def render_report(overall: PRF, arities: ArityTable | None = None, tsv=False) -> str:
    """Overall score plus the arity table, fixed-width or TSV."""
    rows = [("overall", overall)]
    if arities is not None:
        rows += [(_row_name(b), arities.rows[b]) for b in ARITY_BUCKETS]
    if tsv:
        lines = ["section\tprecision\trecall\tf1\tmatched\tpredicted\tgold"]
        for name, r in rows:
            lines.append(
                f"{name}\t{r.precision:.2f}\t{r.recall:.2f}\t{r.f1:.2f}"
                f"\t{r.matched}\t{r.predicted}\t{r.gold}"
            )
    else:
        lines = [
            f"{'':10s}{'P':>8s}{'R':>8s}{'F1':>8s}{'match':>7s}{'pred':>7s}{'gold':>7s}"
        ]
        for name, r in rows:
            lines.append(
                f"{name:10s}{r.precision:8.2f}{r.recall:8.2f}{r.f1:8.2f}"
                f"{r.matched:7d}{r.predicted:7d}{r.gold:7d}"
            )
    return "\n".join(lines)
