"""Span decoding of B-I-O sequences and exact-match precision/recall/F1."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from kpseq.corpus import CorpusError, Label, bio_spans, normalize_phrase
from kpseq.porter import stem_phrase


@dataclass(frozen=True)
class Metrics:
    tp: int
    n_pred: int
    n_gold: int
    precision: float
    recall: float
    f1: float
    averaging: str = "micro"

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "n_pred": self.n_pred,
            "n_gold": self.n_gold,
            "averaging": self.averaging,
        }


def _prf(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f1


def decode_spans(labels: Sequence[Label], tokens: Sequence[str]) -> set[str]:
    """Keyphrases implied by a label sequence, as normalized phrase strings.

    A span starts at each B and extends through the maximal run of following
    Is; orphan I tokens (no preceding B/I) are ignored.  Phrases are
    lowercased and space-joined; duplicate occurrences collapse.
    """
    if len(labels) != len(tokens):
        raise CorpusError(f"{len(tokens)} tokens but {len(labels)} labels")
    return {normalize_phrase(tokens[a:b]) for a, b in bio_spans(labels)}


def exact_match_prf(pred: Iterable[str], gold: Iterable[str]) -> Metrics:
    """Set-level exact match: a predicted phrase counts iff it equals a gold one."""
    pred, gold = set(pred), set(gold)
    tp = len(pred & gold)
    p, r, f1 = _prf(tp, len(pred), len(gold))
    return Metrics(tp, len(pred), len(gold), p, r, f1)


def corpus_metrics(
    pairs: Sequence[tuple[Iterable[str], Iterable[str]]],
    averaging: str = "micro",
    stem: bool = False,
) -> Metrics:
    """Aggregate (pred, gold) keyphrase-set pairs over a corpus.

    micro: pool tp / n_pred / n_gold across documents, then compute P/R/F1.
    macro: average per-document F1 (tp counts still reported pooled).
    """
    if not pairs:
        raise CorpusError("no documents to evaluate")
    if averaging not in ("micro", "macro"):
        raise ValueError(f"unknown averaging {averaging!r}")
    per_doc = []
    for pred, gold in pairs:
        pred, gold = set(pred), set(gold)
        if stem:
            pred = {stem_phrase(p) for p in pred}
            gold = {stem_phrase(g) for g in gold}
        per_doc.append((len(pred & gold), len(pred), len(gold)))
    tp = sum(d[0] for d in per_doc)
    n_pred = sum(d[1] for d in per_doc)
    n_gold = sum(d[2] for d in per_doc)
    if averaging == "micro":
        p, r, f1 = _prf(tp, n_pred, n_gold)
    else:
        f1 = sum(_prf(*d)[2] for d in per_doc) / len(per_doc)
        p = sum(_prf(*d)[0] for d in per_doc) / len(per_doc)
        r = sum(_prf(*d)[1] for d in per_doc) / len(per_doc)
    return Metrics(tp, n_pred, n_gold, p, r, f1, averaging=averaging)


def load_predictions(path) -> dict[str, set[str]]:
    """Read a predictions JSONL file: {"doc_id", "keyphrases"} per line."""
    preds: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                doc_id = rec["doc_id"]
                phrases = rec["keyphrases"]
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise CorpusError(f"malformed predictions record: {e}", line=lineno) from e
            if doc_id in preds:
                raise CorpusError("duplicate doc_id", doc_id=doc_id, line=lineno)
            preds[doc_id] = {normalize_phrase(str(p).split()) for p in phrases}
    return preds


def save_predictions(preds: dict[str, Iterable[str]], path) -> None:
    from kpseq.ioutil import atomic_write

    with atomic_write(path) as fh:
        for doc_id, phrases in preds.items():
            rec = {"doc_id": doc_id, "keyphrases": sorted(set(phrases))}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
