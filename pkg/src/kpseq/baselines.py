"""Unsupervised graph-ranking baselines (TextRank, SingleRank) on a shared
weighted-PageRank core, and a KEA-style naive-Bayes baseline.

Candidate words are picked by a coarse content-word heuristic (stopword,
punctuation, and number filters) rather than POS tagging, which keeps the
toolkit dependency-free; this deviates from the original baselines' POS
filters and shifts absolute scores somewhat.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from kpseq import evaluate
from kpseq.corpus import Document, normalize_phrase

STOPWORDS = frozenset("""
a about above after again against all also am an and any are as at be because
been before being below between both but by can cannot could did do does doing
down during each few for from further had has have having he her here hers
herself him himself his how i if in into is it its itself just me more most my
myself no nor not now of off on once only or other our ours ourselves out over
own same she should so some such than that the their theirs them themselves
then there these they this those through to too under until up very was we were
what when where which while who whom why will with would you your yours
yourself yourselves
""".split())


def is_content_word(token: str) -> bool:
    t = token.lower()
    return t not in STOPWORDS and any(c.isalpha() for c in t) and not t[0].isdigit()


@dataclass
class WordGraph:
    """Undirected co-occurrence graph over candidate words."""

    nodes: list[str]
    weights: dict[tuple[str, str], float] = field(default_factory=dict)

    def add_edge(self, u: str, v: str, w: float = 1.0) -> None:
        if u == v:
            return  # no self-loops
        key = (u, v) if u <= v else (v, u)
        self.weights[key] = self.weights.get(key, 0.0) + w


@dataclass
class RankedPhrases:
    """(phrase, score) pairs, descending by score, ties lexicographic."""

    items: list[tuple[str, float]]

    def top(self, k: int) -> list[str]:
        return [p for p, _ in self.items[:k]]


@dataclass
class PageRankResult:
    scores: dict[str, float]
    converged: bool


def pagerank(
    graph: WordGraph,
    damping: float = 0.85,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> PageRankResult:
    """Weighted PageRank by power iteration; scores sum to 1.

    Nodes with no edges receive only teleport mass (their outgoing mass is
    redistributed uniformly, the standard dangling-node treatment).
    """
    if not graph.nodes:
        raise ValueError("empty graph")
    if not 0 < damping < 1:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    nodes = sorted(set(graph.nodes))
    index = {w: i for i, w in enumerate(nodes)}
    n = len(nodes)
    W = np.zeros((n, n))
    for (u, v), w in graph.weights.items():
        if w <= 0:
            raise ValueError(f"non-positive edge weight {w} on ({u}, {v})")
        W[index[u], index[v]] += w
        W[index[v], index[u]] += w
    degree = W.sum(axis=1)
    dangling = degree == 0
    T = np.zeros((n, n))
    nz = ~dangling
    T[nz] = W[nz] / degree[nz, None]
    p = np.full(n, 1.0 / n)
    converged = False
    for _ in range(max_iter):
        new_p = (1 - damping) / n + damping * (T.T @ p + p[dangling].sum() / n)
        if np.max(np.abs(new_p - p)) < tol:
            p = new_p
            converged = True
            break
        p = new_p
    return PageRankResult(scores={w: float(p[index[w]]) for w in nodes}, converged=converged)


def _build_graph(tokens: Sequence[str], window: int, weighted: bool) -> WordGraph:
    lower = [t.lower() for t in tokens]
    content = [is_content_word(t) for t in tokens]
    nodes = sorted({lower[i] for i in range(len(tokens)) if content[i]})
    graph = WordGraph(nodes=nodes)
    for i in range(len(tokens)):
        if not content[i]:
            continue
        for j in range(i + 1, min(i + window, len(tokens))):
            if content[j]:
                graph.add_edge(lower[i], lower[j], 1.0)
    if not weighted:
        # unweighted graph: collapse repeated co-occurrences to weight 1
        graph.weights = {k: 1.0 for k in graph.weights}
    return graph


def _merge_phrases(
    tokens: Sequence[str], kept: set[str], scores: dict[str, float]
) -> RankedPhrases:
    """Merge adjacent kept words into phrases; phrase score = sum of members."""
    phrases: dict[str, float] = {}
    i = 0
    lower = [t.lower() for t in tokens]
    while i < len(tokens):
        if lower[i] in kept and is_content_word(tokens[i]):
            j = i
            while j < len(tokens) and lower[j] in kept and is_content_word(tokens[j]):
                j += 1
            phrase = normalize_phrase(tokens[i:j])
            score = sum(scores[w] for w in lower[i:j])
            if phrase not in phrases or phrases[phrase] < score:
                phrases[phrase] = score
            i = j
        else:
            i += 1
    items = sorted(phrases.items(), key=lambda kv: (-kv[1], kv[0]))
    return RankedPhrases(items=items)


def textrank(doc: Document, top_frac: float = 1 / 3) -> RankedPhrases:
    """TextRank: window-2 unweighted graph, keep the top third of words,
    then merge adjacent kept words into phrases."""
    graph = _build_graph(doc.tokens, window=2, weighted=False)
    if not graph.nodes:
        return RankedPhrases(items=[])
    result = pagerank(graph, damping=0.85, tol=1e-6)
    n_keep = math.ceil(top_frac * len(graph.nodes))
    ranked = sorted(result.scores.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = {w for w, _ in ranked[:n_keep]}
    return _merge_phrases(doc.tokens, kept, result.scores)


def singlerank(doc: Document, k: int | None = None) -> RankedPhrases:
    """SingleRank: window-10 count-weighted graph, no pre-merge filtering."""
    graph = _build_graph(doc.tokens, window=10, weighted=True)
    if not graph.nodes:
        return RankedPhrases(items=[])
    result = pagerank(graph, damping=0.85, tol=1e-6)
    ranked = _merge_phrases(doc.tokens, set(graph.nodes), result.scores)
    if k is not None:
        ranked = RankedPhrases(items=ranked.items[:k])
    return ranked


def _candidates(tokens: Sequence[str]) -> list[tuple[str, int]]:
    """1-3-gram candidates not starting/ending with a stopword, with their
    first-occurrence position."""
    lower = [t.lower() for t in tokens]
    seen: dict[str, int] = {}
    n = len(tokens)
    for i in range(n):
        for size in (1, 2, 3):
            if i + size > n:
                break
            gram = lower[i : i + size]
            if not (is_content_word(gram[0]) and is_content_word(gram[-1])):
                continue
            if any(not any(c.isalnum() for c in w) for w in gram):
                continue
            phrase = " ".join(gram)
            seen.setdefault(phrase, i)
    return list(seen.items())


N_BINS = 5


def _discretize(edges: list[float], value: float) -> int:
    for b, edge in enumerate(edges):
        if value <= edge:
            return b
    return len(edges)


@dataclass
class KeaModel:
    """Naive Bayes over discretized tf-idf and first-position features."""

    idf: dict[str, float]
    n_train_docs: int
    tfidf_edges: list[float]
    pos_edges: list[float]
    # counts[class][feature][bin]; class 1 = keyphrase
    counts: dict[int, dict[str, list[int]]]
    class_totals: dict[int, int]

    def posterior(self, tfidf: float, pos: float) -> float:
        """P(keyphrase | features) with Laplace smoothing; strictly in (0, 1)."""
        logs = {}
        total = sum(self.class_totals.values())
        for cls in (0, 1):
            prior = (self.class_totals[cls] + 1) / (total + 2)
            logp = math.log(prior)
            for feat, val, edges in (
                ("tfidf", tfidf, self.tfidf_edges),
                ("pos", pos, self.pos_edges),
            ):
                b = _discretize(edges, val)
                c = self.counts[cls][feat][b]
                logp += math.log((c + 1) / (self.class_totals[cls] + N_BINS))
            logs[cls] = logp
        m = max(logs.values())
        e0, e1 = math.exp(logs[0] - m), math.exp(logs[1] - m)
        return e1 / (e0 + e1)


def _tfidf(phrase: str, tokens_lower: list[str], idf: dict[str, float]) -> float:
    words = phrase.split()
    size = len(words)
    count = sum(
        1
        for i in range(len(tokens_lower) - size + 1)
        if tokens_lower[i : i + size] == words
    )
    return (count / max(1, len(tokens_lower))) * idf.get(phrase, 0.0)


def _equal_freq_edges(values: list[float]) -> list[float]:
    values = sorted(values)
    edges = []
    for b in range(1, N_BINS):
        idx = min(len(values) - 1, int(b * len(values) / N_BINS))
        edges.append(values[idx])
    return edges


def kea_train(docs: Sequence[Document]) -> KeaModel:
    """Fit the naive-Bayes ranker on a labeled corpus.

    Positive examples are candidates whose normalized form is in the
    document's gold phrase set; features are tf-idf (idf from this corpus)
    and normalized first-occurrence position, each discretized into
    equal-frequency bins.
    """
    if not docs:
        raise ValueError("empty training corpus")
    df: Counter[str] = Counter()
    per_doc: list[tuple[Document, list[tuple[str, int]]]] = []
    for doc in docs:
        cands = _candidates(doc.tokens)
        per_doc.append((doc, cands))
        df.update({p for p, _ in cands})
    n = len(docs)
    idf = {p: math.log(n / c) for p, c in df.items()}

    rows: list[tuple[float, float, int]] = []  # tfidf, pos, label
    for doc, cands in per_doc:
        tokens_lower = [t.lower() for t in doc.tokens]
        for phrase, first in cands:
            rows.append(
                (
                    _tfidf(phrase, tokens_lower, idf),
                    first / len(doc),
                    1 if phrase in doc.gold_phrases else 0,
                )
            )
    tfidf_edges = _equal_freq_edges([r[0] for r in rows])
    pos_edges = _equal_freq_edges([r[1] for r in rows])
    counts = {
        cls: {"tfidf": [0] * (N_BINS + 1), "pos": [0] * (N_BINS + 1)} for cls in (0, 1)
    }
    class_totals = {0: 0, 1: 0}
    for tfidf, pos, cls in rows:
        counts[cls]["tfidf"][_discretize(tfidf_edges, tfidf)] += 1
        counts[cls]["pos"][_discretize(pos_edges, pos)] += 1
        class_totals[cls] += 1
    return KeaModel(
        idf=idf,
        n_train_docs=n,
        tfidf_edges=tfidf_edges,
        pos_edges=pos_edges,
        counts=counts,
        class_totals=class_totals,
    )


def kea_rank(model: KeaModel, doc: Document, k: int | None = None) -> RankedPhrases:
    tokens_lower = [t.lower() for t in doc.tokens]
    items = []
    for phrase, first in _candidates(doc.tokens):
        post = model.posterior(
            _tfidf(phrase, tokens_lower, model.idf), first / len(doc)
        )
        items.append((phrase, post))
    items.sort(key=lambda kv: (-kv[1], kv[0]))
    if k is not None:
        items = items[:k]
    return RankedPhrases(items=items)


METHODS = ("textrank", "singlerank", "kea")


def baseline_evaluate(
    method: str,
    corpus: Sequence[Document],
    k: int | None = None,
    train_docs: Sequence[Document] | None = None,
    averaging: str = "micro",
) -> evaluate.Metrics:
    """Score a baseline with exact-match P/R/F1.

    k=None uses oracle-k: each document's cutoff is its gold phrase count.
    KEA trains on `train_docs` (defaults to the evaluation corpus itself).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    model = kea_train(train_docs or corpus) if method == "kea" else None
    pairs = []
    for doc in corpus:
        cutoff = k if k is not None else len(doc.gold_phrases)
        if method == "textrank":
            ranked = textrank(doc)
        elif method == "singlerank":
            ranked = singlerank(doc)
        else:
            ranked = kea_rank(model, doc)
        pairs.append((set(ranked.top(cutoff)), doc.gold_phrases))
    return evaluate.corpus_metrics(pairs, averaging=averaging)
