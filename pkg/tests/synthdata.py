"""Seeded synthetic corpora with separable keyword/background vocabularies.

Keyword types carry embeddings shifted away from background types, so a
small tagger can learn the task quickly; keyphrases are short runs of
keyword tokens always separated by at least one background token.
"""

from __future__ import annotations

import numpy as np

from kpseq.corpus import Document, Label
from kpseq.embeddings import EmbeddingTable, FixedEmbedder


def make_vocab_embeddings(
    rng: np.random.Generator,
    n_keyword: int = 200,
    n_background: int = 800,
    dim: int = 16,
    separation: float = 2.0,
):
    keywords = [f"kw{i:03d}" for i in range(n_keyword)]
    background = [f"bg{i:03d}" for i in range(n_background)]
    entries = {}
    shift = np.zeros(dim)
    shift[: dim // 2] = separation
    for w in keywords:
        entries[w] = rng.normal(size=dim) + shift
    for w in background:
        entries[w] = rng.normal(size=dim) - shift
    return keywords, background, EmbeddingTable(dim=dim, entries=entries)


def make_doc(
    rng: np.random.Generator,
    doc_id: str,
    keywords: list[str],
    background: list[str],
    n_tokens: tuple[int, int] = (40, 80),
    phrase_lens: tuple[int, ...] = (1, 2, 3),
    phrase_prob: float = 0.2,
) -> Document:
    target = int(rng.integers(n_tokens[0], n_tokens[1] + 1))
    tokens: list[str] = []
    labels: list[Label] = []
    while len(tokens) < target:
        if rng.random() < phrase_prob and len(tokens) + max(phrase_lens) + 1 <= target:
            k = int(rng.choice(phrase_lens))
            for j in range(k):
                tokens.append(str(rng.choice(keywords)))
                labels.append(Label.KB if j == 0 else Label.KI)
            # separator keeps phrases from touching
            tokens.append(str(rng.choice(background)))
            labels.append(Label.KO)
        else:
            tokens.append(str(rng.choice(background)))
            labels.append(Label.KO)
    return Document.from_labels(doc_id, tokens, labels)


def make_corpus(
    seed: int = 0,
    n_train: int = 300,
    n_dev: int = 50,
    n_test: int = 50,
    dim: int = 16,
    phrase_lens: tuple[int, ...] = (1, 2, 3),
    n_tokens: tuple[int, int] = (40, 80),
    n_keyword: int = 200,
    n_background: int = 800,
):
    """Returns (train_docs, dev_docs, test_docs, FixedEmbedder)."""
    rng = np.random.default_rng(seed)
    keywords, background, table = make_vocab_embeddings(
        rng, n_keyword=n_keyword, n_background=n_background, dim=dim
    )
    splits = []
    for name, count in (("train", n_train), ("dev", n_dev), ("test", n_test)):
        docs = [
            make_doc(
                rng,
                f"{name}{i:04d}",
                keywords,
                background,
                n_tokens=n_tokens,
                phrase_lens=phrase_lens,
            )
            for i in range(count)
        ]
        splits.append(docs)
    return (*splits, FixedEmbedder(table))
