"""Scikit-learn style estimator facade over the BiLSTM-CRF tagger.

Documents are the samples; the embedding provider (any callable
Document -> n x dim matrix, e.g. FixedEmbedder or ContextualEmbedder) is a
constructor argument so the tagger composes with sklearn tooling
(get_params/set_params, clone) while embeddings stay frozen inputs.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from kpseq import evaluate, training
from kpseq.corpus import LABEL_TO_STR, Document


class KeyphraseTagger(BaseEstimator):
    """B-I-O sequence tagger: peephole BiLSTM encoder with a CRF (or softmax) head."""

    def __init__(
        self,
        embedder: Callable[[Document], np.ndarray] | None = None,
        lr: float = 0.05,
        batch_size: int = 4,
        epochs: int = 100,
        patience: int = 4,
        anneal_factor: float = 0.5,
        momentum: float = 0.9,
        hidden_size: int = 128,
        word_dropout: float = 0.05,
        use_crf: bool = True,
        seed: int = 0,
        min_lr: float = 1e-4,
        peephole: str = "diagonal",
        o_peephole_prev: bool = False,
        constrain_bio: bool = False,
    ):
        self.embedder = embedder
        self.lr = lr
        self.batch_size = batch_size
        self.epochs = epochs
        self.patience = patience
        self.anneal_factor = anneal_factor
        self.momentum = momentum
        self.hidden_size = hidden_size
        self.word_dropout = word_dropout
        self.use_crf = use_crf
        self.seed = seed
        self.min_lr = min_lr
        self.peephole = peephole
        self.o_peephole_prev = o_peephole_prev
        self.constrain_bio = constrain_bio

    def _config(self) -> training.TrainConfig:
        return training.TrainConfig(
            lr=self.lr,
            batch_size=self.batch_size,
            epochs=self.epochs,
            patience=self.patience,
            anneal_factor=self.anneal_factor,
            momentum=self.momentum,
            hidden_size=self.hidden_size,
            word_dropout=self.word_dropout,
            use_crf=self.use_crf,
            seed=self.seed,
            min_lr=self.min_lr,
            peephole=self.peephole,
            o_peephole_prev=self.o_peephole_prev,
            constrain_bio=self.constrain_bio,
        )

    def fit(self, X: Sequence[Document], y=None, dev_docs: Sequence[Document] | None = None):
        """Train on labeled Documents (labels travel with X; y is ignored).

        Without an explicit dev set the last 10% of X (at least one doc)
        is held out for the annealing schedule and model selection.
        """
        if self.embedder is None:
            raise ValueError("an embedder callable is required to fit")
        docs = list(X)
        if dev_docs is None:
            n_dev = max(1, len(docs) // 10)
            if len(docs) <= n_dev:
                raise ValueError("too few documents to hold out a dev split")
            dev_docs = docs[-n_dev:]
            docs = docs[:-n_dev]
        self.model_, self.history_ = training.train(
            docs, list(dev_docs), self.embedder, self._config()
        )
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise ValueError("this KeyphraseTagger instance is not fitted yet")

    def predict(self, X: Sequence[Document]) -> list[list[str]]:
        """Per-document label sequences as "B"/"I"/"O" strings."""
        self._check_fitted()
        config = self._config()
        return [
            [
                LABEL_TO_STR[lab]
                for lab in training.decode_document(self.model_, self.embedder(doc), config)
            ]
            for doc in X
        ]

    def predict_phrases(self, X: Sequence[Document]) -> list[set[str]]:
        """Normalized keyphrase set per document."""
        self._check_fitted()
        config = self._config()
        out = []
        for doc in X:
            labels = training.decode_document(self.model_, self.embedder(doc), config)
            out.append(evaluate.decode_spans(labels, doc.tokens))
        return out

    def score(self, X: Sequence[Document], y=None) -> float:
        """Micro-averaged exact-match F1 against the documents' gold phrases."""
        preds = self.predict_phrases(X)
        pairs = [(pred, doc.gold_phrases) for pred, doc in zip(preds, X)]
        return evaluate.corpus_metrics(pairs).f1
