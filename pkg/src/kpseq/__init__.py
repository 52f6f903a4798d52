"""Keyphrase extraction as B-I-O sequence labeling.

BiLSTM-CRF tagger with frozen (fixed or precomputed contextual) word
embeddings, unsupervised graph-ranking baselines, and an exact-match
evaluation harness.
"""

from kpseq.corpus import Document, Label, RawDocument, tag_bio, tokenize
from kpseq.evaluate import Metrics, decode_spans, exact_match_prf
from kpseq.tagger import KeyphraseTagger

__all__ = [
    "Document",
    "Label",
    "RawDocument",
    "tokenize",
    "tag_bio",
    "decode_spans",
    "exact_match_prf",
    "Metrics",
    "KeyphraseTagger",
]

__version__ = "0.1.0"
