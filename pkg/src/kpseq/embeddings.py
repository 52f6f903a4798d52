"""Frozen per-token embedding providers: fixed tables and contextual stores.

Embeddings are inputs to the tagger, never parameters; no gradient ever
flows into them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from kpseq.corpus import Document

STORE_FORMAT = "kpemb"
STORE_VERSION = 1


class EmbeddingError(ValueError):
    pass


@dataclass
class EmbeddingTable:
    """Token -> vector map; context-independent by construction."""

    dim: int
    entries: dict[str, np.ndarray]
    oov_policy: str = "zeros"  # or "averaged"
    _oov_vec: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim <= 0:
            raise EmbeddingError(f"dim must be positive, got {self.dim}")
        if self.oov_policy not in ("zeros", "averaged"):
            raise EmbeddingError(f"unknown oov_policy {self.oov_policy!r}")

    def oov_vector(self) -> np.ndarray:
        if self._oov_vec is None:
            if self.oov_policy == "zeros" or not self.entries:
                self._oov_vec = np.zeros(self.dim)
            else:
                self._oov_vec = np.mean(list(self.entries.values()), axis=0)
        return self._oov_vec

    def lookup(self, token: str) -> np.ndarray:
        """Exact-case lookup, then lowercase fallback, then the OOV vector."""
        vec = self.entries.get(token)
        if vec is None:
            vec = self.entries.get(token.lower())
        if vec is None:
            vec = self.oov_vector()
        return vec


@dataclass
class ContextualStore:
    dim: int
    matrices: dict[str, np.ndarray]


@dataclass(frozen=True)
class EmbeddingSequence:
    doc_id: str
    matrix: np.ndarray  # n x dim


def load_fixed(path, oov_policy: str = "zeros") -> EmbeddingTable:
    """Load a text embedding file: "<token> <v1> ... <vd>" per line.

    An optional first line "<count> <dim>" (two integer fields) is skipped.
    Duplicate tokens keep their first occurrence.
    """
    entries: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.rstrip("\n").split(" ")
            if not line.strip():
                continue
            if lineno == 1 and len(fields) == 2:
                try:
                    int(fields[0]), int(fields[1])
                    continue  # vocab/dim header
                except ValueError:
                    pass
            token, values = fields[0], fields[1:]
            if not values:
                raise EmbeddingError(f"line {lineno}: no vector values")
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as e:
                raise EmbeddingError(f"line {lineno}: non-numeric field ({e})") from e
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise EmbeddingError(
                    f"line {lineno}: expected {dim} values, found {len(vec)}"
                )
            entries.setdefault(token, vec)
    if dim is None:
        raise EmbeddingError("embedding file contains no vectors")
    return EmbeddingTable(dim=dim, entries=entries, oov_policy=oov_policy)


def embed_fixed(table: EmbeddingTable, doc: Document) -> EmbeddingSequence:
    matrix = np.stack([table.lookup(tok) for tok in doc.tokens])
    return EmbeddingSequence(doc_id=doc.doc_id, matrix=matrix)


def load_contextual(path) -> ContextualStore:
    """Load a contextual store: a header line, then one record per document."""
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as e:
            raise EmbeddingError(f"line 1: malformed header ({e.msg})") from e
        if header.get("format") != STORE_FORMAT or header.get("version") != STORE_VERSION:
            raise EmbeddingError(
                f"not a {STORE_FORMAT} v{STORE_VERSION} store: header {header!r}"
            )
        dim = header.get("dim")
        if not isinstance(dim, int) or dim <= 0:
            raise EmbeddingError(f"header dim must be a positive integer, got {dim!r}")
        matrices: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                doc_id = rec["doc_id"]
                rec_dim = rec["dim"]
                vectors = rec["vectors"]
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise EmbeddingError(f"line {lineno}: malformed record ({e})") from e
            if rec_dim != dim:
                raise EmbeddingError(
                    f"line {lineno}: record dim {rec_dim} != header dim {dim}"
                )
            matrix = np.array(vectors, dtype=float)
            if matrix.ndim != 2 or matrix.shape[1] != dim:
                raise EmbeddingError(
                    f"line {lineno}: vectors must be n x {dim}, got shape {matrix.shape}"
                )
            if doc_id in matrices:
                raise EmbeddingError(f"line {lineno}: duplicate doc_id {doc_id!r}")
            matrices[doc_id] = matrix
    return ContextualStore(dim=dim, matrices=matrices)


def embed_contextual(store: ContextualStore, doc: Document) -> EmbeddingSequence:
    """Return the stored matrix for the document; never fabricates vectors."""
    matrix = store.matrices.get(doc.doc_id)
    if matrix is None:
        raise EmbeddingError(f"no embeddings for document {doc.doc_id!r}")
    if matrix.shape[0] != len(doc):
        raise EmbeddingError(
            f"doc {doc.doc_id!r}: expected {len(doc)} rows, found {matrix.shape[0]}"
        )
    return EmbeddingSequence(doc_id=doc.doc_id, matrix=matrix)


class FixedEmbedder:
    """Callable Document -> (n x dim) matrix, backed by a fixed table."""

    def __init__(self, table: EmbeddingTable):
        self.table = table
        self.dim = table.dim

    def __call__(self, doc: Document) -> np.ndarray:
        return embed_fixed(self.table, doc).matrix


class ContextualEmbedder:
    """Callable Document -> (n x dim) matrix, backed by a contextual store."""

    def __init__(self, store: ContextualStore):
        self.store = store
        self.dim = store.dim

    def __call__(self, doc: Document) -> np.ndarray:
        return embed_contextual(self.store, doc).matrix
