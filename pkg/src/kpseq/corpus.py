"""Corpus ingestion: tokenization, keyphrase alignment, B-I-O tagging, stats.

Raw abstracts arrive as text plus a gold keyphrase list.  Keyphrases are
re-tokenized with the same tokenizer as the running text and matched
case-insensitively against the token sequence; matched occurrences become
B/I spans, everything else is O.  Keyphrases that never occur verbatim in
the text (abstractive ones) are dropped.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

DEFAULT_MAX_TOKENS = 600


class Label(IntEnum):
    """Per-token tag: begins a keyphrase, inside one, or outside all."""

    KB = 0
    KI = 1
    KO = 2


LABEL_TO_STR = {Label.KB: "B", Label.KI: "I", Label.KO: "O"}
STR_TO_LABEL = {"B": Label.KB, "I": Label.KI, "O": Label.KO}


class CorpusError(ValueError):
    """Malformed corpus data; carries doc_id and/or line number context."""

    def __init__(self, message: str, doc_id: str | None = None, line: int | None = None):
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if doc_id is not None:
            parts.append(f"doc_id={doc_id!r}")
        suffix = f" ({', '.join(parts)})" if parts else ""
        super().__init__(message + suffix)
        self.doc_id = doc_id
        self.line = line


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    text: str
    keyphrases: tuple[str, ...]


@dataclass(frozen=True)
class Document:
    """One abstract, tokenized and B-I-O labeled.

    `gold_phrases` is always exactly the normalized span decoding of
    `labels`, so label/phrase round-trips hold by construction.
    """

    doc_id: str
    tokens: tuple[str, ...]
    labels: tuple[Label, ...]
    gold_phrases: frozenset[str] = field(default=frozenset())

    def __post_init__(self):
        if not self.doc_id:
            raise CorpusError("empty doc_id")
        if len(self.tokens) == 0:
            raise CorpusError("document has no tokens", doc_id=self.doc_id)
        if len(self.tokens) != len(self.labels):
            raise CorpusError(
                f"{len(self.tokens)} tokens but {len(self.labels)} labels",
                doc_id=self.doc_id,
            )
        prev = Label.KO
        for t, lab in enumerate(self.labels):
            if lab == Label.KI and prev == Label.KO:
                raise CorpusError(f"orphan I label at position {t}", doc_id=self.doc_id)
            prev = lab
        expected = frozenset(
            normalize_phrase(self.tokens[a:b]) for a, b in bio_spans(self.labels)
        )
        if self.gold_phrases != expected:
            object.__setattr__(self, "gold_phrases", expected)

    @classmethod
    def from_labels(cls, doc_id: str, tokens: Sequence[str], labels: Sequence[Label]) -> "Document":
        return cls(doc_id=doc_id, tokens=tuple(tokens), labels=tuple(labels))

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class DatasetStats:
    num_docs: int
    avg_keyphrases: float
    max_phrase_len: int
    avg_phrase_len: float
    avg_tokens: float
    max_tokens: int
    min_tokens: int


_PUNCT = set(string.punctuation)
_PAREN_MAP = {"(": "-LRB-", ")": "-RRB-"}


def tokenize(text: str) -> list[str]:
    """Whitespace split, then peel leading/trailing punctuation into tokens.

    Internal hyphens are kept ("single-server" stays whole); round
    parentheses become the Penn Treebank -LRB-/-RRB- tokens.
    """
    out: list[str] = []
    for chunk in text.split():
        lead: list[str] = []
        trail: list[str] = []
        while chunk and chunk[0] in _PUNCT:
            lead.append(chunk[0])
            chunk = chunk[1:]
        while chunk and chunk[-1] in _PUNCT:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        for c in lead:
            out.append(_PAREN_MAP.get(c, c))
        if chunk:
            out.append(chunk)
        for c in reversed(trail):
            out.append(_PAREN_MAP.get(c, c))
    return out


def bio_spans(labels: Sequence[Label]) -> list[tuple[int, int]]:
    """Half-open [start, end) spans: each B starts one, following Is extend it.

    I tokens not preceded by B/I are ignored.
    """
    spans: list[tuple[int, int]] = []
    start = None
    for t, lab in enumerate(labels):
        if lab == Label.KB:
            if start is not None:
                spans.append((start, t))
            start = t
        elif lab == Label.KI:
            if start is None:
                continue  # orphan I
        else:
            if start is not None:
                spans.append((start, t))
                start = None
    if start is not None:
        spans.append((start, len(labels)))
    return spans


def normalize_phrase(tokens: Iterable[str]) -> str:
    return " ".join(tok.lower() for tok in tokens)


def tag_bio(tokens: Sequence[str], keyphrases: Iterable[str]) -> list[Label]:
    """Align gold keyphrases to token spans and emit B-I-O labels.

    Each phrase is tokenized with `tokenize` and matched case-insensitively.
    Matching is greedy: longest phrase first, then left to right, and matched
    spans never overlap.  Phrases with no verbatim occurrence are dropped.
    """
    if not tokens:
        raise CorpusError("tag_bio requires a non-empty token sequence")
    lower = [t.lower() for t in tokens]
    n = len(tokens)
    phrase_toks = {
        tuple(t.lower() for t in tokenize(p)) for p in keyphrases
    }
    phrase_toks.discard(())
    taken = [False] * n
    labels = [Label.KO] * n
    for ptoks in sorted(phrase_toks, key=lambda p: (-len(p), p)):
        k = len(ptoks)
        pos = 0
        while pos + k <= n:
            if lower[pos : pos + k] == list(ptoks) and not any(taken[pos : pos + k]):
                labels[pos] = Label.KB
                for i in range(pos + 1, pos + k):
                    labels[i] = Label.KI
                for i in range(pos, pos + k):
                    taken[i] = True
                pos += k
            else:
                pos += 1
    return labels


def count_dropped(raw: RawDocument) -> int:
    """Number of gold phrases with no verbatim (extractive) occurrence."""
    tokens = tokenize(raw.text)
    lower = [t.lower() for t in tokens]
    dropped = 0
    for p in raw.keyphrases:
        ptoks = [t.lower() for t in tokenize(p)]
        if not ptoks:
            dropped += 1
            continue
        k = len(ptoks)
        if not any(lower[i : i + k] == ptoks for i in range(len(tokens) - k + 1)):
            dropped += 1
    return dropped


def process_raw(raw: RawDocument) -> Document:
    tokens = tokenize(raw.text)
    if not tokens:
        raise CorpusError("document text tokenizes to nothing", doc_id=raw.doc_id)
    labels = tag_bio(tokens, raw.keyphrases)
    return Document.from_labels(raw.doc_id, tokens, labels)


def compute_stats(corpus: Sequence[Document]) -> DatasetStats:
    """Per-document and per-keyphrase-instance averages for a processed corpus."""
    if not corpus:
        raise CorpusError("empty corpus")
    phrase_lens: list[int] = []
    for doc in corpus:
        phrase_lens.extend(b - a for a, b in bio_spans(doc.labels))
    num_docs = len(corpus)
    total_phrases = sum(len(doc.gold_phrases) for doc in corpus)
    inst_lens = [len(p.split()) for doc in corpus for p in doc.gold_phrases]
    tok_counts = [len(doc) for doc in corpus]
    return DatasetStats(
        num_docs=num_docs,
        avg_keyphrases=total_phrases / num_docs,
        max_phrase_len=max(inst_lens, default=0),
        avg_phrase_len=(sum(inst_lens) / len(inst_lens)) if inst_lens else 0.0,
        avg_tokens=sum(tok_counts) / num_docs,
        max_tokens=max(tok_counts),
        min_tokens=min(tok_counts),
    )


def load_raw(path) -> list[RawDocument]:
    """Read a JSONL raw-corpus file: {"doc_id", "text", "keyphrases"} per line."""
    docs: list[RawDocument] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"malformed JSON: {e.msg}", line=lineno) from e
            try:
                doc_id = rec["doc_id"]
                text = rec["text"]
                phrases = rec["keyphrases"]
            except (KeyError, TypeError) as e:
                raise CorpusError(f"missing field {e}", line=lineno) from e
            if not isinstance(doc_id, str) or not doc_id:
                raise CorpusError("doc_id must be a non-empty string", line=lineno)
            if doc_id in seen:
                raise CorpusError("duplicate doc_id", doc_id=doc_id, line=lineno)
            seen.add(doc_id)
            docs.append(RawDocument(doc_id, text, tuple(str(p) for p in phrases)))
    return docs


def load_processed(path, max_tokens: int = DEFAULT_MAX_TOKENS) -> list[Document]:
    """Read a JSONL processed-corpus file: {"doc_id", "tokens", "labels"} per line."""
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"malformed JSON: {e.msg}", line=lineno) from e
            try:
                doc_id = rec["doc_id"]
                tokens = rec["tokens"]
                label_strs = rec["labels"]
            except (KeyError, TypeError) as e:
                raise CorpusError(f"missing field {e}", line=lineno) from e
            if doc_id in seen:
                raise CorpusError("duplicate doc_id", doc_id=doc_id, line=lineno)
            seen.add(doc_id)
            labels = []
            for s in label_strs:
                if s not in STR_TO_LABEL:
                    raise CorpusError(f"invalid label {s!r}", doc_id=doc_id, line=lineno)
                labels.append(STR_TO_LABEL[s])
            if len(tokens) > max_tokens:
                raise CorpusError(
                    f"document has {len(tokens)} tokens, over the {max_tokens} limit",
                    doc_id=doc_id,
                    line=lineno,
                )
            try:
                docs.append(Document.from_labels(doc_id, tokens, labels))
            except CorpusError as e:
                raise CorpusError(str(e), line=lineno) from e
    return docs


def save_processed(docs: Iterable[Document], path) -> None:
    from kpseq.ioutil import atomic_write

    with atomic_write(path) as fh:
        for doc in docs:
            rec = {
                "doc_id": doc.doc_id,
                "tokens": list(doc.tokens),
                "labels": [LABEL_TO_STR[lab] for lab in doc.labels],
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
