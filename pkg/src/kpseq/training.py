"""Batched SGD with Nesterov momentum, lr annealing on dev-F1 patience,
model selection on best dev F1, and JSON checkpointing."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from kpseq import crf, evaluate, neural
from kpseq.corpus import Document, Label
from kpseq.ioutil import atomic_write

CHECKPOINT_FORMAT = "kpseq-checkpoint"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class TrainConfig:
    lr: float = 0.05
    batch_size: int = 4
    epochs: int = 100
    patience: int = 4
    anneal_factor: float = 0.5
    momentum: float = 0.9
    hidden_size: int = 128
    word_dropout: float = 0.05
    use_crf: bool = True
    seed: int = 0
    min_lr: float = 1e-4
    peephole: str = "diagonal"  # or "full"
    o_peephole_prev: bool = False
    constrain_bio: bool = False

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if not 0 < self.anneal_factor < 1:
            raise ValueError(f"anneal_factor must be in (0, 1), got {self.anneal_factor}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 <= self.word_dropout < 1:
            raise ValueError(f"word_dropout must be in [0, 1), got {self.word_dropout}")


@dataclass
class ModelParams:
    """Every trainable tensor: BiLSTM gates, affine W_a, CRF transitions."""

    bilstm: neural.BiLstmParams
    W_a: np.ndarray  # |Y| x 2l
    transitions: np.ndarray | None  # 4 x 3, None when use_crf=False
    input_dim: int

    def tensors(self) -> dict[str, np.ndarray]:
        out = self.bilstm.tensors()
        out["W_a"] = self.W_a
        if self.transitions is not None:
            out["transitions"] = self.transitions
        return out


def init_params(config: TrainConfig, input_dim: int, rng: np.random.Generator) -> ModelParams:
    l = config.hidden_size
    bilstm = neural.init_bilstm(rng, l, input_dim, peephole=config.peephole)
    limit = np.sqrt(1.0 / (2 * l))
    W_a = rng.uniform(-limit, limit, size=(crf.N_LABELS, 2 * l))
    transitions = np.zeros((crf.N_LABELS + 1, crf.N_LABELS)) if config.use_crf else None
    return ModelParams(bilstm=bilstm, W_a=W_a, transitions=transitions, input_dim=input_dim)


@dataclass
class OptimizerState:
    velocity: dict[str, np.ndarray]
    lr: float
    epochs_since_improvement: int = 0
    best_dev_f1: float = -np.inf


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_p: float
    dev_r: float
    dev_f1: float
    lr: float


@dataclass
class TrainHistory:
    epochs: list[EpochRecord] = field(default_factory=list)

    def to_csv(self, path) -> None:
        with atomic_write(path) as fh:
            fh.write("epoch,train_loss,dev_p,dev_r,dev_f1,lr\n")
            for r in self.epochs:
                fh.write(
                    f"{r.epoch},{r.train_loss!r},{r.dev_p!r},{r.dev_r!r},"
                    f"{r.dev_f1!r},{r.lr!r}\n"
                )


def sgd_nesterov_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: OptimizerState,
    lr: float,
    momentum: float,
) -> None:
    """In-place update: v <- mu*v - lr*g, theta <- theta + v.

    Gradients are taken at the current (lookahead) iterate, the standard
    reformulation of Nesterov momentum; mu=0 reduces to plain SGD.
    """
    for name, theta in params.tensors().items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {theta.shape} for {name}")
        v = state.velocity[name]
        v *= momentum
        v -= lr * g
        theta += v


def doc_loss_and_grads(
    params: ModelParams, X: np.ndarray, labels: Sequence[Label], config: TrainConfig
):
    """Forward + backward for one document; returns (loss, gradient dict)."""
    cache = neural.bilstm_forward(X, params.bilstm, config.o_peephole_prev)
    f = neural.project(cache.H, params.W_a)
    y = [int(lab) for lab in labels]
    if config.use_crf:
        loss, d_f, d_tau = crf.nll(f, y, params.transitions)
    else:
        loss, d_f = crf.softmax_head_nll(f, y)
        d_tau = None
    d_Wa, d_H = neural.project_backward(cache.H, params.W_a, d_f)
    grads = neural.bilstm_backward(cache, params.bilstm, d_H)
    grads["W_a"] = d_Wa
    if d_tau is not None:
        grads["transitions"] = d_tau
    return loss, grads


def decode_document(params: ModelParams, X: np.ndarray, config: TrainConfig) -> list[Label]:
    """Viterbi (CRF head) or per-token argmax (softmax head) labels."""
    cache = neural.bilstm_forward(X, params.bilstm, config.o_peephole_prev)
    f = neural.project(cache.H, params.W_a)
    if config.use_crf:
        tau = params.transitions
        if config.constrain_bio:
            tau = crf.constrained_transitions(tau)
        path = crf.viterbi(f, tau)
    else:
        path = crf.softmax_head_decode(f)
    return [Label(i) for i in path]


def evaluate_model(
    params: ModelParams,
    docs: Sequence[Document],
    provider: Callable[[Document], np.ndarray],
    config: TrainConfig,
) -> evaluate.Metrics:
    pairs = []
    for doc in docs:
        labels = decode_document(params, provider(doc), config)
        pred = evaluate.decode_spans(labels, doc.tokens)
        pairs.append((pred, doc.gold_phrases))
    return evaluate.corpus_metrics(pairs)


def train(
    train_docs: Sequence[Document],
    dev_docs: Sequence[Document],
    provider: Callable[[Document], np.ndarray],
    config: TrainConfig,
    log: Callable[[str], None] | None = None,
) -> tuple[ModelParams, TrainHistory]:
    """Full training loop; returns the best-dev-F1 parameters and the history.

    Each epoch shuffles the training docs (seeded), accumulates batch-mean
    gradients over `batch_size` documents per step, and evaluates dev F1
    with dropout disabled.  When dev F1 fails to improve for `patience`
    consecutive epochs the lr is multiplied by `anneal_factor` and the
    counter resets.  Training stops at `epochs` or once lr < min_lr.
    """
    if not train_docs:
        raise ValueError("empty training set")
    for doc in list(train_docs) + list(dev_docs):
        X = provider(doc)
        if X.shape[0] != len(doc):
            raise ValueError(
                f"embedding provider returned {X.shape[0]} rows for "
                f"{len(doc)}-token doc {doc.doc_id!r}"
            )
    rng = np.random.default_rng(config.seed)
    input_dim = provider(train_docs[0]).shape[1]
    params = init_params(config, input_dim, rng)
    state = OptimizerState(
        velocity={k: np.zeros_like(v) for k, v in params.tensors().items()},
        lr=config.lr,
    )
    history = TrainHistory()
    best_params = copy.deepcopy(params)
    order = np.arange(len(train_docs))

    for epoch in range(1, config.epochs + 1):
        if state.lr < config.min_lr:
            break
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            acc: dict[str, np.ndarray] | None = None
            for idx in batch:
                doc = train_docs[idx]
                X = neural.word_dropout(provider(doc), config.word_dropout, rng)
                loss, grads = doc_loss_and_grads(params, X, doc.labels, config)
                epoch_loss += loss
                if acc is None:
                    acc = grads
                else:
                    for name in acc:
                        acc[name] += grads[name]
            for name in acc:
                acc[name] /= len(batch)
            sgd_nesterov_step(params, acc, state, state.lr, config.momentum)

        metrics = evaluate_model(params, dev_docs, provider, config) if dev_docs else None
        dev_p, dev_r, dev_f1 = (
            (metrics.precision, metrics.recall, metrics.f1) if metrics else (0.0, 0.0, 0.0)
        )
        history.epochs.append(
            EpochRecord(epoch, epoch_loss / len(train_docs), dev_p, dev_r, dev_f1, state.lr)
        )
        if log:
            log(
                f"epoch {epoch}: train_loss={epoch_loss / len(train_docs):.4f} "
                f"dev_f1={dev_f1:.4f} lr={state.lr:g}"
            )
        if dev_f1 > state.best_dev_f1:
            state.best_dev_f1 = dev_f1
            state.epochs_since_improvement = 0
            best_params = copy.deepcopy(params)
        else:
            state.epochs_since_improvement += 1
            if state.epochs_since_improvement >= config.patience:
                state.lr *= config.anneal_factor
                state.epochs_since_improvement = 0
    return best_params, history


def save_checkpoint(params: ModelParams, config: TrainConfig, path) -> None:
    tensors = {
        name: {"shape": list(arr.shape), "data": arr.ravel().tolist()}
        for name, arr in params.tensors().items()
    }
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(config),
        "input_dim": params.input_dim,
        "tensors": tensors,
    }
    with atomic_write(path) as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_checkpoint(path) -> tuple[ModelParams, TrainConfig]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise CheckpointError(f"truncated or malformed checkpoint: {e.msg}") from e
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"not a {CHECKPOINT_FORMAT} file")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {doc.get('version')!r}")
    config = TrainConfig(**doc["config"])
    arrays = {}
    for name, rec in doc["tensors"].items():
        arr = np.array(rec["data"], dtype=float).reshape(rec["shape"])
        arrays[name] = arr
    input_dim = doc["input_dim"]
    rng = np.random.default_rng(0)
    params = init_params(config, input_dim, rng)
    expected = set(params.tensors())
    found = set(arrays)
    if expected != found:
        raise CheckpointError(
            f"tensor set mismatch: missing {sorted(expected - found)}, "
            f"unexpected {sorted(found - expected)}"
        )
    for name, arr in arrays.items():
        target = params.tensors()[name]
        if arr.shape != target.shape:
            raise CheckpointError(f"tensor {name} has shape {arr.shape}, expected {target.shape}")
    for name in params.bilstm.forward.tensors():
        setattr(params.bilstm.forward, name, arrays[f"fwd.{name}"])
        setattr(params.bilstm.backward, name, arrays[f"bwd.{name}"])
    params.W_a = arrays["W_a"]
    if config.use_crf:
        params.transitions = arrays["transitions"]
    return params, config
