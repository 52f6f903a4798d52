"""Linear-chain CRF head over emission scores, plus the plain softmax head.

Label indices are B=0, I=1, O=2.  The transition matrix has shape 4 x 3:
rows are previous-label {B, I, O, START}, columns next-label.  There is no
end transition.  All functions here are pure and operate on float64 numpy
arrays.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

N_LABELS = 3
START = 3


def _check(f: np.ndarray, tau: np.ndarray, y=None) -> None:
    if f.ndim != 2 or f.shape[1] != N_LABELS:
        raise ValueError(f"emissions must be n x {N_LABELS}, got {f.shape}")
    if f.shape[0] < 1:
        raise ValueError("empty emission sequence")
    if tau.shape != (N_LABELS + 1, N_LABELS):
        raise ValueError(f"transitions must be {N_LABELS + 1} x {N_LABELS}, got {tau.shape}")
    if y is not None and len(y) != f.shape[0]:
        raise ValueError(f"{f.shape[0]} emission rows but {len(y)} labels")


def score(f: np.ndarray, y, tau: np.ndarray) -> float:
    """Unnormalized sequence score: sum of transition + emission terms.

    The step into position 1 transitions from the virtual START state.
    """
    _check(f, tau, y)
    total = 0.0
    prev = START
    for t, label in enumerate(y):
        total += tau[prev, label] + f[t, label]
        prev = int(label)
    return total


def log_partition(f: np.ndarray, tau: np.ndarray) -> float:
    """log sum over all label sequences of exp(score), by the forward algorithm."""
    _check(f, tau)
    alpha = tau[START] + f[0]
    for t in range(1, f.shape[0]):
        # alpha[j] = logsumexp_i(alpha_prev[i] + tau[i, j]) + f[t, j]
        alpha = logsumexp(alpha[:, None] + tau[:N_LABELS], axis=0) + f[t]
    return float(logsumexp(alpha))


def _forward_backward(f: np.ndarray, tau: np.ndarray):
    n = f.shape[0]
    alpha = np.empty((n, N_LABELS))
    alpha[0] = tau[START] + f[0]
    for t in range(1, n):
        alpha[t] = logsumexp(alpha[t - 1][:, None] + tau[:N_LABELS], axis=0) + f[t]
    beta = np.zeros((n, N_LABELS))
    for t in range(n - 2, -1, -1):
        beta[t] = logsumexp(tau[:N_LABELS] + f[t + 1] + beta[t + 1], axis=1)
    log_z = float(logsumexp(alpha[-1]))
    return alpha, beta, log_z


def nll(f: np.ndarray, y, tau: np.ndarray):
    """Negative log-likelihood and its gradients w.r.t. emissions and transitions.

    Gradients are marginals minus gold indicators, from forward-backward.
    Returns (loss, dL/df with f's shape, dL/dtau with tau's shape).
    """
    _check(f, tau, y)
    n = f.shape[0]
    alpha, beta, log_z = _forward_backward(f, tau)
    loss = log_z - score(f, y, tau)

    d_f = np.exp(alpha + beta - log_z)  # unary marginals, n x |Y|
    for t, label in enumerate(y):
        d_f[t, label] -= 1.0

    d_tau = np.zeros_like(tau)
    d_tau[START] = np.exp(alpha[0] + beta[0] - log_z)
    d_tau[START, y[0]] -= 1.0
    for t in range(n - 1):
        pair = np.exp(
            alpha[t][:, None] + tau[:N_LABELS] + f[t + 1] + beta[t + 1] - log_z
        )
        d_tau[:N_LABELS] += pair
        d_tau[y[t], y[t + 1]] -= 1.0
    return float(loss), d_f, d_tau


def viterbi(f: np.ndarray, tau: np.ndarray) -> list[int]:
    """Maximum-score label sequence.

    Ties break toward the smallest label index at the latest differing
    position: both the final argmax and every backpointer take the smallest
    index among maxima, and reconstruction runs back to front.
    """
    _check(f, tau)
    n = f.shape[0]
    delta = tau[START] + f[0]
    back = np.empty((n, N_LABELS), dtype=int)
    for t in range(1, n):
        cand = delta[:, None] + tau[:N_LABELS]  # prev x next
        back[t] = np.argmax(cand, axis=0)  # argmax returns the first (smallest) index
        delta = cand[back[t], np.arange(N_LABELS)] + f[t]
    path = [int(np.argmax(delta))]
    for t in range(n - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    path.reverse()
    return path


def softmax_head_nll(f: np.ndarray, y):
    """Per-token softmax cross-entropy (the plain-BiLSTM ablation head).

    Returns (loss summed over positions, dL/df).
    """
    if len(y) != f.shape[0]:
        raise ValueError(f"{f.shape[0]} emission rows but {len(y)} labels")
    shifted = f - f.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = -sum(log_probs[t, label] for t, label in enumerate(y))
    d_f = np.exp(log_probs)
    for t, label in enumerate(y):
        d_f[t, label] -= 1.0
    return float(loss), d_f


def softmax_head_decode(f: np.ndarray) -> list[int]:
    """Per-token argmax; ties go to the smallest label index."""
    return [int(i) for i in np.argmax(f, axis=1)]


def constrained_transitions(tau: np.ndarray, penalty: float = -1e9) -> np.ndarray:
    """Copy of tau with START->I and O->I masked (the --constrain-bio option)."""
    out = tau.copy()
    out[START, 1] = penalty
    out[2, 1] = penalty
    return out
