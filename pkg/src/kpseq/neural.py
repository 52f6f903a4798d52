"""Peephole BiLSTM encoder with affine projection and exact analytic gradients.

Gate equations (per direction, hidden size l, input dim d):

    i_t = sigmoid(W_xi x_t + W_hi h_{t-1} + w_ci * c_{t-1} + b_i)
    f_t = sigmoid(W_xf x_t + W_hf h_{t-1} + w_cf * c_{t-1} + b_f)
    g_t = tanh   (W_xc x_t + W_hc h_{t-1} + b_c)
    c_t = f_t * c_{t-1} + i_t * g_t
    o_t = sigmoid(W_xo x_t + W_ho h_{t-1} + w_co * c_t + b_o)
    h_t = o_t * tanh(c_t)

The output gate's peephole sees the NEW cell c_t (an option switches it to
c_{t-1}).  Peepholes are elementwise vectors by default; `peephole="full"`
makes them dense l x l matrices.  Backpropagation through time is written
out by hand, including both peephole paths; no autodiff anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GATES = ("i", "f", "c", "o")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class LstmDirectionParams:
    """All tensors for one LSTM direction.

    Peephole weights w_ci/w_cf/w_co are length-l vectors (diagonal form) or
    l x l matrices (full form); `peep_mul`/`peep_outer` abstract over both.
    """

    W_xi: np.ndarray
    W_hi: np.ndarray
    b_i: np.ndarray
    W_xf: np.ndarray
    W_hf: np.ndarray
    b_f: np.ndarray
    W_xc: np.ndarray
    W_hc: np.ndarray
    b_c: np.ndarray
    W_xo: np.ndarray
    W_ho: np.ndarray
    b_o: np.ndarray
    w_ci: np.ndarray
    w_cf: np.ndarray
    w_co: np.ndarray

    @property
    def hidden_size(self) -> int:
        return self.b_i.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_xi.shape[1]

    @property
    def full_peephole(self) -> bool:
        return self.w_ci.ndim == 2

    def tensors(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def _peep_mul(w: np.ndarray, c: np.ndarray) -> np.ndarray:
    return w @ c if w.ndim == 2 else w * c


def _peep_grad(w: np.ndarray, d_gate: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Gradient contribution to a peephole weight from one timestep."""
    return np.outer(d_gate, c) if w.ndim == 2 else d_gate * c


def _peep_backprop(w: np.ndarray, d_gate: np.ndarray) -> np.ndarray:
    """Gradient flowing through a peephole back into the cell it reads."""
    return w.T @ d_gate if w.ndim == 2 else w * d_gate


@dataclass
class BiLstmParams:
    forward: LstmDirectionParams
    backward: LstmDirectionParams

    @property
    def hidden_size(self) -> int:
        return self.forward.hidden_size

    def tensors(self) -> dict[str, np.ndarray]:
        out = {f"fwd.{k}": v for k, v in self.forward.tensors().items()}
        out.update({f"bwd.{k}": v for k, v in self.backward.tensors().items()})
        return out


def init_direction(
    rng: np.random.Generator,
    hidden_size: int,
    input_dim: int,
    peephole: str = "diagonal",
) -> LstmDirectionParams:
    """Uniform +-sqrt(1/l) weights, zero biases and peepholes, forget bias +1."""
    if peephole not in ("diagonal", "full"):
        raise ValueError(f"unknown peephole form {peephole!r}")
    limit = np.sqrt(1.0 / hidden_size)

    def w(rows, cols):
        return rng.uniform(-limit, limit, size=(rows, cols))

    peep_shape = (hidden_size, hidden_size) if peephole == "full" else (hidden_size,)
    kwargs = {}
    for g in GATES:
        kwargs[f"W_x{g}"] = w(hidden_size, input_dim)
        kwargs[f"W_h{g}"] = w(hidden_size, hidden_size)
        kwargs[f"b_{g}"] = np.zeros(hidden_size)
    kwargs["b_f"] = np.ones(hidden_size)
    for name in ("w_ci", "w_cf", "w_co"):
        kwargs[name] = np.zeros(peep_shape)
    return LstmDirectionParams(**kwargs)


def init_bilstm(
    rng: np.random.Generator, hidden_size: int, input_dim: int, peephole: str = "diagonal"
) -> BiLstmParams:
    return BiLstmParams(
        forward=init_direction(rng, hidden_size, input_dim, peephole),
        backward=init_direction(rng, hidden_size, input_dim, peephole),
    )


def lstm_step(
    x_t: np.ndarray,
    h_prev: np.ndarray,
    c_prev: np.ndarray,
    p: LstmDirectionParams,
    o_peephole_prev: bool = False,
):
    """One recurrence step; returns (h_t, c_t, gate activations for backprop)."""
    if x_t.shape[0] != p.input_dim:
        raise ValueError(f"input dim {x_t.shape[0]} != parameter dim {p.input_dim}")
    i = _sigmoid(p.W_xi @ x_t + p.W_hi @ h_prev + _peep_mul(p.w_ci, c_prev) + p.b_i)
    f = _sigmoid(p.W_xf @ x_t + p.W_hf @ h_prev + _peep_mul(p.w_cf, c_prev) + p.b_f)
    g = np.tanh(p.W_xc @ x_t + p.W_hc @ h_prev + p.b_c)
    c = f * c_prev + i * g
    o_cell = c_prev if o_peephole_prev else c
    o = _sigmoid(p.W_xo @ x_t + p.W_ho @ h_prev + _peep_mul(p.w_co, o_cell) + p.b_o)
    h = o * np.tanh(c)
    return h, c, (i, f, g, o)


class DirectionCache:
    """Activations of one unidirectional pass, kept for backpropagation."""

    def __init__(self, X, H, C, gates, o_peephole_prev):
        self.X = X  # n x d inputs as seen by this direction (already reversed for bwd)
        self.H = H  # (n+1) x l, row 0 is the zero initial state
        self.C = C
        self.gates = gates  # list of (i, f, g, o)
        self.o_peephole_prev = o_peephole_prev


def _run_direction(
    X: np.ndarray, p: LstmDirectionParams, o_peephole_prev: bool
) -> DirectionCache:
    n = X.shape[0]
    l = p.hidden_size
    H = np.zeros((n + 1, l))
    C = np.zeros((n + 1, l))
    gates = []
    for t in range(n):
        h, c, acts = lstm_step(X[t], H[t], C[t], p, o_peephole_prev)
        H[t + 1] = h
        C[t + 1] = c
        gates.append(acts)
    return DirectionCache(X, H, C, gates, o_peephole_prev)


class BiLstmCache:
    def __init__(self, fwd: DirectionCache, bwd: DirectionCache, H: np.ndarray):
        self.fwd = fwd
        self.bwd = bwd
        self.H = H  # n x 2l concatenated states


def bilstm_forward(
    X: np.ndarray, params: BiLstmParams, o_peephole_prev: bool = False
) -> BiLstmCache:
    """Run both directions from zero initial states; row t is [fwd h_t ; bwd h_t]."""
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"input must be n x d with n >= 1, got shape {X.shape}")
    fwd = _run_direction(X, params.forward, o_peephole_prev)
    bwd = _run_direction(X[::-1], params.backward, o_peephole_prev)
    H = np.concatenate([fwd.H[1:], bwd.H[1:][::-1]], axis=1)
    return BiLstmCache(fwd, bwd, H)


def _backward_direction(
    cache: DirectionCache, p: LstmDirectionParams, dH: np.ndarray
) -> dict[str, np.ndarray]:
    """BPTT for one direction given upstream gradients on its hidden states."""
    n = cache.X.shape[0]
    grads = {name: np.zeros_like(arr) for name, arr in p.tensors().items()}
    dh_carry = np.zeros(p.hidden_size)
    dc_carry = np.zeros(p.hidden_size)
    for t in range(n - 1, -1, -1):
        i, f, g, o = cache.gates[t]
        c = cache.C[t + 1]
        c_prev = cache.C[t]
        h_prev = cache.H[t]
        x = cache.X[t]
        tanh_c = np.tanh(c)

        dh = dH[t] + dh_carry
        d_ao = dh * tanh_c * o * (1.0 - o)
        dc = dh * o * (1.0 - tanh_c**2) + dc_carry
        if cache.o_peephole_prev:
            dc_from_o_peep = np.zeros_like(dc)
        else:
            dc_from_o_peep = _peep_backprop(p.w_co, d_ao)
        dc = dc + dc_from_o_peep

        d_ag = dc * i * (1.0 - g**2)
        d_ai = dc * g * i * (1.0 - i)
        d_af = dc * c_prev * f * (1.0 - f)

        grads["W_xi"] += np.outer(d_ai, x)
        grads["W_xf"] += np.outer(d_af, x)
        grads["W_xc"] += np.outer(d_ag, x)
        grads["W_xo"] += np.outer(d_ao, x)
        grads["W_hi"] += np.outer(d_ai, h_prev)
        grads["W_hf"] += np.outer(d_af, h_prev)
        grads["W_hc"] += np.outer(d_ag, h_prev)
        grads["W_ho"] += np.outer(d_ao, h_prev)
        grads["b_i"] += d_ai
        grads["b_f"] += d_af
        grads["b_c"] += d_ag
        grads["b_o"] += d_ao
        grads["w_ci"] += _peep_grad(p.w_ci, d_ai, c_prev)
        grads["w_cf"] += _peep_grad(p.w_cf, d_af, c_prev)
        grads["w_co"] += _peep_grad(p.w_co, d_ao, c_prev if cache.o_peephole_prev else c)

        dh_carry = (
            p.W_hi.T @ d_ai + p.W_hf.T @ d_af + p.W_hc.T @ d_ag + p.W_ho.T @ d_ao
        )
        dc_carry = dc * f + _peep_backprop(p.w_ci, d_ai) + _peep_backprop(p.w_cf, d_af)
        if cache.o_peephole_prev:
            dc_carry = dc_carry + _peep_backprop(p.w_co, d_ao)
    return grads


def bilstm_backward(
    cache: BiLstmCache, params: BiLstmParams, dH: np.ndarray
) -> dict[str, np.ndarray]:
    """Gradients for every BiLSTM tensor given dL/dH on the concatenated states."""
    if dH.shape != cache.H.shape:
        raise ValueError(f"dH shape {dH.shape} != cached H shape {cache.H.shape}")
    l = params.hidden_size
    g_fwd = _backward_direction(cache.fwd, params.forward, dH[:, :l])
    g_bwd = _backward_direction(cache.bwd, params.backward, dH[:, l:][::-1])
    out = {f"fwd.{k}": v for k, v in g_fwd.items()}
    out.update({f"bwd.{k}": v for k, v in g_bwd.items()})
    return out


def project(H: np.ndarray, W_a: np.ndarray) -> np.ndarray:
    """Affine map to label-score space: f_t = W_a h_t, no bias term."""
    if H.shape[1] != W_a.shape[1]:
        raise ValueError(f"state width {H.shape[1]} != W_a width {W_a.shape[1]}")
    return H @ W_a.T


def project_backward(H: np.ndarray, W_a: np.ndarray, dF: np.ndarray):
    """Returns (dL/dW_a, dL/dH) for the affine projection."""
    return dF.T @ H, dF @ W_a


def word_dropout(X: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Zero each token's whole vector independently with probability p."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    if p == 0.0:
        return X
    keep = rng.random(X.shape[0]) >= p
    return X * keep[:, None]
