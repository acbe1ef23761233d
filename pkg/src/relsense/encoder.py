"""Word embeddings and bidirectional LSTM sentence encoders.

Three sentence representations are produced from a stacked bidirectional
LSTM over frozen word vectors: concatenation of the final forward state
with the final backward state, elementwise max pooling of the per-step
joint states, and their mean. Gradients are derived by hand per cell and
accumulated into the layer parameters, which keeps the whole encoder
checkable against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ShapeError
from .nn import Tensor, xavier_init

Array = np.ndarray

POOLING_MODES = ("concat", "max", "mean")
GATES = ("i", "f", "o", "g")


@dataclass
class SentenceRepresentation:
    """Fixed-size vector for one sentence plus where it came from."""

    values: Array
    provenance: str  # bilstm_concat | bilstm_max | bilstm_mean | pretrained | combined

    @property
    def dimension(self) -> int:
        return self.values.shape[0]


class EmbeddingTable:
    """Word-vector table with a shared out-of-vocabulary fallback.

    Vectors are frozen: they are inputs to the encoder, not trained
    parameters.
    """

    def __init__(self, dimension: int, vectors: dict[str, Array],
                 oov_vector: Array | None = None, dtype=np.float32):
        self.dimension = int(dimension)
        if self.dimension < 1:
            raise ValueError(f"embedding dimension must be positive, got {dimension}")
        self.vectors = {}
        for token, vec in vectors.items():
            arr = np.asarray(vec, dtype=dtype)
            if arr.shape != (self.dimension,):
                raise ShapeError(
                    f"vector for {token!r} has shape {arr.shape}, expected ({self.dimension},)")
            self.vectors[token] = arr
        if oov_vector is None:
            self.oov_vector = np.zeros(self.dimension, dtype=dtype)
        else:
            self.oov_vector = np.asarray(oov_vector, dtype=dtype)
            if self.oov_vector.shape != (self.dimension,):
                raise ShapeError(f"oov vector has shape {self.oov_vector.shape}")

    def lookup(self, token: str) -> Array:
        return self.vectors.get(token, self.oov_vector)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


def load_glove(path, dtype=np.float32) -> EmbeddingTable:
    """Parse a GloVe-format text file: one "token v1 v2 ... vD" per line.

    The dimension is inferred from the first line and enforced on all
    subsequent lines.
    """
    vectors: dict[str, Array] = {}
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                raise FormatError("blank line in embedding file", line=line_no)
            token, values = fields[0], fields[1:]
            if dimension is None:
                dimension = len(values)
                if dimension == 0:
                    raise FormatError("first line carries no vector values", line=line_no)
            if len(values) != dimension:
                raise FormatError(
                    f"expected {dimension} values, got {len(values)}", line=line_no)
            try:
                vectors[token] = np.array([float(v) for v in values], dtype=dtype)
            except ValueError:
                raise FormatError("unparseable float value", line=line_no) from None
    if dimension is None:
        raise FormatError("embedding file is empty", line=1)
    return EmbeddingTable(dimension, vectors, dtype=dtype)


def save_glove(table: EmbeddingTable, path) -> None:
    """Write an EmbeddingTable in the GloVe text format."""
    with open(path, "w", encoding="utf-8") as fh:
        for token, vec in table.vectors.items():
            fh.write(token + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def embed_tokens(tokens: list[str], table: EmbeddingTable) -> list[Array]:
    """Map tokens to their vectors, OOV tokens to the shared fallback."""
    if not tokens:
        raise ValueError("cannot embed an empty token sequence")
    return [table.lookup(t) for t in tokens]


def _sigmoid(x: Array) -> Array:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


class LstmDirection:
    """Gate parameters for one direction of one stacked layer.

    Each gate weight acts on the concatenation [x_t ; h_prev], so its
    shape is (hidden_dim, input_dim + hidden_dim). The forget-gate bias
    starts at `forget_bias`; everything else is Xavier or zero.
    """

    def __init__(self, input_dim: int, hidden_dim: int, rng: np.random.Generator,
                 forget_bias: float = 1.0, dtype=np.float32, name: str = "lstm"):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.name = name
        cols = input_dim + hidden_dim
        self.weights = {
            gate: Tensor(xavier_init(cols, hidden_dim, rng, dtype), name=f"{name}.W_{gate}")
            for gate in GATES
        }
        self.biases = {
            gate: Tensor(np.zeros(hidden_dim, dtype=dtype), name=f"{name}.b_{gate}")
            for gate in GATES
        }
        self.biases["f"].data[...] = forget_bias

    def parameters(self) -> list[Tensor]:
        return [self.weights[g] for g in GATES] + [self.biases[g] for g in GATES]

    def forward(self, xs: list[Array]):
        """Run the whole sequence in the order given. Returns (states, caches)."""
        dtype = self.weights["i"].data.dtype
        h = np.zeros(self.hidden_dim, dtype=dtype)
        c = np.zeros(self.hidden_dim, dtype=dtype)
        states, caches = [], []
        for x in xs:
            h, c, cache = lstm_cell(x, h, c, self)
            states.append(h)
            caches.append(cache)
        return states, caches

    def backward(self, dstates: list[Array], caches) -> list[Array]:
        """BPTT over the cached sequence; accumulates parameter gradients.

        `dstates[k]` is the upstream gradient on the k-th emitted state.
        Returns the gradients on the k-th inputs, same order as forward.
        """
        steps = len(caches)
        dh_next = np.zeros(self.hidden_dim, dtype=dstates[0].dtype)
        dc_next = np.zeros_like(dh_next)
        dxs: list[Array] = [None] * steps  # type: ignore[list-item]
        for k in reversed(range(steps)):
            dh = dstates[k] + dh_next
            dxs[k], dh_next, dc_next = lstm_cell_backward(dh, dc_next, caches[k], self)
        return dxs


def lstm_cell(x_t: Array, h_prev: Array, c_prev: Array, params: LstmDirection):
    """One LSTM step: i, f, o logistic gates, tanh candidate.

    c_t = f*c_prev + i*g; h_t = o*tanh(c_t). Returns (h_t, c_t, cache).
    """
    if x_t.shape != (params.input_dim,) or h_prev.shape != (params.hidden_dim,) \
            or c_prev.shape != (params.hidden_dim,):
        raise ShapeError(
            f"lstm cell mismatch: x={x_t.shape}, h={h_prev.shape}, c={c_prev.shape}, "
            f"expected ({params.input_dim},) and ({params.hidden_dim},)")
    z = np.concatenate([x_t, h_prev])
    i = _sigmoid(params.weights["i"].data @ z + params.biases["i"].data)
    f = _sigmoid(params.weights["f"].data @ z + params.biases["f"].data)
    o = _sigmoid(params.weights["o"].data @ z + params.biases["o"].data)
    g = np.tanh(params.weights["g"].data @ z + params.biases["g"].data)
    c_t = f * c_prev + i * g
    tanh_c = np.tanh(c_t)
    h_t = o * tanh_c
    cache = (z, i, f, o, g, c_prev, tanh_c)
    return h_t, c_t, cache


def lstm_cell_backward(dh: Array, dc_in: Array, cache, params: LstmDirection,
                       accumulate: bool = True):
    """Backward through one cell. Returns (dx, dh_prev, dc_prev)."""
    z, i, f, o, g, c_prev, tanh_c = cache
    do = dh * tanh_c
    dc = dc_in + dh * o * (1.0 - tanh_c * tanh_c)
    dpre = {
        "i": dc * g * i * (1.0 - i),
        "f": dc * c_prev * f * (1.0 - f),
        "o": do * o * (1.0 - o),
        "g": dc * i * (1.0 - g * g),
    }
    dz = np.zeros_like(z)
    for gate in GATES:
        da = dpre[gate]
        if accumulate:
            params.weights[gate].grad += np.outer(da, z)
            params.biases[gate].grad += da
        dz += params.weights[gate].data.T @ da
    split = params.input_dim
    return dz[:split], dz[split:], dc * f


def pool_states(states: Array, mode: str):
    """Reduce a (T, D) stack of states to one vector.

    Max pooling also returns the argmax timestep per coordinate (needed
    to route gradients); mean pooling returns None there.
    """
    if mode == "max":
        return states.max(axis=0), states.argmax(axis=0)
    if mode == "mean":
        return states.mean(axis=0), None
    raise ValueError(f"unknown pooling mode {mode!r}")


class BiLstmEncoder:
    """Stacked bidirectional LSTM producing fixed-size sentence vectors.

    Layer k > 0 of each direction consumes layer k-1's hidden states of
    the same direction. The representation always comes from the top
    layer: either [forward h_T ; backward h_1] (concat) or max/mean over
    the per-step joint states.
    """

    def __init__(self, table: EmbeddingTable, hidden_dim: int,
                 rng: np.random.Generator, num_layers: int = 2,
                 pooling: str = "concat", forget_bias: float = 1.0,
                 dtype=np.float32):
        if pooling not in POOLING_MODES:
            raise ValueError(f"pooling must be one of {POOLING_MODES}, got {pooling!r}")
        if hidden_dim < 1 or num_layers < 1:
            raise ValueError("hidden_dim and num_layers must be positive")
        self.table = table
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.pooling = pooling
        self.dtype = dtype
        self.forward_layers: list[LstmDirection] = []
        self.backward_layers: list[LstmDirection] = []
        for layer in range(num_layers):
            in_dim = table.dimension if layer == 0 else hidden_dim
            self.forward_layers.append(LstmDirection(
                in_dim, hidden_dim, rng, forget_bias, dtype, name=f"enc.fwd{layer}"))
            self.backward_layers.append(LstmDirection(
                in_dim, hidden_dim, rng, forget_bias, dtype, name=f"enc.bwd{layer}"))

    @property
    def output_dim(self) -> int:
        return 2 * self.hidden_dim

    def parameters(self) -> list[Tensor]:
        params: list[Tensor] = []
        for fwd, bwd in zip(self.forward_layers, self.backward_layers):
            params.extend(fwd.parameters())
            params.extend(bwd.parameters())
        return params

    def encode(self, tokens: list[str]):
        """Encode one token sequence. Returns (representation, cache)."""
        xs = embed_tokens(tokens, self.table)
        steps = len(xs)
        fwd_in: list[Array] = xs
        bwd_in: list[Array] = xs[::-1]
        fwd_caches, bwd_caches = [], []
        for layer in range(self.num_layers):
            fwd_in, fc = self.forward_layers[layer].forward(fwd_in)
            bwd_in, bc = self.backward_layers[layer].forward(bwd_in)
            fwd_caches.append(fc)
            bwd_caches.append(bc)
        # fwd_in[t] is the top forward state at time t; bwd_in[k] is the
        # top backward state at time T-1-k (processing order).
        if self.pooling == "concat":
            values = np.concatenate([fwd_in[-1], bwd_in[-1]])
            pool_cache = None
        else:
            joint = np.stack([
                np.concatenate([fwd_in[t], bwd_in[steps - 1 - t]])
                for t in range(steps)
            ])
            values, argmax = pool_states(joint, self.pooling)
            pool_cache = argmax
        rep = SentenceRepresentation(values, f"bilstm_{self.pooling}")
        cache = (steps, fwd_caches, bwd_caches, pool_cache)
        return rep, cache

    def backward(self, dvalues: Array, cache) -> list[Array]:
        """Backpropagate a representation gradient; accumulates into params.

        Returns per-token gradients on the word embeddings (unused while
        embeddings stay frozen).
        """
        steps, fwd_caches, bwd_caches, pool_cache = cache
        hidden = self.hidden_dim
        dtype = dvalues.dtype
        dfwd = [np.zeros(hidden, dtype=dtype) for _ in range(steps)]
        dbwd = [np.zeros(hidden, dtype=dtype) for _ in range(steps)]  # processing order
        if self.pooling == "concat":
            dfwd[steps - 1] += dvalues[:hidden]
            dbwd[steps - 1] += dvalues[hidden:]
        elif self.pooling == "mean":
            share = dvalues / steps
            for t in range(steps):
                dfwd[t] += share[:hidden]
                dbwd[steps - 1 - t] += share[hidden:]
        else:  # max: route each coordinate to its argmax timestep
            for coord, t in enumerate(pool_cache):
                if coord < hidden:
                    dfwd[t][coord] += dvalues[coord]
                else:
                    dbwd[steps - 1 - t][coord - hidden] += dvalues[coord]
        for layer in reversed(range(self.num_layers)):
            dfwd = self.forward_layers[layer].backward(dfwd, fwd_caches[layer])
            dbwd = self.backward_layers[layer].backward(dbwd, bwd_caches[layer])
        return [dfwd[t] + dbwd[steps - 1 - t] for t in range(steps)]


def encode_concat(tokens: list[str], encoder: BiLstmEncoder) -> SentenceRepresentation:
    """[forward h_T ; backward h_1] from the top stacked layer."""
    if encoder.pooling != "concat":
        raise ValueError(f"encoder is configured for {encoder.pooling!r} pooling")
    rep, _ = encoder.encode(tokens)
    return rep


def encode_pooled(tokens: list[str], encoder: BiLstmEncoder,
                  mode: str) -> SentenceRepresentation:
    """Elementwise max or mean over the per-step joint states."""
    if mode not in ("max", "mean"):
        raise ValueError(f"pooling mode must be 'max' or 'mean', got {mode!r}")
    if encoder.pooling != mode:
        raise ValueError(f"encoder is configured for {encoder.pooling!r} pooling")
    rep, _ = encoder.encode(tokens)
    return rep
