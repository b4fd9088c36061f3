"""Skip-gram with negative sampling over node sequences.

Each (target, context) pair within ``window`` positions is pushed to maximise
``log s(u_c . v_t) + sum_n log s(-u_n . v_t)`` with negatives ``n`` drawn from
the unigram distribution raised to 3/4. ``v`` are the returned input vectors,
``u`` the output (context) vectors. Training is single-threaded and fully
determined by the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from tweetdemog.errors import DataError, ParameterError

NEG_POWER = 0.75


@dataclass
class SgnsConfig:
    dimensions: int = 128
    window: int = 10
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def validate(self):
        for name in ("dimensions", "window", "negatives"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1")
        if self.epochs < 0:
            raise ParameterError("epochs must be >= 0")
        if not self.learning_rate > 0:
            raise ParameterError("learning_rate must be positive")


class EmbeddingMatrix:
    """Row ``i`` of ``vectors`` is the embedding of ``nodes[i]``."""

    def __init__(self, nodes, vectors):
        self.nodes = list(nodes)
        self.vectors = np.asarray(vectors, dtype=np.float64)
        self.index = {n: i for i, n in enumerate(self.nodes)}

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, node):
        return node in self.index

    def __getitem__(self, node) -> np.ndarray:
        return self.vectors[self.index[node]]

    @property
    def dimensions(self) -> int:
        return self.vectors.shape[1]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(self.nodes)} {self.dimensions}\n")
            for node, row in zip(self.nodes, self.vectors):
                if any(ch.isspace() for ch in node):
                    raise DataError(f"node id {node!r} contains whitespace")
                fh.write(node + " " + " ".join(repr(float(x)) for x in row) + "\n")

    @classmethod
    def load(cls, path) -> EmbeddingMatrix:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            try:
                n, dims = int(header[0]), int(header[1])
                nodes, rows = [], []
                for line in fh:
                    parts = line.split()
                    if not parts:
                        continue
                    if len(parts) != dims + 1:
                        raise ValueError(f"expected {dims} values for node {parts[0]!r}")
                    nodes.append(parts[0])
                    rows.append([float(x) for x in parts[1:]])
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}: malformed embeddings file ({exc})") from None
        if len(nodes) != n:
            raise DataError(f"{path}: header says {n} nodes, found {len(nodes)}")
        return cls(nodes, np.array(rows, dtype=np.float64).reshape(n, dims))


@numba.njit(cache=True)
def _log_sigmoid(x):
    if x >= 0:
        return -np.log1p(np.exp(-x))
    return x - np.log1p(np.exp(x))


@numba.njit(cache=True)
def _sigmoid(x):
    if x >= 0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


@numba.njit(cache=True)
def _dot(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * b[i]
    return acc


@numba.njit(cache=True)
def _pair_coefficients(v, u_pos, u_negs, coef_negs):
    """Loss of one pair and the scalar gradient coefficients.

    With ``loss = -log s(u_pos.v) - sum_k log s(-u_k.v)``:
    ``dL/dv = c_pos*u_pos + sum_k c_k*u_k``, ``dL/du_pos = c_pos*v``,
    ``dL/du_k = c_k*v``. ``coef_negs`` is filled in place.
    """
    s = _dot(u_pos, v)
    loss = -_log_sigmoid(s)
    c_pos = _sigmoid(s) - 1.0
    for k in range(u_negs.shape[0]):
        sk = _dot(u_negs[k], v)
        loss -= _log_sigmoid(-sk)
        coef_negs[k] = _sigmoid(sk)
    return loss, c_pos


def pair_loss_and_gradients(v, u_pos, u_negs):
    """Python-facing wrapper: ``(loss, dL/dv, dL/du_pos, dL/du_negs)``."""
    v = np.ascontiguousarray(v, dtype=np.float64)
    u_pos = np.ascontiguousarray(u_pos, dtype=np.float64)
    u_negs = np.ascontiguousarray(np.atleast_2d(u_negs), dtype=np.float64)
    coef = np.empty(u_negs.shape[0])
    loss, c_pos = _pair_coefficients(v, u_pos, u_negs, coef)
    grad_v = c_pos * u_pos + coef @ u_negs
    return loss, grad_v, c_pos * v, coef[:, None] * v[None, :]


@numba.njit(cache=True)
def _draw_negative(cum):
    r = np.random.random() * cum[-1]
    lo, hi = 0, cum.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] > r:
            hi = mid
        else:
            lo = mid + 1
    return lo


@numba.njit(cache=True)
def _train_kernel(tokens, offsets, w_in, w_out, cum, window, negatives, epochs, lr0, seed):
    np.random.seed(seed)
    n_walks = offsets.shape[0] - 1
    dims = w_in.shape[1]
    total = max(1, epochs * tokens.shape[0])
    processed = 0
    neg_idx = np.empty(negatives, dtype=np.int64)
    u_negs = np.empty((negatives, dims))
    coef = np.empty(negatives)
    grad_v = np.empty(dims)
    v = np.empty(dims)
    loss_sum = 0.0
    for _ in range(epochs):
        order = np.random.permutation(n_walks)
        for wi in order:
            s, e = offsets[wi], offsets[wi + 1]
            for i in range(s, e):
                lr = lr0 * max(1e-4, 1.0 - processed / total)
                t = tokens[i]
                lo, hi = max(s, i - window), min(e, i + window + 1)
                for j in range(lo, hi):
                    if j == i:
                        continue
                    c = tokens[j]
                    m = 0
                    for _k in range(negatives):
                        d = _draw_negative(cum)
                        if d != c:
                            neg_idx[m] = d
                            m += 1
                    for k in range(m):
                        u_negs[k, :] = w_out[neg_idx[k]]
                    loss, c_pos = _pair_coefficients(w_in[t], w_out[c], u_negs[:m], coef)
                    loss_sum += loss
                    for a in range(dims):
                        v[a] = w_in[t, a]
                        grad_v[a] = c_pos * w_out[c, a]
                    for k in range(m):
                        ck = coef[k]
                        for a in range(dims):
                            grad_v[a] += ck * u_negs[k, a]
                    step = lr * c_pos
                    for a in range(dims):
                        w_out[c, a] -= step * v[a]
                    for k in range(m):
                        step = lr * coef[k]
                        row = neg_idx[k]
                        for a in range(dims):
                            w_out[row, a] -= step * v[a]
                    for a in range(dims):
                        w_in[t, a] -= lr * grad_v[a]
                processed += 1
    return loss_sum


def encode_walks(walks):
    """Integer-encode walks; node vocabulary is sorted for determinism."""
    vocab = sorted({n for w in walks for n in w})
    index = {n: i for i, n in enumerate(vocab)}
    lengths = [len(w) for w in walks]
    offsets = np.zeros(len(walks) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(lengths)
    tokens = np.fromiter((index[n] for w in walks for n in w), dtype=np.int64, count=int(offsets[-1]))
    return vocab, tokens, offsets


def initial_vectors(n: int, dims: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    w_in = (rng.random((n, dims)) - 0.5) / dims
    return w_in, np.zeros((n, dims))


def train_sgns(walks, config: SgnsConfig | None = None) -> EmbeddingMatrix:
    """Train node vectors on a walk corpus. ``epochs=0`` returns the initialisation."""
    config = config or SgnsConfig()
    config.validate()
    walks = [list(w) for w in walks]
    if not any(len(w) >= 2 for w in walks):
        raise DataError("walk corpus needs at least one walk of length >= 2")
    vocab, tokens, offsets = encode_walks(walks)
    counts = np.bincount(tokens, minlength=len(vocab)).astype(np.float64)
    cum = np.cumsum(counts ** NEG_POWER)
    w_in, w_out = initial_vectors(len(vocab), config.dimensions, config.seed)
    if config.epochs:
        _train_kernel(tokens, offsets, w_in, w_out, cum, config.window, config.negatives,
                      config.epochs, config.learning_rate, config.seed % (2 ** 32))
    if not np.all(np.isfinite(w_in)):
        raise DataError("SGNS training produced non-finite vectors")
    return EmbeddingMatrix(vocab, w_in)
