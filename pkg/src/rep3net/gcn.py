"""Graph convolution block: symmetric-normalized message passing with a
residual projection of the raw node features, dropout, and a readout that
concatenates a sigmoid-gated weighted sum with a per-channel max.

The convolution has no self-loop; self-information travels through the
residual branch. Output width is 2 * hidden.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DataError
from .graphs import FEATURE_WIDTH, MolecularGraph
from .nn.core import (
    ACCUM_DTYPE,
    STORAGE_DTYPE,
    ParamState,
    dropout,
    dropout_backward,
    ensure_finite,
)
from .nn.layers import uniform_init


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


def normalized_adjacency(graph: MolecularGraph) -> np.ndarray:
    """Dense D^-1/2 A D^-1/2 without self-loops."""
    n = graph.n
    A = np.zeros((n, n), dtype=ACCUM_DTYPE)
    for u, v in graph.adjacency:
        w = 1.0 / np.sqrt(float(graph.degrees[u]) * float(graph.degrees[v]))
        A[u, v] = w
        A[v, u] = w
    return A


class GcnBlock:
    def __init__(
        self,
        in_width: int = FEATURE_WIDTH,
        hidden: int = 128,
        dropout_p: float = 0.1,
        rng: np.random.Generator = None,
    ):
        if rng is None:
            rng = np.random.default_rng()
        if not 0.0 <= dropout_p < 1.0:
            raise DataError(f"dropout_p must be in [0, 1), got {dropout_p}")
        self.in_width = in_width
        self.hidden = hidden
        self.dropout_p = dropout_p
        self.W_conv = ParamState(uniform_init(rng, in_width, hidden))
        self.b_conv = ParamState(uniform_init(rng, in_width, hidden)[:1, :])
        self.W_res = ParamState(uniform_init(rng, in_width, hidden))
        self.b_res = ParamState(uniform_init(rng, in_width, hidden)[:1, :])
        self.W_gate = ParamState(uniform_init(rng, hidden, 1))
        self.b_gate = ParamState(uniform_init(rng, hidden, 1)[:1, :])
        self._cache = None

    @property
    def out_width(self) -> int:
        return 2 * self.hidden

    def params(self) -> list:
        return [self.W_conv, self.b_conv, self.W_res, self.b_res,
                self.W_gate, self.b_gate]

    def graph_conv(self, graph: MolecularGraph, H_in: np.ndarray) -> np.ndarray:
        """out_v = b + W . sum_{u in N(v)} h_u / sqrt(d_u d_v)."""
        if graph.n == 0:
            raise DataError("graph has no nodes")
        H_in = np.asarray(H_in, dtype=STORAGE_DTYPE)
        if H_in.shape != (graph.n, self.in_width):
            raise DataError(
                f"node features {H_in.shape} do not match "
                f"({graph.n}, {self.in_width})"
            )
        A = normalized_adjacency(graph)
        M = A @ H_in.astype(ACCUM_DTYPE)
        out = M @ self.W_conv.value.astype(ACCUM_DTYPE) + self.b_conv.value.astype(
            ACCUM_DTYPE
        )
        ensure_finite("graph_conv", out)
        return out.astype(STORAGE_DTYPE)

    def forward(
        self,
        graph: MolecularGraph,
        training: bool,
        rng: np.random.Generator,
    ) -> np.ndarray:
        """Residual block and readout; returns the 1 x 2H graph vector."""
        if graph.n == 0:
            raise DataError("graph has no nodes")
        X = np.asarray(graph.node_features, dtype=STORAGE_DTYPE)
        A = normalized_adjacency(graph)
        X64 = X.astype(ACCUM_DTYPE)
        M = A @ X64
        conv = M @ self.W_conv.value.astype(ACCUM_DTYPE) + self.b_conv.value.astype(
            ACCUM_DTYPE
        )
        res_pre = X64 @ self.W_res.value.astype(ACCUM_DTYPE) + self.b_res.value.astype(
            ACCUM_DTYPE
        )
        F_gc = (conv + np.maximum(res_pre, 0.0)).astype(STORAGE_DTYPE)
        D, mask = dropout(F_gc, self.dropout_p, rng, training)
        D64 = D.astype(ACCUM_DTYPE)
        logits = D64 @ self.W_gate.value.astype(ACCUM_DTYPE) + self.b_gate.value.astype(
            ACCUM_DTYPE
        )
        gates = _sigmoid(logits)  # n x 1
        weighted = (gates * D64).sum(axis=0, keepdims=True)
        argmax = np.argmax(D, axis=0)  # first occurrence wins ties
        maxpool = D64[argmax, np.arange(self.hidden)][None, :]
        f_g = np.concatenate([weighted, maxpool], axis=1)
        ensure_finite("gcn forward", f_g)
        self._cache = (X64, A, M, res_pre, mask, D64, gates, argmax)
        return f_g.astype(STORAGE_DTYPE)

    def take_cache(self):
        """Detach the forward cache so batched callers can replay backward."""
        cache, self._cache = self._cache, None
        return cache

    def backward(self, d_fg, cache=None) -> np.ndarray:
        """Accumulate parameter gradients; returns d(node_features)."""
        if cache is None:
            cache = self._cache
        if cache is None:
            raise DataError("backward before forward")
        X64, A, M, res_pre, mask, D64, gates, argmax = cache
        H = self.hidden
        d_fg = np.asarray(d_fg, dtype=ACCUM_DTYPE).reshape(1, 2 * H)
        dw, dm = d_fg[:, :H], d_fg[:, H:]

        # max pool: single argmax node per channel
        dD = np.zeros_like(D64)
        dD[argmax, np.arange(H)] += dm[0]
        # gated weighted sum: f = sum_v sigma(logit_v) * D_v
        dD += gates * dw
        dgates = (D64 * dw).sum(axis=1, keepdims=True)
        dlogits = dgates * gates * (1.0 - gates)
        self.W_gate.accumulate(D64.T @ dlogits)
        self.b_gate.accumulate(dlogits.sum(axis=0, keepdims=True))
        dD += dlogits @ self.W_gate.value.astype(ACCUM_DTYPE).T

        dF = dropout_backward(dD.astype(STORAGE_DTYPE), mask).astype(ACCUM_DTYPE)

        # conv branch
        self.W_conv.accumulate(M.T @ dF)
        self.b_conv.accumulate(dF.sum(axis=0, keepdims=True))
        dM = dF @ self.W_conv.value.astype(ACCUM_DTYPE).T
        dX = A.T @ dM
        # residual branch through the ReLU
        dres = dF * (res_pre > 0)
        self.W_res.accumulate(X64.T @ dres)
        self.b_res.accumulate(dres.sum(axis=0, keepdims=True))
        dX += dres @ self.W_res.value.astype(ACCUM_DTYPE).T
        return dX.astype(STORAGE_DTYPE)
