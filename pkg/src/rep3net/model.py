"""Multimodal fusion regressor and the per-fold training loop.

Descriptor and embedding rows are normalized outside the network with
statistics frozen on each fold's training split. The graph vector comes out
of the GCN block during the forward pass, so its normalization (each vector
standardized against its own components) sits inside the differentiated
path. The fused input is always concatenated in the fixed order
descriptors, embeddings, graph.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Optional, Sequence

import numpy as np

from .data import FoldSplit, TargetScaler
from .descriptors.filtering import (
    EPS,
    DescriptorPipeline,
    FeatureStats,
    fit_stats,
    normalize,
)
from .exceptions import DataError
from .gcn import GcnBlock
from .graphs import FEATURE_WIDTH
from .metrics import (
    FoldAggregate,
    MetricsReport,
    aggregate_folds,
    compute_report,
    mae,
    mse,
    rmse,
)
from .nn.core import (
    ACCUM_DTYPE,
    STORAGE_DTYPE,
    as_storage,
    cosine_lr,
    ensure_finite,
    mse_loss,
)
from .nn.layers import BatchNorm, Dropout, Linear, ReLU
from .nn.optim import Adam

# Rows per eval-mode forward; batch statistics are not involved in eval so
# the chunk size changes nothing but peak memory.
EVAL_CHUNK = 256

# Never drawn from: eval-mode dropout is the identity.
_EVAL_RNG = np.random.default_rng(0)


@dataclass
class FusionConfig:
    """Modality switches and training hyperparameters for one run."""

    use_descriptors: bool = True
    use_embeddings: bool = True
    use_graph: bool = True
    fc1_width: int = 512
    fc2_width: int = 128
    dropout_p: float = 0.2
    gcn_hidden: int = 128
    gcn_dropout: float = 0.1
    batch_size: int = 4
    lr: float = 5e-5
    weight_decay: float = 1e-5
    epochs: int = 20
    lr_min: float = 0.0
    seed: int = 42

    def __post_init__(self) -> None:
        if not (self.use_descriptors or self.use_embeddings or self.use_graph):
            raise DataError("at least one modality must be enabled")
        if self.batch_size < 2:
            raise DataError("batch_size must be >= 2 (batchnorm rejects 1-row batches)")
        if self.epochs < 1:
            raise DataError("epochs must be >= 1")
        for name in ("fc1_width", "fc2_width", "gcn_hidden"):
            if int(getattr(self, name)) < 1:
                raise DataError(f"{name} must be >= 1")
        if not self.lr > 0:
            raise DataError("lr must be positive")
        if self.weight_decay < 0:
            raise DataError("weight_decay must be non-negative")

    @property
    def label(self) -> str:
        """Compact modality tag: D descriptors, E embeddings, G graph."""
        parts = []
        if self.use_descriptors:
            parts.append("D")
        if self.use_embeddings:
            parts.append("E")
        if self.use_graph:
            parts.append("G")
        return "+".join(parts)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, payload: dict) -> "FusionConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise DataError(f"unknown config keys: {unknown}")
        return cls(**payload)


@dataclass
class ModalityData:
    """Aligned per-compound inputs; fold splits index into these rows."""

    smiles: list
    targets: np.ndarray
    descriptors: Optional[np.ndarray] = None
    embeddings: Optional[np.ndarray] = None
    graphs: Optional[list] = None

    def __post_init__(self) -> None:
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if self.targets.ndim != 1 or self.targets.size == 0:
            raise DataError("targets must be a non-empty 1-D array")
        n = self.targets.size
        if len(self.smiles) != n:
            raise DataError(f"{len(self.smiles)} smiles for {n} targets")
        if self.descriptors is not None:
            self.descriptors = np.asarray(self.descriptors, dtype=np.float64)
            if self.descriptors.ndim != 2 or self.descriptors.shape[0] != n:
                raise DataError("descriptor matrix must have one row per compound")
        if self.embeddings is not None:
            self.embeddings = np.asarray(self.embeddings, dtype=np.float64)
            if self.embeddings.ndim != 2 or self.embeddings.shape[0] != n:
                raise DataError("embedding matrix must have one row per compound")
        if self.graphs is not None and len(self.graphs) != n:
            raise DataError(f"{len(self.graphs)} graphs for {n} targets")

    @property
    def n(self) -> int:
        return int(self.targets.size)


def standardize_rows(rows):
    """Standardize each row against its own components.

    Returns (z, cache) where z = (x - mean(x)) / (std(x) + 1e-6) rowwise and
    the cache feeds standardize_rows_backward.
    """
    X = np.asarray(rows, dtype=ACCUM_DTYPE)
    if X.ndim != 2 or X.shape[1] < 2:
        raise DataError(f"standardize_rows needs 2-D rows with >= 2 columns, got {X.shape}")
    mu = X.mean(axis=1, keepdims=True)
    centered = X - mu
    sigma = np.sqrt((centered**2).mean(axis=1, keepdims=True))
    s = sigma + EPS
    Z = centered / s
    ensure_finite("standardize_rows", Z)
    return Z.astype(STORAGE_DTYPE), (centered, sigma, s)


def standardize_rows_backward(d_z, cache) -> np.ndarray:
    """Exact Jacobian of the per-row standardization.

    With u = x - mean(x) and s = sigma + 1e-6:
      dx = (g - mean(g)) / s  -  u * mean(g*u) / (s^2 * sigma)
    The sigma term is dropped for a constant row (sigma = 0 is a kink; the
    zero subgradient is used).
    """
    centered, sigma, s = cache
    G = np.asarray(d_z, dtype=ACCUM_DTYPE)
    if G.shape != centered.shape:
        raise DataError(f"gradient shape {G.shape} does not match cache {centered.shape}")
    mean_g = G.mean(axis=1, keepdims=True)
    mean_gu = (G * centered).mean(axis=1, keepdims=True)
    safe_sigma = np.where(sigma > 0.0, sigma, 1.0)
    coef = np.where(sigma > 0.0, mean_gu / (s * s * safe_sigma), 0.0)
    dX = (G - mean_g) / s - centered * coef
    ensure_finite("standardize_rows backward", dX)
    return dX.astype(STORAGE_DTYPE)


_GCN_PARAM_NAMES = (
    "gcn.W_conv",
    "gcn.b_conv",
    "gcn.W_res",
    "gcn.b_res",
    "gcn.W_gate",
    "gcn.b_gate",
)


class Rep3Net:
    """Fused regressor: concat -> FC/BN/ReLU/Dropout x2 -> FC -> scalar.

    The FC1 input width is the sum of the enabled modality widths; inputs
    for disabled modalities are ignored so one prepared dataset can serve
    every ablation row.
    """

    def __init__(
        self,
        config: FusionConfig,
        desc_width: int = 0,
        emb_width: int = 0,
        rng: Optional[np.random.Generator] = None,
    ):
        if rng is None:
            rng = np.random.default_rng(config.seed)
        if config.use_descriptors and desc_width < 1:
            raise DataError("descriptors enabled but desc_width < 1")
        if config.use_embeddings and emb_width < 1:
            raise DataError("embeddings enabled but emb_width < 1")
        self.config = config
        self.desc_width = int(desc_width) if config.use_descriptors else 0
        self.emb_width = int(emb_width) if config.use_embeddings else 0
        if config.use_graph:
            self.gcn = GcnBlock(FEATURE_WIDTH, config.gcn_hidden, config.gcn_dropout, rng)
            self.graph_width = self.gcn.out_width
        else:
            self.gcn = None
            self.graph_width = 0
        self.in_width = self.desc_width + self.emb_width + self.graph_width
        self.fc1 = Linear(self.in_width, config.fc1_width, rng)
        self.bn1 = BatchNorm(config.fc1_width)
        self.relu1 = ReLU()
        self.drop1 = Dropout(config.dropout_p)
        self.fc2 = Linear(config.fc1_width, config.fc2_width, rng)
        self.bn2 = BatchNorm(config.fc2_width)
        self.relu2 = ReLU()
        self.drop2 = Dropout(config.dropout_p)
        self.fc3 = Linear(config.fc2_width, 1, rng)
        self._graph_caches = None
        self._std_cache = None

    def params(self) -> list:
        out = list(self.gcn.params()) if self.gcn is not None else []
        for layer in (self.fc1, self.bn1, self.fc2, self.bn2, self.fc3):
            out.extend(layer.params())
        return out

    def zero_grad(self) -> None:
        for p in self.params():
            p.zero_grad()

    def state_arrays(self) -> dict:
        """Every persistent array (weights and running stats), by name."""
        state = {}
        if self.gcn is not None:
            for name, p in zip(_GCN_PARAM_NAMES, self.gcn.params()):
                state[name] = p.value.copy()
        for tag, lin in (("fc1", self.fc1), ("fc2", self.fc2), ("fc3", self.fc3)):
            state[f"{tag}.W"] = lin.W.value.copy()
            state[f"{tag}.b"] = lin.b.value.copy()
        for tag, bn in (("bn1", self.bn1), ("bn2", self.bn2)):
            state[f"{tag}.gamma"] = bn.gamma.value.copy()
            state[f"{tag}.beta"] = bn.beta.value.copy()
            state[f"{tag}.running_mean"] = bn.running_mean.copy()
            state[f"{tag}.running_var"] = bn.running_var.copy()
        return state

    def load_state_arrays(self, state: dict) -> None:
        current = self.state_arrays()
        if set(state) != set(current):
            missing = sorted(set(current) - set(state))
            extra = sorted(set(state) - set(current))
            raise DataError(f"state mismatch: missing {missing}, unexpected {extra}")

        def pull(name, like):
            arr = np.ascontiguousarray(np.asarray(state[name]), dtype=STORAGE_DTYPE)
            if arr.shape != like.shape:
                raise DataError(
                    f"{name}: stored shape {arr.shape} does not match model {like.shape}"
                )
            return arr

        if self.gcn is not None:
            for name, p in zip(_GCN_PARAM_NAMES, self.gcn.params()):
                p.value = pull(name, p.value)
        for tag, lin in (("fc1", self.fc1), ("fc2", self.fc2), ("fc3", self.fc3)):
            lin.W.value = pull(f"{tag}.W", lin.W.value)
            lin.b.value = pull(f"{tag}.b", lin.b.value)
        for tag, bn in (("bn1", self.bn1), ("bn2", self.bn2)):
            bn.gamma.value = pull(f"{tag}.gamma", bn.gamma.value)
            bn.beta.value = pull(f"{tag}.beta", bn.beta.value)
            bn.running_mean = pull(f"{tag}.running_mean", bn.running_mean)
            bn.running_var = pull(f"{tag}.running_var", bn.running_var)

    def forward(
        self,
        desc_rows,
        emb_rows,
        graphs,
        training: bool,
        rng: Optional[np.random.Generator] = None,
    ) -> np.ndarray:
        if training and rng is None:
            raise DataError("training forward needs an rng")
        if rng is None:
            rng = _EVAL_RNG
        parts = []
        if self.desc_width:
            if desc_rows is None:
                raise DataError("model expects descriptor rows")
            d = as_storage(desc_rows, "descriptor rows")
            if d.shape[1] != self.desc_width:
                raise DataError(
                    f"descriptor width {d.shape[1]} does not match model width {self.desc_width}"
                )
            parts.append(d)
        if self.emb_width:
            if emb_rows is None:
                raise DataError("model expects embedding rows")
            e = as_storage(emb_rows, "embedding rows")
            if e.shape[1] != self.emb_width:
                raise DataError(
                    f"embedding width {e.shape[1]} does not match model width {self.emb_width}"
                )
            parts.append(e)
        if self.gcn is not None:
            if not graphs:
                raise DataError("model expects molecular graphs")
            fg_rows, caches = [], []
            for graph in graphs:
                fg = self.gcn.forward(graph, training, rng)
                caches.append(self.gcn.take_cache())
                fg_rows.append(fg[0])
            Z, self._std_cache = standardize_rows(np.stack(fg_rows, axis=0))
            self._graph_caches = caches
            parts.append(Z)
        batch_sizes = {p.shape[0] for p in parts}
        if len(batch_sizes) != 1:
            raise DataError(f"modality row counts disagree: {sorted(batch_sizes)}")
        x = np.concatenate(parts, axis=1)
        h = self.fc1.forward(x)
        h = self.bn1.forward(h, training)
        h = self.relu1.forward(h)
        h = self.drop1.forward(h, training, rng)
        h = self.fc2.forward(h)
        h = self.bn2.forward(h, training)
        h = self.relu2.forward(h)
        h = self.drop2.forward(h, training, rng)
        return self.fc3.forward(h)

    def backward(self, d_out) -> np.ndarray:
        """Accumulate gradients; returns d(fused input) for testing."""
        dh = self.fc3.backward(d_out)
        dh = self.drop2.backward(dh)
        dh = self.relu2.backward(dh)
        dh = self.bn2.backward(dh)
        dh = self.fc2.backward(dh)
        dh = self.drop1.backward(dh)
        dh = self.relu1.backward(dh)
        dh = self.bn1.backward(dh)
        dx = self.fc1.backward(dh)
        if self.gcn is not None:
            if self._graph_caches is None:
                raise DataError("backward before forward")
            d_graph = dx[:, self.desc_width + self.emb_width :]
            dF = standardize_rows_backward(d_graph, self._std_cache)
            for i, cache in enumerate(self._graph_caches):
                self.gcn.backward(dF[i : i + 1, :], cache)
        return dx


@dataclass
class TrainHistory:
    """Per-epoch training curve; one entry per epoch, in order."""

    train_loss: list
    val_mse: list
    lr: list

    def __post_init__(self) -> None:
        if not (len(self.train_loss) == len(self.val_mse) == len(self.lr)):
            raise DataError("history columns must have equal lengths")

    @property
    def epochs(self) -> int:
        return len(self.train_loss)


@dataclass
class TrainedModel:
    """A trained network plus the preprocessing fitted on its fold."""

    net: Rep3Net
    scaler: TargetScaler
    config: FusionConfig
    best_epoch: int
    desc_stats: Optional[FeatureStats] = None
    desc_in_width: int = 0
    emb_stats: Optional[FeatureStats] = None
    emb_in_width: int = 0

    def _prepare(self, data: ModalityData, idx: np.ndarray):
        desc = emb = graphs = None
        if self.config.use_descriptors:
            if data.descriptors is None:
                raise DataError("model uses descriptors but data has none")
            if data.descriptors.shape[1] != self.desc_in_width:
                raise DataError(
                    f"descriptor schema width {data.descriptors.shape[1]} does not "
                    f"match the fitted width {self.desc_in_width}"
                )
            desc = normalize(data.descriptors[idx], self.desc_stats)
        if self.config.use_embeddings:
            if data.embeddings is None:
                raise DataError("model uses embeddings but data has none")
            if data.embeddings.shape[1] != self.emb_in_width:
                raise DataError(
                    f"embedding width {data.embeddings.shape[1]} does not match "
                    f"the fitted width {self.emb_in_width}"
                )
            emb = normalize(data.embeddings[idx], self.emb_stats)
        if self.config.use_graph:
            if data.graphs is None:
                raise DataError("model uses the graph modality but data has no graphs")
            graphs = [data.graphs[i] for i in idx]
        return desc, emb, graphs

    def predict_standardized(self, data: ModalityData, indices) -> np.ndarray:
        idx = _index_array(indices, data.n)
        desc, emb, graphs = self._prepare(data, idx)
        preds = np.empty(idx.size, dtype=np.float64)
        for start in range(0, idx.size, EVAL_CHUNK):
            stop = min(start + EVAL_CHUNK, idx.size)
            out = self.net.forward(
                desc[start:stop] if desc is not None else None,
                emb[start:stop] if emb is not None else None,
                graphs[start:stop] if graphs is not None else None,
                training=False,
            )
            preds[start:stop] = out[:, 0].astype(np.float64)
        return preds

    def predict_pic50(self, data: ModalityData, indices) -> np.ndarray:
        return self.scaler.invert(self.predict_standardized(data, indices))

    def evaluate(self, data: ModalityData, indices) -> MetricsReport:
        idx = _index_array(indices, data.n)
        y_std = self.scaler.apply(data.targets[idx])
        return compute_report(y_std, self.predict_standardized(data, idx))

    def natural_units_errors(self, data: ModalityData, indices) -> dict:
        """RMSE/MAE back on the pIC50 scale via scaler inversion."""
        idx = _index_array(indices, data.n)
        preds = self.predict_pic50(data, idx)
        y = data.targets[idx]
        return {"rmse": rmse(y, preds), "mae": mae(y, preds)}


def _index_array(indices, n: int) -> np.ndarray:
    idx = np.asarray(list(indices), dtype=int)
    if idx.size == 0:
        raise DataError("empty index set")
    if np.any(idx < 0) or np.any(idx >= n):
        raise DataError(f"indices out of range for {n} rows")
    return idx


def _epoch_batches(order: np.ndarray, batch_size: int) -> list:
    """Contiguous chunks; a trailing single row folds into the previous batch."""
    chunks = [order[i : i + batch_size] for i in range(0, order.size, batch_size)]
    if len(chunks) > 1 and chunks[-1].size == 1:
        chunks[-2] = np.concatenate([chunks[-2], chunks[-1]])
        chunks.pop()
    return chunks


def _eval_forward(net: Rep3Net, desc_all, emb_all, graphs, idx: np.ndarray) -> np.ndarray:
    preds = np.empty(idx.size, dtype=np.float64)
    for start in range(0, idx.size, EVAL_CHUNK):
        chunk = idx[start : start + EVAL_CHUNK]
        out = net.forward(
            desc_all[chunk] if desc_all is not None else None,
            emb_all[chunk] if emb_all is not None else None,
            [graphs[i] for i in chunk] if net.gcn is not None else None,
            training=False,
        )
        preds[start : start + chunk.size] = out[:, 0].astype(np.float64)
    return preds


def train_fold(
    data: ModalityData,
    split: FoldSplit,
    config: FusionConfig,
    *,
    variance_threshold: float = 0.01,
    correlation_threshold: float = 0.9,
):
    """Train one fold; returns (TrainedModel, TrainHistory).

    The RNG stream is derived from (seed, fold_index) and drives, in order,
    parameter initialization, then per-epoch shuffles interleaved with
    dropout draws. Validation MSE is computed in eval mode after every
    epoch and the parameters from the best epoch (ties to the earliest) are
    returned.
    """
    if len(split.train) < 2:
        raise DataError(f"fold {split.fold_index}: training split needs >= 2 rows")
    if not split.val:
        raise DataError(f"fold {split.fold_index}: validation split is empty")
    if not split.test:
        raise DataError(f"fold {split.fold_index}: test split is empty")
    train_idx = _index_array(split.train, data.n)
    val_idx = _index_array(split.val, data.n)
    _index_array(split.test, data.n)

    rng = np.random.default_rng([config.seed, split.fold_index])
    scaler = TargetScaler.fit(data.targets[train_idx])
    y_std = scaler.apply(data.targets)

    desc_all = emb_all = None
    desc_stats = emb_stats = None
    desc_in = emb_in = 0
    if config.use_descriptors:
        if data.descriptors is None:
            raise DataError("config enables descriptors but data has none")
        pipe = DescriptorPipeline(
            variance_threshold=variance_threshold,
            correlation_threshold=correlation_threshold,
        ).fit(data.descriptors[train_idx])
        desc_stats = pipe.stats_
        desc_in = pipe.n_features_in_
        desc_all = normalize(data.descriptors, desc_stats).astype(STORAGE_DTYPE)
    if config.use_embeddings:
        if data.embeddings is None:
            raise DataError("config enables embeddings but data has none")
        emb_stats = fit_stats(data.embeddings[train_idx])
        emb_in = data.embeddings.shape[1]
        emb_all = normalize(data.embeddings, emb_stats).astype(STORAGE_DTYPE)
    if config.use_graph and data.graphs is None:
        raise DataError("config enables the graph modality but data has no graphs")

    net = Rep3Net(
        config,
        desc_width=len(desc_stats.retained) if desc_stats is not None else 0,
        emb_width=emb_in,
        rng=rng,
    )
    adam = Adam(weight_decay=config.weight_decay)

    history_loss, history_val, history_lr = [], [], []
    best_val = np.inf
    best_epoch = -1
    best_state = None
    for epoch in range(config.epochs):
        lr_e = cosine_lr(epoch, config.lr, config.epochs, config.lr_min)
        order = train_idx[rng.permutation(train_idx.size)]
        sse = 0.0
        for batch in _epoch_batches(order, config.batch_size):
            net.zero_grad()
            pred = net.forward(
                desc_all[batch] if desc_all is not None else None,
                emb_all[batch] if emb_all is not None else None,
                [data.graphs[i] for i in batch] if config.use_graph else None,
                training=True,
                rng=rng,
            )
            loss, d_pred = mse_loss(pred, y_std[batch][:, None])
            net.backward(d_pred)
            adam.step(net.params(), lr_e)
            sse += loss * batch.size
        history_loss.append(sse / train_idx.size)
        val_pred = _eval_forward(net, desc_all, emb_all, data.graphs, val_idx)
        val_mse = mse(y_std[val_idx], val_pred)
        history_val.append(val_mse)
        history_lr.append(lr_e)
        if val_mse < best_val:
            best_val = val_mse
            best_epoch = epoch
            best_state = net.state_arrays()
    net.load_state_arrays(best_state)

    model = TrainedModel(
        net=net,
        scaler=scaler,
        config=config,
        best_epoch=best_epoch,
        desc_stats=desc_stats,
        desc_in_width=desc_in,
        emb_stats=emb_stats,
        emb_in_width=emb_in,
    )
    return model, TrainHistory(history_loss, history_val, history_lr)


def knn_baseline(data: ModalityData, split: FoldSplit, k: int = 5) -> MetricsReport:
    """k-nearest-neighbor regression on filtered, normalized descriptors.

    Euclidean distance, prediction = mean of the k nearest training
    targets (standardized scale, like the network's reports).
    """
    if data.descriptors is None:
        raise DataError("knn baseline needs descriptors")
    if k < 1:
        raise DataError("k must be >= 1")
    if not split.train or not split.test:
        raise DataError(f"fold {split.fold_index}: empty split")
    train_idx = _index_array(split.train, data.n)
    test_idx = _index_array(split.test, data.n)
    if k > train_idx.size:
        raise DataError(f"k={k} exceeds training size {train_idx.size}")
    pipe = DescriptorPipeline().fit(data.descriptors[train_idx])
    X_train = pipe.transform(data.descriptors[train_idx])
    X_test = pipe.transform(data.descriptors[test_idx])
    scaler = TargetScaler.fit(data.targets[train_idx])
    y_train = scaler.apply(data.targets[train_idx])
    y_test = scaler.apply(data.targets[test_idx])
    d2 = ((X_test[:, None, :] - X_train[None, :, :]) ** 2).sum(axis=2)
    neighbors = np.argsort(d2, axis=1, kind="stable")[:, :k]
    # average in index order so the sum does not depend on the distance
    # ordering (k = n must give the exact same constant for every row)
    preds = y_train[np.sort(neighbors, axis=1)].mean(axis=1)
    return compute_report(y_test, preds)


ABLATION_GRID = (
    ("D", (True, False, False)),
    ("E", (False, True, False)),
    ("G", (False, False, True)),
    ("D+E", (True, True, False)),
    ("E+G", (False, True, True)),
    ("D+G", (True, False, True)),
    ("D+E+G", (True, True, True)),
)


# External benchmark reference: mean five-fold test MSE per modality subset
# on the ChEMBL PARP1 setting this architecture was designed around. Used
# only to flag ordering disagreements in ablation reports; no numeric
# tolerance is promised (different snapshots/featurizers shift the values).
PARP1_REFERENCE_MSE = {
    "D": 1.06,
    "E": 0.94,
    "G": 0.90,
    "D+E": 0.91,
    "E+G": 0.89,
    "D+G": 0.89,
    "D+E+G": 0.84,
}


@dataclass
class AblationRow:
    label: str
    config: FusionConfig
    fold_reports: list
    aggregate: FoldAggregate


def ablate(
    data: ModalityData,
    splits: Sequence[FoldSplit],
    config: FusionConfig,
    *,
    variance_threshold: float = 0.01,
    correlation_threshold: float = 0.9,
) -> list:
    """Train and evaluate all 7 modality subsets on identical splits/seeds."""
    if data.descriptors is None or data.embeddings is None or data.graphs is None:
        raise DataError("ablation needs all three modalities present")
    rows = []
    for label, (use_d, use_e, use_g) in ABLATION_GRID:
        cfg = replace(
            config,
            use_descriptors=use_d,
            use_embeddings=use_e,
            use_graph=use_g,
        )
        reports = []
        for split in splits:
            model, _ = train_fold(
                data,
                split,
                cfg,
                variance_threshold=variance_threshold,
                correlation_threshold=correlation_threshold,
            )
            reports.append(model.evaluate(data, split.test))
        rows.append(
            AblationRow(
                label=label,
                config=cfg,
                fold_reports=reports,
                aggregate=aggregate_folds(reports),
            )
        )
    return rows


def ablation_ordering_flags(rows: Sequence[AblationRow],
                            reference: Optional[dict] = None) -> list:
    """Pairwise mean-MSE order disagreements against a reference grid.

    A pair is flagged when both the observed and reference differences are
    strict and point in opposite directions; ties on either side are left
    alone. Returns human-readable lines, empty when the orderings agree.
    """
    if reference is None:
        reference = PARP1_REFERENCE_MSE
    missing = [row.label for row in rows if row.label not in reference]
    if missing:
        raise DataError(f"reference grid lacks rows {missing}")
    flags = []
    for i, a in enumerate(rows):
        for b in rows[i + 1:]:
            obs = a.aggregate.mean["mse"] - b.aggregate.mean["mse"]
            ref = reference[a.label] - reference[b.label]
            if obs * ref < 0:
                flags.append(
                    f"{a.label} vs {b.label}: observed "
                    f"{a.aggregate.mean['mse']:.4f} vs "
                    f"{b.aggregate.mean['mse']:.4f} reverses the reference "
                    f"order ({reference[a.label]:.2f} vs "
                    f"{reference[b.label]:.2f})"
                )
    return flags


def format_ablation_table(rows: Sequence[AblationRow]) -> str:
    """Fixed-width table: one row per modality subset, mean ± CI half-width."""
    names = ("mse", "rmse", "mae", "r2", "pearson", "spearman")
    header = f"{'features':<9}" + "".join(f"{name:>18}" for name in names)
    lines = [header]
    for row in rows:
        cells = "".join(
            f"{row.aggregate.mean[name]:>9.4f} ± {row.aggregate.ci_half_width[name]:<6.4f}"
            for name in names
        )
        lines.append(f"{row.label:<9}" + cells)
    return "\n".join(lines)
