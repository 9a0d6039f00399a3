"""Fused model tests.

The gradient check rebuilds the whole forward pass (GCN blocks, per-row
standardization, FC/BN/ReLU stack, MSE loss) as a float64 shadow and
compares the implementation's analytic gradients against central finite
differences of the shadow for every parameter element, dropout disabled.
"""

import numpy as np
import pytest

from rep3net.chem import parse_smiles
from rep3net.data import FoldSplit, TargetScaler, make_cv_splits
from rep3net.descriptors import descriptor_matrix
from rep3net.exceptions import DataError
from rep3net.gcn import normalized_adjacency
from rep3net.graphs import build_graph
from rep3net.metrics import mse, rmse
from rep3net.model import (
    ABLATION_GRID,
    AblationRow,
    FusionConfig,
    ModalityData,
    Rep3Net,
    TrainedModel,
    TrainHistory,
    _epoch_batches,
    ablate,
    ablation_ordering_flags,
    format_ablation_table,
    knn_baseline,
    standardize_rows,
    standardize_rows_backward,
    train_fold,
)
from rep3net.nn.core import cosine_lr, mse_loss

SMILES_24 = [
    "C", "CC", "CCC", "CCCC", "CCO", "CCN", "c1ccccc1", "Cc1ccccc1",
    "CCOC", "CC(C)C", "CC(=O)O", "CCS", "C1CC1", "C1CCC1", "C1CCCC1",
    "CCCl", "CCBr", "CC#N", "CC=C", "OCCO", "NCCN", "CC(C)O", "CCCO",
    "c1ccncc1",
]


def tiny_data(n_emb=8, seed=7):
    rng = np.random.default_rng(seed)
    mols = [parse_smiles(s) for s in SMILES_24]
    return ModalityData(
        smiles=list(SMILES_24),
        targets=rng.normal(6.0, 1.0, size=len(SMILES_24)),
        descriptors=descriptor_matrix(mols),
        embeddings=rng.normal(size=(len(SMILES_24), n_emb)),
        graphs=[build_graph(m) for m in mols],
    )


def tiny_config(**kw):
    base = dict(fc1_width=16, fc2_width=8, gcn_hidden=4, epochs=3, seed=3)
    base.update(kw)
    return FusionConfig(**base)


# ---------------------------------------------------------------------------
# per-row standardization


def test_standardize_rows_moments():
    rng = np.random.default_rng(0)
    X = rng.normal(2.0, 3.0, size=(5, 64))
    Z, _ = standardize_rows(X)
    assert np.allclose(Z.mean(axis=1), 0.0, atol=1e-6)
    # population std of the output is sigma/(sigma + 1e-6), just below 1
    assert np.all(Z.std(axis=1) <= 1.0 + 1e-6)
    assert np.allclose(Z.std(axis=1), 1.0, atol=1e-4)


def test_standardize_rows_constant_row_guard():
    Z, cache = standardize_rows(np.full((2, 8), 3.5))
    assert np.array_equal(Z, np.zeros((2, 8), dtype=np.float32))
    dX = standardize_rows_backward(np.ones((2, 8)), cache)
    assert np.all(np.isfinite(dX))


def test_standardize_rows_rejects_short_rows():
    with pytest.raises(DataError):
        standardize_rows(np.ones((3, 1)))


def test_standardize_rows_backward_matches_fd():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(3, 10))
    s = rng.normal(size=(3, 10))

    def loss(X64):
        mu = X64.mean(axis=1, keepdims=True)
        sd = X64.std(axis=1, keepdims=True)
        return float(np.sum(s * (X64 - mu) / (sd + 1e-6)))

    _, cache = standardize_rows(X)
    analytic = standardize_rows_backward(s, cache)
    eps = 1e-5
    fd = np.zeros_like(X)
    for i in range(X.shape[0]):
        for j in range(X.shape[1]):
            hi = X.copy(); hi[i, j] += eps
            lo = X.copy(); lo[i, j] -= eps
            fd[i, j] = (loss(hi) - loss(lo)) / (2 * eps)
    scale = max(np.max(np.abs(fd)), 1e-3)
    assert np.max(np.abs(analytic - fd)) / scale < 1e-4


# ---------------------------------------------------------------------------
# config and data containers


def test_config_requires_a_modality():
    with pytest.raises(DataError):
        FusionConfig(use_descriptors=False, use_embeddings=False, use_graph=False)


def test_config_validation():
    with pytest.raises(DataError):
        FusionConfig(batch_size=1)
    with pytest.raises(DataError):
        FusionConfig(epochs=0)
    with pytest.raises(DataError):
        FusionConfig(lr=0.0)
    with pytest.raises(DataError):
        FusionConfig(weight_decay=-1e-5)


def test_config_label_and_dict_round_trip():
    cfg = FusionConfig(use_embeddings=False)
    assert cfg.label == "D+G"
    assert FusionConfig().label == "D+E+G"
    again = FusionConfig.from_dict(cfg.as_dict())
    assert again == cfg
    with pytest.raises(DataError):
        FusionConfig.from_dict({"bogus": 1})


def test_modality_data_validation():
    with pytest.raises(DataError):
        ModalityData(smiles=["C"], targets=[1.0, 2.0])
    with pytest.raises(DataError):
        ModalityData(smiles=["C"], targets=[1.0], descriptors=np.ones((2, 3)))
    with pytest.raises(DataError):
        ModalityData(smiles=["C"], targets=[1.0], graphs=[])


# ---------------------------------------------------------------------------
# network construction and forward


def test_graph_only_input_width_is_2h():
    cfg = FusionConfig(use_descriptors=False, use_embeddings=False)
    net = Rep3Net(cfg, rng=np.random.default_rng(0))
    assert net.in_width == 2 * cfg.gcn_hidden == 256
    assert net.fc1.W.shape == (256, cfg.fc1_width)


def test_enabled_modality_needs_width():
    with pytest.raises(DataError):
        Rep3Net(tiny_config(), desc_width=0, emb_width=8, rng=np.random.default_rng(0))


def test_input_width_is_sum_of_modalities():
    net = Rep3Net(tiny_config(), desc_width=5, emb_width=6, rng=np.random.default_rng(0))
    assert net.in_width == 5 + 6 + 2 * 4


def test_eval_forward_deterministic_and_width_checked():
    rng = np.random.default_rng(2)
    net = Rep3Net(tiny_config(), desc_width=5, emb_width=6, rng=rng)
    graphs = [build_graph(parse_smiles(s)) for s in ("CCO", "c1ccccc1", "CC(=O)N")]
    desc = rng.normal(size=(3, 5))
    emb = rng.normal(size=(3, 6))
    out1 = net.forward(desc, emb, graphs, training=False)
    out2 = net.forward(desc, emb, graphs, training=False)
    assert np.array_equal(out1, out2)
    assert out1.shape == (3, 1)
    with pytest.raises(DataError):
        net.forward(rng.normal(size=(3, 4)), emb, graphs, training=False)
    with pytest.raises(DataError):
        net.forward(desc, rng.normal(size=(3, 7)), graphs, training=False)
    with pytest.raises(DataError):
        net.forward(desc, emb, None, training=False)
    with pytest.raises(DataError):
        net.forward(desc, emb[:2], graphs, training=False)


def test_training_forward_needs_rng():
    net = Rep3Net(
        FusionConfig(use_embeddings=False, use_graph=False, fc1_width=8, fc2_width=4),
        desc_width=5,
        rng=np.random.default_rng(0),
    )
    with pytest.raises(DataError):
        net.forward(np.zeros((4, 5)), None, None, training=True)


def test_state_arrays_round_trip_and_mismatch():
    net = Rep3Net(tiny_config(), desc_width=5, emb_width=6, rng=np.random.default_rng(3))
    state = net.state_arrays()
    other = Rep3Net(tiny_config(), desc_width=5, emb_width=6, rng=np.random.default_rng(9))
    other.load_state_arrays(state)
    for name, arr in other.state_arrays().items():
        assert np.array_equal(arr, state[name]), name
    graph_only = Rep3Net(
        FusionConfig(use_descriptors=False, use_embeddings=False, fc1_width=16,
                     fc2_width=8, gcn_hidden=4),
        rng=np.random.default_rng(0),
    )
    with pytest.raises(DataError):
        graph_only.load_state_arrays(state)


# ---------------------------------------------------------------------------
# gradient check of the full fused forward (the oracle is a float64 shadow)


def shadow_bn_train(x, gamma, beta, eps=1e-5):
    m = x.mean(axis=0, keepdims=True)
    v = x.var(axis=0, keepdims=True)
    return gamma * (x - m) / np.sqrt(v + eps) + beta


def shadow_gcn(X, A, Wc, bc, Wr, br, Wg, bg):
    F = A @ X @ Wc + bc + np.maximum(X @ Wr + br, 0.0)
    g = 1.0 / (1.0 + np.exp(-(F @ Wg + bg)))
    return np.concatenate([(g * F).sum(axis=0), F.max(axis=0)])


def shadow_loss(desc, emb, adjs, feats, targets, arrays):
    (Wc, bc, Wr, br, Wg, bg, W1, b1, g1, be1, W2, b2, g2, be2, W3, b3) = arrays
    rows = [shadow_gcn(X, A, Wc, bc, Wr, br, Wg, bg) for X, A in zip(feats, adjs)]
    F = np.stack(rows, axis=0)
    mu = F.mean(axis=1, keepdims=True)
    sd = F.std(axis=1, keepdims=True)
    Z = (F - mu) / (sd + 1e-6)
    x = np.concatenate([desc, emb, Z], axis=1)
    h = shadow_bn_train(x @ W1 + b1, g1, be1)
    h = np.maximum(h, 0.0)
    h = shadow_bn_train(h @ W2 + b2, g2, be2)
    h = np.maximum(h, 0.0)
    pred = h @ W3 + b3
    return float(np.mean((pred.ravel() - targets) ** 2))


def test_fused_gradient_matches_fd_on_4_compound_batch():
    rng = np.random.default_rng(11)
    cfg = FusionConfig(fc1_width=8, fc2_width=4, gcn_hidden=3,
                       dropout_p=0.0, gcn_dropout=0.0)
    net = Rep3Net(cfg, desc_width=5, emb_width=6, rng=rng)
    graphs = [build_graph(parse_smiles(s))
              for s in ("CCO", "c1ccccc1", "CC(=O)N", "C1CC1")]
    desc = rng.normal(size=(4, 5))
    emb = rng.normal(size=(4, 6))
    targets = rng.normal(size=4)

    net.zero_grad()
    pred = net.forward(desc, emb, graphs, training=True, rng=rng)
    _, d_pred = mse_loss(pred, targets[:, None])
    net.backward(d_pred)

    params = (net.gcn.params()
              + net.fc1.params() + net.bn1.params()
              + net.fc2.params() + net.bn2.params()
              + net.fc3.params())
    arrays = [p.value.astype(np.float64) for p in params]
    adjs = [normalized_adjacency(g) for g in graphs]
    feats = [np.asarray(g.node_features, dtype=np.float64) for g in graphs]
    desc32 = desc.astype(np.float32).astype(np.float64)
    emb32 = emb.astype(np.float32).astype(np.float64)

    eps = 1e-3
    for pi, p in enumerate(params):
        fd = np.zeros_like(arrays[pi])
        it = np.nditer(fd, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            orig = arrays[pi][i]
            arrays[pi][i] = orig + eps
            hi = shadow_loss(desc32, emb32, adjs, feats, targets, arrays)
            arrays[pi][i] = orig - eps
            lo = shadow_loss(desc32, emb32, adjs, feats, targets, arrays)
            arrays[pi][i] = orig
            fd[i] = (hi - lo) / (2 * eps)
        scale = max(np.max(np.abs(fd)), 1e-3)
        err = np.max(np.abs(p.grad.astype(np.float64) - fd)) / scale
        assert err < 1e-4, f"param {pi}: rel err {err:.2e}"


# ---------------------------------------------------------------------------
# training loop


def test_epoch_batches_merge_rule():
    assert [b.size for b in _epoch_batches(np.arange(8), 4)] == [4, 4]
    assert [b.size for b in _epoch_batches(np.arange(9), 4)] == [4, 5]
    assert [b.size for b in _epoch_batches(np.arange(10), 4)] == [4, 4, 2]
    assert [b.size for b in _epoch_batches(np.arange(11), 4)] == [4, 4, 3]
    assert [b.size for b in _epoch_batches(np.arange(3), 4)] == [3]
    merged = _epoch_batches(np.arange(5), 4)
    assert [b.size for b in merged] == [5]
    assert np.array_equal(np.sort(np.concatenate(merged)), np.arange(5))


def test_train_fold_deterministic():
    data = tiny_data()
    split = make_cv_splits(data.n, seed=1, k=4)[0]
    cfg = tiny_config()
    model_a, hist_a = train_fold(data, split, cfg)
    model_b, hist_b = train_fold(data, split, cfg)
    assert hist_a == hist_b
    pred_a = model_a.predict_standardized(data, split.test)
    pred_b = model_b.predict_standardized(data, split.test)
    assert np.array_equal(pred_a, pred_b)
    for name, arr in model_a.net.state_arrays().items():
        assert np.array_equal(arr, model_b.net.state_arrays()[name]), name


def test_train_fold_history_contract():
    data = tiny_data()
    split = make_cv_splits(data.n, seed=1, k=4)[1]
    cfg = tiny_config(epochs=5)
    model, hist = train_fold(data, split, cfg)
    assert hist.epochs == 5
    assert hist.lr == [cosine_lr(e, cfg.lr, cfg.epochs) for e in range(5)]
    assert model.best_epoch == int(np.argmin(hist.val_mse))
    assert all(v >= 0 for v in hist.train_loss)


def test_train_fold_best_epoch_params_are_restored():
    data = tiny_data()
    split = make_cv_splits(data.n, seed=1, k=4)[0]
    cfg = tiny_config(epochs=4, lr=5e-3)
    model, hist = train_fold(data, split, cfg)
    y_std = model.scaler.apply(data.targets[np.asarray(split.val)])
    preds = model.predict_standardized(data, split.val)
    assert mse(y_std, preds) == pytest.approx(min(hist.val_mse), rel=1e-6)


def test_train_fold_split_errors():
    data = tiny_data()
    cfg = tiny_config()
    with pytest.raises(DataError):
        train_fold(data, FoldSplit(0, [0], [1], [2]), cfg)
    with pytest.raises(DataError):
        train_fold(data, FoldSplit(0, [0, 1, 2, 3], [], [4]), cfg)
    with pytest.raises(DataError):
        train_fold(data, FoldSplit(0, [0, 1, 2, 3], [4], []), cfg)
    with pytest.raises(DataError):
        train_fold(data, FoldSplit(0, [0, 1, 2, 99], [4], [5]), cfg)


def test_train_fold_missing_modality_errors():
    data = tiny_data()
    no_emb = ModalityData(smiles=data.smiles, targets=data.targets,
                          descriptors=data.descriptors, graphs=data.graphs)
    split = make_cv_splits(data.n, seed=1, k=4)[0]
    with pytest.raises(DataError):
        train_fold(no_emb, split, tiny_config())
    model, _ = train_fold(no_emb, split, tiny_config(use_embeddings=False))
    assert model.net.emb_width == 0


def test_history_length_validation():
    with pytest.raises(DataError):
        TrainHistory([1.0], [1.0, 2.0], [0.1])


# ---------------------------------------------------------------------------
# evaluation


class PerfectStub(TrainedModel):
    def predict_standardized(self, data, indices):
        idx = np.asarray(list(indices), dtype=int)
        return self.scaler.apply(data.targets[idx])


class ConstantStub(TrainedModel):
    def predict_standardized(self, data, indices):
        return np.zeros(len(list(indices)))


def _stub(cls, data):
    scaler = TargetScaler.fit(data.targets)
    return cls(net=None, scaler=scaler, config=FusionConfig(), best_epoch=0)


def test_evaluate_perfect_stub():
    data = tiny_data()
    report = _stub(PerfectStub, data).evaluate(data, range(data.n))
    assert report.mse == pytest.approx(0.0, abs=1e-15)
    assert report.r2 == pytest.approx(1.0, abs=1e-12)
    assert report.flags == []


def test_evaluate_constant_stub():
    data = tiny_data()
    report = _stub(ConstantStub, data).evaluate(data, range(data.n))
    assert report.r2 <= 0.0
    assert "pearson_degenerate" in report.flags


def test_report_self_consistency_from_saved_predictions():
    data = tiny_data()
    split = make_cv_splits(data.n, seed=1, k=4)[2]
    model, _ = train_fold(data, split, tiny_config())
    report = model.evaluate(data, split.test)
    preds = model.predict_standardized(data, split.test)
    y_std = model.scaler.apply(data.targets[np.asarray(split.test)])
    assert mse(y_std, preds) == report.mse
    assert rmse(y_std, preds) == report.rmse


def test_natural_units_errors_scale_with_target_std():
    data = tiny_data()
    split = make_cv_splits(data.n, seed=1, k=4)[0]
    model, _ = train_fold(data, split, tiny_config())
    report = model.evaluate(data, split.test)
    nat = model.natural_units_errors(data, split.test)
    assert nat["rmse"] == pytest.approx(report.rmse * model.scaler.std, rel=1e-9)
    assert nat["mae"] == pytest.approx(report.mae * model.scaler.std, rel=1e-9)


# ---------------------------------------------------------------------------
# knn baseline


def random_descriptor_data(n, seed=5, width=12):
    rng = np.random.default_rng(seed)
    return ModalityData(
        smiles=[f"m{i}" for i in range(n)],
        targets=rng.normal(size=n),
        descriptors=rng.normal(size=(n, width)),
    )


def test_knn_matches_brute_force_oracle():
    data = random_descriptor_data(116, seed=5)
    split = FoldSplit(0, list(range(60)), list(range(110, 116)),
                      list(range(60, 110)))
    report = knn_baseline(data, split, k=5)

    from rep3net.descriptors import DescriptorPipeline

    train_idx = np.asarray(split.train)
    test_idx = np.asarray(split.test)
    pipe = DescriptorPipeline().fit(data.descriptors[train_idx])
    Xtr = pipe.transform(data.descriptors[train_idx])
    Xte = pipe.transform(data.descriptors[test_idx])
    scaler = TargetScaler.fit(data.targets[train_idx])
    ytr = scaler.apply(data.targets[train_idx])
    yte = scaler.apply(data.targets[test_idx])
    preds = np.empty(test_idx.size)
    for i, row in enumerate(Xte):
        dist = np.sqrt(((Xtr - row) ** 2).sum(axis=1))
        nearest = np.argsort(dist, kind="stable")[:5]
        preds[i] = ytr[nearest].mean()
    assert report.mse == pytest.approx(mse(yte, preds), rel=1e-12)


def test_knn_k1_returns_duplicate_target():
    data = random_descriptor_data(30, seed=8)
    data.descriptors[25] = data.descriptors[3]
    train = list(range(20))
    split = FoldSplit(0, train, [20, 21], [25, 26])
    report = knn_baseline(data, split, k=1)

    from rep3net.descriptors import DescriptorPipeline

    pipe = DescriptorPipeline().fit(data.descriptors[np.asarray(train)])
    Xtr = pipe.transform(data.descriptors[np.asarray(train)])
    Xte = pipe.transform(data.descriptors[[25, 26]])
    scaler = TargetScaler.fit(data.targets[np.asarray(train)])
    ytr = scaler.apply(data.targets[np.asarray(train)])
    yte = scaler.apply(data.targets[[25, 26]])
    preds = np.array([
        ytr[np.argsort(((Xtr - row) ** 2).sum(axis=1), kind="stable")[0]]
        for row in Xte
    ])
    # row 25 is a bit-exact copy of train row 3, so its nearest neighbor
    # prediction is exactly that row's target
    assert preds[0] == ytr[3]
    assert report.mse == pytest.approx(mse(yte, preds), rel=1e-12)


def test_knn_k_equals_n_predicts_train_mean():
    data = random_descriptor_data(40, seed=9)
    split = FoldSplit(0, list(range(30)), [30, 31], list(range(32, 40)))
    report = knn_baseline(data, split, k=30)
    scaler = TargetScaler.fit(data.targets[np.arange(30)])
    ytr = scaler.apply(data.targets[np.arange(30)])
    yte = scaler.apply(data.targets[np.arange(32, 40)])
    constant = np.full(8, ytr.mean())
    assert report.mse == pytest.approx(mse(yte, constant), rel=1e-12)
    assert "pearson_degenerate" in report.flags


def test_knn_errors():
    data = random_descriptor_data(20, seed=10)
    split = FoldSplit(0, list(range(10)), [10, 11], list(range(12, 20)))
    with pytest.raises(DataError):
        knn_baseline(data, split, k=11)
    with pytest.raises(DataError):
        knn_baseline(data, split, k=0)
    no_desc = ModalityData(smiles=data.smiles, targets=data.targets,
                           embeddings=np.ones((20, 4)))
    with pytest.raises(DataError):
        knn_baseline(no_desc, split, k=3)


# ---------------------------------------------------------------------------
# ablation grid


def test_ablate_runs_all_seven_rows():
    data = tiny_data()
    splits = make_cv_splits(data.n, seed=1, k=4)[:2]
    rows = ablate(data, splits, tiny_config(epochs=2))
    assert [r.label for r in rows] == [label for label, _ in ABLATION_GRID]
    for row, (label, flags) in zip(rows, ABLATION_GRID):
        assert row.config.label == label
        assert (row.config.use_descriptors, row.config.use_embeddings,
                row.config.use_graph) == flags
        assert len(row.fold_reports) == 2
        assert row.aggregate.k == 2
        assert set(row.aggregate.mean) == {
            "mse", "rmse", "mae", "r2", "pearson", "spearman"}
    table = format_ablation_table(rows)
    lines = table.splitlines()
    assert len(lines) == 8
    assert lines[1].startswith("D ")
    assert lines[-1].startswith("D+E+G")


def test_ablate_needs_all_modalities():
    data = tiny_data()
    partial = ModalityData(smiles=data.smiles, targets=data.targets,
                           descriptors=data.descriptors, graphs=data.graphs)
    splits = make_cv_splits(data.n, seed=1, k=4)[:2]
    with pytest.raises(DataError):
        ablate(partial, splits, tiny_config())


def _stub_rows(mse_by_label):
    from rep3net.metrics import FoldAggregate

    rows = []
    for label, value in mse_by_label.items():
        agg = FoldAggregate(k=5, mean={"mse": value}, ci_half_width={"mse": 0.0})
        rows.append(AblationRow(label=label, config=tiny_config(),
                                fold_reports=[], aggregate=agg))
    return rows


def test_ordering_flags_agreement_and_reversal():
    # matches the reference order exactly: no flags
    agreeing = _stub_rows({"D": 1.2, "E": 1.0, "G": 0.95, "D+E": 0.97,
                           "E+G": 0.9, "D+G": 0.91, "D+E+G": 0.8})
    assert ablation_ordering_flags(agreeing) == []

    # full fusion worse than everything reverses six reference pairs
    upset = _stub_rows({"D": 1.2, "E": 1.0, "G": 0.95, "D+E": 0.97,
                        "E+G": 0.9, "D+G": 0.91, "D+E+G": 2.0})
    flags = ablation_ordering_flags(upset)
    assert len(flags) == 6
    assert all("D+E+G" in f and "reverses" in f for f in flags)


def test_ordering_flags_ignore_reference_ties():
    # E+G and D+G share a reference value; either observed order is fine
    rows = _stub_rows({"E+G": 1.5, "D+G": 0.5})
    assert ablation_ordering_flags(rows) == []
    rows = _stub_rows({"E+G": 0.5, "D+G": 1.5})
    assert ablation_ordering_flags(rows) == []


def test_ordering_flags_reject_unknown_labels():
    with pytest.raises(DataError, match="X\\+Y"):
        ablation_ordering_flags(_stub_rows({"X+Y": 1.0}))
