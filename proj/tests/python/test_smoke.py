import numpy as np
import pytest

import thor


def test_boundaries_and_inference():
    b = thor.default_boundaries(5)
    assert b.thresholds == [-1.0, 0.0, 1.0, 2.0, 3.0, 4.0]
    assert b.margin == 0.5
    assert [thor.infer_rank_threshold(s, b) for s in (-9.0, -0.5, 0.0, 0.01, 3.5, 9.0)] == [1, 1, 1, 2, 5, 5]


def test_extended_binary_round_trip():
    for k in range(2, 8):
        for y in range(1, k + 1):
            bits = thor.encode_extended_binary(y, k)
            assert len(bits) == k - 1
            assert thor.infer_rank_binary(bits) == y


def test_pair_loss():
    b = thor.default_boundaries(5)
    assert thor.thor_pair_loss(0.5, 1.5, 2, b) == (0.0, 0.0, 0.0)
    value, dfi, dfj = thor.thor_pair_loss(0.2, 1.5, 2, b)
    assert value == pytest.approx(0.3)
    assert dfi == -1.0 and dfj == 0.0
    assert thor.thor_violation_count(-2.0, 2.5, 2, b) == 2
    with pytest.raises(thor.InvalidPair):
        thor.thor_pair_loss(0.0, 0.0, 5, b)


def test_metrics():
    assert thor.accuracy([1, 2, 3], [3, 2, 1]) == pytest.approx(1 / 3)
    assert thor.mae([1, 2, 3], [3, 2, 1]) == pytest.approx(4 / 3)
    assert thor.inconsistency_count([[1, 0], [0, 1]]) == (1, 0.5)
    with pytest.raises(thor.InvalidArgument):
        thor.mae([], [])


def test_dataset_from_numpy():
    ds = thor.OrdinalDataset(np.arange(6.0).reshape(3, 2), [1, 2, 3], 3)
    assert len(ds) == 3 and ds.dim == 2 and ds.labels == [1, 2, 3]
    np.testing.assert_array_equal(ds.features, np.arange(6.0).reshape(3, 2))
    with pytest.raises(thor.InvalidArgument):
        thor.OrdinalDataset(np.zeros((2, 1)), [1, 4], 3)


def test_train_evaluate_and_checkpoint(tmp_path):
    splits = thor.split(thor.generate_synthetic(k=4, per_class=40, d=3, noise=0.3, seed=3), seed=3)
    cfg = thor.TrainConfig()
    cfg.epochs = 20
    cfg.hidden = [8]
    report = thor.train(splits.train, splits.val, cfg)
    assert len(report.epochs) == 20
    assert 1 <= report.best_epoch <= 20
    metrics = report.best.evaluate(splits.test)
    assert 0.0 <= metrics.mae <= 3.0
    assert metrics.n == len(splits.test)

    path = tmp_path / "model.ckpt"
    report.best.save(path)
    loaded = thor.Predictor.load(path)
    assert loaded.method == thor.Method.THOR
    assert loaded.predict(splits.test) == report.best.predict(splits.test)


def test_compare_and_sweep():
    splits = thor.split(thor.generate_synthetic(k=3, per_class=20, d=2), seed=1)
    cfg = thor.TrainConfig()
    cfg.epochs = 3
    cfg.hidden = [4]
    table = thor.compare([thor.Method.THOR, thor.Method.HYBRID], splits, cfg, jobs=2)
    assert [r.label for r in table.rows] == ["thor", "hybrid-classification", "hybrid-regression"]
    assert table.csv().startswith("method,accuracy,mae,inconsistency_rate\n")
    with pytest.raises(thor.InfeasibleMargin):
        thor.sweep_gamma([0.6], splits, cfg)
    assert [p.gamma for p in thor.sweep_gamma([0.0, 0.5], splits, cfg)] == [0.0, 0.5]


def test_gradcheck():
    for m in (thor.Method.THOR, thor.Method.CORAL):
        assert thor.gradcheck(m, 1).pass_fraction() >= 0.99
