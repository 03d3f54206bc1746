import numpy as np
import pytest

from mimgan.data import (
    CsvFormatError,
    MinMaxStats,
    SplitMode,
    TabularDataset,
    load_tabular_csv,
    normalize_split,
    sample_gaussian,
    split_train_test,
    synth_anomaly_benchmark,
    write_tabular_csv,
)
from mimgan.metrics import roc_auc


class TestGaussian:
    def test_moments(self):
        x = sample_gaussian(4.0, 1.25, 16_000, seed=0).features[:, 0]
        assert abs(x.mean() - 4.0) < 0.05
        assert abs(x.std() - 1.25) < 0.05

    def test_empty(self):
        assert sample_gaussian(4.0, 1.25, 0, seed=0).features.shape == (0, 1)

    def test_narrow(self):
        x = sample_gaussian(4.0, 1e-6, 1000, seed=1).features
        assert np.all(np.abs(x - 4.0) < 1e-5)

    def test_seeded(self):
        a = sample_gaussian(0, 1, 10, seed=3).features
        np.testing.assert_array_equal(a, sample_gaussian(0, 1, 10, seed=3).features)


class TestSynthBenchmark:
    def test_fraction(self):
        ds = synth_anomaly_benchmark(950, 50, 6, 3.0, seed=0)
        assert ds.features.shape == (1000, 6)
        assert ds.anomaly_fraction == pytest.approx(0.05)

    def test_no_anomalies(self):
        ds = synth_anomaly_benchmark(20, 0, 3, 3.0, seed=0)
        assert not ds.labels.any()

    def test_zero_separation_is_uninformative(self):
        aucs = []
        for seed in range(10):
            ds = synth_anomaly_benchmark(200, 50, 4, 0.0, seed)
            aucs.append(roc_auc(np.linalg.norm(ds.features, axis=1), ds.labels).auc)
        assert abs(np.mean(aucs) - 0.5) < 0.1


class TestCsv:
    def test_two_rows(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("a,b,label\n1,2,0\n3,4,1\n")
        ds = load_tabular_csv(f, "label")
        np.testing.assert_array_equal(ds.features, [[1, 2], [3, 4]])
        np.testing.assert_array_equal(ds.labels, [0, 1])
        assert ds.feature_names == ["a", "b"]

    def test_without_label(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("a,b,label\n1,2,0\n3,4,1\n")
        ds = load_tabular_csv(f)
        assert ds.labels is None and ds.features.shape == (2, 3)

    def test_malformed_cell_names_row_and_column(self, tmp_path):
        f = tmp_path / "d.csv"
        rows = ["a,b"] + ["1,2"] * 4 + ["1,x"]
        f.write_text("\n".join(rows) + "\n")
        with pytest.raises(CsvFormatError, match=r"row 5 .*column 'b'"):
            load_tabular_csv(f)

    def test_bad_label(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("a,label\n1,2\n")
        with pytest.raises(CsvFormatError, match="not 0 or 1"):
            load_tabular_csv(f, "label")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_tabular_csv(tmp_path / "nope.csv")

    def test_round_trip(self, tmp_path):
        ds = synth_anomaly_benchmark(30, 5, 3, 2.0, seed=1)
        write_tabular_csv(ds, tmp_path / "s.csv")
        back = load_tabular_csv(tmp_path / "s.csv", "label")
        np.testing.assert_array_equal(back.features, ds.features)
        np.testing.assert_array_equal(back.labels, ds.labels)


class TestSplit:
    def ds(self):
        y = np.r_[np.zeros(100, int), np.ones(10, int)]
        return TabularDataset(np.arange(110.0).reshape(-1, 1), y)

    def test_normal_only(self):
        train, test = split_train_test(self.ds(), 0.8, SplitMode.NORMAL_ONLY_TRAIN, seed=0)
        assert len(train) == 80 and not train.labels.any()
        assert len(test) == 30 and test.labels.sum() == 10

    def test_random_sizes(self):
        ds = TabularDataset(np.arange(10.0).reshape(-1, 1))
        train, test = split_train_test(ds, 0.5, SplitMode.RANDOM, seed=0)
        assert (len(train), len(test)) == (5, 5)
        assert sorted(np.r_[train.features[:, 0], test.features[:, 0]]) == list(range(10))

    def test_seeded(self):
        a, _ = split_train_test(self.ds(), 0.8, "normal-only", seed=5)
        b, _ = split_train_test(self.ds(), 0.8, "normal-only", seed=5)
        np.testing.assert_array_equal(a.features, b.features)

    def test_normalize_uses_train_stats(self):
        train, test = split_train_test(self.ds(), 0.8, SplitMode.NORMAL_ONLY_TRAIN, seed=0)
        tn, sn = normalize_split(train, test)
        assert tn.features.min() == -1.0 and tn.features.max() == 1.0
        assert sn.stats is tn.stats
        np.testing.assert_allclose(tn.stats.invert(tn.features), train.features)

    def test_constant_feature(self):
        stats = MinMaxStats.fit(np.ones((4, 1)))
        assert np.all(np.isfinite(stats.apply(np.ones((2, 1)))))
