import gzip
import struct

import numpy as np
import pytest

from normdescent import data, losses, models, norms, optimizers


class TestSynthSeparable:
    def test_deterministic(self):
        a = data.synth_separable(4, 2, 0.3, seed=11)
        b = data.synth_separable(4, 2, 0.3, seed=11)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_margin_floor_satisfied(self):
        ds = data.synth_separable(50, 5, 0.7, seed=12)
        # recover the teacher used internally
        rng = np.random.default_rng(12)
        teacher = rng.normal(size=5)
        teacher /= np.linalg.norm(teacher)
        proj = ds.features @ teacher
        assert np.all(ds.labels * proj >= 0.7)

    def test_separable_by_training_oracle(self):
        ds = data.synth_separable(32, 10, 0.3, seed=13)
        spec = models.Linear(10)
        theta = models.init_params(spec, seed=0)
        opt = optimizers.SD(norms.L2())
        sched = optimizers.Constant(0.5)
        state = optimizers.init_state(opt, theta)
        loss = np.inf
        for _ in range(3000):
            g, _, loss = models.loss_gradient(spec, losses.Exponential(), state.theta, ds)
            if loss <= 1e-6:
                break
            state, _ = optimizers.step(opt, state, g, sched, 1.0)
        assert loss <= 1e-6

    def test_guards(self):
        with pytest.raises(ValueError):
            data.synth_separable(1, 5, 0.3, seed=0)
        with pytest.raises(ValueError):
            data.synth_separable(8, 5, 3.0, seed=0)


class TestIdx:
    def make_fixture(self, tmp_path, n=3, rows=4, cols=5, gz=False):
        rng = np.random.default_rng(7)
        images = rng.integers(0, 256, size=(n, rows, cols)).astype(np.float64) / 255.0
        digits = np.array([7, 0, 3][:n], dtype=np.uint8)
        ip, lp = tmp_path / "imgs", tmp_path / "labs"
        data.write_idx(images, digits, ip, lp)
        if gz:
            for p in (ip, lp):
                gz_path = p.with_suffix(".gz")
                gz_path.write_bytes(gzip.compress(p.read_bytes()))
            ip, lp = ip.with_suffix(".gz"), lp.with_suffix(".gz")
        return images, digits, ip, lp

    def test_round_trip_bit_exact(self, tmp_path):
        images, digits, ip, lp = self.make_fixture(tmp_path)
        raw = data.parse_idx(ip, lp)
        np.testing.assert_array_equal(raw.digits, digits)
        np.testing.assert_array_equal(
            np.rint(raw.images * 255).astype(np.uint8),
            np.rint(images * 255).astype(np.uint8),
        )
        assert raw.images.min() >= 0.0 and raw.images.max() <= 1.0

    def test_gzip_transparent(self, tmp_path):
        _, digits, ip, lp = self.make_fixture(tmp_path, gz=True)
        raw = data.parse_idx(ip, lp)
        np.testing.assert_array_equal(raw.digits, digits)

    def test_header_decode(self, tmp_path):
        ip = tmp_path / "imgs"
        lp = tmp_path / "labs"
        ip.write_bytes(struct.pack(">IIII", 2051, 2, 3, 3) + bytes(18))
        lp.write_bytes(struct.pack(">II", 2049, 2) + bytes([1, 2]))
        raw = data.parse_idx(ip, lp)
        assert raw.images.shape == (2, 3, 3)

    def test_wrong_magic(self, tmp_path):
        ip = tmp_path / "imgs"
        lp = tmp_path / "labs"
        ip.write_bytes(struct.pack(">IIII", 2050, 1, 2, 2) + bytes(4))
        lp.write_bytes(struct.pack(">II", 2049, 1) + bytes([1]))
        with pytest.raises(data.ParseError, match="magic"):
            data.parse_idx(ip, lp)

    def test_truncated_pixels(self, tmp_path):
        ip = tmp_path / "imgs"
        lp = tmp_path / "labs"
        ip.write_bytes(struct.pack(">IIII", 2051, 2, 2, 2) + bytes(5))
        lp.write_bytes(struct.pack(">II", 2049, 2) + bytes([1, 2]))
        with pytest.raises(data.ParseError, match="truncated"):
            data.parse_idx(ip, lp)

    def test_count_mismatch(self, tmp_path):
        ip = tmp_path / "imgs"
        lp = tmp_path / "labs"
        ip.write_bytes(struct.pack(">IIII", 2051, 1, 2, 2) + bytes(4))
        lp.write_bytes(struct.pack(">II", 2049, 2) + bytes([1, 2]))
        with pytest.raises(data.ParseError, match="count"):
            data.parse_idx(ip, lp)


def synthetic_digits(n, seed=0, rows=6, cols=6):
    """Random class-conditioned blobs standing in for digit images."""
    rng = np.random.default_rng(seed)
    protos = rng.random((10, rows, cols))
    digits = rng.integers(0, 10, size=n).astype(np.uint8)
    images = np.clip(protos[digits] + rng.normal(0, 0.05, (n, rows, cols)), 0, 1)
    return data.RawDigits(images=images, digits=digits)


class TestEvenOddSubset:
    def test_parity_rule(self):
        raw = synthetic_digits(100)
        ds = data.even_odd_subset(raw, 40, seed=1)
        assert set(np.unique(ds.labels)) <= {-1.0, 1.0}

    def test_balance_within_one(self):
        raw = synthetic_digits(200)
        for m in (17, 40):
            ds = data.even_odd_subset(raw, m, seed=2)
            pos = int(np.sum(ds.labels == 1.0))
            assert abs(pos - (m - pos)) <= 1

    def test_labels_match_digit_parity(self):
        raw = synthetic_digits(100, seed=3)
        ds = data.even_odd_subset(raw, 30, seed=4)
        flat = raw.images.reshape(100, -1)
        for row, label in zip(ds.features, ds.labels):
            matches = np.nonzero(np.all(np.isclose(flat, row), axis=1))[0]
            assert matches.size >= 1
            digit = raw.digits[matches[0]]
            assert label == (1.0 if digit % 2 == 0 else -1.0)

    def test_deterministic(self):
        raw = synthetic_digits(100, seed=5)
        a = data.even_odd_subset(raw, 20, seed=6)
        b = data.even_odd_subset(raw, 20, seed=6)
        np.testing.assert_array_equal(a.features, b.features)

    def test_flattens_features(self):
        raw = synthetic_digits(50, rows=4, cols=7)
        ds = data.even_odd_subset(raw, 10, seed=7)
        assert ds.features.shape == (10, 28)

    def test_requests_beyond_pool_rejected(self):
        raw = synthetic_digits(10)
        with pytest.raises(ValueError):
            data.even_odd_subset(raw, 11, seed=0)


class TestCache:
    def test_round_trip(self, tmp_path):
        raw = synthetic_digits(60, seed=8)
        ds = data.even_odd_subset(raw, 20, seed=9)
        data.store_cached_subset(tmp_path, ds, 20, 9)
        loaded = data.load_cached_subset(tmp_path, 20, 9)
        np.testing.assert_array_equal(loaded.features, ds.features)
        np.testing.assert_array_equal(loaded.labels, ds.labels)
        assert loaded.provenance == ds.provenance

    def test_missing_returns_none(self, tmp_path):
        assert data.load_cached_subset(tmp_path, 5, 5) is None

    def test_stale_version_ignored(self, tmp_path):
        raw = synthetic_digits(60, seed=10)
        ds = data.even_odd_subset(raw, 20, seed=11)
        path = data.store_cached_subset(tmp_path, ds, 20, 11)
        blob = dict(np.load(path, allow_pickle=False))
        blob["version"] = np.int64(999)
        np.savez(path, **blob)
        assert data.load_cached_subset(tmp_path, 20, 11) is None
