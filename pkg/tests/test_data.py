import json
import struct

import numpy as np
import pytest

from sdgzsl import (
    DatasetLoadError,
    DomainError,
    SyntheticSpec,
    ValidationError,
    generate_synthetic,
    load_dataset,
    normalize_embeddings,
    save_dataset,
)
from sdgzsl.data import _MAX_UNSEEN_COS

SMALL_SPEC = SyntheticSpec(
    n_seen_classes=10, n_unseen_classes=3, feature_dim=32, semantic_dim=16,
    per_class_train=5, per_class_test=3, cluster_spread=0.05, seed=7,
)


class TestNormalizeEmbeddings:
    def test_three_four_row(self):
        out = normalize_embeddings([[3.0, 4.0]], 1.0)
        assert out == pytest.approx(np.array([[0.6, 0.8]]), abs=1e-15)

    def test_already_normalized_row_is_fixed_point(self):
        row = np.array([[0.6, 0.8]])
        out = normalize_embeddings(row, 1.0)
        assert out == pytest.approx(row, abs=1e-12)

    def test_random_rows_hit_requested_norm(self, np_rng):
        raw = np_rng.normal(size=(10, 6))
        out = normalize_embeddings(raw, 2.0)
        norms = np.sqrt((out**2).sum(axis=1))
        assert np.abs(norms - 2.0).max() < 1e-9

    def test_idempotent(self, np_rng):
        raw = np_rng.normal(size=(8, 5))
        once = normalize_embeddings(raw, 1.5)
        twice = normalize_embeddings(once, 1.5)
        assert twice == pytest.approx(once, abs=1e-12)

    def test_zero_row_names_class_index(self):
        raw = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(DomainError, match="row 1"):
            normalize_embeddings(raw, 1.0)

    def test_direction_preserved(self, np_rng):
        raw = np_rng.normal(size=(4, 7))
        out = normalize_embeddings(raw, 3.0)
        for r_in, r_out in zip(raw, out):
            cos = (r_in @ r_out) / (np.linalg.norm(r_in) * np.linalg.norm(r_out))
            assert cos == pytest.approx(1.0, abs=1e-12)


class TestGenerateSynthetic:
    def test_sigma_zero_instances_equal_their_center(self):
        spec = SyntheticSpec(3, 2, 8, 4, 6, 2, 0.0, seed=5)
        ds = generate_synthetic(spec)
        for c in range(3):
            rows = ds.seen_train_x[ds.seen_train_y == c]
            assert np.all(rows == rows[0])
            test_rows = ds.seen_test_x[ds.seen_test_y == c]
            assert np.all(test_rows == rows[0])

    def test_same_seed_identical_datasets(self, tmp_path):
        a = generate_synthetic(SMALL_SPEC)
        b = generate_synthetic(SMALL_SPEC)
        save_dataset(a, tmp_path / "a")
        save_dataset(b, tmp_path / "b")
        for f in sorted(p.name for p in (tmp_path / "a").iterdir()):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()

    def test_embedding_norms_unified(self):
        ds = generate_synthetic(SMALL_SPEC)
        for emb in (ds.seen_emb, ds.unseen_emb):
            norms = np.sqrt((emb**2).sum(axis=1))
            assert np.abs(norms - ds.unified_norm).max() < 1e-9

    def test_unseen_directions_rejected_near_seen(self):
        ds = generate_synthetic(SMALL_SPEC)
        cos = ds.unseen_emb @ ds.seen_emb.T / ds.unified_norm**2
        assert cos.max() <= _MAX_UNSEEN_COS + 1e-12

    def test_split_sizes_and_labels(self):
        ds = generate_synthetic(SMALL_SPEC)
        assert ds.seen_train_x.shape == (50, 32)
        assert ds.seen_test_x.shape == (30, 32)
        assert ds.unseen_test_x.shape == (9, 32)
        assert set(ds.seen_train_y) == set(range(10))
        assert set(ds.unseen_test_y) == set(range(3))

    def test_invalid_spec_lists_every_violation(self):
        bad = SyntheticSpec(1, 0, 8, 4, 6, 2, -1.0, seed=5)
        with pytest.raises(ValidationError) as err:
            generate_synthetic(bad)
        msg = str(err.value)
        for fragment in ("n_seen_classes", "n_unseen_classes", "cluster_spread"):
            assert fragment in msg

    def test_sigma_zero_nearest_center_self_consistency(self):
        # brute-force nearest neighbor over all class centers recovers the label
        spec = SyntheticSpec(6, 3, 16, 8, 4, 2, 0.0, seed=13)
        ds = generate_synthetic(spec)
        seen_centers = np.stack([ds.seen_train_x[ds.seen_train_y == c][0] for c in range(6)])
        unseen_centers = np.stack([ds.unseen_test_x[ds.unseen_test_y == c][0] for c in range(3)])
        centers = np.vstack([seen_centers, unseen_centers])
        for x, y in zip(ds.seen_train_x, ds.seen_train_y):
            d = ((centers - x) ** 2).sum(axis=1)
            assert int(np.argmin(d)) == int(y)
        for x, y in zip(ds.unseen_test_x, ds.unseen_test_y):
            d = ((centers - x) ** 2).sum(axis=1)
            assert int(np.argmin(d)) == 6 + int(y)

    def test_custom_unified_norm(self):
        spec = SyntheticSpec(4, 2, 8, 4, 3, 2, 0.1, seed=2, unified_norm=2.5)
        ds = generate_synthetic(spec)
        norms = np.sqrt((ds.seen_emb**2).sum(axis=1))
        assert np.abs(norms - 2.5).max() < 1e-9


class TestDatasetIO:
    def test_round_trip_identity(self, tmp_path):
        ds = generate_synthetic(SMALL_SPEC)
        loaded = load_dataset(save_dataset(ds, tmp_path / "d"))
        for f in ("seen_train_x", "seen_test_x", "unseen_test_x", "seen_emb", "unseen_emb"):
            assert np.abs(getattr(ds, f) - getattr(loaded, f)).max() <= 1e-12
        for f in ("seen_train_y", "seen_test_y", "unseen_test_y"):
            assert np.array_equal(getattr(ds, f), getattr(loaded, f))
        assert loaded.unified_norm == ds.unified_norm

    def test_double_round_trip_is_stable(self, tmp_path):
        ds = generate_synthetic(SMALL_SPEC)
        a = load_dataset(save_dataset(ds, tmp_path / "a"))
        b = load_dataset(save_dataset(a, tmp_path / "b"))
        for f in ("seen_train_x", "seen_test_x", "unseen_test_x", "seen_emb", "unseen_emb"):
            assert np.array_equal(getattr(a, f), getattr(b, f))

    def test_loaded_embedding_norms_match_header(self, tmp_path):
        ds = generate_synthetic(SMALL_SPEC)
        loaded = load_dataset(save_dataset(ds, tmp_path / "d"))
        norms = np.sqrt((loaded.seen_emb**2).sum(axis=1))
        assert np.abs(norms - loaded.unified_norm).max() < 1e-9

    def test_truncated_feature_file(self, tmp_path):
        ds = generate_synthetic(SMALL_SPEC)
        root = save_dataset(ds, tmp_path / "d")
        f = root / "seen_train.f32"
        f.write_bytes(f.read_bytes()[:-8])
        with pytest.raises(DatasetLoadError, match="expected .* bytes .* got"):
            load_dataset(root)

    def test_nan_feature_names_row(self, tmp_path):
        ds = generate_synthetic(SMALL_SPEC)
        root = save_dataset(ds, tmp_path / "d")
        f = root / "seen_test.f32"
        blob = bytearray(f.read_bytes())
        # corrupt one float in row 4
        offset = 16 + (4 * 32 + 3) * 4
        blob[offset : offset + 4] = struct.pack("<f", float("nan"))
        f.write_bytes(bytes(blob))
        with pytest.raises(DatasetLoadError, match="row 4"):
            load_dataset(root)

    def test_missing_file(self, tmp_path):
        ds = generate_synthetic(SMALL_SPEC)
        root = save_dataset(ds, tmp_path / "d")
        (root / "unseen_emb.f32").unlink()
        with pytest.raises(DatasetLoadError, match="missing file"):
            load_dataset(root)

    def test_label_out_of_range(self, tmp_path):
        ds = generate_synthetic(SMALL_SPEC)
        root = save_dataset(ds, tmp_path / "d")
        f = root / "unseen_test.labels"
        blob = bytearray(f.read_bytes())
        blob[0:4] = struct.pack("<I", 99)
        f.write_bytes(bytes(blob))
        with pytest.raises(DatasetLoadError, match="label 99 at row 0"):
            load_dataset(root)

    def test_shape_mismatch_against_header(self, tmp_path):
        ds = generate_synthetic(SMALL_SPEC)
        root = save_dataset(ds, tmp_path / "d")
        meta = json.loads((root / "meta.json").read_text())
        meta["n_seen_test"] = 7
        (root / "meta.json").write_text(json.dumps(meta))
        with pytest.raises(DatasetLoadError, match="does not match header"):
            load_dataset(root)

    def test_zero_embedding_row_rejected(self, tmp_path):
        ds = generate_synthetic(SMALL_SPEC)
        root = save_dataset(ds, tmp_path / "d")
        f = root / "seen_emb.f32"
        blob = bytearray(f.read_bytes())
        blob[16 : 16 + 16 * 4] = b"\x00" * 64  # zero out row 0
        f.write_bytes(bytes(blob))
        with pytest.raises(DatasetLoadError, match="zero vector"):
            load_dataset(root)
