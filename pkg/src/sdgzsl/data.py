"""Seen/unseen data model, synthetic generator, and dataset directory I/O.

A dataset directory holds:

* ``meta.json`` - dimensions, per-split counts, the unified embedding
  norm ``l``, and an endianness tag.
* ``seen_train.f32`` / ``seen_test.f32`` / ``unseen_test.f32`` - feature
  rows as little-endian float32, row-major, preceded by two little-endian
  uint64 (rows, cols).
* ``seen_train.labels`` / ``seen_test.labels`` / ``unseen_test.labels`` -
  one little-endian uint32 per feature row.
* ``seen_emb.f32`` / ``unseen_emb.f32`` - per-class embedding rows in the
  same binary matrix layout.

Features are stored as 32-bit floats on disk and widened to 64-bit in
memory.  Labels are dense integers 0..C-1 per side; the seen/unseen
domain is carried by which split an instance sits in, so the two class
vocabularies can never collide.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetLoadError, DomainError, ValidationError
from .linalg import as_matrix
from .rng import SplitMix64

_HEADER = struct.Struct("<QQ")
# cosine cap for sampled unseen directions, relative to every seen embedding
_MAX_UNSEEN_COS = 0.95

FEATURE_FILES = {
    "seen_train": "seen_train.f32",
    "seen_test": "seen_test.f32",
    "unseen_test": "unseen_test.f32",
}
LABEL_FILES = {
    "seen_train": "seen_train.labels",
    "seen_test": "seen_test.labels",
    "unseen_test": "unseen_test.labels",
}
EMBEDDING_FILES = {"seen": "seen_emb.f32", "unseen": "unseen_emb.f32"}


@dataclass
class SyntheticSpec:
    """Shape of a synthetic benchmark at desk scale."""

    n_seen_classes: int
    n_unseen_classes: int
    feature_dim: int
    semantic_dim: int
    per_class_train: int
    per_class_test: int
    cluster_spread: float
    seed: int
    unified_norm: float = 1.0

    def validate(self) -> None:
        problems = []
        if self.n_seen_classes < 2:
            problems.append(f"n_seen_classes must be >= 2, got {self.n_seen_classes}")
        if self.n_unseen_classes < 1:
            problems.append(f"n_unseen_classes must be >= 1, got {self.n_unseen_classes}")
        if self.feature_dim < 1:
            problems.append(f"feature_dim must be >= 1, got {self.feature_dim}")
        if self.semantic_dim < 1:
            problems.append(f"semantic_dim must be >= 1, got {self.semantic_dim}")
        if self.per_class_train < 1:
            problems.append(f"per_class_train must be >= 1, got {self.per_class_train}")
        if self.per_class_test < 1:
            problems.append(f"per_class_test must be >= 1, got {self.per_class_test}")
        if not self.cluster_spread >= 0.0:
            problems.append(f"cluster_spread must be >= 0, got {self.cluster_spread}")
        if not self.unified_norm > 0.0:
            problems.append(f"unified_norm must be > 0, got {self.unified_norm}")
        if problems:
            raise ValidationError("invalid SyntheticSpec: " + "; ".join(problems))


@dataclass
class GzslDataset:
    """Immutable seen/unseen split with norm-unified class embeddings."""

    seen_train_x: np.ndarray
    seen_train_y: np.ndarray
    seen_test_x: np.ndarray
    seen_test_y: np.ndarray
    unseen_test_x: np.ndarray
    unseen_test_y: np.ndarray
    seen_emb: np.ndarray
    unseen_emb: np.ndarray
    unified_norm: float

    @property
    def feature_dim(self) -> int:
        return self.seen_train_x.shape[1]

    @property
    def semantic_dim(self) -> int:
        return self.seen_emb.shape[1]

    @property
    def n_seen_classes(self) -> int:
        return self.seen_emb.shape[0]

    @property
    def n_unseen_classes(self) -> int:
        return self.unseen_emb.shape[0]

    def validate(self) -> "GzslDataset":
        d = self.feature_dim
        s = self.semantic_dim
        for name in ("seen_train", "seen_test", "unseen_test"):
            x = getattr(self, f"{name}_x")
            y = getattr(self, f"{name}_y")
            as_matrix(x, name)
            if x.shape[1] != d:
                raise ValidationError(f"{name}: feature dim {x.shape[1]} != {d}")
            if y.shape != (x.shape[0],):
                raise ValidationError(f"{name}: {y.shape[0]} labels for {x.shape[0]} rows")
            if not np.all(np.isfinite(x)):
                bad = int(np.where(~np.isfinite(x).all(axis=1))[0][0])
                raise ValidationError(f"{name}: non-finite feature at row {bad}")
            n_classes = self.n_unseen_classes if name == "unseen_test" else self.n_seen_classes
            if y.size and (y.min() < 0 or y.max() >= n_classes):
                raise ValidationError(f"{name}: label outside 0..{n_classes - 1}")
        for side, emb in (("seen", self.seen_emb), ("unseen", self.unseen_emb)):
            as_matrix(emb, f"{side}_emb")
            if emb.shape[1] != s:
                raise ValidationError(f"{side}_emb: semantic dim {emb.shape[1]} != {s}")
            norms = np.sqrt((emb * emb).sum(axis=1))
            off = np.abs(norms - self.unified_norm)
            if off.size and off.max() > 1e-9:
                bad = int(off.argmax())
                raise ValidationError(
                    f"{side}_emb: row {bad} has norm {norms[bad]!r}, expected {self.unified_norm!r}"
                )
        # loaded/generated datasets are shared read-only across threads
        for arr in (
            self.seen_train_x, self.seen_train_y, self.seen_test_x, self.seen_test_y,
            self.unseen_test_x, self.unseen_test_y, self.seen_emb, self.unseen_emb,
        ):
            arr.setflags(write=False)
        return self


def normalize_embeddings(raw, l: float) -> np.ndarray:
    """Rescale every row to norm ``l``, preserving directions."""
    raw = as_matrix(raw, "embeddings")
    if not l > 0:
        raise DomainError(f"unified norm must be > 0, got {l}")
    norms = np.sqrt((raw * raw).sum(axis=1))
    if np.any(norms == 0.0):
        bad = int(np.where(norms == 0.0)[0][0])
        raise DomainError(f"embedding row {bad} is the zero vector and has no direction")
    return raw * (l / norms)[:, None]


def _f32_stable_unit_rows(raw: np.ndarray, l: float) -> np.ndarray:
    """Normalize rows to norm l such that float32 storage round-trips exactly.

    Iterates quantize -> renormalize until the float32 image is a fixed
    point, so ``renormalize(load(save(row))) == row`` bit-for-bit.
    """
    rows = normalize_embeddings(raw, l)
    out = np.empty_like(rows)
    for i, row in enumerate(rows):
        v = row
        for _ in range(64):
            q = v.astype(np.float32).astype(np.float64)
            w = q * (l / np.sqrt(q @ q))
            if np.array_equal(w.astype(np.float32).astype(np.float64), q):
                v = w
                break
            v = w
        out[i] = v
    return out


def generate_synthetic(spec: SyntheticSpec) -> GzslDataset:
    """Deterministic Gaussian-cluster benchmark with genuine domain shift.

    Per class, a random unit direction in semantic space (scaled to the
    unified norm) is the class embedding; a fixed random linear map sends
    embeddings to feature-space class centers; instances are center plus
    isotropic Gaussian noise.  Unseen directions are resampled until
    their cosine to every seen embedding is at most 0.95, so the unseen
    domain never collapses onto the seen one.
    """
    spec.validate()
    root = SplitMix64(spec.seed)
    emb_rng = root.split()
    map_rng = root.split()
    noise_rng = root.split()

    l = spec.unified_norm
    s_dim = spec.semantic_dim
    seen_emb = _f32_stable_unit_rows(
        emb_rng.gauss_array((spec.n_seen_classes, s_dim)), l
    )

    unseen_rows = []
    for _ in range(spec.n_unseen_classes):
        for _attempt in range(10_000):
            cand = _f32_stable_unit_rows(emb_rng.gauss_array((1, s_dim)), l)[0]
            cos = seen_emb @ cand / (l * l)
            if cos.max() <= _MAX_UNSEEN_COS:
                unseen_rows.append(cand)
                break
        else:
            raise DomainError(
                "could not sample an unseen embedding direction with cosine "
                f"<= {_MAX_UNSEEN_COS} to all seen embeddings; semantic_dim "
                f"{s_dim} is too small for {spec.n_seen_classes} seen classes"
            )
    unseen_emb = np.array(unseen_rows)

    # ground-truth linear map semantic -> feature space, drawn row-major
    w_true = map_rng.gauss_array((spec.feature_dim, s_dim))
    seen_centers = seen_emb @ w_true.T
    unseen_centers = unseen_emb @ w_true.T

    def draw_split(centers: np.ndarray, per_class: int) -> tuple[np.ndarray, np.ndarray]:
        n_classes = centers.shape[0]
        x = np.empty((n_classes * per_class, spec.feature_dim))
        for c in range(n_classes):
            for i in range(per_class):
                noise = noise_rng.gauss_array((spec.feature_dim,))
                x[c * per_class + i] = centers[c] + spec.cluster_spread * noise
        y = np.repeat(np.arange(n_classes), per_class)
        # features live on the f32 grid so disk round-trips are exact
        return x.astype(np.float32).astype(np.float64), y

    seen_train_x, seen_train_y = draw_split(seen_centers, spec.per_class_train)
    seen_test_x, seen_test_y = draw_split(seen_centers, spec.per_class_test)
    unseen_test_x, unseen_test_y = draw_split(unseen_centers, spec.per_class_test)

    return GzslDataset(
        seen_train_x=seen_train_x,
        seen_train_y=seen_train_y,
        seen_test_x=seen_test_x,
        seen_test_y=seen_test_y,
        unseen_test_x=unseen_test_x,
        unseen_test_y=unseen_test_y,
        seen_emb=seen_emb,
        unseen_emb=unseen_emb,
        unified_norm=l,
    ).validate()


def _write_matrix(path: Path, m: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(m.shape[0], m.shape[1]))
        fh.write(np.ascontiguousarray(m, dtype="<f4").tobytes())


def _read_matrix(path: Path) -> np.ndarray:
    if not path.is_file():
        raise DatasetLoadError(f"{path}: missing file")
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise DatasetLoadError(
            f"{path}: truncated header, expected {_HEADER.size} bytes, got {len(blob)}"
        )
    rows, cols = _HEADER.unpack_from(blob)
    expected = _HEADER.size + rows * cols * 4
    if len(blob) != expected:
        raise DatasetLoadError(
            f"{path}: expected {expected} bytes for {rows}x{cols} f32 matrix, got {len(blob)}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    return data.reshape(rows, cols).astype(np.float64)


def _write_labels(path: Path, y: np.ndarray) -> None:
    path.write_bytes(np.ascontiguousarray(y, dtype="<u4").tobytes())


def _read_labels(path: Path, rows: int) -> np.ndarray:
    if not path.is_file():
        raise DatasetLoadError(f"{path}: missing file")
    blob = path.read_bytes()
    if len(blob) != rows * 4:
        raise DatasetLoadError(
            f"{path}: expected {rows * 4} bytes for {rows} u32 labels, got {len(blob)}"
        )
    return np.frombuffer(blob, dtype="<u4").astype(np.int64)


def save_dataset(ds: GzslDataset, path) -> Path:
    """Write the dataset directory format; returns the directory path."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "d": int(ds.feature_dim),
        "S": int(ds.semantic_dim),
        "C_s": int(ds.n_seen_classes),
        "C_u": int(ds.n_unseen_classes),
        "n_seen_train": int(ds.seen_train_x.shape[0]),
        "n_seen_test": int(ds.seen_test_x.shape[0]),
        "n_unseen_test": int(ds.unseen_test_x.shape[0]),
        "l": float(ds.unified_norm),
        "endianness": "little",
    }
    (out / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    for split, fname in FEATURE_FILES.items():
        _write_matrix(out / fname, getattr(ds, f"{split}_x"))
        _write_labels(out / LABEL_FILES[split], getattr(ds, f"{split}_y"))
    _write_matrix(out / EMBEDDING_FILES["seen"], ds.seen_emb)
    _write_matrix(out / EMBEDDING_FILES["unseen"], ds.unseen_emb)
    return out


def load_dataset(path) -> GzslDataset:
    """Read and fully validate a dataset directory.

    Embedding rows are re-normalized to the header's unified norm after
    the float32 widening.
    """
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise DatasetLoadError(f"{meta_path}: missing file")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetLoadError(f"{meta_path}: invalid JSON ({exc})") from exc
    for key in ("d", "S", "C_s", "C_u", "n_seen_train", "n_seen_test", "n_unseen_test", "l"):
        if key not in meta:
            raise DatasetLoadError(f"{meta_path}: missing key {key!r}")
    if meta.get("endianness", "little") != "little":
        raise DatasetLoadError(f"{meta_path}: unsupported endianness {meta['endianness']!r}")

    counts = {
        "seen_train": meta["n_seen_train"],
        "seen_test": meta["n_seen_test"],
        "unseen_test": meta["n_unseen_test"],
    }
    arrays = {}
    for split, fname in FEATURE_FILES.items():
        fpath = root / fname
        x = _read_matrix(fpath)
        if x.shape != (counts[split], meta["d"]):
            raise DatasetLoadError(
                f"{fpath}: shape {x.shape} does not match header ({counts[split]}, {meta['d']})"
            )
        if not np.all(np.isfinite(x)):
            bad = int(np.where(~np.isfinite(x).all(axis=1))[0][0])
            raise DatasetLoadError(f"{fpath}: non-finite value at row {bad}")
        y = _read_labels(root / LABEL_FILES[split], x.shape[0])
        n_classes = meta["C_u"] if split == "unseen_test" else meta["C_s"]
        if y.size and y.max() >= n_classes:
            bad = int(np.argmax(y >= n_classes))
            raise DatasetLoadError(
                f"{root / LABEL_FILES[split]}: label {y[bad]} at row {bad} outside 0..{n_classes - 1}"
            )
        arrays[f"{split}_x"] = x
        arrays[f"{split}_y"] = y

    embs = {}
    for side, fname in EMBEDDING_FILES.items():
        fpath = root / fname
        e = _read_matrix(fpath)
        n_classes = meta["C_s"] if side == "seen" else meta["C_u"]
        if e.shape != (n_classes, meta["S"]):
            raise DatasetLoadError(
                f"{fpath}: shape {e.shape} does not match header ({n_classes}, {meta['S']})"
            )
        if not np.all(np.isfinite(e)):
            bad = int(np.where(~np.isfinite(e).all(axis=1))[0][0])
            raise DatasetLoadError(f"{fpath}: non-finite value at row {bad}")
        try:
            embs[side] = normalize_embeddings(e, meta["l"])
        except DomainError as exc:
            raise DatasetLoadError(f"{fpath}: {exc}") from exc

    return GzslDataset(
        seen_train_x=arrays["seen_train_x"],
        seen_train_y=arrays["seen_train_y"],
        seen_test_x=arrays["seen_test_x"],
        seen_test_y=arrays["seen_test_y"],
        unseen_test_x=arrays["unseen_test_x"],
        unseen_test_y=arrays["unseen_test_y"],
        seen_emb=embs["seen"],
        unseen_emb=embs["unseen"],
        unified_norm=float(meta["l"]),
    ).validate()


def summarize(ds: GzslDataset) -> str:
    """One-paragraph human summary used by the CLI."""
    return (
        f"{ds.n_seen_classes} seen / {ds.n_unseen_classes} unseen classes, "
        f"feature dim {ds.feature_dim}, semantic dim {ds.semantic_dim}, "
        f"unified embedding norm {ds.unified_norm}; "
        f"{ds.seen_train_x.shape[0]} seen-train, {ds.seen_test_x.shape[0]} seen-test, "
        f"{ds.unseen_test_x.shape[0]} unseen-test instances"
    )
