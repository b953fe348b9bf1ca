"""Seen/unseen gating in semantic space: statistics, calibration, strategies.

Two per-instance statistics drive every strategy:

* ``d_l`` - absolute gap between the projected vector's norm and the
  unified embedding norm ``l``.
* ``msd`` - minimum squared distance from the projection to any
  seen-class embedding.

Thresholds are calibrated from seen training instances alone, as mean
plus population standard deviation of the matching statistic, so no
manual tuning is involved.  All three gate rules use strict ``<`` for
SEEN; a statistic exactly on its threshold gates UNSEEN.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .data import GzslDataset
from .errors import CalibrationError, ConfigError, DatasetLoadError, DomainError, ShapeError
from .linalg import as_matrix, as_vector, l2_norm, mean_and_popstd
from .mlp import MlpParams, forward_batch


class Domain(Enum):
    SEEN = "seen"
    UNSEEN = "unseen"


@dataclass(frozen=True)
class GateStatistics:
    """Per-instance discriminator inputs, both nonnegative."""

    d_l: float
    msd: float


@dataclass(frozen=True)
class ThresholdSet:
    """Calibrated gate thresholds plus the statistics they derive from."""

    r_ol: float
    r_0: float
    r_1: float
    r_ws: float
    lam: float
    m_dl: float
    std_dl: float
    m_msd: float
    std_msd: float
    m_ws: float
    std_ws: float
    l: float

    def validate(self) -> "ThresholdSet":
        checks = [
            ("r_ol", self.r_ol, self.m_dl + self.std_dl),
            ("r_0", self.r_0, self.m_msd + 2.0 * self.std_msd),
            ("r_1", self.r_1, self.m_msd + self.std_msd),
            ("r_ws", self.r_ws, self.m_ws + self.std_ws),
        ]
        for name, have, want in checks:
            if abs(have - want) > 1e-12:
                raise CalibrationError(f"{name}={have!r} breaks its defining identity ({want!r})")
        if self.r_0 < self.r_1:
            raise CalibrationError(f"r_0 ({self.r_0!r}) must be >= r_1 ({self.r_1!r})")
        return self


def length_gap(projected, l: float) -> float:
    """Absolute difference between the projection's norm and ``l``."""
    if not l > 0:
        raise DomainError(f"unified norm must be > 0, got {l}")
    return abs(l2_norm(projected) - l)


def min_semantic_distance(projected, seen_emb) -> float:
    """Minimum squared distance from the projection to any seen embedding row."""
    p = as_vector(projected, "projected")
    emb = as_matrix(seen_emb, "seen embeddings")
    if emb.shape[0] == 0:
        raise DomainError("min_semantic_distance: empty embedding table")
    if emb.shape[1] != p.size:
        raise ShapeError(f"min_semantic_distance: dim {p.size} vs table {emb.shape}")
    diff = emb - p
    return float(np.min(np.sum(diff * diff, axis=1)))


def gate_statistics(projected, seen_emb, l: float) -> GateStatistics:
    return GateStatistics(
        d_l=length_gap(projected, l),
        msd=min_semantic_distance(projected, seen_emb),
    )


def calibrate_from_samples(d_l_samples, msd_samples, lam: float, l: float) -> ThresholdSet:
    """Build a ThresholdSet from raw per-instance statistic samples."""
    d_l_samples = as_vector(d_l_samples, "d_l samples")
    msd_samples = as_vector(msd_samples, "msd samples")
    if d_l_samples.size == 0 or d_l_samples.shape != msd_samples.shape:
        raise CalibrationError(
            f"calibration needs matching nonempty samples, got {d_l_samples.size} and {msd_samples.size}"
        )
    m_dl, std_dl = mean_and_popstd(d_l_samples)
    m_msd, std_msd = mean_and_popstd(msd_samples)
    m_ws, std_ws = mean_and_popstd(d_l_samples + lam * msd_samples)
    return ThresholdSet(
        r_ol=m_dl + std_dl,
        r_0=m_msd + 2.0 * std_msd,
        r_1=m_msd + std_msd,
        r_ws=m_ws + std_ws,
        lam=lam,
        m_dl=m_dl,
        std_dl=std_dl,
        m_msd=m_msd,
        std_msd=std_msd,
        m_ws=m_ws,
        std_ws=std_ws,
        l=l,
    ).validate()


def calibrate(mapper: MlpParams, dataset: GzslDataset, lam: float = 1.0,
              split: str = "seen_train") -> ThresholdSet:
    """Project every seen instance of ``split`` and calibrate all thresholds.

    ``split`` is ``"seen_train"`` (default) or ``"seen_test"`` for
    held-out calibration.
    """
    if split not in ("seen_train", "seen_test"):
        raise ConfigError(f"unknown calibration split {split!r}")
    xs = getattr(dataset, f"{split}_x")
    if xs.shape[0] == 0:
        raise CalibrationError(f"calibration split {split!r} is empty")
    proj = forward_batch(mapper, xs)
    l = dataset.unified_norm
    d_l = np.abs(np.sqrt(np.sum(proj * proj, axis=1)) - l)
    msd = np.array([min_semantic_distance(p, dataset.seen_emb) for p in proj])
    return calibrate_from_samples(d_l, msd, lam, l)


def gate_ol(stats: GateStatistics, th: ThresholdSet) -> Domain:
    """Length-only rule: SEEN iff d_l is strictly below the length threshold."""
    return Domain.SEEN if stats.d_l < th.r_ol else Domain.UNSEEN


def gate_dl(stats: GateStatistics, th: ThresholdSet) -> Domain:
    """Length rule refined by minimum distance, four exhaustive cases.

    A small msd rescues an instance the length rule would reject, and a
    large msd overrules a length-based accept:

        d_l <  r_ol and msd <  r_0  -> SEEN
        d_l >= r_ol and msd <  r_1  -> SEEN
        d_l <  r_ol and msd >= r_0  -> UNSEEN
        d_l >= r_ol and msd >= r_1  -> UNSEEN
    """
    if stats.d_l < th.r_ol:
        return Domain.SEEN if stats.msd < th.r_0 else Domain.UNSEEN
    return Domain.SEEN if stats.msd < th.r_1 else Domain.UNSEEN


def gate_ws(stats: GateStatistics, th: ThresholdSet) -> Domain:
    """Weighted-sum rule: SEEN iff d_l + lam * msd is strictly below r_ws."""
    return Domain.SEEN if stats.d_l + th.lam * stats.msd < th.r_ws else Domain.UNSEEN


GATE_FUNCTIONS = {"ol": gate_ol, "dl": gate_dl, "ws": gate_ws}

_THRESHOLD_FIELDS = (
    "r_ol", "r_0", "r_1", "r_ws", "lambda",
    "m_dl", "std_dl", "m_msd", "std_msd", "m_ws", "std_ws", "l",
)


def save_thresholds(th: ThresholdSet, path) -> Path:
    """Audit file: one ``key=value`` line per statistic/threshold."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    values = {**{f: getattr(th, f) for f in _THRESHOLD_FIELDS if f != "lambda"},
              "lambda": th.lam}
    out.write_text("".join(f"{k}={values[k]!r}\n" for k in _THRESHOLD_FIELDS))
    return out


def load_thresholds(path) -> ThresholdSet:
    p = Path(path)
    if not p.is_file():
        raise DatasetLoadError(f"{p}: missing thresholds file")
    values = {}
    for lineno, line in enumerate(p.read_text().splitlines(), 1):
        if not line.strip():
            continue
        key, _, raw = line.partition("=")
        try:
            values[key.strip()] = float(raw)
        except ValueError as exc:
            raise DatasetLoadError(f"{p}:{lineno}: unparsable value {raw!r}") from exc
    missing = [f for f in _THRESHOLD_FIELDS if f not in values]
    if missing:
        raise DatasetLoadError(f"{p}: missing keys {missing}")
    return ThresholdSet(
        r_ol=values["r_ol"], r_0=values["r_0"], r_1=values["r_1"], r_ws=values["r_ws"],
        lam=values["lambda"], m_dl=values["m_dl"], std_dl=values["std_dl"],
        m_msd=values["m_msd"], std_msd=values["std_msd"],
        m_ws=values["m_ws"], std_ws=values["std_ws"], l=values["l"],
    ).validate()
