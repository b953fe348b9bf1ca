"""End-to-end flow: project, gate, route to a per-domain classifier, score.

Evaluation reports macro (per-class) top-1 accuracy on the held-out seen
split and on the unseen split, their harmonic mean, and a 2x2 gate
confusion matrix (true domain x gated domain) that isolates gate quality
from classifier quality.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classify import NearestEmbeddingClassifier
from .data import GzslDataset
from .errors import ConfigError, DomainError, EvaluationError, MetricError
from .gates import GATE_FUNCTIONS, Domain, ThresholdSet, gate_statistics
from .mlp import MlpParams, forward

STRATEGIES = ("ol", "dl", "ws")
BASELINE_TAG = "nogate"


@dataclass
class Prediction:
    gate: Domain
    predicted_class: int
    true_domain: Domain | None = None
    true_class: int | None = None

    @property
    def correct(self) -> bool:
        """Right domain and right class within it."""
        return self.gate == self.true_domain and self.predicted_class == self.true_class


@dataclass
class EvaluationReport:
    strategy: str
    acc_s: float
    acc_u: float
    h: float
    per_class_acc: dict[tuple[str, int], float]
    gate_confusion: dict[tuple[Domain, Domain], int]
    runtime: float = 0.0

    def gate_recalls(self) -> tuple[float, float]:
        """(seen recall, unseen recall) of the gate itself."""
        c = self.gate_confusion
        seen_total = c[(Domain.SEEN, Domain.SEEN)] + c[(Domain.SEEN, Domain.UNSEEN)]
        unseen_total = c[(Domain.UNSEEN, Domain.SEEN)] + c[(Domain.UNSEEN, Domain.UNSEEN)]
        sr = c[(Domain.SEEN, Domain.SEEN)] / seen_total if seen_total else 0.0
        ur = c[(Domain.UNSEEN, Domain.UNSEEN)] / unseen_total if unseen_total else 0.0
        return sr, ur

    def balanced_gate_accuracy(self) -> float:
        sr, ur = self.gate_recalls()
        return 0.5 * (sr + ur)


def harmonic_mean(acc_s: float, acc_u: float) -> float:
    """2ab/(a+b) on [0,1] inputs; defined as 0 when both are 0."""
    for name, v in (("acc_s", acc_s), ("acc_u", acc_u)):
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"{name}={v} outside [0, 1]")
    if acc_s + acc_u == 0.0:
        return 0.0
    return 2.0 * acc_s * acc_u / (acc_s + acc_u)


def per_class_top1(predictions, classes) -> dict[int, float]:
    """Per-class correct fraction over predictions sharing one true domain.

    A prediction counts as correct only if it was gated into the right
    domain and assigned the right class there.
    """
    out = {}
    for c in classes:
        hits = [p for p in predictions if p.true_class == c]
        if not hits:
            raise MetricError(f"class {c} has no test instances")
        out[c] = sum(1 for p in hits if p.correct) / len(hits)
    return out


def predict(mapper: MlpParams, thresholds: ThresholdSet, strategy: str, x,
            seen_emb, unseen_emb, seen_classifier=None, unseen_classifier=None,
            gate_fn=None, true_domain: Domain | None = None,
            true_class: int | None = None) -> Prediction:
    """Gate one instance and classify it inside the gated domain.

    ``gate_fn`` overrides the named strategy with any callable
    ``(GateStatistics, ThresholdSet) -> Domain``; classifier slots accept
    any object with ``classify(x) -> int``.
    """
    if gate_fn is None:
        try:
            gate_fn = GATE_FUNCTIONS[strategy]
        except KeyError:
            raise ConfigError(
                f"unknown strategy {strategy!r}, expected one of {sorted(GATE_FUNCTIONS)}"
            ) from None
    projected = forward(mapper, x)
    stats = gate_statistics(projected, seen_emb, thresholds.l)
    decision = gate_fn(stats, thresholds)
    if decision == Domain.SEEN:
        clf = seen_classifier or NearestEmbeddingClassifier(mapper, seen_emb)
    else:
        clf = unseen_classifier or NearestEmbeddingClassifier(mapper, unseen_emb)
    return Prediction(
        gate=decision,
        predicted_class=int(clf.classify(x)),
        true_domain=true_domain,
        true_class=true_class,
    )


def _score_predictions(strategy: str, seen_preds, unseen_preds,
                       n_seen_classes: int, n_unseen_classes: int,
                       runtime: float) -> EvaluationReport:
    per_seen = per_class_top1(seen_preds, range(n_seen_classes))
    per_unseen = per_class_top1(unseen_preds, range(n_unseen_classes))
    acc_s = float(np.mean(list(per_seen.values())))
    acc_u = float(np.mean(list(per_unseen.values())))
    confusion = {(t, g): 0 for t in Domain for g in Domain}
    for p in seen_preds + unseen_preds:
        confusion[(p.true_domain, p.gate)] += 1
    report = EvaluationReport(
        strategy=strategy,
        acc_s=acc_s,
        acc_u=acc_u,
        h=harmonic_mean(acc_s, acc_u),
        per_class_acc={
            **{("seen", c): a for c, a in per_seen.items()},
            **{("unseen", c): a for c, a in per_unseen.items()},
        },
        gate_confusion=confusion,
        runtime=runtime,
    )
    assert report.h <= max(acc_s, acc_u) + 1e-12
    assert report.h <= 2.0 * min(acc_s, acc_u) + 1e-12
    assert sum(confusion.values()) == len(seen_preds) + len(unseen_preds)
    return report


def evaluate(mapper: MlpParams, thresholds: ThresholdSet, strategy: str,
             dataset: GzslDataset, seen_classifier=None, unseen_classifier=None,
             gate_fn=None) -> EvaluationReport:
    """Run the gate + route flow over both test splits and report metrics."""
    if dataset.seen_test_x.shape[0] == 0 or dataset.unseen_test_x.shape[0] == 0:
        raise EvaluationError("evaluate needs nonempty seen_test and unseen_test splits")
    t0 = time.perf_counter()
    seen_clf = seen_classifier or NearestEmbeddingClassifier(mapper, dataset.seen_emb)
    unseen_clf = unseen_classifier or NearestEmbeddingClassifier(mapper, dataset.unseen_emb)

    def run_split(xs, ys, true_domain):
        return [
            predict(mapper, thresholds, strategy, x, dataset.seen_emb, dataset.unseen_emb,
                    seen_classifier=seen_clf, unseen_classifier=unseen_clf, gate_fn=gate_fn,
                    true_domain=true_domain, true_class=int(y))
            for x, y in zip(xs, ys)
        ]

    seen_preds = run_split(dataset.seen_test_x, dataset.seen_test_y, Domain.SEEN)
    unseen_preds = run_split(dataset.unseen_test_x, dataset.unseen_test_y, Domain.UNSEEN)
    return _score_predictions(
        strategy, seen_preds, unseen_preds,
        dataset.n_seen_classes, dataset.n_unseen_classes,
        time.perf_counter() - t0,
    )


def evaluate_baseline(mapper: MlpParams, dataset: GzslDataset) -> EvaluationReport:
    """No-gate reference: one nearest-embedding scan over the union table.

    The winning table acts as an implicit gate so the confusion matrix
    stays comparable with the gated strategies.  Between equal seen and
    unseen distances the seen table wins (it comes first in the union).
    """
    if dataset.seen_test_x.shape[0] == 0 or dataset.unseen_test_x.shape[0] == 0:
        raise EvaluationError("evaluate needs nonempty seen_test and unseen_test splits")
    t0 = time.perf_counter()

    def run_split(xs, ys, true_domain):
        preds = []
        for x, y in zip(xs, ys):
            p = forward(mapper, x)
            d_seen = np.sum((dataset.seen_emb - p) ** 2, axis=1)
            d_unseen = np.sum((dataset.unseen_emb - p) ** 2, axis=1)
            if d_seen.min() <= d_unseen.min():
                gate, cls = Domain.SEEN, int(np.argmin(d_seen))
            else:
                gate, cls = Domain.UNSEEN, int(np.argmin(d_unseen))
            preds.append(Prediction(gate, cls, true_domain, int(y)))
        return preds

    seen_preds = run_split(dataset.seen_test_x, dataset.seen_test_y, Domain.SEEN)
    unseen_preds = run_split(dataset.unseen_test_x, dataset.unseen_test_y, Domain.UNSEEN)
    return _score_predictions(
        BASELINE_TAG, seen_preds, unseen_preds,
        dataset.n_seen_classes, dataset.n_unseen_classes,
        time.perf_counter() - t0,
    )


def render_report_text(report: EvaluationReport) -> str:
    """Deterministic human-readable report (no wall-clock content)."""
    sr, ur = report.gate_recalls()
    c = report.gate_confusion
    lines = [
        f"strategy: {report.strategy}",
        f"seen macro top-1 accuracy:   {report.acc_s:.6f}",
        f"unseen macro top-1 accuracy: {report.acc_u:.6f}",
        f"harmonic mean:               {report.h:.6f}",
        "",
        "gate confusion (rows: true domain, cols: gated domain)",
        "            gated seen  gated unseen",
        f"true seen   {c[(Domain.SEEN, Domain.SEEN)]:>10d}  {c[(Domain.SEEN, Domain.UNSEEN)]:>12d}",
        f"true unseen {c[(Domain.UNSEEN, Domain.SEEN)]:>10d}  {c[(Domain.UNSEEN, Domain.UNSEEN)]:>12d}",
        f"gate seen recall:     {sr:.6f}",
        f"gate unseen recall:   {ur:.6f}",
        f"balanced gate accuracy: {report.balanced_gate_accuracy():.6f}",
        "",
        "per-class accuracy",
    ]
    for (domain, cls), acc in sorted(report.per_class_acc.items()):
        lines.append(f"  {domain}/{cls}: {acc:.6f}")
    return "\n".join(lines) + "\n"


def render_report_kv(report: EvaluationReport, provenance: dict | None = None) -> str:
    """Machine-readable key=value form consumed by the CLI sweep."""
    sr, ur = report.gate_recalls()
    c = report.gate_confusion
    pairs = [
        ("strategy", report.strategy),
        ("acc_s", repr(report.acc_s)),
        ("acc_u", repr(report.acc_u)),
        ("h", repr(report.h)),
        ("gate_seen_seen", c[(Domain.SEEN, Domain.SEEN)]),
        ("gate_seen_unseen", c[(Domain.SEEN, Domain.UNSEEN)]),
        ("gate_unseen_seen", c[(Domain.UNSEEN, Domain.SEEN)]),
        ("gate_unseen_unseen", c[(Domain.UNSEEN, Domain.UNSEEN)]),
        ("gate_seen_recall", repr(sr)),
        ("gate_unseen_recall", repr(ur)),
        ("balanced_gate_accuracy", repr(report.balanced_gate_accuracy())),
    ]
    pairs += [
        (f"acc_{domain}_{cls}", repr(acc))
        for (domain, cls), acc in sorted(report.per_class_acc.items())
    ]
    if provenance:
        pairs += [(f"cfg_{k}", provenance[k]) for k in sorted(provenance)]
    return "".join(f"{k}={v}\n" for k, v in pairs)


def write_report(report: EvaluationReport, txt_path, kv_path,
                 provenance: dict | None = None) -> None:
    Path(txt_path).write_text(render_report_text(report))
    Path(kv_path).write_text(render_report_kv(report, provenance))
