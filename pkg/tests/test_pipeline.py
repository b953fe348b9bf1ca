import numpy as np
import pytest

from sdgzsl import (
    ConfigError,
    Domain,
    DomainError,
    MetricError,
    Prediction,
    STRATEGIES,
    TrainConfig,
    calibrate,
    evaluate,
    evaluate_baseline,
    harmonic_mean,
    per_class_top1,
    predict,
    train,
)
from sdgzsl.pipeline import render_report_kv, render_report_text
from test_gates import identity_fit_dataset, identity_mapper, make_thresholds


class TestHarmonicMean:
    def test_equal_arguments_fixed_point(self, np_rng):
        for _ in range(20):
            x = float(np_rng.uniform(0, 1))
            assert harmonic_mean(x, x) == pytest.approx(x, rel=1e-12)

    def test_zero_annihilates(self, np_rng):
        for _ in range(20):
            assert harmonic_mean(float(np_rng.uniform(0, 1)), 0.0) == 0.0
        assert harmonic_mean(0.0, 0.0) == 0.0

    def test_direct_evaluation(self):
        assert harmonic_mean(0.8, 0.2) == pytest.approx(0.32, rel=1e-12)

    def test_symmetry_and_max_bound(self, np_rng):
        for _ in range(200):
            a, b = float(np_rng.uniform(0, 1)), float(np_rng.uniform(0, 1))
            assert harmonic_mean(a, b) == pytest.approx(harmonic_mean(b, a), rel=1e-12)
            assert harmonic_mean(a, b) <= max(a, b) + 1e-12

    def test_domain_checked(self):
        with pytest.raises(DomainError):
            harmonic_mean(1.2, 0.5)
        with pytest.raises(DomainError):
            harmonic_mean(0.5, -0.1)


def pred(gate, cls, true_domain, true_cls):
    return Prediction(gate, cls, true_domain, true_cls)


class TestPerClassTop1:
    def test_all_correct(self):
        preds = [pred(Domain.SEEN, c, Domain.SEEN, c) for c in (0, 1, 1, 0)]
        assert per_class_top1(preds, [0, 1]) == {0: 1.0, 1: 1.0}

    def test_hand_counted_example(self):
        # class 0: 2 of 4 correct, class 1: 4 of 4 correct
        preds = (
            [pred(Domain.SEEN, 0, Domain.SEEN, 0)] * 2
            + [pred(Domain.SEEN, 1, Domain.SEEN, 0)] * 2
            + [pred(Domain.SEEN, 1, Domain.SEEN, 1)] * 4
        )
        out = per_class_top1(preds, [0, 1])
        assert out == {0: 0.5, 1: 1.0}
        assert float(np.mean(list(out.values()))) == 0.75

    def test_all_wrong(self):
        preds = [pred(Domain.SEEN, 1 - c, Domain.SEEN, c) for c in (0, 1, 0, 1)]
        assert per_class_top1(preds, [0, 1]) == {0: 0.0, 1: 0.0}

    def test_wrong_domain_counts_as_incorrect(self):
        preds = [pred(Domain.UNSEEN, 0, Domain.SEEN, 0)]
        assert per_class_top1(preds, [0]) == {0: 0.0}

    def test_empty_class_rejected(self):
        preds = [pred(Domain.SEEN, 0, Domain.SEEN, 0)]
        with pytest.raises(MetricError, match="class 1"):
            per_class_top1(preds, [0, 1])


class TestPredict:
    def test_routing_contract(self, bench_dataset, bench_mapper):
        params, _ = bench_mapper
        th = calibrate(params, bench_dataset)
        for x in bench_dataset.seen_test_x[:20]:
            for tag in STRATEGIES:
                p = predict(params, th, tag, x, bench_dataset.seen_emb, bench_dataset.unseen_emb)
                limit = (
                    bench_dataset.n_seen_classes
                    if p.gate == Domain.SEEN
                    else bench_dataset.n_unseen_classes
                )
                assert 0 <= p.predicted_class < limit

    def test_unknown_strategy(self, bench_dataset, bench_mapper):
        params, _ = bench_mapper
        th = calibrate(params, bench_dataset)
        with pytest.raises(ConfigError, match="unknown strategy"):
            predict(params, th, "bogus", bench_dataset.seen_test_x[0],
                    bench_dataset.seen_emb, bench_dataset.unseen_emb)

    def test_noiseless_seen_instances_classified_to_their_class(self, noiseless_dataset):
        params, history = train(noiseless_dataset, TrainConfig())
        assert history[-1] < 1e-3
        th = calibrate(params, noiseless_dataset)
        gated_seen = 0
        for x, y in zip(noiseless_dataset.seen_test_x, noiseless_dataset.seen_test_y):
            p = predict(params, th, "dl", x, noiseless_dataset.seen_emb,
                        noiseless_dataset.unseen_emb, true_domain=Domain.SEEN, true_class=int(y))
            if p.gate == Domain.SEEN:
                gated_seen += 1
                assert p.predicted_class == int(y)
        # adaptive thresholds sit at mean+std of near-zero statistics, so a
        # minority of seen instances can fall outside; the bulk must not
        assert gated_seen >= 0.8 * len(noiseless_dataset.seen_test_y)


class StubClassifier:
    def __init__(self, constant):
        self.constant = constant

    def classify(self, x):
        return self.constant


class TestEvaluate:
    def test_perfect_gate_and_classifiers(self):
        ds = identity_fit_dataset()
        mapper = identity_mapper(3)
        th = make_thresholds(m_dl=0.5, m_msd=0.5, m_ws=0.5)
        report = evaluate(mapper, th, "dl", ds)
        assert report.acc_s == 1.0 and report.acc_u == 1.0 and report.h == 1.0
        assert report.gate_confusion[(Domain.SEEN, Domain.UNSEEN)] == 0
        assert report.gate_confusion[(Domain.UNSEEN, Domain.SEEN)] == 0

    def test_always_seen_gate_zeroes_unseen_accuracy(self, bench_dataset, bench_mapper):
        params, _ = bench_mapper
        th = calibrate(params, bench_dataset)
        report = evaluate(params, th, "ol", bench_dataset,
                          gate_fn=lambda stats, thresholds: Domain.SEEN)
        assert report.acc_u == 0.0
        assert report.h == 0.0
        assert report.gate_confusion[(Domain.UNSEEN, Domain.UNSEEN)] == 0

    def test_report_invariants(self, bench_dataset, bench_mapper):
        params, _ = bench_mapper
        th = calibrate(params, bench_dataset)
        for tag in STRATEGIES:
            r = evaluate(params, th, tag, bench_dataset)
            assert r.h == pytest.approx(harmonic_mean(r.acc_s, r.acc_u), rel=1e-12)
            assert sum(r.gate_confusion.values()) == (
                bench_dataset.seen_test_x.shape[0] + bench_dataset.unseen_test_x.shape[0]
            )
            assert r.h <= 2.0 * min(r.acc_s, r.acc_u) + 1e-12
            assert r.h <= max(r.acc_s, r.acc_u) + 1e-12
            assert r.acc_s == pytest.approx(
                np.mean([r.per_class_acc[("seen", c)] for c in range(bench_dataset.n_seen_classes)]),
                rel=1e-12,
            )

    def test_strategies_differ_only_through_gates(self, bench_dataset, bench_mapper):
        params, _ = bench_mapper
        th = calibrate(params, bench_dataset)
        by_tag = {}
        for tag in STRATEGIES:
            by_tag[tag] = [
                predict(params, th, tag, x, bench_dataset.seen_emb, bench_dataset.unseen_emb)
                for x in bench_dataset.seen_test_x
            ]
        for a in STRATEGIES:
            for b in STRATEGIES:
                for pa, pb in zip(by_tag[a], by_tag[b]):
                    if pa.gate == pb.gate:
                        assert pa.predicted_class == pb.predicted_class

    def test_stub_classifier_leaves_routing_unchanged(self, bench_dataset, bench_mapper):
        params, _ = bench_mapper
        th = calibrate(params, bench_dataset)
        default = evaluate(params, th, "ws", bench_dataset)
        stubbed = evaluate(params, th, "ws", bench_dataset,
                           seen_classifier=StubClassifier(0), unseen_classifier=StubClassifier(0))
        assert stubbed.gate_confusion == default.gate_confusion

    def test_baseline_report_well_formed(self, bench_dataset, bench_mapper):
        params, _ = bench_mapper
        r = evaluate_baseline(params, bench_dataset)
        assert r.strategy == "nogate"
        assert r.h == pytest.approx(harmonic_mean(r.acc_s, r.acc_u), rel=1e-12)
        assert sum(r.gate_confusion.values()) == 260


class TestReportRendering:
    def test_kv_h_field_recomputes(self, bench_dataset, bench_mapper):
        params, _ = bench_mapper
        th = calibrate(params, bench_dataset)
        r = evaluate(params, th, "dl", bench_dataset)
        kv = dict(
            line.split("=", 1)
            for line in render_report_kv(r).strip().splitlines()
        )
        acc_s, acc_u, h = float(kv["acc_s"]), float(kv["acc_u"]), float(kv["h"])
        assert h == pytest.approx(harmonic_mean(acc_s, acc_u), rel=1e-12)

    def test_text_report_has_no_wall_clock(self, bench_dataset, bench_mapper):
        params, _ = bench_mapper
        th = calibrate(params, bench_dataset)
        r = evaluate(params, th, "ol", bench_dataset)
        text = render_report_text(r)
        assert "runtime" not in text
        assert f"{r.acc_s:.6f}" in text
