import numpy as np
import pytest

from dsfs.capture import Domain, PoseAngles, RoiRecord
from dsfs.errors import DataError, DimensionMismatchError
from dsfs.evaluation import BenchmarkConfig, ScoredTrial, dsq, roc_metrics, run_benchmark
from dsfs.image import GrayImage

from oracles import pair_counting_auc


def trials(pos_scores, neg_scores):
    return [ScoredTrial(s, True) for s in pos_scores] + [
        ScoredTrial(s, False) for s in neg_scores
    ]


class TestDsq:
    def test_identical_orthonormal_dictionaries(self, rng):
        q, _ = np.linalg.qr(rng.normal(size=(20, 6)))
        assert dsq(q, q) == pytest.approx(np.sqrt(6), abs=1e-12)

    def test_orthogonal_dictionaries_give_zero(self):
        a = np.eye(8)[:, :3]
        b = np.eye(8)[:, 3:6]
        assert dsq(a, b) == pytest.approx(0.0, abs=1e-15)

    def test_symmetry(self, rng):
        for _ in range(5):
            a = rng.normal(size=(15, 4))
            b = rng.normal(size=(15, 4))
            assert dsq(a, b) == pytest.approx(dsq(b, a), abs=1e-12)

    def test_normalization_makes_scale_irrelevant(self, rng):
        a = rng.normal(size=(10, 3))
        b = rng.normal(size=(10, 3))
        assert dsq(5 * a, b) == pytest.approx(dsq(a, b), abs=1e-12)

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(DimensionMismatchError):
            dsq(rng.normal(size=(10, 3)), rng.normal(size=(10, 4)))


class TestRocMetrics:
    def test_perfect_separation(self):
        c = roc_metrics(trials([3, 4, 5], [0, 1, 2]))
        assert c.auc == 1.0
        assert c.aupr == 1.0

    def test_all_tied_scores_give_chance(self):
        c = roc_metrics(trials([1.0, 1.0], [1.0, 1.0]))
        assert c.auc == pytest.approx(0.5, abs=1e-12)
        assert c.aupr == pytest.approx(0.5, abs=1e-12)  # prevalence

    def test_interleaved_scores_match_pair_counting(self):
        pos = [8.0, 6.0, 4.0, 2.0]
        neg = [7.0, 5.0, 3.0, 1.0]
        c = roc_metrics(trials(pos, neg))
        assert c.auc == pytest.approx(pair_counting_auc(pos, neg), abs=1e-12)

    def test_random_instances_match_pair_counting(self, rng):
        for _ in range(20):
            n_pos = int(rng.integers(1, 60))
            n_neg = int(rng.integers(1, 60))
            # quantized scores force plenty of ties
            pos = np.round(rng.normal(size=n_pos), 1).tolist()
            neg = np.round(rng.normal(size=n_neg) - 0.3, 1).tolist()
            c = roc_metrics(trials(pos, neg))
            assert c.auc == pytest.approx(pair_counting_auc(pos, neg), abs=1e-12)

    def test_pauc_at_full_cutoff_equals_auc(self, rng):
        pos = rng.normal(size=30).tolist()
        neg = (rng.normal(size=40) - 0.5).tolist()
        c = roc_metrics(trials(pos, neg), pauc_cutoff=1.0)
        assert c.pauc_raw == pytest.approx(c.auc, abs=1e-12)
        assert c.pauc_normalized == pytest.approx(c.auc, abs=1e-12)

    def test_pauc_interpolates_at_cutoff(self):
        # one negative between two positives: the ROC is a step polyline
        c = roc_metrics(trials([3.0, 1.0], [2.0]), pauc_cutoff=0.5)
        # fpr 0 -> tpr 0.5; fpr reaches 1 only at threshold below 1.0
        assert c.pauc_raw == pytest.approx(0.25, abs=1e-12)

    def test_roc_points_monotone(self, rng):
        pos = rng.normal(size=25).tolist()
        neg = rng.normal(size=25).tolist()
        pts = roc_metrics(trials(pos, neg)).roc_points
        fprs = [p[0] for p in pts]
        tprs = [p[1] for p in pts]
        assert fprs == sorted(fprs)
        assert tprs == sorted(tprs)
        assert pts[0] == (0.0, 0.0) and pts[-1] == (1.0, 1.0)

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            roc_metrics([ScoredTrial(1.0, True)])

    def test_cutoff_validated(self):
        with pytest.raises(DataError):
            roc_metrics(trials([1], [0]), pauc_cutoff=0.0)


def make_roi(rng, subject, domain=Domain.OPERATIONAL, size=16):
    return RoiRecord(GrayImage(rng.uniform(0.1, 0.9, (size, size))),
                     PoseAngles(0, 0, 0), subject, domain)


class TestRunBenchmark:
    def test_subject_overlap_rejected(self, rng, head_model):
        gallery = [make_roi(rng, "a", Domain.ENROLLMENT)]
        generic = [make_roi(rng, "a")]
        with pytest.raises(DataError):
            run_benchmark(gallery, generic, [make_roi(rng, "p")], head_model)

    def test_probes_equal_to_stills_give_perfect_auc(self, rng, head_model):
        # empty generic set: augmented dictionary degenerates to the baseline
        gallery = [make_roi(rng, s, Domain.ENROLLMENT) for s in ("a", "b", "c")]
        probes = [
            RoiRecord(g.image, g.pose, g.subject_id, Domain.OPERATIONAL)
            for g in gallery
        ] + [make_roi(rng, "imposter")]
        cfg = BenchmarkConfig()
        report = run_benchmark(gallery, [], probes, head_model, cfg)
        assert report.q == 0
        assert report.notes
        assert report.baseline.auc == 1.0
        assert report.augmented.auc == report.baseline.auc
