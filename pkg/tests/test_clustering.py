import numpy as np
import pytest

from dsfs.capture import ConditionVector, Domain, PoseAngles, RoiRecord
from dsfs.clustering import (
    SimilarityMatrix,
    ap_cluster,
    exemplar_weights,
    lighting_similarities,
    pose_similarities,
    two_step_select,
)
from dsfs.errors import DataError
from dsfs.image import GrayImage

from oracles import best_single_exemplar, naive_ap, net_similarity


def sim_from_points(points, preference):
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    s = -(diff**2).sum(-1)
    np.fill_diagonal(s, preference)
    return SimilarityMatrix(s)


class TestSimilarities:
    def test_identical_poses_give_zero(self):
        s = pose_similarities([PoseAngles(5, 5, 5), PoseAngles(5, 5, 5)])
        assert s.values[0, 1] == 0.0

    def test_yaw_distance_squared(self):
        s = pose_similarities([PoseAngles(0, 0, 0), PoseAngles(0, 30, 0)])
        assert s.values[0, 1] == -900.0

    def test_symmetry(self, rng):
        poses = [PoseAngles(*rng.uniform(-40, 40, 3)) for _ in range(6)]
        s = pose_similarities(poses).values
        np.testing.assert_allclose(s, s.T)

    def test_lighting_distance(self):
        cs = [
            ConditionVector(PoseAngles(0, 0, 0), 1.0, 1.0),
            ConditionVector(PoseAngles(0, 0, 0), 0.8, 1.0),
        ]
        s = lighting_similarities(cs)
        assert s.values[0, 1] == pytest.approx(-0.04, rel=1e-12)

    def test_empty_input_rejected(self):
        with pytest.raises(DataError):
            pose_similarities([])

    def test_positive_offdiagonal_rejected(self):
        with pytest.raises(DataError):
            SimilarityMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))


class TestApCluster:
    def test_single_sample_is_its_own_exemplar(self):
        result = ap_cluster(SimilarityMatrix(np.zeros((1, 1))))
        assert result.exemplar_indices == (0,)
        assert result.assignment == (0,)

    def test_two_coincident_points_one_exemplar(self):
        s = sim_from_points([[0.0, 0.0], [0.0, 0.0]], preference=0.0)
        result = ap_cluster(s, preference=0.0)
        assert result.exemplar_indices == (0,)
        assert result.assignment == (0, 0)

    def test_three_point_fixture_matches_reference_oracle(self):
        # yaw {0, 1, 60} with the median preference
        sim = pose_similarities([PoseAngles(0, y, 0) for y in (0.0, 1.0, 60.0)])
        pref = sim.median_preference()
        result = ap_cluster(sim, preference=pref)
        oracle_ex, oracle_assign, _ = naive_ap(sim.with_preference(pref).values)
        assert list(result.exemplar_indices) == oracle_ex
        assert list(result.assignment) == oracle_assign

    def test_three_point_fixture_splits_far_sample(self):
        # off the degenerate median boundary, {0,1} share an exemplar and 60
        # stands alone
        sim = pose_similarities([PoseAngles(0, y, 0) for y in (0.0, 1.0, 60.0)])
        result = ap_cluster(sim, preference=-1740.0)
        assert result.exemplar_indices == (0, 2)
        assert result.assignment == (0, 0, 2)

    def test_exemplars_are_members_and_assignments_maximize_criterion(self, rng):
        for _ in range(20):
            pts = rng.uniform(-50, 50, size=(5, 3))
            sim = sim_from_points(pts, 0.0)
            pref = sim.median_preference()
            from dsfs.clustering import ApState

            state = ApState(np.zeros((5, 5)), np.zeros((5, 5)))
            result = ap_cluster(sim, preference=pref, state=state)
            ex = set(result.exemplar_indices)
            assert ex <= set(range(5))
            E = state.availabilities + state.responsibilities
            for i, assigned in enumerate(result.assignment):
                assert assigned in ex
                cols = list(ex)
                assert E[i, assigned] == pytest.approx(
                    max(E[i, k] for k in cols), abs=1e-12
                )

    def test_net_similarity_beats_single_exemplar_oracle(self, rng):
        for _ in range(30):
            pts = rng.uniform(-60, 60, size=(5, 3))
            sim = sim_from_points(pts, 0.0)
            pref = sim.median_preference()
            result = ap_cluster(sim, preference=pref)
            S = sim.with_preference(pref).values
            achieved = net_similarity(S, result.exemplar_indices, result.assignment)
            assert achieved >= best_single_exemplar(S) - 1e-9

    def test_damping_validated(self):
        with pytest.raises(DataError):
            ap_cluster(SimilarityMatrix(np.zeros((2, 2))), damping=0.3)

    def test_matches_naive_oracle_on_random_instances(self, rng):
        for _ in range(5):
            pts = rng.uniform(-10, 10, size=(6, 2))
            sim = sim_from_points(pts, 0.0)
            pref = sim.median_preference()
            result = ap_cluster(sim, preference=pref)
            oracle_ex, oracle_assign, _ = naive_ap(sim.with_preference(pref).values)
            assert list(result.exemplar_indices) == oracle_ex
            assert list(result.assignment) == oracle_assign


class TestExemplarWeights:
    def test_single_cluster(self):
        assert exemplar_weights([4], 4) == [1.0]

    def test_three_one_split(self):
        assert exemplar_weights([3, 1], 4) == [0.75, 0.25]

    def test_uniform_split(self):
        assert exemplar_weights([1, 1, 1, 1], 4) == [0.25] * 4

    def test_size_mismatch_rejected(self):
        with pytest.raises(DataError):
            exemplar_weights([2, 1], 4)


def make_generic(rng, poses, lums):
    rois = []
    for pose, lum in zip(poses, lums):
        img = GrayImage(np.full((16, 16), lum))
        rois.append(RoiRecord(img, pose, f"g{len(rois)}", Domain.OPERATIONAL))
    return rois


class TestTwoStepSelect:
    def test_single_roi(self, rng):
        reference = GrayImage(np.full((16, 16), 0.5))
        generic = make_generic(rng, [PoseAngles(0, 0, 0)], [0.5])
        result = two_step_select(generic, reference)
        assert result.q == 1
        assert result.weights == (1.0,)
        assert result.exemplars[0].roi_index == 0

    def test_weights_reflect_lighting_cluster_sizes(self, rng):
        # one pose group; measured luminance splits 3-vs-1
        reference = GrayImage(np.full((16, 16), 0.5))
        poses = [PoseAngles(0, 0, 0)] * 4
        generic = make_generic(rng, poses, [0.5] * 4)
        conditions = [
            ConditionVector(poses[0], lum, 1.0) for lum in (0.90, 0.92, 0.94, 0.10)
        ]
        result = two_step_select(generic, reference, conditions=conditions)
        assert result.q == 2
        assert sorted(result.weights) == [0.25, 0.75]
        assert sum(result.weights) == pytest.approx(1.0, abs=1e-12)

    def test_weights_sum_to_one_and_exemplars_are_members(self, rng):
        reference = GrayImage(np.full((16, 16), 0.5))
        poses = [PoseAngles(rng.uniform(-3, 3), yaw, rng.uniform(-3, 3))
                 for yaw in (-30, -28, 0, 2, 31, 29, -31, 1)]
        lums = rng.uniform(0.2, 0.8, len(poses))
        generic = make_generic(rng, poses, lums)
        result = two_step_select(generic, reference)
        assert sum(result.weights) == pytest.approx(1.0, abs=1e-12)
        assert all(0 <= e.roi_index < len(generic) for e in result.exemplars)
        assert len(result.weights) == result.q
        assert len(result.pose_exemplars) == len(set(result.pose_cluster_of))

    def test_planted_pose_groups_recovered(self, rng):
        # three well-separated yaw groups; uniform lighting
        reference = GrayImage(np.full((16, 16), 0.5))
        yaws = [-40 + rng.uniform(-2, 2) for _ in range(6)]
        yaws += [rng.uniform(-2, 2) for _ in range(6)]
        yaws += [40 + rng.uniform(-2, 2) for _ in range(6)]
        poses = [PoseAngles(0, y, 0) for y in yaws]
        generic = make_generic(rng, poses, [0.5] * len(poses))
        result = two_step_select(generic, reference)
        assert len(result.pose_exemplars) == 3

    def test_empty_generic_rejected(self):
        with pytest.raises(DataError):
            two_step_select([], GrayImage(np.zeros((8, 8))))
