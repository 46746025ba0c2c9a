"""Exemplar selection by affinity propagation over capture conditions.

Clustering runs in two passes: first over pose angles, then over the
(luminance, contrast) measurements inside each pose cluster. The winner of
each lighting cluster becomes an exemplar weighted by its cluster population.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .capture import ConditionVector, MetricConfig, PoseAngles, RoiRecord, condition_vector
from .errors import ConvergenceError, DataError
from .image import GrayImage

DEFAULT_DAMPING = 0.9
DEFAULT_MAX_ITER = 1000
DEFAULT_STABLE_WINDOW = 50


@dataclass(frozen=True)
class SimilarityMatrix:
    """Pairwise similarities with preferences on the diagonal.

    Off-diagonal entries are negated squared distances, hence <= 0.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] == 0:
            raise DataError(f"similarity matrix must be square and non-empty, got {v.shape}")
        off = v[~np.eye(v.shape[0], dtype=bool)]
        if off.size and off.max() > 1e-12:
            raise DataError("off-diagonal similarities must be <= 0")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def with_preference(self, preference: float | np.ndarray) -> SimilarityMatrix:
        v = self.values.copy()
        np.fill_diagonal(v, preference)
        return SimilarityMatrix(v)

    def median_preference(self) -> float:
        """Median of the off-diagonal similarities (0 for a single sample)."""
        if self.n == 1:
            return 0.0
        off = self.values[~np.eye(self.n, dtype=bool)]
        return float(np.median(off))


@dataclass
class ApState:
    """Message matrices of one affinity-propagation run."""

    responsibilities: np.ndarray
    availabilities: np.ndarray
    iteration: int = 0


@dataclass(frozen=True)
class ClusterResult:
    exemplar_indices: tuple[int, ...]
    assignment: tuple[int, ...]
    iterations_run: int
    converged: bool

    def members(self, exemplar: int) -> list[int]:
        return [i for i, e in enumerate(self.assignment) if e == exemplar]


def _negated_sq_distances(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return -np.einsum("ijk,ijk->ij", diff, diff)


def pose_similarities(poses: list[PoseAngles]) -> SimilarityMatrix:
    """s(i,k) = -||p_i - p_k||^2 over (pitch, yaw, roll) in degrees."""
    if not poses:
        raise DataError("need at least one pose")
    pts = np.stack([p.as_array() for p in poses])
    return SimilarityMatrix(_negated_sq_distances(pts))


def lighting_similarities(conditions: list[ConditionVector]) -> SimilarityMatrix:
    """s(i,k) = -||u_i - u_k||^2 over (luminance, contrast)."""
    if not conditions:
        raise DataError("need at least one condition vector")
    pts = np.stack([c.lighting() for c in conditions])
    return SimilarityMatrix(_negated_sq_distances(pts))


def _argmax_lowest(row: np.ndarray) -> int:
    """Index of the maximum, lowest index on exact ties."""
    return int(np.flatnonzero(row == row.max())[0])


def _net_similarity(S: np.ndarray, exemplars, assignment) -> float:
    """Assigned similarities of non-exemplars plus exemplar preferences."""
    ex = set(exemplars)
    total = sum(S[k, k] for k in exemplars)
    total += sum(S[i, k] for i, k in enumerate(assignment) if i not in ex)
    return float(total)


def _assign_to(E: np.ndarray, exemplars: tuple[int, ...]) -> tuple[int, ...]:
    ex = np.array(exemplars)
    out = []
    for i in range(E.shape[0]):
        if i in exemplars:
            out.append(i)
        else:
            out.append(int(ex[_argmax_lowest(E[i, ex])]))
    return tuple(out)


def _refine_exemplars(
    S: np.ndarray, exemplars: tuple[int, ...], assignment: tuple[int, ...]
) -> tuple[int, ...]:
    """Re-center each cluster on the member with the largest similarity sum.

    Mirrors the post-convergence refinement of the reference implementation;
    cluster count is preserved.
    """
    refined = []
    for k in exemplars:
        members = [i for i, e in enumerate(assignment) if e == k]
        sums = [sum(S[i, m] for i in members) for m in members]
        best = max(sums)
        refined.append(members[sums.index(best)])
    return tuple(sorted(set(refined)))


def ap_cluster(
    s: SimilarityMatrix,
    preference: float | np.ndarray | None = None,
    damping: float = DEFAULT_DAMPING,
    max_iter: int = DEFAULT_MAX_ITER,
    stable_window: int = DEFAULT_STABLE_WINDOW,
    state: ApState | None = None,
) -> ClusterResult:
    """Cluster by exchanging responsibility/availability messages.

    Updates are damped (``new = damping*old + (1-damping)*computed``) and the
    run stops once the per-sample exemplar decisions stay unchanged for
    ``stable_window`` consecutive iterations. Exemplars are the samples whose
    own index maximizes ``a(i,:) + r(i,:)``; every other sample is assigned to
    the exemplar maximizing that same criterion, lowest index on ties.

    Message passing can settle on a poor fixed point, so the decoded solution
    is post-processed: each cluster is re-centered on the member with the
    largest within-cluster similarity sum (the reference implementation's
    refinement step), and the result is floored at the best single-exemplar
    solution. Whichever candidate achieves the highest net similarity wins,
    with the decoded structure preferred on ties.
    """
    if not (0.5 <= damping < 1.0):
        raise DataError(f"damping must lie in [0.5, 1), got {damping}")
    n = s.n
    if preference is None:
        preference = s.median_preference()
    S = s.with_preference(preference).values

    if n == 1:
        return ClusterResult((0,), (0,), 0, True)

    R = np.zeros((n, n))
    A = np.zeros((n, n))
    idx = np.arange(n)
    last_dec: np.ndarray | None = None
    stable = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        # responsibilities: r(i,k) = s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
        AS = A + S
        first = AS.argmax(axis=1)
        m1 = AS[idx, first]
        AS[idx, first] = -np.inf
        m2 = AS.max(axis=1)
        Rn = S - m1[:, None]
        Rn[idx, first] = S[idx, first] - m2
        R = damping * R + (1.0 - damping) * Rn

        # availabilities: a(i,k) = min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))
        # and a(k,k) = sum_{i' != k} max(0, r(i',k))
        Rp = np.maximum(R, 0.0)
        np.fill_diagonal(Rp, R.diagonal())
        An = Rp.sum(axis=0)[None, :] - Rp
        diag = An.diagonal().copy()
        An = np.minimum(An, 0.0)
        np.fill_diagonal(An, diag)
        A = damping * A + (1.0 - damping) * An

        dec = (A + R).argmax(axis=1)
        if last_dec is not None and np.array_equal(dec, last_dec):
            stable += 1
            if stable >= stable_window:
                converged = True
                break
        else:
            stable = 0
        last_dec = dec

    if state is not None:
        state.responsibilities = R
        state.availabilities = A
        state.iteration = it

    E = A + R
    if not np.isfinite(E).all():
        raise ConvergenceError("message matrices diverged to non-finite values")
    decisions = np.array([_argmax_lowest(E[i]) for i in range(n)])
    exemplars = tuple(int(i) for i in range(n) if decisions[i] == i)
    if not exemplars:
        raise ConvergenceError("no exemplar emerged from message passing")

    decoded = (exemplars, _assign_to(E, exemplars))
    refined_ex = _refine_exemplars(S, *decoded)
    refined = (refined_ex, _assign_to(E, refined_ex))
    best_single = max(range(n), key=lambda k: S[k, k] + sum(S[i, k] for i in range(n) if i != k))
    single = ((best_single,), tuple(best_single for _ in range(n)))
    candidates = [decoded, refined, single]
    nets = [_net_similarity(S, ex, asg) for ex, asg in candidates]
    ex_final, assign_final = candidates[int(np.argmax(nets))]
    return ClusterResult(ex_final, assign_final, it, converged)


def exemplar_weights(cluster_sizes: list[int], n: int) -> list[float]:
    """Per-exemplar weights n_ij / n."""
    if n <= 0:
        raise DataError("total count must be positive")
    if sum(cluster_sizes) != n:
        raise DataError(f"cluster sizes sum to {sum(cluster_sizes)}, expected {n}")
    return [size / n for size in cluster_sizes]


@dataclass(frozen=True)
class ClusterConfig:
    """Knobs of both clustering passes."""

    damping: float = DEFAULT_DAMPING
    max_iter: int = DEFAULT_MAX_ITER
    stable_window: int = DEFAULT_STABLE_WINDOW
    # diagonal preference: "median" or a numeric value applied to both passes
    preference: float | str = "median"
    # min-max normalize each axis of each clustering space to [0, 1]
    normalize_axes: bool = True
    metrics: MetricConfig = field(default_factory=MetricConfig)


@dataclass(frozen=True)
class Exemplar:
    """One selected generic ROI: its index, rendering pose, and lighting."""

    roi_index: int
    pose: PoseAngles
    condition: ConditionVector


@dataclass(frozen=True)
class ExemplarSet:
    """Weighted pose-and-lighting exemplars from the two-pass clustering."""

    exemplars: tuple[Exemplar, ...]
    weights: tuple[float, ...]
    pose_cluster_of: tuple[int, ...]
    # rendering pose of each pose cluster (its pose exemplar's angles)
    pose_exemplars: tuple[PoseAngles, ...]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.exemplars) or len(self.pose_cluster_of) != len(
            self.exemplars
        ):
            raise DataError("exemplar, weight, and cluster-id counts disagree")
        total = sum(self.weights)
        if self.exemplars and abs(total - 1.0) > 1e-9:
            raise DataError(f"weights sum to {total}, expected 1")

    @property
    def q(self) -> int:
        return len(self.exemplars)


def _minmax_normalize(points: np.ndarray) -> np.ndarray:
    lo = points.min(axis=0)
    span = points.max(axis=0) - lo
    out = points - lo
    nonzero = span > 0
    out[:, nonzero] /= span[nonzero]
    out[:, ~nonzero] = 0.0
    return out


def _cluster_points(points: np.ndarray, cfg: ClusterConfig) -> ClusterResult:
    pts = _minmax_normalize(points) if cfg.normalize_axes else points
    sim = SimilarityMatrix(_negated_sq_distances(pts))
    pref = sim.median_preference() if cfg.preference == "median" else float(cfg.preference)
    return ap_cluster(
        sim,
        preference=pref,
        damping=cfg.damping,
        max_iter=cfg.max_iter,
        stable_window=cfg.stable_window,
    )


def two_step_select(
    generic: list[RoiRecord],
    reference: GrayImage,
    cfg: ClusterConfig = ClusterConfig(),
    conditions: list[ConditionVector] | None = None,
) -> ExemplarSet:
    """Select weighted exemplars: cluster poses, then lighting per pose cluster.

    ``conditions`` may carry precomputed measurements; otherwise each generic
    ROI is measured against ``reference``. Every exemplar is an actual member
    of ``generic`` and the weights (lighting-cluster populations over the full
    generic count) sum to 1.
    """
    if not generic:
        raise DataError("generic set is empty")
    if conditions is None:
        conditions = [condition_vector(g, reference, cfg.metrics) for g in generic]
    if len(conditions) != len(generic):
        raise DataError("condition vector count does not match generic set")
    n = len(generic)

    pose_pts = np.stack([c.pose.as_array() for c in conditions])
    pose_result = _cluster_points(pose_pts, cfg)

    exemplars: list[Exemplar] = []
    weights: list[float] = []
    cluster_ids: list[int] = []
    pose_exemplars: list[PoseAngles] = []
    for cluster_id, pose_exemplar in enumerate(pose_result.exemplar_indices):
        members = pose_result.members(pose_exemplar)
        pose_exemplars.append(conditions[pose_exemplar].pose)
        lighting_pts = np.stack([conditions[m].lighting() for m in members])
        light_result = _cluster_points(lighting_pts, cfg)
        for light_exemplar in light_result.exemplar_indices:
            size = len(light_result.members(light_exemplar))
            roi_index = members[light_exemplar]
            exemplars.append(
                Exemplar(
                    roi_index=roi_index,
                    pose=conditions[pose_exemplar].pose,
                    condition=conditions[roi_index],
                )
            )
            weights.append(size / n)
            cluster_ids.append(cluster_id)

    return ExemplarSet(
        exemplars=tuple(exemplars),
        weights=tuple(weights),
        pose_cluster_of=tuple(cluster_ids),
        pose_exemplars=tuple(pose_exemplars),
    )
