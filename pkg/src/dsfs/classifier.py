"""Cross-domain block dictionary and weighted block-sparse classification.

Each enrolled class contributes one block: its reference still column followed
by its synthetic columns. Probes are coded over the dictionary by a weighted
l2/l1 block program solved with alternating directions, labeled by the block
with the smallest reconstruction residual, and screened by the sparsity
concentration index.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .capture import RoiRecord
from .errors import DataError, DimensionMismatchError
from .image import GrayImage, resample
from .synthesis import SyntheticSet

_DICT_MAGIC = b"DSFSDICT1\n"


class SolverMode(Enum):
    PENALIZED = "penalized"
    EQUALITY = "equality"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the alternating-direction solver."""

    sparsity: float = 0.005
    rho: float = 1.0
    tol_primal: float = 1e-6
    tol_dual: float = 1e-6
    max_iter: int = 1000
    mode: SolverMode = SolverMode.PENALIZED

    def __post_init__(self) -> None:
        if self.sparsity <= 0 or self.rho <= 0:
            raise DataError("sparsity and rho must be positive")


@dataclass(frozen=True)
class CrossDomainDictionary:
    """Column dictionary with per-class blocks and per-column weights."""

    columns: np.ndarray
    block_slices: tuple[tuple[int, int], ...]
    class_ids: tuple[str, ...]
    column_weights: np.ndarray
    image_shape: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        cols = np.asarray(self.columns, dtype=np.float64)
        w = np.asarray(self.column_weights, dtype=np.float64)
        if cols.ndim != 2:
            raise DataError("dictionary must be a 2-D column matrix")
        if w.size != cols.shape[1]:
            raise DataError("one weight per column required")
        if (w <= 0).any():
            raise DataError("column weights must be strictly positive")
        covered = sorted(self.block_slices)
        edges = [0] + [stop for _, stop in covered]
        if [start for start, _ in covered] != edges[:-1] or edges[-1] != cols.shape[1]:
            raise DataError("blocks must partition the column range without overlap")
        if len(self.class_ids) != len(self.block_slices):
            raise DataError("one class id per block required")
        cols = cols.copy()
        cols.flags.writeable = False
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "column_weights", w)

    @property
    def n_classes(self) -> int:
        return len(self.block_slices)

    @property
    def n_columns(self) -> int:
        return self.columns.shape[1]

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    def block(self, i: int) -> np.ndarray:
        start, stop = self.block_slices[i]
        return self.columns[:, start:stop]

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        return [x[start:stop] for start, stop in self.block_slices]


@dataclass(frozen=True)
class SparseSolution:
    """Block-structured coefficients with residuals and diagnostics."""

    x: np.ndarray
    block_norms: np.ndarray
    residuals: np.ndarray
    sci: float
    iterations: int
    converged: bool


class Outcome(Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass(frozen=True)
class Decision:
    outcome: Outcome
    class_id: str | None
    score: float
    residual_ranking: tuple[tuple[str, float], ...]
    converged: bool = True


def vectorize(img: GrayImage, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Column-major flattening, optionally after resampling to a target shape."""
    if shape is not None and img.shape != shape:
        img = resample(img, *shape)
    return img.data.ravel(order="F").astype(np.float64)


def _unit(v: np.ndarray) -> np.ndarray:
    nv = np.linalg.norm(v)
    if nv == 0:
        raise DataError("cannot normalize a zero column")
    return v / nv


def invert_exemplar_weights(weights: np.ndarray) -> np.ndarray:
    """Reverse the weight ordering (w <- max + min - w), renormalized to sum 1."""
    w = np.asarray(weights, dtype=np.float64)
    flipped = w.max() + w.min() - w
    return flipped / flipped.sum()


def build_cross_domain_dictionary(
    stills: list[RoiRecord],
    synthetic: list[SyntheticSet],
    weights: np.ndarray,
    still_weight: float = 1.0,
    invert_weights: bool = False,
    image_shape: tuple[int, int] | None = None,
) -> CrossDomainDictionary:
    """Stack per-class blocks ``[still | synthetics]`` with unit-norm columns.

    Synthetic column ``j`` carries exemplar weight ``w_j`` (optionally
    inverted so that large clusters penalize less); still columns carry
    ``still_weight``.
    """
    if len(stills) != len(synthetic):
        raise DataError("one synthetic set per still required")
    if not stills:
        raise DataError("empty gallery")
    q = len(synthetic[0].rois)
    w = np.asarray(weights, dtype=np.float64)
    if w.size != q:
        raise DataError(f"got {w.size} weights for q={q} synthetic columns")
    if invert_weights and q:
        w = invert_exemplar_weights(w)
    if image_shape is None:
        image_shape = stills[0].image.shape

    cols: list[np.ndarray] = []
    col_weights: list[float] = []
    blocks: list[tuple[int, int]] = []
    ids: list[str] = []
    for still, synth in zip(stills, synthetic):
        if len(synth.rois) != q:
            raise DataError(
                f"subject {synth.subject_id}: {len(synth.rois)} synthetic ROIs, expected {q}"
            )
        if synth.subject_id != still.subject_id:
            raise DataError(
                f"subject ids misaligned: {still.subject_id} vs {synth.subject_id}"
            )
        start = len(cols)
        cols.append(_unit(vectorize(still.image, image_shape)))
        col_weights.append(still_weight)
        for j, roi in enumerate(synth.rois):
            cols.append(_unit(vectorize(roi, image_shape)))
            col_weights.append(float(w[j]))
        blocks.append((start, len(cols)))
        ids.append(still.subject_id)

    return CrossDomainDictionary(
        columns=np.column_stack(cols),
        block_slices=tuple(blocks),
        class_ids=tuple(ids),
        column_weights=np.array(col_weights),
        image_shape=image_shape,
    )


def group_prox(v: np.ndarray, kappa: float) -> np.ndarray:
    """Block soft-threshold: shrink toward zero, exactly zero within kappa."""
    if kappa < 0:
        raise DataError("threshold must be non-negative")
    norm = float(np.linalg.norm(v))
    if norm <= kappa:
        return np.zeros_like(v)
    return (1.0 - kappa / norm) * v


def sci(x: np.ndarray, block_slices: tuple[tuple[int, int], ...] | int) -> float:
    """Sparsity concentration index of a block-partitioned coefficient vector.

    1 when all l1 mass sits in one block, 0 when spread uniformly; an all-zero
    vector scores 0 (forcing rejection).
    """
    if isinstance(block_slices, int):
        n = block_slices
        if x.size % n:
            raise DataError("coefficients do not divide into equal blocks")
        width = x.size // n
        block_slices = tuple((i * width, (i + 1) * width) for i in range(n))
    n = len(block_slices)
    if n < 2:
        raise DataError("sci needs at least two classes")
    l1 = np.abs(x).sum()
    if l1 == 0:
        return 0.0
    block_l1 = max(np.abs(x[a:b]).sum() for a, b in block_slices)
    value = (n * block_l1 / l1 - 1.0) / (n - 1.0)
    return float(min(max(value, 0.0), 1.0))


class _GramCache:
    """Per-dictionary factorization of (D'^T D' + rho I), reused across probes."""

    def __init__(self) -> None:
        self.key: tuple[float, bool] | None = None
        self.factor = None
        self.scaled: np.ndarray | None = None
        self.pinv: np.ndarray | None = None


def _scaled_dictionary(D: CrossDomainDictionary, cfg: SolverConfig) -> _GramCache:
    cache = getattr(D, "_solver_cache", None)
    if cache is None:
        cache = _GramCache()
        object.__setattr__(D, "_solver_cache", cache)
    key = (cfg.rho, cfg.mode is SolverMode.EQUALITY)
    if cache.key != key:
        scaled = D.columns / D.column_weights[None, :]
        cache.scaled = scaled
        if cfg.mode is SolverMode.EQUALITY:
            cache.pinv = np.linalg.pinv(scaled)
        else:
            gram = scaled.T @ scaled + cfg.rho * np.eye(scaled.shape[1])
            cache.factor = cho_factor(gram)
        cache.key = key
    return cache


def solve_weighted_block_l1(
    D: CrossDomainDictionary, y: np.ndarray, cfg: SolverConfig = SolverConfig()
) -> SparseSolution:
    """Weighted l2/l1 block recovery by alternating directions.

    Solves in reweighted coordinates ``z = W x`` (so the per-column weights
    enter the penalty exactly), alternating a least-squares step, a per-block
    group shrinkage with threshold ``sparsity/rho``, and a dual ascent, until
    primal and dual residuals drop below tolerance. In equality mode the
    least-squares step becomes a projection onto ``D'z = y``.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size != D.dim:
        raise DimensionMismatchError(f"probe length {y.size}, dictionary rows {D.dim}")
    cache = _scaled_dictionary(D, cfg)
    scaled = cache.scaled
    n_cols = scaled.shape[1]
    slices = D.block_slices

    z = np.zeros(n_cols)
    u = np.zeros(n_cols)
    s = np.zeros(n_cols)
    converged = False
    it = 0
    if cfg.mode is SolverMode.EQUALITY:
        pinv = cache.pinv
        kappa = 1.0 / cfg.rho
        for it in range(1, cfg.max_iter + 1):
            v = u - s
            z = v - pinv @ (scaled @ v - y)
            u_old = u
            w = z + s
            u = np.concatenate([group_prox(w[a:b], kappa) for a, b in slices])
            s = s + z - u
            primal = np.linalg.norm(z - u)
            dual = cfg.rho * np.linalg.norm(u - u_old)
            if primal < cfg.tol_primal and dual < cfg.tol_dual:
                converged = True
                break
    else:
        aty = scaled.T @ y
        kappa = cfg.sparsity / cfg.rho
        for it in range(1, cfg.max_iter + 1):
            z = cho_solve(cache.factor, aty + cfg.rho * (u - s))
            u_old = u
            w = z + s
            u = np.concatenate([group_prox(w[a:b], kappa) for a, b in slices])
            s = s + z - u
            primal = np.linalg.norm(z - u)
            dual = cfg.rho * np.linalg.norm(u - u_old)
            if primal < cfg.tol_primal and dual < cfg.tol_dual:
                converged = True
                break

    x = u / D.column_weights
    block_norms = np.array([np.linalg.norm(x[a:b]) for a, b in slices])
    residuals = np.array(
        [np.linalg.norm(y - D.columns[:, a:b] @ x[a:b]) for a, b in slices]
    )
    return SparseSolution(
        x=x,
        block_norms=block_norms,
        residuals=residuals,
        sci=sci(x, slices),
        iterations=it,
        converged=converged,
    )


def penalized_objective(
    D: CrossDomainDictionary, y: np.ndarray, x: np.ndarray, sparsity: float
) -> float:
    """(1/2)||y - Dx||^2 + sparsity * sum_i ||W_i x[i]||_2."""
    wx = D.column_weights * x
    penalty = sum(np.linalg.norm(wx[a:b]) for a, b in D.block_slices)
    return float(0.5 * np.sum((y - D.columns @ x) ** 2) + sparsity * penalty)


def classify(sol: SparseSolution, D: CrossDomainDictionary, y: np.ndarray) -> int:
    """Class index with the smallest block residual (lowest index on ties)."""
    res = sol.residuals
    return int(np.flatnonzero(res == res.min())[0])


def recognize(
    probe: RoiRecord | GrayImage | np.ndarray,
    D: CrossDomainDictionary,
    cfg: SolverConfig = SolverConfig(),
    tau: float = 0.3,
) -> Decision:
    """Code a probe over the dictionary, then accept or reject by SCI.

    A non-converged solve still renders a decision on the best iterate, with
    the convergence flag cleared so callers can surface a warning.
    """
    if not (0.0 < tau < 1.0):
        raise DataError(f"tau must lie in (0, 1), got {tau}")
    if isinstance(probe, RoiRecord):
        y = vectorize(probe.image, D.image_shape)
    elif isinstance(probe, GrayImage):
        y = vectorize(probe, D.image_shape)
    else:
        y = np.asarray(probe, dtype=np.float64).ravel()
    y = _unit(y)
    sol = solve_weighted_block_l1(D, y, cfg)
    order = np.argsort(sol.residuals, kind="stable")
    ranking = tuple((D.class_ids[i], float(sol.residuals[i])) for i in order)
    if sol.sci >= tau:
        winner = classify(sol, D, y)
        return Decision(Outcome.ACCEPTED, D.class_ids[winner], sol.sci, ranking, sol.converged)
    return Decision(Outcome.REJECTED, None, sol.sci, ranking, sol.converged)


def save_dictionary(D: CrossDomainDictionary, path: str | Path) -> None:
    """Binary container: magic, sizes, class ids, column matrix, weights."""
    ids_blob = b"".join(
        struct.pack("<i", len(cid.encode())) + cid.encode() for cid in D.class_ids
    )
    widths = {stop - start for start, stop in D.block_slices}
    if len(widths) != 1:
        raise DataError("container format requires uniform block widths")
    q_plus_1 = widths.pop()
    h, w = D.image_shape if D.image_shape else (0, 0)
    with open(path, "wb") as fh:
        fh.write(_DICT_MAGIC)
        fh.write(
            struct.pack(
                "<qqqqq", D.dim, D.n_classes, q_plus_1 - 1, h, w
            )
        )
        fh.write(ids_blob)
        fh.write(D.columns.astype("<f8").tobytes(order="F"))
        fh.write(D.column_weights.astype("<f8").tobytes())


def load_dictionary(path: str | Path) -> CrossDomainDictionary:
    with open(path, "rb") as fh:
        if fh.read(len(_DICT_MAGIC)) != _DICT_MAGIC:
            raise DataError(f"{path}: not a dictionary container")
        dim, n, q, h, w = struct.unpack("<qqqqq", fh.read(40))
        ids = []
        for _ in range(n):
            (length,) = struct.unpack("<i", fh.read(4))
            ids.append(fh.read(length).decode())
        n_cols = n * (q + 1)
        cols = np.frombuffer(fh.read(8 * dim * n_cols), dtype="<f8").reshape(
            (dim, n_cols), order="F"
        )
        weights = np.frombuffer(fh.read(8 * n_cols), dtype="<f8")
        if fh.read(1):
            raise DataError(f"{path}: trailing bytes after dictionary payload")
    blocks = tuple((i * (q + 1), (i + 1) * (q + 1)) for i in range(n))
    return CrossDomainDictionary(
        columns=cols,
        block_slices=blocks,
        class_ids=tuple(ids),
        column_weights=weights,
        image_shape=(h, w) if h and w else None,
    )
