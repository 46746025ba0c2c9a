"""Flat key=value pipeline configuration with typed validation.

The file format is one ``key = value`` assignment per line with ``#``
comments. Unknown keys are rejected; every key has a default matching the
library modules, printable via ``dsfs config --defaults``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .capture import MetricConfig
from .classifier import SolverConfig, SolverMode
from .clustering import ClusterConfig
from .evaluation import BenchmarkConfig
from .errors import ConfigError
from .layers import LayerConfig
from .synthesis import SynthesisConfig


@dataclass(frozen=True)
class PipelineConfig:
    # capture metrics
    metric_window: int = 8
    metric_stride: int = 1
    metric_k_luminance: float = 0.01
    metric_k_contrast: float = 0.03
    # clustering
    cluster_damping: float = 0.9
    cluster_max_iter: int = 1000
    cluster_stable_window: int = 50
    cluster_preference: str = "median"  # "median" or a number
    cluster_normalize_axes: bool = True
    # synthesis
    synthesis_shading_sigma: float = 12.0
    synthesis_texture_sigma: float = 2.0
    synthesis_floor: float = 1e-4
    synthesis_out_height: int = 48
    synthesis_out_width: int = 48
    synthesis_dissolve: float = 1.0
    synthesis_camera_fill: float = 0.9
    # solver
    solver_sparsity: float = 0.005
    solver_rho: float = 1.0
    solver_tol_primal: float = 1e-6
    solver_tol_dual: float = 1e-6
    solver_max_iter: int = 1000
    solver_mode: str = "penalized"
    solver_invert_weights: bool = False
    solver_still_weight: float = 1.0
    # decision
    decision_tau: float = 0.3
    # evaluation
    eval_pauc_cutoff: float = 0.10
    eval_score: str = "residual"

    def __post_init__(self) -> None:
        if not (0.5 <= self.cluster_damping < 1.0):
            raise ConfigError(f"cluster.damping must lie in [0.5, 1), got {self.cluster_damping}")
        if not (0.0 < self.decision_tau < 1.0):
            raise ConfigError(f"decision.tau must lie in (0, 1), got {self.decision_tau}")
        if not (0.0 < self.eval_pauc_cutoff <= 1.0):
            raise ConfigError(
                f"eval.pauc_cutoff must lie in (0, 1], got {self.eval_pauc_cutoff}"
            )
        if self.eval_score not in ("residual", "sci"):
            raise ConfigError(f"eval.score must be residual or sci, got {self.eval_score!r}")
        if self.solver_mode not in ("penalized", "equality"):
            raise ConfigError(
                f"solver.mode must be penalized or equality, got {self.solver_mode!r}"
            )
        if self.solver_sparsity <= 0 or self.solver_rho <= 0:
            raise ConfigError("solver.sparsity and solver.rho must be positive")
        if self.cluster_preference != "median":
            try:
                float(self.cluster_preference)
            except ValueError:
                raise ConfigError(
                    "cluster.preference must be 'median' or a number, "
                    f"got {self.cluster_preference!r}"
                ) from None
        if not (0.0 <= self.synthesis_dissolve <= 1.0):
            raise ConfigError("synthesis.dissolve must lie in [0, 1]")
        for name in ("metric_window", "metric_stride", "cluster_max_iter",
                     "cluster_stable_window", "solver_max_iter",
                     "synthesis_out_height", "synthesis_out_width"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name.replace('_', '.', 1)} must be >= 1")

    # ---- typed views consumed by the library modules ----

    def metrics(self) -> MetricConfig:
        return MetricConfig(
            window=self.metric_window,
            stride=self.metric_stride,
            k_luminance=self.metric_k_luminance,
            k_contrast=self.metric_k_contrast,
        )

    def clustering(self) -> ClusterConfig:
        pref = "median" if self.cluster_preference == "median" else float(self.cluster_preference)
        return ClusterConfig(
            damping=self.cluster_damping,
            max_iter=self.cluster_max_iter,
            stable_window=self.cluster_stable_window,
            preference=pref,
            normalize_axes=self.cluster_normalize_axes,
            metrics=self.metrics(),
        )

    def synthesis(self) -> SynthesisConfig:
        return SynthesisConfig(
            layers=LayerConfig(
                shading_sigma=self.synthesis_shading_sigma,
                texture_sigma=self.synthesis_texture_sigma,
                floor=self.synthesis_floor,
            ),
            out_size=(self.synthesis_out_height, self.synthesis_out_width),
            dissolve=self.synthesis_dissolve,
            camera_fill=self.synthesis_camera_fill,
        )

    def solver(self) -> SolverConfig:
        return SolverConfig(
            sparsity=self.solver_sparsity,
            rho=self.solver_rho,
            tol_primal=self.solver_tol_primal,
            tol_dual=self.solver_tol_dual,
            max_iter=self.solver_max_iter,
            mode=SolverMode(self.solver_mode),
        )

    def benchmark(self) -> BenchmarkConfig:
        return BenchmarkConfig(
            cluster=self.clustering(),
            synthesis=self.synthesis(),
            solver=self.solver(),
            score=self.eval_score,
            pauc_cutoff=self.eval_pauc_cutoff,
            still_weight=self.solver_still_weight,
            invert_weights=self.solver_invert_weights,
        )


def _key(field_name: str) -> str:
    return field_name.replace("_", ".", 1)


_COMMENTS = {
    "metric_window": "sliding window side in pixels",
    "metric_stride": "window stride in pixels",
    "metric_k_luminance": "stabilizing constant factor of the luminance metric",
    "metric_k_contrast": "stabilizing constant factor of the contrast metric",
    "cluster_damping": "message damping factor in [0.5, 1)",
    "cluster_max_iter": "iteration cap per clustering run",
    "cluster_stable_window": "iterations of unchanged decisions before stopping",
    "cluster_preference": "diagonal preference: median or a number",
    "cluster_normalize_axes": "min-max normalize each clustering axis",
    "synthesis_shading_sigma": "gaussian sigma of the shading split (px)",
    "synthesis_texture_sigma": "gaussian sigma of the texture split (px)",
    "synthesis_floor": "additive floor before the log transform",
    "synthesis_out_height": "synthetic ROI height (px)",
    "synthesis_out_width": "synthetic ROI width (px)",
    "synthesis_dissolve": "shading replacement weight, 1 = full replacement",
    "synthesis_camera_fill": "fraction of the frame the mesh footprint fills",
    "solver_sparsity": "block-sparsity penalty",
    "solver_rho": "augmented penalty parameter",
    "solver_tol_primal": "primal residual tolerance",
    "solver_tol_dual": "dual residual tolerance",
    "solver_max_iter": "solver iteration cap",
    "solver_mode": "penalized or equality",
    "solver_invert_weights": "reverse exemplar weight ordering in the penalty",
    "solver_still_weight": "penalty weight of each still column",
    "decision_tau": "acceptance threshold on the concentration index, in (0, 1)",
    "eval_pauc_cutoff": "false-positive-rate cutoff of the partial AUC",
    "eval_score": "probe score for curves: residual or sci",
}


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: PipelineConfig) -> str:
    lines = ["# pipeline configuration (key = value, '#' starts a comment)"]
    for f in fields(cfg):
        comment = _COMMENTS.get(f.name, "")
        suffix = f"  # {comment}" if comment else ""
        lines.append(f"{_key(f.name)} = {_format_value(getattr(cfg, f.name))}{suffix}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> PipelineConfig:
    by_key = {_key(f.name): f for f in fields(PipelineConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in by_key:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        f = by_key[key]
        try:
            if f.type in ("int",):
                value = int(raw_value)
            elif f.type in ("float",):
                value = float(raw_value)
            elif f.type in ("bool",):
                if raw_value.lower() not in ("true", "false"):
                    raise ValueError("expected true or false")
                value = raw_value.lower() == "true"
            else:
                value = raw_value
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        values[f.name] = value
    return PipelineConfig(**values)


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return parse_config_text(Path(path).read_text())
