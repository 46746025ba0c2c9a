"""Persisted pipeline artifacts: exemplar sets, synthesis provenance,
decisions, and evaluation reports (including static SVG curves)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .capture import ConditionVector, PoseAngles
from .classifier import Decision
from .clustering import Exemplar, ExemplarSet
from .errors import DataError
from .evaluation import CurveSummary
from .manifest import atomic_write_text, format_landmarks, parse_landmarks


@dataclass(frozen=True)
class ExemplarRecord:
    """One persisted exemplar: source ROI path plus rendering metadata."""

    path: str
    pose: PoseAngles
    luminance: float
    contrast: float
    weight: float
    pose_cluster: int
    landmarks: tuple[tuple[float, float], ...] | None = None


def save_exemplar_records(records: list[ExemplarRecord], path: str | Path) -> None:
    lines = ["# path\tpitch\tyaw\troll\tluminance\tcontrast\tweight\tpose_cluster\tlandmarks"]
    for r in records:
        lines.append(
            "\t".join(
                [
                    r.path,
                    repr(r.pose.pitch),
                    repr(r.pose.yaw),
                    repr(r.pose.roll),
                    repr(r.luminance),
                    repr(r.contrast),
                    repr(r.weight),
                    str(r.pose_cluster),
                    format_landmarks(r.landmarks),
                ]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_exemplar_records(path: str | Path) -> list[ExemplarRecord]:
    """Read exemplar records; an empty list is a valid degenerate artifact."""
    records = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 8:
            raise DataError(f"{path}:{lineno}: expected >= 8 fields")
        records.append(
            ExemplarRecord(
                path=parts[0],
                pose=PoseAngles(float(parts[1]), float(parts[2]), float(parts[3])),
                luminance=float(parts[4]),
                contrast=float(parts[5]),
                weight=float(parts[6]),
                pose_cluster=int(parts[7]),
                landmarks=parse_landmarks(parts[8]) if len(parts) > 8 else None,
            )
        )
    return records


def exemplar_records_from_set(
    exemplars: ExemplarSet, roi_paths: list[str], roi_landmarks: list
) -> list[ExemplarRecord]:
    """Flatten an in-memory exemplar set against its source ROI paths."""
    records = []
    for ex, weight, cluster in zip(
        exemplars.exemplars, exemplars.weights, exemplars.pose_cluster_of
    ):
        records.append(
            ExemplarRecord(
                path=roi_paths[ex.roi_index],
                pose=exemplars.pose_exemplars[cluster],
                luminance=ex.condition.luminance,
                contrast=ex.condition.contrast,
                weight=weight,
                pose_cluster=cluster,
                landmarks=roi_landmarks[ex.roi_index],
            )
        )
    return records


def exemplar_set_from_records(records: list[ExemplarRecord]) -> ExemplarSet:
    """Rebuild the in-memory set; roi indices refer to the record order."""
    clusters = sorted({r.pose_cluster for r in records})
    if clusters != list(range(len(clusters))):
        raise DataError("pose cluster ids must be contiguous from 0")
    pose_of_cluster: dict[int, PoseAngles] = {}
    for r in records:
        pose_of_cluster.setdefault(r.pose_cluster, r.pose)
    exemplars = tuple(
        Exemplar(
            roi_index=i,
            pose=pose_of_cluster[r.pose_cluster],
            condition=ConditionVector(r.pose, r.luminance, r.contrast),
        )
        for i, r in enumerate(records)
    )
    return ExemplarSet(
        exemplars=exemplars,
        weights=tuple(r.weight for r in records),
        pose_cluster_of=tuple(r.pose_cluster for r in records),
        pose_exemplars=tuple(pose_of_cluster[c] for c in clusters),
    )


@dataclass(frozen=True)
class RunArtifacts:
    """Standard artifact layout of one full pipeline run.

    Every file is written atomically (temp + rename), so a partial rerun
    never corrupts the outputs of completed stages.
    """

    exemplar_set_path: Path
    synthetic_dir: Path
    dictionary_path: Path
    decisions_path: Path
    report_path: Path

    @classmethod
    def under(cls, out_dir: str | Path) -> "RunArtifacts":
        out = Path(out_dir)
        return cls(
            exemplar_set_path=out / "exemplars.tsv",
            synthetic_dir=out / "synthetic",
            dictionary_path=out / "dictionary.bin",
            decisions_path=out / "decisions.tsv",
            report_path=out / "report.txt",
        )


@dataclass(frozen=True)
class ProvenanceRecord:
    path: str
    subject_id: str
    pose_cluster: int
    exemplar_index: int
    weight: float


def save_provenance(records: list[ProvenanceRecord], path: str | Path) -> None:
    lines = ["# path\tsubject\tpose_cluster\texemplar_index\tweight"]
    for r in records:
        lines.append(
            "\t".join(
                [r.path, r.subject_id, str(r.pose_cluster), str(r.exemplar_index), repr(r.weight)]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_provenance(path: str | Path) -> list[ProvenanceRecord]:
    records = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        records.append(
            ProvenanceRecord(parts[0], parts[1], int(parts[2]), int(parts[3]), float(parts[4]))
        )
    return records


def decision_line(probe_path: str, decision: Decision, top: int = 3) -> str:
    ranked = ";".join(f"{cid}={repr(res)}" for cid, res in decision.residual_ranking[:top])
    cls = decision.class_id if decision.class_id is not None else "-"
    flags = "" if decision.converged else "\tnonconverged"
    return f"{probe_path}\t{decision.outcome.value}\t{cls}\t{repr(decision.score)}\t{ranked}{flags}"


def save_decisions(rows: list[tuple[str, Decision]], path: str | Path) -> None:
    lines = ["# probe\toutcome\tclass\tsci\ttop_residuals"]
    lines += [decision_line(p, d) for p, d in rows]
    atomic_write_text(path, "\n".join(lines) + "\n")


def curve_lines(name: str, curve: CurveSummary) -> list[str]:
    return [
        f"{name}.auc = {repr(curve.auc)}",
        f"{name}.pauc_cutoff = {repr(curve.pauc_cutoff)}",
        f"{name}.pauc_raw = {repr(curve.pauc_raw)}",
        f"{name}.pauc_normalized = {repr(curve.pauc_normalized)}",
        f"{name}.aupr = {repr(curve.aupr)}",
    ]


def write_curve_svg(curves: dict[str, CurveSummary], path: str | Path) -> None:
    """Static SVG of one or more ROC curves (no interactivity, no deps)."""
    size, margin = 360, 40
    span = size - 2 * margin

    def sx(v: float) -> float:
        return margin + v * span

    def sy(v: float) -> float:
        return size - margin - v * span

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(0)}" stroke="black"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(0)}" y2="{sy(1)}" stroke="black"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(1)}" '
        'stroke="#cccccc" stroke-dasharray="4"/>',
        f'<text x="{size/2}" y="{size - 8}" font-size="12" text-anchor="middle">'
        "false positive rate</text>",
        f'<text x="12" y="{size/2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 12 {size/2})">true positive rate</text>',
    ]
    for k, (name, curve) in enumerate(curves.items()):
        pts = " ".join(f"{sx(f):.2f},{sy(t):.2f}" for f, t in curve.roc_points)
        color = colors[k % len(colors)]
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{margin + 6}" y="{margin + 14 + 14 * k}" font-size="11" '
            f'fill="{color}">{name} (auc={curve.auc:.3f})</text>'
        )
    parts.append("</svg>")
    atomic_write_text(path, "\n".join(parts) + "\n")
