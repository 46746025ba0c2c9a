"""Command-line pipeline: calibrate, synthesize, enroll, recognize, evaluate,
benchmark, and config inspection.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 completed with solver non-convergence reported.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import artifacts
from .capture import Domain, RoiRecord
from .classifier import (
    build_cross_domain_dictionary,
    load_dictionary,
    recognize,
    save_dictionary,
)
from .clustering import two_step_select
from .config import PipelineConfig, load_config, serialize_config
from .errors import ConfigError, ConvergenceError, DataError, DsfsError
from .evaluation import ScoredTrial, dsq, roc_metrics, run_benchmark
from .fixtures import CorpusConfig, CorpusFactory, make_split
from .image import load_image, save_image
from .manifest import atomic_write_text, load_manifest
from .shape import ellipsoid_head, load_shape_model
from .synthesis import Provenance, SyntheticSet, generate_synthetic_set

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NONCONVERGENCE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsfs",
        description="Domain-specific face synthesis and block-sparse recognition",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="select weighted capture-condition exemplars")
    p.add_argument("--manifest", required=True, help="generic-set manifest")
    p.add_argument("--reference", required=True, help="reference still image")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="exemplar record file to write")

    p = sub.add_parser("synthesize", help="generate synthetic ROIs per gallery still")
    p.add_argument("--manifest", required=True, help="gallery manifest (one still per subject)")
    p.add_argument("--exemplars", required=True, help="exemplar record file from calibrate")
    p.add_argument("--shape-model", default=None, help="shape model container (default: bundled)")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="output directory for PNGs + provenance")

    p = sub.add_parser("enroll", help="build the cross-domain dictionary")
    p.add_argument("--manifest", required=True, help="gallery manifest")
    p.add_argument("--synthetic-dir", required=True, help="directory written by synthesize")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="dictionary container to write")

    p = sub.add_parser("recognize", help="classify probes against a dictionary")
    p.add_argument("--manifest", required=True, help="probe manifest")
    p.add_argument("--dictionary", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--tau", type=float, default=None, help="override decision.tau")
    p.add_argument("--lambda", dest="sparsity", type=float, default=None,
                   help="override solver.sparsity")
    p.add_argument("--out", required=True, help="decision record file to write")

    p = sub.add_parser("evaluate", help="curve metrics from scores, and dictionary dsq")
    p.add_argument("--scores", default=None,
                   help="TSV of score<TAB>is_target rows (1/0 or true/false)")
    p.add_argument("--dictionary", default=None, help="dictionary for dsq")
    p.add_argument("--reference-dictionary", default=None, help="second dictionary for dsq")
    p.add_argument("--pauc-cutoff", type=float, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--svg", default=None, help="optional ROC curve SVG path")
    p.add_argument("--out", required=True, help="report file to write")

    p = sub.add_parser("benchmark", help="seeded synthetic trend benchmark")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replications", type=int, default=5)
    p.add_argument("--watchlist", type=int, default=5)
    p.add_argument("--generic", type=int, default=10)
    p.add_argument("--config", default=None)
    p.add_argument("--svg", default=None)
    p.add_argument("--out", required=True, help="report file to write")

    p = sub.add_parser("config", help="print or write configuration")
    p.add_argument("--defaults", action="store_true", help="show the default configuration")
    p.add_argument("--config", default=None, help="validate and echo this file")
    p.add_argument("--out", default=None, help="write instead of printing")
    return parser


def _load_gallery(manifest_path: str) -> list[RoiRecord]:
    manifest = load_manifest(manifest_path)
    records = manifest.load_all()
    if not records:
        raise DataError(f"{manifest_path}: empty manifest")
    return records


def cmd_calibrate(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    generic = _load_gallery(args.manifest)
    reference = load_image(args.reference)
    exemplars = two_step_select(generic, reference, cfg.clustering())
    records = artifacts.exemplar_records_from_set(
        exemplars,
        [r.path or "" for r in generic],
        [r.landmarks for r in generic],
    )
    artifacts.save_exemplar_records(records, args.out)
    print(f"calibrate: {exemplars.q} exemplars over "
          f"{len(exemplars.pose_exemplars)} pose clusters -> {args.out}")
    return EXIT_OK


def cmd_synthesize(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    gallery = _load_gallery(args.manifest)
    records = artifacts.load_exemplar_records(args.exemplars)
    exemplar_set = artifacts.exemplar_set_from_records(records)
    exemplar_rois = [
        RoiRecord(
            image=load_image(r.path),
            pose=r.pose,
            subject_id=f"exemplar{k}",
            domain=Domain.OPERATIONAL,
            landmarks=r.landmarks,
            path=r.path,
        )
        for k, r in enumerate(records)
    ]
    model = load_shape_model(args.shape_model) if args.shape_model else ellipsoid_head()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    prov: list[artifacts.ProvenanceRecord] = []
    skipped: list[str] = []
    written = 0
    for still in gallery:
        if still.landmarks is None:
            skipped.append(f"{still.subject_id}: no landmarks")
            continue
        synth = generate_synthetic_set(
            still, exemplar_set, exemplar_rois, model, cfg=cfg.synthesis()
        )
        skipped.extend(f"{still.subject_id}: {msg}" for msg in synth.failures)
        for roi, p in zip(synth.rois, synth.provenance):
            name = f"{still.subject_id}_e{p.exemplar_index:03d}.png"
            save_image(roi, out_dir / name)
            prov.append(
                artifacts.ProvenanceRecord(
                    name, still.subject_id, p.pose_cluster, p.exemplar_index, p.weight
                )
            )
            written += 1
    artifacts.save_provenance(prov, out_dir / "provenance.tsv")
    if skipped:
        atomic_write_text(out_dir / "skipped.txt", "\n".join(skipped) + "\n")
    if written == 0:
        print("synthesize: warning: no synthetic ROIs were produced", file=sys.stderr)
    print(f"synthesize: wrote {written} ROIs to {out_dir}")
    return EXIT_OK


def cmd_enroll(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    gallery = _load_gallery(args.manifest)
    synth_dir = Path(args.synthetic_dir)
    prov = artifacts.load_provenance(synth_dir / "provenance.tsv")
    by_subject: dict[str, list[artifacts.ProvenanceRecord]] = {}
    for p in prov:
        by_subject.setdefault(p.subject_id, []).append(p)

    missing = [r.subject_id for r in gallery if r.subject_id not in by_subject]
    if missing and prov:
        raise DataError(f"synthesis artifacts missing for subjects: {missing}")

    synth_sets = []
    weights: np.ndarray | None = None
    for still in gallery:
        rows = sorted(by_subject.get(still.subject_id, []), key=lambda p: p.exemplar_index)
        synth_sets.append(
            SyntheticSet(
                subject_id=still.subject_id,
                rois=tuple(load_image(synth_dir / p.path) for p in rows),
                provenance=tuple(
                    Provenance(p.pose_cluster, p.exemplar_index, p.weight) for p in rows
                ),
            )
        )
        if rows and weights is None:
            weights = np.array([p.weight for p in rows])
    if weights is None:
        weights = np.zeros(0)
    shape = (cfg.synthesis_out_height, cfg.synthesis_out_width)
    dictionary = build_cross_domain_dictionary(
        gallery,
        synth_sets,
        weights,
        still_weight=cfg.solver_still_weight,
        invert_weights=cfg.solver_invert_weights,
        image_shape=shape,
    )
    save_dictionary(dictionary, args.out)
    print(
        f"enroll: {dictionary.n_classes} classes x "
        f"{dictionary.n_columns // dictionary.n_classes} columns -> {args.out}"
    )
    return EXIT_OK


def cmd_recognize(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if args.tau is not None:
        cfg = replace(cfg, decision_tau=args.tau)
    if args.sparsity is not None:
        cfg = replace(cfg, solver_sparsity=args.sparsity)
    dictionary = load_dictionary(args.dictionary)
    manifest = load_manifest(args.manifest)
    rows = []
    any_nonconverged = False
    for entry in manifest.entries:
        probe = manifest.load_entry(entry)
        decision = recognize(probe, dictionary, cfg.solver(), tau=cfg.decision_tau)
        any_nonconverged |= not decision.converged
        rows.append((entry.path, decision))
    artifacts.save_decisions(rows, args.out)
    accepted = sum(1 for _, d in rows if d.class_id is not None)
    print(f"recognize: {accepted}/{len(rows)} probes accepted -> {args.out}")
    if any_nonconverged:
        print("recognize: solver did not converge on some probes", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def _parse_scores(path: str) -> list[ScoredTrial]:
    trials = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise DataError(f"{path}:{lineno}: expected score<TAB>is_target")
        flag = parts[1].strip().lower()
        trials.append(
            ScoredTrial(score=float(parts[0]), is_target=flag in ("1", "true", "yes"))
        )
    return trials


def cmd_evaluate(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    if args.pauc_cutoff is not None:
        cfg = replace(cfg, eval_pauc_cutoff=args.pauc_cutoff)
    lines: list[str] = []
    curves = {}
    if args.scores:
        curve = roc_metrics(_parse_scores(args.scores), cfg.eval_pauc_cutoff)
        curves["scores"] = curve
        lines += artifacts.curve_lines("scores", curve)
    if args.dictionary and args.reference_dictionary:
        d_a = load_dictionary(args.dictionary)
        d_r = load_dictionary(args.reference_dictionary)
        lines.append(f"dsq = {repr(dsq(d_r.columns, d_a.columns))}")
    if not lines:
        raise ConfigError("evaluate needs --scores and/or two dictionaries for dsq")
    if args.svg and curves:
        artifacts.write_curve_svg(curves, args.svg)
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"evaluate: wrote {args.out}")
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    bench_cfg = cfg.benchmark()
    out_size = bench_cfg.synthesis.out_size
    corpus_cfg = CorpusConfig(roi_size=out_size)
    factory = CorpusFactory(corpus_cfg)
    model = factory.model
    lines = [f"seed = {args.seed}", f"replications = {args.replications}"]
    gains = []
    curves = {}
    for rep in range(args.replications):
        split = make_split(
            args.seed + rep,
            n_watch=args.watchlist,
            n_generic=args.generic,
            factory=factory,
        )
        report = run_benchmark(split.gallery, split.generic, split.probes, model, bench_cfg)
        gains.append(report.augmented.auc - report.baseline.auc)
        lines.append(
            f"rep{rep}.baseline.auc = {repr(report.baseline.auc)}"
        )
        lines.append(
            f"rep{rep}.augmented.auc = {repr(report.augmented.auc)}"
        )
        lines.append(f"rep{rep}.q = {report.q}")
        lines.append(f"rep{rep}.dsq = {repr(report.dsq_augmented)}")
        if rep == 0:
            curves = {"baseline": report.baseline, "augmented": report.augmented}
    lines.append(f"mean_auc_gain = {repr(float(np.mean(gains)))}")
    lines.append(f"std_auc_gain = {repr(float(np.std(gains)))}")
    if args.svg and curves:
        artifacts.write_curve_svg(curves, args.svg)
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"benchmark: mean auc gain {np.mean(gains):+.4f} over "
          f"{args.replications} replications -> {args.out}")
    return EXIT_OK


def cmd_config(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    text = serialize_config(PipelineConfig() if args.defaults else cfg)
    if args.out:
        atomic_write_text(args.out, text)
        print(f"config: wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


_COMMANDS = {
    "calibrate": cmd_calibrate,
    "synthesize": cmd_synthesize,
    "enroll": cmd_enroll,
    "recognize": cmd_recognize,
    "evaluate": cmd_evaluate,
    "benchmark": cmd_benchmark,
    "config": cmd_config,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(getattr(args, "config", None))
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (DataError, FileNotFoundError, DsfsError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
