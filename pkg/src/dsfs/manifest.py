"""Dataset manifests: line-delimited ROI descriptors with pose and landmarks.

One record per line, tab-separated::

    path  subject_id  domain  pitch  yaw  roll  landmarks

``landmarks`` is a ``;``-separated list of ``x,y`` pairs, or ``-`` when
absent. Lines starting with ``#`` are comments. Paths are resolved against
the manifest's root directory and must exist at load time.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .capture import Domain, PoseAngles, RoiRecord
from .errors import DataError
from .image import load_image


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_landmarks(landmarks) -> str:
    if not landmarks:
        return "-"
    return ";".join(f"{repr(float(x))},{repr(float(y))}" for x, y in landmarks)


def parse_landmarks(text: str):
    text = text.strip()
    if not text or text == "-":
        return None
    pairs = []
    for chunk in text.split(";"):
        x, y = chunk.split(",")
        pairs.append((float(x), float(y)))
    return tuple(pairs)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    subject_id: str
    domain: Domain
    pose: PoseAngles
    landmarks: tuple[tuple[float, float], ...] | None = None


@dataclass(frozen=True)
class Manifest:
    root: Path
    entries: tuple[ManifestEntry, ...]

    def load_entry(self, entry: ManifestEntry) -> RoiRecord:
        full = self.root / entry.path
        return RoiRecord(
            image=load_image(full),
            pose=entry.pose,
            subject_id=entry.subject_id,
            domain=entry.domain,
            landmarks=entry.landmarks,
            path=str(full),
        )

    def load_all(self) -> list[RoiRecord]:
        return [self.load_entry(e) for e in self.entries]

    def subjects(self) -> list[str]:
        seen: list[str] = []
        for e in self.entries:
            if e.subject_id not in seen:
                seen.append(e.subject_id)
        return seen


def load_manifest(path: str | Path, root: str | Path | None = None) -> Manifest:
    path = Path(path)
    base = Path(root) if root is not None else path.parent
    entries = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 6:
            raise DataError(f"{path}:{lineno}: expected >= 6 tab-separated fields")
        rel, subject, domain_s, pitch, yaw, roll = parts[:6]
        lms = parse_landmarks(parts[6]) if len(parts) > 6 else None
        try:
            domain = Domain(domain_s)
        except ValueError:
            raise DataError(f"{path}:{lineno}: unknown domain {domain_s!r}") from None
        full = base / rel
        if not full.exists():
            raise DataError(f"{path}:{lineno}: missing file {full}")
        entries.append(
            ManifestEntry(
                path=rel,
                subject_id=subject,
                domain=domain,
                pose=PoseAngles(float(pitch), float(yaw), float(roll)),
                landmarks=lms,
            )
        )
    return Manifest(root=base, entries=tuple(entries))


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    lines = ["# path\tsubject\tdomain\tpitch\tyaw\troll\tlandmarks"]
    for e in manifest.entries:
        lines.append(
            "\t".join(
                [
                    e.path,
                    e.subject_id,
                    e.domain.value,
                    repr(e.pose.pitch),
                    repr(e.pose.yaw),
                    repr(e.pose.roll),
                    format_landmarks(e.landmarks),
                ]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")
