"""Dataset manifests: which audio spans exist and how they are labelled.

Two encodings are accepted, chosen by file suffix:

* CSV (UTF-8) with header ``id,path,start_s,end_s,class_label,quality_label``
* JSON lines (``.jsonl``), one object per entry with the same keys

Relative paths are resolved against the manifest's own directory.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ParseError

GAIT = "Gait"
NON_GAIT = "NonGait"
GOOD = "GoodGait"
BAD = "BadGait"

CLASS_LABELS = (GAIT, NON_GAIT)
QUALITY_LABELS = (GOOD, BAD)

FIELDS = ("id", "path", "start_s", "end_s", "class_label", "quality_label")


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: str
    start_s: float
    end_s: float
    class_label: str = GAIT
    quality_label: str | None = None

    def __post_init__(self):
        if not 0 <= self.start_s < self.end_s:
            raise ParseError(f"{self.id}: need 0 <= start_s < end_s, got {self.start_s}, {self.end_s}")
        if self.class_label not in CLASS_LABELS:
            raise ParseError(f"{self.id}: class_label must be one of {CLASS_LABELS}")
        if self.quality_label not in (None, *QUALITY_LABELS):
            raise ParseError(f"{self.id}: quality_label must be empty or one of {QUALITY_LABELS}")


def _entry(raw, lineno):
    try:
        q = raw.get("quality_label") or None
        return ManifestEntry(
            id=str(raw["id"]), path=str(raw["path"]),
            start_s=float(raw["start_s"]), end_s=float(raw["end_s"]),
            class_label=raw.get("class_label") or GAIT, quality_label=q)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"manifest line {lineno}: {exc!r}") from exc


def read_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".jsonl", ".ndjson"):
        raws = []
        for n, line in enumerate(text.splitlines(), 1):
            if line.strip():
                try:
                    raws.append((n, json.loads(line)))
                except json.JSONDecodeError as exc:
                    raise ParseError(f"manifest line {n}: {exc}") from exc
    else:
        reader = csv.DictReader(text.splitlines())
        missing = {"id", "path", "start_s", "end_s"} - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"manifest lacks columns: {sorted(missing)}")
        raws = [(n, r) for n, r in enumerate(reader, 2)]
    entries = [_entry(r, n) for n, r in raws]
    seen = set()
    for e in entries:
        if e.id in seen:
            raise ParseError(f"duplicate manifest id {e.id!r}")
        seen.add(e.id)
    return entries


def resolve(entry: ManifestEntry, base_dir) -> Path:
    p = Path(entry.path)
    return p if p.is_absolute() else Path(base_dir) / p


def format_manifest(entries, jsonl=False) -> str:
    if jsonl:
        return "".join(json.dumps(asdict(e), sort_keys=True) + "\n" for e in entries)
    lines = [",".join(FIELDS)]
    for e in entries:
        lines.append(",".join(_csv_cell(v) for v in (
            e.id, e.path, repr(float(e.start_s)), repr(float(e.end_s)),
            e.class_label, e.quality_label or "")))
    return "\n".join(lines) + "\n"


def _csv_cell(v):
    v = str(v)
    if any(c in v for c in ',"\n'):
        return '"' + v.replace('"', '""') + '"'
    return v
