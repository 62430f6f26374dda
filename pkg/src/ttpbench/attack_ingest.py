"""Load procedure descriptions from an ATT&CK STIX 2.x bundle.

A procedure is a ``uses`` relationship whose target is an attack-pattern
and which carries a description. The source object (group, software,
campaign) supplies the procedure id.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

TECHNIQUE_ID_RE = re.compile(r"^T\d{4}(\.\d{3})?$")
CORPUS_HEADER = ["procedure_id", "technique_id", "technique_name", "text"]


class IngestError(ValueError):
    pass


@dataclass(frozen=True)
class ProcedureRecord:
    procedure_id: str
    text: str
    technique_id: str
    technique_name: str
    tactic_ids: tuple[str, ...] = ()
    doc_id: str = ""


@dataclass(frozen=True)
class TechniqueInfo:
    technique_id: str
    name: str
    description: str
    tactic_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class LabeledCorpus:
    records: tuple[ProcedureRecord, ...]
    label_set: tuple[str, ...]

    def __len__(self):
        return len(self.records)

    def labels(self) -> list[int]:
        index = {t: i for i, t in enumerate(self.label_set)}
        return [index[r.technique_id] for r in self.records]

    def class_counts(self) -> dict[str, int]:
        counts = Counter(r.technique_id for r in self.records)
        return {t: counts[t] for t in self.label_set}


@dataclass
class SkipReport:
    """Counts and reasons for relationships that did not become records."""

    entries: list[tuple[str, str]] = field(default_factory=list)
    duplicate_texts: int = 0

    def add(self, ref: str, reason: str) -> None:
        self.entries.append((ref, reason))

    def lines(self) -> list[str]:
        out = [f"{ref}\t{reason}" for ref, reason in self.entries]
        summary = Counter(reason for _, reason in self.entries)
        for reason, count in sorted(summary.items()):
            out.append(f"# {reason}: {count}")
        out.append(f"# duplicate description texts across techniques: {self.duplicate_texts}")
        return out

    def write(self, path) -> None:
        Path(path).write_text("\n".join(self.lines()) + "\n", encoding="utf-8")


def _read_bundle(path) -> dict:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IngestError(f"{path}: invalid UTF-8 at byte offset {exc.start}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise IngestError(f"{path}: malformed JSON at byte offset {offset}: {exc.msg}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("objects"), list):
        raise IngestError(f"{path}: not a STIX bundle (expected an object with an 'objects' array)")
    return data


def _inactive(obj: dict) -> bool:
    return bool(obj.get("revoked")) or bool(obj.get("x_mitre_deprecated"))


def _attack_id(obj: dict) -> str | None:
    for ref in obj.get("external_references") or ():
        if ref.get("source_name") == "mitre-attack" and ref.get("external_id"):
            return ref["external_id"]
    return None


def parent_technique(technique_id: str) -> str:
    return technique_id.split(".", 1)[0]


def _assign_doc_ids(records: list[ProcedureRecord]) -> list[ProcedureRecord]:
    seen: Counter = Counter()
    out = []
    for r in records:
        key = f"{r.procedure_id}/{r.technique_id}"
        seen[key] += 1
        doc_id = key if seen[key] == 1 else f"{key}#{seen[key]}"
        out.append(ProcedureRecord(r.procedure_id, r.text, r.technique_id,
                                   r.technique_name, r.tactic_ids, doc_id))
    return out


def load_attack_bundle(path, *, collapse_subtechniques: bool = True,
                       skip_report: SkipReport | None = None):
    """Parse a STIX bundle into ``(records, techniques)``.

    Revoked and deprecated objects are ignored. With
    ``collapse_subtechniques`` every ``T####.###`` label is mapped to its
    parent ``T####`` and only parent techniques appear in the catalog.
    """
    data = _read_bundle(path)
    report = skip_report if skip_report is not None else SkipReport()
    by_id = {}
    for obj in data["objects"]:
        if isinstance(obj, dict) and "id" in obj:
            by_id[obj["id"]] = obj

    tactic_by_shortname = {}
    for obj in by_id.values():
        if obj.get("type") == "x-mitre-tactic" and not _inactive(obj):
            tid = _attack_id(obj)
            short = obj.get("x_mitre_shortname")
            if tid and short:
                tactic_by_shortname[short] = tid

    def tactics_of(pattern: dict) -> tuple[str, ...]:
        out = []
        for phase in pattern.get("kill_chain_phases") or ():
            if phase.get("kill_chain_name") != "mitre-attack":
                continue
            name = phase.get("phase_name", "")
            tid = tactic_by_shortname.get(name, name)
            if tid and tid not in out:
                out.append(tid)
        return tuple(out)

    patterns = {}  # attack id -> (name, description, tactics)
    for obj in by_id.values():
        if obj.get("type") != "attack-pattern" or _inactive(obj):
            continue
        tid = _attack_id(obj)
        if tid is None or not TECHNIQUE_ID_RE.match(tid):
            continue
        patterns[tid] = (obj.get("name", ""), (obj.get("description") or "").strip(), tactics_of(obj))

    def resolve(tid: str):
        if collapse_subtechniques:
            parent = parent_technique(tid)
            if parent in patterns:
                return parent, patterns[parent]
        return tid, patterns[tid]

    records = []
    for obj in data["objects"]:
        if not isinstance(obj, dict) or obj.get("type") != "relationship":
            continue
        if obj.get("relationship_type") != "uses":
            continue
        ref = obj.get("id", "?")
        target = by_id.get(obj.get("target_ref"))
        source = by_id.get(obj.get("source_ref"))
        if target is None:
            report.add(ref, "missing target object")
            continue
        if target.get("type") != "attack-pattern":
            continue
        description = (obj.get("description") or "").strip()
        if not description:
            continue
        if _inactive(obj):
            report.add(ref, "revoked or deprecated relationship")
            continue
        if _inactive(target):
            report.add(ref, "revoked or deprecated technique")
            continue
        if source is None:
            report.add(ref, "missing source object")
            continue
        if _inactive(source):
            report.add(ref, "revoked or deprecated source")
            continue
        tid = _attack_id(target)
        if tid is None or tid not in patterns:
            report.add(ref, "technique without ATT&CK id")
            continue
        procedure_id = _attack_id(source)
        if procedure_id is None:
            report.add(ref, "source without ATT&CK id")
            continue
        label, (name, _desc, tactics) = resolve(tid)
        if not tactics:
            report.add(ref, "technique without tactic mapping")
            continue
        records.append(ProcedureRecord(procedure_id, description, label, name, tactics))

    texts: dict[str, set] = {}
    for r in records:
        texts.setdefault(r.text, set()).add(r.technique_id)
    report.duplicate_texts = sum(1 for labels in texts.values() if len(labels) > 1)

    techniques = []
    for tid in sorted(patterns):
        if collapse_subtechniques and "." in tid:
            continue
        name, desc, tactics = patterns[tid]
        if desc:
            techniques.append(TechniqueInfo(tid, name, desc, tactics))
    return _assign_doc_ids(records), techniques


def _ordered(records, counts: Counter) -> LabeledCorpus:
    label_set = tuple(sorted(counts, key=lambda t: (-counts[t], t)))
    rank = {t: i for i, t in enumerate(label_set)}
    ordered = sorted(records, key=lambda r: rank[r.technique_id])
    return LabeledCorpus(tuple(ordered), label_set)


def filter_min_support(records, min_count: int) -> LabeledCorpus:
    """Keep techniques with at least ``min_count`` procedure descriptions."""
    if min_count < 1:
        raise IngestError(f"min_count must be >= 1, got {min_count}")
    counts = Counter(r.technique_id for r in records)
    keep = {t for t, c in counts.items() if c >= min_count}
    if not keep:
        raise IngestError(f"no classes survive filter (min_count={min_count})")
    kept = [r for r in records if r.technique_id in keep]
    return _ordered(kept, Counter({t: counts[t] for t in keep}))


def select_top_n(corpus: LabeledCorpus, n: int) -> LabeledCorpus:
    """Restrict ``corpus`` to its ``n`` largest classes."""
    if n < 1 or n > len(corpus.label_set):
        raise IngestError(
            f"n={n} out of range: corpus has {len(corpus.label_set)} classes"
        )
    labels = corpus.label_set[:n]
    keep = set(labels)
    return LabeledCorpus(tuple(r for r in corpus.records if r.technique_id in keep), labels)


def write_corpus_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(CORPUS_HEADER)
        for r in records:
            writer.writerow([r.procedure_id, r.technique_id, r.technique_name, r.text])


def read_corpus_csv(path, techniques=None) -> list[ProcedureRecord]:
    """Inverse of :func:`write_corpus_csv`; tactic ids come from ``techniques`` if given."""
    tactics = {t.technique_id: t.tactic_ids for t in techniques or ()}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CORPUS_HEADER:
            raise IngestError(f"{path}: unexpected header {header!r}")
        records = [
            ProcedureRecord(pid, text, tid, name, tactics.get(tid, ()))
            for pid, tid, name, text in reader
        ]
    return _assign_doc_ids(records)
