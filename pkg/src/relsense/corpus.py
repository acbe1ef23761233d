"""Relation corpus model: JSONL loading, tokenization, splits, labels.

The interchange format is one JSON object per line with fields "id",
"doc_id", "arg1", "arg2" (raw texts), "senses" (1-2 labels), "type" and
an optional "split". Raw argument texts are kept on the instance so a
loaded corpus serializes back to the same values.
"""

from __future__ import annotations

import json
import logging
import re
import string
from dataclasses import dataclass, field

from .errors import FormatError, IdFormatError, UnknownSenseError

log = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "dev", "test", "blind")

_PUNCT = frozenset(string.punctuation)
_WSJ_ID = re.compile(r"^wsj_(\d{2})(\d{2})$")


@dataclass
class RelationInstance:
    """One argument pair with its gold sense set and corpus metadata."""

    id: str
    doc_id: str
    arg1_text: str
    arg2_text: str
    arg1_tokens: list[str]
    arg2_tokens: list[str]
    senses: list[str]
    relation_type: str = "Implicit"
    split: str | None = None


def tokenize(raw: str, lowercase: bool = True) -> list[str]:
    """Lowercase, split on whitespace, peel edge ASCII punctuation.

    Leading and trailing punctuation characters become their own tokens,
    in reading order; interior punctuation (e.g. apostrophes) stays put.
    """
    if not raw or not raw.strip():
        raise ValueError("cannot tokenize empty or whitespace-only text")
    if lowercase:
        raw = raw.lower()
    tokens: list[str] = []
    for chunk in raw.split():
        lead: list[str] = []
        while chunk and chunk[0] in _PUNCT:
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail: list[str] = []
        while chunk and chunk[-1] in _PUNCT:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


def _dedupe(senses: list[str]) -> list[str]:
    seen: dict[str, None] = {}
    for s in senses:
        seen.setdefault(s, None)
    return list(seen)


def _parse_line(obj: dict, line_no: int, lowercase: bool) -> RelationInstance:
    for name in ("id", "doc_id", "arg1", "arg2", "senses", "type"):
        if name not in obj:
            raise FormatError(f"missing field {name!r}", line=line_no)
    for name in ("id", "doc_id", "arg1", "arg2", "type"):
        if not isinstance(obj[name], str):
            raise FormatError(f"field {name!r} must be a string", line=line_no)
    raw_senses = obj["senses"]
    if not isinstance(raw_senses, list) or not all(isinstance(s, str) for s in raw_senses):
        raise FormatError("field 'senses' must be a list of strings", line=line_no)
    senses = _dedupe(raw_senses)
    if not 1 <= len(senses) <= 2:
        raise FormatError(
            f"instances carry 1 or 2 distinct senses, got {len(senses)}", line=line_no)
    split = obj.get("split")
    if split is not None and split not in SPLIT_NAMES:
        raise FormatError(f"unknown split {split!r}", line=line_no)
    try:
        arg1_tokens = tokenize(obj["arg1"], lowercase)
        arg2_tokens = tokenize(obj["arg2"], lowercase)
    except ValueError:
        raise FormatError("empty argument text", line=line_no) from None
    return RelationInstance(
        id=obj["id"], doc_id=obj["doc_id"],
        arg1_text=obj["arg1"], arg2_text=obj["arg2"],
        arg1_tokens=arg1_tokens, arg2_tokens=arg2_tokens,
        senses=senses, relation_type=obj["type"], split=split)


def load_relations(path, implicit_only: bool = False,
                   lowercase: bool = True) -> list[RelationInstance]:
    """Strictly parse a normalized relation JSONL file, preserving order."""
    instances: list[RelationInstance] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                raise FormatError("blank line", line=line_no)
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON: {exc.msg}", line=line_no) from None
            if not isinstance(obj, dict):
                raise FormatError("line is not a JSON object", line=line_no)
            inst = _parse_line(obj, line_no, lowercase)
            if implicit_only and inst.relation_type != "Implicit":
                continue
            instances.append(inst)
    return instances


def relation_to_json(inst: RelationInstance) -> str:
    obj = {
        "id": inst.id,
        "doc_id": inst.doc_id,
        "arg1": inst.arg1_text,
        "arg2": inst.arg2_text,
        "senses": inst.senses,
        "type": inst.relation_type,
    }
    if inst.split is not None:
        obj["split"] = inst.split
    return json.dumps(obj, ensure_ascii=False)


def save_relations(instances: list[RelationInstance], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(relation_to_json(inst) + "\n")


class SenseInventory:
    """Ordered sense labels with a dense label -> index map."""

    def __init__(self, labels):
        ordered = list(dict.fromkeys(labels))
        if not ordered:
            raise ValueError("sense inventory cannot be empty")
        self.labels: tuple[str, ...] = tuple(ordered)
        self._index = {label: i for i, label in enumerate(self.labels)}

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownSenseError(f"sense {label!r} is not in the inventory") from None

    def label(self, index: int) -> str:
        return self.labels[index]

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self._index


def build_inventory(instances: list[RelationInstance]) -> SenseInventory:
    """Distinct labels of the given (training) instances, sorted for stability."""
    if not instances:
        raise ValueError("cannot build an inventory from no instances")
    labels = sorted({s for inst in instances for s in inst.senses})
    return SenseInventory(labels)


@dataclass
class CorpusSplit:
    """Train/dev/test partition; blind instances are kept aside."""

    train: list[RelationInstance] = field(default_factory=list)
    dev: list[RelationInstance] = field(default_factory=list)
    test: list[RelationInstance] = field(default_factory=list)
    blind: list[RelationInstance] = field(default_factory=list)
    excluded_count: int = 0

    def named(self, name: str) -> list[RelationInstance]:
        if name not in SPLIT_NAMES:
            raise ValueError(f"unknown split name {name!r}")
        return getattr(self, name)


def section_of(doc_id: str) -> int:
    """Two-digit WSJ section encoded in a wsj_SSNN document id."""
    match = _WSJ_ID.match(doc_id)
    if not match:
        raise IdFormatError(f"doc id {doc_id!r} does not match wsj_SSNN")
    return int(match.group(1))


def split_by_sections(instances: list[RelationInstance]) -> CorpusSplit:
    """Sections 2-20 train, 0-1 dev, 21-22 test; others are dropped.

    Non-wsj ids (e.g. the CoNLL blind set) bypass the section rule and
    are routed by their explicit split field instead.
    """
    out = CorpusSplit()
    for inst in instances:
        if _WSJ_ID.match(inst.doc_id):
            section = section_of(inst.doc_id)
            if 2 <= section <= 20:
                out.train.append(inst)
            elif section <= 1:
                out.dev.append(inst)
            elif section in (21, 22):
                out.test.append(inst)
            else:
                out.excluded_count += 1
        elif inst.split is not None:
            out.named(inst.split).append(inst)
        else:
            raise IdFormatError(
                f"doc id {inst.doc_id!r} is not wsj_SSNN and the instance "
                f"carries no split field")
    if out.excluded_count:
        log.warning("excluded %d instances from out-of-range sections", out.excluded_count)
    return out


def expand_multilabel(instances: list[RelationInstance],
                      inventory: SenseInventory) -> list[tuple[RelationInstance, int]]:
    """One training pair per (instance, sense): k senses yield k pairs."""
    pairs: list[tuple[RelationInstance, int]] = []
    for inst in instances:
        for sense in inst.senses:
            pairs.append((inst, inventory.index(sense)))
    return pairs
