"""Importers mapping source corpora into the normalized JSONL schema.

Both importers reduce full sense paths to their second level (the first
two dot-separated components) and deduplicate, since that is the label
space of the task.
"""

from __future__ import annotations

import json
from pathlib import Path

from .corpus import RelationInstance, tokenize
from .errors import FormatError

# PDTB pipe files: 48 pipe-separated columns per relation. The columns
# used here follow the de-facto extraction layout: relation type in
# column 0, the up-to-four sense classifications in columns 11-14, and
# the raw argument texts in columns 24 and 34. The document id comes
# from the file name (wsj_SSNN.pipe).
_PIPE_TYPE_COL = 0
_PIPE_SENSE_COLS = (11, 12, 13, 14)
_PIPE_ARG1_COL = 24
_PIPE_ARG2_COL = 34
_PIPE_MIN_COLS = 35


def to_second_level(sense: str) -> str:
    """First two dot-separated components of a sense path."""
    return ".".join(sense.split(".")[:2])


def _reduce_senses(raw: list[str], line_no: int, where: str) -> list[str]:
    reduced: dict[str, None] = {}
    for sense in raw:
        if sense:
            reduced.setdefault(to_second_level(sense), None)
    senses = list(reduced)
    if not 1 <= len(senses) <= 2:
        raise FormatError(
            f"{where}: expected 1 or 2 distinct second-level senses, got {len(senses)}",
            line=line_no)
    return senses


def import_conll_json(path, split: str | None = None,
                      lowercase: bool = True) -> list[RelationInstance]:
    """Read a CoNLL shared-task relations.json file (one object per line)."""
    instances: list[RelationInstance] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                raise FormatError("blank line", line=line_no)
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON: {exc.msg}", line=line_no) from None
            try:
                doc_id = obj["DocID"]
                arg1 = obj["Arg1"]["RawText"]
                arg2 = obj["Arg2"]["RawText"]
                senses_raw = obj["Sense"]
                rel_type = obj["Type"]
            except (KeyError, TypeError):
                raise FormatError("missing shared-task field", line=line_no) from None
            rel_id = str(obj.get("ID", line_no))
            senses = _reduce_senses(list(senses_raw), line_no, doc_id)
            try:
                arg1_tokens = tokenize(arg1, lowercase)
                arg2_tokens = tokenize(arg2, lowercase)
            except ValueError:
                raise FormatError("empty argument text", line=line_no) from None
            instances.append(RelationInstance(
                id=rel_id, doc_id=doc_id, arg1_text=arg1, arg2_text=arg2,
                arg1_tokens=arg1_tokens, arg2_tokens=arg2_tokens,
                senses=senses, relation_type=rel_type, split=split))
    return instances


def _pipe_files(path: Path) -> list[Path]:
    if path.is_dir():
        files = sorted(path.rglob("*.pipe"))
        if not files:
            raise FormatError(f"no .pipe files under {path}")
        return files
    return [path]


def import_pdtb_pipes(path, split: str | None = None,
                      lowercase: bool = True) -> list[RelationInstance]:
    """Read PDTB pipe files (a single file or a directory tree of them)."""
    instances: list[RelationInstance] = []
    for pipe_file in _pipe_files(Path(path)):
        doc_id = pipe_file.stem
        with open(pipe_file, encoding="utf-8", errors="replace") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                cols = line.split("|")
                if len(cols) < _PIPE_MIN_COLS:
                    raise FormatError(
                        f"{pipe_file.name}: expected at least {_PIPE_MIN_COLS} "
                        f"columns, got {len(cols)}", line=line_no)
                rel_type = cols[_PIPE_TYPE_COL]
                raw_senses = [cols[i] for i in _PIPE_SENSE_COLS if i < len(cols)]
                arg1 = cols[_PIPE_ARG1_COL]
                arg2 = cols[_PIPE_ARG2_COL]
                if rel_type in ("EntRel", "NoRel"):
                    continue
                senses = _reduce_senses(raw_senses, line_no, pipe_file.name)
                try:
                    arg1_tokens = tokenize(arg1, lowercase)
                    arg2_tokens = tokenize(arg2, lowercase)
                except ValueError:
                    raise FormatError(
                        f"{pipe_file.name}: empty argument text", line=line_no) from None
                instances.append(RelationInstance(
                    id=f"{doc_id}-{line_no}", doc_id=doc_id,
                    arg1_text=arg1, arg2_text=arg2,
                    arg1_tokens=arg1_tokens, arg2_tokens=arg2_tokens,
                    senses=senses, relation_type=rel_type, split=split))
    return instances
