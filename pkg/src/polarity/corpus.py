"""Loading and summarizing SemEval-style polarity datasets.

Datasets are tab-separated text files with one message per line::

    <id>\t<label>\t<text>      (labeled)
    <id>\t<text>               (unlabeled)

Labels are matched case-insensitively against ``positive``, ``negative``
and ``neutral``; anything else is an error.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

from .exceptions import IoFailure, MalformedLine, UnknownLabel


class SentimentLabel(str, enum.Enum):
    """Message polarity. Declaration order is the canonical class order."""

    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"

    @property
    def index(self) -> int:
        return CLASSES.index(self)

    @classmethod
    def parse(cls, value) -> "SentimentLabel":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise UnknownLabel(value) from None

    def __str__(self) -> str:
        return self.value


CLASSES: tuple[SentimentLabel, ...] = tuple(SentimentLabel)


@dataclass(frozen=True)
class Document:
    id: str
    text: str


@dataclass(frozen=True)
class LabeledDocument:
    doc: Document
    label: SentimentLabel

    @property
    def id(self) -> str:
        return self.doc.id

    @property
    def text(self) -> str:
        return self.doc.text


@dataclass(frozen=True)
class DatasetSummary:
    total: int
    per_class: dict = field(default_factory=dict)

    def __str__(self) -> str:
        counts = ", ".join(f"{c.value}={self.per_class[c]}" for c in CLASSES)
        return f"total={self.total} ({counts})"


def _split_line(line: str, ncols: int) -> list[str] | None:
    parts = line.split("\t")
    # tolerate trailing empty columns (some distributions end lines with a tab)
    while len(parts) > ncols and parts[-1].strip() == "":
        parts.pop()
    return parts if len(parts) == ncols else None


def load_dataset(path, has_labels: bool = True) -> list:
    """Read a TSV dataset.

    Returns a list of :class:`LabeledDocument` when ``has_labels`` is true,
    otherwise a list of :class:`Document`. Blank lines are skipped; record
    order follows line order.
    """
    path = Path(path)
    ncols = 3 if has_labels else 2
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            raw = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    records = []
    # str.splitlines would also break on U+2028 and friends inside tweets
    for lineno, line in enumerate(raw.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        parts = _split_line(line, ncols)
        if parts is None:
            raise MalformedLine(
                path, lineno,
                f"expected {ncols} tab-separated columns, got {len(line.split(chr(9)))}",
            )
        doc_id = parts[0].strip()
        if not doc_id:
            raise MalformedLine(path, lineno, "empty id")
        if has_labels:
            try:
                label = SentimentLabel.parse(parts[1])
            except UnknownLabel:
                raise UnknownLabel(parts[1], path, lineno) from None
            records.append(LabeledDocument(Document(doc_id, parts[2]), label))
        else:
            records.append(Document(doc_id, parts[1]))
    return records


def summarize(dataset: Iterable[LabeledDocument]) -> DatasetSummary:
    per_class = {c: 0 for c in CLASSES}
    total = 0
    for rec in dataset:
        per_class[rec.label] += 1
        total += 1
    return DatasetSummary(total=total, per_class=per_class)


def concat(datasets: Sequence[Sequence]) -> list:
    """Concatenate datasets in argument order, keeping duplicate ids."""
    out: list = []
    for ds in datasets:
        out.extend(ds)
    return out


def labels_of(dataset: Iterable[LabeledDocument]) -> list[SentimentLabel]:
    return [rec.label for rec in dataset]


def documents_of(dataset: Iterable[Union[LabeledDocument, Document]]) -> list[Document]:
    return [rec.doc if isinstance(rec, LabeledDocument) else rec for rec in dataset]
