"""The JSONL dataset record that flows between mining, training, and reporting."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .churn import EffortVector
from .errors import EmptyDataset
from .satd import SatdLabel
from .significance import SignificanceProfile

#: Regression target names, in report order.
TARGETS = ("la", "ld", "lt", "fa", "fd", "fm", "ft", "lcc", "mcc", "hcc", "ccc")


@dataclass
class DatasetRecord:
    repo_id: str
    sha: str
    timestamp: int
    message: str
    label: SatdLabel
    effort: EffortVector
    significance: SignificanceProfile

    def target(self, name: str) -> int:
        values = {**self.effort.as_dict(), **self.significance.as_dict()}
        return values[name]

    def as_dict(self) -> dict:
        return {
            "repo_id": self.repo_id,
            "sha": self.sha,
            "timestamp": self.timestamp,
            "message": self.message,
            "label": {
                "is_satd": self.label.is_satd,
                "debt_type": self.label.debt_type,
                "source": self.label.source,
            },
            "effort": self.effort.as_dict(),
            "significance": {**self.significance.as_dict(), "total": self.significance.total},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetRecord":
        label = SatdLabel(
            is_satd=data["label"]["is_satd"],
            debt_type=data["label"]["debt_type"],
            source=data["label"]["source"],
        )
        effort = EffortVector(
            la=data["effort"]["la"],
            ld=data["effort"]["ld"],
            fa=data["effort"]["fa"],
            fd=data["effort"]["fd"],
            fm=data["effort"]["fm"],
        )
        significance = SignificanceProfile(
            lcc=data["significance"]["lcc"],
            mcc=data["significance"]["mcc"],
            hcc=data["significance"]["hcc"],
            ccc=data["significance"]["ccc"],
        )
        return cls(
            repo_id=data["repo_id"],
            sha=data["sha"],
            timestamp=data["timestamp"],
            message=data["message"],
            label=label,
            effort=effort,
            significance=significance,
        )


def record_line(record: DatasetRecord) -> str:
    return json.dumps(record.as_dict(), ensure_ascii=False, separators=(",", ":"))


def write_dataset(records: Iterable[DatasetRecord], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record_line(record))
            fh.write("\n")
            count += 1
    return count


def read_dataset(path: str | Path, allow_empty: bool = False) -> list[DatasetRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(DatasetRecord.from_dict(json.loads(line)))
    if not records and not allow_empty:
        raise EmptyDataset(f"{path} contains no records")
    return records
