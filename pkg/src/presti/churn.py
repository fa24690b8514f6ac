"""Per-commit code-churn metrics: lines and files added/deleted/modified."""

from __future__ import annotations

from dataclasses import dataclass

from .miner import STATUS_ADDED, STATUS_DELETED, CommitRecord


@dataclass
class EffortVector:
    """Direct-resolution effort counts for one commit."""

    la: int = 0
    ld: int = 0
    fa: int = 0
    fd: int = 0
    fm: int = 0

    @property
    def lt(self) -> int:
        return self.la + self.ld

    @property
    def ft(self) -> int:
        return self.fa + self.fd + self.fm

    def as_dict(self) -> dict[str, int]:
        return {
            "la": self.la,
            "ld": self.ld,
            "fa": self.fa,
            "fd": self.fd,
            "fm": self.fm,
            "lt": self.lt,
            "ft": self.ft,
        }


def compute_churn(record: CommitRecord) -> EffortVector:
    """Sum line and file churn over a commit's diffs.

    Renamed files count as modified; their churn reflects content changes only.
    """
    vec = EffortVector()
    for diff in record.files:
        vec.la += len(diff.added_lines)
        vec.ld += len(diff.deleted_lines)
        if diff.status == STATUS_ADDED:
            vec.fa += 1
        elif diff.status == STATUS_DELETED:
            vec.fd += 1
        else:
            vec.fm += 1
    return vec
