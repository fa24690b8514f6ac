"""Traverse local git repositories and emit filtered commit records with diffs."""

from __future__ import annotations

import logging
import re
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from .errors import CorruptObject, NotARepository

logger = logging.getLogger(__name__)

STATUS_ADDED = "Added"
STATUS_MODIFIED = "Modified"
STATUS_DELETED = "Deleted"
STATUS_RENAMED = "Renamed"

_REVERT_LINE_RE = re.compile(r"^\s*this reverts commit [0-9a-f]{6,40}\b", re.IGNORECASE)

# Code points above Latin Extended-B mark a message as non-English.
_MAX_LATIN_CODEPOINT = 0x024F

_RECORD_SEP = "\x01"
_FIELD_SEP = "\x02"


@dataclass
class FileDiff:
    """One file's change within a commit."""

    path: str
    status: str
    added_lines: list[str] = field(default_factory=list)
    deleted_lines: list[str] = field(default_factory=list)
    old_text: Optional[str] = None
    new_text: Optional[str] = None
    old_path: Optional[str] = None  # differs from path only for renames

    @property
    def is_java(self) -> bool:
        return self.path.endswith(".java")


@dataclass
class CommitRecord:
    """One commit: identity, parents, message, per-file diffs."""

    repo_id: str
    sha: str
    parent_count: int
    timestamp: int
    message: str
    files: list[FileDiff] = field(default_factory=list)


@dataclass
class MinerOptions:
    branch: Optional[str] = None
    max_commits: Optional[int] = None
    keep_non_english: bool = False
    keep_reverts: bool = False


def is_english(message: str) -> bool:
    """False iff the message contains an alphabetic code point above U+024F."""
    return not any(ch.isalpha() and ord(ch) > _MAX_LATIN_CODEPOINT for ch in message)


def _is_rollback(message: str) -> bool:
    tokens = message.split()
    if tokens and tokens[0].lower() == "revert":
        return True
    return any(_REVERT_LINE_RE.match(line) for line in message.splitlines())


def keep_commit(record: CommitRecord, opts: MinerOptions | None = None) -> bool:
    """Drop merge commits, rollback commits, and non-English messages."""
    opts = opts or MinerOptions()
    if record.parent_count >= 2:
        return False
    if not opts.keep_reverts and _is_rollback(record.message):
        return False
    if not opts.keep_non_english and not is_english(record.message):
        return False
    return True


def _git(repo: Path, *args: str, check: bool = True) -> str:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True,
        check=False,
    )
    if check and proc.returncode != 0:
        raise subprocess.CalledProcessError(
            proc.returncode, proc.args, output=proc.stdout, stderr=proc.stderr
        )
    return proc.stdout.decode("utf-8", errors="replace")


def _resolve_branch(repo: Path, branch: Optional[str]) -> str:
    if branch:
        return branch
    try:
        name = _git(repo, "symbolic-ref", "--short", "HEAD").strip()
        return name or "HEAD"
    except subprocess.CalledProcessError:
        return "HEAD"


def _list_commits(repo: Path, branch: str) -> list[tuple[str, list[str], int, str]]:
    """(sha, parents, timestamp, message) reachable from branch, oldest first."""
    fmt = f"{_RECORD_SEP}%H{_FIELD_SEP}%P{_FIELD_SEP}%ct{_FIELD_SEP}%B"
    try:
        out = _git(repo, "log", "--topo-order", "--reverse", f"--format={fmt}", branch)
    except subprocess.CalledProcessError as exc:
        stderr = exc.stderr.decode("utf-8", errors="replace") if exc.stderr else ""
        raise NotARepository(f"{repo}: cannot list commits on {branch!r}: {stderr.strip()}")
    commits = []
    for chunk in out.split(_RECORD_SEP):
        if not chunk.strip():
            continue
        sha, parents_field, ts, message = chunk.split(_FIELD_SEP, 3)
        parents = parents_field.split()
        commits.append((sha.strip(), parents, int(ts), message.rstrip("\n")))
    return commits


_DIFF_HEADER_RE = re.compile(r'^diff --git (?:"?a/(.*?)"?) (?:"?b/(.*?)"?)$')


def _parse_patch(patch: str) -> list[FileDiff]:
    """Parse `git diff-tree -p` output into FileDiffs (statuses, +/- lines)."""
    diffs: list[FileDiff] = []
    current: Optional[FileDiff] = None
    in_hunk = False
    old_path = new_path = None
    for line in patch.splitlines():
        m = _DIFF_HEADER_RE.match(line)
        if m:
            old_path, new_path = m.group(1), m.group(2)
            current = FileDiff(path=new_path, status=STATUS_MODIFIED, old_path=old_path)
            diffs.append(current)
            in_hunk = False
            continue
        if current is None:
            continue
        if not in_hunk:
            if line.startswith("new file mode"):
                current.status = STATUS_ADDED
            elif line.startswith("deleted file mode"):
                current.status = STATUS_DELETED
                current.path = old_path or current.path
            elif line.startswith("rename from"):
                current.status = STATUS_RENAMED
            elif line.startswith("Binary files ") or line == "GIT binary patch":
                continue
            elif line.startswith("@@"):
                in_hunk = True
            continue
        if line.startswith("@@"):
            continue
        if line.startswith("+"):
            current.added_lines.append(line[1:])
        elif line.startswith("-"):
            current.deleted_lines.append(line[1:])
        elif line.startswith("\\"):
            continue  # "\ No newline at end of file"
        elif not line.startswith(" ") and line:
            in_hunk = False
    return diffs


def _blob_text(repo: Path, sha: str, path: str) -> Optional[str]:
    try:
        raw = subprocess.run(
            ["git", "-C", str(repo), "show", f"{sha}:{path}"],
            capture_output=True,
            check=True,
        ).stdout
    except subprocess.CalledProcessError:
        return None
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        return None


def _attach_java_texts(repo: Path, sha: str, parent: Optional[str], diffs: list[FileDiff]) -> None:
    for d in diffs:
        if not d.is_java:
            continue
        if d.status != STATUS_ADDED and parent is not None:
            d.old_text = _blob_text(repo, parent, d.old_path or d.path)
        if d.status != STATUS_DELETED:
            d.new_text = _blob_text(repo, sha, d.path)


def _commit_diffs(repo: Path, sha: str, parent: Optional[str]) -> list[FileDiff]:
    if parent is None:
        args = ["diff-tree", "--root", "-r", "-M", "-p", "--no-commit-id", sha]
    else:
        args = ["diff-tree", "-r", "-M", "-p", "--no-commit-id", parent, sha]
    patch = _git(repo, *args)
    diffs = _parse_patch(patch)
    _attach_java_texts(repo, sha, parent, diffs)
    return diffs


def walk_repository(repo_path: str | Path, opts: MinerOptions | None = None) -> Iterator[CommitRecord]:
    """Yield filtered CommitRecords in topological order, diffed against the first parent."""
    opts = opts or MinerOptions()
    repo = Path(repo_path)
    probe = subprocess.run(
        ["git", "-C", str(repo), "rev-parse", "--git-dir"],
        capture_output=True,
    )
    if probe.returncode != 0:
        raise NotARepository(f"{repo} is not a git repository")
    branch = _resolve_branch(repo, opts.branch)
    commits = _list_commits(repo, branch)
    if not commits:
        raise NotARepository(f"{repo} has no commits on {branch!r}")
    repo_id = repo.resolve().name
    yielded = 0
    for sha, parents, timestamp, message in commits:
        record = CommitRecord(
            repo_id=repo_id,
            sha=sha.lower(),
            parent_count=len(parents),
            timestamp=timestamp,
            message=message,
        )
        if not keep_commit(record, opts):
            continue
        first_parent = parents[0] if parents else None
        try:
            record.files = _commit_diffs(repo, sha, first_parent)
        except subprocess.CalledProcessError as exc:
            stderr = exc.stderr.decode("utf-8", errors="replace") if exc.stderr else ""
            logger.warning("skipping corrupt commit %s in %s: %s", sha[:10], repo_id, stderr.strip())
            continue
        yield record
        yielded += 1
        if opts.max_commits is not None and yielded >= opts.max_commits:
            return
