"""Git history extraction and cache file handling.

Mines file-level change records and release tags out of a local git
repository via the git CLI, summarizes the project, and reads/writes the
JSON-lines cache files that the rest of the pipeline consumes.
"""

from __future__ import annotations

import json
import logging
import re
import subprocess
from dataclasses import asdict, dataclass
from pathlib import Path

from .labeling import KeywordSet, classify_message

logger = logging.getLogger(__name__)

# Extensions counted as source code; everything else is ignored by the
# windowing stage.
DEFAULT_EXTENSIONS: frozenset[str] = frozenset(
    {
        "java",
        "c",
        "cpp",
        "cc",
        "h",
        "hpp",
        "py",
        "js",
        "ts",
        "go",
        "rb",
        "cs",
        "scala",
        "kt",
        "rs",
        "php",
        "swift",
        "m",
        "groovy",
        "pl",
        "sh",
    }
)

SANITY_MIN_COMMITS = 1000
SANITY_MIN_BUG_FIX_FRACTION = 0.10
SANITY_MIN_RELEASES = 5
SANITY_MIN_DEVELOPERS = 30
SANITY_MIN_ACTIVE_YEARS = 3.0

_SECONDS_PER_YEAR = 365.25 * 86400

_GIT_LOG_FORMAT = "%x01%H%x02%ct%x02%ae%x02%an%x02%B%x03"
_NUMSTAT_LINE = re.compile(r"^(\d+|-)\t(\d+|-)\t(.+)$")
_BRACE_RENAME = re.compile(r"\{([^{}]*) => ([^{}]*)\}")


class RepositoryError(Exception):
    """The path is not a usable git repository or git itself failed."""


class CacheError(Exception):
    """A cache file is malformed; carries the file path and 1-based line."""

    def __init__(self, path: str | Path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True, slots=True)
class ChangeRecord:
    """One file touched by one commit."""

    commit_id: str
    commit_time: int  # unix seconds, committer clock
    author: str
    file_path: str
    insertions: int
    deletions: int
    is_bug_fix: bool


@dataclass(frozen=True, slots=True)
class Release:
    """A release tag resolved to its tagged commit's committer time."""

    tag_name: str
    release_time: int
    ordinal: int  # 1-based position in time order


@dataclass(frozen=True)
class ProjectSummary:
    """Project-level totals used for sanity checks and reporting."""

    commits: int
    bug_fix_commits: int
    bug_fix_fraction: float
    releases: int
    developers: int
    active_years: float
    first_commit_time: int | None
    last_commit_time: int | None


@dataclass
class MiningResult:
    """Everything one history traversal produces."""

    records: list[ChangeRecord]
    commits_seen: int
    bug_fix_commits: int
    developers: int
    first_commit_time: int | None
    last_commit_time: int | None
    skipped_lines: int


def is_source_file(
    file_path: str, extensions: frozenset[str] = DEFAULT_EXTENSIONS
) -> bool:
    """True when the path has a recognized extension and no path segment
    contains "test" (case-insensitive)."""
    segments = [s for s in file_path.replace("\\", "/").split("/") if s]
    if not segments:
        return False
    if any("test" in segment.lower() for segment in segments):
        return False
    name = segments[-1]
    if "." not in name:
        return False
    ext = name.rsplit(".", 1)[1].lower()
    return ext in extensions


def _run_git(repo_path: str | Path, *args: str) -> str:
    try:
        proc = subprocess.run(
            ["git", "-C", str(repo_path), "-c", "core.quotepath=false", *args],
            capture_output=True,
            text=True,
            encoding="utf-8",
            errors="replace",
        )
    except OSError as exc:
        raise RepositoryError(f"cannot run git: {exc}") from exc
    if proc.returncode != 0:
        detail = proc.stderr.strip().splitlines()
        raise RepositoryError(
            f"git {args[0]} failed in {repo_path}: {detail[0] if detail else proc.returncode}"
        )
    return proc.stdout


def _ensure_repository(repo_path: str | Path) -> None:
    path = Path(repo_path)
    if not path.exists():
        raise RepositoryError(f"path does not exist: {path}")
    try:
        _run_git(path, "rev-parse", "--git-dir")
    except RepositoryError as exc:
        raise RepositoryError(f"not a git repository: {path}") from exc


def _has_commits(repo_path: str | Path) -> bool:
    try:
        _run_git(repo_path, "rev-parse", "--verify", "--quiet", "HEAD^{commit}")
    except RepositoryError:
        return False
    return True


def _rename_target(path: str) -> str:
    """Collapse a git rename notation path to the post-rename path."""
    if "{" in path and "=>" in path:
        resolved = _BRACE_RENAME.sub(lambda m: m.group(2), path)
        return resolved.replace("//", "/")
    if " => " in path:
        return path.split(" => ", 1)[1]
    return path


def mine_repository(
    repo_path: str | Path,
    first_parent: bool = True,
    follow_renames: bool = False,
    keywords: KeywordSet | None = None,
) -> MiningResult:
    """Traverse the repository history and return file-level change records.

    By default only the first-parent chain of HEAD is walked, so work merged
    from side branches is attributed to nothing (merge commits themselves
    carry no diff: merge churn is always excluded). With follow_renames,
    rename notation paths are collapsed to the post-rename path; otherwise
    a renamed file appears as one deletion plus one addition.

    An empty repository yields an empty result. Unparsable log lines are
    skipped and counted, never fatal.
    """
    _ensure_repository(repo_path)
    if not _has_commits(repo_path):
        return MiningResult([], 0, 0, 0, None, None, 0)

    args = [
        "log",
        "--numstat",
        "--diff-merges=off",
        "--no-renames" if not follow_renames else "-M",
        f"--pretty=format:{_GIT_LOG_FORMAT}",
    ]
    if first_parent:
        args.append("--first-parent")
    args.append("HEAD")
    out = _run_git(repo_path, *args)

    records: list[ChangeRecord] = []
    seen_pairs: set[tuple[str, str]] = set()
    commits = fixes = skipped = 0
    authors: set[str] = set()
    first_time: int | None = None
    last_time: int | None = None

    for chunk in out.split("\x01"):
        if not chunk.strip():
            continue
        head, sep, body = chunk.partition("\x03")
        if not sep:
            skipped += 1
            continue
        fields = head.split("\x02")
        if len(fields) != 5:
            skipped += 1
            continue
        commit_id, raw_time, email, name, message = fields
        try:
            commit_time = int(raw_time)
        except ValueError:
            skipped += 1
            continue
        commits += 1
        author = (email.strip() or name.strip() or "unknown").lower()
        authors.add(author)
        first_time = commit_time if first_time is None else min(first_time, commit_time)
        last_time = commit_time if last_time is None else max(last_time, commit_time)
        is_fix, _ = classify_message(message, keywords)
        if is_fix:
            fixes += 1
        for line in body.splitlines():
            if not line.strip():
                continue
            match = _NUMSTAT_LINE.match(line)
            if match is None:
                skipped += 1
                continue
            raw_ins, raw_del, path = match.groups()
            # binary files report "-"; count them as zero-churn touches
            insertions = 0 if raw_ins == "-" else int(raw_ins)
            deletions = 0 if raw_del == "-" else int(raw_del)
            if follow_renames:
                path = _rename_target(path)
            key = (commit_id, path)
            if key in seen_pairs:
                continue
            seen_pairs.add(key)
            records.append(
                ChangeRecord(
                    commit_id=commit_id,
                    commit_time=commit_time,
                    author=author,
                    file_path=path,
                    insertions=insertions,
                    deletions=deletions,
                    is_bug_fix=is_fix,
                )
            )
    if skipped:
        logger.warning("skipped %d unparsable log lines in %s", skipped, repo_path)
    return MiningResult(
        records=records,
        commits_seen=commits,
        bug_fix_commits=fixes,
        developers=len(authors),
        first_commit_time=first_time,
        last_commit_time=last_time,
        skipped_lines=skipped,
    )


def extract_history(
    repo_path: str | Path,
    first_parent: bool = True,
    follow_renames: bool = False,
    keywords: KeywordSet | None = None,
) -> list[ChangeRecord]:
    """Convenience wrapper over mine_repository returning just the records."""
    return mine_repository(repo_path, first_parent, follow_renames, keywords).records


def extract_releases(repo_path: str | Path) -> list[Release]:
    """Return all tags as releases ordered by tagged-commit committer time.

    Annotated tags resolve to the commit they point at, not the tag object,
    so the tag's own creation date is irrelevant. Ties are broken by tag
    name so the ordering is a deterministic function of the tag set.
    """
    _ensure_repository(repo_path)
    out = _run_git(
        repo_path,
        "for-each-ref",
        "refs/tags",
        "--format=%(refname:short)%09%(*committerdate:unix)%09%(committerdate:unix)",
    )
    stamped: list[tuple[int, str]] = []
    for line in out.splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            logger.warning("unparsable tag line skipped: %r", line)
            continue
        name, peeled, direct = parts
        raw = peeled.strip() or direct.strip()
        if not raw:
            logger.warning("tag %s does not resolve to a commit; skipped", name)
            continue
        try:
            stamped.append((int(raw), name))
        except ValueError:
            logger.warning("tag %s has no usable timestamp; skipped", name)
    stamped.sort()
    return [
        Release(tag_name=name, release_time=time, ordinal=i + 1)
        for i, (time, name) in enumerate(stamped)
    ]


def summarize(result: MiningResult, releases: list[Release]) -> ProjectSummary:
    """Fold a mining result and release list into project-level totals."""
    commits = result.commits_seen
    fraction = result.bug_fix_commits / commits if commits else 0.0
    if result.first_commit_time is None or result.last_commit_time is None:
        years = 0.0
    else:
        years = (result.last_commit_time - result.first_commit_time) / _SECONDS_PER_YEAR
    return ProjectSummary(
        commits=commits,
        bug_fix_commits=result.bug_fix_commits,
        bug_fix_fraction=fraction,
        releases=len(releases),
        developers=result.developers,
        active_years=years,
        first_commit_time=result.first_commit_time,
        last_commit_time=result.last_commit_time,
    )


def apply_sanity_checks(summary: ProjectSummary) -> list[str]:
    """Return one violation string per failed history-size rule (empty = sane)."""
    violations: list[str] = []
    if summary.commits < SANITY_MIN_COMMITS:
        violations.append(
            f"commits {summary.commits} < {SANITY_MIN_COMMITS}"
        )
    if summary.bug_fix_fraction < SANITY_MIN_BUG_FIX_FRACTION:
        violations.append(
            f"bug-fix fraction {summary.bug_fix_fraction:.3f} < {SANITY_MIN_BUG_FIX_FRACTION}"
        )
    if summary.releases < SANITY_MIN_RELEASES:
        violations.append(f"releases {summary.releases} < {SANITY_MIN_RELEASES}")
    if summary.developers < SANITY_MIN_DEVELOPERS:
        violations.append(f"developers {summary.developers} < {SANITY_MIN_DEVELOPERS}")
    if summary.active_years < SANITY_MIN_ACTIVE_YEARS:
        violations.append(
            f"active years {summary.active_years:.2f} < {SANITY_MIN_ACTIVE_YEARS}"
        )
    return violations


_HISTORY_FIELDS = (
    "commit_id",
    "commit_time",
    "author",
    "file_path",
    "insertions",
    "deletions",
    "is_bug_fix",
)
_RELEASE_FIELDS = ("tag_name", "release_time", "ordinal")


def write_history(records: list[ChangeRecord], path: str | Path) -> None:
    """Write change records as one JSON object per line, UTF-8, LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(asdict(record), ensure_ascii=False))
            fh.write("\n")


def read_history(path: str | Path) -> list[ChangeRecord]:
    records: list[ChangeRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CacheError(path, line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict) or set(obj) != set(_HISTORY_FIELDS):
                raise CacheError(path, line_no, "unexpected history record fields")
            try:
                record = ChangeRecord(
                    commit_id=str(obj["commit_id"]),
                    commit_time=int(obj["commit_time"]),
                    author=str(obj["author"]),
                    file_path=str(obj["file_path"]),
                    insertions=int(obj["insertions"]),
                    deletions=int(obj["deletions"]),
                    is_bug_fix=bool(obj["is_bug_fix"]),
                )
            except (TypeError, ValueError) as exc:
                raise CacheError(path, line_no, f"bad field value: {exc}") from exc
            if record.insertions < 0 or record.deletions < 0:
                raise CacheError(path, line_no, "negative churn")
            records.append(record)
    return records


def write_releases(releases: list[Release], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for release in releases:
            fh.write(json.dumps(asdict(release), ensure_ascii=False))
            fh.write("\n")


def read_releases(path: str | Path) -> list[Release]:
    releases: list[Release] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CacheError(path, line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict) or set(obj) != set(_RELEASE_FIELDS):
                raise CacheError(path, line_no, "unexpected release record fields")
            try:
                release = Release(
                    tag_name=str(obj["tag_name"]),
                    release_time=int(obj["release_time"]),
                    ordinal=int(obj["ordinal"]),
                )
            except (TypeError, ValueError) as exc:
                raise CacheError(path, line_no, f"bad field value: {exc}") from exc
            releases.append(release)
    expected = list(range(1, len(releases) + 1))
    if [r.ordinal for r in releases] != expected:
        raise CacheError(path, len(releases), "release ordinals are not 1..N in order")
    for earlier, later in zip(releases, releases[1:]):
        if later.release_time < earlier.release_time:
            raise CacheError(path, later.ordinal, "release times are not sorted")
    return releases
