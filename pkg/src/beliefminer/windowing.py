"""Release window construction and post-release defect counting.

Each release r (except the first) gets a pre period (t_{r-1}, t_r] whose
source-file changes feed the metrics, and a post horizon (t_r, t_r + H]
whose bug-fix touches define the defect counts the metrics are correlated
against.
"""

from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass, field

from .ingest import DEFAULT_EXTENSIONS, ChangeRecord, Release, is_source_file

logger = logging.getLogger(__name__)

DEFAULT_POST_DAYS = 182
DEFAULT_MIN_FILES = 3

_SECONDS_PER_DAY = 86400


@dataclass
class ReleaseWindow:
    """Pre-release change slice for one release."""

    release: Release
    pre_start: int  # exclusive
    pre_end: int  # inclusive; equals the release time
    post_end: int  # inclusive end of the defect horizon
    pre_records: list[ChangeRecord] = field(default_factory=list)
    distinct_files: int = 0
    right_censored: bool = False


@dataclass
class DefectCounts:
    """Post-horizon bug-fix touch counts per pre-period file (F_D)."""

    per_file: dict[str, int]

    @property
    def defective_files(self) -> int:
        return sum(1 for count in self.per_file.values() if count > 0)


def build_windows(
    releases: list[Release],
    records: list[ChangeRecord],
    post_days: int = DEFAULT_POST_DAYS,
    extensions: frozenset[str] = DEFAULT_EXTENSIONS,
) -> list[ReleaseWindow]:
    """Build one window per release after the first.

    Only source files (per the extension/test-path filter) enter windows.
    A window is right-censored when its post horizon runs past the last
    mined commit, meaning late defects may not have been observed yet.
    Releases tagged at the same instant as their predecessor have an empty
    pre interval and produce no window.
    """
    if post_days <= 0:
        raise ValueError("post_days must be positive")
    if len(releases) < 2:
        return []
    ordered = sorted(releases, key=lambda r: r.ordinal)
    source = [r for r in records if is_source_file(r.file_path, extensions)]
    source.sort(key=lambda r: (r.commit_time, r.commit_id, r.file_path))
    times = [r.commit_time for r in source]
    last_time = max((r.commit_time for r in records), default=None)

    windows: list[ReleaseWindow] = []
    for previous, current in zip(ordered, ordered[1:]):
        if current.release_time <= previous.release_time:
            logger.warning(
                "release %s is not after %s; window skipped",
                current.tag_name,
                previous.tag_name,
            )
            continue
        pre_start = previous.release_time
        pre_end = current.release_time
        post_end = pre_end + post_days * _SECONDS_PER_DAY
        lo = bisect_right(times, pre_start)
        hi = bisect_right(times, pre_end)
        pre = source[lo:hi]
        windows.append(
            ReleaseWindow(
                release=current,
                pre_start=pre_start,
                pre_end=pre_end,
                post_end=post_end,
                pre_records=pre,
                distinct_files=len({r.file_path for r in pre}),
                right_censored=last_time is None or post_end > last_time,
            )
        )
    return windows


def count_post_defects(
    window: ReleaseWindow, records: list[ChangeRecord]
) -> DefectCounts:
    """Count bug-fix touches per pre-period file inside the post horizon.

    Files absent from the pre period are ignored even if fixed later; files
    never fixed get an explicit zero.
    """
    counts: dict[str, int] = {
        path: 0 for path in sorted({r.file_path for r in window.pre_records})
    }
    if not counts:
        return DefectCounts(per_file=counts)
    for record in records:
        if (
            record.is_bug_fix
            and window.pre_end < record.commit_time <= window.post_end
            and record.file_path in counts
        ):
            counts[record.file_path] += 1
    return DefectCounts(per_file=counts)


def qualify_window(window: ReleaseWindow, min_files: int = DEFAULT_MIN_FILES) -> bool:
    """A window qualifies for assessment when enough distinct source files
    changed before the release."""
    return window.distinct_files >= min_files
