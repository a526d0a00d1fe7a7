"""Synthetic change histories with planted effect strengths.

Generates cache-level histories (records + releases) in which a chosen
belief metric is coupled to post-release fix counts with a target Spearman
strength, so the full pipeline can be validated against known ground truth.

Layout guarantees that make the planted effect exact: every window uses its
own unique file paths, and all planted fix commits land in a tail region
after the last release that still falls inside every window's post horizon.
Pre-period commits of later windows therefore never touch earlier windows'
files, and each file's post-horizon fix count equals its planted count.
"""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import ChangeRecord, Release
from .labeling import DEFAULT_STEMS, classify_message
from .stats import spearman

logger = logging.getLogger(__name__)

SUPPORTED_BELIEFS: tuple[str, ...] = ("B2", "B3", "B8", "B9")

_SECONDS_PER_DAY = 86400
_BASE_TIME = 1_500_000_000
_MIN_SPACING = 600
_AUTHOR_POOL = tuple(f"dev{i:02d}@example.com" for i in range(12))
_NEUTRAL_WORDS = (
    "update",
    "refactor",
    "extend",
    "document",
    "polish",
    "tune",
    "rework",
    "adjust",
)
_CALIBRATION_TOLERANCE = 0.04
_PROBE_WINDOWS = 48


class ScenarioError(Exception):
    """A scenario file or field is invalid; message names the field."""


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one synthetic history."""

    releases: int = 51
    files_min: int = 30
    files_max: int = 50
    planted_belief: str | None = "B3"
    planted_strength: float = 0.7
    noise_seed: int = 1
    bug_fix_rate: float = 0.15
    post_days: int = 182

    def validate(self) -> None:
        if self.releases < 2:
            raise ScenarioError("releases: must be >= 2")
        if self.files_min < 1 or self.files_max < self.files_min:
            raise ScenarioError("files_per_release: need 1 <= min <= max")
        if self.planted_belief is not None and self.planted_belief not in SUPPORTED_BELIEFS:
            supported = ", ".join(SUPPORTED_BELIEFS)
            raise ScenarioError(
                f"planted_belief: {self.planted_belief!r} unsupported; "
                f"use one of {supported}, or none"
            )
        if not 0.0 <= self.planted_strength <= 1.0:
            raise ScenarioError("planted_strength: must lie in [0, 1]")
        if not 0.0 <= self.bug_fix_rate <= 1.0:
            raise ScenarioError("bug_fix_rate: must lie in [0, 1]")
        if self.post_days < 1:
            raise ScenarioError("post_days: must be >= 1")
        if _spacing(self) < _MIN_SPACING:
            raise ScenarioError(
                "releases: too many releases to fit inside the post_days horizon"
            )


def _spacing(spec: ScenarioSpec) -> int:
    """Seconds between releases, chosen so the whole release train ends
    well before the earliest window's post horizon does."""
    horizon = spec.post_days * _SECONDS_PER_DAY
    return min(_SECONDS_PER_DAY, horizon // (2 * max(1, spec.releases - 2)))


def parse_scenario_file(path: str | Path) -> ScenarioSpec:
    """Parse a flat key = value scenario file into a validated spec."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    values: dict[str, object] = {}
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"{path}:{line_no}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        try:
            if key == "releases":
                values["releases"] = int(raw)
            elif key == "files_per_release":
                parts = [p.strip() for p in raw.split(",")]
                if len(parts) == 1:
                    values["files_min"] = values["files_max"] = int(parts[0])
                elif len(parts) == 2:
                    values["files_min"] = int(parts[0])
                    values["files_max"] = int(parts[1])
                else:
                    raise ValueError("expected 'n' or 'min,max'")
            elif key == "planted_belief":
                values["planted_belief"] = None if raw.lower() == "none" else raw
            elif key == "planted_strength":
                values["planted_strength"] = float(raw)
            elif key == "noise_seed":
                values["noise_seed"] = int(raw)
            elif key == "bug_fix_rate":
                values["bug_fix_rate"] = float(raw)
            elif key == "post_days":
                values["post_days"] = int(raw)
            else:
                raise ScenarioError(f"{path}:{line_no}: unknown key {key!r}")
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(f"{key}: bad value {raw!r} ({exc})") from exc
    spec = ScenarioSpec(**values)  # type: ignore[arg-type]
    spec.validate()
    return spec


def _plant_xy(
    rng: np.random.Generator, n: int, belief: str, mix: float, exact: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Draw one window's planted metric values x and fix counts y.

    A latent uniform v orders the files; x is a monotone (nondecreasing)
    function of that order per belief, and y blends the order with fresh
    noise at the calibrated mix. With exact=True, y is the raw rank, so a
    strictly increasing x (B3/B9) yields Spearman rho of exactly 1.
    """
    v = rng.random(n)
    ranks = np.empty(n, dtype=np.int64)
    ranks[np.argsort(v)] = np.arange(1, n + 1)
    if belief in ("B3", "B9"):
        # strictly increasing in rank: step 3 dominates the 0..2 jitter
        x = 10 + 3 * (ranks - 1) + rng.integers(0, 3, size=n)
    elif belief == "B2":
        x = 1 + (v * 9).astype(np.int64)
    elif belief == "B8":
        x = 1 + (v * 14).astype(np.int64)
    else:
        raise ValueError(f"no planting scheme for {belief}")
    if exact:
        y = ranks.copy()
    else:
        normalized = (ranks - 0.5) / n
        blended = mix * normalized + (1.0 - mix) * rng.random(n)
        y = (blended * 10).astype(np.int64)
    return x, y


def _probe_median_rho(spec: ScenarioSpec, mix: float) -> float:
    """Realized median Spearman rho of the planting scheme at a given mix,
    measured on a fixed probe sample."""
    rng = np.random.default_rng(
        [spec.noise_seed, 9173, int(mix * 1e9) & 0x7FFFFFFF]
    )
    n = max(4, (spec.files_min + spec.files_max) // 2)
    rhos = []
    for _ in range(_PROBE_WINDOWS):
        x, y = _plant_xy(rng, n, spec.planted_belief or "B3", mix, exact=False)
        rhos.append(spearman([float(v) for v in x], [int(v) for v in y], exact_p=False).rho)
    return statistics.median(rhos)


def calibrate_mix(spec: ScenarioSpec) -> float:
    """Binary-search the order/noise mix until the probe's realized median
    rho is within tolerance of the target strength. When the target exceeds
    what the scheme's ties allow, the search saturates at full coupling."""
    if spec.planted_belief is None or spec.planted_strength <= 0.0:
        return 0.0
    if spec.planted_strength >= 1.0:
        return 1.0
    low, high = 0.0, 1.0
    mid = 0.5
    for _ in range(20):
        mid = (low + high) / 2
        realized = _probe_median_rho(spec, mid)
        if abs(realized - spec.planted_strength) <= _CALIBRATION_TOLERANCE:
            return mid
        if realized < spec.planted_strength:
            low = mid
        else:
            high = mid
    logger.warning(
        "calibration did not converge for %s at strength %.2f; using mix %.4f",
        spec.planted_belief,
        spec.planted_strength,
        mid,
    )
    return mid


def _fix_message(rng: np.random.Generator, path: str) -> str:
    stem = DEFAULT_STEMS[int(rng.integers(0, len(DEFAULT_STEMS)))]
    return f"{stem}: adjust {path}"


def _neutral_message(rng: np.random.Generator, path: str) -> str:
    word = _NEUTRAL_WORDS[int(rng.integers(0, len(_NEUTRAL_WORDS)))]
    return f"{word} {path} block {int(rng.integers(0, 1000))}"


def generate(spec: ScenarioSpec) -> tuple[list[ChangeRecord], list[Release]]:
    """Produce a deterministic synthetic history for the scenario.

    Returns records sorted by (time, commit id, path) and releases with
    ordinals 1..R; both satisfy every cache-format invariant, so the output
    is interchangeable with mined data.
    """
    spec.validate()
    mix = calibrate_mix(spec)
    rng = np.random.default_rng(spec.noise_seed)
    horizon = spec.post_days * _SECONDS_PER_DAY
    spacing = _spacing(spec)
    release_times = [
        _BASE_TIME + (r - 1) * spacing for r in range(1, spec.releases + 1)
    ]
    releases = [
        Release(tag_name=f"r{r:04d}", release_time=release_times[r - 1], ordinal=r)
        for r in range(1, spec.releases + 1)
    ]
    # the tail must sit after the last release yet inside the earliest
    # (hence every) window's post horizon
    tail_low = release_times[-1] + 60
    tail_high = release_times[1] + horizon - 60
    exact = spec.planted_belief is not None and spec.planted_strength >= 1.0

    records: list[ChangeRecord] = []
    commit_counter = 0

    def next_commit_id() -> str:
        nonlocal commit_counter
        commit_counter += 1
        return f"{commit_counter:040x}"

    def add_commit(
        time: int, path: str, insertions: int, deletions: int, author: str, fix: bool
    ) -> None:
        message = (
            _fix_message(rng, path) if fix else _neutral_message(rng, path)
        )
        labeled, _ = classify_message(message)
        if labeled != fix:
            raise RuntimeError(f"message vocabulary drift: {message!r}")
        records.append(
            ChangeRecord(
                commit_id=next_commit_id(),
                commit_time=int(time),
                author=author,
                file_path=path,
                insertions=int(insertions),
                deletions=int(deletions),
                is_bug_fix=labeled,
            )
        )

    def random_author() -> str:
        return _AUTHOR_POOL[int(rng.integers(0, len(_AUTHOR_POOL)))]

    def pre_time(window: int) -> int:
        low = release_times[window - 2] + 1  # window r spans (t_{r-1}, t_r]
        high = release_times[window - 1]
        return int(rng.integers(low, high + 1))

    planned_fixes: list[tuple[str, int]] = []
    for window in range(2, spec.releases + 1):
        n_files = int(rng.integers(spec.files_min, spec.files_max + 1))
        paths = [f"w{window:04d}/f{i:03d}.py" for i in range(n_files)]
        if spec.planted_belief is None:
            x = 1 + rng.integers(0, 200, size=n_files)
            y = rng.poisson(1.2, size=n_files)
        else:
            x, y = _plant_xy(rng, n_files, spec.planted_belief, mix, exact)
        for i, path in enumerate(paths):
            flagged_fix = bool(rng.random() < spec.bug_fix_rate)
            if spec.planted_belief == "B2":
                author_count = int(x[i])
                chosen = rng.permutation(len(_AUTHOR_POOL))[:author_count]
                for author_index in chosen:
                    add_commit(
                        pre_time(window),
                        path,
                        int(1 + rng.integers(0, 50)),
                        int(rng.integers(0, 20)),
                        _AUTHOR_POOL[int(author_index)],
                        flagged_fix,
                    )
            elif spec.planted_belief == "B8":
                for _ in range(int(x[i])):
                    add_commit(
                        pre_time(window),
                        path,
                        int(1 + rng.integers(0, 50)),
                        int(rng.integers(0, 20)),
                        random_author(),
                        flagged_fix,
                    )
            elif spec.planted_belief == "B9":
                add_commit(
                    pre_time(window),
                    path,
                    int(rng.integers(0, 60)),
                    int(x[i]),
                    random_author(),
                    flagged_fix,
                )
            else:  # B3 and the null scheme both carry the value as insertions
                add_commit(
                    pre_time(window),
                    path,
                    int(x[i]),
                    int(rng.integers(0, 60)),
                    random_author(),
                    flagged_fix,
                )
            if y[i] > 0:
                planned_fixes.append((path, int(y[i])))

    for path, count in planned_fixes:
        for _ in range(count):
            add_commit(
                int(rng.integers(tail_low, tail_high + 1)),
                path,
                int(rng.integers(0, 8)),
                int(1 + rng.integers(0, 8)),
                random_author(),
                True,
            )

    # a trailing neutral commit past the farthest horizon marks the history
    # as fully observed; without it every window would read as censored
    add_commit(
        release_times[-1] + horizon + 60,
        "meta/observed.py",
        1,
        0,
        random_author(),
        False,
    )

    records.sort(key=lambda r: (r.commit_time, r.commit_id, r.file_path))
    return records, releases
