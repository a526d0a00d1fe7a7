"""Belief support populations and the dataset-level analyses over them.

Builds per-(project, belief) populations of significant Spearman scores,
labels support strength, ranks beliefs overall and by release size, and
computes coverage, prevalence, and growth/decay trends. Also owns the CSV
serialization of assessment results.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .config import Config
from .ingest import ChangeRecord, Release
from .metrics import BELIEF_IDS, BeliefVector, HcmConfig, compute_all
from .stats import (
    RankedGroup,
    SupportScore,
    Treatment,
    quartiles,
    scott_knott,
    spearman,
)
from .windowing import ReleaseWindow, build_windows, count_post_defects, qualify_window

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.01
DEFAULT_MIN_OBSERVATIONS = 4
DEFAULT_SUPPORT_THRESHOLD = 0.40
DEFAULT_TREND_THRESHOLD = 0.40
REPLICATION_MEDIAN_DF = 18.0

LABEL_NONE = "none"
LABEL_WEAK = "weak"
LABEL_SUPPORT = "support"
LABEL_STRONG = "strong"
LABEL_VERY_STRONG = "very_strong"

BUCKET_SMALL = "small"
BUCKET_MEDIUM = "medium"
BUCKET_LARGE = "large"
BUCKET_NONE = "unbucketed"

_BUCKET_PREFIX = {BUCKET_SMALL: "S", BUCKET_MEDIUM: "M", BUCKET_LARGE: "L"}

EXCLUDE_TOO_FEW = "too_few_observations"
EXCLUDE_NOT_SIGNIFICANT = "not_significant"


@dataclass
class BeliefPopulation:
    """Significant Spearman scores for one belief in one project."""

    belief_id: str
    project_id: str
    scores: list[SupportScore]
    releases_total: int
    exclusions: dict[str, int] = field(default_factory=dict)

    @property
    def releases_used(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class SizeThresholds:
    """D_F cut points separating small/medium/large release windows."""

    median_df: float
    q3_df: float


@dataclass(frozen=True)
class TrendResult:
    """Support trajectory of one belief across one project's releases."""

    belief_id: str
    project_id: str
    trend: str  # growth | decay | neither
    rho_time: float | None
    p_time: float | None


@dataclass(frozen=True)
class WindowRow:
    """Flat per-window facts retained for reporting."""

    project_id: str
    release_ordinal: int
    release_time: int
    distinct_files: int
    right_censored: bool
    qualified: bool


@dataclass(frozen=True)
class SummaryRow:
    """Flat per-project totals retained for reporting."""

    project_id: str
    commits: int
    bug_fix_fraction: float
    releases: int
    developers: int
    active_years: float


@dataclass
class ProjectAssessment:
    project_id: str
    populations: dict[str, BeliefPopulation]
    window_rows: list[WindowRow]
    releases_total: int


def belief_population(
    project_id: str,
    belief_id: str,
    scored_windows: list[tuple[ReleaseWindow, BeliefVector]],
    releases_total: int,
    alpha: float = DEFAULT_ALPHA,
    min_n: int = DEFAULT_MIN_OBSERVATIONS,
) -> BeliefPopulation:
    """Correlate each window's vector and keep only significant scores.

    Windows with fewer than min_n entities never reach the correlation;
    scores with p >= alpha are dropped. Both exclusions are counted by
    reason so reports can say why a release is missing.
    """
    if min_n < 2:
        raise ValueError("min_n must be >= 2")
    scores: list[SupportScore] = []
    exclusions = {EXCLUDE_TOO_FEW: 0, EXCLUDE_NOT_SIGNIFICANT: 0}
    for window, vector in scored_windows:
        if vector.belief_id != belief_id:
            raise ValueError(
                f"vector for {vector.belief_id} passed to {belief_id} population"
            )
        if vector.n < min_n:
            exclusions[EXCLUDE_TOO_FEW] += 1
            continue
        score = spearman(
            vector.x,
            vector.y,
            exact_p=True,
            belief_id=belief_id,
            release_ordinal=window.release.ordinal,
        )
        if score.p_value >= alpha:
            exclusions[EXCLUDE_NOT_SIGNIFICANT] += 1
            continue
        scores.append(score)
    return BeliefPopulation(
        belief_id=belief_id,
        project_id=project_id,
        scores=scores,
        releases_total=releases_total,
        exclusions=exclusions,
    )


def assess_project(
    project_id: str,
    records: list[ChangeRecord],
    releases: list[Release],
    cfg: Config | None = None,
) -> ProjectAssessment:
    """Run windowing, metrics, and population construction for one project."""
    if cfg is None:
        cfg = Config()
    windows = build_windows(
        releases, records, post_days=cfg.post_days, extensions=frozenset(cfg.extensions)
    )
    hcm_cfg = HcmConfig(period_days=cfg.period_days, decay_rate=cfg.decay_rate)
    window_rows: list[WindowRow] = []
    per_belief: dict[str, list[tuple[ReleaseWindow, BeliefVector]]] = {
        belief: [] for belief in BELIEF_IDS
    }
    for window in windows:
        qualified = qualify_window(window, cfg.min_files)
        window_rows.append(
            WindowRow(
                project_id=project_id,
                release_ordinal=window.release.ordinal,
                release_time=window.release.release_time,
                distinct_files=window.distinct_files,
                right_censored=window.right_censored,
                qualified=qualified,
            )
        )
        if not qualified:
            continue
        defects = count_post_defects(window, records)
        for vector in compute_all(window, defects, hcm_cfg):
            per_belief[vector.belief_id].append((window, vector))
    populations = {
        belief: belief_population(
            project_id,
            belief,
            per_belief[belief],
            releases_total=len(releases),
            alpha=cfg.alpha,
            min_n=cfg.min_observations,
        )
        for belief in BELIEF_IDS
    }
    return ProjectAssessment(
        project_id=project_id,
        populations=populations,
        window_rows=window_rows,
        releases_total=len(releases),
    )


def support_label(rho: float) -> str:
    """Map |rho| to its support band (none below 0.40, then weak, support,
    strong, very_strong at 0.50/0.60/0.70)."""
    if not math.isfinite(rho):
        raise ValueError("rho must be finite")
    magnitude = abs(rho)
    if magnitude > 1.0:
        raise ValueError("rho must lie in [-1, 1]")
    if magnitude < 0.40:
        return LABEL_NONE
    if magnitude < 0.50:
        return LABEL_WEAK
    if magnitude < 0.60:
        return LABEL_SUPPORT
    if magnitude < 0.70:
        return LABEL_STRONG
    return LABEL_VERY_STRONG


def coverage(
    populations: list[BeliefPopulation],
    threshold: float = DEFAULT_SUPPORT_THRESHOLD,
) -> int:
    """Number of beliefs whose median |rho| reaches the support threshold.
    Empty populations never count."""
    covered = 0
    for population in populations:
        if not population.scores:
            continue
        magnitudes = sorted(abs(s.rho) for s in population.scores)
        _, median, _ = quartiles(magnitudes)
        if median >= threshold:
            covered += 1
    return covered


def prevalence(
    populations: list[BeliefPopulation],
    threshold: float = DEFAULT_SUPPORT_THRESHOLD,
) -> float | None:
    """Percentage of pooled significant scores reaching the threshold, or
    None when there are no scores at all."""
    pooled = [abs(s.rho) for p in populations for s in p.scores]
    if not pooled:
        return None
    reached = sum(1 for value in pooled if value >= threshold)
    return 100.0 * reached / len(pooled)


def rank_beliefs(
    populations: list[BeliefPopulation],
    seed: int = 0,
    iterations: int = 512,
    a12_threshold: float = 0.56,
) -> list[RankedGroup]:
    """Scott-Knott over the ten beliefs' pooled |rho| scores across projects.
    Beliefs with no significant score anywhere are dropped with a warning."""
    pooled: dict[str, list[float]] = defaultdict(list)
    for population in populations:
        pooled[population.belief_id].extend(abs(s.rho) for s in population.scores)
    treatments: list[Treatment] = []
    for belief in BELIEF_IDS:
        values = pooled.get(belief)
        if not values:
            logger.warning("belief %s has no significant scores; not ranked", belief)
            continue
        treatments.append(Treatment(belief, values))
    if not treatments:
        return []
    return scott_knott(treatments, seed=seed, iterations=iterations, a12_threshold=a12_threshold)


def size_thresholds(
    distinct_file_counts: list[int], replication_mode: bool = False
) -> SizeThresholds:
    """Median and Q3 of the dataset's own D_F distribution. Replication mode
    pins the median cut to the published value of 18."""
    if not distinct_file_counts:
        raise ValueError("no windows to derive size thresholds from")
    _, median, q3 = quartiles([float(v) for v in distinct_file_counts])
    if replication_mode:
        median = REPLICATION_MEDIAN_DF
    return SizeThresholds(median_df=median, q3_df=q3)


def bucket_for(distinct_files: int, thresholds: SizeThresholds) -> str:
    if distinct_files <= 3:
        return BUCKET_NONE
    if distinct_files < thresholds.median_df:
        return BUCKET_SMALL
    if distinct_files < thresholds.q3_df:
        return BUCKET_MEDIUM
    return BUCKET_LARGE


def bucket_windows(
    window_rows: list[WindowRow], replication_mode: bool = False
) -> tuple[SizeThresholds, dict[tuple[str, int], str]]:
    """Assign each qualified window a size bucket from the dataset-wide D_F
    distribution. Windows with the bare minimum D_F = 3 stay unbucketed."""
    qualified = [row for row in window_rows if row.qualified]
    if not qualified:
        raise ValueError("no qualified windows to bucket")
    thresholds = size_thresholds(
        [row.distinct_files for row in qualified], replication_mode
    )
    assignment = {
        (row.project_id, row.release_ordinal): bucket_for(
            row.distinct_files, thresholds
        )
        for row in qualified
    }
    return thresholds, assignment


def rank_beliefs_by_size(
    populations: list[BeliefPopulation],
    bucket_by_window: dict[tuple[str, int], str],
    seed: int = 0,
    iterations: int = 512,
    a12_threshold: float = 0.56,
) -> list[RankedGroup]:
    """Scott-Knott over up to 30 (size bucket x belief) treatments, labels
    like S_B5. Unbucketed windows and empty combinations are dropped."""
    pooled: dict[str, list[float]] = defaultdict(list)
    for population in populations:
        for score in population.scores:
            key = (population.project_id, score.release_ordinal)
            bucket = bucket_by_window.get(key)
            prefix = _BUCKET_PREFIX.get(bucket or "")
            if prefix is None:
                continue
            pooled[f"{prefix}_{population.belief_id}"].append(abs(score.rho))
    treatments: list[Treatment] = []
    for belief in BELIEF_IDS:
        for bucket in (BUCKET_SMALL, BUCKET_MEDIUM, BUCKET_LARGE):
            label = f"{_BUCKET_PREFIX[bucket]}_{belief}"
            values = pooled.get(label)
            if not values:
                logger.warning("treatment %s has no scores; not ranked", label)
                continue
            treatments.append(Treatment(label, values))
    if not treatments:
        return []
    return scott_knott(treatments, seed=seed, iterations=iterations, a12_threshold=a12_threshold)


def growth_decay(
    population: BeliefPopulation,
    release_times: dict[int, int],
    threshold: float = DEFAULT_TREND_THRESHOLD,
    min_scores: int = DEFAULT_MIN_OBSERVATIONS,
) -> TrendResult:
    """Correlate a belief's |rho| scores against their release dates.

    Growth when rho_time >= threshold, decay when <= -threshold; a
    population under min_scores is neither, with no correlation reported.
    No significance filter is applied to rho_time itself; its p-value is
    carried for the report.
    """
    dated = [
        (release_times[s.release_ordinal], abs(s.rho))
        for s in population.scores
        if s.release_ordinal in release_times
    ]
    if len(dated) < min_scores:
        return TrendResult(
            population.belief_id, population.project_id, "neither", None, None
        )
    dated.sort()
    score = spearman([d[0] for d in dated], [d[1] for d in dated], exact_p=True)
    if score.rho >= threshold:
        trend = "growth"
    elif score.rho <= -threshold:
        trend = "decay"
    else:
        trend = "neither"
    return TrendResult(
        population.belief_id, population.project_id, trend, score.rho, score.p_value
    )


_POPULATION_COLUMNS = ("project", "belief", "release_ordinal", "rho", "p", "n")
_WINDOW_COLUMNS = (
    "project",
    "release_ordinal",
    "release_time",
    "distinct_files",
    "right_censored",
    "qualified",
)
_EXCLUSION_COLUMNS = ("project", "belief", "reason", "count")
_SUMMARY_COLUMNS = (
    "project",
    "commits",
    "bug_fix_fraction",
    "releases",
    "developers",
    "active_years",
)


def _open_csv_writer(path: Path, columns: tuple[str, ...]):
    fh = open(path, "w", encoding="utf-8", newline="")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    return fh, writer


def write_populations_csv(populations: list[BeliefPopulation], path: Path) -> None:
    ordered = sorted(
        populations, key=lambda p: (p.project_id, BELIEF_IDS.index(p.belief_id))
    )
    fh, writer = _open_csv_writer(path, _POPULATION_COLUMNS)
    with fh:
        for population in ordered:
            for score in sorted(population.scores, key=lambda s: s.release_ordinal or 0):
                writer.writerow(
                    [
                        population.project_id,
                        population.belief_id,
                        score.release_ordinal,
                        repr(score.rho),
                        repr(score.p_value),
                        score.n,
                    ]
                )


def read_populations_csv(
    path: Path, releases_total: dict[str, int]
) -> list[BeliefPopulation]:
    """Rebuild populations from populations.csv; exclusion counts are not
    round-tripped (they live in exclusions.csv)."""
    grouped: dict[tuple[str, str], list[SupportScore]] = defaultdict(list)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            grouped[(row["project"], row["belief"])].append(
                SupportScore(
                    rho=float(row["rho"]),
                    p_value=float(row["p"]),
                    n=int(row["n"]),
                    belief_id=row["belief"],
                    release_ordinal=int(row["release_ordinal"]),
                )
            )
    populations = []
    for (project_id, belief_id), scores in sorted(grouped.items()):
        populations.append(
            BeliefPopulation(
                belief_id=belief_id,
                project_id=project_id,
                scores=sorted(scores, key=lambda s: s.release_ordinal or 0),
                releases_total=releases_total.get(project_id, 0),
            )
        )
    return populations


def write_windows_csv(window_rows: list[WindowRow], path: Path) -> None:
    fh, writer = _open_csv_writer(path, _WINDOW_COLUMNS)
    with fh:
        for row in sorted(window_rows, key=lambda r: (r.project_id, r.release_ordinal)):
            writer.writerow(
                [
                    row.project_id,
                    row.release_ordinal,
                    row.release_time,
                    row.distinct_files,
                    int(row.right_censored),
                    int(row.qualified),
                ]
            )


def read_windows_csv(path: Path) -> list[WindowRow]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append(
                WindowRow(
                    project_id=row["project"],
                    release_ordinal=int(row["release_ordinal"]),
                    release_time=int(row["release_time"]),
                    distinct_files=int(row["distinct_files"]),
                    right_censored=bool(int(row["right_censored"])),
                    qualified=bool(int(row["qualified"])),
                )
            )
    return rows


def write_exclusions_csv(populations: list[BeliefPopulation], path: Path) -> None:
    ordered = sorted(
        populations, key=lambda p: (p.project_id, BELIEF_IDS.index(p.belief_id))
    )
    fh, writer = _open_csv_writer(path, _EXCLUSION_COLUMNS)
    with fh:
        for population in ordered:
            for reason in (EXCLUDE_TOO_FEW, EXCLUDE_NOT_SIGNIFICANT):
                writer.writerow(
                    [
                        population.project_id,
                        population.belief_id,
                        reason,
                        population.exclusions.get(reason, 0),
                    ]
                )


def write_summary_csv(rows: list[SummaryRow], path: Path) -> None:
    fh, writer = _open_csv_writer(path, _SUMMARY_COLUMNS)
    with fh:
        for row in sorted(rows, key=lambda r: r.project_id):
            writer.writerow(
                [
                    row.project_id,
                    row.commits,
                    repr(row.bug_fix_fraction),
                    row.releases,
                    row.developers,
                    repr(row.active_years),
                ]
            )


def read_summary_csv(path: Path) -> list[SummaryRow]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append(
                SummaryRow(
                    project_id=row["project"],
                    commits=int(row["commits"]),
                    bug_fix_fraction=float(row["bug_fix_fraction"]),
                    releases=int(row["releases"]),
                    developers=int(row["developers"]),
                    active_years=float(row["active_years"]),
                )
            )
    return rows
