"""Command-line entry point: mine -> assess -> report, plus synth.

Exit codes: 0 success, 1 usage or data error, 2 sanity-check rejection.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .analysis import (
    SummaryRow,
    assess_project,
    write_exclusions_csv,
    write_populations_csv,
    write_summary_csv,
    write_windows_csv,
)
from .config import Config, ConfigError, load_config
from .ingest import (
    CacheError,
    ChangeRecord,
    Release,
    RepositoryError,
    apply_sanity_checks,
    extract_releases,
    mine_repository,
    read_history,
    read_releases,
    summarize,
    write_history,
    write_releases,
)
from .labeling import KeywordSet, load_keyword_file
from .reporting import build_report, write_report
from .synthgen import ScenarioError, generate, parse_scenario_file

logger = logging.getLogger(__name__)

_SECONDS_PER_YEAR = 365.25 * 86400


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this tool reserves 2 for
    sanity rejections, so usage errors are remapped to 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="beliefminer",
        description=(
            "Mine a git repository and quantify per-release support for ten"
            " defect-prediction beliefs."
        ),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="flat key = value config file")
    common.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    common.add_argument(
        "--replication-mode",
        action="store_true",
        help="pin the size-bucket median cut to the published value (18)",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    mine = subparsers.add_parser(
        "mine", parents=[common], help="extract history and release caches from a repo"
    )
    mine.add_argument("repo", help="path to a local git repository")
    mine.add_argument("--out", required=True, metavar="DIR", help="cache output directory")
    mine.add_argument(
        "--force",
        action="store_true",
        help="write caches even when the history-size sanity checks fail",
    )
    mine.add_argument(
        "--all-commits",
        action="store_true",
        help="walk every commit instead of the first-parent chain",
    )
    mine.add_argument(
        "--follow-renames",
        action="store_true",
        help="collapse rename notation onto the post-rename path",
    )
    mine.add_argument(
        "--extend",
        action="store_true",
        help="append the configured keyword file to the default stems"
        " instead of replacing them",
    )
    mine.set_defaults(func=cmd_mine)

    assess = subparsers.add_parser(
        "assess", parents=[common], help="build belief populations from caches"
    )
    assess.add_argument(
        "caches",
        help="cache directory (one project, or one subdirectory per project)",
    )
    assess.add_argument("--out", required=True, metavar="DIR", help="assessment output directory")
    assess.set_defaults(func=cmd_assess)

    report = subparsers.add_parser(
        "report", parents=[common], help="render the report from an assessment"
    )
    report.add_argument("assessment", help="assessment directory (output of assess)")
    report.add_argument("--out", required=True, metavar="DIR", help="report output directory")
    report.set_defaults(func=cmd_report)

    synth = subparsers.add_parser(
        "synth", parents=[common], help="generate synthetic caches from a scenario file"
    )
    synth.add_argument("scenario", help="flat key = value scenario file")
    synth.add_argument("--out", required=True, metavar="DIR", help="cache output directory")
    synth.set_defaults(func=cmd_synth)
    return parser


def _resolve_config(args: argparse.Namespace) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    overrides: dict[str, object] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.replication_mode:
        overrides["replication_mode"] = True
    if getattr(args, "extend", False):
        overrides["extend_keywords"] = True
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    cfg.validate()
    return cfg


def _resolve_keywords(cfg: Config) -> KeywordSet | None:
    if cfg.keyword_file is None:
        return None
    try:
        return load_keyword_file(cfg.keyword_file, extend=cfg.extend_keywords)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"keyword_file: {exc}") from exc


def cmd_mine(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    keywords = _resolve_keywords(cfg)
    result = mine_repository(
        args.repo,
        first_parent=not args.all_commits,
        follow_renames=args.follow_renames,
        keywords=keywords,
    )
    releases = extract_releases(args.repo)
    summary = summarize(result, releases)
    print(
        f"mined {summary.commits} commits ({len(result.records)} file records), "
        f"{summary.releases} releases, {summary.developers} developers"
    )
    violations = apply_sanity_checks(summary)
    if violations:
        print("sanity checks FAILED:")
        for violation in violations:
            print(f"  - {violation}")
        if not args.force:
            print("refusing to write caches; pass --force to override")
            return 2
        print("proceeding anyway (--force)")
    else:
        print("sanity checks passed")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_history(result.records, out_dir / "history.jsonl")
    write_releases(releases, out_dir / "releases.jsonl")
    payload = dataclasses.asdict(summary)
    with open(out_dir / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"caches written to {out_dir}")
    return 0


def _derive_summary(
    project_id: str, records: list[ChangeRecord], releases: list[Release]
) -> SummaryRow:
    """Fallback totals recomputed from cache contents when the mining-time
    summary.json is absent (e.g. synthetic caches). Commits that touched no
    files are invisible here, so mining-time numbers are preferred."""
    commits = {r.commit_id for r in records}
    fix_commits = {r.commit_id for r in records if r.is_bug_fix}
    if records:
        first = min(r.commit_time for r in records)
        last = max(r.commit_time for r in records)
        years = (last - first) / _SECONDS_PER_YEAR
    else:
        years = 0.0
    return SummaryRow(
        project_id=project_id,
        commits=len(commits),
        bug_fix_fraction=len(fix_commits) / len(commits) if commits else 0.0,
        releases=len(releases),
        developers=len({r.author for r in records}),
        active_years=years,
    )


def _summary_from_json(project_id: str, path: Path, releases: int) -> SummaryRow:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return SummaryRow(
        project_id=project_id,
        commits=int(payload["commits"]),
        bug_fix_fraction=float(payload["bug_fix_fraction"]),
        releases=int(payload.get("releases", releases)),
        developers=int(payload["developers"]),
        active_years=float(payload["active_years"]),
    )


def _discover_projects(cache_root: Path) -> list[tuple[str, Path]]:
    if (cache_root / "history.jsonl").exists():
        return [(cache_root.name or "project", cache_root)]
    projects = [
        (child.name, child)
        for child in sorted(cache_root.iterdir())
        if child.is_dir() and (child / "history.jsonl").exists()
    ]
    return projects


def cmd_assess(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    cache_root = Path(args.caches)
    if not cache_root.is_dir():
        print(f"error: cache directory not found: {cache_root}", file=sys.stderr)
        return 1
    projects = _discover_projects(cache_root)
    if not projects:
        print(f"error: no history.jsonl found under {cache_root}", file=sys.stderr)
        return 1
    all_populations = []
    all_window_rows = []
    summary_rows = []
    for project_id, project_dir in projects:
        records = read_history(project_dir / "history.jsonl")
        releases_path = project_dir / "releases.jsonl"
        if not releases_path.exists():
            print(f"error: missing releases cache: {releases_path}", file=sys.stderr)
            return 1
        releases = read_releases(releases_path)
        assessment = assess_project(project_id, records, releases, cfg)
        qualified = sum(1 for row in assessment.window_rows if row.qualified)
        if qualified == 0:
            print(f"{project_id}: no qualified windows (nothing to correlate)")
        significant = sum(
            len(p.scores) for p in assessment.populations.values()
        )
        print(
            f"{project_id}: {len(assessment.window_rows)} windows, "
            f"{qualified} qualified, {significant} significant scores"
        )
        all_populations.extend(
            assessment.populations[belief] for belief in sorted(assessment.populations)
        )
        all_window_rows.extend(assessment.window_rows)
        summary_json = project_dir / "summary.json"
        if summary_json.exists():
            summary_rows.append(
                _summary_from_json(project_id, summary_json, len(releases))
            )
        else:
            summary_rows.append(_derive_summary(project_id, records, releases))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_populations_csv(all_populations, out_dir / "populations.csv")
    write_windows_csv(all_window_rows, out_dir / "windows.csv")
    write_exclusions_csv(all_populations, out_dir / "exclusions.csv")
    write_summary_csv(summary_rows, out_dir / "summary.csv")
    print(f"assessment written to {out_dir}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    report, populations_csv = build_report(args.assessment, cfg)
    write_report(report, args.out, populations_csv)
    print(f"report written to {args.out}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    _resolve_config(args)  # validates --config/--seed combinations early
    spec = parse_scenario_file(args.scenario)
    records, releases = generate(spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_history(records, out_dir / "history.jsonl")
    write_releases(releases, out_dir / "releases.jsonl")
    print(
        f"synthetic caches written to {out_dir} "
        f"({len(records)} records, {len(releases)} releases)"
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    if not logging.getLogger().handlers:
        logging.basicConfig(
            stream=sys.stderr,
            level=logging.INFO,
            format="%(levelname)s %(name)s: %(message)s",
        )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 1
    try:
        return args.func(args)
    except (ConfigError, ScenarioError, CacheError, RepositoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
