from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixture_repo import build_fixture_repo  # noqa: E402

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture_repo(tmp_path_factory) -> Path:
    repo = tmp_path_factory.mktemp("fixture") / "repo"
    build_fixture_repo(repo)
    return repo


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR
