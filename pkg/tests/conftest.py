from pathlib import Path

import pytest

from pedloops import parse_pedigree

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def load():
    """Parse tests/data/<name>.csv into a Pedigree."""

    def _load(name: str):
        return parse_pedigree((DATA_DIR / f"{name}.csv").read_text(encoding="utf-8"))

    return _load


@pytest.fixture
def read_text():
    def _read(name: str) -> str:
        return (DATA_DIR / f"{name}.csv").read_text(encoding="utf-8")

    return _read
