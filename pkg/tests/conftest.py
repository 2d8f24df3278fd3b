from __future__ import annotations

import functools

import pytest

from tqft_orbifold import catalog
from tqft_orbifold.statesum import load_triangulation


@functools.lru_cache(maxsize=None)
def cat_named(name: str):
    return catalog.builtin(name)


@functools.lru_cache(maxsize=None)
def tri_named(name: str):
    return load_triangulation(name)


@pytest.fixture
def report_line(capsys):
    """Print a line past pytest's capture so it shows in the test log."""
    def emit(text: str) -> None:
        with capsys.disabled():
            print(f"\n{text}")
    return emit
