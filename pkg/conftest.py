"""Pytest configuration ensuring the project root is importable.

The repository relies on implicit imports such as ``import expr`` or
``import pipelines``.  When pytest collects tests from a temporary working
directory the repository root is not guaranteed to appear on ``sys.path``.
Adding this ``conftest`` module forces the project root onto the import path so
tests can import the in-repo packages without additional configuration.

Long acceptance runs are marked ``slow`` and only execute when ``SRCOMP_RUN_SLOW=1``.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from config import load_settings  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance check (set SRCOMP_RUN_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if load_settings().run_slow:
        return
    skip = pytest.mark.skip(reason="slow; set SRCOMP_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
