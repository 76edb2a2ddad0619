"""Shared fixtures.

The correlation cache is session-scoped on purpose: the acceptance suite and
the estimator unit tests ask for overlapping (substitution, K, L) tables, and
sharing one cache directory means each table is counted once per run.
"""

import pytest


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("corr-cache")
