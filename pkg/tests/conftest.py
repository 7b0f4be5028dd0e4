import functools

import numpy as np
import pytest

from fusionq.scalars import QContext
from fusionq.wenzl import LevelSet

ACCEPTANCE_CONFIGS = [(2, 3), (2, 4), (2, 5), (3, 4), (3, 5)]
FULL_GROUPOID_CONFIGS = [(2, 3), (2, 4), (2, 5), (3, 4)]


@functools.lru_cache(maxsize=None)
def get_ctx(N, ell, dense_cap=6):
    return QContext(N, ell, dense_cap=dense_cap)


@functools.lru_cache(maxsize=None)
def get_levels(N, ell, n_max):
    # one shared tower per (N, ell); extended on demand, never rebuilt
    key_ctx = get_ctx(N, ell)
    return LevelSet.build(key_ctx, n_max)


def levels_for(N, ell, n_max):
    ls = get_levels(N, ell, 0)
    ls.ensure(n_max)
    return ls


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
