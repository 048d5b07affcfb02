"""Shared hypothesis strategies and random generators for the test suite."""
import numpy as np
from hypothesis import strategies as st

from paschke import cp_map as cm
from paschke.vn_algebra import FdVnAlgebra, linalg

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
small_blocks = st.lists(st.integers(min_value=1, max_value=3), min_size=1, max_size=3)


def algebras(max_dim=9):
    return small_blocks.filter(lambda b: sum(n * n for n in b) <= max_dim).map(FdVnAlgebra)


def factors(max_n=3):
    return st.integers(min_value=1, max_value=max_n).map(lambda n: FdVnAlgebra((n,)))


def random_map(rng, a, b, max_rank=2, drop=0.0):
    """Random CP map from Kraus operators; each block pair is dropped with probability ``drop``."""
    kraus = {}
    for i, n in enumerate(a.blocks):
        for j, m in enumerate(b.blocks):
            if rng.random() < drop:
                continue
            r = int(rng.integers(1, max_rank + 1))
            kraus[(i, j)] = [linalg.random_complex((n, m), rng) for _ in range(r)]
    if not kraus:
        kraus[(0, 0)] = [linalg.random_complex((a.blocks[0], b.blocks[0]), rng)]
    return cm.from_kraus(a, b, kraus)


def random_density(rng, n, rank=None):
    rank = n if rank is None else rank
    g = linalg.random_complex((n, rank), rng)
    d = g @ g.conj().T
    return d / np.trace(d).real
