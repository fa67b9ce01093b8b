"""Shared test helpers: random path-sum generation and matrix comparison."""

import random

import numpy as np
import pytest

from pathsum.algebra import BoolPoly, Dyadic, PhasePoly, xvar, yvar
from pathsum.sums import PathSum

TOL = 1e-9


def assert_close(a, b, tol=TOL):
    a, b = np.asarray(a), np.asarray(b)
    assert a.shape == b.shape, f"shapes {a.shape} vs {b.shape}"
    delta = np.abs(a - b).max()
    assert delta < tol, f"max |delta| = {delta}"


def random_sum(rng: random.Random, max_qubits=4, max_paths=4, max_terms=8) -> PathSum:
    """A random path sum with dyadic phases and affine-ish outputs.

    Biased toward rule-triggerable shapes: plenty of 1/2 and 1/4
    coefficients, path variables appearing linearly, and bare outputs.
    """
    m = rng.randint(1, max_qubits)
    k = rng.randint(0, max_paths)
    n = rng.randint(1, max_qubits)
    paths = tuple(yvar(j) for j in range(k))
    pool = [xvar(i) for i in range(m)] + list(paths)
    terms = []
    for _ in range(rng.randint(0, max_terms)):
        deg = rng.choice((1, 1, 2, 2, 2, 3))
        mono = frozenset(rng.sample(pool, min(deg, len(pool))))
        den = rng.choice((1, 1, 1, 2, 2, 3))
        num = rng.randrange(1, 1 << den, 2)
        terms.append((Dyadic(num, den), mono))
    if rng.random() < 0.3:
        terms.append((Dyadic(rng.randrange(1, 8, 2), 3), ()))
    outs = []
    for _ in range(n):
        monos = []
        for _ in range(rng.randint(0, 2)):
            deg = rng.choice((1, 1, 1, 2))
            monos.append(frozenset(rng.sample(pool, min(deg, len(pool)))))
        if rng.random() < 0.2:
            monos.append(frozenset())
        outs.append(BoolPoly.of(monos))
    return PathSum(m, tuple(outs), paths, rng.randint(-2, 4), PhasePoly.of(terms))


@pytest.fixture
def rng():
    return random.Random(20270101)
