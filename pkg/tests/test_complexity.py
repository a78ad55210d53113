import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fam, power
from korobov_ibc.complexity import (
    HeapBudgetExceeded,
    info_complexity,
    minimal_error,
    n_for_threshold,
    prefix_sum,
    threshold,
)
from korobov_ibc.oracle import random_family
from korobov_ibc.params import ParameterError
from korobov_ibc.special import BoundedValue
from korobov_ibc.spectrum import trace

TR = math.pi ** 2 / 3


@pytest.mark.parametrize("path", ["heap", "level", "auto"])
def test_abs_example(unit, path):
    r = info_complexity(unit, 1, 0.95, "ABS", path=path)
    assert r.n == 4 and r.certified
    assert r.tail_at_n.contains(TR - 2.5)


@pytest.mark.parametrize("path", ["heap", "level"])
def test_nor_example(unit, path):
    r = info_complexity(unit, 1, 0.5, "NOR", path=path)
    assert r.n == 4 and r.certified
    assert r.threshold.contains(0.25 * TR)


def test_minimal_error_examples(unit):
    assert abs(minimal_error(unit, 1, 0).value - math.sqrt(TR)) < 1e-12
    assert abs(minimal_error(unit, 1, 2).value - math.sqrt(TR - 2)) < 1e-12
    errs = [minimal_error(unit, 1, n).value for n in range(0, 60, 3)]
    assert errs == sorted(errs, reverse=True)


def test_nor_n_is_one_when_top_eigenvalue_dominates():
    f = fam(5.0, 1.0, 2.0)
    lam1, T = 5.0, trace(f, 1).value
    eps = math.sqrt(1 - lam1 / T) + 1e-6
    assert info_complexity(f, 1, eps, "NOR").n == 1


def test_abs_can_be_zero():
    f = fam(0.0, 0.01, 4.0)
    assert info_complexity(f, 1, 0.9, "ABS").n == 0


def test_eps_domain():
    for e in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ParameterError):
            info_complexity(fam(), 1, e, "NOR")
    with pytest.raises(ParameterError):
        info_complexity(fam(), 1, 0.5, "MAX")


def test_invalid_family_rejected():
    with pytest.raises(ParameterError):
        info_complexity(fam(0.0, 2.0, 2.0), 1, 0.5, "ABS")


def test_heap_budget():
    f = fam(0.0, power(1, 0.5), 2.0)
    with pytest.raises(HeapBudgetExceeded):
        info_complexity(f, 10 ** 5, 0.3, "NOR", path="heap", heap_budget=1000)
    r = info_complexity(f, 10 ** 5, 0.3, "NOR", path="auto", heap_budget=1000)
    assert r.path == "level" and r.certified


def test_ambiguous_threshold_flagged(unit):
    # threshold exactly at a tail value, with a bracket wider than rounding
    T = trace(unit, 1)
    tail4 = T - BoundedValue(2.5)
    theta = BoundedValue(tail4.value, 1e-9)
    r = n_for_threshold(unit, 1, theta)
    assert not r.certified
    assert (r.n_lo, r.n_hi) == (4, 5)


def test_prefix_sum_paths_agree():
    f = fam(0.3, power(1, 0.7), 2.2)
    a = prefix_sum(f, 200, 3000)
    b = prefix_sum(f, 200, 3000, heap_budget=10)
    assert abs(a.value - b.value) <= a.abs_error + b.abs_error


def test_record_fields(unit):
    rec = info_complexity(unit, 1, 0.5, "NOR").to_record()
    assert set(rec) >= {"d", "eps", "criterion", "n", "certified", "n_lo", "n_hi"}


@pytest.mark.parametrize("seed", range(25))
def test_paths_equivalent(seed):
    rng = np.random.default_rng(seed)
    f = random_family(rng)
    d = int(rng.integers(1, 60))
    eps = float(rng.uniform(0.05, 0.95))
    for crit in ("ABS", "NOR"):
        b = info_complexity(f, d, eps, crit, path="level")
        if b.n > 200_000:
            continue  # keep the sequential path cheap
        a = info_complexity(f, d, eps, crit, path="heap")
        assert (a.n, a.n_lo, a.n_hi) == (b.n, b.n_lo, b.n_hi)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.05, 0.9), st.floats(0.01, 0.09))
def test_monotone_in_eps(seed, e1, gap):
    f = random_family(np.random.default_rng(seed))
    d = 1 + seed % 20
    for crit in ("ABS", "NOR"):
        n1 = info_complexity(f, d, e1, crit, path="level").n
        n2 = info_complexity(f, d, e1 + gap, crit, path="level").n
        assert n1 >= n2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(0.05, 0.95))
def test_abs_monotone_in_d(seed, eps):
    f = random_family(np.random.default_rng(seed))
    ns = [info_complexity(f, d, eps, "ABS", path="level").n for d in (1, 2, 5, 13, 40)]
    assert ns == sorted(ns)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9]))
def test_sandwich(seed, eps):
    rng = np.random.default_rng(seed)
    f = random_family(rng, with_alpha=True)
    d = int(rng.integers(1, 30))
    a = info_complexity(f, d, eps, "ABS", path="level")
    b = info_complexity(f.with_zero_alpha(), d, eps, "ABS", path="level")
    if a.certified and b.certified:
        assert b.n <= a.n <= b.n + 1
    else:
        assert a.n_hi >= b.n_lo and a.n_lo <= b.n_hi + 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([0.1, 0.3, 0.5, 0.7, 0.9]))
def test_nor_abs_scaling(seed, eps):
    rng = np.random.default_rng(seed)
    f = random_family(rng)
    d = int(rng.integers(1, 30))
    nor = info_complexity(f, d, eps, "NOR", path="level")
    theta = BoundedValue(2 * f.beta(1) * eps * eps)
    ab = n_for_threshold(f, d, theta, path="level")
    assert nor.n_lo <= ab.n_hi
    if nor.certified and ab.certified:
        assert nor.n <= ab.n


def test_threshold_bracket(unit):
    th = threshold(unit, 1, 0.5, "NOR")
    assert th.contains(0.25 * TR)
    assert threshold(unit, 1, 0.5, "ABS").contains(0.25)
