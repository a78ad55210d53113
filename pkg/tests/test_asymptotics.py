import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fam, power
from korobov_ibc.asymptotics import (
    COMPARE_COLUMNS,
    DomainError,
    KZRegime,
    NotApplicable,
    classify,
    compare,
    predicted_n,
    q_factor,
)
from korobov_ibc.params import ParameterError

GROWING = power(1, -1, 1)  # sigma_j = 1 + j


def test_classify_case_two():
    r = classify(fam(0.0, power(1, 0.5), GROWING))
    assert r == KZRegime(c=1.0, s=0.5, r=0.0, eps0=1.0, case_id=2)


def test_classify_case_one():
    assert classify(fam(0.0, power(1, 2), GROWING)).case_id == 1
    r = classify(fam(1.0, power(1, 0.5), GROWING))
    assert r.case_id == 1 and math.isinf(r.r) and r.eps0 is None


def test_classify_case_three_with_ratio():
    r = classify(fam(power(2, 1), power(1, 1), GROWING))
    assert r.case_id == 3 and r.r == 2.0
    assert r.eps0 == pytest.approx(2 ** -0.5)


def test_classify_not_applicable():
    r = classify(fam(0.0, power(1, 0.5), 2.0))
    assert isinstance(r, NotApplicable) and "sigma" in r.failed_condition
    r = classify(fam(0.0, {"kind": "exp", "c": 1, "rho": 0.5}, GROWING))
    assert isinstance(r, NotApplicable)
    r = classify(fam(0.0, {"kind": "table", "values": [1.0, 0.5]}, GROWING))
    assert isinstance(r, NotApplicable)


def test_predicted_case_two():
    reg = KZRegime(1.0, 0.5, 0.0, 1.0, 2)
    assert predicted_n(reg, 10 ** 4, 0.6).n == pytest.approx(8192.0, rel=1e-14)
    assert predicted_n(reg, 10 ** 4, 1 - 1e-12).n < 1e-15


def test_predicted_case_three():
    reg = KZRegime(1.0, 1.0, 0.0, 1.0, 3)
    p = predicted_n(reg, math.exp(10), 2 ** -0.5)
    assert p.log_n == pytest.approx(5.0, rel=1e-14)


def test_predicted_case_one_and_domain():
    assert predicted_n(KZRegime(1.0, 2.0, 0.0, 1.0, 1), 100, 0.99).bounded
    with pytest.raises(DomainError):
        predicted_n(KZRegime(1.0, 0.5, 2.0, 0.5 ** 0.5, 2), 100, 0.8)
    with pytest.raises(DomainError):
        predicted_n(KZRegime(1.0, 0.5, 0.0, 1.0, 2), 100, 1.0)


@given(st.floats(0.0, 0.9), st.floats(0.0, 10.0), st.floats(0.001, 0.998), st.floats(0.001, 0.998))
def test_q_decreasing(s, r, a, b):
    eps0 = (1 + r / 2) ** -0.5
    e1, e2 = sorted((a * eps0, b * eps0))
    if e1 < e2:
        assert q_factor(e1, eps0, s) >= q_factor(e2, eps0, s)
    assert 0 <= q_factor(e1, eps0, s) <= 1


def test_q_limit_at_zero():
    assert q_factor(1e-9, 1.0, 0.3) == pytest.approx(1.0)


def test_compare_case_two_drift_shrinks():
    rows = compare(fam(0.0, power(1, 0.5), GROWING), [100, 1000], 0.6)
    assert [r["d"] for r in rows] == [100, 1000]
    assert set(COMPARE_COLUMNS) <= set(rows[0])
    assert abs(rows[1]["ratio"] - 1) < abs(rows[0]["ratio"] - 1)


def test_compare_case_one_stabilises():
    rows = compare(fam(0.0, power(1, 2), GROWING), [100, 1000, 10000], 0.5)
    assert len({r["n_computed"] for r in rows}) == 1
    assert all(math.isnan(r["ratio"]) for r in rows)


def test_compare_near_eps0_well_formed():
    rows = compare(fam(0.0, power(1, 0.5), GROWING), [100], 0.999)
    assert rows[0]["n_predicted"] < 1 and rows[0]["n_computed"] >= 1


def test_compare_not_applicable():
    with pytest.raises(ParameterError):
        compare(fam(), [10], 0.5)
