import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fam, power
from korobov_ibc.params import (
    ConstRule,
    ExpRule,
    ParameterError,
    PowerRule,
    RuleEvaluationError,
    TableRule,
    alpha_sum_constant,
    check_ratio_monotone,
    family_from_dict,
    ratio_r,
    rule_from_dict,
    validate,
)


def table(*v):
    return {"kind": "table", "values": list(v)}


def test_power_family_passes():
    assert validate(fam(0.0, power(1, 2), 2.0), 10).ok


def test_beta_increase_detected():
    rep = validate(fam(0.0, table(1.0, 0.5, 0.7), table(2, 2, 2)), 3)
    assert not rep.ok
    assert rep.status == "violation"
    assert rep.j == 3 and rep.clause == "beta_nonincreasing"


def test_sigma_one_excluded():
    rep = validate(fam(0.0, table(1.0, 0.5), table(1.0, 2.0)), 2)
    assert not rep.ok and rep.j == 1 and rep.clause == "sigma_gt_one"


@pytest.mark.parametrize("family,clause", [
    (fam(-0.1, 1.0, 2.0), "alpha_nonnegative"),
    (fam(0.0, 1.5, 2.0), "beta_range"),
    (fam(0.0, table(1.0, 0.0), 2.0), "beta_range"),
    (fam(0.0, 1.0, table(3.0, 2.0)), "sigma_nondecreasing"),
])
def test_each_clause_reported(family, clause):
    rep = validate(family, 2)
    assert not rep.ok and rep.clause == clause
    with pytest.raises(ParameterError):
        rep.raise_if_failed()


def test_table_too_short():
    f = fam(0.0, table(1.0, 0.5), 2.0)
    assert f.d_max == 2
    with pytest.raises(RuleEvaluationError):
        f.check_d(3)


def test_large_d_closed_form_is_fast():
    assert validate(fam(1.0, power(1, 0.5), power(1, -1, 1)), 10 ** 8).ok


def test_ratio_examples():
    f = fam(1.0, power(1, 0.5), 2.0)
    assert ratio_r(f, 4) == pytest.approx(2.0)
    assert ratio_r(fam(0.0, power(1, 0.5), 2.0), 7) == 0.0
    g = fam(power(3, 1.0), power(1, 1.0), 2.0)
    for j in (1, 5, 1000):
        assert ratio_r(g, j) == pytest.approx(3.0)


def test_ratio_monotone_and_sum_constant():
    f = fam(1.0, power(1, 0.5), 2.0)
    assert check_ratio_monotone(f, 1000).ok
    assert alpha_sum_constant(f, [10, 100, 1000]) == pytest.approx(1.0)
    g = fam(power(1, 1.0), 1.0, 2.0)
    assert check_ratio_monotone(g, 10).clause == "ratio_nondecreasing"
    assert check_ratio_monotone(fam(0.0, 1.0, 2.0), 10).clause == "ratio_positive"


def test_loader_rejects_unknown_and_missing():
    with pytest.raises(ParameterError):
        rule_from_dict({"kind": "power", "c": 1})
    with pytest.raises(ParameterError):
        rule_from_dict({"kind": "power", "c": 1, "s": 1, "oops": 2})
    with pytest.raises(ParameterError):
        rule_from_dict({"kind": "cubic"})
    with pytest.raises(ParameterError):
        family_from_dict({"alpha": {"kind": "const", "value": 0},
                          "beta": {"kind": "const", "value": 1}})
    with pytest.raises(ParameterError):
        rule_from_dict({"kind": "const", "value": float("nan")})


def test_roundtrip_dict():
    spec = {"alpha": {"kind": "exp", "c": 0.5, "rho": 0.9},
            "beta": {"kind": "power", "c": 1.0, "s": 2.0, "shift": 0.0},
            "sigma": {"kind": "table", "values": [2.0, 3.0]}}
    f = family_from_dict(spec)
    assert family_from_dict(json.loads(json.dumps(f.to_dict()))) == f


def test_rule_values():
    assert PowerRule(1.0, -1.0, 1.0)(5) == 6.0
    np.testing.assert_allclose(ExpRule(2.0, 0.5).values(1, 4), [1.0, 0.5, 0.25])
    assert ConstRule(0.3).values(3, 6).tolist() == [0.3] * 3
    assert TableRule((1.0, 0.5)).values(2, 3).tolist() == [0.5]


def test_alpha_sum():
    assert fam(0.5, 1.0, 2.0).alpha_sum(1000) == 500.0
    f = fam(power(1, 1), 1.0, 2.0)
    assert f.alpha_sum(100) == pytest.approx(math.fsum(1 / j for j in range(1, 101)), rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.0, 4.0), st.integers(1, 10 ** 6))
def test_scalar_and_vector_rule_agree(c, s, j):
    r = PowerRule(c, s)
    assert r(j) == r.values(j, j + 1)[0]
    assert r(j) == r.values(1, j + 1)[-1]
