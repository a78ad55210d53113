import numpy as np
import pytest

from korobov_ibc.params import family_from_dict


def fam(alpha=0.0, beta=1.0, sigma=2.0):
    """Family from shorthand: numbers are constant rules, dicts are passed through."""
    def rule(x):
        return x if isinstance(x, dict) else {"kind": "const", "value": x}
    return family_from_dict({"alpha": rule(alpha), "beta": rule(beta), "sigma": rule(sigma)})


def power(c, s, shift=None):
    r = {"kind": "power", "c": c, "s": s}
    if shift is not None:
        r["shift"] = shift
    return r


@pytest.fixture
def unit():
    return fam()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
