"""Brute-force reference spectrum for small instances.

Everything is materialised: all eigenvalues with frequency ``k <= K`` in each
of ``d <= 8`` coordinates, sorted by plain ``sorted``.  Tails are suffix sums
of that finite list plus a bracket for the omitted mass.  Nothing here calls
into :mod:`korobov_ibc.spectrum` or :mod:`korobov_ibc.complexity`; the only
shared pieces are the parameter rules and the power-tail bound for the
omitted frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .params import ConstRule, ParameterError, ParameterFamily, PowerRule
from .special import BoundedValue, tail_power_sum

__all__ = [
    "MAX_D",
    "MAX_K",
    "MaterializedSpectrum",
    "OracleResult",
    "materialize",
    "oracle_info_complexity",
    "exact_prefix_sums",
    "random_family",
]

MAX_D = 8
MAX_K = 100_000

_U = 2.0 ** -52


@dataclass(frozen=True)
class MaterializedSpectrum:
    """Descending list of ``(value, label)`` with label tuples.

    Labels are ``("constant",)`` or ``("oscillatory", j, k, "cos"|"sin")``.
    ``remainder`` brackets the total of all eigenvalues with ``k > K``.
    """

    values: np.ndarray
    labels: list
    K: int
    d: int
    remainder: BoundedValue
    max_omitted: float

    def __len__(self):
        return len(self.values)


def _order(item):
    v, lab = item
    if lab[0] == "constant":
        return (-v, 0, 0, 0, 0)
    return (-v, 1, lab[1], lab[2], 0 if lab[3] == "cos" else 1)


def _ratio(b, k, s):
    try:
        return b / k ** s
    except OverflowError:
        return 0.0


def materialize(family: ParameterFamily, d: int, K: int) -> MaterializedSpectrum:
    if not 1 <= d <= MAX_D:
        raise ParameterError(f"oracle supports 1 <= d <= {MAX_D}, got d={d}")
    if not 1 <= K <= MAX_K:
        raise ParameterError(f"oracle supports 1 <= K <= {MAX_K}, got K={K}")
    family.check_d(d)
    alphas = family.alpha.values(1, d + 1).tolist()
    betas = family.beta.values(1, d + 1).tolist()
    sigmas = family.sigma.values(1, d + 1).tolist()

    items = [(math.fsum(alphas), ("constant",))]
    for j, (b, s) in enumerate(zip(betas, sigmas), start=1):
        for k in range(1, K + 1):
            v = _ratio(b, k, s)
            items.append((v, ("oscillatory", j, k, "cos")))
            items.append((v, ("oscillatory", j, k, "sin")))
    items.sort(key=_order)

    rem_v, rem_e = 0.0, 0.0
    for b, s in zip(betas, sigmas):
        t = tail_power_sum(K, s, tol=1e-13)
        rem_v += 2 * b * t.value
        rem_e += 2 * b * t.abs_error + 4 * _U * 2 * b * t.value
    remainder = BoundedValue(rem_v, rem_e + math.ulp(rem_v))
    max_omitted = max(_ratio(b, K + 1, s) for b, s in zip(betas, sigmas))
    return MaterializedSpectrum(
        values=np.array([v for v, _ in items]),
        labels=[lab for _, lab in items],
        K=K,
        d=d,
        remainder=remainder,
        max_omitted=max_omitted,
    )


@dataclass(frozen=True)
class OracleResult:
    conclusive: bool
    n: int | None
    n_lo: int | None
    n_hi: int | None
    reason: str = ""


def _suffix_brackets(values):
    """Lower/upper brackets of sum_{i>n} values[i-1] for n = 0..len."""
    asc = values[::-1]
    cum = np.concatenate(([0.0], np.cumsum(asc)))[::-1]  # cum[n] = sum of values[n:]
    # recursive summation error plus the per-value rounding of b / k**s
    err = (len(values) + 4) * _U * cum
    return cum - err, cum + err


def oracle_info_complexity(spec: MaterializedSpectrum, eps: float, crit: str) -> OracleResult:
    """Information complexity from the finite list, certified or inconclusive.

    ``crit`` is ``"ABS"`` or ``"NOR"``.  Inconclusive whenever the omitted
    mass or rounding leaves more than one candidate ``n``, or when the answer
    would need eigenvalues beyond the materialised list.
    """
    crit = crit.upper()
    lo, hi = _suffix_brackets(spec.values)
    t_lo = lo + spec.remainder.lo
    t_hi = hi + spec.remainder.hi
    e2 = eps * eps
    if crit == "ABS":
        th_lo = th_hi = e2
    elif crit == "NOR":
        th_lo = e2 * t_lo[0] * (1 - 2 * _U)
        th_hi = e2 * t_hi[0] * (1 + 2 * _U)
    else:
        raise ParameterError(f"unknown criterion {crit!r}")
    possible = np.nonzero(t_lo <= th_hi)[0]
    certain = np.nonzero(t_hi <= th_lo)[0]
    n_lo = int(possible[0]) if len(possible) else None
    n_hi = int(certain[0]) if len(certain) else None
    if n_lo is None or n_hi is None:
        return OracleResult(False, None, n_lo, n_hi, "answer lies beyond the materialised list")
    if n_lo != n_hi:
        return OracleResult(False, None, n_lo, n_hi, "truncation remainder too large; raise K")
    if n_hi > 0 and spec.values[n_hi - 1] * (1 + 4 * _U) < spec.max_omitted:
        # omitted frequencies would outrank listed ones, so ranks are not exact
        return OracleResult(False, None, n_lo, n_hi, "ranks reach the truncation level; raise K")
    return OracleResult(True, n_hi, n_lo, n_hi)


def exact_prefix_sums(spec: MaterializedSpectrum, n: int) -> list[float]:
    """Correctly rounded prefix sums of the first ``n`` listed values."""
    acc = Fraction(0)
    out = []
    for v in spec.values[:n].tolist():
        acc += Fraction(v)
        out.append(float(acc))
    return out


def random_family(rng: np.random.Generator, *, with_alpha=None) -> ParameterFamily:
    """Random admissible family built from constant and power rules.

    ``with_alpha`` forces a nonzero (True) or zero (False) alpha; ``None``
    lets the generator choose.
    """
    if with_alpha is None:
        with_alpha = bool(rng.integers(2))
    if not with_alpha:
        alpha = ConstRule(0.0)
    elif rng.integers(2):
        alpha = ConstRule(round(float(rng.uniform(0.05, 1.5)), 3))
    else:
        alpha = PowerRule(round(float(rng.uniform(0.05, 1.5)), 3), round(float(rng.uniform(0, 2)), 2))
    c = round(float(rng.uniform(0.2, 1.0)), 3)
    beta = ConstRule(c) if rng.integers(4) == 0 else PowerRule(c, round(float(rng.uniform(0.1, 3)), 2))
    if rng.integers(2):
        sigma = ConstRule(round(float(rng.uniform(1.3, 4.0)), 2))
    else:
        sigma = PowerRule(round(float(rng.uniform(0.2, 1.0)), 2), -round(float(rng.uniform(0.2, 1.0)), 2),
                          round(float(rng.uniform(1.2, 2.5)), 2))
    return ParameterFamily(alpha, beta, sigma)
