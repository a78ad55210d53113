"""Large-d regimes of NOR information complexity for rapidly smoothing fields.

When ``beta_j ~ c j^(-s)``, ``alpha_j / beta_j -> r`` and ``sigma_j -> inf``,
three regimes are known:

1. ``s > 1`` or ``r = inf``: ``n(eps)`` stays bounded in ``d``;
2. ``s < 1``, ``r < inf``: ``n(eps) ~ 2 Q(eps) d`` for ``eps < eps0``, with
   ``Q(eps) = (1 - (eps/eps0)^2)^(1/(1-s))``;
3. ``s = 1``, ``r < inf``: ``ln n(eps) = (1 - (eps/eps0)^2) ln d + o(ln d)``;

where ``eps0 = (1 + r/2)^(-1/2)``.  Only the closed-form rule kinds can be
classified; tabulated rules never certify a limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .complexity import NOR, info_complexity
from .params import ConstRule, ExpRule, ParameterError, ParameterFamily, PowerRule, validate

__all__ = [
    "KZRegime",
    "NotApplicable",
    "Prediction",
    "DomainError",
    "COMPARE_COLUMNS",
    "classify",
    "q_factor",
    "predicted_n",
    "compare",
]

COMPARE_COLUMNS = ("d", "n_computed", "n_predicted", "ratio")


class DomainError(ParameterError):
    """eps outside the validity window of a regime formula."""


@dataclass(frozen=True)
class KZRegime:
    c: float
    s: float
    r: float            # may be inf
    eps0: float | None  # None when r is infinite
    case_id: int

    def to_dict(self):
        return {"applicable": True, "c": self.c, "s": self.s,
                "r": "inf" if math.isinf(self.r) else self.r,
                "eps0": self.eps0, "case_id": self.case_id}


@dataclass(frozen=True)
class NotApplicable:
    failed_condition: str
    reason: str

    def to_dict(self):
        return {"applicable": False, "failed_condition": self.failed_condition,
                "reason": self.reason}


def _power_form(rule):
    """``(c, s)`` with ``rule(j) ~ c j^(-s)``, ``s >= 0``, or a failure string."""
    if isinstance(rule, ConstRule):
        return rule.value, 0.0
    if isinstance(rule, PowerRule):
        if rule.s == 0:
            return rule.c + rule.shift, 0.0
        if rule.s > 0:
            return (rule.c, rule.s) if rule.shift == 0 else (rule.shift, 0.0)
        return "beta grows with j"
    if isinstance(rule, ExpRule):
        if rule.rho == 1:
            return rule.c, 0.0
        return "beta decays geometrically, not like a power of j"
    return "tabulated beta has no certifiable asymptotics"


def _sigma_unbounded(rule):
    if isinstance(rule, PowerRule):
        return rule.s < 0 and rule.c > 0
    if isinstance(rule, ExpRule):
        return rule.rho > 1 and rule.c > 0
    return False


def _ratio_limit(alpha, c, s):
    """lim alpha_j / (c j^(-s)), or None when alpha is not classifiable."""
    if isinstance(alpha, ConstRule):
        a_c, a_u, a_rho = alpha.value, 0.0, 1.0
    elif isinstance(alpha, PowerRule):
        if alpha.s == 0:
            a_c, a_u = alpha.c + alpha.shift, 0.0
        elif alpha.s > 0 and alpha.shift != 0:
            a_c, a_u = alpha.shift, 0.0
        else:
            a_c, a_u = alpha.c, alpha.s
        a_rho = 1.0
    elif isinstance(alpha, ExpRule):
        a_c, a_u, a_rho = alpha.c, 0.0, alpha.rho
    else:
        return None
    if a_c == 0:
        return 0.0
    if a_rho != 1:
        return math.inf if a_rho > 1 else 0.0
    if a_u < s:
        return math.inf
    if a_u > s:
        return 0.0
    return a_c / c


def classify(family: ParameterFamily) -> KZRegime | NotApplicable:
    """Regime of ``family``, or NotApplicable naming the failed condition."""
    if family.d_max is not None:
        return NotApplicable("finite table", "tabulated rules cannot certify limits in j")
    form = _power_form(family.beta)
    if isinstance(form, str):
        return NotApplicable("beta_j ~ c j^(-s)", form)
    c, s = form
    if not _sigma_unbounded(family.sigma):
        return NotApplicable("sigma_j -> inf", "sigma rule is bounded")
    r = _ratio_limit(family.alpha, c, s)
    if r is None:
        return NotApplicable("alpha_j/beta_j -> r", "alpha rule has no certifiable limit")
    if math.isinf(r):
        return KZRegime(c, s, r, None, 1)
    eps0 = (1.0 + r / 2.0) ** -0.5
    case_id = 1 if s > 1 else (2 if s < 1 else 3)
    return KZRegime(c, s, r, eps0, case_id)


def q_factor(eps: float, eps0: float, s: float) -> float:
    """``Q(eps) = (1 - (eps/eps0)^2)^(1/(1-s))`` for ``s < 1``."""
    return (1.0 - (eps / eps0) ** 2) ** (1.0 / (1.0 - s))


@dataclass(frozen=True)
class Prediction:
    case_id: int
    d: int
    eps: float
    n: float | None        # predicted n (cases 2, 3)
    log_n: float | None    # predicted ln n (case 3)
    bounded: bool          # case 1: n bounded in d

    def to_dict(self):
        return {"case_id": self.case_id, "d": self.d, "eps": self.eps, "n": self.n,
                "log_n": self.log_n, "bounded": self.bounded}


def predicted_n(regime: KZRegime, d: int, eps: float) -> Prediction:
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if d < 1:
        raise DomainError(f"d must be positive, got {d}")
    if regime.case_id == 1:
        return Prediction(1, d, eps, None, None, True)
    if eps >= regime.eps0:
        raise DomainError(f"eps={eps} is outside (0, eps0={regime.eps0:.15g})")
    if regime.case_id == 2:
        return Prediction(2, d, eps, 2.0 * q_factor(eps, regime.eps0, regime.s) * d,
                          None, False)
    log_n = (1.0 - (eps / regime.eps0) ** 2) * math.log(d)
    return Prediction(3, d, eps, math.exp(log_n), log_n, False)


def compare(family: ParameterFamily, d_grid, eps: float, *, path: str = "auto",
            tol: float = 1e-15) -> list[dict]:
    """Computed versus predicted NOR complexity over ``d_grid``.

    ``ratio`` is ``n_computed / n_predicted`` in case 2 and
    ``ln n_computed / ln n_predicted`` in case 3.  Case 1 has no rate, so
    ``n_predicted`` and ``ratio`` are NaN and stabilisation shows in
    ``n_computed``.
    """
    regime = classify(family)
    if isinstance(regime, NotApplicable):
        raise ParameterError(f"regime not applicable: {regime.failed_condition} "
                             f"({regime.reason})")
    grid = [int(d) for d in d_grid]
    if grid:
        validate(family, max(grid)).raise_if_failed()
    rows = []
    for d in grid:
        pred = predicted_n(regime, d, eps)
        res = info_complexity(family, d, eps, NOR, path=path, tol=tol)
        n = res.n
        if regime.case_id == 1:
            n_pred, ratio = math.nan, math.nan
        elif regime.case_id == 2:
            n_pred = pred.n
            ratio = n / n_pred if n_pred > 0 else math.nan
        else:
            n_pred = pred.n
            ratio = math.log(n) / pred.log_n if n > 0 and pred.log_n > 0 else math.nan
        rows.append({"d": d, "n_computed": n, "n_predicted": n_pred, "ratio": ratio,
                     "certified": res.certified})
    return rows
