"""Parameter sequences (alpha_j, beta_j, sigma_j) of an additive Korobov field.

A family is three *rules*, each mapping a 1-based coordinate index ``j`` to a
float.  Closed-form rules are evaluated on demand and never materialise an
array of length ``d``; tabulated rules are finite and refuse to extrapolate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .special import POLE_GUARD

__all__ = [
    "Rule",
    "ConstRule",
    "PowerRule",
    "ExpRule",
    "TableRule",
    "ParameterFamily",
    "ValidationReport",
    "ParameterError",
    "RuleEvaluationError",
    "rule_from_dict",
    "family_from_dict",
    "validate",
    "ratio_r",
    "check_ratio_monotone",
    "alpha_sum_constant",
]

CHUNK = 1 << 16


class ParameterError(ValueError):
    """Malformed family descriptor or invalid argument."""


class RuleEvaluationError(ParameterError):
    """A rule could not be evaluated at the requested index."""


class Rule:
    """Base class for a coordinate-indexed parameter sequence."""

    kind = "abstract"
    length: int | None = None  # None means unbounded

    def __call__(self, j: int) -> float:
        # scalar access goes through the array path so both agree bit for bit
        return float(self.values(j, j + 1)[0])

    def values(self, start: int, stop: int) -> np.ndarray:
        """Values for indices ``start <= j < stop`` (1-based)."""
        raise NotImplementedError

    def _check_range(self, start, stop):
        if start < 1:
            raise RuleEvaluationError(f"{self.kind} rule: index must be >= 1, got {start}")
        if self.length is not None and stop - 1 > self.length:
            raise RuleEvaluationError(
                f"{self.kind} rule: index {stop - 1} beyond table of length {self.length}")

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstRule(Rule):
    value: float
    kind = "const"

    def __call__(self, j):
        self._check_range(j, j + 1)
        return float(self.value)

    def values(self, start, stop):
        self._check_range(start, stop)
        return np.full(max(stop - start, 0), float(self.value))

    def to_dict(self):
        return {"kind": "const", "value": self.value}


@dataclass(frozen=True)
class PowerRule(Rule):
    """``shift + c * j**(-s)``; negative ``s`` gives a growing sequence."""

    c: float
    s: float
    shift: float = 0.0
    kind = "power"

    def values(self, start, stop):
        self._check_range(start, stop)
        j = np.arange(start, stop, dtype=float)
        return self.shift + self.c * np.power(j, -self.s)

    def to_dict(self):
        d = {"kind": "power", "c": self.c, "s": self.s}
        if self.shift:
            d["shift"] = self.shift
        return d


@dataclass(frozen=True)
class ExpRule(Rule):
    """``c * rho**j``."""

    c: float
    rho: float
    kind = "exp"

    def values(self, start, stop):
        self._check_range(start, stop)
        j = np.arange(start, stop, dtype=float)
        with np.errstate(under="ignore"):
            return self.c * np.power(self.rho, j)

    def to_dict(self):
        return {"kind": "exp", "c": self.c, "rho": self.rho}


@dataclass(frozen=True)
class TableRule(Rule):
    table: tuple
    kind = "table"

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(float(x) for x in self.table))

    @property
    def length(self):
        return len(self.table)

    def __call__(self, j):
        self._check_range(j, j + 1)
        return self.table[j - 1]

    def values(self, start, stop):
        self._check_range(start, stop)
        return np.asarray(self.table[start - 1:stop - 1], dtype=float)

    def to_dict(self):
        return {"kind": "table", "values": list(self.table)}


_RULE_FIELDS = {
    "const": ({"value"}, set()),
    "power": ({"c", "s"}, {"shift"}),
    "exp": ({"c", "rho"}, set()),
    "table": ({"values"}, set()),
}


def _number(name, x):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ParameterError(f"{name} must be a finite number, got {x!r}")
    return float(x)


def rule_from_dict(spec: dict, name: str = "rule") -> Rule:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ParameterError(f"{name}: expected an object with a 'kind' field")
    kind = spec["kind"]
    if kind not in _RULE_FIELDS:
        raise ParameterError(f"{name}: unknown kind {kind!r}")
    required, optional = _RULE_FIELDS[kind]
    keys = set(spec) - {"kind"}
    if missing := required - keys:
        raise ParameterError(f"{name}: missing field(s) {sorted(missing)}")
    if unknown := keys - required - optional:
        raise ParameterError(f"{name}: unknown field(s) {sorted(unknown)}")
    if kind == "const":
        return ConstRule(_number(f"{name}.value", spec["value"]))
    if kind == "power":
        return PowerRule(_number(f"{name}.c", spec["c"]), _number(f"{name}.s", spec["s"]),
                         _number(f"{name}.shift", spec.get("shift", 0.0)))
    if kind == "exp":
        return ExpRule(_number(f"{name}.c", spec["c"]), _number(f"{name}.rho", spec["rho"]))
    vals = spec["values"]
    if not isinstance(vals, list) or not vals:
        raise ParameterError(f"{name}.values must be a non-empty list")
    return TableRule(tuple(_number(f"{name}.values[{i}]", v) for i, v in enumerate(vals)))


@dataclass(frozen=True)
class ParameterFamily:
    """The three sequences defining the field; immutable."""

    alpha: Rule
    beta: Rule
    sigma: Rule
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def d_max(self) -> int | None:
        lengths = [r.length for r in (self.alpha, self.beta, self.sigma) if r.length is not None]
        return min(lengths) if lengths else None

    def check_d(self, d: int) -> None:
        if d < 1:
            raise ParameterError(f"d must be >= 1, got {d}")
        if self.d_max is not None and d > self.d_max:
            raise RuleEvaluationError(f"d={d} exceeds the tabulated range d_max={self.d_max}")

    def chunks(self, d: int, start: int = 1, chunk: int = CHUNK
               ) -> Iterator[tuple[int, np.ndarray, np.ndarray, np.ndarray]]:
        """Yield ``(j0, alpha, beta, sigma)`` blocks covering ``start <= j <= d``."""
        j0 = start
        while j0 <= d:
            j1 = min(j0 + chunk, d + 1)
            yield (j0, self.alpha.values(j0, j1), self.beta.values(j0, j1),
                   self.sigma.values(j0, j1))
            j0 = j1

    def alpha_sum(self, d: int) -> float:
        """sum_{j<=d} alpha_j, correctly rounded from the per-index floats."""
        key = ("alpha_sum", d)
        if key not in self._cache:
            if isinstance(self.alpha, ConstRule):
                total = self.alpha.value * d  # one rounding of the exact sum
            else:
                parts = []
                j0 = 1
                while j0 <= d:
                    j1 = min(j0 + CHUNK, d + 1)
                    parts.append(math.fsum(self.alpha.values(j0, j1)))
                    j0 = j1
                total = math.fsum(parts)
            self._cache[key] = total
        return self._cache[key]

    def with_zero_alpha(self) -> ParameterFamily:
        return ParameterFamily(ConstRule(0.0), self.beta, self.sigma)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha.to_dict(), "beta": self.beta.to_dict(),
                "sigma": self.sigma.to_dict()}

    @classmethod
    def from_dict(cls, spec: dict) -> ParameterFamily:
        return family_from_dict(spec)


def family_from_dict(spec: dict) -> ParameterFamily:
    if not isinstance(spec, dict):
        raise ParameterError("family descriptor must be a JSON object")
    if unknown := set(spec) - {"alpha", "beta", "sigma"}:
        raise ParameterError(f"family: unknown field(s) {sorted(unknown)}")
    if missing := {"alpha", "beta", "sigma"} - set(spec):
        raise ParameterError(f"family: missing field(s) {sorted(missing)}")
    return ParameterFamily(*(rule_from_dict(spec[k], k) for k in ("alpha", "beta", "sigma")))


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    status: str = "pass"            # "pass" | "violation" | "evaluation_error"
    j: int | None = None
    clause: str | None = None
    message: str = ""

    def raise_if_failed(self):
        if not self.ok:
            raise ParameterError(f"family invalid at j={self.j} ({self.clause}): {self.message}")


def _fail(j, clause, msg):
    return ValidationReport(False, "violation", j, clause, msg)


def _monotone_analytic(rule: Rule, direction: int) -> bool | None:
    """True/False when monotonicity is decidable in closed form, else None.

    ``direction`` is -1 for non-increasing and +1 for non-decreasing.
    """
    if isinstance(rule, ConstRule):
        return True
    if isinstance(rule, PowerRule):
        slope = -rule.c * rule.s  # sign of d/dj of c*j**-s
        return slope == 0 or (slope > 0) == (direction > 0)
    if isinstance(rule, ExpRule):
        if rule.c == 0 or rule.rho == 1:
            return True
        if rule.rho <= 0:
            return False
        return ((rule.rho > 1) == (rule.c > 0)) == (direction > 0)
    return None


def _first_value_ok(rule: Rule, d: int, pred) -> int | None:
    """First index where pred fails, for rules monotone on [1, d]."""
    for j in (1, d):
        if not pred(rule(j)):
            return j
    return None


def validate(family: ParameterFamily, d: int) -> ValidationReport:
    """Check the standing parameter assumptions for coordinates ``1..d``.

    Clauses: ``alpha_nonnegative``, ``beta_range`` (0 < beta_j <= 1),
    ``beta_nonincreasing``, ``sigma_gt_one`` (sigma_1 > 1 with the zeta pole
    guard) and ``sigma_nondecreasing``.  The first failing index is reported;
    rule evaluation failures are reported with status ``evaluation_error``.
    """
    try:
        family.check_d(d)
        report = _validate_closed_forms(family, d)
        if report is None:
            report = _validate_by_scan(family, d)
        return report
    except RuleEvaluationError as exc:
        return ValidationReport(False, "evaluation_error", None, "evaluation", str(exc))


def _validate_closed_forms(family, d):
    rules = (family.alpha, family.beta, family.sigma)
    if any(isinstance(r, TableRule) for r in rules):
        return None
    beta_mono = _monotone_analytic(family.beta, -1)
    sigma_mono = _monotone_analytic(family.sigma, +1)
    alpha_mono = _monotone_analytic(family.alpha, -1)
    alpha_mono_up = _monotone_analytic(family.alpha, +1)
    if not (beta_mono and sigma_mono and (alpha_mono or alpha_mono_up)):
        return None
    # each sequence is monotone on [1, d], so endpoint checks suffice
    if (j := _first_value_ok(family.alpha, d, lambda a: a >= 0)) is not None:
        return _fail(j, "alpha_nonnegative", f"alpha_{j} = {family.alpha(j)!r} < 0")
    b1 = family.beta(1)
    if not (0 < b1 <= 1):
        return _fail(1, "beta_range", f"beta_1 = {b1!r} not in (0, 1]")
    if not family.beta(d) > 0:
        j = _first_index(lambda jj: not family.beta(jj) > 0, d)
        return _fail(j, "beta_range", f"beta_{j} = {family.beta(j)!r} not > 0")
    s1 = family.sigma(1)
    if not s1 > 1 + POLE_GUARD:
        return _fail(1, "sigma_gt_one", f"sigma_1 = {s1!r} must exceed 1 (+{POLE_GUARD:g})")
    return ValidationReport(True)


def _first_index(bad, d):
    lo, hi = 1, d  # bad(hi) is True; predicate is monotone
    while lo < hi:
        mid = (lo + hi) // 2
        if bad(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _validate_by_scan(family, d):
    prev_b, prev_s = 1.0, -math.inf
    for j0, a, b, s in family.chunks(d):
        if np.any(~np.isfinite(a)) or np.any(~np.isfinite(b)) or np.any(~np.isfinite(s)):
            i = int(np.argmax(~(np.isfinite(a) & np.isfinite(b) & np.isfinite(s))))
            return ValidationReport(False, "evaluation_error", j0 + i, "evaluation",
                                    "non-finite parameter value")
        checks = (
            (a < 0, "alpha_nonnegative", "alpha_{j} = {a} < 0"),
            (~((b > 0) & (b <= 1)), "beta_range", "beta_{j} = {b} not in (0, 1]"),
            (np.diff(np.concatenate(([prev_b], b))) > 0, "beta_nonincreasing",
             "beta_{j} = {b} exceeds beta_{jm}"),
            (np.diff(np.concatenate(([prev_s], s))) < 0, "sigma_nondecreasing",
             "sigma_{j} = {s} below sigma_{jm}"),
        )
        bad_at = []
        for mask, clause, msg in checks:
            if mask.any():
                i = int(np.argmax(mask))
                bad_at.append((i, clause, msg))
        if j0 == 1 and not s[0] > 1 + POLE_GUARD:
            bad_at.append((0, "sigma_gt_one", "sigma_{j} = {s} must exceed 1"))
        if bad_at:
            order = ["alpha_nonnegative", "beta_range", "sigma_gt_one",
                     "beta_nonincreasing", "sigma_nondecreasing"]
            i, clause, msg = min(bad_at, key=lambda t: (t[0], order.index(t[1])))
            j = j0 + i
            return _fail(j, clause, msg.format(j=j, jm=j - 1, a=a[i], b=b[i], s=s[i]))
        prev_b, prev_s = b[-1], s[-1]
    return ValidationReport(True)


def ratio_r(family: ParameterFamily, j: int) -> float:
    """alpha_j / beta_j."""
    return family.alpha(j) / family.beta(j)


def check_ratio_monotone(family: ParameterFamily, d: int) -> ValidationReport:
    """Optional clause: 0 < r_1 <= r_2 <= ... <= r_d with r_j = alpha_j/beta_j."""
    prev = 0.0
    for j0, a, b, _ in family.chunks(d):
        with np.errstate(over="ignore", invalid="ignore"):
            r = a / b
        if j0 == 1 and not r[0] > 0:
            return _fail(1, "ratio_positive", f"r_1 = {r[0]!r} must be > 0")
        with np.errstate(invalid="ignore"):
            dec = np.diff(np.concatenate(([prev], r))) < 0
        if dec.any():
            i = int(np.argmax(dec))
            return _fail(j0 + i, "ratio_nondecreasing", f"r_{j0 + i} = {r[i]!r} decreased")
        prev = r[-1]
    return ValidationReport(True)


def alpha_sum_constant(family: ParameterFamily, d_grid) -> float:
    """Empirical max over ``d_grid`` of sum_{j<=d} alpha_j / (d * alpha_d).

    Returns ``inf`` when some probed ``alpha_d`` is zero while the sum is not.
    """
    worst = 0.0
    for d in sorted(set(int(x) for x in d_grid)):
        s = family.alpha_sum(d)
        ad = family.alpha(d)
        if ad <= 0:
            if s > 0:
                return math.inf
            continue
        worst = max(worst, s / (d * ad))
    return worst
