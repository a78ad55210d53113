"""Minimal average-case errors and information complexity n(eps).

The optimal rank-``n`` algorithm keeps the ``n`` largest eigenmodes, so its
squared error is the eigenvalue tail ``trace - S_n`` with ``S_n`` the sum of
the ``n`` largest eigenvalues.  ``n(eps)`` is the least ``n`` whose tail is
at most ``eps**2 * CRI_d**2`` (``CRI_d = 1`` for ABS, the initial error for
NOR).

Every comparison is done on brackets.  Two ranks are searched for:

* ``n_lo``: the first rank where the tail *might* be below the threshold;
* ``n_hi``: the first rank where it *certainly* is.

The result is certified when they coincide; otherwise both are reported and
the caller can tighten the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .params import ParameterError, ParameterFamily, validate
from .special import BoundedValue
from .spectrum import EigenStream, LevelSet, trace

__all__ = [
    "ABS",
    "NOR",
    "Criterion",
    "ComplexityResult",
    "DEFAULT_HEAP_BUDGET",
    "HeapBudgetExceeded",
    "criterion",
    "threshold",
    "minimal_error",
    "prefix_sum",
    "info_complexity",
    "n_for_threshold",
]

ABS, NOR = "ABS", "NOR"
DEFAULT_HEAP_BUDGET = 100_000


class HeapBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Criterion:
    kind: str

    def __post_init__(self):
        if self.kind not in (ABS, NOR):
            raise ParameterError(f"criterion must be ABS or NOR, got {self.kind!r}")

    def cri_squared(self, family, d, tol=1e-15) -> BoundedValue:
        return BoundedValue(1.0) if self.kind == ABS else trace(family, d, tol)

    def __str__(self):
        return self.kind


def criterion(crit) -> Criterion:
    if isinstance(crit, Criterion):
        return crit
    return Criterion(str(crit).upper())


@dataclass(frozen=True)
class ComplexityResult:
    n: int
    tail_at_n: BoundedValue
    threshold: BoundedValue
    certified: bool
    n_lo: int
    n_hi: int
    criterion: str = ""
    d: int = 0
    eps: float = math.nan
    path: str = ""
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def ambiguous(self) -> bool:
        return not self.certified

    def to_record(self) -> dict:
        return {
            "d": self.d,
            "eps": self.eps,
            "criterion": self.criterion,
            "n": self.n,
            "n_lo": self.n_lo,
            "n_hi": self.n_hi,
            "tail": self.tail_at_n.value,
            "tail_error": self.tail_at_n.abs_error,
            "threshold": self.threshold.value,
            "threshold_error": self.threshold.abs_error,
            "certified": self.certified,
            "path": self.path,
        }


def threshold(family, d, eps, crit, tol=1e-15) -> BoundedValue:
    """``eps**2 * CRI_d**2`` as a bracket."""
    return criterion(crit).cri_squared(family, d, tol).scale(eps * eps) + BoundedValue(
        0.0, 2 * math.ulp(eps * eps))


def _targets(T: BoundedValue, theta: BoundedValue):
    """Prefix-sum targets: S_n >= t_maybe (possible), S_n >= t_sure (certain)."""
    t_maybe = math.nextafter(T.lo - theta.hi, -math.inf)
    t_sure = math.nextafter(T.hi - theta.lo, math.inf)
    return t_maybe, t_sure


def _heap_ranks(family, d, T, theta, budget):
    t_maybe, t_sure = _targets(T, theta)
    stream = EigenStream(family, d)
    n_lo = None
    S = BoundedValue(0.0)
    n = 0
    while True:
        if n_lo is None and S.hi >= t_maybe:
            n_lo = n
        if S.lo >= t_sure:
            return n_lo, n, S
        if n >= budget:
            raise HeapBudgetExceeded(f"heap path exceeded {budget} emissions")
        stream._pop()
        n += 1
        S = stream.emitted_sum


def _level_ranks(family, d, T, theta):
    t_maybe, t_sure = _targets(T, theta)
    ls = LevelSet(family, d)
    n_lo, _ = ls.search(lambda c, lo, hi: hi >= t_maybe)
    n_hi, S = ls.search(lambda c, lo, hi: lo >= t_sure)
    return n_lo, n_hi, S


def n_for_threshold(family: ParameterFamily, d: int, theta: BoundedValue, *,
                    path: str = "auto", heap_budget: int = DEFAULT_HEAP_BUDGET,
                    tol: float = 1e-15, check: bool = True) -> ComplexityResult:
    """Least ``n`` with eigenvalue tail ``<= theta`` (an absolute bracket).

    ``path`` is ``"heap"`` (sequential emission), ``"level"`` (closed-form
    level-set search) or ``"auto"`` (heap first, level set once the heap
    exceeds ``heap_budget`` emissions).
    """
    if check:
        validate(family, d).raise_if_failed()
    if path not in ("auto", "heap", "level"):
        raise ParameterError(f"unknown path {path!r}")
    T = trace(family, d, tol)
    used = path
    if path in ("auto", "heap"):
        try:
            n_lo, n_hi, S = _heap_ranks(family, d, T, theta, heap_budget)
            used = "heap"
        except HeapBudgetExceeded:
            if path == "heap":
                raise
            used = "level"
    if used == "level":
        n_lo, n_hi, S = _level_ranks(family, d, T, theta)
    tail = T - S
    return ComplexityResult(n=n_hi, tail_at_n=tail, threshold=theta,
                            certified=(n_lo == n_hi), n_lo=n_lo, n_hi=n_hi,
                            d=d, path=used)


def info_complexity(family: ParameterFamily, d: int, eps: float, crit, *,
                    path: str = "auto", heap_budget: int = DEFAULT_HEAP_BUDGET,
                    tol: float = 1e-15) -> ComplexityResult:
    """Information complexity ``n(eps)`` under ABS or NOR, certified.

    ``n`` may be 0 when the initial error already meets the target (possible
    for ABS).  When the threshold falls inside the tail's error bracket the
    result has ``certified=False`` and carries both candidate ranks.
    """
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    crit = criterion(crit)
    validate(family, d).raise_if_failed()
    theta = threshold(family, d, eps, crit, tol)
    res = n_for_threshold(family, d, theta, path=path, heap_budget=heap_budget,
                          tol=tol, check=False)
    return ComplexityResult(n=res.n, tail_at_n=res.tail_at_n, threshold=theta,
                            certified=res.certified, n_lo=res.n_lo, n_hi=res.n_hi,
                            criterion=crit.kind, d=d, eps=eps, path=res.path)


def prefix_sum(family: ParameterFamily, d: int, n: int, *,
               heap_budget: int = DEFAULT_HEAP_BUDGET) -> BoundedValue:
    """Bracket for the sum of the ``n`` largest eigenvalues."""
    if n < 0:
        raise ParameterError("n must be nonnegative")
    if n == 0:
        return BoundedValue(0.0)
    if n <= heap_budget:
        stream = EigenStream(family, d)
        for _ in range(n):
            stream._pop()
        return stream.emitted_sum
    ls = LevelSet(family, d)
    rank, S = ls.search(lambda c, lo, hi: c >= n)
    if rank != n:
        raise ParameterError(f"could not resolve rank {n} (landed on {rank})")
    return S


def minimal_error(family: ParameterFamily, d: int, n: int, *,
                  heap_budget: int = DEFAULT_HEAP_BUDGET, tol: float = 1e-15) -> BoundedValue:
    """The n-th minimal average-case error ``sqrt(trace - S_n)``; n=0 is e(0)."""
    validate(family, d).raise_if_failed()
    T = trace(family, d, tol)
    return (T - prefix_sum(family, d, n, heap_budget=heap_budget)).sqrt()
