"""Eigenvalues of the covariance operator of an additive Korobov field.

For ``d`` coordinates the spectrum consists of one constant-mode eigenvalue
``sum_j alpha_j`` and, for every coordinate ``j`` and frequency ``k >= 1``, a
pair of equal eigenvalues ``beta_j / k**sigma_j`` (cosine and sine modes).

Two views are offered:

* :class:`EigenStream` emits eigenvalues one at a time in non-increasing order
  (a lazy k-way merge over per-coordinate streams);
* :class:`LevelSet` answers "how many eigenvalues are >= L and what do they
  sum to" in closed form, which is what makes ``d = 10**6`` tractable.

Ties are broken by ``(constant first, smaller j, smaller k, cos before sin)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .params import CHUNK, ParameterFamily, ParameterError
from .special import (
    POLE_GUARD,
    BoundedValue,
    PoleError,
    partial_power_sum_array,
    zeta_array,
)

__all__ = [
    "EigenLabel",
    "EigenStream",
    "LevelSet",
    "count_at_level",
    "trace",
    "tau_trace",
    "sort_key",
    "DivergenceError",
    "REL_VALUE_ERROR",
]

_U = 2.0 ** -52
#: relative error budget of one computed eigenvalue ``b / k**s``
REL_VALUE_ERROR = 4 * _U

CONSTANT, OSCILLATORY = "constant", "oscillatory"
COS, SIN = "cos", "sin"
_PARITY = (COS, SIN)


class DivergenceError(PoleError):
    """The requested tau-trace diverges (tau * sigma_1 <= 1)."""


@dataclass(frozen=True)
class EigenLabel:
    kind: str
    j: int | None = None
    k: int | None = None
    parity: str | None = None

    def __post_init__(self):
        if self.kind == CONSTANT:
            if (self.j, self.k, self.parity) != (None, None, None):
                raise ValueError("constant label carries no (j, k, parity)")
        elif self.kind == OSCILLATORY:
            if self.j is None or self.k is None or self.k < 1 or self.parity not in _PARITY:
                raise ValueError(f"bad oscillatory label {self}")
        else:
            raise ValueError(f"unknown label kind {self.kind!r}")

    @classmethod
    def constant(cls):
        return cls(CONSTANT)

    def key(self):
        if self.kind == CONSTANT:
            return (0, 0, 0, 0)
        return (1, self.j, self.k, _PARITY.index(self.parity))

    def __str__(self):
        if self.kind == CONSTANT:
            return "constant"
        return f"(j={self.j},k={self.k},{self.parity})"


def sort_key(value: float, label: EigenLabel):
    """Total order used everywhere: larger value first, then the tie order."""
    return (-value,) + label.key()


def _label(kind, j, k, parity):
    if kind == 0:
        return EigenLabel(CONSTANT)
    return EigenLabel(OSCILLATORY, j, k, _PARITY[parity])


class _ExactSum:
    """Shewchuk's exact running sum of floats (non-overlapping partials)."""

    __slots__ = ("partials",)

    def __init__(self):
        self.partials = []

    def add(self, x):
        partials = self.partials
        i = 0
        for y in partials:
            if abs(x) < abs(y):
                x, y = y, x
            hi = x + y
            lo = y - (hi - x)
            if lo:
                partials[i] = lo
                i += 1
            x = hi
        partials[i:] = [x]

    def value(self):
        return math.fsum(self.partials)


def _eig(b, k, s):
    """``b / k**s``; zero once ``k**s`` leaves the double range."""
    try:
        return b / k ** s
    except OverflowError:
        return 0.0


class EigenStream:
    """Lazy non-increasing enumeration of the eigenvalues for fixed ``d``.

    Coordinates join the merge frontier only once the emission level has
    fallen to their leading eigenvalue ``beta_j``, so memory stays proportional
    to the number of coordinates actually reached.  Each oscillatory pair is
    emitted as two separate eigenvalues, so after ``n`` calls the stream has
    produced exactly ``lambda_{d,1}, ..., lambda_{d,n}``.
    """

    def __init__(self, family: ParameterFamily, d: int):
        family.check_d(d)
        self.family = family
        self.d = d
        self.constant_value = family.alpha_sum(d)
        # heap entries: (-value, kind, j, k, parity, beta_j, sigma_j)
        self._heap = [(-self.constant_value, 0, 0, 0, 0, 0.0, 0.0)]
        self._next_j = 1
        self._blk_start = 1
        self._blk_beta = []
        self._blk_sigma = []
        self._blk_size = 64
        self.emitted_count = 0
        self._sum = _ExactSum()

    def _params(self, j):
        off = j - self._blk_start
        if off >= len(self._blk_beta):
            stop = min(j + self._blk_size, self.d + 1)
            self._blk_start = j
            self._blk_beta = self.family.beta.values(j, stop).tolist()
            self._blk_sigma = self.family.sigma.values(j, stop).tolist()
            self._blk_size = min(self._blk_size * 2, CHUNK)
            off = 0
        return self._blk_beta[off], self._blk_sigma[off]

    def _admit(self):
        heap = self._heap
        while self._next_j <= self.d:
            b, s = self._params(self._next_j)
            if heap and b < -heap[0][0]:
                break
            heapq.heappush(heap, (-b, 1, self._next_j, 1, 0, b, s))
            self._next_j += 1

    def _pop(self):
        self._admit()
        heap = self._heap
        top = heapq.heappop(heap)
        negv, kind, j, k, parity, b, s = top
        if kind == 1:
            if parity == 0:
                heapq.heappush(heap, (negv, 1, j, k, 1, b, s))
            else:
                kk = k + 1
                heapq.heappush(heap, (-_eig(b, kk, s), 1, j, kk, 0, b, s))
        v = -negv
        self.emitted_count += 1
        self._sum.add(v)
        return v, kind, j, k, parity

    def next_eigenvalue(self) -> tuple[float, EigenLabel]:
        """Return the largest eigenvalue not yet emitted, with its label."""
        v, kind, j, k, parity = self._pop()
        return v, _label(kind, j, k, parity)

    def __iter__(self):
        return self

    def __next__(self):
        return self.next_eigenvalue()

    def take_values(self, n: int) -> list[float]:
        return [self._pop()[0] for _ in range(n)]

    @property
    def emitted_sum(self) -> BoundedValue:
        """Bracket for sum_{i<=n} lambda_{d,i} after ``n`` emissions."""
        s = self._sum.value()
        return BoundedValue(s, REL_VALUE_ERROR * s + math.ulp(s))

    def peek(self) -> float:
        self._admit()
        return -self._heap[0][0]


# ---------------------------------------------------------------------------
# level-set counting


def _counts_at(b, s, level):
    """#{k >= 1 : b / k**s >= level} elementwise, exact in extended precision."""
    with np.errstate(under="ignore", over="ignore", divide="ignore"):
        x = np.power(b / level, 1.0 / s)
    if np.any(x > 2.0 ** 52):
        raise ParameterError(f"level {level:g} is too small: per-coordinate count overflows")
    m = np.floor(x)
    r = np.rint(x)
    near = np.abs(x - r) <= 1e-9 * np.maximum(1.0, x)
    if near.any():
        kk = r[near].astype(np.longdouble)
        ok = (b[near].astype(np.longdouble)
              >= np.longdouble(level) * np.power(kk, s[near].astype(np.longdouble)))
        m[near] = np.where(ok, r[near], r[near] - 1)
    return np.maximum(m, 0).astype(np.int64)


def _sum_bound(x):
    """Rounding bound for numpy's pairwise ``sum`` of nonnegative ``x``."""
    n = max(len(x), 1)
    return (32 + math.log2(n)) * _U


class LevelSet:
    """Closed-form eigenvalue counting and summation above a level.

    Parameter arrays for the coordinates reached so far are cached in blocks;
    since ``beta_j`` is non-increasing, only coordinates with ``beta_j >= L``
    can contribute at level ``L`` and the scan stops at the first that cannot.
    """

    def __init__(self, family: ParameterFamily, d: int):
        family.check_d(d)
        self.family = family
        self.d = d
        self.constant_value = family.alpha_sum(d)
        self._blocks = []          # list of (j0, beta, sigma)
        self._loaded_to = 0        # last coordinate index loaded
        self._memo = {}

    @property
    def top(self) -> float:
        return max(self.family.beta(1), self.constant_value)

    def _active(self, level):
        """Concatenated (beta, sigma) over coordinates with beta_j >= level."""
        bs, ss = [], []
        i = 0
        while True:
            if i == len(self._blocks):
                if self._loaded_to >= self.d:
                    break
                j0 = self._loaded_to + 1
                j1 = min(j0 + CHUNK, self.d + 1)
                self._blocks.append((j0, self.family.beta.values(j0, j1),
                                     self.family.sigma.values(j0, j1)))
                self._loaded_to = j1 - 1
            _, b, s = self._blocks[i]
            if b[-1] >= level:
                bs.append(b)
                ss.append(s)
                i += 1
                continue
            cut = int(np.searchsorted(-b, -level, side="right"))
            bs.append(b[:cut])
            ss.append(s[:cut])
            break
        if not bs:
            return np.empty(0), np.empty(0)
        return np.concatenate(bs), np.concatenate(ss)

    def at(self, level: float) -> tuple[int, BoundedValue]:
        """``(count, sum)`` of all eigenvalues ``>= level``."""
        if not level > 0:
            raise ParameterError("level must be positive")
        hit = self._memo.get(level)
        if hit is not None:
            return hit
        b, s = self._active(level)
        m = _counts_at(b, s, level)
        vals, errs = partial_power_sum_array(m, s)
        contrib = 2.0 * b * vals
        total = float(np.sum(contrib))
        err = 2.0 * float(np.dot(b, errs)) + _sum_bound(contrib) * total
        count = 2 * int(m.sum())
        c = self.constant_value
        if c >= level:
            count += 1
            total += c
            err += math.ulp(total)
        result = (count, BoundedValue(total, err + math.ulp(total)))
        self._memo[level] = result
        return result

    def window(self, lo: float, hi: float) -> np.ndarray:
        """All eigenvalues in ``[lo, hi)``, sorted descending, with multiplicity."""
        b, s = self._active(lo)
        m_lo = _counts_at(b, s, lo)
        m_hi = _counts_at(b, s, hi)
        extra = m_lo - m_hi
        idx = np.nonzero(extra)[0]
        reps = extra[idx]
        total = int(reps.sum())
        owner = np.repeat(idx, reps)
        starts = np.repeat(np.cumsum(reps) - reps, reps)
        k = (np.arange(total) - starts) + np.repeat(m_hi[idx], reps) + 1
        with np.errstate(under="ignore"):
            v = b[owner] / np.power(k.astype(float), s[owner])
        v = np.repeat(v, 2)
        if lo <= self.constant_value < hi:
            v = np.append(v, self.constant_value)
        return -np.sort(-v)

    def search(self, pred, window_size: int = 4096):
        """Smallest rank ``n`` at which ``pred`` first holds.

        ``pred(counts, s_lo, s_hi)`` is evaluated on arrays of ranks and
        brackets of the prefix sum ``S_n``; it must be monotone (false for
        small ``n``, true from some rank on).  Returns ``(n, S_n)``.
        """
        zero = np.zeros(1)
        if pred(np.zeros(1, dtype=np.int64), zero, zero)[0]:
            return 0, BoundedValue(0.0)

        def holds(level):
            c, S = self.at(level)
            return bool(pred(np.array([c]), np.array([S.lo]), np.array([S.hi]))[0])

        L_false = self.top * 2.0
        L_true = self.top
        while not holds(L_true):
            L_false = L_true
            L_true = L_true / 16.0
            if L_true < 1e-300:
                raise ParameterError("level search underflowed; target is unreachable")
        while True:
            c_t = self.at(L_true)[0]
            c_f = self.at(L_false)[0]
            if c_t - c_f <= window_size or L_false <= L_true * (1 + 1e-12):
                break
            mid = math.sqrt(L_false) * math.sqrt(L_true)
            if not (L_true < mid < L_false):
                break
            if holds(mid):
                L_true = mid
            else:
                L_false = mid

        c0, S0 = self.at(L_false)
        win = self.window(L_true, L_false)
        if len(win):
            cum = np.cumsum(win)
            err = S0.abs_error + (REL_VALUE_ERROR + len(win) * _U) * cum
            sv = S0.value + cum
            err = err + np.spacing(sv)
            ranks = c0 + np.arange(1, len(win) + 1)
            ok = pred(ranks, sv - err, sv + err)
            if ok.any():
                t = int(np.argmax(ok))
                return int(ranks[t]), BoundedValue(float(sv[t]), float(err[t]))
        c_t, S_t = self.at(L_true)
        return c_t, S_t


def count_at_level(family: ParameterFamily, d: int, level: float
                   ) -> tuple[int, BoundedValue]:
    """Number of eigenvalues ``>= level`` and their total (bracketed)."""
    return LevelSet(family, d).at(level)


# ---------------------------------------------------------------------------
# traces


def trace(family: ParameterFamily, d: int, tol: float = 1e-15) -> BoundedValue:
    """sum_j alpha_j + 2 sum_j beta_j zeta(sigma_j), with a propagated bound."""
    family.check_d(d)
    key = ("trace", d, tol)
    cache = family._cache
    if key in cache:
        return cache[key]
    parts, err = [family.alpha_sum(d)], math.ulp(family.alpha_sum(d))
    for _, _, b, s in family.chunks(d):
        z, ze = zeta_array(s, tol)
        contrib = 2.0 * b * z
        parts.append(math.fsum(contrib))
        err += 2.0 * float(np.dot(b, ze)) + 2 * _U * parts[-1]
    total = math.fsum(parts)
    out = BoundedValue(total, err + math.ulp(total))
    cache[key] = out
    return out


def tau_trace(family: ParameterFamily, d: int, tau: float, tol: float = 1e-15,
              alpha_zero: bool = False) -> BoundedValue:
    """sum_j lambda_{d,j}**tau for tau in (0, 1).

    The constant mode contributes ``(sum_j alpha_j)**tau`` (a single
    eigenvalue), not ``sum_j alpha_j**tau``.
    """
    family.check_d(d)
    if not 0 < tau < 1:
        raise ParameterError(f"tau must lie in (0, 1), got {tau}")
    s1 = family.sigma(1)
    if not tau * s1 > 1 + POLE_GUARD:
        raise DivergenceError(f"tau*sigma_1 = {tau * s1:g} <= 1: the tau-trace diverges")
    c = 0.0 if alpha_zero else family.alpha_sum(d)
    head = c ** tau
    parts, err = [head], 2 * _U * head
    for _, _, b, s in family.chunks(d):
        arg = tau * s
        z, ze = zeta_array(arg, tol)
        # sensitivity to rounding in tau*sigma: |zeta'(p)| <= 1/(p-1)**2 + 1
        ze = ze + (1.0 / (arg - 1.0) ** 2 + 1.0) * arg * _U
        bt = np.power(b, tau)
        contrib = 2.0 * bt * z
        parts.append(math.fsum(contrib))
        err += 2.0 * float(np.dot(bt, ze)) + 4 * _U * parts[-1]
    total = math.fsum(parts)
    return BoundedValue(total, err + math.ulp(total))
