"""Certified evaluation of the Riemann zeta function and power tail sums.

Everything here works for real arguments ``p > 1`` only.  Values come back as
:class:`BoundedValue` (scalar) or as ``(values, errors)`` array pairs, where
the error is a rigorous bound on the absolute error that accounts for the
Euler-Maclaurin remainder and for floating point rounding.

The Euler-Maclaurin expansion used for ``f(x) = x**-p`` is

    sum_{k>=N} k**-p = N**(1-p)/(p-1) + N**-p/2
                       + sum_{m=1}^{5} B_{2m}/(2m)! * (p)_{2m-1} * N**(-p-2m+1) + R

with ``|R| <= |B_12|/12! * (p)_11 * N**(-p-11)``; for real ``p`` the
derivatives of ``f`` alternate in sign, so the remainder is bounded by the
first omitted term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "POLE_GUARD",
    "BoundedValue",
    "PoleError",
    "PrecisionError",
    "zeta",
    "tail_power_sum",
    "partial_power_sum",
    "zeta_array",
    "partial_power_sum_array",
]

#: arguments ``p <= 1 + POLE_GUARD`` are rejected
POLE_GUARD = 1e-9

_U = 2.0 ** -52  # one ulp of 1.0
_TINY = 1e-300   # absorbs underflowed terms

# B_2 .. B_10 divided by (2m)!, and |B_12|/12!
_BERN = (
    (1.0 / 6.0) / 2.0,
    (-1.0 / 30.0) / 24.0,
    (1.0 / 42.0) / 720.0,
    (-1.0 / 30.0) / 40320.0,
    (5.0 / 66.0) / 3628800.0,
)
_BERN_REM = (691.0 / 2730.0) / 479001600.0


class PoleError(ValueError):
    """Raised when an argument is too close to the pole of zeta at p = 1."""


class PrecisionError(ArithmeticError):
    """Raised when a requested tolerance is below the attainable rounding floor."""


@dataclass(frozen=True)
class BoundedValue:
    """A float together with a rigorous absolute error bound.

    The true quantity lies in ``[lo, hi]``.  Arithmetic is interval-style:
    errors add, and every operation adds one ulp of the result for rounding.
    """

    value: float
    abs_error: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.abs_error) or self.abs_error < 0:
            raise ValueError(f"abs_error must be finite and >= 0, got {self.abs_error}")

    @property
    def lo(self) -> float:
        return math.nextafter(self.value - self.abs_error, -math.inf)

    @property
    def hi(self) -> float:
        return math.nextafter(self.value + self.abs_error, math.inf)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other):
        if not isinstance(other, BoundedValue):
            other = BoundedValue(float(other))
        v = self.value + other.value
        return BoundedValue(v, self.abs_error + other.abs_error + math.ulp(v))

    __radd__ = __add__

    def __neg__(self):
        return BoundedValue(-self.value, self.abs_error)

    def __sub__(self, other):
        if not isinstance(other, BoundedValue):
            other = BoundedValue(float(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: float) -> BoundedValue:
        """Multiply by an exactly known float ``c``."""
        v = self.value * c
        return BoundedValue(v, self.abs_error * abs(c) + math.ulp(v))

    def __mul__(self, other):
        if not isinstance(other, BoundedValue):
            return self.scale(float(other))
        v = self.value * other.value
        err = (abs(self.value) * other.abs_error + abs(other.value) * self.abs_error
               + self.abs_error * other.abs_error)
        return BoundedValue(v, err + math.ulp(v))

    __rmul__ = __mul__

    def sqrt(self) -> BoundedValue:
        """Square root, clamping the lower end of the bracket at zero."""
        v = math.sqrt(max(self.value, 0.0))
        hi = math.sqrt(max(self.hi, 0.0))
        lo = math.sqrt(max(self.lo, 0.0))
        return BoundedValue(v, max(hi - v, v - lo) + 2 * math.ulp(v))

    def __repr__(self):
        return f"BoundedValue({self.value!r} ± {self.abs_error:.3g})"


def _check_pole(p):
    if np.any(~(np.asarray(p, dtype=float) > 1.0 + POLE_GUARD)):
        raise PoleError(f"argument must exceed 1 + {POLE_GUARD:g}; got {p}")


def _em_tail(N, p):
    """Euler-Maclaurin value of sum_{k>=N} k**-p.

    Works elementwise on broadcastable arrays.  Returns ``(value, remainder,
    magnitude)`` where ``magnitude`` is the sum of absolute values of the
    computed terms (used for the rounding bound).
    """
    N = np.asarray(N, dtype=float)
    p = np.asarray(p, dtype=float)
    with np.errstate(under="ignore", over="ignore"):
        base = np.power(N, -p)
        head = base * N / (p - 1.0) + 0.5 * base
        mag = np.abs(head)
        c = base * p / N  # (p)_1 * N**(-p-1)
        corr = np.zeros(np.broadcast(N, p).shape)
        for m, b in enumerate(_BERN, start=1):
            t = b * c
            corr = corr + t
            mag = mag + np.abs(t)
            c = c * (p + 2 * m - 1) * (p + 2 * m) / (N * N)
        rem = _BERN_REM * c
    return head + corr, rem, mag


def _scalar_tail(start: int, p: float, tol: float) -> BoundedValue:
    """sum_{k>=start} k**-p with abs error <= tol (start >= 1)."""
    N = max(start, 8)
    while True:
        _, rem, _ = _em_tail(N, p)
        if float(rem) <= 0.5 * tol or N >= 1 << 20:
            break
        N *= 2
    terms = [k ** -p for k in range(start, N)]
    head = math.fsum(terms)
    em, rem, mag = (float(x) for x in _em_tail(N, p))
    value = head + em
    rounding = 2 * _U * head + 24 * _U * mag + math.ulp(value) + _TINY * (N - start + 1)
    err = rem + rounding
    if err > tol:
        raise PrecisionError(
            f"cannot reach tol={tol:g} for p={p!r}; rounding floor is {rounding:.3g}")
    return BoundedValue(value, err)


def zeta(p: float, tol: float = 1e-12) -> BoundedValue:
    """Riemann zeta(p) for real p > 1, with ``abs_error <= tol``."""
    _check_pole(p)
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _scalar_tail(1, float(p), tol)


def tail_power_sum(K: int, p: float, tol: float = 1e-12) -> BoundedValue:
    """sum_{k=K+1}^inf k**-p, with ``abs_error <= tol``."""
    _check_pole(p)
    if K < 0:
        raise ValueError("K must be nonnegative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _scalar_tail(int(K) + 1, float(p), tol)


def partial_power_sum(K: int, p: float) -> BoundedValue:
    """sum_{k=1}^K k**-p summed directly (exactly rounded)."""
    terms = [k ** -p for k in range(1, int(K) + 1)]
    s = math.fsum(terms)
    return BoundedValue(s, 2 * _U * s + math.ulp(s))


_DIRECT = 16       # terms summed directly in the vectorised kernels
_BIG_P = 60.0      # beyond this zeta(p) is 1 to within 3 * 2**-p


def zeta_array(p, tol: float = 1e-15):
    """Vectorised zeta(p) for an array of arguments.

    Returns ``(values, errors)``.  The Euler-Maclaurin remainder is kept below
    ``tol`` per element; ``errors`` additionally carries rounding.
    """
    p = np.asarray(p, dtype=float)
    _check_pole(p)
    flat = p.ravel()
    uniq, inverse = np.unique(flat, return_inverse=True)
    vals = np.ones_like(uniq)
    errs = np.zeros_like(uniq)

    big = uniq >= _BIG_P
    errs[big] = 3.0 * np.exp2(-uniq[big])

    small = ~big
    if np.any(small):
        q = uniq[small]
        N = float(_DIRECT + 1)
        while True:
            em, rem, mag = _em_tail(N, q)
            if np.all(rem <= tol) or N >= 1 << 16:
                break
            N *= 2
        head = np.zeros_like(q)
        for k in range(1, int(N)):
            head += np.power(float(k), -q)
        v = head + em
        vals[small] = v
        errs[small] = rem + (N + 2) * _U * head + 24 * _U * mag + _U * v
    return vals[inverse].reshape(p.shape), errs[inverse].reshape(p.shape)


def partial_power_sum_array(m, p):
    """Vectorised sum_{k=1}^{m} k**-p for integer arrays ``m >= 0``.

    Returns ``(values, errors)``.  Small ``m`` is summed directly; larger ``m``
    uses a difference of Euler-Maclaurin tails, which keeps the cost O(1) per
    element whatever the size of ``m``.
    """
    m = np.asarray(m, dtype=np.int64)
    p = np.asarray(p, dtype=float)
    m, p = np.broadcast_arrays(m, p)
    vals = np.zeros(m.shape)
    with np.errstate(under="ignore"):
        if p.size and p.min() == p.max():
            # common exponent: cumulative head table, same summation order
            head = np.zeros(_DIRECT + 1)
            acc = 0.0
            for k in range(1, _DIRECT + 1):
                acc += float(np.power(float(k), -p.flat[0]))
                head[k] = acc
            vals = head[np.minimum(m, _DIRECT)]
        else:
            for k in range(1, _DIRECT + 1):
                mask = m >= k
                if not mask.any():
                    break
                vals[mask] += np.power(float(k), -p[mask])
    errs = (_DIRECT + 2) * _U * vals
    long = m > _DIRECT
    if np.any(long):
        pl = p[long]
        t0, r0, g0 = _em_tail(float(_DIRECT + 1), pl)
        t1, r1, g1 = _em_tail(m[long].astype(float) + 1.0, pl)
        vals[long] += t0 - t1
        errs[long] += r0 + r1 + 24 * _U * (g0 + g1) + 2 * _U * np.abs(vals[long])
    return vals, errs
