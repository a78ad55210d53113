"""Monte Carlo check of the rank-n projection error.

Fields are simulated in coefficient space through a truncated
Karhunen-Loeve expansion: one coefficient for the constant mode (variance
``sum_j alpha_j``) and one per ``(j, k, cos|sin)`` with ``k <= K`` (variance
``beta_j / k**sigma_j``).  The basis is orthonormal, so the squared L2 norm
of a field is the sum of its squared coefficients and no spatial grid is
needed.  Gaussian draws are a convenience: mean squared errors only depend on
the covariance.

Seeds go through :class:`numpy.random.SeedSequence`; the same seed always
gives the same sample and the same estimate, whatever the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .complexity import prefix_sum
from .params import ParameterError, ParameterFamily, validate
from .special import BoundedValue, tail_power_sum
from .spectrum import CONSTANT, OSCILLATORY, EigenLabel, sort_key, trace

__all__ = [
    "BATCH",
    "FieldSample",
    "retained_spectrum",
    "sample_field",
    "empirical_projection_error",
    "truncation_remainder",
    "analytic_bracket",
    "verify",
]

BATCH = 1000


def _ratio(b, k, s):
    try:
        return b / k ** s
    except OverflowError:
        return 0.0


def retained_spectrum(family: ParameterFamily, d: int, K: int):
    """Labels and variances of the retained modes, constant first then (j, k, cos/sin)."""
    if K < 1:
        raise ParameterError(f"K must be >= 1, got {K}")
    family.check_d(d)
    betas = family.beta.values(1, d + 1).tolist()
    sigmas = family.sigma.values(1, d + 1).tolist()
    labels = [EigenLabel(CONSTANT)]
    var = [family.alpha_sum(d)]
    for j, (b, s) in enumerate(zip(betas, sigmas), start=1):
        for k in range(1, K + 1):
            v = _ratio(b, k, s)
            labels.append(EigenLabel(OSCILLATORY, j, k, "cos"))
            labels.append(EigenLabel(OSCILLATORY, j, k, "sin"))
            var += [v, v]
    return labels, np.array(var)


@dataclass(frozen=True)
class FieldSample:
    labels: list
    values: np.ndarray      # coefficient per label
    K: int
    d: int

    @property
    def coefficients(self) -> dict:
        return dict(zip(self.labels, self.values.tolist()))

    def squared_norm(self) -> float:
        """Squared L2 norm of the field (Parseval)."""
        return math.fsum((self.values ** 2).tolist())

    def coordinate_energy(self) -> tuple[float, list[float]]:
        """Squared constant coefficient and the squared norm of each marginal X_j."""
        sq = self.values ** 2
        per = sq[1:].reshape(self.d, 2 * self.K)
        return float(sq[0]), [math.fsum(row) for row in per.tolist()]


def sample_field(family: ParameterFamily, d: int, K: int, seed: int) -> FieldSample:
    validate(family, d).raise_if_failed()
    labels, var = retained_spectrum(family, d, K)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return FieldSample(labels, np.sqrt(var) * rng.standard_normal(len(var)), K, d)


def _top_mask(labels, var, n):
    order = sorted(range(len(labels)), key=lambda i: sort_key(var[i], labels[i]))
    mask = np.zeros(len(labels), dtype=bool)
    mask[order[:n]] = True
    return mask


def _batch_residuals(child, sd_rest, size):
    rng = np.random.default_rng(child)
    z = rng.standard_normal((size, len(sd_rest)))
    return ((z * sd_rest) ** 2).sum(axis=1)


def empirical_projection_error(family: ParameterFamily, d: int, K: int, n: int,
                               num_samples: int, seed: int, *, workers: int = 1):
    """Mean squared residual after projecting onto the top-``n`` modes.

    Returns ``(mean_sq_error, std_error)``.  Samples are drawn in batches of
    ``BATCH`` from spawned seed sequences and reduced in batch order.
    """
    validate(family, d).raise_if_failed()
    if num_samples < 1:
        raise ParameterError("num_samples must be >= 1")
    labels, var = retained_spectrum(family, d, K)
    if not 0 <= n <= len(labels):
        raise ParameterError(f"n must lie in [0, {len(labels)}], got {n}")
    keep = _top_mask(labels, var, n)
    sd_rest = np.sqrt(var[~keep])
    sizes = [BATCH] * (num_samples // BATCH)
    if num_samples % BATCH:
        sizes.append(num_samples % BATCH)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    if len(sd_rest) == 0:
        return 0.0, 0.0
    jobs = list(zip(children, sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _batch_residuals(a[0], sd_rest, a[1]), jobs))
    else:
        parts = [_batch_residuals(c, sd_rest, m) for c, m in jobs]
    r = np.concatenate(parts)
    mean = math.fsum(r.tolist()) / len(r)
    if len(r) < 2:
        return mean, math.inf
    se = float(np.std(r, ddof=1)) / math.sqrt(len(r))
    return mean, se


def truncation_remainder(family: ParameterFamily, d: int, K: int) -> BoundedValue:
    """Total variance of the omitted modes k > K."""
    total = BoundedValue(0.0)
    for b, s in zip(family.beta.values(1, d + 1).tolist(),
                    family.sigma.values(1, d + 1).tolist()):
        total = total + tail_power_sum(K, s, tol=1e-13).scale(2.0 * b)
    return total


def analytic_bracket(family: ParameterFamily, d: int, K: int, n: int) -> BoundedValue:
    """Expected squared residual over the retained modes: trace - S_n - remainder.

    Valid when the top-``n`` retained modes are the top-``n`` modes overall,
    i.e. no omitted mode outranks the ``n``-th retained one.
    """
    labels, var = retained_spectrum(family, d, K)
    if n > 0:
        nth = np.sort(var)[::-1][n - 1]
        max_omitted = max(_ratio(b, K + 1, s) for b, s in zip(
            family.beta.values(1, d + 1).tolist(), family.sigma.values(1, d + 1).tolist()))
        if nth < max_omitted:
            raise ParameterError("n reaches the truncation level; raise K")
    return trace(family, d) - prefix_sum(family, d, n) - truncation_remainder(family, d, K)


def verify(family: ParameterFamily, d: int, K: int, n: int, num_samples: int,
           seed: int, *, workers: int = 1, family_spec=None) -> dict:
    """Report comparing the empirical error with the analytic bracket (3 std errors)."""
    mse, se = empirical_projection_error(family, d, K, n, num_samples, seed, workers=workers)
    br = analytic_bracket(family, d, K, n)
    ok = br.lo - 3.0 * se <= mse <= br.hi + 3.0 * se
    return {
        "family": family_spec if family_spec is not None else family.to_dict(),
        "d": d, "K": K, "n": n, "samples": num_samples,
        "empirical": mse, "analytic_lo": br.lo, "analytic_hi": br.hi,
        "std_error": se, "pass": bool(ok),
    }
