"""Strong polynomial tractability verdicts and tau-sum witness scans.

The decay indicators are

    A_* = liminf_d  ln(1/beta_d) / ln d
    B_* = liminf_d  ln(alpha_d/beta_d) / ln d

Under ABS the problem is strongly polynomially tractable exactly when
``A_* > 1``, with exponent ``max(2/(A_*-1), 2/(sigma_1-1))``.  Under NOR the
answer depends on which hypothesis set the family satisfies:

* ``alpha_j <= c beta_j``: same criterion and exponent as ABS;
* ``r_j = alpha_j/beta_j`` positive and non-decreasing, and
  ``sum_{j<=d} alpha_j <= c d alpha_d``: SPT iff ``B_* > 0``, with exponent
  ``max(2/B_*, 2/(sigma_1-1))``.

Polynomial tractability holds for every admissible family.  A liminf cannot
be computed from finitely many samples, so only the closed-form rule kinds
are handled analytically; anything else is an empirical estimate and is
flagged as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import (
    ConstRule,
    ExpRule,
    ParameterError,
    ParameterFamily,
    PowerRule,
    Rule,
    alpha_sum_constant,
    check_ratio_monotone,
    validate,
)
from .spectrum import DivergenceError
from .special import POLE_GUARD, zeta_array

__all__ = [
    "StarValue",
    "TractabilityVerdict",
    "ScanRow",
    "a_star",
    "b_star",
    "spt_verdict",
    "tau_criterion_scan",
    "spt_exponent",
    "boundedness",
    "DEFAULT_PROBE",
    "PLATEAU_REL_GROWTH",
]

DEFAULT_PROBE = (10, 100, 1_000, 10_000, 100_000)
PLATEAU_REL_GROWTH = 1e-6
CONTRACTION_RATIO = 0.9

# clause identifiers reported in verdicts
ABS_CLAUSE = "abs: spt iff A_* > 1"
NOR_BOUNDED_RATIO = "nor: alpha_j <= c*beta_j; spt iff A_* > 1"
NOR_MONOTONE_RATIO = "nor: r_j non-decreasing, sum alpha <= c*d*alpha_d; spt iff B_* > 0"
NOR_VIA_ABS = "nor: spt implied by ABS (A_* > 1)"


@dataclass(frozen=True)
class StarValue:
    value: float
    provenance: str            # "analytic" | "empirical"
    samples: tuple = ()        # (d, ratio) pairs for empirical estimates

    @property
    def heuristic(self) -> bool:
        return self.provenance != "analytic"

    def to_dict(self):
        return {"value": _jsonable(self.value), "provenance": self.provenance,
                "samples": [[d, _jsonable(r)] for d, r in self.samples]}


def _jsonable(x):
    if x is None:
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _asymptotic(rule: Rule):
    """``(c, u, rho)`` with ``rule(d) ~ c * d**(-u) * rho**d``, or None."""
    if isinstance(rule, ConstRule):
        return rule.value, 0.0, 1.0
    if isinstance(rule, PowerRule):
        if rule.s == 0:
            return rule.shift + rule.c, 0.0, 1.0
        if rule.shift == 0:
            return rule.c, rule.s, 1.0
        if rule.s > 0:
            return rule.shift, 0.0, 1.0
        return rule.c, rule.s, 1.0
    if isinstance(rule, ExpRule):
        return rule.c, 0.0, rule.rho
    return None


def _liminf_log_ratio(num, den):
    """liminf ln(num_d/den_d)/ln d for two ``(c, u, rho)`` asymptotic forms."""
    cn, un, rn = num
    cd, ud, rd = den
    q = rn / rd
    if q > 1:
        return math.inf
    if q < 1:
        return -math.inf
    return ud - un


def _empirical(values_at, d_grid, label):
    samples = []
    for d in sorted(set(int(x) for x in d_grid)):
        if d < 2:
            continue
        r = values_at(d)
        samples.append((d, r))
    if not samples:
        raise ParameterError(f"{label}: empirical mode needs grid points d >= 2")
    return StarValue(min(r for _, r in samples), "empirical", tuple(samples))


def a_star(family: ParameterFamily, mode="analytic") -> StarValue:
    """liminf ln(1/beta_d)/ln d.

    ``mode`` is ``"analytic"`` (closed-form beta rules only) or an iterable of
    probe dimensions, in which case the running infimum over the probe is
    returned and flagged empirical.
    """
    if isinstance(mode, str):
        if mode != "analytic":
            raise ParameterError(f"unknown mode {mode!r}")
        form = _asymptotic(family.beta)
        if form is None:
            raise ParameterError(
                f"A_* has no analytic form for a {family.beta.kind} beta rule; "
                "pass a probe grid for an empirical estimate")
        return StarValue(_liminf_log_ratio((1.0, 0.0, 1.0), form), "analytic")
    return _empirical(lambda d: math.log(1.0 / family.beta(d)) / math.log(d), mode, "A_*")


def b_star(family: ParameterFamily, mode="analytic") -> StarValue:
    """liminf ln(alpha_d/beta_d)/ln d; undefined when alpha_d vanishes."""
    if isinstance(mode, str):
        if mode != "analytic":
            raise ParameterError(f"unknown mode {mode!r}")
        fa, fb = _asymptotic(family.alpha), _asymptotic(family.beta)
        if fa is None or fb is None:
            raise ParameterError(
                "B_* has no analytic form for tabulated rules; pass a probe grid")
        if fa[0] == 0:
            raise ParameterError("B_* is undefined: alpha_d = 0")
        return StarValue(_liminf_log_ratio(fa, fb), "analytic")

    def ratio(d):
        a = family.alpha(d)
        if a <= 0:
            raise ParameterError(f"B_* is undefined: alpha_{d} = {a}")
        return math.log(a / family.beta(d)) / math.log(d)

    return _empirical(ratio, mode, "B_*")


def spt_exponent(star: float, sigma1: float, offset: float) -> float:
    """``max(2/(star - offset), 2/(sigma_1 - 1))``; offset 1 for A_*, 0 for B_*."""
    tail = 2.0 / (sigma1 - 1.0)
    if math.isinf(star):
        return tail
    return max(2.0 / (star - offset), tail)


@dataclass
class TractabilityVerdict:
    criterion: str
    pt: bool
    spt: bool | None
    a_star: StarValue | None
    b_star: StarValue | None
    exponent: float | None
    theorem_clause: str
    hypothesis_report: dict = field(default_factory=dict)
    exponent_upper: float | None = None

    @property
    def qpt(self):
        return self.pt

    @property
    def uwt(self):
        return self.pt

    @property
    def wt(self):
        return self.pt

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "pt": self.pt,
            "qpt": self.qpt,
            "uwt": self.uwt,
            "wt": self.wt,
            "spt": "unknown" if self.spt is None else self.spt,
            "a_star": self.a_star.to_dict() if self.a_star else None,
            "b_star": self.b_star.to_dict() if self.b_star else None,
            "exponent": _jsonable(self.exponent),
            "exponent_upper": _jsonable(self.exponent_upper),
            "theorem_clause": self.theorem_clause,
            "hypothesis_report": self.hypothesis_report,
        }


def _star_or_empirical(fn, family, probe):
    try:
        return fn(family, "analytic")
    except ParameterError:
        return fn(family, probe)


def _representable_limit(family, d):
    """Largest ``j <= d`` with ``beta_j > 0`` in floating point."""
    if family.beta(d) > 0:
        return d
    lo, hi = 1, d  # beta_lo > 0, beta_hi == 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if family.beta(mid) > 0:
            lo = mid
        else:
            hi = mid
    return lo


def _probe_for(family, probe):
    """Probe dimensions within the tabulated range and where beta_d does not underflow."""
    dmax = family.d_max if family.d_max is not None else max(probe)
    dmax = _representable_limit(family, dmax)
    pts = tuple(d for d in probe if d <= dmax)
    return pts if dmax in pts else pts + (dmax,)


def _bounded_ratio_hypothesis(family, probe):
    """alpha_j <= c * beta_j for all j."""
    fa, fb = _asymptotic(family.alpha), _asymptotic(family.beta)
    if fa is not None and fb is not None:
        if fa[0] == 0:
            return {"holds": True, "provenance": "analytic", "c": 0.0}
        growth = _liminf_log_ratio(fa, fb)
        holds = growth <= 0
        note = {"holds": holds, "provenance": "analytic"}
        if holds:
            note["c_probe_max"] = max(family.alpha(d) / family.beta(d) for d in (1,) + probe)
        return note
    c = max(family.alpha(d) / family.beta(d) for d in (1,) + probe)
    return {"holds": True, "provenance": "empirical", "c_probe_max": c,
            "note": "finite probe: boundedness of alpha_j/beta_j cannot be certified"}


def _monotone_ratio_hypothesis(family, probe):
    """0 < r_1 <= r_2 <= ... and sum_{j<=d} alpha_j <= c d alpha_d."""
    fa, fb = _asymptotic(family.alpha), _asymptotic(family.beta)
    r1 = family.alpha(1) / family.beta(1)
    out = {"r_1": r1}
    if r1 <= 0:
        out.update(holds=False, provenance="analytic", failed="r_1 > 0")
        return out
    shifted = any(isinstance(r, PowerRule) and r.shift and r.s for r in
                  (family.alpha, family.beta))
    if fa is not None and fb is not None and not shifted:
        (ca, ua, ra), (cb, ub, rb) = fa, fb
        ratio_up = (ub - ua >= 0) and (ra / rb >= 1)
        ratio_down = (ub - ua <= 0) and (ra / rb <= 1) and not (ub == ua and ra == rb)
        if ratio_up:
            monotone = True
        elif ratio_down:
            monotone = False
        else:
            monotone = None
        if ra > 1 or (ra == 1 and ua <= 0):
            const, sum_ok = 1.0, True
        elif ra == 1 and ua < 1:
            const, sum_ok = 1.0 / (1.0 - ua), True
        else:
            const, sum_ok = None, False
        if monotone is not None:
            out.update(holds=monotone and sum_ok, provenance="analytic",
                       ratio_monotone=monotone, sum_condition=sum_ok, c=const)
            if not monotone:
                out["failed"] = "r_j non-decreasing"
            elif not sum_ok:
                out["failed"] = "sum alpha_j <= c d alpha_d"
            return out
    dmax = max(probe)
    mono = check_ratio_monotone(family, dmax)
    c = alpha_sum_constant(family, probe)
    # a growing empirical constant signals that no c works
    c_small = alpha_sum_constant(family, [d for d in probe if d <= dmax // 10] or probe[:1])
    sum_ok = math.isfinite(c) and c <= max(2.0 * c_small, c_small + 1.0)
    out.update(holds=mono.ok and sum_ok, provenance="empirical", ratio_monotone=mono.ok,
               sum_condition=sum_ok, c_probe_max=c)
    if not mono.ok:
        out["failed"] = f"r_j non-decreasing (j={mono.j})"
    elif not sum_ok:
        out["failed"] = "sum alpha_j <= c d alpha_d"
    return out


def spt_verdict(family: ParameterFamily, crit, probe=DEFAULT_PROBE) -> TractabilityVerdict:
    """SPT/PT verdict with exponent and the clause that produced it."""
    crit = str(crit).upper()
    if crit not in ("ABS", "NOR"):
        raise ParameterError(f"criterion must be ABS or NOR, got {crit!r}")
    probe = _probe_for(family, probe)
    validate(family, max(probe)).raise_if_failed()
    sigma1 = family.sigma(1)
    A = _star_or_empirical(a_star, family, probe)
    abs_spt = A.value > 1
    abs_exp = spt_exponent(A.value, sigma1, 1.0) if abs_spt else None

    if crit == "ABS":
        return TractabilityVerdict("ABS", True, abs_spt, A, None, abs_exp, ABS_CLAUSE,
                                   {"a_star_provenance": A.provenance, "probe": list(probe)})

    report = {"probe": list(probe)}
    h_bounded = _bounded_ratio_hypothesis(family, probe)
    report["bounded_ratio"] = h_bounded
    h_mono = _monotone_ratio_hypothesis(family, probe)
    report["monotone_ratio"] = h_mono

    fired = []
    B = None
    if h_bounded["holds"]:
        fired.append((NOR_BOUNDED_RATIO, abs_spt, abs_exp))
    if h_mono["holds"]:
        B = _star_or_empirical(b_star, family, probe)
        spt = B.value > 0
        fired.append((NOR_MONOTONE_RATIO, spt, spt_exponent(B.value, sigma1, 0.0) if spt else None))
    elif family.alpha(1) > 0:
        try:
            B = _star_or_empirical(b_star, family, probe)
        except ParameterError:
            B = None

    if fired:
        spts = {f[1] for f in fired}
        clause = " & ".join(f[0] for f in fired)
        if len(spts) > 1:
            report["conflict"] = "hypothesis sets disagree"
            return TractabilityVerdict("NOR", True, None, A, B, None, clause, report)
        spt = fired[0][1]
        exps = [f[2] for f in fired if f[2] is not None]
        return TractabilityVerdict("NOR", True, spt, A, B, min(exps) if exps else None,
                                   clause, report)
    if abs_spt:
        report["note"] = "neither NOR hypothesis set verified; SPT follows from ABS"
        return TractabilityVerdict("NOR", True, True, A, B, None, NOR_VIA_ABS, report,
                                   exponent_upper=abs_exp)
    report["note"] = "neither NOR hypothesis set verified and ABS is not SPT"
    return TractabilityVerdict("NOR", True, None, A, B, None, "none", report)


# ---------------------------------------------------------------------------
# tau-sum witness scans


def boundedness(ds, ws):
    """Plateau heuristic for sup_d w(d) over an increasing grid.

    Returns ``(bounded, rule)``.  ``plateau``: relative growth over the last
    decade below ``PLATEAU_REL_GROWTH``.  ``contracting``: the last two
    decade increments shrink by at least ``CONTRACTION_RATIO``, so a geometric
    extrapolation converges.  Otherwise ``growing``.
    """
    ds = list(ds)
    ws = list(ws)
    if len(ds) < 2:
        return False, "insufficient grid"

    def back(i):
        target = ds[i] / 10.0
        cands = [k for k in range(i) if ds[k] <= target * (1 + 1e-12)]
        return cands[-1] if cands else None

    last = len(ds) - 1
    prev = back(last)
    if prev is None:
        prev = 0
    growth = (ws[last] - ws[prev]) / abs(ws[prev])
    if growth < PLATEAU_REL_GROWTH:
        return True, "plateau"
    prev2 = back(prev)
    if prev2 is not None:
        d1 = ws[prev] - ws[prev2]
        d2 = ws[last] - ws[prev]
        if d1 > 0 and d2 <= CONTRACTION_RATIO * d1:
            return True, "contracting"
    return False, "growing"


@dataclass
class ScanRow:
    tau: float
    criterion: str
    d_grid: tuple
    witness: dict        # name -> tuple of values over d_grid
    sup: dict            # name -> max over grid
    bounded: dict        # name -> bool
    rule: dict           # name -> heuristic rule that decided
    heuristic: bool = True

    def to_dict(self):
        return {"tau": self.tau, "criterion": self.criterion, "d_grid": list(self.d_grid),
                "witness": {k: list(v) for k, v in self.witness.items()},
                "sup": self.sup, "bounded": self.bounded, "rule": self.rule,
                "heuristic": self.heuristic}


def _cumulative(family, d_grid, tau):
    """Snapshots at each grid d of (sum alpha, sum 2 b^tau zeta(tau s), sum 2 b zeta(s))."""
    grid = sorted(set(int(d) for d in d_grid))
    out = {}
    acc_a, acc_t, acc_1 = [], [], []
    gi = 0
    for j0, a, b, s in family.chunks(grid[-1]):
        zt, _ = zeta_array(tau * s)
        z1, _ = zeta_array(s)
        ct = np.cumsum(2.0 * np.power(b, tau) * zt)
        c1 = np.cumsum(2.0 * b * z1)
        ca = np.cumsum(a)
        j1 = j0 + len(a)
        while gi < len(grid) and grid[gi] < j1:
            i = grid[gi] - j0
            out[grid[gi]] = (math.fsum(acc_a) + ca[i], math.fsum(acc_t) + ct[i],
                             math.fsum(acc_1) + c1[i])
            gi += 1
        acc_a.append(ca[-1])
        acc_t.append(ct[-1])
        acc_1.append(c1[-1])
    return grid, out


def tau_criterion_scan(family: ParameterFamily, crit, tau_grid, d_grid) -> list[ScanRow]:
    """Witness suprema behind the tau-sum tractability criteria.

    ABS: ``pt`` = (tau-trace)^(1/tau) * d^(-1/tau) and ``spt`` =
    (tau-trace)^(1/tau), both for the alpha-zeroed field (a single constant
    eigenvalue never changes ABS tractability).  NOR: ``nor`` =
    (tau-trace)^(1/tau) / trace for the field itself.
    """
    crit = str(crit).upper()
    if crit not in ("ABS", "NOR"):
        raise ParameterError(f"criterion must be ABS or NOR, got {crit!r}")
    sigma1 = family.sigma(1)
    for tau in tau_grid:
        if not 0 < tau < 1:
            raise ParameterError(f"tau must lie in (0, 1), got {tau}")
        if not tau * sigma1 > 1 + POLE_GUARD:
            raise DivergenceError(f"tau*sigma_1 = {tau * sigma1:g} <= 1 for tau={tau}")
    grid = sorted(set(int(d) for d in d_grid))
    if not grid or grid[0] < 1:
        raise ParameterError("d_grid must contain positive dimensions")
    validate(family, grid[-1]).raise_if_failed()
    rows = []
    for tau in tau_grid:
        grid, snaps = _cumulative(family, grid, tau)
        if crit == "ABS":
            spt_w = tuple(float(snaps[d][1] ** (1.0 / tau)) for d in grid)
            pt_w = tuple(float(w * d ** (-1.0 / tau)) for w, d in zip(spt_w, grid))
            witness = {"pt": pt_w, "spt": spt_w}
        else:
            nor = tuple(float((snaps[d][0] ** tau + snaps[d][1]) ** (1.0 / tau)
                              / (snaps[d][0] + snaps[d][2])) for d in grid)
            witness = {"nor": nor}
        bounded, rule, sup = {}, {}, {}
        for name, ws in witness.items():
            bounded[name], rule[name] = boundedness(grid, ws)
            sup[name] = float(max(ws))
        rows.append(ScanRow(tau, crit, tuple(grid), witness, sup, bounded, rule))
    return rows
