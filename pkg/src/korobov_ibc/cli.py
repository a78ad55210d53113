"""Command-line front end.

Commands: spectrum, complexity, tractability, asymptotics, check, verify-mc.
Every command accepts ``--family`` (JSON family descriptor) or ``--config``
(JSON object whose keys are option names; command-line flags win), plus
``--out``, ``--format csv|json``, ``--tol``, ``--strict``, ``--seed`` and
``--threads``.

Exit codes: 0 success (including rows flagged as ambiguous), 2 usage or
configuration error, 3 numeric failure (or an uncertified result when
``--strict`` is given).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import asymptotics, montecarlo, oracle, tractability
from .complexity import HeapBudgetExceeded, info_complexity
from .params import ParameterError, family_from_dict, validate
from .special import PrecisionError
from .spectrum import DivergenceError, EigenStream

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
MAX_SEED = 2 ** 64 - 1

# frozen output columns
SPECTRUM_COLUMNS = ("rank", "value", "kind", "j", "k", "parity")
COMPLEXITY_COLUMNS = ("d", "eps", "criterion", "n", "certified", "n_lo", "n_hi")
SCAN_COLUMNS = ("tau", "criterion", "witness", "sup", "bounded", "rule")
CHECK_COLUMNS = ("case", "d", "eps", "criterion", "oracle_n", "heap_n", "level_n",
                 "conclusive", "match")

COMMON_DEFAULTS = {"family": None, "out": None, "format": None, "tol": 1e-15,
                   "strict": False, "seed": 0, "threads": 1}
DEFAULTS = {
    "spectrum": {"d": None, "top": 10, "format": "csv"},
    "complexity": {"d": None, "eps": None, "crit": "nor", "path": "auto", "format": "csv"},
    "tractability": {"crit": "abs", "probe": list(tractability.DEFAULT_PROBE),
                     "tau": [], "scan_d": [10 ** k for k in range(1, 7)], "format": "json"},
    "asymptotics": {"d": None, "eps": None, "path": "auto", "format": "csv"},
    "check": {"cases": 20, "d_max": 3, "K": 1000, "inject_fault": False, "format": "json"},
    "verify-mc": {"d": 3, "K": 1000, "n": 10, "samples": 10_000, "format": "json"},
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# rendering


def fmt(x):
    """Fixed 15-significant-digit rendering used in every output."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".15g")
    return str(x)


def _json_ready(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(format(x, ".15g")) if math.isfinite(x) else format(x, ".15g")
    if isinstance(x, dict):
        return {k: _json_ready(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_ready(v) for v in x]
    return str(x)


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def render_json(obj) -> str:
    return json.dumps(_json_ready(obj), indent=2) + "\n"


def render_table(columns, rows, form) -> str:
    if form == "json":
        return render_json([{c: r.get(c) for c in columns} for r in rows])
    return render_csv(columns, rows)


# ---------------------------------------------------------------------------
# argument handling


def _add_common(p):
    p.add_argument("--family", help="family descriptor JSON file")
    p.add_argument("--config", help="JSON config; keys are option names")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--tol", type=float)
    p.add_argument("--strict", action="store_true", default=None,
                   help="exit 3 when a result is not certified")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="korobov-ibc",
        description="Average-case complexity and tractability of additive Korobov fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="top eigenvalues with labels")
    _add_common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--top", type=int)

    p = sub.add_parser("complexity", help="n(eps) over a d x eps grid")
    _add_common(p)
    p.add_argument("--d", type=int, nargs="*")
    p.add_argument("--eps", type=float, nargs="*")
    p.add_argument("--crit", choices=("abs", "nor", "ABS", "NOR"))
    p.add_argument("--path", choices=("auto", "heap", "level"))

    p = sub.add_parser("tractability", help="SPT verdict and tau-sum scans")
    _add_common(p)
    p.add_argument("--crit", choices=("abs", "nor", "ABS", "NOR"))
    p.add_argument("--probe", type=int, nargs="*", help="probe dimensions for empirical checks")
    p.add_argument("--tau", type=float, nargs="*", help="tau values to scan")
    p.add_argument("--scan-d", type=int, nargs="*", dest="scan_d")

    p = sub.add_parser("asymptotics", help="computed vs predicted NOR complexity")
    _add_common(p)
    p.add_argument("--d", type=int, nargs="*")
    p.add_argument("--eps", type=float)
    p.add_argument("--path", choices=("auto", "heap", "level"))

    p = sub.add_parser("check", help="cross-check against the brute-force oracle")
    _add_common(p)
    p.add_argument("--cases", type=int)
    p.add_argument("--d-max", type=int, dest="d_max")
    p.add_argument("--K", type=int)
    p.add_argument("--inject-fault", action="store_true", default=None,
                   dest="inject_fault", help=argparse.SUPPRESS)

    p = sub.add_parser("verify-mc", help="Monte Carlo check of the projection error")
    _add_common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int)
    return parser


def _merge_config(args) -> dict:
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}")
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        unknown = sorted(set(cfg) - set(opts))
        if unknown:
            raise UsageError(f"unknown config field(s): {unknown}")
        for k, v in cfg.items():
            if opts[k] is None:
                opts[k] = v
    defaults = dict(COMMON_DEFAULTS)
    defaults.update(DEFAULTS[args.command])
    for k, v in defaults.items():
        if opts.get(k) is None:
            opts[k] = v
    return opts


def _load_family(opts):
    src = opts["family"]
    if src is None:
        raise UsageError("--family is required")
    if isinstance(src, dict):
        spec = src
    else:
        try:
            with open(src) as fh:
                spec = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read family {src}: {e}")
    return family_from_dict(spec), spec


def _int(name, x, lo, hi=None):
    if isinstance(x, bool) or not isinstance(x, int):
        raise UsageError(f"--{name} must be an integer, got {x!r}")
    if x < lo or (hi is not None and x > hi):
        rng = f">= {lo}" if hi is None else f"in [{lo}, {hi}]"
        raise UsageError(f"--{name} must be {rng}, got {x}")
    return x


def _real(name, x, lo, hi, *, lo_open=True, hi_open=True):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise UsageError(f"--{name} must be a finite number, got {x!r}")
    if (x <= lo if lo_open else x < lo) or (x >= hi if hi_open else x > hi):
        raise UsageError(f"--{name} = {x} is out of range")
    return float(x)


def _list(name, x):
    if x is None:
        raise UsageError(f"--{name} is required")
    return list(x) if isinstance(x, (list, tuple)) else [x]


def _check_common(opts):
    _real("tol", opts["tol"], 0.0, math.inf)
    _int("seed", opts["seed"], 0, MAX_SEED)
    _int("threads", opts["threads"], 1)
    if opts["format"] not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {opts['format']!r}")


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(opts):
    family, _ = _load_family(opts)
    d = _int("d", opts["d"] if opts["d"] is not None else -1, 1)
    top = _int("top", opts["top"], 0)
    validate(family, d).raise_if_failed()
    stream = EigenStream(family, d)
    rows = []
    for rank in range(1, top + 1):
        v, lab = stream.next_eigenvalue()
        rows.append({"rank": rank, "value": v, "kind": lab.kind,
                     "j": lab.j if lab.kind == "oscillatory" else None,
                     "k": lab.k if lab.kind == "oscillatory" else None,
                     "parity": lab.parity if lab.kind == "oscillatory" else None})
    return render_table(SPECTRUM_COLUMNS, rows, opts["format"]), False


def cmd_complexity(opts):
    family, _ = _load_family(opts)
    ds = [_int("d", d, 1) for d in _list("d", opts["d"])]
    eps = [_real("eps", e, 0.0, 1.0) for e in _list("eps", opts["eps"])]
    crit = str(opts["crit"]).upper()
    if crit not in ("ABS", "NOR"):
        raise UsageError(f"--crit must be abs or nor, got {opts['crit']!r}")
    if opts["path"] not in ("auto", "heap", "level"):
        raise UsageError(f"--path must be auto, heap or level, got {opts['path']!r}")
    cells = [(d, e) for d in ds for e in eps]

    def run(cell):
        d, e = cell
        return info_complexity(family, d, e, crit, path=opts["path"], tol=opts["tol"]).to_record()

    rows = _map(run, cells, opts["threads"])
    uncertified = any(not r["certified"] for r in rows)
    return render_table(COMPLEXITY_COLUMNS, rows, opts["format"]), uncertified


def cmd_tractability(opts):
    family, spec = _load_family(opts)
    crit = str(opts["crit"]).upper()
    if crit not in ("ABS", "NOR"):
        raise UsageError(f"--crit must be abs or nor, got {opts['crit']!r}")
    probe = [_int("probe", d, 2) for d in _list("probe", opts["probe"])]
    if not probe:
        raise UsageError("--probe needs at least one dimension")
    taus = [_real("tau", t, 0.0, 1.0) for t in _list("tau", opts["tau"])]
    scan_d = [_int("scan-d", d, 1) for d in _list("scan-d", opts["scan_d"])]
    verdict = tractability.spt_verdict(family, crit, probe=tuple(sorted(set(probe))))
    scan = tractability.tau_criterion_scan(family, crit, taus, scan_d) if taus and scan_d else []
    heuristic = verdict.a_star.heuristic or bool(verdict.b_star and verdict.b_star.heuristic)
    if opts["format"] == "csv":
        rows = [{"tau": r.tau, "criterion": r.criterion, "witness": name, "sup": r.sup[name],
                 "bounded": r.bounded[name], "rule": r.rule[name]}
                for r in scan for name in r.witness]
        return render_csv(SCAN_COLUMNS, rows), verdict.spt is None
    out = {"family": spec, "verdict": verdict.to_dict(), "heuristic": heuristic,
           "scan": [r.to_dict() for r in scan]}
    return render_json(out), verdict.spt is None


def cmd_asymptotics(opts):
    family, _ = _load_family(opts)
    ds = [_int("d", d, 1) for d in _list("d", opts["d"])]
    if opts["eps"] is None:
        raise UsageError("--eps is required")
    eps = _real("eps", opts["eps"], 0.0, 1.0)
    regime = asymptotics.classify(family)
    if isinstance(regime, asymptotics.NotApplicable):
        rec = regime.to_dict()
        if opts["format"] == "json":
            return render_json({"regime": rec, "rows": []}), False
        return render_csv(("applicable", "failed_condition", "reason"), [rec]), False
    if regime.case_id != 1 and eps >= regime.eps0:
        raise UsageError(f"eps={eps} is outside (0, eps0={regime.eps0:.15g})")
    rows = asymptotics.compare(family, ds, eps, path=opts["path"], tol=opts["tol"])
    uncertified = any(not r["certified"] for r in rows)
    if opts["format"] == "json":
        cols = asymptotics.COMPARE_COLUMNS
        return render_json({"regime": regime.to_dict(),
                            "rows": [{c: r[c] for c in cols} for r in rows]}), uncertified
    return render_csv(asymptotics.COMPARE_COLUMNS, rows), uncertified


def run_cross_check(cases, d_max, K, seed, *, inject_fault=False):
    """Random small families: oracle n against both complexity paths."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    rows = []
    for case in range(cases):
        fam = oracle.random_family(rng)
        d = int(rng.integers(1, d_max + 1))
        eps = round(float(rng.uniform(0.05, 0.95)), 6)
        crit = ("ABS", "NOR")[case % 2]
        o = oracle.oracle_info_complexity(oracle.materialize(fam, d, K), eps, crit)
        heap_n = info_complexity(fam, d, eps, crit, path="heap").n
        level_n = info_complexity(fam, d, eps, crit, path="level").n
        if inject_fault:
            heap_n += 1
        match = (not o.conclusive) or (o.n == heap_n == level_n)
        rows.append({"case": case, "d": d, "eps": eps, "criterion": crit,
                     "oracle_n": o.n, "heap_n": heap_n, "level_n": level_n,
                     "conclusive": o.conclusive, "match": match, "family": fam.to_dict()})
    return rows


def cmd_check(opts):
    cases = _int("cases", opts["cases"], 0)
    d_max = _int("d-max", opts["d_max"], 1)
    if d_max > oracle.MAX_D:
        raise UsageError(f"--d-max must be <= {oracle.MAX_D}, got {d_max}")
    K = _int("K", opts["K"], 1, oracle.MAX_K)
    rows = run_cross_check(cases, d_max, K, opts["seed"], inject_fault=bool(opts["inject_fault"]))
    passed = all(r["match"] for r in rows)
    if opts["format"] == "csv":
        return render_csv(CHECK_COLUMNS, rows), not passed
    report = {"cases": cases, "d_max": d_max, "K": K, "seed": opts["seed"],
              "conclusive": sum(r["conclusive"] for r in rows),
              "mismatches": sum(not r["match"] for r in rows),
              "pass": passed, "rows": rows}
    return render_json(report), not passed


def cmd_verify_mc(opts):
    family, spec = _load_family(opts)
    d = _int("d", opts["d"], 1)
    K = _int("K", opts["K"], 1)
    n = _int("n", opts["n"], 0, 1 + 2 * d * K)
    samples = _int("samples", opts["samples"], 1)
    rep = montecarlo.verify(family, d, K, n, samples, opts["seed"],
                            workers=opts["threads"], family_spec=spec)
    if opts["format"] == "csv":
        cols = ("d", "K", "n", "samples", "empirical", "analytic_lo", "analytic_hi",
                "std_error", "pass")
        return render_csv(cols, [rep]), not rep["pass"]
    return render_json(rep), not rep["pass"]


COMMANDS = {
    "spectrum": cmd_spectrum,
    "complexity": cmd_complexity,
    "tractability": cmd_tractability,
    "asymptotics": cmd_asymptotics,
    "check": cmd_check,
    "verify-mc": cmd_verify_mc,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        opts = _merge_config(args)
        _check_common(opts)
        text, flagged = COMMANDS[args.command](opts)
    except (UsageError, ParameterError, DivergenceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (PrecisionError, HeapBudgetExceeded, ArithmeticError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    if opts["out"]:
        with open(opts["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if flagged and opts["strict"]:
        print("strict: result not certified or check failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
