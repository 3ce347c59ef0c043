"""Command-line driver: exponents, rate sweeps, code evaluation and bound checks.

Exit status is 0 on success, 1 on a usage or input error and 2 when any
verified inequality fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import converse_ldp, exponents, oracle_sim, schur_weyl, universal_code
from .spectra import PureSource, Spectrum, entropy, spectrum_from_source

LN2 = math.log(2.0)
EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2
COMMANDS = ("exponent", "sweep", "code-eval", "verify-bounds", "oracle-check", "tails")
# columns holding a rate, entropy or exponent; rescaled when --bits is given
RATE_COLUMNS = {"R", "R_n", "entropy", "error_exponent", "fidelity_exponent", "value",
                "S", "empirical", "eta", "residual", "log_dim_K"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    spectrum: Spectrum
    source: PureSource | None = None
    rates: list = field(default_factory=list)
    n_values: list = field(default_factory=list)
    S_values: list = field(default_factory=list)
    output: str | None = None
    fmt: str = "csv"
    seed: int = 0
    budget: int = schur_weyl.DEFAULT_BUDGET
    bits: bool = False
    adjusted: bool = True
    all_forms: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command}")
        if self.budget <= 0:
            raise UsageError("budget must be positive")


# --- parsing -----------------------------------------------------------------

def parse_spectrum(text: str) -> Spectrum:
    text = text.strip()
    if text.startswith("uniform:"):
        d = int(text.split(":", 1)[1])
        if d < 1:
            raise UsageError("uniform dimension must be positive")
        return Spectrum.uniform(d)
    try:
        return Spectrum([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"invalid spectrum {text!r}: {exc}") from exc


def _complex_entry(x):
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1])
    return complex(x)


def load_source(path: str) -> PureSource:
    """JSON file {"states": [[entry, ...], ...], "probs": [...]}; entries are reals or [re, im]."""
    with open(path) as fh:
        data = json.load(fh)
    try:
        states = np.array([[_complex_entry(x) for x in v] for v in data["states"]])
        return PureSource(states, data["probs"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid source file {path}: {exc}") from exc


def parse_grid(text: str, integer: bool = False) -> list:
    """'v', 'v1,v2,...' or an inclusive 'start:stop:step' (step defaults to 1)."""
    text = text.strip()
    conv = int if integer else float
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise UsageError(f"bad grid {text!r}")
        start, stop = conv(parts[0]), conv(parts[1])
        step = conv(parts[2]) if len(parts) == 3 else conv(1)
        if step <= 0:
            raise UsageError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise UsageError(f"empty grid {text!r}")
        vals = [start + i * step for i in range(count)]
        if not integer:
            vals = [round(v, 12) for v in vals]
        return vals
    vals = [conv(x) for x in text.split(",") if x.strip()]
    if not vals:
        raise UsageError(f"empty grid {text!r}")
    return vals


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsourcecode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, rates=False, ns=False):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--spectrum", help="'0.75,0.25' or 'uniform:d'")
        src.add_argument("--source", help="JSON file with pure states and probabilities")
        if rates:
            p.add_argument("--rate", "--rates", dest="rates", required=rates == "required",
                           help="rate or grid start:stop:step (nats unless --bits)")
        if ns:
            p.add_argument("--n", dest="n_values", required=True, help="block length or grid")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
        p.add_argument("--output", "-o", help="output path (default stdout)")
        p.add_argument("--bits", action="store_true", help="rates and exponents in bits")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=None,
                       help=f"enumeration budget (default ${schur_weyl.BUDGET_ENV} or "
                            f"{schur_weyl.DEFAULT_BUDGET})")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("exponent", help="error and fidelity exponents at one rate")
    common(p, rates="required")
    p = sub.add_parser("sweep", help="exponents over a rate grid")
    common(p, rates="required")
    p.add_argument("--all-forms", action="store_true", help="add psi- and divergence-form columns")
    p = sub.add_parser("code-eval", help="exact universal-code performance")
    common(p, rates="required", ns=True)
    p.add_argument("--raw-rate", action="store_true", help="use R instead of the adjusted R_n")
    p = sub.add_parser("verify-bounds", help="check the finite-n dimension, trace and code bounds")
    common(p, rates=True, ns=True)
    p = sub.add_parser("oracle-check", help="matrix-level cross-check on small tensor powers")
    common(p, rates=True, ns=True)
    p.add_argument("--raw-rate", action="store_true")
    p = sub.add_parser("tails", help="spectral tails against eta(S)")
    common(p, ns=True)
    p.add_argument("--S", dest="S_values", required=True, help="threshold exponent(s) S")
    return parser


def config_from_args(args) -> RunConfig:
    if args.source:
        source = load_source(args.source)
        spectrum = spectrum_from_source(source)
    else:
        source = None
        spectrum = parse_spectrum(args.spectrum)
    scale = LN2 if args.bits else 1.0
    rates = [r * scale for r in parse_grid(args.rates)] if getattr(args, "rates", None) else []
    S_values = [s * scale for s in parse_grid(args.S_values)] if getattr(args, "S_values", None) else []
    n_values = parse_grid(args.n_values, integer=True) if getattr(args, "n_values", None) else []
    if any(n < 1 for n in n_values):
        raise UsageError("block lengths must be positive")
    budget = args.budget if args.budget is not None else schur_weyl.enumeration_budget()
    fmt = args.fmt or ("json" if args.command == "exponent" else "csv")
    return RunConfig(
        command=args.command, spectrum=spectrum, source=source, rates=rates, n_values=n_values,
        S_values=S_values, output=args.output, fmt=fmt, seed=args.seed, budget=budget,
        bits=args.bits, adjusted=not getattr(args, "raw_rate", False),
        all_forms=getattr(args, "all_forms", False), workers=max(1, args.workers),
    )


# --- output ------------------------------------------------------------------

def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_value(x) for x in v]
    return v


def _is_rate_column(key: str) -> bool:
    return key in RATE_COLUMNS or key.startswith(("error_", "fidelity_"))


def _to_bits(row: dict) -> dict:
    return {k: (v / LN2 if _is_rate_column(k) and isinstance(v, (float, int)) and not isinstance(v, bool)
                else v) for k, v in row.items()}


def render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_json_value(rows), indent=2) + "\n"
    columns = []
    for row in rows:
        columns += [k for k in row if k not in columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


# --- commands ----------------------------------------------------------------

def _check_rates(cfg: RunConfig):
    ln_d = math.log(cfg.spectrum.d)
    bad = [r for r in cfg.rates if not 0.0 <= r < ln_d]
    if bad:
        raise UsageError(f"rates must lie in [0, ln d) = [0, {ln_d:.6g}); got {bad[0]:.6g}")


def _exponent_row(a: Spectrum, R: float, all_forms: bool) -> dict:
    err = exponents.error_exponent(a, R)
    fid = exponents.fidelity_exponent(a, R)
    row = {"R": R, "entropy": entropy(a), "regime": exponents.regime(a, R).value,
           "error_exponent": err.value, "fidelity_exponent": fid.value}
    if all_forms:
        for c in (exponents.Characterization.PSI_FORM, exponents.Characterization.DIVERGENCE_FORM):
            row[f"error_{c.value}"] = exponents.error_exponent(a, R, c).value
            row[f"fidelity_{c.value}"] = exponents.fidelity_exponent(a, R, c).value
    return row


def _parallel_map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(*it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*items)))


def cmd_exponent(cfg: RunConfig):
    _check_rates(cfg)
    a = cfg.spectrum
    out = []
    for R in cfg.rates:
        rec = {"R": R, "entropy": entropy(a), "spectrum": list(a.as_tuple())}
        for name, fn in (("error_exponent", exponents.error_exponent),
                         ("fidelity_exponent", exponents.fidelity_exponent)):
            forms = {c.value: fn(a, R, c).to_dict() for c in exponents.Characterization}
            if cfg.bits:
                forms = {k: _to_bits(v) for k, v in forms.items()}
            rec[name] = forms
        out.append(rec)
    return out, False


def cmd_sweep(cfg: RunConfig):
    _check_rates(cfg)
    items = [(cfg.spectrum, R, cfg.all_forms) for R in sorted(cfg.rates)]
    return _parallel_map(_exponent_row, items, cfg.workers), False


def _code_row(a: Spectrum, R: float, n: int, adjusted: bool) -> dict:
    ev = universal_code.evaluate_code(a, R, n, adjusted)
    row = ev.to_dict()
    row["violations"] = ";".join(ev.violations())
    return row


def cmd_code_eval(cfg: RunConfig):
    items = [(cfg.spectrum, R, n, cfg.adjusted) for R in sorted(cfg.rates) for n in sorted(cfg.n_values)]
    rows = _parallel_map(_code_row, items, cfg.workers)
    return rows, any(r["violations"] for r in rows)


def _summarize(n: int, name: str, margins: list, oks: list) -> dict:
    return {"n": n, "bound": name, "checks": len(oks),
            "min_margin": min(margins) + 0.0 if margins else math.inf,
            "violations": sum(1 for ok in oks if not ok)}


def _verify_n(a: Spectrum, n: int, rates: Sequence[float], budget: int) -> list[dict]:
    d = a.d
    if schur_weyl.young_count(n, d) > budget:
        return [{"n": n, "bound": "skipped", "checks": 0, "min_margin": math.nan, "violations": 0,
                 "note": "enumeration budget exceeded; bounds only"}]
    blocks = schur_weyl.block_data(n, a, budget)
    groups: dict[str, tuple[list, list]] = {}

    def add(name, margin, ok):
        m, o = groups.setdefault(name, ([], []))
        m.append(margin)
        o.append(ok)

    for bc in schur_weyl.block_bound_checks(n, a, blocks):
        add(bc.name, bc.margin, bc.ok)
    regions = {"all": lambda t: True, "H<=H(a)": lambda t: entropy(t) <= entropy(a)}
    regions["H>H(a)"] = lambda t: entropy(t) > entropy(a)
    for R in rates:
        R_n = universal_code.adjusted_rate(R, n, d)
        regions[f"H<=R_n({R:.6g})"] = lambda t, r=R_n: entropy(t) <= r + universal_code.MEMBERSHIP_TOL
        regions[f"H>R_n({R:.6g})"] = lambda t, r=R_n: entropy(t) > r + universal_code.MEMBERSHIP_TOL
    for pred in regions.values():
        sel = [b for b in blocks if pred(b.lam.type)]
        if not sel:
            continue
        total = schur_weyl.logsumexp(np.array([b.log_trace for b in sel]))
        for bc in schur_weyl.region_bound_checks(n, a, sel, total):
            add(bc.name, bc.margin, bc.ok)
    if n <= 12:
        for b in blocks:
            best, top = schur_weyl.highest_weight_check(b.lam, a)
            add("a5", -abs(best - top), abs(best - top) <= 1e-12 * max(1.0, abs(top)))
    for R in rates:
        ev = universal_code.evaluate_code(a, R, n, True, blocks)
        if ev.degenerate:
            add("degenerate-code", 0.0, True)
            continue
        failed = set(ev.violations())
        pairs = [("10-1", ev.n * R - ev.log_dim_K),
                 ("12-7", ev.log_bound_12_7 - ev.log_visible_error),
                 ("12-8", ev.log_bound_12_8 - _safe_log(ev.blind_error_upper_doubled)),
                 ("12-9", ev.log_fidelity - ev.log_bound_12_9)]
        for name, margin in pairs:
            add(name, margin, name not in failed)
        lam_grid = [-n * S for S in np.linspace(0.0, 2.0 * math.log(d), 20)]
        for row in converse_ldp.lemma1_check(ev, a, lam_grid).rows:
            add(row.name, row.rhs - row.lhs, row.ok)
    return [_summarize(n, name, m, o) for name, (m, o) in groups.items()]


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def cmd_verify_bounds(cfg: RunConfig):
    items = [(cfg.spectrum, n, tuple(cfg.rates), cfg.budget) for n in sorted(cfg.n_values)]
    rows = [r for chunk in _parallel_map(_verify_n, items, cfg.workers) for r in chunk]
    return rows, any(r["violations"] for r in rows)


def _random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def cmd_oracle_check(cfg: RunConfig):
    a = cfg.spectrum
    rows, bad = [], False
    if cfg.source is not None and cfg.source.dim == a.d:
        rho = cfg.source.average_state()
    else:
        # a seeded random basis, so the matrix check is not confined to diagonal states
        u = _random_unitary(np.random.default_rng(cfg.seed), a.d)
        rho = u @ np.diag(a.values) @ u.conj().T
    for n in sorted(cfg.n_values):
        if a.d ** n > oracle_sim.DIM_BUDGET:
            raise UsageError(f"d^n = {a.d ** n} exceeds the oracle budget {oracle_sim.DIM_BUDGET}")
        for c in oracle_sim.schur_weyl_cross_check(a, n, rho):
            ok = c.ok()
            bad |= not ok
            rows.append({"kind": "block", "n": n, "lam": ",".join(map(str, c.lam)),
                         "matrix_trace": c.matrix_trace, "combinatorial_trace": c.combinatorial_trace,
                         "trace_error": c.trace_error, "top_eigenvalue": c.top_eigenvalue,
                         "highest_weight": c.highest_weight, "ok": ok})
        if cfg.source is None:
            continue
        for R in sorted(cfg.rates):
            try:
                e = oracle_sim.exact_errors(cfg.source, R, n, cfg.adjusted)
            except universal_code.DegenerateCode:
                rows.append({"kind": "errors", "n": n, "R": R, "note": "degenerate code"})
                continue
            combinatorial = universal_code.evaluate_code(a, R, n, cfg.adjusted).visible_error
            ok = e.appendix_c_ok() and abs(e.visible_error - combinatorial) <= 1e-10
            bad |= not ok
            rows.append({"kind": "errors", "n": n, "R": R, "visible_error": e.visible_error,
                         "combinatorial_visible_error": combinatorial, "blind_error": e.blind_error,
                         "bures_visible": e.bures_visible, "bures_blind": e.bures_blind, "ok": ok})
    return rows, bad


def cmd_tails(cfg: RunConfig):
    rows = []
    for S in sorted(cfg.S_values):
        for r in converse_ldp.tail_exponent_empirical(cfg.spectrum, S, sorted(cfg.n_values)):
            rows.append({"S": S, "n": r.n, "tail_log": r.tail_log, "empirical": r.empirical,
                         "eta": r.analytic, "residual": r.residual})
    return rows, False


HANDLERS = {
    "exponent": cmd_exponent,
    "sweep": cmd_sweep,
    "code-eval": cmd_code_eval,
    "verify-bounds": cmd_verify_bounds,
    "oracle-check": cmd_oracle_check,
    "tails": cmd_tails,
}


def run(cfg: RunConfig) -> int:
    os.environ[schur_weyl.BUDGET_ENV] = str(cfg.budget)
    rows, violated = HANDLERS[cfg.command](cfg)
    if cfg.bits and cfg.command != "exponent":
        rows = [_to_bits(r) for r in rows]
    text = render(rows, cfg.fmt)
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_VIOLATION if violated else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(config_from_args(args))
    except (UsageError, ValueError, OSError, schur_weyl.BudgetExceeded,
            oracle_sim.DimensionBudgetExceeded) as exc:
        print(f"qsourcecode: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
