"""Sweep every finite-n inequality over random spectra and report the tightest margins.

Covers the block dimension and trace bounds, the region bounds, the code
bounds at several rates and the converse inequalities. Margins are in natural
log units (rhs - lhs); any negative margin is a violation.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from qsourcecode.converse_ldp import lemma1_check
from qsourcecode.schur_weyl import block_bound_checks, block_data
from qsourcecode.spectra import Spectrum
from qsourcecode.universal_code import adjusted_rate, evaluate_code


@dataclass(frozen=True)
class SweepConfig:
    dims: tuple = (2, 3)
    spectra_per_dim: int = 10
    n_max: int = 40
    rate_multiples: tuple = (1.2, 1.5, 1.8, 2.1, 2.4)
    seed: int = 0


def sweep(cfg: SweepConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    margins = defaultdict(lambda: [math.inf, 0])
    for d in cfg.dims:
        for _ in range(cfg.spectra_per_dim):
            a = Spectrum.from_weights(rng.dirichlet(np.ones(d)))
            for n in range(1, cfg.n_max + 1):
                blocks = block_data(n, a)
                for bc in block_bound_checks(n, a, blocks):
                    m = margins[bc.name]
                    m[0], m[1] = min(m[0], bc.margin), m[1] + 1
                for mult in cfg.rate_multiples:
                    R = mult * math.log(d)
                    if adjusted_rate(R, n, d) < 0:
                        continue
                    ev = evaluate_code(a, R, n, True, blocks)
                    blind = ev.blind_error_upper_doubled
                    code_margins = {
                        "10-1": n * R - ev.log_dim_K,
                        "12-7": ev.log_bound_12_7 - ev.log_visible_error,
                        "12-8": ev.log_bound_12_8 - (math.log(blind) if blind > 0 else -math.inf),
                        "12-9": ev.log_fidelity - ev.log_bound_12_9,
                    }
                    for name, value in code_margins.items():
                        m = margins[name]
                        m[0], m[1] = min(m[0], value), m[1] + 1
                    grid = [-n * S for S in np.linspace(0, 1.2 * float(-a.log_values[-1]), 20)]
                    for row in lemma1_check(ev, a, grid).rows:
                        m = margins[row.name]
                        m[0], m[1] = min(m[0], row.rhs - row.lhs), m[1] + 1
    return dict(margins)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-max", type=int, default=40)
    p.add_argument("--spectra", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    cfg = SweepConfig(spectra_per_dim=args.spectra, n_max=args.n_max, seed=args.seed)
    start = time.perf_counter()
    margins = sweep(cfg)
    print("bound,checks,min_margin")
    for name, (m, count) in sorted(margins.items()):
        print(f"{name},{count},{m + 0.0:.6g}")
    bad = [k for k, (m, _) in margins.items() if m < -1e-9]
    print(f"{len(bad)} bounds violated, {time.perf_counter() - start:.1f}s", file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
