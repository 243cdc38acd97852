#!/usr/bin/env python3
"""Sweep the multiplier-quotient family and tabulate index, curvature and defect rank.

Each row is (d, r, multipliers) -> stabilized index, K = (-1)^d index, defect
rank and wall time.  Random homogeneous multipliers are drawn per degree.
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

import numpy as np

from diraclab.graded import (
    defect_rank,
    dshift_quotient_spec,
    monomials,
    stabilized_index,
)


@dataclass
class SweepConfig:
    d: int = 2
    r_values: tuple[int, ...] = (1, 2, 3)
    degrees: tuple[int, ...] = (1, 2)
    trials: int = 3
    max_degree: int = 10
    seed: int = 7


def random_homogeneous(rng, d, degree):
    poly = {}
    for alpha in monomials(d, degree):
        if rng.uniform() < 0.6:
            poly[alpha] = complex(rng.integers(-3, 4), rng.integers(-3, 4))
    poly = {e: c for e, c in poly.items() if c}
    return poly or {monomials(d, degree)[0]: 1.0}


def describe(poly):
    return " + ".join(f"{c:g}*z^{e}" for e, c in poly.items())


def run(cfg: SweepConfig):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for r in cfg.r_values:
        for _ in range(cfg.trials):
            phis = [random_homogeneous(rng, cfg.d, int(rng.choice(cfg.degrees))) for _ in range(r)]
            t0 = time.perf_counter()
            try:
                spec = dshift_quotient_spec(cfg.d, r, phis, cfg.max_degree)
            except ValueError as exc:
                rows.append((r, phis, None, None, None, str(exc)))
                continue
            rep = stabilized_index(spec)
            rows.append((r, phis, rep, defect_rank(spec), time.perf_counter() - t0, ""))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=SweepConfig.d)
    ap.add_argument("--trials", type=int, default=SweepConfig.trials)
    ap.add_argument("--max-degree", type=int, default=SweepConfig.max_degree)
    ap.add_argument("--seed", type=int, default=SweepConfig.seed)
    a = ap.parse_args()
    cfg = SweepConfig(d=a.d, trials=a.trials, max_degree=a.max_degree, seed=a.seed)
    print("r\tindex\tK\tdefect\tstable\tseconds\tmultipliers")
    for r, phis, rep, drank, secs, err in run(cfg):
        if rep is None:
            print(f"{r}\t-\t-\t-\t-\t-\tskipped ({err})")
            continue
        print(f"{r}\t{rep.index}\t{rep.curvature}\t{drank}\t{rep.stabilized}\t{secs:.2f}\t"
              + "; ".join(map(describe, phis)))


if __name__ == "__main__":
    main()
