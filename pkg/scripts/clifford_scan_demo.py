#!/usr/bin/env python3
"""Scan sigma_min(D - R(lambda)) for a random pair and compare minima with the Taylor spectrum.

Writes a TSV table suitable for plotting.  The relation between the zero set
of the scan and the joint spectrum is exploratory; this script only reports
what it sees.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from diraclab.dirac import assemble_dirac
from diraclab.samples import triangularizable_tuple
from diraclab.spectral import clifford_scan, taylor_spectrum


@dataclass
class ScanConfig:
    n: int = 3
    d: int = 1
    steps: int = 81
    margin: float = 0.5
    workers: int = 4
    seed: int = 11
    out: str = "scan.tsv"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, val in vars(ScanConfig()).items():
        ap.add_argument(f"--{name}", type=type(val), default=val)
    cfg = ScanConfig(**vars(ap.parse_args()))
    if cfg.d > 2:
        raise SystemExit("grid scans need d <= 2")

    t, joint = triangularizable_tuple(np.random.default_rng(cfg.seed), cfg.n, cfg.d)
    spec = taylor_spectrum(t)
    pts = np.array(joint)
    grid = []
    for k in range(cfg.d):
        for part in (pts[:, k].real, pts[:, k].imag):
            grid.append((part.min() - cfg.margin, part.max() + cfg.margin, cfg.steps))
    res = clifford_scan(assemble_dirac(t), grid=grid, workers=cfg.workers)
    with open(cfg.out, "w") as fh:
        fh.write(res.to_tsv())

    print(f"wrote {len(res.sigma_min)} rows to {cfg.out}")
    print("verified spectrum points and the scan value at the nearest grid point:")
    for lam in spec.verified:
        i = int(np.argmin(np.abs(res.points - lam).max(axis=1)))
        print(f"  {np.round(lam, 4)}  nearest grid sigma_min {res.sigma_min[i]:.3e}")
    i = int(np.argmin(res.sigma_min))
    print(f"global grid minimum {res.sigma_min[i]:.3e} at {np.round(res.points[i], 4)}")


if __name__ == "__main__":
    main()
