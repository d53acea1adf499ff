#!/usr/bin/env python3
"""Print Lyapunov spectra and dimension estimates for the built-in systems.

Usage: python scripts/spectra_table.py [--steps N] [--seed S]
"""
import argparse

import numpy as np

from srblab import maps, measure, tangent
from srblab.errors import HyperbolicityError, OrbitEscapeError

SYSTEMS = [("cat_translate", 0.1), ("cat_shear", 0.25), ("henon", 1.4),
           ("standard_map", 6.0), ("coupled_henon", 1.4)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'system':<15}{'alpha':>7}  exponents / d_s / Kaplan-Yorke")
    for name, alpha in SYSTEMS:
        fam = maps.get_family(name)
        sampler = measure.default_sampler(fam)
        for _ in range(50):
            try:
                x0 = maps.iterate(fam, alpha, sampler.draw(rng, 1)[0],
                                  2000)[-1]
                orbit = maps.iterate(fam, alpha, x0, args.steps)
                break
            except OrbitEscapeError:
                continue
        else:
            print(f"{name:<15}{alpha:>7.2f}  no surviving orbit found")
            continue
        coc = tangent.TangentCocycle.from_orbit(fam, alpha, orbit)
        spec = tangent.benettin_spectrum(coc, reorth_interval=8)
        lams = "  ".join(f"{v:+.4f}" for v in spec.all_exponents)
        try:
            dims = measure.dimension_estimates(spec)
            extra = f"d_s={dims.d_s:.3f} ({dims.method}), KY={dims.kaplan_yorke:.3f}"
        except HyperbolicityError:
            extra = "non-hyperbolic"
        print(f"{name:<15}{alpha:>7.2f}  [{lams}]  {extra}")


if __name__ == "__main__":
    main()
