#!/usr/bin/env python3
"""Tabulate the endpoint-embedding ratio for all three rho families.

The divergent families (singular log log trace, with and without the
frequency drift) should grow without bound; the Gaussian control family
should stay flat.  Prints the ratio table and the growth verdicts.
"""

import argparse

from schrodlab.counterexample import (
    build_dispersion_profile,
    build_loglog_trace,
    embedding_ratio_sweep,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rho", type=float, nargs="+",
                    default=[4, 16, 64, 256, 1024, 4096])
    args = ap.parse_args()

    trace = build_loglog_trace()
    profile = build_dispersion_profile()

    results = {}
    for family in ("shifted", "unscaled", "control"):
        tr = None if family == "control" else trace
        report = embedding_ratio_sweep(args.rho, family, tr, profile)
        results[family] = [s["ratio"] for s in report.samples]

    header = f"{'rho':>8}" + "".join(f"{f:>12}" for f in results)
    print(header)
    for k, rho in enumerate(args.rho):
        print(f"{rho:>8.0f}" + "".join(f"{results[f][k]:>12.5f}" for f in results))

    for family, ratios in results.items():
        growth = ratios[-1] / ratios[0]
        monotone = all(b > a for a, b in zip(ratios, ratios[1:]))
        print(f"{family}: growth x{growth:.3f}, strictly increasing: {monotone}")


if __name__ == "__main__":
    main()
