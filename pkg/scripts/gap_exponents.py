"""Finite-size gap exponents for every clock family, over two size windows.

The small window matches the test suite; the large window shows where the
fitted slope is heading.  Output: family, sizes, slope, r^2.
"""
from __future__ import annotations

import argparse
from math import ceil, log2

from clockforge.idling import IdlingSpec, legal_gap
from clockforge.kitaev import no_case_bound, rotation_verifier
from clockforge.scaling import fit_exponent
from clockforge.tuning import sector_spectrum_study, v_from_rule
from clockforge.walk import WalkSpec, analytic_spectrum

FAMILIES = {
    "laplacian": (lambda n: analytic_spectrum(WalkSpec(n, 1, 1)).gap,
                  [(16, 32, 64, 128), (256, 512, 1024, 2048)]),
    "kitaev_no_case": (lambda n: no_case_bound(rotation_verifier(n, 1 / n ** 2)),
                       [(8, 16, 32, 64), (64, 128, 256, 512)]),
    "idling_log_c": (lambda n: legal_gap(IdlingSpec(n, ceil(log2(n)))),
                     [(8, 16, 32, 64), (64, 128, 256, 512)]),
    "idling_one_extra": (lambda n: legal_gap(IdlingSpec(n, 1)),
                         [(8, 16, 32, 64), (128, 256, 512, 1024)]),
    "tuned_cubic": (lambda n: sector_spectrum_study(n, v_from_rule("cubic", n), with_bounds=False).gap,
                    [(8, 10, 12), (14, 16, 18)]),
    "tuned_threehalves": (lambda n: sector_spectrum_study(n, v_from_rule("threehalves", n),
                                                          with_bounds=False).gap,
                          [(8, 10, 12), (14, 16, 18)]),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("families", nargs="*", help=f"subset of {', '.join(FAMILIES)}")
    args = ap.parse_args()
    unknown = set(args.families) - set(FAMILIES)
    if unknown:
        ap.error(f"unknown families {sorted(unknown)}")
    print("family,sizes,slope,r2")
    for name in args.families or FAMILIES:
        gap, windows = FAMILIES[name]
        for ns in windows:
            slope, _, r2 = fit_exponent([(n, gap(n)) for n in ns])
            print(f"{name},{'/'.join(map(str, ns))},{slope:.4f},{r2:.6f}", flush=True)


if __name__ == "__main__":
    main()
