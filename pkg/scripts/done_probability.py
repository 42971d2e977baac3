"""Long-time success of the bare Feynman walk, with and without idle padding.

Compares the time-averaged end-of-clock probability against its exact
infinite-time limit, then the 'computation done' weight once A identity
steps are appended.
"""
from __future__ import annotations

import argparse
from fractions import Fraction

from clockforge.feynman import GateSequence, cesaro_limit, cesaro_success
from clockforge.idling import IdlingSpec, done_overlap


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", default="4,8,16,32,64")
    ap.add_argument("--t-max", type=float, default=20000.0)
    args = ap.parse_args()
    print("N,limit,time_average,3/(2(N+2)),padding,done_limit,idling_overlap")
    for n in (int(x) for x in args.n.split(",")):
        circuit = GateSequence.identity(1, n)
        lim = cesaro_limit(circuit, [0])
        avg = cesaro_success(circuit, [0], args.t_max, int(args.t_max) + 1)
        a = next(a for a in range(4 * n) if Fraction(1 + a, n + 1 + a) >= Fraction(3, 4))
        done = cesaro_limit(circuit, [0], padding=a, from_step=n)
        overlap = done_overlap(IdlingSpec.with_half_done(n))
        print(f"{n},{lim:.6f},{avg:.6f},{1.5 / (n + 2):.6f},{a},{done:.6f},{overlap}", flush=True)


if __name__ == "__main__":
    main()
