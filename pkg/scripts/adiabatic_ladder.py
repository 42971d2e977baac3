"""Final fidelity of the three-section schedule as the middle section lengthens."""
from __future__ import annotations

import argparse

from clockforge.adiabatic import ScheduleSpec, integrate_schedule, slowdown_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--t1", type=float, default=60.0)
    ap.add_argument("--t2", default="25,50,100,200,400,800")
    ap.add_argument("--slowdown", action="store_true", help="slow the middle section near s = 1/2")
    args = ap.parse_args()
    table = slowdown_table() if args.slowdown else None
    print("N,T1,T2,fidelity,norm_error")
    for t2 in (float(x) for x in args.t2.split(",")):
        res = integrate_schedule(ScheduleSpec(args.n, args.t1, t2, table))
        print(f"{args.n},{args.t1:g},{t2:g},{res.fidelity:.8f},{res.norm_error:.1e}", flush=True)


if __name__ == "__main__":
    main()
