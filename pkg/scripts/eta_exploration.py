"""Exploratory: Hessian range along square-wave runs for pinching levels
beyond eta = 0.05. Reports observed ranges only; nothing is asserted.

    python scripts/eta_exploration.py --a 1.05 1.2 1.5 1.7 --N 256
"""

import argparse
import math

from lagflow.flow import FlowAbort, StepperConfig, evolve
from lagflow.grid import Grid
from lagflow.initial import c11_squarewave
from lagflow.monitors import hessian_range, max_principle_audit, records


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--a", type=float, nargs="+", default=[1.05, 1.2, 1.5, 1.7])
    ap.add_argument("--N", type=int, default=256)
    ap.add_argument("--t-end", type=float, default=5.0)
    args = ap.parse_args()
    cfg = StepperConfig(t_end=args.t_end, cadence=0.05, sample_times=[0.01], cfl_safety=0.9)
    print(f"sqrt(3) = {math.sqrt(3):.6f}")
    for a in args.a:
        try:
            rows = records(evolve(c11_squarewave(Grid.uniform(1, args.N), a), cfg))
        except FlowAbort as exc:
            print(f"a={a:.3f}: aborted ({exc})")
            continue
        lo, hi = hessian_range(rows)
        lo1, hi1 = hessian_range(rows, 0.01)
        worst = max_principle_audit(rows, 0.01).worst()
        print(f"a={a:.3f} eta={a - 1:.3f}: range [{lo:.5f}, {hi:.5f}], after t=0.01 [{lo1:.5f}, {hi1:.5f}], audit {worst:.2e}")


if __name__ == "__main__":
    main()
