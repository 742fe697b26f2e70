"""Observed decay constant and time-Holder ratio for square-wave data across
resolutions (the stability behind acceptance criteria 6 and 7).

    python scripts/refinement_study.py --a 1.05 --N 64 128 256 512
"""

import argparse

from lagflow.flow import StepperConfig, evolve
from lagflow.grid import Grid
from lagflow.initial import c11_squarewave
from lagflow.monitors import decay_audit, hessian_range, holder_audit, records


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--a", type=float, default=1.05)
    ap.add_argument("--N", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--t-end", type=float, default=5.0)
    args = ap.parse_args()

    cfg = StepperConfig(t_end=args.t_end, cadence=0.05, sample_times=[0.01, 0.02, 0.03], cfl_safety=0.9)
    print(f"{'N':>5} {'C3':>12} {'holder':>12} {'A const':>12} {'lam_min':>12} {'lam_max':>12}")
    for N in args.N:
        traj = evolve(c11_squarewave(Grid.uniform(1, N), args.a), cfg)
        rows = records(traj)
        c3 = decay_audit(rows, 0.01).constant
        hc = holder_audit(traj, 0.25)
        a_const = max(r.scaled_a for r in rows if r.t >= 0.01)
        lo, hi = hessian_range(rows, 0.01)
        print(f"{N:>5} {c3:>12.6f} {hc:>12.6f} {a_const:>12.6f} {lo:>12.7f} {hi:>12.7f}")


if __name__ == "__main__":
    main()
