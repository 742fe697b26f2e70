"""Potential flow against the first-order gradient system: sup-distance
between Du and f at t_end for a sequence of resolutions.

    python scripts/oracle_convergence.py --N 64 128 256 512
"""

import argparse

import numpy as np

from lagflow.flow import StepperConfig, evolve, gmcf_evolve
from lagflow.grid import Grid, ScalarField, VectorField, gradient


def error(N, amp, t_end):
    g = Grid.uniform(1, N)
    u0 = ScalarField.from_function(g, lambda x: amp * np.sin(x), [[1.0]])
    cfg = StepperConfig(t_end=t_end, cfl_safety=0.9)
    u = evolve(u0, cfg)[-1]
    f = gmcf_evolve(VectorField.gradient_of(u0), cfg)[-1]
    return float(np.abs(gradient(u.field) - f.field.full_values()).max())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, nargs="+", default=[64, 128, 256, 512])
    ap.add_argument("--amp", type=float, default=0.1)
    ap.add_argument("--t-end", type=float, default=1.0)
    args = ap.parse_args()
    prev = None
    for N in args.N:
        e = error(N, args.amp, args.t_end)
        ratio = f"{prev / e:8.2f}" if prev else "       -"
        print(f"N={N:5d}  |Du - f|_inf = {e:.3e}  ratio {ratio}")
        prev = e


if __name__ == "__main__":
    main()
