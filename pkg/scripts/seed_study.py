#!/usr/bin/env python3
"""Stochastic-solver seed sweep: how sensitive is a benchmark to the RNG?

Usage: python scripts/seed_study.py benchmarks/integers/max2.sl --seeds 10
"""

import argparse

from syguskit.cegis import Solved
from syguskit.frontend import load_problem, print_solution
from syguskit.stochastic import StochConfig, solve_stochastic


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("file")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--budget", type=float, default=60.0)
    ap.add_argument("--beta", type=float, default=0.5)
    args = ap.parse_args()

    problem = load_problem(args.file)
    solved = 0
    for seed in range(args.seeds):
        out = solve_stochastic(problem, StochConfig(
            seed=seed, budget_s=args.budget, beta=args.beta))
        if isinstance(out, Solved):
            solved += 1
            body = print_solution(out.solution).strip()
            print(f"seed {seed:3d}: solved in {out.elapsed_s:6.2f}s "
                  f"size {out.total_size:3d}  {body}")
        else:
            print(f"seed {seed:3d}: {type(out).__name__}")
    print(f"\n{solved}/{args.seeds} seeds solved")


if __name__ == "__main__":
    main()
