"""
Eager subgoaling against eager applying
========================================

Two benchmark families where each extreme toggle wins: in ``dms1`` the
operators must run in index order, which subgoaling-first discovers without
backtracking; in ``use-once`` every operator can serve any goal once, which
applying-first handles without backtracking.  A small sweep is enough to
see both effects.
"""

import sys

from flecs.benchmarks import SuiteSpec, aggregate, run_suite
from flecs.engine import SearchConfig
from flecs.strategies import Strategy

per_point = int(sys.argv[1]) if len(sys.argv) > 1 else 3

# Plain depth-first search: iterative deepening from a small bound would
# re-expand the shallow trees and hide the difference between strategies.
config = SearchConfig(depth_init=10_000, node_budget=20_000)
strategies = {"saba": Strategy("saba"), "savta": Strategy("savta")}

for spec in (
    SuiteSpec("dms1", m=15, goals=range(1, 9), per_point=per_point),
    SuiteSpec("use-once", m=8, goals=range(1, 5), per_point=per_point),
):
    rows = aggregate(run_suite(spec, strategies, config))
    print(f"\n{spec.family} (m={spec.m}, {per_point} problems per size, budget {config.node_budget} nodes)")
    print(f"{'goals':>5} {'strategy':>8} {'solved':>7} {'mean nodes':>11} {'mean backtracks':>16}")
    for r in rows:
        print(
            f"{r['size']:>5} {r['strategy']:>8} {r['solved']:>4}/{r['runs']:<2} "
            f"{r['mean_nodes']:>11.1f} {r['mean_backtracks']:>16.1f}"
        )
