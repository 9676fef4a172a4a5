"""
Painting walls with rollers that stay dirty
===========================================

Five walls, two rollers, two colours.  Filling a roller too early locks it
to one colour before every wall that needs that colour has been designated,
so neither extreme toggle policy finds the plan within a generous budget,
while the shipped choice script, which mixes subgoaling and applying,
solves it in a couple dozen nodes.
"""

from flecs.benchmarks import ROLLER_SCRIPT_BUDGET, ROLLER_SCRIPT_DEPTH, data_path, five_wall_rollers
from flecs.engine import SearchConfig, search
from flecs.oracle import to_partial_order
from flecs.strategies import Strategy, strategy_from_selector

domain, problem = five_wall_rollers()
cap = 100 * ROLLER_SCRIPT_BUDGET

for name in ("saba", "savta"):
    res = search(domain, problem, SearchConfig(depth_init=ROLLER_SCRIPT_DEPTH, node_budget=cap, strategy=Strategy(name)))
    print(f"{name:>6}: {res.outcome} after {res.stats.nodes} nodes, {res.stats.backtracks} backtracks")

# The script answers every prompt in order; it must fit in one deepening
# round, hence the large first depth bound.
script = strategy_from_selector(f"script:{data_path('rollers-5w-2r.script')}")
res = search(
    domain, problem, SearchConfig(depth_init=ROLLER_SCRIPT_DEPTH, node_budget=ROLLER_SCRIPT_BUDGET, strategy=script)
)
print(f"script: {res.outcome} after {res.stats.nodes} nodes, {res.stats.backtracks} backtracks\n")
for i, op in enumerate(res.plan, 1):
    print(f"{i:>3}. {op}")
print("\npartial order:", to_partial_order(problem, res.plan).render())
