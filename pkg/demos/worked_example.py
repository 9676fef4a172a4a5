"""
The four-operator worked example, one decision at a time
=========================================================

Drives the step functions by hand and prints the agenda, causes and
ancestor sets after every decision, then relaxes the final plan into the
orderings it actually needs.
"""

from flecs.domain import Grounder, Literal
from flecs.engine import apply_step, initialize, is_terminal, refresh_agenda, subgoal_step
from flecs.fixture import fixture_domain, fixture_problem
from flecs.oracle import to_partial_order


def fmt(xs):
    return "{" + ", ".join(map(str, xs)) + "}"


def show(ps, problem, title):
    agenda = refresh_agenda(ps, problem)
    print(f"-- {title}")
    print("   C    =", fmt(sorted(map(str, ps.C))))
    print("   P    =", fmt(agenda.pending))
    print("   A    =", fmt(agenda.applicable))
    for op, cs in ps.cause.items():
        print(f"   c({op}) = {fmt(cs)}")
    for goal, sets in ps.anc.items():
        shown = ", ".join(fmt(s) for s in sorted(sets, key=lambda s: sorted(map(str, s))))
        print(f"   a{goal} = {{{shown}}}")
    print("   head =", [str(o) for o in ps.head])


domain = fixture_domain()
problem = fixture_problem(domain)
grounder = Grounder(domain, problem)
op = {f"o{i}": grounder.operator(f"o{i}", ()) for i in range(1, 5)}
goal = {i: Literal.of(f"g{i}") for i in range(1, 8)}

ps = initialize(problem)
show(ps, problem, "initial situation")

# Delay every ordering decision while subgoaling on g1..g5.  Choosing o4 for
# g5 re-uses an operator already selected for g4, which merges its causes.
for g, o in [(1, "o1"), (2, "o2"), (3, "o3"), (4, "o4"), (5, "o4")]:
    ps = subgoal_step(ps, goal[g], op[o])
    show(ps, problem, f"subgoal on g{g} with {o}")

# Switch to eager commitment: apply o4, then o2 (which also makes g1 true and
# so deactivates g6), then o3.
for o in ("o4", "o2", "o3"):
    ps = apply_step(ps, op[o])
    show(ps, problem, f"apply {o}")

print()
print("terminal:", is_terminal(ps, problem))
pop = to_partial_order(problem, list(ps.head))
print("plan:", ", ".join(map(str, ps.head)))
print("partial order:", pop.render())
