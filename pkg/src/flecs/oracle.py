"""Independent checks: plan validation, blind breadth-first solving, partial-order extraction.

Nothing here uses the search engine; only effect application and literal
satisfaction are shared with it.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .domain import Grounder, apply_effects, satisfies, satisfies_all

__all__ = [
    "ValidationReport",
    "validate_plan",
    "OracleBudgetExceeded",
    "brute_force_solve",
    "PartialOrderPlan",
    "to_partial_order",
    "linear_extensions",
]


@dataclass
class ValidationReport:
    valid: bool
    final_state: frozenset
    failing_step: Optional[int] = None
    missing: Optional[object] = None  # unsatisfied precondition literal at failing_step
    unmet_goals: tuple = ()

    def describe(self):
        if self.valid:
            return "valid"
        if self.failing_step is not None:
            return f"invalid: step {self.failing_step + 1} needs {self.missing}"
        return "invalid: goals not satisfied: " + ", ".join(map(str, self.unmet_goals))


def validate_plan(problem, plan):
    state = frozenset(problem.init)
    for i, op in enumerate(plan):
        for p in op.pre:
            if not satisfies(state, p):
                return ValidationReport(False, state, i, p)
        state = apply_effects(state, op)
    unmet = tuple(g for g in problem.goal if not satisfies(state, g))
    return ValidationReport(not unmet, state, unmet_goals=unmet)


class OracleBudgetExceeded(RuntimeError):
    """The breadth-first oracle ran out of its state budget before deciding."""


def brute_force_solve(domain, problem, max_length, budget=1_000_000):
    """Shortest plan of length <= ``max_length`` by breadth-first search, or None.

    Raises OracleBudgetExceeded when more than ``budget`` states would be
    generated; that is distinct from "no plan exists".
    """
    ops = Grounder(domain, problem).all_operators()
    start = frozenset(problem.init)
    goal = problem.goal
    if satisfies_all(start, goal):
        return []
    parent = {start: None}
    frontier = deque([(start, 0)])
    generated = 1
    while frontier:
        state, depth = frontier.popleft()
        if depth >= max_length:
            continue
        for op in ops:
            if not satisfies_all(state, op.pre):
                continue
            nxt = apply_effects(state, op)
            if nxt in parent:
                continue
            parent[nxt] = (state, op)
            if satisfies_all(nxt, goal):
                plan = []
                cur = nxt
                while parent[cur] is not None:
                    prev, step = parent[cur]
                    plan.append(step)
                    cur = prev
                return plan[::-1]
            generated += 1
            if generated > budget:
                raise OracleBudgetExceeded(f"more than {budget} states")
            frontier.append((nxt, depth + 1))
    return None


@dataclass
class PartialOrderPlan:
    """Plan steps (by position in the source plan) and the ordering edges between them."""

    steps: tuple
    orderings: frozenset  # transitive reduction, pairs (i, j): step i before step j
    closure: frozenset = field(default=frozenset())

    def before(self, i, j):
        return (i, j) in self.closure

    def render(self):
        """Layered rendering: steps with no remaining predecessor grouped in braces."""
        preds = {j: {i for i, k in self.closure if k == j} for j in range(len(self.steps))}
        done, layers = set(), []
        while len(done) < len(self.steps):
            layer = [j for j in range(len(self.steps)) if j not in done and preds[j] <= done]
            layers.append(layer)
            done.update(layer)
        parts = []
        for layer in layers:
            names = [str(self.steps[j]) for j in layer]
            parts.append(names[0] if len(names) == 1 else "{" + ", ".join(names) + "}")
        return ", ".join(parts)


def _conflict_edges(problem, plan):
    edges = set()
    # last step that made each atom true / false
    made_true, made_false = {}, {}
    for j, op in enumerate(plan):
        for p in op.pre:
            src = (made_true if p.positive else made_false).get(p.atom)
            if src is not None:
                edges.add((src, j))
        for i in range(j):
            prev = plan[i]
            pos_pre = {p.atom for p in prev.pre if p.positive}
            neg_pre = {p.atom for p in prev.pre if not p.positive}
            if op.dele & pos_pre or op.add & neg_pre:
                edges.add((i, j))
            if prev.dele & op.add or prev.add & op.dele:
                edges.add((i, j))
        for a in op.add - op.dele:
            made_true[a] = j
        for a in op.dele:
            made_false[a] = j
    return edges


def _closure(n, edges):
    reach = [set() for _ in range(n)]
    for i, j in edges:
        reach[i].add(j)
    # edges always point forward in plan order, so one backward sweep suffices
    for i in range(n - 1, -1, -1):
        for j in list(reach[i]):
            reach[i] |= reach[j]
    return {(i, j) for i in range(n) for j in reach[i]}


def to_partial_order(problem, plan):
    """Relax a valid total-order plan to the orderings its causal links and conflicts require."""
    report = validate_plan(problem, plan)
    if not report.valid:
        raise ValueError(f"cannot relax an invalid plan ({report.describe()})")
    n = len(plan)
    closure = _closure(n, _conflict_edges(problem, plan))
    reduced = {
        (i, j)
        for i, j in closure
        if not any((i, k) in closure and (k, j) in closure for k in range(i + 1, j))
    }
    return PartialOrderPlan(tuple(plan), frozenset(reduced), frozenset(closure))


def linear_extensions(pop):
    """Every total order of ``pop.steps`` consistent with its orderings, as operator lists."""
    n = len(pop.steps)
    for perm in itertools.permutations(range(n)):
        pos = {s: k for k, s in enumerate(perm)}
        if all(pos[i] < pos[j] for i, j in pop.orderings):
            yield [pop.steps[k] for k in perm]
