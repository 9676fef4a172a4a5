"""Flexible-commitment search: planner state, agenda, step updates, and the search loop.

The planner state holds the current simulated state ``C``, the fringe goals
``G``, the selected-but-unapplied operators ``O``, the ancestor function
``anc`` and the cause function ``cause``, plus the head-plan of applied
operators.  States are treated as immutable values: every step returns a new
state and never touches its input, so a snapshot is just a reference.

Top-level goals carry the ancestor collection ``{frozenset()}``.  With that
convention the deactivation rule and the ancestor-propagation rule reproduce
the behaviour of a goal with no ancestors without special cases.
"""

from __future__ import annotations

import json
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from .domain import Grounder, apply_effects, satisfies_all

__all__ = [
    "SUB",
    "APP",
    "SUBGOAL",
    "APPLY",
    "PlannerState",
    "Agenda",
    "PhaseChoice",
    "SearchView",
    "SearchConfig",
    "SearchStats",
    "SearchResult",
    "Snapshot",
    "Retract",
    "Abort",
    "InvariantViolation",
    "TOP",
    "initialize",
    "is_terminal",
    "refresh_agenda",
    "choose_phase",
    "subgoal_step",
    "apply_step",
    "snapshot",
    "restore",
    "check_invariants",
    "goal_loop",
    "search",
    "trace_line",
]

SUB, APP = "sub", "app"
SUBGOAL, APPLY = "subgoal", "apply"

# Ancestor collection of a top-level goal: one empty ancestor set.
TOP = frozenset([frozenset()])
_EMPTY = frozenset()


class Retract(Exception):
    """Raised by a strategy to fail the current search node (an interactive "undo")."""


class Abort(Exception):
    """Raised by a strategy to stop the search altogether."""


class InvariantViolation(AssertionError):
    pass


class PlannerState:
    """One search node: (C, G, O, anc, cause) plus the head-plan.

    ``G`` maps each fringe goal to the tick at which it entered the fringe and
    ``O`` keeps selection order; both orders only feed deterministic
    tie-breaking.
    """

    __slots__ = ("C", "G", "O", "anc", "cause", "head", "tick")

    def __init__(self, C, G, O, anc, cause, head=(), tick=0):
        self.C = C
        self.G = G
        self.O = O
        self.anc = anc
        self.cause = cause
        self.head = head
        self.tick = tick

    def _fields(self):
        return (self.C, self.G, self.O, self.anc, self.cause, self.head, self.tick)

    def __eq__(self, other):
        if not isinstance(other, PlannerState):
            return NotImplemented
        if self._fields() != other._fields():
            return False
        # dict equality ignores order; the orders matter for tie-breaking
        return list(self.G) == list(other.G) and list(self.O) == list(other.O)

    __hash__ = None

    def signature(self):
        """(C, O, G) key used for state-loop detection."""
        return (self.C, frozenset(self.O), frozenset(self.G))

    def ancestors(self, goal):
        return self.anc.get(goal, _EMPTY)

    def causes(self, op):
        return self.cause.get(op, _EMPTY)

    def __repr__(self):
        return (
            f"PlannerState(C={sorted(map(str, self.C))}, G={[str(g) for g in self.G]}, "
            f"O={[str(o) for o in self.O]}, head={[str(o) for o in self.head]})"
        )


class Agenda(NamedTuple):
    pending: tuple  # active pending goals, in goal-selection order
    applicable: tuple  # active applicable operators, in selection order


class PhaseChoice(NamedTuple):
    first: str
    alternative: bool

    @property
    def order(self):
        if not self.alternative:
            return (self.first,)
        return (self.first, APPLY if self.first == SUBGOAL else SUBGOAL)


class SearchView(NamedTuple):
    """Read-only view handed to strategies at every decision."""

    state: PlannerState
    agenda: Agenda
    problem: object
    depth: int  # decisions committed on the current path


@dataclass
class SearchConfig:
    depth_init: int = 8
    depth_increment: int = 8
    node_budget: int = 0  # 0 = unbounded
    time_limit: Optional[float] = None  # seconds
    goal_loop_pruning: bool = True
    state_loop_pruning: bool = True
    independence_pruning: bool = True
    strategy: object = None
    trace_sink: Optional[Callable[[dict], None]] = None
    debug: bool = False

    def __post_init__(self):
        if self.depth_init < 1 or self.depth_increment < 1:
            raise ValueError("depth_init and depth_increment must be >= 1")
        if self.node_budget < 0:
            raise ValueError("node_budget must be >= 0")


@dataclass
class SearchStats:
    nodes: int = 0
    backtracks: int = 0
    subgoal_steps: int = 0
    apply_steps: int = 0
    deepening_rounds: int = 0
    peak_depth: int = 0
    prunes: int = 0


@dataclass
class SearchResult:
    outcome: str  # solved | exhausted | budget-exceeded | time-out | aborted
    plan: list = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)
    trace: Optional[list] = None
    message: str = ""

    @property
    def solved(self):
        return self.outcome == "solved"


# ---------------------------------------------------------------- state updates


def initialize(problem):
    G = {}
    tick = 0
    for g in problem.goal:
        if g not in G:
            G[g] = tick
            tick += 1
    anc = {g: TOP for g in G}
    return PlannerState(frozenset(problem.init), G, {}, anc, {}, (), tick)


def is_terminal(ps, problem):
    return satisfies_all(ps.C, problem.goal)


def _deactivated(C, anc_sets):
    for S in anc_sets:
        for g in S:
            if (g.atom in C) == g.positive:
                break
        else:
            return False
    return True


def refresh_agenda(ps, problem, ranks=None):
    """Active pending goals and active applicable operators of ``ps``.

    A goal satisfied in the current state stays pending when it also holds in
    the initial state.  A goal is dropped when every one of its ancestor sets
    already has a satisfied member; an applicable operator is dropped when
    each of its causes is satisfied or dropped.
    """
    C = ps.C
    init = problem.init
    anc = ps.anc
    if ranks is None:
        ranks = _goal_ranks(problem)
    n = len(ranks)
    pending = []
    for g, tick in ps.G.items():
        sat = (g.atom in C) == g.positive
        if sat and (g.atom in init) != g.positive:
            continue
        if _deactivated(C, anc.get(g, _EMPTY)):
            continue
        pending.append((ranks.get(g, n), tick, g))
    pending.sort(key=lambda t: (t[0], t[1]))
    applicable = []
    for op in ps.O:
        if not satisfies_all(C, op.pre):
            continue
        for g in ps.cause.get(op, _EMPTY):
            if (g.atom in C) != g.positive and not _deactivated(C, anc.get(g, _EMPTY)):
                applicable.append(op)
                break
    return Agenda(tuple(g for _, _, g in pending), tuple(applicable))


def _goal_ranks(problem):
    ranks = {}
    for i, g in enumerate(problem.goal):
        ranks.setdefault(g, i)
    return ranks


def choose_phase(agenda, toggle, C):
    """Pick subgoal/apply for this iteration; ``alternative`` marks a live backtrack point."""
    P, A = agenda
    if not P and not A:
        raise ValueError("nothing to subgoal on and nothing to apply")
    if not A:
        return PhaseChoice(SUBGOAL, False)
    if not P:
        return PhaseChoice(APPLY, False)
    if toggle == SUB and any((g.atom in C) != g.positive for g in P):
        return PhaseChoice(SUBGOAL, True)
    return PhaseChoice(APPLY, True)


def _achieves(op, goal):
    return goal.atom in (op.add if goal.positive else op.dele)


def subgoal_step(ps, goal, op):
    """Select ``op`` to achieve the pending goal ``goal``."""
    if goal not in ps.G:
        raise ValueError(f"{goal} is not a fringe goal")
    if not _achieves(op, goal):
        raise ValueError(f"{op} does not achieve {goal}")
    O = dict(ps.O)
    O.setdefault(op, None)
    G = dict(ps.G)
    del G[goal]
    tick = ps.tick
    for p in op.pre:
        if p not in G:
            G[p] = tick
            tick += 1
    cause = dict(ps.cause)
    cause[op] = cause.get(op, _EMPTY) | {goal}
    anc = dict(ps.anc)
    chains = frozenset(S | {goal} for S in ps.anc.get(goal, _EMPTY))
    for p in op.pre:
        anc[p] = anc.get(p, _EMPTY) | chains
    return PlannerState(ps.C, G, O, anc, cause, ps.head, tick)


def apply_step(ps, op):
    """Apply the selected, applicable operator ``op`` to the simulated state."""
    if op not in ps.O:
        raise ValueError(f"{op} is not a selected operator")
    if not satisfies_all(ps.C, op.pre):
        raise ValueError(f"{op} is not applicable")
    C = apply_effects(ps.C, op)
    O = dict(ps.O)
    del O[op]
    causes = ps.cause.get(op, _EMPTY)
    anc = dict(ps.anc)
    dropped = set()
    for p in op.pre:
        kept = frozenset(S for S in anc.get(p, _EMPTY) if not (S & causes))
        if kept:
            anc[p] = kept
        else:
            anc.pop(p, None)
            dropped.add(p)
    G = dict(ps.G)
    tick = ps.tick
    for g in causes:
        # a cause whose last ancestor chain was consumed earlier has no reader left
        if g not in G and g in anc:
            G[g] = tick
            tick += 1
    for p in dropped:
        G.pop(p, None)
    cause = dict(ps.cause)
    cause.pop(op, None)
    return PlannerState(C, G, O, anc, cause, ps.head + (op,), tick)


class Snapshot(NamedTuple):
    state: PlannerState


def snapshot(ps):
    # states are never mutated in place, so holding the reference is enough
    return Snapshot(ps)


def restore(snap):
    return snap.state


def check_invariants(ps, problem):
    """Raise InvariantViolation if the bookkeeping of ``ps`` is inconsistent."""
    top = set(problem.goal)
    caused = set()
    for op in ps.O:
        cs = ps.cause.get(op, _EMPTY)
        if not cs:
            raise InvariantViolation(f"selected operator {op} has no cause")
        caused |= cs
    for op in ps.cause:
        if op not in ps.O:
            raise InvariantViolation(f"cause entry for unselected operator {op}")
    for g in ps.G:
        sets = ps.anc.get(g)
        if not sets:
            raise InvariantViolation(f"fringe goal {g} has no ancestor entry")
    for g, sets in ps.anc.items():
        if g not in ps.G and g not in caused:
            raise InvariantViolation(f"ancestor entry for {g}, which is neither fringe goal nor cause")
        if not sets:
            raise InvariantViolation(f"empty ancestor entry for {g}")
    for g in top:
        sets = ps.anc.get(g)
        if sets is not None and frozenset() not in sets:
            raise InvariantViolation(f"top-level goal {g} lost its empty ancestor set")
    # A precondition may leave the fringe while its operator stays selected:
    # applying another operator for the same goal consumes its chains.
    for op in ps.O:
        for p in op.pre:
            if p not in ps.G and p not in caused and p in ps.anc:
                raise InvariantViolation(f"precondition {p} of {op} is tracked but neither fringe goal nor cause")


def goal_loop(ps, goal, op):
    """True if selecting ``op`` for ``goal`` would re-pose ``goal`` or one of its ancestors."""
    looped = {goal}
    for S in ps.anc.get(goal, _EMPTY):
        looped |= S
    for p in op.pre:
        if p in looped and (p.atom in ps.C) != p.positive:
            return True
    return False


# ---------------------------------------------------------------- search


def trace_line(record):
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False)


class _Stop(Exception):
    def __init__(self, outcome, message=""):
        super().__init__(outcome)
        self.outcome = outcome
        self.message = message


class _Search:
    def __init__(self, domain, problem, config, grounder=None):
        from .strategies import Strategy, independence_partition

        self.problem = problem
        self.config = config
        self.strategy = config.strategy if config.strategy is not None else Strategy()
        self.grounder = grounder if grounder is not None else Grounder(domain, problem)
        self.partition = independence_partition
        self.ranks = _goal_ranks(problem)
        self.stats = SearchStats()
        self.sink = config.trace_sink
        self.events = [] if self.sink is not None else None
        self.seq = 0
        self.bound = config.depth_init
        self.cutoff = False
        self.cutoffs = 0
        self.path = set()
        self.deadline = None
        if config.time_limit is not None:
            self.deadline = time.perf_counter() + config.time_limit

    def emit(self, event, **payload):
        if self.sink is None:
            return
        record = {"seq": self.seq, "event": event, "payload": payload}
        self.seq += 1
        self.events.append(record)
        self.sink(record)

    def _count_node(self, depth):
        st = self.stats
        budget = self.config.node_budget
        if budget and st.nodes >= budget:
            raise _Stop("budget-exceeded")
        if self.deadline is not None and (st.nodes & 63) == 0 and time.perf_counter() > self.deadline:
            raise _Stop("time-out")
        st.nodes += 1
        if depth > st.peak_depth:
            st.peak_depth = depth

    def run(self):
        problem = self.problem
        root = initialize(problem)
        if is_terminal(root, problem):
            return SearchResult("solved", [], self.stats, self.events)
        limit = sys.getrecursionlimit()
        try:
            sys.setrecursionlimit(max(limit, 20000))
            while True:
                self.stats.deepening_rounds += 1
                self.cutoff = False
                self.emit("deepen", bound=self.bound)
                found = self._expand(root, 0)
                if found is not None:
                    return SearchResult("solved", list(found.head), self.stats, self.events)
                if not self.cutoff:
                    return SearchResult("exhausted", [], self.stats, self.events)
                self.bound += self.config.depth_increment
        except _Stop as stop:
            return SearchResult(stop.outcome, [], self.stats, self.events, stop.message)
        except Abort as exc:
            return SearchResult("aborted", [], self.stats, self.events, str(exc))
        finally:
            sys.setrecursionlimit(limit)

    def _expand(self, ps, depth):
        """Depth-first search below ``ps``; returns the solved state or None."""
        problem = self.problem
        if is_terminal(ps, problem):
            return ps
        agenda = refresh_agenda(ps, problem, self.ranks)
        if not agenda.pending and not agenda.applicable:
            return None
        if depth >= self.bound:
            self.cutoff = True
            self.cutoffs += 1
            return None
        view = SearchView(ps, agenda, problem, depth)
        sig = None
        if self.config.state_loop_pruning:
            sig = ps.signature()
            self.path.add(sig)
        try:
            toggle = self.strategy.toggle(view)
            self.emit("toggle", value=toggle)
            choice = choose_phase(agenda, toggle, ps.C)
            for phase in choice.order:
                self.emit("phase", phase=phase, alternative=choice.alternative)
                if phase == SUBGOAL:
                    found = self._subgoal(view)
                else:
                    found = self._apply(view)
                if found is not None:
                    return found
            return None
        except Retract:
            return None
        finally:
            if sig is not None:
                self.path.discard(sig)

    def _backtrack(self, depth, op, cutoffs_before):
        # a subtree cut short by the depth bound is retried next round, not refuted
        cut = self.cutoffs != cutoffs_before
        if not cut:
            self.stats.backtracks += 1
        self.emit("backtrack", depth=depth, op=str(op), cutoff=cut)

    def _subgoal(self, view):
        ps, depth = view.state, view.depth
        cfg = self.config
        remaining = list(view.agenda.pending)
        while remaining:
            goal = self.strategy.select_goal(view, tuple(remaining))
            candidates = self.grounder.relevant(goal)
            if cfg.goal_loop_pruning and candidates:
                kept = []
                for op in candidates:
                    if goal_loop(ps, goal, op):
                        self.stats.prunes += 1
                        self.emit("prune", kind="goal-loop", goal=str(goal), op=str(op))
                    else:
                        kept.append(op)
                candidates = tuple(kept)
            if candidates:
                break
            remaining.remove(goal)
        else:
            return None
        self.emit("subgoal", goal=str(goal), depth=depth)
        for op in self.strategy.order_relevant(view, goal, candidates):
            child = subgoal_step(ps, goal, op)
            self._count_node(depth + 1)
            self.stats.subgoal_steps += 1
            self.emit("select-op", goal=str(goal), op=str(op), depth=depth)
            if cfg.debug:
                check_invariants(child, self.problem)
            before = self.cutoffs
            found = self._expand(child, depth + 1)
            if found is not None:
                return found
            self._backtrack(depth, op, before)
        return None

    def _apply(self, view):
        ps, depth = view.state, view.depth
        cfg = self.config
        candidates = view.agenda.applicable
        allowed = None
        for op in self.strategy.order_applicable(view, candidates):
            if allowed is None and cfg.independence_pruning and len(candidates) > 1:
                for cls in self.partition(view, candidates):
                    if op in cls:
                        allowed = set(cls)
                        break
            if allowed is not None and op not in allowed:
                continue
            child = apply_step(ps, op)
            if cfg.state_loop_pruning and child.signature() in self.path:
                self.stats.prunes += 1
                self.emit("prune", kind="state-loop", op=str(op))
                continue
            self._count_node(depth + 1)
            self.stats.apply_steps += 1
            self.emit("apply", op=str(op), depth=depth)
            if cfg.debug:
                check_invariants(child, self.problem)
            before = self.cutoffs
            found = self._expand(child, depth + 1)
            if found is not None:
                return found
            self._backtrack(depth, op, before)
        return None


def search(domain, problem, config=None, grounder=None):
    """Run the flexible-commitment search on ``problem``.

    Normal failure is reported through ``SearchResult.outcome``; nothing is
    raised for an unsolvable or over-budget problem.
    """
    if config is None:
        config = SearchConfig()
    return _Search(domain, problem, config, grounder).run()
