"""Choice policies for the four decision sites of the search.

* toggle (prefer subgoaling or applying on this iteration),
* goal selection (not a backtrack point),
* ordering of the operators relevant to the chosen goal,
* ordering of the applicable operators, plus the independence partition
  used to skip redundant interleavings.

Orderings only decide what is tried first; the search still backtracks over
every alternative.  Every policy reads the search view and never mutates it.
"""

from __future__ import annotations

from pathlib import Path

from .engine import APP, SUB, Abort, Retract

__all__ = [
    "SUB",
    "APP",
    "saba",
    "savta",
    "ToggleSchedule",
    "Strategy",
    "decide_toggle",
    "select_goal",
    "conspiracy_score",
    "rank_relevant",
    "threat_score",
    "rank_applicable",
    "interacts",
    "independence_partition",
    "PreferOperators",
    "PreferGoals",
    "InteractiveStrategy",
    "ScriptResponder",
    "load_schedule",
    "load_script",
    "strategy_from_selector",
]


def saba(view):
    """Subgoal Always Before Applying: always prefer subgoaling."""
    return SUB


def savta(view):
    """Subgoal After eVery Try to Apply: always prefer applying."""
    return APP


class ToggleSchedule:
    """Scripted toggle values, one per loop iteration; the last value persists.

    The cursor is the number of decisions committed on the current search
    path, so the schedule stays aligned with the path after backtracking.
    """

    def __init__(self, values):
        values = [v.strip().lower() for v in values]
        if not values:
            raise ValueError("a toggle schedule needs at least one value")
        for v in values:
            if v not in (SUB, APP):
                raise ValueError(f"toggle values are 'sub' or 'app', got {v!r}")
        self.values = tuple(values)

    def __call__(self, view):
        return self.at(view.depth)

    def at(self, index):
        return self.values[min(index, len(self.values) - 1)]

    def __repr__(self):
        return f"ToggleSchedule({list(self.values)})"


def _sat(C, lit):
    return (lit.atom in C) == lit.positive


def select_goal(view, pending):
    """First goal unsatisfied in the current state, else the first pending goal.

    ``pending`` arrives in goal-statement order, then fringe-entry order.
    """
    C = view.state.C
    for g in pending:
        if not _sat(C, g):
            return g
    return pending[0]


def conspiracy_score(view, op):
    """Preconditions of ``op`` still unsatisfied: a one-step estimate of the planning it needs."""
    C = view.state.C
    return sum(1 for p in op.pre if not _sat(C, p))


def rank_relevant(view, candidates):
    return sorted(
        candidates,
        key=lambda op: (conspiracy_score(view, op), len(op.pre), op.index, op.args),
    )


def threat_score(view, op):
    """Selected operators whose preconditions ``op`` deletes, plus those deleting what ``op`` adds."""
    score = 0
    for other in view.state.O:
        if other == op:
            continue
        if op.dele and not op.dele.isdisjoint(other.pos_pre):
            score += 1
        if other.dele and not other.dele.isdisjoint(op.add):
            score += 1
    return score


def rank_applicable(view, candidates):
    return sorted(
        candidates,
        key=lambda op: (threat_score(view, op), op.index, op.args),
    )


def _ancestor_literals(state, op):
    out = set()
    for g in state.cause.get(op, ()):
        out.add(g.atom)
        for S in state.anc.get(g, ()):
            out.update(x.atom for x in S)
    return out


def interacts(view, a, b):
    """Conservative interaction test between two applicable operators."""
    if a.dele & (b.pos_pre | b.add) or b.dele & (a.pos_pre | a.add):
        return True
    state = view.state
    if a.dele & _ancestor_literals(state, b) or b.dele & _ancestor_literals(state, a):
        return True
    return False


def independence_partition(view, candidates):
    """Classes of the transitive closure of ``interacts``, each sorted, ordered by first member."""
    ops = sorted(set(candidates), key=lambda o: o.sort_key)
    parent = list(range(len(ops)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            if interacts(view, ops[i], ops[j]):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    classes = {}
    for i, op in enumerate(ops):
        classes.setdefault(find(i), []).append(op)
    return [classes[k] for k in sorted(classes)]


class PreferOperators:
    """Relevant-operator ranker that tries the named operators first, in the given order."""

    def __init__(self, names, fallback=rank_relevant):
        self.names = [str(n) for n in names]
        self.fallback = fallback

    def __call__(self, view, candidates):
        ranked = list(self.fallback(view, candidates))
        pos = {n: i for i, n in enumerate(self.names)}
        preferred = sorted((op for op in ranked if str(op) in pos), key=lambda op: pos[str(op)])
        return preferred + [op for op in ranked if str(op) not in pos]


class PreferGoals:
    """Goal policy picking the first pending goal that appears in ``goals``."""

    def __init__(self, goals, fallback=select_goal):
        self.goals = list(goals)
        self.fallback = fallback

    def __call__(self, view, pending):
        present = set(pending)
        for g in self.goals:
            if g in present:
                return g
        return self.fallback(view, pending)


class Strategy:
    """Bundle of the four choice policies."""

    def __init__(
        self,
        toggle=saba,
        goal_policy=select_goal,
        relevant_ranker=rank_relevant,
        applicable_ranker=rank_applicable,
        name=None,
    ):
        if isinstance(toggle, str):
            toggle = {"saba": saba, "savta": savta, SUB: saba, APP: savta}[toggle.lower()]
        elif isinstance(toggle, (list, tuple)):
            toggle = ToggleSchedule(toggle)
        self.toggle_policy = toggle
        self.goal_policy = goal_policy
        self.relevant_ranker = relevant_ranker
        self.applicable_ranker = applicable_ranker
        self.name = name or getattr(toggle, "__name__", type(toggle).__name__.lower())

    def toggle(self, view):
        return self.toggle_policy(view)

    def select_goal(self, view, pending):
        return self.goal_policy(view, pending)

    def order_relevant(self, view, goal, candidates):
        return self.relevant_ranker(view, candidates)

    def order_applicable(self, view, candidates):
        return self.applicable_ranker(view, candidates)

    def __repr__(self):
        return f"Strategy({self.name})"


def decide_toggle(strategy, view):
    return strategy.toggle(view)


# ---------------------------------------------------------------- interactive


class ScriptResponder:
    """Answers prompts from a recorded choice script, one line per prompt.

    Once the script runs out it returns None, which hands the remaining
    decisions to the fallback strategy.
    """

    def __init__(self, lines):
        self.lines = [
            ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")
        ]
        self.pos = 0

    def __call__(self, kind, view, options):
        if self.pos >= len(self.lines):
            return None
        line = self.lines[self.pos]
        self.pos += 1
        return line


class InteractiveStrategy(Strategy):
    """Strategy whose decisions come from a responder callback.

    ``responder(kind, view, options)`` is asked at every live subgoal/apply
    choice (kind ``"toggle"``) and at every operator choice (``"relevant"``
    or ``"applicable"``).  Accepted answers: ``sub``/``app``, an operator as
    ``name(args)`` or its 1-based position in ``options``, an empty line for
    the first option, ``undo`` (fail the current node), ``auto NAME`` (hand
    the rest to a named strategy) and ``quit``.  A ``None`` answer means
    ``auto`` with the fallback strategy.  Every answer is kept in
    ``answers``, with positions and blanks resolved to the chosen value, so
    the session can be replayed with ``ScriptResponder``.
    """

    def __init__(self, responder, fallback=None, out=None):
        self.fallback = fallback if fallback is not None else Strategy()
        super().__init__(
            toggle=self.fallback.toggle_policy,
            goal_policy=self.fallback.goal_policy,
            name="interactive",
        )
        self.responder = responder
        self.out = out
        self.answers = []
        self.auto = None
        self._shown = None
        self._shown_C = None

    # display ---------------------------------------------------------

    def _say(self, text):
        if self.out is not None:
            print(text, file=self.out)

    def show(self, view):
        if self.out is None or self._shown is view.state:
            return
        ps = view.state
        if self._shown_C is None:
            self._say("C = {" + ", ".join(sorted(map(str, ps.C))) + "}")
        else:
            added = sorted(map(str, ps.C - self._shown_C))
            removed = sorted(map(str, self._shown_C - ps.C))
            if added or removed:
                self._say(f"C +{{{', '.join(added)}}} -{{{', '.join(removed)}}}")
            else:
                self._say("C unchanged")
        self._say("P = {" + ", ".join(map(str, view.agenda.pending)) + "}")
        self._say("A = {" + ", ".join(map(str, view.agenda.applicable)) + "}")
        self._say("head = [" + ", ".join(map(str, ps.head)) + "]")
        self._shown = ps
        self._shown_C = ps.C

    # prompting -------------------------------------------------------

    def _ask(self, kind, view, options):
        self.show(view)
        answer = self.responder(kind, view, options)
        if answer is None:
            self._go_auto(None)
            return None
        answer = answer.strip()
        low = answer.lower()
        if low in ("quit", "undo") or low == "auto" or low.startswith("auto "):
            self.answers.append(answer)
        if low == "quit":
            raise Abort("quit")
        if low == "undo":
            raise Retract()
        if low == "auto" or low.startswith("auto "):
            self._go_auto(answer[4:].strip() or None)
            return None
        return answer

    def _go_auto(self, name):
        self.auto = strategy_from_selector(name) if name else self.fallback

    def toggle(self, view):
        if self.auto is not None:
            return self.auto.toggle(view)
        self.show(view)
        P, A = view.agenda
        if not (P and A):
            return self.fallback.toggle(view)
        answer = self._ask("toggle", view, [SUB, APP])
        if answer is None:
            return self.auto.toggle(view)
        value = self.fallback.toggle(view) if answer == "" else answer.lower()
        if value not in (SUB, APP):
            raise Abort(f"expected sub or app, got {answer!r}")
        # recorded in resolved form so a saved script replays the same choice
        self.answers.append(value)
        return value

    def select_goal(self, view, pending):
        if self.auto is not None:
            return self.auto.select_goal(view, pending)
        return self.fallback.select_goal(view, pending)

    def _choose(self, kind, view, ranked, auto_order):
        remaining = list(ranked)
        while remaining:
            if self.auto is not None:
                for op in auto_order(remaining):
                    yield op
                return
            answer = self._ask(kind, view, [str(o) for o in remaining])
            if answer is None:
                continue
            if answer == "":
                op = remaining[0]
            elif answer.isdigit() and 1 <= int(answer) <= len(remaining):
                op = remaining[int(answer) - 1]
            else:
                matches = [o for o in remaining if str(o) == answer]
                if not matches:
                    raise Abort(f"{answer!r} is not one of {[str(o) for o in remaining]}")
                op = matches[0]
            remaining.remove(op)
            self.answers.append(str(op))
            yield op

    def order_relevant(self, view, goal, candidates):
        ranked = self.fallback.order_relevant(view, goal, candidates)
        return self._choose(
            "relevant", view, ranked, lambda rest: self.auto.order_relevant(view, goal, rest)
        )

    def order_applicable(self, view, candidates):
        ranked = self.fallback.order_applicable(view, candidates)
        return self._choose(
            "applicable", view, ranked, lambda rest: self.auto.order_applicable(view, rest)
        )


# ---------------------------------------------------------------- files & selectors


def load_schedule(path):
    text = Path(path).read_text(encoding="utf-8")
    values = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    return ToggleSchedule([v for v in values if v])


def load_script(path):
    return Path(path).read_text(encoding="utf-8").splitlines()


def strategy_from_selector(selector, responder=None, out=None):
    """Build a strategy from ``saba``, ``savta``, ``schedule:PATH``, ``script:PATH`` or ``interactive``."""
    sel = selector.strip()
    low = sel.lower()
    if low in ("saba", "savta"):
        return Strategy(low, name=low)
    if low.startswith("schedule:"):
        return Strategy(load_schedule(sel.split(":", 1)[1]), name=sel)
    if low.startswith("script:"):
        lines = load_script(sel.split(":", 1)[1])
        return InteractiveStrategy(ScriptResponder(lines), out=out)
    if low == "interactive":
        if responder is None:
            raise ValueError("the interactive strategy needs a responder")
        return InteractiveStrategy(responder, out=out)
    raise ValueError(f"unknown strategy {selector!r}")
