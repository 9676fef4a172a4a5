"""Benchmark domain families, random problem generation, and the experiment runner.

Families:

``dms1``
    ``A_i``: pre ``{I_i}``, add ``{G_i}``, del ``{I_j | j < i}``.  Operators
    must run in ascending index order.
``use-once``
    ``A_i(g)``: pre ``{I_i}``, add ``{(G g)}``, del ``{I_i}``.  Any operator
    achieves any goal but each can run only once.
``rollers``
    wall painting with rollers that stay dirty once filled.
"""

from __future__ import annotations

import csv
import random
import statistics
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

from .domain import Atom, Domain, Literal, OperatorSchema, Problem, Grounder
from .engine import SearchConfig, search
from .oracle import validate_plan

__all__ = [
    "FAMILIES",
    "ROLLER_SCRIPT_BUDGET",
    "ROLLER_SCRIPT_DEPTH",
    "data_path",
    "gen_dms1",
    "painting_domain",
    "gen_use_once",
    "brushes_domain",
    "roller_domain",
    "gen_rollers",
    "five_wall_rollers",
    "gen_random_goals",
    "gen_tiny",
    "tiny_family",
    "SuiteSpec",
    "RunRecord",
    "run_suite",
    "aggregate",
    "write_runs_csv",
    "write_aggregate_csv",
    "RUN_FIELDS",
]

FAMILIES = ("dms1", "use-once", "rollers", "fixture")

# Node budget under which the shipped rollers-5w-2r choice script must solve
# (it needs 24 nodes); plain SABA and SAVTA are checked against 100 times this.
ROLLER_SCRIPT_BUDGET = 250
ROLLER_SCRIPT_DEPTH = 64


def data_path(name):
    """Path of a file shipped in the package data directory."""
    path = Path(__file__).parent / "data" / name
    if not path.exists():
        raise FileNotFoundError(f"no shipped data file {name!r}")
    return path


def _lit(pred, *args):
    return Literal(Atom(pred, tuple(args)), True)


def gen_dms1(m):
    """Zero-parameter operators A1..Am; Ai needs Ii, adds Gi and deletes every Ij with j < i."""
    if m < 1:
        raise ValueError("m must be >= 1")
    schemas = []
    for i in range(1, m + 1):
        schemas.append(
            OperatorSchema(
                name=f"A{i}",
                params=(),
                pre=(_lit(f"I{i}"),),
                add=(Atom(f"G{i}"),),
                dele=tuple(Atom(f"I{j}") for j in range(1, i)),
                index=i - 1,
            )
        )
    return Domain(f"dms1-{m}", (), tuple(schemas))


def painting_domain(colors=("white", "yellow", "green", "red", "brown", "black")):
    """Single-brush painting: colours listed light to dark; a darker paint spoils every lighter one."""
    schemas = []
    for i, c in enumerate(colors):
        schemas.append(
            OperatorSchema(
                name=f"paint-{c}",
                params=(("?obj", "object"),),
                pre=(_lit("usable", c),),
                add=(Atom(c, ("?obj",)),),
                dele=tuple(Atom("usable", (d,)) for d in colors[:i]),
                index=i,
            )
        )
    return Domain("painting", ("object", "color"), tuple(schemas))


def gen_use_once(n):
    """One-parameter operators A1(?g)..An(?g): need Ii, add (G ?g), delete Ii."""
    if n < 1:
        raise ValueError("n must be >= 1")
    schemas = []
    for i in range(1, n + 1):
        schemas.append(
            OperatorSchema(
                name=f"A{i}",
                params=(("?g", "goal"),),
                pre=(_lit(f"I{i}"),),
                add=(Atom("G", ("?g",)),),
                dele=(Atom(f"I{i}"),),
                index=i - 1,
            )
        )
    return Domain(f"use-once-{n}", ("goal",), tuple(schemas))


def brushes_domain(n=8):
    """Brushes that never come clean: each can paint once, any part, any colour."""
    schemas = []
    for i in range(1, n + 1):
        brush = f"brush{i}"
        schemas.append(
            OperatorSchema(
                name=f"paint-with-brush{i}",
                params=(("?parts", "part"), ("?color", "color")),
                pre=(_lit("unused", brush),),
                add=(Atom("painted", ("?parts", "?color")),),
                dele=(Atom("unused", (brush,)),),
                index=i - 1,
            )
        )
    return Domain("brushes", ("part", "color", "brush"), tuple(schemas))


def roller_domain():
    w, r, c = "?wall", "?roller", "?color"
    designate = OperatorSchema(
        name="designate-roller",
        params=((w, "wall"), (r, "roller"), (c, "color")),
        pre=(_lit("clean", r), _lit("needs-painting", w)),
        add=(Atom("ready", (w, r, c)), Atom("chosen", (r, c))),
        dele=(),
        index=0,
    )
    fill = OperatorSchema(
        name="fill-roller",
        params=((r, "roller"), (c, "color")),
        pre=(_lit("clean", r), _lit("chosen", r, c)),
        add=(Atom("filled-with-paint", (r, c)),),
        dele=(Atom("clean", (r,)),),
        index=1,
    )
    paint = OperatorSchema(
        name="paint-wall",
        params=((w, "wall"), (r, "roller"), (c, "color")),
        pre=(_lit("ready", w, r, c), _lit("filled-with-paint", r, c)),
        add=(Atom("painted", (w, c)),),
        dele=(Atom("ready", (w, r, c)), Atom("needs-painting", (w,))),
        index=2,
    )
    return Domain("rollers", ("wall", "roller", "color"), (designate, fill, paint))


def gen_rollers(walls, rollers, colors, name=None):
    """Roller domain and a problem painting each wall its colour.

    ``walls`` is a count or a list of names; ``rollers`` likewise;
    ``colors`` maps wall -> colour or lists colours in wall order.  More
    colours than rollers gives a legitimately unsolvable problem.
    """
    wall_names = [f"wall{chr(ord('A') + i)}" for i in range(walls)] if isinstance(walls, int) else list(walls)
    roller_names = [f"roller{i + 1}" for i in range(rollers)] if isinstance(rollers, int) else list(rollers)
    if not wall_names or not roller_names:
        raise ValueError("need at least one wall and one roller")
    if isinstance(colors, Mapping):
        color_of = {w: colors[w] for w in wall_names}
    else:
        color_of = dict(zip(wall_names, colors, strict=True))
    palette = list(dict.fromkeys(color_of.values()))
    objects = tuple(
        [(w, "wall") for w in wall_names]
        + [(r, "roller") for r in roller_names]
        + [(c, "color") for c in palette]
    )
    init = frozenset([Atom("needs-painting", (w,)) for w in wall_names] + [Atom("clean", (r,)) for r in roller_names])
    goal = tuple(_lit("painted", w, color_of[w]) for w in wall_names)
    problem = Problem(
        name or f"rollers-{len(wall_names)}w-{len(roller_names)}r",
        "rollers",
        objects,
        init,
        goal,
    )
    return roller_domain(), problem


def five_wall_rollers():
    """Five walls, two rollers: three walls red, two green."""
    return gen_rollers(5, 2, ["red", "red", "red", "green", "green"], name="rollers-5w-2r")


def gen_random_goals(family, m, k, seed):
    """Problem whose goal is a uniformly random k-subset of the m goals, in drawn order."""
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
    rng = random.Random(seed)
    chosen = rng.sample(range(1, m + 1), k)
    init = frozenset(Atom(f"I{i}") for i in range(1, m + 1))
    if family == "dms1":
        goal = tuple(_lit(f"G{i}") for i in chosen)
        objects = ()
    elif family == "use-once":
        goal = tuple(_lit("G", f"g{i}") for i in chosen)
        objects = tuple((f"g{i}", "goal") for i in range(1, m + 1))
    else:
        raise ValueError(f"random goals are defined for dms1 and use-once, not {family!r}")
    return Problem(f"{family}-{m}-k{k}-s{seed}", f"{family}-{m}", objects, init, goal)


# ---------------------------------------------------------------- tiny instances

_TINY_PREDICATES = (("p", 1), ("q", 1), ("r", 1), ("h", 0))


def gen_tiny(n_objects, n_schemas, n_goals, seed):
    """Small random STRIPS instance for differential testing against the oracle.

    Objects ``o1..on`` of one type; unary predicates ``p q r`` and a nullary
    ``h``; schemas with zero or one parameter, up to two preconditions, one or
    two adds and up to two deletes.  Goals are distinct positive atoms.
    """
    if not (1 <= n_objects and 1 <= n_schemas and 1 <= n_goals):
        raise ValueError("sizes must be >= 1")
    rng = random.Random(seed)
    objects = [f"o{i}" for i in range(1, n_objects + 1)]
    ground_atoms = [
        Atom(pred, (o,)) if arity else Atom(pred) for pred, arity in _TINY_PREDICATES for o in (objects if arity else [None])
    ]

    def template(var):
        pred, arity = rng.choice(_TINY_PREDICATES)
        if not arity:
            return Atom(pred)
        arg = var if var and rng.random() < 0.7 else rng.choice(objects)
        return Atom(pred, (arg,))

    schemas = []
    for i in range(n_schemas):
        var = "?x" if rng.random() < 0.6 else None
        pre = tuple(dict.fromkeys(Literal(template(var), True) for _ in range(rng.randint(0, 2))))
        add = tuple(dict.fromkeys(template(var) for _ in range(rng.randint(1, 2))))
        dele = tuple(dict.fromkeys(a for a in (template(var) for _ in range(rng.randint(0, 2))) if a not in add))
        schemas.append(
            OperatorSchema(
                name=f"s{i + 1}",
                params=((var, "obj"),) if var else (),
                pre=pre,
                add=add,
                dele=dele,
                index=i,
            )
        )
    domain = Domain(f"tiny-{seed}", ("obj",), tuple(schemas))
    init = frozenset(a for a in ground_atoms if rng.random() < 0.3)
    goal = tuple(_lit(a.predicate, *a.args) for a in rng.sample(ground_atoms, min(n_goals, len(ground_atoms))))
    problem = Problem(
        f"tiny-{n_objects}o{n_schemas}s{n_goals}g-{seed}",
        domain.name,
        tuple((o, "obj") for o in objects),
        init,
        goal,
    )
    return domain, problem


def tiny_family(per_cell=12, seed=0):
    """Every (objects <= 4, schemas <= 4, goals <= 3) size cell, ``per_cell`` seeded instances each."""
    for n_obj in range(1, 5):
        for n_sch in range(1, 5):
            for n_goal in range(1, 4):
                for j in range(per_cell):
                    s = _derive_seed(seed, n_obj * 100 + n_sch * 10 + n_goal, j)
                    yield gen_tiny(n_obj, n_sch, n_goal, s)


# ---------------------------------------------------------------- suites


@dataclass
class SuiteSpec:
    family: str
    m: int = 15
    goals: Sequence[int] = tuple(range(1, 16))
    per_point: int = 10
    seed: int = 0
    walls: int = 5
    rollers: int = 2
    colors: Sequence[str] = ("red", "red", "red", "green", "green")

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.per_point < 1:
            raise ValueError("per_point must be >= 1")
        if any(k < 1 for k in self.goals):
            raise ValueError("goal counts must be >= 1")

    def problems(self):
        """Yield (size, problem_id, seed, domain, problem) in deterministic order."""
        if self.family in ("dms1", "use-once"):
            domain = gen_dms1(self.m) if self.family == "dms1" else gen_use_once(self.m)
            for k in self.goals:
                for pid in range(self.per_point):
                    seed = _derive_seed(self.seed, k, pid)
                    yield k, pid, seed, domain, gen_random_goals(self.family, self.m, k, seed)
        elif self.family == "rollers":
            domain, problem = gen_rollers(self.walls, self.rollers, list(self.colors))
            for pid in range(self.per_point):
                yield self.walls, pid, self.seed, domain, problem
        else:
            from .fixture import fixture_domain, fixture_problem

            for pid in range(self.per_point):
                yield 3, pid, self.seed, fixture_domain(), fixture_problem()


def _derive_seed(base, k, pid):
    return (base * 1_000_003 + k * 1009 + pid) & 0xFFFFFFFFFFFFFFFF


RUN_FIELDS = (
    "family",
    "size",
    "problem_id",
    "strategy",
    "seed",
    "outcome",
    "plan_length",
    "nodes",
    "backtracks",
    "subgoal_steps",
    "apply_steps",
    "elapsed_ms",
)


@dataclass
class RunRecord:
    family: str
    size: int
    problem_id: int
    strategy: str
    seed: int
    outcome: str
    plan_length: int
    nodes: int
    backtracks: int
    subgoal_steps: int
    apply_steps: int
    elapsed_ms: float
    plan: list = field(default_factory=list, repr=False)

    def row(self):
        return [getattr(self, f) for f in RUN_FIELDS]


def run_suite(spec, strategies, config=None):
    """Search every suite problem with every strategy; solved plans are validated before recording.

    ``strategies`` maps a label to a Strategy (or is a sequence of Strategy
    objects named by their ``name``).  A run that raises is recorded with
    outcome ``error`` rather than aborting the suite.
    """
    if config is None:
        config = SearchConfig()
    if not isinstance(strategies, Mapping):
        strategies = {s.name: s for s in strategies}
    records = []
    if not strategies:
        return records
    for size, pid, seed, domain, problem in spec.problems():
        grounder = Grounder(domain, problem)
        for label, strategy in strategies.items():
            cfg = replace(config, strategy=strategy)
            t0 = time.perf_counter()
            try:
                result = search(domain, problem, cfg, grounder=grounder)
                outcome = result.outcome
                if result.solved and not validate_plan(problem, result.plan).valid:
                    outcome = "invalid-plan"
                stats = result.stats
                plan = result.plan
            except Exception as exc:  # recorded, never fatal to the suite
                outcome, plan, stats = f"error:{type(exc).__name__}", [], None
            elapsed = (time.perf_counter() - t0) * 1000.0
            records.append(
                RunRecord(
                    family=spec.family,
                    size=size,
                    problem_id=pid,
                    strategy=label,
                    seed=seed,
                    outcome=outcome,
                    plan_length=len(plan),
                    nodes=stats.nodes if stats else 0,
                    backtracks=stats.backtracks if stats else 0,
                    subgoal_steps=stats.subgoal_steps if stats else 0,
                    apply_steps=stats.apply_steps if stats else 0,
                    elapsed_ms=round(elapsed, 3),
                    plan=plan,
                )
            )
    return records


def aggregate(records):
    """Per (size, strategy): run count, solved count, mean/min/max nodes, mean backtracks."""
    groups = {}
    for r in records:
        groups.setdefault((r.size, r.strategy), []).append(r)
    out = []
    for (size, strat), rs in sorted(groups.items()):
        nodes = [r.nodes for r in rs]
        out.append(
            {
                "size": size,
                "strategy": strat,
                "runs": len(rs),
                "solved": sum(r.outcome == "solved" for r in rs),
                "mean_nodes": statistics.fmean(nodes),
                "min_nodes": min(nodes),
                "max_nodes": max(nodes),
                "mean_backtracks": statistics.fmean(r.backtracks for r in rs),
            }
        )
    return out


AGG_FIELDS = ("size", "strategy", "runs", "solved", "mean_nodes", "min_nodes", "max_nodes", "mean_backtracks")


def write_runs_csv(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_FIELDS)
        for r in records:
            w.writerow(r.row())


def write_aggregate_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=AGG_FIELDS)
        w.writeheader()
        for row in rows:
            w.writerow(row)
