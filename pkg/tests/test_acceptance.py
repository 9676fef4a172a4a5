"""One test per acceptance criterion; each prints a PASS/FAIL line with its measurements.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
without ``-s``).  Strategy-contrast suites use plain depth-first search
(a first depth bound far above any plan length): iterative deepening from a
small bound re-expands shallow trees and drowns the contrast.
"""

import random
import statistics
import time

import pytest

import flecs.engine as engine
from flecs.benchmarks import (
    ROLLER_SCRIPT_BUDGET,
    ROLLER_SCRIPT_DEPTH,
    SuiteSpec,
    data_path,
    gen_dms1,
    gen_random_goals,
    gen_rollers,
    gen_tiny,
    gen_use_once,
    five_wall_rollers,
    run_suite,
    tiny_family,
)
from flecs.domain import Grounder, apply_effects, satisfies_all
from flecs.engine import (
    SearchConfig,
    apply_step,
    initialize,
    is_terminal,
    refresh_agenda,
    restore,
    search,
    snapshot,
    subgoal_step,
)
from flecs.fixture import fixture_domain, fixture_problem, fixture_strategy
from flecs.oracle import brute_force_solve, linear_extensions, to_partial_order, validate_plan
from flecs.strategies import Strategy, strategy_from_selector

from conftest import g, sets

DFS = 10_000  # first depth bound: effectively plain depth-first search
BOTH = {"saba": Strategy("saba"), "savta": Strategy("savta")}


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n} {title}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return emit


def _by_size(records, strategy):
    out = {}
    for r in records:
        if r.strategy == strategy:
            out.setdefault(r.size, []).append(r)
    return dict(sorted(out.items()))


def _mean(rs, attr):
    return statistics.fmean(getattr(r, attr) for r in rs)


# ---------------------------------------------------------------- 1


def _names(xs):
    return {str(x).strip("()") for x in xs}


# Hand-derived expectations for each stop of the worked example.  The
# pending set follows the literal rule that goals holding in the initial
# state stay pending, so g7 is listed while it has an open ancestor chain.
WORKED_STOPS = [
    ("initial", None, {"g1", "g2", "g3"}, set(), {}, {1: sets(()), 2: sets(()), 3: sets(())}),
    ("subgoal g1, g2", 2, {"g3", "g4", "g6", "g7"}, set(), {1: {1}, 2: {2}},
     {6: sets((1,)), 7: sets((1,)), 4: sets((2,))}),
    ("subgoal g3", 3, {"g4", "g5", "g6", "g7"}, set(), {1: {1}, 2: {2}, 3: {3}},
     {4: sets((2,), (3,)), 5: sets((3,))}),
    ("subgoal g4", 4, {"g5", "g6", "g7"}, {"o4"}, {4: {4}},
     {7: sets((1,), (4, 2), (4, 3))}),
    ("subgoal g5", 5, {"g6", "g7"}, {"o4"}, {4: {4, 5}},
     {7: sets((1,), (4, 2), (4, 3), (5, 3))}),
    ("apply o4", 6, {"g6", "g7"}, {"o2", "o3"}, {1: {1}, 2: {2}, 3: {3}, 4: None},
     {7: sets((1,)), 4: sets((2,), (3,)), 5: sets((3,))}),
    ("apply o2", 7, set(), {"o3"}, {1: {1}, 2: None, 3: {3}}, {4: sets((3,))}),
    ("apply o3", 8, set(), set(), {1: {1}, 3: None}, {}),
]

DECISIONS = [
    ("sub", 1, "o1"),
    ("sub", 2, "o2"),
    ("sub", 3, "o3"),
    ("sub", 4, "o4"),
    ("sub", 5, "o4"),
    ("app", None, "o4"),
    ("app", None, "o2"),
    ("app", None, "o3"),
]


def test_criterion_1_worked_example(report):
    t0 = time.perf_counter()
    domain = fixture_domain()
    problem = fixture_problem(domain)
    gr = Grounder(domain, problem)
    ops = {f"o{i}": gr.operator(f"o{i}", ()) for i in range(1, 5)}
    states = [initialize(problem)]
    for kind, goal, op in DECISIONS:
        ps = states[-1]
        states.append(subgoal_step(ps, g(goal), ops[op]) if kind == "sub" else apply_step(ps, ops[op]))
    mismatches = []
    for label, idx, pending, applicable, causes, ancestors in WORKED_STOPS:
        ps = states[idx or 0]
        agenda = refresh_agenda(ps, problem)
        if _names(agenda.pending) != pending:
            mismatches.append(f"{label}: P={sorted(_names(agenda.pending))}")
        if _names(agenda.applicable) != applicable:
            mismatches.append(f"{label}: A={sorted(_names(agenda.applicable))}")
        for i, want in causes.items():
            got = ps.cause.get(ops[f"o{i}"])
            if (want is None) != (got is None) or (want and got != {g(x) for x in want}):
                mismatches.append(f"{label}: c(o{i})={got}")
        for i, want in ancestors.items():
            if ps.anc.get(g(i)) != want:
                mismatches.append(f"{label}: a(g{i})={ps.anc.get(g(i))}")
    # g6 is on the fringe but inactive once g1 holds as a side effect
    if not (g(6) in states[7].G and g(6) not in refresh_agenda(states[7], problem).pending):
        mismatches.append("g6 not deactivated after applying o2")
    if not is_terminal(states[8], problem) or list(states[8].head) != [ops["o4"], ops["o2"], ops["o3"]]:
        mismatches.append("final head-plan is not o4, o2, o3")
    res = search(domain, problem, SearchConfig(strategy=fixture_strategy(), debug=True))
    if [str(o) for o in res.plan] != ["o4()", "o2()", "o3()"]:
        mismatches.append(f"schedule-driven search returned {res.plan}")
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 1.0
    report(1, "worked example", ok, f"{len(WORKED_STOPS)} stops, {elapsed:.3f}s; " + ("; ".join(mismatches) or "exact"))


# ---------------------------------------------------------------- 2


def test_criterion_2_soundness(report):
    t0 = time.perf_counter()
    cfg = SearchConfig(depth_init=DFS, node_budget=5_000)
    records = []
    records += run_suite(SuiteSpec("dms1", m=15, goals=range(1, 16), per_point=10), BOTH, cfg)
    records += run_suite(SuiteSpec("use-once", m=8, goals=range(1, 9), per_point=10), BOTH, cfg)
    records += run_suite(SuiteSpec("rollers", per_point=1), BOTH, cfg)
    records += run_suite(SuiteSpec("fixture", per_point=1), {**BOTH, "schedule": fixture_strategy()}, cfg)
    script = strategy_from_selector("script:" + str(data_path("rollers-5w-2r.script")))
    records += run_suite(
        SuiteSpec("rollers", per_point=1), {"script": script}, SearchConfig(depth_init=ROLLER_SCRIPT_DEPTH)
    )
    bad = [r for r in records if r.outcome == "invalid-plan" or r.outcome.startswith("error")]
    solved = sum(r.outcome == "solved" for r in records)

    rng = random.Random(2024)
    tiny_solved = tiny_bad = 0
    for _ in range(1000):
        domain, problem = gen_tiny(rng.randint(1, 4), rng.randint(1, 4), rng.randint(1, 3), rng.getrandbits(32))
        res = search(domain, problem, SearchConfig(node_budget=5_000))
        if res.solved:
            tiny_solved += 1
            tiny_bad += not validate_plan(problem, res.plan).valid
    elapsed = time.perf_counter() - t0
    ok = not bad and tiny_bad == 0 and elapsed < 120
    report(
        2,
        "soundness",
        ok,
        f"suites {solved}/{len(records)} solved, {len(bad)} invalid; "
        f"tiny {tiny_solved}/1000 solved, {tiny_bad} invalid; {elapsed:.1f}s",
    )


# ---------------------------------------------------------------- 3


def test_criterion_3_completeness(report):
    t0 = time.perf_counter()
    cfg = SearchConfig(node_budget=20_000, goal_loop_pruning=False, state_loop_pruning=False, independence_pruning=False)
    total, disagree, unsolvable = 0, [], []
    for domain, problem in tiny_family():
        total += 1
        solvable = brute_force_solve(domain, problem, 64) is not None
        res = search(domain, problem, cfg)
        if res.solved != solvable:
            disagree.append(f"{problem.name}: {res.outcome}, oracle {'solvable' if solvable else 'unsolvable'}")
        if not solvable:
            unsolvable.append(res.outcome)
    elapsed = time.perf_counter() - t0
    ok = total >= 500 and not disagree and elapsed < 600
    # without loop pruning the deepening never runs dry on an unsolvable instance
    stopped = sum(o == "exhausted" for o in unsolvable)
    detail = (
        f"{total - len(disagree)}/{total} agree on solvability; {len(unsolvable)} unsolvable "
        f"({stopped} exhausted, {len(unsolvable) - stopped} stopped by the budget); {elapsed:.1f}s"
    )
    if disagree:
        detail += "; " + "; ".join(disagree[:5])
    report(3, "completeness", ok, detail)


# ---------------------------------------------------------------- 4


def test_criterion_4_dms1_contrast(report):
    t0 = time.perf_counter()
    spec = SuiteSpec("dms1", m=15, goals=range(1, 16), per_point=10)
    records = run_suite(spec, BOTH, SearchConfig(depth_init=DFS, node_budget=50_000))
    saba, savta = _by_size(records, "saba"), _by_size(records, "savta")

    saba_bt = sum(r.backtracks for r in records if r.strategy == "saba")
    saba_solved = all(r.outcome == "solved" for rs in saba.values() for r in rs)
    growth = _mean(saba[15], "nodes") / _mean(saba[5], "nodes")

    # a size where some run hit the budget only bounds its mean from below
    censored = {k for k, rs in savta.items() if any(r.outcome == "budget-exceeded" for r in rs)}
    bt = {k: _mean(rs, "backtracks") for k, rs in savta.items()}
    open_sizes = [k for k in bt if k not in censored]
    increasing = all(bt[a] < bt[b] for a, b in zip(open_sizes, open_sizes[1:]))
    ceiling = max(bt[k] for k in open_sizes)
    censored_above = all(bt[k] > ceiling for k in censored)
    literal = all(bt[a] < bt[b] for a, b in zip(list(bt), list(bt)[1:]))
    exceeds = all(bt[k] > _mean(saba[k], "nodes") for k in savta if k >= 8)
    elapsed = time.perf_counter() - t0

    ok = saba_bt == 0 and saba_solved and growth <= 4 and increasing and censored_above and exceeds and elapsed < 300
    curve = ", ".join(f"{k}:{bt[k]:.0f}{'+' if k in censored else ''}" for k in bt)
    report(
        4,
        "dms1 contrast",
        ok,
        f"SABA backtracks {saba_bt}, nodes k15/k5 {growth:.2f}; SAVTA mean backtracks {curve} "
        f"(+ = budget-censored); literal strict increase {'holds' if literal else 'fails at censored sizes'}; "
        f"SAVTA backtracks > SABA nodes for k>=8: {exceeds}; {elapsed:.1f}s",
    )


# ---------------------------------------------------------------- 5


def test_criterion_5_use_once_contrast(report):
    t0 = time.perf_counter()
    spec = SuiteSpec("use-once", m=8, goals=range(1, 6), per_point=10)
    records = run_suite(spec, BOTH, SearchConfig(depth_init=DFS, node_budget=100_000))
    saba, savta = _by_size(records, "saba"), _by_size(records, "savta")
    all_solved = all(r.outcome == "solved" for r in records)
    savta_bt = sum(r.backtracks for r in records if r.strategy == "savta")
    saba_bt = {k: _mean(rs, "backtracks") for k, rs in saba.items()}
    positive = all(v > 0 for k, v in saba_bt.items() if k >= 2)
    sizes = list(saba_bt)
    monotone = all(saba_bt[a] <= saba_bt[b] for a, b in zip(sizes, sizes[1:]))
    fewer = all(_mean(savta[k], "nodes") < _mean(saba[k], "nodes") for k in saba if k >= 2)
    elapsed = time.perf_counter() - t0
    ok = all_solved and savta_bt == 0 and positive and monotone and fewer and elapsed < 300
    curve = ", ".join(f"{k}:{v:.0f}" for k, v in saba_bt.items())
    nodes = ", ".join(f"{k}:{_mean(savta[k], 'nodes'):.0f}/{_mean(saba[k], 'nodes'):.0f}" for k in saba)
    report(
        5,
        "use-once contrast",
        ok,
        f"SAVTA backtracks {savta_bt}; SABA mean backtracks {curve}; mean nodes SAVTA/SABA {nodes}; {elapsed:.1f}s",
    )


# ---------------------------------------------------------------- 6


def test_criterion_6_roller_sensitivity(report):
    t0 = time.perf_counter()
    domain, problem = five_wall_rollers()
    script = strategy_from_selector("script:" + str(data_path("rollers-5w-2r.script")))
    res = search(domain, problem, SearchConfig(depth_init=ROLLER_SCRIPT_DEPTH, node_budget=ROLLER_SCRIPT_BUDGET, strategy=script))
    script_ok = res.solved and validate_plan(problem, res.plan).valid
    cap = 100 * ROLLER_SCRIPT_BUDGET
    extremes = {}
    for name in ("saba", "savta"):
        for depth in (8, ROLLER_SCRIPT_DEPTH):
            r = search(domain, problem, SearchConfig(depth_init=depth, node_budget=cap, strategy=Strategy(name)))
            extremes[f"{name}@{depth}"] = r.outcome
    # a second run of the script gives the same node count
    again = search(
        domain,
        problem,
        SearchConfig(
            depth_init=ROLLER_SCRIPT_DEPTH,
            node_budget=ROLLER_SCRIPT_BUDGET,
            strategy=strategy_from_selector("script:" + str(data_path("rollers-5w-2r.script"))),
        ),
    )
    elapsed = time.perf_counter() - t0
    ok = (
        script_ok
        and again.stats.nodes == res.stats.nodes
        and all(not o == "solved" for o in extremes.values())
        and elapsed < 120
    )
    report(
        6,
        "roller strategy sensitivity",
        ok,
        f"script: {res.outcome} in {res.stats.nodes} nodes (B={ROLLER_SCRIPT_BUDGET}), plan length {len(res.plan)}; "
        f"within {cap} nodes: " + ", ".join(f"{k} {v}" for k, v in extremes.items()) + f"; {elapsed:.1f}s",
    )


# ---------------------------------------------------------------- 7


def test_criterion_7_invariants(report, monkeypatch):
    checks = 0
    real = engine.check_invariants

    def counted(ps, problem):
        nonlocal checks
        checks += 1
        real(ps, problem)

    monkeypatch.setattr(engine, "check_invariants", counted)
    t0 = time.perf_counter()
    cfg = SearchConfig(depth_init=DFS, node_budget=1_000, debug=True)
    records = []
    records += run_suite(SuiteSpec("dms1", m=15, goals=range(1, 16), per_point=10), BOTH, cfg)
    records += run_suite(SuiteSpec("use-once", m=8, goals=range(1, 9), per_point=10), BOTH, cfg)
    records += run_suite(SuiteSpec("rollers", per_point=1), BOTH, cfg)
    records += run_suite(SuiteSpec("rollers", per_point=1), BOTH, SearchConfig(node_budget=1_000, debug=True))
    records += run_suite(SuiteSpec("fixture", per_point=1), {**BOTH, "schedule": fixture_strategy()}, cfg)
    script = strategy_from_selector("script:" + str(data_path("rollers-5w-2r.script")))
    records += run_suite(
        SuiteSpec("rollers", per_point=1), {"script": script}, SearchConfig(depth_init=ROLLER_SCRIPT_DEPTH, debug=True)
    )
    violations = [r for r in records if r.outcome.startswith("error")]
    elapsed = time.perf_counter() - t0
    ok = not violations and checks > 0
    report(
        7,
        "bookkeeping invariants",
        ok,
        f"{len(records)} runs, {checks} state checks, {len(violations)} violations; {elapsed:.1f}s",
    )


# ---------------------------------------------------------------- 8


def _observe(ps, problem):
    """Everything a caller can see of a state, in a form that cannot alias it."""
    agenda = refresh_agenda(ps, problem)
    return (
        tuple(sorted(map(str, ps.C))),
        tuple((str(k), v) for k, v in ps.G.items()),
        tuple(map(str, ps.O)),
        tuple(sorted((str(k), tuple(sorted(tuple(sorted(map(str, s))) for s in v))) for k, v in ps.anc.items())),
        tuple(sorted((str(k), tuple(sorted(map(str, v)))) for k, v in ps.cause.items())),
        tuple(map(str, ps.head)),
        ps.tick,
        tuple(map(str, agenda.pending)),
        tuple(map(str, agenda.applicable)),
        is_terminal(ps, problem),
    )


def _successors(ps, problem, grounder):
    agenda = refresh_agenda(ps, problem)
    out = [apply_step(ps, op) for op in agenda.applicable]
    for goal in agenda.pending:
        out.extend(subgoal_step(ps, goal, op) for op in grounder.relevant(goal))
    return out


def _round_trip_problems():
    yield fixture_domain(), fixture_problem()
    yield gen_dms1(6), gen_random_goals("dms1", 6, 4, 1)
    yield gen_use_once(4), gen_random_goals("use-once", 4, 3, 2)
    yield five_wall_rollers()
    yield gen_rollers(2, 1, ["red", "green"])
    for seed in range(5):
        yield gen_tiny(3, 4, 3, seed)


def test_criterion_8_snapshot_restore(report):
    t0 = time.perf_counter()
    rng = random.Random(8)
    pool = [(d, p, Grounder(d, p)) for d, p in _round_trip_problems()]
    trips = mismatches = 0
    while trips < 10_000:
        domain, problem, grounder = rng.choice(pool)
        ps = initialize(problem)
        for _ in range(rng.randint(1, 12)):
            before = _observe(ps, problem)
            snap = snapshot(ps)
            # mutate: walk a few random steps away from the snapshot
            cur = ps
            for _ in range(rng.randint(1, 4)):
                nxt = _successors(cur, problem, grounder)
                if not nxt:
                    break
                cur = rng.choice(nxt)
            back = restore(snap)
            trips += 1
            mismatches += back != ps or _observe(back, problem) != before
            nxt = _successors(back, problem, grounder)
            if not nxt or trips >= 10_000:
                break
            ps = rng.choice(nxt)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 60
    report(8, "snapshot/restore", ok, f"{trips} round trips, {mismatches} mismatches; {elapsed:.1f}s")


# ---------------------------------------------------------------- 9


def _valid_plans(domain, problem, max_len):
    """Every valid plan of at most ``max_len`` steps, by depth-first enumeration of executable prefixes."""
    ops = Grounder(domain, problem).all_operators()
    found = []

    def walk(state, prefix):
        if prefix and satisfies_all(state, problem.goal):
            found.append(list(prefix))
        if len(prefix) == max_len:
            return
        for op in ops:
            if satisfies_all(state, op.pre):
                prefix.append(op)
                walk(apply_effects(state, op), prefix)
                prefix.pop()

    walk(frozenset(problem.init), [])
    return found


def _partial_order_problems():
    yield fixture_domain(), fixture_problem()
    yield gen_dms1(4), gen_random_goals("dms1", 4, 3, 0)
    yield gen_use_once(3), gen_random_goals("use-once", 3, 2, 0)
    yield gen_rollers(1, 2, ["red"])
    yield gen_rollers(2, 1, ["red", "red"])
    for seed in range(12):
        yield gen_tiny(2, 3, 2, seed)


def test_criterion_9_partial_order(report):
    t0 = time.perf_counter()
    domain = fixture_domain()
    problem = fixture_problem(domain)
    gr = Grounder(domain, problem)
    o2, o3, o4 = (gr.operator(n, ()) for n in ("o2", "o3", "o4"))
    pop = to_partial_order(problem, [o4, o2, o3])
    o4_first = pop.before(0, 1) and pop.before(0, 2)

    plans = extensions = failures = 0
    for d, p in _partial_order_problems():
        for plan in _valid_plans(d, p, 6):
            plans += 1
            for ext in linear_extensions(to_partial_order(p, plan)):
                extensions += 1
                failures += not validate_plan(p, ext).valid
    elapsed = time.perf_counter() - t0
    ok = o4_first and failures == 0 and plans > 0
    report(
        9,
        "partial-order extraction",
        ok,
        f"fixture relaxes to {pop.render()}; {plans} plans of <= 6 steps, {extensions} extensions, "
        f"{failures} invalid; {elapsed:.1f}s",
    )
