"""Command-line entry point: ``flecs solve|bench|validate|step``.

Exit status: 0 solved / valid / bench completed, 1 exhausted / invalid /
some bench run errored, 2 budget exceeded / timed out / aborted / end of
input, 3 usage, parse or output-path errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .benchmarks import (
    FAMILIES,
    SuiteSpec,
    aggregate,
    run_suite,
    write_aggregate_csv,
    write_runs_csv,
)
from .domain import Grounder, ParseError, format_plan, parse_domain, parse_plan, parse_problem
from .engine import APP, SUB, Abort, SearchConfig, search, trace_line
from .oracle import to_partial_order, validate_plan
from .strategies import InteractiveStrategy, strategy_from_selector

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_STOPPED = 2
EXIT_USAGE = 3

OUTCOME_EXIT = {
    "solved": EXIT_OK,
    "exhausted": EXIT_FAIL,
    "budget-exceeded": EXIT_STOPPED,
    "time-out": EXIT_STOPPED,
    "aborted": EXIT_STOPPED,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _read(path, what):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {what} {path}: {exc.strerror or exc}") from None


def _parse(parse, path, what, *extra):
    try:
        return parse(_read(path, what), *extra)
    except ParseError as exc:
        raise UsageError(f"{path}:{exc}") from None


def _load(args):
    domain = _parse(parse_domain, args.domain, "domain")
    problem = _parse(parse_problem, args.problem, "problem", domain)
    return domain, problem


def _search_flags(p, depth_init=8, node_budget=0):
    p.add_argument("--depth-init", type=int, default=depth_init, help=f"first depth bound (default {depth_init})")
    p.add_argument("--depth-increment", type=int, default=8, help="depth bound increase per round (default 8)")
    p.add_argument(
        "--node-budget", type=int, default=node_budget, help=f"stop after this many nodes (default {node_budget}; 0 = no limit)"
    )
    p.add_argument("--time-limit-ms", type=int, default=None, help="wall-clock limit per search")
    p.add_argument("--no-goal-loop", action="store_true", help="disable goal-loop pruning")
    p.add_argument("--no-state-loop", action="store_true", help="disable state-loop pruning")
    p.add_argument("--no-independence", action="store_true", help="disable the independence partition")
    p.add_argument("--seed", type=int, default=0, help="random seed (bench problem generation)")


def _config(args, **extra):
    try:
        return SearchConfig(
            depth_init=args.depth_init,
            depth_increment=args.depth_increment,
            node_budget=args.node_budget,
            time_limit=None if args.time_limit_ms is None else args.time_limit_ms / 1000.0,
            goal_loop_pruning=not args.no_goal_loop,
            state_loop_pruning=not args.no_state_loop,
            independence_pruning=not args.no_independence,
            **extra,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _strategy(args):
    selector = "schedule:" + args.schedule if args.schedule else args.strategy
    try:
        return strategy_from_selector(selector)
    except (OSError, ValueError) as exc:
        raise UsageError(f"bad strategy {selector!r}: {exc}") from None


def _open_out(path):
    try:
        return open(path, "w", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from None


def _print_stats(result, out):
    st = result.stats
    print(
        f"; outcome={result.outcome} nodes={st.nodes} backtracks={st.backtracks} "
        f"subgoal_steps={st.subgoal_steps} apply_steps={st.apply_steps} "
        f"rounds={st.deepening_rounds} peak_depth={st.peak_depth} prunes={st.prunes}",
        file=out,
    )


def _print_partial_order(problem, plan, out):
    pop = to_partial_order(problem, plan)
    print(f"; partial order: {pop.render()}", file=out)
    for i, j in sorted(pop.orderings):
        print(f";   {pop.steps[i]} < {pop.steps[j]}", file=out)


# ---------------------------------------------------------------- solve


def cmd_solve(args):
    domain, problem = _load(args)
    strategy = _strategy(args)
    trace_fh = _open_out(args.trace) if args.trace else None
    sink = None
    if trace_fh is not None:
        sink = lambda rec: trace_fh.write(trace_line(rec) + "\n")  # noqa: E731
    try:
        result = search(domain, problem, _config(args, strategy=strategy, trace_sink=sink))
    finally:
        if trace_fh is not None:
            trace_fh.close()
    if result.solved:
        sys.stdout.write(format_plan(result.plan))
        if args.out:
            with _open_out(args.out) as fh:
                fh.write(format_plan(result.plan))
    _print_stats(result, sys.stdout)
    if result.message:
        print(f"flecs: {result.message}", file=sys.stderr)
    if result.solved and args.partial_order:
        _print_partial_order(problem, result.plan, sys.stdout)
    return OUTCOME_EXIT[result.outcome]


# ---------------------------------------------------------------- validate


def cmd_validate(args):
    domain, problem = _load(args)
    plan = _parse(parse_plan, args.plan, "plan", Grounder(domain, problem))
    report = validate_plan(problem, plan)
    print(report.describe())
    if report.valid and args.partial_order:
        _print_partial_order(problem, plan, sys.stdout)
    return EXIT_OK if report.valid else EXIT_FAIL


# ---------------------------------------------------------------- bench


def parse_goal_range(text):
    """``"1..15"``, ``"3"`` or ``"1,2,5"`` -> list of goal counts."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("no goal counts given")
    return out


def cmd_bench(args):
    try:
        goals = parse_goal_range(args.goals)
        m = args.m if args.m is not None else (8 if args.suite == "use-once" else 15)
        spec = SuiteSpec(args.suite, m=m, goals=goals, per_point=args.per_point, seed=args.seed)
        if args.suite in ("dms1", "use-once") and max(goals) > m:
            raise ValueError(f"goal counts must not exceed m={m}")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    strategies = {}
    for sel in (s.strip() for s in args.strategies.split(",")):
        if sel:
            try:
                strategies[sel] = strategy_from_selector(sel)
            except (OSError, ValueError) as exc:
                raise UsageError(f"bad strategy {sel!r}: {exc}") from None
    out = Path(args.out or f"{args.suite}-runs.csv")
    agg_path = Path(args.aggregate) if args.aggregate else out.with_name(out.stem + "-aggregate.csv")
    # open both outputs before the (possibly long) run so a bad path fails fast
    _open_out(out).close()
    _open_out(agg_path).close()
    config = _config(args)
    records = run_suite(spec, strategies, config)
    write_runs_csv(records, out)
    rows = aggregate(records)
    write_aggregate_csv(rows, agg_path)
    print(f"{len(records)} runs -> {out}; aggregate -> {agg_path}")
    errored = [r for r in records if r.outcome.startswith("error") or r.outcome == "invalid-plan"]
    for r in errored:
        print(f"flecs: run {r.size}/{r.problem_id}/{r.strategy}: {r.outcome}", file=sys.stderr)
    return EXIT_FAIL if errored else EXIT_OK


# ---------------------------------------------------------------- step


HELP = """\
answers: sub | app         choose subgoaling or applying
         NAME(ARGS) | N    pick an operator by name or list position
         (empty)           take the first option / the default toggle
         undo              back up one decision
         auto [NAME]       let a strategy (saba, savta) finish the search
         quit              stop the session"""


class TerminalResponder:
    """Prompts on ``out`` and reads answers from ``inp``, re-asking on invalid input."""

    def __init__(self, inp=None, out=None, default_toggle=None):
        self.inp = inp if inp is not None else sys.stdin
        self.out = out if out is not None else sys.stdout
        self.default_toggle = default_toggle

    def _readline(self, prompt):
        self.out.write(prompt)
        self.out.flush()
        line = self.inp.readline()
        if not line:
            raise Abort("end of input")
        return line.strip()

    def __call__(self, kind, view, options):
        if kind != "toggle":
            print(f"{'relevant' if kind == 'relevant' else 'applicable'} operators:", file=self.out)
            for i, opt in enumerate(options, 1):
                print(f"  {i}) {opt}", file=self.out)
        while True:
            if kind == "toggle":
                default = self.default_toggle(view) if self.default_toggle else SUB
                answer = self._readline(f"subgoal or apply? [sub/app, default {default}] > ")
            else:
                answer = self._readline(f"{kind} > ")
            low = answer.lower()
            if low in ("?", "help"):
                print(HELP, file=self.out)
                continue
            if low in ("undo", "quit", "") or low == "auto" or low.startswith("auto "):
                if low.startswith("auto "):
                    try:
                        strategy_from_selector(answer[5:].strip())
                    except (OSError, ValueError) as exc:
                        print(f"  {exc}", file=self.out)
                        continue
                return answer
            if kind == "toggle":
                if low in (SUB, APP):
                    return low
            elif answer in options or (answer.isdigit() and 1 <= int(answer) <= len(options)):
                return answer
            print("  not a valid answer here; type ? for help", file=self.out)


def cmd_step(args):
    domain, problem = _load(args)
    fallback = _strategy(args)
    if isinstance(fallback, InteractiveStrategy):
        raise UsageError("step needs a plain fallback strategy (saba, savta or schedule:PATH)")
    out = sys.stdout
    responder = TerminalResponder(sys.stdin, out, default_toggle=fallback.toggle)
    strategy = InteractiveStrategy(responder, fallback=fallback, out=out)
    trace_fh = _open_out(args.trace) if args.trace else None
    sink = None
    if trace_fh is not None:
        sink = lambda rec: trace_fh.write(trace_line(rec) + "\n")  # noqa: E731
    print(HELP, file=out)
    try:
        result = search(domain, problem, _config(args, strategy=strategy, trace_sink=sink))
    finally:
        if trace_fh is not None:
            trace_fh.close()
    print(file=out)
    if result.solved:
        out.write(format_plan(result.plan))
    _print_stats(result, out)
    if result.message:
        print(f"flecs: {result.message}", file=sys.stderr)
    save = args.out
    if save is None and result.outcome != "aborted" and strategy.answers:
        try:
            save = responder._readline("save decisions as a choice script (path, blank to skip) > ") or None
        except Abort:
            save = None
    if save:
        with _open_out(save) as fh:
            fh.write("".join(a + "\n" for a in strategy.answers))
        print(f"decisions saved to {save}; replay with --strategy script:{save}", file=out)
    return OUTCOME_EXIT[result.outcome]


# ---------------------------------------------------------------- main


def build_parser():
    parser = _Parser(prog="flecs", description="Flexible-commitment STRIPS planner.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="search for a plan")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument(
        "--strategy",
        default="saba",
        help="saba | savta | schedule:PATH | script:PATH (default saba)",
    )
    p.add_argument("--schedule", help="toggle schedule file (same as --strategy schedule:PATH)")
    p.add_argument("--trace", help="write the JSON-lines trace here")
    p.add_argument("--partial-order", action="store_true", help="also print the relaxed plan")
    p.add_argument("--out", help="also write the plan to this file")
    _search_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a plan file against a problem")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--partial-order", action="store_true", help="also print the relaxed plan")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    p.add_argument("--suite", required=True, choices=FAMILIES)
    p.add_argument("--goals", default="1..15", help="goal counts, e.g. 1..15 or 2,4,8")
    p.add_argument("--per-point", type=int, default=10)
    p.add_argument("--m", type=int, default=None, help="operator count (default 15; 8 for use-once)")
    p.add_argument("--strategies", default="saba,savta")
    p.add_argument("--out", help="raw CSV path (default SUITE-runs.csv)")
    p.add_argument("--aggregate", help="aggregate CSV path (default next to --out)")
    # plain depth-first by default: deepening re-runs would swamp the strategy contrast
    _search_flags(p, depth_init=1000, node_budget=100_000)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("step", help="interactive search, one decision per prompt")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument(
        "--strategy",
        default="saba",
        help="strategy supplying defaults and finishing after a bare 'auto' (default saba)",
    )
    p.add_argument("--schedule", help="toggle schedule supplying the default toggle")
    p.add_argument("--trace", help="write the JSON-lines trace here")
    p.add_argument("--out", help="save the decision script here without asking")
    _search_flags(p)
    p.set_defaults(func=cmd_step)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError) as exc:
        print(f"flecs: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
