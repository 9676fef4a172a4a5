"""Planning with a flexible commitment strategy.

Backward-chaining operator selection combined with simulated execution; a
per-iteration toggle decides whether to keep subgoaling (delayed ordering
commitment) or to apply an applicable operator (eager commitment).
"""

from .domain import (
    Atom,
    Domain,
    GroundOperator,
    Grounder,
    Literal,
    OperatorSchema,
    ParseError,
    Problem,
    apply_effects,
    format_domain,
    format_plan,
    format_problem,
    parse_domain,
    parse_plan,
    parse_problem,
    relevant_operators,
    satisfies,
)
from .engine import (
    APP,
    SUB,
    Agenda,
    PlannerState,
    SearchConfig,
    SearchResult,
    apply_step,
    check_invariants,
    choose_phase,
    initialize,
    is_terminal,
    refresh_agenda,
    restore,
    search,
    snapshot,
    subgoal_step,
)
from .oracle import brute_force_solve, to_partial_order, validate_plan
from .strategies import InteractiveStrategy, Strategy, ToggleSchedule, saba, savta

__version__ = "0.1.0"
