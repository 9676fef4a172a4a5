"""The seven-goal, four-operator worked example as an executable domain and problem.

``o1``: pre {g6, g7}, add {g1}
``o2``: pre {g4}, add {g2, g1}   (g1 is the unplanned side effect)
``o3``: pre {g4, g5}, add {g3}, del {g4}
``o4``: pre {g7}, add {g4, g5}

Goal statement g1 g2 g3; initial state {g7}.  Nothing achieves g6.
"""

from .domain import parse_domain, parse_problem

DOMAIN_TEXT = """\
(domain fixture
  (:operator o1 (:params) (:pre (g6) (g7)) (:add (g1)) (:del))
  (:operator o2 (:params) (:pre (g4)) (:add (g2) (g1)) (:del))
  (:operator o3 (:params) (:pre (g4) (g5)) (:add (g3)) (:del (g4)))
  (:operator o4 (:params) (:pre (g7)) (:add (g4) (g5)) (:del)))
"""

PROBLEM_TEXT = """\
(problem worked-example
  (:domain fixture)
  (:objects)
  (:init (g7))
  (:goal (g1) (g2) (g3)))
"""

# Decisions taken in the worked example, one per prompt, for InteractiveStrategy replay.
CHOICE_SCRIPT = """\
# subgoal g1 with o1 (o2 also achieves g1 and is ranked first)
o1()
o2()
o3()
# g6 has no achiever and is skipped; g4 with o4
o4()
# o4 is applicable: keep subgoaling, g5 with o4 again
sub
o4()
# switch to eager applying
app
o4()
app
o2()
o3()
"""

TOGGLE_SCHEDULE = ["sub", "sub", "sub", "sub", "sub", "app"]
OPERATOR_CHOICES = ["o1()", "o2()", "o3()", "o4()"]


def fixture_domain():
    return parse_domain(DOMAIN_TEXT)


def fixture_problem(domain=None):
    return parse_problem(PROBLEM_TEXT, domain or fixture_domain())


def fixture_strategy():
    """Toggle schedule plus operator preferences replaying the worked example."""
    from .strategies import PreferOperators, Strategy, ToggleSchedule

    return Strategy(
        ToggleSchedule(TOGGLE_SCHEDULE),
        relevant_ranker=PreferOperators(OPERATOR_CHOICES),
        name="fixture",
    )
