from types import SimpleNamespace

import pytest

from flecs.domain import Grounder, Literal
from flecs.fixture import fixture_domain, fixture_problem


def g(n):
    return Literal.of(f"g{n}")


def sets(*groups):
    """Ancestor-set literal: sets((1,), (4, 2)) -> {{g1}, {g4, g2}}."""
    return frozenset(frozenset(g(i) for i in grp) for grp in groups)


@pytest.fixture
def fx():
    domain = fixture_domain()
    problem = fixture_problem(domain)
    grounder = Grounder(domain, problem)
    ops = {f"o{i}": grounder.operator(f"o{i}", ()) for i in range(1, 5)}
    return SimpleNamespace(domain=domain, problem=problem, grounder=grounder, **ops)
