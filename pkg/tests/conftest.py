import random
from pathlib import Path

import pytest
from hypothesis import settings

from sidecond.polycore import Polynomial, Q, VariableContext
from sidecond.sysfile import bundled_systems_dir, parse_system

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")

SYSTEMS = bundled_systems_dir()


@pytest.fixture
def load():
    def _load(name):
        return parse_system(SYSTEMS / f"{name}.ode")
    return _load


def random_poly(rng: random.Random, ctx: VariableContext, max_deg: int = 2, nterms: int = 3,
                coeff: int = 3, states_only: bool = True) -> Polynomial:
    n = ctx.nstates if states_only else ctx.nvars
    terms = {}
    for _ in range(nterms):
        d = rng.randint(0, max_deg)
        e = [0] * ctx.nvars
        for _ in range(d):
            e[rng.randrange(n)] += 1
        c = rng.randint(-coeff, coeff)
        if c:
            terms[tuple(e)] = terms.get(tuple(e), Q(0)) + c
    return Polynomial(ctx, terms)


@pytest.fixture
def rng():
    return random.Random(20261015)


def pytest_collection_modifyitems(items):
    # keep the acceptance table last so its summary closes the run
    items.sort(key=lambda it: "test_acceptance" in it.nodeid)


ROOT = Path(__file__).resolve().parent.parent


# One line per acceptance criterion, filled by test_acceptance and repeated
# in the terminal summary.
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
