import random

import pytest

from hegrad.fixedpoint import ScaledDecimal
from hegrad.polynomial import Monomial, PolynomialFunction
from hegrad.problem import AgentSpec, Box, Coefficient, ProblemInstance, StepSchedule

ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def verdict(request):
    """Print and record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def emit(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        request.config.stash[ACCEPTANCE_LINES].append(line)
        assert ok, line

    return emit


# random problem instances ------------------------------------------------------------
def random_decimal(rng: random.Random, digits: int, bound: int) -> ScaledDecimal:
    scale = 10**digits
    return ScaledDecimal(rng.randint(-bound * scale, bound * scale), digits)


def _owners(rng, N):
    pool = list(range(N + 1))
    return tuple(sorted(rng.sample(pool, rng.randint(1, min(3, len(pool))))))


def _agents(rng, dims, sigma, gradient_for):
    agents, off = [], 0
    for i, d in enumerate(dims, start=1):
        lo = [ScaledDecimal(rng.choice((-2, 0)))] * d
        hi = [ScaledDecimal(2)] * d
        x0 = tuple(
            max(lo[0], min(hi[0], random_decimal(rng, sigma, 2))) for _ in range(d)
        )
        agents.append(AgentSpec(i, x0, Box(tuple(lo), tuple(hi)), tuple(gradient_for() for _ in range(d))))
        off += d
    return tuple(agents)


def random_polynomial_problem(rng: random.Random, max_agents: int = 4, max_degree: int = 3) -> ProblemInstance:
    """Boxed problem whose gradients are random polynomials of total degree at most ``max_degree``."""
    N = rng.randint(1, max_agents)
    dims = [rng.randint(1, 2) for _ in range(N)]
    n = sum(dims)
    sigma = rng.randint(1, 3)
    coefs = tuple(
        Coefficient(f"y{c}", random_decimal(rng, sigma, 5), _owners(rng, N)) for c in range(rng.randint(1, 4))
    )

    def gradient():
        monos = []
        for _ in range(rng.randint(1, 4)):
            deg = rng.randint(0, max_degree)
            xs, ys = {}, {}
            for _ in range(deg):
                if rng.random() < 0.6:
                    j = rng.randrange(n)
                    xs[j] = xs.get(j, 0) + 1
                else:
                    c = rng.choice(coefs).id
                    ys[c] = ys.get(c, 0) + 1
            monos.append(Monomial.make(xs, ys, rng.choice((-3, -2, -1, 1, 2, 3))))
        return PolynomialFunction(tuple(monos))

    gamma = StepSchedule(constant=ScaledDecimal(rng.choice((1, 5, 25)), 2))
    return ProblemInstance(sigma, _agents(rng, dims, sigma, gradient), coefs, gamma, name="random-poly")


def random_affine_problem(rng: random.Random, max_agents: int = 4) -> ProblemInstance:
    """Boxed problem with gradients affine in the state (coefficients enter linearly)."""
    N = rng.randint(1, max_agents)
    dims = [rng.randint(1, 2) for _ in range(N)]
    n = sum(dims)
    sigma = rng.randint(1, 3)
    coefs = tuple(
        Coefficient(f"y{c}", random_decimal(rng, sigma, 5), _owners(rng, N)) for c in range(rng.randint(1, 3))
    )

    def gradient():
        monos = []
        for _ in range(rng.randint(1, 4)):
            xs = {rng.randrange(n): 1} if rng.random() < 0.7 else {}
            ys = {rng.choice(coefs).id: 1} if rng.random() < 0.5 else {}
            monos.append(Monomial.make(xs, ys, rng.choice((-3, -2, -1, 1, 2, 3))))
        return PolynomialFunction(tuple(monos))

    gamma = StepSchedule(constant=ScaledDecimal(rng.choice((1, 5, 25)), 2))
    return ProblemInstance(sigma, _agents(rng, dims, sigma, gradient), coefs, gamma, name="random-affine")


def states_feasible(run) -> bool:
    problem = run.problem
    return all(
        a.feasible.contains(state)
        for states in run.trajectory
        for a, state in zip(problem.agents, states)
    )
