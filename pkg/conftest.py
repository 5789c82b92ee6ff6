import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dist import Bernoulli, Gaussian
from expr import RealConst, Var, add, ite, mul
from state import SymbolicState, assume

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=150,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")

PROBS = [0.1, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.75, 0.8, 0.9]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def wheels_state():
    """omega = X0, vel = X1 and the left sensor X2 ~ N(X1 - 2 X0, 1), nothing observed."""
    g = SymbolicState()
    omega, _ = assume(Gaussian(0, 2500), g)
    vel, _ = assume(Gaussian(0, 2500), g)
    assume(Gaussian(Var(vel) - 2 * Var(omega), 1), g)
    return g


def random_prob_expr(gen, ids):
    """A probability expression over ``ids`` that stays strictly inside (0, 1)."""
    if not ids or gen.random() < 0.3:
        return RealConst(float(gen.choice(PROBS)))
    parent = int(gen.choice(ids))
    rest = [i for i in ids if i != parent]
    return ite(Var(parent), random_prob_expr(gen, rest), random_prob_expr(gen, rest))


def random_bernoulli_net(gen, size):
    g = SymbolicState()
    for _ in range(size):
        assume(Bernoulli(random_prob_expr(gen, list(g))), g)
    return g


def random_linear_gaussian(gen, size):
    """Random DAG of Gaussians with affine means and constant variances."""
    g = SymbolicState()
    for _ in range(size):
        mean = RealConst(float(gen.normal(0.0, 2.0)))
        for parent in list(g):
            if gen.random() < 0.6:
                coef = float(gen.choice([-1, 1]) * gen.uniform(0.5, 2.0))
                mean = add(mean, mul(coef, Var(parent)))
        assume(Gaussian(mean, float(gen.uniform(0.5, 4.0))), g)
    return g


@pytest.fixture
def bernoulli_net():
    return random_bernoulli_net


@pytest.fixture
def linear_gaussian():
    return random_linear_gaussian
