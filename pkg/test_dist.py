import math

import numpy as np
import pytest
from scipy import integrate, stats

from dist import (
    Bernoulli,
    Beta,
    ClosedBernoulli,
    ClosedBeta,
    ClosedDelta,
    ClosedGaussian,
    Delta,
    Gaussian,
    close,
    draw,
    make_rng,
    score,
)
from errors import InvalidParam, NotClosed
from expr import App, IntConst, Op, RealConst, Var
from state import SymbolicState


def test_close_constant_gaussian():
    assert close(Gaussian(0, 2500), SymbolicState()) == ClosedGaussian(0.0, 2500.0)


def test_close_rejects_symbolic_mean():
    g = SymbolicState({0: Gaussian(0, 2500)}, next_id=1)
    mean = App(Op.SUB, (IntConst(0), App(Op.MUL, (IntConst(2), Var(0)))))
    with pytest.raises(NotClosed):
        close(Gaussian(mean, 2501), g)


def test_close_folds_parameters():
    assert close(Bernoulli(App(Op.DIV, (IntConst(1), IntConst(2))))) == ClosedBernoulli(0.5)
    g = SymbolicState({0: Delta(RealConst(3.0))}, next_id=1)
    assert close(Gaussian(Var(0), 1), g) == ClosedGaussian(3.0, 1.0)


@pytest.mark.parametrize("d", [
    Gaussian(0, 0),
    Gaussian(0, -1.5),
    Beta(0, 1),
    Beta(2, -1),
    Bernoulli(1.5),
    Bernoulli(-0.2),
])
def test_close_range_checks(d):
    with pytest.raises(InvalidParam):
        close(d)


def test_close_clamps_rounding_in_probabilities():
    assert close(Bernoulli(1.0 + 1e-15)) == ClosedBernoulli(1.0)


def test_draw_point_mass_and_certain_event(rng):
    assert draw(ClosedDelta(-1.0), rng) == -1.0
    assert draw(ClosedBernoulli(1.0), rng) == 1.0
    assert draw(ClosedBernoulli(0.0), rng) == 0.0


def test_gaussian_draws_match_mean():
    gen = make_rng(2024, 0)
    d = ClosedGaussian(0.0, 2500.0)
    samples = np.array([d.draw(gen) for _ in range(100_000)])
    assert abs(samples.mean()) <= 4 * 50 / math.sqrt(100_000)


def test_scores():
    assert score(ClosedBernoulli(0.5), 1.0) == pytest.approx(math.log(0.5))
    assert score(ClosedGaussian(0.0, 1.0), 0.0) == pytest.approx(-0.5 * math.log(2 * math.pi))
    assert score(ClosedBeta(2.0, 1.0), 0.5) == pytest.approx(0.0, abs=1e-12)


def test_scores_agree_with_scipy():
    assert ClosedGaussian(1.5, 4.0).score(-0.3) == pytest.approx(stats.norm(1.5, 2.0).logpdf(-0.3))
    assert ClosedBeta(2.5, 3.5).score(0.2) == pytest.approx(stats.beta(2.5, 3.5).logpdf(0.2))
    assert ClosedBernoulli(0.3).score(0.0) == pytest.approx(math.log(0.7))


def test_out_of_support_scores_are_minus_infinity():
    assert ClosedBeta(2.0, 2.0).score(1.0) == -math.inf
    assert ClosedBeta(2.0, 2.0).score(-0.1) == -math.inf
    assert ClosedBernoulli(0.4).score(0.5) == -math.inf
    assert ClosedBernoulli(0.0).score(1.0) == -math.inf
    assert ClosedBernoulli(1.0).score(0.0) == -math.inf
    assert ClosedDelta(2.0).score(2.1) == -math.inf


def test_delta_score_tolerance():
    assert ClosedDelta(1e6).score(1e6 * (1 + 1e-14)) == 0.0
    assert ClosedDelta(0.0).score(0.0) == 0.0


def test_densities_normalize():
    gauss = ClosedGaussian(1.5, 4.0)
    total, _ = integrate.quad(lambda v: math.exp(gauss.score(v)), -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-6)

    beta = ClosedBeta(2.5, 3.5)
    total, _ = integrate.quad(lambda v: math.exp(beta.score(v)), 0.0, 1.0)
    assert total == pytest.approx(1.0, abs=1e-6)

    bern = ClosedBernoulli(0.3)
    assert math.exp(bern.score(0.0)) + math.exp(bern.score(1.0)) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("truth, other", [
    (ClosedGaussian(2.0, 9.0), ClosedGaussian(2.5, 9.0)),
    (ClosedGaussian(2.0, 9.0), ClosedGaussian(2.0, 16.0)),
    (ClosedBernoulli(0.3), ClosedBernoulli(0.5)),
    (ClosedBeta(2.0, 5.0), ClosedBeta(3.0, 5.0)),
])
def test_log_likelihood_prefers_true_parameters(truth, other):
    gen = make_rng(7, 1)
    samples = [truth.draw(gen) for _ in range(5000)]
    assert sum(truth.score(v) for v in samples) > sum(other.score(v) for v in samples)


def test_replay_and_stream_separation():
    a = [make_rng(7, 3).normal() for _ in range(3)]
    b = [make_rng(7, 3).normal() for _ in range(3)]
    assert a == b
    first = make_rng(7, 0).random(5)
    second = make_rng(7, 1).random(5)
    assert not np.array_equal(first, second)


def test_closed_summaries():
    assert ClosedBeta(2.0, 1.0).mean() == pytest.approx(2 / 3)
    assert ClosedBeta(2.0, 1.0).variance() == pytest.approx(2 / (9 * 4))
    assert ClosedBernoulli(0.25).variance() == pytest.approx(0.1875)
    assert ClosedDelta(4.0).variance() == 0.0


def test_symbolic_dist_helpers():
    d = Gaussian(0, 2500)
    assert str(d) == "N(0, 2500)"
    assert d.params() == (IntConst(0), IntConst(2500))
    assert d.with_params(RealConst(1.0), IntConst(2)) == Gaussian(1.0, 2)
    assert str(Beta(1, 1)) == "Beta(1, 1)"
