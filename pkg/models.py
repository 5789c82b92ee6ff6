"""
Benchmark models written against the step-function contract, with seeded
ground-truth data generators.

Each model keeps its memory immutable (an Expr, a tuple of Exprs, or None
before the first step), so resampled particles can share it.
"""
from __future__ import annotations

from typing import Callable, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from dist import Bernoulli, Beta, Gaussian
from errors import UnknownModel
from expr import IntConst
from runtime import InferCtx, Model, StepOutput

DEFAULT_STEPS = 500


class Kalman1D:
    """x_t ~ N(x_{t-1}, q) with x_0 ~ N(m0, p0); y_t ~ N(x_t, r)."""

    def __init__(self, q=1.0, r=1.0, m0=0.0, p0=100.0):
        self.q, self.r, self.m0, self.p0 = q, r, m0, p0

    def init(self):
        return None

    def latent(self, prev, ctx: InferCtx):
        if prev is None:
            return ctx.assume(Gaussian(self.m0, self.p0))
        return ctx.assume(Gaussian(prev, self.q))

    def step(self, prev, y, ctx: InferCtx):
        x = self.latent(prev, ctx)
        ctx.observe(Gaussian(x, self.r), y)
        return x, x


class Outlier(Kalman1D):
    """Kalman-1D whose sensor sometimes reports with a much larger variance."""

    def __init__(self, q=1.0, r_good=1.0, r_bad=1000.0, outlier_prob=0.1, m0=0.0, p0=100.0):
        super().__init__(q=q, r=r_good, m0=m0, p0=p0)
        self.r_bad = r_bad
        self.outlier_prob = outlier_prob

    def step(self, prev, y, ctx: InferCtx):
        x = self.latent(prev, ctx)
        is_outlier = ctx.value(ctx.assume(Bernoulli(self.outlier_prob)))
        ctx.observe(Gaussian(x, self.r_bad if is_outlier else self.r), y)
        return x, x


class BetaBernoulli:
    """Coin bias p ~ Beta(a, b), one flip observed per step."""

    def __init__(self, a=1, b=1):
        self.a, self.b = a, b

    def init(self):
        return None

    def step(self, p, flip, ctx: InferCtx):
        if p is None:
            p = ctx.assume(Beta(IntConst(self.a), IntConst(self.b)))
        ctx.observe(Bernoulli(p), flip)
        return p, p


class GaussianGaussian:
    """
    Unknown mean and standard deviation: mu ~ N(mu0, mu_var),
    sigma ~ N(sigma0, sigma_var), y_t ~ N(mu, sigma * sigma).

    The observation variance depends on sigma, so the first observation
    forces sigma to be sampled.
    """

    def __init__(self, mu0=0.0, mu_var=1.0, sigma0=1.0, sigma_var=0.25):
        self.mu0, self.mu_var = mu0, mu_var
        self.sigma0, self.sigma_var = sigma0, sigma_var

    def init(self):
        return None

    def step(self, memory, y, ctx: InferCtx):
        if memory is None:
            memory = (
                ctx.assume(Gaussian(self.mu0, self.mu_var)),
                ctx.assume(Gaussian(self.sigma0, self.sigma_var)),
            )
        mu, sigma = memory
        ctx.observe(Gaussian(mu, sigma * sigma), y)
        return mu, memory


class Tree:
    """
    Three-level Gaussian tree per step: the root follows a random walk, two
    children hang off it and each child has two leaves. The outermost leaves
    are observed, left first unless ``right_first``.
    """

    def __init__(self, root_var0=100.0, root_var=1.0, child_var=1.0, leaf_var=1.0,
                 right_first=False):
        self.root_var0, self.root_var = root_var0, root_var
        self.child_var, self.leaf_var = child_var, leaf_var
        self.right_first = right_first

    def init(self):
        return None

    def step(self, prev, obs, ctx: InferCtx):
        y_left, y_right = obs
        if prev is None:
            root = ctx.assume(Gaussian(0.0, self.root_var0))
        else:
            root = ctx.assume(Gaussian(prev, self.root_var))
        left = ctx.assume(Gaussian(root, self.child_var))
        right = ctx.assume(Gaussian(root, self.child_var))
        ctx.assume(Gaussian(left, self.leaf_var))
        ctx.assume(Gaussian(right, self.leaf_var))
        outer = [(left, y_left), (right, y_right)]
        if self.right_first:
            outer.reverse()
        for child, y in outer:
            ctx.observe(Gaussian(child, self.leaf_var), y)
        return root, root


class Wheels:
    """
    Two-wheeled robot: angular velocity and forward velocity follow Gaussian
    random walks from 0; each wheel sensor reports ``vel -/+ wb * omega``.
    """

    def __init__(self, omega_var=2500.0, vel_var=2500.0, wb=2.0, sensor_err=1.0):
        self.omega_var, self.vel_var = omega_var, vel_var
        self.wb, self.sensor_err = wb, sensor_err

    def init(self):
        return (0.0, 0.0)

    def step(self, memory, rates, ctx: InferCtx):
        left_rate, right_rate = rates
        vel_last, omega_last = memory
        omega = ctx.assume(Gaussian(omega_last, self.omega_var))
        vel = ctx.assume(Gaussian(vel_last, self.vel_var))
        ctx.observe(Gaussian(vel - self.wb * omega, self.sensor_err), left_rate)
        ctx.observe(Gaussian(vel + self.wb * omega, self.sensor_err), right_rate)
        return (vel, omega), (vel, omega)


# Data generators: (steps, seed) -> (inputs, truths)

def kalman_data(steps, seed, q=1.0, r=1.0, m0=0.0, p0=100.0):
    rng = np.random.default_rng(seed)
    inputs, truths = [], []
    x = rng.normal(m0, np.sqrt(p0))
    for t in range(steps):
        if t > 0:
            x = rng.normal(x, np.sqrt(q))
        truths.append(float(x))
        inputs.append(float(rng.normal(x, np.sqrt(r))))
    return inputs, truths


def outlier_data(steps, seed, q=1.0, r_good=1.0, r_bad=1000.0, outlier_prob=0.1, m0=0.0, p0=100.0):
    rng = np.random.default_rng(seed)
    inputs, truths = [], []
    x = rng.normal(m0, np.sqrt(p0))
    for t in range(steps):
        if t > 0:
            x = rng.normal(x, np.sqrt(q))
        r = r_bad if rng.random() < outlier_prob else r_good
        truths.append(float(x))
        inputs.append(float(rng.normal(x, np.sqrt(r))))
    return inputs, truths


def beta_bernoulli_data(steps, seed, a=1, b=1):
    rng = np.random.default_rng(seed)
    p = float(rng.beta(a, b))
    flips = [int(f) for f in rng.random(steps) < p]
    return flips, [p] * steps


def gaussian_gaussian_data(steps, seed, mu0=0.0, mu_var=1.0, sigma0=1.0, sigma_var=0.25):
    rng = np.random.default_rng(seed)
    mu = float(rng.normal(mu0, np.sqrt(mu_var)))
    sigma = float(rng.normal(sigma0, np.sqrt(sigma_var)))
    ys = rng.normal(mu, abs(sigma), size=steps)
    return [float(y) for y in ys], [mu] * steps


def tree_data(steps, seed, root_var0=100.0, root_var=1.0, child_var=1.0, leaf_var=1.0):
    rng = np.random.default_rng(seed)
    inputs, truths = [], []
    root = rng.normal(0.0, np.sqrt(root_var0))
    for t in range(steps):
        if t > 0:
            root = rng.normal(root, np.sqrt(root_var))
        left, right = rng.normal(root, np.sqrt(child_var), size=2)
        y_left = rng.normal(left, np.sqrt(leaf_var))
        y_right = rng.normal(right, np.sqrt(leaf_var))
        truths.append(float(root))
        inputs.append((float(y_left), float(y_right)))
    return inputs, truths


def wheels_data(steps, seed, omega_var=2500.0, vel_var=2500.0, wb=2.0, sensor_err=1.0):
    rng = np.random.default_rng(seed)
    inputs, truths = [], []
    vel = omega = 0.0
    for _ in range(steps):
        omega = rng.normal(omega, np.sqrt(omega_var))
        vel = rng.normal(vel, np.sqrt(vel_var))
        left = rng.normal(vel - wb * omega, np.sqrt(sensor_err))
        right = rng.normal(vel + wb * omega, np.sqrt(sensor_err))
        truths.append((float(vel), float(omega)))
        inputs.append((float(left), float(right)))
    return inputs, truths


class BenchmarkSpec(BaseModel):
    """
    A named benchmark: its constants, model factory and data generator.

    ``data_constants`` override ``constants`` for the generator only, so the
    synthetic data can be drawn with different settings than the model assumes.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    constants: dict[str, Union[int, float]]
    build: Callable[..., Model]
    generator: Callable[..., tuple]
    data_constants: dict[str, Union[int, float]] = {}

    def make_model(self, **overrides) -> Model:
        return self.build(**{**self.constants, **overrides})

    def generate(self, steps: int = DEFAULT_STEPS, seed: int = 0) -> tuple[list, list]:
        return self.generator(steps, seed, **{**self.constants, **self.data_constants})

    def loss(self, output: StepOutput, truth) -> float:
        """Squared error of the mixture mean, averaged over output coordinates."""
        truth = truth if isinstance(truth, (tuple, list)) else (truth,)
        errors = [(output.mean(k) - t) ** 2 for k, t in enumerate(truth)]
        return float(sum(errors) / len(errors))


BENCHMARKS: dict[str, BenchmarkSpec] = {
    spec.name: spec
    for spec in (
        BenchmarkSpec(name="beta-bernoulli", constants={"a": 1, "b": 1},
                      build=BetaBernoulli, generator=beta_bernoulli_data),
        BenchmarkSpec(name="gaussian-gaussian",
                      constants={"mu0": 0.0, "mu_var": 1.0, "sigma0": 1.0, "sigma_var": 0.25},
                      build=GaussianGaussian, generator=gaussian_gaussian_data),
        BenchmarkSpec(name="kalman1d", constants={"q": 1.0, "r": 1.0, "m0": 0.0, "p0": 100.0},
                      build=Kalman1D, generator=kalman_data),
        BenchmarkSpec(name="outlier",
                      constants={"q": 1.0, "r_good": 1.0, "r_bad": 1000.0,
                                 "outlier_prob": 0.1, "m0": 0.0, "p0": 100.0},
                      data_constants={"outlier_prob": 0.01},
                      build=Outlier, generator=outlier_data),
        BenchmarkSpec(name="tree",
                      constants={"root_var0": 100.0, "root_var": 1.0,
                                 "child_var": 1.0, "leaf_var": 1.0},
                      build=Tree, generator=tree_data),
        BenchmarkSpec(name="wheels",
                      constants={"omega_var": 2500.0, "vel_var": 2500.0,
                                 "wb": 2.0, "sensor_err": 1.0},
                      build=Wheels, generator=wheels_data),
    )
}


def get_benchmark(name: str) -> BenchmarkSpec:
    try:
        return BENCHMARKS[name]
    except KeyError:
        raise UnknownModel(
            f"unknown model {name!r}; choose one of {', '.join(sorted(BENCHMARKS))}"
        ) from None


def beta_bernoulli(**constants) -> Model:
    return get_benchmark("beta-bernoulli").make_model(**constants)


def gaussian_gaussian(**constants) -> Model:
    return get_benchmark("gaussian-gaussian").make_model(**constants)


def kalman_1d(**constants) -> Model:
    return get_benchmark("kalman1d").make_model(**constants)


def outlier(**constants) -> Model:
    return get_benchmark("outlier").make_model(**constants)


def tree(**constants) -> Model:
    return get_benchmark("tree").make_model(**constants)


def wheels(**constants) -> Model:
    return get_benchmark("wheels").make_model(**constants)
