"""
Distributions with symbolic parameters and their closed (all-constant) forms.

A symbolic distribution (``Gaussian``, ``Beta``, ``Bernoulli``, ``Delta``)
holds expressions; ``close`` folds those against a symbolic state and returns
the matching closed distribution, which is what ``draw`` samples from and
``score`` evaluates. Scores are natural-log densities (or log masses).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional, Union

import numpy as np
from scipy.special import betaln

from errors import InvalidParam, NotClosed
from expr import DeltaLookup, Expr, as_expr, eval_expr, is_constant

LOG_2PI = math.log(2.0 * math.pi)
DELTA_RTOL = 1e-12
# swap arithmetic can push a probability a few ulps past [0, 1]
PROB_SLACK = 1e-9


class _Symbolic:
    __slots__ = ()
    symbol = "?"

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, as_expr(getattr(self, f.name)))

    def params(self) -> tuple:
        """Parameters in declaration order (mean before variance, alpha before beta)."""
        return tuple(getattr(self, f.name) for f in fields(self))

    def with_params(self, *params):
        return type(self)(*params)

    def __str__(self):
        return f"{self.symbol}({', '.join(str(p) for p in self.params())})"


@dataclass(frozen=True, slots=True)
class Gaussian(_Symbolic):
    mean: Expr
    variance: Expr
    symbol = "N"


@dataclass(frozen=True, slots=True)
class Beta(_Symbolic):
    alpha: Expr
    beta: Expr
    symbol = "Beta"


@dataclass(frozen=True, slots=True)
class Bernoulli(_Symbolic):
    prob: Expr
    symbol = "Bern"


@dataclass(frozen=True, slots=True)
class Delta(_Symbolic):
    value: Expr
    symbol = "δ"


Dist = Union[Gaussian, Beta, Bernoulli, Delta]


@dataclass(frozen=True, slots=True)
class ClosedGaussian:
    mu: float
    var: float

    def mean(self) -> float:
        return self.mu

    def variance(self) -> float:
        return self.var

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.normal(self.mu, math.sqrt(self.var)))

    def score(self, v: float) -> float:
        return -0.5 * (LOG_2PI + math.log(self.var) + (v - self.mu) ** 2 / self.var)


@dataclass(frozen=True, slots=True)
class ClosedBeta:
    alpha: float
    beta: float

    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def variance(self) -> float:
        total = self.alpha + self.beta
        return self.alpha * self.beta / (total * total * (total + 1.0))

    def draw(self, rng: np.random.Generator) -> float:
        return float(rng.beta(self.alpha, self.beta))

    def score(self, v: float) -> float:
        if not 0.0 < v < 1.0:
            return -math.inf
        return (
            (self.alpha - 1.0) * math.log(v)
            + (self.beta - 1.0) * math.log1p(-v)
            - float(betaln(self.alpha, self.beta))
        )


@dataclass(frozen=True, slots=True)
class ClosedBernoulli:
    p: float

    def mean(self) -> float:
        return self.p

    def variance(self) -> float:
        return self.p * (1.0 - self.p)

    def draw(self, rng: np.random.Generator) -> float:
        return 1.0 if rng.random() < self.p else 0.0

    def score(self, v: float) -> float:
        if v == 1:
            return math.log(self.p) if self.p > 0.0 else -math.inf
        if v == 0:
            return math.log1p(-self.p) if self.p < 1.0 else -math.inf
        return -math.inf


@dataclass(frozen=True, slots=True)
class ClosedDelta:
    value: float

    def mean(self) -> float:
        return self.value

    def variance(self) -> float:
        return 0.0

    def draw(self, rng: Optional[np.random.Generator] = None) -> float:
        return self.value

    def score(self, v: float) -> float:
        if abs(v - self.value) <= DELTA_RTOL * (1.0 + abs(self.value)):
            return 0.0
        return -math.inf


ClosedDist = Union[ClosedGaussian, ClosedBeta, ClosedBernoulli, ClosedDelta]


def _constant_params(d: Dist, g: Optional[DeltaLookup]) -> list:
    values = []
    for p in d.params():
        folded = eval_expr(p, g)
        if not is_constant(folded):
            raise NotClosed(f"{d} has a symbolic parameter {folded}")
        values.append(folded.value)
    return values


def close(d: Dist, g: Optional[DeltaLookup] = None) -> ClosedDist:
    """Fold every parameter of ``d`` to a constant and range-check the result."""
    values = _constant_params(d, g)
    if isinstance(d, Gaussian):
        mu, var = (float(v) for v in values)
        if not (math.isfinite(mu) and math.isfinite(var)) or var <= 0.0:
            raise InvalidParam(f"Gaussian needs a finite mean and positive variance, got {d}")
        return ClosedGaussian(mu, var)
    if isinstance(d, Beta):
        alpha, beta = (float(v) for v in values)
        if not (alpha > 0.0 and beta > 0.0 and math.isfinite(alpha) and math.isfinite(beta)):
            raise InvalidParam(f"Beta needs positive parameters, got {d}")
        return ClosedBeta(alpha, beta)
    if isinstance(d, Bernoulli):
        p = float(values[0])
        if not -PROB_SLACK <= p <= 1.0 + PROB_SLACK:
            raise InvalidParam(f"Bernoulli probability outside [0, 1]: {d}")
        return ClosedBernoulli(min(max(p, 0.0), 1.0))
    return ClosedDelta(float(values[0]))


def draw(d: ClosedDist, rng: np.random.Generator) -> float:
    return d.draw(rng)


def score(d: ClosedDist, v: float) -> float:
    return d.score(v)


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the stream identified by ``(seed, key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))
