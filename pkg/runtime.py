"""
Streaming particle filter over the symbolic interface.

Every particle owns a model memory, a symbolic state and a private random
generator. ``infer_step`` runs the model's step function once per particle,
normalizes the log weights, extracts the weighted mixture of output marginals
and resamples systematically. With ``Algo.PF`` every ``assume`` is sampled on
the spot, which gives the plain bootstrap particle filter.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Iterator, Optional, Protocol

import numpy as np
from scipy.special import logsumexp

import interface
from dist import ClosedDelta, Dist, close, make_rng
from errors import AllParticlesDead, InferenceError, InvalidParticleCount
from expr import App, Expr, IntConst, RealConst, Var, as_expr, eval_expr, free_rvs
from state import SymbolicState, assume, gc

log = logging.getLogger(__name__)


class Algo(str, Enum):
    SSI = "ssi"
    PF = "pf"


class InferCtx:
    """What a model step sees: assume, value and observe on one particle."""

    def __init__(self, state: SymbolicState, rng: np.random.Generator, algo: Algo = Algo.SSI):
        self.state = state
        self.rng = rng
        self.algo = Algo(algo)
        self.log_weight = 0.0
        self.pf_draws = 0

    @property
    def draw_count(self) -> int:
        return self.state.draw_count + self.pf_draws

    def assume(self, d: Dist) -> Expr:
        if self.algo is Algo.PF:
            closed = close(d, self.state)
            if not isinstance(closed, ClosedDelta):
                self.pf_draws += 1
            return RealConst(closed.draw(self.rng))
        rv, _ = assume(d, self.state)
        return Var(rv)

    def observe(self, d: Dist, v: float) -> None:
        if self.algo is Algo.PF:
            self.log_weight += close(d, self.state).score(float(v))
            return
        rv, _ = assume(d, self.state)
        _, weight = interface.observe(rv, v, self.state, self.rng)
        self.log_weight += weight

    def value(self, e) -> float:
        """Sample every random variable ``e`` mentions (ascending ids) and fold it."""
        e = eval_expr(as_expr(e), self.state)
        for rv in sorted(free_rvs(e)):
            interface.value(rv, self.state, self.rng)
        return float(eval_expr(e, self.state).value)


class Model(Protocol):
    def init(self) -> Any:
        ...

    def step(self, memory: Any, inp: Any, ctx: InferCtx) -> tuple[Any, Any]:
        """Return ``(output, new_memory)``; output is an Expr or a tuple of Exprs."""


@dataclass
class Particle:
    memory: Any
    state: SymbolicState
    log_weight: float
    rng: np.random.Generator


@dataclass(frozen=True)
class StepOutput:
    """Weighted mixture of per-particle output marginals for one step."""

    weights: np.ndarray
    components: tuple
    ess: float
    draw_count: int

    @property
    def arity(self) -> int:
        return next(len(c) for c in self.components if c is not None)

    def _live(self, k: int):
        for w, comps in zip(self.weights, self.components):
            if comps is not None and w > 0.0:
                yield w, comps[k]

    def mean(self, k: int = 0) -> float:
        return float(sum(w * d.mean() for w, d in self._live(k)))

    def variance(self, k: int = 0) -> float:
        m = self.mean(k)
        return float(sum(w * (d.variance() + (d.mean() - m) ** 2) for w, d in self._live(k)))


@dataclass
class InferState:
    model: Model
    particles: list
    seed: int
    algo: Algo = Algo.SSI
    step: int = 0
    draw_total: int = 0
    resampler: Optional[np.random.Generator] = field(default=None, repr=False)


def memory_rvs(memory: Any) -> set:
    """Random variables referenced anywhere inside a model memory."""
    found: set = set()
    stack = [memory]
    while stack:
        item = stack.pop()
        if isinstance(item, (Var, App)):
            found |= free_rvs(item)
        elif isinstance(item, (RealConst, IntConst)) or item is None:
            continue
        elif isinstance(item, dict):
            stack.extend(item.values())
        elif isinstance(item, (tuple, list, set, frozenset)):
            stack.extend(item)
    return found


def infer_init(model: Model, n: int, seed: int, algo: Algo = Algo.SSI) -> InferState:
    if n < 1:
        raise InvalidParticleCount(f"need at least one particle, got {n}")
    particles = [Particle(model.init(), SymbolicState(), 0.0, make_rng(seed, i)) for i in range(n)]
    return InferState(model, particles, seed, Algo(algo), resampler=make_rng(seed))


def systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Ancestor index for each of ``len(weights)`` slots, one uniform offset shared by all."""
    n = len(weights)
    positions = (rng.random() + np.arange(n)) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.minimum(np.searchsorted(cumulative, positions, side="right"), n - 1)


def _outputs_of(out) -> tuple:
    return tuple(out) if isinstance(out, (tuple, list)) else (out,)


def infer_step(s: InferState, inp: Any) -> tuple[StepOutput, InferState]:
    n = len(s.particles)
    log_weights = np.full(n, -np.inf)
    outputs: list = [None] * n
    draws = 0

    for i, p in enumerate(s.particles):
        ctx = InferCtx(p.state, p.rng, s.algo)
        before = ctx.draw_count
        try:
            out, memory = s.model.step(p.memory, inp, ctx)
        except InferenceError as e:
            if ctx.log_weight != -math.inf:
                raise
            log.debug("particle %d died at step %d: %s", i, s.step, e)
            continue
        draws += ctx.draw_count - before
        p.memory = memory
        log_weights[i] = p.log_weight + ctx.log_weight
        outputs[i] = _outputs_of(out)

    if not np.isfinite(log_weights).any():
        raise AllParticlesDead(f"every particle has zero weight at step {s.step}")
    log_weights -= logsumexp(log_weights)
    weights = np.exp(log_weights)
    for p, lw in zip(s.particles, log_weights):
        p.log_weight = float(lw)
    ess = float(1.0 / np.sum(weights**2))

    components = []
    for p, out, w in zip(s.particles, outputs, weights):
        if out is None or w == 0.0:
            components.append(None)
            continue
        components.append(tuple(interface.marginal_of(o, p.state, p.rng) for o in out))

    result = StepOutput(weights, tuple(components), ess, draws)
    s.particles = _resample(s, weights)
    s.step += 1
    s.draw_total += draws
    log.debug("step %d: ess=%.3f draws=%d", s.step, ess, draws)
    return result, s


def _resample(s: InferState, weights: np.ndarray) -> list:
    indices = systematic_resample(weights, s.resampler)
    taken: set = set()
    survivors = []
    for slot, idx in enumerate(indices):
        src = s.particles[idx]
        if idx not in taken:
            taken.add(idx)
            survivors.append(src)
        else:
            rng = make_rng(s.seed, s.step + 1, slot)
            survivors.append(Particle(src.memory, src.state.copy(), 0.0, rng))
    for p in survivors:
        p.log_weight = -math.log(len(survivors))
        gc(memory_rvs(p.memory), p.state)
    return survivors


def stream(model: Model, inputs: Iterable, n: int, seed: int,
           algo: Algo = Algo.SSI) -> Iterator[tuple[StepOutput, InferState]]:
    s = infer_init(model, n, seed, algo)
    for inp in inputs:
        out, s = infer_step(s, inp)
        yield out, s


def run_stream(model: Model, inputs: Iterable, n: int, seed: int,
               algo: Algo = Algo.SSI) -> list[StepOutput]:
    return [out for out, _ in stream(model, inputs, n, seed, algo)]
