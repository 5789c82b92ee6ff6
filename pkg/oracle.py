"""
Reference computations used to check the runtime.

Nothing here goes through the symbolic machinery: expressions are read with a
small interpreter of their own, and the filters are the textbook numeric
recursions.
"""
from __future__ import annotations

import itertools
import math
from graphlib import TopologicalSorter
from typing import NamedTuple, Optional, Sequence

import numpy as np

from dist import Bernoulli, Beta, Delta, Gaussian
from expr import App, IntConst, Op, RealConst, Var

_BINARY = {
    Op.ADD: lambda a, b: a + b,
    Op.SUB: lambda a, b: a - b,
    Op.MUL: lambda a, b: a * b,
    Op.DIV: lambda a, b: a / b,
    Op.EQ: lambda a, b: (a == b) * 1.0,
    Op.NEQ: lambda a, b: (a != b) * 1.0,
    Op.LT: lambda a, b: (a < b) * 1.0,
    Op.LTE: lambda a, b: (a <= b) * 1.0,
}


def interpret(e, env: dict):
    """Value of ``e`` with every random variable read from ``env`` (floats or arrays)."""
    if isinstance(e, (RealConst, IntConst)):
        return e.value
    if isinstance(e, Var):
        return env[e.rv]
    args = [interpret(a, env) for a in e.args]
    if e.op is Op.SQRT:
        return np.sqrt(args[0])
    if e.op is Op.ITE:
        return np.where(np.asarray(args[0]) != 0, args[1], args[2])
    return _BINARY[e.op](*args)


def _parents(d) -> set:
    found = set()
    stack = list(d.params())
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            found.add(node.rv)
        elif isinstance(node, App):
            stack.extend(node.args)
    return found


def _ancestral_order(state) -> list:
    graph = {rv: _parents(state.bindings[rv]) for rv in state.bindings}
    return list(TopologicalSorter(graph).static_order())


# Scalar and multivariate Kalman filters

def kalman_filter(m0: float, p0: float, q: float, r: float,
                  observations: Sequence[Optional[float]]) -> list[tuple[float, float]]:
    """
    Filtered (mean, variance) after each step of x_0 ~ N(m0, p0),
    x_t ~ N(x_{t-1}, q), y_t ~ N(x_t, r). ``None`` skips the update.
    """
    if p0 <= 0 or q <= 0 or r <= 0:
        raise ValueError("p0, q and r must be positive")
    m, p = float(m0), float(p0)
    out = []
    for t, y in enumerate(observations):
        if t > 0:
            p += q
        if y is not None:
            gain = p / (p + r)
            m += gain * (y - m)
            p *= 1.0 - gain
        out.append((m, p))
    return out


def mv_kalman_filter(F, Q, H, R, m0, P0, observations) -> list[tuple[np.ndarray, np.ndarray]]:
    """
    Filtered (mean, covariance) after each step. Every step predicts first
    (x_t = F x_{t-1} + N(0, Q), starting from N(m0, P0)) and then updates with
    y_t = H x_t + N(0, R) unless the observation is ``None``.
    """
    F, Q, H, R = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (F, Q, H, R))
    m = np.asarray(m0, dtype=float).reshape(-1)
    P = np.atleast_2d(np.asarray(P0, dtype=float))
    eye = np.eye(len(m))
    out = []
    for y in observations:
        m = F @ m
        P = F @ P @ F.T + Q
        if y is not None:
            S = H @ P @ H.T + R
            K = np.linalg.solve(S, H @ P).T
            m = m + K @ (np.asarray(y, dtype=float).reshape(-1) - H @ m)
            P = (eye - K @ H) @ P
            P = 0.5 * (P + P.T)
        out.append((m.copy(), P.copy()))
    return out


def gaussian_condition(mean, cov, observed_idx: Sequence[int], values) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of the unobserved coordinates given the observed ones."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    observed = list(observed_idx)
    hidden = [i for i in range(len(mean)) if i not in observed]
    S_oo = cov[np.ix_(observed, observed)]
    S_ho = cov[np.ix_(hidden, observed)]
    gain = np.linalg.solve(S_oo, S_ho.T).T
    resid = np.asarray(values, dtype=float) - mean[observed]
    cond_mean = mean[hidden] + gain @ resid
    cond_cov = cov[np.ix_(hidden, hidden)] - gain @ S_ho.T
    return cond_mean, cond_cov


def beta_bernoulli_posterior(a, b, flips) -> tuple:
    if a <= 0 or b <= 0:
        raise ValueError("Beta parameters must be positive")
    ones = sum(1 for f in flips if f)
    return a + ones, b + len(flips) - ones


# Discrete enumeration

class JointTable(NamedTuple):
    order: list
    probs: dict

    def marginal(self, rv) -> float:
        """P(rv = 1)."""
        k = self.order.index(rv)
        return sum(p for assignment, p in self.probs.items() if assignment[k] == 1)

    def conditional(self, rv, evidence: dict) -> float:
        """P(rv = 1 | evidence) where evidence maps ids to 0/1."""
        idx = {x: self.order.index(x) for x in evidence}
        k = self.order.index(rv)
        total = hit = 0.0
        for assignment, p in self.probs.items():
            if all(assignment[idx[x]] == v for x, v in evidence.items()):
                total += p
                if assignment[k] == 1:
                    hit += p
        return hit / total


def enumerate_bernoulli_joint(state) -> JointTable:
    """Probability of every 0/1 assignment of a Bernoulli/Delta state."""
    order = sorted(state.bindings)
    if len(order) > 16:
        raise ValueError("enumeration is limited to 16 variables")
    probs = {}
    for assignment in itertools.product((0, 1), repeat=len(order)):
        env = dict(zip(order, assignment))
        p = 1.0
        for rv in order:
            d = state.bindings[rv]
            if isinstance(d, Delta):
                p *= 1.0 if interpret(d.value, env) == env[rv] else 0.0
            elif isinstance(d, Bernoulli):
                prob = float(interpret(d.prob, env))
                p *= prob if env[rv] == 1 else 1.0 - prob
            else:
                raise ValueError(f"X{rv} is not discrete: {d}")
            if p == 0.0:
                break
        probs[assignment] = p
    return JointTable(order, probs)


# Monte Carlo and exact moments of continuous states

class Moments(NamedTuple):
    order: list
    mean: np.ndarray
    second: np.ndarray
    mean_se: np.ndarray
    second_se: np.ndarray


def mc_moments(state, n_samples: int, seed: int) -> Moments:
    """
    First and second joint moments by ancestral sampling, with CLT standard
    errors. ``second[i, j]`` estimates E[X_i X_j].
    """
    rng = np.random.default_rng(seed)
    env = {}
    for rv in _ancestral_order(state):
        d = state.bindings[rv]
        params = [np.broadcast_to(interpret(p, env), (n_samples,)).astype(float) for p in d.params()]
        if isinstance(d, Gaussian):
            env[rv] = rng.normal(params[0], np.sqrt(params[1]))
        elif isinstance(d, Beta):
            env[rv] = rng.beta(params[0], params[1])
        elif isinstance(d, Bernoulli):
            env[rv] = (rng.random(n_samples) < params[0]).astype(float)
        else:
            env[rv] = params[0]

    order = sorted(env)
    samples = np.stack([env[rv] for rv in order])
    products = samples[:, None, :] * samples[None, :, :]
    root_n = math.sqrt(n_samples)
    return Moments(
        order,
        samples.mean(axis=1),
        products.mean(axis=2),
        samples.std(axis=1, ddof=1) / root_n,
        products.std(axis=2, ddof=1) / root_n,
    )


def linear_gaussian_moments(state) -> tuple[list, np.ndarray, np.ndarray]:
    """
    Exact joint mean and covariance of a linear-Gaussian state.

    Each mean is read as an affine function of its parents by probing it at
    the origin and at unit vectors. Point masses contribute zero variance.
    """
    order = _ancestral_order(state)
    pos = {rv: k for k, rv in enumerate(order)}
    n = len(order)
    mean = np.zeros(n)
    cov = np.zeros((n, n))
    for rv in order:
        d = state.bindings[rv]
        if isinstance(d, Delta):
            mean_expr, var = d.value, 0.0
        elif isinstance(d, Gaussian):
            mean_expr, var = d.mean, float(interpret(d.variance, {}))
        else:
            raise ValueError(f"X{rv} is not Gaussian: {d}")
        parents = sorted(_parents(d))
        zero = {p: 0.0 for p in parents}
        offset = float(interpret(mean_expr, zero))
        coef = np.zeros(n)
        for p in parents:
            coef[pos[p]] = float(interpret(mean_expr, {**zero, p: 1.0})) - offset
        k = pos[rv]
        mean[k] = coef @ mean + offset
        row = coef @ cov
        cov[k, :] = row
        cov[:, k] = row
        cov[k, k] = coef @ cov @ coef + var
    return order, mean, cov
