"""
Hoisting and the symbolic interface built on it.

``hoist`` swaps a variable with its ancestors until it is a root, sampling a
parent whenever a swap has no closed form. ``value`` and ``observe`` hoist,
close the variable's marginal, then draw from it or score it and fix the
variable to the resulting value.
"""
from __future__ import annotations

import logging

import numpy as np

from conjugacy import swap
from dist import ClosedDelta, ClosedDist, close
from errors import InternalCycle, Unsupported
from expr import Var, as_expr, eval_expr, is_constant
from state import SymbolicState, can_swap, eval_star, get_parents, intervene, topo_sort, trace

log = logging.getLogger(__name__)


class NonConjugate(Exception):
    """Raised inside hoisting when ``parent`` and ``child`` cannot be swapped."""

    def __init__(self, parent: int, child: int):
        super().__init__(f"X{parent} -> X{child} has no conjugate swap")
        self.parent = parent
        self.child = child


def hoist_helper(x_cur: int, roots: set, g: SymbolicState) -> SymbolicState:
    """
    Turn ``x_cur`` into a root, ignoring dependencies on ``roots``.

    Parents are hoisted first in topological order, then swapped with
    ``x_cur`` in reverse order. A parent that a previous swap folded away
    (point mass or zero coefficient) is skipped. Raises NonConjugate on the
    first swap without a closed form.
    """
    eval_star(x_cur, g)
    parents = topo_sort(get_parents(x_cur, g), g)
    visited = set(roots)
    for par in parents:
        if par not in roots:
            hoist_helper(par, visited, g)
            visited.add(par)

    for par in reversed(parents):
        if par in roots or par not in get_parents(x_cur, g):
            continue
        if not can_swap(par, x_cur, g):
            raise InternalCycle(f"swapping X{par} and X{x_cur} would create a cycle")
        g.swap_count += 1
        _, conjugate = swap(par, x_cur, g)
        if not conjugate:
            raise NonConjugate(par, x_cur)
    return g


def hoist(x_in: int, g: SymbolicState, rng: np.random.Generator) -> SymbolicState:
    """
    Make ``x_in`` a root of ``g``.

    Each failed attempt leaves ``g`` as it was before the attempt, values the
    blocking parent, folds it into the child and starts over.
    """
    while True:
        work = g.copy()
        try:
            hoist_helper(x_in, set(), work)
        except NonConjugate as blocked:
            g.swap_count = work.swap_count
            trace.debug("fallback X%d -> X%d", blocked.parent, blocked.child)
            value(blocked.parent, g, rng)
            eval_star(blocked.child, g)
            continue
        g.bindings = work.bindings
        g.swap_count = work.swap_count
        return g


def value(x: int, g: SymbolicState, rng: np.random.Generator) -> tuple[float, SymbolicState]:
    """Sample ``x`` from its current marginal and fix it to the sample."""
    hoist(x, g, rng)
    eval_star(x, g)
    d = close(g[x], g)
    v = d.draw(rng)
    if not isinstance(d, ClosedDelta):
        g.draw_count += 1
        trace.debug("sample X%d = %r", x, v)
    intervene(x, v, g)
    return v, g


def observe(x: int, v: float, g: SymbolicState, rng: np.random.Generator) -> tuple[SymbolicState, float]:
    """Condition on ``x == v``; returns the state and the log density of ``v``."""
    hoist(x, g, rng)
    eval_star(x, g)
    d = close(g[x], g)
    weight = d.score(float(v))
    intervene(x, v, g)
    return g, weight


def marginal_of(e, g: SymbolicState, rng: np.random.Generator) -> ClosedDist:
    """
    Closed marginal of a constant or a single random variable.

    Works on a private copy; ``g`` is left as it was.
    """
    folded = eval_expr(as_expr(e), g)
    if is_constant(folded):
        return ClosedDelta(float(folded.value))
    if not isinstance(folded, Var):
        raise Unsupported(f"marginal of composite expression {folded}")
    scratch = g.copy()
    hoist(folded.rv, scratch, rng)
    eval_star(folded.rv, scratch)
    return close(scratch[folded.rv], scratch)
