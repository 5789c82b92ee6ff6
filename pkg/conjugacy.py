"""
Conjugate swaps: reverse the edge between a parent and a child while keeping
their joint distribution, for Gaussian-Gaussian, Beta-Bernoulli and
Bernoulli-Bernoulli pairs.
"""
from __future__ import annotations

from typing import Optional

from dist import Bernoulli, Beta, Delta, Dist, Gaussian
from errors import NotParent
from expr import (
    IntConst,
    Var,
    add,
    affine_of,
    div,
    eval_expr,
    free_rvs,
    is_const,
    is_constant,
    ite,
    linear_of,
    mul,
    sub,
    subst,
)
from state import SymbolicState, get_parents, trace


def swap(x1: int, x2: int, g: SymbolicState) -> tuple[SymbolicState, bool]:
    """
    Make ``x2`` independent of ``x1`` and ``x1`` dependent on ``x2``.

    On success both bindings are replaced (parameters already partially
    evaluated) and ``(g, True)`` is returned. When no conjugate rule applies
    the state is left untouched and ``(g, False)`` is returned.
    """
    d1, d2 = g[x1], g[x2]
    if x1 not in get_parents(x2, g):
        raise NotParent(x1, x2)

    rewritten = None
    if isinstance(d1, Gaussian) and isinstance(d2, Gaussian):
        rewritten = _swap_gaussian(x1, x2, d1, d2, g)
    elif isinstance(d1, Beta) and isinstance(d2, Bernoulli) and d2.prob == Var(x1):
        rewritten = _swap_beta_bernoulli(x2, d1)
    elif isinstance(d1, Bernoulli) and isinstance(d2, Bernoulli):
        rewritten = _swap_bernoulli(x1, x2, d1, d2)

    if rewritten is None:
        trace.debug("swap X%d X%d fail", x1, x2)
        return g, False

    new1, new2 = rewritten
    g[x1] = new1.with_params(*(eval_expr(p, g) for p in new1.params()))
    g[x2] = new2.with_params(*(eval_expr(p, g) for p in new2.params()))
    trace.debug("swap X%d X%d ok", x1, x2)
    return g, True


def _swap_gaussian(x1, x2, d1: Gaussian, d2: Gaussian, g) -> Optional[tuple[Dist, Dist]]:
    mu0, var0 = d1.params()
    mu, var = d2.params()
    var0, var = eval_expr(var0, g), eval_expr(var, g)
    if not (is_constant(var0) and is_constant(var)):
        return None
    form = affine_of(mu, x1, g)
    if form is None:
        return None
    a, b = eval_expr(form.a, g), eval_expr(form.b, g)
    # a symbolic slope would make the child's variance symbolic
    if not is_constant(a):
        return None
    if a.value == 0:
        return d1, Gaussian(_canonical(b, g), var)

    a, var0, var = a.value, var0.value, var.value
    total = a * a * var0 + var
    gain = a * var0 / total
    predicted = add(mul(a, mu0), b)
    parent = Gaussian(
        _canonical(add(mu0, mul(gain, sub(Var(x2), predicted))), g),
        var0 * var / total,
    )
    child = Gaussian(_canonical(predicted, g), total)
    return parent, child


def _canonical(e, g):
    """Fold ``e`` into ``c1 * X1 + ... + offset`` when it is linear."""
    form = linear_of(e, g)
    return eval_expr(e, g) if form is None else form.to_expr()


def _swap_beta_bernoulli(x2, d1: Beta) -> tuple[Dist, Dist]:
    alpha, beta = d1.params()
    observed = Var(x2)
    parent = Beta(add(alpha, ite(observed, 1, 0)), add(beta, ite(observed, 0, 1)))
    child = Bernoulli(div(alpha, add(alpha, beta)))
    return parent, child


def _swap_bernoulli(x1, x2, d1: Bernoulli, d2: Bernoulli) -> tuple[Dist, Dist]:
    p1, p2 = d1.prob, d2.prob
    p2_if_one = subst(p2, x1, IntConst(1))
    p2_if_zero = subst(p2, x1, IntConst(0))
    p2_marginal = add(mul(p1, p2_if_one), mul(sub(1, p1), p2_if_zero))

    observed = Var(x2)
    joint_if_one = mul(p1, ite(observed, p2_if_one, sub(1, p2_if_one)))
    evidence = ite(observed, p2_marginal, sub(1, p2_marginal))
    return Bernoulli(div(joint_if_one, evidence)), Bernoulli(p2_marginal)


def is_linear_gaussian(g: SymbolicState) -> bool:
    """
    Every binding is Gaussian with a constant variance and a mean that is
    affine, with a constant slope, in each variable it mentions. Point masses
    with a constant value (observed or valued variables) are allowed.
    """
    for rv in g:
        d = g[rv]
        if isinstance(d, Delta):
            if not is_const(d.value, g):
                return False
            continue
        if not isinstance(d, Gaussian) or not is_const(d.variance, g):
            return False
        mean = eval_expr(d.mean, g)
        for parent in free_rvs(mean):
            form = affine_of(mean, parent, g)
            if form is None or not is_constant(eval_expr(form.a, g)):
                return False
    return True


def is_finite_discrete(g: SymbolicState) -> bool:
    return all(isinstance(g[rv], (Bernoulli, Delta)) for rv in g)
