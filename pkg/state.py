"""
The symbolic state: a finite map from random-variable ids to symbolic
distributions, with the mutators (assume, intervene, eval_star) and the
dependency queries hoisting relies on.

Mutators update the state in place and return it, so a particle owns its
state and resampling or ``marginal_of`` work on ``copy()``.
"""
from __future__ import annotations

import heapq
import logging
from typing import Iterable, Optional

from dist import Delta, Dist
from errors import CycleDetected, NotParent, UnboundVariable
from expr import Expr, RealConst, RvId, eval_expr, free_rvs, rvs_in_order

log = logging.getLogger(__name__)
trace = logging.getLogger("ssi.trace")


class SymbolicState:
    def __init__(self, bindings: Optional[dict] = None, next_id: int = 0,
                 draw_count: int = 0, swap_count: int = 0):
        self.bindings: dict[RvId, Dist] = dict(bindings or {})
        self.next_id = next_id
        self.draw_count = draw_count
        self.swap_count = swap_count

    def copy(self) -> "SymbolicState":
        # Dists and Exprs are immutable, so a fresh dict is a full copy.
        return SymbolicState(self.bindings, self.next_id, self.draw_count, self.swap_count)

    def __getitem__(self, rv: RvId) -> Dist:
        try:
            return self.bindings[rv]
        except KeyError:
            raise UnboundVariable(rv) from None

    def __setitem__(self, rv: RvId, d: Dist) -> None:
        self.bindings[rv] = d

    def __contains__(self, rv) -> bool:
        return rv in self.bindings

    def __len__(self) -> int:
        return len(self.bindings)

    def __iter__(self):
        return iter(sorted(self.bindings))

    def delta_value(self, rv: RvId) -> Optional[Expr]:
        d = self.bindings.get(rv)
        return d.value if isinstance(d, Delta) else None

    def __str__(self):
        body = ", ".join(f"X{rv} ↦ {self.bindings[rv]}" for rv in self)
        return "{" + body + "}"

    __repr__ = __str__


def dist_rvs(d: Dist) -> frozenset:
    found = set()
    for p in d.params():
        found |= free_rvs(p)
    return frozenset(found)


def assume(d: Dist, g: SymbolicState) -> tuple[RvId, SymbolicState]:
    """Bind a fresh id to ``d``; returns the id and the (updated) state."""
    for rv in dist_rvs(d):
        if rv not in g:
            raise UnboundVariable(rv)
    rv = g.next_id
    g.next_id += 1
    g[rv] = d
    return rv, g


def intervene(x: RvId, v: float, g: SymbolicState) -> SymbolicState:
    g[x]  # raises UnboundVariable
    g[x] = Delta(RealConst(float(v)))
    trace.debug("intervene X%d = %r", x, float(v))
    return g


def eval_star(x: RvId, g: SymbolicState) -> SymbolicState:
    """Replace each parameter of ``g(x)`` by its partial evaluation in ``g``."""
    d = g[x]
    g[x] = d.with_params(*(eval_expr(p, g) for p in d.params()))
    return g


def get_parents(x: RvId, g: SymbolicState) -> list[RvId]:
    parents: list[RvId] = []
    for p in g[x].params():
        for rv in rvs_in_order(p):
            if rv not in parents:
                parents.append(rv)
    return parents


def ancestors(xs: Iterable[RvId], g: SymbolicState) -> set[RvId]:
    """Strict ancestors of ``xs``: everything reachable through parent edges."""
    seen: set[RvId] = set()
    stack = [p for x in xs for p in dist_rvs(g[x])]
    while stack:
        rv = stack.pop()
        if rv in seen:
            continue
        seen.add(rv)
        stack.extend(dist_rvs(g[rv]))
    return seen


def topo_sort(xs: Iterable[RvId], g: SymbolicState) -> list[RvId]:
    """
    Order ``xs`` so every element precedes its descendants among ``xs``.

    Ties are broken by ascending id. Raises CycleDetected if the dependency
    graph has a loop through one of ``xs``.
    """
    xs = list(dict.fromkeys(xs))
    members = set(xs)
    above = {}
    for x in xs:
        anc = ancestors([x], g)
        if x in anc:
            raise CycleDetected(f"X{x} is its own ancestor")
        above[x] = anc & members

    waiting = {x: len(above[x]) for x in xs}
    below = {x: [y for y in xs if x in above[y]] for x in xs}
    ready = [x for x in xs if waiting[x] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        x = heapq.heappop(ready)
        order.append(x)
        for y in below[x]:
            waiting[y] -= 1
            if waiting[y] == 0:
                heapq.heappush(ready, y)
    if len(order) != len(xs):
        raise CycleDetected(f"no topological order for {sorted(xs)}")
    return order


def can_swap(x1: RvId, x2: RvId, g: SymbolicState) -> bool:
    """
    True when reversing the edge ``x1 -> x2`` keeps the graph acyclic.

    After a swap, ``x1`` may depend on every parent of ``x2``, so the swap is
    illegal exactly when ``x1`` reaches ``x2`` through some other parent.
    """
    g[x1]  # raises UnboundVariable
    parents = get_parents(x2, g)
    if x1 not in parents:
        raise NotParent(x1, x2)
    others = [p for p in parents if p != x1]
    return x1 not in ancestors(others, g) and x1 not in others


def children_map(g: SymbolicState) -> dict[RvId, list[RvId]]:
    children: dict[RvId, list[RvId]] = {rv: [] for rv in g}
    for rv in g:
        for parent in get_parents(rv, g):
            children.setdefault(parent, []).append(rv)
    return children


def gc(live: Iterable[RvId], g: SymbolicState) -> SymbolicState:
    """Drop every binding that is neither live nor an ancestor of a live id."""
    live = {rv for rv in live if rv in g}
    keep = live | ancestors(live, g)
    dropped = len(g) - len(keep)
    g.bindings = {rv: d for rv, d in g.bindings.items() if rv in keep}
    if dropped:
        log.debug("gc dropped %d binding(s), %d kept", dropped, len(keep))
    return g


def check_well_formed(g: SymbolicState) -> None:
    """Raise UnboundVariable or CycleDetected unless ``g`` is closed and acyclic."""
    for rv in g:
        for parent in dist_rvs(g[rv]):
            if parent not in g:
                raise UnboundVariable(parent)

    done: set[RvId] = set()
    for start in g:
        if start in done:
            continue
        on_path: set[RvId] = set()
        stack = [(start, iter(get_parents(start, g)))]
        on_path.add(start)
        while stack:
            node, pending = stack[-1]
            parent = next(pending, None)
            if parent is None:
                stack.pop()
                on_path.discard(node)
                done.add(node)
            elif parent in on_path:
                raise CycleDetected(f"X{parent} is part of a loop")
            elif parent not in done:
                on_path.add(parent)
                stack.append((parent, iter(get_parents(parent, g))))


def to_dot(g: SymbolicState, name: str = "state") -> str:
    """Graphviz rendering of the dependency graph, one node per binding."""
    lines = [f"digraph {name} {{"]
    for rv in g:
        label = f"X{rv} ↦ {g[rv]}".replace('"', '\\"')
        lines.append(f'  X{rv} [label="{label}"];')
    for rv in g:
        for parent in get_parents(rv, g):
            lines.append(f"  X{parent} -> X{rv};")
    lines.append("}")
    return "\n".join(lines) + "\n"
