"""Tree decompositions of graph games and a bag DP for constrained max excess.

The DP maximizes ``v(S) - x(S)`` over ``S ⊇ include`` with ``S ∩ exclude = ∅``.
Each vertex is charged at the topmost bag containing it and each edge at the
topmost bag containing both endpoints, so nothing is counted twice.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import networkx as nx
from networkx.algorithms.approximation import treewidth_min_degree, treewidth_min_fill_in

from .errors import InputError, TooLargeForExact
from .game import Coalition, check_payoff, coalition_of, members, submasks
from .representations import GraphGame

METHODS = ("min-degree", "min-fill", "exact-small")
EXACT_CAP = 12


@dataclass(frozen=True)
class TreeDecomposition:
    parent: tuple  # parent[t] is the parent node of t, -1 for the root
    bags: tuple    # bags[t] is a bitmask of players

    @property
    def width(self) -> int:
        return max(bin(b).count("1") for b in self.bags) - 1

    @property
    def root(self) -> int:
        return self.parent.index(-1)

    def children(self) -> list:
        kids = [[] for _ in self.bags]
        for t, p in enumerate(self.parent):
            if p >= 0:
                kids[p].append(t)
        return kids

    def problems(self, g: GraphGame) -> list:
        """Violated decomposition conditions (empty when valid)."""
        out = []
        nodes = len(self.bags)
        if len(self.parent) != nodes or nodes == 0:
            return ["parent array and bag list disagree"]
        if self.parent.count(-1) != 1:
            out.append("tree must have exactly one root")
        # parent pointers must reach the root without cycles
        for t in range(nodes):
            seen = set()
            u = t
            while u != -1:
                if u in seen or not (-1 <= self.parent[u] < nodes):
                    out.append(f"node {t} is not connected to the root")
                    break
                seen.add(u)
                u = self.parent[u]
        if out:
            return out
        covered = 0
        for b in self.bags:
            covered |= b
        if covered != g.players.grand:
            missing = g.players.format_coalition(g.players.grand & ~covered)
            out.append(f"players not covered by any bag: {missing}")
        for i, j, _ in g.edges:
            pair = (1 << i) | (1 << j)
            if not any(b & pair == pair for b in self.bags):
                out.append(f"edge {g.players.names[i]}-{g.players.names[j]} not inside a bag")
        for v in range(g.players.n):
            holding = {t for t, b in enumerate(self.bags) if b >> v & 1}
            if not holding:
                continue
            # connected iff exactly one holding node has a parent outside the set
            tops = [t for t in holding if self.parent[t] not in holding]
            if len(tops) != 1:
                out.append(f"bags holding {g.players.names[v]} are not connected")
        return out

    def is_valid(self, g: GraphGame) -> bool:
        return not self.problems(g)

    def rerooted(self, new_root: int) -> "TreeDecomposition":
        adj = [[] for _ in self.bags]
        for t, p in enumerate(self.parent):
            if p >= 0:
                adj[t].append(p)
                adj[p].append(t)
        parent = [-2] * len(self.bags)
        parent[new_root] = -1
        stack = [new_root]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if parent[w] == -2:
                    parent[w] = u
                    stack.append(w)
        return TreeDecomposition(tuple(parent), self.bags)

    def dump(self, g: GraphGame) -> dict:
        return {"parent": list(self.parent),
                "bags": [g.players.names_of(b) for b in self.bags],
                "width": self.width}

    @classmethod
    def load(cls, g: GraphGame, obj: dict) -> "TreeDecomposition":
        try:
            parent = tuple(int(p) for p in obj["parent"])
            bags = tuple(g.players.coalition(b) for b in obj["bags"])
        except (KeyError, TypeError, ValueError):
            raise InputError("decomposition needs 'parent' and 'bags' lists")
        td = cls(parent, bags)
        problems = td.problems(g)
        if problems:
            raise InputError("invalid decomposition: " + "; ".join(problems))
        return td


def _graph(g: GraphGame) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.players.n))
    G.add_edges_from((i, j) for i, j, _ in g.edges)
    return G


def _from_nx_tree(tree: nx.Graph) -> TreeDecomposition:
    nodes = list(tree.nodes)
    pos = {node: k for k, node in enumerate(nodes)}
    parent = [-1] * len(nodes)
    for u, w in nx.bfs_edges(tree, nodes[0]):
        parent[pos[w]] = pos[u]
    return TreeDecomposition(tuple(parent), tuple(coalition_of(node) for node in nodes))


def from_elimination_order(g: GraphGame, order: Sequence[int]) -> TreeDecomposition:
    """Bag per eliminated vertex: itself plus its neighbours at elimination time."""
    n = g.players.n
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the players")
    adj = [set() for _ in range(n)]
    for i, j, _ in g.edges:
        adj[i].add(j)
        adj[j].add(i)
    position = {v: k for k, v in enumerate(order)}
    bags = []
    parent = []
    for v in order:
        nbrs = adj[v]
        bags.append((1 << v) | coalition_of(nbrs))
        parent.append(min(position[u] for u in nbrs) if nbrs else -1)
        for a, b in combinations(nbrs, 2):
            adj[a].add(b)
            adj[b].add(a)
        for u in nbrs:
            adj[u].discard(v)
        adj[v] = set()
    # separate components: hang every extra root below the last one
    roots = [t for t, p in enumerate(parent) if p == -1]
    for t in roots[:-1]:
        parent[t] = roots[-1]
    return TreeDecomposition(tuple(parent), tuple(bags))


def exact_elimination_order(g: GraphGame) -> tuple:
    """Optimal elimination order by DP over vertex subsets; ``(width, order)``."""
    n = g.players.n
    if n > EXACT_CAP:
        raise TooLargeForExact(f"exact treewidth is limited to {EXACT_CAP} players, got {n}")
    nbr = [0] * n
    for i, j, _ in g.edges:
        nbr[i] |= 1 << j
        nbr[j] |= 1 << i
    full = (1 << n) - 1

    def q_size(S: int, v: int) -> int:
        # vertices outside S ∪ {v} reachable from v through S
        seen = 1 << v
        frontier = [v]
        reach = 0
        while frontier:
            u = frontier.pop()
            step = nbr[u] & ~seen
            seen |= step
            reach |= step & ~S
            for w in members(step & S):
                frontier.append(w)
        return bin(reach).count("1")

    best = [0] * (1 << n)
    choice = [0] * (1 << n)
    best[0] = -1
    for S in range(1, 1 << n):
        value = None
        for v in members(S):
            rest = S & ~(1 << v)
            cand = max(best[rest], q_size(rest, v))
            if value is None or cand < value:
                value, pick = cand, v
        best[S] = value
        choice[S] = pick
    order = []
    S = full
    while S:
        v = choice[S]
        order.append(v)
        S &= ~(1 << v)
    order.reverse()
    return max(best[full], 0), tuple(order)


def decompose(g: GraphGame, method: str = "min-fill") -> TreeDecomposition:
    """Tree decomposition by heuristic or, for small graphs, exactly."""
    if method == "exact-small":
        _, order = exact_elimination_order(g)
        td = from_elimination_order(g, order)
    elif method == "min-degree":
        td = _from_nx_tree(treewidth_min_degree(_graph(g))[1])
    elif method == "min-fill":
        td = _from_nx_tree(treewidth_min_fill_in(_graph(g))[1])
    else:
        raise InputError(f"unknown decomposition method {method!r}")
    problems = td.problems(g)
    if problems:
        raise AssertionError("decomposition is invalid: " + "; ".join(problems))
    return td


def treewidth(g: GraphGame, method: str = "exact-small") -> int:
    return decompose(g, method).width


# Dynamic program --------------------------------------------------------------

def _edge_owners(g: GraphGame, td: TreeDecomposition) -> list:
    owned = [[] for _ in td.bags]
    holding = [[] for _ in range(g.players.n)]
    for t, b in enumerate(td.bags):
        for v in members(b):
            holding[v].append(t)
    for i, j, w in g.edges:
        pair = (1 << i) | (1 << j)
        for t in holding[i]:
            if td.bags[t] & pair != pair:
                continue
            p = td.parent[t]
            if p < 0 or td.bags[p] & pair != pair:
                owned[t].append((pair, w))
                break
    return owned


def max_excess_constrained_argmax(g: GraphGame, x: Sequence[Fraction],
                                  include: Coalition, exclude: Coalition,
                                  td: TreeDecomposition) -> tuple:
    """Best ``(excess, coalition)`` subject to the include/exclude filter."""
    check_payoff(g, x)
    if include & exclude:
        raise ValueError("include and exclude overlap")
    x = [Fraction(v) for v in x]
    kids = td.children()
    owned_edges = _edge_owners(g, td)
    root = td.root

    order = []
    stack = [root]
    while stack:
        u = stack.pop()
        order.append(u)
        stack.extend(kids[u])
    order.reverse()  # children before parents

    # tables[t][A] = (best subtree score with bag assignment A, child picks)
    tables = [None] * len(td.bags)
    for t in order:
        bag = td.bags[t]
        p = td.parent[t]
        own_vertices = bag & ~(td.bags[p] if p >= 0 else 0)
        edges = owned_edges[t]
        child_best = []
        for c in kids[t]:
            sep = td.bags[c] & bag
            best = {}
            for A, (val, _) in tables[c].items():
                key = A & sep
                if key not in best or val > best[key][0]:
                    best[key] = (val, A)
            child_best.append((c, sep, best))
        base = include & bag
        free = bag & ~include & ~exclude
        table = {}
        for sub in submasks(free):
            A = base | sub
            val = Fraction(0)
            for v in members(A & own_vertices):
                val -= x[v]
            for pair, w in edges:
                if A & pair == pair:
                    val += w
            picks = []
            for c, sep, best in child_best:
                cval, cA = best[A & sep]
                val += cval
                picks.append((c, cA))
            table[A] = (val, picks)
        tables[t] = table

    best_A = max(tables[root], key=lambda A: (tables[root][A][0], -A))
    value = tables[root][best_A][0]
    S = 0
    stack = [(root, best_A)]
    while stack:
        t, A = stack.pop()
        S |= A
        for c, cA in tables[t][A][1]:
            stack.append((c, cA))
    return value, S


def max_excess_constrained(g: GraphGame, x: Sequence[Fraction], include: Coalition,
                           exclude: Coalition, td: TreeDecomposition | None = None) -> Fraction:
    if td is None:
        td = g.decomposition()
    return max_excess_constrained_argmax(g, x, include, exclude, td)[0]


def max_excess_big_weight(g: GraphGame, x: Sequence[Fraction], include: Coalition,
                          exclude: Coalition, td: TreeDecomposition | None = None) -> Fraction:
    """Same quantity via node-weight modification instead of hard constraints.

    Forced members get payoff ``-1 - deg·B`` and forbidden players
    ``1 + deg·B`` (``B`` the largest absolute edge weight), which makes every
    optimum honour the filter; the DP then runs unconstrained.
    """
    if td is None:
        td = g.decomposition()
    if include & exclude:
        raise ValueError("include and exclude overlap")
    big = max((abs(w) for _, _, w in g.edges), default=Fraction(0))
    degree = [len(a) for a in g.adjacency]
    modified = [Fraction(v) for v in x]
    for v in members(include):
        modified[v] = -1 - degree[v] * big
    for v in members(exclude):
        modified[v] = 1 + degree[v] * big
    value, S = max_excess_constrained_argmax(g, modified, 0, 0, td)
    assert S & include == include and not S & exclude
    return value + sum((modified[v] - Fraction(x[v]) for v in members(include)), Fraction(0))
