"""Weighted spanning tree measures Q_kappa: enumeration, marginals, sampling.

A tree's weight is the product of its edge conductances. Exact quantities on
small graphs come from recursive deletion-contraction with memoized partition
sums (16-edge cap); edge marginals on larger graphs fall back to the transfer
current. Sampling is Wilson's loop-erased random walk with conductance-
proportional steps.
"""

from __future__ import annotations

import math

import numpy as np

from .graphs import FiniteGraph, SizeCapError
from .laplacian import Conductances, KIRCHHOFF_EDGE_CAP


def spanning_trees(g: FiniteGraph):
    """All spanning trees as frozensets of edge ids (multi-edges distinct)."""
    if g.m > KIRCHHOFF_EDGE_CAP:
        raise SizeCapError(f"tree enumeration capped at {KIRCHHOFF_EDGE_CAP} edges")
    out = []
    edges = [(u, v, i) for i, (u, v) in enumerate(g.edges) if u != v]

    def rec(avail, n_comp, chosen, labels):
        if n_comp == 1:
            out.append(frozenset(chosen))
            return
        if not avail:
            return
        u0, v0, e0 = avail[0]
        rest = avail[1:]
        # include the first edge: merge v0 into u0
        merged = []
        for u, v, e in rest:
            a = u0 if u == v0 else u
            b = u0 if v == v0 else v
            if a != b:
                merged.append((a, b, e))
        rec(merged, n_comp - 1, chosen + [e0], None)
        # exclude it, if the remainder still connects
        if _connects(rest, n_comp):
            rec(rest, n_comp, chosen, None)

    rec(edges, g.n, [], None)
    return out


def _connects(edges, n):
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    unions = 0
    for u, v, _ in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            unions += 1
    return n - unions == 1


class TreeMeasure:
    """Q_kappa on the spanning trees of a fixed weighted graph.

    Partition sums Z(required, excluded) are computed by deletion-contraction
    and memoized per (required, excluded) edge-set query.
    """

    def __init__(self, g: FiniteGraph, kappa: Conductances):
        self.g = g
        self.kappa = kappa.copy()
        self._w = kappa.values()
        self._memo = {}
        self._trees = None
        if self.partition() <= 0.0:
            raise ValueError("partition function vanished; graph disconnected?")

    # -- partition sums ------------------------------------------------------

    def partition(self, required=(), excluded=()):
        """Sum of tree weights over trees containing `required`, avoiding `excluded`."""
        key = (frozenset(required), frozenset(excluded))
        if key in self._memo:
            return self._memo[key]
        req, exc = key
        if req & exc:
            self._memo[key] = 0.0
            return 0.0
        # contract required edges, drop excluded, then run the plain recursion
        label = list(range(self.g.n))

        def find(x):
            while label[x] != x:
                label[x] = label[label[x]]
                x = label[x]
            return x

        factor = 1.0
        ok = True
        for e in req:
            u, v = self.g.edges[e]
            if u == v:
                ok = False
                break
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False  # required edges contain a cycle
                break
            label[max(ru, rv)] = min(ru, rv)
            factor *= self._w[e]
        if not ok:
            self._memo[key] = 0.0
            return 0.0
        n_comp = len({find(v) for v in range(self.g.n)})
        edges = []
        for i, (u, v) in enumerate(self.g.edges):
            if i in req or i in exc or u == v:
                continue
            a, b = find(u), find(v)
            if a != b:
                edges.append((a, b, i))
        value = factor * self._partition_rec(edges, n_comp)
        self._memo[key] = value
        return value

    def _partition_rec(self, edges, n_comp):
        if n_comp == 1:
            return 1.0
        if not edges:
            return 0.0
        u0, v0, e0 = edges[0]
        rest = edges[1:]
        merged = []
        for u, v, e in rest:
            a = u0 if u == v0 else u
            b = u0 if v == v0 else v
            if a != b:
                merged.append((a, b, e))
        total = self._w[e0] * self._partition_rec(merged, n_comp - 1)
        if _connects(rest, n_comp):
            total += self._partition_rec(rest, n_comp)
        return total

    def log_partition(self):
        return math.log(self.partition())

    # -- probabilities ---------------------------------------------------

    def edge_marginal(self, f):
        """Q(f in tree); enumeration-backed below the cap, transfer current above."""
        if self.g.m <= KIRCHHOFF_EDGE_CAP:
            return self.partition(required=(f,)) / self.partition()
        from .laplacian import transfer_current
        return transfer_current(self.g, self.kappa, f, f)

    def joint_marginal(self, f, g2):
        return self.partition(required=(f, g2)) / self.partition()

    def pair_correlation(self, f, g2):
        """Q(f, g in t) - Q(f in t) Q(g in t); always <= 0 (negative association)."""
        if f == g2:
            raise ValueError("pair correlation needs two distinct edges")
        return (self.joint_marginal(f, g2)
                - self.edge_marginal(f) * self.edge_marginal(g2))

    def trees(self):
        if self._trees is None:
            self._trees = spanning_trees(self.g)
        return self._trees

    def tree_weight(self, tree):
        w = 1.0
        for e in tree:
            w *= self._w[e]
        return w

    def tree_probability(self, tree):
        return self.tree_weight(tree) / self.partition()

    # -- sampling ----------------------------------------------------------

    def sample_tree(self, rng):
        """One spanning tree ~ Q_kappa via loop-erased random walks.

        rng: numpy Generator; the walk steps to a neighbour with probability
        proportional to the connecting edge's conductance (parallel edges act
        as separate steps).
        """
        g = self.g
        root = 0
        in_tree = [False] * g.n
        in_tree[root] = True
        next_edge = [None] * g.n
        order = list(range(1, g.n))
        # per-vertex outgoing (edge, neighbour) lists with weights
        moves = [[] for _ in range(g.n)]
        probs = [None] * g.n
        for v in range(g.n):
            for w, e in g.adjacency[v]:
                moves[v].append((e, w))
            if moves[v]:
                weights = np.array([self._w[e] for e, _ in moves[v]])
                probs[v] = weights / weights.sum()
        for start in order:
            if in_tree[start]:
                continue
            u = start
            path_next = {}
            while not in_tree[u]:
                k = rng.choice(len(moves[u]), p=probs[u])
                e, w = moves[u][k]
                path_next[u] = (e, w)   # loop erasure: later visits overwrite
                u = w
            u = start
            while not in_tree[u]:
                e, w = path_next[u]
                next_edge[u] = e
                in_tree[u] = True
                u = w
        return frozenset(e for e in next_edge if e is not None)


def edge_marginal(tm: TreeMeasure, f):
    return tm.edge_marginal(f)


def pair_correlation(tm: TreeMeasure, f, g2):
    return tm.pair_correlation(f, g2)


def sample_tree(tm: TreeMeasure, seed):
    rng = np.random.default_rng(seed)
    return tm.sample_tree(rng)
