"""Weighted graph Laplacians: determinants, solves, currents, rank-one flips.

The Laplacian acts as Delta f(x) = sum_y c_{xy} (f(x) - f(y)). Determinants
are taken on the zero-mean subspace; numerically everything runs through the
pinned matrix (one row/column removed), using

    det Delta = |V| * det(pinned Delta),

which is independent of the pinned vertex. Dense Cholesky is used up to
DENSE_LIMIT vertices, diagonally preconditioned CG above that. All
determinants are carried in nats.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graphs import FiniteGraph, SizeCapError

DENSE_LIMIT = 2000
REFRESH_EVERY = 256
KIRCHHOFF_EDGE_CAP = 16


class Conductances:
    """Two-state edge weights: soft = 1, hard = q (q >= 1)."""

    def __init__(self, q, hard):
        if q < 1:
            raise ValueError("q must be >= 1")
        self.q = float(q)
        self.hard = np.asarray(hard, dtype=bool).copy()

    @classmethod
    def all_soft(cls, g, q):
        return cls(q, np.zeros(g.m, dtype=bool))

    @classmethod
    def all_hard(cls, g, q):
        return cls(q, np.ones(g.m, dtype=bool))

    @classmethod
    def from_bits(cls, g, q, bits):
        """bits: integer whose bit i is the state of edge i (1 = hard)."""
        hard = np.array([(bits >> i) & 1 for i in range(g.m)], dtype=bool)
        return cls(q, hard)

    def values(self):
        return np.where(self.hard, self.q, 1.0)

    def value(self, e):
        return self.q if self.hard[e] else 1.0

    def copy(self):
        return Conductances(self.q, self.hard)

    def __eq__(self, other):
        return (isinstance(other, Conductances) and self.q == other.q
                and np.array_equal(self.hard, other.hard))


def laplacian_matrix(g: FiniteGraph, weights):
    """Dense weighted Laplacian; self-loops contribute nothing."""
    L = np.zeros((g.n, g.n))
    for i, (u, v) in enumerate(g.edges):
        if u == v:
            continue
        w = weights[i]
        L[u, u] += w
        L[v, v] += w
        L[u, v] -= w
        L[v, u] -= w
    return L


def pinned_laplacian(g, weights, pin=0):
    keep = [v for v in range(g.n) if v != pin]
    return laplacian_matrix(g, weights)[np.ix_(keep, keep)], keep


def log_det_zero_mean(g: FiniteGraph, kappa: Conductances, pin=0):
    """ln det of the Laplacian restricted to zero-mean functions.

    Computed as ln|V| + ln det(pinned Laplacian) via Cholesky; raises on
    disconnected input (the determinant would vanish).
    """
    if not g.is_connected():
        raise ValueError("graph is disconnected; determinant on H0 is zero")
    if g.n == 1:
        return 0.0
    Lp, _ = pinned_laplacian(g, kappa.values(), pin)
    try:
        c = sla.cholesky(Lp, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise ValueError("pinned Laplacian is not positive definite") from exc
    return math.log(g.n) + 2.0 * float(np.sum(np.log(np.diag(c))))


# -- Kirchhoff oracle --------------------------------------------------------


def _tree_partition(adj_edges, n, weights):
    # adj_edges: list of (u, v, w-index); recursive deletion-contraction of
    # the weighted spanning-tree sum. Vertices are relabelled on the fly.
    if n == 1:
        return 1.0
    if not adj_edges:
        return 0.0
    u0, v0, w0 = adj_edges[0]
    rest = adj_edges[1:]
    # contract the first edge: v0 -> u0
    contracted = []
    for u, v, w in rest:
        a = u0 if u == v0 else u
        b = u0 if v == v0 else v
        if a != b:
            contracted.append((a, b, w))
    total = weights[w0] * _tree_partition(contracted, n - 1, weights)
    # delete the first edge (only if the rest can still connect)
    if _edges_connect(rest, n):
        total += _tree_partition(rest, n, weights)
    return total


def _edges_connect(adj_edges, n):
    """Can these edges connect all n remaining vertices?"""
    if n == 1:
        return True
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    unions = 0
    for u, v, _ in adj_edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            unions += 1
    return n - unions == 1


def kirchhoff_sum(g: FiniteGraph, kappa: Conductances):
    """|V| * sum over spanning trees of the product of edge conductances.

    Independent combinatorial oracle for log_det_zero_mean (matrix-tree
    identity), enumerable graphs only.
    """
    if g.m > KIRCHHOFF_EDGE_CAP:
        raise SizeCapError(f"kirchhoff_sum capped at {KIRCHHOFF_EDGE_CAP} edges")
    weights = kappa.values()
    # squash vertex ids to 0..k-1 and drop self-loops
    edges = [(u, v, i) for i, (u, v) in enumerate(g.edges) if u != v]
    return g.n * _tree_partition(edges, g.n, weights)


# -- solves ------------------------------------------------------------------


def _pinned_solve(g, weights, rhs_full, pin=0):
    """Solve Delta u = rhs on V \\ {pin} (u(pin) = 0), rhs given on all of V."""
    keep = [v for v in range(g.n) if v != pin]
    b = rhs_full[keep]
    if g.n - 1 <= DENSE_LIMIT:
        Lp, _ = pinned_laplacian(g, weights, pin)
        c, low = sla.cho_factor(Lp, check_finite=False)
        x = sla.cho_solve((c, low), b, check_finite=False)
    else:
        Lp = _pinned_sparse(g, weights, pin)
        dinv = sp.diags(1.0 / Lp.diagonal())
        x, info = spla.cg(Lp, b, rtol=1e-12, atol=0.0, maxiter=20000, M=dinv)
        if info != 0:
            raise RuntimeError(f"CG failed to converge (info={info})")
    u = np.zeros(g.n)
    u[keep] = x
    return u


def _pinned_sparse(g, weights, pin=0):
    rows, cols, vals = [], [], []
    remap = np.full(g.n, -1, dtype=int)
    keep = [v for v in range(g.n) if v != pin]
    remap[keep] = np.arange(g.n - 1)
    diag = np.zeros(g.n)
    for i, (u, v) in enumerate(g.edges):
        if u == v:
            continue
        w = weights[i]
        diag[u] += w
        diag[v] += w
        if u != pin and v != pin:
            rows.extend((remap[u], remap[v]))
            cols.extend((remap[v], remap[u]))
            vals.extend((-w, -w))
    rows.extend(remap[keep])
    cols.extend(remap[keep])
    vals.extend(diag[keep])
    return sp.csr_matrix((vals, (rows, cols)), shape=(g.n - 1, g.n - 1))


def edge_incidence_vector(g, e):
    """delta_head - delta_tail for the stored orientation of edge e."""
    u, v = g.edges[e]
    b = np.zeros(g.n)
    b[v] += 1.0
    b[u] -= 1.0
    return b


def pair_gradient(g, kappa, e_source, e_probe, pin=0):
    """(delta-difference of e_probe) . Delta^+ (delta-difference of e_source).

    Both right-hand sides are zero-sum, so the pinned solve equals the
    zero-mean pseudo-inverse pairing.
    """
    u = _pinned_solve(g, kappa.values(), edge_incidence_vector(g, e_source), pin)
    a, b = g.edges[e_probe]
    return float(u[b] - u[a])


def transfer_current(g, kappa, f, g2, pin=0):
    """Current through edge g2 when a unit current is driven across edge f.

    I_f(g2) = kappa_{g2} (delta_u - delta_v) . Delta^{-1} (delta_x - delta_y)
    with the stored edge orientations; I_f(f) is the spanning-tree occupation
    probability of f.
    """
    return kappa.value(g2) * pair_gradient(g, kappa, f, g2, pin)


def green_gradient(g, kappa, x, i, y, j, pin=0):
    """Gradient-gradient Green kernel between lattice bonds (x, x+e_i), (y, y+e_j)."""
    if g.embedding is None:
        raise ValueError("green_gradient needs an embedded box")
    def bond(z, k):
        z = tuple(z)
        z2 = tuple(c + (1 if t == k else 0) for t, c in enumerate(z))
        e = g.edge_at_coords(z, z2)
        if e is None:
            raise ValueError(f"no bond ({z}, {z2}) in the graph")
        a, b = g.edges[e]
        sign = 1.0 if g.embedding.get(a) == z else -1.0
        return e, sign
    es, ss = bond(x, i)
    ep, sp_ = bond(y, j)
    return ss * sp_ * pair_gradient(g, kappa, es, ep, pin)


# -- incremental pinned factorization -----------------------------------------


class LaplacianState:
    """Pinned Laplacian inverse with single-edge conductance flips.

    Keeps the explicit inverse of the pinned matrix plus the running
    log-determinant; flips are Sherman-Morrison rank-one updates and a full
    refactorization is forced every REFRESH_EVERY updates to bound drift.
    """

    def __init__(self, g: FiniteGraph, kappa: Conductances, pin=0,
                 refresh_every=REFRESH_EVERY):
        if g.n - 1 > DENSE_LIMIT:
            raise SizeCapError("LaplacianState is dense-only; graph too large")
        self.g = g
        self.kappa = kappa.copy()
        self.pin = pin
        self.refresh_every = refresh_every
        self.update_count = 0
        self._keep = [v for v in range(g.n) if v != pin]
        self._pos = {v: k for k, v in enumerate(self._keep)}
        # per-edge pinned index pairs for O(1) resistance lookups
        self._epos = [(self._pos.get(u), self._pos.get(v)) for u, v in g.edges]
        self.refresh()

    def refresh(self):
        """Recompute inverse and log-det from scratch (Cholesky)."""
        Lp, _ = pinned_laplacian(self.g, self.kappa.values(), self.pin)
        c = sla.cholesky(Lp, lower=True, check_finite=False)
        self.log_det_pinned = 2.0 * float(np.sum(np.log(np.diag(c))))
        ident = np.eye(len(self._keep))
        self.inv = sla.cho_solve((c, True), ident, check_finite=False)
        self.update_count = 0

    @property
    def log_det_zero_mean(self):
        return math.log(self.g.n) + self.log_det_pinned

    def probe_residual(self, rhs):
        """Relative residual ||A (K rhs) - rhs|| / ||rhs|| of the held inverse."""
        Lp, _ = pinned_laplacian(self.g, self.kappa.values(), self.pin)
        x = self.inv @ rhs
        return float(np.linalg.norm(Lp @ x - rhs) / np.linalg.norm(rhs))

    def _pair_resistance(self, e):
        """b^T Delta^{-1} b for b = incidence vector of edge e, O(1) lookups."""
        iu, iv = self._epos[e]
        K = self.inv
        if iu is None:
            return K[iv, iv]
        if iv is None:
            return K[iu, iu]
        return K[iu, iu] - K[iu, iv] - K[iv, iu] + K[iv, iv]

    def occupation_soft(self, e):
        """Q_{kappa^-}(e in tree): occupation probability with e forced soft.

        Uses the current inverse; if e is presently hard the resistance is
        transported back through the rank-one identity.
        """
        r_cur = self._pair_resistance(e)
        if self.kappa.hard[e]:
            delta = self.kappa.q - 1.0
            r_cur = r_cur / (1.0 - delta * r_cur)
        return float(r_cur)  # kappa_e = 1, so Q = 1 * R

    def flip_edge(self, e):
        """Toggle edge e between soft and hard; returns delta of ln det.

        The log-determinant moves by ln(1 + (c' - c) R) with R the current
        pair resistance; the inverse gets the matching Sherman-Morrison
        correction.
        """
        u, v = self.g.edges[e]
        if u == v:
            raise ValueError("cannot flip a self-loop")
        c_old = self.kappa.value(e)
        c_new = 1.0 if self.kappa.hard[e] else self.kappa.q
        delta = c_new - c_old
        r = self._pair_resistance(e)
        growth = 1.0 + delta * r
        if growth <= 0.0:
            # cannot happen for positive conductances unless the inverse
            # drifted; rebuild once and retry
            self.refresh()
            r = self._pair_resistance(e)
            growth = 1.0 + delta * r
            if growth <= 0.0:
                raise ArithmeticError("rank-one update lost positivity")
        iu, iv = self._epos[e]
        K = self.inv
        if iu is None:
            w = K[:, iv].copy()
        elif iv is None:
            w = K[:, iu].copy()
        else:
            w = K[:, iu] - K[:, iv]
        K -= (delta / growth) * np.outer(w, w)
        self.kappa.hard[e] = not self.kappa.hard[e]
        d_logdet = math.log(growth)
        self.log_det_pinned += d_logdet
        self.update_count += 1
        if self.update_count >= self.refresh_every:
            self.refresh()
        return d_logdet


def flip_edge(state: LaplacianState, e):
    """Functional wrapper: mutates the state, returns (state, delta_log_det)."""
    return state, state.flip_edge(e)
