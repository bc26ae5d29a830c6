"""Seeded heat-bath dynamics targeting P^{G,p}, with coupling and checkpoints.

Each sweep visits the active edges in fixed ascending id order and resamples
each edge from its exact conditional. Small systems (at most TABLE_CAP active
edges) use a precomputed conditional table derived from the exact enumeration;
larger systems track a pinned Laplacian inverse and get each conditional from
an O(1) pair-resistance lookup. Identical seeds give identical trajectories,
across checkpoint boundaries and in either mode.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .graphs import FiniteGraph, contract
from .laplacian import Conductances, LaplacianState
from .model import (MeasureSpec, conditional_from_occupation,
                    enumerate_distribution)

TABLE_CAP = 12
CHECKPOINT_VERSION = 1


def central_edge(g: FiniteGraph):
    """The observable edge: bond at the origin in direction e1 when embedded."""
    if g.embedding:
        dim = len(next(iter(g.embedding.values())))
        coords = sorted(g.embedding.values())
        lo = [min(c[i] for c in coords) for i in range(dim)]
        hi = [max(c[i] for c in coords) for i in range(dim)]
        # origin for boxes centered there, geometric middle otherwise
        base = tuple(0 if lo[i] < 0 <= hi[i] else (lo[i] + hi[i]) // 2
                     for i in range(dim))
        step = tuple(1 if i == 0 else 0 for i in range(dim))
        nxt = tuple(base[i] + step[i] for i in range(dim))
        e = g.edge_at_coords(base, nxt)
        if e is not None:
            return e
        v = g.vertex_at(base)
        if v is not None:
            ids = [i for i, (a, b) in enumerate(g.edges) if v in (a, b)]
            if ids:
                return min(ids)
    return 0


def conditional_table(spec: MeasureSpec):
    """table[bits][slot] = P(kappa_f = q | rest) from the exact enumeration."""
    dist = enumerate_distribution(spec)
    m = spec.n_active
    lw = dist.log_weights
    table = []
    for bits in range(1 << m):
        row = []
        for slot in range(m):
            up = bits | (1 << slot)
            dn = bits & ~(1 << slot)
            a, b = lw[up], lw[dn]
            if a == -math.inf:
                row.append(0.0)
            elif b == -math.inf:
                row.append(1.0)
            else:
                row.append(1.0 / (1.0 + math.exp(b - a)))
        table.append(row)
    return table


class ChainState:
    """One heat-bath chain; single-writer, owns its Laplacian factorization."""

    def __init__(self, spec: MeasureSpec, seed=None, init=None, burnin=0,
                 observable_edge=None, mode=None, _rng_state=None):
        self.spec = spec
        self.m = spec.n_active
        if mode is None:
            if spec.q == 1.0 or spec.p in (0.0, 1.0):
                mode = "bernoulli"    # conditionals do not depend on the state
            else:
                mode = "table" if self.m <= TABLE_CAP else "laplacian"
        self.mode = mode
        if init is None:
            init = "hard" if spec.bc == "wired" else "soft"
        if init == "soft":
            bits = 0
        elif init == "hard":
            bits = (1 << self.m) - 1
        else:
            bits = int(init)
        self.init = init
        self._bits = bits
        self.burnin = int(burnin)
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        if _rng_state is not None:
            self.rng.bit_generator.state = _rng_state
        if observable_edge is None:
            ce = central_edge(spec.graph)
            observable_edge = ce if ce in spec._active_set else spec.active[0]
        self.observable_edge = observable_edge
        self._obs_slot = spec.active.index(observable_edge)
        self.sweep_count = 0
        self.acc = {"n": 0, "marg_sum": 0.0, "h_sum": 0.0, "h_series": []}
        self._table = None
        self.laplacian = None
        if self.mode == "table":
            self._table = conditional_table(spec)
        elif self.mode == "laplacian":
            self._build_laplacian()
        elif self.mode != "bernoulli":
            raise ValueError(f"unknown chain mode {self.mode!r}")

    # -- state access ----------------------------------------------------

    @property
    def bits(self):
        return self._bits

    def hard_array(self):
        return self.spec.bits_to_active(self._bits)

    def _build_laplacian(self):
        kappa = Conductances(self.spec.q, self.spec.full_hard(self.hard_array()))
        self.laplacian = LaplacianState(self.spec.graph, kappa)

    # -- dynamics ----------------------------------------------------------

    def update_edge(self, slot, u):
        """Heat-bath visit of one active edge with uniform u."""
        if self._table is not None:
            if u < self._table[self._bits][slot]:
                self._bits |= 1 << slot
            else:
                self._bits &= ~(1 << slot)
            return
        if self.mode == "bernoulli":
            if u < self.spec.p:
                self._bits |= 1 << slot
            else:
                self._bits &= ~(1 << slot)
            return
        spec = self.spec
        e = spec.active[slot]
        q_occ = self.laplacian.occupation_soft(e)
        cond = conditional_from_occupation(spec.p, spec.q, q_occ)
        want = u < cond
        have = bool((self._bits >> slot) & 1)
        if want != have:
            self.laplacian.flip_edge(e)
            self._bits ^= 1 << slot

    def conditional(self, slot):
        """Current heat-bath conditional of the given active slot."""
        if self._table is not None:
            return self._table[self._bits][slot]
        if self.mode == "bernoulli":
            return self.spec.p
        q_occ = self.laplacian.occupation_soft(self.spec.active[slot])
        return conditional_from_occupation(self.spec.p, self.spec.q, q_occ)

    def sweep(self):
        """One full scan in ascending edge order; records observables post burn-in."""
        u = self.rng.random(self.m).tolist()
        if self._table is not None:
            bits = self._bits
            tbl = self._table
            for slot in range(self.m):
                if u[slot] < tbl[bits][slot]:
                    bits |= 1 << slot
                else:
                    bits &= ~(1 << slot)
            self._bits = bits
        elif self.mode == "bernoulli":
            bits = 0
            p = self.spec.p
            for slot in range(self.m):
                if u[slot] < p:
                    bits |= 1 << slot
            self._bits = bits
        else:
            for slot in range(self.m):
                self.update_edge(slot, u[slot])
        self.sweep_count += 1
        if self.sweep_count > self.burnin:
            h = bin(self._bits).count("1")
            self.acc["n"] += 1
            self.acc["h_sum"] += h
            self.acc["marg_sum"] += (self._bits >> self._obs_slot) & 1
            self.acc["h_series"].append(h)
        return self

    def run(self, sweeps):
        for _ in range(sweeps):
            self.sweep()
        return self

    # -- summaries -----------------------------------------------------------

    def summary(self):
        n = self.acc["n"]
        if n == 0:
            raise ValueError("no recorded sweeps (still in burn-in?)")
        marg = self.acc["marg_sum"] / n
        h_density = self.acc["h_sum"] / (n * self.m)
        series = np.asarray(self.acc["h_series"], dtype=float)
        tau = integrated_autocorrelation(series)
        var = marg * (1.0 - marg)
        stderr = math.sqrt(var * 2.0 * tau / n) if var > 0 else 0.0
        return {"marginal": marg, "stderr": stderr, "h_density": h_density,
                "tau_int": tau, "n": n, "sweeps": self.sweep_count}


def sweep(chain: ChainState) -> ChainState:
    """Functional wrapper around ChainState.sweep."""
    return chain.sweep()


def integrated_autocorrelation(series, c=6.0):
    """tau_int = 1/2 + sum of autocorrelations, Sokal self-consistent window.

    An iid series gives 1/2; effective sample size is n / (2 tau).
    """
    series = np.asarray(series, dtype=float)
    n = series.size
    if n < 8:
        return 0.5
    x = series - series.mean()
    var = float(np.dot(x, x)) / n
    if var == 0.0:
        return 0.5
    nfft = 1
    while nfft < 2 * n:
        nfft *= 2
    f = np.fft.rfft(x, nfft)
    acf = np.fft.irfft(f * np.conjugate(f), nfft)[:n].real
    acf /= acf[0]
    tau = 0.5
    for t in range(1, n):
        tau += float(acf[t])
        if t >= c * tau:
            break
    return max(tau, 0.5)


# -- checkpointing -------------------------------------------------------------


def checkpoint(chain: ChainState) -> bytes:
    """Serialize the full chain state; restoring continues bit-exactly."""
    payload = {
        "version": CHECKPOINT_VERSION,
        "graph_hash": chain.spec.graph.canonical_hash(),
        "p": chain.spec.p,
        "q": chain.spec.q,
        "bc": chain.spec.bc,
        "active": chain.spec.active,
        "frozen_hard": [int(b) for b in chain.spec.frozen_hard],
        "mode": chain.mode,
        "seed": chain.seed,
        "init": chain.init if isinstance(chain.init, str) else int(chain.init),
        "burnin": chain.burnin,
        "observable_edge": chain.observable_edge,
        "sweep": chain.sweep_count,
        "bits": chain._bits,
        "rng_state": chain.rng.bit_generator.state,
        "acc": {"n": chain.acc["n"], "marg_sum": chain.acc["marg_sum"],
                "h_sum": chain.acc["h_sum"], "h_series": chain.acc["h_series"]},
    }
    body = json.dumps(payload, sort_keys=True)
    digest = hashlib.sha256(body.encode()).hexdigest()
    return json.dumps({"sha256": digest, "payload": payload},
                      sort_keys=True).encode()


def restore(blob: bytes, graph: FiniteGraph) -> ChainState:
    """Rebuild a chain from a checkpoint; verifies checksum and graph hash."""
    try:
        wrapper = json.loads(blob.decode())
        payload = wrapper["payload"]
        digest = wrapper["sha256"]
    except Exception as exc:
        raise ValueError("corrupt checkpoint blob") from exc
    body = json.dumps(payload, sort_keys=True)
    if hashlib.sha256(body.encode()).hexdigest() != digest:
        raise ValueError("checkpoint checksum mismatch")
    if payload["version"] != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload['version']}")
    if payload["graph_hash"] != graph.canonical_hash():
        raise ValueError("checkpoint was taken on a different graph")
    spec = MeasureSpec(graph, payload["p"], payload["q"],
                       active=payload["active"],
                       frozen_hard=np.array(payload["frozen_hard"], dtype=bool),
                       bc=payload["bc"])
    chain = ChainState(spec, seed=payload["seed"], init=payload["init"],
                       burnin=payload["burnin"],
                       observable_edge=payload["observable_edge"],
                       mode=payload["mode"],
                       _rng_state=payload["rng_state"])
    chain.sweep_count = payload["sweep"]
    chain._bits = payload["bits"]
    chain.acc = {"n": payload["acc"]["n"], "marg_sum": payload["acc"]["marg_sum"],
                 "h_sum": payload["acc"]["h_sum"],
                 "h_series": list(payload["acc"]["h_series"])}
    if chain.mode == "laplacian":
        chain._build_laplacian()
    return chain


# -- monotone coupling -----------------------------------------------------------


class CouplingState:
    """Two chains driven by one uniform per (sweep, edge); lower <= upper."""

    def __init__(self, lower: ChainState, upper: ChainState, pairing, seed):
        if len(pairing) != lower.m or len(pairing) != upper.m:
            raise ValueError("incompatible active sets for coupling")
        self.lower = lower
        self.upper = upper
        # iterate pairs in the lower chain's scan order
        self.pairing = sorted(pairing)
        self.rng = np.random.default_rng(seed)
        self.violations = 0
        self.first_violation = None
        self.sweeps = 0

    def sweep(self):
        u = self.rng.random(len(self.pairing)).tolist()
        lo, up = self.lower, self.upper
        for k, (ls, us) in enumerate(self.pairing):
            lo.update_edge(ls, u[k])
            up.update_edge(us, u[k])
        lo.sweep_count += 1
        up.sweep_count += 1
        for ls, us in self.pairing:
            if (lo._bits >> ls) & 1 > (up._bits >> us) & 1:
                self.violations += 1
                if self.first_violation is None:
                    self.first_violation = self.sweeps
        self.sweeps += 1
        for ch in (lo, up):
            if ch.sweep_count > ch.burnin:
                h = bin(ch._bits).count("1")
                ch.acc["n"] += 1
                ch.acc["h_sum"] += h
                ch.acc["marg_sum"] += (ch._bits >> ch._obs_slot) & 1
                ch.acc["h_series"].append(h)


def run_coupled(lower_spec: MeasureSpec, upper_spec: MeasureSpec, sweeps,
                seed=0, pairing=None, burnin=0, observable_pair=None):
    """Drive an ordered pair of specs with shared uniforms; report violations.

    With pairing=None both specs must share one graph and active set. The
    report carries the violation count (expected 0 for p-ordered or
    free/wired-ordered pairs) and the paired observable estimates.
    """
    if pairing is None:
        if lower_spec.graph is not upper_spec.graph \
                or lower_spec.active != upper_spec.active:
            raise ValueError("incompatible active sets; pass an explicit pairing")
        pairing = [(i, i) for i in range(lower_spec.n_active)]
    obs = observable_pair
    lo = ChainState(lower_spec, seed=None, init="soft", burnin=burnin,
                    observable_edge=None if obs is None else obs[0])
    up = ChainState(upper_spec, seed=None, init="hard", burnin=burnin,
                    observable_edge=None if obs is None else obs[1])
    cpl = CouplingState(lo, up, pairing, seed)
    for _ in range(sweeps):
        cpl.sweep()
    report = {
        "sweeps": sweeps,
        "violations": cpl.violations,
        "first_violation": cpl.first_violation,
        "lower": lo.summary() if lo.acc["n"] else None,
        "upper": up.summary() if up.acc["n"] else None,
    }
    return report


def free_wired_pair(free_graph: FiniteGraph, p, q):
    """Ordered (lower, upper) specs for a box: conditioned-free vs wired.

    The wired graph is the boundary contraction of the free one; the free
    chain runs with the boundary-boundary edges frozen soft and the surviving
    edges active, so both chains share one active edge list via provenance.
    """
    res = contract(free_graph, sorted(free_graph.boundary), kind="vertices")
    wired, emap = res.graph, res.edge_map
    active_free = [i for i in range(free_graph.m) if emap[i] is not None]
    lower = MeasureSpec(free_graph, p, q, active=active_free, bc="free")
    upper = MeasureSpec(wired, p, q, bc="wired")
    pairing = []
    for slot, e in enumerate(active_free):
        upper_slot = upper.active.index(emap[e])
        pairing.append((slot, upper_slot))
    ce = central_edge(free_graph)
    if ce not in lower._active_set:
        ce = active_free[0]
    obs = (ce, emap[ce])
    return lower, upper, pairing, obs
