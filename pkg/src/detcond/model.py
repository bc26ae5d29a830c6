"""Finite-volume conductance measures P^{G,p} and their exact distributions.

P(kappa) is proportional to p^h (1-p)^s / sqrt(det Delta_kappa) with h and s
the hard/soft counts over the active edges and the determinant taken over the
full configuration (active joined with the frozen exterior). Configurations
are bit vectors over the active edge list; bit i set means edge active[i] is
hard. p in {0, 1} degenerates to the corresponding point mass.
"""

from __future__ import annotations

import math

import numpy as np

from .graphs import FiniteGraph, SizeCapError
from .laplacian import Conductances, transfer_current

ENUM_EDGE_CAP = 20


class MeasureSpec:
    """One finite-volume measure: graph, parameters, active set, frozen exterior."""

    def __init__(self, graph: FiniteGraph, p, q, active=None, frozen_hard=None,
                 bc="free"):
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if q < 1.0:
            raise ValueError("q must be >= 1")
        self.graph = graph
        self.p = float(p)
        self.q = float(q)
        if active is None:
            active = list(range(graph.m))
        self.active = list(active)
        if len(set(self.active)) != len(self.active):
            raise ValueError("active edge list has duplicates")
        if frozen_hard is None:
            frozen_hard = np.zeros(graph.m, dtype=bool)
        self.frozen_hard = np.asarray(frozen_hard, dtype=bool).copy()
        self.bc = bc
        self._active_set = frozenset(self.active)

    @property
    def n_active(self):
        return len(self.active)

    def full_hard(self, kappa_active):
        """Join an active-edge assignment with the frozen exterior."""
        full = self.frozen_hard.copy()
        full[self.active] = np.asarray(kappa_active, dtype=bool)
        return full

    def bits_to_active(self, bits):
        return np.array([(bits >> i) & 1 for i in range(self.n_active)], dtype=bool)

    def active_to_bits(self, kappa_active):
        bits = 0
        for i, v in enumerate(np.asarray(kappa_active, dtype=bool)):
            if v:
                bits |= 1 << i
        return bits

    def conductances(self, kappa_active):
        return Conductances(self.q, self.full_hard(kappa_active))


def log_weight(spec: MeasureSpec, kappa_active):
    """Unnormalized log weight of one active-edge configuration."""
    kappa_active = np.asarray(kappa_active, dtype=bool)
    h = int(kappa_active.sum())
    s = spec.n_active - h
    if spec.p == 0.0:
        return 0.0 if h == 0 else -math.inf
    if spec.p == 1.0:
        return 0.0 if s == 0 else -math.inf
    from .laplacian import log_det_zero_mean
    ld = log_det_zero_mean(spec.graph, spec.conductances(kappa_active))
    return h * math.log(spec.p) + s * math.log(1.0 - spec.p) - 0.5 * ld


class ExactDistribution:
    """Full distribution over the 2^m active configurations."""

    def __init__(self, spec, log_weights):
        self.spec = spec
        self.log_weights = np.asarray(log_weights, dtype=float)
        finite = np.isfinite(self.log_weights)
        mx = self.log_weights[finite].max()
        z = np.zeros_like(self.log_weights)
        z[finite] = np.exp(self.log_weights[finite] - mx)
        total = z.sum()
        self.log_z = mx + math.log(total)
        self.probs = z / total

    @property
    def n_configs(self):
        return self.probs.size

    def marginal(self, edge_id):
        """P(kappa_e = q) for an active edge."""
        i = self.spec.active.index(edge_id)
        bit = (np.arange(self.n_configs) >> i) & 1
        return float(self.probs[bit == 1].sum())

    def h_counts(self):
        m = self.spec.n_active
        counts = np.zeros(self.n_configs, dtype=int)
        for i in range(m):
            counts += (np.arange(self.n_configs) >> i) & 1
        return counts

    def event_probability(self, predicate):
        """Probability of an event given as a predicate on full bool arrays."""
        total = 0.0
        for bits in range(self.n_configs):
            if self.probs[bits] == 0.0:
                continue
            if predicate(self.spec.full_hard(self.spec.bits_to_active(bits))):
                total += self.probs[bits]
        return float(total)

    def expectation(self, func):
        return float(sum(self.probs[b] * func(self.spec.bits_to_active(b))
                         for b in range(self.n_configs)))

    def tv_distance(self, other_probs):
        other_probs = np.asarray(other_probs, dtype=float)
        return 0.5 * float(np.abs(self.probs - other_probs).sum())

    def to_csv(self):
        m = self.spec.n_active
        lines = ["config_bits,log_weight,probability"]
        for bits in range(self.n_configs):
            s = "".join("1" if (bits >> i) & 1 else "0" for i in range(m))
            lines.append("%s,%.17g,%.17g" % (s, self.log_weights[bits],
                                             self.probs[bits]))
        return "\n".join(lines) + "\n"


def enumerate_distribution(spec: MeasureSpec):
    """Exact normalized distribution over all active configurations.

    Laplacians for all configurations are assembled and factorized in batch;
    capped at ENUM_EDGE_CAP active edges.
    """
    m = spec.n_active
    if m > ENUM_EDGE_CAP:
        raise SizeCapError(f"enumeration capped at {ENUM_EDGE_CAP} active edges")
    g = spec.graph
    n_conf = 1 << m

    if spec.p == 0.0 or spec.p == 1.0:
        lw = np.full(n_conf, -math.inf)
        lw[0 if spec.p == 0.0 else n_conf - 1] = 0.0
        return ExactDistribution(spec, lw)

    # incidence rows (pin vertex 0); self-loops give zero rows
    pin = 0
    B = np.zeros((g.m, g.n - 1)) if g.n > 1 else np.zeros((g.m, 0))
    for e, (u, v) in enumerate(g.edges):
        if u == v:
            continue
        if u != pin:
            B[e, u - 1] -= 1.0
        if v != pin:
            B[e, v - 1] += 1.0

    configs = np.arange(n_conf)
    hard_bits = ((configs[:, None] >> np.arange(m)[None, :]) & 1).astype(bool)
    h = hard_bits.sum(axis=1)

    log_weights = np.empty(n_conf)
    base = h * math.log(spec.p) + (m - h) * math.log(1.0 - spec.p)
    chunk = max(1, min(n_conf, 1 << 14))
    for lo in range(0, n_conf, chunk):
        hi = min(lo + chunk, n_conf)
        W = np.empty((hi - lo, g.m))
        W[:, :] = np.where(spec.frozen_hard, spec.q, 1.0)[None, :]
        W[:, spec.active] = np.where(hard_bits[lo:hi], spec.q, 1.0)
        if g.n > 1:
            Ls = np.einsum("ke,ei,ej->kij", W, B, B, optimize=True)
            sign, ld = np.linalg.slogdet(Ls)
            if np.any(sign <= 0):
                raise ValueError("non-positive pinned determinant")
            ld = ld + math.log(g.n)
        else:
            ld = np.zeros(hi - lo)
        log_weights[lo:hi] = base[lo:hi] - 0.5 * ld
    return ExactDistribution(spec, log_weights)


def conditional_hard(spec: MeasureSpec, kappa_active, f):
    """Heat-bath conditional P(kappa_f = q | all other edges).

    Equal to p / (p + (1-p) sqrt(1 + (q-1) Q)), where Q is the spanning-tree
    occupation probability of f in the configuration with f forced soft.
    """
    if f not in spec._active_set:
        raise ValueError("edge is not active")
    if spec.p == 0.0:
        return 0.0
    if spec.p == 1.0:
        return 1.0
    if spec.q == 1.0:
        return spec.p
    kappa_active = np.asarray(kappa_active, dtype=bool).copy()
    i = spec.active.index(f)
    kappa_active[i] = False
    cond = spec.conductances(kappa_active)
    q_occ = transfer_current(spec.graph, cond, f, f)
    return conditional_from_occupation(spec.p, spec.q, q_occ)


def conditional_from_occupation(p, q, q_occ):
    """The single-site conditional as a function of Q_{kappa^-}(f in t)."""
    return p / (p + (1.0 - p) * math.sqrt(1.0 + (q - 1.0) * q_occ))


def specification_kernel(spec: MeasureSpec, E, lam_full, event):
    """gamma^G_E(event, lambda): exact conditional kernel on the active set E.

    lam_full assigns the whole edge set; only its restriction off E matters.
    `event` is a predicate on full hard/soft bool arrays. Proper by
    construction: events determined off E get indicator values.
    """
    lam_full = np.asarray(lam_full, dtype=bool)
    sub = MeasureSpec(spec.graph, spec.p, spec.q, active=list(E),
                      frozen_hard=lam_full, bc=spec.bc)
    dist = enumerate_distribution(sub)
    return dist.event_probability(event)


def dual_parameter(p, q):
    """Dual parameter p*: p*/(1-p*) = (1-p) / (p / sqrt(q)); involution."""
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    ratio = math.sqrt(q) * (1.0 - p) / p
    return ratio / (1.0 + ratio)


def self_dual_point(q):
    """Fixed point of the duality map: (p/(1-p))^4 = q."""
    r = q ** 0.25
    return r / (1.0 + r)
