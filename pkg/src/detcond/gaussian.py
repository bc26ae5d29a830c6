"""Two-layer construction: Gaussian gradient fields over a conductance layer.

The mixture potential exp(-V(x)) = p exp(-q x^2 / 2) + (1-p) exp(-x^2 / 2)
unfolds into a per-edge conductance kappa in {1, q}; given kappa the field is
the zero-Dirichlet Gaussian on the wired box with covariance the inverse
pinned Laplacian, and given the gradients eta the conductances are
independent with a logistic-in-eta^2 law. Mixture terms are evaluated by
factoring out the dominant exponent, so q up to 1e20 stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .graphs import FiniteGraph
from .laplacian import Conductances, pinned_laplacian
from .mcmc import ChainState
from .model import MeasureSpec, enumerate_distribution


def potential(x, p, q):
    """V_{p,q}(x) = -ln(p e^{-q x^2/2} + (1-p) e^{-x^2/2}), evaluated stably."""
    x = np.asarray(x, dtype=float)
    if p == 0.0:
        out = 0.5 * x * x
        return out if out.shape else float(out)
    if p == 1.0:
        out = 0.5 * q * x * x
        return out if out.shape else float(out)
    a = -0.5 * q * x * x
    b = -0.5 * x * x
    m = np.maximum(a, b)
    out = -(m + np.log(p * np.exp(a - m) + (1.0 - p) * np.exp(b - m)))
    return out if out.shape else float(out)


def conditional_kappa_given_eta(eta, p, q):
    """P(kappa_e = q | eta_e), per edge independently."""
    eta = np.asarray(eta, dtype=float)
    if p in (0.0, 1.0) or q == 1.0:
        out = np.full(eta.shape, float(p)) if eta.shape else float(p)
        return out
    a = -0.5 * q * eta * eta
    b = -0.5 * eta * eta
    m = np.maximum(a, b)
    num = p * np.exp(a - m)
    out = num / (num + (1.0 - p) * np.exp(b - m))
    return out if out.shape else float(out)


@dataclass
class GradientField:
    """Per-edge height differences, signed by the stored edge orientation."""
    eta: np.ndarray

    def plaquette_residual(self, g: FiniteGraph):
        """Largest |sum of eta around a unit plaquette| over the embedded graph."""
        if g.embedding is None:
            raise ValueError("plaquette check needs an embedded graph")
        worst = 0.0
        signed = {}
        for e, (u, v) in enumerate(g.edges):
            cu, cv = g.embedding.get(u), g.embedding.get(v)
            if cu is None or cv is None:
                continue
            signed[(cu, cv)] = float(self.eta[e])
            signed[(cv, cu)] = -float(self.eta[e])
        for (x, y) in {c for c in g.embedding.values() if c is not None}:
            ring = ((x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1), (x, y))
            total = 0.0
            ok = True
            for a, b in zip(ring[:-1], ring[1:]):
                if (a, b) not in signed:
                    ok = False
                    break
                total += signed[(a, b)]
            if ok:
                worst = max(worst, abs(total))
        return worst


class PinnedGaussianSampler:
    """Gaussian field with zero boundary data on a wired box, given kappa.

    Factorizes the pinned Laplacian once; samples are back-solves of iid
    normals, so the sample covariance converges to the inverse pinned
    Laplacian.
    """

    def __init__(self, graph: FiniteGraph, kappa: Conductances, pin=None):
        if pin is None:
            pin = next(iter(graph.boundary)) if len(graph.boundary) == 1 else 0
        self.graph = graph
        self.kappa = kappa.copy()
        self.pin = pin
        Lp, keep = pinned_laplacian(graph, kappa.values(), pin)
        self._keep = keep
        self._chol = sla.cholesky(Lp, lower=True, check_finite=False)

    def sample_phi(self, count, rng):
        """(count, n) array of fields; the pinned vertex column is zero."""
        z = rng.standard_normal((len(self._keep), count))
        x = sla.solve_triangular(self._chol.T, z, lower=False,
                                 check_finite=False)
        phi = np.zeros((count, self.graph.n))
        phi[:, self._keep] = x.T
        return phi

    def sample_eta(self, count, rng):
        """(count, m) gradients eta_e = phi(head) - phi(tail)."""
        phi = self.sample_phi(count, rng)
        heads = np.array([v for _, v in self.graph.edges])
        tails = np.array([u for u, _ in self.graph.edges])
        return phi[:, heads] - phi[:, tails]

    def covariance_entry(self, e1, e2):
        """Solve-based Cov(eta_{e1}, eta_{e2}) for this kappa."""
        from .laplacian import pair_gradient
        return pair_gradient(self.graph, self.kappa, e1, e2, self.pin)


def sample_field_given_kappa(sampler: PinnedGaussianSampler, seed, count):
    """List of GradientField samples with the sampler's conductances."""
    rng = np.random.default_rng(seed)
    eta = sampler.sample_eta(count, rng)
    return [GradientField(eta[i]) for i in range(count)]


def two_layer_roundtrip(box: FiniteGraph, p, q, sweeps, samples, seed=0):
    """kappa -> eta -> kappa' pipeline consistency report on a wired box.

    Runs the conductance chain for `sweeps` burn-in plus `samples` recorded
    sweeps; for each recorded kappa draws eta from the Gaussian layer and
    resamples kappa' edge-wise from the conditional given eta. Reports the
    TV distance between the kappa' histogram and the exact enumeration, and
    the binned empirical P(kappa = q | eta) against the logistic curve.
    """
    spec = MeasureSpec(box, p, q, bc="wired")
    chain = ChainState(spec, seed=seed, burnin=sweeps)
    kappa_bits = np.empty(samples, dtype=np.int64)
    for _ in range(sweeps):
        chain.sweep()
    for i in range(samples):
        chain.sweep()
        kappa_bits[i] = chain.bits
    rng = np.random.default_rng(seed + 1)

    m = box.m
    eta_all = np.empty((samples, m))
    order = np.argsort(kappa_bits, kind="stable")
    sorted_bits = kappa_bits[order]
    boundaries = np.flatnonzero(np.diff(sorted_bits)) + 1
    groups = np.split(order, boundaries)
    for grp in groups:
        bits = int(kappa_bits[grp[0]])
        kappa = Conductances(q, spec.full_hard(spec.bits_to_active(bits)))
        sampler = PinnedGaussianSampler(box, kappa)
        eta_all[grp] = sampler.sample_eta(len(grp), rng)

    cond = conditional_kappa_given_eta(eta_all, p, q)
    hard_new = rng.random(eta_all.shape) < cond
    weights = 1 << np.arange(m, dtype=np.int64)
    new_bits = hard_new @ weights

    counts = np.bincount(new_bits, minlength=1 << m).astype(float)
    empirical = counts / counts.sum()
    exact = enumerate_distribution(spec)
    tv = 0.5 * float(np.abs(empirical - exact.probs).sum())

    # binned check of the conditional curve; the family-level 95% band uses a
    # Bonferroni quantile so that "every bin inside" is a 95% event
    from scipy.stats import norm
    flat_eta = eta_all.ravel()
    flat_hard = hard_new.ravel()
    n_bins = 24
    edges_bins = np.quantile(flat_eta, np.linspace(0.0, 1.0, n_bins + 1))
    rows = []
    pre = []
    last = len(edges_bins) - 2
    for k in range(len(edges_bins) - 1):
        lo, hi = edges_bins[k], edges_bins[k + 1]
        sel = (flat_eta >= lo) & (flat_eta < hi if k < last else flat_eta <= hi)
        n_bin = int(sel.sum())
        if n_bin < 100:
            continue
        c = conditional_kappa_given_eta(flat_eta[sel], p, q)
        expected = float(np.sum(c))
        sd = math.sqrt(float(np.sum(c * (1.0 - c))))
        observed = float(np.sum(flat_hard[sel]))
        pre.append((lo, hi, n_bin, observed, expected, sd))
    z_family = float(norm.ppf(1.0 - 0.025 / max(len(pre), 1)))
    all_covered = True
    for lo, hi, n_bin, observed, expected, sd in pre:
        z = abs(observed - expected) / max(sd, 1e-12)
        covered = z <= z_family
        all_covered = all_covered and covered
        rows.append({"eta_lo": float(lo), "eta_hi": float(hi), "n": n_bin,
                     "observed_hard": observed, "expected_hard": expected,
                     "sd": sd, "z": z, "within_pointwise_95ci": bool(z <= 1.96),
                     "within_95ci": bool(covered)})
    return {"p": p, "q": q, "samples": samples, "seed": seed,
            "tv_distance": tv, "curve_bins": rows,
            "curve_family_z": z_family,
            "curve_all_within_ci": all_covered}
