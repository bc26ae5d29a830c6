"""Planar duality of configurations and measures; contours and the Peierls bound.

The dual configuration swaps hard and soft across the edge bijection
(kappa*_{e*} = 1 + q - kappa_e), and the dual measure parameter satisfies
p*/(1-p*) = (1-p) sqrt(q) / p. On the square lattice the experiments expose
the free/wired marginal gap at the self-dual point and per-contour
frequencies against the explicit Peierls bound (4 q^{-1/8})^len * sqrt(q).
"""

from __future__ import annotations

import math

import numpy as np

from .contours import Contour, enumerate_contours_around
from .graphs import FiniteGraph, build_box, grid_graph, planar_dual
from .mcmc import ChainState, central_edge
from .model import MeasureSpec, dual_parameter, enumerate_distribution


class DualMap:
    """Primal graph, its planar dual, and the edge bijection between them."""

    def __init__(self, primal: FiniteGraph):
        self.primal = primal
        self.dual, self.edge_map = planar_dual(primal)

    def dual_configuration(self, hard):
        """kappa* on the dual: hard and soft swap across the bijection."""
        hard = np.asarray(hard, dtype=bool)
        out = np.empty(self.dual.m, dtype=bool)
        for e, e_star in enumerate(self.edge_map):
            out[e_star] = not hard[e]
        return out

    def dual_bits(self, bits):
        """Same map on bit-packed configurations."""
        out = 0
        for e, e_star in enumerate(self.edge_map):
            if not (bits >> e) & 1:
                out |= 1 << e_star
        return out


def dual_configuration(dm: DualMap, hard):
    return dm.dual_configuration(hard)


def check_duality_pushforward(g: FiniteGraph, p, q):
    """Total-variation distance between push-forward and dual measure.

    Enumerates P^{G,p}, maps every configuration through the dual bijection,
    and compares with the enumeration of P^{G*,p*}; exact duality means a
    TV distance at floating-point scale.
    """
    dm = DualMap(g)
    dist = enumerate_distribution(MeasureSpec(g, p, q))
    p_star = dual_parameter(p, q)
    dist_star = enumerate_distribution(MeasureSpec(dm.dual, p_star, q))
    pushed = np.zeros(dist_star.n_configs)
    for bits in range(dist.n_configs):
        pushed[dm.dual_bits(bits)] += dist.probs[bits]
    return 0.5 * float(np.abs(pushed - dist_star.probs).sum())


# -- contours against configurations -------------------------------------------


def resolve_contour(contour: Contour, box: FiniteGraph):
    """(crossed slots, required-hard slots) as bit masks over box edge ids."""
    crossed_ids, required_ids = contour.resolve(box)
    cmask = 0
    for e in crossed_ids:
        cmask |= 1 << e
    rmask = 0
    for e in required_ids:
        rmask |= 1 << e
    return cmask, rmask


def is_q_contour(contour: Contour, hard, box: FiniteGraph):
    """Exact two-condition check of the contour against a configuration.

    hard: bool array over the box's edges (True = hard).
    """
    crossed_ids, required_ids = contour.resolve(box)
    hard = np.asarray(hard, dtype=bool)
    if any(hard[e] for e in crossed_ids):
        return False
    return all(hard[e] for e in required_ids)


def peierls_bound(length, q):
    """(4 q^{-1/8})^length * q^{1/2}; decreasing in length only for q > 4^8."""
    if length < 6 or q < 1:
        raise ValueError("need length >= 6 and q >= 1")
    return (4.0 * q ** (-0.125)) ** length * math.sqrt(q)


def contour_sum_bound(contours, q):
    """Explicit union bound: sum over enumerated contours of their bounds.

    Equals sum over lengths of N(len) (4 q^{-1/8})^len sqrt(q), with N(len)
    the enumerated contour counts - the honest truncation of the Peierls
    series, with no guessed constants.
    """
    by_len = {}
    for c in contours:
        by_len[c.length] = by_len.get(c.length, 0) + 1
    return sum(n * peierls_bound(length, q) for length, n in by_len.items()), by_len


def estimate_contour_frequency(box: FiniteGraph, p, q, max_len, sweeps,
                               seed=0, burnin=None, edge=None):
    """MCMC frequency of each contour around the central edge being a q-contour.

    Valid for p <= p_sd(q); each enumerated contour is paired with its
    Peierls bound, flagged when a non-vacuous bound is exceeded by more than
    three standard errors. At q = 1 the exact product-measure probability is
    attached for cross-checking.
    """
    from .model import self_dual_point
    if p > self_dual_point(q) + 1e-12:
        raise ValueError("contour bound experiments require p <= p_sd(q)")
    if edge is None:
        edge = central_edge(box)
    contours = enumerate_contours_around(edge, max_len, box)
    masks = [resolve_contour(c, box) for c in contours]
    if burnin is None:
        burnin = max(100, sweeps // 10)
    spec = MeasureSpec(box, p, q, bc="free")
    chain = ChainState(spec, seed=seed, burnin=burnin)
    counts = [0] * len(contours)
    n_rec = 0
    for _ in range(burnin + sweeps):
        chain.sweep()
        if chain.sweep_count <= burnin:
            continue
        bits = chain.bits
        n_rec += 1
        for i, (cmask, rmask) in enumerate(masks):
            if bits & cmask == 0 and bits & rmask == rmask:
                counts[i] += 1
    rows = []
    for i, c in enumerate(contours):
        freq = counts[i] / n_rec
        stderr = math.sqrt(max(freq * (1.0 - freq), 1e-300) / n_rec)
        bound = peierls_bound(c.length, q)
        vacuous = bound >= 1.0
        row = {
            "length": c.length,
            "count": counts[i],
            "frequency": freq,
            "stderr": stderr,
            "bound": bound,
            "vacuous": vacuous,
            "exceeds_bound": (not vacuous) and freq > bound + 3.0 * stderr,
        }
        if q == 1.0:
            row["closed_form"] = c.product_probability(p)
        rows.append(row)
    total_bound, counts_by_length = contour_sum_bound(contours, q)
    return {"edge": edge, "p": p, "q": q, "sweeps": n_rec, "seed": seed,
            "contours": rows,
            "contour_counts": counts_by_length,
            "sum_bound": total_bound,
            "sum_bound_vacuous": total_bound >= 1.0}


def free_wired_gap(n=None, p=None, q=None, sweeps=2000, seeds=(0,),
                   burnin=None, side=None):
    """Central-edge hard marginal under free vs wired boxes at common (p, q).

    Boxes are Lambda_n (side 2n+1) or an explicit side x side grid. Each
    (bc, seed) cell runs an independent chain from its extremal start; the
    report aggregates across seeds and carries the free/wired gap with its
    combined standard error, plus the free+wired marginal sum that duality
    pushes toward 1 at p = p_sd.
    """
    if burnin is None:
        burnin = max(100, sweeps // 10)
    if side is not None:
        free = grid_graph(side, side)
    else:
        free = build_box(2, n)
    from .graphs import contract
    wired = contract(free, sorted(free.boundary), kind="vertices").graph

    results = {}
    for tag, graph in (("free", free), ("wired", wired)):
        spec = MeasureSpec(graph, p, q, bc=tag)
        edge = central_edge(graph)
        per_seed = []
        for s in seeds:
            chain = ChainState(spec, seed=s, burnin=burnin,
                               observable_edge=edge)
            chain.run(burnin + sweeps)
            per_seed.append(chain.summary()["marginal"])
        arr = np.asarray(per_seed)
        mean = float(arr.mean())
        if len(seeds) > 1:
            se = float(arr.std(ddof=1) / math.sqrt(len(seeds)))
        else:
            se = float("nan")
        results[tag] = {"marginal": mean, "stderr": se, "per_seed": per_seed}
    gap = results["wired"]["marginal"] - results["free"]["marginal"]
    se_gap = math.hypot(results["free"]["stderr"], results["wired"]["stderr"]) \
        if len(seeds) > 1 else float("nan")
    return {
        "p": p, "q": q, "n": n, "side": side, "sweeps": sweeps,
        "seeds": list(seeds),
        "free": results["free"], "wired": results["wired"],
        "gap": gap, "gap_stderr": se_gap,
        "marginal_sum": results["free"]["marginal"] + results["wired"]["marginal"],
    }


def gap_report_csv(rep):
    """Per-(bc, seed) rows of a free_wired_gap report as CSV text."""
    n = rep["n"] if rep["n"] is not None else rep["side"]
    lines = ["n,p,q,bc,edge,estimate,stderr,sweeps,seed"]
    for bc in ("free", "wired"):
        per_seed = rep[bc]["per_seed"]
        for seed, est in zip(rep["seeds"], per_seed):
            lines.append("%d,%.17g,%.17g,%s,central,%.17g,%s,%d,%d"
                         % (n, rep["p"], rep["q"], bc, est, "", rep["sweeps"],
                            seed))
    lines.append("%d,%.17g,%.17g,%s,central,%.17g,%.17g,%d,%d"
                 % (n, rep["p"], rep["q"], "gap", rep["gap"],
                    rep["gap_stderr"], rep["sweeps"], -1))
    return "\n".join(lines) + "\n"
