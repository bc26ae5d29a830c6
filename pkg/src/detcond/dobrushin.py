"""Numerical Dobrushin interdependence bounds and Green's-gradient decay.

The interdependence entry is bounded by p(1-p)(q-1)^2 I_f(g) I_g(f) with the
currents read off one potential solve per probed configuration. The true
bound takes a supremum over all environments; the report maxes over the
probed set and is flagged `certified` only when that set is exhaustive for
the finite box.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graphs import FiniteGraph, build_box
from .laplacian import Conductances, _pinned_solve

EXHAUSTIVE_PROBE_CAP = 14


@dataclass
class DobrushinReport:
    box: str
    p: float
    q: float
    f: int
    probes: str
    certified: bool
    entries: dict = field(default_factory=dict)   # edge id -> C_fg
    row_sum: float = 0.0
    configs_probed: int = 0
    seed: int = None

    def to_json(self):
        return json.dumps({
            "box": self.box, "p": self.p, "q": self.q, "f": self.f,
            "probes": self.probes,
            "certified": self.certified, "row_sum": self.row_sum,
            "configs_probed": self.configs_probed, "seed": self.seed,
            "entries": {str(k): v for k, v in sorted(self.entries.items())},
        }, sort_keys=True)


def _probe_configs(g, probes, seed):
    if probes == "extremal":
        yield np.zeros(g.m, dtype=bool)
        yield np.ones(g.m, dtype=bool)
    elif probes == "all":
        if g.m > EXHAUSTIVE_PROBE_CAP:
            raise ValueError(f"exhaustive probing capped at {EXHAUSTIVE_PROBE_CAP} edges")
        for bits in range(1 << g.m):
            yield np.array([(bits >> i) & 1 for i in range(g.m)], dtype=bool)
    elif isinstance(probes, tuple) and probes[0] == "random":
        count = probes[1]
        rng = np.random.default_rng(seed)
        for _ in range(count):
            yield rng.random(g.m) < 0.5
    else:
        raise ValueError(f"unknown probe strategy: {probes!r}")


def dobrushin_bound(box: FiniteGraph, p, q, f=None, probes="extremal", seed=0):
    """Per-pair bounds C_fg <= max over probed kappa of p(1-p)(q-1)^2 I_f(g) I_g(f).

    One pinned solve per probe gives every g at once:
    I_f(g) I_g(f) = kappa_f kappa_g (grad_g of the f-potential)^2.
    """
    from .mcmc import central_edge
    if f is None:
        f = central_edge(box)
    rep = DobrushinReport(box=f"|V|={box.n},|E|={box.m}",
                          p=float(p), q=float(q), f=f,
                          probes=str(probes),
                          certified=(probes == "all"),
                          seed=seed if isinstance(probes, tuple) else None)
    pref = p * (1.0 - p) * (q - 1.0) ** 2
    best = np.zeros(box.m)
    n_probed = 0
    if pref > 0.0:
        ux, vx = box.edges[f]
        rhs = np.zeros(box.n)
        rhs[vx] += 1.0
        rhs[ux] -= 1.0
        heads = np.array([v for _, v in box.edges])
        tails = np.array([u for u, _ in box.edges])
        for hard in _probe_configs(box, probes, seed):
            kappa = Conductances(q, hard)
            w = kappa.values()
            u = _pinned_solve(box, w, rhs)
            grad = u[heads] - u[tails]
            vals = pref * w[f] * w * grad * grad
            np.maximum(best, vals, out=best)
            n_probed += 1
    else:
        n_probed = 0
    best[f] = 0.0   # diagonal convention
    rep.entries = {g2: float(best[g2]) for g2 in range(box.m) if g2 != f}
    rep.row_sum = float(best.sum())
    rep.configs_probed = n_probed
    return rep


def stabilization_report(n_small, n_large, p, q, probes="extremal"):
    """Cauchy differences of the central interdependence row under box growth.

    Entries are matched through their lattice coordinates; changes are
    reported both entrywise and relative to the row sum. Tiny far-away
    entries fluctuate wildly in relative terms, so the row-sum-normalized
    change is the stable convergence figure.
    """
    from .mcmc import central_edge
    reps = {}
    for n in (n_small, n_large):
        box = build_box(2, n, wired=True)
        rep = dobrushin_bound(box, p, q, f=central_edge(box), probes=probes)
        table = {}
        for g2, v in rep.entries.items():
            u, w = box.edges[g2]
            cu, cw = box.embedding.get(u), box.embedding.get(w)
            if cu is not None and cw is not None:
                table[(cu, cw)] = v
        reps[n] = (rep.row_sum, table)
    row_small, tab_small = reps[n_small]
    row_large, tab_large = reps[n_large]
    entries = []
    worst_vs_rowsum = 0.0
    for pair, v_small in tab_small.items():
        if pair not in tab_large:
            continue
        v_large = tab_large[pair]
        change = abs(v_large - v_small)
        rel_row = change / row_large
        worst_vs_rowsum = max(worst_vs_rowsum, rel_row)
        entries.append({"bond": [list(pair[0]), list(pair[1])],
                        "small": v_small, "large": v_large,
                        "abs_change": change,
                        "change_vs_rowsum": rel_row,
                        "change_vs_entry": change / v_large if v_large > 0 else None})
    return {
        "n_small": n_small, "n_large": n_large, "p": p, "q": q,
        "row_sum_small": row_small, "row_sum_large": row_large,
        "row_sum_rel_change": abs(row_large - row_small) / row_large,
        "worst_entry_change_vs_rowsum": worst_vs_rowsum,
        "entries": entries,
    }


def _kappa_for(strategy, g, q, seed=0):
    if strategy == "all-soft":
        return Conductances.all_soft(g, q)
    if strategy == "all-hard":
        return Conductances.all_hard(g, q)
    if strategy == "random":
        rng = np.random.default_rng(seed)
        return Conductances(q, rng.random(g.m) < 0.5)
    raise ValueError(f"unknown kappa strategy: {strategy!r}")


def green_decay_fit(radii, q, kappa_strategy="all-soft", d=2, seed=0):
    """Log-log decay fit of |grad grad G| on wired boxes of growing radius.

    For each radius the gradient-gradient Green kernel between the origin
    bond and bonds (r, 0)-(r+1, 0) is read from one Dirichlet solve; the fit
    runs over 2 <= r <= n/2 on the largest box. Reports the empirical
    exponent (homogeneous conductances give d - 2 + 2 = d) and residual;
    no theoretical Hoelder exponent is asserted.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    radii = sorted(radii)
    rows = []
    exponents = {}
    for n in radii:
        g = build_box(d, n, wired=True)
        kappa = _kappa_for(kappa_strategy, g, q, seed)
        origin = g.vertex_at(tuple([0] * d))
        step = g.vertex_at(tuple([1] + [0] * (d - 1)))
        rhs = np.zeros(g.n)
        rhs[step] += 1.0
        rhs[origin] -= 1.0
        u = _pinned_solve(g, kappa.values(), rhs)
        rs = [r for r in range(2, n // 2 + 1)]
        if len(rs) < 3:
            raise ValueError(f"radius {n} too small for a decay fit")
        vals = []
        for r in rs:
            a = g.vertex_at(tuple([r] + [0] * (d - 1)))
            b = g.vertex_at(tuple([r + 1] + [0] * (d - 1)))
            vals.append(abs(u[b] - u[a]))
            rows.append({"n": n, "r": r, "abs_grad2_G": float(vals[-1])})
        lr = np.log(np.asarray(rs, dtype=float))
        lv = np.log(np.maximum(np.asarray(vals), 1e-300))
        slope, intercept = np.polyfit(lr, lv, 1)
        resid = float(np.sqrt(np.mean((lv - (slope * lr + intercept)) ** 2)))
        exponents[n] = {"exponent": float(-slope), "residual": resid}
    n_max = radii[-1]
    return {
        "q": q, "d": d, "kappa": kappa_strategy,
        "exponent": exponents[n_max]["exponent"],
        "residual": exponents[n_max]["residual"],
        "per_radius": exponents,
        "rows": rows,
        "seed": seed,
    }
