"""Command-line surface tying the model, audits, and experiments together.

Exit codes: 0 success (and, for audits, zero violations), 1 parameter or
parse errors (including seed collisions), 2 enumeration size caps exceeded,
3 corrupt checkpoints. Parallelism across sweep cells is capped by the
DETCOND_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import audit as audit_mod
from . import dobrushin as dob_mod
from . import duality as duality_mod
from . import gaussian as gauss_mod
from .graphs import SizeCapError, build_box, builtin_graph, parse_edge_list
from .mcmc import ChainState, central_edge
from .model import MeasureSpec, enumerate_distribution, self_dual_point
from .sweeps import ROW_HEADER, format_row, parse_config, run_sweep, write_summary


def _load_graph(source):
    if os.path.exists(source):
        with open(source) as fh:
            return parse_edge_list(fh.read())
    return builtin_graph(source)


def _write(out_dir, name, data):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(data)
    return path


def cmd_enumerate(args):
    g = _load_graph(args.graph)
    spec = MeasureSpec(g, args.p, args.q)
    dist = enumerate_distribution(spec)
    _write(args.out, "distribution.csv", dist.to_csv())
    marginals = {str(e): dist.marginal(e) for e in range(g.m)}
    _write(args.out, "marginals.json", json.dumps(
        {"p": args.p, "q": args.q, "graph": args.graph, "log_z": dist.log_z,
         "marginals": marginals}, sort_keys=True, indent=1))
    print(f"enumerated {dist.n_configs} configurations -> {args.out}")
    return 0


def cmd_sample(args):
    if args.graph:
        g = _load_graph(args.graph)
        bc = "free"
    else:
        bc = args.bc
        g = build_box(2, args.n, wired=(bc == "wired"))
    spec = MeasureSpec(g, args.p, args.q, bc=bc)
    chain = ChainState(spec, seed=args.seed, burnin=args.burnin)
    chain.run(args.sweeps)
    s = chain.summary()
    cell = (args.n if not args.graph else 0, args.p, args.q, bc, args.seed)
    row = format_row(cell, s)
    if args.out:
        _write(args.out, "sample.csv", ROW_HEADER + "\n" + row + "\n")
    print(ROW_HEADER)
    print(row)
    return 0


def cmd_sweep(args):
    with open(args.config) as fh:
        cfg = parse_config(fh.read())
    status = run_sweep(cfg, resume=args.resume, max_cells=args.max_cells)
    print(json.dumps(status))
    return 0


def cmd_report(args):
    with open(args.config) as fh:
        cfg = parse_config(fh.read())
    path = write_summary(cfg)
    print(path)
    return 0


def cmd_audit(args):
    which = args.which
    if which == "two-edge":
        g = _load_graph(args.graph)
        rep = audit_mod.audit_two_edge_determinant(g, args.q, instance=args.graph)
    elif which == "fkg":
        g = _load_graph(args.graph)
        spec = MeasureSpec(g, args.p, args.q)
        rep = audit_mod.audit_fkg_lattice(spec, n_random=args.pairs,
                                          seed=args.seed, instance=args.graph)
    elif which == "holley":
        g = _load_graph(args.graph)
        p2 = args.p2 if args.p2 is not None else min(1.0, args.p + 0.2)
        rep = audit_mod.audit_holley_pair(MeasureSpec(g, args.p, args.q),
                                          MeasureSpec(g, p2, args.q),
                                          instance=f"{args.graph},p{args.p}->p{p2}")
    elif which == "subgraph":
        g = _load_graph(args.graph)
        sub = ([int(t) for t in args.sub_edges.split(",")]
               if args.sub_edges else list(range(g.m - 1)))
        con = ([int(t) for t in args.contract_edges.split(",")]
               if args.contract_edges else [g.m - 1])
        rep = audit_mod.audit_subgraph_contraction(g, sub, con, args.q,
                                                   instance=args.graph)
    elif which == "bulk":
        p2 = args.p2 if args.p2 is not None else min(1.0, args.p + 0.2)
        n_values = [int(t) for t in args.n_list.split(",")]
        rep = audit_mod.audit_bulk_vs_boundary(args.q, args.p, p2, n_values,
                                               seed=args.seed)
    else:
        raise ValueError(f"unknown audit: {which}")
    text = rep.to_json()
    if args.out:
        _write(args.out, f"audit_{which}.json", text)
    print(text)
    return 0 if rep.ok else 1


def cmd_duality(args):
    from .model import dual_parameter
    if args.gap:
        p = args.p if args.p is not None else self_dual_point(args.q)
        seeds = tuple(args.seed + k for k in range(args.gap_seeds))
        rep = duality_mod.free_wired_gap(n=args.n, p=p, q=args.q,
                                         sweeps=args.sweeps, seeds=seeds)
        if args.out:
            _write(args.out, "free_wired_gap.csv",
                   duality_mod.gap_report_csv(rep))
        print(json.dumps({"p": p, "q": args.q, "n": args.n,
                          "free": rep["free"]["marginal"],
                          "wired": rep["wired"]["marginal"],
                          "gap": rep["gap"], "gap_stderr": rep["gap_stderr"],
                          "marginal_sum": rep["marginal_sum"]}))
        return 0
    g = _load_graph(args.graph)
    p = args.p if args.p is not None else 0.5
    tv = duality_mod.check_duality_pushforward(g, p, args.q)
    print(json.dumps({"graph": args.graph, "p": p, "q": args.q,
                      "tv_distance": tv,
                      "p_star": dual_parameter(p, args.q)}))
    return 0 if tv <= 1e-10 else 1


def cmd_contours(args):
    box = build_box(2, args.n)
    p = args.p if args.p is not None else self_dual_point(args.q)
    rep = duality_mod.estimate_contour_frequency(
        box, p, args.q, args.maxlen, args.sweeps, seed=args.seed)
    text = json.dumps(rep["contours"], indent=1)
    if args.out:
        _write(args.out, "contours.json", text)
    print(text)
    return 0


def cmd_gaussian(args):
    box = build_box(2, args.n, wired=True)
    if args.roundtrip:
        rep = gauss_mod.two_layer_roundtrip(box, args.p, args.q,
                                            sweeps=args.sweeps,
                                            samples=args.samples,
                                            seed=args.seed)
        out = {k: rep[k] for k in ("p", "q", "samples", "tv_distance",
                                   "curve_all_within_ci")}
        print(json.dumps(out))
        if args.out:
            _write(args.out, "roundtrip.json", json.dumps(rep, default=float))
        return 0
    from .laplacian import Conductances
    kappa = Conductances.all_soft(box, args.q)
    sampler = gauss_mod.PinnedGaussianSampler(box, kappa)
    rng = np.random.default_rng(args.seed)
    eta = sampler.sample_eta(args.samples, rng)
    lines = ["edge_id,eta"]
    for i in range(eta.shape[0]):
        for e in range(box.m):
            lines.append("%d,%.17g" % (e, eta[i, e]))
    if args.out:
        _write(args.out, "eta_samples.csv", "\n".join(lines) + "\n")
    moments = {"mean": [float(x) for x in eta.mean(axis=0)],
               "var": [float(x) for x in eta.var(axis=0)]}
    print(json.dumps({"samples": args.samples, "edges": box.m,
                      "mean_abs": float(np.abs(eta.mean(axis=0)).max())}))
    if args.out:
        _write(args.out, "eta_moments.json", json.dumps(moments))
    return 0


def cmd_dobrushin(args):
    if args.decay:
        radii = [int(t) for t in args.radii.split(",")]
        rep = dob_mod.green_decay_fit(radii, args.q, args.kappa, d=args.d,
                                      seed=args.seed)
        print(json.dumps({"exponent": rep["exponent"],
                          "residual": rep["residual"]}))
        if args.out:
            lines = ["r,mean_abs_grad2_G,fit_exponent"]
            for row in rep["rows"]:
                lines.append("%d,%.17g,%.17g" % (row["r"], row["abs_grad2_G"],
                                                 rep["exponent"]))
            _write(args.out, "green_decay.csv", "\n".join(lines) + "\n")
        return 0
    box = build_box(args.d, args.n, wired=True)
    probes = ("random", args.m) if args.probes == "random" else args.probes
    rep = dob_mod.dobrushin_bound(box, args.p, args.q, probes=probes,
                                  seed=args.seed)
    text = rep.to_json()
    if args.out:
        _write(args.out, "dobrushin.json", text)
    print(text)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="detcond",
                                 description="determinantal random conductance model toolkit")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, graph=False, box=False, pq=True, chain=False):
        if graph:
            p.add_argument("--graph", required=False, default=None)
        if box:
            p.add_argument("--n", type=int, default=2)
            p.add_argument("--bc", choices=("free", "wired"), default="free")
        if pq:
            p.add_argument("--p", type=float, default=0.5)
            p.add_argument("--q", type=float, default=2.0)
        if chain:
            p.add_argument("--sweeps", type=int, default=5000)
            p.add_argument("--burnin", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)

    p = sub.add_parser("enumerate", help="exact distribution CSV + marginals")
    common(p, graph=True)
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("sample", help="run one chain, print its summary row")
    common(p, graph=True, box=True, chain=True)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("sweep", help="run a config-driven grid of chains")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--max-cells", type=int, default=None)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("report", help="re-merge per-cell rows into summary.csv")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("audit", help="run a correlation-inequality audit")
    p.add_argument("which", choices=("two-edge", "fkg", "holley", "subgraph",
                                     "bulk"))
    common(p, graph=True)
    p.add_argument("--p2", type=float, default=None)
    p.add_argument("--pairs", type=int, default=100_000)
    p.add_argument("--sub-edges", default=None)
    p.add_argument("--contract-edges", default=None)
    p.add_argument("--n-list", default="1")
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("duality", help="pushforward TV against the dual measure")
    common(p, graph=True, pq=False)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--gap", action="store_true",
                   help="run the free/wired marginal-gap experiment instead")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--gap-seeds", type=int, default=4)
    p.set_defaults(fn=cmd_duality)

    p = sub.add_parser("contours", help="contour frequencies vs the Peierls bound")
    common(p, box=True, chain=True, pq=False)
    p.add_argument("--p", type=float, default=None, help="defaults to p_sd(q)")
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--maxlen", type=int, default=6)
    p.set_defaults(fn=cmd_contours, n=6)   # leave margin around the center

    p = sub.add_parser("gaussian", help="field samples or two-layer roundtrip")
    common(p, box=True, chain=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--roundtrip", action="store_true")
    p.set_defaults(fn=cmd_gaussian)

    p = sub.add_parser("dobrushin", help="interdependence bounds / decay fit")
    common(p, box=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--probes", choices=("extremal", "all", "random"),
                   default="extremal")
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--decay", action="store_true")
    p.add_argument("--radii", default="6,12")
    p.add_argument("--kappa", default="all-soft")
    p.set_defaults(fn=cmd_dobrushin)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        msg = str(exc)
        print(f"error: {msg}", file=sys.stderr)
        if "checkpoint" in msg:
            return 3
        return 1


if __name__ == "__main__":
    sys.exit(main())
