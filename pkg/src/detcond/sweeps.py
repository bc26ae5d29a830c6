"""Sweep configs, grid orchestration, persistence, and CSV emission.

A sweep is a grid over (n, p, q, bc, seed); every cell runs one seeded chain
on the corresponding box. Cells are independently checkpointed and
resumable: rerunning an interrupted sweep with the same config reproduces
the uninterrupted summary byte for byte. All floats are printed with 17
significant digits so the CSV round-trips losslessly.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .graphs import build_box
from .mcmc import ChainState, checkpoint, restore
from .model import MeasureSpec

ROW_HEADER = "n,p,q,bc,seed,sweeps,marginal,stderr,h_density,tau_int"


@dataclass
class SweepConfig:
    p: list
    q: list
    n: list
    bc: list
    sweeps: int
    burnin: int
    seeds: list
    out: str = "results"
    checkpoint_every: int = 0
    contour_scan: bool = False
    observables: list = field(default_factory=lambda: ["marginal", "h_density"])

    def validate(self):
        if not all(0.0 <= p <= 1.0 for p in self.p):
            raise ValueError("all p must lie in [0, 1]")
        if not all(q >= 1.0 for q in self.q):
            raise ValueError("all q must be >= 1")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seed collision: seeds must be distinct")
        if any(b not in ("free", "wired") for b in self.bc):
            raise ValueError("bc entries must be 'free' or 'wired'")
        if self.sweeps <= self.burnin:
            raise ValueError("sweeps must exceed burnin")

    def cells(self):
        out = []
        for n in self.n:
            for p in self.p:
                for q in self.q:
                    for bc in self.bc:
                        for seed in self.seeds:
                            out.append((n, p, q, bc, seed))
        return sorted(out)


def parse_config(text) -> SweepConfig:
    """Flat key = value lines; lists are comma separated, '#' starts a comment."""
    values = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (need key = value): {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = val

    def floats(key, default=None):
        if key not in values:
            if default is None:
                raise ValueError(f"missing config key: {key}")
            return default
        return [float(t) for t in values[key].split(",") if t.strip()]

    def ints(key, default=None):
        if key not in values:
            if default is None:
                raise ValueError(f"missing config key: {key}")
            return default
        return [int(t) for t in values[key].split(",") if t.strip()]

    cfg = SweepConfig(
        p=floats("p"),
        q=floats("q"),
        n=ints("n"),
        bc=[t.strip() for t in values.get("bc", "free").split(",") if t.strip()],
        sweeps=int(values.get("sweeps", "11000")),
        burnin=int(values.get("burnin", "1000")),
        seeds=ints("seeds", ints("seed", None) if "seed" in values else None),
        out=values.get("out", "results"),
        checkpoint_every=int(values.get("checkpoint_every", "0")),
        contour_scan=values.get("contours", "off").lower() in ("on", "true", "1"),
    )
    if "observables" in values:
        cfg.observables = [t.strip() for t in values["observables"].split(",")]
    cfg.validate()
    return cfg


def cell_key(cell):
    n, p, q, bc, seed = cell
    return "n%d_p%.17g_q%.17g_%s_s%d" % (n, p, q, bc, seed)


def format_row(cell, summary):
    n, p, q, bc, seed = cell
    return ("%d,%.17g,%.17g,%s,%d,%d,%.17g,%.17g,%.17g,%.17g"
            % (n, p, q, bc, seed, summary["sweeps"], summary["marginal"],
               summary["stderr"], summary["h_density"], summary["tau_int"]))


def _cell_paths(out_dir, cell):
    key = cell_key(cell)
    return (os.path.join(out_dir, "cells", key + ".csv"),
            os.path.join(out_dir, "checkpoints", key + ".ckpt"))


def run_cell(cfg: SweepConfig, cell, resume=False, sweep_budget=None):
    """Run one grid cell to completion (or until the session budget runs out).

    Returns the finished row string, or None if the budget expired first; in
    that case the chain state is checkpointed for a later resume.
    """
    n, p, q, bc, seed = cell
    row_path, ckpt_path = _cell_paths(cfg.out, cell)
    if resume and os.path.exists(row_path):
        with open(row_path) as fh:
            return fh.read().rstrip("\n")
    graph = build_box(2, n, wired=(bc == "wired"))
    chain = None
    if resume and os.path.exists(ckpt_path):
        with open(ckpt_path, "rb") as fh:
            chain = restore(fh.read(), graph)
    if chain is None:
        spec = MeasureSpec(graph, p, q, bc=bc)
        chain = ChainState(spec, seed=seed, burnin=cfg.burnin)
    done_this_session = 0
    while chain.sweep_count < cfg.sweeps:
        if sweep_budget is not None and done_this_session >= sweep_budget:
            _write_atomic(ckpt_path, checkpoint(chain), binary=True)
            return None
        chain.sweep()
        done_this_session += 1
        if cfg.checkpoint_every and chain.sweep_count % cfg.checkpoint_every == 0:
            _write_atomic(ckpt_path, checkpoint(chain), binary=True)
    row = format_row(cell, chain.summary())
    _write_atomic(row_path, row + "\n")
    if os.path.exists(ckpt_path):
        os.remove(ckpt_path)
    return row


def _write_atomic(path, data, binary=False):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb" if binary else "w") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _pool_cell(args):
    cfg_dict, cell, resume = args
    cfg = SweepConfig(**cfg_dict)
    return cell, run_cell(cfg, cell, resume=resume)


def run_sweep(cfg: SweepConfig, resume=False, max_cells=None, workers=None,
              sweep_budget=None):
    """Run (or continue) the whole grid; returns a status dict.

    Results are merged deterministically: per-cell rows land in out/cells and
    the summary is their concatenation in canonical cell order, regardless of
    execution order or worker count.
    """
    cfg.validate()
    if workers is None:
        workers = int(os.environ.get("DETCOND_THREADS", "1"))
    cells = cfg.cells()
    pending = []
    for cell in cells:
        row_path, _ = _cell_paths(cfg.out, cell)
        if resume and os.path.exists(row_path):
            continue
        pending.append(cell)
    if max_cells is not None:
        pending = pending[:max_cells]

    completed = 0
    partial = False
    if workers > 1 and sweep_budget is None:
        args = [(cfg.__dict__, cell, resume) for cell in pending]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for _cell, row in pool.map(_pool_cell, args):
                if row is not None:
                    completed += 1
    else:
        for cell in pending:
            row = run_cell(cfg, cell, resume=resume, sweep_budget=sweep_budget)
            if row is None:
                partial = True
                break
            completed += 1

    all_done = all(os.path.exists(_cell_paths(cfg.out, c)[0]) for c in cells)
    if all_done:
        write_summary(cfg)
    return {"cells": len(cells), "completed_this_session": completed,
            "all_done": all_done, "partial": partial or not all_done}


def write_summary(cfg: SweepConfig):
    """Merge per-cell rows into out/summary.csv in canonical order."""
    lines = [ROW_HEADER]
    for cell in cfg.cells():
        row_path, _ = _cell_paths(cfg.out, cell)
        with open(row_path) as fh:
            lines.append(fh.read().rstrip("\n"))
    path = os.path.join(cfg.out, "summary.csv")
    _write_atomic(path, "\n".join(lines) + "\n")
    return path
