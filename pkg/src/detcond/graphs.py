"""Finite graphs the conductance model lives on.

Graphs are immutable after construction: vertices are integers 0..n-1,
edges are an ordered list of endpoint pairs (parallel edges and self-loops
permitted), and grid-like graphs carry an integer-coordinate embedding.
Builders cover Z^d boxes (free and wired), rectangular grids, subgraphs,
contractions, and combinatorial planar duals.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from itertools import product


class SizeCapError(ValueError):
    """Raised when an operation is asked to exceed its enumeration cap."""


class FiniteGraph:
    """Connected multigraph with numbered vertices and ordered edges.

    edges[i] = (u, v); the stored order fixes the orientation u -> v used
    for gradients and currents (grid builders store the smaller lattice
    point first). `rotation` is an optional combinatorial embedding:
    rotation[v] lists the darts (edge_id, end) leaving v in counter-
    clockwise order, where end=0 is the dart u->v and end=1 is v->u.
    """

    def __init__(self, n, edges, boundary=(), embedding=None, rotation=None,
                 check_connected=True):
        self.n = int(n)
        self.edges = [(int(u), int(v)) for u, v in edges]
        self.m = len(self.edges)
        self.boundary = frozenset(int(v) for v in boundary)
        self.embedding = dict(embedding) if embedding else None
        self.rotation = rotation
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge endpoint out of range: ({u}, {v})")
        if not self.boundary <= set(range(self.n)):
            raise ValueError("boundary is not a subset of the vertex set")
        self._adj = None
        self._coord_edge = None
        if check_connected and not self.is_connected():
            raise ValueError("graph is not connected")

    # -- basic structure ---------------------------------------------------

    @property
    def adjacency(self):
        """adjacency[v] = list of (neighbor, edge_id), self-loops excluded."""
        if self._adj is None:
            adj = [[] for _ in range(self.n)]
            for i, (u, v) in enumerate(self.edges):
                if u != v:
                    adj[u].append((v, i))
                    adj[v].append((u, i))
            self._adj = adj
        return self._adj

    def degrees(self):
        """Vertex degrees, self-loops counted twice."""
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def is_connected(self):
        if self.n == 0:
            return False
        seen = [False] * self.n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            u = stack.pop()
            for w, _ in self.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    stack.append(w)
        return count == self.n

    def edge_ids_between(self, u, v):
        """All edge ids with endpoint set {u, v}."""
        key = (u, v) if u <= v else (v, u)
        out = []
        for i, (a, b) in enumerate(self.edges):
            if (a, b) == key or (b, a) == key:
                out.append(i)
        return out

    def _coord_tables(self):
        if self.embedding is None:
            raise ValueError("graph has no embedding")
        if self._coord_edge is None:
            inv = {c: v for v, c in self.embedding.items()}
            table = {}
            for i, (u, v) in enumerate(self.edges):
                cu = self.embedding.get(u)
                cv = self.embedding.get(v)
                if cu is not None and cv is not None:
                    table[frozenset((cu, cv))] = i
            self._coord_edge = (inv, table)
        return self._coord_edge

    def edge_at_coords(self, xy_a, xy_b):
        """Edge id joining two embedded lattice points, or None."""
        _, table = self._coord_tables()
        return table.get(frozenset((tuple(xy_a), tuple(xy_b))))

    def vertex_at(self, coords):
        inv, _ = self._coord_tables()
        return inv.get(tuple(coords))

    def canonical_hash(self):
        """Stable hash of the structure (edge order included: it fixes scan order)."""
        h = hashlib.sha256()
        h.update(f"v={self.n}\n".encode())
        for u, v in self.edges:
            h.update(f"{u} {v}\n".encode())
        h.update(("b=" + ",".join(map(str, sorted(self.boundary)))).encode())
        return h.hexdigest()

    def __repr__(self):
        return f"FiniteGraph(n={self.n}, m={self.m}, boundary={len(self.boundary)})"


@dataclass
class ContractResult:
    graph: FiniteGraph
    edge_map: list          # old edge id -> new edge id, None for dropped self-loops
    vertex_map: list = field(default=None)  # old vertex id -> new vertex id


# -- builders ---------------------------------------------------------------


def build_box(d, n, wired=False):
    """Lattice box Lambda_n = [-n, n]^d with nearest-neighbour edges.

    Boundary = max-norm-n shell. With wired=True the whole boundary is
    collapsed to a single vertex; self-loops created by the collapse are
    dropped, parallel edges are kept.
    """
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    coords = sorted(product(range(-n, n + 1), repeat=d))
    index = {c: i for i, c in enumerate(coords)}
    edges = []
    for c in coords:
        for i in range(d):
            nb = tuple(c[j] + (1 if j == i else 0) for j in range(d))
            if nb in index:
                edges.append((index[c], index[nb]))
    boundary = [index[c] for c in coords if max(abs(x) for x in c) == n]
    g = FiniteGraph(len(coords), edges, boundary=boundary,
                    embedding={i: c for c, i in index.items()})
    if d == 2:
        g.rotation = rotation_from_embedding(g)
    if not wired:
        return g
    return contract(g, boundary, kind="vertices").graph


def grid_graph(width, height):
    """width x height rectangular grid (vertex counts), coords (x, y) from 0."""
    if width < 2 or height < 2:
        raise ValueError("need width, height >= 2")
    coords = sorted(product(range(width), range(height)))
    index = {c: i for i, c in enumerate(coords)}
    edges = []
    for c in coords:
        for step in ((1, 0), (0, 1)):
            nb = (c[0] + step[0], c[1] + step[1])
            if nb in index:
                edges.append((index[c], index[nb]))
    boundary = [index[c] for c in coords
                if c[0] in (0, width - 1) or c[1] in (0, height - 1)]
    g = FiniteGraph(len(coords), edges, boundary=boundary,
                    embedding={i: c for c, i in index.items()})
    g.rotation = rotation_from_embedding(g)
    return g


def triangle():
    g = FiniteGraph(3, [(0, 1), (0, 2), (1, 2)],
                    embedding={0: (0, 0), 1: (1, 0), 2: (0, 1)})
    g.rotation = rotation_from_embedding(g)
    return g


def cycle_graph(k):
    edges = [(i, (i + 1) % k) for i in range(k)]
    emb = {i: (round(math.cos(2 * math.pi * i / k) * 100),
               round(math.sin(2 * math.pi * i / k) * 100)) for i in range(k)}
    g = FiniteGraph(k, edges, embedding=emb)
    g.rotation = rotation_from_embedding(g)
    return g


def path_graph(k):
    return FiniteGraph(k, [(i, i + 1) for i in range(k - 1)],
                       embedding={i: (i, 0) for i in range(k)})


def complete_graph(k):
    return FiniteGraph(k, [(i, j) for i in range(k) for j in range(i + 1, k)])


def single_edge():
    g = FiniteGraph(2, [(0, 1)], embedding={0: (0, 0), 1: (1, 0)})
    g.rotation = rotation_from_embedding(g)
    return g


def builtin_graph(name):
    """Named graphs used by the CLI and the test family."""
    name = name.lower()
    table = {
        "edge": single_edge,
        "triangle": triangle,
        "path3": lambda: path_graph(3),
        "c4": lambda: cycle_graph(4),
        "k4": lambda: complete_graph(4),
        "grid2x2": lambda: grid_graph(2, 2),
        "grid2x3": lambda: grid_graph(2, 3),
        "grid3x3": lambda: grid_graph(3, 3),
        "lambda1": lambda: build_box(2, 1),
        "lambda1w": lambda: build_box(2, 1, wired=True),
        "lambda2": lambda: build_box(2, 2),
        "lambda2w": lambda: build_box(2, 2, wired=True),
        "lambda3": lambda: build_box(2, 3),
    }
    if name in table:
        return table[name]()
    if name.startswith("box:"):
        parts = name[4:].split(",")
        d, r = int(parts[0]), int(parts[1])
        wired = len(parts) > 2 and parts[2] == "wired"
        return build_box(d, r, wired=wired)
    if name.startswith("grid:"):
        w, h = name[5:].split("x")
        return grid_graph(int(w), int(h))
    raise ValueError(f"unknown graph name: {name}")


# -- contraction -------------------------------------------------------------


def contract(g, f, kind="edges"):
    """Contract an edge set (kind='edges') or identify a vertex set.

    Parallel edges are preserved as distinct ids; self-loops produced by
    the contraction are dropped. Returns the new graph together with the
    edge-id provenance map (old id -> new id or None).
    """
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    f = list(f)
    if kind == "edges":
        for eid in f:
            u, v = g.edges[eid]
            union(u, v)
    elif kind == "vertices":
        for v in f[1:]:
            union(f[0], v)
    else:
        raise ValueError("kind must be 'edges' or 'vertices'")

    roots = sorted({find(v) for v in range(g.n)})
    new_id = {r: i for i, r in enumerate(roots)}
    vmap = [new_id[find(v)] for v in range(g.n)]

    edges = []
    emap = []
    for u, v in g.edges:
        a, b = vmap[u], vmap[v]
        if a == b:
            emap.append(None)
        else:
            emap.append(len(edges))
            edges.append((a, b))
    if not edges:
        raise ValueError("contraction produced an edgeless graph")

    counts = [0] * len(roots)
    for v in range(g.n):
        counts[vmap[v]] += 1
    embedding = None
    if g.embedding is not None:
        embedding = {vmap[v]: c for v, c in g.embedding.items()
                     if counts[vmap[v]] == 1}
    boundary = frozenset(vmap[v] for v in g.boundary)
    out = FiniteGraph(len(roots), edges, boundary=boundary, embedding=embedding)
    return ContractResult(out, emap, vmap)


# -- planar duality ----------------------------------------------------------


def rotation_from_embedding(g):
    """Counter-clockwise rotation system from straight-line coordinates."""
    if g.embedding is None:
        raise ValueError("graph has no embedding")
    rotation = []
    for v in range(g.n):
        darts = []
        cv = g.embedding[v]
        for i, (a, b) in enumerate(g.edges):
            if a == b:
                continue
            if a == v:
                darts.append((i, 0))
            if b == v:
                darts.append((i, 1))
        def angle(dart):
            i, end = dart
            other = g.edges[i][1 - end]
            co = g.embedding[other]
            return math.atan2(co[1] - cv[1], co[0] - cv[0])
        darts.sort(key=angle)
        rotation.append(darts)
    return rotation


def _face_orbits(g):
    """Faces of the combinatorial map as dart cycles (orbit of sigma o alpha)."""
    if g.rotation is None:
        raise ValueError("planar dual needs an embedding or rotation system")
    pos = {}
    for v, darts in enumerate(g.rotation):
        for k, d in enumerate(darts):
            pos[d] = (v, k)
    all_darts = [(i, end) for i in range(g.m) for end in (0, 1)
                 if g.edges[i][0] != g.edges[i][1]]
    faces = []
    seen = set()
    for start in all_darts:
        if start in seen:
            continue
        cyc = []
        d = start
        while True:
            cyc.append(d)
            seen.add(d)
            rev = (d[0], 1 - d[1])
            v, k = pos[rev]
            darts = g.rotation[v]
            d = darts[(k + 1) % len(darts)]
            if d == start:
                break
        faces.append(cyc)
    return faces


def planar_dual(g):
    """Combinatorial dual: one vertex per face, dual edge i crosses primal edge i.

    Requires a rotation system (grid builders and planar_dual itself provide
    one). Returns (dual graph, edge bijection as a list: primal id -> dual id,
    here the identity). Bridges become self-loops in the dual.
    """
    faces = _face_orbits(g)
    face_of = {}
    for fi, cyc in enumerate(faces):
        for d in cyc:
            face_of[d] = fi
    dual_edges = []
    for i in range(g.m):
        u, v = g.edges[i]
        if u == v:
            raise ValueError("planar dual of a graph with self-loops is not supported")
        dual_edges.append((face_of[(i, 0)], face_of[(i, 1)]))
    # dual dart (i, end) has tail face_of[(i, end)], so the rotation around a
    # face is its dart cycle verbatim
    dual_rotation = [list(cyc) for cyc in faces]
    dual = FiniteGraph(len(faces), dual_edges)
    dual.rotation = dual_rotation
    return dual, list(range(g.m))


# -- edge-list text format -----------------------------------------------


def write_edge_list(g):
    """Serialize to the plain text edge-list format."""
    dim = 0
    if g.embedding:
        dim = len(next(iter(g.embedding.values())))
    lines = [f"graph v={g.n} e={g.m} d={dim}"]
    for u, v in g.edges:
        lines.append(f"{u} {v}")
    if g.boundary:
        lines.append("boundary: " + " ".join(str(v) for v in sorted(g.boundary)))
    if g.embedding:
        for v in sorted(g.embedding):
            lines.append("coord %d %s" % (v, " ".join(str(c) for c in g.embedding[v])))
    return "\n".join(lines) + "\n"


def parse_edge_list(text):
    """Parse the edge-list text format produced by write_edge_list."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("graph "):
        raise ValueError("missing 'graph v=<n> e=<m> d=<dim>' header")
    header = dict(part.split("=") for part in lines[0].split()[1:])
    n, m = int(header["v"]), int(header["e"])
    edges = []
    boundary = []
    embedding = {}
    for ln in lines[1:]:
        if ln.startswith("boundary:"):
            boundary = [int(t) for t in ln.split(":", 1)[1].split()]
        elif ln.startswith("coord "):
            toks = ln.split()
            embedding[int(toks[1])] = tuple(int(t) for t in toks[2:])
        else:
            toks = ln.split()
            if len(toks) != 2:
                raise ValueError(f"bad edge line: {ln!r}")
            edges.append((int(toks[0]), int(toks[1])))
    if len(edges) != m:
        raise ValueError(f"header says e={m} but found {len(edges)} edges")
    g = FiniteGraph(n, edges, boundary=boundary,
                    embedding=embedding if embedding else None)
    if g.embedding and len(next(iter(g.embedding.values()))) == 2 \
            and len(g.embedding) == g.n:
        try:
            g.rotation = rotation_from_embedding(g)
        except Exception:
            pass
    return g
