"""Dual-lattice contours: enumeration around an edge and validity checking.

A contour is a closed path along pairwise-distinct directed dual bonds such
that the primal bonds it crosses cut out a bounded connected component int
of the lattice whose inner boundary equals the tails of the crossed bonds.
Dual vertices sit at half-integer points and may repeat along the path.

Orientation convention: the interior lies to the left of the traversal, so
the crossed primal bond of a dual bond is its direction rotated clockwise,
pointing from the interior (tail) to the exterior side (head).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

MIN_CONTOUR_LENGTH = 6

_DUAL_STEPS = ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0))


def primal_bond_of(dual_bond):
    """Directed primal bond crossed by a directed dual bond (tail = interior side)."""
    (ax, ay), (bx, by) = dual_bond
    mx, my = (ax + bx) / 2.0, (ay + by) / 2.0
    dx, dy = bx - ax, by - ay
    px, py = dy, -dx                       # rotate clockwise
    tail = (int(round(mx - px / 2.0)), int(round(my - py / 2.0)))
    head = (int(round(mx + px / 2.0)), int(round(my + py / 2.0)))
    return tail, head


def plaquette_faces(dual_vertex):
    """The four primal bonds of the unit square centered at a dual vertex."""
    a = int(dual_vertex[0] - 0.5)
    b = int(dual_vertex[1] - 0.5)
    c00, c10, c11, c01 = (a, b), (a + 1, b), (a + 1, b + 1), (a, b + 1)
    return (frozenset((c00, c10)), frozenset((c10, c11)),
            frozenset((c11, c01)), frozenset((c01, c00)))


@dataclass(frozen=True)
class Contour:
    dual_vertices: tuple      # cyclic sequence (start repeated implicitly)
    dual_bonds: tuple         # directed dual bonds, pairwise distinct
    primal_bonds: tuple       # directed crossed bonds, tails in the interior
    interior: frozenset       # int(gamma) as a set of lattice points
    length: int

    @property
    def crossed(self):
        """Undirected crossed bonds as frozensets of endpoints."""
        return frozenset(frozenset(b) for b in self.primal_bonds)

    def interior_edges(self):
        """E(int): lattice bonds inside the interior component (crossed excluded)."""
        crossed = self.crossed
        out = set()
        for (x, y) in self.interior:
            for nb in ((x + 1, y), (x, y + 1)):
                bond = frozenset(((x, y), nb))
                if nb in self.interior and bond not in crossed:
                    out.add(bond)
        return out

    def required_hard(self):
        """Interior bonds that a q-contour forces hard: faces of plaquettes
        centered at contour vertices, intersected with E(int)."""
        inside = self.interior_edges()
        out = set()
        for z in set(self.dual_vertices):
            for face in plaquette_faces(z):
                if face in inside:
                    out.add(face)
        return out

    def resolve(self, graph):
        """(crossed edge ids, required-hard edge ids) against an embedded box."""
        def ids(bonds):
            res = []
            for bond in bonds:
                a, b = tuple(bond)
                e = graph.edge_at_coords(a, b)
                if e is None:
                    raise ValueError(f"bond {a}-{b} not present in the graph")
                res.append(e)
            return sorted(res)
        return ids(self.crossed), ids(self.required_hard())

    def product_probability(self, p):
        """P(gamma is a q-contour) under iid Bernoulli(p) hard bonds (the q=1 law)."""
        return p ** len(self.required_hard()) * (1.0 - p) ** len(self.crossed)


def is_q_contour(contour: Contour, hard_of_bond):
    """Check the two defining conditions against a configuration.

    hard_of_bond: callable frozenset-bond -> bool (True = hard).
    """
    for bond in contour.crossed:
        if hard_of_bond(bond):
            return False
    for bond in contour.required_hard():
        if not hard_of_bond(bond):
            return False
    return True


# -- enumeration --------------------------------------------------------------


def _bounded_interior(crossed_undirected, tails, center, radius):
    """Find the component of (Z^2 minus crossed) matching the tail set.

    Works inside a window that strictly contains any contour of the given
    radius; returns the matching component or None.
    """
    cx, cy = center
    lo_x, hi_x = int(cx) - radius - 2, int(cx) + radius + 2
    lo_y, hi_y = int(cy) - radius - 2, int(cy) + radius + 2
    verts = [(x, y) for x in range(lo_x, hi_x + 1) for y in range(lo_y, hi_y + 1)]
    vset = set(verts)
    seen = set()
    comps = []
    for v in verts:
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        seen.add(v)
        touches_rim = False
        while stack:
            (x, y) = stack.pop()
            if x in (lo_x, hi_x) or y in (lo_y, hi_y):
                touches_rim = True
            for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if nb not in vset or nb in seen:
                    continue
                if frozenset(((x, y), nb)) in crossed_undirected:
                    continue
                seen.add(nb)
                comp.add(nb)
                stack.append(nb)
        comps.append((comp, touches_rim))
    for comp, touches_rim in comps:
        if touches_rim:
            continue
        boundary = {v for v in comp
                    if any(nb not in comp for nb in
                           ((v[0] + 1, v[1]), (v[0] - 1, v[1]),
                            (v[0], v[1] + 1), (v[0], v[1] - 1)))}
        if boundary == tails:
            return frozenset(comp)
    return None


def _winding(bonds, point):
    """Winding number of the dual cycle around a point off the dual grid lines.

    Upward ray casting with a half-open span rule so rays through dual
    vertices are counted consistently.
    """
    mx, my = point
    w = 0
    for (ax, ay), (bx, by) in bonds:
        if ay != by or ay <= my:
            continue
        lo, hi = (ax, bx) if ax < bx else (bx, ax)
        if lo <= mx < hi:
            w += -1 if bx > ax else 1
    return w


def _validate_cycle(vertices, bonds, center, radius):
    """Apply the contour definition; returns the interior or None."""
    if _winding(bonds, center) == 0:
        return None
    primal = [primal_bond_of(b) for b in bonds]
    crossed = frozenset(frozenset(b) for b in primal)
    tails = {b[0] for b in primal}
    interior = _bounded_interior(crossed, tails, center, radius)
    if interior is None:
        return None
    if not tails <= interior:
        return None
    return interior, tuple(primal)


def enumerate_contours_around(e, max_len, box):
    """All contours around edge e with length <= max_len inside the box.

    e is an edge id of the embedded box graph; the box must leave margin
    around e. Contours whose interior contains both endpoints of e (with e
    uncrossed) qualify; output is sorted by (length, dual vertex sequence).
    A max_len below the minimum possible length 6 returns [] with a warning.
    """
    if max_len < MIN_CONTOUR_LENGTH:
        warnings.warn("max_len below the shortest surrounding contour (6); "
                      "returning no contours")
        return []
    if box.embedding is None:
        raise ValueError("box must be embedded")
    u, v = box.edges[e]
    cu, cv = box.embedding[u], box.embedding[v]
    if len(cu) != 2:
        raise ValueError("contours are defined on d=2 boxes")
    center = ((cu[0] + cv[0]) / 2.0, (cu[1] + cv[1]) / 2.0)
    radius = max_len // 2 + 1

    coords = set(box.embedding.values())

    def dual_ok(z):
        if abs(z[0] - center[0]) + abs(z[1] - center[1]) > radius + 1:
            return False
        a, b = int(z[0] - 0.5), int(z[1] - 0.5)
        square = ((a, b), (a + 1, b), (a + 1, b + 1), (a, b + 1))
        return all(c in coords for c in square)

    fx, fy = math.floor(center[0]), math.floor(center[1])
    starts = sorted({(x + 0.5, y + 0.5)
                     for x in range(fx - radius - 2, fx + radius + 3)
                     for y in range(fy - radius - 2, fy + radius + 3)
                     if dual_ok((x + 0.5, y + 0.5))})

    found = {}   # frozenset(directed bonds) -> best (vertex sequence, bonds)

    def record(path_vertices, path_bonds):
        res = _validate_cycle(path_vertices, path_bonds, center, radius)
        if res is None:
            return
        interior, primal = res
        if cu not in interior or cv not in interior:
            return
        if frozenset((cu, cv)) in frozenset(frozenset(b) for b in primal):
            return
        key = frozenset(path_bonds)
        seq = tuple(path_vertices)
        prev = found.get(key)
        if prev is None or seq < prev[0]:
            found[key] = (seq, tuple(path_bonds), interior, primal)

    def dfs(v0, current, path_vertices, path_bonds, used):
        depth = len(path_bonds)
        if depth > max_len:
            return
        if current == v0 and depth >= 4:
            record(path_vertices, path_bonds)
            # a pinched contour may pass through v0 again; keep extending
        for dx, dy in _DUAL_STEPS:
            nxt = (current[0] + dx, current[1] + dy)
            if nxt < v0:
                continue
            if not dual_ok(nxt):
                continue
            bond = (current, nxt)
            if bond in used:
                continue
            dist_home = abs(nxt[0] - v0[0]) + abs(nxt[1] - v0[1])
            if depth + 1 + dist_home > max_len:
                continue
            used.add(bond)
            path_vertices.append(nxt)
            path_bonds.append(bond)
            dfs(v0, nxt, path_vertices, path_bonds, used)
            path_bonds.pop()
            path_vertices.pop()
            used.discard(bond)

    for v0 in starts:
        dfs(v0, v0, [v0], [], set())

    contours = []
    for key, (seq, bonds, interior, primal) in found.items():
        contours.append(Contour(dual_vertices=seq[:-1] if seq[-1] == seq[0] else seq,
                                dual_bonds=bonds,
                                primal_bonds=primal,
                                interior=interior,
                                length=len(bonds)))
    contours.sort(key=lambda c: (c.length, c.dual_vertices))
    return contours
