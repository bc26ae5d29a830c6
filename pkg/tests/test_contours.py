"""Contour enumeration checked against an independent interior-based oracle."""

import itertools

import pytest

from detcond.contours import (Contour, enumerate_contours_around,
                              plaquette_faces, primal_bond_of)
from detcond.graphs import build_box


BOX = build_box(2, 6)
E_HORIZ = BOX.edge_at_coords((0, 0), (1, 0))
E_VERT = BOX.edge_at_coords((0, 0), (0, 1))


def test_short_max_len_warns_and_returns_empty():
    with pytest.warns(UserWarning):
        assert enumerate_contours_around(E_HORIZ, 5, BOX) == []


def test_minimal_contour_is_the_domino_hexagon():
    cs = enumerate_contours_around(E_HORIZ, 6, BOX)
    assert len(cs) == 1
    c = cs[0]
    assert c.length == 6
    assert c.interior == frozenset({(0, 0), (1, 0)})
    assert c.required_hard() == {frozenset({(0, 0), (1, 0)})}
    assert len(c.crossed) == 6


def test_length8_census():
    cs = enumerate_contours_around(E_HORIZ, 8, BOX)
    by_len = {}
    for c in cs:
        by_len.setdefault(c.length, []).append(c)
    assert len(by_len[6]) == 1
    # six trominoes containing the domino plus two 2x2 squares
    assert len(by_len[8]) == 8
    sizes = sorted(len(c.interior) for c in by_len[8])
    assert sizes == [3] * 6 + [4, 4]


def _oracle_interiors(endpoints, max_len):
    """Connected lattice animals S containing the endpoints with edge
    boundary size <= max_len; |boundary| = 4|S| - 2|E(S)| caps |S| at 4."""
    base = set(endpoints)
    out = []
    cells = [(x, y) for x in range(-3, 5) for y in range(-3, 4)]
    for extra in range(0, 3):
        for added in itertools.combinations(cells, extra):
            s = base | set(added)
            if len(s) != 2 + extra:
                continue
            if not _connected(s):
                continue
            internal = sum(1 for (x, y) in s
                           for nb in ((x + 1, y), (x, y + 1)) if nb in s)
            boundary_size = 4 * len(s) - 2 * internal
            if boundary_size <= max_len:
                out.append(frozenset(s))
    return set(out)


def _connected(cells):
    cells = set(cells)
    start = next(iter(cells))
    seen = {start}
    stack = [start]
    while stack:
        x, y = stack.pop()
        for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nb in cells and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return seen == cells


@pytest.mark.parametrize("edge,endpoints", [
    (E_HORIZ, ((0, 0), (1, 0))),
    (E_VERT, ((0, 0), (0, 1))),
])
def test_against_interior_oracle(edge, endpoints):
    cs = enumerate_contours_around(edge, 8, BOX)
    got = {c.interior for c in cs}
    expected = _oracle_interiors(endpoints, 8)
    assert got == expected


def test_contour_definition_invariants():
    for c in enumerate_contours_around(E_HORIZ, 8, BOX):
        assert c.length == len(c.dual_bonds) == len(c.primal_bonds)
        assert len(set(c.dual_bonds)) == c.length
        # tails of the crossed bonds = inner boundary of the interior
        tails = {b[0] for b in c.primal_bonds}
        inner_boundary = {v for v in c.interior
                          if any(nb not in c.interior for nb in
                                 ((v[0] + 1, v[1]), (v[0] - 1, v[1]),
                                  (v[0], v[1] + 1), (v[0], v[1] - 1)))}
        assert tails == inner_boundary
        assert tails <= c.interior
        # removing the crossed bonds separates the interior: no crossed bond
        # may be used by a path staying inside
        for bond in c.primal_bonds:
            assert bond[0] in c.interior


def test_enumeration_is_deterministic():
    a = enumerate_contours_around(E_HORIZ, 8, BOX)
    b = enumerate_contours_around(E_HORIZ, 8, BOX)
    assert [(c.length, c.dual_vertices) for c in a] \
        == [(c.length, c.dual_vertices) for c in b]
    lens = [c.length for c in a]
    assert lens == sorted(lens)


def test_primal_bond_geometry():
    # dual bond pointing north crosses the eastward primal bond, tail west
    tail, head = primal_bond_of(((0.5, -0.5), (0.5, 0.5)))
    assert (tail, head) == ((0, 0), (1, 0))
    # and the reverse direction flips the crossing orientation
    tail, head = primal_bond_of(((0.5, 0.5), (0.5, -0.5)))
    assert (tail, head) == ((1, 0), (0, 0))


def test_plaquette_faces():
    faces = plaquette_faces((0.5, 0.5))
    assert frozenset({(0, 0), (1, 0)}) in faces
    assert frozenset({(0, 0), (0, 1)}) in faces
    assert len(faces) == 4


def test_product_probability_closed_form():
    cs = enumerate_contours_around(E_HORIZ, 8, BOX)
    p = 0.3
    hexagon = [c for c in cs if c.length == 6][0]
    assert hexagon.product_probability(p) == pytest.approx(p * (1 - p) ** 6)
    squares = [c for c in cs if len(c.interior) == 4]
    for c in squares:
        assert c.product_probability(p) == pytest.approx(p ** 4 * (1 - p) ** 8)
