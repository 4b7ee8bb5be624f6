"""Lattice geometry: parity, region builders, dual surfaces, serialization."""

import random

import pytest

from dimerlab.lattice import (
    Region, RegionError, ambient_boundary_surface, aztec_diamond_footprint,
    boundary_surface, build_aztec, build_box, build_from_spec, build_octahedron,
    build_prism, build_pyramid, build_torus, cross_section, parity,
)


def test_parity_examples():
    assert parity((0, 0, 0)) == 0
    assert parity((1, 0, 0)) == 1
    assert parity((1, 1, 1)) == 1
    assert parity((-1, 2, 0)) == 1


def test_build_box_counts():
    b = build_box(2, 2, 2)
    assert len(b) == 8
    assert len(b.even_cells()) == 4 and len(b.odd_cells()) == 4
    b3 = build_box(3, 3, 3)
    assert len(b3.even_cells()) == 14 and len(b3.odd_cells()) == 13
    assert len(build_box(1, 1, 2)) == 2


def test_build_box_rejects_zero_dimension():
    with pytest.raises(RegionError):
        build_box(0, 2, 2)


def test_aztec_diamond_footprint_size():
    for n in range(1, 5):
        assert len(aztec_diamond_footprint(n)) == 2 * n * (n + 1)


def test_aztec_families():
    assert len(build_pyramid(1)) == 4
    assert len(build_octahedron(1)) == 8
    assert len(build_prism(1, 2)) == 4 + 12
    # pyramid(k) = sum of AD(1..k)
    assert len(build_pyramid(3)) == sum(2 * n * (n + 1) for n in (1, 2, 3))
    assert len(build_octahedron(2)) == 2 * len(build_pyramid(2))
    assert len(build_aztec("pyramid", k=2)) == len(build_pyramid(2))


def test_torus_requires_even_dims():
    with pytest.raises(RegionError):
        build_torus(3, 4, 4)
    t = build_torus(2, 2, 2)
    assert len(t) == 8
    # length-2 torus adjacency is a multigraph: 6 steps, 3 distinct neighbors
    steps = t.neighbor_steps((0, 0, 0))
    assert len(steps) == 6
    assert len(t.neighbors((0, 0, 0))) == 3


def test_torus_degree_six():
    t = build_torus(4, 2, 6)
    for c in list(t.cells)[:10]:
        assert len(t.neighbor_steps(c)) == 6


def test_open_region_degree_at_most_six():
    b = build_box(3, 3, 3)
    assert all(len(b.neighbor_steps(c)) <= 6 for c in b.cells)
    assert len(b.neighbor_steps((1, 1, 1))) == 6


def test_boundary_surface_box():
    b = build_box(2, 2, 2)
    s = boundary_surface(b, b.cells)
    assert s.area() == 24
    assert s.color_counts() == (12, 12)


def test_boundary_surface_single_even_cell():
    b = build_box(3, 3, 3)
    s = boundary_surface(b, {(0, 0, 0)})
    assert s.area() == 6
    assert s.color_counts() == (6, 0)
    assert s.is_monochromatic()


def test_boundary_surface_empty():
    b = build_box(2, 2, 2)
    assert boundary_surface(b, set()).area() == 0


def test_white_black_imbalance_identity():
    # white - black = 6 (even - odd) for arbitrary finite cell sets
    rng = random.Random(5)
    window = [(x, y, z) for x in range(4) for y in range(4) for z in range(3)]
    for _ in range(200):
        cells = set(rng.sample(window, rng.randrange(1, 13)))
        surf = ambient_boundary_surface(cells)
        white, black = surf.color_counts()
        even = sum(1 for c in cells if parity(c) == 0)
        odd = len(cells) - even
        assert white - black == 6 * (even - odd)


def test_surface_colors_are_pure_functions():
    b = build_box(3, 3, 2)
    s1 = boundary_surface(b, {(0, 0, 0), (1, 0, 0)})
    s2 = boundary_surface(b, {(0, 0, 0), (1, 0, 0)})
    assert s1 == s2


def test_cross_section_counts():
    t = build_torus(4, 4, 4)
    s = cross_section(t, 0, 1)
    assert s.area() == 16
    assert all(sq.normal == (1, 0, 0) for sq in s.squares)


def test_region_json_roundtrip():
    for region in (build_box(2, 3, 4), build_torus(2, 4, 2), build_pyramid(2)):
        again = Region.from_json(region.to_json())
        assert again == region


def test_builder_spec():
    r = build_from_spec({"builder": "box", "args": {"a": 2, "b": 2, "c": 2}})
    assert r == build_box(2, 2, 2)
    r = build_from_spec({"builder": "prism", "args": {"k": 1, "height": 2}})
    assert r == build_prism(1, 2)
