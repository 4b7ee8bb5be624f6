"""Tilings: validation, brickwork generators, the prescribed-mean-current
construction, gluing, and serialization."""

import random
from fractions import Fraction

import pytest

from dimerlab.doubledimer import superpose
from dimerlab.lattice import add, build_box, build_torus
from dimerlab.tiling import (
    FluxMismatchError, PeriodicTiling, Tiling, TilingError, brickwork,
    coordinate_brickwork, glue_halfspaces, periodic_brickwork, stacked_brickwork,
    tau_v, validate,
)

F = Fraction


def test_validate_ok_and_violations():
    t = brickwork(build_torus(2, 2, 2), (0, 0, 1))
    assert validate(t) == []
    # remove one tile -> two uncovered cells
    tiles = sorted(t.tiles)
    broken = Tiling(t.region, frozenset(tiles[1:]))
    problems = validate(broken)
    assert sum("uncovered" in p for p in problems) == 2
    # edge between non-neighbors is rejected at construction
    with pytest.raises(TilingError):
        Tiling.from_json({"version": 1, "region": build_box(3, 1, 1).to_json(),
                          "tiles": [[[0, 0, 0], [2, 0, 0]]]})


def test_brickwork_torus():
    t = build_torus(2, 2, 2)
    bw = brickwork(t, (0, 0, 1))
    assert len(bw.tiles) == 4
    assert all(d == (0, 0, 1) for _, d in bw.tiles)


def test_brickwork_incompatible_box():
    with pytest.raises(TilingError):
        brickwork(build_box(3, 3, 3), (1, 0, 0))
    # parity brickwork does not fit most boxes
    with pytest.raises(TilingError):
        brickwork(build_box(2, 2, 2), (1, 0, 0))


def test_coordinate_brickwork_box():
    cb = coordinate_brickwork(build_box(2, 2, 2), 0)
    assert len(cb.tiles) == 4
    assert validate(cb) == []
    pairs = cb.tile_pairs()
    assert all(abs(a[0] - b[0]) == 1 for a, b in pairs)


def test_stacked_brickwork_winding_zero():
    region, t = stacked_brickwork(
        [((1, 0, 0), 1), ((0, 1, 0), 1), ((-1, 0, 0), 1), ((0, -1, 0), 1)], 4, 4)
    from dimerlab.flows import winding

    assert validate(t) == []
    assert winding(t) == (0, 0, 0)


def test_stacked_brickwork_single_direction_is_brickwork():
    region, t = stacked_brickwork([((1, 0, 0), 4)], 4, 4)
    assert t.tiles == brickwork(region, (1, 0, 0)).tiles


def test_stacked_brickwork_rigid_and_loopless():
    # thickness-2 alternating stack: no flips, no trits, shortest alternating
    # cycle is the straight winding line (min(n1,n2) edges), and no
    # contractible alternating cycle up to 10 edges (>= the 4*n3 bound)
    from dimerlab.dynamics import find_flips, find_trits, shortest_alternating_cycle

    region, t = stacked_brickwork(
        [((1, 0, 0), 2), ((0, 1, 0), 2), ((-1, 0, 0), 2), ((0, -1, 0), 2)], 4, 4)
    assert find_flips(t) == []
    assert find_trits(t) == []
    assert shortest_alternating_cycle(t, max_len=10, contractible_only=False) == 4
    assert shortest_alternating_cycle(t, max_len=10, contractible_only=True) is None


def test_tau_v_brickwork_case():
    t = tau_v((1, 0, 0))
    assert set(t.assignment.values()) == {(1, 0, 0)}
    assert t.mean_current() == (1, 0, 0)


def test_tau_v_zero_current():
    t = tau_v((0, 0, 0))
    assert t.mean_current() == (0, 0, 0)
    assert set(t.assignment.values()) == {(1, 0, 0), (-1, 0, 0)}
    assert t.density == F(1, 2)
    assert validate(t.to_torus_tiling()) == []


def test_tau_v_thirds():
    v = (F(1, 3), F(1, 3), F(1, 3))
    t = tau_v(v)
    assert t.mean_current() == v
    assert t.w == v
    assert len(t.word) == 3
    assert validate(t.to_torus_tiling()) == []


def test_tau_v_rejects_bad_inputs():
    with pytest.raises(TilingError):
        tau_v((-1, 0, 0))
    with pytest.raises(TilingError):
        tau_v((F(1, 2), F(1, 2), F(1, 2)))


def test_tau_v_periodicity():
    rng = random.Random(0)
    for v in ((F(1, 2), F(1, 4), 0), (F(-1, 3), 0, F(1, 3))):
        t = tau_v(v)
        for _ in range(25):
            c = tuple(rng.randrange(-12, 12) for _ in range(3))
            for i in range(3):
                shift = [0, 0, 0]
                shift[i] = t.dims[i]
                assert t.tile_dir(c) == t.tile_dir(add(c, tuple(shift)))


def test_tau_v_superposition_paths():
    # non-double edges of (tau_v, -eta1 brickwork) lie on cycles whose
    # two-step displacement is exactly w(v) + eta1
    v = (F(1, 2), F(-1, 4), 0)
    t = tau_v(v)
    ref = periodic_brickwork((-1, 0, 0), t.dims)
    cfg = superpose(t.to_torus_tiling(), ref.to_torus_tiling())
    expected = (t.w[0] + 1, t.w[1], t.w[2])
    assert cfg.cycles, "thinned construction must keep some paths"
    for cyc in cfg.cycles:
        disp = cyc.displacement()
        assert tuple(F(2 * disp[i], len(cyc)) for i in range(3)) == expected


def test_tau_v_phases_differ():
    a = tau_v((F(1, 2), 0, 0), phase=0)
    b = tau_v((F(1, 2), 0, 0), phase=1)
    assert a.assignment != b.assignment
    assert a.mean_current() == b.mean_current() == (F(1, 2), 0, 0)


def test_periodic_tiling_translate_parity_guard():
    t = tau_v((0, 0, 0))
    with pytest.raises(TilingError):
        t.translate((1, 0, 0))
    moved = t.translate((0, 0, 2))
    assert moved.mean_current() == t.mean_current()


def test_glue_self_brickwork_is_identity():
    bw = periodic_brickwork((0, 1, 0))
    slab = glue_halfspaces(bw, bw, (1, 0, 0), gap=2)
    # the gap is filled with the brickwork pattern itself
    assert all(d == (0, 1, 0) for _, d in slab.tiles)


def test_glue_flux_mismatch():
    with pytest.raises(FluxMismatchError):
        glue_halfspaces(periodic_brickwork((1, 0, 0)), periodic_brickwork((-1, 0, 0)),
                        (1, 0, 0), gap=2)


def test_glue_phases_across_x_plane():
    a = tau_v((F(1, 2), 0, 0), phase=0)
    b = tau_v((F(1, 2), 0, 0), phase=1)
    slab = glue_halfspaces(a, b, (1, 0, 0), gap_max=8 * 8)
    # every slab cell covered exactly once
    covered = {}
    width = slab.width
    for even, d in slab.tiles:
        for c in (even, add(even, d)):
            lev = c[0]
            if 0 <= lev < width:
                key = tuple(x % 8 if i else x for i, x in enumerate(c))
                covered[c] = covered.get(c, 0) + 1
    assert all(v == 1 for v in covered.values())


def test_glue_diagonal_plane_self():
    t = tau_v((F(1, 3), F(1, 3), F(1, 3)))
    slab = glue_halfspaces(t, t, (1, 1, 1), gap=4)
    assert len(slab.tiles) > 0


def test_tiling_json_roundtrip():
    t = brickwork(build_torus(4, 2, 2), (1, 0, 0))
    again = Tiling.from_json(t.to_json())
    assert again == t
    t2 = coordinate_brickwork(build_box(2, 3, 2), 1)
    assert Tiling.from_json(t2.to_json()) == t2
