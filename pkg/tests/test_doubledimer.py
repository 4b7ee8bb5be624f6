"""Double-dimer superposition, displacements, chain swapping, slopes."""

from fractions import Fraction

import pytest

from dimerlab.doubledimer import DoubleDimerError, chain_swap, cycle_displacement, slope_statistics, superpose
from dimerlab.dynamics import sample_uniform
from dimerlab.flows import mean_current, winding
from dimerlab.lattice import build_box, build_torus
from dimerlab.tiling import brickwork, coordinate_brickwork

F = Fraction


def test_superpose_equal_tilings_all_double():
    t = brickwork(build_torus(2, 2, 2), (1, 0, 0))
    cfg = superpose(t, t)
    assert len(cfg.double_edges) == len(t.tiles)
    assert cfg.cycles == ()


def test_superpose_2x2x1_box():
    box = build_box(2, 2, 1)
    a = coordinate_brickwork(box, 0)
    b = coordinate_brickwork(box, 1)
    cfg = superpose(a, b)
    assert len(cfg.cycles) == 1
    assert len(cfg.cycles[0]) == 4
    assert cycle_displacement(cfg.cycles[0]) == (0, 0, 0)


def test_superpose_region_mismatch():
    with pytest.raises(DoubleDimerError):
        superpose(coordinate_brickwork(build_box(2, 2, 1), 0),
                  coordinate_brickwork(build_box(2, 2, 2), 0))


def test_opposite_brickworks_wind():
    torus = build_torus(4, 4, 4)
    t1 = brickwork(torus, (1, 0, 0))
    t2 = brickwork(torus, (-1, 0, 0))
    cfg = superpose(t1, t2)
    assert len(cfg.cycles) == 16  # one per (y, z) column
    assert set(cfg.windings()) == {(1, 0, 0)}
    for cyc in cfg.cycles:
        assert cycle_displacement(cyc) == (4, 0, 0)


def test_contractible_cycles_zero_displacement():
    torus = build_torus(4, 2, 2)
    t1 = sample_uniform(torus, 40, seed=1)
    t2 = sample_uniform(torus, 40, seed=2)
    cfg = superpose(t1, t2)
    for cyc, w in zip(cfg.cycles, cfg.windings()):
        if w == (0, 0, 0):
            assert cycle_displacement(cyc) == (0, 0, 0)


def test_chain_swap_p0_identity_p1_full():
    torus = build_torus(4, 4, 2)
    t1 = brickwork(torus, (1, 0, 0))
    t2 = brickwork(torus, (-1, 0, 0))
    s1, s2 = chain_swap(t1, t2, 0.0, seed=0)
    assert (s1.tiles, s2.tiles) == (t1.tiles, t2.tiles)
    s1, s2 = chain_swap(t1, t2, 1.0, seed=0)
    assert (s1.tiles, s2.tiles) == (t2.tiles, t1.tiles)


def test_chain_swap_conservation():
    torus = build_torus(4, 4, 2)
    t1 = sample_uniform(torus, 60, seed=3)
    t2 = brickwork(torus, (1, 0, 0))
    a = winding(t1)
    b = winding(t2)
    for trial in range(10):
        s1, s2 = chain_swap(t1, t2, 0.5, seed=(7, trial))
        assert (s1.tiles | s2.tiles) == (t1.tiles | t2.tiles)
        w1, w2 = winding(s1), winding(s2)
        assert tuple(x + y for x, y in zip(w1, w2)) == tuple(x + y for x, y in zip(a, b))


def test_chain_swap_only_winding_cycles_move():
    torus = build_torus(4, 4, 2)
    t1 = sample_uniform(torus, 60, seed=4)
    t2 = sample_uniform(torus, 60, seed=5)
    cfg = superpose(t1, t2)
    frozen = set()
    for cyc, w in zip(cfg.cycles, cfg.windings()):
        if w == (0, 0, 0):
            frozen |= cyc.tau1_tiles()
    s1, _ = chain_swap(t1, t2, 1.0, seed=8)
    assert frozen <= s1.tiles


def test_chain_swap_requires_torus():
    box = build_box(2, 2, 2)
    a = coordinate_brickwork(box, 0)
    with pytest.raises(DoubleDimerError):
        chain_swap(a, a, 0.5, seed=0)


def test_slope_statistics_identity():
    torus = build_torus(4, 4, 2)
    for seeds in ((1, 2), (3, 4), (5, 6)):
        t1 = sample_uniform(torus, 50, seed=seeds[0])
        t2 = sample_uniform(torus, 50, seed=seeds[1])
        cfg = superpose(t1, t2)
        slopes, mean = slope_statistics(cfg)
        expected = tuple(a - b for a, b in zip(mean_current(t1), mean_current(t2)))
        assert mean == expected


def test_slope_statistics_brickwork_pair():
    torus = build_torus(4, 4, 4)
    cfg = superpose(brickwork(torus, (1, 0, 0)), brickwork(torus, (-1, 0, 0)))
    slopes, mean = slope_statistics(cfg)
    assert set(slopes) == {(F(2), F(0), F(0))}
    assert mean == (2, 0, 0)


def test_slope_statistics_equal_tilings():
    torus = build_torus(2, 2, 2)
    t = brickwork(torus, (0, 1, 0))
    slopes, mean = slope_statistics(superpose(t, t))
    assert slopes == []
    assert mean == (0, 0, 0)
