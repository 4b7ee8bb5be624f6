"""Local moves, twist laws, the loop-shift chain, and connectivity."""

import random
from fractions import Fraction

import numpy as np
import pytest

from dimerlab.dynamics import (
    Move, _cube_rings, _ring_matchings, apply_move, chain_trajectory,
    connectivity, enumerate_tilings, exact_transition_matrix, find_flips,
    find_trits, hopfion_tiling, loop_shift_step, sample_uniform, twist,
)
from dimerlab.lattice import add, build_box, build_torus
from dimerlab.tileability import find_matching
from dimerlab.tiling import coordinate_brickwork, validate

F = Fraction


def test_enumerate_box222():
    assert len(enumerate_tilings(build_box(2, 2, 2))) == 9


def test_find_flips_coordinate_brickwork():
    t = coordinate_brickwork(build_box(2, 2, 2), 0)
    assert len(find_flips(t)) == 4
    assert find_trits(t) == []


def test_single_domino_no_moves():
    t = find_matching(build_box(1, 1, 2))
    assert find_flips(t) == []
    assert find_trits(t) == []


def test_hopfion_is_flip_rigid():
    for chirality in (0, 1):
        h = hopfion_tiling(chirality)
        assert validate(h) == []
        assert find_flips(h) == []
        assert len(find_trits(h)) > 0  # trits exist (flip+trit graph is connected)
    assert hopfion_tiling(0).tiles != hopfion_tiling(1).tiles


def test_moves_preserve_validity():
    rng = random.Random(7)
    t = sample_uniform(build_box(4, 4, 2), 100, seed=5)
    for mv in rng.sample(find_flips(t), 4) + find_trits(t)[:2]:
        assert validate(apply_move(t, mv)) == []


def test_twist_brickwork_zero():
    t = coordinate_brickwork(build_box(4, 4, 4), 0)
    assert twist(t) == 0


def test_twist_hopfion_chiralities():
    assert twist(hopfion_tiling(0)) == 1
    assert twist(hopfion_tiling(1)) == -1


def test_canonical_trit_twist_convention():
    # pinned convention: the M1 -> M2 trit on the first ring of the cube at
    # (1,1,0) in box(4,4,2), completed by the deterministic matcher, has
    # delta twist exactly +1
    region = build_box(4, 4, 2)
    ring = _cube_rings((1, 1, 0))[0]
    m1, m2 = _ring_matchings(region, [region.reduce(c) for c in ring])
    t1 = find_matching(region, boundary=[(e, add(e, d)) for e, d in m1])
    t2 = apply_move(t1, Move("trit", m1, m2))
    assert twist(t2) - twist(t1) == 1


def test_twist_laws_on_samples():
    rng = random.Random(3)
    box = build_box(4, 4, 4)
    t = sample_uniform(box, 150, seed=9)
    base = twist(t)
    assert base.denominator == 1
    for mv in rng.sample(find_flips(t), min(8, len(find_flips(t)))):
        assert twist(apply_move(t, mv)) == base
    for mv in find_trits(t):
        assert abs(twist(apply_move(t, mv)) - base) == 1


def test_loop_shift_single_domino_identity():
    region = build_box(1, 1, 2)
    t = find_matching(region)
    rng = np.random.Generator(np.random.Philox(0))
    assert loop_shift_step(t, rng).tiles == t.tiles


def test_loop_shift_preserves_validity():
    region = build_torus(4, 2, 2)
    t = find_matching(region)
    rng = np.random.Generator(np.random.Philox(17))
    for _ in range(200):
        t = loop_shift_step(t, rng)
        assert validate(t) == []


def test_loop_shift_changes_one_cycle():
    region = build_box(2, 2, 2)
    t = find_matching(region)
    rng = np.random.Generator(np.random.Philox(1))
    from dimerlab.doubledimer import superpose

    for _ in range(30):
        t2 = loop_shift_step(t, rng)
        cfg = superpose(t, t2)
        assert len(cfg.cycles) <= 1
        t = t2


def test_sample_uniform_deterministic():
    region = build_box(2, 2, 2)
    a = sample_uniform(region, 50, seed=123)
    b = sample_uniform(region, 50, seed=123)
    assert a.tiles == b.tiles
    c = sample_uniform(region, 0, seed=99)
    assert c.tiles == find_matching(region).tiles


def test_exact_transition_matrix_rows_sum_to_one():
    P = exact_transition_matrix(build_box(2, 2, 1))
    states = {k[0] for k in P}
    for t in states:
        assert sum(P[k] for k in P if k[0] == t) == 1


def test_connectivity_box222_flips():
    comps = connectivity(build_box(2, 2, 2), ("flip",))
    assert len(comps) == 1
    assert len(comps[0]) == 9


def test_loop_shifts_connect_all_tilings():
    # constructive: decompose the superposition into cycles and shift each
    from dimerlab.doubledimer import superpose
    from dimerlab.tiling import Tiling

    region = build_box(2, 2, 2)
    tilings = enumerate_tilings(region)
    target = tilings[0]
    for t in tilings[1:]:
        cfg = superpose(t, target)
        cur = t.tiles
        for cyc in cfg.cycles:
            cur = (cur - cyc.tau1_tiles()) | cyc.tau2_tiles()
        assert cur == target.tiles
        assert validate(Tiling(region, cur)) == []
