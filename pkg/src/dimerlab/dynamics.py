"""Local moves (flips, trits, loop shifts), the twist invariant, the loop-shift
Markov chain with uniform stationary law, and tiling-graph exploration.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lattice import AXES, Cell, Region, UNIT_DIRS, Vec, add, neg, parity
from .tiling import Tile, Tiling, TilingError, validate


class DynamicsError(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    kind: str  # 'flip' | 'trit' | 'loop_shift'
    removed: frozenset[Tile]
    added: frozenset[Tile]


def apply_move(t: Tiling, move: Move) -> Tiling:
    if not move.removed <= t.tiles:
        raise DynamicsError("move does not apply: removed tiles absent")
    tiles = (t.tiles - move.removed) | move.added
    out = Tiling(t.region, tiles)
    problems = validate(out)
    if problems:
        raise DynamicsError(f"move broke the tiling: {problems[0]}")
    return out


def find_flips(t: Tiling) -> list[Move]:
    """All parallel adjacent tile pairs, i.e. 2x2x1 blocks that can rotate."""
    region = t.region
    moves = []
    tiles = t.tiles
    for even, d in sorted(tiles):
        for dp in UNIT_DIRS:
            if dp[0] * d[0] + dp[1] * d[1] + dp[2] * d[2] != 0:
                continue
            # partner tile spanning the square {even, even+d, even+dp, even+d+dp}
            other = region.reduce(add(add(even, d), dp))
            if (other, neg(d)) not in tiles:
                continue
            if (even, d) > (other, neg(d)):
                continue  # count each pair once
            removed = frozenset({(even, d), (other, neg(d))})
            added = frozenset({(even, dp), (other, neg(dp))})
            moves.append(Move("flip", removed, added))
    return moves


def find_trits(t: Tiling) -> list[Move]:
    """All trits: three mutually orthogonal tiles on a 6-ring of a 2x2x2 cube."""
    region = t.region
    moves = []
    seen = set()
    candidates = set()
    for even, d in t.tiles:
        for dx in (0, -1):
            for dy in (0, -1):
                for dz in (0, -1):
                    candidates.add(region.reduce(add(even, (dx, dy, dz))))
    for base in sorted(candidates):
        for ring in _cube_rings(base):
            cells = [region.reduce(c) for c in ring]
            if any(c not in region.cells for c in cells):
                continue
            m1, m2 = _ring_matchings(region, cells)
            if m1 is None:
                continue
            for cur, new in ((m1, m2), (m2, m1)):
                if cur <= t.tiles:
                    key = (base, frozenset(cur))
                    if key not in seen:
                        seen.add(key)
                        moves.append(Move("trit", frozenset(cur), frozenset(new)))
    return moves


def _cube_rings(base: Cell) -> list[list[Cell]]:
    """The four 6-cycles of the 2x2x2 cube at `base` (one per antipodal pair)."""
    rings = []
    for a in ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)):
        rest = [v for v in ((x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1))
                if v != a and v != (1 - a[0], 1 - a[1], 1 - a[2])]
        # order the 6 remaining corners into a cycle
        cycle = [rest.pop(0)]
        while rest:
            last = cycle[-1]
            nxt = next(v for v in rest if sum(abs(v[i] - last[i]) for i in range(3)) == 1)
            rest.remove(nxt)
            cycle.append(nxt)
        rings.append([add(base, v) for v in cycle])
    return rings


def _ring_matchings(region: Region, cells: list[Cell]):
    """The two alternate-edge matchings of a 6-cycle, as (even, dir) tiles."""
    def tile(a: Cell, b: Cell) -> Tile | None:
        for d in UNIT_DIRS:
            if region.reduce(add(a, d)) == b:
                return (a, d) if parity(a) == 0 else (b, neg(d))
        return None

    m1, m2 = set(), set()
    for i in range(6):
        tl = tile(cells[i], cells[(i + 1) % 6])
        if tl is None:
            return None, None
        (m1 if i % 2 == 0 else m2).add(tl)
    return frozenset(m1), frozenset(m2)


# -- twist -------------------------------------------------------------------

# Crossing-sign calibration: fixed so that the canonical positively-oriented
# trit (the ring matching M1 -> M2 of _cube_rings' first ring) has
# delta-twist = +1. See test_dynamics for the pinned configuration.
TWIST_SIGN = 1


def twist(t: Tiling) -> Fraction:
    """Quarter of the signed crossing sum over stacked horizontal dimer pairs.

    Defined for open box-like regions D x [1,N]; integral when N is even and
    D is simply connected. Returns the exact rational; callers may assert
    integrality.
    """
    if t.region.is_torus:
        raise DynamicsError("twist is defined for open regions D x [1,N]")
    horiz = [(even, d) for even, d in t.tiles if d[2] == 0]
    total = Fraction(0)
    by_xy: dict[tuple[int, int], list[tuple[int, Vec, Cell]]] = {}
    for even, d in horiz:
        odd = add(even, d)
        for endpoint in (even, odd):
            by_xy.setdefault((endpoint[0], endpoint[1]), []).append((endpoint[2], d, even))
    for column in by_xy.values():
        for i in range(len(column)):
            for j in range(i + 1, len(column)):
                z1, d1, e1 = column[i]
                z2, d2, e2 = column[j]
                if z1 == z2 or e1 == e2:
                    continue
                if d1[0] * d2[0] + d1[1] * d2[1] != 0:
                    continue  # crossings need orthogonal horizontal directions
                upper, lower = (d1, d2) if z1 > z2 else (d2, d1)
                det = upper[0] * lower[1] - upper[1] * lower[0]
                total += TWIST_SIGN * det
    return total / 4


# -- loop shift Markov chain ---------------------------------------------------


def _rng(seed) -> np.random.Generator:
    """Counter-based generator; independent streams come from distinct seeds."""
    return np.random.Generator(np.random.Philox(seed))


def loop_shift_step(t: Tiling, rng: np.random.Generator) -> Tiling:
    """One step of the loop-shift chain.

    Sample an odd cell uniformly; follow the tile; from even cells walk in a
    uniformly random direction other than the one just walked; stop at the
    first revisited cell, drop the tail, and shift the tiles around the loop.
    If an even cell has no direction other than backtracking, the walk
    retraces its tile (a length-2 loop) and the step is the identity.
    """
    region = t.region
    odds = region.odd_cells()
    start = odds[int(rng.integers(len(odds)))]
    partner = t.partner_map()

    path: list[Cell] = [start]
    pos: dict[Cell, int] = {start: 0}
    steps: list[tuple[Cell, Vec]] = []  # (from_cell, dir); even index = tile edge
    cur = start
    came_from: Vec | None = None
    while True:
        if parity(cur) == 1:
            nxt, d = partner[cur]
        else:
            options = [(d, n) for d, n in region.neighbor_steps(cur) if d != came_from]
            if not options:
                return t  # degenerate: forced backtrack, identity step
            d, nxt = options[int(rng.integers(len(options)))]
        steps.append((cur, d))
        if nxt in pos:
            loop_from = pos[nxt]
            break
        path.append(nxt)
        pos[nxt] = len(path) - 1
        cur = nxt
        came_from = neg(d)

    assert parity(path[loop_from]) == 1, "walks close at odd cells"
    loop_steps = steps[loop_from:]
    if len(loop_steps) % 2:
        raise DynamicsError("internal error: odd loop length")
    removed, added = set(), set()
    for i, (frm, d) in enumerate(loop_steps):
        to = region.reduce(add(frm, d))
        even, dir_ = (frm, d) if parity(frm) == 0 else (to, neg(d))
        if i % 2 == 0:
            removed.add((even, dir_))
        else:
            added.add((even, dir_))
    tiles = (t.tiles - frozenset(removed)) | frozenset(added)
    return Tiling(region, tiles)


def sample_uniform(region: Region, steps: int, seed, initial: Tiling | None = None) -> Tiling:
    """State of the loop-shift chain after `steps` steps from the matcher tiling."""
    from .tileability import HallCertificate, find_matching

    if initial is None:
        result = find_matching(region)
        if isinstance(result, HallCertificate):
            raise DynamicsError("region is not tileable")
        initial = result
    rng = _rng(seed)
    t = initial
    for _ in range(steps):
        t = loop_shift_step(t, rng)
    return t


def chain_trajectory(region: Region, steps: int, seed, sample_every: int = 1):
    """Yield the chain state every `sample_every` steps (after each stride)."""
    from .tileability import HallCertificate, find_matching

    result = find_matching(region)
    if isinstance(result, HallCertificate):
        raise DynamicsError("region is not tileable")
    rng = _rng(seed)
    t = result
    for i in range(steps):
        t = loop_shift_step(t, rng)
        if (i + 1) % sample_every == 0:
            yield t


def exact_transition_matrix(region: Region) -> dict:
    """Exact loop-shift transition probabilities P(tau, sigma) as Fractions.

    Enumerates every walk of the chain (finitely many: walks stop at the
    first revisit) weighting random choices 1/(deg - 1). Small regions only.
    """
    tilings = enumerate_tilings(region)
    P: dict[tuple[frozenset, frozenset], Fraction] = {}
    odds = region.odd_cells()
    for t in tilings:
        partner = t.partner_map()

        def walk(path, pos, steps, cur, came_from, prob):
            if parity(cur) == 1:
                branches = [(partner[cur][1], partner[cur][0], Fraction(1))]
            else:
                options = [(d, n) for d, n in region.neighbor_steps(cur) if d != came_from]
                if not options:
                    yield None, prob  # identity step
                    return
                p = Fraction(1, len(options))
                branches = [(d, n, p) for d, n in options]
            for d, nxt, p in branches:
                new_steps = steps + [(cur, d)]
                if nxt in pos:
                    yield new_steps[pos[nxt]:], prob * p
                else:
                    yield from walk(path + [nxt], {**pos, nxt: len(path)},
                                    new_steps, nxt, neg(d), prob * p)

        start_p = Fraction(1, len(odds))
        for start in odds:
            for loop_steps, prob in walk([start], {start: 0}, [], start, None, start_p):
                if loop_steps is None:
                    sigma = t
                else:
                    removed, added = set(), set()
                    for i, (frm, d) in enumerate(loop_steps):
                        to = region.reduce(add(frm, d))
                        even, dir_ = (frm, d) if parity(frm) == 0 else (to, neg(d))
                        (removed if i % 2 == 0 else added).add((even, dir_))
                    sigma = Tiling(region, (t.tiles - frozenset(removed)) | frozenset(added))
                key = (t.tiles, sigma.tiles)
                P[key] = P.get(key, Fraction(0)) + prob
    return P


# -- enumeration and connectivity ---------------------------------------------


def enumerate_tilings(region: Region, budget: int = 10_000_000) -> list[Tiling]:
    """All perfect matchings by branching on the first uncovered cell."""
    cells = region.sorted_cells()
    index = {c: i for i, c in enumerate(cells)}
    steps = [[(d, index[n]) for d, n in region.neighbor_steps(c)] for c in cells]
    n = len(cells)
    covered = [False] * n
    out: list[Tiling] = []
    current: list[tuple[int, Vec]] = []
    nodes = 0

    def rec(start: int):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise DynamicsError("enumeration budget exceeded")
        while start < n and covered[start]:
            start += 1
        if start == n:
            tiles = []
            for i, d in current:
                c = cells[i]
                to = region.reduce(add(c, d))
                tiles.append((c, d) if parity(c) == 0 else (to, neg(d)))
            out.append(Tiling(region, frozenset(tiles)))
            return
        covered[start] = True
        for d, j in steps[start]:
            if not covered[j]:
                covered[j] = True
                current.append((start, d))
                rec(start + 1)
                current.pop()
                covered[j] = False
        covered[start] = False

    if n % 2 == 0:
        rec(0)
    return out


def connectivity(region: Region, moves: tuple[str, ...] = ("flip",),
                 budget: int = 10_000_000) -> list[set[frozenset]]:
    """Connected components of the tiling graph under the given move kinds."""
    tilings = enumerate_tilings(region, budget)
    by_tiles = {t.tiles: t for t in tilings}
    seen: set[frozenset] = set()
    components = []
    for key in sorted(by_tiles, key=sorted):
        if key in seen:
            continue
        comp = {key}
        queue = [by_tiles[key]]
        seen.add(key)
        while queue:
            t = queue.pop()
            nbrs = []
            if "flip" in moves:
                nbrs.extend(find_flips(t))
            if "trit" in moves:
                nbrs.extend(find_trits(t))
            for mv in nbrs:
                nt = (t.tiles - mv.removed) | mv.added
                if nt not in seen:
                    seen.add(nt)
                    comp.add(nt)
                    queue.append(by_tiles[nt])
        components.append(comp)
    return components


def shortest_alternating_cycle(t: Tiling, max_len: int = 16,
                               contractible_only: bool = True) -> int | None:
    """Length of the shortest alternating cycle (tile / non-tile edges).

    With contractible_only, only cycles with zero lift displacement count
    (on tori, nonzero-winding alternating cycles can be shorter). Searches
    up to max_len edges; returns None if none found. Tile steps are forced,
    so the branching is at non-tile steps only.
    """
    region = t.region
    partner = t.partner_map()
    best: int | None = None

    def walk(start, cur, length, disp, visited, need_tile):
        nonlocal best
        if length + 1 > (best if best is not None else max_len):
            return
        if need_tile:
            nxt, d = partner[cur]
            if nxt in visited or nxt == start:
                return
            nd = (disp[0] + d[0], disp[1] + d[1], disp[2] + d[2])
            visited.add(nxt)
            walk(start, nxt, length + 1, nd, visited, False)
            visited.remove(nxt)
        else:
            tile_dir = partner[cur][1]
            for d, nxt in region.neighbor_steps(cur):
                if d == tile_dir:
                    continue  # alternation: skip the tile edge out of cur
                nd = (disp[0] + d[0], disp[1] + d[1], disp[2] + d[2])
                length2 = length + 1
                if nxt == start:
                    if not contractible_only or nd == (0, 0, 0):
                        if best is None or length2 < best:
                            best = length2
                    continue
                if nxt in visited:
                    continue
                visited.add(nxt)
                walk(start, nxt, length2, nd, visited, True)
                visited.remove(nxt)

    for even, d in sorted(t.tiles):
        odd = region.reduce(add(even, d))
        walk(even, odd, 1, d, {even, odd}, False)
    return best


def hopfion_tiling(chirality: int = 0) -> Tiling:
    """The flip-rigid 9-tile configuration on box(3,3,2): two pinwheel layers
    around a central vertical tile. chirality 1 mirrors the pinwheels."""
    from .lattice import build_box

    region = build_box(3, 3, 2)
    low = [((0, 0, 0), (1, 0, 0)), ((2, 0, 0), (2, 1, 0)),
           ((1, 2, 0), (2, 2, 0)), ((0, 1, 0), (0, 2, 0))]
    high = [((0, 0, 1), (0, 1, 1)), ((1, 0, 1), (2, 0, 1)),
            ((2, 1, 1), (2, 2, 1)), ((0, 2, 1), (1, 2, 1))]
    pairs = low + high + [((1, 1, 0), (1, 1, 1))]
    if chirality:
        pairs = [(((2 - a[0], a[1], a[2])), ((2 - b[0], b[1], b[2]))) for a, b in pairs]
    tiles = set()
    for a, b in pairs:
        if parity(a) != 0:
            a, b = b, a
        d = (b[0] - a[0], b[1] - a[1], b[2] - a[2])
        tiles.add((a, d))
    t = Tiling(region, frozenset(tiles))
    problems = validate(t)
    if problems:
        raise DynamicsError(f"bad hopfion construction: {problems[0]}")
    return t
