"""Tilings (perfect matchings): validation, brickwork generators, the periodic
prescribed-mean-current construction, half-space gluing, and serialization.

A tile is stored as (even_cell, dir) with dir one of the six unit vectors and
the partner cell at even_cell + dir (reduced on tori). Storing the direction
rather than the cell pair keeps length-2 torus directions unambiguous.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .lattice import (
    AXES, E1, UNIT_DIRS, Cell, Region, RegionError, Vec,
    add, build_torus, neg, parity, scale, sub,
)

Tile = tuple[Cell, Vec]


class TilingError(ValueError):
    pass


@dataclass(frozen=True)
class Tiling:
    region: Region
    tiles: frozenset[Tile]

    def partner_map(self) -> dict[Cell, tuple[Cell, Vec]]:
        """cell -> (partner, direction of the step cell->partner)."""
        out: dict[Cell, tuple[Cell, Vec]] = {}
        for even, d in self.tiles:
            odd = self.region.reduce(add(even, d))
            out[even] = (odd, d)
            out[odd] = (even, neg(d))
        return out

    def tile_pairs(self) -> list[tuple[Cell, Cell]]:
        return sorted(
            (even, self.region.reduce(add(even, d))) for even, d in self.tiles
        )

    def __len__(self) -> int:
        return len(self.tiles)

    def to_json(self, inline_region: bool = True) -> dict:
        out: dict = {"version": 1, "tiles": [[list(a), list(b)] for a, b in self.tile_pairs()]}
        if inline_region:
            out["region"] = self.region.to_json()
        return out

    @staticmethod
    def from_json(data: dict, region: Region | None = None) -> "Tiling":
        if data.get("version") != 1:
            raise TilingError(f"unsupported tiling version {data.get('version')}")
        if region is None:
            region = Region.from_json(data["region"])
        tiles = []
        for a_raw, b_raw in data["tiles"]:
            a, b = tuple(a_raw), tuple(b_raw)
            if parity(a) != 0:
                a, b = b, a
            tiles.append((a, direction_between(region, a, b)))
        return Tiling(region, frozenset(tiles))


def direction_between(region: Region, a: Cell, b: Cell) -> Vec:
    """Unit direction d with reduce(a+d) == b; smallest dir index on doubled torus edges."""
    for d in UNIT_DIRS:
        if region.reduce(add(a, d)) == region.reduce(b):
            return d
    raise TilingError(f"cells {a} and {b} are not adjacent")


def validate(t: Tiling) -> list[str]:
    """Diagnostic check; empty list means a perfect matching of the region."""
    problems = []
    covered: dict[Cell, int] = {}
    for even, d in t.tiles:
        even_r = t.region.reduce(even)
        odd = t.region.reduce(add(even, d))
        if parity(even_r) != 0:
            problems.append(f"tile keyed on odd cell {even_r}")
        if even_r not in t.region or odd not in t.region:
            problems.append(f"tile {(even_r, d)} leaves the region")
            continue
        covered[even_r] = covered.get(even_r, 0) + 1
        covered[odd] = covered.get(odd, 0) + 1
    for c, k in covered.items():
        if k > 1:
            problems.append(f"cell {c} covered {k} times")
    for c in t.region.cells:
        if c not in covered:
            problems.append(f"cell {c} uncovered")
    return problems


def brickwork(region: Region, direction: Vec) -> Tiling:
    """Brickwork tiling: all tiles (x, x+direction) over even-parity x.

    This is the extreme tiling with mean current `direction` (offset rows of
    bricks); it is a perfect matching of tori but of very few open regions.
    Errors if the region is incompatible. For the aligned-column pattern
    that tiles boxes (zero mean current) see `coordinate_brickwork`.
    """
    if direction not in UNIT_DIRS:
        raise TilingError(f"not a unit direction: {direction}")
    tiles = set()
    for c in region.even_cells():
        if region.reduce(add(c, direction)) not in region.cells:
            raise TilingError(f"region incompatible with brickwork: {c} has no {direction} neighbor")
        tiles.add((c, direction))
    t = Tiling(region, frozenset(tiles))
    problems = validate(t)
    if problems:
        raise TilingError(f"region incompatible with brickwork: {problems[0]}")
    return t


def coordinate_brickwork(region: Region, axis: int) -> Tiling:
    """Aligned-column pattern: tiles ((..,2k,..), (..,2k+1,..)) along `axis`.

    Tiles every box with an even extent along the axis; zero net current
    (tile orientations alternate with the parity of the other coordinates).
    """
    d = AXES[axis]
    tiles = set()
    for c in region.sorted_cells():
        if c[axis] % 2 == 0:
            other = region.reduce(add(c, d))
            if other not in region.cells:
                raise TilingError(f"region incompatible with coordinate brickwork at {c}")
            even, dir_ = (c, d) if parity(c) == 0 else (other, neg(d))
            tiles.add((even, dir_))
    t = Tiling(region, frozenset(tiles))
    problems = validate(t)
    if problems:
        raise TilingError(f"region incompatible with coordinate brickwork: {problems[0]}")
    return t


# -- periodic tilings ------------------------------------------------------


@dataclass(frozen=True)
class PeriodicTiling:
    """A tiling of all of Z^3 invariant under translation by dims[i]*eta_i.

    `assignment` maps each even cell of the fundamental domain
    [0,dims[0]) x [0,dims[1]) x [0,dims[2]) to its tile direction.
    """

    dims: tuple[int, int, int]
    assignment: dict[Cell, Vec]  # even reduced cell -> dir

    def __post_init__(self) -> None:
        if any(d % 2 for d in self.dims):
            raise TilingError("fundamental domain dims must be even")

    def reduce(self, c: Cell) -> Cell:
        return (c[0] % self.dims[0], c[1] % self.dims[1], c[2] % self.dims[2])

    def tile_dir(self, c: Cell) -> Vec:
        """Direction from cell c to its partner (any c in Z^3)."""
        if parity(c) == 0:
            return self.assignment[self.reduce(c)]
        # odd cell: find the even neighbor pointing back at it
        for d in UNIT_DIRS:
            e = add(c, d)
            if self.assignment[self.reduce(e)] == neg(d):
                return d
        raise TilingError(f"no tile covers odd cell {c}")

    def partner(self, c: Cell) -> Cell:
        return add(c, self.tile_dir(c))

    def to_torus_tiling(self) -> Tiling:
        region = build_torus(*self.dims)
        return Tiling(region, frozenset(self.assignment.items()))

    def translate(self, t: Vec) -> "PeriodicTiling":
        if parity(t) != 0:
            raise TilingError("only even translations preserve the bipartition")
        new = {}
        for x in self.assignment:
            src = self.reduce(sub(x, t))
            new[x] = self.assignment[src]
        return PeriodicTiling(self.dims, new)

    def restrict_free_boundary(self, cells: frozenset[Cell] | set[Cell]) -> Tiling:
        """Tiles intersecting `cells`; the free-boundary restriction (open region)."""
        tiles = set()
        for c in cells:
            d = self.tile_dir(c)
            even = c if parity(c) == 0 else add(c, d)
            dir_ = d if parity(c) == 0 else neg(d)
            tiles.add((even, dir_))
        covered = set()
        for even, d in tiles:
            covered.add(even)
            covered.add(add(even, d))
        return Tiling(Region(frozenset(covered)), frozenset(tiles))

    def mean_current(self) -> tuple[Fraction, Fraction, Fraction]:
        """Average tile direction per even cell over the fundamental domain (exact)."""
        total = [Fraction(0)] * 3
        count = 0
        for c, d in self.assignment.items():
            for i in range(3):
                total[i] += d[i]
            count += 1
        return tuple(v / count for v in total)  # type: ignore[return-value]


def periodic_brickwork(direction: Vec, dims: tuple[int, int, int] = (2, 2, 2)) -> PeriodicTiling:
    assignment = {}
    for x in range(dims[0]):
        for y in range(dims[1]):
            for z in range(dims[2]):
                if parity((x, y, z)) == 0:
                    assignment[(x, y, z)] = direction
    return PeriodicTiling(dims, assignment)


# -- stacked brickwork (rigid torus examples) -------------------------------


def stacked_brickwork(layers: list[tuple[Vec, int]], n1: int, n2: int) -> tuple[Region, Tiling]:
    """Torus of horizontal brickwork layers stacked along z.

    `layers` is a list of (direction, thickness) with horizontal directions
    (+-eta_1, +-eta_2); total thickness is the torus height.
    """
    height = sum(t for _, t in layers)
    if height % 2:
        raise TilingError("total height must be even for a torus")
    for d, t in layers:
        if d[2] != 0:
            raise TilingError(f"layer direction must be horizontal: {d}")
        if t <= 0:
            raise TilingError("layer thickness must be positive")
    region = build_torus(n1, n2, height)
    dir_of_z = []
    for d, t in layers:
        dir_of_z.extend([d] * t)
    tiles = set()
    for c in region.even_cells():
        d = dir_of_z[c[2]]
        tiles.add((c, d))
    t = Tiling(region, frozenset(tiles))
    problems = validate(t)
    if problems:
        raise TilingError(f"incompatible stacked-brickwork dims: {problems[0]}")
    return region, t


# -- prescribed-mean-current periodic tiling --------------------------------


def _sgn(x: Fraction) -> int:
    # sign convention for zero components: +1 (any fixed choice works)
    return -1 if x < 0 else 1


def _as_fraction_vec(v) -> tuple[Fraction, Fraction, Fraction]:
    return tuple(Fraction(x) for x in v)  # type: ignore[return-value]


def boundary_direction_word(w: tuple[Fraction, Fraction, Fraction],
                            s2: int, s3: int) -> list[Vec]:
    """Minimal-length tile word for a boundary current w with w1 >= 0.

    r = lcm of the component denominators; the word holds r*w1 copies of
    eta_1, r*|w2| of s2*eta_2, r*|w3| of s3*eta_3, in that fixed order.
    """
    dens = [abs(x).denominator for x in w]
    r = dens[0]
    for d in dens[1:]:
        r = r * d // gcd(r, d)
    n1 = int(r * w[0])
    n2 = int(r * abs(w[1]))
    n3 = int(r * abs(w[2]))
    assert n1 + n2 + n3 == r
    word: list[Vec] = [E1] * n1
    word += [(0, s2, 0)] * n2
    word += [(0, 0, s3)] * n3
    return word


class MeanCurrentTiling(PeriodicTiling):
    """PeriodicTiling built for a prescribed rational mean current; carries
    the construction data (boundary current w, tile word, kept-path density)."""

    def __init__(self, dims, assignment, v, w, word, density, phase):
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "word", word)
        object.__setattr__(self, "density", density)
        object.__setattr__(self, "phase", phase)
        PeriodicTiling.__post_init__(self)


def tau_v(v, phase: int = 0) -> MeanCurrentTiling:
    """Periodic tiling with fundamental-domain mean current exactly v.

    Slabs between consecutive diagonal planes are filled with a single tile
    type following a periodic word that realizes the boundary current w(v)
    (the point where the ray from -eta_1 through v exits the octahedron on
    the w1 >= 0 side); superposed with the -eta_1 brickwork, all non-double
    edges lie on paths parallel to w(v)+eta_1, which are then kept on a
    periodic site pattern of density (1 + v1 + |v2| + |v3|)/2 and replaced
    by -eta_1 tiles elsewhere. All arithmetic is exact.

    `phase` offsets the thinning pattern; tilings with different phases have
    the same mean current but different microstructure.
    """
    v = _as_fraction_vec(v)
    if abs(v[0]) + abs(v[1]) + abs(v[2]) > 1:
        raise TilingError(f"{v} is outside the mean-current octahedron")
    if v == (Fraction(-1), Fraction(0), Fraction(0)):
        raise TilingError("construction is relative to the -eta_1 brickwork; v = -eta_1 excluded")

    s2, s3 = _sgn(v[1]), _sgn(v[2])
    xi = (1, s2, s3)  # normal of the slab planes; level(x) = xi . x

    lam = Fraction(2, 1) / (1 + v[0] + abs(v[1]) + abs(v[2]))
    w = (lam * (1 + v[0]) - 1, lam * v[1], lam * v[2])
    assert w[0] >= 0 and abs(w[0]) + abs(w[1]) + abs(w[2]) == 1
    density = 1 / lam  # kept-path density q; v = q*w + (1-q)*(-eta_1)
    p, m = density.numerator, density.denominator

    word = boundary_direction_word(w, s2, s3)
    r = len(word)
    word_sum = (sum(a[0] for a in word), sum(a[1] for a in word), sum(a[2] for a in word))
    period_disp = add(word_sum, (r, 0, 0))  # displacement of a path over one word cycle

    def level(c: Cell) -> int:
        return xi[0] * c[0] + xi[1] * c[1] + xi[2] * c[2]

    def path_origin(even: Cell) -> Cell:
        # the even cell of this cell's path on the level-0 plane
        k = level(even) // 2
        q_, s_ = divmod(k, r)
        off = scale(period_disp, q_)
        for j in range(s_):
            off = add(off, add(word[j], E1))
        return sub(even, off)

    def kept(even: Cell) -> bool:
        origin = path_origin(even)
        alpha = origin[0]  # origin = alpha*u1 + beta*u2 with u1 = eta1 - s2*eta2
        return (alpha + phase) % m < p

    def even_dir(even: Cell) -> Vec:
        if kept(even):
            return word[(level(even) // 2) % r]
        return (-1, 0, 0)

    # Minimal per-axis periods: translation by 2*r*c*eta_i shifts the slab
    # word by a full multiple and shifts path origins in C_0 by a vector
    # whose first coordinate is c*(r - n1) (axis 1) or -c*sigma*(n1 + r)
    # (axes 2, 3); the thinning pattern needs that to vanish mod m.
    n1 = sum(a[0] for a in word)
    alphas = (r - n1, n1 + r, n1 + r)
    dims = tuple(2 * r * (m // gcd(alpha % m if alpha % m else m, m)) for alpha in alphas)
    assignment = {}
    for x in range(dims[0]):
        for y in range(dims[1]):
            for z in range(dims[2]):
                c = (x, y, z)
                if parity(c) == 0:
                    assignment[c] = even_dir(c)
    t = MeanCurrentTiling(dims, assignment, v, w, word, density, phase)
    if t.mean_current() != v:
        raise TilingError(f"internal error: mean current {t.mean_current()} != {v}")
    return t


# -- gluing along planes -----------------------------------------------------


class FluxMismatchError(TilingError):
    pass


class GlueError(TilingError):
    pass


@dataclass(frozen=True)
class SlabTiling:
    """Tiling of a period-torus slab: wrap lattice spanned by `basis` (two
    integer vectors parallel to the glue plane), levels 0..width-1 along
    `normal`. Tiles are (even_cell, dir); crossing tiles may have one cell
    at level -1 or `width` (they belong to the boundary tilings)."""

    normal: Vec
    basis: tuple[Vec, Vec]
    width: int
    tiles: frozenset[Tile]


def _plane_basis(normal: Vec) -> tuple[Vec, Vec]:
    if normal in AXES:
        i = AXES.index(normal)
        j, k = [a for a in range(3) if a != i]
        return AXES[j], AXES[k]
    if all(abs(x) == 1 for x in normal):
        s1, s2, s3 = normal
        # both basis vectors satisfy normal . u = 0 and have even parity
        return (s1, -s2, 0), (0, s2, -s3)
    raise GlueError(f"plane normal must be a coordinate axis or (+-1,+-1,+-1): {normal}")


def glue_halfspaces(left: PeriodicTiling, right: PeriodicTiling, normal: Vec,
                    gap: int | None = None, gap_max: int | None = None) -> SlabTiling:
    """Tile the slab between the left tiling (levels < 0) and the right tiling
    (levels >= gap), periodically in the plane directions.

    Requires the two tilings to push the same flux through the plane per
    fundamental cross-section; searches even gaps up to gap_max when `gap`
    is None. The matcher (Hopcroft-Karp) supplies the interior.
    """
    from .tileability import max_matching  # local import to avoid a cycle

    u1, u2 = _plane_basis(normal)
    period = 1
    for t in (left, right):
        for d in t.dims:
            period = period * d // gcd(period, d)
    b1, b2 = scale(u1, period), scale(u2, period)

    def level(c: Cell) -> int:
        return normal[0] * c[0] + normal[1] * c[1] + normal[2] * c[2]

    def flux_through_plane(t: PeriodicTiling) -> int:
        # signed even->odd crossings of the dual plane at level 1/2, one
        # fundamental cross-section domain (Eq-level form of v.n_P = u.n_P)
        total = 0
        for rep in _cross_section_reps(normal, u1, u2, period, lev=0):
            d = t.tile_dir(rep)
            if level(d) == 1:
                total += 1 if parity(rep) == 0 else -1
        return total

    if flux_through_plane(left) != flux_through_plane(right):
        raise FluxMismatchError(
            f"flux through plane differs: {flux_through_plane(left)} vs {flux_through_plane(right)}"
        )

    gaps = [gap] if gap is not None else list(range(2, (gap_max or 8 * period) + 1, 2))
    last_err: str = ""
    for g in gaps:
        if g % 2:
            raise GlueError("gap must be even")
        result = _glue_at_gap(left, right, normal, u1, u2, period, g, max_matching)
        if result is not None:
            return result
        last_err = f"no matching at gap {g}"
    raise GlueError(last_err or "no feasible gap")


def _cross_section_reps(normal, u1, u2, period, lev):
    """Representative cells of the quotient cross-section at a given level."""
    anchor = _level_anchor(normal, lev)
    reps = []
    for a in range(period):
        for b in range(period):
            c = add(add(anchor, scale(u1, a)), scale(u2, b))
            reps.append(c)
    return reps


def _level_anchor(normal: Vec, lev: int) -> Cell:
    # a cell with normal . c == lev
    if normal in AXES:
        i = AXES.index(normal)
        c = [0, 0, 0]
        c[i] = lev
        return tuple(c)  # type: ignore[return-value]
    # diagonal normal: step along the first axis with its sign
    s1 = normal[0]
    return (s1 * lev, 0, 0)


def _quotient_reduce(c: Cell, normal: Vec, u1: Vec, u2: Vec, period: int) -> Cell:
    """Reduce c modulo the wrap lattice {period*u1, period*u2}."""
    # coordinates of the in-plane part: for axis normals this is plain mod;
    # for diagonal normals use the (alpha, beta) coordinates of the plane lattice.
    if normal in AXES:
        i = AXES.index(normal)
        out = list(c)
        for ax in range(3):
            if ax != i:
                out[ax] %= period
        return tuple(out)  # type: ignore[return-value]
    s1, s2, s3 = normal
    lev = s1 * c[0] + s2 * c[1] + s3 * c[2]
    anchor = _level_anchor(normal, lev)
    d = sub(c, anchor)
    # d = alpha*u1 + beta*u2 with u1=(s1,-s2,0), u2=(0,s2,-s3)
    alpha = d[0] * s1
    beta = -d[2] * s3
    assert add(add(anchor, scale(u1, alpha)), scale(u2, beta)) == c
    alpha %= period
    beta %= period
    return add(add(anchor, scale(u1, alpha)), scale(u2, beta))


def _glue_at_gap(left, right, normal, u1, u2, period, gap, max_matching):
    def level(c: Cell) -> int:
        return normal[0] * c[0] + normal[1] * c[1] + normal[2] * c[2]

    def reduce_cell(c: Cell) -> Cell:
        return _quotient_reduce(c, normal, u1, u2, period)

    slab_cells = set()
    for lev in range(gap):
        slab_cells.update(reduce_cell(c) for c in _cross_section_reps(normal, u1, u2, period, lev))

    def as_tile(c: Cell, d: Vec) -> Tile:
        # canonical (even, dir) form with the even cell reduced
        if parity(c) == 0:
            return reduce_cell(c), d
        return reduce_cell(add(c, d)), neg(d)

    committed: dict[Cell, Tile] = {}
    # left tiles crossing level -1 -> 0 commit their level-0 cell
    for rep in _cross_section_reps(normal, u1, u2, period, lev=-1):
        d = left.tile_dir(rep)
        if level(d) == 1:
            committed[reduce_cell(add(rep, d))] = as_tile(rep, d)
    # right tiles crossing level gap -> gap-1 commit their level-(gap-1) cell
    for rep in _cross_section_reps(normal, u1, u2, period, lev=gap):
        d = right.tile_dir(rep)
        if level(d) == -1:
            committed[reduce_cell(add(rep, d))] = as_tile(rep, d)

    free = sorted(slab_cells - set(committed))
    freeset = set(free)
    basis = (scale(u1, period), scale(u2, period))

    # first try: fill the free cells with the left tiling's own pattern
    # (deterministic; makes self-gluing return the input pattern bit-exactly)
    cand: set[Tile] = set()
    ok = True
    for c in free:
        d = left.tile_dir(c)
        other = add(c, d)
        if not (0 <= level(other) < gap) or reduce_cell(other) not in freeset:
            ok = False
            break
        cand.add(as_tile(c, d))
    if ok:
        return SlabTiling(normal, basis, gap, frozenset(set(committed.values()) | cand))

    adj = {}
    for c in free:
        if parity(c) != 0:
            continue
        outs = []
        for d in UNIT_DIRS:
            nxt = add(c, d)
            if 0 <= level(nxt) < gap:
                nxt_r = reduce_cell(nxt)
                if nxt_r in freeset:
                    outs.append((d, nxt_r))
        adj[c] = outs
    evens = sorted(adj)
    odds = {c for c in free if parity(c) == 1}
    if len(evens) != len(odds):
        return None
    pair = max_matching({e: tuple(n for _, n in adj[e]) for e in evens})
    if len(pair) != len(evens):
        return None
    tiles = set(committed.values())
    for e, o in pair.items():
        d = next(d for d, n in adj[e] if n == o)
        tiles.add((e, d))
    return SlabTiling(normal, basis, gap, frozenset(tiles))


# -- file helpers -----------------------------------------------------------


def tiling_to_file(t: Tiling, path: str) -> None:
    with open(path, "w") as f:
        json.dump(t.to_json(), f)


def tiling_from_file(path: str) -> Tiling:
    with open(path) as f:
        return Tiling.from_json(json.load(f))
