"""Lattice geometry: cells, parity, regions (boxes, tori, Aztec families), dual surfaces.

Cells are closed unit cubes centered at integer points of Z^3; dual squares
live on the translated lattice (1/2,1/2,1/2)+Z^3. A cell is even when its
coordinate sum is even. Regions are either open (an arbitrary finite subset
of Z^3) or a full torus with even side lengths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

Cell = tuple[int, int, int]
Vec = tuple[int, int, int]

E1: Vec = (1, 0, 0)
E2: Vec = (0, 1, 0)
E3: Vec = (0, 0, 1)
AXES: tuple[Vec, ...] = (E1, E2, E3)
UNIT_DIRS: tuple[Vec, ...] = (
    (1, 0, 0), (-1, 0, 0),
    (0, 1, 0), (0, -1, 0),
    (0, 0, 1), (0, 0, -1),
)


def add(c: Cell, d: Vec) -> Cell:
    return (c[0] + d[0], c[1] + d[1], c[2] + d[2])


def sub(c: Cell, d: Vec) -> Cell:
    return (c[0] - d[0], c[1] - d[1], c[2] - d[2])


def neg(d: Vec) -> Vec:
    return (-d[0], -d[1], -d[2])


def scale(d: Vec, k: int) -> Vec:
    return (k * d[0], k * d[1], k * d[2])


def parity(c: Cell) -> int:
    """0 for even cells (coordinate sum even), 1 for odd."""
    return (c[0] + c[1] + c[2]) & 1


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """A finite set of cells, either open in Z^3 or a full torus.

    In torus mode `dims` holds the side lengths (all even, so the even/odd
    bipartition descends to the quotient) and `cells` contains every reduced
    representative. Adjacency is L1-distance 1, with wraparound on tori.
    Tori with a side of length 2 are multigraphs (+d and -d reach the same
    neighbor through distinct edges); code that cares about individual edges
    should use `neighbor_steps`, which enumerates directions.
    """

    cells: frozenset[Cell]
    dims: tuple[int, int, int] | None = None

    def __post_init__(self) -> None:
        if self.dims is not None:
            n1, n2, n3 = self.dims
            if min(n1, n2, n3) <= 0 or (n1 * n2 * n3) % 2 != 0:
                raise RegionError(f"bad torus dims {self.dims}")
            if n1 % 2 or n2 % 2 or n3 % 2:
                raise RegionError(
                    f"torus dims must all be even for a consistent bipartition: {self.dims}"
                )
            if len(self.cells) != n1 * n2 * n3:
                raise RegionError("torus region must contain every cell")

    @property
    def is_torus(self) -> bool:
        return self.dims is not None

    def reduce(self, c: Cell) -> Cell:
        if self.dims is None:
            return c
        n1, n2, n3 = self.dims
        return (c[0] % n1, c[1] % n2, c[2] % n3)

    def __contains__(self, c: Cell) -> bool:
        return self.reduce(c) in self.cells

    def __len__(self) -> int:
        return len(self.cells)

    def neighbor_steps(self, c: Cell) -> list[tuple[Vec, Cell]]:
        """All (direction, neighbor) pairs out of c that stay in the region."""
        out = []
        for d in UNIT_DIRS:
            n = self.reduce(add(c, d))
            if n in self.cells:
                out.append((d, n))
        return out

    def neighbors(self, c: Cell) -> list[Cell]:
        seen = []
        for _, n in self.neighbor_steps(c):
            if n not in seen:
                seen.append(n)
        return seen

    def even_cells(self) -> list[Cell]:
        return sorted(c for c in self.cells if parity(c) == 0)

    def odd_cells(self) -> list[Cell]:
        return sorted(c for c in self.cells if parity(c) == 1)

    def sorted_cells(self) -> list[Cell]:
        return sorted(self.cells)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {"version": 1, "topology": "torus" if self.is_torus else "open"}
        if self.is_torus:
            out["dims"] = list(self.dims)  # type: ignore[arg-type]
        out["cells"] = [list(c) for c in self.sorted_cells()]
        return out

    @staticmethod
    def from_json(data: dict) -> "Region":
        if "builder" in data:
            return build_from_spec(data)
        if data.get("version") != 1:
            raise RegionError(f"unsupported region version {data.get('version')}")
        cells = frozenset(tuple(c) for c in data["cells"])
        if data["topology"] == "torus":
            return Region(cells, tuple(data["dims"]))
        return Region(cells)


def build_box(a: int, b: int, c: int) -> Region:
    """Open region [0,a) x [0,b) x [0,c)."""
    if min(a, b, c) < 1:
        raise RegionError(f"box dimensions must be positive: {(a, b, c)}")
    return Region(frozenset(
        (x, y, z) for x in range(a) for y in range(b) for z in range(c)
    ))


def build_torus(n1: int, n2: int, n3: int) -> Region:
    cells = frozenset(
        (x, y, z) for x in range(n1) for y in range(n2) for z in range(n3)
    )
    return Region(cells, (n1, n2, n3))


def aztec_diamond_footprint(n: int, offset: tuple[int, int] = (0, 0)) -> set[tuple[int, int]]:
    """Order-n Aztec diamond AD(n) = {(x,y): |x-n+1/2| + |y-n+1/2| <= n}, 2n(n+1) cells."""
    ox, oy = offset
    half = Fraction(1, 2)
    return {
        (x + ox, y + oy)
        for x in range(2 * n)
        for y in range(2 * n)
        if abs(x - n + half) + abs(y - n + half) <= n
    }


def build_pyramid(k: int) -> Region:
    """Aztec pyramid: AD(k) at the bottom up through AD(1), centered on a common axis."""
    if k < 1:
        raise RegionError("pyramid order must be >= 1")
    cells: set[Cell] = set()
    for i in range(k):
        layer = aztec_diamond_footprint(k - i, offset=(i, i))
        cells.update((x, y, i) for (x, y) in layer)
    return Region(frozenset(cells))


def build_octahedron(k: int) -> Region:
    """Two Aztec pyramids glued along their square face; both widest layers kept."""
    if k < 1:
        raise RegionError("octahedron order must be >= 1")
    cells: set[Cell] = set()
    for i in range(k):
        layer = aztec_diamond_footprint(k - i, offset=(i, i))
        cells.update((x, y, k + i) for (x, y) in layer)          # upper pyramid, shrinking up
        cells.update((x, y, k - 1 - i) for (x, y) in layer)      # mirrored below
    return Region(frozenset(cells))


def build_prism(k: int, height: int) -> Region:
    """Aztec prism: layers alternate AD(k), AD(k+1), starting with AD(k) at z=0."""
    if k < 1 or height < 1:
        raise RegionError("prism parameters must be >= 1")
    small = aztec_diamond_footprint(k, offset=(1, 1))
    big = aztec_diamond_footprint(k + 1, offset=(0, 0))
    cells: set[Cell] = set()
    for z in range(height):
        layer = small if z % 2 == 0 else big
        cells.update((x, y, z) for (x, y) in layer)
    return Region(frozenset(cells))


def build_aztec(kind: str, **kwargs) -> Region:
    if kind == "pyramid":
        return build_pyramid(kwargs["k"])
    if kind == "octahedron":
        return build_octahedron(kwargs["k"])
    if kind == "prism":
        return build_prism(kwargs["k"], kwargs["height"])
    raise RegionError(f"unknown Aztec family {kind!r}")


def build_from_spec(spec: dict) -> Region:
    """Builder spec form: {"builder": "box"|"torus"|"pyramid"|"octahedron"|"prism", "args": {...}}."""
    builder = spec["builder"]
    args = spec.get("args", {})
    if builder == "box":
        return build_box(args["a"], args["b"], args["c"])
    if builder == "torus":
        return build_torus(args["n1"], args["n2"], args["n3"])
    if builder in ("pyramid", "octahedron", "prism"):
        return build_aztec(builder, **args)
    raise RegionError(f"unknown builder {builder!r}")


# -- dual surfaces ---------------------------------------------------------

HalfPoint = tuple[Fraction, Fraction, Fraction]


@dataclass(frozen=True)
class Square:
    """Oriented dual square: half-integer center plus outward unit normal."""

    center: HalfPoint
    normal: Vec

    @property
    def inner_cell(self) -> Cell:
        return tuple(int(x - Fraction(n, 2)) for x, n in zip(self.center, self.normal))  # type: ignore[return-value]

    @property
    def outer_cell(self) -> Cell:
        return tuple(int(x + Fraction(n, 2)) for x, n in zip(self.center, self.normal))  # type: ignore[return-value]

    @property
    def color(self) -> str:
        """White if the normal points even -> odd, black otherwise."""
        return "white" if parity(self.inner_cell) == 0 else "black"


@dataclass(frozen=True)
class DiscreteSurface:
    squares: frozenset[Square]

    def color_counts(self) -> tuple[int, int]:
        white = sum(1 for s in self.squares if s.color == "white")
        return white, len(self.squares) - white

    def area(self) -> int:
        return len(self.squares)

    def is_monochromatic(self) -> bool:
        return len({s.color for s in self.squares}) <= 1


def square_between(a: Cell, b_dir: Vec) -> Square:
    """The dual square between cell a and a+b_dir, normal pointing out of a."""
    half = Fraction(1, 2)
    center = tuple(Fraction(x) + half * d for x, d in zip(a, b_dir))
    return Square(center, b_dir)  # type: ignore[arg-type]


def boundary_surface(region: Region, cells: set[Cell] | frozenset[Cell]) -> DiscreteSurface:
    """Oriented boundary of `cells` within the region's ambient lattice.

    One square per (cell in U, lattice neighbor outside U) pair, normal
    pointing out of U. On a torus the neighbor is taken modulo dims; a
    doubled edge on a length-2 torus yields both squares.
    """
    cellset = set(cells)
    for c in cellset:
        if c not in region:
            raise RegionError(f"cell {c} not in region")
    squares = []
    for c in cellset:
        for d in UNIT_DIRS:
            n = region.reduce(add(c, d))
            if n not in cellset:
                squares.append(square_between(c, d))
    return DiscreteSurface(frozenset(squares))


def ambient_boundary_surface(cells: set[Cell] | frozenset[Cell]) -> DiscreteSurface:
    """Boundary of `cells` against all of Z^3 (open lattice, no region clipping)."""
    cellset = set(cells)
    squares = []
    for c in cellset:
        for d in UNIT_DIRS:
            if add(c, d) not in cellset:
                squares.append(square_between(c, d))
    return DiscreteSurface(frozenset(squares))


def box_face_patches(n: int, patch: int) -> list[DiscreteSurface]:
    """Partition the boundary of [0,n)^3 into patch x patch squares, outward normals.

    Requires patch to divide n. Used for near-constancy flux checks.
    """
    if n % patch != 0:
        raise RegionError(f"patch size {patch} must divide box side {n}")
    patches = []
    k = n // patch
    for axis in range(3):
        for side in (0, n - 1):
            normal = [0, 0, 0]
            normal[axis] = -1 if side == 0 else 1
            normal_v: Vec = tuple(normal)  # type: ignore[assignment]
            u_axis, v_axis = [i for i in range(3) if i != axis]
            for bu in range(k):
                for bv in range(k):
                    squares = []
                    for du in range(patch):
                        for dv in range(patch):
                            cell = [0, 0, 0]
                            cell[axis] = side
                            cell[u_axis] = bu * patch + du
                            cell[v_axis] = bv * patch + dv
                            squares.append(square_between(tuple(cell), normal_v))  # type: ignore[arg-type]
                    patches.append(DiscreteSurface(frozenset(squares)))
    return patches


def cross_section(region: Region, axis: int, level: int) -> DiscreteSurface:
    """Full dual-plane cross-section of a torus at x_axis = level + 1/2, normal +eta_axis."""
    if not region.is_torus:
        raise RegionError("cross sections are defined for tori")
    d = AXES[axis]
    squares = [
        square_between(c, d) for c in region.cells if c[axis] == level
    ]
    return DiscreteSurface(frozenset(squares))


def region_to_file(region: Region, path: str) -> None:
    with open(path, "w") as f:
        json.dump(region.to_json(), f)


def region_from_file(path: str) -> Region:
    with open(path) as f:
        return Region.from_json(json.load(f))
