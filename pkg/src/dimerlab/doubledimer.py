"""Superposition of two tilings: cycle decomposition with torus winding,
displacement identities, chain swapping, and per-cycle slope statistics.

Cycles are oriented along the first tiling's flow (even -> odd on tau_1
edges, odd -> even on tau_2 edges). On tori each cycle carries an integer
lift displacement; its winding is displacement / dims, and chain swapping
exchanges the roles of the two tilings on nonzero-winding cycles only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lattice import Cell, Region, Vec, add, neg, parity
from .tiling import Tile, Tiling, validate


class DoubleDimerError(ValueError):
    pass


@dataclass(frozen=True)
class Cycle:
    """Alternating cycle: cells in traversal order, starting even, with
    steps[i] the direction walked from cells[i]. Even steps are tau_1 edges."""

    cells: tuple[Cell, ...]
    steps: tuple[Vec, ...]

    def __len__(self) -> int:
        return len(self.cells)

    def displacement(self) -> tuple[int, int, int]:
        """Lift displacement: sum of tau_1 directions minus reversed tau_2
        directions; (0,0,0) for contractible cycles, winding * dims on tori."""
        out = [0, 0, 0]
        for d in self.steps:
            for i in range(3):
                out[i] += d[i]
        return tuple(out)  # type: ignore[return-value]

    def tau1_tiles(self) -> frozenset[Tile]:
        return frozenset(
            (self.cells[i], self.steps[i]) for i in range(0, len(self.steps), 2)
        )

    def tau2_tiles(self) -> frozenset[Tile]:
        # tau_2 edges are walked odd -> even; tiles are keyed on the even end
        out = set()
        for i in range(1, len(self.steps), 2):
            even = self.cells[(i + 1) % len(self.cells)]
            out.add((even, neg(self.steps[i])))
        return frozenset(out)


@dataclass(frozen=True)
class DoubleDimerConfig:
    region: Region
    tau1: Tiling
    tau2: Tiling
    double_edges: frozenset[Tile]
    cycles: tuple[Cycle, ...]

    def windings(self) -> list[tuple[int, int, int]]:
        if not self.region.is_torus:
            return [(0, 0, 0) for _ in self.cycles]
        dims = self.region.dims
        out = []
        for c in self.cycles:
            disp = c.displacement()
            if any(disp[i] % dims[i] for i in range(3)):  # type: ignore[index]
                raise DoubleDimerError(f"non-integral winding from displacement {disp}")
            out.append(tuple(disp[i] // dims[i] for i in range(3)))  # type: ignore[index]
        return out


def superpose(t1: Tiling, t2: Tiling) -> DoubleDimerConfig:
    """Cycle decomposition of the union of two tilings of a common region."""
    if t1.region != t2.region:
        raise DoubleDimerError("tilings live on different regions")
    region = t1.region
    double = t1.tiles & t2.tiles
    p1 = t1.partner_map()
    p2 = t2.partner_map()
    on_double = set()
    for even, d in double:
        on_double.add(even)
        on_double.add(region.reduce(add(even, d)))

    visited: set[Cell] = set(on_double)
    cycles = []
    for c0 in region.even_cells():
        if c0 in visited:
            continue
        cells = []
        steps = []
        cur = c0
        while True:
            cells.append(cur)
            visited.add(cur)
            _, d1 = p1[cur]
            steps.append(d1)
            odd = region.reduce(add(cur, d1))
            cells.append(odd)
            visited.add(odd)
            _, d2 = p2[odd]
            steps.append(d2)
            cur = region.reduce(add(odd, d2))
            if cur == c0:
                break
        cycles.append(Cycle(tuple(cells), tuple(steps)))
    return DoubleDimerConfig(region, t1, t2, frozenset(double), tuple(cycles))


def cycle_displacement(cycle: Cycle) -> tuple[int, int, int]:
    return cycle.displacement()


def chain_swap(t1: Tiling, t2: Tiling, p: float, seed) -> tuple[Tiling, Tiling]:
    """Swap the two tilings' roles on each nonzero-winding cycle independently
    with probability p; double edges and contractible cycles are untouched."""
    if not t1.region.is_torus:
        raise DoubleDimerError("chain swapping's infinite-path surrogate needs a torus")
    config = superpose(t1, t2)
    rng = np.random.Generator(np.random.Philox(seed))
    new1 = set(t1.tiles)
    new2 = set(t2.tiles)
    for cycle, w in zip(config.cycles, config.windings()):
        if w == (0, 0, 0):
            continue
        if rng.random() < p:
            a, b = cycle.tau1_tiles(), cycle.tau2_tiles()
            new1 -= a
            new1 |= b
            new2 -= b
            new2 |= a
    out1 = Tiling(t1.region, frozenset(new1))
    out2 = Tiling(t2.region, frozenset(new2))
    for t in (out1, out2):
        problems = validate(t)
        if problems:
            raise DoubleDimerError(f"swap broke a tiling: {problems[0]}")
    return out1, out2


def slope_statistics(config: DoubleDimerConfig):
    """Per-cycle slopes and their even-cell-weighted mean.

    slope(cycle) = 2 * displacement / len(cycle) (two-step normalization, so
    a straight +eta1/-eta1 column has slope (2,0,0)); the weighted mean over
    all cells, double edges included with slope 0, equals
    mean_current(tau_1) - mean_current(tau_2) exactly.
    """
    slopes = []
    total = [Fraction(0)] * 3
    n_even = len(config.region.even_cells())
    for cycle in config.cycles:
        disp = cycle.displacement()
        slope = tuple(Fraction(2 * disp[i], len(cycle)) for i in range(3))
        slopes.append(slope)
        evens_on_cycle = len(cycle) // 2
        for i in range(3):
            total[i] += slope[i] * Fraction(evens_on_cycle, n_even)
    return slopes, tuple(total)
