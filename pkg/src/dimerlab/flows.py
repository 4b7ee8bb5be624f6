"""Flows attached to tilings: divergences, fluxes through discrete surfaces,
mean currents, torus winding, near-constancy checks and discrete traces.

Every edge is oriented even -> odd; reversing orientation negates the value.
The pretiling flow is 1 on matched edges and 0 elsewhere; subtracting the
uniform reference 1/6 gives the divergence-free tiling flow with values
5/6 (matched) and -1/6 (unmatched). All arithmetic is exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .lattice import (
    AXES, Cell, DiscreteSurface, Region, UNIT_DIRS, Vec,
    add, cross_section, neg, parity, sub,
)
from .tiling import PeriodicTiling, Tiling

MATCHED_V = Fraction(1)
REFERENCE = Fraction(1, 6)


class FlowError(ValueError):
    pass


@dataclass(frozen=True)
class DimerFlow:
    """Edge-indexed flow. `kind` is one of 'pretiling', 'tiling', 'double'.

    `values` maps (even_cell, dir) to the flow on the edge oriented from the
    even cell outward; edges of the region absent from the map carry the
    default value (0 for pretiling, -1/6 for tiling flows).
    """

    region: Region
    values: dict[tuple[Cell, Vec], Fraction]
    kind: str
    default: Fraction

    def edge_value(self, even: Cell, direction: Vec) -> Fraction:
        """Flow on the edge (even, even+direction), oriented even -> odd."""
        if parity(even) != 0:
            raise FlowError(f"edge key must start at an even cell: {even}")
        return self.values.get((self.region.reduce(even), direction), self.default)


def pretiling_flow(t: Tiling) -> DimerFlow:
    values = {(e, d): MATCHED_V for e, d in t.tiles}
    return DimerFlow(t.region, values, "pretiling", Fraction(0))


def tiling_flow(t: Tiling) -> DimerFlow:
    values = {(e, d): MATCHED_V - REFERENCE for e, d in t.tiles}
    return DimerFlow(t.region, values, "tiling", -REFERENCE)


def double_dimer_flow(t1: Tiling, t2: Tiling) -> DimerFlow:
    if t1.region != t2.region:
        raise FlowError("tilings live on different regions")
    values: dict[tuple[Cell, Vec], Fraction] = {}
    for e, d in t1.tiles:
        values[(e, d)] = values.get((e, d), Fraction(0)) + 1
    for e, d in t2.tiles:
        values[(e, d)] = values.get((e, d), Fraction(0)) - 1
    return DimerFlow(t1.region, {k: v for k, v in values.items() if v}, "double", Fraction(0))


def divergence(flow: DimerFlow, c: Cell) -> Fraction:
    """Signed sum over the 6 outward-oriented edges at c.

    Raises on open-region cells with missing neighbors (partial stencil).
    """
    region = flow.region
    c = region.reduce(c)
    total = Fraction(0)
    n_edges = 0
    for d in UNIT_DIRS:
        nb = region.reduce(add(c, d))
        if nb not in region.cells:
            continue
        n_edges += 1
        if parity(c) == 0:
            total += flow.edge_value(c, d)
        else:
            total -= flow.edge_value(nb, neg(d))
    if n_edges < 6:
        raise FlowError(f"cell {c} has a partial stencil ({n_edges} edges); divergence undefined")
    return total


def flux(flow: DimerFlow, surface: DiscreteSurface) -> Fraction:
    """Flux through an oriented discrete surface.

    Each square is pierced by the unique lattice edge through its center;
    the edge contributes sign<normal, even->odd direction> times its value.
    """
    region = flow.region
    total = Fraction(0)
    for sq in surface.squares:
        a = sq.inner_cell
        b = sq.outer_cell
        if parity(a) == 0:
            even, d, sign = a, sq.normal, 1
        else:
            even, d, sign = b, neg(sq.normal), -1
        even = region.reduce(even)
        if even not in region.cells or region.reduce(add(even, d)) not in region.cells:
            continue  # edge outside the region carries no flow
        total += sign * flow.edge_value(even, d)
    return total


def mean_current(t: Tiling, window: set[Cell] | frozenset[Cell] | None = None
                 ) -> tuple[Fraction, Fraction, Fraction]:
    """Average tile direction over the even cells of the window (exact)."""
    partner = t.partner_map()
    cells = window if window is not None else t.region.cells
    total = [Fraction(0)] * 3
    count = 0
    for c in cells:
        if parity(c) != 0:
            continue
        if c not in partner:
            raise FlowError(f"unmatched even cell {c} in window")
        _, d = partner[c]
        for i in range(3):
            total[i] += d[i]
        count += 1
    if count == 0:
        raise FlowError("window contains no even cells")
    result = tuple(v / count for v in total)
    assert abs(result[0]) + abs(result[1]) + abs(result[2]) <= 1
    return result  # type: ignore[return-value]


def winding(t: Tiling, level: int = 0) -> tuple[int, int, int]:
    """Homology class a(tau) of a torus tiling: net pretiling flux through a
    full cross-section per axis. Independent of the cross-section level."""
    if not t.region.is_torus:
        raise FlowError("winding is defined for torus tilings")
    v = pretiling_flow(t)
    out = []
    for axis in range(3):
        s = cross_section(t.region, axis, level % t.region.dims[axis])  # type: ignore[index]
        out.append(int(flux(v, s)))
    return tuple(out)  # type: ignore[return-value]


def nearly_constant_deviation(t: PeriodicTiling, n: int, eps: Fraction | float, s) -> Fraction:
    """Max relative deviation of pretiling-flow patch fluxes from (1/2)<xi,s> area.

    Patches are the eps*n x eps*n squares tiling the boundary of [0,n)^3;
    the tiling must be defined on all of Z^3 (a PeriodicTiling), since patch
    fluxes look at tiles crossing the box boundary.
    """
    from .lattice import box_face_patches

    s = tuple(Fraction(x) for x in s)
    patch = int(Fraction(eps) * n)
    if patch < 1:
        raise FlowError("eps * n must be >= 1")
    worst = Fraction(0)
    area = Fraction(patch * patch)
    for surf in box_face_patches(n, patch):
        total = 0
        xi = next(iter(surf.squares)).normal
        for sq in surf.squares:
            a, b = sq.inner_cell, sq.outer_cell
            cell = a if parity(a) == 0 else b
            d = sq.normal if parity(a) == 0 else neg(sq.normal)
            sign = 1 if parity(a) == 0 else -1
            if t.tile_dir(cell) == d:
                total += sign
        expected = Fraction(xi[0] * s[0] + xi[1] * s[1] + xi[2] * s[2], 2) * area
        dev = abs(Fraction(total) - expected) / area
        worst = max(worst, dev)
    return worst


@dataclass(frozen=True)
class PointMass:
    point: tuple[Fraction, Fraction, Fraction]
    weight: Fraction


def trace(t: Tiling, surface: DiscreteSurface, n: int) -> list[PointMass]:
    """Trace of the scale-n tiling flow on a discrete surface.

    One atom per pierced edge at the (scaled) piercing point, with weight
    (2/n^2) sign<xi,e> f(e), f in {5/6, -1/6}. Discrete surfaces are always
    transverse to the lattice (squares are pierced at their centers), so the
    lattice-perturbation rule for degenerate continuum surfaces never fires.
    """
    f = tiling_flow(t)
    atoms = []
    for sq in sorted(surface.squares, key=lambda q: q.center):
        a, b = sq.inner_cell, sq.outer_cell
        if parity(a) == 0:
            even, d, sign = a, sq.normal, 1
        else:
            even, d, sign = b, neg(sq.normal), -1
        even_r = f.region.reduce(even)
        if even_r not in f.region.cells or f.region.reduce(add(even, d)) not in f.region.cells:
            continue
        w = Fraction(2, n * n) * sign * f.edge_value(even_r, d)
        point = tuple(x / n for x in sq.center)
        atoms.append(PointMass(point, w))  # type: ignore[arg-type]
    return atoms


def trace_total_mass(atoms: list[PointMass]) -> Fraction:
    return sum((a.weight for a in atoms), Fraction(0))
