"""Entropy machinery: the Lobachevsky function, the exact boundary formula on
the mean-current octahedron, exact tiling counters (profile DP and DFS
oracles), winding-class refinements, slab-torus counts behind the empirical
interior estimates, and the volume-averaged Ent functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from scipy import integrate

from .lattice import AXES, Cell, Region, Vec, add, parity
from .tiling import Tiling


class EntropyError(ValueError):
    pass


# -- Lobachevsky function and the boundary formula ---------------------------


def lobachevsky(theta: float) -> float:
    """L(theta) = -integral_0^theta ln(2 sin x) dx on [0, pi].

    Adaptive quadrature; the endpoint log singularity is integrable and the
    quadrature is pushed to absolute error below 1e-10. (An independent
    Clausen-series oracle lives in the test suite.)
    """
    if theta < 0 or theta > math.pi + 1e-12:
        raise EntropyError(f"theta must lie in [0, pi]: {theta}")
    if theta == 0:
        return 0.0
    val, err = integrate.quad(lambda x: math.log(2.0 * math.sin(x)), 0.0, min(theta, math.pi),
                              limit=200, epsabs=1e-13, epsrel=1e-12)
    if err > 1e-10:
        raise EntropyError(f"quadrature error estimate too large: {err}")
    return -val


@dataclass(frozen=True)
class EntEstimate:
    s: tuple[Fraction, Fraction, Fraction]
    value: float
    source: str  # 'boundary_formula' | 'enumeration(<size>)' | 'interpolated'
    finite_sizes: tuple[tuple[int, float], ...] = ()
    authoritative: bool = True


def _as_svec(s) -> tuple[Fraction, Fraction, Fraction]:
    out = tuple(Fraction(x) for x in s)
    if abs(out[0]) + abs(out[1]) + abs(out[2]) > 1:
        raise EntropyError(f"{out} is outside the mean-current octahedron")
    return out  # type: ignore[return-value]


def ent_boundary(s) -> EntEstimate:
    """Exact entropy on the boundary of the octahedron:
    (1/pi) (L(pi|s1|) + L(pi|s2|) + L(pi|s3|)); zero on the edges."""
    s = _as_svec(s)
    if abs(s[0]) + abs(s[1]) + abs(s[2]) != 1:
        raise EntropyError(f"{s} is not on the boundary of the octahedron")
    val = sum(lobachevsky(math.pi * float(abs(x))) for x in s) / math.pi
    return EntEstimate(s, val, "boundary_formula")


# -- exact counting ------------------------------------------------------------


def count_tilings_dfs(region: Region, budget: int = 30_000_000) -> int:
    """Reference counter: branch on the first uncovered cell."""
    cells = region.sorted_cells()
    if len(cells) % 2:
        return 0
    index = {c: i for i, c in enumerate(cells)}
    steps = [sorted(index[n] for n in region.neighbors(c)) for c in cells]
    # torus multigraphs: doubled edges count as distinct tiles
    multiplicity = [
        {index[n]: sum(1 for d, m in region.neighbor_steps(c) if m == n) for n in region.neighbors(c)}
        for c in cells
    ]
    n = len(cells)
    covered = [False] * n
    nodes = 0

    def rec(start: int) -> int:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise EntropyError("enumeration budget exceeded")
        while start < n and covered[start]:
            start += 1
        if start == n:
            return 1
        covered[start] = True
        total = 0
        for j in steps[start]:
            if not covered[j]:
                covered[j] = True
                total += multiplicity[start][j] * rec(start + 1)
                covered[j] = False
        covered[start] = False
        return total

    return rec(0)


def count_tilings(region: Region, profile_budget: int = 1 << 20) -> int:
    """Exact tiling count by broken-profile dynamic programming.

    Cells are swept in lexicographic order; the DP state is the coverage
    bitmask of a sliding window whose width is the largest index gap to a
    forward neighbor. Raises when 2^width exceeds `profile_budget`.
    Open regions only (tori go through the DFS counter).
    """
    if region.is_torus:
        raise EntropyError("profile DP does not wrap; use count_tilings_dfs for tori")
    cells = region.sorted_cells()
    if not cells:
        return 1
    if len(cells) % 2:
        return 0
    index = {c: i for i, c in enumerate(cells)}
    forward = []
    width = 1
    for i, c in enumerate(cells):
        nbrs = []
        for d in ((0, 0, 1), (0, 1, 0), (1, 0, 0)):
            n = add(c, d)
            if n in index:
                gap = index[n] - i
                nbrs.append(gap)
                width = max(width, gap + 1)
        forward.append(nbrs)
    if (1 << width) > profile_budget:
        raise EntropyError(f"profile width {width} exceeds budget")

    # mask bit j = cell (i + j) already covered, for the current cell i
    states = {0: 1}
    for i in range(len(cells)):
        new: dict[int, int] = {}
        for mask, ways in states.items():
            if mask & 1:
                new[mask >> 1] = new.get(mask >> 1, 0) + ways
                continue
            for gap in forward[i]:
                if not (mask >> gap) & 1:
                    m2 = (mask | (1 << gap)) >> 1
                    new[m2] = new.get(m2, 0) + ways
        states = new
    return states.get(0, 0)


def count_torus_by_winding(region: Region, budget: int = 30_000_000) -> dict[tuple[int, int, int], int]:
    """Exact tiling counts of a torus refined by the winding class a(tau).

    Winding is tallied incrementally: the tile (cell, d) crosses the fixed
    dual plane x_i = 1/2 with sign +1 when d = +eta_i and cell_i = 0, and
    sign -1 when d = -eta_i and cell_i = 1.
    """
    if not region.is_torus:
        raise EntropyError("winding classes need a torus")
    cells = region.sorted_cells()
    index = {c: i for i, c in enumerate(cells)}
    steps = []
    for c in cells:
        outs = []
        for d, n in region.neighbor_steps(c):
            contrib = [0, 0, 0]
            for i in range(3):
                if d[i] == 1 and c[i] == 0:
                    contrib[i] = 1 if parity(c) == 0 else -1
                elif d[i] == -1 and c[i] == 1:
                    contrib[i] = -1 if parity(c) == 0 else 1
            outs.append((index[n], tuple(contrib)))
        steps.append(outs)
    n = len(cells)
    covered = [False] * n
    counts: dict[tuple[int, int, int], int] = {}
    tally = [0, 0, 0]
    nodes = 0

    def rec(start: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise EntropyError("enumeration budget exceeded")
        while start < n and covered[start]:
            start += 1
        if start == n:
            key = (tally[0], tally[1], tally[2])
            counts[key] = counts.get(key, 0) + 1
            return
        covered[start] = True
        for j, contrib in steps[start]:
            if not covered[j]:
                covered[j] = True
                for i in range(3):
                    tally[i] += contrib[i]
                rec(start + 1)
                for i in range(3):
                    tally[i] -= contrib[i]
                covered[j] = False
        covered[start] = False

    rec(0)
    return counts


# -- slab tori ------------------------------------------------------------------


def slab_torus_type_counts(k: int, target: tuple[int, int, int] | None = None,
                           budget: int = 60_000_000,
                           k2: int | None = None,
                           shear: int = 0) -> dict[tuple[int, int, int], int]:
    """Tilings of the k x k2 (optionally sheared) slab torus by tile-type counts.

    The slab between two adjacent diagonal planes, wrapped by the plane
    lattice spanned by k(e1-e2) and shear(e1-e2) + k2(e2-e3), is a k x k2
    hexagonal (lozenge) quotient: k*k2 even cells each matched in one of the
    directions eta_1/eta_2/eta_3. Counts are keyed by (#eta_1,#eta_2,#eta_3)
    tiles; reachable class vectors form an affine lattice depending on the
    wrap (square wraps only reach multiples of k). With `target` set,
    branches that cannot reach the target are pruned (only the target's
    count is then meaningful).
    """
    if k2 is None:
        k2 = k
    n_even = k * k2
    # even (a, b) adjacent to odd (a, b) [eta1], (a-1, b) [eta2], (a-1, b-1) [eta3];
    # wrap lattice (a,b) ~ (a+k, b) ~ (a+shear, b+k2). The shear tilts the
    # quantization lattice of reachable type classes.
    def reduce_ab(a: int, b: int) -> tuple[int, int]:
        t = b // k2
        return (a + shear * t) % k, b - t * k2

    odd_id = {(a, b): a * k2 + b for a in range(k) for b in range(k2)}

    def odd_neighbors(a: int, b: int) -> tuple[tuple[int, int], ...]:
        return (
            (odd_id[reduce_ab(a, b)], 0),
            (odd_id[reduce_ab(a - 1, b)], 1),
            (odd_id[reduce_ab(a - 1, b - 1)], 2),
        )

    evens = [(a, b) for a in range(k) for b in range(k2)]
    nbrs = [odd_neighbors(a, b) for a, b in evens]
    covered = [False] * n_even
    counts: dict[tuple[int, int, int], int] = {}
    tally = [0, 0, 0]
    nodes = 0

    def rec(i: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise EntropyError("slab enumeration budget exceeded")
        if i == n_even:
            key = (tally[0], tally[1], tally[2])
            counts[key] = counts.get(key, 0) + 1
            return
        for oid, typ in nbrs[i]:
            if covered[oid]:
                continue
            if target is not None and tally[typ] + 1 > target[typ]:
                continue
            covered[oid] = True
            tally[typ] += 1
            rec(i + 1)
            tally[typ] -= 1
            covered[oid] = False

    rec(0)
    return counts


def nearest_type_class(s, volume: int) -> tuple[int, int, int]:
    """Integer tile-type counts nearest to s * volume summing to volume."""
    s = _as_svec(s)
    raw = [abs(x) * volume for x in s]
    base = [int(x) for x in raw]
    while sum(base) < volume:
        # largest fractional part first, ties to lower index
        fracs = [(raw[i] - base[i], -i) for i in range(3)]
        j = max(range(3), key=lambda i: fracs[i])
        base[j] += 1
    return tuple(base)  # type: ignore[return-value]


def nearest_existing_class(s, counts: dict, volume: int) -> tuple[int, int, int]:
    """The reachable class vector nearest to s * volume (L1, ties lexicographic).

    Reachable classes form a wrap-dependent affine lattice, so the rounded
    target itself may not occur; pick the closest one that does.
    """
    target = nearest_type_class(s, volume)
    best = min(sorted(counts), key=lambda c: sum(abs(c[i] - target[i]) for i in range(3)))
    return best


# Slab wrap whose reachable-class lattice contains the (1/3,1/3,1/3),
# (1/2,1/4,1/4) and (1/2,1/2,0) classes simultaneously (24 even cells;
# found by scanning shears - square wraps only reach multiples of k).
RATIO_WRAP = {"k": 12, "k2": 2, "shear": 8}

# Calibration of the slab-count normalization at s=(1/3,1/3,1/3) on
# RATIO_WRAP: ent_boundary((1/3,1/3,1/3)) / (ln N(8,8,8) / 24). Stored
# rather than asserted; finite-size error is baked in deliberately (ratio
# tests are calibration-independent). Recomputed by tests.
SLAB_CALIBRATION = 0.9615424452458918


def slab_entropy_estimate(s, k: int, target: tuple[int, int, int] | None = None,
                          k2: int | None = None, shear: int = 0) -> float:
    """ln(count of tilings in the reachable class nearest s*volume) / volume."""
    volume = k * (k2 if k2 is not None else k)
    counts = slab_torus_type_counts(k, k2=k2, shear=shear)
    cls = nearest_existing_class(s, counts, volume) if target is None else target
    n = counts.get(cls, 0)
    if n == 0:
        raise EntropyError(f"no tilings in class {cls} at size {k}x{k2 or k}")
    return math.log(n) / volume


def empirical_ent(s, sizes: tuple[int, ...]) -> EntEstimate:
    """Enumeration-based entropy estimate at mean current s.

    Boundary currents go through slab-torus classes (per even vertex);
    interior currents through full-torus winding classes on n x n x 2 tori
    with the dictionary s_i = 2 a_i / (n_j n_k). The extrapolant is a linear
    1/size fit. Non-authoritative by construction.
    """
    from .lattice import build_torus

    s = _as_svec(s)
    on_boundary = abs(s[0]) + abs(s[1]) + abs(s[2]) == 1
    finite = []
    for k in sizes:
        if on_boundary:
            try:
                finite.append((k, slab_entropy_estimate(s, k)))
            except EntropyError:
                continue
        else:
            region_dims = (k, 2, 2)
            torus = build_torus(*region_dims)
            counts = count_torus_by_winding(torus)
            n_even = 2 * k
            target = _nearest_winding(s, region_dims)
            n = counts.get(target, 0)
            if n == 0:
                continue
            finite.append((k, math.log(n) / n_even))
    if not finite:
        raise EntropyError(f"no tilings found in any class for {s}")
    value = _extrapolate(finite)
    src = f"enumeration({max(k for k, _ in finite)})"
    return EntEstimate(s, value, src, tuple(finite), authoritative=False)


def _nearest_winding(s, dims) -> tuple[int, int, int]:
    out = []
    for i in range(3):
        j, k = [a for a in range(3) if a != i]
        out.append(round(Fraction(s[i]) * dims[j] * dims[k] / 2))
    return tuple(out)  # type: ignore[return-value]


def _extrapolate(finite: list[tuple[int, float]]) -> float:
    if len(finite) == 1:
        return finite[0][1]
    # least-squares fit value ~ a + b/k, report a clamped at >= 0
    import numpy as np

    ks = np.array([k for k, _ in finite], dtype=float)
    vs = np.array([v for _, v in finite], dtype=float)
    A = np.stack([np.ones_like(ks), 1.0 / ks], axis=1)
    coef, *_ = np.linalg.lstsq(A, vs, rcond=None)
    return max(0.0, float(coef[0]))


# -- the Ent functional ---------------------------------------------------------


def build_interior_table(step: int = 6, torus_dims: tuple[int, int, int] = (4, 2, 2)) -> dict:
    """Estimate-only tensor grid over the octahedron at spacing 1/step.

    Boundary grid points use the exact formula; interior points use winding
    classes of a small torus. Clearly labeled non-authoritative; persisted
    via the CLI as versioned CSV.
    """
    from .lattice import build_torus

    torus = build_torus(*torus_dims)
    counts = count_torus_by_winding(torus)
    n_even = torus_dims[0] * torus_dims[1] * torus_dims[2] // 2
    table: dict[tuple[Fraction, Fraction, Fraction], float] = {}
    rng = range(-step, step + 1)
    for i in rng:
        for j in rng:
            for k in rng:
                s = (Fraction(i, step), Fraction(j, step), Fraction(k, step))
                l1 = abs(s[0]) + abs(s[1]) + abs(s[2])
                if l1 > 1:
                    continue
                if l1 == 1:
                    table[s] = ent_boundary(s).value
                else:
                    cls = _nearest_winding(s, torus_dims)
                    n = counts.get(cls, 0)
                    table[s] = math.log(n) / n_even if n else 0.0
    return table


_default_table_cache: dict = {}


def _default_table(step: int = 6) -> dict:
    if step not in _default_table_cache:
        _default_table_cache[step] = build_interior_table(step=step)
    return _default_table_cache[step]


def ent_lookup(s, table: dict | None = None, step: int = 6) -> float:
    """ent(s): boundary formula on the octahedron boundary, multilinear
    interpolation of the (estimate-only) interior table inside."""
    s = _as_svec(s)
    if abs(s[0]) + abs(s[1]) + abs(s[2]) == 1:
        return ent_boundary(s).value
    if table is None:
        table = _default_table(step)

    def corner_val(p) -> float:
        if abs(p[0]) + abs(p[1]) + abs(p[2]) > 1:
            return 0.0
        return table[p]

    coords = [Fraction(x) * step for x in s]
    base = [Fraction(math.floor(c)) for c in coords]
    fracs = [c - b for c, b in zip(coords, base)]
    total = 0.0
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                weight = 1.0
                for f, d in zip(fracs, (dx, dy, dz)):
                    weight *= float(f) if d else float(1 - f)
                if weight == 0.0:
                    continue
                p = tuple((b + d) / step for b, d in zip(base, (dx, dy, dz)))
                total += weight * corner_val(p)
    return total


def ent_functional(g: dict[Cell, tuple], table: dict | None = None) -> float:
    """Ent(g) = volume-weighted average of ent over a piecewise-constant flow.

    `g` maps box cells to octahedron values. Divergence-freeness across cell
    faces means the normal component is continuous: g_i must agree on
    i-neighboring cells (exact check).
    """
    if not g:
        raise EntropyError("empty flow")
    vals = {c: _as_svec(v) for c, v in g.items()}
    for c, v in vals.items():
        for i, axis in enumerate(AXES):
            n = add(c, axis)
            if n in vals and vals[n][i] != v[i]:
                raise EntropyError(
                    f"divergence violation across face {c}->{n}: {v[i]} vs {vals[n][i]}"
                )
    needs_table = any(abs(v[0]) + abs(v[1]) + abs(v[2]) != 1 for v in vals.values())
    if table is None and needs_table:
        table = _default_table()
    return sum(ent_lookup(v, table) for v in vals.values()) / len(vals)
