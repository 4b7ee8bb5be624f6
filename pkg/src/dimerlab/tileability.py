"""Exact tileability: bipartite maximum matching, Hall-violator certificates,
imbalance accounting, and the annulus patching experiment.

A region is tileable iff it has no counterexample set U: more even than odd
cells but only odd cells on its interior boundary. The matcher builds the
certificate from a maximum matching by alternating reachability from the
unmatched cells, which is reproducible given the deterministic lexicographic
vertex order.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .lattice import (
    Cell, DiscreteSurface, Region, Vec,
    ambient_boundary_surface, add, boundary_surface, build_box, neg, parity,
)
from .tiling import Tiling, TilingError, direction_between, validate

INF = float("inf")


class MatchingError(ValueError):
    pass


def max_matching(adj: dict, order=None) -> dict:
    """Hopcroft-Karp maximum matching on a bipartite graph.

    `adj` maps left vertices to iterables of right vertices. Deterministic:
    left vertices are processed in sorted order (or `order`), neighbors in
    the order given. Returns {left: right} for the matched pairs.
    """
    lefts = sorted(adj) if order is None else list(order)
    pair_l: dict = {}
    pair_r: dict = {}
    dist: dict = {}

    def bfs() -> bool:
        queue = deque()
        for u in lefts:
            if u not in pair_l:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        found = INF
        while queue:
            u = queue.popleft()
            if dist[u] >= found:
                continue
            for v in adj[u]:
                w = pair_r.get(v)
                if w is None:
                    if found == INF:
                        found = dist[u] + 1
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found != INF

    def dfs(u) -> bool:
        for v in adj[u]:
            w = pair_r.get(v)
            if w is None:
                pair_l[u] = v
                pair_r[v] = u
                return True
            if dist[w] == dist[u] + 1 and dfs(w):
                pair_l[u] = v
                pair_r[v] = u
                return True
        dist[u] = INF
        return False

    import sys
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * len(lefts) + 1000))
    try:
        while bfs():
            for u in lefts:
                if u not in pair_l:
                    dfs(u)
    finally:
        sys.setrecursionlimit(old_limit)
    return pair_l


@dataclass(frozen=True)
class HallCertificate:
    """Witness of non-tileability. `cells` has only `minority`-parity cells on
    its interior boundary yet `imbalance` more majority cells; when
    `parity_swapped` the majority is odd (Hall with the sides switched)."""

    region: Region
    cells: frozenset[Cell]
    imbalance: int
    parity_swapped: bool

    @property
    def interior_boundary(self) -> frozenset[Cell]:
        out = set()
        for c in self.cells:
            for n in self.region.neighbors(c):
                if n not in self.cells:
                    out.add(c)
                    break
        return frozenset(out)

    @property
    def surface(self) -> DiscreteSurface:
        """Interior boundary surface of U within the region."""
        return boundary_surface(self.region, self.cells)

    def check(self) -> list[str]:
        """Machine-check all type invariants; empty list when sound."""
        problems = []
        even = sum(1 for c in self.cells if parity(c) == 0)
        odd = len(self.cells) - even
        majority = odd - even if self.parity_swapped else even - odd
        if majority != self.imbalance:
            problems.append(f"imbalance {self.imbalance} != recount {majority}")
        if self.imbalance <= 0:
            problems.append("imbalance not positive")
        boundary_par = 0 if self.parity_swapped else 1
        for c in self.interior_boundary:
            if parity(c) != boundary_par:
                problems.append(f"interior boundary cell {c} has wrong parity")
        white, black = ambient_surface_color_counts(self.cells)
        expect = black - white if self.parity_swapped else white - black
        if 6 * self.imbalance != expect:
            problems.append(f"6*imbalance != signed surface area ({6 * self.imbalance} vs {expect})")
        return problems

    def to_json(self) -> dict:
        white, black = ambient_surface_color_counts(self.cells)
        return {
            "U": [list(c) for c in sorted(self.cells)],
            "imbalance": self.imbalance,
            "parity_swapped": self.parity_swapped,
            "white": white,
            "black": black,
            "surface_area": self.surface.area(),
        }


def imbalance(region: Region, cells) -> int:
    """even(U) - odd(U)."""
    cells = set(cells)
    for c in cells:
        if c not in region:
            raise MatchingError(f"cell {c} not in region")
    even = sum(1 for c in cells if parity(c) == 0)
    return even - (len(cells) - even)


def surface_color_counts(region: Region, cells) -> tuple[int, int]:
    """(white, black) counts of the ambient boundary of U (against Z^3).

    The divergence identity 6*(even-odd) = white - black is about the full
    boundary of U, independent of the region.
    """
    cells = set(cells)
    for c in cells:
        if c not in region:
            raise MatchingError(f"cell {c} not in region")
    return ambient_surface_color_counts(cells)


def ambient_surface_color_counts(cells) -> tuple[int, int]:
    return ambient_boundary_surface(set(cells)).color_counts()


def _adjacency(region: Region) -> dict[Cell, list[tuple[Vec, Cell]]]:
    return {c: region.neighbor_steps(c) for c in region.sorted_cells()}


def find_matching(region: Region, boundary: list[tuple[Cell, Cell]] | None = None):
    """Perfect matching of the region extending `boundary`, or a HallCertificate.

    `boundary` is a list of forced tiles (cell pairs). The certificate is the
    alternating-reachability closure from the unmatched cells of the deficient
    side of a maximum matching; its invariants prove non-tileability.
    """
    forced: dict[Cell, tuple[Cell, Vec]] = {}
    forced_tiles = set()
    if boundary:
        for a, b in boundary:
            a, b = region.reduce(a), region.reduce(b)
            if parity(a) != 0:
                a, b = b, a
            d = direction_between(region, a, b)
            if a in forced or b in forced:
                raise MatchingError(f"cell constrained twice in boundary matching near {a}")
            forced[a] = (b, d)
            forced[b] = (a, neg(d))
            forced_tiles.add((a, d))

    free_cells = [c for c in region.sorted_cells() if c not in forced]
    adj = {}
    forced_set = set(forced)
    for c in free_cells:
        if parity(c) == 0:
            adj[c] = tuple(n for _, n in region.neighbor_steps(c) if n not in forced_set)
    evens = sorted(adj)
    odds = [c for c in free_cells if parity(c) == 1]

    pair_l = max_matching(adj)
    if len(pair_l) == len(evens) == len(odds):
        tiles = set(forced_tiles)
        for e, o in pair_l.items():
            tiles.add((e, direction_between(region, e, o)))
        t = Tiling(region, frozenset(tiles))
        problems = validate(t)
        if problems:
            raise MatchingError(f"internal error, invalid matching: {problems[0]}")
        return t

    pair_r = {v: u for u, v in pair_l.items()}
    if len(pair_l) < len(evens):
        cert = _certificate_from_matching(region, evens, adj, pair_l, pair_r, swapped=False)
    else:
        # all evens matched but odd cells left over: run with parities swapped
        adj_odd = {}
        free_set = set(free_cells)
        for c in odds:
            adj_odd[c] = tuple(n for _, n in region.neighbor_steps(c) if n in free_set and parity(n) == 0)
        pair_lo = max_matching(adj_odd)
        pair_ro = {v: u for u, v in pair_lo.items()}
        cert = _certificate_from_matching(region, sorted(adj_odd), adj_odd, pair_lo, pair_ro, swapped=True)
    problems = cert.check()
    if problems:
        raise MatchingError(f"internal error, invalid certificate: {problems[0]}")
    return cert


def _certificate_from_matching(region, lefts, adj, pair_l, pair_r, swapped) -> HallCertificate:
    # C = left cells reachable from unmatched lefts by alternating paths;
    # U = C u N(C) has only right-parity cells on its interior boundary.
    reached = {u for u in lefts if u not in pair_l}
    frontier = list(reached)
    neighbors_right: set = set()
    while frontier:
        new = []
        for u in frontier:
            for v in adj[u]:
                if v in neighbors_right:
                    continue
                neighbors_right.add(v)
                w = pair_r.get(v)
                if w is not None and w not in reached:
                    reached.add(w)
                    new.append(w)
        frontier = new
    cells = frozenset(reached | neighbors_right)
    imb = len(reached) - len(neighbors_right)
    return HallCertificate(region, cells, imb, swapped)


def tighten_certificate(cert: HallCertificate) -> HallCertificate:
    """Greedy local reduction of the interior boundary surface area.

    Two moves preserve the certificate invariants while never decreasing the
    imbalance: absorbing a majority-parity cell whose region-neighbors all
    lie in U, and shedding a minority-parity cell with no neighbors in U.
    Best-effort, not a global minimal-surface search.
    """
    region = cert.region
    majority_par = 1 if cert.parity_swapped else 0
    cells = set(cert.cells)
    changed = True
    while changed:
        changed = False
        # absorb surrounded majority cells (strictly reduces surface area)
        candidates = set()
        for c in cells:
            for n in region.neighbors(c):
                if n not in cells and parity(n) == majority_par:
                    candidates.add(n)
        for c in sorted(candidates):
            if all(n in cells for n in region.neighbors(c)):
                cells.add(c)
                changed = True
        # shed isolated minority cells
        for c in sorted(cells):
            if parity(c) != majority_par and not any(n in cells for n in region.neighbors(c)):
                cells.remove(c)
                changed = True
    even = sum(1 for c in cells if parity(c) == 0)
    odd = len(cells) - even
    imb = odd - even if cert.parity_swapped else even - odd
    out = HallCertificate(region, frozenset(cells), imb, cert.parity_swapped)
    problems = out.check()
    if problems:
        raise MatchingError(f"internal error, tighten broke certificate: {problems[0]}")
    if out.imbalance < cert.imbalance:
        raise MatchingError("internal error, tighten decreased imbalance")
    return out


def brute_force_tileable(region: Region) -> bool:
    """Reference oracle: depth-first search over matchings (small regions only)."""
    cells = region.sorted_cells()
    if len(cells) % 2:
        return False
    index = {c: i for i, c in enumerate(cells)}
    nbrs = [[index[n] for n in region.neighbors(c)] for c in cells]
    n = len(cells)
    covered = [False] * n

    def rec(start: int) -> bool:
        while start < n and covered[start]:
            start += 1
        if start == n:
            return True
        covered[start] = True
        for j in nbrs[start]:
            if not covered[j]:
                covered[j] = True
                if rec(start + 1):
                    covered[j] = False
                    covered[start] = False
                    return True
                covered[j] = False
        covered[start] = False
        return False

    return rec(0)


# -- patching ----------------------------------------------------------------


def annulus_region(n: int, delta) -> tuple[set[Cell], set[Cell], set[Cell]]:
    """Cells of B = [0,n)^3, the centered inner box of side round((1-delta) n),
    and the annulus between them."""
    from fractions import Fraction

    m = int(round((1 - Fraction(delta)) * n))
    t = (n - m) // 2
    box = {(x, y, z) for x in range(n) for y in range(n) for z in range(n)}
    inner = {(x, y, z)
             for x in range(t, t + m) for y in range(t, t + m) for z in range(t, t + m)}
    return box, inner, box - inner


def patch(outer, inner, n: int, delta):
    """Tile the annulus B_n minus the inner box against two boundary tilings.

    `outer` tiles everything outside B_n (its tiles crossing the outer wall
    commit annulus cells), `inner` tiles the inner box (its tiles crossing
    the inner wall commit annulus cells); both are tilings of Z^3
    (PeriodicTiling). Returns the annulus Tiling (crossing tiles included)
    or a HallCertificate for the free region.
    """
    box, inner_box, annulus = annulus_region(n, delta)
    committed: dict[Cell, tuple[Cell, Vec]] = {}

    def commit(cell: Cell, tiling) -> None:
        d = tiling.tile_dir(cell)
        other = add(cell, d)
        even, dir_ = (cell, d) if parity(cell) == 0 else (other, neg(d))
        committed[cell] = (even, dir_)

    for c in annulus:
        d = outer.tile_dir(c)
        if add(c, d) not in box:
            commit(c, outer)
    for c in inner_box:
        d = inner.tile_dir(c)
        other = add(c, d)
        if other in annulus:
            commit(other, inner)  # the annulus cell is taken by the inner tiling

    free = annulus - set(committed)
    region = Region(frozenset(free))
    result = find_matching(region)
    if isinstance(result, HallCertificate):
        return result
    tiles = set(result.tiles)
    tiles.update(committed.values())
    covered = set()
    for even, d in tiles:
        covered.add(even)
        covered.add(add(even, d))
    full = Tiling(Region(frozenset(covered)), frozenset(tiles))
    return full


def certificate_to_file(cert: HallCertificate, path: str) -> None:
    with open(path, "w") as f:
        json.dump(cert.to_json(), f)
