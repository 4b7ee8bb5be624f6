"""Generalized Wasserstein distance W_1^{1,1} on finite signed point measures,
and the flow metric d_W at finite scale.

W_1^{1,1}(mu, nu) = W_1^{1,1}(mu+ + nu-, nu+ + mu-): optimal transport between
the two unsigned sides with mass creation/deletion at unit cost, solved as a
min-cost flow (successive shortest paths with potentials) on the bipartite
network plus a void node. Masses are scaled to exact integers whenever their
common denominator fits the precision, and atoms shared by the two sides are
cancelled in place first, so symmetry and mass-shift invariance are bit-exact.
Ground costs are float Euclidean distances capped at 2 (delete+create beats
any longer move).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lattice import AXES, Cell, add, parity
from .tiling import Tiling

Point = tuple[Fraction, Fraction, Fraction]

_EPS = 1e-12


class TransportError(ValueError):
    pass


@dataclass(frozen=True)
class SignedPointMeasure:
    """Finitely many weighted points; atoms at equal points are merged."""

    atoms: tuple[tuple[Point, Fraction], ...]

    @staticmethod
    def from_atoms(atoms) -> "SignedPointMeasure":
        merged: dict[Point, Fraction] = {}
        for point, weight in atoms:
            p = tuple(Fraction(x) for x in point)
            merged[p] = merged.get(p, Fraction(0)) + Fraction(weight)
        cleaned = tuple(sorted((p, w) for p, w in merged.items() if w != 0))
        return SignedPointMeasure(cleaned)

    def total_mass(self) -> Fraction:
        return sum((w for _, w in self.atoms), Fraction(0))

    def total_variation(self) -> Fraction:
        return sum((abs(w) for _, w in self.atoms), Fraction(0))

    def positive_part(self) -> list[tuple[Point, Fraction]]:
        return [(p, w) for p, w in self.atoms if w > 0]

    def negative_part(self) -> list[tuple[Point, Fraction]]:
        return [(p, -w) for p, w in self.atoms if w < 0]

    def shift_by(self, other: "SignedPointMeasure") -> "SignedPointMeasure":
        return SignedPointMeasure.from_atoms(list(self.atoms) + list(other.atoms))

    def translate(self, v) -> "SignedPointMeasure":
        v = tuple(Fraction(x) for x in v)
        return SignedPointMeasure.from_atoms(
            [((p[0] + v[0], p[1] + v[1], p[2] + v[2]), w) for p, w in self.atoms]
        )

    def restrict_box(self, lo, hi) -> Fraction:
        """Mass inside the half-open box [lo, hi)."""
        lo = tuple(Fraction(x) for x in lo)
        hi = tuple(Fraction(x) for x in hi)
        total = Fraction(0)
        for p, w in self.atoms:
            if all(lo[i] <= p[i] < hi[i] for i in range(3)):
                total += w
        return total


def _dist(a: Point, b: Point) -> float:
    return math.sqrt(float((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2))


class _MinCostFlow:
    """Successive shortest paths with Johnson potentials; costs must be >= 0."""

    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[float] = []
        self.potential = [0.0] * n

    def add_edge(self, u: int, v: int, cap: int, cost: float) -> int:
        idx = len(self.to)
        self.head[u].append(idx)
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.head[v].append(idx + 1)
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)
        return idx

    def solve(self, source: int, sink: int, need: int) -> dict[int, int]:
        """Push exactly `need` units at min cost; returns {edge index: flow}."""
        n = self.n
        flow_on: dict[int, int] = {}
        pushed = 0
        while pushed < need:
            dist = [math.inf] * n
            prev_edge = [-1] * n
            done = [False] * n
            dist[source] = 0.0
            heap = [(0.0, source)]
            while heap:
                d, u = heapq.heappop(heap)
                if done[u]:
                    continue
                done[u] = True
                if u == sink:
                    break  # unpopped nodes all have distance >= dist[sink]
                pu = self.potential[u]
                for idx in self.head[u]:
                    if self.cap[idx] <= 0:
                        continue
                    v = self.to[idx]
                    nd = d + self.cost[idx] + pu - self.potential[v]
                    if nd < dist[v] - _EPS:
                        dist[v] = nd
                        prev_edge[v] = idx
                        heapq.heappush(heap, (nd, v))
            if prev_edge[sink] == -1:
                raise TransportError("internal error: transport network infeasible")
            d_sink = dist[sink]
            for i in range(n):
                self.potential[i] += min(dist[i], d_sink)
            bottleneck = need - pushed
            v = sink
            while v != source:
                idx = prev_edge[v]
                bottleneck = min(bottleneck, self.cap[idx])
                v = self.to[idx ^ 1]
            v = sink
            while v != source:
                idx = prev_edge[v]
                self.cap[idx] -= bottleneck
                self.cap[idx ^ 1] += bottleneck
                flow_on[idx] = flow_on.get(idx, 0) + bottleneck
                v = self.to[idx ^ 1]
            pushed += bottleneck
        return flow_on


def _integerize(weights: list[Fraction], precision: int) -> tuple[list[int], Fraction]:
    """Scale weights to integers: exactly by the common denominator when it
    fits `precision`, else by deterministic rounding at `precision`.
    Returns (integers, scale) with weight ~= integer / scale."""
    if not weights:
        return [], Fraction(1)
    den = 1
    for w in weights:
        den = den * w.denominator // math.gcd(den, w.denominator)
        if den > precision:
            break
    if den <= precision:
        out = [int(w * den) for w in weights]
        scale = Fraction(den)
    else:
        out = [int(round(w * precision)) for w in weights]
        scale = Fraction(precision)
        if any(o == 0 for o in out):
            raise TransportError("precision overflow: atom mass rounds to zero")
    g = 0
    for o in out:
        g = math.gcd(g, abs(o))
    if g > 1:
        out = [o // g for o in out]
        scale /= g
    return out, scale


def w11(mu: SignedPointMeasure, nu: SignedPointMeasure, precision: int = 10 ** 6,
        radius: float | None = None) -> float:
    """Generalized Wasserstein distance between signed point measures.

    With `radius` set, candidate transport arcs are limited to pairs within
    that distance, but the optimum is verified against every dense arc via
    the final potentials (violated arcs are added and the solve repeats), so
    the returned value is the exact dense optimum either way.
    """
    # side A = mu+ + nu-, side B = nu+ + mu-; shared-position mass cancels
    # (zero-cost self-transport is always optimal for a metric ground cost)
    a_atoms: dict[Point, Fraction] = {}
    b_atoms: dict[Point, Fraction] = {}
    for p, w in mu.positive_part() + nu.negative_part():
        a_atoms[p] = a_atoms.get(p, Fraction(0)) + w
    for p, w in nu.positive_part() + mu.negative_part():
        b_atoms[p] = b_atoms.get(p, Fraction(0)) + w
    for p in set(a_atoms) & set(b_atoms):
        c = min(a_atoms[p], b_atoms[p])
        a_atoms[p] -= c
        b_atoms[p] -= c
    side_a = sorted((p, w) for p, w in a_atoms.items() if w > 0)
    side_b = sorted((p, w) for p, w in b_atoms.items() if w > 0)
    if not side_a and not side_b:
        return 0.0
    # the problem is side-symmetric; solve a canonical orientation bit-exactly
    if (side_b, side_a) < (side_a, side_b):
        side_a, side_b = side_b, side_a

    masses, scale = _integerize([w for _, w in side_a] + [w for _, w in side_b], precision)
    a_mass = masses[: len(side_a)]
    b_mass = masses[len(side_a):]
    pa = [p for p, _ in side_a]
    pb = [p for p, _ in side_b]

    dense = radius is None
    if dense:
        candidate = {(i, j) for i in range(len(pa)) for j in range(len(pb))}
    else:
        candidate = set()
        if pa and pb:
            arr_a = np.array([[float(x) for x in p] for p in pa])
            arr_b = np.array([[float(x) for x in p] for p in pb])
            r2 = radius * radius
            for i in range(len(pa)):
                for j in np.nonzero(np.sum((arr_b - arr_a[i]) ** 2, axis=1) <= r2)[0]:
                    candidate.add((i, int(j)))

    for _ in range(1 + (0 if dense else 50)):
        value, pot_a, pot_b = _solve_once(pa, pb, a_mass, b_mass, candidate)
        if dense:
            break
        viol = _violated_arcs(pa, pb, pot_a, pot_b, candidate)
        if not viol:
            break
        candidate |= viol
    else:
        raise TransportError("arc generation failed to converge")
    return value / float(scale)


def _solve_once(pa, pb, a_mass, b_mass, candidate):
    n_a, n_b = len(pa), len(pb)
    source, sink, void = n_a + n_b, n_a + n_b + 1, n_a + n_b + 2
    net = _MinCostFlow(n_a + n_b + 3)
    total_a, total_b = sum(a_mass), sum(b_mass)
    for i in range(n_a):
        net.add_edge(source, i, a_mass[i], 0.0)
    for j in range(n_b):
        net.add_edge(n_a + j, sink, b_mass[j], 0.0)
    arc_flow_edges = []
    for i, j in sorted(candidate):
        cost = min(_dist(pa[i], pb[j]), 2.0)
        arc_flow_edges.append(net.add_edge(i, n_a + j, a_mass[i], cost))
    for i in range(n_a):
        net.add_edge(i, void, a_mass[i], 1.0)      # deletion
    for j in range(n_b):
        net.add_edge(void, n_a + j, b_mass[j], 1.0)  # creation
    if total_b > total_a:
        net.add_edge(source, void, total_b - total_a, 0.0)
    elif total_a > total_b:
        net.add_edge(void, sink, total_a - total_b, 0.0)

    flows = net.solve(source, sink, max(total_a, total_b))
    value = math.fsum(net.cost[idx] * f for idx, f in sorted(flows.items())
                      if f > 0 and net.cost[idx] != 0.0)
    pot_a = net.potential[:n_a]
    pot_b = net.potential[n_a:n_a + n_b]
    return value, pot_a, pot_b


def _violated_arcs(pa, pb, pot_a, pot_b, candidate):
    """Dense arcs whose reduced cost is negative under the final potentials."""
    arr_a = np.array([[float(x) for x in p] for p in pa])
    arr_b = np.array([[float(x) for x in p] for p in pb])
    out = set()
    pa_arr = np.array(pot_a)
    pb_arr = np.array(pot_b)
    for i in range(len(pa)):
        d = np.minimum(np.sqrt(np.sum((arr_b - arr_a[i]) ** 2, axis=1)), 2.0)
        reduced = d + pa_arr[i] - pb_arr
        for j in np.nonzero(reduced < -1e-9)[0]:
            if (i, int(j)) not in candidate:
                out.add((i, int(j)))
    return out


# -- measures from flows -------------------------------------------------------


def flow_to_component_measures(t: Tiling, n: int) -> tuple[SignedPointMeasure, ...]:
    """Component measures of the scale-n tiling flow.

    Every region edge parallel to eta_i contributes an atom at its scaled
    midpoint with weight (2/n^3) f(e), where f is 5/6 on matched edges and
    -1/6 otherwise, signed by the even->odd orientation relative to +eta_i.
    """
    region = t.region
    tiles = t.tiles
    half = Fraction(1, 2)
    out = []
    for i, axis in enumerate(AXES):
        atoms = []
        for c in region.sorted_cells():
            other = add(c, axis)
            if region.reduce(other) not in region.cells:
                continue
            if region.is_torus and other not in region.cells:
                continue  # wrap edges have no geometric midpoint; skip on tori
            even, d = (c, axis) if parity(c) == 0 else (other, (-axis[0], -axis[1], -axis[2]))
            sign = 1 if parity(c) == 0 else -1
            f = Fraction(5, 6) if (region.reduce(even), d) in tiles else Fraction(-1, 6)
            w = Fraction(2, n ** 3) * sign * f
            mid = (Fraction(c[0]) + half * axis[0], Fraction(c[1]) + half * axis[1],
                   Fraction(c[2]) + half * axis[2])
            atoms.append((tuple(x / n for x in mid), w))
        out.append(SignedPointMeasure.from_atoms(atoms))
    return tuple(out)


def constant_flow_measures(v, box_cells, n: int) -> tuple[SignedPointMeasure, ...]:
    """Component measures of the constant flow v sampled on the scale-n
    edge-midpoint lattice of `box_cells` (weight v_i / n^3 per eta_i edge)."""
    v = tuple(Fraction(x) for x in v)
    cells = set(box_cells)
    half = Fraction(1, 2)
    out = []
    for i, axis in enumerate(AXES):
        atoms = []
        for c in sorted(cells):
            if add(c, axis) not in cells:
                continue
            mid = (Fraction(c[0]) + half * axis[0], Fraction(c[1]) + half * axis[1],
                   Fraction(c[2]) + half * axis[2])
            atoms.append((tuple(x / n for x in mid), v[i] / n ** 3))
        out.append(SignedPointMeasure.from_atoms(atoms))
    return tuple(out)


def d_w(f_measures, g_measures, precision: int = 10 ** 6, radius: float | None = None) -> float:
    """Flow distance: sum of component generalized Wasserstein distances."""
    if len(f_measures) != 3 or len(g_measures) != 3:
        raise TransportError("flows are triples of component measures")
    return sum(w11(f_measures[i], g_measures[i], precision, radius) for i in range(3))


def box_discrepancy_bound(f_measures, g_measures, box_side) -> float:
    """Upper bound M (10 eps^4 + delta) per component, summed.

    The common support is partitioned into axis cubes of side `box_side`
    (diameter eps = box_side * sqrt(3)); delta is the max per-box mass
    discrepancy of that component. Dominates d_W on measures that are
    components of tiling or asymptotic flows.
    """
    box_side = Fraction(box_side)
    pts = [p for m in (*f_measures, *g_measures) for p, _ in m.atoms]
    if not pts:
        return 0.0
    lo = [min(p[i] for p in pts) for i in range(3)]
    hi = [max(p[i] for p in pts) for i in range(3)]
    counts = [int(math.ceil((hi[i] - lo[i]) / box_side)) + 1 for i in range(3)]
    m_boxes = counts[0] * counts[1] * counts[2]
    eps = float(box_side) * math.sqrt(3.0)
    total = 0.0
    for comp in range(3):
        cells_f: dict[tuple[int, int, int], Fraction] = {}
        cells_g: dict[tuple[int, int, int], Fraction] = {}
        for store, measure in ((cells_f, f_measures[comp]), (cells_g, g_measures[comp])):
            for p, w in measure.atoms:
                key = tuple(int((p[i] - lo[i]) // box_side) for i in range(3))
                store[key] = store.get(key, Fraction(0)) + w
        delta = Fraction(0)
        for key in set(cells_f) | set(cells_g):
            delta = max(delta, abs(cells_f.get(key, Fraction(0)) - cells_g.get(key, Fraction(0))))
        total += m_boxes * (10.0 * eps ** 4 + float(delta))
    return total


def measures_to_csv(measures, path: str) -> None:
    with open(path, "w") as f:
        f.write("component,x,y,z,weight\n")
        for i, m in enumerate(measures):
            for p, w in m.atoms:
                f.write(f"{i},{float(p[0])!r},{float(p[1])!r},{float(p[2])!r},{float(w)!r}\n")
