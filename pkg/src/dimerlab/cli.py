"""Command-line surface: sampling, counting, tileability checks, patching,
twist, entropy, chain swapping, flow distances, and mesh export.

Exit codes: 0 success, 2 certificate / negative result, 64 usage error,
65 data error. All randomness is seeded; reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .lattice import Region, region_from_file
from .tiling import Tiling, tiling_from_file, tau_v, periodic_brickwork

EXIT_OK = 0
EXIT_CERT = 2
EXIT_USAGE = 64
EXIT_DATA = 65

# six tile directions -> RGB, matching the direction-coloring convention
DIR_COLORS = {
    (1, 0, 0): (214, 39, 40),
    (-1, 0, 0): (255, 152, 150),
    (0, 1, 0): (44, 160, 44),
    (0, -1, 0): (152, 223, 138),
    (0, 0, 1): (31, 119, 180),
    (0, 0, -1): (174, 199, 232),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EXIT_USAGE)


def _parse_svec(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated rationals: {text}")
    return tuple(Fraction(p.strip()) for p in parts)


def export_mesh(t: Tiling, fmt: str) -> bytes:
    """One axis-aligned box per tile; color keyed to the tile direction."""
    if fmt == "json":
        return (json.dumps(t.to_json()) + "\n").encode()
    boxes = []
    for even, d in sorted(t.tiles):
        odd = t.region.reduce((even[0] + d[0], even[1] + d[1], even[2] + d[2]))
        lo = [min(even[i], odd[i]) - 0.5 for i in range(3)]
        hi = [max(even[i], odd[i]) + 0.5 for i in range(3)]
        boxes.append((lo, hi, DIR_COLORS[d]))
    verts = []
    faces = []
    for lo, hi, color in boxes:
        base = len(verts)
        corners = [(x, y, z) for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])]
        verts.extend((c, color) for c in corners)
        quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
        faces.extend(tuple(base + i for i in q) for q in quads)
    if fmt == "obj":
        lines = [f"v {v[0][0]:.6f} {v[0][1]:.6f} {v[0][2]:.6f} "
                 f"{v[1][0] / 255:.6f} {v[1][1] / 255:.6f} {v[1][2] / 255:.6f}" for v in verts]
        lines += ["f " + " ".join(str(i + 1) for i in q) for q in faces]
        return ("\n".join(lines) + "\n").encode()
    if fmt == "ply":
        header = [
            "ply", "format ascii 1.0",
            f"element vertex {len(verts)}",
            "property float x", "property float y", "property float z",
            "property uchar red", "property uchar green", "property uchar blue",
            f"element face {len(faces)}",
            "property list uchar int vertex_indices",
            "end_header",
        ]
        body = [f"{v[0][0]:.6f} {v[0][1]:.6f} {v[0][2]:.6f} {v[1][0]} {v[1][1]} {v[1][2]}"
                for v in verts]
        body += ["4 " + " ".join(str(i) for i in q) for q in faces]
        return ("\n".join(header + body) + "\n").encode()
    raise ValueError(f"unknown format {fmt!r}")


def _load_region(path: str) -> Region:
    try:
        return region_from_file(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        print(f"error: bad region file {path}: {exc}", file=sys.stderr)
        sys.exit(EXIT_DATA)


def _cmd_sample(args) -> int:
    from .dynamics import sample_uniform

    region = _load_region(args.region)
    t = sample_uniform(region, int(float(args.steps)), args.seed)
    payload = export_mesh(t, args.export)
    if args.out:
        with open(args.out, "wb") as f:
            f.write(payload)
    else:
        sys.stdout.buffer.write(payload)
    return EXIT_OK


def _cmd_count(args) -> int:
    from .entropy import count_tilings, count_tilings_dfs, count_torus_by_winding

    region = _load_region(args.region)
    if args.by_winding:
        counts = count_torus_by_winding(region)
        print(json.dumps({str(list(k)): v for k, v in sorted(counts.items())}))
    else:
        n = count_tilings_dfs(region) if region.is_torus else count_tilings(region)
        print(n)
    return EXIT_OK


def _cmd_check(args) -> int:
    from .tileability import HallCertificate, find_matching

    region = _load_region(args.region)
    result = find_matching(region)
    if isinstance(result, HallCertificate):
        payload = json.dumps(result.to_json())
        if args.out:
            with open(args.out, "w") as f:
                f.write(payload)
        print(payload)
        return EXIT_CERT
    if args.out:
        with open(args.out, "w") as f:
            json.dump(result.to_json(), f)
    print("tileable")
    return EXIT_OK


def _cmd_patch(args) -> int:
    from .tileability import HallCertificate, patch

    outer = tau_v(_parse_svec(args.outer_v), phase=args.outer_phase) \
        if args.outer_v else periodic_brickwork(tuple(json.loads(args.outer_dir)))
    inner = tau_v(_parse_svec(args.inner_v), phase=args.inner_phase) \
        if args.inner_v else periodic_brickwork(tuple(json.loads(args.inner_dir)))
    if args.inner_shift:
        inner = inner.translate(tuple(json.loads(args.inner_shift)))
    result = patch(outer, inner, args.n, Fraction(args.delta))
    if isinstance(result, HallCertificate):
        print(json.dumps(result.to_json()))
        return EXIT_CERT
    print(json.dumps({"tiles": len(result.tiles)}))
    return EXIT_OK


def _cmd_twist(args) -> int:
    from .dynamics import twist

    t = tiling_from_file(args.tiling)
    value = twist(t)
    if value.denominator == 1:
        print(int(value))
    else:
        print(f"warning: non-integral twist {value} (region outside the D x [1,N] class)",
              file=sys.stderr)
        print(str(value))
    return EXIT_OK


def _cmd_entropy(args) -> int:
    from .entropy import empirical_ent, ent_boundary

    s = _parse_svec(args.s)
    rows = []
    if args.mode == "boundary":
        est = ent_boundary(s)
        rows.append(("boundary", "-", est.value))
    else:
        sizes = tuple(int(x) for x in args.sizes.split(",")) if args.sizes else (2, 4)
        est = empirical_ent(s, sizes)
        for k, v in est.finite_sizes:
            rows.append(("empirical", str(k), v))
        rows.append(("extrapolated", "-", est.value))
    out = ["mode,size,value"] + [f"{a},{b},{c!r}" for a, b, c in rows]
    text = "\n".join(out) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_swap(args) -> int:
    from .doubledimer import chain_swap, superpose
    from .flows import winding

    t1 = tiling_from_file(args.t1)
    t2 = tiling_from_file(args.t2)
    lines = ["trial,a1_x,a1_y,a1_z,a2_x,a2_y,a2_z"]
    for trial in range(args.trials):
        s1, s2 = chain_swap(t1, t2, args.p, (args.seed, trial))
        a1, a2 = winding(s1), winding(s2)
        lines.append(f"{trial},{a1[0]},{a1[1]},{a1[2]},{a2[0]},{a2[1]},{a2[2]}")
    text = "\n".join(lines) + "\n"
    if args.report:
        with open(args.report, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_distance(args) -> int:
    from .transport import d_w, flow_to_component_measures, constant_flow_measures

    def load_flow(path):
        with open(path) as f:
            data = json.load(f)
        if "tiles" in data:
            t = Tiling.from_json(data)
            return flow_to_component_measures(t, data.get("scale", 1))
        if data.get("kind") == "constant":
            cells = {tuple(c) for c in data["cells"]}
            return constant_flow_measures(tuple(Fraction(x) for x in data["v"]),
                                          cells, data.get("scale", 1))
        raise ValueError("flow file must be a tiling or a constant flow spec")

    try:
        f1 = load_flow(args.flow1)
        f2 = load_flow(args.flow2)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    precision = int(round(1.0 / float(args.precision)))
    print(f"{d_w(f1, f2, precision=precision)!r}")
    return EXIT_OK


def _cmd_export(args) -> int:
    t = tiling_from_file(args.tiling)
    payload = export_mesh(t, args.format)
    if args.out:
        with open(args.out, "wb") as f:
            f.write(payload)
    else:
        sys.stdout.buffer.write(payload)
    return EXIT_OK


def build_parser() -> _Parser:
    p = _Parser(prog="dimerlab", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="uniform sampling by loop shifts")
    sp.add_argument("--region", required=True)
    sp.add_argument("--steps", required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out")
    sp.add_argument("--export", choices=("json", "ply", "obj"), default="json")
    sp.set_defaults(func=_cmd_sample)

    cp = sub.add_parser("count", help="exact tiling counts")
    cp.add_argument("--region", required=True)
    cp.add_argument("--by-winding", action="store_true")
    cp.set_defaults(func=_cmd_count)

    kp = sub.add_parser("check", help="tileability check; exit 2 with a certificate")
    kp.add_argument("--region", required=True)
    kp.add_argument("--out")
    kp.set_defaults(func=_cmd_check)

    pp = sub.add_parser("patch", help="annulus patching experiment")
    pp.add_argument("--n", type=int, required=True)
    pp.add_argument("--delta", required=True)
    pp.add_argument("--outer-v")
    pp.add_argument("--outer-dir", default="[1, 0, 0]")
    pp.add_argument("--outer-phase", type=int, default=0)
    pp.add_argument("--inner-v")
    pp.add_argument("--inner-dir", default="[1, 0, 0]")
    pp.add_argument("--inner-phase", type=int, default=0)
    pp.add_argument("--inner-shift")
    pp.set_defaults(func=_cmd_patch)

    tp = sub.add_parser("twist", help="twist invariant of a tiling")
    tp.add_argument("--tiling", required=True)
    tp.set_defaults(func=_cmd_twist)

    ep = sub.add_parser("entropy", help="boundary formula / empirical estimates")
    ep.add_argument("--mode", choices=("boundary", "empirical"), required=True)
    ep.add_argument("--s", required=True, help="mean current, e.g. 1/3,1/3,1/3")
    ep.add_argument("--sizes")
    ep.add_argument("--out")
    ep.set_defaults(func=_cmd_entropy)

    wp = sub.add_parser("swap", help="chain-swap trials on a torus pair")
    wp.add_argument("--t1", required=True)
    wp.add_argument("--t2", required=True)
    wp.add_argument("--p", type=float, required=True)
    wp.add_argument("--seed", type=int, required=True)
    wp.add_argument("--trials", type=int, default=1)
    wp.add_argument("--report")
    wp.set_defaults(func=_cmd_swap)

    dp = sub.add_parser("distance", help="Wasserstein flow distance")
    dp.add_argument("--flow1", required=True)
    dp.add_argument("--flow2", required=True)
    dp.add_argument("--precision", default="1e-6")
    dp.set_defaults(func=_cmd_distance)

    xp = sub.add_parser("export", help="tiling to PLY/OBJ/JSON mesh")
    xp.add_argument("--tiling", required=True)
    xp.add_argument("--format", choices=("ply", "obj", "json"), default="ply")
    xp.add_argument("--out")
    xp.set_defaults(func=_cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
