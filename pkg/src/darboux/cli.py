"""Command line interface.

Every verb reads one scene file (``-`` for stdin), prints a summary or
the JSON report (``--json``), and with ``--report PATH`` writes the
report to ``PATH`` plus a PNG figure next to it.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .cyclide import Cyclide, DegenerateCyclideError, Pencil, to_pencil
from .design import DesignError, DesignWarning
from .families import (
    CircleFamily,
    FamilyError,
    canal_geometry,
    extract_families,
    family_axis_geometry,
)
from .io import (
    ExportError,
    Report,
    SceneError,
    build_report,
    export_obj,
    export_svg,
    parse_scene,
    scene_cyclide,
    scene_for_cyclide,
    write_report,
    write_scene,
)
from .param import ParamError, angle_grid, eval_map, parametrize, sample_mesh, total_degree
from .tolerance import Tolerance
from .webs import (
    WebError,
    closure_errors,
    default_seed,
    discrete_web,
    finite_web,
    node_residual,
    web_mesh,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class _Context:
    def __init__(self, args):
        self.args = args
        text = sys.stdin.read() if args.scene == "-" else _read(args.scene)
        self.scene = parse_scene(text)
        tol = self.scene.tolerance
        if args.tol is not None:
            tol = tol.with_zero(args.tol)
        self.tol: Tolerance = tol
        self.rng = np.random.default_rng(args.seed)
        self.out = self.scene.output
        self._D = None
        self.design = None

    @property
    def cyclide(self) -> Cyclide:
        if self._D is None:
            self._D, self.design = scene_cyclide(self.scene)
        return self._D

    @property
    def pencil(self) -> Pencil:
        return self.scene.pencil if self.scene.pencil is not None else to_pencil(self.cyclide)

    def families(self) -> list[CircleFamily]:
        return extract_families(self.pencil, self.tol)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise SceneError(f"cannot read scene: {exc.strerror}", path) from exc


def _triples(ctx: _Context, fams, only_webs: bool = True):
    from itertools import combinations

    from .webs import UnsupportedTripleError, classify_triple

    want = ctx.args.triple or ctx.out.get("triple")
    if want is not None:
        ids = [int(i) for i in want]
        if len(set(ids)) != 3 or any(i < 0 or i >= len(fams) for i in ids):
            raise SceneError(f"triple {ids} must name three distinct families 0..{len(fams) - 1}", "--triple")
        return [tuple(fams[i] for i in ids)]
    out = []
    for tri in combinations(fams, 3):
        try:
            wt = classify_triple(*tri)
        except UnsupportedTripleError:
            continue
        if not only_webs or wt != "NonWeb":
            out.append(tri)
    return out


def _seed(ctx: _Context, D: Cyclide, tri, N: int):
    cand = None
    if ctx.args.seed is not None:
        V = sample_mesh(D, 12, ctx.tol).vertices
        cand = V[ctx.rng.choice(len(V), size=min(24, len(V)), replace=False)]
    return default_seed(D, tri, N, cand)


# -- verbs -------------------------------------------------------------------------


def cmd_classify(ctx: _Context) -> tuple[Report, str]:
    r = build_report(ctx.pencil, ctx.tol)
    lines = [f"classification: {r.classification}"]
    for e in r.eigenvalues:
        lines.append(f"  t = {e['t']:+.9g}  mult {e['multiplicity']}  inertia {tuple(e['inertia'])}  {e['role']}")
    return r, "\n".join(lines)


def _family_geometry(fams) -> list[dict]:
    out = []
    done = set()
    for F in fams:
        if F.id in done:
            continue
        if F.is_single:
            g = canal_geometry(F)
            item = {"families": [F.id], "rotational": g.rotational, "b": _circle_json(g.b)}
            if g.g.is_line:
                item["axis"] = {"point": g.g.line[0], "direction": g.g.line[1]}
            else:
                item["conic"] = {"origin": g.g.origin, "e1": g.g.e1, "e2": g.g.e2, "matrix": g.g.matrix}
            done.add(F.id)
        else:
            P = fams[F.partner]
            ax = family_axis_geometry(F, P)
            item = {"families": [F.id, P.id], "B": {"penta": ax.B.penta, "kind": ax.B.kind()}}
            if ax.G is not None:
                item["axis_quadric"] = ax.G / max(float(np.max(np.abs(ax.G))), 1e-300)
            done.update((F.id, P.id))
        out.append(item)
    return out


def _circle_json(c) -> dict:
    v = c.view
    d = {"kind": v.kind}
    for k in ("center", "radius", "normal", "direction"):
        val = getattr(v, k)
        if val is not None:
            d[k] = val
    return d


def cmd_families(ctx: _Context) -> tuple[Report, str]:
    r = build_report(ctx.pencil, ctx.tol)
    lines = [f"classification: {r.classification}", f"families: {len(r.families)}"]
    if r.classification == "irreducible" and r.families:
        fams = ctx.families()
        r.extras["geometry"] = _family_geometry(fams)
    for f in r.families:
        partner = "" if f["partner"] is None else f"  partner {f['partner']}"
        lines.append(f"  [{f['id']}] {f['class']:8s} t = {f['t']:+.9g}  inertia {tuple(f['inertia'])}{partner}")
    return r, "\n".join(lines)


def cmd_webs(ctx: _Context) -> tuple[Report, str]:
    D = ctx.cyclide
    r = build_report(ctx.pencil, ctx.tol)
    lines = [f"triples: {len(r.webs)}"]
    lines += [f"  {k}: {v}" for k, v in r.web_counts.items() if v]
    if r.classification != "irreducible":
        return r, "\n".join(lines)
    fams = ctx.families()
    N = ctx.args.N or ctx.out.get("N") or (12 if ctx.args.finite else 6)
    finite = ctx.args.finite or ctx.out.get("finite", False)
    runs = []
    ctx.webs = []
    for tri in _triples(ctx, fams, only_webs=True):
        if finite:
            w = finite_web(D, tri, N=N)
        else:
            O, A1, _ = _seed(ctx, D, tri, N)
            w = discrete_web(D, tri, O, A1, N=N)
        item = {
            "triple": list(w.triple),
            "type": w.type,
            "N": N,
            "complete": w.complete,
            "nodes": len(w.nodes),
            "circles": [len(w.circles.get(k, {})) for k in (1, 2, 3)],
        }
        if w.complete and w.nodes:
            item["node_residual"] = node_residual(D, w)
            item["incidence_defect"] = w.incidence_defect()
        if w.message:
            item["message"] = w.message
        if finite:
            item["sigma"] = w.sigma
            item["iterations"] = w.iterations
            if w.closed:
                item["closure_errors"] = list(closure_errors(w))
                item["euler"] = web_mesh(w)[2]
        runs.append(item)
        ctx.webs.append(w)
        status = "ok" if w.complete else "incomplete"
        lines.append(f"  {w.type} {w.triple}: {len(w.nodes)} nodes, {status}")
    r.extras["generated"] = runs
    return r, "\n".join(lines)


def cmd_design(ctx: _Context) -> tuple[Report, str]:
    kind = ctx.args.kind
    if ctx.scene.design is None:
        raise SceneError("scene has no design block", "$.design")
    if ctx.scene.design["kind"] != kind:
        raise SceneError(f"scene holds a {ctx.scene.design['kind']} design, not {kind}", "$.design.kind")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DesignWarning)
        D = ctx.cyclide
    r = build_report(ctx.pencil, ctx.tol)
    r.extras["cyclide"] = {"lam": D.lam, "L": D.L, "Qquad": D.Qquad, "Qlin": D.Qlin, "Qconst": D.Qconst}
    r.notes.extend(str(w.message) for w in caught)
    if ctx.args.output:
        Path(ctx.args.output).write_text(write_scene(scene_for_cyclide(D, ctx.scene.tolerance)))
    lines = [f"designed {kind} cyclide: {r.classification}, {len(r.families)} families"]
    lines += [f"  warning: {n}" for n in r.notes]
    return r, "\n".join(lines)


def cmd_param(ctx: _Context) -> tuple[Report, str]:
    D = ctx.cyclide
    r = build_report(ctx.pencil, ctx.tol)
    m = parametrize(ctx.pencil, ctx.tol)
    n = ctx.args.grid
    g = angle_grid(n)
    worst, count = 0.0, 0
    for s in g:
        for t in g:
            for b in ((1,) if m.is_rational else (1, -1)):
                x = eval_map(m, s, t, b)
                if x is None or not np.all(np.isfinite(x)):
                    continue
                count += 1
                worst = max(worst, float(D.residual(x)))
    degrees = {k: total_degree(v) for k, v in m.polynomials().items()}
    r.extras["parametrization"] = {
        "case": m.case,
        "t": m.t_root,
        "degrees": degrees,
        "grid": n,
        "points": count,
        "max_residual": worst,
        "polynomials": m.polynomials(),
    }
    lines = [
        f"parametrization: {m.case} (cone t = {m.t_root:+.9g})",
        "  degrees: " + ", ".join(f"{k}={v}" for k, v in degrees.items()),
        f"  {count} grid points, max residual {worst:.3g}",
    ]
    return r, "\n".join(lines)


def cmd_mesh(ctx: _Context) -> tuple[Report, str]:
    D = ctx.cyclide
    res = ctx.args.res or ctx.out.get("res", 32)
    mesh = sample_mesh(D, res, ctx.tol)
    Path(ctx.args.output).write_bytes(export_obj(mesh))
    ctx.mesh = mesh
    r = build_report(ctx.pencil, ctx.tol)
    r.extras["mesh"] = {
        "path": str(ctx.args.output),
        "res": res,
        "vertices": len(mesh.vertices),
        "triangles": len(mesh.triangles),
        "euler": mesh.euler_characteristic,
        "boundary_edges": mesh.boundary_edges(),
        "max_residual": float(np.max(D.residual(mesh.vertices))),
    }
    e = r.extras["mesh"]
    return r, f"wrote {ctx.args.output}: {e['vertices']} vertices, {e['triangles']} triangles, euler {e['euler']}"


def cmd_svg(ctx: _Context) -> tuple[Report, str]:
    D = ctx.cyclide
    r = build_report(ctx.pencil, ctx.tol)
    if r.classification != "irreducible":
        raise FamilyError("no circle families to draw")
    fams = ctx.families()
    tris = _triples(ctx, fams, only_webs=True)
    if not tris:
        raise WebError("the cyclide carries no 3-web")
    N = ctx.args.N or ctx.out.get("N", 6)
    O, A1, _ = _seed(ctx, D, tris[0], N)
    w = discrete_web(D, tris[0], O, A1, N=N)
    Path(ctx.args.output).write_bytes(export_svg(w, ctx.out.get("view")))
    ctx.webs = [w]
    r.extras["svg"] = {"path": str(ctx.args.output), "triple": list(w.triple), "type": w.type, "N": N}
    return r, f"wrote {ctx.args.output}: {w.type} web on {w.triple}"


COMMANDS = {
    "classify": cmd_classify,
    "families": cmd_families,
    "webs": cmd_webs,
    "design": cmd_design,
    "param": cmd_param,
    "mesh": cmd_mesh,
    "svg": cmd_svg,
}


# -- figures ---------------------------------------------------------------------


def _figure(ctx: _Context, path: Path) -> Path | None:
    from . import plotting

    png = path.with_suffix(".png")
    webs = getattr(ctx, "webs", None)
    if webs:
        return plotting.plot_web(webs[0], png)
    mesh = getattr(ctx, "mesh", None)
    if mesh is not None:
        return plotting.plot_mesh(mesh, png)
    try:
        mesh = sample_mesh(ctx.cyclide, 24, ctx.tol)
    except ParamError:
        mesh = None
    try:
        fams = ctx.families()
    except FamilyError:
        fams = []
    if fams:
        arcs = getattr(ctx.design, "arcs", ())
        return plotting.plot_families(fams, png, mesh, arcs=arcs)
    if mesh is not None:
        return plotting.plot_mesh(mesh, png)
    return None


# -- parser -------------------------------------------------------------------------


def _triple_arg(text: str) -> list[int]:
    try:
        ids = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected three comma-separated integers") from None
    if len(ids) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated integers")
    return ids


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0.0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=argparse.SUPPRESS, help="relative zero threshold")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized web seeds")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print the JSON report")
    common.add_argument("--report", metavar="PATH", default=argparse.SUPPRESS, help="write the JSON report and a PNG figure")

    p = argparse.ArgumentParser(prog="darboux", description="Darboux cyclides, their circle families and 3-webs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--tol", type=_positive_float, default=None, help=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--json", action="store_true", default=False, help=argparse.SUPPRESS)
    p.add_argument("--report", metavar="PATH", default=None, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    def verb(name, help_):
        s = sub.add_parser(name, help=help_, parents=[common])
        return s

    verb("classify", "trivial / reducible / irreducible and the cones of the pencil").add_argument("scene")
    verb("families", "real circle families with their classes and partners").add_argument("scene")
    w = verb("webs", "web type of every triple and generated discrete webs")
    w.add_argument("scene")
    w.add_argument("--triple", type=_triple_arg, default=None, help="family ids i,j,k")
    w.add_argument("--N", type=int, default=None, help="circles per family")
    w.add_argument("--finite", action="store_true", help="close the web around a ring surface")
    d = verb("design", "build a cyclide from a design input")
    d.add_argument("kind", choices=["three-circles", "quad", "canal"])
    d.add_argument("scene")
    d.add_argument("-o", "--output", default=None, help="write the designed cyclide as a scene")
    pa = verb("param", "square-root-rational parametrization")
    pa.add_argument("scene")
    pa.add_argument("--grid", type=int, default=32, help="grid size of the residual check")
    m = verb("mesh", "triangulate the cyclide into an OBJ file")
    m.add_argument("scene")
    m.add_argument("-o", "--output", required=True)
    m.add_argument("--res", type=int, default=None)
    sv = verb("svg", "draw a discrete web as SVG")
    sv.add_argument("scene")
    sv.add_argument("-o", "--output", required=True)
    sv.add_argument("--triple", type=_triple_arg, default=None)
    sv.add_argument("--N", type=int, default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for k in ("triple", "N", "finite"):
        if not hasattr(args, k):
            setattr(args, k, None)
    if args.N is not None and args.N < 1:
        parser.error("--N must be positive")
    try:
        ctx = _Context(args)
        report, text = COMMANDS[args.command](ctx)
        if args.report:
            path = Path(args.report)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(write_report(report))
            fig = _figure(ctx, path)
            if fig is not None:
                text += f"\nreport: {path}, figure: {fig}"
        print(write_report(report) if args.json else text, end="" if args.json else "\n")
        return EXIT_OK
    except (SceneError, DesignError, DegenerateCyclideError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FamilyError, ParamError, WebError, ExportError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
