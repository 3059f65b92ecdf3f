"""Scene and report files, OBJ meshes and SVG drawings.

Scenes and reports are JSON documents tagged ``"schema": "cyclide-webs/1"``.
A scene carries exactly one geometry source (``cyclide``, ``pencil`` or
``design``) plus optional ``tolerance`` and ``output`` blocks.  Floats are
always written with 9 significant digits, so writing is idempotent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from itertools import combinations
from typing import Any

import jsonschema
import numpy as np

from . import algebra
from .cyclide import Cyclide, Pencil, classify, from_pencil, to_pencil
from .design import (
    DesignInputQuad,
    DesignInputThreeCircles,
    canal_cyclide,
    conic_circle,
    conic_ellipse,
    cyclide_from_quad,
    cyclide_from_three_circles,
    planar_circle,
)
from .families import Conic, FamilyError, extract_families, family_summary
from .moebius import MCircle, MSphere, circle_through_points, minkowski
from .param import Mesh
from .tolerance import DEFAULT, Tolerance
from .webs import WEB_TYPES, UnsupportedTripleError, WebInstance, classify_triple

SCHEMA_ID = "cyclide-webs/1"
SYMMETRY_TOL = 1e-12


class SceneError(ValueError):
    """Invalid scene or report document.

    Attributes
    ----------
    path : str
        Location of the problem, ``$`` for the document root.
    line, column : int or None
        Position in the text, for JSON syntax errors.
    """

    def __init__(self, message: str, path: str = "$", line: int | None = None, column: int | None = None):
        self.path = path
        self.line = line
        self.column = column
        where = f"line {line}, column {column}" if line is not None else path
        super().__init__(f"{where}: {message}")


class ExportError(ValueError):
    pass


# -- schema ---------------------------------------------------------------------

_NUM = {"type": "number"}
_VEC3 = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}
_VEC5 = {"type": "array", "items": _NUM, "minItems": 5, "maxItems": 5}
_MAT3 = {"type": "array", "items": _VEC3, "minItems": 3, "maxItems": 3}
_MAT5 = {"type": "array", "items": _VEC5, "minItems": 5, "maxItems": 5}


def _obj(props: dict, required: list[str]) -> dict:
    return {"type": "object", "properties": props, "required": required, "additionalProperties": False}


_SPHERE = {
    "oneOf": [
        _obj({"center": _VEC3, "r2": _NUM}, ["center", "r2"]),
        _obj({"plane": _obj({"normal": _VEC3, "offset": _NUM}, ["normal", "offset"])}, ["plane"]),
        _obj({"penta": _VEC5}, ["penta"]),
    ]
}
_CIRCLE = {
    "oneOf": [
        _obj({"points": {"type": "array", "items": _VEC3, "minItems": 3, "maxItems": 3}}, ["points"]),
        _obj({"center": _VEC3, "r2": _NUM, "normal": _VEC3}, ["center", "r2", "normal"]),
        _obj({"hyperplanes": {"type": "array", "items": _VEC5, "minItems": 2, "maxItems": 2}}, ["hyperplanes"]),
    ]
}
_POS = {"type": "number", "exclusiveMinimum": 0}
_CONIC = {
    "oneOf": [
        _obj({"origin": _VEC3, "e1": _VEC3, "e2": _VEC3, "matrix": _MAT3}, ["origin", "e1", "e2", "matrix"]),
        _obj({"circle": _obj({"center": _VEC3, "radius": _POS, "normal": _VEC3}, ["center", "radius"])}, ["circle"]),
        _obj(
            {"ellipse": _obj({"center": _VEC3, "a": _POS, "b": _POS, "e1": _VEC3, "e2": _VEC3}, ["center", "a", "b"])},
            ["ellipse"],
        ),
    ]
}
_DESIGN = {
    "oneOf": [
        _obj(
            {
                "kind": {"const": "three-circles"},
                "B": _SPHERE,
                "circles": {"type": "array", "items": _CIRCLE, "minItems": 3, "maxItems": 3},
            },
            ["kind", "B", "circles"],
        ),
        _obj(
            {
                "kind": {"const": "quad"},
                "B": _SPHERE,
                "corners": {"type": "array", "items": _VEC3, "minItems": 4, "maxItems": 4},
                "P": _VEC3,
            },
            ["kind", "B", "corners", "P"],
        ),
        _obj({"kind": {"const": "canal"}, "g": _CONIC, "b": _CIRCLE}, ["kind", "g", "b"]),
    ]
}
_TOL = _obj({k.name: _POS for k in fields(Tolerance)}, [])
_INT_POS = {"type": "integer", "minimum": 1}
_OUTPUT = _obj(
    {
        "res": {"type": "integer", "minimum": 4},
        "N": _INT_POS,
        "triple": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 3, "maxItems": 3},
        "finite": {"type": "boolean"},
        "view": _obj({"direction": _VEC3, "up": _VEC3, "width": _INT_POS, "height": _INT_POS}, []),
    },
    [],
)

SCENE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "cyclide": _obj(
            {"lam": _NUM, "L": _VEC3, "Qquad": _MAT3, "Qlin": _VEC3, "Qconst": _NUM},
            ["lam", "L", "Qquad", "Qlin", "Qconst"],
        ),
        "pencil": _obj({"A": _MAT5}, ["A"]),
        "design": _DESIGN,
        "tolerance": _TOL,
        "output": _OUTPUT,
    },
    "additionalProperties": False,
    "oneOf": [{"required": [k]} for k in ("cyclide", "pencil", "design")],
}

_INERTIA = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 3, "maxItems": 3}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "classification": {"enum": ["trivial", "reducible", "irreducible"]},
        "eigenvalues": {
            "type": "array",
            "items": _obj(
                {
                    "t": _NUM,
                    "multiplicity": _INT_POS,
                    "inertia": _INERTIA,
                    "role": {"enum": ["paired-pair", "special-pair", "single", "rejected"]},
                    "cone": _MAT5,
                },
                ["t", "multiplicity", "inertia", "role", "cone"],
            ),
        },
        "families": {
            "type": "array",
            "items": _obj(
                {
                    "id": {"type": "integer", "minimum": 0},
                    "t": _NUM,
                    "inertia": _INERTIA,
                    "class": {"enum": ["paired", "special", "single"]},
                    "branch": {"enum": [1, 2]},
                    "partner": {"type": ["integer", "null"]},
                },
                ["id", "t", "inertia", "class", "branch", "partner"],
            ),
        },
        "webs": {
            "type": "array",
            "items": _obj(
                {
                    "triple": {"type": "array", "items": {"type": "integer"}, "minItems": 3, "maxItems": 3},
                    "type": {"enum": list(WEB_TYPES) + ["Unsupported"]},
                },
                ["triple", "type"],
            ),
        },
        "web_counts": _obj({k: {"type": "integer", "minimum": 0} for k in WEB_TYPES}, list(WEB_TYPES)),
        "notes": {"type": "array", "items": {"type": "string"}},
        "extras": {"type": "object"},
    },
    "required": ["schema", "classification", "eigenvalues", "families", "webs", "web_counts"],
    "additionalProperties": False,
}

_SCENE_VALIDATOR = jsonschema.Draft202012Validator(SCENE_SCHEMA)
_REPORT_VALIDATOR = jsonschema.Draft202012Validator(REPORT_SCHEMA)


def _json_path(path) -> str:
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _load(text: str | bytes) -> Any:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(exc.msg, line=exc.lineno, column=exc.colno) from exc


def _validate(doc, validator: jsonschema.Draft202012Validator) -> None:
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if not errors:
        return
    err = errors[0]
    if err.validator == "oneOf" and not err.absolute_path and isinstance(doc, dict):
        present = [k for k in ("cyclide", "pencil", "design") if k in doc]
        msg = "no geometry source (cyclide, pencil or design)" if not present else (
            "exactly one geometry source is allowed, found " + ", ".join(present)
        )
        raise SceneError(msg)
    # descend into oneOf alternatives for a more specific message
    best = jsonschema.exceptions.best_match([err])
    raise SceneError(best.message, _json_path(best.absolute_path))


# -- floats -------------------------------------------------------------------------


def _round(x: float) -> float | None:
    if not math.isfinite(x):
        return None
    return float(f"{x:.9g}")


def _plain(v) -> Any:
    """JSON-ready copy with floats at 9 significant digits."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        r = _round(float(v))
        return 0.0 if r == 0.0 else r
    return v


def _dumps(doc) -> str:
    return json.dumps(_plain(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def close(a, b, rtol: float = 1e-8) -> bool:
    """Structural equality with floats compared to ``rtol`` relative to each array's scale."""
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(close(a[k], b[k], rtol) for k in a)
    if isinstance(a, (list, tuple, np.ndarray)) and isinstance(b, (list, tuple, np.ndarray)):
        try:
            x = np.asarray(a, dtype=float)
            y = np.asarray(b, dtype=float)
        except (TypeError, ValueError):
            return len(a) == len(b) and all(close(p, q, rtol) for p, q in zip(a, b))
        if x.shape != y.shape:
            return False
        scale = max(float(np.max(np.abs(x), initial=0.0)), float(np.max(np.abs(y), initial=0.0)), 1e-300)
        return bool(np.all(np.abs(x - y) <= rtol * scale))
    if isinstance(a, float) or isinstance(b, float):
        if a is None or b is None:
            return a is b
        return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)
    return a == b


# -- scenes -------------------------------------------------------------------------


@dataclass
class Scene:
    """Validated scene: one geometry source, tolerances and output options.

    ``design`` keeps the JSON form of a design input; :func:`design_input`
    turns it into objects.
    """

    source: str
    cyclide: Cyclide | None = None
    pencil: Pencil | None = None
    design: dict | None = None
    tolerance: Tolerance = DEFAULT
    output: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {"schema": SCHEMA_ID}
        if self.cyclide is not None:
            D = self.cyclide
            doc["cyclide"] = {"lam": D.lam, "L": D.L, "Qquad": D.Qquad, "Qlin": D.Qlin, "Qconst": D.Qconst}
        if self.pencil is not None:
            doc["pencil"] = {"A": self.pencil.A}
        if self.design is not None:
            doc["design"] = self.design
        tol = {f.name: getattr(self.tolerance, f.name) for f in fields(Tolerance)}
        tol = {k: v for k, v in tol.items() if v != getattr(DEFAULT, k)}
        if tol:
            doc["tolerance"] = tol
        if self.output:
            doc["output"] = self.output
        return _plain(doc)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scene):
            return NotImplemented
        return close(self.to_dict(), other.to_dict())


def _check_symmetric(M, path: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    scale = max(float(np.max(np.abs(M))), 1e-300)
    if np.max(np.abs(M - M.T)) > SYMMETRY_TOL * scale:
        raise SceneError("matrix is not symmetric", path)
    return M


def parse_scene(text: str | bytes) -> Scene:
    """Parse and validate a scene document.

    Raises
    ------
    SceneError
        On malformed JSON (with line and column), schema violations (with
        the JSON path), asymmetric matrices or a vanishing geometry.
    """
    doc = _load(text)
    _validate(doc, _SCENE_VALIDATOR)
    tol = Tolerance(**doc.get("tolerance", {}))
    output = doc.get("output", {})
    try:
        if "cyclide" in doc:
            c = doc["cyclide"]
            Q = _check_symmetric(c["Qquad"], "$.cyclide.Qquad")
            D = Cyclide(c["lam"], c["L"], Q, c["Qlin"], c["Qconst"])
            if D.scale == 0.0:
                raise SceneError("all cyclide coefficients vanish", "$.cyclide")
            return Scene("cyclide", cyclide=D, tolerance=tol, output=output)
        if "pencil" in doc:
            A = _check_symmetric(doc["pencil"]["A"], "$.pencil.A")
            return Scene("pencil", pencil=Pencil(A), tolerance=tol, output=output)
    except SceneError:
        raise
    except ValueError as exc:
        raise SceneError(str(exc), "$." + ("cyclide" if "cyclide" in doc else "pencil")) from exc
    d = doc["design"]
    if d["kind"] == "three-circles":
        for i, c in enumerate(d["circles"]):
            if "points" in c:
                _distinct_points(c["points"], f"$.design.circles[{i}].points")
    if d["kind"] == "canal" and "matrix" in d["g"]:
        _check_symmetric(d["g"]["matrix"], "$.design.g.matrix")
    return Scene("design", design=d, tolerance=tol, output=output)


def _distinct_points(pts, path):
    P = np.asarray(pts, float)
    for a, b in combinations(range(3), 2):
        if np.linalg.norm(P[a] - P[b]) == 0.0:
            raise SceneError("circle points must be distinct", path)


def write_scene(scene: Scene) -> str:
    return _dumps(scene.to_dict())


def sphere_from_json(d: dict) -> MSphere:
    if "penta" in d:
        return MSphere(np.asarray(d["penta"], float))
    if "plane" in d:
        return MSphere.plane(d["plane"]["normal"], d["plane"]["offset"])
    return MSphere.from_center(d["center"], d["r2"])


def circle_from_json(d: dict) -> MCircle:
    if "points" in d:
        return circle_through_points(*d["points"])
    if "hyperplanes" in d:
        h1, h2 = d["hyperplanes"]
        return MCircle(np.asarray(h1, float), np.asarray(h2, float))
    return planar_circle(d["center"], d["r2"], d["normal"])


def conic_from_json(d: dict) -> Conic:
    if "circle" in d:
        c = d["circle"]
        return conic_circle(c["center"], c["radius"], c.get("normal", (0.0, 0.0, 1.0)))
    if "ellipse" in d:
        e = d["ellipse"]
        return conic_ellipse(e["center"], e["a"], e["b"], e.get("e1", (1.0, 0.0, 0.0)), e.get("e2", (0.0, 1.0, 0.0)))
    G = _check_symmetric(d["matrix"], "$.design.g.matrix")
    return Conic(np.asarray(d["origin"], float), np.asarray(d["e1"], float), np.asarray(d["e2"], float), G)


def design_input(scene: Scene):
    """Objects of a design scene.

    Returns
    -------
    DesignInputThreeCircles, DesignInputQuad, or a ``(Conic, MCircle)`` pair.
    """
    if scene.design is None:
        raise SceneError("scene has no design block")
    d = scene.design
    try:
        if d["kind"] == "three-circles":
            cs = [circle_from_json(c) for c in d["circles"]]
            return DesignInputThreeCircles(sphere_from_json(d["B"]), *cs)
        if d["kind"] == "quad":
            corners = tuple(np.asarray(p, float) for p in d["corners"])
            return DesignInputQuad(corners, sphere_from_json(d["B"]), np.asarray(d["P"], float))
        return conic_from_json(d["g"]), circle_from_json(d["b"])
    except SceneError:
        raise
    except ValueError as exc:
        raise SceneError(str(exc), "$.design") from exc


def scene_cyclide(scene: Scene) -> tuple[Cyclide, Any]:
    """The cyclide of a scene and, for designs, the design result.

    Design failures propagate as :class:`darboux.design.DesignError`.
    """
    tol = scene.tolerance
    if scene.cyclide is not None:
        return scene.cyclide, None
    if scene.pencil is not None:
        return from_pencil(scene.pencil), None
    inp = design_input(scene)
    if isinstance(inp, DesignInputThreeCircles):
        return cyclide_from_three_circles(inp, tol), None
    if isinstance(inp, DesignInputQuad):
        res = cyclide_from_quad(inp, tol)
        return res.cyclide, res
    g, b = inp
    return canal_cyclide(g, b, tol), None


def scene_pencil(scene: Scene) -> Pencil:
    """The pencil of a scene: the given one, or that of its cyclide."""
    if scene.pencil is not None:
        return scene.pencil
    return to_pencil(scene_cyclide(scene)[0])


def scene_for_cyclide(D: Cyclide, tol: Tolerance = DEFAULT, output: dict | None = None) -> Scene:
    return Scene("cyclide", cyclide=D, tolerance=tol, output=dict(output or {}))


# -- reports ------------------------------------------------------------------------


@dataclass
class Report:
    """Classification, cones, families and the web table of one cyclide."""

    classification: str
    eigenvalues: list[dict]
    families: list[dict]
    webs: list[dict]
    web_counts: dict[str, int]
    notes: list[str] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "schema": SCHEMA_ID,
            "classification": self.classification,
            "eigenvalues": self.eigenvalues,
            "families": self.families,
            "webs": self.webs,
            "web_counts": self.web_counts,
        }
        if self.notes:
            doc["notes"] = self.notes
        if self.extras:
            doc["extras"] = self.extras
        return _plain(doc)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Report):
            return NotImplemented
        return close(self.to_dict(), other.to_dict())


def _role(inr: algebra.Inertia, C: np.ndarray, tol: Tolerance) -> str:
    key = tuple(inr)
    if key == (2, 2, 1):
        V = algebra.null_space(C, tol.zero)[0]
        return "special-pair" if abs(minkowski(V, V)) <= 1e3 * tol.zero else "paired-pair"
    if key in {(2, 1, 2), (1, 2, 2)}:
        return "single"
    return "rejected"


def build_report(src: Cyclide | Pencil, tol: Tolerance = DEFAULT) -> Report:
    """Full analysis of a cyclide.

    A :class:`Pencil` is analysed as given, so its eigenvalues keep their
    scale; a :class:`Cyclide` goes through :func:`to_pencil`.
    """
    notes: list[str] = []
    if isinstance(src, Pencil):
        P, D = src, from_pencil(src)
    else:
        P, D = to_pencil(src), src
    cls = classify(D, tol)
    if cls == "trivial":
        return Report(cls, [], [], [], {k: 0 for k in WEB_TYPES}, ["sphere or plane: no circle families"])
    eig = []
    for e in P.eigen(tol):
        C = P.member(e.t)
        inr = algebra.inertia(C, tol.zero)
        scale = max(float(np.max(np.abs(C))), 1e-300)
        eig.append(
            {
                "t": e.t,
                "multiplicity": e.multiplicity,
                "inertia": list(inr),
                "role": _role(inr, C, tol),
                "cone": C / scale,
            }
        )
    fams_out: list[dict] = []
    table: list[dict] = []
    counts = {k: 0 for k in WEB_TYPES}
    if cls == "irreducible":
        try:
            fams = extract_families(P, tol)
        except FamilyError as exc:
            fams = []
            notes.append(str(exc))
        fams_out = [family_summary(F) for F in fams]
        for tri in combinations(fams, 3):
            try:
                wt = classify_triple(*tri)
            except UnsupportedTripleError:
                wt = "Unsupported"
            else:
                counts[wt] += 1
            table.append({"triple": [f.id for f in tri], "type": wt})
    else:
        notes.append("reducible cyclide: families are not extracted")
    return Report(cls, eig, fams_out, table, counts, notes)


def check_report(r: Report) -> None:
    """Raise :class:`SceneError` unless the report is internally consistent."""
    ids = {f["id"] for f in r.families}
    for f in r.families:
        p = f["partner"]
        if (p is None) != (f["class"] == "single"):
            raise SceneError("partner must be set exactly for paired families", "$.families")
        if p is not None:
            other = next((g for g in r.families if g["id"] == p), None)
            if other is None or other["partner"] != f["id"]:
                raise SceneError(f"family {f['id']} has no matching partner", "$.families")
    tally = {k: 0 for k in WEB_TYPES}
    for w in r.webs:
        if not set(w["triple"]) <= ids:
            raise SceneError(f"triple {w['triple']} names unknown families", "$.webs")
        if w["type"] in tally:
            tally[w["type"]] += 1
    if tally != dict(r.web_counts):
        raise SceneError("web counts disagree with the web table", "$.web_counts")


def write_report(r: Report) -> str:
    """Deterministic JSON text: sorted keys, 9 significant digits."""
    return _dumps(r.to_dict())


def parse_report(text: str | bytes) -> Report:
    doc = _load(text)
    errs = sorted(_REPORT_VALIDATOR.iter_errors(doc), key=lambda e: len(e.absolute_path))
    if errs:
        best = jsonschema.exceptions.best_match(errs)
        raise SceneError(best.message, _json_path(best.absolute_path))
    r = Report(
        doc["classification"],
        doc["eigenvalues"],
        doc["families"],
        doc["webs"],
        doc["web_counts"],
        doc.get("notes", []),
        doc.get("extras", {}),
    )
    check_report(r)
    return r


# -- OBJ -------------------------------------------------------------------------------


def _polyline_items(obj) -> list[tuple[int | None, np.ndarray]]:
    out = []
    for item in obj:
        if isinstance(item, tuple) and len(item) == 2 and np.ndim(item[1]) == 2:
            out.append((int(item[0]), np.asarray(item[1], float)))
        else:
            out.append((None, np.asarray(item, float)))
    return out


def _f9(x: float) -> str:
    return "%.9g" % (0.0 if x == 0.0 else x)


def export_obj(obj) -> bytes:
    """OBJ text of a mesh or of polylines.

    Parameters
    ----------
    obj : Mesh, (vertices, triangles) or list of polylines
        Polylines are ``(n, 3)`` arrays or ``(family id, array)`` pairs; a
        family id starts an ``o family_<id>`` group.  Non-finite polyline
        points split the line.

    Raises
    ------
    ExportError
        If there is nothing to write.
    """
    lines: list[str] = []
    if isinstance(obj, Mesh) or (isinstance(obj, tuple) and len(obj) == 2 and np.ndim(obj[1]) == 2 and np.asarray(obj[1]).dtype.kind in "iu"):
        V, T = (obj.vertices, obj.triangles) if isinstance(obj, Mesh) else obj
        V = np.asarray(V, float).reshape(-1, 3)
        T = np.asarray(T, int).reshape(-1, 3)
        if len(V) == 0 or len(T) == 0:
            raise ExportError("empty mesh")
        if not np.all(np.isfinite(V)):
            raise ExportError("mesh has non-finite vertices")
        lines += ["v " + " ".join(_f9(c) for c in v) for v in V]
        lines += ["f " + " ".join(str(int(i) + 1) for i in t) for t in T]
    else:
        items = _polyline_items(obj)
        nv = 0
        group = object()
        for fid, pts in items:
            runs, cur = [], []
            for p in pts.reshape(-1, 3):
                if np.all(np.isfinite(p)):
                    cur.append(p)
                elif cur:
                    runs.append(cur)
                    cur = []
            if cur:
                runs.append(cur)
            runs = [r for r in runs if len(r) >= 2]
            if not runs:
                continue
            if fid is not None and fid != group:
                lines.append(f"o family_{fid}")
                group = fid
            for r in runs:
                lines += ["v " + " ".join(_f9(c) for c in p) for p in r]
                lines.append("l " + " ".join(str(nv + k + 1) for k in range(len(r))))
                nv += len(r)
        if nv == 0:
            raise ExportError("no polylines to write")
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_obj(data: bytes | str) -> tuple[np.ndarray, np.ndarray, list[np.ndarray]]:
    """Vertices, triangular faces (0-based) and polylines of an OBJ text."""
    if isinstance(data, bytes):
        data = data.decode("ascii")
    V, F, L = [], [], []
    for raw in data.splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "v":
            V.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            F.append([int(x.split("/")[0]) - 1 for x in parts[1:]])
        elif parts[0] == "l":
            L.append(np.array([int(x) - 1 for x in parts[1:]]))
    return np.array(V, float).reshape(-1, 3), np.array(F, int).reshape(-1, 3), L


# -- SVG -------------------------------------------------------------------------------

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _view_basis(view: dict | None):
    view = view or {}
    d = np.asarray(view.get("direction", (1.0, 0.8, 0.6)), float)
    d = d / np.linalg.norm(d)
    up = np.asarray(view.get("up", (0.0, 0.0, 1.0)), float)
    ex = np.cross(up, d)
    if np.linalg.norm(ex) < 1e-9:
        ex = np.cross((1.0, 0.0, 0.0) if abs(d[0]) < 0.9 else (0.0, 1.0, 0.0), d)
    ex = ex / np.linalg.norm(ex)
    ey = np.cross(d, ex)
    return ex, ey, int(view.get("width", 800)), int(view.get("height", 800))


def export_svg(web, view: dict | None = None, n: int = 96, clip: float | None = None) -> bytes:
    """Orthographic drawing of a web's circles, one CSS class per family.

    Parameters
    ----------
    web : WebInstance or list of ``(family id, points)``
    view : dict, optional
        ``direction`` (towards the viewer), ``up``, ``width``, ``height``.
    n : int
        Samples per circle.
    clip : float, optional
        Points farther than this from the node centroid are dropped (lines
        and huge circles); defaults to 4 times the node spread.

    Raises
    ------
    ExportError
        If there is nothing to draw.
    """
    if isinstance(web, WebInstance):
        items = web.polylines(n)
        nodes = web.node_array()
    else:
        items = _polyline_items(web)
        nodes = np.zeros((0, 3))
    items = [(0 if f is None else f, p) for f, p in items]
    if not items:
        raise ExportError("empty web")
    allpts = np.vstack([p for _, p in items])
    allpts = allpts[np.all(np.isfinite(allpts), axis=1)]
    ref = nodes if len(nodes) else allpts
    if len(ref) == 0:
        raise ExportError("empty web")
    center = ref.mean(axis=0)
    if clip is None:
        spread = float(np.max(np.linalg.norm(ref - center, axis=1))) if len(ref) > 1 else 1.0
        clip = 4.0 * max(spread, 1e-9)
    ex, ey, W, H = _view_basis(view)

    def keep(p):
        return bool(np.all(np.isfinite(p)) and np.linalg.norm(p - center) <= clip)

    runs: list[tuple[int, np.ndarray]] = []
    for fid, pts in items:
        cur: list[np.ndarray] = []
        for p in pts:
            if keep(p):
                cur.append(p)
            elif cur:
                runs.append((fid, np.array(cur)))
                cur = []
        if cur:
            runs.append((fid, np.array(cur)))
    runs = [(f, r) for f, r in runs if len(r) >= 2]
    if not runs:
        raise ExportError("empty web")
    uv = np.vstack([np.column_stack([(r - center) @ ex, (r - center) @ ey]) for _, r in runs])
    half = max(float(np.max(np.abs(uv))), 1e-12)
    s = 0.45 * min(W, H) / half

    def pix(r):
        q = r - center
        return W / 2 + s * (q @ ex), H / 2 - s * (q @ ey)

    fids = sorted({f for f, _ in runs})
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        "<style>",
    ]
    for k, f in enumerate(fids):
        out.append(f".family-{f} {{ fill: none; stroke: {PALETTE[k % len(PALETTE)]}; stroke-width: 1.5; }}")
    out.append("</style>")
    for fid, r in runs:
        x, y = pix(r)
        closed = np.linalg.norm(r[0] - r[-1]) < 1e-9 * max(1.0, float(np.linalg.norm(r[0])))
        d = "M " + " L ".join(f"{_f9(a)} {_f9(b)}" for a, b in zip(x, y)) + (" Z" if closed else "")
        out.append(f'<path class="family-{fid}" d="{d}"/>')
    if len(nodes):
        x, y = pix(nodes)
        for a, b in zip(x, y):
            out.append(f'<circle class="node" cx="{_f9(a)}" cy="{_f9(b)}" r="2"/>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
