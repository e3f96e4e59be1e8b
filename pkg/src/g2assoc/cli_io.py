"""Plain-text run configuration and mesh export."""

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, UnsupportedFormat
from .mesh import SurfaceMesh

FORMAT_VERSION = 1
FORMATS = ("json", "csv", "obj3")
DEFAULT_PROJECTION = (2, 4, 6)


# -- scalar rendering --------------------------------------------------------

def format_float(x: float) -> str:
    s = format(float(x), ".17g")
    if not any(c in s for c in ".eEn"):
        s += ".0"
    return s


def format_complex(z: complex) -> str:
    z = complex(z)
    im = format_float(z.imag)
    sign = "" if im.startswith("-") else "+"
    return f"{format_float(z.real)}{sign}{im}i"


_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(rf"^(?:({_NUM})(?=[+-]))?([+-]?(?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)i$")


def parse_complex(text: str) -> complex:
    """Parse ``a+bi``, ``a-bi``, ``bi`` or a plain real number."""
    t = text.strip().replace(" ", "")
    if not t.endswith("i"):
        try:
            return complex(float(t))
        except ValueError as exc:
            raise ConfigError(f"not a number: {text!r}") from exc
    m = _COMPLEX.match(t)
    if not m:
        raise ConfigError(f"not a complex number: {text!r}")
    re_part, im_part = m.groups()
    if im_part in ("", "+"):
        im_part = "1"
    elif im_part == "-":
        im_part = "-1"
    return complex(float(re_part) if re_part else 0.0, float(im_part))


def render_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if isinstance(v, (complex, np.complexfloating)):
        return format_complex(v)
    if isinstance(v, (tuple, list)):
        return ",".join(render_value(x) for x in v)
    return str(v)


def parse_value(text: str):
    t = text.strip()
    if "," in t:
        return tuple(parse_value(p) for p in t.split(","))
    if t in ("true", "false"):
        return t == "true"
    if re.fullmatch(r"[+-]?\d+", t):
        return int(t)
    if re.fullmatch(_NUM, t) or t.lower() in ("nan", "inf", "-inf"):
        return float(t)
    if t.endswith("i"):
        try:
            return parse_complex(t)
        except ConfigError:
            pass
    return t


# -- run configuration -------------------------------------------------------

GENERATORS = ("affine", "closedform", "ruled")


@dataclass
class RunConfig:
    generator: str
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ConfigError(f"unknown generator {self.generator!r}")

    def get(self, key, default=None):
        return self.values.get(key, default)

    def dumps(self) -> str:
        lines = [f"format_version={FORMAT_VERSION}", f"generator={self.generator}"]
        lines += [f"{k}={render_value(v)}" for k, v in self.values.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        gen, values = None, {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {n}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            if not k:
                raise ConfigError(f"line {n}: empty key")
            if k == "format_version":
                if v != str(FORMAT_VERSION):
                    raise ConfigError(f"unsupported format_version {v}")
            elif k == "generator":
                gen = v
            else:
                values[k] = parse_value(v)
        if gen is None:
            raise ConfigError("missing generator=")
        return cls(gen, values)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.loads(fh.read())


def parse_grid(text) -> tuple:
    """``"20x20x64"`` -> ``(20, 20, 64)``."""
    if isinstance(text, (tuple, list)):
        parts = list(text)
    else:
        parts = str(text).lower().split("x")
    try:
        out = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc
    if len(out) != 3 or min(out) < 1:
        raise ConfigError(f"grid needs three positive counts, got {text!r}")
    return out


def parse_range(text) -> tuple:
    if isinstance(text, (tuple, list)):
        vals = [float(v) for v in text]
    else:
        try:
            vals = [float(v) for v in str(text).split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad range {text!r}") from exc
    if len(vals) != 2 or not vals[0] <= vals[1]:
        raise ConfigError(f"range needs lo,hi with lo <= hi, got {text!r}")
    return tuple(vals)


# -- initial data documents --------------------------------------------------

W_LABELS = ("w1", "w2", "w3", "w4", "w5", "w6")


def parse_initial_data(text: str) -> np.ndarray:
    """Labeled 7-tuples ``w1: a b c d e f g`` (labels w1..w6, ``#`` comments)."""
    rows = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        label, sep, rest = line.partition(":")
        if not sep:
            parts = line.split()
            label, rest = parts[0], " ".join(parts[1:])
        label = label.strip().lower()
        if label not in W_LABELS:
            raise ConfigError(f"line {n}: unknown label {label!r}")
        if label in rows:
            raise ConfigError(f"line {n}: duplicate label {label}")
        try:
            vals = [float(v) for v in rest.split()]
        except ValueError as exc:
            raise ConfigError(f"line {n}: non-numeric entry") from exc
        if len(vals) != 7:
            raise ConfigError(f"line {n}: expected 7 numbers, got {len(vals)}")
        rows[label] = vals
    missing = [k for k in W_LABELS if k not in rows]
    if missing:
        raise ConfigError(f"missing {', '.join(missing)}")
    return np.array([rows[k] for k in W_LABELS])


def render_initial_data(w) -> str:
    w = np.asarray(w, dtype=float)
    return "".join(f"{k}: " + " ".join(format_float(x) for x in row) + "\n"
                   for k, row in zip(W_LABELS, w))


def parse_curve_table(text: str) -> np.ndarray:
    """Rows of seven numbers, one unit vector per grid point."""
    rows = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            vals = [float(v) for v in line.replace(",", " ").split()]
        except ValueError as exc:
            raise ConfigError(f"line {n}: non-numeric entry") from exc
        if len(vals) != 7:
            raise ConfigError(f"line {n}: expected 7 numbers")
        rows.append(vals)
    if not rows:
        raise ConfigError("empty curve table")
    return np.array(rows)


# -- mesh export -------------------------------------------------------------

def _nan_to_none(a):
    return [None if not np.isfinite(x) else float(x) for x in np.ravel(a)]


def mesh_to_dict(mesh: SurfaceMesh) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "labels": list(mesh.labels),
        "shape": list(mesh.shape) if mesh.shape is not None else None,
        "meta": mesh.meta,
        "params": mesh.params.tolist(),
        "points": mesh.points.tolist(),
        "frames": mesh.frames.tolist(),
        "res_assoc": _nan_to_none(mesh.res_assoc),
        "res_calib": _nan_to_none(mesh.res_calib),
    }


def mesh_from_dict(d: dict) -> SurfaceMesh:
    if d.get("format_version") != FORMAT_VERSION:
        raise ConfigError("unsupported mesh format_version")
    nanify = lambda v: np.array([np.nan if x is None else x for x in v], dtype=float)
    return SurfaceMesh(
        np.array(d["params"], dtype=float).reshape(-1, 3),
        np.array(d["points"], dtype=float).reshape(-1, 7),
        np.array(d["frames"], dtype=float).reshape(-1, 3, 7),
        nanify(d["res_assoc"]), nanify(d["res_calib"]),
        shape=tuple(d["shape"]) if d.get("shape") else None,
        labels=tuple(d.get("labels", ("y1", "y2", "t"))),
        meta=d.get("meta", {}),
    )


def projection_matrix(axes=None) -> np.ndarray:
    """3x7 matrix with orthonormal rows; ``axes`` is three 1-based coordinates or a 3x7 array."""
    if axes is None:
        axes = DEFAULT_PROJECTION
    P = np.asarray(axes, dtype=float)
    if P.shape == (3,):
        idx = [int(i) for i in axes]
        if sorted(set(idx)) != sorted(idx) or min(idx) < 1 or max(idx) > 7:
            raise ConfigError("projection needs three distinct coordinates in 1..7")
        P = np.zeros((3, 7))
        P[range(3), [i - 1 for i in idx]] = 1.0
    if P.shape != (3, 7) or not np.allclose(P @ P.T, np.eye(3), atol=1e-12):
        raise ConfigError("projection must have orthonormal rows")
    return P


def _csv_text(mesh: SurfaceMesh) -> str:
    head = [f"# format_version={FORMAT_VERSION}",
            ",".join(list(mesh.labels) + [f"x{i}" for i in range(1, 8)] + ["res_assoc", "res_calib"])]
    body = [
        ",".join(format_float(v) for v in np.concatenate([p, x, [ra, rc]]))
        for p, x, ra, rc in zip(mesh.params, mesh.points, mesh.res_assoc, mesh.res_calib)
    ]
    return "\n".join(head + body) + "\n"


def _obj_text(mesh: SurfaceMesh, projection=None) -> str:
    P = projection_matrix(projection)
    lines = [f"# format_version={FORMAT_VERSION}", "# projection (rows map R^7 to x, y, z):"]
    lines += ["# " + " ".join(format_float(v) for v in row) for row in P]
    verts = mesh.points @ P.T
    lines += ["v " + " ".join(format_float(c) for c in v) for v in verts]
    if mesh.shape is not None:
        n0, n1, n2 = mesh.shape
        idx = np.arange(len(mesh)).reshape(n0, n1, n2) + 1
        for k in range(n2):
            for i in range(n0 - 1):
                for j in range(n1 - 1):
                    a, b = idx[i, j, k], idx[i + 1, j, k]
                    c, d = idx[i + 1, j + 1, k], idx[i, j + 1, k]
                    lines.append(f"f {a} {b} {c} {d}")
    return "\n".join(lines) + "\n"


def export_mesh(mesh: SurfaceMesh, path, fmt: str | None = None, projection=None) -> str:
    """Write ``mesh`` to ``path``; the format defaults to the file suffix."""
    fmt = fmt or str(path).rsplit(".", 1)[-1].lower()
    if fmt == "obj":
        fmt = "obj3"
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unsupported format {fmt!r}; choose one of {FORMATS}")
    if fmt == "json":
        text = json.dumps(mesh_to_dict(mesh), allow_nan=False) + "\n"
    elif fmt == "csv":
        text = _csv_text(mesh)
    else:
        text = _obj_text(mesh, projection)
    with open(path, "w") as fh:
        fh.write(text)
    return fmt


def load_mesh(path) -> SurfaceMesh:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not a JSON mesh") from exc
    return mesh_from_dict(d)


def write_json(obj, path):
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        if isinstance(o, complex):
            return format_complex(o)
        raise TypeError(type(o))

    def clean(o):
        if isinstance(o, (float, np.floating)):
            return float(o) if np.isfinite(o) else None
        if isinstance(o, np.ndarray):
            return clean(o.tolist())
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return o

    with open(path, "w") as fh:
        fh.write(json.dumps(clean(obj), default=default, indent=1, sort_keys=True) + "\n")
