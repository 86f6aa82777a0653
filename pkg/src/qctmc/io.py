"""JSON model files.

A model file holds ``classical_states``, ``hilbert_dim``, ``H``, ``L`` (a list)
and ``rho0``.  Each matrix is either a list of rows or a sparse object
``{"shape": [n, n], "entries": [[i, j, value], ...]}``.  A value is a string
such as ``"1/2"`` or ``"-1/2*sqrt(2)"``, or an object ``{"re": ..., "im": ...}``.
A file may instead hold a ``ctmc`` block ``{"states", "Q", "initial"}``,
which is embedded as a model with a one-dimensional quantum factor.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import ModelError
from .linops import Matrix
from .model import Qctmc, from_ctmc
from .scalars import ComplexRational, Surd, parse_surd


def _entry(x):
    if isinstance(x, dict):
        re_part = parse_surd(x.get("re", "0"))
        im_part = parse_surd(x.get("im", "0"))
        return re_part + im_part * Surd({1: ComplexRational(0, 1)})
    if isinstance(x, bool) or isinstance(x, float):
        raise ModelError([f"entry {x!r} must be an exact string or integer, not a float"])
    return parse_surd(str(x))


def parse_matrix(obj, n=None, name="matrix") -> Matrix:
    try:
        if isinstance(obj, dict):
            rows, cols = obj.get("shape", [n, n])
            m = [[Surd() for _ in range(cols)] for _ in range(rows)]
            for i, j, v in obj.get("entries", []):
                m[i][j] = m[i][j] + _entry(v)
            return Matrix.from_rows(m)
        return Matrix.from_rows([[_entry(x) for x in row] for row in obj])
    except (ValueError, TypeError, IndexError) as exc:
        raise ModelError([f"{name}: {exc}"]) from exc


def _format_entry(s: Surd):
    re_part, im_part = s.real, s.imag
    if im_part.is_zero():
        return str(re_part)
    return {"re": str(re_part), "im": str(im_part)}


def format_matrix(m: Matrix, sparse=True):
    """JSON form of an exact matrix."""
    if sparse:
        entries = [[i, j, _format_entry(m[i, j])]
                   for i in range(m.rows) for j in range(m.cols) if not m[i, j].is_zero()]
        return {"shape": [m.rows, m.cols], "entries": entries}
    return [[_format_entry(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]


def model_from_dict(doc: dict) -> Qctmc:
    if "ctmc" in doc:
        c = doc["ctmc"]
        return from_ctmc(c["states"], c["Q"], c.get("initial"))
    missing = [k for k in ("classical_states", "hilbert_dim", "H", "L", "rho0") if k not in doc]
    if missing:
        raise ModelError([f"missing field {k!r}" for k in missing])
    n = len(doc["classical_states"]) * int(doc["hilbert_dim"])
    ls = doc["L"]
    if isinstance(ls, dict) or (ls and isinstance(ls[0], list) and ls[0] and not isinstance(ls[0][0], (list, dict))):
        ls = [ls]
    return Qctmc(
        tuple(doc["classical_states"]),
        int(doc["hilbert_dim"]),
        parse_matrix(doc["H"], n, "H"),
        tuple(parse_matrix(l, n, f"L[{k}]") for k, l in enumerate(ls)),
        parse_matrix(doc["rho0"], n, "rho0"),
    )


def model_to_dict(m: Qctmc) -> dict:
    return {
        "classical_states": list(m.classical_states),
        "hilbert_dim": m.hilbert_dim,
        "H": format_matrix(m.H),
        "L": [format_matrix(l) for l in m.Ls],
        "rho0": format_matrix(m.rho0),
    }


def load_model(source) -> Qctmc:
    """Read a model from a path, a JSON string or an already parsed dict."""
    if isinstance(source, dict):
        return model_from_dict(source)
    text = str(source)
    if isinstance(source, Path) or not text.lstrip().startswith("{"):
        text = Path(source).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError([f"invalid JSON: {exc}"]) from exc
    return model_from_dict(doc)


def bundled_model_path(name="oqw") -> Path:
    return Path(str(resources.files("qctmc") / "data" / f"{name}.json"))


def open_quantum_walk() -> Qctmc:
    """The bundled four-site open quantum walk."""
    return load_model(bundled_model_path("oqw"))
