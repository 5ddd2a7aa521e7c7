"""JSON descriptors for spaces, maps, tensors and extension problems.

Formats (all matrices row-major, ``"p"`` a number or the string ``"inf"``)::

    space       {"dim": 2, "p": 2}
    subspace    {"space": <space>, "spanning": [[...], ...]}
    tensor dom. {"tensor": {"X": <space>, "Y": <space>, "norm": "projective"}}
    linear map  {"domain": <space|subspace|tensor dom.>, "codomain": <space>, "matrix": [[...]]}
    projection  {"range": <subspace>, "matrix": [[...]]}
    bilinear    {"X": ..., "Y": ..., "Z": <space>, "coeffs": [[[...]]]}   # index order [k][i][j]
    tensor      {"X": ..., "Y": ..., "terms": [{"x": [...], "y": [...]}, ...]}
    extend      {"phi": <bilinear on subspaces>, "E": <projection>, "P": <projection>}

Spanning vectors that are already orthonormal are used as the subspace
basis verbatim, so subspace coordinates written by :func:`to_json`
round-trip exactly.  Other spanning sets are orthonormalised.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bilinear_maps import BilinearMap
from .normed_spaces import LinearMap, NormedSpace, Projection, Subspace, make_subspace
from .tensor_norms import ProjectiveTensorSpace, TensorElement

__all__ = [
    "SchemaError",
    "load_json",
    "dump_json",
    "space_from_dict",
    "linear_map_from_dict",
    "projection_from_dict",
    "bilinear_from_dict",
    "tensor_from_dict",
    "extension_problem_from_dict",
]


class SchemaError(ValueError):
    """Input does not match the expected descriptor."""


def _require(d, *keys, what="object"):
    if not isinstance(d, dict):
        raise SchemaError(f"{what} must be a JSON object")
    missing = [k for k in keys if k not in d]
    if missing:
        raise SchemaError(f"{what} is missing {', '.join(missing)}")


def _array(value, ndim, what):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"{what} must be numeric") from None
    if arr.ndim != ndim:
        raise SchemaError(f"{what} must be a {ndim}-dimensional array")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{what} contains non-finite entries")
    return arr


def space_from_dict(d):
    """A :class:`NormedSpace`, :class:`Subspace` or :class:`ProjectiveTensorSpace`."""
    if isinstance(d, dict) and "tensor" in d:
        t = d["tensor"]
        _require(t, "X", "Y", what="tensor domain")
        return ProjectiveTensorSpace(space_from_dict(t["X"]), space_from_dict(t["Y"]))
    if isinstance(d, dict) and "spanning" in d:
        _require(d, "space", what="subspace")
        ambient = space_from_dict(d["space"])
        if not isinstance(ambient, NormedSpace):
            raise SchemaError("a subspace must live in an l^p space")
        span = _array(d["spanning"], 2, "spanning")
        if span.shape[1] != ambient.dim:
            raise SchemaError("spanning vectors do not match the ambient dimension")
        if np.allclose(span @ span.T, np.eye(len(span)), atol=1e-12):
            return Subspace(ambient, span.T)
        try:
            return make_subspace(ambient, span)
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
    _require(d, "dim", "p", what="space")
    try:
        return NormedSpace(int(d["dim"]), d["p"])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad space: {exc}") from None


def linear_map_from_dict(d) -> LinearMap:
    _require(d, "domain", "codomain", "matrix", what="linear map")
    try:
        return LinearMap(space_from_dict(d["domain"]), space_from_dict(d["codomain"]),
                         _array(d["matrix"], 2, "matrix"))
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def projection_from_dict(d) -> Projection:
    _require(d, "range", "matrix", what="projection")
    sub = space_from_dict(d["range"])
    if not isinstance(sub, Subspace):
        raise SchemaError("projection range must be a subspace")
    try:
        return Projection(LinearMap(sub.ambient, sub.ambient, _array(d["matrix"], 2, "matrix")),
                          sub)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def bilinear_from_dict(d) -> BilinearMap:
    _require(d, "X", "Y", "Z", "coeffs", what="bilinear map")
    try:
        return BilinearMap(space_from_dict(d["X"]), space_from_dict(d["Y"]),
                           space_from_dict(d["Z"]), _array(d["coeffs"], 3, "coeffs"))
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def tensor_from_dict(d) -> TensorElement:
    _require(d, "X", "Y", "terms", what="tensor")
    X, Y = space_from_dict(d["X"]), space_from_dict(d["Y"])
    terms = []
    for t in d["terms"]:
        _require(t, "x", "y", what="term")
        terms.append((_array(t["x"], 1, "x"), _array(t["y"], 1, "y")))
    try:
        return TensorElement(X, Y, tuple(terms))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def extension_problem_from_dict(d):
    """``(phi, M, N, E, P)``; ``phi`` must be defined on subspaces."""
    _require(d, "phi", "E", "P", what="extension problem")
    phi = bilinear_from_dict(d["phi"])
    M, N = phi.X, phi.Y
    if not (isinstance(M, Subspace) and isinstance(N, Subspace)):
        raise SchemaError("phi must be defined on subspaces")
    E, P = projection_from_dict(d["E"]), projection_from_dict(d["P"])
    return phi, M, N, E, P


def load_json(path):
    """Parse a UTF-8 JSON file; IO problems raise ``OSError`` naming the path."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from None


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _finite(obj):
    # JSON has no infinities; exponents are written as the string "inf".
    if isinstance(obj, float) and not np.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dump_json(obj, path=None, indent=2) -> str:
    """Serialise ``obj`` (dicts, numpy data, objects with ``to_dict``)."""
    text = json.dumps(_finite(json.loads(json.dumps(obj, default=_default))),
                      indent=indent, sort_keys=True)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
