"""JSON encodings shared by the CLI and the tests.

Complex numbers are ``[re, im]`` pairs, matrices are row-major lists of rows,
and NaN or infinities are rejected on input. :func:`dumps` is canonical
(sorted keys, compact separators) so equal values give identical bytes.
"""
import hashlib
import json

import numpy as np

from . import cp_map as cm
from .errors import StructuralError
from .vn_algebra.algebra import Element, FdVnAlgebra
from .vn_algebra.concrete import ConcreteStarAlgebra

SCHEMA_VERSION = 1


def _reject_constant(name):
    raise StructuralError(f"non-finite number {name} is not accepted")


def loads(text):
    """Parse JSON text; raises ``json.JSONDecodeError`` (with position) or StructuralError."""
    return json.loads(text, parse_constant=_reject_constant)


def _default(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False, default=_default)


def digest(obj):
    return hashlib.sha256(dumps(obj).encode()).hexdigest()


def _clean(x):
    # -0.0 and 0.0 must serialize identically
    return float(x) + 0.0


def matrix_to_json(m):
    m = np.asarray(m, dtype=complex)
    return [[[_clean(z.real), _clean(z.imag)] for z in row] for row in m]


def matrix_from_json(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.size == 0:
        return np.zeros((0, 0), dtype=complex)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise StructuralError("a matrix is a list of rows of [re, im] pairs")
    if not np.all(np.isfinite(arr)):
        raise StructuralError("non-finite matrix entry")
    return arr[..., 0] + 1j * arr[..., 1]


def algebra_to_json(a):
    return {"blocks": list(a.blocks)}


def algebra_from_json(data):
    if not isinstance(data, dict) or "blocks" not in data:
        raise StructuralError("an algebra is {\"blocks\": [n1, ...]}")
    blocks = data["blocks"]
    if not isinstance(blocks, list) or not all(isinstance(n, int) and not isinstance(n, bool) for n in blocks):
        raise StructuralError("algebra blocks must be a list of integers")
    return FdVnAlgebra(blocks)


def element_to_json(x):
    return {"blocks": [matrix_to_json(b) for b in x.data]}


def element_from_json(data, algebra=None):
    if not isinstance(data, dict) or "blocks" not in data:
        raise StructuralError("an element is {\"blocks\": [matrix, ...]}")
    mats = [matrix_from_json(b) for b in data["blocks"]]
    if algebra is None:
        algebra = FdVnAlgebra([m.shape[0] for m in mats])
    return Element(algebra, mats)


def _pair_key(i, j):
    return f"{i},{j}"


def _parse_key(key):
    try:
        i, j = (int(s) for s in key.split(","))
    except ValueError:
        raise StructuralError(f"block-pair key must be \"i,j\", got {key!r}") from None
    return i, j


def cpmap_to_json(phi):
    return {
        "domain": algebra_to_json(phi.domain),
        "codomain": algebra_to_json(phi.codomain),
        "choi": {_pair_key(i, j): matrix_to_json(c) for (i, j), c in sorted(phi.choi.items())},
    }


def cpmap_from_json(data):
    """Channel from ``{"domain", "codomain", "choi": {"i,j": ...}}`` or with ``"kraus": {"i,j": [...]}``."""
    if not isinstance(data, dict) or "domain" not in data or "codomain" not in data:
        raise StructuralError("a channel needs \"domain\" and \"codomain\"")
    a, b = algebra_from_json(data["domain"]), algebra_from_json(data["codomain"])
    if "choi" in data:
        choi = {_parse_key(k): matrix_from_json(v) for k, v in data["choi"].items()}
        return cm.CpMap(a, b, choi)
    if "kraus" in data:
        kraus = {_parse_key(k): [matrix_from_json(x) for x in v] for k, v in data["kraus"].items()}
        return cm.from_kraus(a, b, kraus)
    raise StructuralError("a channel needs \"choi\" or \"kraus\"")


def concrete_to_json(s):
    return {"ambient_dim": s.ambient_dim, "basis": [matrix_to_json(b) for b in s.basis]}


def concrete_from_json(data):
    if not isinstance(data, dict) or "basis" not in data:
        raise StructuralError("a concrete algebra is {\"ambient_dim\": d, \"basis\": [matrix, ...]}")
    mats = [matrix_from_json(b) for b in data["basis"]]
    if not mats:
        raise StructuralError("empty basis")
    d = data.get("ambient_dim", mats[0].shape[0])
    return ConcreteStarAlgebra(np.array(mats), d)


def wedderburn_to_json(wd):
    return {
        "factor_dims": list(wd.factor_dims),
        "multiplicities": list(wd.multiplicities),
        "central_projections": [matrix_to_json(z) for z in wd.central_projections],
        "unitary": matrix_to_json(wd.spatial.unitary),
        "seed": wd.seed,
    }


def dilation_to_json(dil):
    return {
        "schema_version": SCHEMA_VERSION,
        "P": algebra_to_json(dil.P),
        "rho": cpmap_to_json(dil.rho),
        "f": cpmap_to_json(dil.f),
        "module_dim": dil.module.dim,
        "residuals": {k: float(v) for k, v in sorted(dil.residuals.items())},
        "seed": dil.seed,
    }


def triple_from_json(data, phi):
    from .dilation.paschke import DilationTriple
    return DilationTriple(phi=phi, P=algebra_from_json(data["P"]), rho=cpmap_from_json(data["rho"]),
                          f=cpmap_from_json(data["f"]))


def stinespring_to_json(st):
    return {
        "schema_version": SCHEMA_VERSION,
        "K_dim": st.K_dim,
        "pi": None if st.pi is None else cpmap_to_json(st.pi),
        "V": matrix_to_json(st.V) if st.V.size else [],
        "minimal": bool(st.minimal),
        "residual": float(st.residual()),
    }


def to_jsonable(value):
    """Convert reports mixing Elements, maps and numpy scalars into plain JSON values."""
    if isinstance(value, Element):
        return element_to_json(value)
    if isinstance(value, cm.CpMap):
        return cpmap_to_json(value)
    if isinstance(value, FdVnAlgebra):
        return algebra_to_json(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return matrix_to_json(value) if value.ndim == 2 else [to_jsonable(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


__all__ = [
    "SCHEMA_VERSION", "loads", "dumps", "digest", "matrix_to_json", "matrix_from_json", "algebra_to_json",
    "algebra_from_json", "element_to_json", "element_from_json", "cpmap_to_json", "cpmap_from_json",
    "concrete_to_json", "concrete_from_json", "wedderburn_to_json", "dilation_to_json", "triple_from_json",
    "stinespring_to_json", "to_jsonable",
]
