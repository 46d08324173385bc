"""JSON file formats.  Complex numbers are stored as ``[re, im]`` pairs."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .linalg import DEFAULT_TOL, Subspace, Tolerances
from .system import SampleMatrix, SystemInstance


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def encode_complex(arr) -> list:
    arr = np.asarray(arr, dtype=complex)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [encode_complex(a) for a in arr]


def decode_complex(data, ndim: int, name: str = "array") -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: not a rectangular array of [re, im] pairs") from exc
    if arr.ndim == ndim and arr.size == 0:
        # e.g. a d x 0 basis serializes as d empty lists
        return np.zeros(arr.shape, dtype=complex)
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        raise InputError(f"{name}: expected {ndim}-D array of [re, im] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: non-finite entries")
    return arr[..., 0] + 1j * arr[..., 1]


def jsonable(obj):
    """Recursively convert numpy scalars/arrays; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_complex(obj)
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(jsonable(doc), indent=1, allow_nan=False) + "\n"


def write_json(path, doc: dict) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path = Path(path)
    text = dumps(doc)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top-level JSON value must be an object")
    return doc


def _require(doc: dict, *keys):
    missing = [k for k in keys if k not in doc]
    if missing:
        raise InputError(f"missing field(s): {', '.join(missing)}")


# instance files

def instance_to_doc(inst: SystemInstance) -> dict:
    return {
        "dim": inst.dim,
        "period": inst.N,
        "A": encode_complex(inst.A),
        "W_basis": encode_complex(inst.W.basis),
        "G": encode_complex(inst.G),
        "seed": inst.seed,
    }


def instance_arrays(doc: dict) -> dict:
    """Decode an instance document without the contractivity check."""
    _require(doc, "dim", "period", "A", "W_basis", "G")
    d = doc["dim"]
    N = doc["period"]
    if not isinstance(d, int) or d < 1 or not isinstance(N, int) or N < 1:
        raise InputError("dim and period must be positive integers")
    A = decode_complex(doc["A"], 2, "A")
    W = decode_complex(doc["W_basis"], 2, "W_basis")
    G = decode_complex(doc["G"], 2, "G")
    if A.shape != (d, d):
        raise InputError(f"A has shape {A.shape}, expected {(d, d)}")
    if W.shape[0] != d:
        raise InputError(f"W_basis has shape {W.shape}, expected {d} rows")
    if G.ndim != 2 or G.shape[1] != d or G.shape[0] < 1:
        raise InputError(f"G has shape {G.shape}, expected (J, {d}) with J >= 1")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise InputError("seed must be a non-negative integer")
    return {"A": A, "W": W, "G": G, "N": N, "seed": seed}


def instance_from_doc(doc: dict, tol: Tolerances = DEFAULT_TOL) -> SystemInstance:
    raw = instance_arrays(doc)
    try:
        return SystemInstance(A=raw["A"], W=Subspace(raw["W"]), G=raw["G"], N=raw["N"], seed=raw["seed"], tol=tol)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def save_instance(path, inst: SystemInstance) -> None:
    write_json(path, instance_to_doc(inst))


def load_instance(path, tol: Tolerances = DEFAULT_TOL) -> SystemInstance:
    return instance_from_doc(read_json(path), tol)


# source files (planted source plus initial state)

def source_to_doc(w, x0=None) -> dict:
    w = np.asarray(w, dtype=complex)
    doc = {"period": w.shape[0], "values": encode_complex(w)}
    if x0 is not None:
        doc["x0"] = encode_complex(x0)
    return doc


def source_from_doc(doc: dict) -> tuple[np.ndarray, np.ndarray | None]:
    _require(doc, "period", "values")
    w = decode_complex(doc["values"], 2, "values")
    if w.shape[0] != doc["period"]:
        raise InputError(f"source has {w.shape[0]} values, period is {doc['period']}")
    x0 = decode_complex(doc["x0"], 1, "x0") if doc.get("x0") is not None else None
    return w, x0


def save_source(path, w, x0=None) -> None:
    write_json(path, source_to_doc(w, x0))


def load_source(path) -> tuple[np.ndarray, np.ndarray | None]:
    return source_from_doc(read_json(path))


# sample files

def samples_to_doc(Y: SampleMatrix) -> dict:
    return {
        "period": Y.period,
        "noise_level": Y.noise_level,
        "seed": Y.seed,
        "rows": encode_complex(Y.rows),
    }


def samples_from_doc(doc: dict) -> SampleMatrix:
    _require(doc, "period", "rows")
    rows = decode_complex(doc["rows"], 2, "rows")
    period = doc["period"]
    if not isinstance(period, int) or period < 1:
        raise InputError("period must be a positive integer")
    return SampleMatrix(
        rows=rows,
        period=period,
        noise_level=float(doc.get("noise_level", 0.0)),
        seed=int(doc.get("seed", 0)),
    )


def save_samples(path, Y: SampleMatrix) -> None:
    write_json(path, samples_to_doc(Y))


def load_samples(path) -> SampleMatrix:
    return samples_from_doc(read_json(path))
