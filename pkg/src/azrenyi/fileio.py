"""JSON encodings of matrices and channels.

A matrix is ``{"dim": d, "re": [[...]], "im": [[...]]}``; rectangular
matrices (Kraus operators, transfer matrices) carry ``"shape": [rows, cols]``
instead of ``"dim"``. Floats are written with ``repr`` precision, so a
write/read cycle reproduces every entry exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channels import QuantumMap, make_channel


def encode_matrix(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array")
    out = {"dim": a.shape[0]} if a.shape[0] == a.shape[1] else {"shape": list(a.shape)}
    out["re"] = a.real.tolist()
    out["im"] = a.imag.tolist()
    return out


def decode_matrix(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj:
        raise ValueError("matrix object needs 're' (and optionally 'im') arrays")
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.ndim != 2 or re.shape != im.shape:
        raise ValueError("'re' and 'im' must be 2-d arrays of equal shape")
    if "dim" in obj:
        d = int(obj["dim"])
        if re.shape != (d, d):
            raise ValueError(f"declared dim {d} does not match array shape {re.shape}")
    elif "shape" in obj and tuple(obj["shape"]) != re.shape:
        raise ValueError(f"declared shape {obj['shape']} does not match array shape {re.shape}")
    return re + 1j * im


def read_json(path) -> object:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")


def read_matrix(path) -> np.ndarray:
    return decode_matrix(read_json(path))


def write_matrix(path, a) -> None:
    write_json(path, encode_matrix(a))


_MATRIX_KEYS = {"unitary": ("u",), "transfer": ("matrix",)}


def decode_channel(obj) -> QuantumMap:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError("channel object needs a 'kind'")
    spec = dict(obj)
    for key in _MATRIX_KEYS.get(spec["kind"], ()):
        if key in spec:
            spec[key] = decode_matrix(spec[key])
    if spec["kind"] == "kraus":
        spec["ops"] = [decode_matrix(m) for m in spec.get("ops", [])]
    return make_channel(spec)


def encode_channel(gamma: QuantumMap) -> dict:
    """Kraus form when known, transfer form otherwise."""
    if gamma.kraus is not None:
        return {"kind": "kraus", "ops": [encode_matrix(k) for k in gamma.kraus]}
    return {"kind": "transfer", "dim_in": gamma.dim_in, "dim_out": gamma.dim_out,
            "matrix": encode_matrix(gamma.transfer), "positive": gamma.positive}


def read_channel(path) -> QuantumMap:
    return decode_channel(read_json(path))


def write_channel(path, gamma: QuantumMap) -> None:
    write_json(path, encode_channel(gamma))
