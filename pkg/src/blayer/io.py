"""JSON and CSV persistence.

JSON documents are UTF-8. Every real number is written as a decimal string
with 17 significant digits, complex numbers as {"re": .., "im": ..} and
complex arrays as a pair of string arrays. Dataclasses carry a "type" tag
and are rebuilt from their field annotations.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import os
import typing
from pathlib import Path

import numpy as np

from .numerics import ComplexProfile, Grid1D

__all__ = ["encode", "decode", "dump_json", "load_json", "write_csv", "read_csv",
           "fmt", "sha256_file", "canonical_json"]


def fmt(x: float) -> str:
    return format(float(x), ".16e")


def _enc_array(a):
    a = np.asarray(a)
    if np.iscomplexobj(a):
        return {"re": [fmt(v) for v in a.real], "im": [fmt(v) for v in a.imag]}
    return [fmt(v) for v in a.ravel()]


def encode(obj):
    """Turn library objects into JSON-ready structures."""
    if isinstance(obj, Grid1D):
        return {"type": "Grid1D", "lo": fmt(obj.lo), "hi": fmt(obj.hi), "n": obj.n,
                "marked": obj.marked}
    if isinstance(obj, ComplexProfile):
        return {"type": "ComplexProfile", "grid": encode(obj.grid), "values": _enc_array(obj.values)}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {"type": type(obj).__name__}
        for f in dataclasses.fields(obj):
            if f.init and not f.name.startswith("_"):
                out[f.name] = encode(getattr(obj, f.name))
        return out
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": fmt(obj.real), "im": fmt(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _enc_array(obj)
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    return obj


def _registry():
    from . import evolution, prandtl, profiles, spectral
    reg = {}
    for mod in (spectral, profiles, evolution, prandtl):
        for name in dir(mod):
            c = getattr(mod, name)
            if isinstance(c, type) and dataclasses.is_dataclass(c):
                reg[name] = c
    return reg


def _num(s):
    return float(s)


def decode(doc, hint=None):
    """Inverse of encode for tagged documents and annotated fields."""
    if isinstance(doc, dict) and "type" in doc:
        t = doc["type"]
        if t == "Grid1D":
            return Grid1D(float(doc["lo"]), float(doc["hi"]), int(doc["n"]), doc.get("marked"))
        if t == "ComplexProfile":
            g = decode(doc["grid"])
            v = doc["values"]
            arr = (np.array(v["re"], float) + 1j * np.array(v["im"], float)
                   if isinstance(v, dict) else np.array(v, float))
            return ComplexProfile(g, arr)
        cls = _registry().get(t)
        if cls is None:
            raise ValueError(f"unknown document type {t!r}")
        hints = typing.get_type_hints(cls)
        kw = {}
        for f in dataclasses.fields(cls):
            if f.init and f.name in doc:
                kw[f.name] = decode(doc[f.name], hints.get(f.name))
        return cls(**kw)
    if isinstance(doc, dict) and set(doc) == {"re", "im"}:
        if isinstance(doc["re"], list):
            return np.array(doc["re"], float) + 1j * np.array(doc["im"], float)
        return complex(float(doc["re"]), float(doc["im"]))
    if isinstance(doc, str) and hint in (float, typing.Optional[float]):
        return float(doc)
    if isinstance(doc, str) and hint is complex:
        return complex(doc)
    if isinstance(doc, list):
        if hint is np.ndarray:
            return np.array([float(v) for v in doc])
        if doc and all(isinstance(v, str) for v in doc) and _looks_numeric(doc[0]):
            return tuple(float(v) for v in doc)
        return tuple(decode(v) for v in doc)
    if isinstance(doc, str) and hint is None and _looks_numeric(doc):
        return float(doc)
    return doc


def _looks_numeric(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def dump_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(canonical_json(encode(obj)), encoding="utf-8")
    os.replace(tmp, path)
    return path


def load_json(path):
    return decode(json.loads(Path(path).read_text(encoding="utf-8")))


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
