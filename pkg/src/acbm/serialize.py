"""JSON fixture documents.

A document is ``{"schema_version", "n", "kind", "payload", "metadata"}`` plus an
optional ``"structure"`` block (same layout as a structure payload) for the
tensor kinds; when absent the canonical structure of that n is assumed.
Floats are written with ``repr`` (shortest round-trip form), so a
load/dump cycle is bit-exact.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import AcbmError
from .structure import Structure, canonical_structure

SCHEMA_VERSION = "1.0"
SUPPORTED_VERSIONS = frozenset({SCHEMA_VERSION})
KIND_RANKS = {"f_tensor": 3, "curv_tensor": 4, "torsion": 3}
KINDS = ("structure",) + tuple(KIND_RANKS)


class SchemaError(AcbmError):
    pass


@dataclass
class FixtureDocument:
    n: int
    kind: str
    payload: object
    metadata: dict[str, str] = field(default_factory=dict)
    structure: dict | None = None
    schema_version: str = SCHEMA_VERSION

    def to_json(self) -> str:
        doc = {
            "schema_version": self.schema_version,
            "n": self.n,
            "kind": self.kind,
            "payload": self.payload,
            "metadata": dict(self.metadata),
        }
        if self.structure is not None:
            doc["structure"] = self.structure
        return dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "FixtureDocument":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw) -> "FixtureDocument":
        if not isinstance(raw, dict):
            raise SchemaError("document must be a JSON object")
        missing = {"schema_version", "n", "kind", "payload"} - raw.keys()
        if missing:
            raise SchemaError(f"missing fields: {sorted(missing)}")
        if raw["schema_version"] not in SUPPORTED_VERSIONS:
            raise SchemaError(f"unsupported schema_version {raw['schema_version']!r}")
        n = raw["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise SchemaError(f"n must be a positive integer, got {n!r}")
        kind = raw["kind"]
        if kind not in KINDS:
            raise SchemaError(f"unknown kind {kind!r}")
        metadata = raw.get("metadata", {})
        if not isinstance(metadata, dict) or not all(
                isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()):
            raise SchemaError("metadata must map strings to strings")
        doc = cls(n=n, kind=kind, payload=raw["payload"], metadata=metadata,
                  structure=raw.get("structure"), schema_version=raw["schema_version"])
        doc.validate()
        return doc

    def validate(self) -> None:
        d = 2 * self.n + 1
        if self.kind == "structure":
            _check_structure_payload(self.payload, d)
        else:
            _check_array(self.payload, (d,) * KIND_RANKS[self.kind], "payload")
            if self.structure is not None:
                _check_structure_payload(self.structure, d)

    def array(self) -> np.ndarray:
        if self.kind == "structure":
            raise SchemaError("structure documents have no single array payload")
        return np.array(self.payload, dtype=np.float64)

    def get_structure(self) -> Structure:
        block = self.payload if self.kind == "structure" else self.structure
        if block is None:
            return canonical_structure(self.n)
        return Structure(
            n=self.n,
            phi=np.array(block["phi"], dtype=np.float64),
            xi=np.array(block["xi"], dtype=np.float64),
            eta=np.array(block["eta"], dtype=np.float64),
            g=np.array(block["g"], dtype=np.float64),
        )


def _check_array(values, shape: tuple[int, ...], label: str) -> None:
    try:
        arr = np.array(values, dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{label}: not a rectangular numeric array ({exc})") from exc
    if arr.shape != shape:
        raise SchemaError(f"{label}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{label}: non-finite entries")


def _check_structure_payload(block, d: int) -> None:
    if not isinstance(block, dict):
        raise SchemaError("structure block must be an object with phi, xi, eta, g")
    shapes = {"phi": (d, d), "xi": (d,), "eta": (d,), "g": (d, d)}
    missing = shapes.keys() - block.keys()
    if missing:
        raise SchemaError(f"structure block missing {sorted(missing)}")
    for key, shape in shapes.items():
        _check_array(block[key], shape, f"structure.{key}")


def structure_payload(s: Structure) -> dict:
    return {"phi": s.phi.tolist(), "xi": s.xi.tolist(), "eta": s.eta.tolist(), "g": s.g.tolist()}


def structure_document(s: Structure, metadata: dict[str, str] | None = None) -> FixtureDocument:
    return FixtureDocument(n=s.n, kind="structure", payload=structure_payload(s), metadata=metadata or {})


def tensor_document(kind: str, T, s: Structure, metadata: dict[str, str] | None = None) -> FixtureDocument:
    if kind not in KIND_RANKS:
        raise SchemaError(f"unknown tensor kind {kind!r}")
    doc = FixtureDocument(n=s.n, kind=kind, payload=np.asarray(T, dtype=np.float64).tolist(),
                          metadata=metadata or {}, structure=structure_payload(s))
    doc.validate()
    return doc


def dumps(obj) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
