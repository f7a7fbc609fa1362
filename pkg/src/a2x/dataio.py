"""On-disk artifacts: labeled image tensors, embedding sets, and class mappings.

Two binary containers and one JSON document, all little-endian and
deterministic so that write -> read -> write is byte-identical:

* dataset  (magic ``A2XD``): header ``magic | version u16 | flags u16 |
  n u64 | channels u16 | height u16 | width u16 | num_classes u32``
  followed by ``n`` labels (u32) and ``n*C*H*W`` pixels (u8, row-major
  sample -> channel -> row -> column).
* embeddings (magic ``A2XE``): header ``magic | version u16 | flags u16 |
  n u64 | dim u32 | num_classes u32`` followed by ``n`` interleaved rows
  of ``(label u32, dim * f32)``.
* mapping (JSON, UTF-8): ``{"num_classes", "x", "groups", "targets",
  "table"}`` with integer arrays.

Readers never return values that violate the type invariants; corrupt
input raises :class:`FormatError` or :class:`ValidationError` instead.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .errors import FormatError, ValidationError

DATASET_MAGIC = b"A2XD"
EMBEDDINGS_MAGIC = b"A2XE"
CONTAINER_VERSION = 1

_DATASET_HEADER = struct.Struct("<4sHHQHHHI")
_EMBEDDINGS_HEADER = struct.Struct("<4sHHQII")

# Hard cap on n*C*H*W (and n*dim) so a corrupt header cannot demand an
# absurd allocation before the truncation check fires.
_MAX_ELEMENTS = 1 << 63

Source = Union[str, Path, BinaryIO]


@dataclass(eq=False)
class TensorDataset:
    """Labeled u8 image tensors, shape (n, channels, height, width)."""

    channels: int
    height: int
    width: int
    num_classes: int
    labels: np.ndarray
    pixels: np.ndarray

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    def validate(self) -> None:
        if min(self.channels, self.height, self.width) <= 0:
            raise ValidationError("pixel dimensions must be positive")
        if self.num_classes <= 0:
            raise ValidationError("num_classes must be positive")
        if max(self.channels, self.height, self.width) > 0xFFFF:
            raise ValidationError("pixel dimension overflows u16")
        if self.num_classes > 0xFFFFFFFF:
            raise ValidationError("num_classes overflows u32")
        if self.labels.dtype != np.uint32 or self.labels.ndim != 1:
            raise ValidationError("labels must be a 1-d uint32 array")
        expected = (self.n, self.channels, self.height, self.width)
        if self.pixels.dtype != np.uint8 or self.pixels.shape != expected:
            raise ValidationError(
                f"pixels must be uint8 with shape {expected}, got "
                f"{self.pixels.dtype} {self.pixels.shape}"
            )
        if self.n and int(self.labels.max()) >= self.num_classes:
            raise ValidationError("label out of range [0, num_classes)")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TensorDataset):
            return NotImplemented
        return (
            (self.channels, self.height, self.width, self.num_classes)
            == (other.channels, other.height, other.width, other.num_classes)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(eq=False)
class EmbeddingSet:
    """Per-sample float32 feature vectors with labels, every class populated."""

    dim: int
    num_classes: int
    labels: np.ndarray
    vectors: np.ndarray

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    def validate(self) -> None:
        if self.dim <= 0:
            raise ValidationError("dim must be positive")
        if self.num_classes <= 0:
            raise ValidationError("num_classes must be positive")
        if self.dim > 0xFFFFFFFF or self.num_classes > 0xFFFFFFFF:
            raise ValidationError("dim/num_classes overflows u32")
        if self.labels.dtype != np.uint32 or self.labels.ndim != 1:
            raise ValidationError("labels must be a 1-d uint32 array")
        if self.vectors.dtype != np.float32 or self.vectors.shape != (self.n, self.dim):
            raise ValidationError(
                f"vectors must be float32 with shape {(self.n, self.dim)}"
            )
        if self.n and int(self.labels.max()) >= self.num_classes:
            raise ValidationError("label out of range [0, num_classes)")
        present = np.unique(self.labels)
        if len(present) != self.num_classes:
            missing = sorted(set(range(self.num_classes)) - set(int(v) for v in present))
            raise ValidationError(f"classes without any row: {missing}")
        if not np.isfinite(self.vectors).all():
            raise ValidationError("vectors contain NaN or Inf")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingSet):
            return NotImplemented
        return (
            (self.dim, self.num_classes) == (other.dim, other.num_classes)
            and np.array_equal(self.labels, other.labels)
            # bitwise comparison; NaN cannot occur in a valid set
            and self.vectors.tobytes() == other.vectors.tobytes()
        )


@dataclass
class Mapping:
    """A source-class -> target-class map: a partition into groups plus one
    distinct target per group, flattened into a per-class lookup table."""

    num_classes: int
    groups: list[list[int]]
    targets: list[int]
    table: list[int] = field(default_factory=list)

    @property
    def x(self) -> int:
        return len(self.groups)

    @classmethod
    def from_groups(
        cls, num_classes: int, groups: list[list[int]], targets: list[int]
    ) -> "Mapping":
        """Build a mapping with the table derived from groups and targets."""
        table = [-1] * num_classes
        for g, members in enumerate(groups):
            for y in members:
                if 0 <= y < num_classes and g < len(targets):
                    table[y] = targets[g]
        m = cls(num_classes=num_classes, groups=[list(g) for g in groups],
                targets=list(targets), table=table)
        m.validate()
        return m

    def validate(self) -> None:
        errors = mapping_errors(self)
        if errors:
            raise ValidationError("; ".join(errors))


def mapping_errors(m: Mapping) -> list[str]:
    """All invariant violations of ``m``, as human-readable strings."""
    errors: list[str] = []
    if m.num_classes <= 0:
        return ["num_classes must be positive"]
    if not 1 <= len(m.groups) <= m.num_classes:
        errors.append(f"group count {len(m.groups)} outside [1, {m.num_classes}]")
    seen: set[int] = set()
    for g, members in enumerate(m.groups):
        if not members:
            errors.append(f"group {g} is empty")
        for y in members:
            if not 0 <= y < m.num_classes:
                errors.append(f"group {g} contains out-of-range class {y}")
            elif y in seen:
                errors.append(f"class {y} appears in more than one group")
            seen.add(y)
    missing = set(range(m.num_classes)) - seen
    if missing:
        errors.append(f"classes missing from all groups: {sorted(missing)}")
    if len(m.targets) != len(m.groups):
        errors.append(f"{len(m.targets)} targets for {len(m.groups)} groups")
    for t in m.targets:
        if not 0 <= t < m.num_classes:
            errors.append(f"target {t} out of range")
    if len(set(m.targets)) != len(m.targets):
        errors.append("targets are not pairwise distinct")
    if errors:
        return errors
    if len(m.table) != m.num_classes:
        return [f"table has {len(m.table)} entries for {m.num_classes} classes"]
    for g, members in enumerate(m.groups):
        for y in members:
            if m.table[y] != m.targets[g]:
                errors.append(
                    f"table[{y}]={m.table[y]} inconsistent with target "
                    f"{m.targets[g]} of its group"
                )
    return errors


def _open(source: Source, mode: str):
    if isinstance(source, (str, Path)):
        return open(source, mode), True
    return source, False


def _read_exact(f: BinaryIO, count: int, what: str) -> bytes:
    buf = f.read(count)
    if len(buf) != count:
        raise FormatError(f"truncated while reading {what}: wanted {count} bytes, got {len(buf)}")
    return buf


def write_dataset(ds: TensorDataset, sink: Source) -> None:
    """Serialize a validated dataset; nothing is written on invalid input."""
    ds.validate()
    header = _DATASET_HEADER.pack(
        DATASET_MAGIC, CONTAINER_VERSION, 0, ds.n,
        ds.channels, ds.height, ds.width, ds.num_classes,
    )
    f, close = _open(sink, "wb")
    try:
        f.write(header)
        f.write(np.ascontiguousarray(ds.labels, dtype="<u4").tobytes())
        f.write(np.ascontiguousarray(ds.pixels, dtype=np.uint8).tobytes())
    finally:
        if close:
            f.close()


def read_dataset(source: Source) -> TensorDataset:
    f, close = _open(source, "rb")
    try:
        raw = _read_exact(f, _DATASET_HEADER.size, "dataset header")
        magic, version, flags, n, c, h, w, k = _DATASET_HEADER.unpack(raw)
        if magic != DATASET_MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {DATASET_MAGIC!r}")
        if version != CONTAINER_VERSION:
            raise FormatError(f"unsupported dataset version {version}")
        if flags != 0:
            raise FormatError(f"unknown flags {flags:#x}")
        if n * c * h * w >= _MAX_ELEMENTS:
            raise FormatError("dimension overflow in dataset header")
        labels = np.frombuffer(_read_exact(f, 4 * n, "labels"), dtype="<u4").copy()
        pixels = np.frombuffer(
            _read_exact(f, n * c * h * w, "pixels"), dtype=np.uint8
        ).copy().reshape(n, c, h, w)
        ds = TensorDataset(
            channels=c, height=h, width=w, num_classes=k, labels=labels, pixels=pixels
        )
        ds.validate()
        return ds
    finally:
        if close:
            f.close()


def write_embeddings(e: EmbeddingSet, sink: Source) -> None:
    """Serialize a validated embedding set with interleaved (label, vector) rows."""
    e.validate()
    header = _EMBEDDINGS_HEADER.pack(
        EMBEDDINGS_MAGIC, CONTAINER_VERSION, 0, e.n, e.dim, e.num_classes
    )
    row_dt = np.dtype([("label", "<u4"), ("vec", "<f4", (e.dim,))])
    rows = np.empty(e.n, dtype=row_dt)
    rows["label"] = e.labels
    rows["vec"] = e.vectors
    f, close = _open(sink, "wb")
    try:
        f.write(header)
        f.write(rows.tobytes())
    finally:
        if close:
            f.close()


def read_embeddings(source: Source) -> EmbeddingSet:
    f, close = _open(source, "rb")
    try:
        raw = _read_exact(f, _EMBEDDINGS_HEADER.size, "embeddings header")
        magic, version, flags, n, dim, k = _EMBEDDINGS_HEADER.unpack(raw)
        if magic != EMBEDDINGS_MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {EMBEDDINGS_MAGIC!r}")
        if version != CONTAINER_VERSION:
            raise FormatError(f"unsupported embeddings version {version}")
        if flags != 0:
            raise FormatError(f"unknown flags {flags:#x}")
        if n * dim >= _MAX_ELEMENTS:
            raise FormatError("dimension overflow in embeddings header")
        row_dt = np.dtype([("label", "<u4"), ("vec", "<f4", (dim,))])
        rows = np.frombuffer(_read_exact(f, row_dt.itemsize * n, "rows"), dtype=row_dt)
        e = EmbeddingSet(
            dim=dim,
            num_classes=k,
            labels=rows["label"].copy(),
            vectors=rows["vec"].reshape(n, dim).copy(),
        )
        e.validate()
        return e
    finally:
        if close:
            f.close()


def mapping_to_json(m: Mapping, compact: bool = False) -> str:
    doc = {
        "num_classes": m.num_classes,
        "x": m.x,
        "groups": m.groups,
        "targets": m.targets,
        "table": m.table,
    }
    if compact:
        return json.dumps(doc, separators=(",", ":"))
    return json.dumps(doc, indent=2) + "\n"


_MAPPING_KEYS = {"num_classes", "x", "groups", "targets", "table"}


def mapping_from_json(text: str) -> Mapping:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"mapping file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or set(doc) != _MAPPING_KEYS:
        raise FormatError(f"mapping JSON must have exactly the keys {sorted(_MAPPING_KEYS)}")

    def as_int(v, what):
        if isinstance(v, bool) or not isinstance(v, int):
            raise FormatError(f"{what} must be an integer, got {v!r}")
        return v

    groups = doc["groups"]
    if not isinstance(groups, list) or not all(isinstance(g, list) for g in groups):
        raise FormatError("groups must be a list of integer lists")
    if not isinstance(doc["targets"], list) or not isinstance(doc["table"], list):
        raise FormatError("targets and table must be integer lists")
    m = Mapping(
        num_classes=as_int(doc["num_classes"], "num_classes"),
        groups=[[as_int(y, "group member") for y in g] for g in groups],
        targets=[as_int(t, "target") for t in doc["targets"]],
        table=[as_int(t, "table entry") for t in doc["table"]],
    )
    if as_int(doc["x"], "x") != m.x:
        raise ValidationError(f"x={doc['x']} inconsistent with {m.x} groups")
    m.validate()
    return m


def write_mapping(m: Mapping, sink: Source) -> None:
    m.validate()
    text = mapping_to_json(m)
    f, close = _open(sink, "wb")
    try:
        f.write(text.encode("utf-8"))
    finally:
        if close:
            f.close()


def read_mapping(source: Source) -> Mapping:
    f, close = _open(source, "rb")
    try:
        data = f.read()
    finally:
        if close:
            f.close()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"mapping file is not UTF-8: {exc}") from exc
    return mapping_from_json(text)
