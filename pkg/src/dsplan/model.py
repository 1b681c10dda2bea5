"""Domain types, label parsing, dataset file I/O, and matrix validation.

Conventions used across the package:

* A *sequence* is a 1-D integer array of non-ignored part ids in reversed
  storage order: position 1 (index 0) holds the part removed LAST, the final
  position holds the part removed FIRST.  Use ``removal_order`` to flip.
* Relation matrices are indexed by ``part_order``, the declared list of
  non-ignored part ids.  Entry (i, k) always reads "row part i is the
  still-assembled obstacle, column part k is the part being moved".
* Translation layers are ordered +x, +y, +z, -x, -y, -z; the twelve
  constraint-direction layers append +rx, +ry, +rz, -rx, -ry, -rz
  (rotations about the object axes through the moving part's COM).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

TASK_LABELS = ("screw", "bolt", "nut", "plate", "graspable", "manual")
FIXING_LABELS = frozenset({"screw", "bolt"})

DATASET_VERSION = 1

N_TRANSLATIONS = 6
N_DIRECTIONS = 12
MAX_CONSTRAINT_DEGREE = 12


class DatasetError(Exception):
    """Base class for dataset file and invariant problems."""


class SchemaError(DatasetError):
    """Dataset file is missing fields or declares an unsupported version."""


class ValidationError(DatasetError):
    """An invariant is violated; carries the matrix name and indices."""

    def __init__(self, message: str, matrix: str | None = None,
                 index: tuple | None = None):
        super().__init__(message)
        self.matrix = matrix
        self.index = index


class TransposeViolation(ValidationError):
    """A negative-direction layer is not the transpose of its positive twin."""


class MissingTaskLabel(ValueError):
    """A part name contains no recognizable task-label token."""


@dataclass(frozen=True)
class ParsedLabels:
    """Labels recovered from an underscore-delimited part name."""

    task: str
    priority: bool = False
    base: bool = False
    ignore: bool = False
    unknown: tuple[str, ...] = ()


def parse_labels(name: str) -> ParsedLabels:
    """Split ``name`` on underscores and classify the tokens.

    The first task-label token becomes the task; ``value``/``base``/``ignore``
    tokens set the corresponding flags.  Anything else (including a second,
    different task token) is surfaced in ``unknown`` rather than dropped.

    Raises MissingTaskLabel when no task token is present.
    """
    if not name:
        raise MissingTaskLabel("empty part name")
    task = None
    priority = base = ignore = False
    unknown: list[str] = []
    for token in name.split("_"):
        if token in TASK_LABELS:
            if task is None:
                task = token
            elif token != task:
                unknown.append(token)
        elif token == "value":
            priority = True
        elif token == "base":
            base = True
        elif token == "ignore":
            ignore = True
        else:
            unknown.append(token)
    if task is None:
        raise MissingTaskLabel(f"no task label token in part name {name!r}")
    return ParsedLabels(task, priority, base, ignore, tuple(unknown))


@dataclass(frozen=True)
class Part:
    """A single product part with its labels and bookkeeping fields."""

    id: int
    name: str
    task_label: str
    priority: bool = False
    base: bool = False
    ignore: bool = False
    com: tuple[float, float, float] = (0.0, 0.0, 0.0)
    eef: str | None = None
    size: float | None = None

    def __post_init__(self):
        if self.id < 1:
            raise ValidationError(f"part id must be >= 1, got {self.id}")
        if self.task_label not in TASK_LABELS:
            raise ValidationError(
                f"part {self.id}: unknown task label {self.task_label!r}")


@dataclass(frozen=True)
class PartCatalog:
    """All parts of a product, with unique contiguous ids 1..N."""

    parts: tuple[Part, ...]

    def __post_init__(self):
        ids = sorted(p.id for p in self.parts)
        if ids != list(range(1, len(self.parts) + 1)):
            raise ValidationError("part ids must be unique and contiguous 1..N")
        if sum(p.base for p in self.parts) > 1:
            raise ValidationError("at most one part may carry the base label")
        object.__setattr__(self, "_by_id", {p.id: p for p in self.parts})

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[Part]:
        return iter(self.parts)

    def by_id(self, part_id: int) -> Part:
        return self._by_id[part_id]

    def non_ignored_ids(self) -> tuple[int, ...]:
        return tuple(p.id for p in self.parts if not p.ignore)

    def base_part(self) -> Part | None:
        for p in self.parts:
            if p.base:
                return p
        return None


@dataclass
class RelationMatrices:
    """The pairwise relation layers over ``part_order``.

    interference_free: (6, N, N) binary, full-extent translation sweeps.
    constraint_free:   (12, N, N) binary, small-clearance translations and
                       small-angle rotations.
    contact:           (N, N) binary face-adjacency.
    constraint_degree: (N, N) integers in 0..12, 12 minus the count of free
                       constraint directions for the pair.
    """

    part_order: tuple[int, ...]
    interference_free: np.ndarray
    constraint_free: np.ndarray
    contact: np.ndarray
    constraint_degree: np.ndarray
    _index: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.part_order = tuple(int(i) for i in self.part_order)
        self._index = {pid: j for j, pid in enumerate(self.part_order)}

    @property
    def n(self) -> int:
        return len(self.part_order)

    def index_of(self, part_id: int) -> int:
        return self._index[part_id]

    def validate(self, catalog: PartCatalog | None = None) -> None:
        """Check every structural invariant; raise ValidationError on failure."""
        n = self.n
        if len(set(self.part_order)) != n:
            raise ValidationError("part_order contains duplicate ids")
        if catalog is not None:
            if sorted(self.part_order) != sorted(catalog.non_ignored_ids()):
                raise ValidationError(
                    "part_order must list exactly the non-ignored part ids")
        for name, arr, layers in (
                ("x_if", self.interference_free, N_TRANSLATIONS),
                ("x_cf", self.constraint_free, N_DIRECTIONS)):
            if arr.shape != (layers, n, n):
                raise ValidationError(
                    f"{name} must have shape ({layers}, {n}, {n}), "
                    f"got {arr.shape}", matrix=name)
            bad = (arr != 0) & (arr != 1)
            if bad.any():
                j, i, k = map(int, np.argwhere(bad)[0])
                raise ValidationError(
                    f"{name} layer {j + 1} has non-binary entry at ({i}, {k})",
                    matrix=name, index=(j, i, k))
        if self.contact.shape != (n, n):
            raise ValidationError(f"x_ct must be {n}x{n}", matrix="x_ct")
        if ((self.contact != 0) & (self.contact != 1)).any():
            raise ValidationError("x_ct has non-binary entries", matrix="x_ct")
        for j in range(3):
            for name, arr in (("x_if", self.interference_free),
                              ("x_cf", self.constraint_free)):
                diff = arr[j + 3] != arr[j].T
                if diff.any():
                    i, k = map(int, np.argwhere(diff)[0])
                    raise TransposeViolation(
                        f"{name} layer {j + 4} != transpose of layer {j + 1} "
                        f"at ({i}, {k})", matrix=name, index=(j + 3, i, k))
        if (self.contact != self.contact.T).any():
            i, k = map(int, np.argwhere(self.contact != self.contact.T)[0])
            raise ValidationError(
                f"x_ct is not symmetric at ({i}, {k})",
                matrix="x_ct", index=(i, k))
        if np.diag(self.contact).any():
            raise ValidationError("x_ct diagonal must be zero", matrix="x_ct")
        derived = derive_constraint_degree(self.constraint_free)
        diff = self.constraint_degree != derived
        if diff.any():
            i, k = map(int, np.argwhere(diff)[0])
            raise ValidationError(
                f"x_cs({i}, {k}) = {int(self.constraint_degree[i, k])} does "
                f"not match the value {int(derived[i, k])} derived from x_cf",
                matrix="x_cs", index=(i, k))
        if (self.constraint_degree != self.constraint_degree.T).any():
            bad = self.constraint_degree != self.constraint_degree.T
            i, k = map(int, np.argwhere(bad)[0])
            raise ValidationError(
                f"x_cs is not symmetric at ({i}, {k})",
                matrix="x_cs", index=(i, k))
        hidden = (self.contact == 1) & (self.constraint_degree < 1)
        np.fill_diagonal(hidden, False)
        if hidden.any():
            i, k = map(int, np.argwhere(hidden)[0])
            raise ValidationError(
                f"parts in contact must have constraint degree >= 1, "
                f"violated at ({i}, {k})", matrix="x_cs", index=(i, k))


def derive_constraint_degree(constraint_free: np.ndarray) -> np.ndarray:
    """Constraint degree = 12 minus the number of free directions per pair.

    The diagonal is forced to zero regardless of the layer contents.
    """
    if constraint_free.shape[0] != N_DIRECTIONS:
        raise ValueError(f"expected {N_DIRECTIONS} layers, "
                         f"got {constraint_free.shape[0]}")
    degree = (MAX_CONSTRAINT_DEGREE
              - constraint_free.sum(axis=0)).astype(np.int16)
    np.fill_diagonal(degree, 0)
    return degree


@dataclass(frozen=True)
class Motion:
    """One candidate extraction motion and its per-part collision row.

    ``row`` is indexed by ``part_order``; entry 1 means the swept motion
    avoids that part.  The entry for the moving part itself is meaningless
    and stored as 1.
    """

    id: int
    kind: str
    row: np.ndarray


@dataclass
class MotionTable:
    """Candidate motions per part id; a part may legitimately have none."""

    part_order: tuple[int, ...]
    motions: dict[int, tuple[Motion, ...]]

    def __post_init__(self):
        self.part_order = tuple(int(i) for i in self.part_order)

    def count(self, part_id: int) -> int:
        return len(self.motions.get(part_id, ()))

    def validate(self) -> None:
        n = len(self.part_order)
        known = set(self.part_order)
        for pid, entries in self.motions.items():
            if pid not in known:
                raise ValidationError(
                    f"motion table lists unknown part id {pid}")
            for m in entries:
                if m.row.shape != (n,):
                    raise ValidationError(
                        f"motion {m.id} of part {pid} has row length "
                        f"{m.row.shape[0]}, expected {n}")
                if ((m.row != 0) & (m.row != 1)).any():
                    raise ValidationError(
                        f"motion {m.id} of part {pid} has non-binary entries")


class Dataset(NamedTuple):
    """The loaded product description: catalog, matrices, motion table."""

    catalog: PartCatalog
    matrices: RelationMatrices
    motions: MotionTable


def is_sequence(seq, catalog: PartCatalog) -> bool:
    """True when ``seq`` is a permutation of the non-ignored part ids."""
    return sorted(int(x) for x in seq) == sorted(catalog.non_ignored_ids())


def validate_sequence(seq, catalog: PartCatalog) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.int64)
    if not is_sequence(arr, catalog):
        raise ValueError("sequence is not a permutation of the non-ignored "
                         "part ids")
    return arr


def removal_order(seq) -> np.ndarray:
    """Flip a stored sequence into first-removed-first order (and back)."""
    return np.asarray(seq)[::-1].copy()


def _part_to_json(p: Part) -> dict:
    labels = {"task": p.task_label, "priority": p.priority,
              "base": p.base, "ignore": p.ignore}
    out = {"id": p.id, "name": p.name, "labels": labels,
           "com": [float(c) for c in p.com], "eef": p.eef}
    if p.size is not None:
        out["size"] = float(p.size)
    return out


def _part_from_json(obj: dict) -> Part:
    try:
        labels = obj["labels"]
        return Part(
            id=int(obj["id"]),
            name=str(obj["name"]),
            task_label=str(labels["task"]),
            priority=bool(labels.get("priority", False)),
            base=bool(labels.get("base", False)),
            ignore=bool(labels.get("ignore", False)),
            com=tuple(float(c) for c in obj["com"]),
            eef=obj.get("eef"),
            size=(float(obj["size"]) if obj.get("size") is not None else None),
        )
    except KeyError as exc:
        raise SchemaError(f"part entry missing field {exc}") from exc


def dataset_to_json(dataset: Dataset) -> str:
    """Canonical JSON text of a dataset (stable bytes for a given input)."""
    catalog, matrices, motions = dataset
    doc = {
        "version": DATASET_VERSION,
        "parts": [_part_to_json(p) for p in catalog],
        "part_order": list(matrices.part_order),
        "x_if": matrices.interference_free.astype(int).tolist(),
        "x_cf": matrices.constraint_free.astype(int).tolist(),
        "x_ct": matrices.contact.astype(int).tolist(),
        "x_cs": matrices.constraint_degree.astype(int).tolist(),
        "motions": {
            str(pid): [{"id": m.id, "kind": m.kind,
                        "row": m.row.astype(int).tolist()}
                       for m in entries]
            for pid, entries in sorted(motions.motions.items())
        },
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    Path(path).write_text(dataset_to_json(dataset), encoding="utf-8")


def load_dataset(path: str | Path) -> Dataset:
    """Load and fully validate a dataset file.

    Raises SchemaError for malformed or version-mismatched files and
    ValidationError (with matrix name and indices) for invariant violations.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("top-level value must be an object")
    version = doc.get("version")
    if version != DATASET_VERSION:
        raise SchemaError(
            f"unsupported dataset version {version!r}, "
            f"expected {DATASET_VERSION}")
    for key in ("parts", "part_order", "x_if", "x_cf", "x_ct", "motions"):
        if key not in doc:
            raise SchemaError(f"missing top-level field {key!r}")

    catalog = PartCatalog(tuple(_part_from_json(p) for p in doc["parts"]))
    part_order = tuple(int(i) for i in doc["part_order"])
    n = len(part_order)

    def as_array(key, shape, dtype):
        arr = np.asarray(doc[key], dtype=dtype)
        if arr.shape != shape:
            raise SchemaError(
                f"{key} must have shape {shape}, got {arr.shape}")
        return arr

    x_if = as_array("x_if", (N_TRANSLATIONS, n, n), np.uint8)
    x_cf = as_array("x_cf", (N_DIRECTIONS, n, n), np.uint8)
    x_ct = as_array("x_ct", (n, n), np.uint8)
    if "x_cs" in doc and doc["x_cs"] is not None:
        x_cs = as_array("x_cs", (n, n), np.int16)
    else:
        x_cs = derive_constraint_degree(x_cf)
    matrices = RelationMatrices(part_order, x_if, x_cf, x_ct, x_cs)
    matrices.validate(catalog)

    motion_map: dict[int, tuple[Motion, ...]] = {}
    for key, entries in doc["motions"].items():
        try:
            pid = int(key)
        except ValueError as exc:
            raise SchemaError(f"motion key {key!r} is not a part id") from exc
        motion_map[pid] = tuple(
            Motion(id=int(m["id"]), kind=str(m["kind"]),
                   row=np.asarray(m["row"], dtype=np.uint8))
            for m in entries)
    motions = MotionTable(part_order, motion_map)
    motions.validate()
    return Dataset(catalog, matrices, motions)


def dataset_digest(path: str | Path) -> str:
    """Hex SHA-256 of the dataset file bytes, for run provenance logs."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dataset_content_digest(dataset: Dataset) -> str:
    """Digest of an in-memory dataset's canonical serialization."""
    return hashlib.sha256(dataset_to_json(dataset).encode()).hexdigest()
