"""Desk-scale geometric simulation over axis-aligned voxel assemblies.

Produces every pairwise relation layer (translation sweeps, small-clearance
constraint directions, contacts) plus straight-line extraction motions, so
the full planning pipeline can be exercised on synthetic products without
any CAD input.  All sweeps advance one cell at a time; a single end-pose
teleport could tunnel through thin walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Dataset,
    Motion,
    MotionTable,
    Part,
    PartCatalog,
    RelationMatrices,
    derive_constraint_degree,
    parse_labels,
)

TRANSLATION_KINDS = ("+x", "+y", "+z", "-x", "-y", "-z")

_EEF_BY_TASK = {"screw": "E5", "bolt": "E6", "nut": "E6",
                "plate": "E7", "graspable": "E2", "manual": None}


@dataclass
class VoxelAssembly:
    """Parts as sets of occupied integer lattice cells on a common grid.

    ``cells`` maps part id to an (M, 3) integer array; ``bounds`` is the
    workspace box as (lo, hi) with hi exclusive.  The assembled state must
    be interference-free: no two parts share a cell.
    """

    pitch: float
    cells: dict[int, np.ndarray]
    bounds: tuple[tuple[int, int, int], tuple[int, int, int]]

    def __post_init__(self):
        self.cells = {int(pid): np.asarray(arr, dtype=np.int64).reshape(-1, 3)
                      for pid, arr in self.cells.items()}

    def validate(self) -> None:
        if self.pitch <= 0:
            raise ValueError("grid pitch must be positive")
        lo = np.asarray(self.bounds[0])
        hi = np.asarray(self.bounds[1])
        seen: dict[tuple[int, int, int], int] = {}
        for pid, arr in self.cells.items():
            if arr.shape[0] == 0:
                raise ValueError(f"part {pid} has no cells")
            if ((arr < lo) | (arr >= hi)).any():
                raise ValueError(f"part {pid} extends outside the workspace")
            for cell in map(tuple, arr.tolist()):
                other = seen.setdefault(cell, pid)
                if other != pid:
                    raise ValueError(
                        f"parts {other} and {pid} overlap at cell {cell}")

    def part_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.cells))

    def occupied_bbox(self) -> tuple[np.ndarray, np.ndarray]:
        stacked = np.vstack(list(self.cells.values()))
        return stacked.min(axis=0), stacked.max(axis=0) + 1

    def com_mm(self, part_id: int) -> tuple[float, float, float]:
        centers = self.cells[part_id] + 0.5
        return tuple(float(c) for c in centers.mean(axis=0) * self.pitch)


def _axis_columns(cells: np.ndarray, axis: int) -> dict[tuple[int, int], np.ndarray]:
    """Group a part's cells into columns along ``axis``.

    Returns {(other coord pair): array of axis coordinates}.
    """
    other = [i for i in range(3) if i != axis]
    proj = cells[:, other]
    along = cells[:, axis]
    order = np.lexsort((along, proj[:, 1], proj[:, 0]))
    proj = proj[order]
    along = along[order]
    cols: dict[tuple[int, int], np.ndarray] = {}
    if len(cells) == 0:
        return cols
    change = np.flatnonzero(np.any(proj[1:] != proj[:-1], axis=1)) + 1
    bounds = [0, *change.tolist(), len(cells)]
    for s, e in zip(bounds[:-1], bounds[1:]):
        cols[(int(proj[s, 0]), int(proj[s, 1]))] = along[s:e]
    return cols


def _blocked_offsets(static_cols: dict, mover_cols: dict) -> np.ndarray:
    """All integer offsets t where the mover, shifted by t along the axis,
    overlaps the static part.  Sorted unique values."""
    diffs = []
    small, big, sign = ((mover_cols, static_cols, 1)
                        if len(mover_cols) <= len(static_cols)
                        else (static_cols, mover_cols, -1))
    for key, a in small.items():
        b = big.get(key)
        if b is not None:
            diffs.append(((b[None, :] - a[:, None]) * sign).ravel())
    if not diffs:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(diffs))


class _PairGeometry:
    """Shared per-assembly caches for pairwise sweep queries."""

    def __init__(self, assembly: VoxelAssembly, part_order):
        self.order = tuple(part_order)
        self.cells = {pid: assembly.cells[pid] for pid in self.order}
        self.columns = {
            pid: [_axis_columns(self.cells[pid], a) for a in range(3)]
            for pid in self.order}
        self._offsets: dict[tuple[int, int, int], np.ndarray] = {}

    def offsets(self, static_id: int, mover_id: int, axis: int) -> np.ndarray:
        key = (static_id, mover_id, axis)
        cached = self._offsets.get(key)
        if cached is None:
            cached = _blocked_offsets(self.columns[static_id][axis],
                                      self.columns[mover_id][axis])
            self._offsets[key] = cached
            self._offsets[(mover_id, static_id, axis)] = -cached[::-1]
        return cached


def interference_free_matrices(assembly: VoxelAssembly,
                               part_order=None) -> np.ndarray:
    """Six binary layers of full-extent translation freedom.

    Layer order +x, +y, +z, -x, -y, -z.  Entry (i, k) of a positive layer is
    1 when sweeping part k cell-by-cell through the combined bounding box of
    the pair never overlaps part i; negative layers are the transposes.
    """
    order = tuple(part_order) if part_order is not None else assembly.part_ids()
    geo = _PairGeometry(assembly, order)
    n = len(order)
    out = np.ones((6, n, n), dtype=np.uint8)
    for a in range(3):
        for i in range(n):
            for k in range(n):
                if i == k:
                    continue
                off = geo.offsets(order[i], order[k], a)
                if off.size and off[-1] >= 1:
                    out[a, i, k] = 0
        out[a + 3] = out[a].T
    return out


def constraint_free_matrices(assembly: VoxelAssembly, clearance: float,
                             angle: float = 5.0,
                             part_order=None) -> np.ndarray:
    """Twelve binary layers of small-displacement freedom.

    Translation layers sweep ceil(clearance / pitch) one-cell steps; rotation
    layers test a single +/-angle pose about each moving part's COM with
    nearest-cell resampling.  Rotation entries are evaluated for both
    orderings of a pair and combined, which keeps the negative layers exact
    transposes of the positive ones and the derived constraint degree
    symmetric.
    """
    if clearance < assembly.pitch:
        raise ValueError("clearance must be at least one grid pitch")
    if angle <= 0:
        raise ValueError("rotation angle must be positive")
    order = tuple(part_order) if part_order is not None else assembly.part_ids()
    geo = _PairGeometry(assembly, order)
    n = len(order)
    steps = math.ceil(clearance / assembly.pitch)
    out = np.ones((12, n, n), dtype=np.uint8)
    for a in range(3):
        for i in range(n):
            for k in range(n):
                if i == k:
                    continue
                off = geo.offsets(order[i], order[k], a)
                if off.size and np.any((off >= 1) & (off <= steps)):
                    out[a, i, k] = 0
        out[a + 3] = out[a].T

    cell_sets = {pid: set(map(tuple, geo.cells[pid].tolist()))
                 for pid in order}
    rotated = {
        pid: [[_rotate_cells(geo.cells[pid], a, s * angle) for a in range(3)]
              for s in (1, -1)]
        for pid in order}

    def hits(mover: int, sign_idx: int, axis: int, static: int) -> bool:
        rot = rotated[mover][sign_idx][axis]
        static_set = cell_sets[static]
        return any(c in static_set for c in rot)

    for a in range(3):
        for i in range(n):
            for k in range(i + 1, n):
                # mover k rotated +angle is the same relative motion as
                # mover i rotated -angle; block the pair if either view hits
                plus = (hits(order[k], 0, a, order[i])
                        or hits(order[i], 1, a, order[k]))
                minus = (hits(order[k], 1, a, order[i])
                         or hits(order[i], 0, a, order[k]))
                if plus:
                    out[6 + a, i, k] = 0
                    out[9 + a, k, i] = 0
                if minus:
                    out[9 + a, i, k] = 0
                    out[6 + a, k, i] = 0
    return out


def _rotate_cells(cells: np.ndarray, axis: int, angle_deg: float) -> set:
    """Nearest-cell resample of the part rotated about its COM."""
    centers = cells.astype(np.float64) + 0.5
    com = centers.mean(axis=0)
    theta = math.radians(angle_deg)
    c, s = math.cos(theta), math.sin(theta)
    u, v = [i for i in range(3) if i != axis]
    rel = centers - com
    rot = rel.copy()
    rot[:, u] = c * rel[:, u] - s * rel[:, v]
    rot[:, v] = s * rel[:, u] + c * rel[:, v]
    moved = np.rint(rot + com - 0.5).astype(np.int64)
    return set(map(tuple, moved.tolist()))


def contact_matrix(assembly: VoxelAssembly, part_order=None) -> np.ndarray:
    """Binary face-adjacency between part pairs."""
    order = tuple(part_order) if part_order is not None else assembly.part_ids()
    geo = _PairGeometry(assembly, order)
    n = len(order)
    out = np.zeros((n, n), dtype=np.uint8)
    for i in range(n):
        for k in range(i + 1, n):
            touching = any(
                np.isin((1, -1), geo.offsets(order[i], order[k], a)).any()
                for a in range(3))
            if touching:
                out[i, k] = out[k, i] = 1
    return out


def synth_motion_table(assembly: VoxelAssembly,
                       part_order=None) -> MotionTable:
    """One straight-line extraction candidate per axis direction.

    A direction is a candidate only when the part can slide fully out of the
    assembly's occupied bounding box without any intermediate pose leaving
    the workspace bounds (a flush workspace floor therefore rules out
    downward extraction).  The per-part feasibility row marks which other
    parts the full swept volume avoids, which for straight-line extraction
    coincides with the full-extent translation sweep.
    """
    order = tuple(part_order) if part_order is not None else assembly.part_ids()
    geo = _PairGeometry(assembly, order)
    n = len(order)
    ws_lo = np.asarray(assembly.bounds[0])
    ws_hi = np.asarray(assembly.bounds[1])
    occupied = np.vstack([geo.cells[pid] for pid in order])
    bbox_lo = occupied.min(axis=0)
    bbox_hi = occupied.max(axis=0) + 1

    table: dict[int, tuple[Motion, ...]] = {}
    for k, pid in enumerate(order):
        cells = geo.cells[pid]
        p_lo = cells.min(axis=0)
        p_hi = cells.max(axis=0) + 1
        entries = []
        for d, kind in enumerate(TRANSLATION_KINDS):
            axis = d % 3
            positive = d < 3
            if positive:
                t_exit = int(bbox_hi[axis] - p_lo[axis])
                in_bounds = p_hi[axis] + t_exit <= ws_hi[axis]
            else:
                t_exit = int(p_hi[axis] - bbox_lo[axis])
                in_bounds = p_lo[axis] - t_exit >= ws_lo[axis]
            if not in_bounds:
                continue
            row = np.ones(n, dtype=np.uint8)
            for i, other in enumerate(order):
                if i == k:
                    continue
                off = geo.offsets(other, pid, axis)
                if off.size == 0:
                    continue
                blocked = off[-1] >= 1 if positive else off[0] <= -1
                if blocked:
                    row[i] = 0
            entries.append(Motion(id=len(entries), kind=kind, row=row))
        table[pid] = tuple(entries)
    return MotionTable(tuple(order), table)


def _box(x0, y0, z0, x1, y1, z1) -> set:
    return {(x, y, z)
            for x in range(x0, x1)
            for y in range(y0, y1)
            for z in range(z0, z1)}


def _cells_array(cells: set) -> np.ndarray:
    return np.array(sorted(cells), dtype=np.int64).reshape(-1, 3)


def generate_synthetic(n_layers: int, screws_per_layer: int = 2,
                       manual_fraction: float = 0.0, priority_count: int = 0,
                       seed: int = 0, pitch: float = 1.0
                       ) -> tuple[VoxelAssembly, PartCatalog]:
    """Deterministic screw-tower product: a base plate plus stacked blocks.

    Each block is locked by up to four corner set screws whose heads sit in
    counterbores and whose shanks occupy interior columns, so one in-place
    screw blocks every candidate extraction of its block by itself.  Screws
    are contained in their block's body (contact degree one): orders that
    strand a screw or pull a block out from under its neighbors violate the
    connection condition, so stability does real work on these fixtures.
    Footprints shrink per layer when screws are present so every screw head
    stays exposed from above.  Manual task labels are sprinkled over a
    fraction of the blocks (never screws, which must stay fixing parts) and
    ``priority_count`` blocks get a value label.
    """
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    if not 0 <= screws_per_layer <= 4:
        raise ValueError("screws_per_layer must be in 0..4")
    if not 0.0 <= manual_fraction <= 1.0:
        raise ValueError("manual_fraction must be in [0, 1]")
    if priority_count > n_layers:
        raise ValueError("priority_count cannot exceed the number of blocks")

    rng = np.random.default_rng(seed)
    shrink = 2 if screws_per_layer > 0 else 0
    block_h, base_h, top_size = 3, 2, 6
    sizes = [top_size + 2 * shrink * (n_layers - level)
             for level in range(1, n_layers + 1)]
    base_size = sizes[0] + 4

    def corner_positions(level_idx):
        off = (base_size - sizes[level_idx]) // 2
        size = sizes[level_idx]
        return [(off, off), (off + size - 2, off), (off, off + size - 2),
                (off + size - 2, off + size - 2)][:screws_per_layer]

    def shank_xy(corner, level_idx):
        off = (base_size - sizes[level_idx]) // 2
        x0, y0 = corner
        # the inward cell of the 2x2 head footprint: an interior column,
        # so the shank blocks its block's lateral escape in all directions
        sx = x0 + 1 if x0 == off else x0
        sy = y0 + 1 if y0 == off else y0
        return sx, sy

    cells: dict[int, set] = {}
    cells[1] = _box(0, 0, 0, base_size, base_size, base_h)

    block_ids = []
    screw_ids: dict[int, list[int]] = {}
    next_id = 2
    zb = base_h
    for level_idx in range(n_layers):
        size = sizes[level_idx]
        off = (base_size - size) // 2
        block = _box(off, off, zb, off + size, off + size, zb + block_h)
        block_id = next_id
        next_id += 1
        block_ids.append(block_id)
        screw_ids[block_id] = []
        for corner in corner_positions(level_idx):
            x0, y0 = corner
            sx, sy = shank_xy(corner, level_idx)
            head = _box(x0, y0, zb + 2, x0 + 2, y0 + 2, zb + 3)
            shank = {(sx, sy, zb), (sx, sy, zb + 1)}
            block -= head | shank
            screw_id = next_id
            next_id += 1
            screw_ids[block_id].append(screw_id)
            cells[screw_id] = head | shank
        cells[block_id] = block
        zb += block_h

    top_z = zb
    margin = max(base_size, top_z) + 2
    bounds = ((-margin, -margin, 0),
              (base_size + margin, base_size + margin, top_z + margin))
    assembly = VoxelAssembly(
        pitch=pitch,
        cells={pid: _cells_array(c) for pid, c in cells.items()},
        bounds=bounds)
    assembly.validate()

    manual_count = int(round(manual_fraction * n_layers))
    manual_blocks = set(rng.choice(block_ids, size=manual_count,
                                   replace=False).tolist()) if manual_count else set()
    value_blocks = set(rng.choice(block_ids, size=priority_count,
                                  replace=False).tolist()) if priority_count else set()

    parts = []
    for pid in sorted(cells):
        if pid == 1:
            name = "base_plate"
        elif pid in block_ids:
            level = block_ids.index(pid) + 1
            task = "manual" if pid in manual_blocks else "graspable"
            name = f"block{level}_{task}"
            if pid in value_blocks:
                name += "_value"
        else:
            owner = next(b for b, screws in screw_ids.items() if pid in screws)
            letter = chr(ord("a") + screw_ids[owner].index(pid))
            level = block_ids.index(owner) + 1
            name = f"fastener{level}{letter}_screw"
        labels = parse_labels(name)
        parts.append(Part(
            id=pid, name=name, task_label=labels.task,
            priority=labels.priority, base=labels.base, ignore=labels.ignore,
            com=assembly.com_mm(pid), eef=_EEF_BY_TASK[labels.task],
            size=float(len(cells[pid]))))
    return assembly, PartCatalog(tuple(parts))


def build_dataset(assembly: VoxelAssembly, catalog: PartCatalog,
                  clearance: float | None = None,
                  angle: float = 5.0) -> Dataset:
    """Run all matrix generators over the assembly and bundle a Dataset."""
    if clearance is None:
        clearance = assembly.pitch
    part_order = catalog.non_ignored_ids()
    x_if = interference_free_matrices(assembly, part_order)
    x_cf = constraint_free_matrices(assembly, clearance, angle, part_order)
    x_ct = contact_matrix(assembly, part_order)
    matrices = RelationMatrices(part_order, x_if, x_cf, x_ct,
                                derive_constraint_degree(x_cf))
    matrices.validate(catalog)
    motions = synth_motion_table(assembly, part_order)
    return Dataset(catalog, matrices, motions)
