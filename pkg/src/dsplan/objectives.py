"""The four normalized objective functions and the combined evaluation.

All objectives are minimized and normalized to [0, 1].  A sequence that
fails any constraint scores exactly (1, 1, 1, 1).  Vector order throughout:
difficulty, efficiency, prioritization, allocability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintFlags, ConstraintTables, check_idx
from .model import (
    Dataset,
    PartCatalog,
    RelationMatrices,
    validate_sequence,
)

OBJECTIVE_KEYS = ("d", "e", "p", "a")
PENALTY = (1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class Evaluation:
    """Constraint flags plus the four-objective vector of one sequence."""

    feasible: bool
    stable: bool
    available: bool
    objectives: tuple[float, float, float, float]

    def __post_init__(self):
        if self.available != (self.feasible and self.stable):
            raise ValueError("available must equal feasible and stable")
        if not self.available and self.objectives != PENALTY:
            raise ValueError("unavailable sequences must score exactly "
                             f"{PENALTY}")
        if any(not 0.0 <= v <= 1.0 for v in self.objectives):
            raise ValueError("objective values must lie in [0, 1]")

    @property
    def objective_sum(self) -> float:
        return float(sum(self.objectives))


def _positions(perm: np.ndarray) -> np.ndarray:
    """1-based storage position of each part index (position 1 = removed last)."""
    pos = np.empty(len(perm), dtype=np.int64)
    pos[perm] = np.arange(1, len(perm) + 1)
    return pos


class Evaluator:
    """Precomputed tables for repeated sequence evaluation on one dataset."""

    def __init__(self, dataset: Dataset, mode: str = "as-written"):
        catalog, matrices, motions = dataset
        self.dataset = dataset
        self.mode = mode
        self.tables = ConstraintTables(matrices, catalog, motions)
        self.n = self.tables.n
        order = matrices.part_order
        self.constraint_degree = matrices.constraint_degree.astype(np.int64)

        labels = [catalog.by_id(pid).task_label for pid in order]
        uniq = {t: c for c, t in enumerate(sorted(set(labels)))}
        self.task_codes = np.array([uniq[t] for t in labels], dtype=np.int64)
        self.coms = np.array([catalog.by_id(pid).com for pid in order],
                             dtype=np.float64)
        if self.n > 1:
            deltas = self.coms[:, None, :] - self.coms[None, :, :]
            self.d_max = float(np.sqrt((deltas ** 2).sum(-1)).max())
        else:
            self.d_max = 0.0
        self.priority_idx = np.array(
            [j for j, pid in enumerate(order) if catalog.by_id(pid).priority],
            dtype=np.int64)
        self.manual_idx = np.array(
            [j for j, pid in enumerate(order)
             if catalog.by_id(pid).task_label == "manual"], dtype=np.int64)
        npp = len(self.priority_idx)
        # largest attainable sum of priority-part positions
        self.r_max = float(sum(range(self.n - npp + 1, self.n + 1)))

    def to_indices(self, seq) -> np.ndarray:
        return self.tables.to_indices(seq)

    def to_ids(self, perm: np.ndarray) -> tuple[int, ...]:
        return tuple(self.tables.part_order[j] for j in perm)

    def flags_idx(self, perm: np.ndarray) -> ConstraintFlags:
        return check_idx(perm, self.tables, self.mode)

    def objectives_idx(self, perm: np.ndarray) -> tuple[float, float, float, float]:
        """The four objective values assuming the sequence is available."""
        n = self.n
        if n < 2:
            return (0.0, 0.0, 0.0, 0.0)
        grid = self.constraint_degree[np.ix_(perm, perm)]
        acc = grid.cumsum(axis=0)
        ks = np.arange(1, n)
        peak = int(acc[ks - 1, ks].max())
        f_d = peak / (12.0 * (n - 1))

        codes = self.task_codes[perm]
        changes = int(np.count_nonzero(codes[1:] != codes[:-1]))
        travel = float(np.sqrt(
            ((self.coms[perm[1:]] - self.coms[perm[:-1]]) ** 2).sum(-1)).sum())
        dist_term = travel / (n * self.d_max) if self.d_max > 0 else 0.0
        f_e = (changes / (n - 1) + dist_term) / 2.0

        if len(self.priority_idx) == 0:
            f_p = 0.0
        else:
            pos = _positions(perm)
            r = float(pos[self.priority_idx].sum())
            f_p = 1.0 - r / self.r_max

        if len(self.manual_idx) < 2:
            f_a = 0.0
        else:
            pos = _positions(perm)
            mpos = pos[self.manual_idx]
            f_a = float(mpos.max() - mpos.min()) / (n - 1)
        return (f_d, f_e, f_p, f_a)

    def evaluate_idx(self, perm: np.ndarray) -> Evaluation:
        flags = self.flags_idx(perm)
        feasible = flags.order_feasible and flags.motion_feasible
        if not flags.available:
            return Evaluation(feasible, flags.stable, False, PENALTY)
        return Evaluation(feasible, flags.stable, True,
                          self.objectives_idx(perm))

    def evaluate(self, seq) -> Evaluation:
        seq = validate_sequence(seq, self.dataset.catalog)
        return self.evaluate_idx(self.to_indices(seq))


def _single_eval(seq, matrices: RelationMatrices):
    tables = ConstraintTables(matrices)
    return tables.to_indices(seq), tables


def difficulty(seq, matrices: RelationMatrices, available: bool = True) -> float:
    """Worst accumulated constraint degree over the sequence, normalized."""
    if not available:
        return 1.0
    perm, _ = _single_eval(seq, matrices)
    n = len(perm)
    if n < 2:
        return 0.0
    grid = matrices.constraint_degree.astype(np.int64)[np.ix_(perm, perm)]
    acc = grid.cumsum(axis=0)
    ks = np.arange(1, n)
    return float(acc[ks - 1, ks].max()) / (12.0 * (n - 1))


def _catalog_positions(seq, catalog: PartCatalog):
    seq = validate_sequence(seq, catalog)
    return seq, {int(pid): k + 1 for k, pid in enumerate(seq)}


def efficiency(seq, catalog: PartCatalog, available: bool = True) -> float:
    """Blend of adjacent task-label changes and COM travel distance."""
    if not available:
        return 1.0
    seq, _ = _catalog_positions(seq, catalog)
    n = len(seq)
    if n < 2:
        return 0.0
    parts = [catalog.by_id(int(pid)) for pid in seq]
    changes = sum(parts[k].task_label != parts[k - 1].task_label
                  for k in range(1, n))
    coms = np.array([p.com for p in parts], dtype=np.float64)
    travel = float(np.sqrt(((coms[1:] - coms[:-1]) ** 2).sum(-1)).sum())
    all_ids = catalog.non_ignored_ids()
    pts = np.array([catalog.by_id(i).com for i in all_ids], dtype=np.float64)
    deltas = pts[:, None, :] - pts[None, :, :]
    d_max = float(np.sqrt((deltas ** 2).sum(-1)).max())
    dist_term = travel / (n * d_max) if d_max > 0 else 0.0
    return (changes / (n - 1) + dist_term) / 2.0


def prioritization(seq, catalog: PartCatalog, available: bool = True) -> float:
    """Rewards removing value-labeled parts early (high storage positions)."""
    if not available:
        return 1.0
    seq, pos = _catalog_positions(seq, catalog)
    n = len(seq)
    priority_ids = [p.id for p in catalog
                    if p.priority and not p.ignore]
    if not priority_ids:
        return 0.0
    r = sum(pos[pid] for pid in priority_ids)
    r_max = sum(range(n - len(priority_ids) + 1, n + 1))
    return 1.0 - r / r_max


def allocability(seq, catalog: PartCatalog, available: bool = True) -> float:
    """Spread between the earliest and latest manual tasks, normalized."""
    if not available:
        return 1.0
    seq, pos = _catalog_positions(seq, catalog)
    n = len(seq)
    manual_pos = [pos[p.id] for p in catalog
                  if p.task_label == "manual" and not p.ignore]
    if len(manual_pos) < 2 or n < 2:
        return 0.0
    return (max(manual_pos) - min(manual_pos)) / (n - 1)


def evaluate(seq, dataset: Dataset, mode: str = "as-written") -> Evaluation:
    """Constraint check plus objectives; the all-ones penalty when blocked."""
    return Evaluator(dataset, mode).evaluate(seq)
