"""Order feasibility, motion feasibility, and stability of a sequence.

Per-position semantics: the term at storage position k (1-based) inspects the
parts at positions 1..k-1, which are exactly the parts still assembled when
position k's part is removed.  Two readings of the interference and motion
conditions are supported:

* ``as-written``: every still-assembled obstacle admits some free direction /
  avoiding motion (obstacles may each pick a different one).  For the
  interference condition this predicate is pairwise-symmetric, so a product
  is order-feasible either for every permutation or for none.
* ``strict``: one single direction / motion must clear every obstacle at
  once, which is the physically meaningful escape condition and does depend
  on the order.

Stability is the connection condition: each removed part must still touch at
least one part that remains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Dataset, MotionTable, PartCatalog, RelationMatrices, validate_sequence

MODES = ("as-written", "strict")


@dataclass(frozen=True)
class ConstraintFlags:
    """Outcome of the full constraint check for one sequence."""

    order_feasible: bool
    motion_feasible: bool
    stable: bool
    available: bool
    first_violation: tuple[str, int] | None = None

    def __post_init__(self):
        if self.available != (self.order_feasible and self.motion_feasible
                              and self.stable):
            raise ValueError("available must equal the conjunction of the "
                             "three criteria")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


class ConstraintTables:
    """Dense boolean lookups shared by repeated sequence checks.

    ``pair_free[i, k]``  - some translation layer frees mover k w.r.t. i.
    ``motion_pair[k, i]`` - some candidate motion of part k avoids part i
    (note the reversed orientation: motions belong to the moving part).
    """

    def __init__(self, matrices: RelationMatrices,
                 catalog: PartCatalog | None = None,
                 motions: MotionTable | None = None):
        self.part_order = matrices.part_order
        self.index = {pid: j for j, pid in enumerate(self.part_order)}
        n = len(self.part_order)
        self.n = n
        self.if_layers = matrices.interference_free.astype(bool)
        self.pair_free = self.if_layers.any(axis=0)
        np.fill_diagonal(self.pair_free, True)
        self.contact = matrices.contact.astype(np.int64)

        self.manual = np.zeros(n, dtype=bool)
        if catalog is not None:
            for j, pid in enumerate(self.part_order):
                self.manual[j] = catalog.by_id(pid).task_label == "manual"

        self.motion_stacks: list[np.ndarray] | None = None
        self.motion_pair: np.ndarray | None = None
        if motions is not None:
            stacks = []
            pair = np.zeros((n, n), dtype=bool)
            for j, pid in enumerate(self.part_order):
                entries = motions.motions.get(pid, ())
                if entries:
                    stack = np.stack([m.row.astype(bool) for m in entries])
                    pair[j] = stack.any(axis=0)
                else:
                    stack = np.zeros((0, n), dtype=bool)
                stacks.append(stack)
                pair[j, j] = True
            self.motion_stacks = stacks
            self.motion_pair = pair

    def to_indices(self, seq) -> np.ndarray:
        return np.fromiter((self.index[int(x)] for x in seq),
                           dtype=np.int64, count=len(seq))


def order_terms_idx(perm: np.ndarray, tables: ConstraintTables,
                    mode: str = "as-written") -> np.ndarray:
    """Per-position interference terms; index 0 is vacuously true."""
    _check_mode(mode)
    n = len(perm)
    terms = np.ones(n, dtype=bool)
    if n < 2:
        return terms
    if mode == "as-written":
        grid = tables.pair_free[np.ix_(perm, perm)]
        acc = np.logical_and.accumulate(grid, axis=0)
        ks = np.arange(1, n)
        terms[1:] = acc[ks - 1, ks]
    else:
        grid = tables.if_layers[:, perm[:, None], perm[None, :]]
        acc = np.logical_and.accumulate(grid, axis=1)
        ks = np.arange(1, n)
        terms[1:] = acc[:, ks - 1, ks].any(axis=0)
    return terms


def motion_terms_idx(perm: np.ndarray, tables: ConstraintTables,
                     mode: str = "as-written") -> np.ndarray:
    """Per-position motion terms; manual-labeled parts are exempt."""
    _check_mode(mode)
    if tables.motion_pair is None or tables.motion_stacks is None:
        raise ValueError("tables were built without a motion table")
    n = len(perm)
    terms = np.ones(n, dtype=bool)
    if n < 2:
        return terms
    if mode == "as-written":
        grid = tables.motion_pair[np.ix_(perm, perm)]
        acc = np.logical_and.accumulate(grid, axis=1)
        ks = np.arange(1, n)
        terms[1:] = acc[ks, ks - 1]
    else:
        for k in range(1, n):
            stack = tables.motion_stacks[perm[k]]
            if stack.shape[0] == 0:
                terms[k] = False
            else:
                terms[k] = stack[:, perm[:k]].all(axis=1).any()
    terms |= tables.manual[perm]
    terms[0] = True
    return terms


def stability_terms_idx(perm: np.ndarray,
                        tables: ConstraintTables) -> np.ndarray:
    """Per-position connection terms: touch something removed later."""
    n = len(perm)
    terms = np.ones(n, dtype=bool)
    if n < 2:
        return terms
    grid = tables.contact[np.ix_(perm, perm)]
    acc = grid.cumsum(axis=0)
    ks = np.arange(1, n)
    terms[1:] = acc[ks - 1, ks] > 0
    return terms


def check_idx(perm: np.ndarray, tables: ConstraintTables,
              mode: str = "as-written") -> ConstraintFlags:
    """Evaluate all three criteria on an index permutation."""
    o = order_terms_idx(perm, tables, mode)
    m = motion_terms_idx(perm, tables, mode)
    s = stability_terms_idx(perm, tables)
    order_ok = bool(o.all())
    motion_ok = bool(m.all())
    stable_ok = bool(s.all())
    first = None
    for name, terms, ok in (("order", o, order_ok),
                            ("motion", m, motion_ok),
                            ("stability", s, stable_ok)):
        if not ok:
            first = (name, int(np.flatnonzero(~terms)[0]) + 1)
            break
    return ConstraintFlags(order_ok, motion_ok, stable_ok,
                           order_ok and motion_ok and stable_ok, first)


def order_feasible(seq, matrices: RelationMatrices,
                   mode: str = "as-written") -> bool:
    """Interference condition over the whole sequence (part ids)."""
    tables = ConstraintTables(matrices)
    perm = tables.to_indices(seq)
    return bool(order_terms_idx(perm, tables, mode).all())


def motion_feasible(seq, catalog: PartCatalog, motions: MotionTable,
                    matrices: RelationMatrices,
                    mode: str = "as-written") -> bool:
    """Motion condition over the whole sequence; manual parts exempt.

    A non-manual part with zero candidate motions fails at any checked
    position (that is a verdict, not an error).
    """
    tables = ConstraintTables(matrices, catalog, motions)
    perm = tables.to_indices(seq)
    return bool(motion_terms_idx(perm, tables, mode).all())


def stable(seq, matrices: RelationMatrices) -> bool:
    """Connection condition: every prefix subassembly stays connected."""
    tables = ConstraintTables(matrices)
    perm = tables.to_indices(seq)
    return bool(stability_terms_idx(perm, tables).all())


def check(seq, dataset: Dataset, mode: str = "as-written") -> ConstraintFlags:
    """Full constraint check of an id sequence against a dataset."""
    catalog, matrices, motions = dataset
    seq = validate_sequence(seq, catalog)
    tables = ConstraintTables(matrices, catalog, motions)
    return check_idx(tables.to_indices(seq), tables, mode)
