import itertools

import numpy as np
import pytest

import oracle
from dsplan.constraints import (
    ConstraintFlags,
    ConstraintTables,
    check,
    motion_feasible,
    motion_terms_idx,
    order_feasible,
    order_terms_idx,
    stability_terms_idx,
    stable,
)
from dsplan.model import (
    Dataset,
    Motion,
    MotionTable,
    Part,
    PartCatalog,
    RelationMatrices,
    derive_constraint_degree,
)
from conftest import make_tower


def chain_product(n, contacts=None):
    """Hand-built dataset: n graspable parts, all translations free, chain
    contacts by default."""
    parts = tuple(Part(i, f"p{i}_graspable", "graspable",
                       com=(float(i), 0.0, 0.0)) for i in range(1, n + 1))
    catalog = PartCatalog(parts)
    x_if = np.ones((6, n, n), dtype=np.uint8)
    x_cf = np.ones((12, n, n), dtype=np.uint8)
    x_ct = np.zeros((n, n), dtype=np.uint8)
    pairs = contacts if contacts is not None else [(i, i + 1)
                                                   for i in range(1, n)]
    for a, b in pairs:
        x_ct[a - 1, b - 1] = x_ct[b - 1, a - 1] = 1
        for j in (2, 5):    # block +/-z at small clearance so cs >= 1
            x_cf[j, a - 1, b - 1] = 0
            x_cf[j, b - 1, a - 1] = 0
    matrices = RelationMatrices(tuple(range(1, n + 1)), x_if, x_cf, x_ct,
                                derive_constraint_degree(x_cf))
    matrices.validate(catalog)
    motions = MotionTable(matrices.part_order, {
        i: (Motion(0, "+z", np.ones(n, dtype=np.uint8)),)
        for i in range(1, n + 1)})
    return Dataset(catalog, matrices, motions)


class TestOrderFeasibility:
    def test_single_part_vacuous(self):
        ds = chain_product(1)
        assert order_feasible([1], ds.matrices)
        assert order_feasible([1], ds.matrices, mode="strict")

    def test_all_free_every_permutation(self):
        ds = chain_product(4)
        for perm in itertools.permutations([1, 2, 3, 4]):
            assert order_feasible(list(perm), ds.matrices)

    def test_matches_oracle_on_five_part_fixture(self, tower5):
        tab = oracle.extract(tower5)
        tables = ConstraintTables(tower5.matrices)
        for mode in ("as-written", "strict"):
            for perm in itertools.permutations(range(5)):
                perm = np.array(perm)
                got = bool(order_terms_idx(perm, tables, mode).all())
                assert got == oracle.order_ok(list(perm), tab, mode)

    def test_aswritten_is_order_independent(self, tower5):
        # each unordered pair is tested once, so the verdict is shared by
        # all permutations of a given product
        ids = list(tower5.matrices.part_order)
        verdicts = {order_feasible(list(p), tower5.matrices)
                    for p in itertools.permutations(ids)}
        assert len(verdicts) == 1

    def test_strict_implies_as_written(self, tower10):
        rng = np.random.default_rng(0)
        tables = ConstraintTables(tower10.matrices)
        n = tower10.matrices.n
        for _ in range(200):
            perm = rng.permutation(n)
            strict = order_terms_idx(perm, tables, "strict")
            loose = order_terms_idx(perm, tables, "as-written")
            assert (loose | ~strict).all()

    def test_block_before_screw_infeasible_when_base_outlives(self, tower5):
        # strict reading; base held at position 1 (removed last)
        catalog, matrices, motions = tower5
        screws_of = {2: [3], 4: [5]}
        others = [2, 3, 4, 5]
        tables = ConstraintTables(matrices)
        n_checked = 0
        for perm in itertools.permutations(others):
            seq = [1, *perm]
            block_first = any(
                seq.index(block) > seq.index(s)
                for block, screws in screws_of.items() for s in screws)
            feasible = bool(order_terms_idx(
                tables.to_indices(seq), tables, "strict").all())
            if block_first:
                assert not feasible
                n_checked += 1
        assert n_checked > 0

    def test_bad_mode_rejected(self, tower5):
        with pytest.raises(ValueError):
            order_feasible([1, 2, 3, 4, 5], tower5.matrices, mode="weird")


class TestMotionFeasibility:
    def test_all_ones_motion_row_never_fails(self):
        ds = chain_product(3)
        for perm in itertools.permutations([1, 2, 3]):
            assert motion_feasible(list(perm), ds.catalog, ds.motions,
                                   ds.matrices)

    def test_bottom_block_before_top_false_in_both_modes(self, tower10):
        catalog, matrices, motions = tower10
        ids = list(matrices.part_order)
        # bottom block (id 2) removed first, top block (id 8) last-ish
        seq = [1, 8, 9, 10, 5, 6, 7, 3, 4, 2]
        for mode in ("as-written", "strict"):
            assert not motion_feasible(seq, catalog, motions, matrices,
                                       mode=mode)

    def test_zero_motion_part_fails_at_checked_position(self):
        ds = chain_product(3)
        motions = MotionTable(ds.matrices.part_order, {
            1: (Motion(0, "+z", np.ones(3, dtype=np.uint8)),),
            2: (Motion(0, "+z", np.ones(3, dtype=np.uint8)),),
            3: (),
        })
        # part 3 checked whenever it is not at position 1
        assert not motion_feasible([1, 2, 3], ds.catalog, motions,
                                   ds.matrices)
        assert motion_feasible([3, 1, 2], ds.catalog, motions, ds.matrices)

    def test_manual_parts_exempt(self):
        parts = (Part(1, "a_graspable", "graspable"),
                 Part(2, "b_manual", "manual"))
        catalog = PartCatalog(parts)
        base = chain_product(2)
        motions = MotionTable((1, 2), {
            1: (Motion(0, "+z", np.ones(2, dtype=np.uint8)),),
            2: (),   # no robot motion exists for the manual part
        })
        assert motion_feasible([1, 2], catalog, motions, base.matrices)
        assert motion_feasible([2, 1], catalog, motions, base.matrices)

    def test_matches_oracle_both_modes(self, tower5):
        tab = oracle.extract(tower5)
        tables = ConstraintTables(tower5.matrices, tower5.catalog,
                                  tower5.motions)
        for mode in ("as-written", "strict"):
            for perm in itertools.permutations(range(5)):
                perm = np.array(perm)
                got = bool(motion_terms_idx(perm, tables, mode).all())
                assert got == oracle.motion_ok(list(perm), tab, mode)

    def test_rows_for_already_removed_parts_irrelevant(self, tower5):
        # flipping feasibility entries against parts removed earlier can
        # never change a verdict: the term at position k only reads
        # positions below k
        catalog, matrices, motions = tower5
        rng = np.random.default_rng(17)
        tables = ConstraintTables(matrices, catalog, motions)
        for _ in range(20):
            perm = rng.permutation(5)
            baseline = motion_terms_idx(perm, tables, "as-written").copy()
            k = int(rng.integers(1, 5))
            part = perm[k]
            doctored = {pid: list(entries)
                        for pid, entries in motions.motions.items()}
            pid = matrices.part_order[part]
            new_entries = []
            for m in doctored[pid]:
                row = m.row.copy()
                row[perm[k + 1:]] ^= 1   # parts removed before this one
                new_entries.append(type(m)(m.id, m.kind, row))
            doctored[pid] = tuple(new_entries)
            tampered = ConstraintTables(
                matrices, catalog,
                type(motions)(motions.part_order, doctored))
            assert (motion_terms_idx(perm, tampered, "as-written")[k]
                    == baseline[k])


class TestStability:
    def test_chain_leaf_first(self):
        ds = chain_product(3)
        # removal c, b, a  -> storage (a, b, c)
        assert stable([1, 2, 3], ds.matrices)

    def test_middle_first_order(self):
        ds = chain_product(3)
        # storage (a, c, b): removal b, c, a; c touches nothing remaining
        assert not stable([1, 3, 2], ds.matrices)

    def test_matches_oracle(self, tower5):
        tab = oracle.extract(tower5)
        tables = ConstraintTables(tower5.matrices)
        for perm in itertools.permutations(range(5)):
            perm = np.array(perm)
            got = bool(stability_terms_idx(perm, tables).all())
            assert got == oracle.stable_ok(list(perm), tab)


class TestCheck:
    def test_flags_compose(self, tower5):
        tables = ConstraintTables(tower5.matrices, tower5.catalog,
                                  tower5.motions)
        for perm in itertools.permutations(range(5)):
            perm = np.array(perm)
            flags = check(np.array(tower5.matrices.part_order)[perm],
                          tower5, mode="as-written")
            assert flags.available == (flags.order_feasible
                                       and flags.motion_feasible
                                       and flags.stable)
            if flags.available:
                assert flags.first_violation is None
            else:
                criterion, k = flags.first_violation
                assert criterion in ("order", "motion", "stability")
                assert 2 <= k <= 5

    def test_first_violation_position(self):
        ds = chain_product(3)
        flags = check([1, 3, 2], ds)
        assert flags.first_violation == ("stability", 2)

    def test_inconsistent_flags_rejected(self):
        with pytest.raises(ValueError):
            ConstraintFlags(True, True, True, False)


class TestLocality:
    def test_adjacent_flip_only_touches_two_terms(self, tower10):
        tables = ConstraintTables(tower10.matrices, tower10.catalog,
                                  tower10.motions)
        rng = np.random.default_rng(7)
        n = tower10.matrices.n
        term_fns = [
            lambda p: order_terms_idx(p, tables, "as-written"),
            lambda p: order_terms_idx(p, tables, "strict"),
            lambda p: motion_terms_idx(p, tables, "as-written"),
            lambda p: motion_terms_idx(p, tables, "strict"),
            lambda p: stability_terms_idx(p, tables),
        ]
        for _ in range(25):
            perm = rng.permutation(n)
            k = int(rng.integers(0, n - 1))
            flipped = perm.copy()
            flipped[k], flipped[k + 1] = flipped[k + 1], flipped[k]
            for fn in term_fns:
                before = fn(perm)
                after_full = fn(flipped)
                # incremental recompute: copy old terms, redo only k, k+1
                incremental = before.copy()
                incremental[[k, k + 1]] = after_full[[k, k + 1]]
                assert (incremental == after_full).all()
