import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dsplan.model import (
    Dataset,
    MissingTaskLabel,
    Motion,
    MotionTable,
    Part,
    PartCatalog,
    RelationMatrices,
    SchemaError,
    TransposeViolation,
    ValidationError,
    dataset_to_json,
    derive_constraint_degree,
    load_dataset,
    parse_labels,
    removal_order,
    save_dataset,
    validate_sequence,
)
from conftest import make_tower


class TestParseLabels:
    def test_manual_value(self):
        labels = parse_labels("motor_manual_value")
        assert labels.task == "manual"
        assert labels.priority
        assert not labels.base and not labels.ignore
        assert labels.unknown == ("motor",)

    def test_base_token(self):
        labels = parse_labels("base_plate_base_plate")
        assert labels.base
        assert labels.task == "plate"

    def test_ignore(self):
        labels = parse_labels("spacer_ignore_graspable")
        assert labels.ignore
        assert labels.task == "graspable"

    def test_missing_task(self):
        with pytest.raises(MissingTaskLabel):
            parse_labels("motor_value")
        with pytest.raises(MissingTaskLabel):
            parse_labels("")

    def test_conflicting_task_tokens_surface_in_unknown(self):
        labels = parse_labels("plate_screw")
        assert labels.task == "plate"
        assert "screw" in labels.unknown

    @given(st.lists(st.sampled_from(
        ["screw", "bolt", "plate", "graspable", "manual", "value",
         "base", "ignore", "shaft", "x12"]), min_size=1, max_size=6))
    def test_token_roundtrip(self, tokens):
        name = "_".join(tokens)
        task_tokens = [t for t in tokens
                       if t in ("screw", "bolt", "plate", "graspable",
                                "manual", "nut")]
        if not task_tokens:
            with pytest.raises(MissingTaskLabel):
                parse_labels(name)
            return
        labels = parse_labels(name)
        assert labels.task == task_tokens[0]
        assert labels.priority == ("value" in tokens)
        assert labels.base == ("base" in tokens)
        assert labels.ignore == ("ignore" in tokens)


class TestCatalog:
    def test_ids_must_be_contiguous(self):
        parts = (Part(1, "a_screw", "screw"), Part(3, "b_screw", "screw"))
        with pytest.raises(ValidationError):
            PartCatalog(parts)

    def test_single_base(self):
        parts = (Part(1, "a_plate_base", "plate", base=True),
                 Part(2, "b_plate_base", "plate", base=True))
        with pytest.raises(ValidationError):
            PartCatalog(parts)

    def test_non_ignored_excludes_ignore(self):
        parts = (Part(1, "a_plate", "plate"),
                 Part(2, "b_graspable_ignore", "graspable", ignore=True))
        cat = PartCatalog(parts)
        assert cat.non_ignored_ids() == (1,)

    def test_bad_task_label(self):
        with pytest.raises(ValidationError):
            Part(1, "x", "widget")


class TestConstraintDegree:
    def test_fully_free_pair(self):
        layers = np.ones((12, 2, 2), dtype=np.uint8)
        assert derive_constraint_degree(layers)[0, 1] == 0

    def test_fully_constrained_pair(self):
        layers = np.zeros((12, 2, 2), dtype=np.uint8)
        out = derive_constraint_degree(layers)
        assert out[0, 1] == 12
        assert out[0, 0] == 0  # diagonal forced

    def test_five_free(self):
        layers = np.zeros((12, 2, 2), dtype=np.uint8)
        for j in range(5):
            layers[j, 0, 1] = 1
        assert derive_constraint_degree(layers)[0, 1] == 7

    def test_symmetry_under_transpose_rule(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            layers = np.zeros((12, 4, 4), dtype=np.uint8)
            for j in range(3):
                block = rng.integers(0, 2, (4, 4)).astype(np.uint8)
                layers[j] = block
                layers[j + 3] = block.T
            for j in range(6, 9):
                sym = rng.integers(0, 2, (4, 4)).astype(np.uint8)
                sym = (sym | sym.T).astype(np.uint8)
                layers[j] = sym
                layers[j + 3] = sym.T
            out = derive_constraint_degree(layers)
            assert (out == out.T).all()


def _tiny_dataset():
    return make_tower(1, 1, seed=2)


class TestDatasetIO:
    def test_minimal_two_part_dataset(self, tmp_path):
        ds = make_tower(1, 0, seed=0)
        assert len(ds.catalog) == 2
        assert ds.matrices.interference_free.shape == (6, 2, 2)
        assert ds.matrices.constraint_free.shape == (12, 2, 2)
        assert ds.matrices.contact.shape == (2, 2)
        path = tmp_path / "two.json"
        save_dataset(ds, path)
        again = load_dataset(path)
        assert again.matrices.part_order == ds.matrices.part_order

    def test_round_trip_is_identity(self, tmp_path, tower5):
        p1 = tmp_path / "a.json"
        p2 = tmp_path / "b.json"
        save_dataset(tower5, p1)
        loaded = load_dataset(p1)
        save_dataset(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_30_part_tower_round_trip(self, tmp_path):
        ds = make_tower(29, 0, seed=4)
        assert len(ds.catalog) == 30
        p1 = tmp_path / "tall.json"
        save_dataset(ds, p1)
        loaded = load_dataset(p1)
        p2 = tmp_path / "tall2.json"
        save_dataset(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_transpose_violation_reported(self, tmp_path):
        ds = _tiny_dataset()
        doc = json.loads(dataset_to_json(ds))
        doc["x_if"][3][0][1] ^= 1
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(TransposeViolation) as err:
            load_dataset(path)
        assert err.value.matrix == "x_if"
        assert err.value.index is not None

    def test_constraint_degree_cross_check(self, tmp_path):
        ds = _tiny_dataset()
        doc = json.loads(dataset_to_json(ds))
        doc["x_cs"][0][1] += 1
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValidationError) as err:
            load_dataset(path)
        assert err.value.matrix == "x_cs"

    def test_missing_x_cs_is_rederived(self, tmp_path):
        ds = _tiny_dataset()
        doc = json.loads(dataset_to_json(ds))
        del doc["x_cs"]
        path = tmp_path / "nocs.json"
        path.write_text(json.dumps(doc))
        loaded = load_dataset(path)
        assert (loaded.matrices.constraint_degree
                == ds.matrices.constraint_degree).all()

    def test_version_mismatch(self, tmp_path):
        ds = _tiny_dataset()
        doc = json.loads(dataset_to_json(ds))
        doc["version"] = 99
        path = tmp_path / "v.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError):
            load_dataset(path)

    def test_missing_field(self, tmp_path):
        ds = _tiny_dataset()
        doc = json.loads(dataset_to_json(ds))
        del doc["x_ct"]
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError):
            load_dataset(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("not json at all{")
        with pytest.raises(SchemaError):
            load_dataset(path)

    def test_contact_without_constraint_rejected(self):
        order = (1, 2)
        x_if = np.ones((6, 2, 2), dtype=np.uint8)
        x_cf = np.ones((12, 2, 2), dtype=np.uint8)  # degree 0 everywhere
        x_ct = np.array([[0, 1], [1, 0]], dtype=np.uint8)
        m = RelationMatrices(order, x_if, x_cf, x_ct,
                             derive_constraint_degree(x_cf))
        with pytest.raises(ValidationError):
            m.validate()


class TestSequences:
    def test_sequence_validation(self, tower5):
        ids = tower5.catalog.non_ignored_ids()
        validate_sequence(np.array(ids), tower5.catalog)
        with pytest.raises(ValueError):
            validate_sequence(np.array(ids[:-1]), tower5.catalog)
        with pytest.raises(ValueError):
            validate_sequence(np.array(ids + ids[:1]), tower5.catalog)

    def test_removal_order_flips(self):
        assert removal_order([1, 2, 3]).tolist() == [3, 2, 1]

    def test_ignored_parts_never_in_part_order(self):
        parts = (Part(1, "a_plate_base", "plate", base=True),
                 Part(2, "b_graspable", "graspable"),
                 Part(3, "c_graspable_ignore", "graspable", ignore=True))
        cat = PartCatalog(parts)
        n = 2
        x_if = np.ones((6, n, n), dtype=np.uint8)
        x_cf = np.ones((12, n, n), dtype=np.uint8)
        x_ct = np.array([[0, 1], [1, 0]], dtype=np.uint8)
        x_cf[0, 0, 1] = x_cf[3, 1, 0] = 0
        x_cf[2, 0, 1] = x_cf[5, 1, 0] = 0
        x_cf[2, 1, 0] = x_cf[5, 0, 1] = 0
        x_cf[0, 1, 0] = x_cf[3, 0, 1] = 0
        m = RelationMatrices((1, 2), x_if, x_cf, x_ct,
                             derive_constraint_degree(x_cf))
        m.validate(cat)
        rows = MotionTable((1, 2), {1: (Motion(0, "+z", np.ones(2, np.uint8)),)})
        rows.validate()
        ds = Dataset(cat, m, rows)
        assert len(ds.catalog.non_ignored_ids()) == 2
