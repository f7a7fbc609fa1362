import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from a2x.dataio import (
    EmbeddingSet,
    Mapping,
    TensorDataset,
    mapping_from_json,
    mapping_to_json,
    read_dataset,
    read_embeddings,
    read_mapping,
    write_dataset,
    write_embeddings,
    write_mapping,
)
from a2x.errors import FormatError, ValidationError

from helpers import make_dataset, make_embeddings, make_mapping


def roundtrip_dataset(ds):
    buf = io.BytesIO()
    write_dataset(ds, buf)
    return buf.getvalue(), read_dataset(io.BytesIO(buf.getvalue()))


class TestDatasetContainer:
    def test_tiny_roundtrip(self):
        ds = TensorDataset(
            channels=1,
            height=2,
            width=2,
            num_classes=1,
            labels=np.array([0], dtype=np.uint32),
            pixels=np.array([0, 255, 7, 9], dtype=np.uint8).reshape(1, 1, 2, 2),
        )
        raw, back = roundtrip_dataset(ds)
        assert back == ds
        # header + one u32 label + four pixel bytes
        assert len(raw) == 26 + 4 + 4
        buf = io.BytesIO()
        write_dataset(back, buf)
        assert buf.getvalue() == raw

    def test_empty_dataset_roundtrips(self):
        ds = TensorDataset(
            channels=1,
            height=1,
            width=1,
            num_classes=1,
            labels=np.array([], dtype=np.uint32),
            pixels=np.zeros((0, 1, 1, 1), dtype=np.uint8),
        )
        _, back = roundtrip_dataset(ds)
        assert back == ds and back.n == 0

    def test_label_at_num_classes_rejected(self):
        ds = make_dataset(np.random.default_rng(0), n=3, k=2)
        ds.labels[1] = 2
        with pytest.raises(ValidationError):
            write_dataset(ds, io.BytesIO())

    def test_invalid_write_leaves_sink_empty(self):
        ds = make_dataset(np.random.default_rng(0), n=3, k=2)
        ds.labels[0] = 9
        buf = io.BytesIO()
        with pytest.raises(ValidationError):
            write_dataset(ds, buf)
        assert buf.getvalue() == b""

    def test_bad_magic(self):
        raw, _ = roundtrip_dataset(make_dataset(np.random.default_rng(1), n=2, k=2))
        with pytest.raises(FormatError, match="magic"):
            read_dataset(io.BytesIO(b"XXXX" + raw[4:]))

    def test_truncated_pixels(self):
        raw, _ = roundtrip_dataset(make_dataset(np.random.default_rng(2), n=4, k=3))
        with pytest.raises(FormatError, match="truncated"):
            read_dataset(io.BytesIO(raw[:-2]))

    def test_truncated_header(self):
        with pytest.raises(FormatError, match="truncated"):
            read_dataset(io.BytesIO(b"A2XD\x01\x00"))

    def test_label_out_of_range_on_read(self):
        ds = make_dataset(np.random.default_rng(3), n=2, k=5)
        buf = io.BytesIO()
        write_dataset(ds, buf)
        raw = bytearray(buf.getvalue())
        raw[26:30] = (99).to_bytes(4, "little")
        with pytest.raises(ValidationError, match="label"):
            read_dataset(io.BytesIO(bytes(raw)))

    def test_dimension_overflow_guard(self):
        import struct

        header = struct.pack("<4sHHQHHHI", b"A2XD", 1, 0, 1 << 60, 100, 100, 100, 1)
        with pytest.raises(FormatError, match="overflow"):
            read_dataset(io.BytesIO(header))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_roundtrips_bit_exact(self, seed):
        ds = make_dataset(np.random.default_rng(seed))
        raw, back = roundtrip_dataset(ds)
        assert back == ds
        buf = io.BytesIO()
        write_dataset(back, buf)
        assert buf.getvalue() == raw

    def test_every_proper_prefix_yields_typed_error(self):
        raw, _ = roundtrip_dataset(make_dataset(np.random.default_rng(4), n=3, c=1, h=2, w=2, k=2))
        for cut in range(len(raw)):
            with pytest.raises(FormatError):
                read_dataset(io.BytesIO(raw[:cut]))


class TestEmbeddingsContainer:
    def test_small_roundtrip(self):
        e = EmbeddingSet(
            dim=3,
            num_classes=2,
            labels=np.array([0, 1], dtype=np.uint32),
            vectors=np.array([[1.5, -2.0, 0.25], [0.1, 0.2, 0.3]], dtype=np.float32),
        )
        buf = io.BytesIO()
        write_embeddings(e, buf)
        back = read_embeddings(io.BytesIO(buf.getvalue()))
        assert back == e
        buf2 = io.BytesIO()
        write_embeddings(back, buf2)
        assert buf2.getvalue() == buf.getvalue()

    def test_nan_rejected(self):
        e = make_embeddings(np.random.default_rng(0), k=2, dim=3)
        e.vectors[0, 0] = np.nan
        with pytest.raises(ValidationError, match="NaN"):
            write_embeddings(e, io.BytesIO())

    def test_nan_rejected_on_read(self):
        e = make_embeddings(np.random.default_rng(1), k=2, dim=1, per_class=1)
        buf = io.BytesIO()
        write_embeddings(e, buf)
        raw = bytearray(buf.getvalue())
        raw[28:32] = np.float32(np.nan).tobytes()
        with pytest.raises(ValidationError, match="NaN"):
            read_embeddings(io.BytesIO(bytes(raw)))

    def test_missing_class_rejected(self):
        e = EmbeddingSet(
            dim=2,
            num_classes=3,
            labels=np.array([0, 1, 1], dtype=np.uint32),
            vectors=np.zeros((3, 2), dtype=np.float32),
        )
        with pytest.raises(ValidationError, match="without any row"):
            write_embeddings(e, io.BytesIO())

    def test_bad_magic(self):
        with pytest.raises(FormatError, match="magic"):
            read_embeddings(io.BytesIO(b"A2XD" + b"\x00" * 20))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_roundtrips_bit_exact(self, seed):
        e = make_embeddings(np.random.default_rng(seed))
        buf = io.BytesIO()
        write_embeddings(e, buf)
        back = read_embeddings(io.BytesIO(buf.getvalue()))
        assert back == e
        buf2 = io.BytesIO()
        write_embeddings(back, buf2)
        assert buf2.getvalue() == buf.getvalue()


class TestMappingFile:
    def test_ten_group_reference_mapping(self):
        table = [5, 4, 9, 8, 1, 0, 7, 6, 3, 2]
        m = Mapping.from_groups(10, [[y] for y in range(10)], table)
        assert m.table == table
        text = mapping_to_json(m)
        back = mapping_from_json(text)
        assert back == m

    def test_two_group_reference_mapping(self):
        m = Mapping.from_groups(10, [[0, 1, 2, 4, 7, 8, 9], [3, 5, 6]], [5, 9])
        assert m.table == [5, 5, 5, 9, 5, 9, 9, 5, 5, 5]
        buf = io.BytesIO()
        write_mapping(m, buf)
        assert read_mapping(io.BytesIO(buf.getvalue())) == m

    def test_non_partition_rejected(self):
        m = Mapping(num_classes=5, groups=[[0, 1], [2, 4]], targets=[3, 0], table=[3, 3, 0, -1, 0])
        with pytest.raises(ValidationError, match="missing"):
            write_mapping(m, io.BytesIO())

    def test_duplicate_targets_rejected(self):
        m = Mapping(num_classes=3, groups=[[0], [1], [2]], targets=[1, 1, 0], table=[1, 1, 0])
        with pytest.raises(ValidationError, match="distinct"):
            write_mapping(m, io.BytesIO())

    def test_inconsistent_table_rejected(self):
        m = Mapping(num_classes=3, groups=[[0, 1], [2]], targets=[2, 0], table=[2, 0, 0])
        with pytest.raises(ValidationError, match="inconsistent"):
            m.validate()

    def test_wrong_keys_rejected(self):
        with pytest.raises(FormatError, match="keys"):
            mapping_from_json(json.dumps({"num_classes": 2, "groups": [[0, 1]]}))

    def test_bad_json_rejected(self):
        with pytest.raises(FormatError, match="JSON"):
            mapping_from_json("{not json")

    def test_x_mismatch_rejected(self):
        m = Mapping.from_groups(3, [[0, 1], [2]], [2, 0])
        doc = json.loads(mapping_to_json(m))
        doc["x"] = 3
        with pytest.raises(ValidationError, match="inconsistent"):
            mapping_from_json(json.dumps(doc))

    def test_groups_order_preserved(self):
        m = Mapping.from_groups(4, [[2, 3], [0, 1]], [0, 3])
        back = mapping_from_json(mapping_to_json(m))
        assert back.groups == [[2, 3], [0, 1]] and back.targets == [0, 3]

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_roundtrips_bit_exact(self, seed):
        m = make_mapping(np.random.default_rng(seed))
        buf = io.BytesIO()
        write_mapping(m, buf)
        back = read_mapping(io.BytesIO(buf.getvalue()))
        assert back == m
        buf2 = io.BytesIO()
        write_mapping(back, buf2)
        assert buf2.getvalue() == buf.getvalue()
        # table[y] always equals its group's target
        for g, members in enumerate(back.groups):
            for y in members:
                assert back.table[y] == back.targets[g]
