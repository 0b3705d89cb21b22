from pathlib import Path

import numpy as np
import pytest

from purekit.batch import InstanceBatch
from purekit.errors import (
    BadMagic,
    DuplicateId,
    GapInOffsets,
    IoFailure,
    NonFinite,
    NpyFormatError,
    OutOfRange,
    OverlappingOffsets,
    UnexpectedEof,
    UnsupportedDtype,
    UnsupportedOrder,
    UnsupportedShape,
    UnsupportedVersion,
    ValidationError,
)
from purekit.linalg import make_rng
from purekit.npyio import read_instances, read_npy, write_npy

FIXTURES = Path(__file__).parent / "fixtures"


def write_meta(path, rows):
    import json
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")


class TestReadNpy:
    def test_golden_fixture(self):
        # produced by the reference NPY writer; magic must be 93 4E 55 4D 50 59
        path = FIXTURES / "golden_2x2_f32.npy"
        raw = path.read_bytes()
        assert raw[:6] == bytes.fromhex("934e554d5059")
        assert raw[6:8] == b"\x01\x00"
        M = read_npy(path)
        np.testing.assert_array_equal(M, [[1.0, 2.0], [3.0, 4.0]])
        assert M.dtype == np.float64

    def test_round_trip_float64_bit_identical(self, tmp_path):
        A = make_rng(7).standard_normal((5, 3))
        p = tmp_path / "a.npy"
        write_npy(A, p)
        assert read_npy(p).tobytes() == A.tobytes()

    def test_round_trip_float32_widens(self, tmp_path):
        A = make_rng(8).standard_normal((4, 6))
        p = tmp_path / "a.npy"
        write_npy(A, p, precision="float32")
        got = read_npy(p)
        assert got.dtype == np.float64
        np.testing.assert_array_equal(got, A.astype(np.float32).astype(np.float64))

    def test_reads_reference_writer_output(self, tmp_path):
        for dtype in (np.float32, np.float64):
            A = make_rng(9).standard_normal((3, 7)).astype(dtype)
            p = tmp_path / "ref.npy"
            np.save(p, A)
            np.testing.assert_array_equal(read_npy(p), A.astype(np.float64))

    def test_version_2_accepted(self, tmp_path):
        A = make_rng(10).standard_normal((2, 2))
        p = tmp_path / "v2.npy"
        with open(p, "wb") as fh:
            np.lib.format.write_array(fh, A, version=(2, 0))
        np.testing.assert_array_equal(read_npy(p), A)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.npy"
        p.write_bytes(b"NOTNPY" + b"\x00" * 40)
        with pytest.raises(BadMagic):
            read_npy(p)

    def test_truncated_header(self, tmp_path):
        p = tmp_path / "trunc.npy"
        p.write_bytes(b"\x93NUMPY\x01")
        with pytest.raises((BadMagic, UnexpectedEof)):
            read_npy(p)

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "trunc.npy"
        A = make_rng(11).standard_normal((8, 8))
        write_npy(A, p)
        raw = p.read_bytes()
        p.write_bytes(raw[: len(raw) - 17])
        with pytest.raises(UnexpectedEof):
            read_npy(p)

    def test_trailing_bytes_rejected(self, tmp_path):
        p = tmp_path / "trail.npy"
        write_npy(np.ones((2, 2)), p)
        p.write_bytes(p.read_bytes() + b"junk")
        with pytest.raises(NpyFormatError):
            read_npy(p)

    def test_unsupported_version(self, tmp_path):
        p = tmp_path / "v9.npy"
        write_npy(np.ones((2, 2)), p)
        raw = bytearray(p.read_bytes())
        raw[6] = 9
        p.write_bytes(bytes(raw))
        with pytest.raises(UnsupportedVersion):
            read_npy(p)

    def test_fortran_order_rejected(self, tmp_path):
        p = tmp_path / "fortran.npy"
        np.save(p, np.asfortranarray(np.ones((3, 2))))
        with pytest.raises(UnsupportedOrder):
            read_npy(p)

    def test_big_endian_rejected(self, tmp_path):
        p = tmp_path / "be.npy"
        np.save(p, np.ones((2, 2), dtype=">f8"))
        with pytest.raises(UnsupportedDtype):
            read_npy(p)

    def test_integer_dtype_rejected(self, tmp_path):
        p = tmp_path / "int.npy"
        np.save(p, np.ones((2, 2), dtype=np.int64))
        with pytest.raises(UnsupportedDtype):
            read_npy(p)

    def test_non_2d_rejected(self, tmp_path):
        p = tmp_path / "vec.npy"
        np.save(p, np.ones(4))
        with pytest.raises(UnsupportedShape):
            read_npy(p)

    def test_nan_payload_rejected(self, tmp_path):
        p = tmp_path / "nan.npy"
        np.save(p, np.array([[1.0, np.nan]]))
        with pytest.raises(NonFinite):
            read_npy(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoFailure):
            read_npy(tmp_path / "nope.npy")


class TestWriteNpy:
    def test_payload_starts_on_64_byte_boundary(self, tmp_path):
        for shape in [(1, 1), (2, 3), (10, 127)]:
            p = tmp_path / "x.npy"
            A = np.ones(shape)
            write_npy(A, p)
            raw = p.read_bytes()
            offset = len(raw) - A.size * 8
            assert offset % 64 == 0
            header_len = int.from_bytes(raw[8:10], "little")
            assert 10 + header_len == offset
            assert raw[offset - 1:offset] == b"\n"

    def test_matches_reference_writer_bytes(self, tmp_path):
        A = make_rng(12).standard_normal((6, 5))
        ours, ref = tmp_path / "ours.npy", tmp_path / "ref.npy"
        write_npy(A, ours)
        np.save(ref, A)
        assert ours.read_bytes() == ref.read_bytes()

    def test_empty_matrix_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            write_npy(np.ones((0, 3)), tmp_path / "x.npy")

    def test_nan_rejected(self, tmp_path):
        with pytest.raises(NonFinite):
            write_npy(np.array([[np.inf, 1.0]]), tmp_path / "x.npy")

    def test_bad_precision(self, tmp_path):
        with pytest.raises(ValidationError):
            write_npy(np.ones((2, 2)), tmp_path / "x.npy", precision="f16")


class TestReadInstances:
    def test_two_instances(self, tmp_path):
        emb = tmp_path / "e.npy"
        write_npy(make_rng(1).standard_normal((5, 4)), emb)
        meta = tmp_path / "m.jsonl"
        write_meta(meta, [
            {"id": "a", "start": 0, "length": 3},
            {"id": "b", "start": 3, "length": 2},
        ])
        batch = read_instances(emb, meta)
        assert len(batch) == 2
        assert [o[1] for o in batch.offsets] == [3, 2]
        assert batch.labels is None

    def test_labels_loaded(self, tmp_path):
        emb = tmp_path / "e.npy"
        write_npy(make_rng(2).standard_normal((4, 3)), emb)
        meta = tmp_path / "m.jsonl"
        write_meta(meta, [
            {"id": "a", "start": 0, "length": 2, "label": 1},
            {"id": "b", "start": 2, "length": 2, "label": 0},
        ])
        assert read_instances(emb, meta).labels == [1, 0]

    def test_overlap_rejected(self, tmp_path):
        emb = tmp_path / "e.npy"
        write_npy(make_rng(3).standard_normal((5, 2)), emb)
        meta = tmp_path / "m.jsonl"
        write_meta(meta, [
            {"id": "a", "start": 0, "length": 3},
            {"id": "b", "start": 2, "length": 3},
        ])
        with pytest.raises(OverlappingOffsets):
            read_instances(emb, meta)

    def test_out_of_range_rejected(self, tmp_path):
        emb = tmp_path / "e.npy"
        write_npy(make_rng(4).standard_normal((5, 2)), emb)
        meta = tmp_path / "m.jsonl"
        write_meta(meta, [{"id": "a", "start": 0, "length": 5},
                          {"id": "b", "start": 10, "length": 1}])
        with pytest.raises(OutOfRange):
            read_instances(emb, meta)

    def test_duplicate_id_rejected(self, tmp_path):
        emb = tmp_path / "e.npy"
        write_npy(make_rng(5).standard_normal((4, 2)), emb)
        meta = tmp_path / "m.jsonl"
        write_meta(meta, [{"id": "a", "start": 0, "length": 2},
                          {"id": "a", "start": 2, "length": 2}])
        with pytest.raises(DuplicateId):
            read_instances(emb, meta)

    def test_gap_rejected(self, tmp_path):
        emb = tmp_path / "e.npy"
        write_npy(make_rng(6).standard_normal((5, 2)), emb)
        meta = tmp_path / "m.jsonl"
        write_meta(meta, [{"id": "a", "start": 0, "length": 2},
                          {"id": "b", "start": 3, "length": 2}])
        with pytest.raises(GapInOffsets):
            read_instances(emb, meta)

    def test_partial_labels_rejected(self, tmp_path):
        emb = tmp_path / "e.npy"
        write_npy(make_rng(7).standard_normal((4, 2)), emb)
        meta = tmp_path / "m.jsonl"
        write_meta(meta, [{"id": "a", "start": 0, "length": 2, "label": 1},
                          {"id": "b", "start": 2, "length": 2}])
        with pytest.raises(ValidationError):
            read_instances(emb, meta)


class TestInstanceBatch:
    def test_zero_length_rejected(self):
        with pytest.raises(OutOfRange):
            InstanceBatch(tokens=np.ones((3, 2)), offsets=[(0, 3), (3, 0)])

    def test_views_share_memory(self):
        batch = InstanceBatch(tokens=np.ones((4, 2)), offsets=[(0, 2), (2, 2)])
        view = batch.instance(1)
        assert view.base is batch.tokens
