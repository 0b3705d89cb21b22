"""Minimal NPY (format 1.0/2.0) reader/writer plus instance-batch loading.

Only the slice of the format this package needs: 2-D C-ordered
little-endian float32/float64 payloads. Everything else is rejected with a
named error instead of being guessed at. The writer emits version 1.0
headers padded so the payload starts on a 64-byte boundary, matching the
reference writer byte-for-byte for float64/float32 matrices.
"""

from __future__ import annotations

import ast
import json
import struct
from pathlib import Path

import numpy as np

from .batch import InstanceBatch
from .errors import (
    BadMagic,
    IoFailure,
    NonFinite,
    NpyFormatError,
    UnexpectedEof,
    UnsupportedDtype,
    UnsupportedOrder,
    UnsupportedShape,
    UnsupportedVersion,
    ValidationError,
)
from .linalg import as_matrix

MAGIC = b"\x93NUMPY"
_DESCR_BY_PRECISION = {"float32": "<f4", "float64": "<f8"}


def read_npy(path) -> np.ndarray:
    """Load a 2-D float matrix, widened to float64.

    Accepts NPY format 1.0/2.0 with little-endian float32/float64 payloads
    in C order. Truncated or malformed files raise (BadMagic, UnexpectedEof,
    UnsupportedDtype, UnsupportedOrder, UnsupportedShape); NaN/Inf payloads
    raise NonFinite. Never returns a partial matrix.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if len(raw) < len(MAGIC) or raw[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"{path}: not an NPY file")
    if len(raw) < 10:
        raise UnexpectedEof(f"{path}: header truncated")
    version = (raw[6], raw[7])
    if version == (1, 0):
        header_len = struct.unpack_from("<H", raw, 8)[0]
        header_start = 10
    elif version == (2, 0):
        if len(raw) < 12:
            raise UnexpectedEof(f"{path}: header truncated")
        header_len = struct.unpack_from("<I", raw, 8)[0]
        header_start = 12
    else:
        raise UnsupportedVersion(f"{path}: NPY version {version[0]}.{version[1]}")
    data_start = header_start + header_len
    if len(raw) < data_start:
        raise UnexpectedEof(f"{path}: header truncated")

    try:
        header = ast.literal_eval(raw[header_start:data_start].decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise NpyFormatError(f"{path}: unparseable header: {exc}") from exc
    if not isinstance(header, dict):
        raise NpyFormatError(f"{path}: header is not a dict")
    try:
        descr = header["descr"]
        fortran = header["fortran_order"]
        shape = header["shape"]
    except KeyError as exc:
        raise NpyFormatError(f"{path}: header missing key {exc}") from exc

    if descr not in ("<f4", "<f8"):
        raise UnsupportedDtype(f"{path}: dtype {descr!r}; only little-endian f4/f8")
    if fortran:
        raise UnsupportedOrder(f"{path}: Fortran-ordered payloads are rejected")
    if (
        not isinstance(shape, tuple)
        or len(shape) != 2
        or not all(isinstance(s, int) and s >= 1 for s in shape)
    ):
        raise UnsupportedShape(f"{path}: need a non-empty 2-D shape, got {shape!r}")

    itemsize = 4 if descr == "<f4" else 8
    nbytes = shape[0] * shape[1] * itemsize
    payload = raw[data_start:]
    if len(payload) < nbytes:
        raise UnexpectedEof(f"{path}: payload has {len(payload)} of {nbytes} bytes")
    if len(payload) > nbytes:
        raise NpyFormatError(f"{path}: {len(payload) - nbytes} trailing bytes after payload")
    values = np.frombuffer(payload, dtype=descr).reshape(shape).astype(np.float64)
    if not np.isfinite(values).all():
        raise NonFinite(f"{path}: payload contains NaN or Inf")
    return values


def _header_bytes(shape: tuple[int, int], descr: str) -> bytes:
    header = f"{{'descr': '{descr}', 'fortran_order': False, 'shape': {shape!r}, }}"
    # Pad so magic+version+len+header is a multiple of 64, ending in newline.
    unpadded = len(MAGIC) + 2 + 2 + len(header) + 1
    header = header + " " * (-unpadded % 64) + "\n"
    return MAGIC + b"\x01\x00" + struct.pack("<H", len(header)) + header.encode("latin1")


def write_npy(matrix, path, precision: str = "float64") -> None:
    """Write a validated 2-D matrix as NPY 1.0, little-endian C order.

    ``precision`` picks the on-disk element type (float32 narrows the
    payload; float64 round-trips bit-for-bit).
    """
    if precision not in _DESCR_BY_PRECISION:
        raise ValidationError(f"precision must be float32|float64, got {precision!r}")
    A = as_matrix(matrix, name="write_npy matrix")
    descr = _DESCR_BY_PRECISION[precision]
    payload = np.ascontiguousarray(A.astype(descr)).tobytes()
    try:
        Path(path).write_bytes(_header_bytes(A.shape, descr) + payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_instances(embeddings_path, meta_path) -> InstanceBatch:
    """Assemble an :class:`InstanceBatch` from a token matrix and JSONL metadata.

    Each metadata line is an object ``{"id", "start", "length", "label"?}``
    claiming rows ``[start, start+length)`` of the matrix. The claims must
    partition the matrix: callers emit only real-token rows, so padding can
    never leak into downstream decompositions.
    """
    tokens = read_npy(embeddings_path)
    try:
        text = Path(meta_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {meta_path}: {exc}") from exc

    offsets: list[tuple[int, int]] = []
    ids: list[str] = []
    labels: list[int | None] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{meta_path}:{lineno}: invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ValidationError(f"{meta_path}:{lineno}: expected a JSON object")
        try:
            ids.append(str(obj["id"]))
            offsets.append((int(obj["start"]), int(obj["length"])))
        except KeyError as exc:
            raise ValidationError(f"{meta_path}:{lineno}: missing field {exc}") from exc
        labels.append(None if obj.get("label") is None else int(obj["label"]))
    if not offsets:
        raise ValidationError(f"{meta_path}: no instances")
    have_labels = [v is not None for v in labels]
    if any(have_labels) and not all(have_labels):
        raise ValidationError(f"{meta_path}: labels must be given for all instances or none")
    return InstanceBatch(
        tokens=tokens,
        offsets=offsets,
        ids=ids,
        labels=[int(v) for v in labels] if all(have_labels) else None,
    )
