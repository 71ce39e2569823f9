"""Loading, validation, pairing and persistence of embedding matrices.

Supported interchange formats:

* ``emb1`` -- native binary format: magic ``EMB1`` (4 bytes), one u8 dtype
  flag (0 = f32, 1 = f64), u64 little-endian row count n, u64 little-endian
  column count d, then n*d row-major little-endian values.
* ``npy``  -- NumPy NPY, restricted to version 1.0, C-order, 2-D, ``<f4``
  or ``<f8``.
* ``csv``  -- headerless text, ``,`` separator, ``.`` decimal, one sample
  per line.

All arithmetic downstream happens in float64; f32 inputs are promoted on
load and demoted again on save.
"""

import ast
import io
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, FormatError, IoError, PairError, ParamError
from .validation import check_labels, check_matrix

__all__ = [
    "EmbeddingSet",
    "PairedDataset",
    "load_embeddings",
    "save_embeddings",
    "pair",
    "as_embedding_set",
]

MODALITIES = ("image", "text", "video", "other")
FORMATS = ("emb1", "csv", "npy")

_EMB1_MAGIC = b"EMB1"
_NPY_MAGIC = b"\x93NUMPY"


@dataclass(frozen=True)
class EmbeddingSet:
    """An n x d matrix of sample embeddings; rows are samples, row order is the pairing order."""

    data: np.ndarray
    modality: str = "other"
    source_label: str = ""
    dtype: str = "f64"

    def __post_init__(self):
        arr = check_matrix(self.data, "embedding matrix")
        object.__setattr__(self, "data", arr)
        if self.modality not in MODALITIES:
            raise ParamError(f"modality must be one of {MODALITIES}, got {self.modality!r}")
        if self.dtype not in ("f32", "f64"):
            raise ParamError(f"dtype must be 'f32' or 'f64', got {self.dtype!r}")

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def d(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class PairedDataset:
    """Aligned generated-data and prompt embeddings: row i of x was produced from row i of t."""

    x: EmbeddingSet
    t: EmbeddingSet
    group_labels: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.x.n != self.t.n:
            raise PairError(self.x.n, self.t.n)
        if self.group_labels is not None:
            labels = check_labels(self.group_labels, self.x.n)
            object.__setattr__(self, "group_labels", labels)

    @property
    def n(self):
        return self.x.n

    @property
    def num_groups(self):
        if self.group_labels is None:
            return None
        return int(self.group_labels.max())


def as_embedding_set(obj, modality="other", source_label=""):
    """Coerce an array-like or EmbeddingSet into an EmbeddingSet."""
    if isinstance(obj, EmbeddingSet):
        return obj
    return EmbeddingSet(np.asarray(obj, dtype=np.float64), modality=modality,
                        source_label=source_label)


def pair(x, t, labels=None):
    """Pair two embedding sets of equal row count into a PairedDataset.

    Pairing never reorders rows: index i in x corresponds to index i in t.
    """
    x = as_embedding_set(x)
    t = as_embedding_set(t)
    return PairedDataset(x, t, group_labels=labels)


def load_embeddings(path, format="emb1", modality="other", source_label=""):
    """Load an embedding matrix from ``path`` under the declared ``format``.

    Returns an EmbeddingSet whose data is float64 (f32 files are promoted);
    the original precision is recorded in ``dtype``.
    """
    if format not in FORMATS:
        raise ParamError(f"format must be one of {FORMATS}, got {format!r}")
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    if format == "emb1":
        arr, dtype = _parse_emb1(raw)
    elif format == "npy":
        arr, dtype = _parse_npy(raw)
    else:
        arr, dtype = _parse_csv(raw)

    if arr.size == 0:
        raise DataError(f"{path} holds an empty matrix")
    try:
        return EmbeddingSet(arr, modality=modality, source_label=source_label, dtype=dtype)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def save_embeddings(emb, path, format="emb1"):
    """Persist an EmbeddingSet so that load_embeddings reproduces it.

    Round-trip is exact for f64 and exact to f32 precision for f32 sets.
    The file is written atomically (temp file + rename).
    """
    emb = as_embedding_set(emb)
    if format not in FORMATS:
        raise ParamError(f"format must be one of {FORMATS}, got {format!r}")

    if format == "emb1":
        payload = _encode_emb1(emb)
    elif format == "npy":
        payload = _encode_npy(emb)
    else:
        payload = _encode_csv(emb)

    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise IoError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# EMB1
# ---------------------------------------------------------------------------

def _parse_emb1(raw):
    if len(raw) < 21:
        raise FormatError(f"EMB1 file truncated: {len(raw)} bytes")
    if raw[:4] != _EMB1_MAGIC:
        raise FormatError(f"bad EMB1 magic {raw[:4]!r}")
    flag = raw[4]
    if flag not in (0, 1):
        raise FormatError(f"bad EMB1 dtype flag {flag}")
    n, d = struct.unpack_from("<QQ", raw, 5)
    dtype = "f32" if flag == 0 else "f64"
    itemsize = 4 if flag == 0 else 8
    expected = 21 + n * d * itemsize
    if len(raw) != expected:
        raise FormatError(f"EMB1 payload length {len(raw)} != expected {expected} "
                          f"for n={n}, d={d}, dtype={dtype}")
    if n == 0 or d == 0:
        raise DataError(f"EMB1 matrix is empty: n={n}, d={d}")
    np_dtype = "<f4" if flag == 0 else "<f8"
    values = np.frombuffer(raw, dtype=np_dtype, count=n * d, offset=21)
    return values.astype(np.float64).reshape(n, d), dtype


def _encode_emb1(emb):
    flag = 0 if emb.dtype == "f32" else 1
    np_dtype = "<f4" if flag == 0 else "<f8"
    header = _EMB1_MAGIC + struct.pack("<BQQ", flag, emb.n, emb.d)
    return header + np.ascontiguousarray(emb.data, dtype=np_dtype).tobytes()


# ---------------------------------------------------------------------------
# NPY (v1.0 subset: C-order, 2-D, <f4 / <f8)
# ---------------------------------------------------------------------------

def _parse_npy(raw):
    if len(raw) < 10 or raw[:6] != _NPY_MAGIC:
        raise FormatError("not an NPY file (bad magic)")
    major, minor = raw[6], raw[7]
    if (major, minor) != (1, 0):
        raise FormatError(f"only NPY v1.0 is supported, got v{major}.{minor}")
    (header_len,) = struct.unpack_from("<H", raw, 8)
    header_end = 10 + header_len
    if len(raw) < header_end:
        raise FormatError("NPY header truncated")
    try:
        header = ast.literal_eval(raw[10:header_end].decode("latin1").strip())
    except (ValueError, SyntaxError) as exc:
        raise FormatError(f"malformed NPY header: {exc}") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError(f"malformed NPY header dict: {header!r}")
    descr = header["descr"]
    if descr not in ("<f4", "<f8"):
        raise FormatError(f"unsupported NPY dtype {descr!r} (need '<f4' or '<f8')")
    if header["fortran_order"]:
        raise FormatError("Fortran-order NPY is not supported")
    shape = header["shape"]
    if not (isinstance(shape, tuple) and len(shape) == 2):
        raise FormatError(f"only 2-D NPY is supported, got shape {shape!r}")
    n, d = (int(s) for s in shape)
    if n == 0 or d == 0:
        raise DataError(f"NPY matrix is empty: shape=({n}, {d})")
    itemsize = 4 if descr == "<f4" else 8
    expected = header_end + n * d * itemsize
    if len(raw) != expected:
        raise FormatError(f"NPY payload length {len(raw)} != expected {expected}")
    values = np.frombuffer(raw, dtype=descr, count=n * d, offset=header_end)
    dtype = "f32" if descr == "<f4" else "f64"
    return values.astype(np.float64).reshape(n, d), dtype


def _encode_npy(emb):
    descr = "<f4" if emb.dtype == "f32" else "<f8"
    header = f"{{'descr': '{descr}', 'fortran_order': False, 'shape': ({emb.n}, {emb.d}), }}"
    # pad so magic+version+len+header is a multiple of 64, ending in newline
    unpadded = 10 + len(header) + 1
    pad = (64 - unpadded % 64) % 64
    header = header + " " * pad + "\n"
    out = io.BytesIO()
    out.write(_NPY_MAGIC)
    out.write(bytes([1, 0]))
    out.write(struct.pack("<H", len(header)))
    out.write(header.encode("latin1"))
    out.write(np.ascontiguousarray(emb.data, dtype=descr).tobytes())
    return out.getvalue()


# ---------------------------------------------------------------------------
# CSV (headerless, ',' separator, '.' decimal)
# ---------------------------------------------------------------------------

def _parse_csv(raw):
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"CSV is not valid UTF-8: {exc}") from exc
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise FormatError(f"CSV line {lineno} has {len(cells)} fields, expected {width}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise FormatError(f"CSV line {lineno}: {exc}") from exc
    if not rows:
        raise DataError("CSV holds an empty matrix")
    return np.asarray(rows, dtype=np.float64), "f64"


def _encode_csv(emb):
    if emb.dtype == "f32":
        cell = lambda v: repr(np.float32(v))
    else:
        cell = lambda v: repr(float(v))
    lines = (",".join(cell(v) for v in row) for row in emb.data)
    return ("\n".join(lines) + "\n").encode("utf-8")
