"""Binary dictionary files.

Layout, all integers little-endian::

    b"SPKD"                       magic
    u16                           format version (1)
    u32 x 6                       width, height, x_n, y_n, n_train, n_classes
    n_classes x (u32 len, utf-8)  label table, sorted
    n_train x u32                 column label, as index into the label table
    n_patches x matrix            patch dictionaries in patch-index order,
                                  each patch_dim x n_train float64, column-major

Reading back a written file reproduces every float bit for bit.
"""

import struct

import numpy as np

from .errors import (DictionaryFormatError, DictionaryTruncatedError, DictionaryVersionError,
                     InvalidInputError)
from .pipeline import Dictionary, GridSpec

MAGIC = b"SPKD"
VERSION = 1

_HEADER = struct.Struct("<4sH6I")
_U32 = struct.Struct("<I")


def dictionary_to_bytes(d):
    labels = sorted(set(d.column_labels))
    index = {lab: i for i, lab in enumerate(labels)}
    g = d.grid
    parts = [_HEADER.pack(MAGIC, VERSION, g.width, g.height, g.x_n, g.y_n,
                          d.n_train, len(labels))]
    for lab in labels:
        raw = lab.encode("utf-8")
        parts.append(_U32.pack(len(raw)))
        parts.append(raw)
    parts.append(np.array([index[lab] for lab in d.column_labels], dtype="<u4").tobytes())
    for mat in d.per_patch:
        mat = np.asarray(mat)
        if mat.shape != (g.patch_dim, d.n_train):
            raise DictionaryFormatError(
                f"patch matrix has shape {mat.shape}, expected ({g.patch_dim}, {d.n_train})")
        parts.append(mat.astype("<f8").tobytes(order="F"))
    return b"".join(parts)


def save_dictionary(d, path):
    with open(path, "wb") as fh:
        fh.write(dictionary_to_bytes(d))


class _Reader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n, what):
        if self.pos + n > len(self.data):
            raise DictionaryTruncatedError(len(self.data), self.pos + n - len(self.data), what)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def dictionary_from_bytes(data):
    rd = _Reader(bytes(data))
    magic = rd.take(4, "magic")
    if magic != MAGIC:
        raise DictionaryFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    (version,) = struct.unpack("<H", rd.take(2, "version"))
    if version != VERSION:
        raise DictionaryVersionError(version, VERSION)
    width, height, x_n, y_n, n_train, n_classes = struct.unpack("<6I", rd.take(24, "header"))
    try:
        grid = GridSpec(width, height, x_n, y_n)
    except InvalidInputError as exc:
        raise DictionaryFormatError(f"invalid grid in header: {exc}") from exc
    if n_train < 1 or n_classes < 1:
        raise DictionaryFormatError(f"header declares {n_train} columns and {n_classes} classes")

    labels = []
    for i in range(n_classes):
        (n,) = _U32.unpack(rd.take(4, f"length of label {i}"))
        try:
            labels.append(rd.take(n, f"label {i}").decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise DictionaryFormatError(f"label {i} is not valid UTF-8") from exc
    if len(set(labels)) != n_classes:
        raise DictionaryFormatError("label table has duplicates")

    idx = np.frombuffer(rd.take(4 * n_train, "column labels"), dtype="<u4")
    if idx.size and idx.max() >= n_classes:
        raise DictionaryFormatError(f"column label index {int(idx.max())} out of range")
    column_labels = [labels[i] for i in idx.tolist()]

    size = grid.patch_dim * n_train
    per_patch = []
    for k in range(grid.n_patches):
        raw = rd.take(8 * size, f"patch matrix {k}")
        mat = np.frombuffer(raw, dtype="<f8").reshape((grid.patch_dim, n_train), order="F")
        per_patch.append(np.ascontiguousarray(mat, dtype=np.float64))
    if rd.pos != len(rd.data):
        raise DictionaryFormatError(f"{len(rd.data) - rd.pos} trailing bytes after offset {rd.pos}")
    return Dictionary(grid, per_patch, column_labels)


def load_dictionary(path):
    with open(path, "rb") as fh:
        return dictionary_from_bytes(fh.read())
