"""Binary checkpoint container.

Layout (all integers little-endian):

    magic   4 bytes  b"SGFN"
    version u32      currently 1
    kind    u32 len + utf-8 bytes   (e.g. "SDN", "TOPQ", "LOWQ", "FLATQ")
    meta    u32 len + utf-8 JSON (sorted keys)
    count   u32      number of parameter blocks
    block*  u32 name len + utf-8 name
            u64 rows, u64 cols     (cols == 0 marks a 1D array of length rows)
            rows*max(cols,1) float64 little-endian values

Round trips are bit-exact: values are written with tobytes() and read with
frombuffer(), no text formatting involved. Blocks are written in sorted name
order so identical parameter sets serialize identically.
"""

import json
import struct

import numpy as np

MAGIC = b"SGFN"
VERSION = 1

KINDS = ("SDN", "TOPQ", "LOWQ", "FLATQ")


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, kind, params, metadata=None):
    """params: mapping name -> ndarray or kernel Tensor (1D or 2D)."""
    if kind not in KINDS:
        raise CheckpointError("unknown model kind %r" % kind)
    items = []
    for name in sorted(params):
        arr = params[name]
        arr = np.asarray(getattr(arr, "data", arr), dtype=np.float64)
        if arr.ndim == 1:
            rows, cols = arr.shape[0], 0
        elif arr.ndim == 2:
            rows, cols = arr.shape
        else:
            raise CheckpointError("parameter %r has ndim %d" % (name, arr.ndim))
        items.append((name, rows, cols, arr))

    meta_bytes = json.dumps(metadata or {}, sort_keys=True).encode("utf-8")
    kind_bytes = kind.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<I", len(kind_bytes)))
        fh.write(kind_bytes)
        fh.write(struct.pack("<I", len(meta_bytes)))
        fh.write(meta_bytes)
        fh.write(struct.pack("<I", len(items)))
        for name, rows, cols, arr in items:
            nb = name.encode("utf-8")
            fh.write(struct.pack("<I", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<QQ", rows, cols))
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Returns (kind, params dict name -> float64 ndarray, metadata dict)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    off = 0

    def take(n):
        nonlocal off
        if off + n > len(blob):
            raise CheckpointError("truncated checkpoint")
        piece = blob[off:off + n]
        off += n
        return piece

    if take(4) != MAGIC:
        raise CheckpointError("bad magic")
    (version,) = struct.unpack("<I", take(4))
    if version != VERSION:
        raise CheckpointError("unsupported version %d" % version)
    (klen,) = struct.unpack("<I", take(4))
    kind = take(klen).decode("utf-8")
    if kind not in KINDS:
        raise CheckpointError("unknown model kind %r" % kind)
    (mlen,) = struct.unpack("<I", take(4))
    metadata = json.loads(take(mlen).decode("utf-8"))
    (count,) = struct.unpack("<I", take(4))
    params = {}
    for _ in range(count):
        (nlen,) = struct.unpack("<I", take(4))
        name = take(nlen).decode("utf-8")
        rows, cols = struct.unpack("<QQ", take(16))
        n = rows * max(cols, 1)
        arr = np.frombuffer(take(8 * n), dtype="<f8").astype(np.float64)
        params[name] = arr.reshape(rows) if cols == 0 else arr.reshape(rows, cols)
    if off != len(blob):
        raise CheckpointError("trailing bytes in checkpoint")
    return kind, params, metadata
