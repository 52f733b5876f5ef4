"""Binary dump of spinor fields (layout in docs/field_format.md)."""
from __future__ import annotations

import struct

import numpy as np

from .torus import ANTIPERIODIC, PERIODIC, SpinorField, TorusLattice

MAGIC = b"SPNF"
VERSION = 1


class FieldFormatError(ValueError):
    pass


def dumps(field: SpinorField) -> bytes:
    lat = field.lattice
    block = field.block_shape
    head = [MAGIC, struct.pack("<4I", VERSION, lat.n, field.spinor_dim, len(block))]
    head.append(struct.pack(f"<{len(block)}I", *block))
    head.append(struct.pack(f"<{lat.n}I", *lat.sizes))
    head.append(struct.pack(f"<{lat.n}d", *lat.lengths))
    head.append(struct.pack(f"<{lat.n}B", *(s == ANTIPERIODIC for s in lat.spin_structure)))
    data = np.ascontiguousarray(field.values, dtype="<c16").tobytes()
    return b"".join(head) + data


def loads(buf: bytes) -> SpinorField:
    if buf[:4] != MAGIC:
        raise FieldFormatError("not a spinor field dump (bad magic)")
    off = 4
    try:
        version, n, d, nb = struct.unpack_from("<4I", buf, off)
        off += 16
        if version != VERSION:
            raise FieldFormatError(f"unsupported version {version}")
        block = struct.unpack_from(f"<{nb}I", buf, off)
        off += 4 * nb
        sizes = struct.unpack_from(f"<{n}I", buf, off)
        off += 4 * n
        lengths = struct.unpack_from(f"<{n}d", buf, off)
        off += 8 * n
        flags = struct.unpack_from(f"<{n}B", buf, off)
        off += n
    except struct.error as exc:
        raise FieldFormatError(f"truncated header: {exc}") from exc
    shape = tuple(sizes) + tuple(block) + (d,)
    count = int(np.prod(shape))
    if len(buf) - off != 16 * count:
        raise FieldFormatError(f"payload has {len(buf) - off} bytes, expected {16 * count}")
    values = np.frombuffer(buf, dtype="<c16", count=count, offset=off).reshape(shape)
    spin = tuple(ANTIPERIODIC if f else PERIODIC for f in flags)
    return SpinorField(TorusLattice(n, sizes, lengths, spin), values.astype(complex))


def save(path, field: SpinorField) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(field))


def load(path) -> SpinorField:
    with open(path, "rb") as fh:
        return loads(fh.read())
