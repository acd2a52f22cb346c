"""Binary model file: magic "SCBM", version, architecture descriptor,
then named tensors. Round trips are bit-exact.

Layout (little-endian):
  "SCBM" | u16 version=1 | u32 arch_json_len | arch JSON (UTF-8) |
  u32 n_tensors | per tensor:
    u16 name_len | name | u8 dtype_tag (0=f32, 1=f16, 2=i8) |
    u8 flags (bit 0: scale/zero-point present) | u8 ndim | u32 x ndim |
    [f32 scale, i32 zero_point] | raw payload (C order)

Tensors are written in sorted-name order so identical parameter sets
produce identical bytes.
"""

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import BadMagic, TruncatedPayload
from .arch import ArchDescriptor

MAGIC = b"SCBM"
VERSION = 1

_TAG_OF = {np.dtype("<f4"): 0, np.dtype("<f2"): 1, np.dtype("i1"): 2}
_DTYPE_OF = {0: np.dtype("<f4"), 1: np.dtype("<f2"), 2: np.dtype("i1")}


def save_model(path, arch, tensors):
    """tensors: name -> ndarray (f32/f16/i8) or (ndarray, scale, zero_point)."""
    path = Path(path)
    arch_json = json.dumps(arch.to_dict(), sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<H", VERSION))
        f.write(struct.pack("<I", len(arch_json)))
        f.write(arch_json)
        f.write(struct.pack("<I", len(tensors)))
        for name in sorted(tensors):
            entry = tensors[name]
            if isinstance(entry, tuple):
                data, scale, zp = entry
            else:
                data, scale, zp = entry, None, None
            data = np.ascontiguousarray(data)
            if data.dtype == np.float64:
                data = data.astype("<f4")
            tag = _TAG_OF.get(data.dtype.newbyteorder("<"))
            if tag is None:
                raise ValueError(f"unsupported tensor dtype {data.dtype} for {name!r}")
            encoded = name.encode("utf-8")
            flags = 1 if scale is not None else 0
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<BBB", tag, flags, data.ndim))
            f.write(struct.pack(f"<{data.ndim}I", *data.shape))
            if flags & 1:
                f.write(struct.pack("<fi", float(scale), int(zp or 0)))
            f.write(data.astype(data.dtype.newbyteorder("<")).tobytes())
    return path


def _read_exact(f, n, what):
    buf = f.read(n)
    if len(buf) != n:
        raise TruncatedPayload(f"model file ends inside {what}")
    return buf


def load_model(path):
    """Returns (arch, tensors) with tensors: name -> (array, scale, zp)."""
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise BadMagic(f"not a model file: {path}")
        (version,) = struct.unpack("<H", _read_exact(f, 2, "header"))
        if version != VERSION:
            raise BadMagic(f"unsupported model version {version}")
        (arch_len,) = struct.unpack("<I", _read_exact(f, 4, "header"))
        arch = ArchDescriptor.from_dict(json.loads(_read_exact(f, arch_len, "arch")))
        (n_tensors,) = struct.unpack("<I", _read_exact(f, 4, "header"))
        tensors = {}
        for _ in range(n_tensors):
            (name_len,) = struct.unpack("<H", _read_exact(f, 2, "tensor name"))
            name = _read_exact(f, name_len, "tensor name").decode("utf-8")
            tag, flags, ndim = struct.unpack("<BBB", _read_exact(f, 3, name))
            shape = struct.unpack(f"<{ndim}I", _read_exact(f, 4 * ndim, name))
            scale, zp = None, None
            if flags & 1:
                scale, zp = struct.unpack("<fi", _read_exact(f, 8, name))
            dtype = _DTYPE_OF[tag]
            n_bytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
            data = np.frombuffer(_read_exact(f, n_bytes, name), dtype=dtype).reshape(shape)
            tensors[name] = (data.copy(), scale, zp)
    return arch, tensors
