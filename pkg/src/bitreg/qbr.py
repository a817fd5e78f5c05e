"""Reader and writer for the ``.qbr`` packed-bit dataset format.

Layout (little-endian)::

    b"QBR1" | u32 n | u32 d | f64 R | f64 L | u64 seed | payload | u32 crc32(payload)

The payload holds, per sample, the ``d`` X bits, the ``d`` X^2 bits and the Y
bit, concatenated over samples and packed LSB-first; only the final byte is
padded with zeros.
"""

import struct
import zlib
from pathlib import Path

import numpy as np

from bitreg.quantize import QuantizedDataset

MAGIC = b"QBR1"
_HEADER = struct.Struct("<4sIIddQ")
_CRC = struct.Struct("<I")


class QbrFormatError(ValueError):
    pass


def payload_size(n, d):
    return (n * (2 * d + 1) + 7) // 8


def encode(ds: QuantizedDataset) -> bytes:
    rows = np.concatenate([ds.x_bits, ds.xsq_bits, ds.y_bits[:, None]], axis=1)
    payload = np.packbits(rows.reshape(-1), bitorder="little").tobytes()
    header = _HEADER.pack(MAGIC, ds.n, ds.d, float(ds.R), float(ds.L), int(ds.seed))
    return header + payload + _CRC.pack(zlib.crc32(payload))


def decode(data: bytes) -> QuantizedDataset:
    if len(data) < 4 or data[:4] != MAGIC:
        raise QbrFormatError("bad magic")
    if len(data) < _HEADER.size:
        raise QbrFormatError("header truncated")
    _, n, d, R, L, seed = _HEADER.unpack_from(data)
    size = payload_size(n, d)
    end = _HEADER.size + size
    if len(data) < end + _CRC.size:
        raise QbrFormatError("payload truncated")
    if len(data) > end + _CRC.size:
        raise QbrFormatError("trailing bytes after checksum")
    payload = data[_HEADER.size:end]
    (crc,) = _CRC.unpack_from(data, end)
    if zlib.crc32(payload) != crc:
        raise QbrFormatError("checksum mismatch")
    width = 2 * d + 1
    bits = np.unpackbits(np.frombuffer(payload, np.uint8), count=n * width, bitorder="little")
    rows = bits.reshape(n, width)
    return QuantizedDataset(rows[:, :d], rows[:, d:2 * d], rows[:, 2 * d], R, L, seed)


def write(path, ds: QuantizedDataset):
    Path(path).write_bytes(encode(ds))


def read(path) -> QuantizedDataset:
    return decode(Path(path).read_bytes())
