"""Binary parameter-file format for saved queue entries and failures.

Layout (all integers little-endian)::

    b"BDVF" | version:u16 | structural_len:u32 | value_len:u32 | structural | value
"""
from __future__ import annotations

import struct
from pathlib import Path

MAGIC = b"BDVF"
VERSION = 1
_HEADER = struct.Struct("<4sHII")


class MalformedParameterFile(ValueError):
    pass


def dumps(structural: bytes, value: bytes) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, len(structural), len(value)) + structural + value


def loads(blob: bytes) -> tuple[bytes, bytes]:
    if len(blob) < _HEADER.size:
        raise MalformedParameterFile(f"truncated header ({len(blob)} octets)")
    magic, version, s_len, v_len = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise MalformedParameterFile(f"bad magic {magic!r}")
    if version != VERSION:
        raise MalformedParameterFile(f"unsupported version {version}")
    body = blob[_HEADER.size:]
    if len(body) != s_len + v_len:
        raise MalformedParameterFile(
            f"body is {len(body)} octets, header declares {s_len} + {v_len}"
        )
    return bytes(body[:s_len]), bytes(body[s_len:])


def write(path, structural: bytes, value: bytes) -> None:
    Path(path).write_bytes(dumps(structural, value))


def read(path) -> tuple[bytes, bytes]:
    return loads(Path(path).read_bytes())
