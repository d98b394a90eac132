"""Fixed-width TLV codec used by every wire format in the package.

Layout of one element: 1-byte tag, 4-byte big-endian length, value.
Decoding is strict: unknown tags, short reads and trailing bytes all raise
:class:`MalformedEncoding` carrying the absolute offset of the problem.
"""

from __future__ import annotations

import struct

from hybridledger.errors import MalformedEncoding

HEADER_SIZE = 5
_HEADER = struct.Struct(">BI")


def encode(tag: int, value: bytes) -> bytes:
    return _HEADER.pack(tag, len(value)) + value


def encode_u64(tag: int, number: int) -> bytes:
    return encode(tag, number.to_bytes(8, "big"))


def encode_named(name: str, data: bytes) -> bytes:
    """Prefix ``data`` with a 1-byte-length ASCII name."""
    raw = name.encode("ascii")
    if not 1 <= len(raw) <= 255:
        raise ValueError(f"scheme name must be 1..255 ASCII bytes: {name!r}")
    return bytes([len(raw)]) + raw + data


def decode_named(value: bytes, base: int = 0) -> tuple[str, bytes]:
    if not value:
        raise MalformedEncoding("missing name prefix", base)
    size = value[0]
    if size == 0 or size + 1 > len(value):
        raise MalformedEncoding("bad name length", base)
    raw = value[1 : 1 + size]
    if not all(0x21 <= b <= 0x7E for b in raw):
        raise MalformedEncoding("name is not printable ASCII", base + 1)
    return raw.decode("ascii"), value[1 + size :]


class Reader:
    """Sequential reader over a TLV byte string."""

    def __init__(self, data: bytes, base: int = 0):
        self.data = bytes(data)
        self.base = base
        self.pos = 0

    @property
    def offset(self) -> int:
        return self.base + self.pos

    def at_end(self) -> bool:
        return self.pos >= len(self.data)

    def peek_tag(self) -> int | None:
        return None if self.at_end() else self.data[self.pos]

    def read(self, tag: int) -> tuple[bytes, int]:
        """Consume the next element, which must carry ``tag``.

        Returns the value and the absolute offset where the value starts, so
        nested readers keep reporting absolute positions.
        """
        start = self.offset
        if len(self.data) - self.pos < HEADER_SIZE:
            raise MalformedEncoding("truncated TLV header", start)
        got, length = _HEADER.unpack_from(self.data, self.pos)
        if got != tag:
            raise MalformedEncoding(f"expected tag 0x{tag:02x}, found 0x{got:02x}", start)
        begin = self.pos + HEADER_SIZE
        end = begin + length
        if end > len(self.data):
            raise MalformedEncoding("TLV length exceeds input", start + 1)
        self.pos = end
        return self.data[begin:end], self.base + begin

    def read_u64(self, tag: int) -> int:
        value, at = self.read(tag)
        if len(value) != 8:
            raise MalformedEncoding("expected 8-byte integer", at)
        return int.from_bytes(value, "big")

    def read_fixed(self, tag: int, size: int) -> bytes:
        value, at = self.read(tag)
        if len(value) != size:
            raise MalformedEncoding(f"expected {size}-byte value", at)
        return value

    def finish(self) -> None:
        if not self.at_end():
            raise MalformedEncoding("trailing bytes", self.offset)
