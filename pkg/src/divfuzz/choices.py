"""Typed random choices backed by split structural/value parameter sequences.

A generator never touches an RNG directly. Every random decision it makes is
read from one of two untyped byte streams: the *structural* stream, for
decisions that steer the generator's control flow, and the *value* stream,
for decisions that only fill in content. Holding both streams fixed makes the
generated input a pure function of their bytes.
"""
from __future__ import annotations

import enum
import random
import struct
from dataclasses import dataclass
from typing import Sequence, TypeVar

import xxhash

T = TypeVar("T")

INT_WIDTH = 4
BOOL_WIDTH = 1

# Fixed so signatures agree across processes and platforms.
SIGNATURE_SEED = 0x5EED_D1F5


class ChoiceKind(enum.Enum):
    STRUCTURAL = "structural"
    VALUE = "value"


class SequenceExhausted(Exception):
    """Strict replay needed more bytes than the sequence holds."""


class InvalidDomain(ValueError):
    pass


@dataclass(frozen=True)
class ChoicePoint:
    location: str
    domain: tuple
    kind: ChoiceKind

    def __post_init__(self):
        if len(self.domain) < 1:
            raise InvalidDomain(f"choice point {self.location!r} has an empty domain")


@dataclass(frozen=True)
class StructuralSignature:
    digest: bytes

    def hex(self) -> str:
        return self.digest.hex()


EMPTY_SIGNATURE = StructuralSignature(xxhash.xxh3_128_digest(b"", seed=SIGNATURE_SEED))


class ParameterSequence:
    """A byte buffer with a read cursor.

    Reads past the end either extend the buffer from ``rng`` (record mode) or
    raise :class:`SequenceExhausted` (``strict=True``).
    """

    __slots__ = ("data", "cursor", "rng", "strict")

    def __init__(self, data: bytes = b"", rng: random.Random | None = None, strict: bool = False):
        self.data = bytearray(data)
        self.cursor = 0
        self.rng = rng
        self.strict = strict

    def __len__(self):
        return len(self.data)

    def __repr__(self):
        return f"ParameterSequence({bytes(self.data)!r}, cursor={self.cursor})"

    def read(self, n: int) -> bytes:
        if n < 1:
            raise ValueError("must read at least one octet")
        end = self.cursor + n
        missing = end - len(self.data)
        if missing > 0:
            if self.strict:
                raise SequenceExhausted(
                    f"need {n} octets at cursor {self.cursor}, only {len(self.data)} recorded"
                )
            if self.rng is None:
                self.rng = random.Random(0)
            self.data += self.rng.randbytes(missing)
        out = bytes(self.data[self.cursor:end])
        self.cursor = end
        return out

    def consumed(self) -> bytes:
        return bytes(self.data[: self.cursor])


class SplitParameterSequence:
    """The pair (structural, value) of parameter sequences that determines an input.

    Each stream extends from its own RNG (both derived from ``rng``) so that
    how far one stream grows never shifts the octets the other receives.
    """

    __slots__ = ("structural", "value")

    def __init__(
        self,
        structural: bytes = b"",
        value: bytes = b"",
        rng: random.Random | None = None,
        strict: bool = False,
    ):
        s_rng = v_rng = None
        if rng is not None:
            s_rng, v_rng = random.Random(rng.getrandbits(64)), random.Random(rng.getrandbits(64))
        self.structural = ParameterSequence(structural, s_rng, strict)
        self.value = ParameterSequence(value, v_rng, strict)

    @classmethod
    def from_params(cls, params: tuple[bytes, bytes], rng=None, strict=False):
        return cls(params[0], params[1], rng=rng, strict=strict)

    def __repr__(self):
        return f"SplitParameterSequence(s={bytes(self.structural.data)!r}, v={bytes(self.value.data)!r})"

    def __eq__(self, other):
        if not isinstance(other, SplitParameterSequence):
            return NotImplemented
        return self.params() == other.params()

    def __hash__(self):
        return hash(self.params())

    def stream(self, kind: ChoiceKind) -> ParameterSequence:
        return self.structural if kind is ChoiceKind.STRUCTURAL else self.value

    def params(self) -> tuple[bytes, bytes]:
        """Full byte contents of both streams, ignoring cursors."""
        return bytes(self.structural.data), bytes(self.value.data)

    def consumed(self) -> tuple[bytes, bytes]:
        return self.structural.consumed(), self.value.consumed()

    def snapshot(self) -> SplitParameterSequence:
        """A fresh, strict copy holding exactly the bytes consumed so far."""
        s, v = self.consumed()
        return SplitParameterSequence(s, v, strict=True)

    def reset(self) -> None:
        self.structural.cursor = 0
        self.value.cursor = 0


def next_bytes(source: SplitParameterSequence, kind: ChoiceKind, n: int) -> bytes:
    return source.stream(kind).read(n)


def choose_int(source: SplitParameterSequence, kind: ChoiceKind, lo: int, hi: int) -> int:
    """Integer in ``[lo, hi]`` from 4 octets, little-endian, reduced modulo the range."""
    if lo > hi:
        raise InvalidDomain(f"empty integer range [{lo}, {hi}]")
    (raw,) = struct.unpack("<I", source.stream(kind).read(INT_WIDTH))
    return lo + raw % (hi - lo + 1)


def choose_bool(source: SplitParameterSequence, kind: ChoiceKind) -> bool:
    return bool(source.stream(kind).read(BOOL_WIDTH)[0] & 1)


def choose_from(source: SplitParameterSequence, kind: ChoiceKind, domain: Sequence[T]) -> T:
    if len(domain) == 0:
        raise InvalidDomain("cannot choose from an empty domain")
    return domain[choose_int(source, kind, 0, len(domain) - 1)]


def signature_of(structural: bytes) -> StructuralSignature:
    return StructuralSignature(xxhash.xxh3_128_digest(structural, seed=SIGNATURE_SEED))


def structural_signature(source: SplitParameterSequence) -> StructuralSignature:
    """Digest of the structural octets consumed so far."""
    return signature_of(source.structural.consumed())


def reset(source: SplitParameterSequence) -> None:
    source.reset()
