import struct

import pytest

from divfuzz.choices import ChoiceKind, SplitParameterSequence


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow statistical campaigns")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow suite; pass --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def encode(choices, strict=True) -> SplitParameterSequence:
    """Build split sequences from typed choices.

    ints go to the value stream as u32 LE, bools to the structural stream as
    one octet, mirroring how the generators consume them.
    """
    s, v = bytearray(), bytearray()
    for c in choices:
        if isinstance(c, bool):
            s.append(int(c))
        else:
            v += struct.pack("<I", c)
    return SplitParameterSequence(bytes(s), bytes(v), strict=strict)


def u32(*xs) -> bytes:
    return b"".join(struct.pack("<I", x) for x in xs)


S = ChoiceKind.STRUCTURAL
V = ChoiceKind.VALUE
