import pytest
from hypothesis import given, strategies as st

from divfuzz import paramfile


@given(st.binary(max_size=300), st.binary(max_size=300))
def test_round_trip_is_bit_exact(s, v):
    blob = paramfile.dumps(s, v)
    assert paramfile.loads(blob) == (s, v)
    assert paramfile.dumps(*paramfile.loads(blob)) == blob


def test_header_layout():
    blob = paramfile.dumps(b"ab", b"xyz")
    assert blob == b"BDVF" + b"\x01\x00" + b"\x02\x00\x00\x00" + b"\x03\x00\x00\x00" + b"abxyz"


@pytest.mark.parametrize(
    "blob",
    [
        b"",
        b"BDV",
        b"XXXX\x01\x00\x00\x00\x00\x00\x00\x00\x00\x00",
        b"BDVF\x02\x00\x00\x00\x00\x00\x00\x00\x00\x00",
        paramfile.dumps(b"abc", b"de")[:-1],
        paramfile.dumps(b"abc", b"de") + b"!",
    ],
)
def test_malformed(blob):
    with pytest.raises(paramfile.MalformedParameterFile):
        paramfile.loads(blob)


def test_file_round_trip(tmp_path):
    paramfile.write(tmp_path / "p", b"\x00\xff", b"")
    assert paramfile.read(tmp_path / "p") == (b"\x00\xff", b"")
