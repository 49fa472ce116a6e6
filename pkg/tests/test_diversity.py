import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from divfuzz.diversity import (
    AbundanceVector,
    DiversityProfile,
    EmptyAbundance,
    MalformedLine,
    NonPositiveCount,
    abundance_from_trace_log,
    behavioral_diversity,
    hill_number,
    profile_series,
    write_diversity_csv,
)

counts_st = st.lists(st.integers(1, 10_000), min_size=1, max_size=200)


@pytest.mark.parametrize("q", [0, 0.5, 1, 2, 3.7])
def test_equal_counts_give_richness(q):
    assert hill_number([1, 1, 1, 1], q) == pytest.approx(4.0, rel=1e-12)


def test_inverse_simpson_example():
    assert hill_number([3, 1], 2) == pytest.approx(1 / (0.75**2 + 0.25**2), rel=1e-12)
    assert hill_number([3, 1], 2) == pytest.approx(1.6, rel=1e-12)


def test_shannon_example():
    expected = math.exp(-(0.75 * math.log(0.75) + 0.25 * math.log(0.25)))
    assert hill_number([3, 1], 1) == pytest.approx(expected, rel=1e-12)
    assert hill_number([3, 1], 1) == pytest.approx(1.754765, abs=1e-6)


def test_errors():
    with pytest.raises(EmptyAbundance):
        hill_number([], 1)
    with pytest.raises(NonPositiveCount):
        hill_number([1, 0], 1)
    with pytest.raises(NonPositiveCount):
        AbundanceVector({1: 0})
    with pytest.raises(EmptyAbundance):
        behavioral_diversity(AbundanceVector(), 1)


def test_b0_is_branch_count():
    av = AbundanceVector({b: (b % 5) + 1 for b in range(37)})
    assert behavioral_diversity(av, 0) == 37.0


def test_skewed_vector_q2():
    av = AbundanceVector(dict(enumerate([10, 10, 1, 1, 1, 1, 1])))
    assert behavioral_diversity(av, 2) == pytest.approx(625 / 205, rel=1e-12)


@given(counts_st, st.floats(0, 5), st.floats(0, 5))
def test_monotone_in_q(counts, q1, q2):
    lo, hi = sorted((q1, q2))
    assert hill_number(counts, lo) >= hill_number(counts, hi) * (1 - 1e-12)


@given(counts_st, st.floats(0, 5))
def test_range(counts, q):
    d = hill_number(counts, q)
    assert 1 - 1e-12 <= d <= len(counts) * (1 + 1e-12)


@given(counts_st, st.floats(0, 5))
def test_replication_invariance(counts, q):
    assert hill_number([2 * c for c in counts], q) == pytest.approx(hill_number(counts, q), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 1000), min_size=1, max_size=10_000))
def test_limit_continuity(counts):
    d1 = hill_number(counts, 1)
    assert abs(hill_number(counts, 1 + 1e-6) - d1) < 1e-4
    assert abs(hill_number(counts, 1 - 1e-6) - d1) < 1e-4


def test_abundance_from_log_dedupes_and_counts():
    lines = [
        "0\tvalid\t00000000000000aa\t1,2\n",
        "1\tvalid\t00000000000000aa\t1,2\n",
        "2\tinvalid\t00000000000000bb\t2,3\n",
    ]
    assert abundance_from_trace_log(lines).entries == {1: 1, 2: 2, 3: 1}
    assert abundance_from_trace_log(lines, valid_only=True).entries == {1: 1, 2: 1}


@pytest.mark.parametrize(
    "bad",
    ["2\tvalid\tzz\t1\n", "2\tvalid\t0a\n", "2\tweird\t0a\t1\n", "x\tvalid\t0a\t1\n", "2\tvalid\t0a\t1,b\n"],
)
def test_malformed_line_number(bad):
    lines = ["0\tvalid\t01\t1\n", "1\tvalid\t02\t2\n", bad]
    with pytest.raises(MalformedLine) as info:
        abundance_from_trace_log(lines)
    assert info.value.line_no == 3


def test_profile_series_and_csv(tmp_path):
    rows = [
        {"elapsed_ms": "1", "b0": "3", "b1": "3", "b2": "3"},
        {"elapsed_ms": "2", "b0": "5", "b1": "4.5", "b2": "4"},
    ]
    series = profile_series(rows)
    assert [p.b0 for p in series] == [3.0, 5.0]
    write_diversity_csv(tmp_path / "d.csv", series)
    assert profile_series(tmp_path / "d.csv") == series
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "elapsed_ms,b0,b1,b2"


def test_profile_series_equal_feed():
    av = AbundanceVector()
    series = []
    for t in range(1, 6):
        av.add_trace(range(t))
        av.add_trace(range(t, 2 * t))
        # make everything equally abundant again
        av = AbundanceVector({b: 1 for b in av.entries})
        series.append(DiversityProfile(t, *(behavioral_diversity(av, q) for q in (0, 1, 2))))
    for p in profile_series(series):
        assert p.b0 == pytest.approx(p.b1) == pytest.approx(p.b2)
    assert [p.b0 for p in series] == sorted(p.b0 for p in series)
