"""Hill numbers and behavioral diversity over branch abundances."""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

Q1_WINDOW = 1e-9


class EmptyAbundance(ValueError):
    pass


class NonPositiveCount(ValueError):
    pass


class MalformedLine(ValueError):
    def __init__(self, line_no: int, reason: str = ""):
        super().__init__(f"malformed trace-log line {line_no}" + (f": {reason}" if reason else ""))
        self.line_no = line_no


def hill_number(abundances, q: float) -> float:
    """Effective number of species of order ``q``.

    Counts are normalised to relative abundances first. Near q = 1 the
    closed form exp(Shannon entropy) is used.
    """
    c = np.asarray(abundances, dtype=np.float64)
    if c.size == 0:
        raise EmptyAbundance("need at least one abundance")
    if np.any(c <= 0):
        raise NonPositiveCount("abundances must be positive")
    if q < 0:
        raise ValueError("q must be non-negative")
    if q == 0:
        return float(c.size)
    p = c / c.sum()
    log_p = np.log(p)
    if abs(q - 1.0) <= Q1_WINDOW:
        return math.exp(-float(np.dot(p, log_p)))
    if abs(q - 1.0) < 0.5:
        # sum(p**q) - 1 == sum(p * expm1((q-1) log p)), which stays accurate as q -> 1.
        excess = float(np.dot(p, np.expm1((q - 1.0) * log_p)))
        return math.exp(math.log1p(excess) / (1.0 - q))
    scaled = q * log_p
    top = float(scaled.max())
    log_sum = top + math.log(float(np.exp(scaled - top).sum()))
    return math.exp(log_sum / (1.0 - q))


class AbundanceVector:
    """Map from branch id to the number of unique traces that covered it."""

    def __init__(self, entries: Mapping[int, int] | None = None):
        self.entries = Counter()
        for branch, count in (entries or {}).items():
            if count < 1:
                raise NonPositiveCount(f"branch {branch} has count {count}")
            self.entries[branch] = count

    def add_trace(self, branches: Iterable[int]) -> None:
        for b in branches:
            self.entries[b] += 1

    @property
    def total(self) -> int:
        return sum(self.entries.values())

    @property
    def richness(self) -> int:
        return len(self.entries)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, AbundanceVector) and self.entries == other.entries

    def __repr__(self):
        return f"AbundanceVector({dict(sorted(self.entries.items()))})"


def behavioral_diversity(av: AbundanceVector, q: float) -> float:
    if not av.entries:
        raise EmptyAbundance("no covered branches")
    if q == 0:
        return float(av.richness)
    return hill_number(list(av.entries.values()), q)


@dataclass(frozen=True)
class DiversityProfile:
    elapsed_ms: int
    b0: float
    b1: float
    b2: float


def profile_of(av: AbundanceVector, elapsed_ms: int = 0) -> DiversityProfile:
    if not av.entries:
        return DiversityProfile(elapsed_ms, 0.0, 0.0, 0.0)
    return DiversityProfile(
        elapsed_ms,
        behavioral_diversity(av, 0),
        behavioral_diversity(av, 1),
        behavioral_diversity(av, 2),
    )


def parse_trace_line(line: str, line_no: int) -> tuple[int, str, str, list[int]]:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 4:
        raise MalformedLine(line_no, f"expected 4 tab-separated fields, got {len(parts)}")
    run_index, result, trace_id, branches = parts
    if result not in ("valid", "invalid", "failure"):
        raise MalformedLine(line_no, f"unknown result {result!r}")
    try:
        idx = int(run_index)
        int(trace_id, 16)
        ids = [int(b) for b in branches.split(",")] if branches else []
    except ValueError as exc:
        raise MalformedLine(line_no, str(exc)) from None
    return idx, result, trace_id.lower(), ids


def abundance_from_trace_log(log, valid_only: bool = False) -> AbundanceVector:
    """Build abundances from trace-log lines (a path or an iterable of lines).

    Lines are deduplicated by trace id, first occurrence winning.
    """
    if isinstance(log, (str, Path)):
        with open(log, encoding="utf-8") as fh:
            return abundance_from_trace_log(fh.readlines(), valid_only)
    av = AbundanceVector()
    seen = set()
    for line_no, line in enumerate(log, start=1):
        if not line.strip():
            continue
        _, result, trace_id, branches = parse_trace_line(line, line_no)
        if trace_id in seen:
            continue
        seen.add(trace_id)
        if valid_only and result != "valid":
            continue
        av.add_trace(branches)
    return av


def profile_series(source) -> list[DiversityProfile]:
    """Diversity profiles from a stats.csv path, or from rows / objects that
    carry elapsed_ms, b0, b1 and b2."""
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    else:
        rows = list(source)
    out = []
    for row in rows:
        if isinstance(row, DiversityProfile):
            out.append(row)
        elif isinstance(row, Mapping):
            out.append(DiversityProfile(int(row["elapsed_ms"]), float(row["b0"]), float(row["b1"]), float(row["b2"])))
        else:
            out.append(DiversityProfile(int(row.elapsed_ms), float(row.b0), float(row.b1), float(row.b2)))
    return out


def write_diversity_csv(path, profiles: Iterable[DiversityProfile]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["elapsed_ms", "b0", "b1", "b2"])
        for p in profiles:
            w.writerow([p.elapsed_ms, fmt(p.b0), fmt(p.b1), fmt(p.b2)])


def fmt(x: float) -> str:
    return format(x, ".10g")
