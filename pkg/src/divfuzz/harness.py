"""Branch-coverage collection and execution of a SUT on one generated input."""
from __future__ import annotations

import enum
import struct
import threading
import traceback
from dataclasses import dataclass, field
from typing import Callable, Iterable

import xxhash

from divfuzz.generators import GeneratedInput

TRACE_SEED = 0xB0C4E7


class ValidityResult(enum.Enum):
    VALID = "valid"
    INVALID = "invalid"
    FAILURE = "failure"


class ProbeOutsideRun(RuntimeError):
    pass


# Upper bounds of AFL's hit-count classes: 1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128+.
_BUCKET_LIMITS = (1, 2, 3, 7, 15, 31, 127)


def bucket(hits: int) -> int:
    if hits <= 0:
        return 0
    for i, limit in enumerate(_BUCKET_LIMITS, start=1):
        if hits <= limit:
            return i
    return len(_BUCKET_LIMITS) + 1


def trace_digest(hits: dict[int, int]) -> int:
    """64-bit identity of a run: (branch, bucket) pairs in first-hit order."""
    h = xxhash.xxh3_64(seed=TRACE_SEED)
    for branch, count in hits.items():
        h.update(struct.pack("<IB", branch, bucket(count)))
    return h.intdigest()


@dataclass(frozen=True)
class ExecutionRecord:
    result: ValidityResult
    covered: frozenset
    trace_id: int
    fault: str | None = None
    hits: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_hits(cls, result, hits: dict[int, int], fault=None):
        return cls(result, frozenset(hits), trace_digest(hits), fault, dict(hits))


class _RunContext(threading.local):
    hits: dict | None = None


_ctx = _RunContext()


def probe(branch: int) -> None:
    hits = _ctx.hits
    if hits is None:
        raise ProbeOutsideRun(f"probe({branch}) called with no active run")
    hits[branch] = hits.get(branch, 0) + 1


def record_probes(fn: Callable[[], object]) -> tuple[object, dict[int, int]]:
    """Call ``fn`` under a fresh counter table; returns its result and the hits."""
    hits: dict[int, int] = {}
    _ctx.hits = hits
    try:
        return fn(), hits
    finally:
        _ctx.hits = None


def fault_site(exc: BaseException) -> str:
    frames = traceback.extract_tb(exc.__traceback__)
    where = f"{frames[-1].name}:{frames[-1].lineno}" if frames else "?"
    return f"{type(exc).__name__}@{where}"


@dataclass(frozen=True)
class BenchmarkSut:
    """A probed program under test.

    ``check`` receives the decoded input text and returns ``True`` for a valid
    input and ``False`` for an invalid one; anything it raises is a failure.
    """

    name: str
    generator: str
    check: Callable[[str], bool]
    probe_sites: frozenset = frozenset()
    faults: tuple[str, ...] = ()


def run(sut: BenchmarkSut, input: GeneratedInput | bytes | str) -> ExecutionRecord:
    if isinstance(input, GeneratedInput):
        text = input.text
    elif isinstance(input, bytes):
        text = input.decode("ascii", errors="replace")
    else:
        text = input
    hits: dict[int, int] = {}
    _ctx.hits = hits
    try:
        ok = sut.check(text)
    except Exception as exc:
        return ExecutionRecord.from_hits(ValidityResult.FAILURE, hits, fault_site(exc))
    finally:
        _ctx.hits = None
    return ExecutionRecord.from_hits(ValidityResult.VALID if ok else ValidityResult.INVALID, hits)


# -- trace log -----------------------------------------------------------------------


def format_trace_line(run_index: int, record: ExecutionRecord) -> str:
    branches = ",".join(str(b) for b in sorted(record.covered))
    return f"{run_index}\t{record.result.value}\t{record.trace_id:016x}\t{branches}\n"


class TraceLogWriter:
    def __init__(self, path):
        self._fh = open(path, "w", encoding="utf-8", newline="\n")

    def write(self, run_index: int, record: ExecutionRecord) -> None:
        self._fh.write(format_trace_line(run_index, record))

    def close(self):
        self._fh.close()


def write_trace_log(path, records: Iterable[ExecutionRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, rec in enumerate(records):
            fh.write(format_trace_line(i, rec))
