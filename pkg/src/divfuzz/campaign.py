"""The fuzzing loop and its bookkeeping.

Modes:

* ``bediv-structure``: adaptive split mutations; save valid inputs that add
  coverage *and* have a structural signature not seen in the queue.
* ``bediv-simple``: adaptive split mutations; save valid inputs that add coverage.
* ``zest``: unguided havoc on either stream; save any non-failing input that
  adds coverage.
* ``quickcheck``: fresh random inputs every run, no feedback at all.
"""
from __future__ import annotations

import csv
import logging
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from divfuzz import paramfile
from divfuzz.choices import SplitParameterSequence, StructuralSignature, signature_of
from divfuzz.diversity import AbundanceVector, DiversityProfile, fmt, profile_of
from divfuzz.generators import GeneratedInput, GeneratorSpec, get_generator
from divfuzz.harness import BenchmarkSut, ExecutionRecord, TraceLogWriter, ValidityResult, run
from divfuzz.mutation import (
    MutationConfig,
    MutationKind,
    MutationScoreboard,
    havoc,
    mutate_adaptive,
    record_outcome,
)
from divfuzz.suts import get_sut

log = logging.getLogger(__name__)

MODES = ("bediv-structure", "bediv-simple", "zest", "quickcheck")
STATS_COLUMNS = (
    "elapsed_ms", "total_runs", "valid_runs", "diverse_valid_runs", "num_branches", "num_traces",
    "b0", "b1", "b2", "n_s", "u_s", "n_v", "u_v",
)
SEED_LENGTH = 16
BASE_CHILDREN = 50
MIN_CHILDREN, MAX_CHILDREN = 10, 100


@dataclass
class CampaignConfig:
    mode: str = "bediv-structure"
    generator: str = "tree"
    sut: str = "bst"
    seed: int = 0
    runs: int | None = None
    seconds: float | None = None
    # Runs between stats rows in run-count mode, seconds otherwise.
    stats_interval: float | None = None
    mutation: MutationConfig = field(default_factory=MutationConfig)
    out_dir: str | Path | None = None
    trace_log: str | Path | None = None
    seed_corpus: str | Path | None = None
    diversity_valid_only: bool = False
    generator_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from {MODES}")
        if (self.runs is None) == (self.seconds is None):
            raise ValueError("give exactly one budget: runs or seconds")
        if self.runs is not None and self.runs <= 0:
            raise ValueError("run budget must be positive")
        if self.seconds is not None and self.seconds <= 0:
            raise ValueError("time budget must be positive")
        if self.stats_interval is not None and self.stats_interval <= 0:
            raise ValueError("stats interval must be positive")

    @property
    def run_count_mode(self) -> bool:
        return self.runs is not None


@dataclass
class QueueEntry:
    params: tuple[bytes, bytes]
    novelty: int = 0
    result: ValidityResult | None = None
    signature: StructuralSignature | None = None

    def source(self) -> SplitParameterSequence:
        return SplitParameterSequence.from_params(self.params)


@dataclass
class CampaignState:
    queue: list[QueueEntry] = field(default_factory=list)
    failures: list[tuple[bytes, bytes]] = field(default_factory=list)
    coverage: set = field(default_factory=set)
    traces: set = field(default_factory=set)
    structures: set = field(default_factory=set)
    scoreboard: MutationScoreboard = field(default_factory=MutationScoreboard)
    abundance: AbundanceVector = field(default_factory=AbundanceVector)
    total_runs: int = 0
    valid_runs: int = 0
    diverse_valid_runs: int = 0
    fault_sites: dict = field(default_factory=dict)
    elapsed_ms: int = 0


@dataclass
class CampaignReport:
    mode: str
    total_runs: int
    valid_runs: int
    diverse_valid_runs: int
    num_branches: int
    num_traces: int
    queue_size: int
    structures: int
    failures: list
    fault_sites: dict
    scoreboard: MutationScoreboard
    profiles: list[DiversityProfile]
    out_dir: Path | None = None
    aborted: str | None = None

    @property
    def final(self) -> DiversityProfile:
        return self.profiles[-1]

    def summary(self) -> str:
        f = self.final
        lines = [
            f"mode={self.mode} runs={self.total_runs} valid={self.valid_runs} "
            f"diverse_valid={self.diverse_valid_runs}",
            f"branches={self.num_branches} traces={self.num_traces} queue={self.queue_size} "
            f"structures={self.structures} failures={len(self.failures)}",
            f"B(0)={fmt(f.b0)} B(1)={fmt(f.b1)} B(2)={fmt(f.b2)}",
        ]
        for site, count in sorted(self.fault_sites.items()):
            lines.append(f"fault {site} x{count}")
        if self.aborted:
            lines.append(f"aborted: {self.aborted}")
        return "\n".join(lines)


def num_children(parent: QueueEntry, state: CampaignState) -> int:
    mean = sum(e.novelty for e in state.queue) / len(state.queue) if state.queue else 0.0
    n = BASE_CHILDREN * (1 + parent.novelty / max(1.0, mean))
    return int(min(MAX_CHILDREN, max(MIN_CHILDREN, round(n))))


def should_save(record: ExecutionRecord, input: GeneratedInput | StructuralSignature, state: CampaignState, mode: str) -> bool:
    signature = input.signature if isinstance(input, GeneratedInput) else input
    new_coverage = not record.covered <= state.coverage
    valid = record.result is ValidityResult.VALID
    if mode == "bediv-structure":
        return valid and new_coverage and signature not in state.structures
    if mode == "bediv-simple":
        return valid and new_coverage
    if mode == "zest":
        return new_coverage and record.result is not ValidityResult.FAILURE
    if mode == "quickcheck":
        return False
    raise ValueError(f"unknown mode {mode!r}")


def update_coverage_stats(
    record: ExecutionRecord,
    state: CampaignState,
    kind: MutationKind | None = None,
    valid_only: bool = False,
) -> bool:
    """Fold one run into C, T and the abundances; returns whether the trace was new.

    When ``kind`` is given the scoreboard is credited for it.
    """
    state.coverage |= record.covered
    valid = record.result is ValidityResult.VALID
    unique = record.trace_id not in state.traces
    if unique:
        state.traces.add(record.trace_id)
        if valid or not valid_only:
            state.abundance.add_trace(record.covered)
        if valid:
            state.diverse_valid_runs += 1
    if valid:
        state.valid_runs += 1
    if kind is not None:
        record_outcome(state.scoreboard, kind, unique)
    return unique


def seed_queue(state: CampaignState, rng: random.Random) -> None:
    if state.queue:
        raise ValueError("queue already seeded")
    state.queue.append(QueueEntry((rng.randbytes(SEED_LENGTH), rng.randbytes(SEED_LENGTH))))


class CorpusWriter:
    def __init__(self, out_dir: Path):
        self.out = Path(out_dir)
        for sub in ("queue", "failures", "corpus"):
            (self.out / sub).mkdir(parents=True, exist_ok=True)
        self.counter = 0

    def save(self, where: str, params: tuple[bytes, bytes], concrete: bytes, result: ValidityResult) -> str:
        self.counter += 1
        name = f"id_{self.counter:06d}_{result.value}"
        paramfile.write(self.out / where / name, *params)
        (self.out / "corpus" / name).write_bytes(concrete)
        return name


class Campaign:
    """One fuzzing campaign. ``sut`` and ``generator`` override the names in
    the config, which lets tests plug in scripted programs."""

    def __init__(self, config: CampaignConfig, sut: BenchmarkSut | None = None, generator: GeneratorSpec | None = None):
        self.config = config
        self.sut = sut or get_sut(config.sut)
        self.generator = generator or get_generator(config.generator)
        self.state = CampaignState()
        mseed = config.mutation.seed if config.mutation.seed is not None else config.seed
        self.rng = random.Random(mseed)
        self.extend_rngs = (random.Random(f"{config.seed}:extend-s"), random.Random(f"{config.seed}:extend-v"))
        self.on_run: Callable[[tuple[bytes, bytes], ExecutionRecord], None] | None = None
        self.profiles: list[DiversityProfile] = []
        self._writer = CorpusWriter(config.out_dir) if config.out_dir is not None else None
        self._stats_fh = None
        self._stats_csv = None
        self._trace_log = None
        self._seen_fault_sites: set = set()
        self._start = 0.0
        self._last_stats = 0.0
        self._stop: Callable[[CampaignState], bool] | None = None

    # -- budget and stats ----------------------------------------------------------

    def _elapsed_ms(self) -> int:
        if self.config.run_count_mode:
            # Logical clock: one tick per run keeps run-count campaigns reproducible.
            return self.state.total_runs
        return int((time.monotonic() - self._start) * 1000)

    def _done(self) -> bool:
        if self._stop is not None and self._stop(self.state):
            return True
        if self.config.run_count_mode:
            return self.state.total_runs >= self.config.runs
        return time.monotonic() - self._start >= self.config.seconds

    def _stats_due(self) -> bool:
        interval = self.config.stats_interval
        if self.config.run_count_mode:
            interval = interval or max(1, self.config.runs // 100)
            return self.state.total_runs % int(interval) == 0
        interval = interval or 1.0
        now = time.monotonic()
        if now - self._last_stats >= interval:
            self._last_stats = now
            return True
        return False

    def emit_stats(self) -> DiversityProfile:
        st = self.state
        st.elapsed_ms = self._elapsed_ms()
        profile = profile_of(st.abundance, st.elapsed_ms)
        if self.profiles and self.profiles[-1].elapsed_ms == profile.elapsed_ms and self.profiles[-1] == profile:
            return profile
        self.profiles.append(profile)
        if self._stats_csv is not None:
            self._stats_csv.writerow([
                st.elapsed_ms, st.total_runs, st.valid_runs, st.diverse_valid_runs,
                len(st.coverage), len(st.traces),
                fmt(profile.b0), fmt(profile.b1), fmt(profile.b2),
                *st.scoreboard.as_row(),
            ])
        return profile

    # -- one execution --------------------------------------------------------------

    def generate(self, source: SplitParameterSequence) -> GeneratedInput:
        source.structural.rng, source.value.rng = self.extend_rngs
        source.structural.strict = source.value.strict = False
        return self.generator(source, **self.config.generator_options)

    def execute(self, source: SplitParameterSequence, kind: MutationKind | None) -> tuple[GeneratedInput, ExecutionRecord]:
        st = self.state
        inp = self.generate(source)
        record = run(self.sut, inp)
        st.total_runs += 1
        params = inp.source_snapshot.params()
        if self._trace_log is not None:
            self._trace_log.write(st.total_runs - 1, record)
        if self.on_run is not None:
            self.on_run(params, record)
        if record.result is ValidityResult.FAILURE:
            st.failures.append(params)
            st.fault_sites[record.fault] = st.fault_sites.get(record.fault, 0) + 1
            if kind is not None:
                record_outcome(st.scoreboard, kind, False)
            if self._writer is not None and record.fault not in self._seen_fault_sites:
                self._writer.save("failures", params, inp.concrete, record.result)
            self._seen_fault_sites.add(record.fault)
        else:
            if should_save(record, inp, st, self.config.mode):
                entry = QueueEntry(params, len(record.covered - st.coverage), record.result, inp.signature)
                st.queue.append(entry)
                if self.config.mode == "bediv-structure":
                    st.structures.add(inp.signature)
                if self._writer is not None:
                    self._writer.save("queue", params, inp.concrete, record.result)
            update_coverage_stats(record, st, kind, self.config.diversity_valid_only)
        if self._stats_due():
            self.emit_stats()
        return inp, record

    # -- main loops -----------------------------------------------------------------

    def _mutate(self, parent: QueueEntry) -> tuple[SplitParameterSequence, MutationKind]:
        mcfg = self.config.mutation
        if self.config.mode == "zest":
            kind = MutationKind.STRUCTURAL if self.rng.random() < 0.5 else MutationKind.VALUE
            s, v = parent.params
            if kind is MutationKind.STRUCTURAL:
                s = havoc(s, self.rng, mcfg.max_mutation_sites)
            else:
                v = havoc(v, self.rng, mcfg.max_mutation_sites)
            return SplitParameterSequence(s, v), kind
        return mutate_adaptive(parent.source(), self.state.scoreboard, mcfg, self.rng)

    def _loop_guided(self) -> None:
        st = self.state
        first = True
        while first or not self._done():
            i = 0
            while i < len(st.queue):
                parent = st.queue[i]
                for _ in range(num_children(parent, st)):
                    child, kind = self._mutate(parent)
                    self.execute(child, kind)
                    first = False
                    if self._done():
                        return
                i += 1

    def _loop_random(self) -> None:
        first = True
        while first or not self._done():
            self.execute(SplitParameterSequence(), None)
            first = False

    def _load_seed_corpus(self) -> None:
        for path in sorted(Path(self.config.seed_corpus).iterdir()):
            if path.is_file():
                params = paramfile.read(path)
                self.state.queue.append(QueueEntry(params, signature=signature_of(params[0])))

    def run(self, should_stop: Callable[[CampaignState], bool] | None = None) -> CampaignReport:
        """Fuzz until the budget expires or ``should_stop(state)`` is true."""
        cfg = self.config
        self._stop = should_stop
        self._start = self._last_stats = time.monotonic()
        aborted = None
        try:
            if cfg.out_dir is not None:
                Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
                self._stats_fh = open(Path(cfg.out_dir) / "stats.csv", "w", newline="", encoding="utf-8")
                self._stats_csv = csv.writer(self._stats_fh, lineterminator="\n")
                self._stats_csv.writerow(STATS_COLUMNS)
            if cfg.trace_log is not None:
                self._trace_log = TraceLogWriter(cfg.trace_log)
            if cfg.mode == "quickcheck":
                self._loop_random()
            else:
                if cfg.seed_corpus is not None:
                    self._load_seed_corpus()
                if not self.state.queue:
                    seed_queue(self.state, self.rng)
                self._loop_guided()
            self.emit_stats()
        except OSError as exc:
            aborted = f"{type(exc).__name__}: {exc}"
            log.error("campaign aborted: %s", aborted)
            if not self.profiles:
                self.profiles.append(profile_of(self.state.abundance, self._elapsed_ms()))
        finally:
            if self._stats_fh is not None:
                self._stats_fh.close()
            if self._trace_log is not None:
                self._trace_log.close()
        return self.report(aborted)

    def report(self, aborted: str | None = None) -> CampaignReport:
        st = self.state
        return CampaignReport(
            mode=self.config.mode,
            total_runs=st.total_runs,
            valid_runs=st.valid_runs,
            diverse_valid_runs=st.diverse_valid_runs,
            num_branches=len(st.coverage),
            num_traces=len(st.traces),
            queue_size=len(st.queue),
            structures=len(st.structures),
            failures=list(st.failures),
            fault_sites=dict(st.fault_sites),
            scoreboard=st.scoreboard,
            profiles=list(self.profiles) or [profile_of(st.abundance, st.elapsed_ms)],
            out_dir=Path(self.config.out_dir) if self.config.out_dir is not None else None,
            aborted=aborted,
        )


def run_campaign(config: CampaignConfig, should_stop=None) -> CampaignReport:
    return Campaign(config).run(should_stop)
