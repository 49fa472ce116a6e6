"""Mutation of split parameter sequences and the adaptive choice between
structure-changing and structure-preserving mutations."""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass

from divfuzz.choices import ParameterSequence, SplitParameterSequence

MAX_SPAN = 8
MEAN_SITES = 4


class MutationKind(enum.Enum):
    STRUCTURAL = "s"
    VALUE = "v"


@dataclass
class MutationConfig:
    epsilon: float = 0.2
    max_mutation_sites: int = 16
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.max_mutation_sites < 1:
            raise ValueError("max_mutation_sites must be positive")


@dataclass
class MutationScoreboard:
    n_s: int = 0
    u_s: int = 0
    n_v: int = 0
    u_v: int = 0

    def as_row(self) -> tuple[int, int, int, int]:
        return self.n_s, self.u_s, self.n_v, self.u_v


def _num_sites(rng: random.Random, cap: int) -> int:
    # Geometric on {1, 2, ...} with mean MEAN_SITES.
    k = 1
    while k < cap and rng.random() >= 1.0 / MEAN_SITES:
        k += 1
    return k


def havoc(data: bytes, rng: random.Random, max_sites: int = 16, overwrite_only: bool = False) -> bytes:
    """Apply a geometric number of span overwrites, inserts and deletes.

    The result always differs from ``data``.
    """
    out = bytearray(data)
    ops = ("overwrite",) if overwrite_only else ("overwrite", "insert", "delete")
    for _ in range(_num_sites(rng, max_sites)):
        op = rng.choice(ops)
        span = rng.randint(1, MAX_SPAN)
        if op == "insert":
            at = rng.randint(0, len(out))
            out[at:at] = rng.randbytes(span)
        elif not out:
            continue
        elif op == "overwrite":
            at = rng.randrange(len(out))
            span = min(span, len(out) - at)
            out[at:at + span] = rng.randbytes(span)
        else:
            at = rng.randrange(len(out))
            del out[at:at + span]
    if out == data:
        if out:
            out[rng.randrange(len(out))] ^= rng.randint(1, 255)
        else:
            out.append(rng.randrange(256))
    return bytes(out)


def mutate_sequence(seq: ParameterSequence | bytes, rng: random.Random, max_sites: int = 16) -> ParameterSequence:
    data = seq if isinstance(seq, bytes) else bytes(seq.data)
    return ParameterSequence(havoc(data, rng, max_sites))


def mutate_structural(input: SplitParameterSequence, rng: random.Random, max_sites: int = 16) -> SplitParameterSequence:
    s, v = input.params()
    return SplitParameterSequence(havoc(s, rng, max_sites), v)


def mutate_value(input: SplitParameterSequence, rng: random.Random, max_sites: int = 16) -> SplitParameterSequence:
    # Overwrite-only: value choices keep their offsets, so the structure is untouched.
    s, v = input.params()
    return SplitParameterSequence(s, havoc(v, rng, max_sites, overwrite_only=True))


def calculate_scores(scoreboard: MutationScoreboard) -> tuple[float, float]:
    r_s = scoreboard.u_s / scoreboard.n_s if scoreboard.n_s else 0.0
    r_v = scoreboard.u_v / scoreboard.n_v if scoreboard.n_v else 0.0
    return r_s, r_v


def select_kind(scoreboard: MutationScoreboard, epsilon: float, rng: random.Random) -> MutationKind:
    if rng.random() >= epsilon:
        r_s, r_v = calculate_scores(scoreboard)
        if r_s != r_v:
            return MutationKind.STRUCTURAL if r_s > r_v else MutationKind.VALUE
    return MutationKind.STRUCTURAL if rng.random() < 0.5 else MutationKind.VALUE


def mutate_kind(input: SplitParameterSequence, kind: MutationKind, rng: random.Random, max_sites: int = 16) -> SplitParameterSequence:
    if kind is MutationKind.STRUCTURAL:
        return mutate_structural(input, rng, max_sites)
    return mutate_value(input, rng, max_sites)


def mutate_adaptive(
    input: SplitParameterSequence,
    scoreboard: MutationScoreboard,
    config: MutationConfig,
    rng: random.Random,
) -> tuple[SplitParameterSequence, MutationKind]:
    """Explore with probability epsilon, otherwise mutate the side with the
    higher unique-trace rate; ties fall back to a coin flip."""
    kind = select_kind(scoreboard, config.epsilon, rng)
    return mutate_kind(input, kind, rng, config.max_mutation_sites), kind


def record_outcome(scoreboard: MutationScoreboard, kind: MutationKind, unique_trace: bool) -> None:
    if kind is MutationKind.STRUCTURAL:
        scoreboard.n_s += 1
        scoreboard.u_s += bool(unique_trace)
    else:
        scoreboard.n_v += 1
        scoreboard.u_v += bool(unique_trace)
