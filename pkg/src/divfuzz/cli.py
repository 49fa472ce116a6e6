"""Command-line entry point: ``divfuzz {fuzz,replay,diversity,compare}``.

Results go to stdout as CSV; diagnostics go to stderr. Exit codes: 0 success,
1 a replayed input did not reproduce its recorded class (or the campaign was
aborted), 2 bad configuration or malformed input files.
"""
from __future__ import annotations

import argparse
import csv
import os
import re
import sys
from pathlib import Path

from divfuzz import paramfile
from divfuzz.campaign import MODES, STATS_COLUMNS, Campaign, CampaignConfig
from divfuzz.choices import SequenceExhausted
from divfuzz.diversity import EmptyAbundance, MalformedLine, abundance_from_trace_log, behavioral_diversity, fmt
from divfuzz.generators import GENERATORS, regenerate
from divfuzz.harness import ValidityResult, run
from divfuzz.mutation import MutationConfig
from divfuzz.suts import SUTS

_DURATION = re.compile(r"^(\d+)([smh]?)$")
_RECORDED = re.compile(r"^id_\d+_(valid|invalid|failure)$")


class ConfigError(Exception):
    pass


def parse_duration(text: str) -> int:
    m = _DURATION.match(text.strip())
    if not m:
        raise ConfigError(f"bad duration {text!r}; use e.g. 30, 30s, 5m or 1h")
    return int(m.group(1)) * {"": 1, "s": 1, "m": 60, "h": 3600}[m.group(2)]


def _fail(msg: str, code: int = 2) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _generator_options(args) -> dict:
    return {"max_depth": args.max_depth} if args.max_depth is not None else {}


def _lookup(args):
    if args.sut not in SUTS:
        raise ConfigError(f"unknown SUT {args.sut!r}; choose from {', '.join(sorted(SUTS))}")
    if args.generator not in GENERATORS:
        raise ConfigError(f"unknown generator {args.generator!r}; choose from {', '.join(sorted(GENERATORS))}")
    return SUTS[args.sut], GENERATORS[args.generator]


def cmd_fuzz(args) -> int:
    try:
        _lookup(args)
        if (args.budget is None) == (args.runs is None):
            raise ConfigError("give exactly one of --budget or --runs")
        seconds = parse_duration(args.budget) if args.budget is not None else None
        seed = args.seed
        if seed is None:
            env = os.environ.get("BEDIV_SEED")
            try:
                seed = int(env) if env is not None else 0
            except ValueError:
                raise ConfigError(f"BEDIV_SEED is not an integer: {env!r}") from None
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            probe_file = out / ".write-test"
            probe_file.write_bytes(b"")
            probe_file.unlink()
        except OSError as exc:
            raise ConfigError(f"--out {out} is not writable: {exc}") from None
        config = CampaignConfig(
            mode=args.mode,
            generator=args.generator,
            sut=args.sut,
            seed=seed,
            runs=args.runs,
            seconds=seconds,
            stats_interval=args.stats_interval,
            mutation=MutationConfig(epsilon=args.epsilon),
            out_dir=out,
            trace_log=args.trace_log,
            seed_corpus=args.seed_corpus,
            diversity_valid_only=args.valid_only,
            generator_options=_generator_options(args),
        )
    except (ConfigError, ValueError) as exc:
        return _fail(str(exc))
    report = Campaign(config).run()
    print(report.summary())
    return 1 if report.aborted else 0


def _replay_files(target: Path) -> list[Path]:
    if target.is_dir():
        return sorted(p for p in target.iterdir() if p.is_file() and not p.name.startswith("."))
    if target.is_file():
        return [target]
    raise ConfigError(f"--in {target} does not exist")


def cmd_replay(args) -> int:
    try:
        sut, generator = _lookup(args)
        files = _replay_files(Path(args.input))
        loaded = []
        for path in files:
            try:
                loaded.append((path, paramfile.read(path)))
            except paramfile.MalformedParameterFile as exc:
                raise ConfigError(f"{path}: {exc}") from None
    except ConfigError as exc:
        return _fail(str(exc))
    options = _generator_options(args)
    mismatches = 0
    for path, params in loaded:
        m = _RECORDED.match(path.name)
        expected = m.group(1) if m else ""
        try:
            inp = regenerate(generator, params, **options)
        except SequenceExhausted:
            verdict, fault = "exhausted", ""
        else:
            record = run(sut, inp)
            verdict, fault = record.result.value, record.fault or ""
        ok = not expected or expected == verdict
        mismatches += not ok
        print(f"{path.name},{verdict},{expected},{'ok' if ok else 'MISMATCH'},{fault}")
    return 1 if mismatches else 0


def cmd_diversity(args) -> int:
    try:
        qs = [float(q) for q in args.q.split(",") if q.strip()]
    except ValueError:
        return _fail(f"bad --q list {args.q!r}")
    if not qs or any(q < 0 for q in qs):
        return _fail("--q needs non-negative orders")
    if not Path(args.log).is_file():
        return _fail(f"trace log {args.log} not found")
    try:
        av = abundance_from_trace_log(args.log, valid_only=args.valid_only)
        values = [behavioral_diversity(av, q) for q in qs]
    except MalformedLine as exc:
        return _fail(f"{args.log}: {exc}")
    except EmptyAbundance:
        return _fail("trace log has no (valid) traces with covered branches")
    print(",".join(fmt(v) for v in values))
    return 0


COMPARED = ("b0", "b1", "b2", "diverse_valid_runs")


def _final_row(path: str) -> tuple[list[str], dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        header = reader.fieldnames or []
    if not rows:
        raise ConfigError(f"{path} has no data rows")
    return header, rows[-1]


def cmd_compare(args) -> int:
    try:
        header_a, a = _final_row(args.a)
        header_b, b = _final_row(args.b)
        if header_a != header_b:
            raise ConfigError("stats files have different columns")
        missing = [c for c in COMPARED if c not in header_a]
        if missing:
            raise ConfigError(f"stats files lack columns {missing}")
        deltas = [float(b[c]) - float(a[c]) for c in COMPARED]
    except OSError as exc:
        return _fail(str(exc))
    except (ConfigError, ValueError) as exc:
        return _fail(str(exc))
    print(",".join(COMPARED))
    print(",".join(fmt(d + 0.0) for d in deltas))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="divfuzz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    fuzz = sub.add_parser("fuzz", help="run a fuzzing campaign")
    fuzz.add_argument("--mode", choices=MODES, default="bediv-structure")
    fuzz.add_argument("--sut", required=True)
    fuzz.add_argument("--generator", required=True)
    fuzz.add_argument("--budget", help="wall-clock budget: seconds, or N with suffix s/m/h")
    fuzz.add_argument("--runs", type=int, help="run-count budget (deterministic)")
    fuzz.add_argument("--seed", type=int, help="RNG seed (falls back to $BEDIV_SEED, then 0)")
    fuzz.add_argument("--out", required=True)
    fuzz.add_argument("--epsilon", type=float, default=0.2)
    fuzz.add_argument("--stats-interval", type=float, help="runs (with --runs) or seconds between stats rows")
    fuzz.add_argument("--trace-log", help="write one trace line per run to this file")
    fuzz.add_argument("--seed-corpus", help="directory of parameter files to seed the queue")
    fuzz.add_argument("--valid-only", action="store_true", help="abundances from valid traces only")
    fuzz.add_argument("--max-depth", type=int)
    fuzz.set_defaults(func=cmd_fuzz)

    replay = sub.add_parser("replay", help="re-run saved parameter files")
    replay.add_argument("--in", dest="input", required=True)
    replay.add_argument("--sut", required=True)
    replay.add_argument("--generator", required=True)
    replay.add_argument("--max-depth", type=int)
    replay.set_defaults(func=cmd_replay)

    div = sub.add_parser("diversity", help="Hill numbers from a trace log")
    div.add_argument("--log", required=True)
    div.add_argument("--q", default="0,1,2")
    div.add_argument("--valid-only", action="store_true")
    div.set_defaults(func=cmd_diversity)

    cmp_ = sub.add_parser("compare", help="final-row deltas (b - a) of two stats.csv files")
    cmp_.add_argument("--a", required=True)
    cmp_.add_argument("--b", required=True)
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
