"""Repeated wall-clock campaigns per mode; prints the final Hill numbers.

    python scripts/compare_modes.py --sut bst --generator tree --seconds 60 --reps 10

Per-run final rows go to --csv (default: stdout only). Campaigns run one after
another so modes share the machine fairly.
"""
import argparse
import csv
import statistics
import sys

from divfuzz.campaign import MODES, CampaignConfig, run_campaign
from divfuzz.diversity import fmt


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sut", default="bst")
    ap.add_argument("--generator", default="tree")
    ap.add_argument("--modes", default="bediv-structure,quickcheck")
    ap.add_argument("--seconds", type=float, default=60)
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    modes = args.modes.split(",")
    for mode in modes:
        if mode not in MODES:
            ap.error(f"unknown mode {mode!r}")

    rows = []
    for rep in range(args.reps):
        for mode in modes:
            report = run_campaign(CampaignConfig(mode=mode, sut=args.sut, generator=args.generator,
                                                 seed=rep, seconds=args.seconds))
            f = report.final
            rows.append((mode, rep, report.total_runs, report.diverse_valid_runs, f.b0, f.b1, f.b2))
            print(f"{mode} rep={rep} runs={report.total_runs} b0={fmt(f.b0)} b1={fmt(f.b1)} b2={fmt(f.b2)}",
                  file=sys.stderr)

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("mode", "rep", "total_runs", "diverse_valid_runs", "b0", "b1", "b2"))
            w.writerows(rows)
    print("mode,median_b0,median_b1,median_b2")
    for mode in modes:
        mine = [r for r in rows if r[0] == mode]
        print(",".join([mode] + [fmt(statistics.median(r[i] for r in mine)) for i in (4, 5, 6)]))


if __name__ == "__main__":
    main()
