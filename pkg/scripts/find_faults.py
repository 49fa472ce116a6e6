"""How many runs bediv-structure needs to hit every seeded expr_eval fault.

    python scripts/find_faults.py --reps 10 --max-runs 1000000
"""
import argparse

from divfuzz.campaign import CampaignConfig, run_campaign
from divfuzz.suts import EXPR_FAULTS, fault_name


def found(fault_sites):
    return {fault_name(f) for f in fault_sites}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mode", default="bediv-structure")
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--max-runs", type=int, default=1_000_000)
    args = ap.parse_args(argv)
    wanted = set(EXPR_FAULTS)
    hits = 0
    for rep in range(args.reps):
        first_hit = {}

        def stop(state):
            for name in found(state.fault_sites) - first_hit.keys():
                first_hit[name] = state.total_runs
            return first_hit.keys() >= wanted

        cfg = CampaignConfig(mode=args.mode, sut="expr", generator="expr", seed=rep, runs=args.max_runs,
                             stats_interval=args.max_runs)
        report = run_campaign(cfg, should_stop=stop)
        hits += first_hit.keys() >= wanted
        detail = " ".join(f"{k}={first_hit.get(k, '-')}" for k in EXPR_FAULTS)
        print(f"rep={rep} runs={report.total_runs} {detail}")
    print(f"all faults found in {hits}/{args.reps} reps")


if __name__ == "__main__":
    main()
