#!/usr/bin/env python3
"""Run the full desk-scale verification suite and print a verdict table.

Usage: python scripts/run_acceptance_suite.py [--samples N] [--seed S] [--json out.json]
"""
import argparse
import json
import time

from pftau.hub import acceptance_experiments, run_suite


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=100000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--json", default=None, help="also write verdicts to this file")
    args = ap.parse_args()

    start = time.perf_counter()
    verdicts = run_suite(acceptance_experiments(samples=args.samples, seed=args.seed))
    elapsed = time.perf_counter() - start

    width = max(len(v.name) for v in verdicts)
    for v in verdicts:
        mark = "PASS" if v.passed else "FAIL"
        note = f"  !! {v.error}" if v.error else ""
        print(f"{mark}  {v.name:<{width}}  margin={v.margin:<12.3e} tol={v.tolerance:.1e}{note}")
    n_pass = sum(v.passed for v in verdicts)
    print(f"\n{n_pass}/{len(verdicts)} passed in {elapsed:.1f}s")

    if args.json:
        with open(args.json, "w") as fh:
            json.dump([dict(v.row()) for v in verdicts], fh, indent=2, default=str)
    return 0 if n_pass == len(verdicts) else 1


if __name__ == "__main__":
    raise SystemExit(main())
