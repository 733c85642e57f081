#!/usr/bin/env python3
"""Run all ten acceptance suites at the default configuration and print a table."""
import argparse
import time

from ethergeom.checks import CRITERIA, SUITES, RunConfig


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--criterion", action="append", choices=CRITERIA)
    args = parser.parse_args()
    cfg = RunConfig(seed=args.seed)
    ok_all = True
    for c in args.criterion or CRITERIA:
        t0 = time.perf_counter()
        records = SUITES[c](cfg)
        failed = [r for r in records if not r.passed]
        ok_all &= not failed
        print(f"{'PASS' if not failed else 'FAIL'} {c:<4} {len(records) - len(failed):>3}/{len(records):<3} "
              f"{time.perf_counter() - t0:6.1f}s")
        for r in sorted(failed, key=lambda r: -r.severity)[:4]:
            print(f"     {r.check_id}: {r.residual:.3e} {r.comparison} {r.threshold:.1e}")
    return 0 if ok_all else 1


if __name__ == "__main__":
    raise SystemExit(main())
