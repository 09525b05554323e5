"""Run every recipe under recipes/ and print one line per acceptance criterion.

Usage: python3 scripts/run_recipes.py [--dir recipes] [--threads N] [--verbose]
"""
import argparse
import sys

from latticespec.recipes import RECIPE_DIR, run_all


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dir", default=RECIPE_DIR)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--verbose", action="store_true", help="print every check")
    args = ap.parse_args()
    results = run_all(args.dir, args.threads)
    for res in results:
        print(res.summary())
        if args.verbose or not res.passed:
            for chk in res.checks:
                print("    " + chk.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} criteria pass")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
