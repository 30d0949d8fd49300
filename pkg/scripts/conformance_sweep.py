"""Run the formula-vs-search conformance sweeps at adjustable scale.

The exhaustive block enumerates every reachable state class of every tree
up to --census-tokens; the walk block spot-checks random walks on larger
random trees.  All blocks must print PASS for a healthy oracle.
"""

import argparse
import sys
import time

sys.path.insert(0, "src")

from oracle_lab.transitions import STRATEGIES
from oracle_lab.trees import enumerate_trees, random_tree
from oracle_lab.verify import SearchBounds, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--census-tokens", type=int, default=3)
    ap.add_argument("--census-labels", default="X,Y")
    ap.add_argument("--walk-trees", type=int, default=200)
    ap.add_argument("--walk-tokens", type=int, default=6)
    ap.add_argument("--walk-labels", default="X,Y,Z")
    ap.add_argument("--walks", type=int, default=5)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    census_labels = args.census_labels.split(",")
    walk_labels = args.walk_labels.split(",")
    ok = True
    t0 = time.perf_counter()

    census_bounds = SearchBounds(label_alphabet=tuple(sorted(census_labels)))
    for n in range(1, args.census_tokens + 1):
        trees = list(enumerate_trees(n, census_labels))
        for strategy in STRATEGIES:
            r = sweep(trees, strategy, census_bounds, walk_policy="exhaustive")
            ok = ok and r.passed
            print(f"census n={n} {strategy} ({len(trees)} trees): {r.summary()}", flush=True)

    trees = [
        random_tree(1 + k % args.walk_tokens, walk_labels, seed=args.seed + k)
        for k in range(args.walk_trees)
    ]
    walk_bounds = SearchBounds(max_tokens=args.walk_tokens)
    for strategy in STRATEGIES:
        r = sweep(
            trees, strategy, walk_bounds,
            walk_policy="random-walk", seed=args.seed, walks=args.walks,
        )
        ok = ok and r.passed
        print(f"walks {strategy} ({len(trees)} trees): {r.summary()}", flush=True)

    print(f"total {time.perf_counter() - t0:.1f}s")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
