"""Train greedy parsers over a grid of exploration probabilities and
report training and held-out F1 per strategy.

Synthetic trees use disjoint vocabularies per sentence, so held-out
scores mostly reflect how well the learned action preferences generalize
past the lexical features; expect them to sit far below training F1.
"""

import argparse
import sys

sys.path.insert(0, "src")

from oracle_lab.evaluation import prf
from oracle_lab.model import ExplorationPolicy, parse, train
from oracle_lab.transitions import STRATEGIES
from oracle_lab.trees import synthetic_corpus


def f1_on(model, corpus):
    return prf(corpus, [parse(model, t.tokens) for t in corpus]).f1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--train-trees", type=int, default=50)
    ap.add_argument("--held-trees", type=int, default=25)
    ap.add_argument("--labels", default="X,Y,Z")
    ap.add_argument("--epochs", type=int, default=10)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument(
        "--grid", default="0,0.05,0.1,0.2,0.5",
        help="comma-separated exploration probabilities",
    )
    args = ap.parse_args()

    labels = args.labels.split(",")
    corpus = synthetic_corpus(args.train_trees, labels, seed=args.seed)
    held = synthetic_corpus(args.held_trees, labels, seed=args.seed + 1)
    grid = [float(x) for x in args.grid.split(",")]

    print(f"{'strategy':<10} {'p':>5} {'train F1':>9} {'held F1':>8}")
    for strategy in STRATEGIES:
        for p in grid:
            model = train(
                corpus, strategy,
                ExplorationPolicy(p_explore=p, seed=args.seed),
                epochs=args.epochs, seed=args.seed,
            )
            print(
                f"{strategy:<10} {p:>5.2f} {f1_on(model, corpus):>9.1f}"
                f" {f1_on(model, held):>8.1f}",
                flush=True,
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
