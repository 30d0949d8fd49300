"""Linear model over symbolic features, trained with averaged online
updates against the oracle, plus greedy decoding.

Stands in for the neural scorer in the experiments: small, deterministic,
and it exercises the oracle through exactly the same interface.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from .oracle import GoldReference, loss, optimal_transitions
from .transitions import (
    Completed,
    DEFAULT_NT_CAP,
    apply,
    initial_config,
    is_terminal,
    legal_transitions,
    parse_transition,
    transition_order_key,
)
from .trees import (
    ConstituentTree,
    Internal,
    Leaf,
    constituent_set,
    gold_sequence,
    max_nt_run,
)

FeatureVector = Counter

MODEL_FORMAT = "oracle-lab-model v1"

TRAIN_MODES = ("auto", "static", "dynamic")


def _step_cap(n, nt_cap):
    return 8 * n + 2 * nt_cap


def features(config) -> FeatureVector:
    """Sparse symbolic features of a configuration.

    Top 3 stack items (symbol, open/closed, width so far), next 2 buffer
    words, last 2 transitions, open-NT count, and a few conjunctions.
    """
    parts = {}
    stack = config.stack
    for k in range(3):
        if k < len(stack):
            item = stack[-1 - k]
            if isinstance(item, Completed):
                parts[f"s{k}"] = f"C|{item.symbol}|{item.r - item.l}"
            else:
                parts[f"s{k}"] = f"O|{item.label}|{config.i - item.index}"
        else:
            parts[f"s{k}"] = "_"
    for k in range(2):
        j = config.i + k
        parts[f"b{k}"] = config.tokens[j] if j < config.n else "_"
    hist = config.history
    for k in range(2):
        parts[f"h{k}"] = str(hist[-1 - k]) if k < len(hist) else "_"
    feats = FeatureVector()
    feats["bias"] += 1
    for name, value in parts.items():
        feats[f"{name}={value}"] += 1
    feats[f"open={len(config.open_nts())}"] += 1
    feats[f"s0^b0={parts['s0']}^{parts['b0']}"] += 1
    feats[f"s0^s1={parts['s0']}^{parts['s1']}"] += 1
    feats[f"h0^s0={parts['h0']}^{parts['s0']}"] += 1
    return feats


@dataclass(frozen=True)
class ExplorationPolicy:
    p_explore: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_explore <= 1.0:
            raise ValueError(f"p_explore must be in [0, 1], got {self.p_explore}")


def _score(weights, feats, t):
    return sum(w * weights.get((f, t), 0.0) for f, w in feats.items())


def _pick(moves, weights, feats):
    scores = {t: _score(weights, feats, t) for t in moves}
    best = min(moves, key=lambda t: (-scores[t], transition_order_key(t)))
    return best, scores


@dataclass
class Model:
    weights: dict
    label_alphabet: tuple
    strategy: str
    averaged: bool = True

    def score(self, config, transition):
        return _score(self.weights, features(config), transition)

    def predict(self, config):
        moves = legal_transitions(config, self.label_alphabet)
        best, _ = _pick(moves, self.weights, features(config))
        return best

    def save(self, path):
        rows = sorted(
            ((f, str(t), w) for (f, t), w in self.weights.items() if w),
            key=lambda row: (row[0], row[1]),
        )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{MODEL_FORMAT} {self.strategy}\n")
            fh.write("labels: " + " ".join(self.label_alphabet) + "\n")
            for f, t, w in rows:
                fh.write(f"{f}\t{t}\t{w!r}\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if not header.startswith(MODEL_FORMAT + " "):
                raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
            strategy = header[len(MODEL_FORMAT) + 1 :]
            labels_line = fh.readline().rstrip("\n")
            if not labels_line.startswith("labels: "):
                raise ValueError(f"{path}: missing labels header")
            labels = tuple(labels_line[len("labels: ") :].split())
            weights = {}
            for lineno, line in enumerate(fh, start=3):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    feat, tname, wtext = line.split("\t")
                    weights[(feat, parse_transition(tname))] = float(wtext)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad weight row") from exc
        return cls(weights=weights, label_alphabet=labels, strategy=strategy)


@dataclass
class _Learner:
    """Perceptron state during training; finalize() averages."""

    w: dict = field(default_factory=dict)
    u: dict = field(default_factory=dict)
    t: int = 0

    def tick(self):
        self.t += 1

    def update(self, feats, toward, away):
        for f, c in feats.items():
            for t, sign in ((toward, c), (away, -c)):
                self.w[(f, t)] = self.w.get((f, t), 0.0) + sign
                self.u[(f, t)] = self.u.get((f, t), 0.0) + self.t * sign

    def averaged(self):
        if not self.t:
            return dict(self.w)
        out = {}
        for k, wv in self.w.items():
            av = wv - self.u.get(k, 0.0) / self.t
            if av:
                out[k] = av
        return out


def train(
    corpus,
    strategy,
    policy: ExplorationPolicy,
    epochs: int = 10,
    seed: int = 0,
    mode: str = "auto",
    audit=None,
) -> Model:
    """Train a greedy parser on gold trees.

    Static mode follows the gold sequence; dynamic mode consults the oracle
    at every visited configuration, updates toward its best-scoring optimal
    transition, and explores the model's own mistake with probability
    p_explore.  mode="auto" picks static iff p_explore == 0.  audit, if
    given, is called with (sentence, step, config, target, loss_delta) at
    every update opportunity.
    """
    if not corpus:
        raise ValueError("empty training corpus")
    if mode not in TRAIN_MODES:
        raise ValueError(f"mode must be one of {TRAIN_MODES}")
    if mode == "auto":
        mode = "static" if policy.p_explore == 0 else "dynamic"
    nt_cap = DEFAULT_NT_CAP
    for idx, tree in enumerate(corpus):
        run = max_nt_run(gold_sequence(tree, strategy))
        if run > nt_cap:
            raise ValueError(
                f"tree {idx}: unary chain needs {run} consecutive NT"
                f" transitions, over the cap of {nt_cap}"
            )
    alphabet = tuple(sorted({c.label for t in corpus for c in constituent_set(t)}))
    learner = _Learner()
    coin = random.Random(f"{policy.seed}|explore")
    golds = [GoldReference.from_tree(t, strategy) for t in corpus]
    for epoch in range(epochs):
        order = list(range(len(corpus)))
        random.Random(f"{seed}|shuffle|{epoch}").shuffle(order)
        for s_idx in order:
            tree = corpus[s_idx]
            if mode == "static":
                _static_pass(tree, strategy, alphabet, learner, nt_cap)
            else:
                _dynamic_pass(
                    tree,
                    golds[s_idx],
                    strategy,
                    alphabet,
                    learner,
                    policy,
                    coin,
                    nt_cap,
                    s_idx,
                    audit,
                )
    return Model(
        weights=learner.averaged(),
        label_alphabet=alphabet,
        strategy=strategy,
        averaged=True,
    )


def _static_pass(tree, strategy, alphabet, learner, nt_cap):
    c = initial_config(tree.tokens, strategy, nt_cap)
    for g_t in gold_sequence(tree, strategy):
        moves = legal_transitions(c, alphabet)
        feats = features(c)
        guess, _ = _pick(moves, learner.w, feats)
        learner.tick()
        if guess != g_t:
            learner.update(feats, g_t, guess)
        c = apply(c, g_t)


def _dynamic_pass(
    tree, gold, strategy, alphabet, learner, policy, coin, nt_cap, s_idx, audit
):
    c = initial_config(tree.tokens, strategy, nt_cap)
    cap = _step_cap(c.n, nt_cap)
    step = 0
    while not is_terminal(c) and step < cap:
        moves = legal_transitions(c, alphabet)
        feats = features(c)
        guess, scores = _pick(moves, learner.w, feats)
        optimal = optimal_transitions(c, gold, alphabet)
        target = min(optimal, key=lambda t: (-scores[t], transition_order_key(t)))
        learner.tick()
        if guess not in optimal:
            learner.update(feats, target, guess)
        if audit is not None:
            delta = loss(apply(c, target), gold).total - loss(c, gold).total
            audit(s_idx, step, c, target, delta)
        if guess not in optimal and coin.random() < policy.p_explore:
            c = apply(c, guess)
        else:
            c = apply(c, target)
        step += 1


def parse(model: Model, tokens) -> ConstituentTree:
    tree, _ = parse_with_info(model, tokens)
    return tree


def parse_with_info(model: Model, tokens):
    """Greedy decode.  Returns (tree, info); if the step cap is hit before
    a terminal configuration, remaining material is wrapped under a root
    label and info["fallback"] is set."""
    if not tokens:
        raise ValueError("cannot parse an empty sentence")
    c = initial_config(tuple(tokens), model.strategy)
    cap = _step_cap(c.n, c.max_consecutive_nt)
    steps = 0
    while not is_terminal(c) and steps < cap:
        c = apply(c, model.predict(c))
        steps += 1
    info = {"steps": steps, "fallback": False, "wrap_label": None}
    if is_terminal(c):
        return ConstituentTree.from_root(c.stack[0].node), info
    wrap = model.label_alphabet[0]
    children = [item.node for item in c.stack if isinstance(item, Completed)]
    children += [Leaf(w) for w in c.tokens[c.i :]]
    info["fallback"] = True
    info["wrap_label"] = wrap
    return ConstituentTree.from_root(Internal(wrap, tuple(children))), info
