"""Brute-force minimum-loss search and conformance sweeps.

This module never consults the closed-form loss while searching; it only
plays the transition systems forward, so agreement between the two is
evidence, not circularity.
"""

from __future__ import annotations

import heapq
import math
import random
import time
from collections import defaultdict, deque
from dataclasses import dataclass, field, replace

from .oracle import GoldReference, loss
from .transitions import (
    TOP_DOWN,
    Completed,
    OpenNT,
    _construct,
    apply,
    fingerprint,
    initial_config,
    is_terminal,
    legal_transitions,
)
from .trees import gold_sequence

_POP_LIMIT = 5_000_000

WALK_POLICIES = ("gold-prefix", "random-walk", "exhaustive")


@dataclass
class SearchBounds:
    max_tokens: int = 6
    max_consecutive_nt: int = 3
    max_steps: int | None = None
    label_alphabet: tuple | None = None

    def __post_init__(self):
        if self.max_steps is None:
            # enough for any derivation plus a junk detour or two
            self.max_steps = 10 * self.max_tokens + 20
        if self.max_tokens < 1 or self.max_consecutive_nt < 1 or self.max_steps < 1:
            raise ValueError("bounds must be positive")


@dataclass
class ConformanceReport:
    configs_checked: int = 0
    mismatches: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self):
        return not self.mismatches

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"{status}: {self.configs_checked} configurations checked,"
            f" {len(self.mismatches)} mismatches, {self.elapsed:.2f}s"
        ]
        for fp, formula, brute in self.mismatches[:20]:
            lines.append(f"  mismatch: formula={formula} brute={brute} at {fp}")
        if len(self.mismatches) > 20:
            lines.append(f"  ... and {len(self.mismatches) - 20} more")
        return "\n".join(lines)


def default_alphabet(gold: GoldReference):
    """Gold labels plus one distractor that the tree never uses."""
    labels = set(gold.labels)
    for extra in "DEFGHJ":
        if extra not in labels:
            return tuple(sorted(labels)) + (extra,)
    raise ValueError("could not pick a distractor label")


def _future_bound(config, rem):
    """Admissible lower bound on future loss, from stack mechanics alone.

    Every open non-terminal reduces exactly once, and the left end of the
    constituent it will produce is already forced: for top-down it is the
    left end of whatever sits directly above it (for an open directly
    above, of the constituent that open will produce, recursively), or
    the current buffer position for the topmost element; for in-order it
    is the left end of the completed item directly below, which stays put
    until the open reduces.  So opens and missing gold items can be
    matched on (label, left end) before any search: surplus opens must
    close as junk.  Top-down constituents opened later can only start at
    or after the current buffer position, so there a missing item left of
    the buffer with no matching open can also never be built (in-order
    wraps can reuse old left ends, so no such term is added).  The
    subtler interactions (right-end windows, nesting, the NT cap,
    ordering) are left to the search.
    """
    i = config.i
    opens = {}
    if config.strategy == TOP_DOWN:
        cur = i
        for e in reversed(config.stack):
            if type(e) is OpenNT:
                k = (e.label, cur)
                opens[k] = opens.get(k, 0) + 1
            else:
                cur = e.l
    else:
        stack = config.stack
        for p, e in enumerate(stack):
            if type(e) is OpenNT:
                k = (e.label, stack[p - 1].l)
                opens[k] = opens.get(k, 0) + 1
    avail = {}
    for (lab, l, _), cnt in rem.items():
        if cnt and l <= i:
            k = (lab, l)
            avail[k] = avail.get(k, 0) + cnt
    h = 0
    for k, m in opens.items():
        a = avail.get(k, 0)
        if m > a:
            h += m - a
    if config.strategy == TOP_DOWN:
        for k, a in avail.items():
            if k[1] < i:
                m = opens.get(k, 0)
                if a > m:
                    h += a - m
    return h


def brute_force_loss(
    config,
    gold: GoldReference,
    bounds: SearchBounds,
    cache=None,
    *,
    lower_bound=True,
):
    """Minimum Hamming loss over all terminal configurations reachable from
    config, found by best-first search over parser states.  States are
    keyed by the class of _class_key: stack shape with junk labels
    collapsed, buffer position and the multiset of gold constituents
    still missing; wrong constituents already built are a sunk cost added
    at the end.  The search itself never consults the closed-form loss;
    with lower_bound it orders states by the mechanical bound of
    _future_bound, which only prunes, never decides.

    Raises RuntimeError if no terminal configuration is reachable, which
    would mean the legality guards admit dead states.
    """
    if config.n > bounds.max_tokens:
        raise ValueError(
            f"sentence length {config.n} exceeds bounds.max_tokens={bounds.max_tokens}"
        )
    alphabet = bounds.label_alphabet or default_alphabet(gold)
    rem0 = dict(gold.count)
    sunk0 = 0
    for c in config.built:
        k = c.key
        if rem0.get(k, 0):
            rem0[k] -= 1
            if not rem0[k]:
                del rem0[k]
        else:
            sunk0 += 1

    start_key = _class_key(config, rem0)
    if cache is not None and start_key in cache:
        return sunk0 + cache[start_key]

    bound = _future_bound if lower_bound else (lambda c, rem: 0)
    # what was built so far never constrains the future, so drop it from
    # the searched states to keep them small
    start = replace(config, built=(), history=())
    dist = {start_key: 0}
    tie = 0
    heap = [(bound(start, rem0), 0, 0, start_key, start, rem0)]
    best = math.inf
    pops = 0
    while heap:
        f, _, d, key, c, rem = heapq.heappop(heap)
        if f >= best:
            break
        if d > dist.get(key, math.inf):
            continue
        pops += 1
        if pops > _POP_LIMIT:
            raise RuntimeError("state budget exhausted before finding a terminal")
        if cache is not None and key != start_key and key in cache:
            cand = d + cache[key]
            if cand < best:
                best = cand
            continue
        if is_terminal(c):
            cand = d + sum(rem.values())
            if cand < best:
                best = cand
            continue
        # reversed so ties go to finish/reduce before opening yet another
        # nonterminal
        for t in reversed(legal_transitions(c, alphabet)):
            c2 = _construct(c, t)
            w = 0
            rem2 = rem
            if t.kind == "reduce":
                made = c2.stack[-1]
                made = (made.symbol, made.l, made.r)
                if rem.get(made, 0):
                    rem2 = dict(rem)
                    rem2[made] -= 1
                    if not rem2[made]:
                        del rem2[made]
                else:
                    w = 1
            k2 = _class_key(c2, rem2)
            nd = d + w
            if nd < dist.get(k2, math.inf):
                dist[k2] = nd
                tie += 1
                heapq.heappush(
                    heap, (nd + bound(c2, rem2), tie, nd, k2, c2, rem2)
                )
    if math.isinf(best):
        raise RuntimeError(
            "search exhausted without reaching a terminal configuration;"
            " the legality guards are suspect"
        )
    if cache is not None:
        cache[start_key] = best
    return sunk0 + best


def check_config(config, gold, bounds, cache=None) -> bool:
    return loss(config, gold).total == brute_force_loss(config, gold, bounds, cache)


def _gold_prefix_configs(tree, strategy, bounds):
    c = initial_config(tree.tokens, strategy, bounds.max_consecutive_nt)
    out = [c]
    for t in gold_sequence(tree, strategy):
        c = apply(c, t)
        out.append(c)
    return out


def _random_walk_configs(tree, strategy, bounds, alphabet, seed, tree_idx, walks):
    """Seeded random walks from the initial configuration.  The move kind
    is drawn uniformly and a label drawn within it, so a label-rich
    alphabet does not drown the walk in consecutive junk opens."""
    out = []
    for w in range(walks):
        rng = random.Random(f"{seed}|walk|{tree_idx}|{strategy}|{w}")
        c = initial_config(tree.tokens, strategy, bounds.max_consecutive_nt)
        out.append(c)
        steps = 0
        while not is_terminal(c) and steps < bounds.max_steps:
            moves = legal_transitions(c, alphabet)
            kinds = sorted({t.kind for t in moves})
            pick = rng.choice(kinds)
            c = apply(c, rng.choice([t for t in moves if t.kind == pick]))
            out.append(c)
            steps += 1
    return out


def _class_key(config, rem):
    """Equivalence class of a state for the exhaustive sweep.

    Future behavior never depends on the label of a completed stack item
    (the guards and apply only read its span, and for in-order its word
    flag), and an open non-terminal whose label no longer occurs in the
    missing multiset can only ever produce junk, whatever the label is.
    Junk labels therefore collapse, which keeps the class count
    manageable.  Top-down additionally never consults the word flag (a
    bare word needs an open non-terminal below it, so it can never sit
    alone on the stack), so there a shifted word and a completed
    constituent with the same span collapse as well.

    rem must not contain zero counts.
    """
    word_kind = "c" if config.strategy == TOP_DOWN else "w"
    rem_labels = {k[0] for k in rem}
    items = []
    for e in config.stack:
        if type(e) is Completed:
            items.append((word_kind if e.is_word else "c", e.l, e.r))
        else:
            lab = e.label if e.label in rem_labels else "*"
            items.append(("o", lab, e.index))
    return (
        tuple(items),
        config.i,
        config.finished,
        config.nt_run,
        frozenset(rem.items()),
    )


def _exhaustive_graph(tree, gold, strategy, bounds, alphabet):
    """All reachable parser states, one representative per class of states
    with identical future behavior (see _class_key); class members differ
    beyond that only in junk already built, a sunk constant.

    Returns (representatives, sunk junk per representative, weighted
    edges, missed-gold count per terminal state).  Edge weights follow
    the same rule as the per-config search: a reduce that completes a
    constituent outside the missing multiset costs 1, everything else
    costs 0.  Item keys, the missing multiset and the sunk count are
    maintained incrementally along edges; _class_key recomputed from
    scratch agrees (the suite asserts this).
    """
    start = initial_config(tree.tokens, strategy, bounds.max_consecutive_nt)
    word_kind = "c" if strategy == TOP_DOWN else "w"
    rem0 = dict(gold.count)
    labels0 = frozenset(k[0] for k in rem0)
    key0 = ((), 0, False, 0, frozenset(rem0.items()))
    reps = {key0: start}
    sunk_of = {key0: 0}
    edges = []
    terminal_pen = {}
    queue = deque([(key0, start, (), rem0, key0[4], labels0, 0)])
    while queue:
        key, c, items, rem, rkey, rlabels, sunk = queue.popleft()
        if is_terminal(c):
            terminal_pen[key] = sum(rem.values())
            continue
        for t in legal_transitions(c, alphabet):
            c2 = _construct(c, t)
            kind = t.kind
            w = 0
            rem2, rkey2, rlabels2 = rem, rkey, rlabels
            if kind == "shift":
                items2 = items + ((word_kind, c.i, c.i + 1),)
            elif kind == "nt":
                lab = t.label if t.label in rlabels else "*"
                items2 = items + (("o", lab, c.i),)
            elif kind == "finish":
                items2 = items
            else:
                top = c2.stack[-1]
                made = (top.symbol, top.l, top.r)
                cnt = rem.get(made, 0)
                items2 = items[: len(c2.stack) - 1] + (("c", top.l, top.r),)
                if cnt:
                    rem2 = dict(rem)
                    if cnt == 1:
                        del rem2[made]
                    else:
                        rem2[made] = cnt - 1
                    rkey2 = frozenset(rem2.items())
                    if cnt == 1 and all(k[0] != made[0] for k in rem2):
                        rlabels2 = rlabels - {made[0]}
                        items2 = tuple(
                            it if it[0] != "o" or it[1] in rlabels2
                            else ("o", "*", it[2])
                            for it in items2
                        )
                else:
                    w = 1
            k2 = (items2, c2.i, c2.finished, c2.nt_run, rkey2)
            edges.append((key, k2, w))
            if k2 not in reps:
                reps[k2] = c2
                sunk_of[k2] = sunk + w
                queue.append((k2, c2, items2, rem2, rkey2, rlabels2, sunk + w))
    return reps, sunk_of, edges, terminal_pen


def _batch_future(edges, terminal_pen):
    """Minimum future cost (junk reduces plus missed gold) for every state
    at once: one backward Dijkstra over the reversed edges, seeded with the
    terminal states' missed-gold counts."""
    back = defaultdict(list)
    for a, b, w in edges:
        back[b].append((a, w))
    dist = dict(terminal_pen)
    tie = 0
    heap = []
    for k, d in terminal_pen.items():
        heap.append((d, tie, k))
        tie += 1
    heapq.heapify(heap)
    while heap:
        d, _, k = heapq.heappop(heap)
        if d > dist.get(k, math.inf):
            continue
        for a, w in back[k]:
            nd = d + w
            if nd < dist.get(a, math.inf):
                dist[a] = nd
                tie += 1
                heapq.heappush(heap, (nd, tie, a))
    return dist


def sweep(
    corpus,
    strategy,
    bounds: SearchBounds | None = None,
    walk_policy: str = "random-walk",
    seed: int = 0,
    walks: int = 5,
) -> ConformanceReport:
    """Check formula loss against brute force on every visited configuration."""
    if walk_policy not in WALK_POLICIES:
        raise ValueError(f"unknown policy {walk_policy!r}")
    bounds = bounds or SearchBounds()
    report = ConformanceReport()
    t0 = time.perf_counter()
    for idx, tree in enumerate(corpus):
        gold = GoldReference.from_tree(tree, strategy)
        alphabet = bounds.label_alphabet or default_alphabet(gold)
        local = SearchBounds(
            max_tokens=bounds.max_tokens,
            max_consecutive_nt=bounds.max_consecutive_nt,
            max_steps=bounds.max_steps,
            label_alphabet=alphabet,
        )
        if walk_policy == "exhaustive":
            reps, sunk_of, edges, term = _exhaustive_graph(
                tree, gold, strategy, local, alphabet
            )
            future = _batch_future(edges, term)
            for key, c in reps.items():
                if key not in future:
                    raise RuntimeError(
                        "no terminal configuration reachable from"
                        f" {fingerprint(c)}; the legality guards are suspect"
                    )
                formula = loss(c, gold).total
                brute = sunk_of[key] + future[key]
                report.configs_checked += 1
                if formula != brute:
                    report.mismatches.append((str(fingerprint(c)), formula, brute))
            continue
        if walk_policy == "gold-prefix":
            configs = _gold_prefix_configs(tree, strategy, local)
        else:
            configs = _random_walk_configs(
                tree, strategy, local, alphabet, seed, idx, walks
            )
        cache = {}
        # deepest states first so shallower searches can reuse their answers
        for c in reversed(configs):
            formula = loss(c, gold).total
            brute = brute_force_loss(c, gold, local, cache)
            report.configs_checked += 1
            if formula != brute:
                report.mismatches.append((str(fingerprint(c)), formula, brute))
    report.elapsed = time.perf_counter() - t0
    return report
