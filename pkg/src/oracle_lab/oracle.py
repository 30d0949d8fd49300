"""Dynamic oracles: constituent reachability, the decomposed loss, and the
set of loss-preserving transitions.

The loss of a configuration is the minimum Hamming distance, over all
terminal configurations reachable from it, between the built constituent
multiset and the gold one.  It is computed in closed form per strategy and
reported as four addends: gold constituents that can no longer be built,
wrong constituents already built, open non-terminals that cannot match any
buildable gold span, and open non-terminals that are individually fine but
stacked in an order that forfeits one gold constituent each.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass

from .transitions import (
    IN_ORDER,
    TOP_DOWN,
    Completed,
    Configuration,
    Constituent,
    OpenNT,
    apply,
    is_terminal,
    legal_transitions,
)
from .trees import constituent_set, gold_nt_order


class GoldReference:
    """Gold constituent multiset plus the ordered gold non-terminals for one
    tree under one strategy."""

    def __init__(self, strategy, n, constituents, nt_order):
        self.strategy = strategy
        self.n = n
        self.constituents = tuple(constituents)
        self.nt_order = tuple(nt_order)
        self.count = Counter(c.key for c in self.constituents)
        self.size = len(self.constituents)
        self.ranks = {}
        for node in self.nt_order:
            self.ranks.setdefault((node.label, node.j), []).append(node.rank)
        self.labels = tuple(sorted({c.label for c in self.constituents}))

    @classmethod
    def from_tree(cls, tree, strategy):
        return cls(
            strategy, tree.n, constituent_set(tree), gold_nt_order(tree, strategy)
        )


@dataclass(frozen=True)
class LossBreakdown:
    unreachable: int
    false_constituents: int
    false_open_nts: int
    out_of_order: int
    total: int

    def columns(self):
        return (
            self.unreachable,
            self.false_constituents,
            self.false_open_nts,
            self.out_of_order,
        )


def lis_length(ranks) -> int:
    """Length of the longest strictly increasing subsequence, patience style."""
    tails = []
    for x in ranks:
        k = bisect_left(tails, x)
        if k == len(tails):
            tails.append(x)
        else:
            tails[k] = x
    return len(tails)


def _check_strategies(config, gold):
    if config.strategy != gold.strategy:
        raise ValueError(
            f"strategy mismatch: configuration is {config.strategy},"
            f" gold is {gold.strategy}"
        )


def _rem_and_sunk(config: Configuration, gold: GoldReference):
    # rem keeps zero entries; every consumer tests the count
    rem = dict(gold.count)
    sunk = 0
    for c in config.built:
        k = (c.label, c.l, c.r)
        v = rem.get(k, 0)
        if v:
            rem[k] = v - 1
        else:
            sunk += 1
    return rem, sunk


def out_of_order(config: Configuration, gold: GoldReference) -> int:
    """Stack open NTs that match gold (label, j) nodes, mapped greedily to
    the lowest unused gold rank, minus the longest increasing rank
    subsequence."""
    _check_strategies(config, gold)
    used = set()
    q = []
    for e in config.stack:
        if not isinstance(e, OpenNT):
            continue
        for rank in gold.ranks.get((e.label, e.index), ()):
            if rank not in used:
                used.add(rank)
                q.append(rank)
                break
    return len(q) - lis_length(q)


def _slot_lefts(stack):
    """In-order helpers: left end of the item directly below each open NT
    (bottom to top), and the left end of the top item when it is completed."""
    slots = []
    for k, e in enumerate(stack):
        if isinstance(e, OpenNT):
            slots.append((stack[k - 1].l, e.label))
    beta = None
    if stack and isinstance(stack[-1], Completed):
        beta = stack[-1].l
    return slots, beta


def _top_down_analysis(config, gold, rem):
    """Minimum future loss for top-down, by searching assignments of open
    NTs to gold target spans.

    Open NTs are matched to gold spans with the same label and left index.
    The bottom NT must close the whole sentence; any other target must end
    inside [E, n] where E is the earliest point a reduce can still produce,
    and targets must nest going up the stack.  Unmatched NTs close as junk
    (one loss each) on spans that never cross a kept gold span.  Gold spans
    left of i survive only as such targets; spans starting exactly at i can
    still be opened fresh, limited by the consecutive-NT headroom and capped
    at the tightest matched target end; spans starting right of i are free.
    """
    i, n, cap = config.i, config.n, config.max_consecutive_nt
    stack = config.stack
    sigmas = [e for e in stack if isinstance(e, OpenNT)]
    K = len(sigmas)
    top_completed = bool(stack) and isinstance(stack[-1], Completed)
    E = i if top_completed else i + 1

    A_total = sum(cnt for (_, l, _), cnt in rem.items() if l < i)

    cands = []
    for t, s in enumerate(sigmas):
        opts = set()
        for (lab, l, r), cnt in rem.items():
            if cnt > 0 and lab == s.label and l == s.index:
                if t == 0:
                    if r == n:
                        opts.add(r)
                elif E <= r <= n:
                    opts.add(r)
        cands.append(sorted(opts))
    structural_junk = sum(1 for o in cands if not o)

    avail = max(0, cap - config.nt_run)
    best = [math.inf, 0, 0]  # cost, junk, future unreachable

    def settle(junk, matched_a, rho):
        lost_far = pushes = 0
        for (_, l, r), cnt in rem.items():
            if l == i and cnt > 0:
                if r > rho:
                    lost_far += cnt
                else:
                    pushes += cnt
        c_loss = lost_far + max(0, pushes - avail)
        missed = A_total - matched_a
        cost = junk + missed + c_loss
        if cost < best[0]:
            best[0] = cost
            best[1] = junk
            best[2] = missed + c_loss

    def dfs(t, bound, junk, matched_a, rho):
        if junk >= best[0]:
            return
        if t == K:
            settle(junk, matched_a, rho)
            return
        s = sigmas[t]
        dfs(t + 1, bound, junk + 1, matched_a, rho)
        for r in cands[t]:
            if r > bound:
                continue
            key = (s.label, s.index, r)
            if rem[key] <= 0:
                continue
            rem[key] -= 1
            dfs(
                t + 1,
                r,
                junk,
                matched_a + (1 if s.index < i else 0),
                min(rho, r) if r >= i + 1 else rho,
            )
            rem[key] += 1

    dfs(0, n, 0, 0, math.inf)
    cost, junk, unreachable = best
    return unreachable, structural_junk, junk - structural_junk


def _in_order_analysis(config, gold, rem):
    """Minimum future loss for in-order.

    Each open NT will reduce into a span starting at the left end of the
    item directly below it; each such slot can host every remaining gold
    span with that left end and a right end not before i (outer ones are
    added by closing the NT and wrapping).  The NT itself costs nothing when
    its label is the innermost gold at its slot, one loss otherwise.  Gold
    spans starting at the top item's left end are free via wraps, spans at
    or right of i are untouched, and everything else is unbuildable.
    """
    i = config.i
    slots, beta = _slot_lefts(config.stack)
    pools = {b: [] for b, _ in slots}
    lost = 0
    for (lab, l, r), cnt in rem.items():
        if cnt <= 0 or l >= i:
            continue
        if l in pools and r >= i:
            pools[l].append((r, lab))
        elif l == beta and r >= i:
            continue
        else:
            lost += cnt
    fa = ooo = 0
    for b, sig_label in slots:
        pool = pools[b]
        if not pool:
            fa += 1
            continue
        rmin = min(r for r, _ in pool)
        labels_at_min = {lab for r, lab in pool if r == rmin}
        if sig_label in labels_at_min:
            continue
        if any(lab == sig_label for _, lab in pool):
            ooo += 1
        else:
            fa += 1
    return lost, fa, ooo


def loss(
    config: Configuration,
    gold: GoldReference,
    *,
    count_out_of_order: bool = True,
    count_false_open_nts: bool = True,
) -> LossBreakdown:
    """Minimum achievable Hamming loss from this configuration, decomposed.

    The two count_* switches exist only to let the conformance suite prove
    it can detect a broken oracle; leave them on.
    """
    _check_strategies(config, gold)
    rem, sunk = _rem_and_sunk(config, gold)
    if is_terminal(config) or config.finished:
        unreachable, fa, ooo = sum(rem.values()), 0, 0
    elif config.strategy == TOP_DOWN:
        unreachable, fa, ooo = _top_down_analysis(config, gold, rem)
    else:
        unreachable, fa, ooo = _in_order_analysis(config, gold, rem)
    total = unreachable + sunk
    if count_false_open_nts:
        total += fa
    if count_out_of_order:
        total += ooo
    return LossBreakdown(
        unreachable=unreachable,
        false_constituents=sunk,
        false_open_nts=fa,
        out_of_order=ooo,
        total=total,
    )


def reachable_constituents(config: Configuration, gold: GoldReference):
    """Gold constituents that some completion of this configuration still
    contains, taken one at a time (a pair may be jointly unbuildable even
    though each member is reachable on its own).  Already built gold
    constituents count as reachable."""
    _check_strategies(config, gold)
    built = Counter(c.key for c in config.built)
    rem = gold.count - built
    i, n = config.i, config.n

    if config.strategy == TOP_DOWN:
        stack = config.stack
        sigmas = [e for e in stack if isinstance(e, OpenNT)]
        top_completed = bool(stack) and isinstance(stack[-1], Completed)
        E = i if top_completed else i + 1
        push_ok = i < n and config.nt_run < config.max_consecutive_nt

        def window_ok(t, r):
            return r == n if t == 0 else E <= r <= n

        def ok(lab, l, r):
            if l > i:
                return True
            if l == i:
                if push_ok:
                    return True
            return any(
                s.label == lab and s.index == l and window_ok(t, r)
                for t, s in enumerate(sigmas)
            )

    else:
        slots, beta = _slot_lefts(config.stack)
        slot_lefts = {b for b, _ in slots}

        def ok(lab, l, r):
            if l >= i:
                return True
            return (l in slot_lefts or l == beta) and r >= i

    finished_dead = config.finished or is_terminal(config)
    out = []
    for c in gold.constituents:
        have = min(built[c.key], gold.count[c.key])
        if c.occ < have:
            out.append(c)  # already built
        elif not finished_dead and rem[c.key] > 0 and ok(*c.key):
            out.append(c)
    return out


def optimal_transitions(config: Configuration, gold: GoldReference, label_alphabet=None):
    """Legal transitions that keep the minimum achievable loss unchanged, in
    the fixed tie-break order."""
    _check_strategies(config, gold)
    if label_alphabet is None:
        label_alphabet = gold.labels
    base = loss(config, gold).total
    out = []
    for t in legal_transitions(config, label_alphabet):
        if loss(apply(config, t), gold).total == base:
            out.append(t)
    return out
