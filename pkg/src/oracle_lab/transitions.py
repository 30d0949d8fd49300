"""Shift-reduce transition systems for constituent parsing.

Two strategies are supported: "top-down" pushes a non-terminal before any
of its children exist; "in-order" pushes it after its first child has been
completed.  Configurations are immutable; apply() returns a new one.
"""

from __future__ import annotations

from dataclasses import dataclass

TOP_DOWN = "top-down"
IN_ORDER = "in-order"
STRATEGIES = (TOP_DOWN, IN_ORDER)

# A gold tree whose derivation needs more consecutive NT transitions than
# this is rejected at load time.
DEFAULT_NT_CAP = 8


@dataclass(frozen=True, slots=True)
class Transition:
    kind: str  # "shift" | "nt" | "reduce" | "finish"
    label: str | None = None

    def __str__(self):
        if self.kind == "shift":
            return "SH"
        if self.kind == "reduce":
            return "RE"
        if self.kind == "finish":
            return "FI"
        return f"NT_{self.label}"

    __repr__ = __str__


SHIFT = Transition("shift")
REDUCE = Transition("reduce")
FINISH = Transition("finish")


_NT_CACHE = {}


def nt(label: str) -> Transition:
    t = _NT_CACHE.get(label)
    if t is None:
        t = _NT_CACHE[label] = Transition("nt", label)
    return t


def parse_transition(text: str) -> Transition:
    """Inverse of str(transition): SH, RE, FI, or NT_<label>."""
    if text == "SH":
        return SHIFT
    if text == "RE":
        return REDUCE
    if text == "FI":
        return FINISH
    if text.startswith("NT_") and len(text) > 3:
        return nt(text[3:])
    raise ValueError(f"unrecognized transition {text!r}")


_KIND_ORDER = {"finish": 0, "reduce": 1, "shift": 2, "nt": 3}


def transition_order_key(t: Transition):
    """Fixed tie-break order: Finish < Reduce < Shift < NT (labels lexicographic)."""
    return (_KIND_ORDER[t.kind], t.label or "")


@dataclass(frozen=True, slots=True)
class Constituent:
    """Labeled span over the token sequence, occ disambiguates duplicates.

    occ is assigned bottom-up: the innermost of several identical
    (label, l, r) triples gets occ 0.
    """

    label: str
    l: int
    r: int
    occ: int = 0

    @property
    def key(self):
        return (self.label, self.l, self.r)

    def __str__(self):
        return f"({self.label},{self.l},{self.r})"


@dataclass(frozen=True, slots=True)
class Completed:
    """Stack element holding a finished subtree: a shifted word or a reduced
    constituent.  node is the subtree it corresponds to."""

    symbol: str  # the word itself, or the constituent label
    l: int
    r: int
    node: object = None
    is_word: bool = False

    def summary(self):
        return f"{self.symbol}[{self.l},{self.r}]"


@dataclass(frozen=True, slots=True)
class OpenNT:
    """Stack element for a pushed, not yet reduced non-terminal."""

    label: str
    index: int  # buffer position at push time

    def summary(self):
        return f"{self.label}(open,{self.index})"


@dataclass(frozen=True, slots=True)
class Configuration:
    strategy: str
    tokens: tuple
    stack: tuple = ()
    i: int = 0
    finished: bool = False
    built: tuple = ()  # Constituents in build order
    nt_run: int = 0  # consecutive NT transitions ending here
    history: tuple = ()  # last two transitions
    max_consecutive_nt: int = DEFAULT_NT_CAP

    @property
    def n(self):
        return len(self.tokens)

    def open_nts(self):
        return [e for e in self.stack if isinstance(e, OpenNT)]

    def stack_summary(self):
        return " ".join(e.summary() for e in self.stack)


def initial_config(tokens, strategy, max_consecutive_nt=DEFAULT_NT_CAP):
    if not tokens:
        raise ValueError("empty sentence")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    return Configuration(
        strategy=strategy,
        tokens=tuple(tokens),
        max_consecutive_nt=max_consecutive_nt,
    )


def is_terminal(config: Configuration) -> bool:
    """One completed constituent covering the sentence, empty buffer, and
    (in-order only) the finish flag set.  A bare shifted word does not count
    as a finished parse."""
    if len(config.stack) != 1 or config.i != config.n:
        return False
    top = config.stack[0]
    if not isinstance(top, Completed) or top.is_word:
        return False
    if top.l != 0 or top.r != config.n:
        return False
    if config.strategy == IN_ORDER:
        return config.finished
    return True


def _move_flags(config: Configuration):
    """(finish, reduce, shift, nt) legality in one pass over the stack.
    NT legality never depends on the label."""
    if config.finished or is_terminal(config):
        return False, False, False, False
    stack = config.stack
    top = stack[-1] if stack else None
    opens = 0
    for e in stack:
        if type(e) is OpenNT:
            opens += 1
    top_done = type(top) is Completed
    i = config.i
    n = config.n
    room = config.nt_run < config.max_consecutive_nt
    if config.strategy == TOP_DOWN:
        shift = i < n and opens > 0
        nt_ok = i < n and room
        red = opens > 0 and top_done and not (opens == 1 and i < n)
        fin = False
    else:
        shift = i < n and (not stack or opens > 0)
        nt_ok = top_done and room
        red = opens > 0
        fin = (
            i == n
            and len(stack) == 1
            and top_done
            and not top.is_word
            and top.l == 0
            and top.r == n
        )
    return fin, red, shift, nt_ok


def _illegal_reason(config: Configuration, t: Transition):
    """None if t is legal, else the name of the failed side condition."""
    if is_terminal(config):
        return "configuration is terminal"
    if config.finished:
        return "finish flag already set"
    fin, red, shift, nt_ok = _move_flags(config)
    stack = config.stack
    top = stack[-1] if stack else None
    td = config.strategy == TOP_DOWN

    if t.kind == "shift":
        if shift:
            return None
        if config.i >= config.n:
            return "buffer exhausted"
        if td:
            return "no open non-terminal to attach the word to"
        return "a second unattachable item would strand the parse"
    if t.kind == "nt":
        if nt_ok:
            return None
        if td and config.i >= config.n:
            return "non-terminal opened on an empty buffer can never close"
        if not td and not isinstance(top, Completed):
            return "no completed item below to serve as first child"
        return "consecutive non-terminal cap reached"
    if t.kind == "reduce":
        if red:
            return None
        if not any(isinstance(e, OpenNT) for e in stack):
            return "no open non-terminal"
        if not isinstance(top, Completed):
            return "nothing above the open non-terminal to reduce"
        return "closing the last open non-terminal would strand buffer words"
    if t.kind == "finish":
        if fin:
            return None
        if td:
            return "finish is not part of the top-down system"
        if config.i < config.n:
            return "buffer not empty"
        if len(stack) != 1 or not isinstance(top, Completed) or top.is_word:
            return "stack is not a single completed constituent"
        return "constituent does not span the sentence"
    return f"unknown transition kind {t.kind!r}"


def legal(config: Configuration, t: Transition) -> bool:
    return _illegal_reason(config, t) is None


def legal_transitions(config: Configuration, label_alphabet):
    """All legal transitions, NT instantiated over label_alphabet, in the
    fixed tie-break order."""
    fin, red, shift, nt_ok = _move_flags(config)
    out = []
    if fin:
        out.append(FINISH)
    if red:
        out.append(REDUCE)
    if shift:
        out.append(SHIFT)
    if nt_ok:
        out.extend(nt(lab) for lab in sorted(label_alphabet))
    return out


# Node constructors from trees, bound on first use; trees imports this
# module at load time, so a top-level import would be circular.
_Internal = _Leaf = None


def _load_node_types():
    global _Internal, _Leaf
    from .trees import Internal, Leaf

    _Internal, _Leaf = Internal, Leaf


def apply(config: Configuration, t: Transition) -> Configuration:
    fin, red, shift, nt_ok = _move_flags(config)
    kind = t.kind
    if kind == "shift":
        ok = shift
    elif kind == "nt":
        ok = nt_ok
    elif kind == "reduce":
        ok = red
    elif kind == "finish":
        ok = fin
    else:
        ok = False
    if not ok:
        raise ValueError(f"illegal transition {t}: {_illegal_reason(config, t)}")
    return _construct(config, t)


def _construct(config: Configuration, t: Transition) -> Configuration:
    """apply() minus the legality check, for callers that have already
    filtered through legal_transitions."""
    if _Leaf is None:
        _load_node_types()
    kind = t.kind
    hist = (config.history + (t,))[-2:]
    if kind == "shift":
        i = config.i
        word = config.tokens[i]
        item = Completed(word, i, i + 1, _Leaf(word), is_word=True)
        return Configuration(
            config.strategy,
            config.tokens,
            config.stack + (item,),
            i + 1,
            config.finished,
            config.built,
            0,
            hist,
            config.max_consecutive_nt,
        )
    if kind == "nt":
        item = OpenNT(t.label, config.i)
        return Configuration(
            config.strategy,
            config.tokens,
            config.stack + (item,),
            config.i,
            config.finished,
            config.built,
            config.nt_run + 1,
            hist,
            config.max_consecutive_nt,
        )
    if kind == "finish":
        return Configuration(
            config.strategy,
            config.tokens,
            config.stack,
            config.i,
            True,
            config.built,
            0,
            hist,
            config.max_consecutive_nt,
        )

    # reduce
    stack = config.stack
    k = len(stack) - 1
    while type(stack[k]) is not OpenNT:
        k -= 1
    open_nt = stack[k]
    children = list(stack[k + 1 :])
    if config.strategy == IN_ORDER:
        children.insert(0, stack[k - 1])
        rest = stack[: k - 1]
    else:
        rest = stack[:k]
    l = children[0].l
    r = children[-1].r
    node = _Internal(open_nt.label, tuple(c.node for c in children))
    occ = 0
    for c in config.built:
        if c.label == open_nt.label and c.l == l and c.r == r:
            occ += 1
    made = Constituent(open_nt.label, l, r, occ)
    item = Completed(open_nt.label, l, r, node)
    return Configuration(
        config.strategy,
        config.tokens,
        rest + (item,),
        config.i,
        config.finished,
        config.built + (made,),
        0,
        hist,
        config.max_consecutive_nt,
    )


def fingerprint(config: Configuration):
    """Hashable identity of the parser state proper: stack shape, buffer
    position, finish flag and the current NT run.  Built constituents and
    history are excluded; past output never affects what is legal next."""
    items = tuple(
        ("w" if e.is_word else "c", e.symbol, e.l, e.r)
        if isinstance(e, Completed)
        else ("o", e.label, e.index)
        for e in config.stack
    )
    return (config.strategy, items, config.i, config.finished, config.nt_run)
