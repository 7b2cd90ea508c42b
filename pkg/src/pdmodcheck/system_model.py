"""Pushdown multi-agent systems and their configuration-graph semantics.

A PMS induces an infinite concurrent game structure whose states are
configurations ``(q, stack)``.  This module holds the system types, the text
format parser, the successor ordering used by tree encodings, bounded
unwindings, environment prunings and the bottom-completion encoding.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import ExplosionGuard, InputError, NotOpen

BOTTOM = "$"
ENV = "env"
ENVIRONMENT = "env"
SYSTEM = "sys"
BOT_MARK = "⊥"


def restrict(decision: tuple, indices: Sequence[int]) -> tuple:
    """Project a full decision onto the agents at ``indices``."""
    return tuple(decision[i] for i in indices)


def agent_indices(agents: Sequence[str], subset) -> tuple[int, ...]:
    subset = set(subset)
    return tuple(i for i, a in enumerate(agents) if a in subset)


@dataclass(frozen=True)
class Config:
    state: str
    stack: tuple  # top first, always ends with BOTTOM

    def __post_init__(self):
        if not self.stack or self.stack[-1] != BOTTOM or BOTTOM in self.stack[:-1]:
            raise ValueError(f"malformed stack {self.stack!r}")

    @property
    def top(self):
        return self.stack[0]

    def __str__(self):
        return f"({self.state}, {''.join(self.stack)})"


class Pms:
    """An open pushdown multi-agent system.

    ``transitions`` maps ``(q, gamma)`` to an ordered tuple of
    ``(decision, (q2, beta))`` where ``decision`` is aligned with ``agents``
    and ``beta`` is the pushed word (top first) replacing ``gamma``.
    """

    def __init__(self, agents, actions, props, states, stack_symbols, initial,
                 labels, transitions, closed=False):
        self.agents = tuple(agents)
        self.actions = tuple(actions)
        self.props = frozenset(props)
        self.states = tuple(states)
        self.stack_symbols = tuple(stack_symbols)
        self.initial = initial
        self.labels = {q: frozenset(labels.get(q, ())) for q in self.states}
        self.transitions = {k: tuple(v) for k, v in transitions.items()}
        # model mode: every pair is treated as a system pair
        self.closed = closed
        self._validate()
        self._control = {}
        self._next = {}
        for q in self.states:
            for g in self.stack_alphabet:
                self._next[(q, g)] = _dedup_targets(self.transitions[(q, g)])

    @property
    def stack_alphabet(self):
        return self.stack_symbols + (BOTTOM,)

    @property
    def is_open(self):
        return ENV in self.agents and not self.closed

    def _validate(self):
        if not self.agents or not self.actions:
            raise InputError("agents and actions must be nonempty")
        if BOTTOM in self.stack_symbols:
            raise InputError("the bottom symbol cannot be declared as a stack symbol")
        if self.initial not in self.states:
            raise InputError(f"unknown initial state {self.initial!r}")
        for q, lab in self.labels.items():
            extra = lab - self.props
            if extra:
                raise InputError(f"state {q}: undeclared propositions {sorted(extra)}")
        for q in self.states:
            for g in self.stack_alphabet:
                entries = self.transitions.get((q, g), ())
                if not entries:
                    raise InputError(f"no transition defined at ({q}, {g})")
                seen = set()
                for d, (q2, beta) in entries:
                    if len(d) != len(self.agents):
                        raise InputError(f"decision {d} has wrong arity")
                    if d in seen:
                        raise InputError(f"duplicate transition for ({q}, {g}, {d})")
                    seen.add(d)
                    if q2 not in self.states:
                        raise InputError(f"unknown target state {q2!r}")
                    for x in beta:
                        if x not in self.stack_symbols:
                            raise InputError(f"pushed word {beta} uses invalid symbol {x!r}")
        extra = set(self.transitions) - {(q, g) for q in self.states for g in self.stack_alphabet}
        if extra:
            raise InputError(f"transitions for unknown pairs {sorted(extra)}")

    def decisions(self, q, gamma):
        return self.transitions[(q, gamma)]

    def delta(self, q, gamma, decision):
        for d, target in self.transitions[(q, gamma)]:
            if d == decision:
                return target
        return None

    @property
    def size(self):
        """|Delta|: total length of pushed words over all defined entries."""
        return sum(len(beta) for entries in self.transitions.values() for _, (_, beta) in entries)

    def as_closed(self) -> "Pms":
        """Copy in which the environment is passive everywhere (model mode)."""
        return Pms(self.agents, self.actions, self.props, self.states, self.stack_symbols,
                   self.initial, self.labels, self.transitions, closed=True)

    def control(self, q, gamma):
        key = (q, gamma)
        if key not in self._control:
            self._control[key] = classify_control(self, q, gamma)
        return self._control[key]

    def check_open(self):
        for q in self.states:
            for g in self.stack_alphabet:
                self.control(q, g)

    def __repr__(self):
        return (f"Pms(states={len(self.states)}, stack={len(self.stack_symbols)}, "
                f"agents={self.agents}, |Delta|={self.size})")


def _dedup_targets(entries):
    out = []
    for _, target in entries:
        if target not in out:
            out.append(target)
    return tuple(out)


def available_decisions(agents, entries, coalition, allowed_targets=None):
    """A-decisions available among ``entries`` (optionally only those reaching
    ``allowed_targets``)."""
    idx = agent_indices(agents, coalition)
    out = []
    for d, target in entries:
        if allowed_targets is not None and target not in allowed_targets:
            continue
        r = restrict(d, idx)
        if r not in out:
            out.append(r)
    return out


def classify_control(pms: Pms, q, gamma):
    """ENVIRONMENT or SYSTEM for the pair ``(q, gamma)``.

    System wins ties: a pair with a single full decision is env-passive.
    """
    entries = pms.decisions(q, gamma)
    if pms.closed or ENV not in pms.agents:
        return SYSTEM
    others = [a for a in pms.agents if a != ENV]
    if len(available_decisions(pms.agents, entries, [ENV])) == 1:
        return SYSTEM
    if len(available_decisions(pms.agents, entries, others)) == 1:
        return ENVIRONMENT
    raise NotOpen(f"({q}, {gamma}) is neither environment- nor system-controlled", stage="load")


def step(pms: Pms, c: Config, d: tuple):
    """Successor configuration under full decision ``d``, or None (undefined)."""
    target = pms.delta(c.state, c.top, d)
    if target is None:
        return None
    q2, beta = target
    if c.top == BOTTOM:
        return Config(q2, tuple(beta) + (BOTTOM,))
    return Config(q2, tuple(beta) + c.stack[1:])


def next_successors(pms: Pms, q, gamma):
    """Ordered, deduplicated targets ``(q2, beta)`` of ``(q, gamma)``."""
    return pms._next[(q, gamma)]


def branching_degree(pms: Pms) -> int:
    return max(len(v) for v in pms._next.values())


def local_options(pms: Pms, q, gamma):
    """``(decision, successor index)`` pairs in declaration order."""
    succ = next_successors(pms, q, gamma)
    return tuple((d, succ.index(t)) for d, t in pms.decisions(q, gamma))


# ---------------------------------------------------------------- finite CGS

class FiniteCgs:
    """Explicit concurrent game structure with partial transitions.

    ``moves[s]`` is a tuple of ``(decision, successor)``.
    """

    def __init__(self, agents, states, initial, labels, moves, owner=None):
        self.agents = tuple(agents)
        self.states = tuple(states)
        self.initial = initial
        self.labels = {s: frozenset(labels.get(s, ())) for s in self.states}
        self.moves = {s: tuple(moves[s]) for s in self.states}
        self.owner = dict(owner) if owner else {s: SYSTEM for s in self.states}
        for s in self.states:
            if not self.moves[s]:
                raise InputError(f"state {s!r} has no defined decision")
            for _, t in self.moves[s]:
                if t not in self.labels:
                    raise InputError(f"unknown successor {t!r}")

    def label(self, s):
        return self.labels[s]

    def options(self, s):
        return self.moves[s]

    def successors(self, s):
        out = []
        for _, t in self.moves[s]:
            if t not in out:
                out.append(t)
        return out

    def __repr__(self):
        return f"FiniteCgs(states={len(self.states)}, agents={self.agents})"


def stack_free_projection(pms: Pms) -> FiniteCgs:
    """Finite CGS over control states that reads only the bottom symbol and
    forgets pushed words."""
    moves = {q: [(d, q2) for d, (q2, _) in pms.decisions(q, BOTTOM)] for q in pms.states}
    return FiniteCgs(pms.agents, pms.states, pms.initial, pms.labels, moves)


def bounded_configuration_cgs(pms: Pms, max_height: int) -> FiniteCgs:
    """Reachable configuration graph, provided the stack never exceeds
    ``max_height`` symbols above the bottom."""
    start = Config(pms.initial, (BOTTOM,))
    seen = {start: None}
    order = [start]
    moves = {}
    i = 0
    while i < len(order):
        c = order[i]
        i += 1
        out = []
        for d, _ in pms.decisions(c.state, c.top):
            c2 = step(pms, c, d)
            if len(c2.stack) - 1 > max_height:
                raise ExplosionGuard(f"stack height exceeds {max_height}", measured=len(c2.stack) - 1)
            if c2 not in seen:
                seen[c2] = None
                order.append(c2)
            out.append((d, c2))
        moves[c] = out
    labels = {c: pms.labels[c.state] for c in order}
    owner = {c: pms.control(c.state, c.top) for c in order}
    return FiniteCgs(pms.agents, order, start, labels, moves, owner)


# ------------------------------------------------------------ pruned trees

@dataclass(frozen=True)
class TreeNode:
    """Node of a bounded unwinding.

    ``options`` lists ``(decision, successor index)`` for every defined full
    decision; ``children`` holds the retained successors by index.  Leaves at
    the depth bound have ``expanded=False`` and no children.
    """
    track: tuple
    state: object
    stack: tuple
    label: frozenset
    owner: str
    arity: int
    options: tuple
    children: tuple = ()  # tuple of (index, TreeNode), sorted by index
    expanded: bool = True

    def child_map(self):
        return dict(self.children)

    @property
    def retained(self):
        return tuple(i for i, _ in self.children)

    def iter_nodes(self):
        yield self
        for _, c in self.children:
            yield from c.iter_nodes()


@dataclass(frozen=True)
class PrunedTree:
    root: TreeNode
    depth: int
    agents: tuple

    def nodes(self):
        return list(self.root.iter_nodes())

    def env_nodes(self):
        return [n for n in self.root.iter_nodes() if n.expanded and n.owner == ENVIRONMENT]


def unwind_bounded(source, depth: int) -> PrunedTree:
    """Maximal depth-``depth`` prefix of the unwinding of a Pms or FiniteCgs."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if isinstance(source, Pms):
        def expand(c: Config, track, level):
            opts = local_options(source, c.state, c.top)
            succ = next_successors(source, c.state, c.top)
            children = ()
            if level < depth:
                kids = []
                for i, (q2, beta) in enumerate(succ):
                    stack = tuple(beta) + ((BOTTOM,) if c.top == BOTTOM else c.stack[1:])
                    kids.append((i, expand(Config(q2, stack), track + (i,), level + 1)))
                children = tuple(kids)
            return TreeNode(track, c.state, c.stack, source.labels[c.state],
                            source.control(c.state, c.top), len(succ), opts,
                            children, level < depth)
        root = expand(Config(source.initial, (BOTTOM,)), (), 0)
    else:
        def expand(s, track, level):
            succ = source.successors(s)
            opts = tuple((d, succ.index(t)) for d, t in source.options(s))
            children = ()
            if level < depth:
                children = tuple((i, expand(t, track + (i,), level + 1)) for i, t in enumerate(succ))
            return TreeNode(track, s, (), source.label(s), source.owner.get(s, SYSTEM),
                            len(succ), opts, children, level < depth)
        root = expand(source.initial, (), 0)
    return PrunedTree(root, depth, source.agents)


def count_prunings(t: PrunedTree) -> int:
    total = 1
    for n in t.env_nodes():
        total *= 2 ** len(n.children) - 1
    return total


def enumerate_prunings(t: PrunedTree, limit: int = 100_000) -> Iterator[PrunedTree]:
    """All environment prunings of a maximal bounded unwinding.

    Environment nodes keep any nonempty subset of their children; nodes cut
    away are not visited, so the stream counts only choices at surviving
    nodes.
    """
    total = count_prunings(t)
    if total > limit:
        raise ExplosionGuard(f"{total} prunings exceed the limit {limit}", measured=total)

    def variants(node: TreeNode):
        if not node.children:
            yield node
            return
        kids = node.children
        if node.owner == ENVIRONMENT:
            subsets = [c for r in range(1, len(kids) + 1) for c in itertools.combinations(kids, r)]
        else:
            subsets = [kids]
        for subset in subsets:
            per_child = [list(variants(c)) for _, c in subset]
            for combo in itertools.product(*per_child):
                yield TreeNode(node.track, node.state, node.stack, node.label, node.owner,
                               node.arity, node.options,
                               tuple((i, c) for (i, _), c in zip(subset, combo)), node.expanded)

    for root in variants(t.root):
        yield PrunedTree(root, t.depth, t.agents)


def bot_completion_encode(t: PrunedTree, k: int) -> dict:
    """Labels of the complete ``k``-ary tree up to the tree's depth.

    Returns a dict from direction words (1-based tuples) to either a
    proposition set or ``BOT_MARK``.
    """
    out = {}

    def fill_bot(word, level):
        out[word] = BOT_MARK
        if level < t.depth:
            for i in range(1, k + 1):
                fill_bot(word + (i,), level + 1)

    def walk(node: TreeNode, word, level):
        out[word] = node.label
        if level >= t.depth:
            return
        kids = node.child_map()
        for i in range(1, k + 1):
            if (i - 1) in kids:
                walk(kids[i - 1], word + (i,), level + 1)
            else:
                fill_bot(word + (i,), level + 1)

    walk(t.root, (), 0)
    return out


def decode_encoding(encoding: dict, reference: PrunedTree) -> PrunedTree:
    """Inverse of :func:`bot_completion_encode` relative to the maximal tree."""
    def walk(node: TreeNode, word):
        if not node.expanded:
            return node
        kids = []
        for i, c in node.children:
            if encoding.get(word + (i + 1,), BOT_MARK) != BOT_MARK:
                kids.append((i, walk(c, word + (i + 1,))))
        return TreeNode(node.track, node.state, node.stack, node.label, node.owner,
                        node.arity, node.options, tuple(kids), node.expanded)
    return PrunedTree(walk(reference.root, ()), reference.depth, reference.agents)


# ------------------------------------------------------------------ parser

_TRANS = re.compile(r"^trans\s+(\S+)\s+(\S+)\s*\[(.*)\]\s*->\s*(\S+)\s+(\w+)\s*(.*)$")


def _split_list(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def parse_pms(text: str) -> Pms:
    """Parse the line-oriented PMS format (see README)."""
    agents = actions = None
    props = []
    stack = []
    init = None
    declared_states = []
    labels = {}
    raw = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("trans "):
                raw.append((lineno, line))
            elif line.startswith("label "):
                head, _, rest = line[len("label "):].partition(":")
                labels[head.strip()] = _split_list(rest)
            else:
                key, sep, rest = line.partition(":")
                if not sep:
                    raise InputError(f"line {lineno}: cannot parse {line!r}")
                key = key.strip()
                if key == "agents":
                    agents = _split_list(rest)
                elif key == "actions":
                    actions = _split_list(rest)
                elif key == "props":
                    props = _split_list(rest)
                elif key == "stack":
                    stack = _split_list(rest)
                elif key == "init":
                    init = rest.strip()
                elif key == "states":
                    declared_states = _split_list(rest)
                else:
                    raise InputError(f"line {lineno}: unknown key {key!r}")
        except InputError:
            raise
    if agents is None or actions is None or init is None:
        raise InputError("missing agents, actions or init declaration")
    if len(set(agents)) != len(agents) or len(set(actions)) != len(actions):
        raise InputError("duplicate agent or action names")

    transitions: dict = {}
    states = list(declared_states)

    def note_state(q):
        if q not in states:
            states.append(q)

    note_state(init)
    for q in labels:
        note_state(q)
    for lineno, line in raw:
        m = _TRANS.match(line)
        if not m:
            raise InputError(f"line {lineno}: malformed transition {line!r}")
        q, gamma, dec, q2, op, args = m.groups()
        if gamma != BOTTOM and gamma not in stack:
            raise InputError(f"line {lineno}: unknown stack symbol {gamma!r}")
        assign = {}
        for part in _split_list(dec):
            a, eq, act = part.partition("=")
            a, act = a.strip(), act.strip()
            if not eq or a not in agents:
                raise InputError(f"line {lineno}: bad decision component {part!r}")
            if act != "*" and act not in actions:
                raise InputError(f"line {lineno}: unknown action {act!r}")
            assign[a] = act
        missing = [a for a in agents if a not in assign]
        if missing:
            raise InputError(f"line {lineno}: decision lacks agents {missing}")
        choices = [actions if assign[a] == "*" else [assign[a]] for a in agents]
        words = args.split()
        if op == "push":
            if not words:
                raise InputError(f"line {lineno}: push needs symbols")
            beta = tuple(words) + (() if gamma == BOTTOM else (gamma,))
        elif op == "pop":
            if words:
                raise InputError(f"line {lineno}: pop takes no arguments")
            beta = ()
        elif op == "rewrite":
            beta = tuple(words)
        elif op == "keep":
            beta = () if gamma == BOTTOM else (gamma,)
        else:
            raise InputError(f"line {lineno}: unknown stack operation {op!r}")
        note_state(q)
        note_state(q2)
        bucket = transitions.setdefault((q, gamma), [])
        for d in itertools.product(*choices):
            bucket.append((tuple(d), (q2, beta)))
    pms = Pms(agents, actions, props, states, stack, init, labels, transitions)
    if pms.is_open:
        pms.check_open()
    return pms


def load_pms(path) -> Pms:
    with open(path, encoding="utf-8") as fh:
        return parse_pms(fh.read())


def format_pms(pms: Pms) -> str:
    """Serialize to the text format (explicit decisions, rewrite semantics)."""
    lines = [f"agents: {', '.join(pms.agents)}", f"actions: {', '.join(pms.actions)}",
             f"props: {', '.join(sorted(pms.props))}", f"stack: {', '.join(pms.stack_symbols)}",
             f"states: {', '.join(pms.states)}", f"init: {pms.initial}"]
    for q in pms.states:
        lines.append(f"label {q}: {', '.join(sorted(pms.labels[q]))}")
    for (q, g), entries in pms.transitions.items():
        for d, (q2, beta) in entries:
            dec = ", ".join(f"{a}={x}" for a, x in zip(pms.agents, d))
            lines.append(f"trans {q} {g} [{dec}] -> {q2} rewrite {' '.join(beta)}".rstrip())
    return "\n".join(lines) + "\n"
