"""Parity nondeterministic pushdown tree automata (NPTA).

An NPTA reads complete ``k``-ary trees.  A transition for ``(state, letter,
top)`` is a ``k``-tuple of ``(state, word)`` pairs: the word replaces the top
symbol (below the bottom symbol it is pushed on top of it instead).

Automata are lazy.  ``moves(state, top)`` enumerates ``(letter, tuple)``
pairs and ``rho(state, letter, top)`` answers a concrete letter.
"""
from __future__ import annotations

import itertools
from collections import namedtuple

from .acg import BOX, Atom, ParityAcg, minimal_models, satisfies
from .errors import CheckError
from .system_model import (BOT_MARK, BOTTOM, ENVIRONMENT, Pms, agent_indices, branching_degree,
                           classify_control, local_options, next_successors, restrict)

BOT = BOT_MARK
MK_BOT = "⊥"
MK_TOP = "⊤"
MK_TURN = "⊢"

Letter = namedtuple("Letter", "label an incoming")


# -------------------------------------------------------------- annotations

def root_move(acg: ParityAcg):
    """Virtual move feeding the ACG's initial state into the root."""
    return (None, Atom(acg.initial, BOX, frozenset()))


def dom(an) -> frozenset:
    return frozenset(mv[0] for mv in an)


def cod(an) -> frozenset:
    return frozenset(mv[1].state for mv in an)


def atoms_of(q, an) -> frozenset:
    return frozenset(mv[1] for mv in an if mv[0] == q)


def annotation_ok(acg: ParityAcg, label, an, incoming) -> bool:
    """Every state fed by ``incoming`` picks a model of its transition."""
    need = cod(incoming)
    if not dom(an) <= need:
        return False
    return all(satisfies(acg.delta(q, label), atoms_of(q, an)) for q in need)


def _groups(pms: Pms, q, gamma, coalition, enabled=None):
    """A-decision -> set of successor indices (restricted to ``enabled``)."""
    idx = agent_indices(pms.agents, coalition)
    out = {}
    for d, i in local_options(pms, q, gamma):
        if enabled is not None and i not in enabled:
            continue
        out.setdefault(restrict(d, idx), set()).add(i)
    return {k: frozenset(v) for k, v in out.items()}


def _surjection(groups, X) -> bool:
    """Some map choosing one element of ``X`` per group hits all of ``X``."""
    opts = [g & X for g in groups.values()]
    if any(not o for o in opts):
        return False
    xs = sorted(X)
    match = {}

    def augment(x, seen):
        for j, o in enumerate(opts):
            if x in o and j not in seen:
                seen.add(j)
                if j not in match or augment(match[j], seen):
                    match[j] = x
                    return True
        return False

    return all(augment(x, set()) for x in xs)


def move_consistent(pms: Pms, q, gamma, eta, X, enabled=None) -> bool:
    """Whether successor indices ``X`` are consistent with move ``eta``.

    Box: ``X`` is exactly the successor set of one available A-decision.
    Diamond: some surjection from the available A-decisions onto ``X``
    picks, for each decision, one of its successors.  ``enabled`` restricts
    the successors (pruned environment children are not available).
    """
    X = frozenset(X)
    if not X:
        return False
    atom = eta[1]
    groups = _groups(pms, q, gamma, atom.agents, enabled)
    if not groups:
        return False
    if atom.mode == BOX:
        return X in groups.values()
    return _surjection(groups, X)


def consistent_sets(pms: Pms, q, gamma, atom, enabled, minimal=False):
    groups = _groups(pms, q, gamma, atom.agents, enabled)
    if not groups:
        return []
    if atom.mode == BOX:
        cands = sorted(set(groups.values()), key=lambda s: (len(s), sorted(s)))
    else:
        universe = sorted(frozenset().union(*groups.values()))
        cands = [frozenset(c) for r in range(1, len(universe) + 1)
                 for c in itertools.combinations(universe, r)
                 if _surjection(groups, frozenset(c))]
    if minimal:
        cands = [c for c in cands if not any(o < c for o in cands)]
    return cands


def cons_tuples(pms: Pms, q, gamma, an, enabled=None, minimal=False):
    """Tuples of per-successor annotations consistent with ``an``.

    Returned tuples have length ``|next_S(q, gamma)|``; successors outside
    ``enabled`` always get the empty annotation.
    """
    k = len(next_successors(pms, q, gamma))
    en = frozenset(range(k)) if enabled is None else frozenset(enabled)
    moves = sorted(an, key=repr)
    options = []
    for eta in moves:
        sets = consistent_sets(pms, q, gamma, eta[1], en, minimal)
        if not sets:
            return []
        options.append(sets)
    out = []
    for choice in itertools.product(*options):
        parts = [set() for _ in range(k)]
        for eta, X in zip(moves, choice):
            for i in X:
                parts[i].add(eta)
        tup = tuple(frozenset(p) for p in parts)
        if tup not in out:
            out.append(tup)
    return out


# ------------------------------------------------------------- base classes

class ParityNpta:
    """Interface; subclasses implement ``moves`` and ``rho``."""

    arity: int
    initial = None
    colorset: frozenset = frozenset({0})

    def color(self, state) -> int:
        raise NotImplementedError

    def moves(self, state, top):
        raise NotImplementedError

    def rho(self, state, letter, top):
        return [tup for a, tup in self.moves(state, top) if a == letter]

    def stack_symbols(self):
        return ()


class ExplicitNpta(ParityNpta):
    """Table-driven NPTA: ``table[(state, letter, top)] = [tuple, ...]``."""

    def __init__(self, states, initial, alphabet, stack, table, colors, arity):
        self.states = tuple(states)
        self.initial = initial
        self.alphabet = tuple(alphabet)
        self.stack = tuple(stack)
        self.table = {k: [tuple(t) for t in v] for k, v in table.items()}
        self.colors = dict(colors)
        self.arity = arity
        self.colorset = frozenset(self.colors.values())
        for v in self.table.values():
            for t in v:
                if len(t) != arity:
                    raise CheckError("tuple arity mismatch")

    def color(self, state):
        return self.colors[state]

    def moves(self, state, top):
        for a in self.alphabet:
            for t in self.table.get((state, a, top), ()):
                yield a, t

    def rho(self, state, letter, top):
        return self.table.get((state, letter, top), [])

    def stack_symbols(self):
        return self.stack


class ParityNta:
    """Stack-free tree automaton: ``rho(state, letter)`` gives state tuples."""

    def __init__(self, initial, rho_fn, color_fn, arity, colorset, alphabet=None):
        self.initial = initial
        self._rho = rho_fn
        self.color = color_fn
        self.arity = arity
        self.colorset = frozenset(colorset)
        self.alphabet = alphabet
        self._memo = {}

    def rho(self, state, letter):
        key = (state, letter)
        out = self._memo.get(key)
        if out is None:
            out = tuple(self._rho(state, letter))
            self._memo[key] = out
        return out

    def as_npta(self, stack=()):
        """View as an NPTA whose words rebuild the top symbol."""
        return _NtaAsNpta(self, stack)


class _NtaAsNpta(ParityNpta):
    def __init__(self, nta, stack):
        self.nta = nta
        self.arity = nta.arity
        self.initial = nta.initial
        self.colorset = nta.colorset
        self.stack = tuple(stack)

    def color(self, state):
        return self.nta.color(state)

    def _words(self, tup, top):
        w = () if top == BOTTOM else (top,)
        return tuple((s, w) for s in tup)

    def moves(self, state, top):
        for a in self.nta.alphabet:
            for tup in self.nta.rho(state, a):
                yield a, self._words(tup, top)

    def rho(self, state, letter, top):
        return [self._words(t, top) for t in self.nta.rho(state, letter)]

    def stack_symbols(self):
        return self.stack


# -------------------------------------------------------------------- P_wf

class PwfNpta(ParityNpta):
    """Well-formed annotated extensions of exec trees of an open PMS.

    States are ``(q, incoming, marker)``.  ``incoming`` is the annotation
    carried from the parent (moves whose target copy lives at this node).
    Letters are :class:`Letter` values or ``BOT``.

    At an environment node the automaton guesses the nonempty set of kept
    successors; annotations are made consistent relative to that set and
    the pruned successors continue as ``(q, {}, ⊥)``.
    """

    def __init__(self, pms: Pms, acg: ParityAcg, extra=(), reduced=False):
        self.pms = pms
        self.acg = acg
        self.extra = tuple(extra)
        self.reduced = reduced
        self.arity = branching_degree(pms)
        self.root = root_move(acg)
        self.initial = (pms.initial, frozenset([self.root]), MK_TOP)
        self.colorset = frozenset({0})
        self._guesses = [frozenset(c) for r in range(len(self.extra) + 1)
                         for c in itertools.combinations(self.extra, r)]
        self._memo = {}
        self._ann = {}

    def color(self, state):
        return 0

    def stack_symbols(self):
        return tuple(self.pms.stack_symbols)

    # annotations for a node
    def _annotations(self, label, incoming):
        key = (label, incoming)
        out = self._ann.get(key)
        if out is not None:
            return out
        per_state = []
        for q in sorted(cod(incoming), key=repr):
            f = self.acg.delta(q, label)
            if self.reduced:
                models = minimal_models(f)
            else:
                atoms = self.acg.state_atoms[q]
                models = [frozenset(c) for r in range(len(atoms) + 1)
                          for c in itertools.combinations(atoms, r)
                          if satisfies(f, frozenset(c))]
            per_state.append([frozenset((q, a) for a in m) for m in models])
        out = [frozenset().union(*c) for c in itertools.product(*per_state)]
        out = list(dict.fromkeys(out))
        self._ann[key] = out
        return out

    def _pad(self, q, n):
        return tuple(((q, frozenset(), MK_BOT), ()) for _ in range(n))

    def _tuples(self, q, gamma, an, minimal):
        succ = next_successors(self.pms, q, gamma)
        k = len(succ)
        if classify_control(self.pms, q, gamma) == ENVIRONMENT:
            enabled = [frozenset(c) for r in range(1, k + 1)
                       for c in itertools.combinations(range(k), r)]
        else:
            enabled = [frozenset(range(k))]
        out = []
        for en in enabled:
            for parts in cons_tuples(self.pms, q, gamma, an, en, minimal):
                row = []
                for i, (q2, beta) in enumerate(succ):
                    if i in en:
                        row.append(((q2, parts[i], MK_TOP), tuple(beta)))
                    else:
                        row.append(((q, frozenset(), MK_BOT), ()))
                tup = tuple(row) + self._pad(q, self.arity - k)
                out.append(tup)
        return out

    def moves(self, state, top):
        key = (state, top)
        out = self._memo.get(key)
        if out is not None:
            return out
        q, incoming, mk = state
        out = []
        if mk in (MK_BOT, MK_TURN) and not incoming:
            out.append((BOT, self._pad(q, self.arity)))
        if mk in (MK_TOP, MK_TURN):
            base = self.pms.labels[q]
            for g in self._guesses:
                label = base | g
                for an in self._annotations(label, incoming):
                    letter = Letter(label, an, incoming)
                    for tup in self._tuples(q, top, an, self.reduced):
                        out.append((letter, tup))
        self._memo[key] = out
        return out

    def rho(self, state, letter, top):
        q, incoming, mk = state
        if letter == BOT:
            if mk in (MK_BOT, MK_TURN) and not incoming:
                return [self._pad(q, self.arity)]
            return []
        if mk not in (MK_TOP, MK_TURN):
            return []
        label, an, inc = letter
        if inc != incoming or label - frozenset(self.extra) != self.pms.labels[q]:
            return []
        if not annotation_ok(self.acg, label, an, incoming):
            return []
        return self._tuples(q, top, an, False)


def build_pwf(pms: Pms, acg: ParityAcg, extra=(), reduced=False) -> PwfNpta:
    pms.check_open()
    return PwfNpta(pms, acg, extra, reduced)


# ------------------------------------------------------------------- A_acc

ACC_SINK = ("sink",)


def build_acc_nta(dpw, k: int) -> ParityNta:
    """Run a deterministic word automaton along every non-bottom branch."""
    low = 0

    def rho(state, letter):
        if state == ACC_SINK or letter == BOT:
            return [(ACC_SINK,) * k]
        d, _ = state
        d2, c = dpw.step(d, letter)
        return [((d2, c),) * k]

    def color(state):
        return low if state == ACC_SINK else state[1]

    return ParityNta((dpw.initial, low), rho, color, k, set(dpw.colorset) | {low})


# ------------------------------------------------------------ intersection

class ParityConjunction:
    """Deterministic gadget turning a pair of parity colors into one.

    Memory holds, for each color level of the first component, the largest
    second-component color seen since the first component last reached
    that level or higher.
    """

    def __init__(self, colors1, colors2):
        self.levels = sorted(set(colors1))
        self.top2 = max(colors2) if colors2 else 0
        self.initial = (-1,) * len(self.levels)
        self.width = self.top2 + 2

    def step(self, mem, c1, c2):
        lv = self.levels.index(c1)
        acc = [max(x, c2) for x in mem]
        e = acc[lv]
        for i in range(lv + 1):
            acc[i] = -1
        if c1 % 2 == 1:
            key, bad = lv * self.width + self.width - 1, 1
        else:
            key, bad = lv * self.width + e, e % 2
        return tuple(acc), 2 * key + bad


class ProductNpta(ParityNpta):
    def __init__(self, p: ParityNpta, t: ParityNta):
        if p.arity != t.arity:
            raise CheckError(f"arity mismatch: {p.arity} vs {t.arity}", stage="intersect")
        self.p = p
        self.t = t
        self.arity = p.arity
        single = len(p.colorset) == 1 and min(p.colorset) % 2 == 0
        self.gadget = None if single else ParityConjunction(p.colorset, t.colorset)
        self.initial = self._make(p.initial, t.initial, self.gadget.initial if self.gadget else ())
        if self.gadget is None:
            self.colorset = frozenset(t.colorset)
        else:
            self.colorset = frozenset(self.gadget.step(self.gadget.initial, c1, c2)[1]
                                      for c1 in p.colorset for c2 in t.colorset)
        self._memo = {}

    def _make(self, ps, ts, mem):
        if self.gadget is None:
            return (ps, ts, (), self.t.color(ts))
        mem2, out = self.gadget.step(mem, self.p.color(ps), self.t.color(ts))
        return (ps, ts, mem2, out)

    def color(self, state):
        return state[3]

    def stack_symbols(self):
        return self.p.stack_symbols()

    def _combine(self, state, letter, tup):
        _, ts, mem, _ = state
        for ttup in self.t.rho(ts, letter):
            yield tuple((self._make(ps2, ts2, mem), w) for (ps2, w), ts2 in zip(tup, ttup))

    def moves(self, state, top):
        key = (state, top)
        out = self._memo.get(key)
        if out is None:
            out = []
            for letter, tup in self.p.moves(state[0], top):
                for t2 in self._combine(state, letter, tup):
                    out.append((letter, t2))
            self._memo[key] = out
        return out

    def rho(self, state, letter, top):
        out = []
        for tup in self.p.rho(state[0], letter, top):
            out.extend(self._combine(state, letter, tup))
        return out


def intersect(p: ParityNpta, t: ParityNta) -> ProductNpta:
    return ProductNpta(p, t)


def keep_label(letter):
    """Projection onto ``2^AP u {BOT}``: drop annotations and extra props."""
    return letter if letter == BOT else letter.label


class ProjectedNpta(ParityNpta):
    def __init__(self, p: ParityNpta, keep=keep_label):
        self.p = p
        self.keep = keep
        self.arity = p.arity
        self.initial = p.initial
        self.colorset = p.colorset
        self._memo = {}

    def color(self, state):
        return self.p.color(state)

    def stack_symbols(self):
        return self.p.stack_symbols()

    def moves(self, state, top):
        key = (state, top)
        out = self._memo.get(key)
        if out is None:
            out = list(dict.fromkeys((self.keep(a), tup) for a, tup in self.p.moves(state, top)))
            self._memo[key] = out
        return out

    def rho(self, state, letter, top):
        out = []
        for a, tup in self.moves(state, top):
            if a == letter and tup not in out:
                out.append(tup)
        return out


def project(p: ParityNpta, keep=keep_label) -> ProjectedNpta:
    return ProjectedNpta(p, keep)


def project_pwf_labels(extra):
    """Keep the label minus the extra propositions."""
    extra = frozenset(extra)

    def keep(letter):
        return letter if letter == BOT else letter.label - extra
    return keep


# ----------------------------------------------------- bounded membership

def accepts_prefix(p: ParityNpta, tree: dict, depth: int) -> bool:
    """Some run covers the tree up to ``depth`` (nodes are 1-based words).

    ``tree`` maps node words (tuples) to letters; the acceptance condition
    is not checked.
    """
    k = p.arity

    def run(state, stack, node):
        if len(node) >= depth:
            return True
        letter = tree[node]
        top = stack[0]
        for tup in p.rho(state, letter, top):
            ok = True
            for i, (s2, w) in enumerate(tup, start=1):
                st2 = tuple(w) + (stack if top == BOTTOM else stack[1:])
                if not st2:
                    ok = False
                    break
                if not run(s2, st2, node + (i,)):
                    ok = False
                    break
            if ok:
                return True
        return False

    if k == 0:
        return True
    return run(p.initial, (BOTTOM,), ())


# ------------------------------------------------------------------- stats

def explore(p: ParityNpta, limit=200_000):
    """Reachable states and transition statistics (for reporting)."""
    seen = {}
    tops = (BOTTOM,) + tuple(p.stack_symbols())
    order = [p.initial]
    seen[p.initial] = 0
    words = set()
    count = 0
    i = 0
    while i < len(order):
        s = order[i]
        i += 1
        for top in tops:
            for _, tup in p.moves(s, top):
                count += 1
                for s2, w in tup:
                    if w:
                        words.add(tuple(w))
                    if s2 not in seen:
                        seen[s2] = len(order)
                        order.append(s2)
                        if len(order) > limit:
                            raise CheckError(f"more than {limit} automaton states", stage="explore")
    colors = {p.color(s) for s in order}
    return {
        "states": len(order),
        "transitions": count,
        "push_words": len(words),
        "rho_norm": sum(len(w) for w in words),
        "index": len(colors),
    }


def dump(p: ParityNpta, limit=200) -> str:
    tops = (BOTTOM,) + tuple(p.stack_symbols())
    order = [p.initial]
    seen = {p.initial}
    lines = [f"NPTA arity={p.arity} initial={_fmt_state(p.initial)}"]
    i = 0
    while i < len(order) and i < limit:
        s = order[i]
        i += 1
        lines.append(f"state {_fmt_state(s)} color {p.color(s)}")
        for top in tops:
            for letter, tup in p.moves(s, top):
                kids = ", ".join(f"{_fmt_state(s2)}/{''.join(w) or 'e'}" for s2, w in tup)
                lines.append(f"  [{top}] {_fmt_letter(letter)} -> <{kids}>")
                for s2, _ in tup:
                    if s2 not in seen:
                        seen.add(s2)
                        order.append(s2)
    if i < len(order):
        lines.append(f"... ({len(order) - i} more states not shown)")
    return "\n".join(lines)


def _fmt_moves(an):
    return "{" + ", ".join(sorted(f"{q}->{a.state}:{a.mode}{sorted(a.agents)}" for q, a in an)) + "}"


def _fmt_letter(letter):
    if letter == BOT:
        return BOT
    if isinstance(letter, Letter):
        return f"({sorted(letter.label)}, {_fmt_moves(letter.an)}, {_fmt_moves(letter.incoming)})"
    return str(letter)


def _fmt_state(s):
    if isinstance(s, tuple) and len(s) == 3 and isinstance(s[1], frozenset):
        return f"({s[0]}, {_fmt_moves(s[1])}, {s[2]})"
    return str(s)
