"""Nondeterministic and deterministic omega-word automata.

All automata are lazy: ``step(state, letter)`` is computed on demand and
memoized, so they work over huge structured alphabets.

Conventions:

* ``Nbw``: transition-based Buchi; ``step`` yields ``(next, accepting)``.
* ``CoParityNw``: state colors; a run is accepting iff the highest color
  visited infinitely often is odd.
* ``Dpw``: deterministic, transition colors, max-even acceptance.
"""
from __future__ import annotations

import itertools

from . import logic as L
from .errors import SizeGuard


class Nbw:
    def __init__(self, initial, step_fn, props=frozenset(), name="nbw"):
        self.initial = tuple(initial)
        self._step = step_fn
        self._memo = {}
        self.props = frozenset(props)
        self.name = name

    def step(self, state, letter):
        key = (state, letter)
        out = self._memo.get(key)
        if out is None:
            out = tuple(dict.fromkeys(self._step(state, letter)))
            self._memo[key] = out
        return out

    def explore(self, letters):
        seen = list(dict.fromkeys(self.initial))
        idx = {s: i for i, s in enumerate(seen)}
        i = 0
        while i < len(seen):
            for a in letters:
                for t, _ in self.step(seen[i], a):
                    if t not in idx:
                        idx[t] = len(seen)
                        seen.append(t)
            i += 1
        return seen


class CoParityNw:
    def __init__(self, initial, step_fn, color_fn, colorset, name="coparity"):
        self.initial = tuple(initial)
        self._step = step_fn
        self.color = color_fn
        self.colorset = frozenset(colorset)
        self._memo = {}
        self.name = name

    def step(self, state, letter):
        key = (state, letter)
        out = self._memo.get(key)
        if out is None:
            out = tuple(dict.fromkeys(self._step(state, letter)))
            self._memo[key] = out
        return out

    @property
    def index(self):
        return len(self.colorset)


class Dpw:
    def __init__(self, initial, step_fn, colorset, props=frozenset(), name="dpw"):
        self.initial = initial
        self._step = step_fn
        self._memo = {}
        self.colorset = frozenset(colorset)
        self.props = frozenset(props)
        self.name = name

    def step(self, state, letter):
        key = (state, letter)
        out = self._memo.get(key)
        if out is None:
            out = self._step(state, letter)
            self._memo[key] = out
        return out

    @property
    def index(self):
        return len(self.colorset)

    def explore(self, letters, cap=None):
        seen = [self.initial]
        idx = {self.initial: 0}
        i = 0
        while i < len(seen):
            for a in letters:
                t, _ = self.step(seen[i], a)
                if t not in idx:
                    idx[t] = len(seen)
                    seen.append(t)
                    if cap is not None and len(seen) > cap:
                        raise SizeGuard(f"{self.name}: more than {cap} states",
                                        measured=len(seen), stage="determinize")
            i += 1
        return seen

    def observed_colors(self, letters, cap=None):
        return {self.step(s, a)[1] for s in self.explore(letters, cap) for a in letters}

    def complement(self) -> "Dpw":
        def step(s, a):
            t, c = self.step(s, a)
            return t, c + 1
        return Dpw(self.initial, step, {c + 1 for c in self.colorset}, self.props,
                   name="co-" + self.name)

    def dump(self, letters, cap=None) -> str:
        states = self.explore(letters, cap)
        num = {s: i for i, s in enumerate(states)}
        lines = [f"DPW {self.name}: states={len(states)} colors={sorted(self.colorset)}",
                 "initial: d0"]
        for s in states:
            for a in letters:
                t, c = self.step(s, a)
                lines.append(f"  d{num[s]} --{_letter_str(a)}--> d{num[t]} [color {c}]")
        return "\n".join(lines)


def _letter_str(a):
    if isinstance(a, frozenset):
        return "{" + ",".join(sorted(map(str, a))) + "}"
    return str(a)


# --------------------------------------------------- co-parity -> Buchi

def coparity_to_buchi(b: CoParityNw) -> Nbw:
    """Guess the odd color that is the highest one seen infinitely often.

    States are ``("pre", s)`` and ``(c, s)`` with ``c`` odd; in phase ``c``
    only colors <= c are allowed, and entering color ``c`` is accepting.
    """
    odds = sorted(c for c in set(b.colorset) | {c + 1 for c in b.colorset} if c % 2 == 1)

    def step(state, letter):
        if state[0] == "pre":
            for t in b.step(state[1], letter):
                yield ("pre", t), False
                ct = b.color(t)
                for c in odds:
                    if c >= ct:
                        yield (c, t), ct == c
        else:
            c, s = state
            for t in b.step(s, letter):
                ct = b.color(t)
                if ct <= c:
                    yield (c, t), ct == c

    init = []
    for s in b.initial:
        init.append(("pre", s))
        for c in odds:
            if c >= b.color(s):
                init.append((c, s))
    return Nbw(init, step, name="buchi(" + b.name + ")")


# ----------------------------------------------------- determinization

def determinize(n: Nbw, cap=None) -> Dpw:
    """History-tree determinization of a transition-based Buchi automaton.

    A state is a tuple of ``(label, parent)`` nodes in age order (root
    first, parents older than children).  Colors follow the usual
    green/red rule: the oldest node involved in an event decides, and a removal
    of a node outranks it turning green.
    """
    initial_label = frozenset(n.initial)
    init = ((initial_label, -1),) if initial_label else ()

    limit = cap or 512
    top = 4 * limit + 6

    def step(state, letter):
        labels = []
        parents = []
        fresh = []
        for lab, par in state:
            succ = set()
            acc = set()
            for s in lab:
                for t, ok in n.step(s, letter):
                    succ.add(t)
                    if ok:
                        acc.add(t)
            labels.append(succ)
            parents.append(par)
            fresh.append(acc)
        old = len(labels)
        for v in range(old):
            if fresh[v]:
                labels.append(set(fresh[v]))
                parents.append(v)
        m = len(labels)
        if old > limit:
            raise SizeGuard(f"history tree with {old} nodes", measured=old, stage="determinize")
        children = [[] for _ in range(m)]
        for v in range(m):
            if parents[v] >= 0:
                children[parents[v]].append(v)
        # horizontal merge: a state stays only in the oldest branch
        for v in range(m):
            p = parents[v]
            if p >= 0:
                labels[v] &= labels[p]
                for w in children[p]:
                    if w == v:
                        break
                    labels[v] -= labels[w]
        alive = [bool(labels[v]) for v in range(m)]
        for v in range(m):
            if parents[v] >= 0 and not alive[parents[v]]:
                alive[v] = False
        red = [v for v in range(old) if not alive[v]]
        green = []
        for v in range(m):
            if not alive[v]:
                continue
            kids = [w for w in children[v] if alive[w]]
            if kids:
                union = set().union(*(labels[w] for w in kids))
                if union == labels[v]:
                    green.append(v)
                    stack = list(kids)
                    while stack:
                        w = stack.pop()
                        if alive[w] and w < old:
                            red.append(w)
                        alive[w] = False
                        stack.extend(children[w])
        r = min(red) if red else None
        g = min(green) if green else None
        if r is not None and (g is None or r <= g):
            cmin = 2 * r + 1
        elif g is not None:
            cmin = 2 * g + 2
        else:
            cmin = top - 1
        rename = {}
        out = []
        for v in range(m):
            if alive[v]:
                rename[v] = len(out)
                out.append((frozenset(labels[v]), rename[parents[v]] if parents[v] >= 0 else -1))
        return tuple(out), top - cmin

    return Dpw(init, step, range(1, top + 1), n.props, name="det(" + n.name + ")")


def codeterminize(b, cap=None) -> Dpw:
    """DPW for the complement of a co-parity or Buchi automaton."""
    nbw = coparity_to_buchi(b) if isinstance(b, CoParityNw) else b
    return determinize(nbw, cap).complement()


# ------------------------------------------------------------ LTL -> NBW

def _nnf(f, pos=True):
    """Negation normal form over true/false/lit/and/or/X/U/R tuples."""
    if isinstance(f, L.TrueF):
        return ("t",) if pos else ("f",)
    if isinstance(f, L.Prop):
        return ("lit", f.name, pos)
    if isinstance(f, L.Not):
        return _nnf(f.arg, not pos)
    if isinstance(f, L.And):
        return ("and" if pos else "or", _nnf(f.left, pos), _nnf(f.right, pos))
    if isinstance(f, L.Or):
        return ("or" if pos else "and", _nnf(f.left, pos), _nnf(f.right, pos))
    if isinstance(f, L.Implies):
        return ("or" if pos else "and", _nnf(f.left, not pos), _nnf(f.right, pos))
    if isinstance(f, L.Next):
        return ("X", _nnf(f.arg, pos))
    if isinstance(f, L.Finally):
        return ("U" if pos else "R", ("t",) if pos else ("f",), _nnf(f.arg, pos))
    if isinstance(f, L.Globally):
        return ("R" if pos else "U", ("f",) if pos else ("t",), _nnf(f.arg, pos))
    if isinstance(f, L.Until):
        if pos:
            return ("U", _nnf(f.left), _nnf(f.right))
        return ("R", _nnf(f.left, False), _nnf(f.right, False))
    raise ValueError(f"not an LTL formula: {L.pretty(f)}")


def _untils(f, acc=None):
    acc = [] if acc is None else acc
    if f[0] == "U" and f not in acc:
        acc.append(f)
    for c in f[1:]:
        if isinstance(c, tuple):
            _untils(c, acc)
    return acc


def _expand(obligations):
    """Tableau expansion: list of ``(pos, neg, next, fulfilled_untils)``."""
    out = []

    def go(todo, pos, neg, nxt, done):
        if not todo:
            out.append((frozenset(pos), frozenset(neg), frozenset(nxt), frozenset(done)))
            return
        f, rest = todo[0], todo[1:]
        tag = f[0]
        if tag == "t":
            go(rest, pos, neg, nxt, done)
        elif tag == "f":
            return
        elif tag == "lit":
            if f[2]:
                if f[1] not in neg:
                    go(rest, pos | {f[1]}, neg, nxt, done)
            elif f[1] not in pos:
                go(rest, pos, neg | {f[1]}, nxt, done)
        elif tag == "and":
            go([f[1], f[2]] + rest, pos, neg, nxt, done)
        elif tag == "or":
            go([f[1]] + rest, pos, neg, nxt, done)
            go([f[2]] + rest, pos, neg, nxt, done)
        elif tag == "X":
            go(rest, pos, neg, nxt if f[1] == ("t",) else nxt | {f[1]}, done)
        elif tag == "U":
            go([f[2]] + rest, pos, neg, nxt, done | {f})
            go([f[1]] + rest, pos, neg, nxt | {f}, done)
        elif tag == "R":
            go([f[1], f[2]] + rest, pos, neg, nxt, done)
            go([f[2]] + rest, pos, neg, nxt | {f}, done)

    go(sorted(obligations, key=repr), frozenset(), frozenset(), frozenset(), frozenset())
    return out


def ltl_to_nbw(psi: L.Formula) -> Nbw:
    """Transition-based Buchi automaton for an LTL formula (props as letters).

    States are ``(obligations, counter)``; the counter degeneralizes the
    one-acceptance-set-per-until condition.
    """
    root = _nnf(psi)
    untils = _untils(root)
    m = len(untils)
    cache = {}

    def expansions(obl):
        v = cache.get(obl)
        if v is None:
            v = _expand(obl)
            cache[obl] = v
        return v

    def step(state, letter):
        obl, i = state
        for pos, neg, nxt, done in expansions(obl):
            if not pos <= letter or neg & letter:
                continue
            if m == 0:
                yield (nxt, 0), True
                continue
            j = i
            while j < m and (untils[j] not in obl or untils[j] in done):
                j += 1
            if j == m:
                yield (nxt, 0), True
            else:
                yield (nxt, j), False

    init = frozenset() if root == ("t",) else frozenset([root])
    return Nbw([(init, 0)], step, L.props_of(psi), name=L.pretty(psi))


def ltl_to_dpw(psi: L.Formula, cap=None) -> Dpw:
    d = determinize(ltl_to_nbw(psi), cap)
    d.props = L.props_of(psi)
    return d


# ---------------------------------------------------------- lasso checks

def _lasso_positions(prefix, cycle):
    word = list(prefix) + list(cycle)
    p = len(prefix)

    def nxt(i):
        return i + 1 if i + 1 < len(word) else p
    return word, nxt


def nbw_accepts_lasso(n: Nbw, prefix, cycle) -> bool:
    """Exists an accepting run on ``prefix . cycle^omega``."""
    word, nxt = _lasso_positions(prefix, cycle)
    start = [(s, 0) for s in n.initial]
    edges = {}
    seen = set(start)
    todo = list(start)
    while todo:
        s, i = todo.pop()
        out = [((t, nxt(i)), ok) for t, ok in n.step(s, word[i])]
        edges[(s, i)] = out
        for v, _ in out:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return _accepting_cycle(seen, edges)


def _accepting_cycle(nodes, edges):
    """Some cycle through an accepting edge in the reachable graph."""
    for u in nodes:
        for v, ok in edges.get(u, ()):
            if ok and _reaches(edges, v, u):
                return True
    return False


def _reaches(edges, a, b):
    seen = {a}
    todo = [a]
    while todo:
        u = todo.pop()
        if u == b:
            return True
        for v, _ in edges.get(u, ()):
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return False


def coparity_accepts_lasso(b: CoParityNw, prefix, cycle) -> bool:
    word, nxt = _lasso_positions(prefix, cycle)
    start = [(s, 0) for s in b.initial]
    edges = {}
    seen = set(start)
    todo = list(start)
    while todo:
        s, i = todo.pop()
        out = [(t, nxt(i)) for t in b.step(s, word[i])]
        edges[(s, i)] = out
        for v in out:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    for c in sorted(x for x in b.colorset if x % 2 == 1):
        sub = {u: [(v, b.color(v[0]) == c) for v in edges.get(u, ()) if b.color(v[0]) <= c]
               for u in seen if b.color(u[0]) <= c}
        if _accepting_cycle(sub.keys(), sub):
            return True
    return False


def dpw_accepts_lasso(d: Dpw, prefix, cycle) -> bool:
    word, nxt = _lasso_positions(prefix, cycle)
    state, i = d.initial, 0
    seen = {}
    colors = []
    while (state, i) not in seen:
        seen[(state, i)] = len(colors)
        state2, c = d.step(state, word[i])
        colors.append(c)
        state, i = state2, nxt(i)
    loop = colors[seen[(state, i)]:]
    return max(loop) % 2 == 0


def all_letters(props):
    props = sorted(props)
    return [frozenset(c) for r in range(len(props) + 1) for c in itertools.combinations(props, r)]


# ----------------------------------------------------- violation automaton

def build_violation_nw(acg, root_move) -> CoParityNw:
    """Co-parity automaton over annotated letters that guesses a path of
    moves along which the ACG run violates its parity condition.

    Letters are ``(label, annotation, incoming)``; the bottom letter has no
    transitions.  States are moves; the color of a move is the color of its
    source state.
    """
    low = min(acg.colors.values())

    def color(eta):
        return low if eta is root_move else acg.colors[eta[0]]

    def step(eta, letter):
        if not isinstance(letter, tuple):
            return
        _, an, incoming = letter
        if eta not in incoming:
            return
        target = eta[1].state
        for mv in an:
            if mv[0] == target:
                yield mv

    return CoParityNw([root_move], step, color, set(acg.colors.values()) | {low},
                      name="violation")
