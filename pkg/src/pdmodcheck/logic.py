"""ATL / ATL* syntax, parsing and explicit-state evaluation.

Concrete grammar (precedence: unary > U > & > | > ->)::

    phi ::= true | false | p | !phi | phi & phi | phi | phi | phi -> phi
          | X phi | F phi | G phi | phi U phi
          | <<a,b>> phi | [[a,b]] phi | E phi | A phi

``E`` stands for ``<<Ag>>`` and ``A`` for ``<<>>``; ``[[A]] phi`` is sugar
for ``!<<A>>!phi``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import FormulaSyntaxError, FragmentError, UnknownAgent, UnknownProposition


class Formula:
    __slots__ = ()

    def children(self):
        return ()

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Finally(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Globally(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Strat(Formula):
    agents: frozenset
    arg: Formula

    def children(self):
        return (self.arg,)


TRUE = TrueF()
FALSE = Not(TRUE)
TEMPORAL = (Next, Until, Finally, Globally)


# ------------------------------------------------------------------ parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<strat><<[^>]*>>)
  | (?P<dual>\[\[[^\]]*\]\])
  | (?P<arrow>->)
  | (?P<op>[!&|()])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)

_KEYWORDS = {"X", "U", "F", "G", "E", "A", "true", "false"}


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, agents, props):
        self.toks = _tokenize(text)
        self.i = 0
        self.agents = tuple(agents) if agents is not None else None
        self.props = set(props) if props is not None else None

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def parse(self):
        f = self.implication()
        kind, text, pos = self.peek()
        if kind != "eof":
            raise FormulaSyntaxError(f"unexpected {text!r}", pos)
        return f

    def implication(self):
        left = self.disjunction()
        if self.peek()[1] == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek()[1] == "|":
            self.take()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.until()
        while self.peek()[1] == "&":
            self.take()
            left = And(left, self.until())
        return left

    def until(self):
        left = self.unary()
        if self.peek()[1] == "U":
            self.take()
            return Until(left, self.until())
        return left

    def coalition(self, raw, pos):
        names = [x.strip() for x in raw.split(",") if x.strip()]
        if self.agents is not None:
            for a in names:
                if a not in self.agents:
                    raise UnknownAgent(f"unknown agent {a!r} at offset {pos}")
        return frozenset(names)

    def unary(self):
        kind, text, pos = self.take()
        if text == "!":
            return Not(self.unary())
        if text == "X":
            return Next(self.unary())
        if text == "F":
            return Finally(self.unary())
        if text == "G":
            return Globally(self.unary())
        if kind == "strat":
            return Strat(self.coalition(text[2:-2], pos), self.unary())
        if kind == "dual":
            return Not(Strat(self.coalition(text[2:-2], pos), Not(self.unary())))
        if text == "E":
            if self.agents is None:
                raise FormulaSyntaxError("'E' needs the agent signature", pos)
            return Strat(frozenset(self.agents), self.unary())
        if text == "A":
            return Strat(frozenset(), self.unary())
        if text == "(":
            f = self.implication()
            self.expect(")")
            return f
        if text == "true":
            return TRUE
        if text == "false":
            return FALSE
        if kind == "ident" and text not in _KEYWORDS:
            if self.props is not None and text not in self.props:
                raise UnknownProposition(f"unknown proposition {text!r} at offset {pos}")
            return Prop(text)
        raise FormulaSyntaxError(f"unexpected {text or 'end of input'!r}", pos)


def parse_formula(text: str, agents=None, props=None) -> Formula:
    """Parse ``text``; names are checked against ``agents``/``props`` when given."""
    return _Parser(text, agents, props).parse()


def parse_formula_file(text: str, agents=None, props=None) -> list:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse_formula(line, agents, props))
    return out


def pretty(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Not):
        return f"!{pretty(f.arg)}"
    if isinstance(f, And):
        return f"({pretty(f.left)} & {pretty(f.right)})"
    if isinstance(f, Or):
        return f"({pretty(f.left)} | {pretty(f.right)})"
    if isinstance(f, Implies):
        return f"({pretty(f.left)} -> {pretty(f.right)})"
    if isinstance(f, Until):
        return f"({pretty(f.left)} U {pretty(f.right)})"
    if isinstance(f, Next):
        return f"X {pretty(f.arg)}"
    if isinstance(f, Finally):
        return f"F {pretty(f.arg)}"
    if isinstance(f, Globally):
        return f"G {pretty(f.arg)}"
    if isinstance(f, Strat):
        return f"<<{','.join(sorted(f.agents))}>> {pretty(f.arg)}"
    raise TypeError(f)


# ---------------------------------------------------------- classification

def subformulas(f: Formula):
    """Post-order (children first), without duplicates."""
    seen = {}

    def walk(g):
        for c in g.children():
            walk(c)
        seen.setdefault(g, None)

    walk(f)
    return list(seen)


def size(f: Formula) -> int:
    return 1 + sum(size(c) for c in f.children())


def is_state_formula(f: Formula) -> bool:
    """Every temporal modality lies in the scope of a strategic quantifier."""
    if isinstance(f, TEMPORAL):
        return False
    if isinstance(f, Strat):
        return True
    return all(is_state_formula(c) for c in f.children())


def _strip_not(f):
    while isinstance(f, Not):
        f = f.arg
    return f


def is_atl(f: Formula) -> bool:
    """Temporal operators appear only directly under a quantifier (negations
    in between are allowed, e.g. ``<<A>>!X p``)."""
    def ok_state(g):
        if isinstance(g, TEMPORAL):
            return False
        if isinstance(g, Strat):
            body = _strip_not(g.arg)
            if isinstance(body, TEMPORAL):
                return all(ok_state(c) for c in body.children())
            return ok_state(body)
        return all(ok_state(c) for c in g.children())
    return ok_state(f)


def temporal_depth(f: Formula) -> int:
    own = 1 if isinstance(f, TEMPORAL) else 0
    return own + max((temporal_depth(c) for c in f.children()), default=0)


def only_next(f: Formula) -> bool:
    if isinstance(f, (Until, Finally, Globally)):
        return False
    return all(only_next(c) for c in f.children())


def agents_of(f: Formula) -> frozenset:
    out = set()
    for g in subformulas(f):
        if isinstance(g, Strat):
            out |= g.agents
    return frozenset(out)


def props_of(f: Formula) -> frozenset:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Prop))


def basic_subformulas(f: Formula) -> list:
    """All ``<<A>> psi`` subformulas, innermost first."""
    return [g for g in subformulas(f) if isinstance(g, Strat)]


def negate(f: Formula) -> Formula:
    return Not(f)


def simplify(f: Formula) -> Formula:
    """Double-negation elimination, applied everywhere."""
    if isinstance(f, Not) and isinstance(f.arg, Not):
        return simplify(f.arg.arg)
    if isinstance(f, (TrueF, Prop)):
        return f
    if isinstance(f, Strat):
        return Strat(f.agents, simplify(f.arg))
    return type(f)(*(simplify(c) for c in f.children()))


# -------------------------------------------------------------- evaluation

def coalition_choices(agents, options, coalition):
    """Group ``(decision, successor)`` options by the coalition's sub-decision.

    Returns ``{d_A: [successors]}`` over available A-decisions.
    """
    idx = [i for i, a in enumerate(agents) if a in coalition]
    groups = {}
    for d, succ in options:
        key = tuple(d[i] for i in idx)
        bucket = groups.setdefault(key, [])
        if succ not in bucket:
            bucket.append(succ)
    return groups


def normalize_path(body: Formula):
    """Push negations through a single temporal operator.

    Returns ``(kind, operands)`` with kind in next/until/release/state.
    """
    neg = False
    while isinstance(body, Not):
        neg = not neg
        body = body.arg
    if isinstance(body, Next):
        return "next", (Not(body.arg) if neg else body.arg,)
    if isinstance(body, Finally):
        body = Until(TRUE, body.arg)
    if isinstance(body, Globally):
        # G a == false R a;  !G a == true U !a
        if neg:
            return "until", (TRUE, Not(body.arg))
        return "release", (FALSE, body.arg)
    if isinstance(body, Until):
        if neg:
            return "release", (Not(body.left), Not(body.right))
        return "until", (body.left, body.right)
    if is_state_formula(body):
        return "state", (Not(body) if neg else body,)
    raise FragmentError(f"path formula {pretty(body)} is outside ATL")


def eval_finite(g, phi: Formula, horizon: Optional[int] = None) -> dict:
    """Satisfaction of ``phi`` at every state (FiniteCgs) or node (PrunedTree).

    On a FiniteCgs ``phi`` must be an ATL state formula; strategic modalities
    are evaluated with controllable-predecessor fixpoints.  On a PrunedTree
    only next-time modalities are allowed, and the result covers the nodes
    whose depth plus the formula's next-nesting fits in the tree.
    """
    from .system_model import PrunedTree
    if not is_state_formula(phi):
        raise FragmentError("only state formulas can be evaluated")
    if isinstance(g, PrunedTree):
        return _eval_tree(g, phi, horizon)
    if not is_atl(phi):
        raise FragmentError("finite-CGS evaluation supports ATL formulas only")
    sat = _eval_cgs(g, phi, {})
    return {s: s in sat for s in g.states}


def holds(g, phi: Formula, horizon: Optional[int] = None) -> bool:
    """Verdict at the initial state / root."""
    from .system_model import PrunedTree
    res = eval_finite(g, phi, horizon)
    return res[()] if isinstance(g, PrunedTree) else res[g.initial]


def _cpre(g, coalition, target):
    out = set()
    for s in g.states:
        for succs in coalition_choices(g.agents, g.options(s), coalition).values():
            if all(t in target for t in succs):
                out.add(s)
                break
    return out


def _eval_cgs(g, f, memo):
    if f in memo:
        return memo[f]
    allst = set(g.states)
    if isinstance(f, TrueF):
        res = allst
    elif isinstance(f, Prop):
        res = {s for s in g.states if f.name in g.label(s)}
    elif isinstance(f, Not):
        res = allst - _eval_cgs(g, f.arg, memo)
    elif isinstance(f, And):
        res = _eval_cgs(g, f.left, memo) & _eval_cgs(g, f.right, memo)
    elif isinstance(f, Or):
        res = _eval_cgs(g, f.left, memo) | _eval_cgs(g, f.right, memo)
    elif isinstance(f, Implies):
        res = (allst - _eval_cgs(g, f.left, memo)) | _eval_cgs(g, f.right, memo)
    elif isinstance(f, Strat):
        kind, ops = normalize_path(f.arg)
        if kind == "state":
            res = _eval_cgs(g, ops[0], memo)
        elif kind == "next":
            res = _cpre(g, f.agents, _eval_cgs(g, ops[0], memo))
        elif kind == "until":
            a, b = (_eval_cgs(g, x, memo) for x in ops)
            z = set()
            while True:
                nz = b | (a & _cpre(g, f.agents, z))
                if nz == z:
                    break
                z = nz
            res = z
        else:  # release: nu Z. b & (a | CPre(Z))
            a, b = (_eval_cgs(g, x, memo) for x in ops)
            z = set(allst)
            while True:
                nz = b & (a | _cpre(g, f.agents, z))
                if nz == z:
                    break
                z = nz
            res = z
    else:
        raise FragmentError(f"unexpected path operator in {pretty(f)}")
    memo[f] = res
    return res


def _eval_tree(tree, phi, horizon):
    need = temporal_depth(phi)
    if not only_next(phi):
        raise FragmentError("tree evaluation supports next-time modalities only")
    if horizon is not None and need > horizon:
        raise FragmentError(f"next-nesting {need} exceeds horizon {horizon}")
    if need > tree.depth:
        raise FragmentError(f"next-nesting {need} exceeds tree depth {tree.depth}")
    memo = {}

    def ev(node, f):
        key = (node.track, f)
        if key in memo:
            return memo[key]
        if isinstance(f, TrueF):
            r = True
        elif isinstance(f, Prop):
            r = f.name in node.label
        elif isinstance(f, Not):
            r = not ev(node, f.arg)
        elif isinstance(f, And):
            r = ev(node, f.left) and ev(node, f.right)
        elif isinstance(f, Or):
            r = ev(node, f.left) or ev(node, f.right)
        elif isinstance(f, Implies):
            r = (not ev(node, f.left)) or ev(node, f.right)
        elif isinstance(f, Strat):
            r = win(node, f.agents, f.arg)
        else:
            raise FragmentError(f"unexpected path operator in {pretty(f)}")
        memo[key] = r
        return r

    def shift(node, f):
        """``True``/``False`` or ``g`` with ``f == X g`` at ``node``."""
        if is_state_formula(f):
            return ev(node, f)
        if isinstance(f, Next):
            return f.arg
        if isinstance(f, Not):
            a = shift(node, f.arg)
            return (not a) if isinstance(a, bool) else Not(a)
        if isinstance(f, (And, Or, Implies)):
            a, b = shift(node, f.left), shift(node, f.right)
            if isinstance(f, Implies):
                a = (not a) if isinstance(a, bool) else Not(a)
            if isinstance(f, And):
                if a is False or b is False:
                    return False
                if a is True or b is True:
                    return b if a is True else a
                return And(a, b)
            if a is True or b is True:
                return True
            if a is False or b is False:
                return b if a is False else a
            return Or(a, b)
        raise FragmentError(f"unexpected path operator in {pretty(f)}")

    def win(node, coalition, path):
        # a Boolean combination of next-formulas is itself a next-formula,
        # and on a tree the coalition may choose afresh at every node
        key = (node.track, coalition, path)
        if key in memo:
            return memo[key]
        rest = shift(node, path)
        if isinstance(rest, bool):
            r = rest
        else:
            if not node.expanded:
                raise FragmentError("formula reaches beyond the unwinding depth")
            kids = node.child_map()
            live = [(d, i) for d, i in node.options if i in kids]
            groups = coalition_choices(tree.agents, live, coalition)
            r = any(all(win(kids[i], coalition, rest) for i in succ)
                    for succ in groups.values())
        memo[key] = r
        return r

    out = {}
    for node in tree.nodes():
        if len(node.track) + need <= tree.depth:
            out[node.track] = ev(node, phi)
    return out


# -------------------------------------------------------- LTL on lassos

def eval_ltl_lasso(psi: Formula, prefix, cycle) -> bool:
    """Truth of an LTL formula at position 0 of ``prefix . cycle^omega``.

    Letters are proposition sets.  Quantifier-free formulas only.
    """
    word = list(prefix) + list(cycle)
    n = len(word)
    if not cycle:
        raise ValueError("cycle must be nonempty")
    loop = len(prefix)

    def succ(i):
        return i + 1 if i + 1 < n else loop

    cache = {}

    def sat(f):
        if f in cache:
            return cache[f]
        if isinstance(f, TrueF):
            r = [True] * n
        elif isinstance(f, Prop):
            r = [f.name in word[i] for i in range(n)]
        elif isinstance(f, Not):
            r = [not x for x in sat(f.arg)]
        elif isinstance(f, And):
            a, b = sat(f.left), sat(f.right)
            r = [x and y for x, y in zip(a, b)]
        elif isinstance(f, Or):
            a, b = sat(f.left), sat(f.right)
            r = [x or y for x, y in zip(a, b)]
        elif isinstance(f, Implies):
            a, b = sat(f.left), sat(f.right)
            r = [(not x) or y for x, y in zip(a, b)]
        elif isinstance(f, Next):
            a = sat(f.arg)
            r = [a[succ(i)] for i in range(n)]
        elif isinstance(f, (Until, Finally)):
            a = [True] * n if isinstance(f, Finally) else sat(f.left)
            b = sat(f.arg if isinstance(f, Finally) else f.right)
            r = [False] * n
            changed = True
            while changed:
                changed = False
                for i in range(n):
                    v = b[i] or (a[i] and r[succ(i)])
                    if v and not r[i]:
                        r[i] = True
                        changed = True
        elif isinstance(f, Globally):
            a = sat(f.arg)
            r = [True] * n
            changed = True
            while changed:
                changed = False
                for i in range(n):
                    v = a[i] and r[succ(i)]
                    if not v and r[i]:
                        r[i] = False
                        changed = True
        else:
            raise FragmentError("strategic quantifiers are not LTL")
        cache[f] = r
        return r

    return sat(psi)[0]
