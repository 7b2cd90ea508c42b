"""Parity alternating automata over concurrent game structures (ACG).

Transitions are positive Boolean formulas over atoms ``(q, box|dia, A)``
whose leaves may also test the current letter (a proposition set).  They are
stored as templates and instantiated per letter, so letters are never
materialized as a ``2^AP`` table.

Template syntax (nested tuples)::

    ("t",) | ("f",) | ("lit", p, positive) | ("atom", Atom)
    | ("and", (t1, t2, ...)) | ("or", (t1, t2, ...))

An instantiated formula is ``True``, ``False``, an :class:`Atom`, or
``("and"|"or", (children...))`` over those.
"""
from __future__ import annotations

import itertools
from collections import namedtuple

from . import logic as L
from .errors import BudgetExceeded, FragmentError, NotAtl, SizeGuard
from .games import ParityGame, solve_parity_game

BOX = "box"
DIA = "dia"

Atom = namedtuple("Atom", "state mode agents")


def atom_str(a: Atom) -> str:
    sym = "[]" if a.mode == BOX else "<>"
    return f"({a.state}, {sym}, {{{','.join(sorted(a.agents))}}})"


# ------------------------------------------------ positive Boolean formulas

T_TRUE = ("t",)
T_FALSE = ("f",)


def _junction(tag, unit, zero, parts):
    flat = []
    for p in parts:
        if p == zero:
            return zero
        if p == unit:
            continue
        for c in (p[1] if p[0] == tag else (p,)):
            if c not in flat:
                flat.append(c)
    if not flat:
        return unit
    return flat[0] if len(flat) == 1 else (tag, tuple(flat))


def t_and(*parts):
    return _junction("and", T_TRUE, T_FALSE, parts)


def t_or(*parts):
    return _junction("or", T_FALSE, T_TRUE, parts)


def instantiate(template, letter):
    tag = template[0]
    if tag == "t":
        return True
    if tag == "f":
        return False
    if tag == "lit":
        return (template[1] in letter) == template[2]
    if tag == "atom":
        return template[1]
    parts = []
    if tag == "and":
        for c in template[1]:
            v = instantiate(c, letter)
            if v is False:
                return False
            if v is not True and v not in parts:
                parts.append(v)
        if not parts:
            return True
    else:
        for c in template[1]:
            v = instantiate(c, letter)
            if v is True:
                return True
            if v is not False and v not in parts:
                parts.append(v)
        if not parts:
            return False
    return parts[0] if len(parts) == 1 else (tag, tuple(parts))


def satisfies(formula, model) -> bool:
    """Whether the atom set ``model`` satisfies an instantiated formula."""
    if formula is True or formula is False:
        return formula
    if isinstance(formula, Atom):
        return formula in model
    tag, parts = formula
    if tag == "and":
        return all(satisfies(p, model) for p in parts)
    return any(satisfies(p, model) for p in parts)


def formula_atoms(formula):
    if formula is True or formula is False:
        return set()
    if isinstance(formula, Atom):
        return {formula}
    out = set()
    for p in formula[1]:
        out |= formula_atoms(p)
    return out


def minimal_models(formula) -> list:
    """Inclusion-minimal atom sets satisfying an instantiated formula."""
    if formula is True:
        return [frozenset()]
    if formula is False:
        return []
    if isinstance(formula, Atom):
        return [frozenset([formula])]
    tag, parts = formula
    if tag == "or":
        cands = [m for p in parts for m in minimal_models(p)]
    else:
        cands = [frozenset()]
        for p in parts:
            cands = [a | b for a in cands for b in minimal_models(p)]
    cands = set(cands)
    return sorted((m for m in cands if not any(o < m for o in cands)),
                  key=lambda m: (len(m), sorted(map(repr, m))))


def template_atoms(template):
    tag = template[0]
    if tag == "atom":
        return [template[1]]
    if tag in ("and", "or"):
        out = []
        for c in template[1]:
            for a in template_atoms(c):
                if a not in out:
                    out.append(a)
        return out
    return []


def dual_template(template):
    tag = template[0]
    if tag == "t":
        return T_FALSE
    if tag == "f":
        return T_TRUE
    if tag == "lit":
        return ("lit", template[1], not template[2])
    if tag == "atom":
        a = template[1]
        return ("atom", Atom(a.state, DIA if a.mode == BOX else BOX, a.agents))
    return ("or" if tag == "and" else "and", tuple(dual_template(c) for c in template[1]))


def template_str(template) -> str:
    tag = template[0]
    if tag == "t":
        return "true"
    if tag == "f":
        return "false"
    if tag == "lit":
        return template[1] if template[2] else "!" + template[1]
    if tag == "atom":
        return atom_str(template[1])
    op = " & " if tag == "and" else " | "
    return "(" + op.join(template_str(c) for c in template[1]) + ")"


# ---------------------------------------------------------------- automaton

class ParityAcg:
    """``states`` are hashable names; ``templates[q]`` gives delta(q, .)."""

    def __init__(self, states, initial, templates, colors, props=(), extra_props=()):
        self.states = tuple(states)
        self.initial = initial
        self.templates = dict(templates)
        self.colors = dict(colors)
        self.props = frozenset(props)
        self.extra_props = tuple(extra_props)
        self._cache = {}
        atoms = []
        for q in self.states:
            for a in template_atoms(self.templates[q]):
                if a not in atoms:
                    atoms.append(a)
        self.atoms = tuple(atoms)
        self.state_atoms = {q: tuple(template_atoms(self.templates[q])) for q in self.states}
        for a in self.atoms:
            if a.state not in self.templates:
                raise ValueError(f"atom {a} targets an unknown state")

    def delta(self, q, letter):
        key = (q, letter)
        v = self._cache.get(key)
        if v is None:
            v = instantiate(self.templates[q], letter)
            self._cache[key] = v
        return v

    @property
    def index(self) -> int:
        return len(set(self.colors.values()))

    @property
    def size(self) -> int:
        return len(self.states) + len(self.atoms)

    def moves(self):
        """Relevant ``(state, atom)`` pairs: atoms that occur in delta(state, .)."""
        return tuple((q, a) for q in self.states for a in self.state_atoms[q])

    def dump(self) -> str:
        lines = [f"ACG states={len(self.states)} atoms={len(self.atoms)} index={self.index}",
                 f"initial: {self.initial}"]
        for q in self.states:
            lines.append(f"  {q} [color {self.colors[q]}]: {template_str(self.templates[q])}")
        if self.extra_props:
            lines.append("extra propositions: " + ", ".join(self.extra_props))
        return "\n".join(lines)

    def __repr__(self):
        return f"ParityAcg(states={len(self.states)}, atoms={len(self.atoms)}, index={self.index})"


def dualize(a: ParityAcg) -> ParityAcg:
    """Complement: swap and/or, true/false, box/dia and shift colors by one."""
    return ParityAcg(a.states, a.initial,
                     {q: dual_template(t) for q, t in a.templates.items()},
                     {q: c + 1 for q, c in a.colors.items()}, a.props, a.extra_props)


def _prune(states, initial, templates, colors, **kw):
    reach = [initial]
    i = 0
    while i < len(reach):
        for at in template_atoms(templates[reach[i]]):
            if at.state not in reach:
                reach.append(at.state)
        i += 1
    order = [q for q in states if q in reach]
    return ParityAcg(order, initial, {q: templates[q] for q in order},
                     {q: colors[q] for q in order}, **kw)


# ------------------------------------------------------------- ATL -> ACG

LFP_COLOR = 1
GFP_COLOR = 2


def atl_to_acg(phi: L.Formula, props=None) -> ParityAcg:
    """Linear translation of an ATL state formula.

    One state per (subformula, polarity) that needs its own copy: operands
    of next-time modalities and the fixpoint modalities themselves.
    Until-type (least fixpoint) states get an odd color, all others even.
    """
    if not L.is_state_formula(phi) or not L.is_atl(phi):
        raise NotAtl(f"{L.pretty(phi)} is not an ATL state formula", stage="translate")
    states = []
    templates = {}
    colors = {}

    def name_of(f, pos):
        return ("+" if pos else "-") + L.pretty(f)

    def state_for(f, pos, fix=None):
        """Register a state whose delta is the template of ``f`` (with polarity)."""
        if fix is None:
            g, p = f, pos
            while isinstance(g, L.Not):
                g, p = g.arg, not p
            if isinstance(g, L.Strat) and L.normalize_path(g.arg)[0] in ("until", "release"):
                tmpl(g, p)
                return "@" + name_of(g, p)
            q = name_of(f, pos)
        else:
            q = "@" + name_of(f, pos)
        if q in templates:
            return q
        states.append(q)
        templates[q] = None  # reserve before recursing (self loops)
        colors[q] = GFP_COLOR
        if fix is None:
            templates[q] = tmpl(f, pos)
        else:
            kind, a, b, agents, mode = fix
            loop = ("atom", Atom(q, mode, agents))
            if kind == "until":
                templates[q] = t_or(tmpl(b, True), t_and(tmpl(a, True), loop))
                colors[q] = LFP_COLOR
            else:
                templates[q] = t_and(tmpl(b, True), t_or(tmpl(a, True), loop))
        return q

    def tmpl(f, pos):
        if isinstance(f, L.TrueF):
            return T_TRUE if pos else T_FALSE
        if isinstance(f, L.Prop):
            return ("lit", f.name, pos)
        if isinstance(f, L.Not):
            return tmpl(f.arg, not pos)
        if isinstance(f, L.And):
            return (t_and if pos else t_or)(tmpl(f.left, pos), tmpl(f.right, pos))
        if isinstance(f, L.Or):
            return (t_or if pos else t_and)(tmpl(f.left, pos), tmpl(f.right, pos))
        if isinstance(f, L.Implies):
            return (t_or if pos else t_and)(tmpl(f.left, not pos), tmpl(f.right, pos))
        if isinstance(f, L.Strat):
            kind, ops = L.normalize_path(f.arg)
            mode = BOX if pos else DIA
            if kind == "state":
                return tmpl(ops[0], pos)
            if kind == "next":
                target = state_for(ops[0], pos)
                return ("atom", Atom(target, mode, f.agents))
            a, b = ops
            if not pos:
                # dual: negated until is a release of negations and vice versa
                kind = "release" if kind == "until" else "until"
                a, b = L.Not(a), L.Not(b)
            q = state_for(f, pos, (kind, a, b, f.agents, mode))
            return templates[q]
        raise NotAtl(f"unexpected operator in {L.pretty(f)}")

    init = state_for(phi, True)
    return _prune(states, init, templates, colors,
                  props=props if props is not None else L.props_of(phi))


# ------------------------------------------------------------ ATL* tier

def bprop(i: int) -> str:
    return f"__b{i}"


def atlstar_to_acg(phi: L.Formula, props=None, budget: int = 64) -> ParityAcg:
    """ACG over ``2^(AP u B)`` for an ATL* state formula.

    Each basic subformula ``<<A>>psi`` gets a fresh proposition; ``psi``
    (with nested basic subformulas replaced by their propositions) is turned
    into a deterministic parity word automaton that is run under box atoms,
    and its complement under diamond atoms.  A checker state forces the fresh
    propositions to hold exactly where their subformulas hold.
    """
    from .word_automata import ltl_to_dpw

    if not L.is_state_formula(phi):
        raise FragmentError("ATL* inputs must be state formulas")
    basics = L.basic_subformulas(phi)
    names = {b: bprop(i) for i, b in enumerate(basics)}

    def replace(f):
        if f in names:
            return L.Prop(names[f])
        if isinstance(f, (L.TrueF, L.Prop)):
            return f
        if isinstance(f, L.Strat):
            return L.Strat(f.agents, replace(f.arg))
        return type(f)(*(replace(c) for c in f.children()))

    states = []
    templates = {}
    colors = {}
    starts = {}

    for b in basics:
        bname = names[b]
        path = replace(b.arg)
        try:
            dpw = ltl_to_dpw(path, cap=budget)
            letters = [frozenset(c) for r in range(len(dpw.props) + 1)
                       for c in itertools.combinations(sorted(dpw.props), r)]
            reach = dpw.explore(letters)
            used = dpw.observed_colors(letters)
        except SizeGuard as e:
            raise BudgetExceeded(f"path automaton for {L.pretty(b)}: {e}",
                                 measured=e.measured, stage="translate") from e
        if len(reach) > budget:
            raise BudgetExceeded(f"path automaton for {L.pretty(b)} has {len(reach)} states",
                                 measured=len(reach), stage="translate")
        base = (min(used) // 2) * 2 if used else 0
        for positive in (True, False):
            mode = BOX if positive else DIA
            tag = bname if positive else "!" + bname

            def go(d, letter, positive=positive, tag=tag, mode=mode, dpw=dpw):
                d2, c = dpw.step(d, letter & dpw.props)
                color = c - base + (0 if positive else 1)
                return ("atom", Atom((tag, d2, color), mode, b.agents))

            for d in reach:
                for c in used | {base}:
                    q = (tag, d, c - base + (0 if positive else 1))
                    states.append(q)
                    colors[q] = q[2]
                    # depends on the letter: enumerate per letter over dpw props
                    templates[q] = _letter_switch(dpw.props, lambda letter, d=d, go=go: go(d, letter))
            starts[tag] = _letter_switch(dpw.props, lambda letter, go=go, d0=dpw.initial: go(d0, letter))

    parts = []
    for b in basics:
        parts.append(t_or(t_and(("lit", names[b], True), starts[names[b]]),
                          t_and(("lit", names[b], False), starts["!" + names[b]])))
    top = replace(phi)
    top_tmpl = _bool_template(top)
    chk_color = 0
    if parts:
        chk = ("check",)
        states.append(chk)
        colors[chk] = chk_color
        templates[chk] = t_and(*parts, ("atom", Atom(chk, BOX, frozenset())))
        init_tmpl = t_and(top_tmpl, templates[chk])
    else:
        init_tmpl = top_tmpl
    init = ("init",)
    states.insert(0, init)
    colors[init] = chk_color
    templates[init] = init_tmpl
    return _prune(states, init, templates, colors,
                  props=props if props is not None else L.props_of(phi),
                  extra_props=[names[b] for b in basics])


def _letter_switch(props, fn):
    """Template that branches on the letter restricted to ``props``."""
    props = sorted(props)
    branches = []
    for bits in itertools.product((False, True), repeat=len(props)):
        letter = frozenset(p for p, v in zip(props, bits) if v)
        guard = [("lit", p, v) for p, v in zip(props, bits)]
        branches.append(t_and(*guard, fn(letter)) if guard else fn(letter))
    return branches[0] if len(branches) == 1 else t_or(*branches)


def _bool_template(f, pos=True):
    if isinstance(f, L.TrueF):
        return T_TRUE if pos else T_FALSE
    if isinstance(f, L.Prop):
        return ("lit", f.name, pos)
    if isinstance(f, L.Not):
        return _bool_template(f.arg, not pos)
    if isinstance(f, L.And):
        return (t_and if pos else t_or)(_bool_template(f.left, pos), _bool_template(f.right, pos))
    if isinstance(f, L.Or):
        return (t_or if pos else t_and)(_bool_template(f.left, pos), _bool_template(f.right, pos))
    if isinstance(f, L.Implies):
        return (t_or if pos else t_and)(_bool_template(f.left, not pos), _bool_template(f.right, pos))
    raise FragmentError(f"temporal operator outside a quantifier: {L.pretty(f)}")


# ------------------------------------------------------ acceptance game

WIN = ("win",)
LOSE = ("lose",)


def acceptance_game(a: ParityAcg, g, labeling=None):
    """Parity game for ``a`` reading the finite CGS ``g``.

    ``labeling`` optionally adds extra propositions per state (a guess of
    the B-labeling).  Player 0 is the automaton.
    """
    game = ParityGame()
    game.add(WIN, 0, 0)
    game.add(LOSE, 0, 1)
    game.edge(WIN, WIN)
    game.edge(LOSE, LOSE)
    todo = []

    def letter(s):
        lab = g.label(s)
        return lab | labeling[s] if labeling else lab

    def state_pos(q, s):
        key = ("q", q, s)
        if key not in game:
            game.add(key, 0, a.colors[q])
            todo.append(key)
        return key

    def formula_pos(f, s):
        if f is True:
            return WIN
        if f is False:
            return LOSE
        key = ("f", f, s)
        if key in game:
            return key
        if isinstance(f, Atom):
            groups = _groups(g, s, f.agents)
            if f.mode == BOX:
                game.add(key, 0, 0)
                for dA, succ in groups.items():
                    k2 = ("box", f, s, dA)
                    game.add(k2, 1, 0)
                    game.edge(key, k2)
                    for t in succ:
                        game.edge(k2, state_pos(f.state, t))
            else:
                game.add(key, 1, 0)
                for dA, succ in groups.items():
                    k2 = ("dia", f, s, dA)
                    game.add(k2, 0, 0)
                    game.edge(key, k2)
                    for t in succ:
                        game.edge(k2, state_pos(f.state, t))
            return key
        tag, parts = f
        game.add(key, 1 if tag == "and" else 0, 0)
        for p in parts:
            game.edge(key, formula_pos(p, s))
        return key

    start = state_pos(a.initial, g.initial)
    while todo:
        key = todo.pop()
        _, q, s = key
        game.edge(key, formula_pos(a.delta(q, letter(s)), s))
    return game, start


def _groups(g, s, coalition):
    return L.coalition_choices(g.agents, g.options(s), coalition)


def acg_accepts(a: ParityAcg, g, labeling=None) -> bool:
    game, start = acceptance_game(a, g, labeling)
    return solve_parity_game(game).wins(start, 0)


def acg_accepts_some_extension(a: ParityAcg, g) -> bool:
    """Acceptance of some labeling of ``g``'s states with ``a.extra_props``."""
    if not a.extra_props:
        return acg_accepts(a, g)
    subsets = [frozenset(c) for r in range(len(a.extra_props) + 1)
               for c in itertools.combinations(a.extra_props, r)]
    for choice in itertools.product(subsets, repeat=len(g.states)):
        if acg_accepts(a, g, dict(zip(g.states, choice))):
            return True
    return False
