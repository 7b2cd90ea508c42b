"""Random instance generators shared by the test suites."""
from __future__ import annotations

import itertools
import random

from pdmodcheck import logic as L
from pdmodcheck import npta as N
from pdmodcheck import word_automata as W
from pdmodcheck.system_model import BOTTOM, ENV, FiniteCgs, Pms

PROPS = ("p", "q")


def random_open_pms(rng: random.Random, max_states=3, max_stack=2, props=PROPS,
                    closed_only=False) -> Pms:
    """Open PMS with agents ``env`` and ``a``; every pair is env- or sys-type."""
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    stack = [f"g{i}" for i in range(rng.randint(1, max_stack))]
    labels = {q: {p for p in props if rng.random() < 0.5} for q in states}
    trans = {}
    for q in states:
        for gamma in stack + [BOTTOM]:
            env_turn = (not closed_only) and rng.random() < 0.5
            n_env = 2 if env_turn else 1
            n_a = 1 if env_turn else rng.randint(1, 2)
            decisions = list(itertools.product([f"e{i}" for i in range(n_env)],
                                               [f"x{i}" for i in range(n_a)]))
            rows = []
            for d in decisions:
                if rows and rng.random() < 0.15:
                    continue  # partial transition function
                rows.append((d, (rng.choice(states), _random_word(rng, gamma, stack))))
            trans[(q, gamma)] = rows
    actions = ["e0", "e1", "x0", "x1"]
    return Pms((ENV, "a"), actions, props, states, stack, states[0], labels, trans)


def _random_word(rng, gamma, stack):
    r = rng.random()
    if gamma == BOTTOM:
        if r < 0.5:
            return ()
        return tuple(rng.choice(stack) for _ in range(rng.randint(1, 2)))
    if r < 0.3:
        return ()  # pop
    if r < 0.6:
        return (rng.choice(stack),)
    return (rng.choice(stack), gamma)


COALITIONS = (frozenset(), frozenset({ENV}), frozenset({"a"}), frozenset({ENV, "a"}))


def random_next_formula(rng: random.Random, depth: int, props=PROPS, coalitions=COALITIONS):
    """Random ATL formula using only next-time modalities, nesting <= depth."""
    r = rng.random()
    if depth == 0 or r < 0.2:
        f = L.Prop(rng.choice(props))
        return L.Not(f) if rng.random() < 0.3 else f
    if r < 0.35:
        return L.Not(random_next_formula(rng, depth, props, coalitions))
    if r < 0.5:
        op = rng.choice([L.And, L.Or, L.Implies])
        return op(random_next_formula(rng, depth - 1, props, coalitions),
                  random_next_formula(rng, depth - 1, props, coalitions))
    body = L.Next(random_next_formula(rng, depth - 1, props, coalitions))
    if rng.random() < 0.25:
        body = L.Not(body)
    return L.Strat(rng.choice(coalitions), body)


def random_atl_formula(rng: random.Random, depth: int, props=PROPS, agents=("a", "b")):
    coalitions = [frozenset(c) for r in range(len(agents) + 1)
                  for c in itertools.combinations(agents, r)]
    r = rng.random()
    if depth == 0 or r < 0.2:
        return L.Prop(rng.choice(props))
    if r < 0.3:
        return L.Not(random_atl_formula(rng, depth - 1, props, agents))
    if r < 0.4:
        return L.And(random_atl_formula(rng, depth - 1, props, agents),
                     random_atl_formula(rng, depth - 1, props, agents))
    sub = lambda: random_atl_formula(rng, depth - 1, props, agents)  # noqa: E731
    kind = rng.choice(["X", "U", "F", "G", "nG", "nU"])
    body = {"X": lambda: L.Next(sub()), "U": lambda: L.Until(sub(), sub()),
            "F": lambda: L.Finally(sub()), "G": lambda: L.Globally(sub()),
            "nG": lambda: L.Not(L.Globally(sub())),
            "nU": lambda: L.Not(L.Until(sub(), sub()))}[kind]()
    return L.Strat(rng.choice(coalitions), body)


def random_cgs(rng: random.Random, max_states=3, agents=("a", "b"), props=PROPS) -> FiniteCgs:
    n = rng.randint(1, max_states)
    states = list(range(n))
    moves = {}
    for s in states:
        acts = [[f"{ag}{i}" for i in range(rng.randint(1, 2))] for ag in agents]
        moves[s] = [(d, rng.choice(states)) for d in itertools.product(*acts)]
    labels = {s: {p for p in props if rng.random() < 0.5} for s in states}
    return FiniteCgs(agents, states, 0, labels, moves)


def random_nta(rng, k=2, alphabet=("x", "y"), max_states=3, max_color=3):
    n = rng.randint(1, max_states)
    table = {(s, a): [tuple(rng.randrange(n) for _ in range(k))
                      for _ in range(rng.randint(0, 2))] for s in range(n) for a in alphabet}
    colors = {s: rng.randint(0, max_color) for s in range(n)}
    return N.ParityNta(0, lambda s, a: table[(s, a)], colors.get, k, set(colors.values()),
                       tuple(alphabet)), table, colors


def random_leveled_npta(rng, height=2, k=2, max_states=3):
    """Pushdown NPTA whose stack symbols carry their level, so height <= ``height``."""
    n = rng.randint(1, max_states)
    syms = {lv: [f"{c}{lv}" for c in "ab"] for lv in range(1, height + 1)}
    stack = [s for lv in syms for s in syms[lv]]
    level = {s: int(s[1:]) for s in stack}
    colors = {s: rng.randint(0, 3) for s in range(n)}

    def word(top):
        r = rng.random()
        if top == BOTTOM:
            return () if r < 0.4 else (rng.choice(syms[1]),)
        lv = level[top]
        if r < 0.3:
            return ()
        if r < 0.6 or lv == height:
            return (rng.choice(syms[lv]),)
        return (rng.choice(syms[lv + 1]), rng.choice(syms[lv]))

    table = {}
    for s in range(n):
        for top in [BOTTOM] + stack:
            table[(s, "x", top)] = [tuple((rng.randrange(n), word(top)) for _ in range(k))
                                    for _ in range(rng.choice([0, 1, 1, 2, 2, 2]))]
    return N.ExplicitNpta(range(n), 0, ["x"], stack, table, colors, k)


def random_nbw(rng, max_states=4, letters=("a", "b")):
    n = rng.randint(1, max_states)
    table = {(s, x): [(t, rng.random() < 0.4) for t in range(n) if rng.random() < 0.45]
             for s in range(n) for x in letters}
    return W.Nbw([0], lambda s, x: table[(s, x)], name="rand"), table


def random_coparity(rng, max_states=4, letters=("a", "b"), max_color=3):
    n = rng.randint(1, max_states)
    col = {s: rng.randint(0, max_color) for s in range(n)}
    tr = {(s, x): [t for t in range(n) if rng.random() < 0.4] for s in range(n) for x in letters}
    return W.CoParityNw([0], lambda s, x: tr[(s, x)], col.get, set(col.values())), tr, col
