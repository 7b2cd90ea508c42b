import itertools
import random

import pytest

from pdmodcheck import acg as A
from pdmodcheck import logic as L
from pdmodcheck.errors import BudgetExceeded, NotAtl
from pdmodcheck.system_model import FiniteCgs, stack_free_projection

from generators import random_atl_formula, random_cgs


def _pair(seed):
    rng = random.Random(seed)
    return random_cgs(rng, 4), random_atl_formula(rng, 3)


def _all_small_cgs(props=("p",)):
    """Every 2-agent CGS with states {0,1}, one or two actions for agent a."""
    out = []
    for acts in ((("x",),), (("x", "y"),)):
        decisions = list(itertools.product(acts[0], ("z",)))
        for targets in itertools.product(range(2), repeat=2 * len(decisions)):
            for lab in itertools.product([set(), {"p"}], repeat=2):
                it = iter(targets)
                moves = {s: [(d, next(it)) for d in decisions] for s in range(2)}
                out.append(FiniteCgs(("a", "b"), [0, 1], 0, dict(enumerate(lab)), moves))
    return out


def test_prop_is_one_state_and_its_dual():
    a = A.atl_to_acg(L.Prop("p"))
    assert len(a.states) == 1 and a.atoms == ()
    assert a.delta(a.initial, frozenset({"p"})) is True
    assert a.delta(a.initial, frozenset()) is False
    d = A.dualize(a)
    for g in _all_small_cgs():
        assert A.acg_accepts(d, g) == ("p" not in g.labels[0])


def test_next_shape():
    a = A.atl_to_acg(L.parse_formula("<<a>> X p"))
    assert len(a.states) == 2
    assert a.atoms == (A.Atom("+p", A.BOX, frozenset("a")),)
    assert a.index <= 2
    for g in _all_small_cgs():
        assert A.acg_accepts(a, g) == L.holds(g, L.parse_formula("<<a>> X p"))


def test_until_state_is_odd():
    a = A.atl_to_acg(L.parse_formula("<<a>> (p U q)"))
    assert a.colors[a.initial] == A.LFP_COLOR
    b = A.atl_to_acg(L.parse_formula("<<a>> G p"))
    assert a.colors[a.initial] % 2 == 1 and b.colors[b.initial] % 2 == 0


def test_dual_quantifier_uses_diamond():
    a = A.atl_to_acg(L.parse_formula("[[a]] X p"))
    assert {x.mode for x in a.atoms} == {A.DIA}


def test_accept_all():
    a = A.ParityAcg(["q"], "q", {"q": A.T_TRUE}, {"q": 0})
    rng = random.Random(0)
    assert all(A.acg_accepts(a, random_cgs(rng, 3)) for _ in range(10))


def test_turn_based_examples():
    moves = {0: [(("l", "w"), 1), (("r", "w"), 0)], 1: [(("w", "w"), 1)]}
    g = FiniteCgs(("a", "b"), [0, 1], 0, {0: set(), 1: {"p"}}, moves)
    assert A.acg_accepts(A.atl_to_acg(L.parse_formula("<<a>> X p")), g)
    assert not A.acg_accepts(A.atl_to_acg(L.parse_formula("A G !p")), g)


def test_coffee_stack_free_projection(coffee):
    g = stack_free_projection(coffee)
    for text in ("<<br>> F black", "A G (!reqw & !rej)", "<<env>> X reqb"):
        f = L.parse_formula(text, coffee.agents, coffee.props)
        assert A.acg_accepts(A.atl_to_acg(f), g) == L.holds(g, f)


def test_rejects_non_atl():
    with pytest.raises(NotAtl):
        A.atl_to_acg(L.parse_formula("<<a>> (F p & G q)"))
    with pytest.raises(NotAtl):
        A.atl_to_acg(L.parse_formula("F p"))


@pytest.mark.parametrize("seed", range(200))
def test_random_acceptance_matches_semantics(seed):
    g, f = _pair(seed)
    a = A.atl_to_acg(f)
    want = L.holds(g, f)
    assert A.acg_accepts(a, g) == want
    assert A.acg_accepts(A.dualize(a), g) == (not want)
    assert a.index <= 2
    assert len(a.states) <= 2 * L.size(f)


@pytest.mark.parametrize("seed", range(30))
def test_double_dualize(seed):
    g, f = _pair(1000 + seed)
    a = A.atl_to_acg(f)
    dd = A.dualize(A.dualize(a))
    assert all(dd.colors[q] == a.colors[q] + 2 for q in a.states)
    assert A.acg_accepts(dd, g) == A.acg_accepts(a, g)


@pytest.mark.parametrize("seed", range(40))
def test_atlstar_agrees_on_atl_input(seed):
    rng = random.Random(2000 + seed)
    g, f = random_cgs(rng, 3), random_atl_formula(rng, 2)
    s = A.atlstar_to_acg(f)
    assert A.acg_accepts_some_extension(s, g) == L.holds(g, f)


def _random_ltl(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        return L.Prop(rng.choice("pq"))
    k = rng.choice(["not", "and", "or", "X", "U", "F", "G"])
    sub = lambda: _random_ltl(rng, depth - 1)  # noqa: E731
    return {"not": lambda: L.Not(sub()), "and": lambda: L.And(sub(), sub()),
            "or": lambda: L.Or(sub(), sub()), "X": lambda: L.Next(sub()),
            "U": lambda: L.Until(sub(), sub()), "F": lambda: L.Finally(sub()),
            "G": lambda: L.Globally(sub())}[k]()


def _lasso_paths(g, limit=6):
    """All lassos from the initial state of a one-agent-deterministic graph."""
    succ = {s: sorted(set(g.successors(s))) for s in g.states}
    out = []

    def go(path):
        s = path[-1]
        for t in succ[s]:
            if t in path:
                i = path.index(t)
                out.append((path[:i], path[i:]))
            elif len(path) < limit:
                go(path + [t])
    go([g.initial])
    return out


@pytest.mark.parametrize("seed", range(40))
def test_atlstar_path_quantifiers_against_lassos(seed):
    # memoryless paths suffice to witness E psi only for some psi, so check
    # A psi (all simple lassos) and E psi on graphs where every state has
    # one successor, which makes the path unique
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    moves = {s: [(("x",), rng.randrange(n))] for s in range(n)}
    labels = {s: {p for p in "pq" if rng.random() < 0.5} for s in range(n)}
    g = FiniteCgs(("a",), list(range(n)), 0, labels, moves)
    psi = _random_ltl(rng, 3)
    (pre, cyc), = _lasso_paths(g)
    want = L.eval_ltl_lasso(psi, [frozenset(labels[s]) for s in pre],
                            [frozenset(labels[s]) for s in cyc])
    for q in (frozenset(), frozenset("a")):
        s = A.atlstar_to_acg(L.Strat(q, psi))
        assert A.acg_accepts_some_extension(s, g) == want


def test_atlstar_exists_until():
    f = L.parse_formula("<<a,b>> (p U q)")
    rng = random.Random(7)
    for _ in range(30):
        g = random_cgs(rng, 3)
        assert A.acg_accepts_some_extension(A.atlstar_to_acg(f), g) == L.holds(g, f)


def test_atlstar_branching_beyond_atl():
    f = L.parse_formula("<<a>> (F p & G q)")
    # a picks 0 -> 1 (p, q) forever, or 0 -> 2 (q only)
    moves = {0: [(("l",), 1), (("r",), 2)], 1: [(("l",), 1)], 2: [(("l",), 2)]}
    good = FiniteCgs(("a",), [0, 1, 2], 0, {0: {"q"}, 1: {"p", "q"}, 2: {"q"}}, moves)
    bad = FiniteCgs(("a",), [0, 1, 2], 0, {0: {"q"}, 1: {"p"}, 2: {"q"}}, moves)
    assert A.acg_accepts_some_extension(A.atlstar_to_acg(f), good)
    assert not A.acg_accepts_some_extension(A.atlstar_to_acg(f), bad)


def test_atlstar_boolean_only():
    f = L.parse_formula("p & !q")
    s = A.atlstar_to_acg(f)
    assert s.extra_props == () and s.atoms == ()
    for lab, want in (({"p"}, True), ({"p", "q"}, False), (set(), False)):
        g = FiniteCgs(("a",), [0], 0, {0: lab}, {0: [(("x",), 0)]})
        assert A.acg_accepts_some_extension(s, g) == want


def test_atlstar_budget():
    f = L.parse_formula("<<a>> (G F p & G F q & F G p & (p U (q U p)))")
    with pytest.raises(BudgetExceeded) as e:
        A.atlstar_to_acg(f, budget=2)
    assert e.value.measured > 2
