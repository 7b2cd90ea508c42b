import itertools
import random

import pytest

from pdmodcheck.errors import ExplosionGuard, InputError, NotOpen
from pdmodcheck.system_model import (BOT_MARK, BOTTOM, ENVIRONMENT, SYSTEM, Config,
                                     bot_completion_encode, bounded_configuration_cgs,
                                     branching_degree, classify_control, count_prunings,
                                     decode_encoding, enumerate_prunings, format_pms,
                                     next_successors, parse_pms, stack_free_projection, step,
                                     unwind_bounded)

from generators import random_open_pms

TINY = """
agents: env, a
actions: e0, e1, x0, x1
props: p
stack: g
init: s
label t: p
trans s $ [env=e0, a=x0] -> t push g
trans s $ [env=e1, a=x0] -> s keep
trans s g [env=e0, a=x0] -> s pop
trans s g [env=e0, a=x1] -> t rewrite g g
trans t $ [env=e0, a=*] -> s keep
trans t g [env=*, a=x0] -> t keep
"""


def test_coffee_shape(coffee):
    assert branching_degree(coffee) == 6
    assert coffee.size == 18
    assert coffee.states[0] == "choice"
    for q in coffee.states:
        for g in coffee.stack_alphabet:
            want = ENVIRONMENT if q == "choice" else SYSTEM
            assert classify_control(coffee, q, g) == want


def test_coffee_successor_order(coffee):
    assert next_successors(coffee, "choice", BOTTOM) == (
        ("reqb", ("g",)), ("reqb", ()), ("reqw", ("g",)), ("reqw", ()), ("rejb", ()), ("rejw", ()))
    assert next_successors(coffee, "choice", "g") == (
        ("reqb", ("g", "g")), ("reqb", ("g",)), ("reqb", ()),
        ("reqw", ("g", "g")), ("reqw", ("g",)), ("reqw", ()))


def test_step_semantics():
    pms = parse_pms(TINY)
    c0 = Config("s", (BOTTOM,))
    c1 = step(pms, c0, ("e0", "x0"))
    assert c1 == Config("t", ("g", BOTTOM))
    assert step(pms, c0, ("e1", "x1")) is None
    c2 = step(pms, Config("s", ("g", BOTTOM)), ("e0", "x1"))
    assert c2 == Config("t", ("g", "g", BOTTOM))
    assert step(pms, Config("s", ("g", BOTTOM)), ("e0", "x0")) == Config("s", (BOTTOM,))


def test_wildcards_and_classification():
    pms = parse_pms(TINY)
    # '*' ranges over every declared action
    assert len(pms.decisions("t", BOTTOM)) == 4
    assert len(pms.decisions("t", "g")) == 4
    assert classify_control(pms, "s", BOTTOM) == ENVIRONMENT
    assert classify_control(pms, "s", "g") == SYSTEM
    assert classify_control(pms, "t", "g") == ENVIRONMENT
    assert classify_control(pms, "t", BOTTOM) == SYSTEM


def test_single_decision_is_a_system_pair():
    pms = parse_pms("agents: env, a\nactions: e, x\ninit: s\ntrans s $ [env=e, a=x] -> s keep\n")
    assert classify_control(pms, "s", BOTTOM) == SYSTEM


def test_not_open_is_rejected():
    text = TINY.replace("trans t g [env=*, a=x0] -> t keep", "trans t g [env=*, a=*] -> t keep")
    with pytest.raises(NotOpen):
        parse_pms(text)


@pytest.mark.parametrize("bad", [
    "agents: env\nactions: a\ninit: s\ntrans s $ [env=zz] -> s keep\n",
    "agents: env\nactions: a\ninit: s\ntrans s h [env=a] -> s keep\n",
    "agents: env\nactions: a\ninit: s\ntrans s $ [env=a] -> s jump\n",
    "agents: env\nactions: a\ninit: s\nnonsense\n",
    "actions: a\ninit: s\n",
    "agents: env\nactions: a\ninit: s\ntrans s $ [] -> s keep\n",
])
def test_parse_errors(bad):
    with pytest.raises(InputError):
        parse_pms(bad)


def test_missing_transition_is_input_error():
    with pytest.raises(InputError):
        parse_pms("agents: env\nactions: a\nstack: g\ninit: s\ntrans s $ [env=a] -> s push g\n")


def test_format_round_trip(coffee):
    again = parse_pms(format_pms(coffee))
    assert again.transitions == coffee.transitions
    assert again.labels == coffee.labels


def test_as_closed_makes_everything_system(coffee):
    closed = coffee.as_closed()
    assert all(classify_control(closed, q, g) == SYSTEM
               for q in closed.states for g in closed.stack_alphabet)


def test_bounded_configuration_graph():
    pms = parse_pms(TINY)
    g = bounded_configuration_cgs(pms, 1)
    assert set(g.states) == {Config("s", (BOTTOM,)), Config("t", ("g", BOTTOM))}
    pump = parse_pms("agents: env, a\nactions: e, x\nstack: g\ninit: s\n"
                     "trans s $ [env=e, a=x] -> s push g\ntrans s g [env=e, a=x] -> s push g\n")
    with pytest.raises(ExplosionGuard):
        bounded_configuration_cgs(pump, 3)
    flat = stack_free_projection(pms)
    assert set(flat.successors("s")) == {"t", "s"}


def test_unwinding_counts(coffee):
    t = unwind_bounded(coffee, 2)
    assert len(t.root.children) == 6
    # only the root is environment-controlled within depth 2
    assert count_prunings(t) == 2 ** 6 - 1
    trees = list(enumerate_prunings(t))
    assert len(trees) == 63
    assert len({tuple(sorted(n.track for n in x.nodes())) for x in trees}) == 63


def test_pruning_guard(coffee):
    with pytest.raises(ExplosionGuard):
        list(enumerate_prunings(unwind_bounded(coffee, 4), limit=1000))


def test_encoding_round_trip(coffee):
    t = unwind_bounded(coffee, 2)
    for pr in itertools.islice(enumerate_prunings(t), 0, None, 7):
        enc = bot_completion_encode(pr, 6)
        assert len(enc) == 1 + 6 + 36
        assert enc[()] == coffee.labels["choice"]
        kept = set(dict(pr.root.children))
        for i in range(6):
            assert (enc[(i + 1,)] == BOT_MARK) == (i not in kept)
        back = decode_encoding(enc, t)
        assert bot_completion_encode(back, 6) == enc


@pytest.mark.parametrize("seed", range(30))
def test_random_pms_are_open(seed):
    pms = random_open_pms(random.Random(seed))
    pms.check_open()
    assert branching_degree(pms) >= 1
