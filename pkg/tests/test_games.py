import random

import pytest

from pdmodcheck.games import ParityGame, solve_parity_game

from oracles import brute_force_winners, player0_wins_with, random_game


def test_even_self_loop_is_won_by_player_zero():
    g = ParityGame()
    g.add("v", 1, 2)
    g.edge("v", "v")
    assert solve_parity_game(g).wins("v", 0)


def test_odd_self_loop_is_won_by_player_one():
    g = ParityGame()
    g.add("v", 0, 3)
    g.edge("v", "v")
    assert solve_parity_game(g).wins("v", 1)


def test_player_zero_escapes_to_even_loop():
    g = ParityGame()
    g.add("a", 0, 1)
    g.add("b", 0, 2)
    g.add("c", 1, 5)
    for u, v in [("a", "b"), ("a", "c"), ("b", "b"), ("c", "c")]:
        g.edge(u, v)
    sol = solve_parity_game(g)
    assert sol.wins("a", 0) and sol.choice("a") == "b"
    assert sol.wins("c", 1)


def test_dead_end_is_rejected():
    g = ParityGame()
    g.add("a", 0, 0)
    with pytest.raises(ValueError):
        solve_parity_game(g)


@pytest.mark.parametrize("seed", range(40))
def test_matches_strategy_enumeration(seed):
    rng = random.Random(seed)
    g = random_game(rng, rng.randint(2, 12))
    sol = solve_parity_game(g)
    assert sol.winner == brute_force_winners(g)


@pytest.mark.parametrize("seed", range(20))
def test_returned_strategy_wins_its_region(seed):
    rng = random.Random(1000 + seed)
    g = random_game(rng, 15, max_color=5, max_out=3)
    sol = solve_parity_game(g)
    mine = [i for i in range(len(g)) if g.owner[i] == 0]
    assert all(i in sol.strategy for i in mine if sol.winner[i] == 0)
    strat = {i: sol.strategy.get(i, g.succ[i][0]) for i in mine}
    for v in range(len(g)):
        if sol.winner[v] == 0:
            assert player0_wins_with(g, strat, v)
