"""Finite two-player parity games and a recursive (Zielonka) solver.

Player 0 wins a play iff the highest color seen infinitely often is even.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field


class ParityGame:
    """Explicit game graph. Positions are arbitrary hashable keys."""

    def __init__(self):
        self.index = {}
        self.keys = []
        self.owner = []
        self.color = []
        self.succ = []

    def add(self, key, owner: int, color: int) -> int:
        i = self.index.get(key)
        if i is not None:
            return i
        i = len(self.keys)
        self.index[key] = i
        self.keys.append(key)
        self.owner.append(owner)
        self.color.append(color)
        self.succ.append([])
        return i

    def edge(self, a, b):
        ia, ib = self.index[a], self.index[b]
        if ib not in self.succ[ia]:
            self.succ[ia].append(ib)

    def __len__(self):
        return len(self.keys)

    def __contains__(self, key):
        return key in self.index

    @property
    def edge_count(self):
        return sum(len(s) for s in self.succ)

    def check_total(self):
        dead = [self.keys[i] for i, s in enumerate(self.succ) if not s]
        if dead:
            raise ValueError(f"{len(dead)} positions without successors, e.g. {dead[0]!r}")


@dataclass
class Solution:
    game: ParityGame
    winner: list  # per position index: 0 or 1
    strategy: dict = field(default_factory=dict)  # position index -> successor index

    def wins(self, key, player=0) -> bool:
        return self.winner[self.game.index[key]] == player

    def region(self, player):
        return {self.game.keys[i] for i, w in enumerate(self.winner) if w == player}

    def choice(self, key):
        j = self.strategy.get(self.game.index[key])
        return None if j is None else self.game.keys[j]


def solve_parity_game(game: ParityGame) -> Solution:
    """Winning regions and memoryless winning strategies for both players."""
    game.check_total()
    n = len(game)
    pred = [[] for _ in range(n)]
    for i, s in enumerate(game.succ):
        for j in s:
            pred[j].append(i)
    winner = [0] * n
    strategy = {}
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10_000))
    try:
        w0, w1 = _zielonka(game, pred, frozenset(range(n)), strategy)
    finally:
        sys.setrecursionlimit(limit)
    for i in w1:
        winner[i] = 1
    return Solution(game, winner, strategy)


def _attractor(game, pred, arena, target, player, strategy):
    """Attractor of ``target`` for ``player`` inside ``arena``; records
    attractor moves of ``player`` in ``strategy``."""
    attr = set(target)
    count = {}
    queue = list(target)
    while queue:
        v = queue.pop()
        for u in pred[v]:
            if u not in arena or u in attr:
                continue
            if game.owner[u] == player:
                attr.add(u)
                strategy[u] = v
                queue.append(u)
            else:
                if u not in count:
                    count[u] = sum(1 for w in game.succ[u] if w in arena)
                count[u] -= 1
                if count[u] == 0:
                    attr.add(u)
                    queue.append(u)
    return attr


def _zielonka(game, pred, arena, strategy):
    if not arena:
        return set(), set()
    top = max(game.color[v] for v in arena)
    p = top % 2
    target = {v for v in arena if game.color[v] == top}
    local = {}
    a = _attractor(game, pred, arena, target, p, local)
    sub = arena - a
    sub_strat = {}
    w = _zielonka(game, pred, sub, sub_strat)
    if not w[1 - p]:
        # p wins everywhere in arena
        for v in arena:
            if game.owner[v] != p:
                continue
            if v in sub:
                if v in sub_strat:
                    strategy[v] = sub_strat[v]
            elif v in local:
                strategy[v] = local[v]
            else:
                for s in game.succ[v]:
                    if s in arena:
                        strategy[v] = s
                        break
        regions = [set(), set()]
        regions[p] = set(arena)
        return regions[0], regions[1]
    opp_strat = {}
    b = _attractor(game, pred, arena, w[1 - p], 1 - p, opp_strat)
    for v in w[1 - p]:
        if game.owner[v] == 1 - p and v in sub_strat:
            strategy[v] = sub_strat[v]
    for v, s in opp_strat.items():
        if v not in w[1 - p]:
            strategy[v] = s
    rest = _zielonka(game, pred, arena - b, strategy)
    regions = [None, None]
    regions[1 - p] = rest[1 - p] | b
    regions[p] = rest[p]
    return regions[0], regions[1]
