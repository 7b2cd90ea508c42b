"""Emptiness of parity NPTA through pushdown parity games.

Player 0 (Automaton) picks a transition tuple, player 1 (Pathfinder) picks a
direction.  The pushdown game is reduced to a finite parity game in the
style of Walukiewicz: when a symbol is pushed, player 0 claims, for each
control the frame may return to, the worst color the frame will show on
the way; player 1 either enters the frame (and the claims are checked at
the pop) or trusts one claim and skips the frame.

Claims are thresholds in the reward order (odd colors below even ones,
large odd worst, large even best), which is equivalent to claiming sets
of colors because the max-parity objective is monotone in that order.
Candidate claims come from a pushdown-reachability summary of each frame.
Before offering every combination of candidates, the default method tries
games with one claim per push, which can only prove nonemptiness.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from .errors import ResourceGuard
from .games import ParityGame, solve_parity_game
from .system_model import BOTTOM

WIN = ("WIN",)
LOSE = ("LOSE",)


def reward_key(c: int) -> int:
    return c if c % 2 == 0 else -c


def reward_geq(a: int, b: int) -> bool:
    return reward_key(a) >= reward_key(b)


@dataclass
class EmptinessResult:
    empty: bool
    certificate: dict | None = None
    stats: dict = field(default_factory=dict)


class PushdownGame:
    """Controls: ``("A", s)``, ``("D", tuple)``, ``("I", s, rest)``, WIN, LOSE."""

    def __init__(self, npta, max_states=200_000):
        self.p = npta
        self.tops = (BOTTOM,) + tuple(npta.stack_symbols())
        self.max_states = max_states
        self._edges = {}
        self.letters = {}
        self.universal = self._universal()

    # states of the automaton from which player 0 wins whatever the stack
    def _universal(self):
        p = self.p
        order = [p.initial]
        seen = {p.initial}
        i = 0
        while i < len(order):
            s = order[i]
            i += 1
            for top in self.tops:
                for _, tup in p.moves(s, top):
                    for s2, _ in tup:
                        if s2 not in seen:
                            seen.add(s2)
                            order.append(s2)
                            if len(order) > self.max_states:
                                raise ResourceGuard(
                                    f"automaton has more than {self.max_states} states",
                                    measured=len(order), stage="emptiness")
        self.reachable = len(order)
        # per (state, top): the distinct child-state sets player 0 may pick
        options = {}
        users = {}
        for s in order:
            if p.color(s) % 2:
                continue
            for top in self.tops:
                opts = list(dict.fromkeys(frozenset(s2 for s2, _ in tup)
                                          for _, tup in p.moves(s, top)))
                options[(s, top)] = opts
                for kids in opts:
                    for s2 in kids:
                        users.setdefault(s2, set()).add(s)
        cand = {s for s in order if p.color(s) % 2 == 0}
        todo = list(cand)
        while todo:
            s = todo.pop()
            if s not in cand:
                continue
            if all(any(kids <= cand for kids in options[(s, top)]) for top in self.tops):
                continue
            cand.discard(s)
            todo.extend(u for u in users.get(s, ()) if u in cand)
        return frozenset(cand)

    def owner(self, ctrl):
        return 1 if ctrl[0] == "D" else 0

    def color(self, ctrl):
        if ctrl[0] == "A":
            return self.p.color(ctrl[1])
        if ctrl is LOSE or ctrl == LOSE:
            return 1
        return 0

    def _goto(self, s):
        return WIN if s in self.universal else ("A", s)

    def _push_chain(self, s, to_push):
        """Op and next control pushing ``to_push`` (last element deepest)."""
        nxt = self._goto(s) if len(to_push) == 1 else ("I", s, to_push[:-1])
        return nxt, to_push[-1]

    def edges(self, ctrl, top):
        key = (ctrl, top)
        out = self._edges.get(key)
        if out is not None:
            return out
        out = []
        kind = ctrl[0]
        if ctrl == WIN or ctrl == LOSE:
            out.append((ctrl, ("int", top)))
        elif kind == "A":
            seen = set()
            for letter, tup in self.p.moves(ctrl[1], top):
                kids = tuple(dict.fromkeys(tup))
                if kids in seen:
                    continue
                seen.add(kids)
                self.letters.setdefault(kids, letter)
                if all(s2 in self.universal for s2, _ in kids):
                    out = [(WIN, ("int", top))]
                    break
                out.append((("D", kids), ("int", top)))
            if not out:
                out.append((LOSE, ("int", top)))
        elif kind == "D":
            for s2, w in ctrl[1]:
                if s2 in self.universal:
                    continue
                w = tuple(w)
                if top == BOTTOM:
                    base, to_push = BOTTOM, w
                elif not w:
                    out.append((self._goto(s2), ("pop",)))
                    continue
                else:
                    base, to_push = w[-1], w[:-1]
                if not to_push:
                    out.append((self._goto(s2), ("int", base)))
                else:
                    nxt, sym = self._push_chain(s2, to_push)
                    out.append((nxt, ("push", sym, base)))
        elif kind == "I":
            _, s2, rest = ctrl
            nxt, sym = self._push_chain(s2, rest)
            out.append((nxt, ("push", sym, top)))
        self._edges[key] = out
        return out


def _upd(m, c):
    return None if m is None else max(m, c)


class _Summaries:
    """Possible ``(return state, frame color)`` outcomes per frame entry.

    ``value[(ctrl, top)]`` collects, for every way the frame started at
    ``(ctrl, top)`` can pop, the state it returns to and the largest color
    seen in between (the start included).  All pairs share one least
    fixpoint, grown on demand as the game asks for new entries.
    """

    def __init__(self, game: PushdownGame, limit: int):
        self.g = game
        self.limit = limit
        self.value = {}
        self.users = {}

    @property
    def summ(self):
        return self.value

    def get(self, entry):
        if entry not in self.value:
            self._solve(entry)
        return self.value[entry]

    def _need(self, node, user, todo):
        self.users.setdefault(node, set()).add(user)
        if node not in self.value:
            self.value[node] = frozenset()
            todo.append(node)
            if len(self.value) > self.limit:
                raise ResourceGuard(f"frame summaries exceed {self.limit} entries",
                                    measured=len(self.value), stage="emptiness")
        return self.value[node]

    def _eval(self, node, todo):
        g = self.g
        ctrl, top = node
        if ctrl == WIN or ctrl == LOSE:
            return frozenset()
        c0 = g.color(ctrl)
        out = set()
        for c2, op in g.edges(ctrl, top):
            if op[0] == "int":
                for r, c in self._need((c2, op[1]), node, todo):
                    out.add((r, max(c0, c)))
            elif op[0] == "pop":
                if c2 != WIN:
                    out.add((c2[1], c0))
            elif c2 != WIN:
                for s, c in self._need((c2, op[1]), node, todo):
                    ret = g._goto(s)
                    if ret == WIN:
                        continue
                    for r, c3 in self._need((ret, op[2]), node, todo):
                        out.add((r, max(c0, c, c3)))
        return frozenset(out)

    def _solve(self, entry):
        self.value[entry] = frozenset()
        todo = [entry]
        while todo:
            node = todo.pop()
            res = self._eval(node, todo)
            if res != self.value[node]:
                self.value[node] = res
                todo.extend(self.users.get(node, ()))


def _claims(summary, universal, cap):
    rets = {}
    for s, c in summary:
        if s not in universal:
            rets.setdefault(s, set()).add(c)
    keys = sorted(rets, key=repr)
    choices = [[None] + sorted(rets[s], key=reward_key) for s in keys]
    total = 1
    for ch in choices:
        total *= len(ch)
    if total > cap:
        raise ResourceGuard(f"{total} claim candidates for one frame", measured=total,
                            stage="emptiness")
    out = []
    for combo in itertools.product(*choices):
        out.append(frozenset((s, c) for s, c in zip(keys, combo) if c is not None))
    return out


def _best_claim(cands, won, under, R, m):
    """Most permissive claim whose skip continuations are all won."""
    out = []
    for s in sorted(cands, key=repr):
        for c in cands[s]:
            if won(("C", c, s, under, R, m)):
                out.append((s, c))
                break
    return frozenset(out)


def _candidates(summary, universal):
    rets = {}
    for s, c in summary:
        if s not in universal:
            rets.setdefault(s, set()).add(c)
    return {s: sorted(cs, key=reward_key) for s, cs in rets.items()}


def emptiness(p, max_positions=400_000, claim_cap=4096, method="auto",
              rounds=6) -> EmptinessResult:
    """Decide whether ``p`` accepts no tree.

    ``method="enumerate"`` offers player 0 every candidate claim, which is
    exact but exponential in the number of return states.  ``"auto"`` first
    plays a few rounds in which each push offers a single claim (initially
    the most permissive one, then the most permissive one whose skip
    continuations were won in the previous round).  Restricting player 0
    only shrinks its winning region, so a win there proves nonemptiness;
    otherwise the exact enumeration decides.
    """
    if method not in ("auto", "enumerate"):
        raise ValueError(f"unknown emptiness method {method!r}")
    t0 = time.perf_counter()
    g = PushdownGame(p)
    summ = _Summaries(g, max_positions)
    used, done = "enumerate", 0
    if method == "auto":
        chosen = {}
        for done in range(1, rounds + 1):
            game, start, pushes = _build(g, summ, "single", chosen, max_positions, claim_cap)
            sol = solve_parity_game(game)
            if sol.wins(start, 0):
                used = "single-claim"
                break

            def won(key):
                return sol.wins(key, 0)
            nxt = {key: _best_claim(cands, won, *key[3:]) for key, cands in pushes.items()}
            if nxt == chosen:
                break
            chosen = nxt
    if used == "enumerate":
        game, start, _ = _build(g, summ, "enumerate", None, max_positions, claim_cap)
        sol = solve_parity_game(game)
    nonempty = sol.wins(start, 0)
    stats = {
        "method": used,
        "single_claim_rounds": done,
        "automaton_states": g.reachable,
        "universal_states": len(g.universal),
        "game_positions": len(game),
        "game_edges": game.edge_count,
        "summary_entries": len(summ.value),
        "solve_seconds": round(time.perf_counter() - t0, 4),
    }
    cert = _certificate(g, game, sol, start) if nonempty else None
    return EmptinessResult(not nonempty, cert, stats)


def _build(g, summ, method, chosen, max_positions, claim_cap):
    game = ParityGame()
    game.add(WIN, 0, 0)
    game.add(LOSE, 0, 1)
    game.edge(WIN, WIN)
    game.edge(LOSE, LOSE)
    todo = []
    pushes = {}

    def pos(key, owner, color):
        if key not in game:
            game.add(key, owner, color)
            todo.append(key)
            if len(game) > max_positions:
                raise ResourceGuard(f"finite game exceeds {max_positions} positions",
                                    measured=len(game), stage="emptiness")
        return key

    def spos(ctrl, top, R, m):
        if ctrl == WIN or ctrl == LOSE:
            return ctrl
        return pos(("S", ctrl, top, R, m), g.owner(ctrl), g.color(ctrl))

    def cpos(c, s, under, R, m):
        return pos(("C", c, s, under, R, m), 0, c)

    start = spos(g._goto(g.p.initial), BOTTOM, None, None)
    while todo:
        key = todo.pop()
        tag = key[0]
        if tag == "S":
            _, ctrl, top, R, m = key
            for c2, op in g.edges(ctrl, top):
                if op[0] == "int":
                    tgt = spos(c2, op[1], R, _upd(m, g.color(c2)))
                elif op[0] == "pop":
                    ok = c2 == WIN
                    if not ok and R is not None:
                        claim = dict(R).get(c2[1])
                        ok = claim is not None and reward_geq(m, claim)
                    tgt = WIN if ok else LOSE
                elif c2 == WIN:
                    tgt = WIN
                else:
                    tgt = pos(("P", c2, op[1], op[2], R, m), 0, 0)
                game.edge(key, tgt)
        elif tag == "P":
            _, c2, x, under, R, m = key
            summary = summ.get((c2, x))
            if method == "enumerate":
                claims = _claims(summary, g.universal, claim_cap)
            else:
                cands = _candidates(summary, g.universal)
                pushes[key] = cands
                # every skip target is kept in the arena so its winner is known
                for s, cs in cands.items():
                    for c in cs:
                        cpos(c, s, under, R, m)
                if key in chosen:
                    claims = [chosen[key]]
                else:
                    claims = [frozenset((s, cs[0]) for s, cs in cands.items())]
            for claim in claims:
                game.edge(key, pos(("Q", c2, x, under, R, m, claim), 1, 0))
        elif tag == "Q":
            _, c2, x, under, R, m, claim = key
            game.edge(key, spos(c2, x, claim, g.color(c2)))
            for s, c in sorted(claim, key=repr):
                game.edge(key, cpos(c, s, under, R, m))
        elif tag == "C":
            _, c, s, under, R, m = key
            ret = g._goto(s)
            game.edge(key, spos(ret, under, R, _upd(m, max(c, g.color(ret)))))
    return game, start, pushes


def _certificate(g, game, sol, start, limit=50):
    """Player-0 strategy restricted to positions it can reach."""
    choices = []
    seen = {start}
    todo = [start]
    while todo and len(choices) < limit:
        key = todo.pop(0)
        i = game.index[key]
        if game.owner[i] == 0:
            nxt = [sol.strategy.get(i, game.succ[i][0])]
        else:
            nxt = game.succ[i]
        if key[0] == "S" and key[1][0] == "A" and game.owner[i] == 0:
            tgt = game.keys[nxt[0]]
            if tgt[0] == "S" and tgt[1][0] == "D":
                letter = g.letters.get(tgt[1][1])
                choices.append({"state": repr(key[1][1]), "top": key[2], "letter": repr(letter)})
        if key[0] == "P":
            tgt = game.keys[nxt[0]]
            choices.append({"claim": repr(sorted(tgt[-1], key=repr))})
        for j in nxt:
            k2 = game.keys[j]
            if k2 not in seen:
                seen.add(k2)
                todo.append(k2)
    return {"winning_positions": len(sol.region(0)), "strategy": choices}
