"""Module checking pipeline for pushdown multi-agent systems.

``module_check`` decides whether every environment pruning of the system's
unwinding satisfies a formula: it builds an automaton for the negated
formula and checks that the combined tree automaton accepts nothing.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from . import logic as L
from .acg import atl_to_acg, atlstar_to_acg, dualize
from .errors import CheckError, FragmentError
from .npta import (build_acc_nta, build_pwf, explore, intersect, project,
                   project_pwf_labels, root_move)
from .pushdown import emptiness
from .system_model import Pms, branching_degree, enumerate_prunings, unwind_bounded
from .word_automata import build_violation_nw, codeterminize

MODULE = "module"
MODEL = "model"


@dataclass
class Verdict:
    satisfied: bool
    mode: str
    stats: dict = field(default_factory=dict)
    certificate: dict | None = None
    dumps: dict = field(default_factory=dict)

    @property
    def satisfiedReactively(self) -> bool:  # noqa: N802 - mirrors the field name in reports
        return self.satisfied


def _log2_pow(base, exp):
    return exp * math.log2(base) if base > 1 else 0.0


def negated_acg(phi: L.Formula, budget: int = 64):
    """ACG for the negation of ``phi`` plus its extra propositions."""
    if L.is_atl(phi):
        return dualize(atl_to_acg(phi)), ()
    neg = atlstar_to_acg(L.Not(phi), budget=budget)
    return neg, neg.extra_props


def module_check(pms: Pms, phi: L.Formula, *, budget: int = 64, dpw_cap: int = 512,
                 max_positions: int = 400_000, reduced: bool = True,
                 dump: tuple = (), mode: str = MODULE) -> Verdict:
    t0 = time.perf_counter()
    timings = {}

    def lap(name, start):
        timings[name] = round(time.perf_counter() - start, 4)
        return time.perf_counter()

    if not L.is_state_formula(phi):
        raise FragmentError("the input must be a state formula", stage="translate")
    t = time.perf_counter()
    pms.check_open()
    acg, extra = _stage("translate", negated_acg, phi, budget)
    t = lap("translate", t)
    viol = build_violation_nw(acg, root_move(acg))
    dpw = _stage("determinize", codeterminize, viol, dpw_cap)
    t = lap("determinize", t)
    k = branching_degree(pms)
    pwf = build_pwf(pms, acg, extra, reduced=reduced)
    acc = build_acc_nta(dpw, k)
    product = intersect(pwf, acc)
    final = project(product, project_pwf_labels(extra))
    t = lap("build", t)
    res = emptiness(final, max_positions=max_positions)
    t = lap("emptiness", t)
    pwf_stats = explore(pwf)
    dpw_states = len({s for s, _ in dpw._memo} | {s for s, _ in dpw._memo.values()})
    n = len(acg.states) * max(1, len(acg.atoms))
    h = acg.index
    stats = {
        "mode": mode,
        "formula": L.pretty(phi),
        "pms": {"states": len(pms.states), "stack_symbols": len(pms.stack_symbols),
                "transitions": pms.size, "branching": k},
        "acg": {"states": len(acg.states), "atoms": len(acg.atoms), "index": h,
                "extra_props": list(extra)},
        "violation": {"states": 1 + len(acg.moves()), "index": viol.index, "n": n, "h": h},
        "dpw": {"states_explored": dpw_states,
                "bound_log2_nh_pow_nh": round(_log2_pow(n * h, n * h), 2)},
        "pwf": dict(pwf_stats, bound_log2_states=round(
            math.log2(len(pms.states) * 3) + len(acg.states) * len(acg.atoms), 2),
            rho_norm_bound=pms.size),
        "emptiness": res.stats,
        "timings": timings,
        "total_seconds": round(time.perf_counter() - t0, 4),
    }
    dumps = {}
    if "acg" in dump:
        dumps["acg"] = acg.dump()
    if "dpw" in dump:
        from .npta import BOT
        letters = sorted({a for (_, a) in dpw._memo if a != BOT}, key=repr)
        dumps["dpw"] = dpw.dump(letters[:16], cap=dpw_cap) if letters else "DPW (no letters read)"
    if "npta" in dump:
        from .npta import dump as npta_dump
        dumps["npta"] = npta_dump(pwf)
    return Verdict(res.empty, mode, stats, res.certificate, dumps)


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except CheckError as e:
        if e.stage is None:
            e.stage = name
        raise


def model_check(pms: Pms, phi: L.Formula, **kw) -> Verdict:
    """Check the unwinding only: every pair is treated as a system pair."""
    return module_check(pms.as_closed(), phi, mode=MODEL, **kw)


def check(pms: Pms, phi: L.Formula, mode: str = MODULE, **kw) -> Verdict:
    if mode == MODEL:
        return model_check(pms, phi, **kw)
    return module_check(pms, phi, **kw)


# ------------------------------------------------------------------ oracle

@dataclass
class OracleVerdict:
    satisfied: bool
    negation_satisfied: bool
    prunings: int


def oracle_module_check(pms: Pms, phi: L.Formula, depth: int, limit: int = 100_000) -> OracleVerdict:
    """Explicit check over all prunings of the depth-bounded unwinding.

    Exact for formulas whose only temporal operator is next, with nesting
    at most ``depth``.  Also reports whether every pruning satisfies the
    negation, which is a different question.
    """
    if not L.only_next(phi):
        raise FragmentError("the oracle handles next-time formulas only", stage="oracle")
    if L.temporal_depth(phi) > depth:
        raise FragmentError(f"next-nesting {L.temporal_depth(phi)} exceeds depth {depth}",
                            stage="oracle")
    tree = unwind_bounded(pms, depth)
    sat = True
    neg = True
    count = 0
    for t in enumerate_prunings(tree, limit):
        count += 1
        v = L.eval_finite(t, phi)[()]
        sat = sat and v
        neg = neg and not v
    return OracleVerdict(sat, neg, count)
