"""Failure semantics of nets under progress and justness.

A failure pair (sigma, X) says: the net has a complete execution with visible
trace sigma along which every action in X is refused. Pairs are represented
compactly by witnesses (sigma, C) where C is the exact set of visible labels
of path-enabled transitions; (sigma, X) is a failure pair iff some witness
with trace sigma has C disjoint from X.

Traces are finite tuples of action names (the success label prints as "w"),
or (prefix, cycle) pairs in canonical form for ultimately periodic traces of
infinite executions.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache

from .net import TAU, SUCCESS, is_visible, parallel
from .paths import (
    Bounds, FinPath, Lasso, INDIVIDUAL, closed_walks, marking_key,
    path_enabled_set, path_word, reach,
)


@dataclass(frozen=True)
class FailureWitness:
    """A complete execution's trace together with the exact visible labels C
    of its path-enabled transitions; it represents (trace, X) for X ∩ C = ∅."""
    trace: tuple
    enabled: frozenset

    @property
    def is_lasso(self):
        """True when the trace is an infinite (prefix, cycle) pair."""
        return len(self.trace) == 2 and isinstance(self.trace[0], tuple)


def witness_key(w):
    """Deterministic sort key: finite traces first, then lasso traces."""
    if w.is_lasso:
        return (1, w.trace[0], w.trace[1], tuple(sorted(w.enabled)))
    return (0, w.trace, (), tuple(sorted(w.enabled)))


def canon_lasso_trace(prefix, cycle):
    """Canonical form of the ultimately periodic word prefix.cycle^omega:
    the cycle is reduced to its primitive root and the prefix is shortest.
    Two such words are equal iff their canonical forms are."""
    cycle = tuple(cycle)
    if not cycle:
        raise ValueError("cycle word must be non-empty")
    k = len(cycle)
    for d in range(1, k + 1):
        if k % d == 0 and cycle[:d] * (k // d) == cycle:
            cycle = cycle[:d]
            break
    u, v = list(prefix), tuple(cycle)
    while u and u[-1] == v[-1]:
        u.pop()
        v = (v[-1],) + v[:-1]
    return (tuple(u), v)


def canon_trace(trace):
    """Normalize a finite tuple or a (prefix, cycle) pair; an empty cycle
    collapses to the finite prefix."""
    if len(trace) == 2 and isinstance(trace[0], tuple):
        prefix, cycle = trace
        if not cycle:
            return tuple(prefix)
        return canon_lasso_trace(prefix, cycle)
    return tuple(trace)


def trace_json(trace):
    """JSON-friendly trace rendering."""
    if len(trace) == 2 and isinstance(trace[0], tuple):
        return {"prefix": list(trace[0]), "cycle": list(trace[1])}
    return list(trace)


@dataclass(frozen=True)
class Failures:
    """The witness set of one net, tagged with the bounds used to compute it
    and whether the search saw the whole state space."""
    witnesses: frozenset
    bounds: Bounds
    complete: bool

    def __iter__(self):
        return iter(sorted(self.witnesses, key=witness_key))

    def __len__(self):
        return len(self.witnesses)


def _symbol(label):
    if label is TAU:
        return None
    if label is SUCCESS:
        return "w"
    return label


def _trace_states(net, g, bounds):
    """All (marking, trace) pairs reachable in the marking graph with traces
    no longer than max_trace_len."""
    start = (g.root, ())
    visited = {start}
    frontier = [start]
    while frontier:
        fresh = []
        for m, sigma in frontier:
            for t, m2 in g.succ.get(m, ()):
                sym = _symbol(net.label[t])
                s2 = sigma if sym is None else sigma + (sym,)
                if len(s2) > bounds.max_trace_len:
                    continue
                state = (m2, s2)
                if state not in visited:
                    visited.add(state)
                    fresh.append(state)
        frontier = fresh
    return visited


def _minimize(csets):
    """Keep only the set-inclusion-minimal label sets."""
    return {c for c in csets if not any(d < c for d in csets)}


def failures(net, criterion="justness", bounds=None, mode=INDIVIDUAL):
    """Compute the witness set of a net.

    Finite complete executions are found by a trace-bounded walk of the
    marking graph; infinite ones by closed walks through each reachable
    marking, checked for path-enabled transitions around the cycle. An
    all-silent cycle yields a finite-trace witness (divergence)."""
    if criterion not in ("justness", "progress"):
        raise ValueError("criterion must be justness or progress")
    bounds = bounds or Bounds()
    g = reach(net, bounds.max_nodes)
    complete = not g.truncated
    states = _trace_states(net, g, bounds)

    by_trace = defaultdict(set)
    for m, sigma in states:
        labs = {net.label[t] for t in net.enabled_transitions(m)}
        if TAU in labs or SUCCESS in labs:
            continue
        by_trace[sigma].add(frozenset(l for l in labs if is_visible(l)))

    prefixes = defaultdict(set)
    for m, sigma in states:
        prefixes[m].add(sigma)

    budget = max(bounds.max_nodes, 1) * 5
    for m in sorted(g.succ, key=marking_key):
        if m not in prefixes:
            continue
        for walk in closed_walks(g, m, bounds.max_cycle_len):
            if budget <= 0:
                complete = False
                break
            budget -= 1
            lasso = Lasso(FinPath(m), walk)
            cyc_word = path_word(net, [t for t, _ in walk])
            if criterion == "justness":
                pe = path_enabled_set(net, lasso, mode)
                labs = {net.label[t] for t in pe}
                if TAU in labs or SUCCESS in labs:
                    continue
                c = frozenset(l for l in labs if is_visible(l))
            else:
                c = frozenset()
            for sigma in prefixes[m]:
                if cyc_word:
                    tr = canon_lasso_trace(sigma, cyc_word)
                else:
                    tr = sigma
                by_trace[tr].add(c)
        if budget <= 0:
            break

    ws = frozenset(FailureWitness(tr, c)
                   for tr, csets in by_trace.items()
                   for c in _minimize(csets))
    return Failures(ws, bounds, complete)


def represented(fails, sigma, x):
    """Is (sigma, x) a failure pair of the witnessed net?"""
    tr = canon_trace(sigma)
    x = frozenset(x)
    return any(w.trace == tr and not (w.enabled & x) for w in fails.witnesses)


def refusal_antichain(fails, sigma):
    """The minimal enabled-label sets recorded for one trace."""
    tr = canon_trace(sigma)
    return {w.enabled for w in fails.witnesses if w.trace == tr}


def trace_set(fails, b):
    """F_B as a trace set: traces having a witness with C ⊆ b."""
    b = frozenset(b)
    return {w.trace for w in fails.witnesses if w.enabled <= b}


def expand_pairs(fails, alphabet):
    """All explicit finite-trace failure pairs (sigma, X) with X over the
    given alphabet. Exponential in the alphabet; for small examples only."""
    alphabet = sorted(set(alphabet))
    subsets = [frozenset()]
    for a in alphabet:
        subsets += [s | {a} for s in subsets]
    out = set()
    for w in fails.witnesses:
        if w.is_lasso:
            continue
        for x in subsets:
            if not (x & w.enabled):
                out.add((w.trace, x))
    return out


@dataclass
class LeqReport:
    """Outcome of a bounded preorder check."""
    verdict: str  # holds_within_bounds | fails | inconclusive
    counterexample: object  # None or (trace, refusal tuple)
    bounds: Bounds
    witness_counts: dict
    criterion: str = "justness"
    b: object = None

    def to_dict(self):
        d = {
            "verdict": self.verdict,
            "bounds": {
                "max_trace_len": self.bounds.max_trace_len,
                "max_prefix_len": self.bounds.max_prefix_len,
                "max_cycle_len": self.bounds.max_cycle_len,
                "max_nodes": self.bounds.max_nodes,
            },
            "witness_counts": self.witness_counts,
        }
        if self.counterexample is not None:
            tr, refusal = self.counterexample
            d["counterexample"] = {"trace": trace_json(tr),
                                   "refusal": sorted(refusal)}
        return d


def leq(n1, n2, criterion="justness", b=None, bounds=None, mode=INDIVIDUAL):
    """Bounded check of the failure preorder: does n1's failure set contain
    n2's? With b given, compares F_B trace sets instead."""
    bounds = bounds or Bounds()
    f1 = failures(n1, criterion, bounds, mode)
    f2 = failures(n2, criterion, bounds, mode)
    alphabet = frozenset(n1.alphabet) | frozenset(n2.alphabet)
    counts = {"left": len(f1), "right": len(f2)}

    violation = None
    if b is None:
        mine = defaultdict(set)
        for w in f1.witnesses:
            mine[w.trace].add(w.enabled)
        for w in sorted(f2.witnesses, key=witness_key):
            if not any(c <= w.enabled for c in mine.get(w.trace, ())):
                violation = (w.trace, tuple(sorted(alphabet - w.enabled)))
                break
    else:
        b = frozenset(b)
        t1 = trace_set(f1, b)
        for tr in sorted(trace_set(f2, b), key=lambda t: witness_key(FailureWitness(t, frozenset()))):
            if tr not in t1:
                violation = (tr, tuple(sorted(alphabet - b)))
                break

    if violation is not None:
        verdict = "fails" if f1.complete else "inconclusive"
        return LeqReport(verdict, violation, bounds, counts, criterion, b)
    verdict = "holds_within_bounds" if (f1.complete and f2.complete) else "inconclusive"
    return LeqReport(verdict, None, bounds, counts, criterion, b)


def merge_traces(s, r, a, limit=None):
    """The set of synchronized interleavings of two finite words: actions in
    the sync set a must pair up, all others interleave freely."""
    s, r, a = tuple(s), tuple(r), frozenset(a)

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(s) and j == len(r):
            return frozenset([()])
        out = set()
        if i < len(s):
            if s[i] not in a:
                out |= {(s[i],) + w for w in go(i + 1, j)}
            elif j < len(r) and r[j] == s[i]:
                out |= {(s[i],) + w for w in go(i + 1, j + 1)}
        if j < len(r) and r[j] not in a:
            out |= {(r[j],) + w for w in go(i, j + 1)}
        return frozenset(out)

    merged = go(0, 0)
    if limit is not None:
        merged = frozenset(w for w in merged if len(w) <= limit)
    return merged


@dataclass
class Claim6Report:
    """Comparison of a composed net's finite-trace witnesses against the set
    predicted from its components' witnesses."""
    equal: bool
    complete: bool
    only_direct: list
    only_formula: list
    bounds: Bounds

    @property
    def verdict(self):
        if self.only_direct or self.only_formula:
            return "discrepancy"
        return "equal_within_bounds" if self.complete else "inconclusive"

    def to_dict(self):
        def row(items):
            return [{"trace": trace_json(t), "enabled": sorted(c)} for t, c in items]
        return {
            "verdict": self.verdict,
            "bounds": {"max_trace_len": self.bounds.max_trace_len,
                       "max_nodes": self.bounds.max_nodes},
            "only_direct": row(self.only_direct),
            "only_formula": row(self.only_formula),
        }


def _finite_antichains(fails):
    by_trace = defaultdict(set)
    for w in fails.witnesses:
        if not w.is_lasso:
            by_trace[w.trace].add(w.enabled)
    return {tr: frozenset(_minimize(cs)) for tr, cs in by_trace.items()}


def claim6_check(n1, n2, a, bounds=None, mode=INDIVIDUAL):
    """Check the parallel-decomposition law on finite traces: the composed
    witnesses must match those predicted by pairing component witnesses with
    C = (C1 ∩ C2 ∩ a) ∪ ((C1 ∪ C2) ∖ a) over all trace merges."""
    bounds = bounds or Bounds()
    a = frozenset(a)
    direct_f = failures(parallel(n1, n2, a), "justness", bounds, mode)
    f1 = failures(n1, "justness", bounds, mode)
    f2 = failures(n2, "justness", bounds, mode)

    predicted = defaultdict(set)
    for w1 in f1.witnesses:
        if w1.is_lasso:
            continue
        for w2 in f2.witnesses:
            if w2.is_lasso:
                continue
            c = (w1.enabled & w2.enabled & a) | ((w1.enabled | w2.enabled) - a)
            for tr in merge_traces(w1.trace, w2.trace, a, limit=bounds.max_trace_len):
                predicted[tr].add(c)
    formula = {tr: frozenset(_minimize(cs)) for tr, cs in predicted.items()}
    direct = _finite_antichains(direct_f)

    only_direct = sorted(
        ((tr, c) for tr in direct for c in direct[tr] - formula.get(tr, frozenset())),
        key=lambda it: (it[0], tuple(sorted(it[1]))))
    only_formula = sorted(
        ((tr, c) for tr in formula for c in formula[tr] - direct.get(tr, frozenset())),
        key=lambda it: (it[0], tuple(sorted(it[1]))))
    complete = direct_f.complete and f1.complete and f2.complete
    return Claim6Report(not only_direct and not only_formula and complete,
                        complete, only_direct, only_formula, bounds)
