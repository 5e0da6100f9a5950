"""May, should, and must testing of nets, universal tests, and the
separation construction built on them.

A test is a net with success transitions (the reserved label w). Applying a
test synchronizes it with the net under test on every visible action and
hides them all, so the composition's transitions carry only silent and
success labels. A marking is a success marking when it enables a success
transition; a path is successful when it contains one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mset import Multiset
from .net import Net, RESERVED_ACTIONS, SUCCESS, TAU, abstract, is_visible, parallel
from .paths import (
    Bounds, FinPath, Lasso, INDIVIDUAL, MarkingGraph, closed_walks,
    marking_key, path_enabled_set, reach,
)
from .failures import failures, leq, trace_json, trace_set


class TestingError(Exception):
    """Malformed test or misuse of the testing operators."""


@dataclass(frozen=True)
class Test:
    """A net acting as a test. Strict tests must be able to report success."""
    net: Net
    strict: bool = True

    def __post_init__(self):
        has_w = any(l is SUCCESS for l in self.net.label.values())
        if self.strict and not has_w:
            raise TestingError("a test needs at least one success transition")


def _as_test(t):
    return t if isinstance(t, Test) else Test(t)


def apply(t, n):
    """Compose test and net: synchronize on all visible actions of either
    side, then hide them. Only silent and success labels remain."""
    t = _as_test(t)
    if any(l is SUCCESS for l in n.label.values()):
        raise TestingError("the net under test must not contain the success label")
    acts = {a for a in (set(t.net.alphabet) | set(n.alphabet)) if is_visible(a)}
    return abstract(parallel(t.net, n, acts), acts)


def is_success_marking(net, m):
    """Does the marking enable a success transition?"""
    return any(net.label[u] is SUCCESS for u in net.enabled_transitions(m))


@dataclass
class Verdict:
    """Pass, Fail with a replayable witness, or Inconclusive under bounds."""
    outcome: str
    witness: object = None
    bounds: object = None
    net: object = None

    @property
    def exit_code(self):
        return {"Pass": 0, "Fail": 1, "Inconclusive": 2}[self.outcome]

    def to_dict(self):
        d = {"verdict": self.outcome}
        if self.bounds is not None:
            d["bounds"] = {
                "max_trace_len": self.bounds.max_trace_len,
                "max_prefix_len": self.bounds.max_prefix_len,
                "max_cycle_len": self.bounds.max_cycle_len,
                "max_nodes": self.bounds.max_nodes,
            }
        return d


def _bfs_parents(g, blocked=frozenset()):
    """BFS from the root avoiding blocked nodes; returns visiting order and
    a parent map for path reconstruction."""
    if g.root in blocked:
        return [], {}
    order = [g.root]
    parents = {g.root: None}
    i = 0
    while i < len(order):
        m = order[i]
        i += 1
        for u, m2 in g.succ.get(m, ()):
            if m2 in blocked or m2 in parents:
                continue
            parents[m2] = (m, u)
            order.append(m2)
    return order, parents


def _path_to(g, parents, target, net=None):
    steps = []
    m = target
    while parents[m] is not None:
        prev, u = parents[m]
        steps.append((u, m))
        m = prev
    steps.reverse()
    return FinPath(g.root, steps, net=net)


def may(t, n, bounds=None):
    """Is some path of the composition successful?"""
    bounds = bounds or Bounds()
    net = apply(t, n)
    g = reach(net, bounds.max_nodes)
    order, parents = _bfs_parents(g)
    for m in order:
        if is_success_marking(net, m):
            return Verdict("Pass", _path_to(g, parents, m, net), bounds, net)
    return Verdict("Inconclusive" if g.truncated else "Fail", None, bounds, net)


def should(t, n, bounds=None):
    """Can every finite path of the composition be extended to a successful
    one? Equivalently: every marking reached without passing success can
    still reach a success marking."""
    bounds = bounds or Bounds()
    net = apply(t, n)
    g = reach(net, bounds.max_nodes)
    if g.truncated:
        return Verdict("Inconclusive", None, bounds, net)
    success = {m for m in g.succ if is_success_marking(net, m)}
    if g.root in success:
        return Verdict("Pass", None, bounds, net)
    order, parents = _bfs_parents(g, blocked=success)
    can_reach = _reverse_reach(g, success)
    for m in order:
        if m not in can_reach:
            return Verdict("Fail", _path_to(g, parents, m, net), bounds, net)
    return Verdict("Pass", None, bounds, net)


def _reverse_reach(g, targets):
    back = {}
    for m in g.succ:
        for _, m2 in g.succ[m]:
            back.setdefault(m2, set()).add(m)
    seen = set(targets)
    frontier = list(targets)
    while frontier:
        m = frontier.pop()
        for p in back.get(m, ()):
            if p not in seen:
                seen.add(p)
                frontier.append(p)
    return seen


def must(t, n, criterion="justness", bounds=None, mode=INDIVIDUAL):
    """Is every complete path of the composition successful?

    Searches for an unsuccessful complete path among the success-free
    markings: a full deadlock, or (progress) any cycle, or (justness) a
    closed walk with no path-enabled transition at all."""
    if criterion not in ("justness", "progress"):
        raise ValueError("criterion must be justness or progress")
    bounds = bounds or Bounds()
    net = apply(t, n)
    g = reach(net, bounds.max_nodes)
    complete = not g.truncated
    success = {m for m in g.succ if is_success_marking(net, m)}
    if g.root in success:
        return Verdict("Pass", None, bounds, net)
    order, parents = _bfs_parents(g, blocked=success)
    hnodes = set(order)

    for m in order:
        if not g.succ.get(m) and not net.enabled_transitions(m):
            return Verdict("Fail", _path_to(g, parents, m, net), bounds, net)

    hsucc = {m: [(u, m2) for (u, m2) in g.succ[m] if m2 in hnodes]
             for m in hnodes}
    if criterion == "progress":
        cyc = _find_cycle(hsucc)
        if cyc is not None:
            entry, steps = cyc
            prefix = _path_to(g, parents, entry, net)
            return Verdict("Fail", Lasso(prefix, steps, net=net), bounds, net)
    else:
        hgraph = MarkingGraph(g.root, hsucc, g.truncated)
        budget = max(bounds.max_nodes, 1) * 5
        for m in sorted(hnodes, key=marking_key):
            for walk in closed_walks(hgraph, m, bounds.max_cycle_len):
                if budget <= 0:
                    complete = False
                    break
                budget -= 1
                if not path_enabled_set(net, Lasso(FinPath(m), walk), mode):
                    prefix = _path_to(g, parents, m, net)
                    return Verdict("Fail", Lasso(prefix, walk, net=net),
                                   bounds, net)
            if budget <= 0:
                break
    return Verdict("Pass" if complete else "Inconclusive", None, bounds, net)


def _find_cycle(succ):
    """First cycle in a successor map, as (entry marking, cycle steps)."""
    seen = set()
    for start in sorted(succ, key=marking_key):
        if start in seen:
            continue
        stack = [(start, iter(sorted(succ[start], key=lambda e: marking_key(e[1]))))]
        on_stack = {start: 0}
        trail = []
        while stack:
            m, it = stack[-1]
            advanced = False
            for u, m2 in it:
                if m2 in on_stack:
                    k = on_stack[m2]
                    steps = trail[k:] + [(u, m2)]
                    return m2, steps
                if m2 in seen:
                    continue
                trail.append((u, m2))
                on_stack[m2] = len(trail)
                stack.append((m2, iter(sorted(succ[m2], key=lambda e: marking_key(e[1])))))
                advanced = True
                break
            if not advanced:
                seen.add(m)
                del on_stack[m]
                if trail:
                    trail.pop()
                stack.pop()
    return None


def universal_test(sigma, x=()):
    """The test T(sigma, x): passes the composition with K exactly when K
    cannot exhibit the failure pair (sigma, x).

    A chain of places walks through sigma (a finite word, or a (prefix,
    cycle) pair walked forever); every chain place has a silent escape to a
    place whose sole consumer reports success, so neglecting the chain is
    unjust and deviating is successful. A separately marked monitor offers
    each action of x, followed by an inescapable success."""
    is_pair = len(sigma) == 2 and isinstance(sigma[0], (tuple, list))
    u = list(sigma[0]) if is_pair else list(sigma)
    v = list(sigma[1]) if is_pair else []
    x = sorted(set(x))
    for sym in u + v + x:
        if not is_visible(sym) or sym in RESERVED_ACTIONS:
            raise TestingError("not a visible action: %r" % (sym,))

    places = {"e", "d"}
    flow = {}
    label = {}
    m0 = {"d": 1}
    chain = ["q%d" % i for i in range(len(u))]
    ring = ["r%d" % j for j in range(len(v))]
    places.update(chain + ring)
    seq = chain + ring
    if seq:
        m0[seq[0]] = 1
    for i, a in enumerate(u):
        ti = "s%d" % i
        label[ti] = a
        flow[(chain[i], ti)] = 1
        if i + 1 < len(chain):
            flow[(ti, chain[i + 1])] = 1
        elif ring:
            flow[(ti, ring[0])] = 1
    for j, a in enumerate(v):
        tj = "c%d" % j
        label[tj] = a
        flow[(ring[j], tj)] = 1
        flow[(tj, ring[(j + 1) % len(ring)])] = 1
    for k, p in enumerate(seq):
        te = "esc%d" % k
        label[te] = TAU
        flow[(p, te)] = 1
        flow[(te, "e")] = 1
    label["we"] = SUCCESS
    flow[("e", "we")] = 1
    for b in x:
        pb = "p_" + b
        places.add(pb)
        label["m_" + b] = b
        flow[("d", "m_" + b)] = 1
        flow[("m_" + b, pb)] = 1
        label["w_" + b] = SUCCESS
        flow[(pb, "w_" + b)] = 1
    net = Net(places, set(label), flow, {}, Multiset(m0), label,
              alphabet=set(u) | set(v) | set(x), name="universal-test")
    return Test(net)


@dataclass
class ClosureReport:
    """Outcome of mechanizing the separation argument: when the plain
    preorder fails, the universal test for its counterexample separates the
    composed-and-hidden nets in the B-failure sense."""
    leq_verdict: str
    separated: object  # True/False, or None when leq did not fail
    counterexample: object
    test: object
    b: frozenset

    def to_dict(self):
        d = {"leq_verdict": self.leq_verdict, "b": sorted(self.b)}
        if self.counterexample is not None:
            tr, refusal = self.counterexample
            d["counterexample"] = {"trace": trace_json(tr),
                                   "refusal": sorted(refusal)}
        if self.separated is None:
            d["verdict"] = "no separation (leq %s)" % self.leq_verdict
        else:
            d["verdict"] = "separated" if self.separated else "not separated"
        return d


def closure_separation(n, n2, b=frozenset(), bounds=None, mode=INDIVIDUAL):
    """If n's failures do not contain n2's, build the universal test for the
    missing pair and check that the empty trace separates the applied
    compositions' B-failure sets."""
    bounds = bounds or Bounds()
    b = frozenset(b)
    r = leq(n, n2, "justness", None, bounds, mode)
    if r.verdict != "fails":
        return ClosureReport(r.verdict, None, None, None, b)
    sigma, refusal = r.counterexample
    t = universal_test(sigma, refusal)
    f1 = failures(apply(t, n), "justness", bounds, mode)
    f2 = failures(apply(t, n2), "justness", bounds, mode)
    separated = (() in trace_set(f2, b)) and (() not in trace_set(f1, b))
    return ClosureReport(r.verdict, separated, (sigma, refusal), t, b)
