"""Timed semantics for safe nets: residual clocks on enabled transitions,
timed execution paths, the slowest schedule of an untimed path, must-testing
against a deadline, and the untimed eventually-succeeds criterion.

Every enabled transition carries a clock in [0, 1], the time left until it
must fire or be disabled. Time may advance by r only when no clock is
smaller than r, so an enabled transition never idles past one time unit.
Firing is instantaneous; a transition still enabled once the fired
transition's input tokens are removed keeps its clock, everything else
enabled in the new marking starts afresh at 1.

The slowest schedule of a firing sequence lets a full unit pass whenever
every enabled transition has a fresh clock. Its duration, plus trailing
idle time at the end (forever at a deadlock, one unit when all clocks are
fresh, nothing when some clock has hit zero), is the longest time any
schedule of that sequence can stretch to. A composed test therefore fails
a deadline exactly when some success-free firing sequence stretches past
it, which reduces to a longest-walk problem over pairs (marking, set of
transitions carried since the last full unit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import networkx as nx

from .net import SUCCESS, is_safe, render_id
from .paths import (
    Bounds, FinPath, INDIVIDUAL, Lasso, MarkingGraph, closed_walks,
    marking_key, path_enabled_set, reach,
)
from .testing import Test, Verdict, _as_test, _bfs_parents, _path_to, apply

INF = math.inf


class TimedError(Exception):
    """Misuse of the timed semantics or an unmet precondition."""


class NotEnabled(TimedError):
    """Attempt to fire a transition the current marking does not enable."""


class TimeExceedsDeadline(TimedError):
    """Attempt to pass more time than some enabled transition has left."""


def _frac(x, what="value"):
    """Coerce to an exact rational; floats are refused to keep time exact."""
    if isinstance(x, bool) or isinstance(x, float):
        raise TimedError("%s must be an exact rational, got %r" % (what, x))
    try:
        return Fraction(x)
    except (TypeError, ValueError):
        raise TimedError("%s must be an exact rational, got %r" % (what, x))


@dataclass(frozen=True)
class TimeStep:
    """Passage of r time units; legal only when no enabled clock is below r."""
    r: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", _frac(self.r, "time step"))
        if self.r <= 0:
            raise TimedError("time steps must be positive")


@dataclass(frozen=True)
class Cid:
    """A marking together with residual clocks for exactly the transitions
    it enables, each in [0, 1]."""
    marking: object
    clocks: dict

    def __post_init__(self):
        fixed = {t: _frac(v, "clock") for t, v in self.clocks.items()}
        for t, v in fixed.items():
            if not 0 <= v <= 1:
                raise TimedError("clock of %s out of [0, 1]: %s" % (render_id(t), v))
        object.__setattr__(self, "clocks", fixed)

    __hash__ = None

    def min_clock(self):
        """Largest time that may pass; infinite when nothing is enabled."""
        return min(self.clocks.values(), default=INF)


def _check_timed(net, max_nodes=100000):
    """The timed semantics covers safe nets whose transitions all consume
    something; a transition with an empty preset could fire at every instant
    and has no meaningful clock. Nets here are finite structures, so every
    marking branches finitely and only these two conditions need checking."""
    for t in net.sorted_transitions():
        if not net.preset(t):
            raise TimedError(
                "transition %s has an empty preset" % render_id(t))
    safe = is_safe(net, max_nodes)
    if safe is False:
        raise TimedError("net is not safe")
    if safe is None:
        raise TimedError("could not verify safety within %d markings" % max_nodes)


def _fresh_cid(net, m):
    return Cid(m, {t: Fraction(1) for t in net.enabled_transitions(m)})


def initial_cid(net):
    """The starting clocked state: the initial marking with every enabled
    transition's clock at 1."""
    _check_timed(net)
    return _fresh_cid(net, net.m0)


def timed_fire(net, c, eta):
    """One step of the timed semantics from a clocked state.

    Firing an enabled transition takes no time. Clocks carry over exactly
    for transitions still enabled once the fired transition's input tokens
    are gone; every other transition enabled in the new marking gets a
    fresh clock of 1, the fired transition included if it re-enables
    itself. Passing time r subtracts r from every clock and is legal only
    when no clock is smaller than r."""
    if isinstance(eta, TimeStep):
        eta = eta.r
    if isinstance(eta, float):
        raise TimedError("time steps must be exact rationals, got %r" % eta)
    if isinstance(eta, (int, Fraction)):
        r = Fraction(eta)
        if r <= 0:
            raise TimedError("time steps must be positive")
        if r > c.min_clock():
            raise TimeExceedsDeadline(
                "cannot pass %s time units: smallest clock is %s"
                % (r, c.min_clock()))
        return Cid(c.marking, {t: v - r for t, v in c.clocks.items()})
    t = eta
    try:
        ok = net.enabled1(c.marking, t)
    except KeyError:
        ok = False
    if not ok:
        raise NotEnabled("transition %s is not enabled" % render_id(t))
    m2 = net.fire1(c.marking, t)
    keep = c.marking - net.preset(t)
    clocks = {}
    for u in net.enabled_transitions(m2):
        if u in c.clocks and net.enabled1(keep, u):
            clocks[u] = c.clocks[u]
        else:
            clocks[u] = Fraction(1)
    return Cid(m2, clocks)


class TimedPath:
    """A starting clocked state and steps (transition or TimeStep, resulting
    clocked state), each a valid move of the timed semantics."""

    __slots__ = ("start", "steps")

    def __init__(self, start, steps=(), net=None):
        self.start = start
        self.steps = list(steps)
        if net is not None:
            c = start
            for eta, c2 in self.steps:
                c = timed_fire(net, c, eta)
                if c != c2:
                    raise ValueError("invalid timed path: wrong successor state")

    @property
    def final(self):
        return self.steps[-1][1] if self.steps else self.start

    def untimed(self, net=None):
        """The firing sequence alone, as a plain finite path."""
        steps = [(eta, c.marking) for eta, c in self.steps
                 if not isinstance(eta, TimeStep)]
        return FinPath(self.start.marking, steps, net=net)

    def __len__(self):
        return len(self.steps)

    def __repr__(self):
        return "TimedPath(%d steps)" % len(self.steps)


class TimedLasso:
    """A timed path followed by a non-empty cycle of timed steps that
    returns to the same clocked state, standing for prefix . cycle^omega."""

    __slots__ = ("prefix", "cycle")

    def __init__(self, prefix, cycle, net=None):
        if not cycle:
            raise ValueError("timed lasso cycle must be non-empty")
        self.prefix = prefix
        self.cycle = list(cycle)
        if net is not None:
            c = prefix.final
            for eta, c2 in self.cycle:
                c = timed_fire(net, c, eta)
                if c != c2:
                    raise ValueError("invalid timed cycle: wrong successor state")
            if c != prefix.final:
                raise ValueError("timed cycle does not return to its entry state")

    @property
    def entry(self):
        return self.prefix.final

    def __repr__(self):
        return "TimedLasso(%d+%d steps)" % (len(self.prefix), len(self.cycle))


def duration(p):
    """Total time of a timed path; a timed lasso lasts forever exactly when
    its cycle contains a time step."""
    if isinstance(p, TimedLasso):
        if any(isinstance(eta, TimeStep) for eta, _ in p.cycle):
            return INF
        return duration(p.prefix)
    return sum((eta.r for eta, _ in p.steps if isinstance(eta, TimeStep)),
               Fraction(0))


@dataclass(frozen=True)
class TimedTest:
    """A test together with the deadline by which it must have succeeded."""
    test: Test
    duration: Fraction

    def __post_init__(self):
        object.__setattr__(self, "test", _as_test(self.test))
        object.__setattr__(self, "duration", _frac(self.duration, "deadline"))
        if self.duration < 0:
            raise TimedError("the deadline must be non-negative")


def _carry(net, t_en, m, t):
    """Transitions of t_en still enabled once t's input tokens are gone from
    m; exactly these keep their clocks when t fires."""
    keep = m - net.preset(t)
    return frozenset(u for u in t_en if net.enabled1(keep, u))


def _replay_path(net, p):
    """Validate p against net, raising TimedError instead of ValueError."""
    try:
        if isinstance(p, Lasso):
            prefix = FinPath(p.prefix.start, p.prefix.steps, net=net)
            return Lasso(prefix, p.cycle, net=net)
        return FinPath(p.start, p.steps, net=net)
    except (ValueError, KeyError) as e:
        raise TimedError("not a path of the net: %s" % e)


def _slowest_steps(net, cid, t_en, firings):
    """Run the slowest schedule over the given firings from (cid, t_en):
    a full time unit passes whenever no clock is at zero. Returns the added
    steps and the final (cid, t_en)."""
    steps = []
    for t in firings:
        if not t_en:
            cid = timed_fire(net, cid, Fraction(1))
            steps.append((TimeStep(Fraction(1)), cid))
            t_en = frozenset(net.enabled_transitions(cid.marking))
        m = cid.marking
        cid = timed_fire(net, cid, t)
        steps.append((t, cid))
        t_en = _carry(net, t_en, m, t)
    return steps, cid, t_en


def slowest_star(net, p):
    """The slowest schedule of a finite path, stopping right after its last
    transition: each transition fires as late as the clocks allow."""
    _check_timed(net)
    p = _replay_path(net, p)
    cid = _fresh_cid(net, p.start)
    steps, _, _ = _slowest_steps(net, cid, frozenset(), p.transitions())
    return TimedPath(cid, steps)


def slowest(net, p):
    """The slowest schedule including trailing idle time.

    A finite path that ends deadlocked idles forever (a timed lasso of time
    steps); one that ends with every clock fresh gets one last full unit;
    one that ends with a clock at zero gets nothing. For a lasso the
    schedule follows the cycle until the clocked state recurs, so its
    duration is infinite exactly when a full unit passes somewhere in the
    repeating part."""
    _check_timed(net)
    p = _replay_path(net, p)
    if isinstance(p, Lasso):
        cid = _fresh_cid(net, p.prefix.start)
        steps, cid, t_en = _slowest_steps(net, cid, frozenset(),
                                          p.prefix.transitions())
        seen = {}
        while True:
            key = (cid.marking, frozenset(cid.clocks.items()), t_en)
            if key in seen:
                cut = seen[key]
                start = _fresh_cid(net, p.prefix.start)
                return TimedLasso(TimedPath(start, steps[:cut]), steps[cut:])
            seen[key] = len(steps)
            more, cid, t_en = _slowest_steps(net, cid, t_en,
                                             p.cycle_transitions())
            steps.extend(more)
    start = _fresh_cid(net, p.start)
    steps, cid, t_en = _slowest_steps(net, start, frozenset(), p.transitions())
    if t_en:
        return TimedPath(start, steps)
    if not net.enabled_transitions(cid.marking):
        idle = timed_fire(net, cid, Fraction(1))
        return TimedLasso(TimedPath(start, steps),
                          [(TimeStep(Fraction(1)), idle)])
    cid = timed_fire(net, cid, Fraction(1))
    steps.append((TimeStep(Fraction(1)), cid))
    return TimedPath(start, steps)


def _node_key(node):
    m, t_en = node
    return (marking_key(m), tuple(sorted(render_id(u) for u in t_en)))


def _timed_graph(net, max_nodes):
    """Reachable (marking, carried set) pairs under success-free firing.

    The carried set holds the transitions whose clocks are at zero, i.e.
    enabled continuously since the last full time unit. Leaving a node with
    an empty carried set costs one time unit (the slowest schedule lets a
    unit pass first); every other move is free. The same weight is the
    longest a schedule can idle at the node before being forced to fire,
    with a deadlocked marking idling forever."""
    root = (net.m0, frozenset())
    succ = {}
    order = [root]
    parents = {root: None}
    truncated = False
    i = 0
    while i < len(order):
        node = order[i]
        i += 1
        m, t_en = node
        enabled = net.enabled_transitions(m)
        base = list(t_en) if t_en else enabled
        edges = []
        for t in enabled:
            if net.label[t] is SUCCESS:
                continue
            node2 = (net.fire1(m, t), _carry(net, base, m, t))
            edges.append((t, node2))
            if node2 not in parents:
                if len(parents) >= max_nodes:
                    truncated = True
                    continue
                parents[node2] = (node, t)
                order.append(node2)
        succ[node] = [e for e in edges if e[1] in parents]
    return order, succ, parents, truncated


def _node_path_to(parents, target):
    nodes = [target]
    while parents[nodes[-1]] is not None:
        prev, _ = parents[nodes[-1]]
        nodes.append(prev)
    nodes.reverse()
    return nodes


def _fire_along(net, nodes, succ):
    """Transition choices realizing a walk through consecutive nodes."""
    firings = []
    for a, b in zip(nodes, nodes[1:]):
        t = next(t for t, n2 in succ[a] if n2 == b)
        firings.append(t)
    return firings


def _witness(net, nodes, succ, tail):
    """The slowest timed path along the node walk, plus tail idle time."""
    start = _fresh_cid(net, net.m0)
    firings = _fire_along(net, nodes, succ)
    steps, cid, t_en = _slowest_steps(net, start, frozenset(), firings)
    if tail is not None and tail > 0:
        if tail > cid.min_clock():
            tail = cid.min_clock()
        if tail > 0:
            cid = timed_fire(net, cid, tail)
            steps.append((TimeStep(tail), cid))
    return TimedPath(start, steps, net=net)


def _scc_cycle(succ, u, members):
    """A shortest cycle through u inside its strongly connected component."""
    frontier = [u]
    back = {u: None}
    while frontier:
        nxt = []
        for a in frontier:
            for t, b in succ[a]:
                if b == u:
                    nodes = [u]
                    while a != u:
                        nodes.append(a)
                        a = back[a]
                    nodes.append(u)
                    nodes.reverse()
                    return nodes
                if b in members and b not in back:
                    back[b] = a
                    nxt.append(b)
        frontier = nxt
    raise AssertionError("no cycle through a node of its own component")


def must_timed(n, tt, bounds=None):
    """Does the net pass the timed test: is every success-free timed
    behavior of the composition over by the deadline?

    Fails exactly when a success-free schedule can outlast the deadline.
    The longest achievable success-free duration is the longest weighted
    walk over (marking, carried set) pairs; it is infinite when a deadlock
    or a weight-one cycle is reachable, and a finite maximum otherwise."""
    if not isinstance(tt, TimedTest):
        tt = TimedTest(*tt)
    bounds = bounds or Bounds()
    net = apply(tt.test, n)
    _check_timed(net)
    d = tt.duration
    order, succ, parents, truncated = _timed_graph(net, bounds.max_nodes)

    for node in order:
        if not net.enabled_transitions(node[0]):
            nodes = _node_path_to(parents, node)
            w = _witness(net, nodes, succ, None)
            pad = d - duration(w) + 1 if d >= duration(w) else Fraction(1)
            w = _witness(net, nodes, succ, pad)
            return Verdict("Fail", w, bounds, net)

    g = nx.DiGraph()
    g.add_nodes_from(succ)
    for node, edges in succ.items():
        for _, node2 in edges:
            g.add_edge(node, node2)
    comp = {}
    sccs = []
    for members in nx.strongly_connected_components(g):
        sccs.append(members)
        for node in members:
            comp[node] = len(sccs) - 1

    for node in order:
        if node[1]:
            continue
        cyclic = (len(sccs[comp[node]]) > 1
                  or any(n2 == node for _, n2 in succ[node]))
        if cyclic:
            ring = _scc_cycle(succ, node, sccs[comp[node]])
            nodes = _node_path_to(parents, node)
            need = int(d) + 2
            nodes = nodes + (ring[1:] * need)
            w = _witness(net, nodes, succ, None)
            assert duration(w) > d
            return Verdict("Fail", w, bounds, net)

    best = {}
    pred = {}
    for node in nx.topological_sort(nx.condensation(g, sccs)):
        members = sccs[node]
        weight = 1 if any(not t_en for _, t_en in members) else 0
        incoming = [(best[comp[a]], comp[a])
                    for m2 in members for a, _ in g.in_edges(m2)
                    if comp[a] != node and comp[a] in best]
        if (net.m0, frozenset()) in members:
            incoming.append((Fraction(0), None))
        if not incoming:
            continue
        val, frm = max(incoming)
        best[node] = val + weight
        pred[node] = frm
    sup = max(best.values(), default=Fraction(0))

    if sup > d:
        chain = [max(best, key=lambda c: (best[c], c))]
        while pred[chain[-1]] is not None:
            chain.append(pred[chain[-1]])
        chain.reverse()
        nodes = [(net.m0, frozenset())]
        for a, b in zip(chain, chain[1:]):
            u, v = next((u, v) for u in sorted(sccs[a], key=_node_key)
                        for _, v0 in succ[u]
                        for v in [v0] if comp[v] == b)
            nodes.extend(_inside(succ, nodes[-1], u, sccs[a])[1:])
            nodes.append(v)
        last = sccs[chain[-1]]
        target = min((x for x in last if not x[1]), key=_node_key, default=None)
        if target is not None and target != nodes[-1]:
            nodes.extend(_inside(succ, nodes[-1], target, last)[1:])
        tail = Fraction(1) if not nodes[-1][1] else None
        w = _witness(net, nodes, succ, tail)
        assert duration(w) > d
        return Verdict("Fail", w, bounds, net)
    if truncated:
        return Verdict("Inconclusive", None, bounds, net)
    return Verdict("Pass", None, bounds, net)


def _inside(succ, a, b, members):
    """A node walk from a to b staying inside one strongly connected
    component (trivial when a equals b)."""
    if a == b:
        return [a]
    frontier = [a]
    back = {a: None}
    while frontier:
        nxt = []
        for x in frontier:
            for _, y in succ[x]:
                if y in members and y not in back:
                    back[y] = x
                    if y == b:
                        nodes = [b]
                        while back[nodes[-1]] is not None:
                            nodes.append(back[nodes[-1]])
                        nodes.reverse()
                        return nodes
                    nxt.append(y)
        frontier = nxt
    raise AssertionError("nodes not connected inside their component")


def must_eventually(n, t, bounds=None, mode=INDIVIDUAL):
    """Is there some deadline at which the timed test would be passed?

    By the slowest-schedule correspondence this holds exactly when every
    just complete run of the composition fires a success transition: no
    success-free deadlock is reachable, and no cycle reachable without
    firing success can repeat forever with every avoided transition's
    input tokens untouched."""
    bounds = bounds or Bounds()
    net = apply(t, n)
    _check_timed(net)
    g = reach(net, bounds.max_nodes)
    complete = not g.truncated
    wfree = {m: [(u, m2) for u, m2 in g.succ[m]
                 if net.label[u] is not SUCCESS] for m in g.succ}
    order, parents = _bfs_parents(MarkingGraph(g.root, wfree, g.truncated))
    region = set(order)

    for m in order:
        if not net.enabled_transitions(m):
            return Verdict("Fail", _path_to(g, parents, m, net), bounds, net)

    rsucc = {m: [(u, m2) for u, m2 in wfree[m] if m2 in region]
             for m in region}
    rgraph = MarkingGraph(g.root, rsucc, g.truncated)
    budget = max(bounds.max_nodes, 1) * 5
    for m in sorted(region, key=marking_key):
        for walk in closed_walks(rgraph, m, bounds.max_cycle_len):
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


def timed_path_json(p):
    """JSON-ready form of a timed path or lasso, times rendered exactly."""
    def steps(seq):
        out = []
        for eta, _ in seq:
            if isinstance(eta, TimeStep):
                out.append({"time": str(eta.r)})
            else:
                out.append({"fire": render_id(eta)})
        return out

    z = duration(p)
    rendered = "inf" if z == INF else str(z)
    if isinstance(p, TimedLasso):
        return {"prefix": steps(p.prefix.steps), "cycle": steps(p.cycle),
                "duration": rendered}
    return {"steps": steps(p.steps), "duration": rendered}
