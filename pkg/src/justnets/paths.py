"""Execution paths, the path-enabling relation, B-justness and B-progress,
reachable marking graphs, and enumeration of complete paths."""

from __future__ import annotations

from dataclasses import dataclass, field

from .mset import Multiset
from .net import is_visible, label_str, render_id, _sort_key

INDIVIDUAL = "individual"
COLLECTIVE = "collective"


@dataclass(frozen=True)
class Bounds:
    """Search limits; every verdict derived under them is 'within bounds'."""
    max_trace_len: int = 6
    max_prefix_len: int = 12
    max_cycle_len: int = 8
    max_nodes: int = 10000


class FinPath:
    """Finite alternating sequence: a start marking and (transition, marking)
    steps, each a valid single-transition firing."""

    __slots__ = ("start", "steps")

    def __init__(self, start, steps=(), net=None):
        self.start = start
        self.steps = list(steps)
        if net is not None:
            m = start
            for t, m2 in self.steps:
                if not net.enabled1(m, t):
                    raise ValueError("invalid path: %s not enabled" % render_id(t))
                if net.fire1(m, t) != m2:
                    raise ValueError("invalid path: wrong successor marking")
                m = m2

    @property
    def final(self):
        return self.steps[-1][1] if self.steps else self.start

    def transitions(self):
        return [t for t, _ in self.steps]

    def markings(self):
        return [self.start] + [m for _, m in self.steps]

    def __len__(self):
        return len(self.steps)

    def __repr__(self):
        return "FinPath(%d steps)" % len(self.steps)


class Lasso:
    """A finite prefix plus a non-empty cycle of (transition, marking) steps
    that starts at the prefix's final marking and returns to it, representing
    the ultimately periodic infinite path prefix . cycle^omega."""

    __slots__ = ("prefix", "cycle")

    def __init__(self, prefix, cycle, net=None):
        if not cycle:
            raise ValueError("lasso cycle must be non-empty")
        self.prefix = prefix
        self.cycle = list(cycle)
        if net is not None:
            m = prefix.final
            for t, m2 in self.cycle:
                if not net.enabled1(m, t):
                    raise ValueError("invalid cycle: %s not enabled" % render_id(t))
                if net.fire1(m, t) != m2:
                    raise ValueError("invalid cycle: wrong successor marking")
                m = m2
            if m != prefix.final:
                raise ValueError("cycle does not return to its entry marking")

    @property
    def entry(self):
        return self.prefix.final

    def cycle_markings(self):
        """Markings at which each cycle transition fires (entry first)."""
        return [self.prefix.final] + [m for _, m in self.cycle[:-1]]

    def cycle_transitions(self):
        return [t for t, _ in self.cycle]

    def __repr__(self):
        return "Lasso(%d+%d steps)" % (len(self.prefix), len(self.cycle))


def path_word(net, transitions):
    """Trace word of a transition sequence: visible labels plus "w"."""
    out = []
    for t in transitions:
        l = net.label[t]
        if is_visible(l):
            out.append(l)
        elif l.name == "w":
            out.append("w")
    return tuple(out)


def path_trace(net, p):
    """Trace of a FinPath (a word) or Lasso (a (prefix, cycle) word pair)."""
    if isinstance(p, Lasso):
        return (path_word(net, p.prefix.transitions()),
                path_word(net, p.cycle_transitions()))
    return path_word(net, p.transitions())


def lasso_path_enabled(net, lasso, t, mode=INDIVIDUAL):
    """Does the infinite unrolling of the lasso enable t forever?

    The check only inspects the cycle: if t survives one full lap it survives
    all laps, and a transition enabled only during the prefix is either
    deprived there or still enabled when the cycle starts.
    """
    cyc_ts = lasso.cycle_transitions()
    if t in cyc_ts:
        return False
    need = net.preset(t) + net.readset(t)
    marks = lasso.cycle_markings()
    if mode == INDIVIDUAL:
        if not any(need <= m for m in marks):
            return False
        return all(net.preset(u).disjoint(need) for u in cyc_ts)
    # collective: the stronger per-step condition must hold on every lap
    for m, u in zip(marks, cyc_ts):
        if not (need + net.preset(u)) <= m:
            return False
    return True


def path_enables(net, p, t, mode=INDIVIDUAL):
    """The path-enabling relation: for finite paths this is enabledness at the
    final marking; for lassos the cycle-survival check above."""
    if isinstance(p, Lasso):
        return lasso_path_enabled(net, p, t, mode)
    return net.enabled1(p.final, t)


def path_enabled_set(net, p, mode=INDIVIDUAL):
    """All transitions the path enables."""
    if isinstance(p, Lasso):
        return {t for t in net.transitions if lasso_path_enabled(net, p, t, mode)}
    return {t for t in net.transitions if net.enabled1(p.final, t)}


def is_b_just(net, p, b, mode=INDIVIDUAL):
    """True iff every path-enabled transition has a label in b (a set of
    visible action names; invisible and success labels never qualify)."""
    b = set(b)
    for t in path_enabled_set(net, p, mode):
        l = net.label[t]
        if not (is_visible(l) and l in b):
            return False
    return True


def is_b_progressing(net, p, b):
    """Progress-completeness: lassos always; finite paths iff the final
    marking enables only b-labelled transitions."""
    if isinstance(p, Lasso):
        return True
    b = set(b)
    for t in net.transitions:
        if net.enabled1(p.final, t):
            l = net.label[t]
            if not (is_visible(l) and l in b):
                return False
    return True


class MarkingGraph:
    """Reachable markings under single-transition firing, with adjacency."""

    def __init__(self, root, succ, truncated):
        self.root = root
        self.succ = succ  # marking -> list of (transition, marking), sorted
        self.truncated = truncated

    @property
    def nodes(self):
        return set(self.succ)

    def edges(self):
        for m, outs in self.succ.items():
            for t, m2 in outs:
                yield (m, t, m2)

    def __len__(self):
        return len(self.succ)


def reach(net, max_nodes=10000):
    """BFS the reachable marking graph, flagging truncation at max_nodes."""
    if max_nodes < 1:
        raise ValueError("max_nodes must be at least 1")
    trans = net.sorted_transitions()
    succ = {net.m0: None}
    order = [net.m0]
    truncated = False
    i = 0
    while i < len(order):
        m = order[i]
        i += 1
        outs = []
        for t in trans:
            if net.enabled1(m, t):
                m2 = net.fire1(m, t)
                outs.append((t, m2))
                if m2 not in succ:
                    if len(succ) >= max_nodes:
                        truncated = True
                        continue
                    succ[m2] = None
                    order.append(m2)
        succ[m] = [(t, m2) for t, m2 in outs if m2 in succ]
    return MarkingGraph(net.m0, succ, truncated)


def closed_walks(graph, entry, max_len, cap=None):
    """All closed walks from entry of length 1..max_len (revisits allowed).

    Yields lists of (transition, marking) steps ending back at entry. With a
    cap the generator stops after that many walks; callers that need to know
    whether the cap was hit count what they consumed.
    """
    stack = [(entry, [])]
    emitted = 0
    while stack:
        m, steps = stack.pop()
        if steps and m == entry:
            yield list(steps)
            emitted += 1
            if cap is not None and emitted >= cap:
                return
        if len(steps) >= max_len:
            continue
        for t, m2 in reversed(graph.succ.get(m, [])):
            stack.append((m2, steps + [(t, m2)]))


def shortest_path_to(graph, target):
    """BFS shortest FinPath from the graph root to a target marking."""
    if target == graph.root:
        return FinPath(graph.root)
    parent = {graph.root: None}
    frontier = [graph.root]
    while frontier:
        nxt = []
        for m in frontier:
            for t, m2 in graph.succ.get(m, []):
                if m2 not in parent:
                    parent[m2] = (m, t)
                    if m2 == target:
                        steps = []
                        cur = m2
                        while parent[cur] is not None:
                            pm, pt = parent[cur]
                            steps.append((pt, cur))
                            cur = pm
                        steps.reverse()
                        return FinPath(graph.root, steps)
                    nxt.append(m2)
        frontier = nxt
    return None


def enumerate_complete(graph, net, criterion="justness", b=frozenset(),
                       mode=INDIVIDUAL, bounds=Bounds()):
    """Stream the complete paths of a marking graph within bounds.

    Finite complete paths up to max_prefix_len come first, then lassos whose
    cycles are closed walks up to max_cycle_len, deduplicated on the pair
    (cycle marking set, cycle transition multiset).
    """
    b = frozenset(b)

    def complete(p):
        if criterion == "justness":
            return is_b_just(net, p, b, mode)
        return is_b_progressing(net, p, b)

    # finite paths, DFS with the prefix-length bound
    stack = [(graph.root, [])]
    while stack:
        m, steps = stack.pop()
        p = FinPath(graph.root, steps)
        if complete(p):
            yield p
        if len(steps) >= bounds.max_prefix_len:
            continue
        for t, m2 in reversed(graph.succ.get(m, [])):
            stack.append((m2, steps + [(t, m2)]))

    seen = set()
    for entry in graph.succ:
        prefix = shortest_path_to(graph, entry)
        if prefix is None or len(prefix) > bounds.max_prefix_len:
            continue
        for cyc in closed_walks(graph, entry, bounds.max_cycle_len):
            key = (frozenset([entry] + [m for _, m in cyc]),
                   Multiset([t for t, _ in cyc]))
            if key in seen:
                continue
            seen.add(key)
            lasso = Lasso(prefix, cyc)
            if complete(lasso):
                yield lasso


def marking_key(m):
    """Deterministic sort key for markings."""
    return tuple(sorted((render_id(p), k) for p, k in m.items()))


def format_marking(m, names=None):
    disp = names.get if names else None
    items = sorted(((disp(p, None) or render_id(p)) if disp else render_id(p), k)
                   for p, k in m.items())
    return "marking {%s}" % ",".join("%s:%d" % (name, k) for name, k in items)


def format_path(p, names=None):
    """Path dump: one line per element, with a cycle: section for lassos."""
    def tname(t):
        if names:
            return names.get(t) or render_id(t)
        return render_id(t)

    lines = []
    if isinstance(p, Lasso):
        lines.extend(format_path(p.prefix, names).splitlines())
        lines.append("cycle:")
        for t, m in p.cycle:
            lines.append("fire %s" % tname(t))
            lines.append(format_marking(m, names))
        return "\n".join(lines)
    lines.append(format_marking(p.start, names))
    for t, m in p.steps:
        lines.append("fire %s" % tname(t))
        lines.append(format_marking(m, names))
    return "\n".join(lines)
