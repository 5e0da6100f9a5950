"""Labelled Petri nets with read arcs: firing rule, structural predicates,
compositional operators, and the .pnet / DOT text formats."""

from __future__ import annotations

from .mset import Multiset, EMPTY


class Silent:
    """Sentinel label class for the invisible action and the success action."""

    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


TAU = Silent("tau")
SUCCESS = Silent("w")

# Action names reserved for the two non-visible labels in every text format.
RESERVED_ACTIONS = ("tau", "w")


def is_visible(label):
    return isinstance(label, str)


def label_str(label):
    return label if isinstance(label, str) else label.name


class NotEnabled(Exception):
    """Raised when a step is fired from a marking that does not enable it."""


class NetError(Exception):
    """Malformed net structure or operator precondition violation."""


def render_id(x):
    """Deterministic display string for a (possibly structured) node id."""
    if isinstance(x, tuple):
        return "(" + ",".join(render_id(p) for p in x) + ")"
    return str(x)


def _sort_key(x):
    return (render_id(x), repr(x))


class Net:
    """A Petri net (S, T, F, R, M0, l) with arc weights and read arcs.

    flow maps (place, trans) and (trans, place) pairs to weights >= 1;
    read maps (place, trans) pairs to weights >= 1. The labelling maps each
    transition to a visible action name, TAU, or SUCCESS. Immutable after
    construction; presets, postsets and readsets are precomputed per
    transition.
    """

    def __init__(self, places, transitions, flow, read, m0, label,
                 alphabet=None, name="net"):
        self.places = frozenset(places)
        self.transitions = frozenset(transitions)
        if self.places & self.transitions:
            raise NetError("place and transition ids must be disjoint")
        self.flow = dict(flow)
        self.read = dict(read)
        self.m0 = Multiset(m0)
        self.label = dict(label)
        self.name = name

        for t in self.transitions:
            if t not in self.label:
                raise NetError("transition %s has no label" % render_id(t))
        for (a, b), w in list(self.flow.items()):
            if w < 1:
                raise NetError("flow weight below 1 on (%s, %s)" % (render_id(a), render_id(b)))
            if a in self.places and b in self.transitions:
                continue
            if a in self.transitions and b in self.places:
                continue
            raise NetError("flow arc (%s, %s) has bad endpoints" % (render_id(a), render_id(b)))
        for (s, t), w in self.read.items():
            if w < 1:
                raise NetError("read weight below 1 on (%s, %s)" % (render_id(s), render_id(t)))
            if s not in self.places or t not in self.transitions:
                raise NetError("read arc (%s, %s) has bad endpoints" % (render_id(s), render_id(t)))
        if not self.m0.support() <= self.places:
            raise NetError("initial marking uses unknown places")

        self._pre = {t: {} for t in self.transitions}
        self._post = {t: {} for t in self.transitions}
        self._read = {t: {} for t in self.transitions}
        for (a, b), w in self.flow.items():
            if a in self.places:
                self._pre[b][a] = w
            else:
                self._post[a][b] = w
        for (s, t), w in self.read.items():
            self._read[t][s] = w
        self._pre = {t: Multiset(d) for t, d in self._pre.items()}
        self._post = {t: Multiset(d) for t, d in self._post.items()}
        self._read = {t: Multiset(d) for t, d in self._read.items()}

        occurring = {l for l in self.label.values() if is_visible(l)}
        self.alphabet = frozenset(occurring if alphabet is None else set(alphabet) | occurring)

    # -- structural accessors -------------------------------------------------

    def preset(self, t):
        """The multiset of preplaces of t, weighted by arc weights."""
        return self._pre[t]

    def postset(self, t):
        """The multiset of postplaces of t, weighted by arc weights."""
        return self._post[t]

    def readset(self, t):
        """The multiset of read places of t, weighted by read-arc weights."""
        return self._read[t]

    def step_preset(self, g):
        """Weighted sum of presets over a step (multiset of transitions)."""
        acc = EMPTY
        for t, k in g.items():
            acc = acc + k * self._pre[t]
        return acc

    def step_postset(self, g):
        """Weighted sum of postsets over a step."""
        acc = EMPTY
        for t, k in g.items():
            acc = acc + k * self._post[t]
        return acc

    def step_readset(self, g):
        """Union (not sum) of readsets over a step: read tokens are shared."""
        acc = EMPTY
        for t in g:
            acc = acc | self._read[t]
        return acc

    # -- firing ---------------------------------------------------------------

    def enabled(self, m, g):
        """True iff step g (multiset of transitions) is enabled at marking m."""
        return (self.step_preset(g) + self.step_readset(g)) <= m

    def enabled1(self, m, t):
        """True iff the singleton step {t} is enabled at marking m."""
        return (self._pre[t] + self._read[t]) <= m

    def fire(self, m, g):
        """Fire step g at m; read tokens are tested but never consumed."""
        if not self.enabled(m, g):
            raise NotEnabled("step %r not enabled" % (g,))
        return (m - self.step_preset(g)) + self.step_postset(g)

    def fire1(self, m, t):
        """Fire the single transition t at m."""
        if not self.enabled1(m, t):
            raise NotEnabled("transition %s not enabled" % render_id(t))
        return (m - self._pre[t]) + self._post[t]

    def enabled_transitions(self, m):
        """Sorted list of single transitions enabled at m."""
        return sorted((t for t in self.transitions if self.enabled1(m, t)), key=_sort_key)

    def enabled_labels(self, m):
        """Set of labels of single transitions enabled at m."""
        return {self.label[t] for t in self.transitions if self.enabled1(m, t)}

    def sorted_places(self):
        return sorted(self.places, key=_sort_key)

    def sorted_transitions(self):
        return sorted(self.transitions, key=_sort_key)

    def __repr__(self):
        return "Net(%s: %d places, %d transitions)" % (
            self.name, len(self.places), len(self.transitions))


# -- compositional operators --------------------------------------------------


def parallel(n1, n2, a, name=None):
    """Parallel composition synchronizing on the visible actions in a.

    Places are tagged copies (s, '*') and ('*', s). Transitions with a label
    in a exist only as synchronization pairs (t1, t2); all other transitions
    are inherited one-sidedly. Arcs are inherited componentwise.
    """
    a = frozenset(a)
    places = {(s, "*") for s in n1.places} | {("*", s) for s in n2.places}
    transitions = {}
    for t in n1.transitions:
        if not (is_visible(n1.label[t]) and n1.label[t] in a):
            transitions[(t, "*")] = n1.label[t]
    for t in n2.transitions:
        if not (is_visible(n2.label[t]) and n2.label[t] in a):
            transitions[("*", t)] = n2.label[t]
    for t1 in n1.transitions:
        l = n1.label[t1]
        if is_visible(l) and l in a:
            for t2 in n2.transitions:
                if n2.label[t2] == l:
                    transitions[(t1, t2)] = l

    flow = {}
    read = {}

    def inherit(side, t_orig, u):
        src = n1 if side == 0 else n2
        tag = (lambda s: (s, "*")) if side == 0 else (lambda s: ("*", s))
        for s, w in src.preset(t_orig).items():
            flow[(tag(s), u)] = flow.get((tag(s), u), 0) + w
        for s, w in src.postset(t_orig).items():
            flow[(u, tag(s))] = flow.get((u, tag(s)), 0) + w
        for s, w in src.readset(t_orig).items():
            read[(tag(s), u)] = max(read.get((tag(s), u), 0), w)

    for u in transitions:
        t1, t2 = u
        if t1 != "*":
            inherit(0, t1, u)
        if t2 != "*":
            inherit(1, t2, u)

    m0 = Multiset({(s, "*"): k for s, k in n1.m0.items()}) + \
        Multiset({("*", s): k for s, k in n2.m0.items()})
    return Net(places, set(transitions), flow, read, m0, transitions,
               alphabet=n1.alphabet | n2.alphabet,
               name=name or "(%s||%s)" % (n1.name, n2.name))


def relabel(n, f, name=None):
    """Apply a visible-action renaming f (a dict, identity where absent)."""
    for src, dst in f.items():
        if src in RESERVED_ACTIONS or dst in RESERVED_ACTIONS:
            raise NetError("cannot rename to or from a reserved action")
    label = {t: (f.get(l, l) if is_visible(l) else l) for t, l in n.label.items()}
    alphabet = {f.get(x, x) for x in n.alphabet}
    return Net(n.places, n.transitions, n.flow, n.read, n.m0, label,
               alphabet=alphabet, name=name or n.name)


def abstract(n, i, name=None):
    """Hide the visible actions in i: their labels become TAU."""
    i = set(i)
    if any(x in RESERVED_ACTIONS for x in i):
        raise NetError("cannot hide a reserved action")
    label = {t: (TAU if (is_visible(l) and l in i) else l) for t, l in n.label.items()}
    return Net(n.places, n.transitions, n.flow, n.read, n.m0, label,
               alphabet=n.alphabet - i, name=name or n.name)


def guarded_choice(branches, signal=None, name=None):
    """Guarded choice over (action, Net) branches with an optional signal.

    Branch nets lose their initial markings; a fresh marked root place is
    added, one transition per branch consumes the root and produces that
    branch's old initial marking. With signal=a, one extra a-labelled
    transition reads (and only reads) the root. Branch nets whose initially
    marked places have incoming arcs are rejected when a signal is present.
    """
    places = {"r"}
    transitions = {}
    flow = {}
    read = {}
    alphabet = set()
    for idx, (act, sub) in enumerate(branches):
        if act in RESERVED_ACTIONS:
            raise NetError("branch action cannot be a reserved action")
        if signal is not None:
            for s in sub.m0:
                if any(b == s for (_, b) in sub.flow):
                    raise NetError(
                        "signal over a branch whose marked place %s has incoming arcs"
                        % render_id(s))
        tag = lambda s, idx=idx: ("b%d" % idx, s)
        places.update(tag(s) for s in sub.places)
        u = ("g%d" % idx, act)
        transitions[u] = act
        flow[("r", u)] = 1
        for s, k in sub.m0.items():
            flow[(u, tag(s))] = k
        for t in sub.transitions:
            tt = ("b%d" % idx, t)
            transitions[tt] = sub.label[t]
            for s, w in sub.preset(t).items():
                flow[(tag(s), tt)] = w
            for s, w in sub.postset(t).items():
                flow[(tt, tag(s))] = w
            for s, w in sub.readset(t).items():
                read[(tag(s), tt)] = w
        alphabet |= sub.alphabet | {act}
    if signal is not None:
        if signal in RESERVED_ACTIONS:
            raise NetError("signal cannot be a reserved action")
        u = ("sig", signal)
        transitions[u] = signal
        read[("r", u)] = 1
        alphabet.add(signal)
    return Net(places, set(transitions), flow, read, Multiset({"r": 1}),
               transitions, alphabet=alphabet, name=name or "choice")


def is_safe(n, max_nodes=100000):
    """True iff no reachable marking (within max_nodes) exceeds one token per
    place; returns None when the bound was hit before a violation."""
    seen = {n.m0}
    frontier = [n.m0]
    while frontier:
        m = frontier.pop()
        if any(k > 1 for _, k in m.items()):
            return False
        for t in n.transitions:
            if n.enabled1(m, t):
                m2 = n.fire1(m, t)
                if m2 not in seen:
                    if len(seen) >= max_nodes:
                        return None
                    seen.add(m2)
                    frontier.append(m2)
    return True


# -- .pnet text format ----------------------------------------------------------


def parse_pnet(text, name="net"):
    """Parse the line-oriented .pnet format into a Net."""
    places = {}
    transitions = {}
    flow = {}
    read = {}
    net_name = name
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]

        def fail(msg):
            raise NetError("line %d: %s" % (lineno, msg))

        def keyargs(items, allowed):
            out = {}
            for item in items:
                if "=" not in item:
                    fail("expected key=value, got %r" % item)
                k, v = item.split("=", 1)
                if k not in allowed:
                    fail("unknown key %r" % k)
                out[k] = v
            return out

        if kind == "net":
            if len(parts) != 2:
                fail("net line expects exactly one name")
            net_name = parts[1]
        elif kind == "place":
            if len(parts) < 2:
                fail("place line needs an id")
            pid = parts[1]
            if pid in places or pid in transitions:
                fail("duplicate id %r" % pid)
            kw = keyargs(parts[2:], {"tokens"})
            try:
                tokens = int(kw.get("tokens", "0"))
            except ValueError:
                fail("tokens must be an integer")
            if tokens < 0:
                fail("tokens must be non-negative")
            places[pid] = tokens
        elif kind == "trans":
            if len(parts) < 2:
                fail("trans line needs an id")
            tid = parts[1]
            if tid in places or tid in transitions:
                fail("duplicate id %r" % tid)
            kw = keyargs(parts[2:], {"label"})
            if "label" not in kw:
                fail("trans line needs label=")
            lbl = kw["label"]
            if lbl == "tau":
                transitions[tid] = TAU
            elif lbl == "w":
                transitions[tid] = SUCCESS
            elif lbl:
                transitions[tid] = lbl
            else:
                fail("empty label")
        elif kind == "arc":
            if len(parts) < 3:
                fail("arc line needs source and target")
            src, dst = parts[1], parts[2]
            kw = keyargs(parts[3:], {"weight"})
            try:
                w = int(kw.get("weight", "1"))
            except ValueError:
                fail("weight must be an integer")
            if w < 1:
                fail("weight must be at least 1")
            if src in places and dst in transitions:
                pass
            elif src in transitions and dst in places:
                pass
            else:
                fail("arc endpoints must be one declared place and one declared transition")
            flow[(src, dst)] = flow.get((src, dst), 0) + w
        elif kind == "read":
            if len(parts) < 3:
                fail("read line needs place and transition")
            s, t = parts[1], parts[2]
            kw = keyargs(parts[3:], {"weight"})
            try:
                w = int(kw.get("weight", "1"))
            except ValueError:
                fail("weight must be an integer")
            if w < 1:
                fail("weight must be at least 1")
            if s not in places or t not in transitions:
                fail("read endpoints must be a declared place and a declared transition")
            read[(s, t)] = read.get((s, t), 0) + w
        else:
            fail("unknown directive %r" % kind)
    m0 = Multiset({p: k for p, k in places.items() if k})
    return Net(set(places), set(transitions), flow, read, m0, transitions, name=net_name)


def node_names(n):
    """Stable short names p0, p1, ... / t0, t1, ... for a net's nodes."""
    names = {}
    for i, s in enumerate(n.sorted_places()):
        names[s] = "p%d" % i
    for i, t in enumerate(n.sorted_transitions()):
        names[t] = "t%d" % i
    return names


def emit_pnet(n):
    """Serialize a Net to the .pnet format, flattening structured ids."""
    names = node_names(n)
    out = ["net %s" % n.name]
    for s in n.sorted_places():
        line = "place %s" % names[s]
        if n.m0[s]:
            line += " tokens=%d" % n.m0[s]
        if names[s] != render_id(s):
            line += "  # %s" % render_id(s)
        out.append(line)
    for t in n.sorted_transitions():
        line = "trans %s label=%s" % (names[t], label_str(n.label[t]))
        if names[t] != render_id(t):
            line += "  # %s" % render_id(t)
        out.append(line)
    for t in n.sorted_transitions():
        for s, w in sorted(n.preset(t).items(), key=lambda i: _sort_key(i[0])):
            out.append("arc %s %s%s" % (names[s], names[t], " weight=%d" % w if w > 1 else ""))
        for s, w in sorted(n.postset(t).items(), key=lambda i: _sort_key(i[0])):
            out.append("arc %s %s%s" % (names[t], names[s], " weight=%d" % w if w > 1 else ""))
        for s, w in sorted(n.readset(t).items(), key=lambda i: _sort_key(i[0])):
            out.append("read %s %s%s" % (names[s], names[t], " weight=%d" % w if w > 1 else ""))
    return "\n".join(out) + "\n"


def to_dot(n):
    """DOT export: places as circles with token counts, transitions as boxes,
    read arcs as undirected (dir=none) edges."""
    names = node_names(n)
    out = ["digraph %s {" % _dot_quote(n.name), "  rankdir=LR;"]
    for s in n.sorted_places():
        tokens = n.m0[s]
        lab = render_id(s)
        if tokens:
            lab += " " + ("•" * tokens if tokens <= 4 else "(%d)" % tokens)
        out.append('  %s [shape=circle, label="%s"];' % (names[s], _dot_escape(lab)))
    for t in n.sorted_transitions():
        out.append('  %s [shape=box, label="%s"];' % (names[t], _dot_escape(label_str(n.label[t]))))
    for t in n.sorted_transitions():
        for s, w in sorted(n.preset(t).items(), key=lambda i: _sort_key(i[0])):
            out.append("  %s -> %s%s;" % (names[s], names[t], ' [label="%d"]' % w if w > 1 else ""))
        for s, w in sorted(n.postset(t).items(), key=lambda i: _sort_key(i[0])):
            out.append("  %s -> %s%s;" % (names[t], names[s], ' [label="%d"]' % w if w > 1 else ""))
        for s, w in sorted(n.readset(t).items(), key=lambda i: _sort_key(i[0])):
            extra = ', label="%d"' % w if w > 1 else ""
            out.append("  %s -> %s [dir=none%s];" % (names[s], names[t], extra))
    out.append("}")
    return "\n".join(out) + "\n"


def _dot_quote(s):
    return '"%s"' % _dot_escape(s)


def _dot_escape(s):
    return s.replace("\\", "\\\\").replace('"', '\\"')


def net_isomorphic(n1, n2):
    """Structural isomorphism: a bijection on places and on transitions that
    preserves labels, initial token counts, and all three arc relations."""
    import networkx as nx
    from networkx.algorithms import isomorphism as iso

    def graph(n):
        g = nx.DiGraph()
        for s in n.places:
            g.add_node(("s", s), kind="place", label="", tokens=n.m0[s])
        for t in n.transitions:
            g.add_node(("t", t), kind="trans", label=label_str(n.label[t]), tokens=0)
        for (a, b), w in n.flow.items():
            ka = "s" if a in n.places else "t"
            kb = "s" if b in n.places else "t"
            g.add_edge((ka, a), (kb, b), weight=w, kind="flow")
        for (s, t), w in n.read.items():
            g.add_edge(("s", s), ("t", t), weight=w, kind="read")
        return g

    nm = iso.categorical_node_match(["kind", "label", "tokens"], ["", "", 0])
    em = iso.categorical_edge_match(["weight", "kind"], [1, "flow"])
    return nx.is_isomorphic(graph(n1), graph(n2), node_match=nm, edge_match=em)
