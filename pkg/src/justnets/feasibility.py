"""Extending finite paths into B-just paths with the token-queue scheduler.

Every marked place holds a queue entry stamped with its birth step. Each
round first retires the entries that no enabled non-blocked transition can
consume any more; if none survive, the path so far is returned as finite
and B-just. Otherwise the oldest surviving entry is serviced: the lowest-id
enabled non-blocked transition consuming its place fires, the entries of
all places it consumed retire, and every place marked afterwards gets a
fresh entry unless it still has a live one. Servicing oldest-first is what
makes the result just: a transition that stays enabled keeps a live entry
alive, and that entry would eventually reach the front of the queue.

Transitions with an empty preset are given a marked private preplace that
they consume and reproduce, so the queue sees them like everything else;
these plumbing places are stripped from all reported paths and queues.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mset import Multiset
from .net import Net, RESERVED_ACTIONS, label_str, render_id
from .paths import FinPath, Lasso, INDIVIDUAL, is_b_just


class FeasError(Exception):
    """Bad scheduler input, or a result that fails its own justness check."""


@dataclass(frozen=True)
class SchedResult:
    """Outcome of a scheduler run.

    kind is "Finite" (the path ends and is B-just), "Periodic" (a B-just
    lasso was detected), or "Ongoing" (fuel ran out first, no claim made).
    path holds a FinPath for Finite/Ongoing and a Lasso for Periodic.
    queue is the live (place, birth) entries at the stop, oldest first.
    """
    kind: str
    path: object
    queue: tuple
    fired: int

    @property
    def final_marking(self):
        if self.kind == "Periodic":
            return self.path.entry
        return self.path.final


def _enrich(net):
    """Give each empty-preset transition a marked private preplace that it
    consumes and reproduces. Returns the new net and the added places."""
    empties = [t for t in net.transitions if not net.preset(t)]
    if not empties:
        return net, frozenset()
    added = {t: ("pre", t) for t in empties}
    places = set(net.places) | set(added.values())
    flow = dict(net.flow)
    m0 = net.m0
    for t, p in added.items():
        flow[(p, t)] = 1
        flow[(t, p)] = 1
        m0 = m0 + Multiset([p])
    n2 = Net(places, set(net.transitions), flow, dict(net.read), m0,
             dict(net.label), alphabet=set(net.alphabet), name=net.name)
    return n2, frozenset(added.values())


def _strip(m, hidden):
    if not hidden:
        return m
    return Multiset({p: k for p, k in m.items() if p not in hidden})


def extend_to_just(net, prefix=None, b=frozenset(), fuel=1000, mode=INDIVIDUAL):
    """Extend a finite path of the net into a B-just one, firing only
    transitions whose labels lie outside b.

    Returns a SchedResult: Finite when the queue empties (the finite path
    is B-just), Periodic when the scheduler state repeats (the lasso is
    B-just), Ongoing when fuel runs out first. Finite and Periodic results
    are re-checked with is_b_just in the requested mode before being
    returned; a failed check raises FeasError. The check cannot fail in
    individual mode; in collective mode it can, on nets where several
    tokens in one place serve competing consumers.
    """
    b = frozenset(b)
    for a in b:
        if not isinstance(a, str) or a in RESERVED_ACTIONS:
            raise FeasError("b must contain visible action names, got %r" % (a,))
    if fuel < 0:
        raise FeasError("fuel must not be negative")
    if prefix is None:
        prefix = FinPath(net.m0)
    try:
        FinPath(prefix.start, prefix.steps, net=net)
    except (ValueError, KeyError) as e:
        raise FeasError("invalid prefix: %s" % e) from None
    if prefix.start != net.m0:
        raise FeasError("prefix must start at the initial marking")

    work, hidden = _enrich(net)
    pad = Multiset(sorted(hidden, key=render_id))
    m = prefix.final + pad
    k = len(prefix.steps)
    nonb = sorted((t for t in work.transitions
                   if label_str(work.label[t]) not in b), key=render_id)

    queue = [(s, k) for s in sorted(m, key=render_id)]
    ext = []
    seen = {}
    step = k
    while True:
        key = (m, tuple((p, step - birth) for p, birth in queue))
        if key in seen:
            first = seen[key]
            cut = first - k
            pre = FinPath(prefix.start,
                          list(prefix.steps) + ext[:cut], net=net)
            lasso = Lasso(pre, ext[cut:], net=net)
            if not is_b_just(net, lasso, b, mode):
                raise FeasError(
                    "scheduler lasso failed the %s-mode justness check" % mode)
            return SchedResult("Periodic", lasso,
                               _snapshot(queue, hidden), step - k)
        seen[key] = step

        consumable = set()
        for t in nonb:
            if work.enabled1(m, t):
                consumable.update(work.preset(t))
        queue = [e for e in queue if e[0] in consumable]

        if not queue:
            path = FinPath(prefix.start, list(prefix.steps) + ext, net=net)
            if not is_b_just(net, path, b, mode):
                raise FeasError(
                    "scheduler path failed the %s-mode justness check" % mode)
            return SchedResult("Finite", path, (), step - k)

        if step - k >= fuel:
            path = FinPath(prefix.start, list(prefix.steps) + ext, net=net)
            return SchedResult("Ongoing", path,
                               _snapshot(queue, hidden), step - k)

        r = queue[0][0]
        t = next(u for u in nonb
                 if work.enabled1(m, u) and r in work.preset(u))
        m = work.fire1(m, t)
        step += 1
        ext.append((t, _strip(m, hidden)))
        gone = set(work.preset(t))
        queue = [e for e in queue if e[0] not in gone]
        live = {e[0] for e in queue}
        queue.extend((s, step) for s in sorted(m, key=render_id)
                     if s not in live)


def _snapshot(queue, hidden):
    return tuple((p, birth) for p, birth in queue if p not in hidden)


def format_queue(queue):
    """Render a queue snapshot as one line, oldest entry first."""
    return " ".join("%s@%d" % (render_id(p), birth) for p, birth in queue)
