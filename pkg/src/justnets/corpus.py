"""Curated example systems and seeded generators for regression checks.

The named constructors rebuild the small systems used in the documentation
and the regression suite: the deadlock/livelock pair that defeats
compositionality under progress, the branching pair that defeats it under
justness, the abstraction pair, the four spectrum nets, and the traffic
light signalling to passing cars.

The generators produce deterministic pseudo-random nets, tests, and paths:
everything is a pure function of the seed, so a verdict computed from them
today can be frozen and compared byte for byte tomorrow.
"""

import itertools
import random

from .lang import compile_source
from .mset import Multiset
from .net import Net, SUCCESS, TAU, is_safe, label_str
from .paths import FinPath, marking_key
from .testing import Test


# ---------------------------------------------------------------------------
# Named systems.


def deadlock_net():
    """A single marked place enabling nothing."""
    return compile_source("0")


def livelock_net():
    """A single silent transition looping forever."""
    return compile_source("K = a.K; hide {a} in K")


def silent_then_a():
    """One silent step, then the visible action a."""
    return compile_source("hide {t} in t.a.0")


def plain_a():
    """The visible action a, immediately."""
    return compile_source("a.0")


def w_test():
    """The test that succeeds immediately: one marked place feeding one
    success transition."""
    n = Net({"p"}, {"tw"}, {("p", "tw"): 1}, {}, Multiset(["p"]),
            {"tw": SUCCESS}, alphabet=set(), name="w-test")
    return Test(n)


def silent_w_test():
    """The test that succeeds after one silent step.  Unlike w_test it
    separates a deadlocked net from a livelocked one under progress-based
    must testing: the livelock can keep looping instead of taking the
    silent step."""
    n = Net({"p", "q"}, {"ts", "tw"},
            {("p", "ts"): 1, ("ts", "q"): 1, ("q", "tw"): 1}, {},
            Multiset(["p"]), {"ts": TAU, "tw": SUCCESS},
            alphabet=set(), name="silent-w-test")
    return Test(n)


def chain_test(word):
    """A test that walks the visible word and then succeeds."""
    word = tuple(word)
    places = {"q%d" % i for i in range(len(word) + 1)}
    flow = {}
    label = {}
    for i, a in enumerate(word):
        t = "s%d" % i
        label[t] = a
        flow[("q%d" % i, t)] = 1
        flow[(t, "q%d" % (i + 1))] = 1
    label["win"] = SUCCESS
    flow[("q%d" % len(word), "win")] = 1
    n = Net(places, set(label), flow, {}, Multiset(["q0"]), label,
            alphabet=set(word), name="chain-" + "".join(word))
    return Test(n)


def no_congruence():
    """The triple (N, N2, T) showing that progress-based failure
    equivalence is not preserved by parallel composition: N deadlocks, N2
    livelocks, and T succeeds immediately.  N and N2 have the same
    progress failures, but composing each with T in parallel (no
    synchronisation) separates them: only the livelocked composition can
    run forever without ever reporting success."""
    return deadlock_net(), livelock_net(), w_test().net


def branching():
    """The triple (N, N2, T) showing that justness-based failure
    equivalence is not preserved by synchronising composition: N commits
    to the b/c choice after a, N2 before, and the observer T wanting a
    then c gets stuck only against N2's b-branch."""
    n = compile_source("a.(b.0 + c.0)")
    n2 = compile_source("a.b.0 + a.c.0")
    t = compile_source("a.c.0")
    return n, n2, t


def abstraction():
    """The pair (N, N2) showing that justness-based failure equivalence is
    not preserved by abstraction: hiding b makes N2's silent step into 0
    indistinguishable from its silent step into the hidden b."""
    n = compile_source("hide {h} in h.b.c.0")
    n2 = compile_source("hide {h} in (h.0 + h.b.c.0)")
    return n, n2


def traffic():
    """The triple (TL, Traffic, system): a traffic light that signals
    drive while green, two cars that each synchronise on drive, and their
    composition over {drive}.  In the composed net the drive transitions
    read the green place without consuming it."""
    tl = compile_source("TL = tr.tg.(drive > ty.TL); TL")
    road = compile_source("drive.drive.0")
    system = compile_source(
        "TL = tr.tg.(drive > ty.TL);"
        " Traffic = drive.drive.0;"
        " TL |[drive]| Traffic")
    return tl, road, system


# ---------------------------------------------------------------------------
# Seeded generators.

ALPHABET = ("a", "b", "c")


def _random_net(rng, max_places, alphabet, index):
    """One random candidate net: every transition consumes at least one
    place, read arcs never overlap presets, and labels are drawn from the
    alphabet with an occasional silent one."""
    k = rng.randint(2, max_places)
    places = ["p%d" % i for i in range(k)]
    m = rng.randint(1, max_places)
    flow = {}
    read = {}
    label = {}
    for j in range(m):
        t = "t%d" % j
        pre = rng.sample(places, rng.randint(1, min(2, k)))
        post = rng.sample(places, rng.randint(0, min(2, k)))
        for p in pre:
            flow[(p, t)] = 1
        for p in post:
            flow[(t, p)] = 1
        rest = [p for p in places if p not in pre]
        if rest and rng.random() < 0.25:
            read[(rng.choice(rest), t)] = 1
        label[t] = TAU if rng.random() < 0.2 else rng.choice(alphabet)
    marked = rng.sample(places, rng.randint(1, k))
    return Net(set(places), set(label), flow, read, Multiset(marked), label,
               alphabet=set(alphabet), name="gen%d" % index)


def small_nets(count=20, seed=2024, max_places=6, alphabet=ALPHABET):
    """A deterministic list of small safe nets.  Every transition has a
    nonempty preset and safety is verified by exhausting the reachable
    markings, so the nets are also valid inputs to the timed semantics."""
    rng = random.Random(seed)
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 10000:
            raise RuntimeError("could not generate %d safe nets" % count)
        n = _random_net(rng, max_places, alphabet, len(out))
        if is_safe(n, max_nodes=5000) is not True:
            continue
        out.append(n)
    return out


def _random_test(rng, alphabet, index):
    """One random test: a chain of one to three visible actions ending in
    success, occasionally with a silent escape from a mid place or a second
    labelled route between neighbouring chain places.  The success place is
    consumed only by its success transition."""
    n = rng.randint(1, 3)
    places = {"q%d" % i for i in range(n + 1)}
    flow = {}
    label = {}
    for i in range(n):
        t = "s%d" % i
        label[t] = rng.choice(alphabet)
        flow[("q%d" % i, t)] = 1
        flow[(t, "q%d" % (i + 1))] = 1
    if n > 1 and rng.random() < 0.4:
        i = rng.randrange(n - 1)
        alt = "alt%d" % i
        label[alt] = rng.choice(alphabet)
        flow[("q%d" % i, alt)] = 1
        flow[(alt, "q%d" % (i + 1))] = 1
    if rng.random() < 0.3:
        i = rng.randrange(n)
        esc = "esc%d" % i
        label[esc] = TAU
        flow[("q%d" % i, esc)] = 1
        flow[(esc, "q%d" % n)] = 1
    label["win"] = SUCCESS
    flow[("q%d" % n, "win")] = 1
    net = Net(places, set(label), flow, {}, Multiset(["q0"]), label,
              alphabet=set(alphabet), name="test%d" % index)
    return Test(net)


def random_tests(count=100, seed=2025, alphabet=ALPHABET):
    """A deterministic list of small tests over the alphabet."""
    rng = random.Random(seed)
    return [_random_test(rng, alphabet, i) for i in range(count)]


def random_paths(net, count=25, seed=0, max_len=6):
    """Deterministic random firing sequences of the net, as finite paths
    from its initial marking.  Walks stop early at dead markings."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        m = net.m0
        steps = []
        for _ in range(rng.randint(0, max_len)):
            opts = net.enabled_transitions(m)
            if not opts:
                break
            t = rng.choice(opts)
            m = net.fire1(m, t)
            steps.append((t, m))
        out.append(FinPath(net.m0, tuple(steps), net=net))
    return out


def bounded_traces(net, max_len):
    """All visible traces of the net up to the given length, as a set of
    tuples.  Silent firings contribute nothing to the trace; success
    firings show up under their reserved symbol."""
    frontier = [(net.m0, ())]
    traces = {()}
    seen_pairs = {(marking_key(net.m0), ())}
    while frontier:
        m, tr = frontier.pop()
        for t in net.enabled_transitions(m):
            lab = net.label[t]
            tr2 = tr if lab is TAU else tr + (label_str(lab),)
            if len(tr2) > max_len:
                continue
            m2 = net.fire1(m, t)
            key = (marking_key(m2), tr2)
            if key in seen_pairs:
                continue
            seen_pairs.add(key)
            traces.add(tr2)
            frontier.append((m2, tr2))
    return traces


def net_pairs(count=50, seed=2026, **kw):
    """Deterministic ordered pairs drawn from the small-net corpus."""
    nets = small_nets(**kw)
    rng = random.Random(seed)
    pairs = []
    for _ in range(count):
        i = rng.randrange(len(nets))
        j = rng.randrange(len(nets))
        pairs.append((nets[i], nets[j]))
    return pairs


def witness_words(alphabet, max_word, max_refusal):
    """Every (word, refusal) pair over the alphabet within the bounds,
    deterministically ordered."""
    alphabet = sorted(alphabet)
    words = []
    for n in range(max_word + 1):
        words.extend(itertools.product(alphabet, repeat=n))
    refusals = []
    for n in range(max_refusal + 1):
        refusals.extend(itertools.combinations(alphabet, n))
    return [(w, frozenset(x)) for w in words for x in refusals]
