"""Failure witnesses, preorders, trace merging, and the decomposition law."""

import pytest
from hypothesis import given, settings, strategies as st

from justnets.mset import Multiset
from justnets.net import Net, SUCCESS, TAU, abstract, parallel, relabel
from justnets.paths import Bounds
from justnets.lang import compile_source
from justnets.failures import (
    FailureWitness, canon_lasso_trace, canon_trace, claim6_check,
    expand_pairs, failures, leq, merge_traces, represented, trace_set,
)


def dead_net():
    """One marked place, no transitions."""
    return compile_source("0")


def tau_loop():
    """One marked place with a silent self-loop."""
    return compile_source("K = a.K; hide {a} in K")


def w_test():
    """The test that can only report success: one w transition."""
    return Net({"c", "e"}, {"tw"}, {("c", "tw"): 1, ("tw", "e"): 1}, {},
               Multiset(["c"]), {"tw": SUCCESS}, alphabet=set())


def witness_set(n, criterion="justness", **kw):
    return {(w.trace, w.enabled) for w in failures(n, criterion, **kw).witnesses}


def test_canonical_lasso_trace():
    """Primitive roots and shortest prefixes; equal words, equal forms."""
    assert canon_lasso_trace((), ("a", "b", "a", "b")) == ((), ("a", "b"))
    assert canon_lasso_trace(("a",), ("b", "a")) == ((), ("a", "b"))
    assert canon_lasso_trace(("c", "a"), ("a",)) == (("c",), ("a",))
    with pytest.raises(ValueError):
        canon_lasso_trace(("a",), ())
    assert canon_trace((("a",), ())) == ("a",)


def test_failures_deadlock_and_silent_loop_progress():
    """Under progress the deadlock and the silent loop have the same single
    witness: the empty trace refusing everything."""
    for n in (dead_net(), tau_loop()):
        assert witness_set(n, "progress") == {((), frozenset())}


def test_failures_deadlock_and_silent_loop_justness():
    """The silent loop's cycle leaves nothing path-enabled, so justness
    agrees with progress here."""
    for n in (dead_net(), tau_loop()):
        assert witness_set(n, "justness") == {((), frozenset())}


def test_failures_branching_nets():
    """a.(b+c) keeps both b and c enabled after a; a.b + a.c does not."""
    n = compile_source("a.(b.0 + c.0)")
    assert witness_set(n) == {
        ((), frozenset("a")),
        (("a",), frozenset("bc")),
        (("a", "b"), frozenset()),
        (("a", "c"), frozenset()),
    }
    n2 = compile_source("a.b.0 + a.c.0")
    assert witness_set(n2) == {
        ((), frozenset("a")),
        (("a",), frozenset("b")),
        (("a",), frozenset("c")),
        (("a", "b"), frozenset()),
        (("a", "c"), frozenset()),
    }


def test_failure_trace_sets_match_published_values():
    """For B not containing b or c the two branching nets have the same
    B-trace sets, with the empty trace present iff a is in B."""
    for src in ("a.(b.0 + c.0)", "a.b.0 + a.c.0"):
        f = failures(compile_source(src))
        assert trace_set(f, set()) == {("a", "b"), ("a", "c")}
        assert trace_set(f, {"a"}) == {(), ("a", "b"), ("a", "c")}


def test_failures_abstraction_pair():
    """Hiding b separates tau.b.c.0 from tau.0 + tau.b.c.0."""
    n = compile_source("hide {h} in h.b.c.0")
    n2 = compile_source("hide {h} in (h.0 + h.b.c.0)")
    assert trace_set(failures(n), {"b"}) == {(), ("b", "c")}
    assert trace_set(failures(n2), {"b"}) == {(), ("b", "c")}
    hn = abstract(n, {"b"})
    hn2 = abstract(n2, {"b"})
    assert trace_set(failures(hn), set()) == {("c",)}
    assert trace_set(failures(hn2), set()) == {(), ("c",)}
    r = leq(hn, hn2, "justness", b=set())
    assert r.verdict == "fails"
    assert r.counterexample[0] == ()


def test_failures_visible_self_loop_has_lasso_witness():
    """K = a.K yields the periodic trace a^omega with nothing neglected."""
    f = failures(compile_source("K = a.K;"))
    assert (((), ("a",)), frozenset()) in {(w.trace, w.enabled) for w in f.witnesses}
    assert ((), ("a",)) in trace_set(f, set())
    assert () not in trace_set(f, set())


def test_represented_and_downward_closure():
    """(sigma, X) holds iff some witness avoids X; subsets of X inherit it."""
    f = failures(compile_source("a.b.0 + a.c.0"))
    assert represented(f, ("a",), {"b"})
    assert represented(f, ("a",), {"c"})
    assert not represented(f, ("a",), {"b", "c"})
    pairs = expand_pairs(f, {"a", "b", "c"})
    for sigma, x in pairs:
        for y in x:
            assert (sigma, x - {y}) in pairs


def test_leq_deadlock_equals_silent_loop():
    """Both directions hold under progress and under justness."""
    n, n2 = dead_net(), tau_loop()
    for crit in ("progress", "justness"):
        assert leq(n, n2, crit).verdict == "holds_within_bounds"
        assert leq(n2, n, crit).verdict == "holds_within_bounds"


def test_leq_silent_prefix_is_congruent():
    """tau.a.0 and a.0 are failure-equivalent under justness."""
    n = compile_source("hide {h} in h.a.0")
    n2 = compile_source("a.0")
    assert leq(n, n2).verdict == "holds_within_bounds"
    assert leq(n2, n).verdict == "holds_within_bounds"


def test_leq_branching_counterexample():
    """a.b + a.c refines a.(b+c) but not conversely; the counterexample is
    the trace a with a refusal the broader net cannot match."""
    n = compile_source("a.(b.0 + c.0)")
    n2 = compile_source("a.b.0 + a.c.0")
    assert leq(n2, n).verdict == "holds_within_bounds"
    r = leq(n, n2)
    assert r.verdict == "fails"
    trace, refusal = r.counterexample
    assert trace == ("a",)
    assert set(refusal) in ({"a", "b"}, {"a", "c"})
    assert leq(n, n2, b={"b"}).verdict == "fails"
    assert leq(n, n2, b=set()).verdict == "holds_within_bounds"
    assert leq(n, n2, b={"a"}).verdict == "holds_within_bounds"


def test_leq_divergence_under_progress():
    """Composing the success-only test with the silent loop admits an
    unsuccessful divergence that the deadlock partner lacks."""
    t = w_test()
    c1 = parallel(t, dead_net(), set())
    c2 = parallel(t, tau_loop(), set())
    assert witness_set(c1, "progress") == {(("w",), frozenset())}
    assert witness_set(c2, "progress") == {((), frozenset()), (("w",), frozenset())}
    r = leq(c1, c2, "progress", b=set())
    assert r.verdict == "fails" and r.counterexample[0] == ()
    assert leq(c2, c1, "progress", b=set()).verdict == "holds_within_bounds"
    assert witness_set(c1, "justness") == witness_set(c2, "justness") == {
        (("w",), frozenset())}


def test_leq_b_refinement_property():
    """Whenever the plain preorder holds, every B variant holds too."""
    pairs = [
        (compile_source("hide {h} in h.a.0"), compile_source("a.0")),
        (compile_source("a.b.0 + a.c.0"), compile_source("a.(b.0 + c.0)")),
        (dead_net(), tau_loop()),
    ]
    subsets = [set(), {"a"}, {"b"}, {"a", "b"}, {"a", "b", "c"}]
    for n, n2 in pairs:
        assert leq(n, n2).verdict == "holds_within_bounds"
        for b in subsets:
            assert leq(n, n2, b=b).verdict == "holds_within_bounds"


def test_leq_full_b_justness_progress_coincide():
    """With B the whole alphabet, the two criteria give the same verdicts."""
    nets = [dead_net(), tau_loop(), compile_source("a.(b.0 + c.0)"),
            compile_source("a.b.0 + a.c.0"), compile_source("K = a.K;")]
    act = {"a", "b", "c"}
    for n in nets:
        for n2 in nets:
            vj = leq(n, n2, "justness", b=act).verdict
            vp = leq(n, n2, "progress", b=act).verdict
            assert vj == vp


def test_leq_precongruence_under_relabel_and_abstract():
    """A holding preorder keeps holding after relabelling or hiding both
    sides the same way."""
    n = compile_source("a.b.0 + a.c.0")
    n2 = compile_source("a.(b.0 + c.0)")
    assert leq(relabel(n, {"a": "d"}), relabel(n2, {"a": "d"})).verdict == \
        "holds_within_bounds"
    assert leq(abstract(n, {"a"}), abstract(n2, {"a"})).verdict == \
        "holds_within_bounds"


def test_leq_inconclusive_on_truncation():
    """A state bound too small for the net yields inconclusive, not a lie."""
    n = compile_source("a.b.c.d.e.0")
    r = leq(n, n, bounds=Bounds(max_nodes=3))
    assert r.verdict == "inconclusive"


def test_leq_report_dict():
    """The JSON payload carries verdict, bounds, and the counterexample."""
    n = compile_source("a.(b.0 + c.0)")
    n2 = compile_source("a.b.0 + a.c.0")
    d = leq(n, n2).to_dict()
    assert d["verdict"] == "fails"
    assert d["counterexample"]["trace"] == ["a"]
    assert d["bounds"]["max_trace_len"] == 6
    assert set(d["witness_counts"]) == {"left", "right"}


def test_merge_traces():
    """Free interleaving, forced synchronization, and one-sided sync."""
    assert merge_traces(("a",), ("b",), set()) == {("a", "b"), ("b", "a")}
    assert merge_traces(("a",), ("a",), {"a"}) == {("a",)}
    assert merge_traces(("a", "b"), ("b",), {"b"}) == {("a", "b")}
    assert merge_traces(("a",), ("b",), {"a", "b"}) == frozenset()
    assert merge_traces((), (), {"a"}) == {()}


@given(st.lists(st.sampled_from("abc"), max_size=3),
       st.lists(st.sampled_from("abc"), max_size=3),
       st.sets(st.sampled_from("abc")))
def test_merge_traces_projections(s, r, a):
    """Merges exist iff the sync subwords agree, and every merge has the
    right length, symbol counts, and sync subword."""
    s, r = tuple(s), tuple(r)
    sync_s = tuple(x for x in s if x in a)
    sync_r = tuple(x for x in r if x in a)
    merged = merge_traces(s, r, a)
    assert bool(merged) == (sync_s == sync_r)
    for word in merged:
        assert len(word) == len(s) + len(r) - len(sync_s)
        assert tuple(x for x in word if x in a) == sync_s
        for x in set(word):
            expect = s.count(x) if x in a else s.count(x) + r.count(x)
            assert word.count(x) == expect


def test_claim6_trivial():
    """Composing two inaction nets: both sides are just (empty trace, {})."""
    rep = claim6_check(dead_net(), dead_net(), {"a"})
    assert rep.equal
    assert rep.verdict == "equal_within_bounds"


def test_claim6_branching_with_test_partner():
    """The decomposition formula reproduces the composed witnesses."""
    t = compile_source("a.c.0")
    n = compile_source("a.(b.0 + c.0)")
    rep = claim6_check(t, n, {"a", "b", "c"}, bounds=Bounds(max_trace_len=2))
    assert rep.equal
    rep = claim6_check(t, compile_source("a.b.0 + a.c.0"), {"a", "b", "c"},
                       bounds=Bounds(max_trace_len=2))
    assert rep.equal


def test_claim6_with_signal_component():
    """A read-arc component composes correctly through the formula."""
    sig = compile_source("drive > ty.0")
    car = compile_source("drive.drive.0")
    rep = claim6_check(sig, car, {"drive"}, bounds=Bounds(max_trace_len=4))
    assert rep.equal


@st.composite
def _small_net(draw, tag):
    places = ["%s%d" % (tag, i) for i in range(3)]
    labels = ["a", "b", TAU]
    n_trans = draw(st.integers(1, 3))
    flow, read, label = {}, {}, {}
    for i in range(n_trans):
        t = "%st%d" % (tag, i)
        label[t] = draw(st.sampled_from(labels))
        pre = draw(st.lists(st.sampled_from(places), unique=True, max_size=2))
        if pre:
            post = draw(st.lists(st.sampled_from(places), unique=True,
                                 max_size=len(pre)))
            for p in pre:
                flow[(p, t)] = 1
            for p in post:
                flow[(t, p)] = 1
            rest = [p for p in places if p not in pre]
            for p in draw(st.lists(st.sampled_from(rest), unique=True,
                                   max_size=1)) if rest else []:
                read[(p, t)] = 1
        else:
            for p in draw(st.lists(st.sampled_from(places), unique=True,
                                   min_size=1, max_size=2)):
                read[(p, t)] = 1
    m0 = Multiset(draw(st.lists(st.sampled_from(places), unique=True,
                                min_size=1, max_size=3)))
    return Net(set(places), set(label), flow, read, m0, label,
               alphabet={"a", "b"}, name="rnd-" + tag)


@settings(max_examples=30, deadline=None)
@given(_small_net("l"), _small_net("r"))
def test_claim6_random_nets(n1, n2):
    """The decomposition law holds on random small token-conserving nets."""
    rep = claim6_check(n1, n2, {"a"},
                       bounds=Bounds(max_trace_len=3, max_cycle_len=4,
                                     max_nodes=5000))
    assert rep.equal, rep.to_dict()
