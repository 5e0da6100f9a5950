"""Parser, place decomposition, derivation, and compilation tests."""

import pytest
from hypothesis import given, settings, strategies as st

from justnets.mset import Multiset
from justnets.net import Net, TAU, abstract, guarded_choice, net_isomorphic, parallel, relabel
from justnets.lang import (
    GuardedSum, Signal, Par, Hide, Rename, Ident,
    PSum, PSignal, PLeft, PRight, PHide,
    LangError, parse, dex, derive, compile_term, compile_source, restrict_reachable,
)


TRAFFIC = """
TL = tr.tg.(drive > ty.TL);
Traffic = drive.drive.0;
TL |[drive]| Traffic
"""


def test_parse_zero():
    """The bare term 0 is the empty guarded sum."""
    r = parse("0")
    assert r.main == GuardedSum(())
    assert r.defs == {}


def test_parse_traffic_light_definition():
    """The light cycles red -> green -> signalling, with a guarded recursion."""
    r = parse("TL = tr.tg.(drive > ty.TL);")
    tl = r.defs["TL"]
    assert isinstance(tl, GuardedSum) and len(tl.branches) == 1
    act, after_red = tl.branches[0]
    assert act == "tr"
    (act2, sig), = after_red.branches
    assert act2 == "tg"
    assert sig == Signal("drive", GuardedSum((("ty", Ident("TL")),)))


def test_parse_main_defaults_to_first_definition():
    """Without a bare term the first equation names the system."""
    r = parse("K = a.0; L = b.0;")
    assert r.main == Ident("K")


def test_parse_sum_keeps_duplicate_branches():
    """Branches are a sequence, so a.0 + a.0 has two of them."""
    r = parse("a.0 + a.0")
    assert len(r.main.branches) == 2


def test_parse_rejects_unprefixed_summand():
    """Only action-prefixed processes can be summands."""
    with pytest.raises(LangError):
        parse("K = a.0; K + a.0")
    with pytest.raises(LangError):
        parse("(a.0) + b.0")


def test_parse_rejects_reserved_actions():
    """tau and w are internal labels, not writable actions."""
    with pytest.raises(LangError):
        parse("tau.0")
    with pytest.raises(LangError):
        parse("w.0")
    with pytest.raises(LangError):
        parse("hide {w} in a.0")


def test_parse_parallel_forms():
    """Explicit sync sets, the empty shorthand, and the alphabet shorthand."""
    r = parse("a.0 |[a,b]| b.0")
    assert r.main.sync == frozenset({"a", "b"})
    r = parse("a.0 ||| b.0")
    assert r.main.sync == frozenset()
    r = parse("alphabet {a,b}; a.0 || b.0")
    assert r.main.sync == frozenset({"a", "b"})
    with pytest.raises(LangError):
        parse("a.0 || b.0")


def test_parse_hide_and_rename():
    """Hiding and renaming scope over the rest of the input."""
    r = parse("hide {a} in a.0 ||| b.0")
    assert isinstance(r.main, Hide)
    assert isinstance(r.main.body, Par)
    r = parse("rename {a->b, c->d} in a.c.0")
    assert r.main.mapping == (("a", "b"), ("c", "d"))
    with pytest.raises(LangError):
        parse("rename {a->b, a->c} in a.0")


def test_parse_definedness_and_guardedness():
    """Every identifier must be defined; recursion must pass a guard."""
    with pytest.raises(LangError):
        parse("K = a.L;")
    with pytest.raises(LangError):
        parse("K = K;")
    with pytest.raises(LangError):
        parse("K = K ||| a.0;")
    parse("K = a.K;")
    parse("K = a.(K ||| K);")
    parse("K = a.0; K")


def test_parse_signal_body_must_be_guarded_sum():
    """A signal guards a choice, not an arbitrary process."""
    parse("drive > ty.0")
    parse("a > b.0 + c.0")
    with pytest.raises(LangError):
        parse("K = b.0; a > K")
    with pytest.raises(LangError):
        parse("a > (b.0 ||| c.0)")


def test_parse_misc_errors():
    """Double definitions, two main terms, stray characters."""
    with pytest.raises(LangError):
        parse("K = a.0; K = b.0;")
    with pytest.raises(LangError):
        parse("a.0 b.0")
    with pytest.raises(LangError):
        parse("a.0 @")
    with pytest.raises(LangError):
        parse("")


def test_dex_sum_and_signal_are_single_places():
    """Sums and signals decompose to one place each."""
    r = parse("a.0 + b.0")
    assert dex(r.main, r.defs) == frozenset([PSum(r.main.branches)])
    r = parse("drive > ty.0")
    (p,) = dex(r.main, r.defs)
    assert p == PSignal("drive", (("ty", GuardedSum(())),))


def test_dex_parallel_tags_each_side():
    """Parallel components keep their own places, tagged by side."""
    r = parse("a.0 ||| b.0")
    places = dex(r.main, r.defs)
    assert len(places) == 2
    kinds = {type(p) for p in places}
    assert kinds == {PLeft, PRight}


def test_dex_expands_identifiers():
    """dex sees through defining equations."""
    r = parse("K = a.K;")
    body = r.defs["K"]
    assert dex(Ident("K"), r.defs) == frozenset([PSum(body.branches)])


def test_dex_hide_wraps_inner_places():
    """Hiding wraps each inner place."""
    r = parse("hide {a} in a.0 ||| b.0")
    places = dex(r.main, r.defs)
    assert len(places) == 2
    assert all(isinstance(p, PHide) for p in places)


def test_derive_signal_axiom():
    """A signal place emits its action with no preset and no postset,
    reading only its own place."""
    r = parse("drive > ty.0")
    seed = dex(r.main, r.defs)
    trans, places, complete = derive(r.defs, seed)
    assert complete
    (p,) = seed
    assert (Multiset(), Multiset([p]), "drive", Multiset()) in trans
    branch = [t for t in trans if t[2] == "ty"]
    assert len(branch) == 1
    assert branch[0][0] == Multiset([p])


def test_derive_fuel_exhaustion():
    """Unbounded place growth is reported, not looped on."""
    r = parse("K = a.(K ||| K);")
    _, _, complete = derive(r.defs, dex(Ident("K"), r.defs), fuel=40)
    assert not complete
    with pytest.raises(LangError):
        compile_term(r.defs, Ident("K"), fuel=40)


def test_compile_zero():
    """0 compiles to one marked place and no transitions."""
    n = compile_source("0")
    assert len(n.places) == 1
    assert len(n.transitions) == 0
    assert n.m0.cardinality == 1


def test_compile_prefix_chain():
    """drive.drive.0 compiles to a three-place, two-transition chain."""
    n = compile_source("drive.drive.0")
    assert len(n.places) == 3
    assert len(n.transitions) == 2
    assert sorted(n.label.values()) == ["drive", "drive"]
    m1 = n.fire1(n.m0, n.enabled_transitions(n.m0)[0])
    assert len(n.enabled_transitions(m1)) == 1


def test_compile_choice_shares_continuation_place():
    """a.0 + b.0 has one marked place and a shared 0 place."""
    n = compile_source("a.0 + b.0")
    assert len(n.places) == 2
    assert sorted(n.label.values()) == ["a", "b"]


def test_compile_recursive_self_loop():
    """K = a.K compiles to a single place with an a self-loop."""
    n = compile_source("K = a.K;")
    assert len(n.places) == 1
    assert len(n.transitions) == 1
    (t,) = n.transitions
    assert n.preset(t) == n.postset(t) == n.m0


def test_compile_synchronization():
    """A shared action in the sync set becomes one joint transition."""
    n = compile_source("a.0 |[a]| a.0")
    assert len(n.transitions) == 1
    (t,) = n.transitions
    assert n.preset(t).cardinality == 2
    assert n.label[t] == "a"


def test_compile_sync_without_partner_is_stuck():
    """An action in the sync set with no partner cannot fire alone."""
    n = compile_source("a.0 |[b]| b.0")
    assert sorted(v for v in n.label.values()) == ["a"]


def test_compile_hidden_loop_is_a_tau_self_loop():
    """Hiding the loop action leaves the one-place tau cycle."""
    n = compile_source("K = a.K; hide {a} in K")
    bare = Net({"s"}, {"t"}, {("s", "t"): 1, ("t", "s"): 1}, {},
               Multiset(["s"]), {"t": TAU})
    assert net_isomorphic(n, bare)


def test_compile_signal_only_arc_is_a_read_arc():
    """The signalling transition touches the root place by a read arc only."""
    n = compile_source("drive > ty.0")
    (t,) = [t for t in n.transitions if n.label[t] == "drive"]
    assert not n.preset(t)
    assert not n.postset(t)
    (root,) = n.m0.support()
    assert n.readset(t) == Multiset([root])


def test_compile_traffic():
    """Three light places, three car places, tr/tg/ty, and two synchronized
    drive transitions that read the green place."""
    n = compile_source(TRAFFIC)
    assert len(n.places) == 6
    lights = [p for p in n.places if isinstance(p, PLeft)]
    cars = [p for p in n.places if isinstance(p, PRight)]
    assert len(lights) == 3 and len(cars) == 3
    by_label = {}
    for t in n.transitions:
        by_label.setdefault(n.label[t], []).append(t)
    assert {k: len(v) for k, v in by_label.items()} == {
        "tr": 1, "tg": 1, "ty": 1, "drive": 2}
    green = [p for p in lights if isinstance(p.inner, PSignal)]
    assert len(green) == 1
    for t in by_label["drive"]:
        assert n.readset(t) == Multiset(green)
        assert green[0] not in n.preset(t)


def test_compile_initial_marking_is_a_set():
    """dex yields a set, so every initially marked place holds one token."""
    for src in ["0", "a.0 ||| a.0", TRAFFIC, "K = a.K + b.c.K; K ||| a.b.0"]:
        n = compile_source(src, fuel=200, max_nodes=2000)
        assert all(k == 1 for _, k in n.m0.items())


def _consistent(src_p, src_q, sync):
    r = parse("%s ||| %s" % (src_p, src_q))
    whole = compile_term(r.defs, Par(r.main.left, frozenset(sync), r.main.right))
    left = compile_term(r.defs, r.main.left)
    right = compile_term(r.defs, r.main.right)
    composed = restrict_reachable(parallel(left, right, sync))
    return net_isomorphic(whole, composed)


def test_compile_consistent_with_net_parallel():
    """Compiling a parallel term matches composing the compiled parts."""
    assert _consistent("a.0", "b.0", set())
    assert _consistent("a.0", "a.0", {"a"})
    assert _consistent("a.b.0 + c.0", "b.a.0", {"a", "b"})
    assert _consistent("(drive > ty.0)", "drive.drive.0", {"drive"})
    assert _consistent("a.(b.0 + c.0)", "c.b.0", {"b", "c"})


def test_compile_consistent_with_net_hide_rename_choice():
    """The same consistency holds for hiding, renaming, and guarded choice."""
    base = "a.b.0 + c.0"
    n = compile_source(base)
    hidden = compile_source("hide {a} in " + base)
    assert net_isomorphic(hidden, restrict_reachable(abstract(n, {"a"})))
    renamed = compile_source("rename {a->c} in " + base)
    assert net_isomorphic(renamed, restrict_reachable(relabel(n, {"a": "c"})))
    single = guarded_choice([("a", compile_source("b.0"))])
    assert net_isomorphic(compile_source("a.b.0"), restrict_reachable(single))
    loops = parse("K = d.K; L = e.L; a.K + c.L")
    chosen = guarded_choice([("a", compile_source("K = d.K;")),
                             ("c", compile_source("L = e.L;"))])
    assert net_isomorphic(compile_term(loops.defs, loops.main),
                          restrict_reachable(chosen))


@st.composite
def _terms(draw, depth=2):
    if depth == 0:
        return draw(st.sampled_from(["0", "a.0", "b.0", "a.b.0"]))
    kind = draw(st.sampled_from(["prefix", "sum", "par", "hide"]))
    if kind == "prefix":
        return "%s.(%s)" % (draw(st.sampled_from("ab")), draw(_terms(depth=depth - 1)))
    if kind == "sum":
        acts = draw(st.lists(st.sampled_from("ab"), min_size=1, max_size=2))
        return " + ".join("%s.(%s)" % (a, draw(_terms(depth=0))) for a in acts)
    if kind == "par":
        sync = draw(st.sets(st.sampled_from("ab")))
        return "(%s) |[%s]| (%s)" % (
            draw(_terms(depth=depth - 1)), ",".join(sorted(sync)),
            draw(_terms(depth=depth - 1)))
    return "hide {%s} in (%s)" % (draw(st.sampled_from("ab")),
                                  draw(_terms(depth=depth - 1)))


@settings(max_examples=25, deadline=None)
@given(_terms(), _terms(), st.sets(st.sampled_from("ab")))
def test_compile_consistency_on_random_terms(p, q, sync):
    """Compile-then-compose equals compose-then-compile on random terms."""
    assert _consistent("(%s)" % p, "(%s)" % q, sync)
