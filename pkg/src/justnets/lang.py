"""CCSPS concrete syntax, the dex place decomposition, operational transition
derivation, and compilation to Petri nets with read arcs.

Grammar (actions start lowercase, agent identifiers start uppercase):

    program   := statement* term?
    statement := "alphabet" "{" names "}" ";"  |  IDENT "=" term ";"
    term      := sumexpr (("|[" names "]|" | "|||" | "||") sumexpr)*
    sumexpr   := action ">" sum  |  sum
    sum       := prefix ("+" prefix)*  |  "0"  |  atom
    prefix    := action "." body
    body      := prefix | "0" | IDENT | "(" term ")"
    atom      := IDENT | "(" term ")"
               | "hide" "{" names "}" "in" term
               | "rename" "{" a "->" b ("," ...)* "}" "in" term

"P || Q" synchronizes over the declared alphabet, "P |||" over nothing.
The action names "tau" and "w" are reserved and rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mset import Multiset
from .net import Net, TAU, RESERVED_ACTIONS, is_visible, label_str
from .paths import reach


class LangError(Exception):
    """Syntax, guardedness, definedness, or compilation failure."""


# -- abstract syntax -----------------------------------------------------------


@dataclass(frozen=True)
class GuardedSum:
    branches: tuple  # of (action, Term); () is the inaction process 0

    def __str__(self):
        if not self.branches:
            return "0"
        return "+".join("%s.%s" % (a, _body_str(p)) for a, p in self.branches)


@dataclass(frozen=True)
class Signal:
    action: str
    body: GuardedSum

    def __str__(self):
        return "%s>%s" % (self.action, self.body)


@dataclass(frozen=True)
class Par:
    left: "Term"
    sync: frozenset
    right: "Term"

    def __str__(self):
        return "(%s|[%s]|%s)" % (self.left, ",".join(sorted(self.sync)), self.right)


@dataclass(frozen=True)
class Hide:
    actions: frozenset
    body: "Term"

    def __str__(self):
        return "hide{%s}(%s)" % (",".join(sorted(self.actions)), self.body)


@dataclass(frozen=True)
class Rename:
    mapping: tuple  # sorted (old, new) pairs
    body: "Term"

    def __str__(self):
        ren = ",".join("%s->%s" % (o, n) for o, n in self.mapping)
        return "rename{%s}(%s)" % (ren, self.body)


@dataclass(frozen=True)
class Ident:
    name: str

    def __str__(self):
        return self.name


Term = (GuardedSum, Signal, Par, Hide, Rename, Ident)


def _body_str(p):
    # prefix bodies: identifiers, 0 and single prefixes read fine bare
    if isinstance(p, Ident):
        return str(p)
    if isinstance(p, GuardedSum) and len(p.branches) <= 1:
        return str(p)
    return "(%s)" % p


# -- places (dex targets) --------------------------------------------------------


@dataclass(frozen=True)
class PSum:
    branches: tuple

    def __str__(self):
        return str(GuardedSum(self.branches))


@dataclass(frozen=True)
class PSignal:
    action: str
    branches: tuple

    def __str__(self):
        return "%s>%s" % (self.action, GuardedSum(self.branches))


@dataclass(frozen=True)
class PLeft:
    inner: object
    sync: frozenset

    def __str__(self):
        return "(%s|[%s]|_)" % (self.inner, ",".join(sorted(self.sync)))


@dataclass(frozen=True)
class PRight:
    sync: frozenset
    inner: object

    def __str__(self):
        return "(_|[%s]|%s)" % (",".join(sorted(self.sync)), self.inner)


@dataclass(frozen=True)
class PHide:
    actions: frozenset
    inner: object

    def __str__(self):
        return "hide{%s}(%s)" % (",".join(sorted(self.actions)), self.inner)


@dataclass(frozen=True)
class PRen:
    mapping: tuple
    inner: object

    def __str__(self):
        ren = ",".join("%s->%s" % (o, n) for o, n in self.mapping)
        return "rename{%s}(%s)" % (ren, self.inner)


# -- tokenizer -------------------------------------------------------------------


_PUNCT = ["->", "|[", "]|", "|||", "||", "(", ")", "{", "}", "+", ".", ",",
          ";", "=", ">", "|"]
_KEYWORDS = {"hide", "rename", "in", "alphabet"}


def _tokenize(text):
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in _KEYWORDS else ("ident" if word[0].isupper() else "action")
            toks.append((kind, word, line, col))
            col += j - i
            i = j
            continue
        if c == "0":
            toks.append(("zero", "0", line, col))
            i += 1
            col += 1
            continue
        for p in sorted(_PUNCT, key=len, reverse=True):
            if text.startswith(p, i):
                toks.append(("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise LangError("line %d col %d: unexpected character %r" % (line, col, c))
    toks.append(("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.alphabet = set()

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        if t[0] != "eof":
            self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise LangError("line %d col %d: %s (at %r)" % (tok[2], tok[3], msg, tok[1]))

    def expect(self, value):
        t = self.next()
        if t[1] != value:
            self.fail("expected %r" % value, t)
        return t

    def action_name(self):
        t = self.next()
        if t[0] != "action":
            self.fail("expected an action name", t)
        if t[1] in RESERVED_ACTIONS:
            self.fail("action name %r is reserved" % t[1], t)
        return t[1]

    def names(self):
        out = set()
        if self.peek()[1] == "}":
            return out
        out.add(self.action_name())
        while self.peek()[1] == ",":
            self.next()
            out.add(self.action_name())
        return out

    # term := sumexpr (parop sumexpr)*
    def term(self):
        left = self.sumexpr()
        while True:
            t = self.peek()
            if t[1] == "|[":
                self.next()
                left = Par(left, frozenset(self._sync_names()), self.sumexpr())
            elif t[1] == "|||":
                self.next()
                left = Par(left, frozenset(), self.sumexpr())
            elif t[1] == "||":
                self.next()
                if not self.alphabet:
                    self.fail("'||' needs a prior alphabet {...}; declaration", t)
                left = Par(left, frozenset(self.alphabet), self.sumexpr())
            else:
                return left

    def _sync_names(self):
        out = set()
        if self.peek()[1] != "]|":
            out.add(self.action_name())
            while self.peek()[1] == ",":
                self.next()
                out.add(self.action_name())
        self.expect("]|")
        return out

    def sumexpr(self):
        t, t2 = self.peek(), self.peek(1)
        if t[0] == "action" and t2[1] == ">":
            act = self.action_name()
            self.expect(">")
            body = self.sum_only()
            return Signal(act, body)
        return self.sum_or_atom()

    def sum_only(self):
        node = self.sum_or_atom()
        if not isinstance(node, GuardedSum):
            self.fail("a signal body must be a guarded sum")
        return node

    def sum_or_atom(self):
        t = self.peek()
        if t[0] == "action":
            branches = [self.prefix()]
            while self.peek()[1] == "+":
                self.next()
                branches.append(self.prefix())
            return GuardedSum(tuple(branches))
        if t[0] == "zero":
            self.next()
            self._no_sum_continuation()
            return GuardedSum(())
        node = self.atom()
        self._no_sum_continuation()
        return node

    def _no_sum_continuation(self):
        if self.peek()[1] == "+":
            self.fail("summands must be action-prefixed")

    def prefix(self):
        act = self.action_name()
        self.expect(".")
        return (act, self.body())

    def body(self):
        t = self.peek()
        if t[0] == "action":
            return GuardedSum((self.prefix(),))
        if t[0] == "zero":
            self.next()
            return GuardedSum(())
        if t[0] == "ident":
            self.next()
            return Ident(t[1])
        if t[1] == "(":
            self.next()
            inner = self.term()
            self.expect(")")
            return inner
        self.fail("expected a process after '.'")

    def atom(self):
        t = self.peek()
        if t[0] == "ident":
            self.next()
            return Ident(t[1])
        if t[1] == "(":
            self.next()
            inner = self.term()
            self.expect(")")
            return inner
        if t[1] == "hide":
            self.next()
            self.expect("{")
            acts = self.names()
            self.expect("}")
            self.expect("in")
            return Hide(frozenset(acts), self.term())
        if t[1] == "rename":
            self.next()
            self.expect("{")
            pairs = []
            if self.peek()[1] != "}":
                pairs.append(self._ren_pair())
                while self.peek()[1] == ",":
                    self.next()
                    pairs.append(self._ren_pair())
            self.expect("}")
            sources = [o for o, _ in pairs]
            if len(set(sources)) != len(sources):
                self.fail("renaming maps an action twice")
            self.expect("in")
            return Rename(tuple(sorted(pairs)), self.term())
        self.fail("expected a process")

    def _ren_pair(self):
        old = self.action_name()
        self.expect("->")
        new = self.action_name()
        return (old, new)

    def program(self):
        defs = {}
        order = []
        main = None
        while self.peek()[0] != "eof":
            t = self.peek()
            if t[1] == "alphabet":
                self.next()
                self.expect("{")
                self.alphabet |= self.names()
                self.expect("}")
                self.expect(";")
            elif t[0] == "ident" and self.peek(1)[1] == "=":
                name = self.next()[1]
                self.expect("=")
                if name in defs:
                    self.fail("identifier %r defined twice" % name)
                defs[name] = self.term()
                order.append(name)
                self.expect(";")
            else:
                if main is not None:
                    self.fail("only one main term is allowed")
                main = self.term()
        if main is None:
            if not order:
                self.fail("empty input: no definitions and no main term")
            main = Ident(order[0])
        return defs, main, frozenset(self.alphabet)


@dataclass(frozen=True)
class ParseResult:
    defs: dict
    main: object
    alphabet: frozenset

    def __iter__(self):  # allows: defs, term = parse(...)
        return iter((self.defs, self.main))


def parse(text):
    """Parse a .ccsps program into (Definitions, main Term); the result also
    carries the declared alphabet. Guardedness and definedness are checked."""
    p = _Parser(text)
    defs, main, alphabet = p.program()
    for name, body in defs.items():
        _check(body, defs, guarded=False, require_guard=True, where="definition of %s" % name)
    _check(main, defs, guarded=True, require_guard=False, where="main term")
    return ParseResult(defs, main, alphabet)


def _check(term, defs, guarded, require_guard, where):
    if isinstance(term, Ident):
        if term.name not in defs:
            raise LangError("%s: undefined identifier %s" % (where, term.name))
        if require_guard and not guarded:
            raise LangError("%s: unguarded occurrence of %s" % (where, term.name))
    elif isinstance(term, GuardedSum):
        for _, p in term.branches:
            _check(p, defs, True, require_guard, where)
    elif isinstance(term, Signal):
        _check(term.body, defs, guarded, require_guard, where)
    elif isinstance(term, Par):
        _check(term.left, defs, guarded, require_guard, where)
        _check(term.right, defs, guarded, require_guard, where)
    elif isinstance(term, (Hide, Rename)):
        _check(term.body, defs, guarded, require_guard, where)
    else:
        raise LangError("%s: not a term: %r" % (where, term))


# -- dex and derivation ------------------------------------------------------------


def dex(term, defs):
    """Decompose a term into its set of initial places, expanding identifiers
    through their defining equations (guardedness bounds the expansion)."""
    return _dex(term, defs, ())


def _dex(term, defs, expanding):
    if isinstance(term, GuardedSum):
        return frozenset([PSum(term.branches)])
    if isinstance(term, Signal):
        return frozenset([PSignal(term.action, term.body.branches)])
    if isinstance(term, Par):
        return frozenset(
            [PLeft(m, term.sync) for m in _dex(term.left, defs, expanding)]
            + [PRight(term.sync, m) for m in _dex(term.right, defs, expanding)])
    if isinstance(term, Hide):
        return frozenset([PHide(term.actions, m) for m in _dex(term.body, defs, expanding)])
    if isinstance(term, Rename):
        return frozenset([PRen(term.mapping, m) for m in _dex(term.body, defs, expanding)])
    if isinstance(term, Ident):
        if term.name in expanding:
            raise LangError("unguarded recursion through %s" % term.name)
        if term.name not in defs:
            raise LangError("undefined identifier %s" % term.name)
        return _dex(defs[term.name], defs, expanding + (term.name,))
    raise LangError("not a term: %r" % (term,))


def _place_transitions(places, defs):
    """All transitions (H, V, label, J) derivable from a set of places,
    computed structurally by the operational rules."""
    out = set()
    lefts = {}
    rights = {}
    hides = {}
    rens = {}
    for mu in places:
        if isinstance(mu, PSum):
            for a, p in mu.branches:
                out.add((frozenset([mu]), frozenset(), a, _dex(p, defs, ())))
        elif isinstance(mu, PSignal):
            out.add((frozenset(), frozenset([mu]), mu.action, frozenset()))
            for a, p in mu.branches:
                out.add((frozenset([mu]), frozenset(), a, _dex(p, defs, ())))
        elif isinstance(mu, PLeft):
            lefts.setdefault(mu.sync, set()).add(mu.inner)
        elif isinstance(mu, PRight):
            rights.setdefault(mu.sync, set()).add(mu.inner)
        elif isinstance(mu, PHide):
            hides.setdefault(mu.actions, set()).add(mu.inner)
        elif isinstance(mu, PRen):
            rens.setdefault(mu.mapping, set()).add(mu.inner)
        else:
            raise LangError("not a place: %r" % (mu,))

    for sync in set(lefts) | set(rights):
        tl = _place_transitions(lefts.get(sync, set()), defs)
        tr = _place_transitions(rights.get(sync, set()), defs)
        tag_l = lambda ps, sync=sync: frozenset(PLeft(p, sync) for p in ps)
        tag_r = lambda ps, sync=sync: frozenset(PRight(sync, p) for p in ps)
        for h, v, a, j in tl:
            if not (is_visible(a) and a in sync):
                out.add((tag_l(h), tag_l(v), a, tag_l(j)))
        for h, v, a, j in tr:
            if not (is_visible(a) and a in sync):
                out.add((tag_r(h), tag_r(v), a, tag_r(j)))
        for h1, v1, a1, j1 in tl:
            if is_visible(a1) and a1 in sync:
                for h2, v2, a2, j2 in tr:
                    if a2 == a1:
                        out.add((tag_l(h1) | tag_r(h2), tag_l(v1) | tag_r(v2),
                                 a1, tag_l(j1) | tag_r(j2)))

    for acts, inner in hides.items():
        tag = lambda ps, acts=acts: frozenset(PHide(acts, p) for p in ps)
        for h, v, a, j in _place_transitions(inner, defs):
            lbl = TAU if (is_visible(a) and a in acts) else a
            out.add((tag(h), tag(v), lbl, tag(j)))

    for mapping, inner in rens.items():
        f = dict(mapping)
        tag = lambda ps, mapping=mapping: frozenset(PRen(mapping, p) for p in ps)
        for h, v, a, j in _place_transitions(inner, defs):
            lbl = f.get(a, a) if is_visible(a) else a
            out.add((tag(h), tag(v), lbl, tag(j)))

    return out


def derive(defs, seed, fuel=10000):
    """Saturate the place set from seed under the derivation rules.

    Returns (transitions, places, complete): transitions are tuples of
    (preset, readset, label, postset) with multiset pre/read/post parts,
    and complete is False when fuel ran out before the fixed point.
    """
    places = set(seed)
    trans = set()
    while True:
        trans = _place_transitions(places, defs)
        new_places = set(places)
        for h, v, a, j in trans:
            new_places |= j
        if new_places == places:
            result = {(Multiset(set(h)), Multiset(set(v)), a, Multiset(set(j)))
                      for h, v, a, j in trans}
            return result, places, True
        if len(new_places) > fuel:
            result = {(Multiset(set(h)), Multiset(set(v)), a, Multiset(set(j)))
                      for h, v, a, j in trans}
            return result, new_places, False
        places = new_places


def compile_term(defs, term, alphabet=(), fuel=10000, max_nodes=10000, name=None):
    """Compile a term to its reachable Petri net, with dex(term) marked."""
    seed = dex(term, defs)
    transitions, places, complete = derive(defs, seed, fuel)
    if not complete:
        raise LangError("place saturation exceeded the fuel bound (%d)" % fuel)

    keyed = sorted(
        transitions,
        key=lambda tr: (label_str(tr[2]), sorted(str(p) for p in tr[0]),
                        sorted(str(p) for p in tr[1]), sorted(str(p) for p in tr[3])))
    flow = {}
    read = {}
    label = {}
    for i, (h, v, a, j) in enumerate(keyed):
        tid = "t%d" % i
        label[tid] = a
        for p, k in h.items():
            flow[(p, tid)] = k
        for p, k in j.items():
            flow[(tid, p)] = k
        for p, k in v.items():
            read[(p, tid)] = k
    m0 = Multiset({p: 1 for p in seed})
    net = Net(places, set(label), flow, read, m0, label,
              alphabet=set(alphabet), name=name or str(term))
    return restrict_reachable(net, max_nodes)


def compile_source(text, fuel=10000, max_nodes=10000, name=None):
    """Parse and compile a .ccsps program in one step."""
    r = parse(text)
    return compile_term(r.defs, r.main, alphabet=r.alphabet, fuel=fuel,
                        max_nodes=max_nodes, name=name)


def restrict_reachable(net, max_nodes=10000):
    """Drop places and transitions that no reachable marking or firing uses."""
    g = reach(net, max_nodes)
    if g.truncated:
        raise LangError("reachable state space exceeded %d markings" % max_nodes)
    places = set()
    for m in g.succ:
        places |= m.support()
    trans = {t for _, t, _ in g.edges()}
    flow = {(a, b): w for (a, b), w in net.flow.items()
            if (a in places and b in trans) or (a in trans and b in places)}
    read = {(s, t): w for (s, t), w in net.read.items()
            if s in places and t in trans}
    label = {t: l for t, l in net.label.items() if t in trans}
    return Net(places, trans, flow, read, net.m0, label,
               alphabet=net.alphabet, name=net.name)
