"""Derived constructions: totalisation, domain automata, automaton
equivalence, and look-ahead removal.

These reduce richer comparison problems (partial transducers, transducers
with regular look-ahead) to the core decision procedure on total
transducers relative to an automaton.
"""

from dataclasses import dataclass

from .equiv import Verdict, decide
from .errors import EmptyDomainError, ValidationError
from .model import Axiom, Dta, Mtt, Rule, dta_analyze, _calls_of
from .terms import Kind


def totalize(store, m, bottom_name="⊥"):
    """Complete a partial transducer with rules emitting a fixed leaf.

    The leaf is a rank-0 direct-output symbol, added to the alphabet when
    absent; existing rules are untouched, so the result agrees with m on
    m's domain.
    """
    bottom = store.symbol(bottom_name, 0, Kind.OUT)
    delta_out = m.delta_out if bottom in m.delta_out else m.delta_out + (bottom,)
    bottom_node = store.intern(bottom)
    formals = tuple(store.yvar(j) for j in range(1, m.param_count + 1))
    rules = list(m.rules)
    for q in m.states:
        for f in m.sigma:
            if m.rule(q, f) is None:
                rules.append(Rule(q, f, formals, bottom_node))
    return Mtt(sigma=m.sigma, delta_out=delta_out, delta_in=m.delta_in,
               param_count=m.param_count, states=m.states, rules=tuple(rules))


def _set_name(states):
    return "{%s}" % ",".join(sorted(s.name for s in states))


def domain_dta(store, m, axiom):
    """Automaton accepting exactly the inputs on which evaluation succeeds.

    States are sets of transducer states that must all succeed on the
    subtree; parameter arguments contain no calls (the transducer is
    basic), so only state-output calls constrain the domain.  Worst case
    exponentially many sets, built lazily from the axiom's call states.
    """
    _, calls = axiom.decompose(store)
    start = frozenset(store.sym(c) for c in calls)
    names = {start: _set_name(start)}
    trans = {}
    queue = [start]
    seen = set()
    while queue:
        cur = queue.pop(0)
        if cur in seen:
            continue
        seen.add(cur)
        for f in sorted(m.sigma, key=lambda s: s.name):
            rules = [m.rule(q, f) for q in sorted(cur, key=lambda s: s.name)]
            if any(r is None for r in rules):
                continue
            succ = []
            for i in range(1, f.rank + 1):
                acc = set()
                for r in rules:
                    for call in _calls_of(store, r.rhs):
                        if store.sym(store.kids(call)[0]).index == i:
                            acc.add(store.sym(call))
                child = frozenset(acc)
                names.setdefault(child, _set_name(child))
                succ.append(child)
                queue.append(child)
            trans[(names[cur], f)] = tuple(names[c] for c in succ)
    return Dta(states=tuple(names[s] for s in sorted(seen | {start},
                                                     key=lambda s: names[s])),
               init=names[start], trans=trans)


def dta_equiv(store, d1, d2):
    """Language equality of two automata, with a witness on inequality.

    Explores state pairs reachable through transitions defined on both
    sides; the languages differ exactly when some reached pair has a
    transition defined (hence completable, both automata being pruned to
    productive states) on one side only.  The witness plugs the defined
    side's minimal completions into the discovered context.
    """
    if not d1.analyzed:
        d1 = dta_analyze(store, d1)
    if not d2.analyzed:
        d2 = dta_analyze(store, d2)
    syms1 = {}
    for (b, f) in d1.trans:
        syms1.setdefault(b, set()).add(f)
    syms2 = {}
    for (b, f) in d2.trans:
        syms2.setdefault(b, set()).add(f)

    start = (d1.init, d2.init)
    parents = {start: None}
    queue = [start]
    while queue:
        u, v = queue.pop(0)
        fs = sorted(syms1.get(u, set()) | syms2.get(v, set()),
                    key=lambda s: s.name)
        for f in fs:
            t1 = d1.trans.get((u, f))
            t2 = d2.trans.get((v, f))
            if (t1 is None) != (t2 is None):
                side, succ = (d1, t1) if t1 is not None else (d2, t2)
                tree = store.intern(f, tuple(side.witnesses[c] for c in succ))
                node = (u, v)
                while parents[node] is not None:
                    pnode, g, idx, s1, s2 = parents[node]
                    psucc = s1 if t1 is not None else s2
                    kids = [side.witnesses[c] for c in psucc]
                    kids[idx] = tree
                    tree = store.intern(g, tuple(kids))
                    node = pnode
                return False, tree
            if t1 is None:
                continue
            for i, pair in enumerate(zip(t1, t2)):
                if pair not in parents:
                    parents[pair] = ((u, v), f, i, t1, t2)
                    queue.append(pair)
    return True, None


def partial_equiv(store, left, right, bottom_name="⊥"):
    """Equality of two partial transductions.

    Holds iff the two domains coincide and the totalised transducers agree
    relative to the (shared) domain automaton; empty domains are compared
    directly.
    """
    (m1, a1), (m2, a2) = left, right
    d1 = domain_dta(store, m1, a1)
    d2 = domain_dta(store, m2, a2)
    try:
        d1a = dta_analyze(store, d1)
        empty1 = False
    except EmptyDomainError:
        empty1 = True
    try:
        dta_analyze(store, d2)
        empty2 = False
    except EmptyDomainError:
        empty2 = True
    if empty1 or empty2:
        if empty1 and empty2:
            return Verdict(True, reason="both domains are empty")
        return Verdict(False, reason="exactly one domain is empty")
    same, witness = dta_equiv(store, d1, d2)
    if not same:
        return Verdict(False, reason="domains differ",
                       counterexample=witness)
    t1 = totalize(store, m1, bottom_name)
    t2 = totalize(store, m2, bottom_name)
    return decide(store, (t1, a1), (t2, a2), d1a)


# ----------------------------------------------------------------------
# regular look-ahead


@dataclass(frozen=True)
class LookaheadRule:
    state: object
    insym: object
    guard: tuple       # one look-ahead state per child
    formals: tuple
    rhs: int
    line: int = 0


@dataclass(frozen=True)
class LookaheadMtt:
    """Total transducer whose rules are guarded by a bottom-up automaton."""

    sigma: tuple
    delta_out: tuple
    delta_in: tuple
    param_count: int
    states: tuple
    la_states: tuple     # look-ahead states (strings)
    la_trans: dict       # (Symbol, tuple of la states) -> la state
    rules: tuple         # LookaheadRule

    def rule(self, state, insym, guard):
        for r in self.rules:
            if r.state is state and r.insym is insym and r.guard == guard:
                return r
        return None

    def la_value(self, store, t):
        """Look-ahead state the automaton assigns to an input tree."""
        vals = tuple(self.la_value(store, c) for c in store.kids(t))
        return self.la_trans[(store.sym(t), vals)]


def _guard_combos(la_states, rank):
    if rank == 0:
        return [()]
    out = [()]
    for _ in range(rank):
        out = [g + (r,) for g in out for r in la_states]
    return out


def validate_lookahead(store, n):
    """Totality of the look-ahead automaton and of the guarded rules."""
    bad = []
    for f in n.sigma:
        for combo in _guard_combos(n.la_states, f.rank):
            if (f, combo) not in n.la_trans:
                bad.append("look-ahead transition missing for %s%s"
                           % (f.name, list(combo)))
    for q in n.states:
        for f in n.sigma:
            for combo in _guard_combos(n.la_states, f.rank):
                if n.rule(q, f, combo) is None:
                    bad.append("state %s has no rule for %s under guard %s"
                               % (q.name, f.name, list(combo)))
    return bad


def remove_lookahead(store, left, right):
    """Encode two guarded transducers over a guard-annotated alphabet.

    Every input symbol is copied once per pair of guard vectors of the two
    automata; rules are specialised by their guards, and the returned
    automaton accepts exactly the annotated trees that spell out correct
    runs of both automata, so deciding equivalence relative to it answers
    the original question.
    """
    (n1, a1), (n2, a2) = left, right
    bad = validate_lookahead(store, n1) + validate_lookahead(store, n2)
    if bad:
        raise ValidationError(bad)
    if set(n1.sigma) != set(n2.sigma):
        raise ValidationError(["the two transducers use different input alphabets"])

    annotated = {}   # (f, guard1, guard2) -> Symbol
    for f in sorted(n1.sigma, key=lambda s: s.name):
        for g1 in _guard_combos(n1.la_states, f.rank):
            for g2 in _guard_combos(n2.la_states, f.rank):
                name = f.name
                if g1 or g2:
                    name = "%s[%s|%s]" % (f.name, ",".join(g1), ",".join(g2))
                annotated[(f, g1, g2)] = store.symbol(name, f.rank, Kind.INPUT)

    def build(n):
        rules = []
        for (f, g1, g2), sym in annotated.items():
            guard = g1 if n is n1 else g2
            for q in n.states:
                r = n.rule(q, f, guard)
                rules.append(Rule(q, sym, r.formals, r.rhs, r.line))
        return Mtt(sigma=tuple(annotated.values()),
                   delta_out=n.delta_out, delta_in=n.delta_in,
                   param_count=n.param_count, states=n.states,
                   rules=tuple(rules))

    m1, m2 = build(n1), build(n2)

    # Automaton of correct runs: a state is the pair of look-ahead values
    # the current subtree must evaluate to; the root may evaluate to any.
    any_state = "any"
    states = [any_state]
    trans = {}
    pair_name = {}
    for r1 in n1.la_states:
        for r2 in n2.la_states:
            pair_name[(r1, r2)] = "%s|%s" % (r1, r2)
            states.append(pair_name[(r1, r2)])
    for (f, g1, g2), sym in annotated.items():
        succ = tuple(pair_name[(g1[i], g2[i])] for i in range(f.rank))
        trans[(any_state, sym)] = succ
        v1 = n1.la_trans[(f, g1)]
        v2 = n2.la_trans[(f, g2)]
        trans[(pair_name[(v1, v2)], sym)] = succ
    d = Dta(states=tuple(states), init=any_state, trans=trans)
    return (m1, Axiom(a1.term)), (m2, Axiom(a2.term)), d
