"""The transducer and automaton data model, validation, and the interpreter.

A transducer state is a STATE-kind symbol of rank l+1; rule right-hand
sides are ordinary store terms in which a call is a node whose head is a
state symbol, whose first child is an input variable x_i, and whose
remaining children are the parameter arguments.  Axioms are terms of the
same shape with all calls applied to x1 and ground parameter vectors.
"""

from dataclasses import dataclass, field

from .errors import (ArityError, DomainError, EmptyDomainError, ValidationError)
from .terms import BOTTOM, Kind


@dataclass(frozen=True)
class Rule:
    state: object          # Symbol, kind STATE
    insym: object          # Symbol, kind INPUT
    formals: tuple         # parameter symbols as written in the head
    rhs: int
    line: int = 0

    def where(self):
        loc = "%s/%s" % (self.state.name, self.insym.name)
        return loc if not self.line else "%s (line %d)" % (loc, self.line)


@dataclass(frozen=True)
class Mtt:
    sigma: tuple
    delta_out: tuple
    delta_in: tuple
    param_count: int
    states: tuple
    rules: tuple

    def __post_init__(self):
        object.__setattr__(self, "_rule_map", None)

    @property
    def rule_map(self):
        m = self._rule_map
        if m is None:
            m = {}
            for r in self.rules:
                m.setdefault((r.state, r.insym), r)
            object.__setattr__(self, "_rule_map", m)
        return m

    def rule(self, state, insym):
        return self.rule_map.get((state, insym))


@dataclass(frozen=True)
class Axiom:
    term: int

    def decompose(self, store):
        """Split into the output pattern and the call leaves."""
        pat, residuals = store.prefix_decompose(self.term)
        return pat, residuals


@dataclass(frozen=True)
class Dta:
    """Deterministic top-down tree automaton over the input alphabet.

    After analyze() every surviving state carries a minimal-depth witness
    tree (ties broken by lexicographically least preorder name sequence).
    """

    states: tuple          # state names (strings)
    init: str
    trans: dict            # (state, Symbol) -> tuple of child states
    witnesses: dict = None        # state -> witness term id
    witness_depths: dict = None   # state -> depth of that witness

    @property
    def analyzed(self):
        return self.witnesses is not None


def trivial_dta(sigma):
    """The one-state automaton accepting every tree over sigma."""
    trans = {}
    for f in sigma:
        trans[("b", f)] = ("b",) * f.rank
    return Dta(states=("b",), init="b", trans=trans)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self):
        return not self.violations

    def raise_if_failed(self):
        if self.violations:
            raise ValidationError(self.violations)


def _check_rhs(store, m, rule, bad):
    """Walk a right-hand side, collecting grammar violations."""
    l = m.param_count
    states = set(m.states)
    out = set(m.delta_out)
    inner = set(m.delta_in)

    def param_tree(t):
        sym = store.sym(t)
        if sym.kind is Kind.VAR:
            if sym.primed or not 1 <= sym.index <= l:
                bad.append("rule %s: parameter %s out of range (params %d)"
                           % (rule.where(), sym.name, l))
        elif sym.kind is Kind.STATE:
            bad.append("rule %s: state call %s inside a parameter argument "
                       "(transducer must be basic)" % (rule.where(), sym.name))
        elif sym in inner:
            for c in store.kids(t):
                param_tree(c)
        else:
            bad.append("rule %s: symbol %s not allowed inside a parameter "
                       "argument" % (rule.where(), sym.name))

    def output_tree(t):
        sym = store.sym(t)
        if sym.kind is Kind.VAR:
            if sym.primed or not 1 <= sym.index <= l:
                bad.append("rule %s: parameter %s out of range (params %d)"
                           % (rule.where(), sym.name, l))
        elif sym.kind is Kind.STATE:
            if sym not in states:
                bad.append("rule %s: unknown state %s" % (rule.where(), sym.name))
            kids = store.kids(t)
            if not kids or store.sym(kids[0]).kind is not Kind.XVAR:
                bad.append("rule %s: call to %s must take an input variable "
                           "first" % (rule.where(), sym.name))
            else:
                i = store.sym(kids[0]).index
                if not 1 <= i <= rule.insym.rank:
                    bad.append("rule %s: input variable x%d exceeds rank of %s"
                               % (rule.where(), i, rule.insym.name))
                if len(kids) - 1 != l:
                    bad.append("rule %s: call to %s has %d parameter "
                               "arguments, expected %d"
                               % (rule.where(), sym.name, len(kids) - 1, l))
                for c in kids[1:]:
                    param_tree(c)
        elif sym in out:
            for c in store.kids(t):
                output_tree(c)
        elif sym in inner:
            bad.append("rule %s: parameter-alphabet symbol %s at a "
                       "state-output position (transducer must be separated)"
                       % (rule.where(), sym.name))
        else:
            bad.append("rule %s: symbol %s not allowed in a right-hand side"
                       % (rule.where(), sym.name))

    output_tree(rule.rhs)


def validate(store, m, mode="total", axiom=None):
    """Well-formedness report: determinism, totality, basic, separated."""
    bad = []
    l = m.param_count
    if len(set(m.delta_out) & set(m.delta_in)) > 0:
        bad.append("output alphabets overlap: %s"
                   % ", ".join(s.name for s in set(m.delta_out) & set(m.delta_in)))
    expected = tuple(store.yvar(j) for j in range(1, l + 1))
    seen = {}
    for r in m.rules:
        if r.state not in m.states:
            bad.append("rule %s: undeclared state" % r.where())
        if r.insym not in m.sigma:
            bad.append("rule %s: undeclared input symbol" % r.where())
        if r.formals != expected:
            bad.append("rule %s: head parameters must be %s"
                       % (r.where(), ",".join(s.name for s in expected) or "(none)"))
        key = (r.state, r.insym)
        if key in seen:
            bad.append("rules %s and %s: duplicate rule for the same state "
                       "and input symbol (transducer must be deterministic)"
                       % (seen[key].where(), r.where()))
        else:
            seen[key] = r
        _check_rhs(store, m, r, bad)
    if mode == "total":
        for q in m.states:
            for f in m.sigma:
                if (q, f) not in seen:
                    bad.append("missing rule for state %s on input symbol %s "
                               "(transducer must be total)" % (q.name, f.name))
    if axiom is not None:
        _check_axiom(store, m, axiom, bad)
    return ValidationReport(tuple(bad))


def _check_axiom(store, m, axiom, bad):
    inner = set(m.delta_in)
    out = set(m.delta_out)
    l = m.param_count

    def ground_inner(t):
        sym = store.sym(t)
        if sym not in inner:
            bad.append("axiom: parameter values must be ground trees over "
                       "the parameter alphabet, found %s" % sym.name)
            return
        for c in store.kids(t):
            ground_inner(c)

    def walk(t):
        sym = store.sym(t)
        if sym.kind is Kind.STATE:
            kids = store.kids(t)
            if sym not in m.states:
                bad.append("axiom: unknown state %s" % sym.name)
            if not kids or store.sym(kids[0]).kind is not Kind.XVAR \
                    or store.sym(kids[0]).index != 1:
                bad.append("axiom: calls must be applied to x1")
            if len(kids) - 1 != l:
                bad.append("axiom: call to %s has %d parameters, expected %d"
                           % (sym.name, len(kids) - 1, l))
            for c in kids[1:]:
                ground_inner(c)
        elif sym in out:
            for c in store.kids(t):
                walk(c)
        else:
            bad.append("axiom: symbol %s not allowed in the axiom pattern"
                       % sym.name)

    walk(axiom.term)


# ----------------------------------------------------------------------
# interpreter


class Evaluator:
    """Inductive-semantics interpreter with per-instance memoisation.

    Results are memoised on (state, input id, parameter ids); inputs are
    DAG-shared, so repeated evaluation over enumerated tree families stays
    near-linear.  Instances are confined to one thread.
    """

    def __init__(self, store, mtt):
        self.store = store
        self.mtt = mtt
        self._memo = {}

    def state(self, q, t, params):
        params = tuple(params)
        key = (q, t, params)
        r = self._memo.get(key)
        if r is not None:
            return r
        store = self.store
        rule = self.mtt.rule(q, store.sym(t))
        if rule is None:
            raise DomainError(q, store.sym(t), t)
        r = self._rhs(rule.rhs, store.kids(t), params)
        self._memo[key] = r
        return r

    def _rhs(self, r, children, params):
        store = self.store
        sym = store.sym(r)
        if sym.kind is Kind.VAR:
            return params[sym.index - 1]
        if sym.kind is Kind.STATE:
            kids = store.kids(r)
            child = children[store.sym(kids[0]).index - 1]
            args = tuple(self._rhs(a, children, params) for a in kids[1:])
            return self.state(sym, child, args)
        if not store.kids(r):
            return r
        return store.intern(sym, tuple(self._rhs(c, children, params)
                                       for c in store.kids(r)))

    def axiom(self, axiom, t):
        # Axiom calls reference x1 only, so the child vector is just (t,).
        return self._rhs(axiom.term, (t,), ())


def evaluate_state(store, m, q, t, params):
    return Evaluator(store, m).state(q, t, params)


def evaluate_axiom(store, m, a, t):
    return Evaluator(store, m).axiom(a, t)


# ----------------------------------------------------------------------
# automaton analysis


def dta_analyze(store, d):
    """Prune unproductive states and attach minimal witnesses.

    Raises EmptyDomainError when the initial state accepts nothing.
    """
    depths = {}
    changed = True
    while changed:
        changed = False
        for (b, f), succ in d.trans.items():
            if all(c in depths for c in succ):
                h = 0 if not succ else 1 + max(depths[c] for c in succ)
                if h < depths.get(b, h + 1):
                    depths[b] = h
                    changed = True
    if d.init not in depths:
        raise EmptyDomainError(
            "automaton state %s accepts no tree" % d.init)

    witnesses = {}
    for b in sorted(depths, key=lambda b: depths[b]):
        best = None
        for (b2, f), succ in d.trans.items():
            if b2 != b or any(c not in depths for c in succ):
                continue
            h = 0 if not succ else 1 + max(depths[c] for c in succ)
            if h != depths[b]:
                continue
            tree = store.intern(f, tuple(witnesses[c] for c in succ))
            key = store.preorder_names(tree)
            if best is None or key < best[0]:
                best = (key, tree)
        witnesses[b] = best[1]

    states = tuple(b for b in d.states if b in depths)
    trans = {k: v for k, v in d.trans.items()
             if k[0] in depths and all(c in depths for c in v)}
    return Dta(states=states, init=d.init, trans=trans,
               witnesses=witnesses, witness_depths=depths)


# ----------------------------------------------------------------------
# aligning transducer states with automaton states


def rhs_decompose(store, rhs):
    """Output pattern of a right-hand side plus its leaves, left to right.

    Leaves are either parameter variables or whole call nodes.
    """
    return store.prefix_decompose(rhs)


def product_annotate(store, m, axiom, d, mode="total"):
    """Specialise states to the automaton states they can meet.

    States of the result are reachable (state, automaton-state) pairs with
    rules restricted to defined transitions; the returned map sends each
    new state to its automaton state.  Semantics on the accepted language
    is unchanged.
    """
    if not d.analyzed:
        d = dta_analyze(store, d)
    pat, calls = Axiom(axiom.term).decompose(store)
    roots = []
    for c in calls:
        roots.append((store.sym(c), d.init))

    # First pass: discover reachable pairs.
    pairs = []
    seen = set()
    queue = list(roots)
    missing = []
    while queue:
        q, b = queue.pop(0)
        if (q, b) in seen:
            continue
        seen.add((q, b))
        pairs.append((q, b))
        for f in m.sigma:
            if (b, f) not in d.trans:
                continue
            rule = m.rule(q, f)
            if rule is None:
                missing.append(
                    "state %s has no rule for %s, required by automaton "
                    "state %s" % (q.name, f.name, b))
                continue
            succ = d.trans[(b, f)]
            for ct in _calls_of(store, rule.rhs):
                callee = store.sym(ct)
                i = store.sym(store.kids(ct)[0]).index
                queue.append((callee, succ[i - 1]))
    if missing and mode == "total":
        raise ValidationError(sorted(set(missing)))

    multi = {}
    for q, b in pairs:
        multi[q] = multi.get(q, 0) + 1
    symmap = {}
    used = set(m.states)
    for q, b in pairs:
        if multi[q] == 1:
            # A state met by a single automaton state keeps its name.
            symmap[(q, b)] = q
        else:
            symmap[(q, b)] = fresh_state(store, "%s@%s" % (q.name, b),
                                         q.rank, used)

    def rewrite(t, succ):
        sym = store.sym(t)
        if sym.kind is Kind.STATE:
            kids = store.kids(t)
            i = store.sym(kids[0]).index
            new = symmap[(sym, succ[i - 1])]
            return store.intern(new, kids)
        if not store.kids(t):
            return t
        return store.intern(sym, tuple(rewrite(c, succ) for c in store.kids(t)))

    rules = []
    pi = {}
    sigma_order = sorted(m.sigma, key=lambda s: s.name)
    for q, b in pairs:
        pi[symmap[(q, b)]] = b
        for f in sigma_order:
            if (b, f) not in d.trans:
                continue
            rule = m.rule(q, f)
            if rule is None:
                continue
            succ = d.trans[(b, f)]
            rules.append(Rule(symmap[(q, b)], f, rule.formals,
                              rewrite(rule.rhs, succ)))

    new_axiom = Axiom(rewrite(axiom.term, (d.init,)))
    new_m = Mtt(sigma=m.sigma, delta_out=m.delta_out, delta_in=m.delta_in,
                param_count=m.param_count,
                states=tuple(symmap[p] for p in pairs),
                rules=tuple(rules))
    return new_m, new_axiom, pi


def fresh_state(store, name, rank, used):
    """A state symbol with the given name, uniquified against `used`.

    Reusing an interned symbol is fine as long as it does not collide with
    a state of the transducer being rebuilt; symbols shared across
    transducers in one store are intentional (they let a transducer be
    compared with itself).
    """
    base, k = name, 1
    while True:
        existing = store.lookup(base, Kind.STATE)
        if existing is not None and (existing in used or existing.rank != rank):
            k += 1
            base = "%s~%d" % (name, k)
            continue
        sym = store.symbol(base, rank, Kind.STATE)
        used.add(sym)
        return sym


def _calls_of(store, t):
    """All call nodes in a right-hand side or axiom term."""
    out = []

    def walk(tt):
        sym = store.sym(tt)
        if sym.kind is Kind.STATE:
            out.append(tt)
            return
        for c in store.kids(tt):
            walk(c)

    walk(t)
    return out
