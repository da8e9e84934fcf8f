"""Conjunctions of syntactic tree equalities in canonical solved form.

A satisfiable conjunction is kept as an idempotent substitution: a map from
variables to terms in which no bound variable occurs on any right-hand
side, no binding is trivial, and variable-to-variable bindings send the
larger variable (in the fixed order z < y1 < ... < y'1 < ...) to the
smaller.  Two conjunctions are logically equivalent iff their canonical
forms are identical, which keeps the equivalence test purely syntactic.

The unsatisfiable conjunction is the distinguished value FALSE; an occurs
check failure also yields FALSE, since solutions range over finite trees.
All terms live in a shared TermStore, so the solved forms of chained
equations stay polynomial-sized even when the unfolded trees would not.
"""

from dataclasses import dataclass

from .terms import Kind


def var_key(sym):
    """Total order on equation variables: z, then y_j, then y'_j."""
    if sym.index == 0 and not sym.primed:
        return (0, 0)
    return (2 if sym.primed else 1, sym.index)


@dataclass(frozen=True)
class Conjunction:
    """Canonical reduced conjunction; bindings is None when unsatisfiable."""

    bindings: tuple  # ((Symbol, term id), ...) sorted by var_key, or None

    @property
    def is_false(self):
        return self.bindings is None

    @property
    def is_true(self):
        return self.bindings == ()


TRUE = Conjunction(())
FALSE = Conjunction(None)


def _walk(store, t, subst):
    while True:
        sym = store.sym(t)
        if sym.kind is Kind.VAR and sym in subst:
            t = subst[sym]
        else:
            return t


def _occurs(store, v, t, subst):
    seen = set()
    stack = [t]
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        seen.add(cur)
        sym = store.sym(cur)
        if sym.kind is Kind.VAR:
            if sym is v:
                return True
            if sym in subst:
                stack.append(subst[sym])
        else:
            stack.extend(store.kids(cur))
    return False


def reduce(store, eqs):
    """Most general unifier of the given (term, term) equations.

    Returns the canonical Conjunction, or FALSE on a constructor clash or
    an occurs-check failure.
    """
    subst = {}
    stack = list(eqs)
    seen = set()
    while stack:
        s, t = stack.pop()
        s = _walk(store, s, subst)
        t = _walk(store, t, subst)
        if s == t:
            continue
        ssym, tsym = store.sym(s), store.sym(t)
        svar, tvar = ssym.kind is Kind.VAR, tsym.kind is Kind.VAR
        if svar and tvar:
            if var_key(ssym) < var_key(tsym):
                subst[tsym] = s
            else:
                subst[ssym] = t
        elif svar or tvar:
            v, tm = (ssym, t) if svar else (tsym, s)
            if _occurs(store, v, tm, subst):
                return FALSE
            subst[v] = tm
        else:
            if ssym is not tsym:
                return FALSE
            if (s, t) in seen:
                continue
            seen.add((s, t))
            stack.extend(zip(store.kids(s), store.kids(t)))

    # Resolve bindings into an idempotent map.
    memo = {}

    def resolve(t):
        r = memo.get(t)
        if r is not None:
            return r
        sym = store.sym(t)
        if sym.kind is Kind.VAR and sym in subst:
            r = resolve(subst[sym])
        elif store.kids(t):
            ks = tuple(resolve(c) for c in store.kids(t))
            r = store.intern(sym, ks) if ks != store.kids(t) else t
        else:
            r = t
        memo[t] = r
        return r

    out = {v: resolve(t) for v, t in subst.items()}
    return Conjunction(tuple(sorted(out.items(), key=lambda it: var_key(it[0]))))


def conj_and(store, a, b):
    """Conjunction of two canonical conjunctions, re-reduced."""
    if a.is_false or b.is_false:
        return FALSE
    if a.is_true:
        return b
    if b.is_true:
        return a
    eqs = [(store.intern(v), t) for v, t in a.bindings]
    eqs += [(store.intern(v), t) for v, t in b.bindings]
    return reduce(store, eqs)


def subst(store, c, assignment):
    """Apply a simultaneous {Symbol: term id} assignment and re-reduce."""
    if c.is_false:
        return FALSE
    if not assignment:
        return c
    eqs = []
    for v, t in c.bindings:
        lhs = assignment.get(v, store.intern(v))
        eqs.append((lhs, store.term_subst(t, assignment)))
    return reduce(store, eqs)


def conj_equiv(a, b):
    """Logical equivalence; canonical forms make this a syntactic check."""
    return a == b


def conj_implies(store, a, b):
    """a implies b; FALSE implies everything."""
    if a.is_false:
        return True
    return conj_and(store, a, b) == a


def eval_ground(store, c, assignment):
    """Truth value of c under a total ground assignment.

    Every variable of c must be covered; each binding must become an
    identity of ground terms.
    """
    if c.is_false:
        return False
    for v, t in c.bindings:
        if v not in assignment:
            raise ValueError("assignment does not cover variable %s" % v.name)
        lhs = assignment[v]
        rhs = store.term_subst(t, assignment)
        for w in store.var_set(rhs):
            raise ValueError("assignment does not cover variable %s" % w.name)
        if lhs != rhs:
            return False
    return True


def prime(store, tid):
    """Replace each unprimed variable y_j by its primed copy y'_j."""
    mapping = {}
    for v in store.var_set(tid):
        if not v.primed and v.index > 0:
            mapping[v] = store.intern(store.yvar(v.index, primed=True))
    return store.term_subst(tid, mapping)


def render(store, c):
    """Human-readable form, e.g. "y1 = h(b) & y2 = b"."""
    if c.is_false:
        return "false"
    if c.is_true:
        return "true"
    return " & ".join("%s = %s" % (v.name, store.to_text(t)) for v, t in c.bindings)


def to_json(store, c):
    """Structured form for machine output."""
    if c.is_false:
        return False
    return [{"var": v.name, "term": store.to_text(t)} for v, t in c.bindings]
