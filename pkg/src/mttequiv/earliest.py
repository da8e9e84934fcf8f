"""Output-prefix computation and the earliest-form transformation.

A state's output prefix is the longest pattern common to all of its
outputs over the accepted inputs.  It is the least solution of one
in-equation per rule, computed by ascending join-iteration from the
concrete output on the state's minimal witness input (the initial value is
a lower bound of the solution, and each strict join step generalises at
least one subtree, which bounds the number of passes by the size of the
initialisation trees).

The earliest form splits every state into one state per hole of its
prefix, pushing shared output upward into callers and the axiom, so that
every state of the result has the trivial prefix.
"""

from dataclasses import dataclass

from .errors import InternalInvariantError
from .model import Axiom, Evaluator, Mtt, Rule, fresh_state, rhs_decompose
from .terms import Kind


@dataclass(frozen=True)
class PrefixTable:
    prefixes: dict   # state Symbol -> pattern id
    passes: int      # full sweeps executed, including the confirming one
    init_size: int   # total node count of the initialisation trees


def _call_graph_postorder(store, m):
    """States with callees before callers (cycles broken arbitrarily)."""
    callees = {}
    for r in m.rules:
        acc = callees.setdefault(r.state, set())
        stack = [r.rhs]
        while stack:
            t = stack.pop()
            sym = store.sym(t)
            if sym.kind is Kind.STATE:
                acc.add(sym)
            else:
                stack.extend(store.kids(t))
    order = []
    seen = set()

    def visit(q):
        if q in seen:
            return
        seen.add(q)
        for c in sorted(callees.get(q, ()), key=lambda s: s.name):
            visit(c)
        order.append(q)

    for q in m.states:
        visit(q)
    return order


def compute_prefixes(store, m, pi, d):
    """Least output prefixes of all states, relative to the automaton.

    Requires m total relative to d (every state has a rule for each defined
    transition of its automaton state) and d analyzed.
    """
    ev = Evaluator(store, m)
    placeholders = tuple(store.intern(store.param_const(j))
                         for j in range(1, m.param_count + 1))
    table = {}
    init_size = 0
    for q in m.states:
        witness = d.witnesses[pi[q]]
        out = ev.state(q, witness, placeholders)
        pat, _ = store.prefix_decompose(out)
        table[q] = pat
        init_size += len(store.preorder_names(pat))

    decomposed = [(r.state, rhs_decompose(store, r.rhs)) for r in m.rules]
    order = _call_graph_postorder(store, m)
    rules_by_state = {}
    for q, (pat, leaves) in decomposed:
        rules_by_state.setdefault(q, []).append((pat, leaves))

    passes = 0
    while True:
        passes += 1
        changed = False
        for q in order:
            for pat, leaves in rules_by_state.get(q, ()):
                fills = []
                for leaf in leaves:
                    sym = store.sym(leaf)
                    if sym.kind is Kind.STATE:
                        fills.append(table[sym])
                    else:
                        fills.append(store.top)
                cand = store.pattern_substitute(pat, fills)
                new = store.pattern_join(table[q], cand)
                if new != table[q]:
                    table[q] = new
                    changed = True
        if not changed:
            break
    return PrefixTable(prefixes=table, passes=passes, init_size=init_size)


def _hole_name(path):
    return ".".join(str(i) for i in path) if path else "ε"


def earliest_transform(store, m, axiom, pi, d, table=None):
    """Equivalent transducer in which every state has the trivial prefix.

    Each original state q yields one new state per hole of its prefix; a
    call to q is replaced by the prefix of q filled with calls to the new
    states, and each rule is re-split against the caller's prefix.  States
    whose rules all return the same bare parameter are inlined at call
    sites that pass a plain variable there, and unreachable states are
    pruned.
    """
    if table is None:
        table = compute_prefixes(store, m, pi, d)
    pref = table.prefixes

    holes = {q: store.top_positions(pref[q]) for q in m.states}
    newsym = {}
    used = set(m.states)
    for q in m.states:
        for v in holes[q]:
            newsym[(q, v)] = fresh_state(
                store, "%s@%s" % (q.name, _hole_name(v)), q.rank, used)

    def expand(t):
        sym = store.sym(t)
        if sym.kind is Kind.STATE:
            kids = store.kids(t)
            fills = [store.intern(newsym[(sym, v)], kids) for v in holes[sym]]
            return store.pattern_substitute(pref[sym], fills)
        if not store.kids(t):
            return t
        return store.intern(sym, tuple(expand(c) for c in store.kids(t)))

    rules = []
    for r in m.rules:
        expanded = expand(r.rhs)
        try:
            residuals = store.match_residuals(pref[r.state], expanded)
        except InternalInvariantError:
            raise InternalInvariantError(
                "rule %s does not extend the computed prefix of %s; "
                "prefix table is inconsistent" % (r.where(), r.state.name))
        for v, s in zip(holes[r.state], residuals):
            rules.append(Rule(newsym[(r.state, v)], r.insym, r.formals, s))

    new_axiom = Axiom(expand(axiom.term))
    new_pi = {newsym[(q, v)]: pi[q] for q in m.states for v in holes[q]}
    states = tuple(newsym[(q, v)] for q in m.states for v in holes[q])

    states, rules, new_axiom = _inline_identity_states(
        store, states, rules, new_axiom)
    states, rules, new_pi = _prune_unreachable(
        store, states, rules, new_axiom, new_pi)

    new_m = Mtt(sigma=m.sigma, delta_out=m.delta_out, delta_in=m.delta_in,
                param_count=m.param_count, states=states, rules=tuple(rules))
    return new_m, new_axiom, new_pi


def _inline_identity_states(store, states, rules, axiom):
    """Inline states whose every rule returns the same bare parameter.

    A call to such a state always evaluates to its j-th argument, so call
    sites passing a plain variable there can use the variable directly.
    Sites passing a composite value keep the call (inlining it would put
    parameter-alphabet symbols at output positions).
    """
    while True:
        returns = {}
        for r in rules:
            sym = store.sym(r.rhs)
            j = sym.index if sym.kind is Kind.VAR else None
            prev = returns.get(r.state, j)
            returns[r.state] = j if prev == j else None
        identity = {q: j for q, j in returns.items() if j is not None}
        if not identity:
            return states, rules, axiom

        changed = False

        def rewrite(t):
            nonlocal changed
            sym = store.sym(t)
            if sym.kind is Kind.STATE and sym in identity:
                arg = store.kids(t)[identity[sym]]
                if store.sym(arg).kind is Kind.VAR:
                    changed = True
                    return arg
                return t
            if not store.kids(t):
                return t
            return store.intern(sym, tuple(rewrite(c) for c in store.kids(t)))

        rules = [Rule(r.state, r.insym, r.formals, rewrite(r.rhs), r.line)
                 for r in rules]
        axiom = Axiom(rewrite(axiom.term))
        if not changed:
            return states, rules, axiom


def _prune_unreachable(store, states, rules, axiom, pi):
    by_state = {}
    for r in rules:
        by_state.setdefault(r.state, []).append(r)

    def callees(t, acc):
        sym = store.sym(t)
        if sym.kind is Kind.STATE:
            acc.add(sym)
        for c in store.kids(t):
            callees(c, acc)

    reachable = set()
    frontier = set()
    callees(axiom.term, frontier)
    while frontier:
        q = frontier.pop()
        if q in reachable:
            continue
        reachable.add(q)
        for r in by_state.get(q, ()):
            nxt = set()
            callees(r.rhs, nxt)
            frontier |= nxt - reachable

    states = tuple(q for q in states if q in reachable)
    rules = [r for r in rules if r.state in reachable]
    pi = {q: b for q, b in pi.items() if q in reachable}
    return states, rules, pi
