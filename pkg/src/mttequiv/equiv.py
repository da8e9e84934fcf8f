"""The equivalence decision procedure for earliest-form transducers.

For every state q (with automaton state b) a conjunction describes when
q's output equals one fixed tree on all accepted inputs of bounded height;
for every state pair (q, q') a conjunction over the two parameter-variable
families describes when their outputs agree.  The families descend
monotonically with the height bound and stabilise after polynomially many
rounds; the verdict instantiates the stabilised pair conjunctions with the
ground parameter vectors of the two axioms.

A transition contributes its clauses from the round at which every child
automaton state has an accepted tree within the height bound; before that
round the corresponding inputs do not exist, so the clause would
over-constrain.  Rank-0 transitions are live from round 0, which
reproduces the base case exactly.
"""

from dataclasses import dataclass, field

from . import herbrand
from .earliest import compute_prefixes, earliest_transform
from .errors import InternalInvariantError, ValidationError
from .herbrand import FALSE, TRUE, conj_and, conj_equiv, eval_ground, subst
from .model import Evaluator, dta_analyze, product_annotate, trivial_dta, validate
from .oracle import EnumBudget, oracle_decide
from .terms import Kind


@dataclass
class PsiTable:
    entries: dict      # state Symbol -> Conjunction
    rounds: int        # last round at which any entry changed


@dataclass
class PhiTable:
    entries: dict      # (Symbol, Symbol) -> Conjunction
    rounds: int


@dataclass(frozen=True)
class Verdict:
    equivalent: bool
    reason: str = None
    counterexample: int = None    # term id or None
    psi_rounds: int = 0
    phi_rounds: int = 0
    explain: dict = None

    @property
    def kind(self):
        return "equivalent" if self.equivalent else "inequivalent"


class _Side:
    """Per-transducer tables shared across fixpoint rounds."""

    def __init__(self, store, m, pi, d, primed):
        self.store = store
        self.m = m
        self.pi = pi
        self.primed = primed
        self.rules = {}      # state -> [(insym, succ, need_h, pattern, leaves)]
        for q in m.states:
            entries = []
            b = pi[q]
            for f in sorted(m.sigma, key=lambda s: s.name):
                r = m.rule(q, f)
                if r is None or (b, f) not in d.trans:
                    continue
                succ = d.trans[(b, f)]
                need_h = 0 if not succ else 1 + max(
                    d.witness_depths[c] for c in succ)
                pat, leaves = store.prefix_decompose(r.rhs)
                entries.append((f, succ, need_h, pat, leaves))
            self.rules[q] = entries

    def var(self, j):
        return self.store.yvar(j, primed=self.primed)

    def var_node(self, j):
        return self.store.intern(self.var(j))

    def arg_term(self, t):
        """Parameter argument as an equation term (primed copy if needed)."""
        return herbrand.prime(self.store, t) if self.primed else t

    def leaf(self, t):
        """Classify a decomposed leaf: ('param', j) or ('call', q, i, args)."""
        sym = self.store.sym(t)
        if sym.kind is Kind.VAR:
            return ("param", sym.index)
        kids = self.store.kids(t)
        return ("call", sym, self.store.sym(kids[0]).index, kids[1:])


def witness_outputs(store, m, pi, d, keys=None):
    """Output of each state on its automaton state's minimal witness,
    with formal parameters frozen as opaque constants."""
    ev = Evaluator(store, m)
    placeholders = tuple(store.intern(store.param_const(j))
                         for j in range(1, m.param_count + 1))
    out = {}
    for q in (keys if keys is not None else m.states):
        out[q] = ev.state(q, d.witnesses[pi[q]], placeholders)
    return out


def psi_step(store, side, keys, prev, h):
    """One round of the constant-output conjunctions.

    prev is the table at round h-1 (ignored at h = 0, where recursive
    conjuncts contribute the empty conjunction).
    """
    z = store.intern(store.zvar())
    out = {}
    for q in keys:
        c = TRUE
        for f, succ, need_h, pat, leaves in side.rules[q]:
            if h < need_h:
                continue
            if not store.is_top(pat):
                c = FALSE
                break
            kind = side.leaf(leaves[0])
            if kind[0] == "param":
                c = conj_and(store, c, herbrand.reduce(
                    store, [(z, side.var_node(kind[1]))]))
            else:
                if h == 0:
                    continue
                _, callee, _, args = kind
                asg = {side.var(j + 1): side.arg_term(a)
                       for j, a in enumerate(args)}
                c = conj_and(store, c, subst(store, prev[callee], asg))
            if c.is_false:
                break
        out[q] = c
    return out


def phi_step(store, sideL, sideR, keys, prev_phi, psiL, psiR, swit, h):
    """One round of the pairwise-agreement conjunctions.

    psiL/psiR are the per-side constant-output tables at round h-1; swit
    maps left callee states to their frozen witness outputs, used when the
    two rules recurse into different children.
    """
    out = {}
    rmapR = {}
    for q, entries in sideR.rules.items():
        for e in entries:
            rmapR[(q, e[0])] = e
    for q, q2 in keys:
        c = TRUE
        for f, succ, need_h, patL, leavesL in sideL.rules[q]:
            if h < need_h:
                continue
            _, _, _, patR, leavesR = rmapR[(q2, f)]
            if patL != patR:
                c = FALSE
                break
            for tl, tr in zip(leavesL, leavesR):
                kl, kr = sideL.leaf(tl), sideR.leaf(tr)
                if kl[0] == "param" and kr[0] == "param":
                    c = conj_and(store, c, herbrand.reduce(
                        store,
                        [(sideL.var_node(kl[1]), sideR.var_node(kr[1]))]))
                elif h == 0:
                    continue
                elif kl[0] == "param":
                    _, callee, _, args = kr
                    asg = {sideR.var(j + 1): sideR.arg_term(a)
                           for j, a in enumerate(args)}
                    asg[store.zvar()] = sideL.var_node(kl[1])
                    c = conj_and(store, c, subst(store, psiR[callee], asg))
                elif kr[0] == "param":
                    _, callee, _, args = kl
                    asg = {sideL.var(j + 1): sideL.arg_term(a)
                           for j, a in enumerate(args)}
                    asg[store.zvar()] = sideR.var_node(kr[1])
                    c = conj_and(store, c, subst(store, psiL[callee], asg))
                else:
                    _, calleeL, iL, argsL = kl
                    _, calleeR, iR, argsR = kr
                    asgL = {sideL.var(j + 1): sideL.arg_term(a)
                            for j, a in enumerate(argsL)}
                    asgR = {sideR.var(j + 1): sideR.arg_term(a)
                            for j, a in enumerate(argsR)}
                    if iL == iR:
                        both = dict(asgL)
                        both.update(asgR)
                        c = conj_and(store, c,
                                     subst(store, prev_phi[(calleeL, calleeR)], both))
                    else:
                        # Both outputs must equal the same fixed tree: the
                        # left callee's witness output under its arguments.
                        shat = store.term_subst(
                            swit[calleeL],
                            {store.param_const(j + 1): a
                             for j, a in enumerate(argsL)})
                        asgL2 = dict(asgL)
                        asgL2[store.zvar()] = shat
                        asgR2 = dict(asgR)
                        asgR2[store.zvar()] = shat
                        c = conj_and(store, c, subst(store, psiL[calleeL], asgL2))
                        c = conj_and(store, c, subst(store, psiR[calleeR], asgR2))
                if c.is_false:
                    break
            if c.is_false:
                break
        out[(q, q2)] = c
    return out


def _closure(store, sideL, sideR, root_pairs, full):
    """Keys demanded by the axiom comparison (or everything, for tests)."""
    if full:
        phi_keys = [(q, q2) for q in sideL.m.states for q2 in sideR.m.states
                    if sideL.pi[q] == sideR.pi[q2]]
        psiL = list(sideL.m.states)
        psiR = list(sideR.m.states)
        s_keys = set(sideL.m.states)
        return phi_keys, psiL, psiR, s_keys

    phi_keys, psiL, psiR, s_keys = [], [], [], set()
    phi_seen = set()
    queue = list(root_pairs)
    psiL_seen, psiR_seen = set(), set()

    def need_psi(side, q, seen, order):
        stack = [q]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            order.append(cur)
            for _, _, _, _, leaves in side.rules[cur]:
                for leaf in leaves:
                    k = side.leaf(leaf)
                    if k[0] == "call":
                        stack.append(k[1])

    rmapR = {}
    for q, entries in sideR.rules.items():
        for e in entries:
            rmapR[(q, e[0])] = e
    while queue:
        q, q2 = queue.pop(0)
        if (q, q2) in phi_seen:
            continue
        phi_seen.add((q, q2))
        phi_keys.append((q, q2))
        for f, succ, need_h, patL, leavesL in sideL.rules[q]:
            entry = rmapR.get((q2, f))
            if entry is None:
                raise InternalInvariantError(
                    "rule for %s missing on the right side" % f.name)
            _, _, _, patR, leavesR = entry
            if patL != patR:
                continue
            for tl, tr in zip(leavesL, leavesR):
                kl, kr = sideL.leaf(tl), sideR.leaf(tr)
                if kl[0] == "param" and kr[0] == "call":
                    need_psi(sideR, kr[1], psiR_seen, psiR)
                elif kl[0] == "call" and kr[0] == "param":
                    need_psi(sideL, kl[1], psiL_seen, psiL)
                elif kl[0] == "call" and kr[0] == "call":
                    if kl[2] == kr[2]:
                        queue.append((kl[1], kr[1]))
                    else:
                        s_keys.add(kl[1])
                        need_psi(sideL, kl[1], psiL_seen, psiL)
                        need_psi(sideR, kr[1], psiR_seen, psiR)
    return phi_keys, psiL, psiR, s_keys


def stabilize(store, mL, mR, piL, piR, d, root_pairs, full=False,
              max_rounds=None, history=False):
    """Iterate the conjunction families jointly until a full round changes
    nothing; raises when the polynomial round bound is exceeded."""
    sideL = _Side(store, mL, piL, d, primed=False)
    sideR = _Side(store, mR, piR, d, primed=True)
    phi_keys, psiL_keys, psiR_keys, s_keys = _closure(
        store, sideL, sideR, root_pairs, full)
    # Witness outputs for the left callees compared across different
    # children; computed once, reachability keeps this small.
    swit = witness_outputs(store, mL, piL, d,
                           keys=sorted(s_keys, key=lambda s: s.name))

    w = max(d.witness_depths.values()) if d.witness_depths else 0
    n = max(len(mL.states), len(mR.states), 1)
    l = max(mL.param_count, mR.param_count)
    bound = n * n * (2 * l + 1) + w + 1
    if max_rounds is not None:
        bound = max_rounds

    psiL = psi_step(store, sideL, psiL_keys, None, 0)
    psiR = psi_step(store, sideR, psiR_keys, None, 0)
    phi = phi_step(store, sideL, sideR, phi_keys, None, psiL, psiR, swit, 0)
    hist = [(psiL, psiR, phi)]
    psi_change, phi_change = 0, 0
    h = 0
    while True:
        if max_rounds is not None and h >= max_rounds:
            break
        h += 1
        if h > bound:
            raise InternalInvariantError(
                "conjunction tables failed to stabilise within %d rounds" % bound)
        npsiL = psi_step(store, sideL, psiL_keys, psiL, h)
        npsiR = psi_step(store, sideR, psiR_keys, psiR, h)
        nphi = phi_step(store, sideL, sideR, phi_keys, phi, psiL, psiR, swit, h)
        if history:
            hist.append((npsiL, npsiR, nphi))
        psi_same = npsiL == psiL and npsiR == psiR
        phi_same = nphi == phi
        if not psi_same:
            psi_change = h
        if not phi_same:
            phi_change = h
        psiL, psiR, phi = npsiL, npsiR, nphi
        if max_rounds is None and psi_same and phi_same and h >= w + 1:
            break

    tL = PsiTable(entries=psiL, rounds=psi_change)
    tR = PsiTable(entries=psiR, rounds=psi_change)
    tP = PhiTable(entries=phi, rounds=phi_change)
    if history:
        return tL, tR, tP, hist
    return tL, tR, tP


def decide(store, left, right, d=None, *, cex_budget=None, explain=False,
           full_tables=False):
    """Equivalence verdict for two transducer/axiom pairs relative to an
    automaton (the all-accepting one when omitted).

    Pipeline: align states with the automaton, transform both pairs to
    earliest form, compare axiom patterns, stabilise the conjunction
    tables, then check each aligned axiom call pair under its ground
    parameters.  On failure a bounded enumeration tries to attach a
    concrete counterexample; the symbolic reason stands on its own.
    """
    (m1, a1), (m2, a2) = left, right
    validate(store, m1, mode="partial", axiom=a1).raise_if_failed()
    validate(store, m2, mode="partial", axiom=a2).raise_if_failed()
    if set(m1.sigma) != set(m2.sigma):
        raise ValidationError(["the two transducers use different input alphabets"])
    if d is None:
        d = trivial_dta(m1.sigma)
    if not d.analyzed:
        d = dta_analyze(store, d)
    if cex_budget is None:
        cex_budget = EnumBudget(max_height=6, max_count=20000)

    def cex():
        r = oracle_decide(store, (m1, a1), (m2, a2), d, cex_budget)
        return r.counterexample

    ann1, ax1, pi1 = product_annotate(store, m1, a1, d)
    ann2, ax2, pi2 = product_annotate(store, m2, a2, d)
    e1, eax1, epi1 = earliest_transform(store, ann1, ax1, pi1, d)
    e2, eax2, epi2 = earliest_transform(store, ann2, ax2, pi2, d)

    p1, calls1 = eax1.decompose(store)
    p2, calls2 = eax2.decompose(store)
    if p1 != p2:
        return Verdict(False, reason="axiom output patterns differ",
                       counterexample=cex())
    if len(calls1) != len(calls2):
        return Verdict(False, reason="axiom call counts differ",
                       counterexample=cex())

    pairs = [(store.sym(c1), store.sym(c2)) for c1, c2 in zip(calls1, calls2)]
    tL, tR, tP = stabilize(store, e1, e2, epi1, epi2, d, pairs,
                           full=full_tables)

    info = None
    if explain:
        info = {
            "phi": {"%s ~ %s" % (q.name, q2.name): herbrand.to_json(store, c)
                    for (q, q2), c in tP.entries.items()},
            "psi_left": {q.name: herbrand.to_json(store, c)
                         for q, c in tL.entries.items()},
            "psi_right": {q.name: herbrand.to_json(store, c)
                          for q, c in tR.entries.items()},
        }

    for j, (c1, c2) in enumerate(zip(calls1, calls2)):
        q, q2 = store.sym(c1), store.sym(c2)
        asg = {}
        for k, t in enumerate(store.kids(c1)[1:], start=1):
            asg[store.yvar(k)] = t
        for k, t in enumerate(store.kids(c2)[1:], start=1):
            asg[store.yvar(k, primed=True)] = t
        if not eval_ground(store, tP.entries[(q, q2)], asg):
            return Verdict(
                False,
                reason="parameter conditions fail for axiom call %d "
                       "(%s vs %s)" % (j + 1, q.name, q2.name),
                counterexample=cex(),
                psi_rounds=tL.rounds, phi_rounds=tP.rounds, explain=info)
    return Verdict(True, psi_rounds=tL.rounds, phi_rounds=tP.rounds,
                   explain=info)
