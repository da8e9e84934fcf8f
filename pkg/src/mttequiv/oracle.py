"""Brute-force ground truth by bounded input enumeration.

Trees are enumerated height-major (a single leaf has height 1) and, within
one height level, in the deterministic structural order given by comparing
root symbol names first and then the child subtrees left to right.  Levels
are produced lazily, so a tight tree-count budget never forces a huge
level to be materialised.
"""

from dataclasses import dataclass

from .errors import DomainError
from .model import Evaluator, trivial_dta


@dataclass(frozen=True)
class EnumBudget:
    max_height: int
    max_count: int = 1_000_000


@dataclass(frozen=True)
class OracleResult:
    agree: bool
    counterexample: int = None   # term id, when agree is False
    checked: int = 0


class _Enumerator:
    """Caches per-(automaton state, height) tree levels for one alphabet."""

    def __init__(self, store, sigma, d):
        self.store = store
        self.d = d
        self.sigma = sorted(sigma, key=lambda s: s.name)
        self._upto = {}   # (state, height) -> list of (order key, tid)

    def _key(self, tid):
        # Recursive structural order: root name, then children.
        store = self.store
        return (store.sym(tid).name,
                tuple(self._key(c) for c in store.kids(tid)))

    def upto(self, b, h):
        """Materialised, ordered trees of height <= h accepted from b."""
        got = self._upto.get((b, h))
        if got is None:
            if h <= 0:
                got = []
            else:
                got = list(self._upto_iter_level(b, h, self.upto(b, h - 1)))
            self._upto[(b, h)] = got
        return got

    def _upto_iter_level(self, b, h, smaller):
        out = list(smaller)
        out.extend(self.level(b, h))
        return out

    def level(self, b, h):
        """Lazily yield (key, tid) for trees of height exactly h."""
        store = self.store
        if h == 1:
            for f in self.sigma:
                if f.rank == 0 and (b, f) in self.d.trans:
                    t = store.intern(f)
                    yield (self._key(t), t)
            return
        for f in self.sigma:
            if f.rank == 0 or (b, f) not in self.d.trans:
                continue
            succ = self.d.trans[(b, f)]
            cands = [self.upto(c, h - 1) for c in succ]
            if any(not c for c in cands):
                continue
            for combo in self._product(cands):
                kids = tuple(t for _, t in combo)
                if max(store.depth(k) for k in kids) != h - 2:
                    continue
                t = store.intern(f, kids)
                yield ((f.name, tuple(k for k, _ in combo)), t)

    @staticmethod
    def _product(cands):
        # itertools.product materialises nothing extra, but keep the
        # odometer explicit so candidate lists are shared, not copied.
        import itertools
        return itertools.product(*cands)


def enumerate_inputs(store, sigma, d=None, b=None, budget=None):
    """Ordered trees of height <= budget.max_height accepted from b.

    Without an automaton, all trees over sigma are produced.  Enumeration
    stops at whichever budget bound hits first.
    """
    if budget is None:
        budget = EnumBudget(max_height=3)
    if d is None:
        d = trivial_dta(sigma)
        b = d.init
    elif b is None:
        raise ValueError("an automaton state is required with an automaton")
    enum = _Enumerator(store, sigma, d)
    count = 0
    for h in range(1, budget.max_height + 1):
        for _, t in enum.level(b, h):
            if count >= budget.max_count:
                return
            count += 1
            yield t


def oracle_decide(store, left, right, d=None, budget=None):
    """First enumerated input on which the two pairs disagree, if any."""
    (m1, a1), (m2, a2) = left, right
    ev1, ev2 = Evaluator(store, m1), Evaluator(store, m2)
    b = d.init if d is not None else None
    checked = 0
    for t in enumerate_inputs(store, m1.sigma, d, b, budget):
        checked += 1
        if ev1.axiom(a1, t) != ev2.axiom(a2, t):
            return OracleResult(agree=False, counterexample=t, checked=checked)
    return OracleResult(agree=True, checked=checked)


def oracle_state_equiv(store, left, right, d, b, budget):
    """Do two states agree, with fixed ground parameters, on dom(b)?"""
    (m1, q1, params1), (m2, q2, params2) = left, right
    ev1, ev2 = Evaluator(store, m1), Evaluator(store, m2)
    for t in enumerate_inputs(store, m1.sigma, d, b, budget):
        if ev1.state(q1, t, params1) != ev2.state(q2, t, params2):
            return False
    return True


def oracle_partial_equiv(store, left, right, budget):
    """Equality of two partial transductions up to the budget.

    Two pairs agree on a tree when both are undefined on it or both are
    defined with identical outputs.
    """
    (m1, a1), (m2, a2) = left, right
    ev1, ev2 = Evaluator(store, m1), Evaluator(store, m2)
    for t in enumerate_inputs(store, m1.sigma, None, None, budget):
        try:
            o1 = ev1.axiom(a1, t)
        except DomainError:
            o1 = None
        try:
            o2 = ev2.axiom(a2, t)
        except DomainError:
            o2 = None
        if o1 != o2:
            return OracleResult(agree=False, counterexample=t)
    return OracleResult(agree=True)
