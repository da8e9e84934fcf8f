"""Hash-consed ranked trees and the prefix-pattern lattice.

All trees of one decision-procedure run live in a single TermStore:
structurally identical trees always receive the same integer id, so term
equality is id equality and shared subtrees are stored exactly once.  The
store is append-only; ids are never invalidated, which makes memoisation
across fixpoint iterations safe.

Patterns are trees over the direct-output alphabet plus a hole marker (the
largest element), extended with an artificial least element BOTTOM.  They
form a complete lattice ordered by instantiation: p <= q iff p can be
obtained by filling the holes of q.  The join of two patterns is their
longest common prefix.
"""

from dataclasses import dataclass
from enum import Enum

from .errors import ArityError


class Kind(Enum):
    """Alphabet class of a symbol; names are unique per class."""

    INPUT = "input"    # input-tree alphabet
    OUT = "out"        # output symbols emitted at state-output positions
    INNER = "inner"    # output symbols allowed only inside parameter values
    VAR = "var"        # parameter / equation variables (y_j, y'_j, z)
    XVAR = "xvar"      # input-position variables x_i
    TOP = "top"        # pattern hole marker
    CONST = "const"    # opaque stand-ins for formal parameters
    STATE = "state"    # transducer state, used as the head of a call node


@dataclass(frozen=True)
class Symbol:
    name: str
    rank: int
    kind: Kind
    index: int = 0       # j for y_j / x_i style symbols, 0 otherwise
    primed: bool = False  # primed variable copies (y'_j)

    def __repr__(self):
        return "%s/%d" % (self.name, self.rank)


class _Bottom:
    """The artificial least pattern; lives outside the term store."""

    def __repr__(self):
        return "⊥"


BOTTOM = _Bottom()

# Characters that force quoting when a symbol name is rendered.
_DELIMS = set('(){},;="#[]') | {" ", "\t", "\n", "\r"}


def quote_name(name):
    if name and not any(c in _DELIMS for c in name):
        return name
    return '"%s"' % name.replace('"', '\\"')


class TermStore:
    """Interning store for symbols and trees.

    Safe for concurrent reads once built; interleaved interning needs
    external mutual exclusion.  Higher layers assume one store per run.
    """

    def __init__(self):
        self._symbols = {}        # (kind, name) -> Symbol
        self._sym = []            # id -> Symbol
        self._kids = []           # id -> tuple of child ids
        self._memo = {}           # (Symbol, kids) -> id
        self._depth = []          # id -> depth (leaf = 0)
        # lazily filled caches
        self._tops = {}           # id -> number of hole leaves
        self._decomp = {}         # id -> (pattern id, residual ids)
        self._leq = {}
        self._join = {}
        self._text = {}
        self._vars = {}           # id -> frozenset of VAR symbols occurring in it
        self._top_sym = self.symbol("⊤", 0, Kind.TOP)

    # ------------------------------------------------------------------
    # symbols

    def symbol(self, name, rank, kind, index=0, primed=False):
        """Intern a symbol; name is unique within its kind."""
        key = (kind, name)
        sym = self._symbols.get(key)
        if sym is not None:
            if sym.rank != rank:
                raise ArityError(
                    "symbol %s already declared with rank %d, not %d"
                    % (name, sym.rank, rank))
            return sym
        sym = Symbol(name, rank, kind, index, primed)
        self._symbols[key] = sym
        return sym

    def lookup(self, name, kind):
        return self._symbols.get((kind, name))

    def yvar(self, j, primed=False):
        name = "y'%d" % j if primed else "y%d" % j
        return self.symbol(name, 0, Kind.VAR, index=j, primed=primed)

    def zvar(self):
        return self.symbol("z", 0, Kind.VAR, index=0)

    def xvar(self, i):
        return self.symbol("x%d" % i, 0, Kind.XVAR, index=i)

    def param_const(self, j):
        """Opaque leaf standing for the j-th formal parameter."""
        return self.symbol("ŷ%d" % j, 0, Kind.CONST, index=j)

    @property
    def top_symbol(self):
        return self._top_sym

    # ------------------------------------------------------------------
    # trees

    def intern(self, sym, children=()):
        children = tuple(children)
        if len(children) != sym.rank:
            raise ArityError(
                "symbol %s has rank %d, got %d children"
                % (sym.name, sym.rank, len(children)))
        key = (sym, children)
        tid = self._memo.get(key)
        if tid is not None:
            return tid
        tid = len(self._sym)
        self._sym.append(sym)
        self._kids.append(children)
        self._depth.append(0 if not children else 1 + max(self._depth[c] for c in children))
        self._memo[key] = tid
        return tid

    def sym(self, tid):
        return self._sym[tid]

    def kids(self, tid):
        return self._kids[tid]

    def depth(self, tid):
        """Longest root-to-leaf edge count; a single node has depth 0."""
        return self._depth[tid]

    def __len__(self):
        return len(self._sym)

    @property
    def top(self):
        """The one-node hole pattern."""
        return self.intern(self._top_sym)

    def var_set(self, tid):
        """Set of VAR symbols occurring in the tree."""
        vs = self._vars.get(tid)
        if vs is None:
            sym = self._sym[tid]
            if sym.kind is Kind.VAR:
                vs = frozenset((sym,))
            else:
                vs = frozenset().union(*(self.var_set(c) for c in self._kids[tid])) \
                    if self._kids[tid] else frozenset()
            self._vars[tid] = vs
        return vs

    def term_subst(self, tid, mapping):
        """Replace rank-0 symbol leaves per mapping {Symbol: id}, simultaneously."""
        if not mapping:
            return tid
        memo = {}

        def go(t):
            r = memo.get(t)
            if r is not None:
                return r
            sym = self._sym[t]
            if not self._kids[t]:
                r = mapping.get(sym, t)
            else:
                ks = tuple(go(c) for c in self._kids[t])
                r = self.intern(sym, ks) if ks != self._kids[t] else t
            memo[t] = r
            return r

        return go(tid)

    def find_path(self, root, target):
        """Dewey path of the first preorder occurrence of target under root."""
        if root == target:
            return ()
        for i, c in enumerate(self._kids[root], start=1):
            sub = self.find_path(c, target)
            if sub is not None:
                return (i,) + sub
        return None

    def subtree_at(self, tid, path):
        for i in path:
            tid = self._kids[tid][i - 1]
        return tid

    # ------------------------------------------------------------------
    # patterns

    def is_top(self, p):
        return p is not BOTTOM and self._sym[p].kind is Kind.TOP

    def top_count(self, p):
        n = self._tops.get(p)
        if n is None:
            if self._sym[p].kind is Kind.TOP:
                n = 1
            else:
                n = sum(self.top_count(c) for c in self._kids[p])
            self._tops[p] = n
        return n

    def top_positions(self, p):
        """Dewey paths of the hole leaves, left to right."""
        out = []

        def walk(t, path):
            if self._sym[t].kind is Kind.TOP:
                out.append(path)
                return
            for i, c in enumerate(self._kids[t], start=1):
                walk(c, path + (i,))

        walk(p, ())
        return tuple(out)

    def pattern_leq(self, p, q):
        """p <= q in the instantiation order (q is a prefix of p)."""
        if p is BOTTOM:
            return True
        if q is BOTTOM:
            return False
        key = (p, q)
        r = self._leq.get(key)
        if r is None:
            if self._sym[q].kind is Kind.TOP:
                r = True
            elif self._sym[p].kind is Kind.TOP:
                r = False
            elif self._sym[p] is not self._sym[q]:
                r = False
            else:
                r = all(self.pattern_leq(a, b)
                        for a, b in zip(self._kids[p], self._kids[q]))
            self._leq[key] = r
        return r

    def pattern_join(self, p, q):
        """Least upper bound: the longest common prefix of p and q."""
        if p is BOTTOM:
            return q
        if q is BOTTOM:
            return p
        key = (p, q)
        r = self._join.get(key)
        if r is None:
            if p == q:
                r = p
            elif self._sym[p] is not self._sym[q] \
                    or self._sym[p].kind is Kind.TOP:
                r = self.top
            else:
                r = self.intern(self._sym[p],
                                tuple(self.pattern_join(a, b)
                                      for a, b in zip(self._kids[p], self._kids[q])))
            self._join[key] = r
        return r

    def pattern_substitute(self, p, fills):
        """Replace the i-th hole (left to right) of p by fills[i]."""
        if p is BOTTOM:
            raise ArityError("cannot substitute into the bottom pattern")
        fills = tuple(fills)
        if len(fills) != self.top_count(p):
            raise ArityError(
                "pattern has %d holes, got %d fills" % (self.top_count(p), len(fills)))

        def go(t, offset):
            if self._sym[t].kind is Kind.TOP:
                return fills[offset]
            if self.top_count(t) == 0:
                return t
            ks = []
            for c in self._kids[t]:
                ks.append(go(c, offset))
                offset += self.top_count(c)
            return self.intern(self._sym[t], tuple(ks))

        return go(p, 0)

    def prefix_decompose(self, t):
        """Split t into its maximal direct-output prefix and the residual subtrees.

        Nodes of kind OUT stay in the prefix; every other root (parameter
        symbols, variables, call nodes, placeholders) becomes a hole whose
        subtree is returned as a residual, left to right.
        """
        r = self._decomp.get(t)
        if r is None:
            if self._sym[t].kind is Kind.OUT:
                parts = [self.prefix_decompose(c) for c in self._kids[t]]
                pat = self.intern(self._sym[t], tuple(p for p, _ in parts))
                residuals = tuple(x for _, rs in parts for x in rs)
                r = (pat, residuals)
            else:
                r = (self.top, (t,))
            self._decomp[t] = r
        return r

    def match_residuals(self, p, t):
        """Subtrees of t at the hole positions of its prefix p.

        Inverse of substitution: requires every non-hole node of p to match
        t exactly.
        """
        out = []

        def walk(pp, tt):
            if self._sym[pp].kind is Kind.TOP:
                out.append(tt)
                return
            if self._sym[pp] is not self._sym[tt]:
                from .errors import InternalInvariantError
                raise InternalInvariantError(
                    "pattern %s does not match tree %s"
                    % (self.to_text(p), self.to_text(t)))
            for a, b in zip(self._kids[pp], self._kids[tt]):
                walk(a, b)

        walk(p, t)
        return tuple(out)

    # ------------------------------------------------------------------
    # rendering

    def to_text(self, tid):
        """Canonical textual form, parseable by the spec-file grammar."""
        if tid is BOTTOM:
            return "⊥"
        s = self._text.get(tid)
        if s is None:
            sym = self._sym[tid]
            head = quote_name(sym.name)
            if self._kids[tid]:
                s = head + "(" + ",".join(self.to_text(c) for c in self._kids[tid]) + ")"
            else:
                s = head
            self._text[tid] = s
        return s

    def preorder_names(self, tid):
        """Preorder symbol-name sequence; used for deterministic tie-breaks."""
        out = []
        stack = [tid]
        while stack:
            t = stack.pop()
            out.append(self._sym[t].name)
            stack.extend(reversed(self._kids[t]))
        return tuple(out)


def pattern_text(store, p):
    return "⊥" if p is BOTTOM else store.to_text(p)
