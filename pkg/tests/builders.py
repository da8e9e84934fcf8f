"""Hand-built transducers and automata shared across the test modules."""

from mttequiv import Axiom, Dta, Kind, Mtt, Rule, TermStore
from mttequiv.dsl import parse_spec

TERN_TEXT = """
# ternary numbers to arithmetic expressions
sigma   { g/2 f/2 0/0 1/0 2/0 }
delta_o { +/2 */2 EXP/2 3/0 0/0 1/0 2/0 }
delta_i { s/1 p/1 z/0 }
params 1
state q
state q'
state r
rule q(g(x1,x2), y1) = +(q(x1,y1), q'(x2,p(y1)))
rule q(f(x1,x2), y1) = +(r(x2,y1), q(x1,s(y1)))
rule q'(f(x1,x2), y1) = +(r(x1,y1), q'(x2,p(y1)))
rule q(0, y1) = *(0,EXP(3,y1))
rule q(1, y1) = *(1,EXP(3,y1))
rule q(2, y1) = *(2,EXP(3,y1))
rule q'(0, y1) = *(0,EXP(3,y1))
rule q'(1, y1) = *(1,EXP(3,y1))
rule q'(2, y1) = *(2,EXP(3,y1))
rule r(0, y1) = *(0,EXP(3,y1))
rule r(1, y1) = *(1,EXP(3,y1))
rule r(2, y1) = *(2,EXP(3,y1))
axiom = q(x1, z)
"""

TERN_TOTAL_EXTRA = """
rule q'(g(x1,x2), y1) = +(*(0,EXP(3,y1)), *(0,EXP(3,y1)))
rule r(f(x1,x2), y1) = *(0,EXP(3,y1))
rule r(g(x1,x2), y1) = *(0,EXP(3,y1))
"""

APPS_DTA_TEXT = """
dta {
  states r0 r;
  init r0;
  trans r0(g) -> (r,r);
  trans r(f) -> (r,r);
  trans r(0) -> ();
  trans r(1) -> ();
  trans r(2) -> ();
}
"""


def tern_partial(store):
    """The running ternary-number transducer, without completion rules."""
    spec = parse_spec(store, TERN_TEXT)
    return spec.mtt, spec.axiom


def tern_total(store):
    spec = parse_spec(store, TERN_TEXT + TERN_TOTAL_EXTRA)
    return spec.mtt, spec.axiom


def apps_dta(store):
    """Hand-written automaton for the partial transducer's domain: root g,
    digits at the leaves, f in between."""
    spec = parse_spec(store, TERN_TEXT + APPS_DTA_TEXT)
    return spec.dta


def fig1_input(store):
    g = store.lookup("g", Kind.INPUT)
    f = store.lookup("f", Kind.INPUT)
    d = {i: store.intern(store.lookup(str(i), Kind.INPUT)) for i in range(3)}
    t1 = store.intern(f, [store.intern(f, [store.intern(f, [d[2], d[1]]), d[0]]), d[1]])
    t2 = store.intern(f, [d[0], d[2]])
    return store.intern(g, [t1, t2])


FIG1_OUTPUT_TEXT = ("+(+(*(1,EXP(3,z)),+(*(0,EXP(3,s(z))),+(*(1,EXP(3,s(s(z)))),"
                    "*(2,EXP(3,s(s(s(z)))))))),+(*(0,EXP(3,p(z))),"
                    "*(2,EXP(3,p(p(z))))))")


def constant_psi_example(store):
    """One state over a monadic input alphabet whose output is a parameter
    value rewritten along the spine; drives the constant-output tables."""
    spec = parse_spec(store, """
sigma   { a/0 f/1 }
delta_o { }
delta_i { h/1 b/0 }
params 2
state q
rule q(a, y1, y2) = y1
rule q(f(x1), y1, y2) = q(x1, h(y2), b)
axiom = q(x1, b, b)
""")
    return spec.mtt, spec.axiom


def swap_phi_example(store):
    """Two states that are equivalent exactly when their parameter vectors
    are swapped; drives the pairwise-agreement tables."""
    left = parse_spec(store, """
sigma   { f/1 g/0 h/0 }
delta_o { a/1 }
delta_i { b/2 c/1 d/0 }
params 3
state q
rule q(f(x1), y1, y2, y3) = a(q(x1, b(y1,y1), c(y2), d))
rule q(g, y1, y2, y3) = y1
rule q(h, y1, y2, y3) = y2
axiom = q(x1, d, d, d)
""")
    right = parse_spec(store, """
sigma   { f/1 g/0 h/0 }
delta_o { a/1 }
delta_i { b/2 c/1 d/0 }
params 3
state q2
rule q2(f(x1), y1, y2, y3) = a(q2(x1, c(y1), b(y2,y2), d))
rule q2(g, y1, y2, y3) = y2
rule q2(h, y1, y2, y3) = y1
axiom = q2(x1, d, d, d)
""")
    return (left.mtt, left.axiom), (right.mtt, right.axiom)


def inverse_dewey(store, rename=""):
    """Binary identity transducer that hangs the inverse node address,
    in unary, under every leaf."""
    q = "q" + rename
    spec = parse_spec(store, """
sigma   { f/2 a/0 }
delta_o { f/2 a/1 }
delta_i { 1/1 2/1 e/0 }
params 1
state %s
rule %s(f(x1,x2), y1) = f(%s(x1,1(y1)), %s(x2,2(y1)))
rule %s(a, y1) = a(y1)
axiom = %s(x1, e)
""" % (q, q, q, q, q, q))
    return spec.mtt, spec.axiom


def single_state_identityish(store):
    """Tiny alphabet transducer used for smoke checks."""
    spec = parse_spec(store, """
sigma   { f/1 a/0 }
delta_o { F/1 A/0 }
delta_i { }
params 0
state q
rule q(f(x1)) = F(q(x1))
rule q(a) = A
axiom = q(x1)
""")
    return spec.mtt, spec.axiom
