"""Line-oriented textual format for transducers, axioms, and automata.

    sigma   { g/2 f/2 0/0 1/0 2/0 }
    delta_o { +/2 */2 EXP/2 3/0 0/0 1/0 2/0 }
    delta_i { s/1 p/1 z/0 }
    params 1
    state q
    rule q(f(x1,x2), y1) = +(r(x2,y1), q(x1,s(y1)))
    axiom = q(x1, z)
    dta { states b; init b; trans b(f) -> (b,b); trans b(0) -> (); }

Symbol names may be quoted ("+"/2 works unquoted too); comments start
with #.  Rule heads use x1..xk and y1..yl positionally; those names are
reserved.  Files with a look-ahead block guard each rule with one
look-ahead state per child, written rule q(f(x1), y1) [ra] = ...

Unknown names and arity mismatches are syntax errors with locations;
range and shape violations are deferred to validation.
"""

import re
from dataclasses import dataclass

from .applications import LookaheadMtt, LookaheadRule
from .errors import ArityError, ParseError
from .model import Axiom, Dta, Mtt, Rule
from .terms import Kind, quote_name

_SPECIALS = set("(){},;=[]")
_XVAR = re.compile(r"^x([1-9][0-9]*)$")
_YVAR = re.compile(r"^y([1-9][0-9]*)$")


@dataclass(frozen=True)
class Tok:
    text: str
    line: int
    col: int
    quoted: bool = False


def tokenize(text):
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            i += 1
            col += 1
        elif c == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif c == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while i < n and text[i] != '"':
                if text[i] == "\\" and i + 1 < n:
                    i += 1
                    col += 1
                if text[i] == "\n":
                    raise ParseError("unterminated quoted name",
                                     start_line, start_col)
                buf.append(text[i])
                i += 1
                col += 1
            if i >= n:
                raise ParseError("unterminated quoted name",
                                 start_line, start_col)
            i += 1
            col += 1
            toks.append(Tok("".join(buf), start_line, start_col, quoted=True))
        elif c in _SPECIALS:
            toks.append(Tok(c, line, col))
            i += 1
            col += 1
        else:
            start_line, start_col = line, col
            buf = []
            while i < n and text[i] not in _SPECIALS \
                    and text[i] not in ' \t\r\n"#':
                buf.append(text[i])
                i += 1
                col += 1
            toks.append(Tok("".join(buf), start_line, start_col))
    return toks


@dataclass(frozen=True)
class RawTerm:
    name: str
    args: tuple
    line: int
    col: int
    quoted: bool = False


@dataclass
class ParsedSpec:
    mtt: object = None            # Mtt or LookaheadMtt
    axiom: object = None
    dta: object = None

    @property
    def has_lookahead(self):
        return isinstance(self.mtt, LookaheadMtt)


class _Parser:
    def __init__(self, store, toks):
        self.store = store
        self.toks = toks
        self.pos = 0

    # -- token helpers ---------------------------------------------------

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self, what="token"):
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of file, expected %s" % what)
        self.pos += 1
        return t

    def expect(self, text):
        t = self.next("'%s'" % text)
        if t.text != text or t.quoted:
            raise ParseError("expected '%s', found '%s'" % (text, t.text),
                             t.line, t.col)
        return t

    def name(self, what="name"):
        t = self.next(what)
        if not t.quoted and t.text in _SPECIALS:
            raise ParseError("expected %s, found '%s'" % (what, t.text),
                             t.line, t.col)
        return t

    # -- term parsing ----------------------------------------------------

    def term(self):
        head = self.name("symbol")
        args = []
        t = self.peek()
        if t is not None and t.text == "(" and not t.quoted:
            self.next()
            t = self.peek()
            if t is not None and t.text == ")" and not t.quoted:
                self.next()
            else:
                args.append(self.term())
                while True:
                    t = self.next("',' or ')'")
                    if t.text == ")" and not t.quoted:
                        break
                    if t.text != "," or t.quoted:
                        raise ParseError("expected ',' or ')'", t.line, t.col)
                    args.append(self.term())
        return RawTerm(head.text, tuple(args), head.line, head.col,
                       head.quoted)


def _split_decl(tok):
    """A declaration token 'name/rank'; quoted names take rank separately."""
    if tok.quoted:
        return tok.text, None
    if "/" not in tok.text:
        raise ParseError("expected name/rank", tok.line, tok.col)
    name, _, rank = tok.text.rpartition("/")
    if not rank.isdigit() or not name:
        raise ParseError("expected name/rank", tok.line, tok.col)
    return name, int(rank)


_RESERVED = re.compile(r"^(x[1-9][0-9]*|y[1-9][0-9]*)$")


@dataclass
class _Env:
    sigma: dict
    out: dict
    inner: dict
    states: dict
    params: int


def _resolve_output(store, env, raw, allow_vars=True):
    """Resolve a raw term at a state-output position."""
    if not raw.quoted and _YVAR.match(raw.name):
        if raw.args:
            raise ParseError("parameter %s takes no arguments" % raw.name,
                             raw.line, raw.col)
        return store.intern(store.yvar(int(raw.name[1:])))
    if raw.name in env.states:
        state = env.states[raw.name]
        if not raw.args:
            raise ParseError("state %s needs an input variable" % raw.name,
                             raw.line, raw.col)
        first = raw.args[0]
        m = None if first.quoted else _XVAR.match(first.name)
        if m is None or first.args:
            raise ParseError(
                "first argument of state %s must be an input variable"
                % raw.name, first.line, first.col)
        kids = [store.intern(store.xvar(int(m.group(1))))]
        kids += [_resolve_param(store, env, a) for a in raw.args[1:]]
        try:
            return store.intern(state, kids)
        except ArityError:
            raise ParseError(
                "state %s takes %d parameters, got %d"
                % (raw.name, state.rank - 1, len(raw.args) - 1),
                raw.line, raw.col)
    if raw.name in env.out:
        sym = env.out[raw.name]
        kids = [_resolve_output(store, env, a, allow_vars) for a in raw.args]
        try:
            return store.intern(sym, kids)
        except ArityError:
            raise ParseError("symbol %s has rank %d, got %d arguments"
                             % (raw.name, sym.rank, len(raw.args)),
                             raw.line, raw.col)
    if raw.name in env.inner:
        raise ParseError(
            "parameter-alphabet symbol %s at a state-output position"
            % raw.name, raw.line, raw.col)
    raise ParseError("unknown symbol %s" % raw.name, raw.line, raw.col)


def _resolve_param(store, env, raw):
    if not raw.quoted and _YVAR.match(raw.name):
        if raw.args:
            raise ParseError("parameter %s takes no arguments" % raw.name,
                             raw.line, raw.col)
        return store.intern(store.yvar(int(raw.name[1:])))
    if raw.name in env.inner:
        sym = env.inner[raw.name]
        kids = [_resolve_param(store, env, a) for a in raw.args]
        try:
            return store.intern(sym, kids)
        except ArityError:
            raise ParseError("symbol %s has rank %d, got %d arguments"
                             % (raw.name, sym.rank, len(raw.args)),
                             raw.line, raw.col)
    raise ParseError(
        "symbol %s not allowed inside a parameter argument" % raw.name,
        raw.line, raw.col)


def _resolve_input(store, env, raw):
    if raw.name not in env.sigma:
        raise ParseError("unknown input symbol %s" % raw.name,
                         raw.line, raw.col)
    sym = env.sigma[raw.name]
    kids = [_resolve_input(store, env, a) for a in raw.args]
    try:
        return store.intern(sym, kids)
    except ArityError:
        raise ParseError("symbol %s has rank %d, got %d arguments"
                         % (raw.name, sym.rank, len(raw.args)),
                         raw.line, raw.col)


def parse_spec(store, text):
    """Parse one spec file into its transducer, axiom, and/or automaton."""
    p = _Parser(store, tokenize(text))
    decls = {"sigma": [], "delta_o": [], "delta_i": []}
    params = None
    state_names = []
    raw_rules = []
    raw_axiom = None
    dta_stmts = None
    la_stmts = None

    while p.peek() is not None:
        kw = p.next("statement")
        if kw.quoted:
            raise ParseError("expected a statement keyword", kw.line, kw.col)
        if kw.text in decls:
            p.expect("{")
            while True:
                t = p.peek()
                if t is None:
                    raise ParseError("unterminated %s block" % kw.text,
                                     kw.line, kw.col)
                if t.text == "}" and not t.quoted:
                    p.next()
                    break
                tok = p.next()
                name, rank = _split_decl(tok)
                if rank is None:
                    nxt = p.next("'/rank'")
                    if nxt.quoted or not nxt.text.startswith("/") \
                            or not nxt.text[1:].isdigit():
                        raise ParseError("expected /rank after quoted name",
                                         nxt.line, nxt.col)
                    rank = int(nxt.text[1:])
                if _RESERVED.match(name):
                    raise ParseError("name %s is reserved" % name,
                                     tok.line, tok.col)
                decls[kw.text].append((name, rank, tok))
        elif kw.text == "params":
            t = p.next("parameter count")
            if not t.text.isdigit():
                raise ParseError("expected a number after params",
                                 t.line, t.col)
            params = int(t.text)
        elif kw.text in ("state", "states"):
            t = p.name("state name")
            state_names.append((t.text, t))
            while p.peek() is not None and p.peek().text not in (
                    "state", "states", "rule", "axiom", "sigma", "delta_o",
                    "delta_i", "params", "dta", "lookahead"):
                t = p.name("state name")
                state_names.append((t.text, t))
        elif kw.text == "rule":
            head = p.term()
            guard = None
            t = p.peek()
            if t is not None and t.text == "[" and not t.quoted:
                p.next()
                guard = []
                while True:
                    t = p.next("look-ahead state or ']'")
                    if t.text == "]" and not t.quoted:
                        break
                    if t.text == "," and not t.quoted:
                        continue
                    guard.append(t.text)
            eq = p.expect("=")
            t = p.peek()
            if t is None:
                raise ParseError("empty rule body", eq.line, eq.col)
            body = p.term()
            raw_rules.append((head, guard, body))
        elif kw.text == "axiom":
            p.expect("=")
            t = p.peek()
            if t is None:
                raise ParseError("empty axiom", kw.line, kw.col)
            raw_axiom = p.term()
        elif kw.text == "dta":
            dta_stmts = _parse_dta_block(p)
        elif kw.text == "lookahead":
            la_stmts = _parse_la_block(p)
        else:
            raise ParseError("unknown statement '%s'" % kw.text,
                             kw.line, kw.col)

    store_sym = store.symbol
    env = _Env(sigma={}, out={}, inner={}, states={},
               params=params if params is not None else 0)
    for section, kind in (("sigma", Kind.INPUT), ("delta_o", Kind.OUT),
                          ("delta_i", Kind.INNER)):
        for name, rank, tok in decls[section]:
            try:
                env_dict = {"sigma": env.sigma, "delta_o": env.out,
                            "delta_i": env.inner}[section]
                env_dict[name] = store_sym(name, rank, kind)
            except ArityError as e:
                raise ParseError(str(e), tok.line, tok.col)

    spec = ParsedSpec()
    has_mtt = bool(state_names or raw_rules or raw_axiom is not None
                   or decls["sigma"] or decls["delta_o"] or decls["delta_i"])

    if has_mtt:
        if params is None:
            raise ParseError("missing 'params' declaration")
        l = params
        for name, tok in state_names:
            if _RESERVED.match(name):
                raise ParseError("name %s is reserved" % name,
                                 tok.line, tok.col)
            if name in env.out or name in env.inner:
                raise ParseError(
                    "state %s collides with an output symbol" % name,
                    tok.line, tok.col)
            try:
                env.states[name] = store_sym(name, l + 1, Kind.STATE)
            except ArityError as e:
                raise ParseError(str(e), tok.line, tok.col)
        clash = set(env.out) & set(env.inner)
        if clash:
            raise ParseError("symbols %s declared in both output alphabets"
                             % ", ".join(sorted(clash)))
        rules = []
        for head, guard, body in raw_rules:
            rules.append(_resolve_rule(store, env, head, guard, body,
                                       with_guard=la_stmts is not None))
        axiom = None
        if raw_axiom is not None:
            axiom = Axiom(_resolve_output(store, env, raw_axiom,
                                          allow_vars=False))
        base = dict(
            sigma=tuple(env.sigma.values()),
            delta_out=tuple(env.out.values()),
            delta_in=tuple(env.inner.values()),
            param_count=l,
            states=tuple(env.states.values()),
        )
        if la_stmts is not None:
            la_states, la_trans = _resolve_la(store, env, la_stmts)
            spec.mtt = LookaheadMtt(rules=tuple(rules), la_states=la_states,
                                    la_trans=la_trans, **base)
        else:
            spec.mtt = Mtt(rules=tuple(rules), **base)
        spec.axiom = axiom

    if dta_stmts is not None:
        spec.dta = _resolve_dta(store, env, dta_stmts, has_mtt)
    return spec


def _resolve_rule(store, env, head, guard, body, with_guard):
    if head.name not in env.states:
        raise ParseError("unknown state %s" % head.name, head.line, head.col)
    state = env.states[head.name]
    if not head.args:
        raise ParseError("rule head needs an input symbol",
                         head.line, head.col)
    fraw = head.args[0]
    if fraw.name not in env.sigma:
        raise ParseError("unknown input symbol %s" % fraw.name,
                         fraw.line, fraw.col)
    insym = env.sigma[fraw.name]
    if len(fraw.args) != insym.rank:
        raise ParseError("input symbol %s has rank %d, got %d variables"
                         % (fraw.name, insym.rank, len(fraw.args)),
                         fraw.line, fraw.col)
    for i, x in enumerate(fraw.args, start=1):
        m = None if x.quoted else _XVAR.match(x.name)
        if m is None or x.args or int(m.group(1)) != i:
            raise ParseError("input variables must be x1..x%d in order"
                             % insym.rank, x.line, x.col)
    formals = []
    for y in head.args[1:]:
        m = None if y.quoted else _YVAR.match(y.name)
        if m is None or y.args:
            raise ParseError("rule head parameters must be y-variables",
                             y.line, y.col)
        formals.append(store.yvar(int(m.group(1))))
    rhs = _resolve_output(store, env, body)
    if with_guard:
        g = tuple(guard or ())
        if len(g) != insym.rank:
            raise ParseError(
                "rule for %s needs a look-ahead guard with %d entries"
                % (insym.name, insym.rank), head.line, head.col)
        return LookaheadRule(state, insym, g, tuple(formals), rhs,
                             line=head.line)
    if guard is not None:
        raise ParseError("guarded rule without a lookahead block",
                         head.line, head.col)
    return Rule(state, insym, tuple(formals), rhs, line=head.line)


def _parse_dta_block(p):
    p.expect("{")
    stmts = []
    while True:
        t = p.peek()
        if t is None:
            raise ParseError("unterminated dta block")
        if t.text == "}" and not t.quoted:
            p.next()
            break
        kw = p.next("dta statement")
        if kw.text in ("states", "init"):
            names = []
            while p.peek() is not None and p.peek().text != ";":
                names.append(p.name("state name"))
            p.expect(";")
            stmts.append((kw.text, names, kw))
        elif kw.text == "trans":
            b = p.name("automaton state")
            p.expect("(")
            f = p.name("input symbol")
            p.expect(")")
            arrow = p.next("'->'")
            if arrow.text != "->" or arrow.quoted:
                raise ParseError("expected '->'", arrow.line, arrow.col)
            p.expect("(")
            succ = []
            while True:
                t = p.next("state or ')'")
                if t.text == ")" and not t.quoted:
                    break
                if t.text == "," and not t.quoted:
                    continue
                succ.append(t)
            p.expect(";")
            stmts.append(("trans", (b, f, succ), kw))
        else:
            raise ParseError("unknown dta statement '%s'" % kw.text,
                             kw.line, kw.col)
    return stmts


def _resolve_dta(store, env, stmts, has_mtt):
    states = []
    init = None
    trans = {}
    for kind, payload, kw in stmts:
        if kind == "states":
            states.extend(t.text for t in payload)
        elif kind == "init":
            if len(payload) != 1:
                raise ParseError("init takes one state", kw.line, kw.col)
            init = payload[0].text
    if init is None:
        raise ParseError("dta block is missing an init statement")
    known = set(states)
    for kind, payload, kw in stmts:
        if kind != "trans":
            continue
        b, f, succ = payload
        if b.text not in known or any(s.text not in known for s in succ):
            bad = b if b.text not in known else \
                next(s for s in succ if s.text not in known)
            raise ParseError("undeclared automaton state %s" % bad.text,
                             bad.line, bad.col)
        if has_mtt:
            if f.text not in env.sigma:
                raise ParseError("unknown input symbol %s" % f.text,
                                 f.line, f.col)
            sym = env.sigma[f.text]
        else:
            sym = env.sigma.get(f.text)
            if sym is None:
                try:
                    sym = store.symbol(f.text, len(succ), Kind.INPUT)
                except ArityError as e:
                    raise ParseError(str(e), f.line, f.col)
                env.sigma[f.text] = sym
        if sym.rank != len(succ):
            raise ParseError(
                "input symbol %s has rank %d, transition names %d children"
                % (f.text, sym.rank, len(succ)), f.line, f.col)
        key = (b.text, sym)
        if key in trans:
            raise ParseError("duplicate transition for %s on %s"
                             % (b.text, f.text), f.line, f.col)
        trans[key] = tuple(s.text for s in succ)
    if init not in known:
        raise ParseError("undeclared initial state %s" % init)
    return Dta(states=tuple(states), init=init, trans=trans)


def _parse_la_block(p):
    p.expect("{")
    stmts = []
    while True:
        t = p.peek()
        if t is None:
            raise ParseError("unterminated lookahead block")
        if t.text == "}" and not t.quoted:
            p.next()
            break
        kw = p.next("lookahead statement")
        if kw.text == "states":
            names = []
            while p.peek() is not None and p.peek().text != ";":
                names.append(p.name("look-ahead state"))
            p.expect(";")
            stmts.append(("states", names, kw))
        elif kw.text == "trans":
            f = p.name("input symbol")
            p.expect("(")
            args = []
            while True:
                t = p.next("state or ')'")
                if t.text == ")" and not t.quoted:
                    break
                if t.text == "," and not t.quoted:
                    continue
                args.append(t)
            arrow = p.next("'->'")
            if arrow.text != "->" or arrow.quoted:
                raise ParseError("expected '->'", arrow.line, arrow.col)
            r = p.name("look-ahead state")
            p.expect(";")
            stmts.append(("trans", (f, args, r), kw))
        else:
            raise ParseError("unknown lookahead statement '%s'" % kw.text,
                             kw.line, kw.col)
    return stmts


def _resolve_la(store, env, stmts):
    states = []
    trans = {}
    for kind, payload, kw in stmts:
        if kind == "states":
            states.extend(t.text for t in payload)
    known = set(states)
    for kind, payload, kw in stmts:
        if kind != "trans":
            continue
        f, args, r = payload
        if f.text not in env.sigma:
            raise ParseError("unknown input symbol %s" % f.text,
                             f.line, f.col)
        sym = env.sigma[f.text]
        if len(args) != sym.rank:
            raise ParseError("input symbol %s has rank %d" % (f.text, sym.rank),
                             f.line, f.col)
        for t in args + [r]:
            if t.text not in known:
                raise ParseError("undeclared look-ahead state %s" % t.text,
                                 t.line, t.col)
        trans[(sym, tuple(t.text for t in args))] = r.text
    return tuple(states), trans


# ----------------------------------------------------------------------
# rendering


def _decl_text(sym):
    return "%s/%d" % (quote_name(sym.name), sym.rank)


def render_mtt(store, m, axiom=None, dta=None):
    """Spec-file text that parses back to an isomorphic transducer."""
    lines = []
    lines.append("sigma   { %s }" % " ".join(_decl_text(s) for s in m.sigma))
    lines.append("delta_o { %s }" % " ".join(_decl_text(s) for s in m.delta_out))
    lines.append("delta_i { %s }" % " ".join(_decl_text(s) for s in m.delta_in))
    lines.append("params %d" % m.param_count)
    for q in m.states:
        lines.append("state %s" % quote_name(q.name))
    for r in m.rules:
        xs = ",".join("x%d" % i for i in range(1, r.insym.rank + 1))
        head = quote_name(r.insym.name) + ("(%s)" % xs if xs else "")
        ys = "".join(", y%d" % j for j in range(1, m.param_count + 1))
        lines.append("rule %s(%s%s) = %s"
                     % (quote_name(r.state.name), head, ys,
                        store.to_text(r.rhs)))
    if axiom is not None:
        lines.append("axiom = %s" % store.to_text(axiom.term))
    if dta is not None:
        lines.append(render_dta(store, dta))
    return "\n".join(lines) + "\n"


def render_dta(store, d):
    parts = ["dta {"]
    parts.append("  states %s;" % " ".join(quote_name(b) for b in d.states))
    parts.append("  init %s;" % quote_name(d.init))
    for (b, f), succ in sorted(d.trans.items(),
                               key=lambda kv: (kv[0][0], kv[0][1].name)):
        parts.append("  trans %s(%s) -> (%s);"
                     % (quote_name(b), quote_name(f.name),
                        ",".join(quote_name(c) for c in succ)))
    parts.append("}")
    return "\n".join(parts)
