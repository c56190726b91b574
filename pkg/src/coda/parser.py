"""Lexer and recursive-descent parser for the textual .coda model format."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, ParseFailure, SourceSpan
from .exprs import (BOOL, INT, NAT, Bin, Lit, MinMax, Name, Recv, StateTest,
                    Unary, set_ref)
from .model import (Action, CarrierSet, Component, Connector, Constant, Context,
                    INITIAL, Model, Operation, Param, RefinesClause, State,
                    StateMachine, Transition, Variable)

KEYWORDS = {
    "model", "context", "set", "constant", "axiom", "connector", "from", "to",
    "component", "var", "variant", "operation", "kind", "wakes", "unsync",
    "param", "in", "guard", "action", "port_send", "self_wake", "call", "delay",
    "statemachine", "sync", "async", "state", "invariant", "transition",
    "initial", "links", "refines", "refinement", "abstract", "concrete",
    "glue", "map", "new", "true", "false", "not", "and", "or", "min", "max",
    "in_abs", "recv",
}

_SYMBOLS = ["->", ":=", "..", "=>", "!=", "<=", ">=",
            "{", "}", "(", ")", ":", ",", ".", "=", "<", ">", "+", "-", "*"]


@dataclass
class Token:
    type: str   # "name" | "kw" | "int" | "string" | symbol text | "eof"
    value: object
    line: int
    col: int
    end_col: int

    def span(self, file):
        return SourceSpan(file, self.line, self.col, self.line, self.end_col)


def tokenize(text, file="<input>"):
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] not in '"\n':
                j += 1
            if j >= n or text[j] != '"':
                raise ParseFailure([Diagnostic(
                    "error", "syntax", "unterminated string",
                    SourceSpan(file, line, col, line, col + 1))])
            value = text[i + 1:j]
            tokens.append(Token("string", value, line, col, col + (j - i) + 1))
            col += j - i + 1
            i = j + 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", int(text[i:j]), line, col, col + (j - i)))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in KEYWORDS else "name"
            tokens.append(Token(kind, word, line, col, col + (j - i)))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(sym, sym, line, col, col + len(sym)))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise ParseFailure([Diagnostic(
                "error", "syntax", f"unexpected character {ch!r}",
                SourceSpan(file, line, col, line, col + 1))])
    tokens.append(Token("eof", None, line, col, col))
    return tokens


class _Parser:
    def __init__(self, text, file):
        self.file = file
        self.tokens = tokenize(text, file)
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead=0):
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.pos]
        if tok.type != "eof":
            self.pos += 1
        return tok

    def at(self, type_, value=None):
        tok = self.peek()
        return tok.type == type_ and (value is None or tok.value == value)

    def at_kw(self, *words):
        tok = self.peek()
        return tok.type == "kw" and tok.value in words

    def accept(self, type_, value=None):
        if self.at(type_, value):
            return self.next()
        return None

    def expect(self, type_, value=None, what=None):
        tok = self.peek()
        if self.at(type_, value):
            return self.next()
        want = what or (value if value is not None else type_)
        self.fail(f"expected {want}, found {self._describe(tok)}", tok)

    def _describe(self, tok):
        if tok.type == "eof":
            return "end of input"
        return repr(tok.value)

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseFailure([Diagnostic("error", "syntax", message,
                                       tok.span(self.file))])

    def name(self, what="a name"):
        tok = self.peek()
        if tok.type == "name":
            return self.next().value
        # allow keywords that double as identifiers nowhere; be strict
        self.fail(f"expected {what}, found {self._describe(tok)}", tok)

    def span(self, tok):
        return tok.span(self.file)

    # -- model -------------------------------------------------------------

    def parse_model(self):
        head = self.expect("kw", "model")
        mname = self.name("the model name")
        contexts, connectors, components = [], [], []
        refines = None
        while not self.at("eof"):
            tok = self.peek()
            if self.at_kw("context"):
                contexts.append(self.parse_context())
            elif self.at_kw("connector"):
                connectors.append(self.parse_connector())
            elif self.at_kw("component"):
                components.append(self.parse_component())
            elif self.at_kw("refines"):
                if refines is not None:
                    self.fail("only one refines clause per model", tok)
                refines = self.parse_refines()
            else:
                self.fail("expected context, connector, component or refines",
                          tok)
        return Model(mname, tuple(contexts), tuple(connectors),
                     tuple(components), refines, span=self.span(head))

    def parse_context(self):
        head = self.expect("kw", "context")
        cname = self.name("the context name")
        self.expect("{")
        sets, consts, axioms = [], [], []
        while not self.accept("}"):
            tok = self.peek()
            if self.at_kw("set"):
                self.next()
                sname = self.name("a set name")
                self.expect("=")
                self.expect("{")
                elems = [self.name("an element")]
                while self.accept(","):
                    elems.append(self.name("an element"))
                self.expect("}")
                sets.append(CarrierSet(sname, tuple(elems), self.span(tok)))
            elif self.at_kw("constant"):
                self.next()
                kname = self.name("a constant name")
                self.expect(":")
                ty = self.parse_type()
                self.expect("=")
                consts.append(Constant(kname, ty, self.parse_literal(ty),
                                       self.span(tok)))
            elif self.at_kw("axiom"):
                self.next()
                axioms.append(self.parse_expr())
            else:
                self.fail("expected set, constant or axiom", tok)
        return Context(cname, tuple(sets), tuple(consts), tuple(axioms),
                       self.span(head))

    def parse_literal(self, ty):
        tok = self.peek()
        if self.accept("kw", "true"):
            return True
        if self.accept("kw", "false"):
            return False
        neg = bool(self.accept("-"))
        if self.at("int"):
            v = self.next().value
            return -v if neg else v
        if neg:
            self.fail("expected a number after '-'", tok)
        if self.at("name"):
            return self.next().value
        self.fail("expected a literal value", tok)

    def parse_type(self):
        tok = self.peek()
        if tok.type == "name":
            word = self.next().value
            if word == "BOOL":
                return BOOL
            if word == "NAT":
                return NAT
            if word == "INT":
                return INT
            return set_ref(word)
        self.fail("expected a type (BOOL, NAT, INT or a set name)", tok)

    def parse_connector(self):
        head = self.expect("kw", "connector")
        cname = self.name("the connector name")
        self.expect(":")
        ty = self.parse_type()
        self.expect("kw", "from")
        src = self.name("the source component")
        self.expect("kw", "to")
        tgt = self.name("the target component")
        return Connector(cname, ty, src, tgt, self.span(head))

    def parse_component(self):
        head = self.expect("kw", "component")
        cname = self.name("the component name")
        self.expect("{")
        variables, operations, machines = [], [], []
        variant = None
        while not self.accept("}"):
            tok = self.peek()
            if self.at_kw("var"):
                self.next()
                vname = self.name("a variable name")
                self.expect(":")
                ty = self.parse_type()
                self.expect("=")
                variables.append(Variable(vname, ty, self.parse_expr(),
                                          self.span(tok)))
            elif self.at_kw("variant"):
                self.next()
                if variant is not None:
                    self.fail("only one variant per component", tok)
                variant = self.parse_expr()
            elif self.at_kw("operation"):
                operations.append(self.parse_operation(cname))
            elif self.at_kw("statemachine"):
                machines.append(self.parse_machine(cname))
            else:
                self.fail("expected var, variant, operation or statemachine",
                          tok)
        return Component(cname, tuple(variables), tuple(operations),
                         tuple(machines), variant, self.span(head))

    def parse_operation(self, owner):
        head = self.expect("kw", "operation")
        oname = self.name("the operation name")
        self.expect("kw", "kind")
        ktok = self.peek()
        kind = self.name("an operation kind")
        if kind not in ("P", "S", "E", "T", "M"):
            self.fail(f"unknown kind '{kind}' (allowed kinds: P, S, E, T, M)",
                      ktok)
        unsync = bool(self.accept("kw", "unsync"))
        wakes = []
        if self.accept("kw", "wakes"):
            wakes.append(self.name("a connector name"))
            while self.accept(","):
                wakes.append(self.name("a connector name"))
        self.expect("{")
        params, guards, actions = [], [], []
        while not self.accept("}"):
            tok = self.peek()
            if self.at_kw("param"):
                self.next()
                pname = self.name("a parameter name")
                self.expect(":")
                ty = self.parse_type()
                low = high = None
                if self.accept("kw", "in"):
                    low = self.expect("int").value
                    self.expect("..")
                    high = self.expect("int").value
                params.append(Param(pname, ty, low, high))
            elif self.at_kw("guard"):
                self.next()
                guards.append(self.parse_expr())
            elif self.at_kw("action"):
                actions.append(self.parse_action())
            else:
                self.fail("expected param, guard or action", tok)
        synchronised = False if kind == "E" else not unsync
        return Operation(oname, owner, kind, tuple(wakes), tuple(params),
                         tuple(guards), tuple(actions), synchronised,
                         self.span(head))

    def parse_action(self):
        head = self.expect("kw", "action")
        tok = self.peek()
        if self.accept("kw", "port_send"):
            self.expect("(")
            conn = self.name("a connector name")
            self.expect(",")
            value = self.parse_expr()
            self.expect(",")
            self.expect("kw", "delay")
            delay = self.parse_expr()
            self.expect(")")
            return Action("send", conn, value, delay, span=self.span(head))
        if self.accept("kw", "self_wake"):
            self.expect("(")
            self.expect("kw", "delay")
            delay = self.parse_expr()
            self.expect(")")
            return Action("wake", delay=delay, span=self.span(head))
        if self.accept("kw", "call"):
            return Action("call", self.name("an operation name"),
                          span=self.span(head))
        if tok.type == "name":
            var = self.next().value
            self.expect(":=")
            return Action("assign", var, self.parse_expr(), span=self.span(head))
        self.fail("expected an assignment, port_send, self_wake or call", tok)

    def parse_machine(self, owner):
        head = self.expect("kw", "statemachine")
        mname = self.name("the machine name")
        mode_tok = self.peek()
        if self.accept("kw", "sync"):
            mode = "sync"
        elif self.accept("kw", "async"):
            mode = "async"
        else:
            self.fail("expected sync or async", mode_tok)
        self.expect("{")
        states, transitions = [], []
        while not self.accept("}"):
            tok = self.peek()
            if self.at_kw("state"):
                states.append(self.parse_state(transitions))
            elif self.at_kw("transition"):
                transitions.append(self.parse_transition())
            elif self.at_kw("initial"):
                transitions.append(self.parse_initial())
            else:
                self.fail("expected state, transition or initial", tok)
        machine = StateMachine(mname, owner, mode, tuple(states),
                               tuple(transitions), self.span(head))
        return _normalize_transitions(machine)

    def parse_initial(self):
        head = self.expect("kw", "initial")
        self.expect("->")
        target = self.name("the initial state")
        op = None
        if self.accept("kw", "links"):
            op = self.name("an operation name")
        return Transition(f"init_{target}", INITIAL, target, op,
                          span=self.span(head))

    def parse_state(self, transitions):
        head = self.expect("kw", "state")
        sname = self.name("a state name")
        self.expect("{")
        subs, invs = [], []
        while not self.accept("}"):
            tok = self.peek()
            if self.at_kw("state"):
                subs.append(self.parse_state(transitions))
            elif self.at_kw("invariant"):
                self.next()
                invs.append(self.parse_expr())
            elif self.at_kw("initial"):
                transitions.append(self.parse_initial())
            else:
                self.fail("expected state, invariant or initial", tok)
        return State(sname, tuple(subs), tuple(invs), self.span(head))

    def parse_transition(self):
        head = self.expect("kw", "transition")
        tname = self.name("the transition name")
        unsync = bool(self.accept("kw", "unsync"))
        self.expect(":")
        source = self.name("the source state")
        self.expect("->")
        target = self.name("the target state")
        op = None
        if self.accept("kw", "links"):
            op = self.name("an operation name")
        guards, actions = [], []
        if self.accept("{"):
            while not self.accept("}"):
                tok = self.peek()
                if self.at_kw("guard"):
                    self.next()
                    guards.append(self.parse_expr())
                elif self.at_kw("action"):
                    actions.append(self.parse_action())
                else:
                    self.fail("expected guard or action", tok)
        return Transition(tname, source, target, op, tuple(guards),
                          tuple(actions), not unsync, self.span(head))

    def parse_refines(self):
        head = self.expect("kw", "refines")
        path = self.expect("string", what="the abstract model path").value
        glue, event_map, state_map = [], [], []
        if self.accept("{"):
            self._refinement_body(glue, event_map, state_map)
        return RefinesClause(path, tuple(glue), tuple(event_map),
                             tuple(state_map), self.span(head))

    def _refinement_body(self, glue, event_map, state_map):
        while not self.accept("}"):
            tok = self.peek()
            if self.at_kw("glue"):
                self.next()
                glue.append(self.parse_expr())
            elif self.at_kw("map"):
                self.next()
                conc = self.name("a concrete operation")
                self.expect("->")
                if self.accept("kw", "new"):
                    event_map.append((conc, "new"))
                else:
                    event_map.append((conc, self.name("an abstract operation")))
            elif self.at_kw("state"):
                self.next()
                conc = self.name("a concrete state")
                self.expect("->")
                state_map.append((conc, self.name("an abstract state")))
            else:
                self.fail("expected glue, map or state", tok)

    # -- expressions ---------------------------------------------------------

    def parse_expr(self):
        return self.parse_implies()

    def parse_implies(self):
        left = self.parse_or()
        if self.accept("=>"):
            return Bin("=>", left, self.parse_implies())
        return left

    def parse_or(self):
        left = self.parse_and()
        while self.accept("kw", "or"):
            left = Bin("or", left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.accept("kw", "and"):
            left = Bin("and", left, self.parse_not())
        return left

    def parse_not(self):
        if self.accept("kw", "not"):
            return Unary("not", self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self):
        left = self.parse_add()
        for op in ("=", "!=", "<=", ">=", "<", ">"):
            if self.accept(op):
                return Bin(op, left, self.parse_add())
        return left

    def parse_add(self):
        left = self.parse_mul()
        while True:
            if self.accept("+"):
                left = Bin("+", left, self.parse_mul())
            elif self.accept("-"):
                left = Bin("-", left, self.parse_mul())
            else:
                return left

    def parse_mul(self):
        left = self.parse_unary()
        while self.accept("*"):
            left = Bin("*", left, self.parse_unary())
        return left

    def parse_unary(self):
        if self.accept("-"):
            return Unary("neg", self.parse_unary())
        return self.parse_atom()

    def parse_atom(self):
        tok = self.peek()
        if self.accept("kw", "true"):
            return Lit(True)
        if self.accept("kw", "false"):
            return Lit(False)
        if tok.type == "int":
            return Lit(self.next().value)
        if self.at_kw("in", "in_abs"):
            fn = self.next().value
            self.expect("(")
            state = self.name("a state name")
            self.expect(")")
            return StateTest(state, "abs" if fn == "in_abs" else "")
        if self.accept("kw", "recv"):
            self.expect("(")
            conn = self.name("a connector name")
            self.expect(")")
            return Recv(conn)
        if self.at_kw("min", "max"):
            fn = self.next().value
            self.expect("(")
            args = [self.parse_expr()]
            while self.accept(","):
                args.append(self.parse_expr())
            self.expect(")")
            return MinMax(fn, tuple(args))
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        if tok.type == "name":
            parts = [self.next().value]
            while self.accept("."):
                parts.append(self.name("a name after '.'"))
            return Name(tuple(parts))
        self.fail(f"expected an expression, found {self._describe(tok)}", tok)


def _normalize_transitions(machine: StateMachine) -> StateMachine:
    """Fix transition order to the canonical printing order (root initial,
    region initials in state pre-order, then plain transitions) so that
    parse and print are exact inverses regardless of source layout."""
    parents = machine.parent_map()
    initials = [t for t in machine.transitions if t.source == INITIAL]
    plain = [t for t in machine.transitions if t.source != INITIAL]
    ordered = [t for t in initials if (parents.get(t.target) or "") == ""]
    for s in machine.all_states():
        ordered.extend(t for t in initials if parents.get(t.target) == s.name)
    from dataclasses import replace
    return replace(machine, transitions=tuple(ordered + plain))


def parse(text: str, file="<input>") -> Model:
    """Parse a .coda model; raises ParseFailure with positioned diagnostics."""
    p = _Parser(text, file)
    model = p.parse_model()
    return model


def parse_file(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), file=str(path))


def parse_refinement_file(text: str, file="<input>"):
    """Standalone .refines companion:  refinement { abstract "..." concrete
    "..." glue/map/state ... }.  Returns (abstract_path, concrete_path, clause).
    """
    p = _Parser(text, file)
    head = p.expect("kw", "refinement")
    p.expect("{")
    abstract = concrete = None
    glue, event_map, state_map = [], [], []
    while not p.accept("}"):
        tok = p.peek()
        if p.at_kw("abstract"):
            p.next()
            abstract = p.expect("string").value
        elif p.at_kw("concrete"):
            p.next()
            concrete = p.expect("string").value
        elif p.at_kw("glue", "map", "state"):
            # reuse the inline-body loop for a single item
            if p.at_kw("glue"):
                p.next()
                glue.append(p.parse_expr())
            elif p.at_kw("map"):
                p.next()
                conc = p.name("a concrete operation")
                p.expect("->")
                if p.accept("kw", "new"):
                    event_map.append((conc, "new"))
                else:
                    event_map.append((conc, p.name("an abstract operation")))
            else:
                p.next()
                conc = p.name("a concrete state")
                p.expect("->")
                state_map.append((conc, p.name("an abstract state")))
        else:
            p.fail("expected abstract, concrete, glue, map or state", tok)
    if abstract is None:
        p.fail("refinement block names no abstract model")
    clause = RefinesClause(abstract, tuple(glue), tuple(event_map),
                           tuple(state_map), head.span(file))
    return abstract, concrete, clause
