"""Reader and writer for the textual ontology/query format.

Grammar (whitespace insignificant, `%` starts a line comment):

    fact      atom .
    tgd       atom, ..., atom -> atom, ..., atom .
    nc        atom, ..., atom -> ! .
    fd        fd pred : i, ..., i -> j, ..., j .
    query     ? head(V, ...) :- atom, ..., atom .     (the ? is optional)

Identifiers starting with a lowercase letter (or digit) are constants and
predicates, identifiers starting with an uppercase letter are variables,
and quoted strings '...' are constants.  Variables occurring in a rule head
but not in its body are existentially quantified.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .model import Atom, CONST, ConjunctiveQuery, Term, VAR, make_query


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class RawTGD(NamedTuple):
    """A rule as written: conjunctive body, possibly multi-atom head with any
    number of existential variables."""

    body: tuple
    head: tuple

    def existential_vars(self) -> list:
        body_vars = set()
        for a in self.body:
            body_vars.update(a.variables())
        out = []
        for a in self.head:
            for t in a.args:
                if t.kind == VAR and t not in body_vars and t not in out:
                    out.append(t)
        return out

    def __str__(self):
        return (f"{', '.join(str(a) for a in self.body)} -> "
                f"{', '.join(str(a) for a in self.head)}.")


class NegativeConstraint(NamedTuple):
    body: tuple

    def __str__(self):
        return f"{', '.join(str(a) for a in self.body)} -> !."


class FunctionalDependency(NamedTuple):
    pred: str
    lhs: tuple
    rhs: tuple

    def __str__(self):
        return (f"fd {self.pred}: {','.join(map(str, self.lhs))} -> "
                f"{','.join(map(str, self.rhs))}.")


@dataclass
class OntologyDocument:
    tgds: list = field(default_factory=list)
    ncs: list = field(default_factory=list)
    fds: list = field(default_factory=list)
    facts: list = field(default_factory=list)
    queries: list = field(default_factory=list)
    arities: dict = field(default_factory=dict)


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>%[^\n]*)
      | (?P<arrow>->)
      | (?P<sep>:-)
      | (?P<punct>[(),.!?:])
      | (?P<quoted>'(?:[^'\\]|\\.)*')
      | (?P<ident>[A-Za-z0-9_][A-Za-z0-9_^~]*)
    """,
    re.VERBOSE,
)


class _Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str):
    line, col, pos = 1, 1, 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col)
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text

    # -- terms and atoms ----------------------------------------------------

    def parse_term(self) -> Term:
        tok = self.next()
        if tok.kind == "quoted":
            raw = re.sub(r"\\(.)", r"\1", tok.text[1:-1])
            return Term(CONST, raw)
        if tok.kind != "ident":
            raise ParseError(f"expected a term, found {tok.text!r}", tok.line, tok.col)
        if tok.text[0].isupper():
            return Term(VAR, tok.text)
        return Term(CONST, tok.text)

    def parse_atom(self, arities: dict) -> Atom:
        tok = self.next()
        if tok.kind != "ident" or tok.text[0].isupper():
            raise ParseError(f"expected a predicate, found {tok.text!r}", tok.line, tok.col)
        pred = tok.text
        args = []
        self.expect("(")
        if not self.at(")"):
            args.append(self.parse_term())
            while self.at(","):
                self.next()
                args.append(self.parse_term())
        self.expect(")")
        known = arities.get(pred)
        if known is not None and known != len(args):
            raise ParseError(
                f"predicate {pred!r} used with arity {len(args)} but declared with {known}",
                tok.line, tok.col)
        arities.setdefault(pred, len(args))
        return Atom(pred, tuple(args))

    def parse_atom_list(self, arities: dict) -> list:
        atoms = [self.parse_atom(arities)]
        while self.at(","):
            self.next()
            atoms.append(self.parse_atom(arities))
        return atoms

    # -- statements ----------------------------------------------------------

    def parse_query_statement(self, arities: dict) -> ConjunctiveQuery:
        tok = self.peek()
        head = self.parse_atom(arities)
        self.expect(":-")
        body = self.parse_atom_list(arities)
        self.expect(".")
        q = make_query(head.pred, head.args, body)
        for t in head.args:
            if t.kind not in (VAR, CONST):
                raise ParseError("nulls cannot appear in queries", tok.line, tok.col)
        if not q.is_safe():
            missing = sorted(t.name for t in head.args
                             if t.kind == VAR and all(t not in a.args for a in body))
            raise ParseError(
                f"unsafe query: distinguished variable(s) {', '.join(missing)} "
                "missing from the body", tok.line, tok.col)
        return q

    def parse_fd(self, arities: dict) -> FunctionalDependency:
        kw = self.expect("fd")
        tok = self.next()
        if tok.kind != "ident" or tok.text[0].isupper():
            raise ParseError(f"expected a predicate after 'fd', found {tok.text!r}",
                             tok.line, tok.col)
        pred = tok.text
        self.expect(":")

        def int_list():
            out = []
            while True:
                t = self.next()
                if not t.text.isdigit():
                    raise ParseError(f"expected an attribute index, found {t.text!r}",
                                     t.line, t.col)
                out.append(int(t.text))
                if self.at(","):
                    self.next()
                    continue
                return out

        lhs = int_list()
        self.expect("->")
        rhs = int_list()
        self.expect(".")
        arity = arities.get(pred)
        if arity is None:
            raise ParseError(f"fd on unknown predicate {pred!r}", kw.line, kw.col)
        for i in lhs + rhs:
            if not 1 <= i <= arity:
                raise ParseError(
                    f"fd index {i} out of range for {pred!r}/{arity}", kw.line, kw.col)
        return FunctionalDependency(pred, tuple(lhs), tuple(rhs))

    def parse_statement(self, doc: OntologyDocument):
        tok = self.peek()
        after = self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else None
        if tok.text == "fd" and after is not None and after.kind == "ident":
            doc.fds.append(self.parse_fd(doc.arities))
            return
        if tok.text == "?":
            self.next()
            doc.queries.append(self.parse_query_statement(doc.arities))
            return
        # Look ahead for a query written without the ? prefix.
        mark = self.pos
        atoms = self.parse_atom_list(doc.arities)
        nxt = self.next()
        if nxt.text == ".":
            if len(atoms) != 1:
                raise ParseError("a fact is a single atom", tok.line, tok.col)
            fact = atoms[0]
            for t in fact.args:
                if t.kind != CONST:
                    raise ParseError("facts must be ground", tok.line, tok.col)
            doc.facts.append(fact)
            return
        if nxt.text == ":-":
            if len(atoms) != 1:
                raise ParseError("a query has a single head atom", tok.line, tok.col)
            self.pos = mark
            doc.queries.append(self.parse_query_statement(doc.arities))
            return
        if nxt.text != "->":
            raise ParseError(f"expected '.', '->' or ':-', found {nxt.text!r}",
                             nxt.line, nxt.col)
        if self.at("!"):
            self.next()
            self.expect(".")
            doc.ncs.append(NegativeConstraint(tuple(atoms)))
            return
        head = self.parse_atom_list(doc.arities)
        self.expect(".")
        doc.tgds.append(RawTGD(tuple(atoms), tuple(head)))


def parse_ontology(text: str) -> OntologyDocument:
    parser = _Parser(text)
    doc = OntologyDocument()
    while parser.peek() is not None:
        parser.parse_statement(doc)
    return doc


def parse_query(text: str, arities: Optional[dict] = None) -> ConjunctiveQuery:
    parser = _Parser(text)
    if parser.at("?"):
        parser.next()
    q = parser.parse_query_statement({} if arities is None else arities)
    if parser.peek() is not None:
        tok = parser.peek()
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return q


def parse_database(text: str) -> list:
    doc = parse_ontology(text)
    return doc.facts


# ---------------------------------------------------------------------------
# Serialization (round-trips through the parser).

_PLAIN_CONST = re.compile(r"[a-z0-9_][A-Za-z0-9_^~]*$")


def format_term(t: Term) -> str:
    if t.kind == CONST and not _PLAIN_CONST.match(t.name):
        escaped = t.name.replace("\\", "\\\\").replace("'", "\\'")
        return f"'{escaped}'"
    return t.name


def format_atom(a: Atom) -> str:
    return f"{a.pred}({', '.join(format_term(t) for t in a.args)})"


def format_query(q: ConjunctiveQuery) -> str:
    head = f"{q.head_pred}({', '.join(format_term(t) for t in q.head_args)})"
    return f"{head} :- {', '.join(format_atom(a) for a in q.body)}."


def format_raw_tgd(t: RawTGD) -> str:
    return (f"{', '.join(format_atom(a) for a in t.body)} -> "
            f"{', '.join(format_atom(a) for a in t.head)}.")


def serialize_ontology(doc: OntologyDocument) -> str:
    lines = []
    for t in doc.tgds:
        lines.append(format_raw_tgd(t))
    for nc in doc.ncs:
        lines.append(f"{', '.join(format_atom(a) for a in nc.body)} -> !.")
    for fd in doc.fds:
        lines.append(f"fd {fd.pred}: {','.join(map(str, fd.lhs))} -> "
                     f"{','.join(map(str, fd.rhs))}.")
    for fact in doc.facts:
        lines.append(f"{format_atom(fact)}.")
    for q in doc.queries:
        lines.append(f"? {format_query(q)}")
    return "\n".join(lines) + "\n"
