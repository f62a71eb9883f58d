"""Parser and printer for an untyped STRIPS subset of PDDL.

Grammar (case-insensitive, `;` line comments):

    (define (domain N)
      (:requirements :strips)?
      (:predicates (p ?x ?y) ...)
      (:action N :parameters (?x ...) :precondition (and ATOM...) :effect (and ATOM... (not ATOM)...))* )

    (define (problem N) (:domain N) (:objects o...) (:init ATOM...) (:goal (and LIT...)))

Preconditions are conjunctions of positive atoms; `(not ...)` is accepted in
effects and in problem goals, nowhere else.
"""

from __future__ import annotations

from dataclasses import dataclass


class PddlError(ValueError):
    """Syntax or semantic error with source position when available."""

    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f" at {line}:{col}" if line is not None else ""
        super().__init__(f"{msg}{where}")


@dataclass(frozen=True)
class SchemaAtom:
    predicate: str
    args: tuple[str, ...]  # schema variables, written with a leading '?'


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[str, ...]
    pre: tuple[SchemaAtom, ...]
    add: tuple[SchemaAtom, ...]
    delete: tuple[SchemaAtom, ...]


@dataclass(frozen=True)
class DomainAst:
    name: str
    predicates: tuple[tuple[str, int], ...]  # (name, arity)
    schemas: tuple[ActionSchema, ...]

    def arity(self, predicate: str) -> int | None:
        for name, k in self.predicates:
            if name == predicate:
                return k
        return None


@dataclass(frozen=True)
class GroundAtomAst:
    predicate: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class ProblemAst:
    name: str
    domain_name: str
    objects: tuple[str, ...]
    init: tuple[GroundAtomAst, ...]
    goal_pos: tuple[GroundAtomAst, ...]
    goal_neg: tuple[GroundAtomAst, ...]


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
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
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            toks.append(_Tok(c, line, col))
            i += 1
            col += 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            toks.append(_Tok(text[i:j].lower(), line, col))
            col += j - i
            i = j
    return toks


class _Stream:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Tok | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self, expect: str | None = None) -> _Tok:
        tok = self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else _Tok("", 1, 1)
            raise PddlError("unexpected end of input", last.line, last.col)
        if expect is not None and tok.text != expect:
            raise PddlError(f"expected '{expect}', found '{tok.text}'", tok.line, tok.col)
        self.pos += 1
        return tok

    def name(self, what: str = "name") -> _Tok:
        tok = self.next()
        if tok.text in "()" or tok.text.startswith(":"):
            raise PddlError(f"expected {what}, found '{tok.text}'", tok.line, tok.col)
        return tok

    def done(self):
        tok = self.peek()
        if tok is not None:
            raise PddlError(f"trailing input '{tok.text}'", tok.line, tok.col)


def _parse_atom(ts: _Stream) -> tuple[SchemaAtom, _Tok]:
    opener = ts.next("(")
    head = ts.name("predicate")
    args = []
    while True:
        tok = ts.peek()
        if tok is None:
            raise PddlError("unterminated atom", opener.line, opener.col)
        if tok.text == ")":
            ts.next()
            break
        if tok.text == "(":
            raise PddlError("nested expression inside atom", tok.line, tok.col)
        args.append(ts.next().text)
    return SchemaAtom(head.text, tuple(args)), head


# ---------------------------------------------------------------------------
# Domain


def parse_domain(text: str) -> DomainAst:
    ts = _Stream(text)
    ts.next("(")
    ts.next("define")
    ts.next("(")
    ts.next("domain")
    name = ts.name("domain name").text
    ts.next(")")

    predicates: list[tuple[str, int]] = []
    pred_arity: dict[str, int] = {}
    schemas: list[ActionSchema] = []
    schema_names: set[str] = set()

    while True:
        tok = ts.peek()
        if tok is None:
            raise PddlError("unterminated domain definition")
        if tok.text == ")":
            ts.next()
            break
        ts.next("(")
        section = ts.next()
        if section.text == ":requirements":
            while ts.peek() is not None and ts.peek().text != ")":
                flag = ts.next()
                if flag.text != ":strips":
                    raise PddlError(f"unsupported requirement '{flag.text}'", flag.line, flag.col)
            ts.next(")")
        elif section.text == ":predicates":
            while ts.peek() is not None and ts.peek().text != ")":
                decl, head = _parse_atom(ts)
                if decl.predicate in pred_arity:
                    raise PddlError(f"duplicate predicate '{decl.predicate}'", head.line, head.col)
                for a in decl.args:
                    if not a.startswith("?"):
                        raise PddlError(
                            f"predicate declaration argument '{a}' must be a variable",
                            head.line,
                            head.col,
                        )
                pred_arity[decl.predicate] = len(decl.args)
                predicates.append((decl.predicate, len(decl.args)))
            ts.next(")")
        elif section.text == ":action":
            schema = _parse_action(ts, pred_arity)
            if schema.name in schema_names:
                raise PddlError(f"duplicate action '{schema.name}'", section.line, section.col)
            schema_names.add(schema.name)
            schemas.append(schema)
        else:
            raise PddlError(f"unexpected section '{section.text}'", section.line, section.col)

    ts.done()
    return DomainAst(name, tuple(predicates), tuple(schemas))


def _check_schema_atom(atom: SchemaAtom, head: _Tok, pred_arity: dict[str, int], params: set[str]):
    arity = pred_arity.get(atom.predicate)
    if arity is None:
        raise PddlError(f"undeclared predicate '{atom.predicate}'", head.line, head.col)
    if arity != len(atom.args):
        raise PddlError(
            f"arity mismatch for '{atom.predicate}': declared {arity}, used {len(atom.args)}",
            head.line,
            head.col,
        )
    for a in atom.args:
        if not a.startswith("?"):
            raise PddlError(f"constant '{a}' not allowed in schema body", head.line, head.col)
        if a not in params:
            raise PddlError(f"unbound variable '{a}'", head.line, head.col)


def _parse_action(ts: _Stream, pred_arity: dict[str, int]) -> ActionSchema:
    name = ts.name("action name").text
    ts.next(":parameters")
    ts.next("(")
    params: list[str] = []
    while ts.peek() is not None and ts.peek().text != ")":
        tok = ts.next()
        if not tok.text.startswith("?"):
            raise PddlError(f"parameter '{tok.text}' must start with '?'", tok.line, tok.col)
        if tok.text in params:
            raise PddlError(f"duplicate parameter '{tok.text}'", tok.line, tok.col)
        params.append(tok.text)
    ts.next(")")
    param_set = set(params)

    ts.next(":precondition")
    pre: list[SchemaAtom] = []
    for atom, head, negated in _parse_conjunction(ts, allow_not=False):
        _check_schema_atom(atom, head, pred_arity, param_set)
        pre.append(atom)

    ts.next(":effect")
    add: list[SchemaAtom] = []
    delete: list[SchemaAtom] = []
    for atom, head, negated in _parse_conjunction(ts, allow_not=True):
        _check_schema_atom(atom, head, pred_arity, param_set)
        (delete if negated else add).append(atom)

    ts.next(")")
    return ActionSchema(name, tuple(params), tuple(pre), tuple(add), tuple(delete))


def _parse_conjunction(ts: _Stream, allow_not: bool):
    """Yields (atom, head_token, negated) for `(and ...)` or a single literal."""
    ts.next("(")
    tok = ts.peek()
    if tok is not None and tok.text == "and":
        ts.next()
        items = []
        while ts.peek() is not None and ts.peek().text != ")":
            items.append(_parse_literal(ts, allow_not))
        ts.next(")")
        return items
    # single literal without the (and ...) wrapper; rewind the '('
    ts.pos -= 1
    return [_parse_literal(ts, allow_not)]


def _parse_literal(ts: _Stream, allow_not: bool):
    save = ts.pos
    ts.next("(")
    tok = ts.peek()
    if tok is not None and tok.text == "not":
        if not allow_not:
            raise PddlError("negation not allowed here", tok.line, tok.col)
        ts.next()
        atom, head = _parse_atom(ts)
        ts.next(")")
        return atom, head, True
    ts.pos = save
    atom, head = _parse_atom(ts)
    return atom, head, False


# ---------------------------------------------------------------------------
# Problem


def parse_problem(text: str) -> ProblemAst:
    ts = _Stream(text)
    ts.next("(")
    ts.next("define")
    ts.next("(")
    ts.next("problem")
    name = ts.name("problem name").text
    ts.next(")")

    domain_name = None
    objects: list[str] = []
    init: list[GroundAtomAst] = []
    goal_pos: list[GroundAtomAst] = []
    goal_neg: list[GroundAtomAst] = []
    seen: set[str] = set()

    while True:
        tok = ts.peek()
        if tok is None:
            raise PddlError("unterminated problem definition")
        if tok.text == ")":
            ts.next()
            break
        ts.next("(")
        section = ts.next()
        if section.text in seen:
            raise PddlError(f"duplicate section '{section.text}'", section.line, section.col)
        seen.add(section.text)
        if section.text == ":domain":
            domain_name = ts.name("domain name").text
            ts.next(")")
        elif section.text == ":objects":
            while ts.peek() is not None and ts.peek().text != ")":
                tok = ts.next()
                if tok.text.startswith("?") or tok.text.startswith(":"):
                    raise PddlError(f"bad object name '{tok.text}'", tok.line, tok.col)
                if tok.text in objects:
                    raise PddlError(f"duplicate object '{tok.text}'", tok.line, tok.col)
                objects.append(tok.text)
            ts.next(")")
        elif section.text == ":init":
            while ts.peek() is not None and ts.peek().text != ")":
                atom, head, negated = _parse_literal(ts, allow_not=True)
                if negated:
                    raise PddlError("negated atom in :init (closed world)", head.line, head.col)
                init.append(_ground_atom(atom, head, objects))
            ts.next(")")
        elif section.text == ":goal":
            for atom, head, negated in _parse_conjunction(ts, allow_not=True):
                ga = _ground_atom(atom, head, objects)
                (goal_neg if negated else goal_pos).append(ga)
            ts.next(")")
        else:
            raise PddlError(f"unexpected section '{section.text}'", section.line, section.col)

    ts.done()
    if domain_name is None:
        raise PddlError("missing (:domain ...) section")
    return ProblemAst(
        name, domain_name, tuple(objects), tuple(init), tuple(goal_pos), tuple(goal_neg)
    )


def _ground_atom(atom: SchemaAtom, head: _Tok, objects: list[str]) -> GroundAtomAst:
    for a in atom.args:
        if a.startswith("?"):
            raise PddlError(f"variable '{a}' in ground atom", head.line, head.col)
        if a not in objects:
            raise PddlError(f"undeclared object '{a}'", head.line, head.col)
    return GroundAtomAst(atom.predicate, atom.args)


# ---------------------------------------------------------------------------
# Printers (inverse of the parsers for generated content)


def _fmt_atom(predicate: str, args: tuple[str, ...]) -> str:
    return f"({predicate}{''.join(' ' + a for a in args)})"


def format_domain(d: DomainAst) -> str:
    lines = [f"(define (domain {d.name})", "  (:requirements :strips)"]
    preds = " ".join(
        _fmt_atom(p, tuple(f"?x{i}" for i in range(k))) for p, k in d.predicates
    )
    lines.append(f"  (:predicates {preds})")
    for schema in d.schemas:
        lines.append(f"  (:action {schema.name}")
        lines.append(f"    :parameters ({' '.join(schema.params)})")
        pre = " ".join(_fmt_atom(a.predicate, a.args) for a in schema.pre)
        lines.append(f"    :precondition (and {pre})".rstrip() if pre else "    :precondition (and)")
        eff = [_fmt_atom(a.predicate, a.args) for a in schema.add]
        eff += [f"(not {_fmt_atom(a.predicate, a.args)})" for a in schema.delete]
        lines.append(f"    :effect (and {' '.join(eff)}))" if eff else "    :effect (and))")
    lines.append(")")
    return "\n".join(lines) + "\n"


def format_problem(p: ProblemAst) -> str:
    lines = [
        f"(define (problem {p.name})",
        f"  (:domain {p.domain_name})",
        f"  (:objects {' '.join(p.objects)})",
    ]
    init = " ".join(_fmt_atom(a.predicate, a.args) for a in p.init)
    lines.append(f"  (:init {init})")
    goal = [_fmt_atom(a.predicate, a.args) for a in p.goal_pos]
    goal += [f"(not {_fmt_atom(a.predicate, a.args)})" for a in p.goal_neg]
    lines.append(f"  (:goal (and {' '.join(goal)}))" if goal else "  (:goal (and))")
    lines.append(")")
    return "\n".join(lines) + "\n"
