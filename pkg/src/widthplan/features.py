"""Boolean and numerical state features and their small definition language.

Bundle file format, one declaration per line (`#` comments):

    feature H bool = nonzero(count(holding(_)))
    feature n num  = chain_count(on, x, up)
    feature t num  = distance(pos, adjacent, cells(target))
    feature u num  = missing(ppos(_, target), p1, p2)
    feature p num  = distance(pos, adjacent, cells_of(ppos(_, _), not target), zero_if(holding(_)))
    feature d num  = sum(distance(hpos, hadj, cells(h3)), distance(vpos, vadj, cells(v2)))
    feature m num  = builtin(marbles_first_box)

`_` is a wildcard argument.  `cells(obj,...)` is a fixed target set;
`cells_of(pattern)` collects the objects bound to the last argument of the
matching true atoms, minus any `not obj,...` exclusions.  `distance` walks
the graph of facts of its adjacency predicate from the unique location of
its position predicate to the nearest target, and is 0 when the target set
is empty, the position is undefined, or the optional `zero_if` pattern
matches the state.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .strips import GroundProblem, State


class FeatureError(ValueError):
    pass


class VisitMeter:
    """Counts atom-table entries touched, for linear-time evaluation audits."""

    def __init__(self):
        self.visits = 0

    def add(self, n: int):
        self.visits += n


@dataclass(frozen=True)
class Pattern:
    predicate: str
    args: tuple[str, ...]  # object names or the wildcard "_"

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(self.args)})"

    def matches(self, atom_args: tuple[str, ...]) -> bool:
        return len(atom_args) == len(self.args) and all(
            p == "_" or p == a for p, a in zip(self.args, atom_args)
        )


@dataclass(frozen=True)
class Count:
    pattern: Pattern


@dataclass(frozen=True)
class Missing:
    """Objects from a fixed set whose filled-in pattern is false in the state."""

    pattern: Pattern  # exactly one "_" hole
    objects: tuple[str, ...]


@dataclass(frozen=True)
class ChainCount:
    predicate: str
    seed: str
    direction: str  # "up": follow pred(next, cur); "down": follow pred(cur, next)


@dataclass(frozen=True)
class CellTargets:
    objects: tuple[str, ...]


@dataclass(frozen=True)
class PatternTargets:
    pattern: Pattern
    exclude: tuple[str, ...] = ()


@dataclass(frozen=True)
class Distance:
    pos_predicate: str
    adj_predicate: str
    targets: CellTargets | PatternTargets
    zero_if: Pattern | None = None


@dataclass(frozen=True)
class Builtin:
    name: str


@dataclass(frozen=True)
class Sum:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Nonzero:
    inner: "Expr"


Expr = Count | Missing | ChainCount | Distance | Builtin | Sum | Nonzero


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str  # "bool" | "num"
    expr: Expr


class FeatureSet:
    """Ordered features; valuations are tuples aligned with declaration order."""

    def __init__(self, features: list[Feature]):
        names = [f.name for f in features]
        if len(set(names)) != len(names):
            raise FeatureError("duplicate feature name")
        self.features = list(features)
        self.by_name = {f.name: f for f in features}

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def valuation(
        self, problem: GroundProblem, s: State, meter: VisitMeter | None = None
    ) -> tuple[int, ...]:
        return tuple(evaluate(f, problem, s, meter) for f in self.features)

    def select(self, names_kinds: list[tuple[str, str]]) -> "FeatureSet":
        """Subset in the requested order; kinds must match the declarations."""
        chosen = []
        for name, kind in names_kinds:
            f = self.by_name.get(name)
            if f is None:
                raise FeatureError(f"feature '{name}' not defined in bundle")
            if f.kind != kind:
                raise FeatureError(
                    f"feature '{name}' is {f.kind} in the bundle but {kind} in the sketch"
                )
            chosen.append(f)
        return FeatureSet(chosen)


def boolean_projection(phi: FeatureSet, values: tuple[int, ...]) -> tuple[bool, ...]:
    """Per feature: Boolean value itself, or `value == 0` for numerical ones."""
    bits = []
    for f, v in zip(phi.features, values):
        bits.append(bool(v) if f.kind == "bool" else v == 0)
    return tuple(bits)


# ---------------------------------------------------------------------------
# Evaluation

BUILTINS: dict[str, Callable[[GroundProblem, State], int]] = {}


def register_builtin(name: str):
    def deco(fn):
        BUILTINS[name] = fn
        return fn

    return deco


def evaluate(
    feature: Feature, problem: GroundProblem, s: State, meter: VisitMeter | None = None
) -> int:
    v = _eval(feature.expr, problem, s, meter)
    if feature.kind == "bool" and v not in (0, 1):
        raise FeatureError(f"feature '{feature.name}' declared bool but evaluated to {v}")
    if v < 0:
        raise FeatureError(f"feature '{feature.name}' evaluated to negative value {v}")
    return v


def _eval(expr: Expr, problem: GroundProblem, s: State, meter: VisitMeter | None) -> int:
    if isinstance(expr, Count):
        return _eval_count(expr.pattern, problem, s, meter)
    if isinstance(expr, Missing):
        return _eval_missing(expr, problem, s, meter)
    if isinstance(expr, ChainCount):
        return _eval_chain(expr, problem, s, meter)
    if isinstance(expr, Distance):
        return _eval_distance(expr, problem, s)
    if isinstance(expr, Builtin):
        fn = BUILTINS.get(expr.name)
        if fn is None:
            raise FeatureError(f"unregistered builtin '{expr.name}'")
        return fn(problem, s)
    if isinstance(expr, Sum):
        return _eval(expr.left, problem, s, meter) + _eval(expr.right, problem, s, meter)
    if isinstance(expr, Nonzero):
        return 1 if _eval(expr.inner, problem, s, meter) else 0
    raise FeatureError(f"unknown expression {expr!r}")


def _pattern_true_atoms(pattern: Pattern, problem: GroundProblem, s: State, meter):
    ids = problem.atoms_by_predicate.get(pattern.predicate, ())
    if meter is not None:
        meter.add(len(ids))
    for aid in ids:
        if (s >> aid) & 1 and pattern.matches(problem.atoms[aid].args):
            yield problem.atoms[aid]


def _eval_count(pattern: Pattern, problem: GroundProblem, s: State, meter) -> int:
    if "_" not in pattern.args:
        aid = problem.atom_id(pattern.predicate, pattern.args)
        if meter is not None:
            meter.add(1)
        return int(aid is not None and (s >> aid) & 1)
    return sum(1 for _ in _pattern_true_atoms(pattern, problem, s, meter))


def _eval_missing(expr: Missing, problem: GroundProblem, s: State, meter) -> int:
    hole = expr.pattern.args.index("_")
    n = 0
    if meter is not None:
        meter.add(len(expr.objects))
    for obj in expr.objects:
        args = list(expr.pattern.args)
        args[hole] = obj
        aid = problem.atom_id(expr.pattern.predicate, tuple(args))
        if aid is None or not (s >> aid) & 1:
            n += 1
    return n


def _eval_chain(expr: ChainCount, problem: GroundProblem, s: State, meter) -> int:
    # "up" counts objects stacked over the seed via pred(above, below).
    above: dict[str, str] = {}
    ids = problem.atoms_by_predicate.get(expr.predicate, ())
    if meter is not None:
        meter.add(len(ids))
    for aid in ids:
        if (s >> aid) & 1:
            a, b = problem.atoms[aid].args
            key, val = (b, a) if expr.direction == "up" else (a, b)
            if key in above:
                raise FeatureError(
                    f"chain_count({expr.predicate}): two links from '{key}'"
                )
            above[key] = val
    n = 0
    cur = expr.seed
    seen = {cur}
    while cur in above:
        cur = above[cur]
        if cur in seen:
            raise FeatureError(f"chain_count({expr.predicate}): cycle at '{cur}'")
        seen.add(cur)
        n += 1
    return n


def _adjacency(problem: GroundProblem, pred: str, s: State) -> dict[str, list[str]]:
    mask = problem.predicate_mask(pred)
    key = ("adjacency", pred, s & mask)
    graph = problem._cache.get(key)
    if graph is None:
        graph = {}
        for aid in problem.atoms_by_predicate.get(pred, ()):
            if (s >> aid) & 1:
                a, b = problem.atoms[aid].args
                graph.setdefault(a, []).append(b)
        problem._cache[key] = graph
    return graph


def _eval_distance(expr: Distance, problem: GroundProblem, s: State) -> int:
    if expr.zero_if is not None:
        for _ in _pattern_true_atoms(expr.zero_if, problem, s, None):
            return 0
    source = None
    for atom in _pattern_true_atoms(
        Pattern(expr.pos_predicate, ("_",)), problem, s, None
    ):
        if source is not None:
            raise FeatureError(f"distance: several {expr.pos_predicate} atoms true")
        source = atom.args[0]
    if isinstance(expr.targets, CellTargets):
        targets = set(expr.targets.objects)
    else:
        targets = {
            atom.args[-1]
            for atom in _pattern_true_atoms(expr.targets.pattern, problem, s, None)
        }
        targets -= set(expr.targets.exclude)
    if source is None or not targets:
        return 0
    if source in targets:
        return 0
    graph = _adjacency(problem, expr.adj_predicate, s)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        cur = queue.popleft()
        d = dist[cur] + 1
        for nxt in graph.get(cur, ()):
            if nxt in dist:
                continue
            if nxt in targets:
                return d
            dist[nxt] = d
            queue.append(nxt)
    raise FeatureError(
        f"distance: no target of {expr.targets} reachable from '{source}'"
    )


# ---------------------------------------------------------------------------
# Registered domain-specific evaluators


@register_builtin("marbles_first_box")
def _marbles_first_box(problem: GroundProblem, s: State) -> int:
    """Marbles in the lexicographically first box still on the table."""
    first = None
    for aid in problem.atoms_by_predicate.get("ontable", ()):
        if (s >> aid) & 1:
            b = problem.atoms[aid].args[0]
            if first is None or b < first:
                first = b
    if first is None:
        return 0
    n = 0
    for aid in problem.atoms_by_predicate.get("in", ()):
        if (s >> aid) & 1 and problem.atoms[aid].args[1] == first:
            n += 1
    return n


@register_builtin("hanoi_parity")
def _hanoi_parity(problem: GroundProblem, s: State) -> int:
    aid = problem.atom_id("e", ())
    return int(aid is not None and (s >> aid) & 1)


def _hanoi_top(problem: GroundProblem, s: State, peg: str) -> str:
    above = {}
    for aid in problem.atoms_by_predicate.get("on", ()):
        if (s >> aid) & 1:
            a, b = problem.atoms[aid].args
            above[b] = a
    cur = peg
    while cur in above:
        cur = above[cur]
    return cur


def _hanoi_top_less(problem: GroundProblem, s: State, peg_i: str, peg_j: str) -> int:
    # An empty peg counts as carrying a virtual disk larger than every disk:
    # the comparison is true iff peg i is non-empty and peg j is empty, or
    # both are non-empty and top(i) is the smaller disk.
    top_i = _hanoi_top(problem, s, peg_i)
    top_j = _hanoi_top(problem, s, peg_j)
    if top_i == peg_i:
        return 0
    if top_j == peg_j:
        return 1
    aid = problem.atom_id("smaller", (top_i, top_j))
    return int(aid is not None and (s >> aid) & 1)


for _i, _j in ((1, 2), (1, 3), (2, 3)):
    def _make(i=_i, j=_j):
        def fn(problem: GroundProblem, s: State) -> int:
            return _hanoi_top_less(problem, s, f"peg{i}", f"peg{j}")

        return fn

    BUILTINS[f"hanoi_p{_i}{_j}"] = _make()


# ---------------------------------------------------------------------------
# Bundle parsing

_DECL_RE = re.compile(r"^feature\s+(\w+)\s+(bool|num)\s*=\s*(.+)$")
_TOKEN_RE = re.compile(r"\s*([A-Za-z0-9_]+|[(),]|\S)")


class _ExprParser:
    def __init__(self, text: str, lineno: int):
        self.toks = _TOKEN_RE.findall(text)
        self.pos = 0
        self.lineno = lineno

    def error(self, msg: str):
        raise FeatureError(f"line {self.lineno}: {msg}")

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self, expect=None):
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of expression")
        if expect is not None and tok != expect:
            self.error(f"expected '{expect}', found '{tok}'")
        self.pos += 1
        return tok

    def parse(self) -> Expr:
        expr = self.expr()
        if self.peek() is not None:
            self.error(f"trailing '{self.peek()}'")
        return expr

    def expr(self) -> Expr:
        head = self.next()
        if head == "count":
            self.next("(")
            p = self.pattern()
            self.next(")")
            return Count(p)
        if head == "missing":
            self.next("(")
            p = self.pattern()
            if p.args.count("_") != 1:
                self.error("missing(...) needs exactly one '_' hole")
            objs = []
            while self.peek() == ",":
                self.next()
                objs.append(self.name())
            self.next(")")
            if not objs:
                self.error("missing(...) needs at least one object")
            return Missing(p, tuple(objs))
        if head == "chain_count":
            self.next("(")
            pred = self.name()
            self.next(",")
            seed = self.name()
            self.next(",")
            direction = self.name()
            if direction not in ("up", "down"):
                self.error("chain_count direction must be 'up' or 'down'")
            self.next(")")
            return ChainCount(pred, seed, direction)
        if head == "distance":
            self.next("(")
            pos_pred = self.name()
            self.next(",")
            adj_pred = self.name()
            self.next(",")
            targets = self.targets()
            zero_if = None
            if self.peek() == ",":
                self.next()
                self.next("zero_if")
                self.next("(")
                zero_if = self.pattern()
                self.next(")")
            self.next(")")
            return Distance(pos_pred, adj_pred, targets, zero_if)
        if head == "builtin":
            self.next("(")
            name = self.name()
            self.next(")")
            return Builtin(name)
        if head == "sum":
            self.next("(")
            left = self.expr()
            self.next(",")
            right = self.expr()
            self.next(")")
            return Sum(left, right)
        if head == "nonzero":
            self.next("(")
            inner = self.expr()
            self.next(")")
            return Nonzero(inner)
        self.error(f"unknown expression '{head}'")

    def name(self) -> str:
        tok = self.next()
        if not re.fullmatch(r"\w+", tok):
            self.error(f"expected name, found '{tok}'")
        return tok.lower()

    def pattern(self) -> Pattern:
        pred = self.name()
        self.next("(")
        args = []
        if self.peek() != ")":
            args.append(self.next().lower())
            while self.peek() == ",":
                self.next()
                args.append(self.next().lower())
        self.next(")")
        return Pattern(pred, tuple(args))

    def targets(self):
        head = self.next()
        if head == "cells":
            self.next("(")
            objs = [self.name()]
            while self.peek() == ",":
                self.next()
                objs.append(self.name())
            self.next(")")
            return CellTargets(tuple(objs))
        if head == "cells_of":
            self.next("(")
            p = self.pattern()
            exclude = []
            if self.peek() == ",":
                self.next()
                self.next("not")
                exclude.append(self.name())
                while self.peek() == ",":
                    self.next()
                    exclude.append(self.name())
            self.next(")")
            return PatternTargets(p, tuple(exclude))
        self.error(f"expected cells(...) or cells_of(...), found '{head}'")


def parse_features(text: str) -> FeatureSet:
    features = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DECL_RE.match(line)
        if m is None:
            raise FeatureError(f"line {lineno}: expected 'feature NAME bool|num = EXPR'")
        name, kind, body = m.group(1), m.group(2), m.group(3)
        expr = _ExprParser(body, lineno).parse()
        features.append(Feature(name, kind, expr))
    return FeatureSet(features)
