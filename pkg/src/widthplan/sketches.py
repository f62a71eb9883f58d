"""Condition->effect rules over features, their pair semantics, the Boolean
policy graph, and the SCC-based termination check (sieve).

Sketch file grammar (bit-exact tokens, `#` comments):

    features { H: bool; n: num; }
    rules { { !H, n>0 } => { H, n-- }; { H } => { !H }; }

Condition tokens: `p`, `!p`, `n=0`, `n>0`.
Effect tokens: `p`, `!p`, `p?`, `n++`, `n--`, `n?`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

# condition ops
POS, NEG, EQ0, GT0 = "pos", "neg", "eq0", "gt0"
# effect ops
SET, UNSET, ANYBOOL, INC, DEC, ANYNUM = "set", "unset", "anybool", "inc", "dec", "anynum"

_BOOL_CONDS = {POS, NEG}
_NUM_CONDS = {EQ0, GT0}
_BOOL_EFFS = {SET, UNSET, ANYBOOL}
_NUM_EFFS = {INC, DEC, ANYNUM}


class SketchError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    conditions: tuple[tuple[int, str], ...]  # (feature index, condition op)
    effects: tuple[tuple[int, str], ...]  # (feature index, effect op)


@dataclass(frozen=True)
class SketchFeature:
    name: str
    kind: str  # "bool" | "num"


@dataclass(frozen=True)
class Sketch:
    features: tuple[SketchFeature, ...]
    rules: tuple[Rule, ...]

    @property
    def names_kinds(self) -> list[tuple[str, str]]:
        return [(f.name, f.kind) for f in self.features]

    def numeric_indices(self) -> list[int]:
        return [i for i, f in enumerate(self.features) if f.kind == "num"]


def pair_satisfies(rule: Rule, fs: tuple[int, ...], fs2: tuple[int, ...]) -> bool:
    """True iff `fs` meets the conditions and the change to `fs2` matches the
    effects; features unmentioned in the effects must keep their value."""
    for i, op in rule.conditions:
        v = fs[i]
        if op == POS and not v:
            return False
        if op == NEG and v:
            return False
        if op == EQ0 and v != 0:
            return False
        if op == GT0 and v <= 0:
            return False
    mentioned = 0
    for i, op in rule.effects:
        mentioned |= 1 << i
        v, w = fs[i], fs2[i]
        if op == SET and w != 1:
            return False
        if op == UNSET and w != 0:
            return False
        if op == INC and not w > v:
            return False
        if op == DEC and not w < v:
            return False
        # ANYBOOL / ANYNUM are unconstrained
    for i in range(len(fs)):
        if not (mentioned >> i) & 1 and fs[i] != fs2[i]:
            return False
    return True


def relation(sketch: Sketch, fs: tuple[int, ...], fs2: tuple[int, ...]) -> bool:
    """The subgoal relation: some rule is compatible with the valuation pair."""
    return any(pair_satisfies(rule, fs, fs2) for rule in sketch.rules)


# ---------------------------------------------------------------------------
# Policy graph over Boolean condition valuations

# Vertices are bit masks over the sketch features: for a Boolean feature the
# bit is its truth value, for a numerical feature the bit encodes `n = 0`.


@dataclass
class PolicyGraph:
    sketch: Sketch
    n_vertices: int
    edges: list[tuple[int, int, int]]  # (source vertex, target vertex, rule index)

    def edge_label(self, edge_idx: int) -> tuple[tuple[int, str], ...]:
        return self.sketch.rules[self.edges[edge_idx][2]].effects


def build_policy_graph(sketch: Sketch, max_features: int = 16) -> PolicyGraph:
    n = len(sketch.features)
    if n > max_features:
        raise SketchError(f"{n} features exceed the policy-graph cap {max_features}")
    kinds = [f.kind for f in sketch.features]
    edges: list[tuple[int, int, int]] = []
    for ridx, rule in enumerate(sketch.rules):
        eff = dict(rule.effects)
        for v in range(1 << n):
            if not _vertex_satisfies(rule, v, kinds):
                continue
            # Determine target bits: fixed, copied, or free.
            fixed_mask = 0
            fixed_val = 0
            free_mask = 0
            ok = True
            for i in range(n):
                bit = (v >> i) & 1
                op = eff.get(i)
                if op is None:
                    fixed_mask |= 1 << i
                    fixed_val |= bit << i
                elif op == SET:
                    fixed_mask |= 1 << i
                    fixed_val |= 1 << i
                elif op == UNSET:
                    fixed_mask |= 1 << i
                elif op == INC:
                    # target value is positive, so its n=0 bit is false
                    fixed_mask |= 1 << i
                elif op == DEC:
                    if bit:  # source requires n > 0
                        ok = False
                        break
                    free_mask |= 1 << i
                else:  # ANYBOOL / ANYNUM
                    free_mask |= 1 << i
            if not ok:
                continue
            sub = free_mask
            while True:
                edges.append((v, fixed_val | sub, ridx))
                if sub == 0:
                    break
                sub = (sub - 1) & free_mask
    edges.sort()
    return PolicyGraph(sketch, 1 << n, edges)


def _vertex_satisfies(rule: Rule, v: int, kinds: list[str]) -> bool:
    for i, op in rule.conditions:
        bit = (v >> i) & 1
        if op in (POS, EQ0) and not bit:
            return False
        if op in (NEG, GT0) and bit:
            return False
    return True


# ---------------------------------------------------------------------------
# Tarjan SCC (iterative) and the sieve termination check


def strongly_connected_components(
    n_vertices: int, successors: list[list[int]]
) -> list[list[int]]:
    """SCCs in deterministic order (roots visited in ascending vertex order)."""
    index = [-1] * n_vertices
    lowlink = [0] * n_vertices
    on_stack = [False] * n_vertices
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0

    for root in range(n_vertices):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            succ = successors[v]
            while pi < len(succ):
                w = succ[pi]
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if lowlink[v] == index[v]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    scc.append(w)
                    if w == v:
                        break
                scc.sort()
                sccs.append(scc)
            if work:
                u, _ = work[-1]
                lowlink[u] = min(lowlink[u], lowlink[v])
    return sccs


@dataclass
class SieveStep:
    component: tuple[int, ...]
    feature: int
    removed_edges: tuple[int, ...]  # indices into PolicyGraph.edges


@dataclass
class SieveResult:
    accepted: bool
    steps: list[SieveStep] = field(default_factory=list)
    remaining_edges: list[int] = field(default_factory=list)


def sieve(graph: PolicyGraph, choice=None) -> SieveResult:
    """Repeatedly drop, inside one SCC at a time, all edges decrementing a
    numerical feature that no edge of that SCC increments or leaves unknown;
    accept iff the graph becomes acyclic.

    `choice` picks among candidate (component, feature) moves (default: first
    in deterministic order); any choice leads to the same verdict.
    """
    sketch = graph.sketch
    numeric = sketch.numeric_indices()
    alive = [True] * len(graph.edges)
    steps: list[SieveStep] = []

    while True:
        succ: list[list[int]] = [[] for _ in range(graph.n_vertices)]
        for idx, (u, v, _r) in enumerate(graph.edges):
            if alive[idx]:
                succ[u].append(v)
        sccs = strongly_connected_components(graph.n_vertices, succ)
        comp_of = [0] * graph.n_vertices
        for ci, scc in enumerate(sccs):
            for v in scc:
                comp_of[v] = ci

        internal: dict[int, list[int]] = {}
        for idx, (u, v, _r) in enumerate(graph.edges):
            if alive[idx] and comp_of[u] == comp_of[v]:
                internal.setdefault(comp_of[u], []).append(idx)
        if not internal:  # acyclic: no SCC has an internal edge
            break

        candidates = []
        for ci in sorted(internal, key=lambda c: sccs[c][0]):
            edge_idxs = internal[ci]
            for n in numeric:
                dec_edges = []
                blocked = False
                for idx in edge_idxs:
                    ops = dict(graph.edge_label(idx))
                    op = ops.get(n)
                    if op == DEC:
                        dec_edges.append(idx)
                    elif op in (INC, ANYNUM):
                        blocked = True
                        break
                if not blocked and dec_edges:
                    candidates.append((tuple(sccs[ci]), n, tuple(dec_edges)))
        if not candidates:
            return SieveResult(False, steps, [i for i, a in enumerate(alive) if a])

        comp, feat, removed = candidates[0] if choice is None else choice(candidates)
        for idx in removed:
            alive[idx] = False
        steps.append(SieveStep(comp, feat, removed))

    return SieveResult(True, steps, [i for i, a in enumerate(alive) if a])


# ---------------------------------------------------------------------------
# Parsing

_NAME_RE = re.compile(r"[A-Za-z_]\w*")


class _Lexer:
    SYMBOLS = ("=>", "++", "--", "=0", ">0", "{", "}", ";", ",", ":", "?", "!")

    def __init__(self, text: str):
        self.toks: list[tuple[str, int]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0]
            i = 0
            while i < len(line):
                c = line[i]
                if c.isspace():
                    i += 1
                    continue
                for sym in self.SYMBOLS:
                    if line.startswith(sym, i):
                        self.toks.append((sym, lineno))
                        i += len(sym)
                        break
                else:
                    m = _NAME_RE.match(line, i)
                    if m is None:
                        raise SketchError(f"line {lineno}: bad character '{c}'")
                    self.toks.append((m.group(0), lineno))
                    i = m.end()
        self.pos = 0

    def peek(self) -> str | None:
        return self.toks[self.pos][0] if self.pos < len(self.toks) else None

    def next(self, expect: str | None = None) -> str:
        if self.pos >= len(self.toks):
            raise SketchError("unexpected end of sketch text")
        tok, lineno = self.toks[self.pos]
        if expect is not None and tok != expect:
            raise SketchError(f"line {lineno}: expected '{expect}', found '{tok}'")
        self.pos += 1
        return tok


def parse_sketch(text: str) -> Sketch:
    lex = _Lexer(text)
    lex.next("features")
    lex.next("{")
    features: list[SketchFeature] = []
    by_name: dict[str, int] = {}
    while lex.peek() != "}":
        name = lex.next()
        if not _NAME_RE.fullmatch(name):
            raise SketchError(f"bad feature name '{name}'")
        lex.next(":")
        kind = lex.next()
        if kind not in ("bool", "num"):
            raise SketchError(f"feature '{name}': kind must be bool or num, not '{kind}'")
        lex.next(";")
        if name in by_name:
            raise SketchError(f"duplicate feature '{name}'")
        by_name[name] = len(features)
        features.append(SketchFeature(name, kind))
    lex.next("}")

    lex.next("rules")
    lex.next("{")
    rules: list[Rule] = []
    while lex.peek() != "}":
        rules.append(_parse_rule(lex, features, by_name))
    lex.next("}")
    if lex.peek() is not None:
        raise SketchError(f"trailing token '{lex.peek()}'")
    return Sketch(tuple(features), tuple(rules))


def _parse_rule(lex: _Lexer, features, by_name) -> Rule:
    conditions = _parse_side(lex, features, by_name, effects=False)
    lex.next("=>")
    effects = _parse_side(lex, features, by_name, effects=True)
    lex.next(";")
    return Rule(tuple(sorted(conditions.items())), tuple(sorted(effects.items())))


def _parse_side(lex: _Lexer, features, by_name, effects: bool) -> dict[int, str]:
    lex.next("{")
    out: dict[int, str] = {}
    while lex.peek() != "}":
        negated = False
        if lex.peek() == "!":
            lex.next()
            negated = True
        name = lex.next()
        idx = by_name.get(name)
        if idx is None:
            raise SketchError(f"undeclared feature '{name}'")
        kind = features[idx].kind
        suffix = lex.peek()
        if negated:
            op = UNSET if effects else NEG
        elif suffix == "?" :
            lex.next()
            op = ANYBOOL if kind == "bool" else ANYNUM
            if not effects:
                raise SketchError(f"'{name}?' is only valid as an effect")
        elif suffix == "++":
            lex.next()
            op = INC
        elif suffix == "--":
            lex.next()
            op = DEC
        elif suffix == "=0":
            lex.next()
            op = EQ0
        elif suffix == ">0":
            lex.next()
            op = GT0
        else:
            op = SET if effects else POS
        _check_op(name, kind, op, effects)
        if idx in out:
            raise SketchError(f"feature '{name}' mentioned twice on one rule side")
        out[idx] = op
        if lex.peek() == ",":
            lex.next()
    lex.next("}")
    return out


def _check_op(name: str, kind: str, op: str, effects: bool):
    if effects:
        valid = _BOOL_EFFS if kind == "bool" else _NUM_EFFS
        side = "effect"
    else:
        valid = _BOOL_CONDS if kind == "bool" else _NUM_CONDS
        side = "condition"
    if op not in valid:
        raise SketchError(f"'{name}' ({kind}): invalid {side} form")


def format_sketch(sketch: Sketch) -> str:
    feats = " ".join(f"{f.name}: {f.kind};" for f in sketch.features)
    cond_txt = {POS: "{0}", NEG: "!{0}", EQ0: "{0}=0", GT0: "{0}>0"}
    eff_txt = {SET: "{0}", UNSET: "!{0}", ANYBOOL: "{0}?", INC: "{0}++", DEC: "{0}--", ANYNUM: "{0}?"}
    rule_texts = []
    for rule in sketch.rules:
        conds = ", ".join(cond_txt[op].format(sketch.features[i].name) for i, op in rule.conditions)
        effs = ", ".join(eff_txt[op].format(sketch.features[i].name) for i, op in rule.effects)
        rule_texts.append(f"{{ {conds} }} => {{ {effs} }};")
    rules = " ".join(rule_texts)
    return f"features {{ {feats} }}\nrules {{ {rules} }}\n"
