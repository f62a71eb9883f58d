"""Instance generators for the built-in families: Blocksworld (clear-goal,
on-goal, general), Grid with one or two position predicates, Delivery,
Marbles, and Towers of Hanoi with a move-alternation atom.

Each generator returns a Bundle of texts: domain and problem in the PDDL
subset, a feature bundle, named sketches, and (for the blocks families)
explicit tuple-set files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .pddl import ActionSchema, DomainAst, GroundAtomAst, ProblemAst, SchemaAtom
from .pddl import format_domain, format_problem


class DomainError(ValueError):
    pass


@dataclass
class Bundle:
    family: str
    domain_text: str
    problem_text: str
    features_text: str | None = None
    sketches: dict[str, str] = field(default_factory=dict)
    tuple_sets: dict[str, str] = field(default_factory=dict)


def _atom(pred: str, *args: str) -> SchemaAtom:
    return SchemaAtom(pred, tuple(args))


def _ga(pred: str, *args: str) -> GroundAtomAst:
    return GroundAtomAst(pred, tuple(args))


# ---------------------------------------------------------------------------
# Blocksworld (four schemas: pickup, putdown, stack, unstack)

_BLOCKS_DOMAIN = DomainAst(
    name="blocks",
    predicates=(("on", 2), ("ontable", 1), ("clear", 1), ("hold", 1), ("handempty", 0)),
    schemas=(
        ActionSchema(
            "pickup",
            ("?x",),
            pre=(_atom("clear", "?x"), _atom("ontable", "?x"), _atom("handempty")),
            add=(_atom("hold", "?x"),),
            delete=(_atom("clear", "?x"), _atom("ontable", "?x"), _atom("handempty")),
        ),
        ActionSchema(
            "putdown",
            ("?x",),
            pre=(_atom("hold", "?x"),),
            add=(_atom("clear", "?x"), _atom("ontable", "?x"), _atom("handempty")),
            delete=(_atom("hold", "?x"),),
        ),
        ActionSchema(
            "stack",
            ("?x", "?y"),
            pre=(_atom("hold", "?x"), _atom("clear", "?y")),
            add=(_atom("on", "?x", "?y"), _atom("clear", "?x"), _atom("handempty")),
            delete=(_atom("hold", "?x"), _atom("clear", "?y")),
        ),
        ActionSchema(
            "unstack",
            ("?x", "?y"),
            pre=(_atom("clear", "?x"), _atom("on", "?x", "?y"), _atom("handempty")),
            add=(_atom("hold", "?x"), _atom("clear", "?y")),
            delete=(_atom("clear", "?x"), _atom("on", "?x", "?y"), _atom("handempty")),
        ),
    ),
)


def blocks(
    towers: list[list[str]],
    goal: tuple[str, ...],
    holding: str | None = None,
    name: str = "blocks-instance",
) -> Bundle:
    """General Blocksworld instance. `towers` lists blocks bottom-up; `goal`
    is ('clear', x) or ('on', x, y); `holding` puts a block in the gripper."""
    blocks_all = [b for t in towers for b in t] + ([holding] if holding else [])
    if len(set(blocks_all)) != len(blocks_all):
        raise DomainError("duplicate block names")
    init: list[GroundAtomAst] = []
    for tower in towers:
        if not tower:
            raise DomainError("empty tower")
        init.append(_ga("ontable", tower[0]))
        for below, above in zip(tower, tower[1:]):
            init.append(_ga("on", above, below))
        init.append(_ga("clear", tower[-1]))
    if holding:
        init.append(_ga("hold", holding))
    else:
        init.append(_ga("handempty"))
    if goal[0] == "clear":
        goal_pos = (_ga("clear", goal[1]),)
    elif goal[0] == "on":
        goal_pos = (_ga("on", goal[1], goal[2]),)
    else:
        raise DomainError(f"unsupported blocks goal {goal!r}")
    problem = ProblemAst(
        name, "blocks", tuple(sorted(blocks_all)), tuple(init), goal_pos, ()
    )
    return Bundle(
        "blocks", format_domain(_BLOCKS_DOMAIN), format_problem(problem)
    )


def blocks_clear(height: int, holding: str | None = None) -> Bundle:
    """Clear-goal instance: blocks b1 (top) .. b<height> stacked above x.

    Emits the singleton tuple set that walks the stack down block by block;
    when a block starts in the gripper it must first reach the table, so the
    set gains that block's ontable atom.
    """
    if height < 1:
        raise DomainError("height must be >= 1")
    above = [f"b{i}" for i in range(1, height + 1)]  # b1 topmost
    tower = ["x"] + list(reversed(above))
    bundle = blocks([tower], ("clear", "x"), holding=holding, name=f"clear-{height}")
    bundle.family = "blocks-clear"
    bundle.features_text = (
        "feature H bool = nonzero(count(hold(_)))\n"
        "feature n num = chain_count(on, x, up)\n"
    )
    bundle.sketches["policy"] = (
        "features { H: bool; n: num; }\n"
        "rules { { !H, n>0 } => { H, n-- }; { H } => { !H }; }\n"
    )
    lines = []
    if holding:
        lines.append(f"ontable({holding})")
    lines.append(f"clear({above[0]})")
    for i, b in enumerate(above, start=1):
        lines.append(f"hold({b})")
        if i < height:
            lines.append(f"ontable({b})")
    bundle.tuple_sets["walk"] = "\n".join(lines) + "\n"
    return bundle


def blocks_on(above_x: int, above_y: int) -> Bundle:
    """On-goal instance with x and y in different towers, `above_x` blocks
    over x (b1 topmost) and `above_y` over y (d1 topmost); goal on(x, y)."""
    bs = [f"b{i}" for i in range(1, above_x + 1)]
    ds = [f"d{i}" for i in range(1, above_y + 1)]
    tower_x = ["x"] + list(reversed(bs))
    tower_y = ["y"] + list(reversed(ds))
    bundle = blocks(
        [tower_x, tower_y], ("on", "x", "y"), name=f"on-{above_x}-{above_y}"
    )
    bundle.family = "blocks-on"
    if above_x >= 1 and above_y >= 1:
        # Pairs pin the phase order: clearing x must keep the top of y free,
        # and unloading y must leave the last x-block on the table, so every
        # equal-cost "parking" variant still extends along the chain.
        last_b = bs[-1]
        lines = [f"clear({bs[0]})"]
        for b in bs:
            lines.append(f"hold({b}) & clear({ds[0]})")
            lines.append(f"ontable({b}) & clear({ds[0]})")
        for d in ds:
            lines.append(f"hold({d}) & ontable({last_b})")
            lines.append(f"ontable({d}) & ontable({last_b})")
        lines.append("hold(x) & clear(y)")
        lines.append("on(x,y)")
        bundle.tuple_sets["walk"] = "\n".join(lines) + "\n"
    return bundle


# ---------------------------------------------------------------------------
# Grid: cells c1..cN row-major, one position predicate


def _grid_cells(width: int, height: int) -> list[str]:
    return [f"c{i}" for i in range(1, width * height + 1)]


def _grid_adjacency(width: int, height: int) -> list[tuple[str, str]]:
    pairs = []
    for row in range(height):
        for col in range(width):
            i = row * width + col + 1
            if col + 1 < width:
                pairs.append((f"c{i}", f"c{i + 1}"))
                pairs.append((f"c{i + 1}", f"c{i}"))
            if row + 1 < height:
                j = i + width
                pairs.append((f"c{i}", f"c{j}"))
                pairs.append((f"c{j}", f"c{i}"))
    return pairs


_GRID_DOMAIN = DomainAst(
    name="grid",
    predicates=(("pos", 1), ("adjacent", 2)),
    schemas=(
        ActionSchema(
            "move",
            ("?from", "?to"),
            pre=(_atom("pos", "?from"), _atom("adjacent", "?from", "?to")),
            add=(_atom("pos", "?to"),),
            delete=(_atom("pos", "?from"),),
        ),
    ),
)


def grid(width: int, height: int, start: int, goal: int) -> Bundle:
    cells = _grid_cells(width, height)
    if not (1 <= start <= len(cells) and 1 <= goal <= len(cells)):
        raise DomainError("start/goal cell out of range")
    init = [_ga("pos", f"c{start}")]
    init += [_ga("adjacent", a, b) for a, b in _grid_adjacency(width, height)]
    problem = ProblemAst(
        f"grid-{width}x{height}", "grid", tuple(cells), tuple(init),
        (_ga("pos", f"c{goal}"),), (),
    )
    bundle = Bundle("grid", format_domain(_GRID_DOMAIN), format_problem(problem))
    bundle.features_text = f"feature d num = distance(pos, adjacent, cells(c{goal}))\n"
    bundle.sketches["policy"] = (
        "features { d: num; }\nrules { { d>0 } => { d-- }; }\n"
    )
    return bundle


_GRID2_DOMAIN = DomainAst(
    name="grid2",
    predicates=(("hpos", 1), ("vpos", 1), ("hadj", 2), ("vadj", 2)),
    schemas=(
        ActionSchema(
            "moveh",
            ("?from", "?to"),
            pre=(_atom("hpos", "?from"), _atom("hadj", "?from", "?to")),
            add=(_atom("hpos", "?to"),),
            delete=(_atom("hpos", "?from"),),
        ),
        ActionSchema(
            "movev",
            ("?from", "?to"),
            pre=(_atom("vpos", "?from"), _atom("vadj", "?from", "?to")),
            add=(_atom("vpos", "?to"),),
            delete=(_atom("vpos", "?from"),),
        ),
    ),
)


def grid2(
    width: int, height: int, start: tuple[int, int], goal: tuple[int, int]
) -> Bundle:
    """Grid with split horizontal/vertical position coordinates."""
    hs = [f"h{i}" for i in range(1, width + 1)]
    vs = [f"v{i}" for i in range(1, height + 1)]
    init = [_ga("hpos", f"h{start[0]}"), _ga("vpos", f"v{start[1]}")]
    for i in range(1, width):
        init += [_ga("hadj", f"h{i}", f"h{i + 1}"), _ga("hadj", f"h{i + 1}", f"h{i}")]
    for i in range(1, height):
        init += [_ga("vadj", f"v{i}", f"v{i + 1}"), _ga("vadj", f"v{i + 1}", f"v{i}")]
    problem = ProblemAst(
        f"grid2-{width}x{height}", "grid2", tuple(hs + vs), tuple(init),
        (_ga("hpos", f"h{goal[0]}"), _ga("vpos", f"v{goal[1]}")), (),
    )
    bundle = Bundle("grid2", format_domain(_GRID2_DOMAIN), format_problem(problem))
    bundle.features_text = (
        "feature d num = sum(distance(hpos, hadj, cells(h{0})), "
        "distance(vpos, vadj, cells(v{1})))\n".format(goal[0], goal[1])
    )
    bundle.sketches["policy"] = (
        "features { d: num; }\nrules { { d>0 } => { d-- }; }\n"
    )
    return bundle


# ---------------------------------------------------------------------------
# Delivery: agent and packages on a grid, all packages to one target cell

_DELIVERY_DOMAIN = DomainAst(
    name="delivery",
    predicates=(
        ("pos", 1), ("ppos", 2), ("holding", 1), ("empty", 0), ("adjacent", 2),
    ),
    schemas=(
        ActionSchema(
            "move",
            ("?from", "?to"),
            pre=(_atom("pos", "?from"), _atom("adjacent", "?from", "?to")),
            add=(_atom("pos", "?to"),),
            delete=(_atom("pos", "?from"),),
        ),
        ActionSchema(
            "pick",
            ("?p", "?c"),
            pre=(_atom("pos", "?c"), _atom("ppos", "?p", "?c"), _atom("empty")),
            add=(_atom("holding", "?p"),),
            delete=(_atom("ppos", "?p", "?c"), _atom("empty")),
        ),
        ActionSchema(
            "drop",
            ("?p", "?c"),
            pre=(_atom("pos", "?c"), _atom("holding", "?p")),
            add=(_atom("ppos", "?p", "?c"), _atom("empty")),
            delete=(_atom("holding", "?p"),),
        ),
    ),
)

_DELIVERY_RULES = {
    "r0": "",
    "r1": "{ H } => { !H, p?, t? };",
    "r2": "{ !H } => { H, p?, t? };",
    "r3": "{ H } => { !H, p?, t? }; { !H } => { H, p?, t? };",
    "r4": "{ u>0 } => { u--, H?, p?, t? };",
    "r5": "{ !H } => { H, p?, t? }; { u>0 } => { u--, H?, p?, t? };",
    "r6": "{ !H, p>0 } => { p--, t? };",
    "r7": "{ H, t>0 } => { t--, p? };",
    "r8": (
        "{ !H } => { H, p?, t? }; { u>0 } => { u--, H?, p?, t? }; "
        "{ !H, p>0 } => { p--, t? }; { H, t>0 } => { t--, p? };"
    ),
    "policy": (
        "{ !H, p>0 } => { p--, t? }; { !H, p=0 } => { H }; "
        "{ H, t>0 } => { t-- }; { H, t=0, u>0 } => { !H, u--, p? };"
    ),
}


def delivery(
    width: int, height: int, packages: list[int], target: int, start: int
) -> Bundle:
    """Delivery instance; `packages` lists the start cell of each package."""
    cells = _grid_cells(width, height)
    names = [f"p{i}" for i in range(1, len(packages) + 1)]
    for c in packages + [target, start]:
        if not 1 <= c <= len(cells):
            raise DomainError(f"cell index {c} out of range")
    init = [_ga("pos", f"c{start}"), _ga("empty")]
    init += [_ga("ppos", p, f"c{c}") for p, c in zip(names, packages)]
    init += [_ga("adjacent", a, b) for a, b in _grid_adjacency(width, height)]
    goal = tuple(_ga("ppos", p, f"c{target}") for p in names)
    problem = ProblemAst(
        f"delivery-{width}x{height}-{len(packages)}",
        "delivery",
        tuple(sorted(cells + names)),
        tuple(init),
        goal,
        (),
    )
    bundle = Bundle("delivery", format_domain(_DELIVERY_DOMAIN), format_problem(problem))
    tgt = f"c{target}"
    bundle.features_text = (
        "feature H bool = nonzero(count(holding(_)))\n"
        f"feature p num = distance(pos, adjacent, cells_of(ppos(_, _), not {tgt}), "
        "zero_if(holding(_)))\n"
        f"feature t num = distance(pos, adjacent, cells({tgt}))\n"
        f"feature u num = missing(ppos(_, {tgt}), {', '.join(names)})\n"
    )
    header = "features { H: bool; p: num; t: num; u: num; }\n"
    for key, body in _DELIVERY_RULES.items():
        bundle.sketches[key] = header + "rules { " + body + " }\n"
    return bundle


# ---------------------------------------------------------------------------
# Marbles: boxes leave the table once emptied of marbles

_MARBLES_DOMAIN = DomainAst(
    name="marbles",
    predicates=(("ontable", 1), ("in", 2), ("cnt", 2), ("succ", 2), ("zero", 1)),
    schemas=(
        ActionSchema(
            "take",
            ("?r", "?b", "?k", "?j"),
            pre=(_atom("in", "?r", "?b"), _atom("cnt", "?b", "?k"), _atom("succ", "?j", "?k")),
            add=(_atom("cnt", "?b", "?j"),),
            delete=(_atom("in", "?r", "?b"), _atom("cnt", "?b", "?k")),
        ),
        ActionSchema(
            "remove_box",
            ("?b", "?k"),
            pre=(_atom("ontable", "?b"), _atom("cnt", "?b", "?k"), _atom("zero", "?k")),
            add=(),
            delete=(_atom("ontable", "?b"),),
        ),
    ),
)


def marbles(counts: list[int]) -> Bundle:
    """One box per entry of `counts`, holding that many marbles; the goal is
    a conjunction of negated ontable atoms, so this is not plain STRIPS."""
    if not counts or any(c < 0 for c in counts):
        raise DomainError("counts must be non-negative, at least one box")
    boxes = [f"b{i}" for i in range(1, len(counts) + 1)]
    top = max(counts)
    markers = [f"n{i}" for i in range(top + 1)]
    marble_names = []
    init = [_ga("zero", "n0")]
    for i in range(top):
        init.append(_ga("succ", f"n{i}", f"n{i + 1}"))
    ridx = 0
    for b, c in zip(boxes, counts):
        init.append(_ga("ontable", b))
        init.append(_ga("cnt", b, f"n{c}"))
        for _ in range(c):
            ridx += 1
            marble_names.append(f"r{ridx}")
            init.append(_ga("in", f"r{ridx}", b))
    objects = tuple(sorted(boxes + markers + marble_names))
    problem = ProblemAst(
        f"marbles-{'-'.join(map(str, counts))}", "marbles", objects, tuple(init),
        (), tuple(_ga("ontable", b) for b in boxes),
    )
    bundle = Bundle("marbles", format_domain(_MARBLES_DOMAIN), format_problem(problem))
    bundle.features_text = (
        "feature n num = count(ontable(_))\n"
        "feature m num = builtin(marbles_first_box)\n"
    )
    bundle.sketches["policy"] = (
        "features { n: num; m: num; }\n"
        "rules { { m>0 } => { m-- }; { m=0, n>0 } => { n--, m? }; }\n"
    )
    return bundle


# ---------------------------------------------------------------------------
# Towers of Hanoi with a parity atom alternating between disk classes

_HANOI_DOMAIN = DomainAst(
    name="hanoi",
    predicates=(("on", 2), ("clear", 1), ("smaller", 2), ("e", 0), ("o", 0)),
    schemas=(
        ActionSchema(
            "move_e",
            ("?d", "?from", "?to"),
            pre=(
                _atom("e"), _atom("on", "?d", "?from"), _atom("clear", "?d"),
                _atom("clear", "?to"), _atom("smaller", "?d", "?to"),
            ),
            add=(_atom("o"), _atom("on", "?d", "?to"), _atom("clear", "?from")),
            delete=(_atom("e"), _atom("on", "?d", "?from"), _atom("clear", "?to")),
        ),
        ActionSchema(
            "move_o",
            ("?d", "?from", "?to"),
            pre=(
                _atom("o"), _atom("on", "?d", "?from"), _atom("clear", "?d"),
                _atom("clear", "?to"), _atom("smaller", "?d", "?to"),
            ),
            add=(_atom("e"), _atom("on", "?d", "?to"), _atom("clear", "?from")),
            delete=(_atom("o"), _atom("on", "?d", "?from"), _atom("clear", "?to")),
        ),
    ),
)

_HANOI_POLICY = (
    "features { q: bool; p12: bool; p13: bool; p23: bool; }\n"
    "rules {\n"
    "  # smallest disk moves, always one peg to the left\n"
    "  { q, p12, p13 } => { !q, p12?, !p13, !p23 };\n"
    "  { q, !p12, p23 } => { !q, p12, p13, p23? };\n"
    "  { q, !p13, !p23 } => { !q, !p12, p13?, p23 };\n"
    "  # the other disk takes its only legal move\n"
    "  { !q, p12, p13, p23 } => { q, !p23 };\n"
    "  { !q, p12, p13, !p23 } => { q, p23 };\n"
    "  { !q, !p12, p13, p23 } => { q, !p13 };\n"
    "  { !q, !p12, !p13, p23 } => { q, p13 };\n"
    "  { !q, p12, !p13, !p23 } => { q, !p12 };\n"
    "  { !q, !p12, !p13, !p23 } => { q, p12 };\n"
    "}\n"
)


def hanoi(n_disks: int, from_peg: int = 1, to_peg: int = 3) -> Bundle:
    """Single tower of `n_disks` (d1 smallest) moved between pegs 1..3; the
    atom `e` is true initially and flips with every move."""
    if n_disks < 1:
        raise DomainError("need at least one disk")
    if not (1 <= from_peg <= 3 and 1 <= to_peg <= 3 and from_peg != to_peg):
        raise DomainError("pegs must be distinct and in 1..3")
    disks = [f"d{i}" for i in range(1, n_disks + 1)]
    pegs = [f"peg{i}" for i in (1, 2, 3)]
    init = [_ga("e")]
    for i in range(1, n_disks + 1):
        for j in range(i + 1, n_disks + 1):
            init.append(_ga("smaller", f"d{i}", f"d{j}"))
        for p in pegs:
            init.append(_ga("smaller", f"d{i}", p))
    src = f"peg{from_peg}"
    init.append(_ga("on", disks[-1], src))
    for upper, lower in zip(disks, disks[1:]):
        init.append(_ga("on", upper, lower))
    init.append(_ga("clear", disks[0]))
    for p in pegs:
        if p != src:
            init.append(_ga("clear", p))
    dst = f"peg{to_peg}"
    goal = [_ga("on", disks[-1], dst)]
    goal += [_ga("on", upper, lower) for upper, lower in zip(disks, disks[1:])]
    problem = ProblemAst(
        f"hanoi-{n_disks}", "hanoi", tuple(sorted(disks + pegs)), tuple(init),
        tuple(goal), (),
    )
    bundle = Bundle("hanoi", format_domain(_HANOI_DOMAIN), format_problem(problem))
    bundle.features_text = (
        "feature q bool = builtin(hanoi_parity)\n"
        "feature p12 bool = builtin(hanoi_p12)\n"
        "feature p13 bool = builtin(hanoi_p13)\n"
        "feature p23 bool = builtin(hanoi_p23)\n"
    )
    bundle.sketches["policy"] = _HANOI_POLICY
    return bundle


def hanoi_odd(n_disks: int) -> Bundle:
    """Odd-disk-count selector: the alternation policy then moves the tower
    from peg 1 to peg 3."""
    if n_disks % 2 != 1:
        raise DomainError("instance selector requires an odd number of disks")
    return hanoi(n_disks, from_peg=1, to_peg=3)


# ---------------------------------------------------------------------------
# CLI dispatch


def generate(family: str, params: dict[str, str]) -> Bundle:
    def ints(key, default=None):
        if key not in params:
            if default is None:
                raise DomainError(f"missing parameter '{key}'")
            return default
        return int(params[key])

    if family == "blocks-clear":
        held = params.get("held")
        return blocks_clear(ints("l"), holding=held)
    if family == "blocks-on":
        return blocks_on(ints("l"), ints("m"))
    if family == "blocks":
        towers = [t.split(".") for t in params["towers"].split(";") if t]
        goal = tuple(params["goal"].replace(":", ",").split(","))
        return blocks(towers, goal, holding=params.get("held"))
    if family == "grid":
        return grid(ints("width"), ints("height"), ints("start"), ints("goal"))
    if family == "grid2":
        sx, sy = (int(v) for v in params["start"].split(","))
        gx, gy = (int(v) for v in params["goal"].split(","))
        return grid2(ints("width"), ints("height"), (sx, sy), (gx, gy))
    if family == "delivery":
        cells = [int(v) for v in params["packages"].split(",") if v]
        return delivery(ints("width"), ints("height"), cells, ints("target"), ints("start"))
    if family == "marbles":
        counts = [int(v) for v in params["counts"].split(",") if v]
        return marbles(counts)
    if family == "hanoi":
        return hanoi(ints("n"), ints("from", 1), ints("to", 3))
    raise DomainError(f"unknown family '{family}'")
