"""Ground STRIPS state model: atoms, bit-vector states, actions, goal tests."""

from __future__ import annotations

from dataclasses import dataclass, field

# A state is an arbitrary-precision int used as a bit-vector over atom ids:
# bit i is set iff atom i holds.  Equality and hashing are structural, and
# set algebra becomes cheap mask arithmetic.
State = int


def state_from_atoms(atom_ids) -> State:
    s = 0
    for i in atom_ids:
        s |= 1 << i
    return s


def atoms_of(state: State) -> list[int]:
    """Atom ids set in `state`, ascending."""
    out = []
    while state:
        low = state & -state
        out.append(low.bit_length() - 1)
        state ^= low
    return out


@dataclass(frozen=True)
class GroundAtom:
    atom_id: int
    predicate: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(self.args)})"


@dataclass(frozen=True)
class GroundAction:
    """Fully instantiated action; pre/add/delete are atom-id bit masks."""

    action_id: int
    name: str
    args: tuple[str, ...]
    pre: State
    add: State
    delete: State

    def __str__(self) -> str:
        if self.args:
            return f"({self.name} {' '.join(self.args)})"
        return f"({self.name})"


@dataclass
class GroundProblem:
    """Immutable-after-construction ground model shared across searches."""

    name: str
    atoms: tuple[GroundAtom, ...]
    actions: tuple[GroundAction, ...]
    init: State
    goal_pos: State
    goal_neg: State
    objects: tuple[str, ...] = ()
    atom_index: dict[tuple[str, tuple[str, ...]], int] = field(default_factory=dict)
    atoms_by_predicate: dict[str, list[int]] = field(default_factory=dict)
    _watch_buckets: list[list[int]] | None = field(default=None, repr=False, compare=False)
    _watch_always: list[int] | None = field(default=None, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self.atom_index:
            self.atom_index = {(a.predicate, a.args): a.atom_id for a in self.atoms}
        if not self.atoms_by_predicate:
            by_pred: dict[str, list[int]] = {}
            for a in self.atoms:
                by_pred.setdefault(a.predicate, []).append(a.atom_id)
            self.atoms_by_predicate = by_pred

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def atom_id(self, predicate: str, args: tuple[str, ...]) -> int | None:
        return self.atom_index.get((predicate, args))

    def predicate_mask(self, predicate: str) -> State:
        key = ("pred_mask", predicate)
        mask = self._cache.get(key)
        if mask is None:
            mask = state_from_atoms(self.atoms_by_predicate.get(predicate, ()))
            self._cache[key] = mask
        return mask

    def state_str(self, state: State) -> str:
        return "{" + ", ".join(str(self.atoms[i]) for i in atoms_of(state)) + "}"

    def _build_watch_index(self):
        # Each action is filed under one of its precondition atoms (greedily
        # the least-loaded bucket) so applicability scans touch few candidates.
        buckets: list[list[int]] = [[] for _ in range(len(self.atoms))]
        always: list[int] = []
        for act in self.actions:
            pre_atoms = atoms_of(act.pre)
            if not pre_atoms:
                always.append(act.action_id)
                continue
            best = min(pre_atoms, key=lambda i: len(buckets[i]))
            buckets[best].append(act.action_id)
        self._watch_buckets = buckets
        self._watch_always = always


def applicable_actions(problem: GroundProblem, s: State) -> list[int]:
    """Action ids applicable in `s` (pre subset of s), ascending."""
    if problem._watch_buckets is None:
        problem._build_watch_index()
    buckets = problem._watch_buckets
    actions = problem.actions
    out = list(problem._watch_always)
    rest = s
    while rest:
        low = rest & -rest
        rest ^= low
        for aid in buckets[low.bit_length() - 1]:
            pre = actions[aid].pre
            if pre & s == pre:
                out.append(aid)
    out.sort()
    return out


def apply(problem: GroundProblem, s: State, action_id: int) -> State:
    """Successor state (s minus deletes, plus adds); rejects inapplicable actions."""
    act = problem.actions[action_id]
    if act.pre & s != act.pre:
        raise ValueError(
            f"action {act} not applicable: unsatisfied precondition in {problem.state_str(s)}"
        )
    return (s & ~act.delete) | act.add


def is_goal(problem: GroundProblem, s: State) -> bool:
    return (s & problem.goal_pos) == problem.goal_pos and not (s & problem.goal_neg)


def replay(problem: GroundProblem, plan: list[int], start: State | None = None) -> list[State]:
    """States visited by `plan` from `start` (default init), validating each step."""
    s = problem.init if start is None else start
    states = [s]
    for aid in plan:
        s = apply(problem, s, aid)
        states.append(s)
    return states
