"""Brute-force verification on exhaustively enumerable instances: optimal
costs, optimal-state sets for tuples, cost-envelopes, admissibility of tuple
sets, width lower bounds, the effective-width surrogate, feature-acyclicity,
and sketch width over the induced subproblem family.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .features import FeatureSet
from .novelty import TupleSet
from .search import GoalTest, bfs_optimal, iw_k
from .siw import bind
from .sketches import Sketch, pair_satisfies
from .strips import GroundProblem, State, applicable_actions, is_goal


class OracleError(ValueError):
    pass


DEFAULT_CAP = 200_000


@dataclass
class StateSpace:
    """Forward closure of the reachable states with cost maps.

    `cost_star` equals `cost` on non-goal states and the problem cost on goal
    states.  Successor lists are recomputed on demand to keep memory linear
    in the number of states.
    """

    problem: GroundProblem
    start: State
    states: list[State]
    index: dict[State, int]
    cost: list[int]
    goal_flags: list[bool]
    problem_cost: int | None
    goal_test: GoalTest | None = None
    _goal_distance: list[int | None] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.states)

    def is_goal_state(self, idx: int) -> bool:
        return self.goal_flags[idx]

    def cost_star(self, idx: int) -> int | None:
        if self.goal_flags[idx]:
            return self.problem_cost
        return self.cost[idx]

    def successors(self, idx: int) -> list[tuple[int, int]]:
        """(action_id, successor index) pairs in canonical order."""
        s = self.states[idx]
        out = []
        for aid in applicable_actions(self.problem, s):
            act = self.problem.actions[aid]
            out.append((aid, self.index[(s & ~act.delete) | act.add]))
        return out

    @property
    def goal_distance(self) -> list[int | None]:
        """Backward breadth-first distance to the nearest goal state."""
        if self._goal_distance is None:
            preds: list[list[int]] = [[] for _ in self.states]
            for i in range(len(self.states)):
                for _aid, j in self.successors(i):
                    preds[j].append(i)
            dist: list[int | None] = [None] * len(self.states)
            queue = deque()
            for i, g in enumerate(self.goal_flags):
                if g:
                    dist[i] = 0
                    queue.append(i)
            while queue:
                i = queue.popleft()
                for j in preds[i]:
                    if dist[j] is None:
                        dist[j] = dist[i] + 1
                        queue.append(j)
            self._goal_distance = dist
        return self._goal_distance


def enumerate_space(
    problem: GroundProblem,
    cap: int = DEFAULT_CAP,
    *,
    start: State | None = None,
    goal_test: GoalTest | None = None,
) -> StateSpace:
    """Breadth-first closure from the initial state (or `start`)."""
    root = problem.init if start is None else start
    test = goal_test if goal_test is not None else (lambda s: is_goal(problem, s))
    states = [root]
    index = {root: 0}
    cost = [0]
    queue = deque([0])
    while queue:
        i = queue.popleft()
        s = states[i]
        for aid in applicable_actions(problem, s):
            act = problem.actions[aid]
            succ = (s & ~act.delete) | act.add
            if succ in index:
                continue
            if len(states) >= cap:
                raise OracleError(f"state space exceeds cap {cap}")
            index[succ] = len(states)
            states.append(succ)
            cost.append(cost[i] + 1)
            queue.append(index[succ])
    goal_flags = [test(s) for s in states]
    problem_cost = min(
        (c for c, g in zip(cost, goal_flags) if g), default=None
    )
    return StateSpace(problem, root, states, index, cost, goal_flags, problem_cost, goal_test)


# ---------------------------------------------------------------------------
# Optimal states for tuple sets


def tuple_cost(space: StateSpace, mask: State) -> int | None:
    """Min cost of a state making the tuple true; None if unreachable."""
    best = None
    for i, s in enumerate(space.states):
        if s & mask == mask and (best is None or space.cost[i] < best):
            best = space.cost[i]
    return best


def opt_states(space: StateSpace, tuples: TupleSet) -> set[int]:
    """Indices of min-cost states for each tuple, unioned over the set."""
    out: set[int] = set()
    for mask in tuples.masks():
        best = tuple_cost(space, mask)
        if best is None:
            continue
        for i, s in enumerate(space.states):
            if space.cost[i] == best and s & mask == mask:
                out.add(i)
    return out


# ---------------------------------------------------------------------------
# Envelopes and admissibility


@dataclass
class EnvelopeReport:
    ok: bool
    witness: State | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def is_cost_envelope(space: StateSpace, member_idxs: set[int]) -> EnvelopeReport:
    """A set of states is a cost-envelope iff it contains the initial state
    and every non-goal member has a successor member of strictly larger
    finite optimal cost."""
    start_idx = space.index[space.start]
    if start_idx not in member_idxs:
        return EnvelopeReport(False, space.start, "initial state not in the set")
    for i in member_idxs:
        if space.goal_flags[i]:
            continue
        ci = space.cost_star(i)
        ok = False
        for _aid, j in space.successors(i):
            if j not in member_idxs:
                continue
            cj = space.cost_star(j)
            if cj is not None and ci < cj:
                ok = True
                break
        if not ok:
            return EnvelopeReport(
                False, space.states[i], "no cost-increasing successor inside the set"
            )
    return EnvelopeReport(True)


def _require_strips(space: StateSpace, what: str):
    if space.problem.goal_neg:
        raise OracleError(f"{what} requires a positive-conjunction goal")
    if space.goal_test is not None:
        raise OracleError(f"{what} requires the problem's own goal, not a custom test")


@dataclass
class AdmissibleReport:
    ok: bool
    witness: State | None = None
    reason: str = ""
    envelope: EnvelopeReport | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_admissible(space: StateSpace, tuples: TupleSet) -> AdmissibleReport:
    """Check admissibility of a tuple set by two independent routes and
    insist they agree.

    Direct route: some tuple holds initially, and from every non-goal
    min-cost state of a tuple some successor is a min-cost state of a tuple
    of cost exactly one more.  Envelope route: the union of min-cost states
    is a cost-envelope.
    """
    _require_strips(space, "admissibility")
    for mask in tuples.masks():
        if tuple_cost(space, mask) is None:
            atoms = space.problem.state_str(mask)
            return AdmissibleReport(False, mask, f"unreachable tuple {atoms}")

    direct = _admissible_direct(space, tuples)
    envelope = is_cost_envelope(space, opt_states(space, tuples))
    if direct.ok != envelope.ok:
        raise OracleError(
            "admissibility routes disagree: "
            f"direct={direct.ok} ({direct.reason}), envelope={envelope.ok} ({envelope.reason})"
        )
    direct.envelope = envelope
    return direct


def _admissible_direct(space: StateSpace, tuples: TupleSet) -> AdmissibleReport:
    masks = tuples.masks()
    costs = [tuple_cost(space, m) for m in masks]
    start = space.start
    if not any(start & m == m for m in masks):
        return AdmissibleReport(False, start, "no tuple true in the initial state")

    # Optimal plans ending in goal states are terminal; any other optimal
    # plan for a tuple must extend by one action into an optimal plan for
    # another tuple of the set.
    for mask, c in zip(masks, costs):
        for i, s in enumerate(space.states):
            if space.cost[i] != c or s & mask != mask:
                continue
            if space.goal_flags[i]:
                continue
            extended = False
            for _aid, j in space.successors(i):
                if space.cost_star(j) != c + 1:
                    continue
                sj = space.states[j]
                if any(
                    c2 == c + 1 and sj & m2 == m2 for m2, c2 in zip(masks, costs)
                ):
                    extended = True
                    break
            if not extended:
                return AdmissibleReport(
                    False,
                    s,
                    f"optimal state for tuple {space.problem.state_str(mask)} "
                    "has no one-step extension to another tuple",
                )
    return AdmissibleReport(True)


# ---------------------------------------------------------------------------
# Width bounds


def _opt_membership(space: StateSpace, k: int) -> list[bool]:
    """For T = all tuples of size <= k: whether each state is a min-cost
    state of some tuple true in it (one pass per tuple size)."""
    from itertools import combinations

    from .strips import atoms_of

    if k >= 3:
        raise OracleError("width lower-bound check supports k <= 2")
    best1: dict[int, int] = {}
    best2: dict[tuple[int, int], int] = {}
    for i, s in enumerate(space.states):
        c = space.cost[i]
        atoms = atoms_of(s)
        if k >= 1:
            for a in atoms:
                if best1.get(a, c + 1) > c:
                    best1[a] = c
        if k >= 2:
            for pair in combinations(atoms, 2):
                if best2.get(pair, c + 1) > c:
                    best2[pair] = c
    member = [False] * len(space.states)
    for i, s in enumerate(space.states):
        c = space.cost[i]
        atoms = atoms_of(s)
        if k >= 1 and any(best1[a] == c for a in atoms):
            member[i] = True
        elif k >= 2 and any(best2[p] == c for p in combinations(atoms, 2)):
            member[i] = True
        elif k == 0:
            member[i] = c == 0  # only the empty tuple, true exactly at cost 0
    return member


def lower_bound_witness(space: StateSpace, k: int) -> bool:
    """True iff no optimal goal-reaching trajectory stays inside the min-cost
    states of size-<=k tuples; this certifies that the width exceeds k."""
    _require_strips(space, "the width lower bound")
    if space.problem_cost is None:
        raise OracleError("width lower bound needs a solvable instance")
    member = _opt_membership(space, k)
    # forward reachability from the start through cost+1 transitions inside
    # the membership set, looking for a closest goal state
    start_idx = space.index[space.start]
    if not member[start_idx]:
        return True
    seen = {start_idx}
    queue = deque([start_idx])
    while queue:
        i = queue.popleft()
        if space.goal_flags[i] and space.cost[i] == space.problem_cost:
            return False
        ci = space.cost[i]
        for _aid, j in space.successors(i):
            if j not in seen and member[j] and space.cost[j] == ci + 1:
                seen.add(j)
                queue.append(j)
    return True


def effective_width(
    problem: GroundProblem,
    k_cap: int = 3,
    *,
    start: State | None = None,
    goal_test: GoalTest | None = None,
    max_nodes: int | None = None,
) -> int | None:
    """Smallest k <= k_cap for which the novelty search of width k returns a
    plan of optimal length; None when every k up to the cap falls short.

    This surrogate upper-bounds how much pruning the instance tolerates; a
    certified width needs the lower-bound witness bracket as well.
    """
    if goal_test is None and problem.goal_neg:
        raise OracleError("effective width requires a positive-conjunction goal")
    base = bfs_optimal(problem, goal_test, start=start, max_nodes=max_nodes)
    if not base.solved:
        raise OracleError(f"reference search failed: {base.reason}")
    optimal = len(base.plan)
    for k in range(k_cap + 1):
        result = iw_k(problem, k, goal_test, start=start, max_nodes=max_nodes)
        if result.solved and len(result.plan) == optimal:
            return k
    return None


# ---------------------------------------------------------------------------
# Feature-acyclicity and sketch width


def _valuation_table(space: StateSpace, sketch: Sketch, phi: FeatureSet):
    bound = bind(sketch, phi)
    vals: list[tuple[int, ...]] = []
    val_index: dict[tuple[int, ...], int] = {}
    state_val: list[int] = []
    for s in space.states:
        v = bound.valuation(space.problem, s)
        vi = val_index.get(v)
        if vi is None:
            vi = len(vals)
            val_index[v] = vi
            vals.append(v)
        state_val.append(vi)
    return vals, state_val


def is_feature_acyclic_on(space: StateSpace, sketch: Sketch, phi: FeatureSet) -> bool:
    """No chain of reachable states under the sketch relation repeats a
    feature valuation.

    Since the relation only depends on the valuations of a pair, a chain
    repeating a valuation exists iff the compatibility digraph over the
    realized valuations has a cycle (self-loops included).
    """
    vals, _state_val = _valuation_table(space, sketch, phi)
    n = len(vals)
    succ: list[list[int]] = [[] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            # pair (s, s') compatible means s' precedes s: edge a -> b
            if any(pair_satisfies(rule, vals[a], vals[b]) for rule in sketch.rules):
                succ[a].append(b)
    from .sketches import strongly_connected_components

    sccs = strongly_connected_components(n, succ)
    for scc in sccs:
        if len(scc) > 1:
            return False
        v = scc[0]
        if v in succ[v]:
            return False
    return True


@dataclass
class SketchWidthReport:
    value: int | None  # None means some subproblem exceeds the cap (or a dead end)
    family_size: int
    subproblem_widths: dict[int, int | None]  # start state index -> width
    reason: str = ""

    @property
    def bounded(self) -> bool:
        return self.value is not None


def sketch_width_on(
    space: StateSpace,
    sketch: Sketch,
    phi: FeatureSet,
    k_cap: int = 2,
    *,
    family_cap: int = 10_000,
) -> SketchWidthReport:
    """Max effective width over the family of subproblems the sketch induces
    from the initial state.

    A subproblem from state s asks for a goal state or a state below s in
    the sketch relation.  Successor subgoals induce new subproblems; distant
    subgoals only do when no successor of s is a goal or subgoal.
    """
    problem = space.problem
    vals, state_val = _valuation_table(space, sketch, phi)
    nvals = len(vals)
    compat = [[False] * nvals for _ in range(nvals)]
    for a in range(nvals):
        for b in range(nvals):
            compat[a][b] = any(
                pair_satisfies(rule, vals[a], vals[b]) for rule in sketch.rules
            )

    start_idx = space.index[space.start]
    family: list[int] = [start_idx]
    in_family = {start_idx}
    pos = 0
    while pos < len(family):
        i = family[pos]
        pos += 1
        if space.goal_flags[i]:
            continue
        ca = state_val[i]
        succs = space.successors(i)
        has_goal_or_subgoal_succ = any(
            space.goal_flags[j] or compat[ca][state_val[j]] for _aid, j in succs
        )
        new_starts: list[int] = []
        if has_goal_or_subgoal_succ:
            for _aid, j in succs:
                if not space.goal_flags[j] and compat[ca][state_val[j]]:
                    new_starts.append(j)
        else:
            new_starts = [
                j for j in _reachable_from(space, i)
                if not space.goal_flags[j] and compat[ca][state_val[j]]
            ]
        for j in new_starts:
            if j not in in_family:
                in_family.add(j)
                family.append(j)
                if len(family) > family_cap:
                    raise OracleError(f"subproblem family exceeds cap {family_cap}")

    bound = bind(sketch, phi)
    widths: dict[int, int | None] = {}
    worst: int = 0
    for i in family:
        if space.goal_flags[i]:
            widths[i] = 0
            continue
        ca = state_val[i]

        def subgoal(st: State, ca=ca) -> bool:
            if is_goal(problem, st):
                return True
            idx = space.index.get(st)
            if idx is not None:
                return compat[ca][state_val[idx]]
            return _compat_direct(sketch, vals[ca], bound.valuation(problem, st))

        try:
            w = effective_width(problem, k_cap, start=space.states[i], goal_test=subgoal)
        except OracleError:
            w = None  # dead-end subproblem: no goal or subgoal reachable
        widths[i] = w
        if w is None:
            return SketchWidthReport(
                None, len(family), widths,
                reason=f"subproblem from {problem.state_str(space.states[i])} "
                f"has width above {k_cap} or is a dead end",
            )
        worst = max(worst, w)
    return SketchWidthReport(worst, len(family), widths)


def _compat_direct(sketch: Sketch, va, vb) -> bool:
    return any(pair_satisfies(rule, va, vb) for rule in sketch.rules)


def _reachable_from(space: StateSpace, i: int) -> list[int]:
    seen = {i}
    queue = deque([i])
    order = []
    while queue:
        a = queue.popleft()
        order.append(a)
        for _aid, b in space.successors(a):
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return order
