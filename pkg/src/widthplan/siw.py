"""Greedy serialized search over sketch subgoals, and direct policy execution.

The serialized driver repeatedly runs an iterated-width search from the
current state toward the nearest state that is a goal or relates to the
segment start under the sketch, concatenating the segment plans.
"""

from __future__ import annotations

from dataclasses import dataclass

from .features import FeatureSet
from .search import Outcome, SearchStats, iw
from .sketches import Sketch, relation
from .strips import GroundProblem, State, applicable_actions, apply, is_goal


class SiwError(ValueError):
    pass


def bind(sketch: Sketch, phi: FeatureSet) -> FeatureSet:
    """Features of `phi` reordered to the sketch's declaration order."""
    return phi.select(sketch.names_kinds)


@dataclass
class Segment:
    k: int
    plan: list[int]
    start_values: tuple[int, ...]
    end_values: tuple[int, ...]


@dataclass
class SerializedResult:
    outcome: Outcome
    plan: list[int] | None
    segments: list[Segment]
    stats: SearchStats
    reason: str | None = None
    goal_state: State | None = None

    @property
    def solved(self) -> bool:
        return self.outcome is Outcome.SOLVED


def siw_r(
    problem: GroundProblem,
    sketch: Sketch,
    phi: FeatureSet,
    *,
    k_max: int,
    max_nodes: int | None = None,
    max_segments: int | None = None,
) -> SerializedResult:
    """Solve by chaining subgoal segments, each found by IW with k <= k_max.

    Fails when an inner search exhausts k_max (`reason` starts with "inner")
    or when the cycle guard trips on a revisited segment start or the segment
    cap (`reason` starts with "cycle").
    """
    bound = bind(sketch, phi)
    if max_segments is None:
        # generous default: cyclic rule sets are caught by the revisit check
        max_segments = max(problem.n_atoms, 2) ** (len(sketch.numeric_indices()) + 1)

    totals = SearchStats()
    segments: list[Segment] = []
    plan: list[int] = []
    s = problem.init
    seen_starts = {s}

    while not is_goal(problem, s):
        if len(segments) >= max_segments:
            return SerializedResult(
                Outcome.FAILURE, None, segments, totals,
                reason=f"cycle guard: segment cap {max_segments} reached",
            )
        start_values = bound.valuation(problem, s)

        def subgoal(st: State) -> bool:
            return is_goal(problem, st) or relation(
                sketch, start_values, bound.valuation(problem, st)
            )

        result = iw(problem, subgoal, start=s, max_k=k_max, max_nodes=max_nodes)
        _accumulate(totals, result.stats)
        if not result.solved:
            return SerializedResult(
                Outcome.FAILURE, None, segments, totals,
                reason=f"inner search exhausted k_max={k_max}: {result.reason}",
            )
        s2 = result.goal_state
        segments.append(
            Segment(result.k, result.plan, start_values, bound.valuation(problem, s2))
        )
        plan.extend(result.plan)
        s = s2
        if not is_goal(problem, s):
            if s in seen_starts:
                return SerializedResult(
                    Outcome.FAILURE, None, segments, totals,
                    reason="cycle guard: segment start revisited",
                )
            seen_starts.add(s)

    return SerializedResult(Outcome.SOLVED, plan, segments, totals, goal_state=s)


def _accumulate(totals: SearchStats, stats: SearchStats):
    totals.expanded += stats.expanded
    totals.generated += stats.generated
    totals.max_queue = max(totals.max_queue, stats.max_queue)
    totals.novel += stats.novel
    totals.pruned += stats.pruned
    totals.pruned_duplicate += stats.pruned_duplicate
    totals.wall_ms += stats.wall_ms


@dataclass
class PolicyRun:
    status: str  # "goal" | "stuck" | "cyclic" | "cap"
    states: list[State]
    actions: list[int]

    @property
    def reached_goal(self) -> bool:
        return self.status == "goal"


def run_policy(
    problem: GroundProblem,
    sketch: Sketch,
    phi: FeatureSet,
    *,
    step_cap: int = 1_000_000,
) -> PolicyRun:
    """Follow the rule relation greedily from the initial state, taking the
    first compatible successor in canonical action order at each step."""
    bound = bind(sketch, phi)
    s = problem.init
    states = [s]
    actions: list[int] = []
    visited = {s}

    while not is_goal(problem, s):
        if len(actions) >= step_cap:
            return PolicyRun("cap", states, actions)
        values = bound.valuation(problem, s)
        chosen = None
        for aid in applicable_actions(problem, s):
            succ = apply(problem, s, aid)
            if relation(sketch, values, bound.valuation(problem, succ)):
                chosen = (aid, succ)
                break
        if chosen is None:
            return PolicyRun("stuck", states, actions)
        aid, s = chosen
        actions.append(aid)
        states.append(s)
        if s in visited and not is_goal(problem, s):
            return PolicyRun("cyclic", states, actions)
        visited.add(s)

    return PolicyRun("goal", states, actions)


def policy_reachable(
    problem: GroundProblem,
    sketch: Sketch,
    phi: FeatureSet,
    *,
    cap: int = 100_000,
) -> set[State]:
    """Closure of the initial state under all policy transitions
    (transitions leaving non-goal states that satisfy some rule)."""
    bound = bind(sketch, phi)
    seen = {problem.init}
    frontier = [problem.init]
    while frontier:
        s = frontier.pop()
        if is_goal(problem, s):
            continue
        values = bound.valuation(problem, s)
        for aid in applicable_actions(problem, s):
            succ = apply(problem, s, aid)
            if succ in seen:
                continue
            if relation(sketch, values, bound.valuation(problem, succ)):
                seen.add(succ)
                frontier.append(succ)
                if len(seen) > cap:
                    raise SiwError(f"policy closure exceeds {cap} states")
    return seen
