"""Tuple bookkeeping for novelty-pruned searches.

Tracks which atom tuples have been made true so far, either over an explicit
tuple set or over the implicit universe of all tuples of size at most k.
When the caller supplies the set of atoms flipped by a transition, only the
tuples touching a flipped atom are examined.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

from .strips import GroundProblem, State, atoms_of, state_from_atoms


class TupleSetError(ValueError):
    pass


@dataclass(frozen=True)
class TupleSet:
    """Explicit duplicate-free set of atom tuples, stored as sorted id tuples."""

    tuples: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_iterable(tuples) -> "TupleSet":
        canon = {tuple(sorted(set(t))) for t in tuples}
        return TupleSet(tuple(sorted(canon)))

    def __len__(self) -> int:
        return len(self.tuples)

    @property
    def size(self) -> int:
        """Largest tuple size; 0 for the empty set."""
        return max((len(t) for t in self.tuples), default=0)

    def masks(self) -> list[State]:
        return [state_from_atoms(t) for t in self.tuples]


@dataclass(frozen=True)
class TupleUniverse:
    """All tuples of 1..k atoms over an n-atom problem, never materialized."""

    n_atoms: int
    k: int

    def __len__(self) -> int:
        return sum(comb(self.n_atoms, i) for i in range(1, self.k + 1))

    @property
    def size(self) -> int:
        return self.k


def all_tuples_up_to(problem: GroundProblem, k: int) -> TupleUniverse:
    if not 0 <= k <= problem.n_atoms:
        raise ValueError(f"k={k} out of range 0..{problem.n_atoms}")
    return TupleUniverse(problem.n_atoms, k)


class NoveltyTable:
    """Seen-tuple table owned by a single search.

    `register(s, delta)` returns True iff some tracked tuple is true in `s`
    for the first time, and marks every tracked tuple true in `s` as seen.
    `delta` (the atoms that flipped between the parent state and `s`) limits
    the check to tuples containing a flipped atom; this is only sound when
    the parent state was itself registered earlier.
    """

    def __init__(self, tracked: TupleSet | TupleUniverse):
        self.tracked = tracked
        if isinstance(tracked, TupleSet):
            self._masks = tracked.masks()
            self._seen = [False] * len(self._masks)
        else:
            self._k = tracked.k
            self._n = tracked.n_atoms
            self._seen1 = 0
            self._seen2 = bytearray(self._n * self._n) if tracked.k >= 2 else None
            self._seen_hi: set[tuple[int, ...]] = set()

    @staticmethod
    def for_tuples(tuples: TupleSet) -> "NoveltyTable":
        return NoveltyTable(tuples)

    @staticmethod
    def for_universe(problem: GroundProblem, k: int) -> "NoveltyTable":
        return NoveltyTable(all_tuples_up_to(problem, k))

    def register(self, s: State, delta: State | None = None) -> bool:
        if isinstance(self.tracked, TupleSet):
            return self._register_explicit(s, delta)
        return self._register_universe(s, delta)

    def _register_explicit(self, s: State, delta: State | None) -> bool:
        novel = False
        masks, seen = self._masks, self._seen
        for i, t in enumerate(masks):
            if seen[i]:
                continue
            if delta is not None and t and not (t & delta):
                continue
            if t & s == t:
                seen[i] = True
                novel = True
        return novel

    def _register_universe(self, s: State, delta: State | None) -> bool:
        novel = False
        scope = s if delta is None else s & delta
        # size 1
        fresh = scope & ~self._seen1
        if fresh:
            novel = True
            self._seen1 |= fresh
        if self._k < 2:
            return novel
        # size 2
        table = self._seen2
        n = self._n
        s_atoms = atoms_of(s)
        scope_atoms = s_atoms if delta is None else atoms_of(scope)
        scope_set = set(scope_atoms)
        for i in scope_atoms:
            base = i * n
            for j in s_atoms:
                if j == i or (j in scope_set and j < i):
                    continue
                idx = base + j if i < j else j * n + i
                if not table[idx]:
                    table[idx] = 1
                    novel = True
        # sizes 3..k
        for r in range(3, self._k + 1):
            if len(s_atoms) < r:
                break
            for tup in combinations(s_atoms, r):
                if delta is not None and not any(a in scope_set for a in tup):
                    continue
                if tup not in self._seen_hi:
                    self._seen_hi.add(tup)
                    novel = True
        return novel


# ---------------------------------------------------------------------------
# Explicit tuple-set file format: one tuple per line, atoms joined by '&',
# e.g. `hold(d1) & clear(x)`.  Blank lines and '#' comments are skipped.


def parse_tuple_set(text: str, problem: GroundProblem) -> TupleSet:
    tuples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        ids = []
        for part in line.split("&"):
            ids.append(_parse_atom_ref(part.strip(), problem, lineno))
        tuples.append(tuple(sorted(set(ids))))
    return TupleSet.from_iterable(tuples)


def _parse_atom_ref(text: str, problem: GroundProblem, lineno: int) -> int:
    if not text.endswith(")") or "(" not in text:
        raise TupleSetError(f"line {lineno}: malformed atom '{text}'")
    pred, argtext = text[:-1].split("(", 1)
    pred = pred.strip().lower()
    args = tuple(a.strip().lower() for a in argtext.split(",") if a.strip())
    aid = problem.atom_id(pred, args)
    if aid is None:
        raise TupleSetError(f"line {lineno}: unknown atom '{text}'")
    return aid


def format_tuple_set(tuples: TupleSet, problem: GroundProblem) -> str:
    lines = []
    for t in tuples.tuples:
        lines.append(" & ".join(str(problem.atoms[i]) for i in t))
    return "\n".join(lines) + "\n"
