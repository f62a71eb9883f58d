"""Instantiate schema-level domain/problem ASTs into a GroundProblem.

Atoms are enumerated for every predicate over injective object tuples in
lexicographic (predicate, args) order; actions over all object tuples in
lexicographic (schema, args) order.  A candidate action is dropped when it
mentions an atom outside the universe (a repeated-argument instantiation)
or when a precondition on a static predicate (one never occurring in any
effect) is false in the initial state.
"""

from __future__ import annotations

from itertools import permutations, product

from .pddl import DomainAst, ProblemAst
from .strips import GroundAction, GroundAtom, GroundProblem, state_from_atoms


class GroundingError(ValueError):
    pass


def ground(domain: DomainAst, problem: ProblemAst) -> GroundProblem:
    if problem.domain_name != domain.name:
        raise GroundingError(
            f"problem '{problem.name}' references domain '{problem.domain_name}', "
            f"not '{domain.name}'"
        )

    objects = tuple(sorted(problem.objects))

    atoms: list[GroundAtom] = []
    index: dict[tuple[str, tuple[str, ...]], int] = {}
    for pred, arity in sorted(domain.predicates):
        if arity == 0:
            index[(pred, ())] = len(atoms)
            atoms.append(GroundAtom(len(atoms), pred, ()))
            continue
        for args in permutations(objects, arity):
            index[(pred, args)] = len(atoms)
            atoms.append(GroundAtom(len(atoms), pred, args))

    fluent = {a.predicate for s in domain.schemas for a in s.add + s.delete}
    static_preds = {p for p, _ in domain.predicates} - fluent

    init_ids = []
    for ga in problem.init:
        aid = _lookup(index, ga.predicate, ga.args, domain, "init")
        init_ids.append(aid)
    init = state_from_atoms(init_ids)

    actions: list[GroundAction] = []
    for schema in sorted(domain.schemas, key=lambda s: s.name):
        for binding_args in product(objects, repeat=len(schema.params)):
            binding = dict(zip(schema.params, binding_args))
            pre = _bind_all(schema.pre, binding, index)
            add = _bind_all(schema.add, binding, index)
            delete = _bind_all(schema.delete, binding, index)
            if pre is None or add is None or delete is None:
                continue  # mentions a repeated-argument atom: statically impossible
            pre_mask = state_from_atoms(pre)
            add_mask = state_from_atoms(add)
            del_mask = state_from_atoms(delete)
            if add_mask & del_mask:
                continue  # degenerate binding adding and deleting one atom
            if any(
                atoms[a].predicate in static_preds and not (init >> a) & 1 for a in pre
            ):
                continue  # static precondition false in init, never achievable
            actions.append(
                GroundAction(len(actions), schema.name, binding_args, pre_mask, add_mask, del_mask)
            )

    goal_pos = state_from_atoms(
        _lookup(index, ga.predicate, ga.args, domain, "goal") for ga in problem.goal_pos
    )
    goal_neg = state_from_atoms(
        _lookup(index, ga.predicate, ga.args, domain, "goal") for ga in problem.goal_neg
    )
    if goal_pos & goal_neg:
        raise GroundingError("goal contains an atom both positively and negatively")

    return GroundProblem(
        name=problem.name,
        atoms=tuple(atoms),
        actions=tuple(actions),
        init=init,
        goal_pos=goal_pos,
        goal_neg=goal_neg,
        objects=objects,
    )


def _lookup(index, predicate, args, domain: DomainAst, where: str) -> int:
    aid = index.get((predicate, args))
    if aid is None:
        arity = domain.arity(predicate)
        if arity is None:
            raise GroundingError(f"{where} atom uses undeclared predicate '{predicate}'")
        if arity != len(args):
            raise GroundingError(
                f"{where} atom {predicate}({','.join(args)}) has arity {len(args)}, "
                f"declared {arity}"
            )
        raise GroundingError(
            f"{where} atom {predicate}({','.join(args)}) is not in the ground universe"
        )
    return aid


def _bind_all(schema_atoms, binding, index) -> list[int] | None:
    out = []
    for atom in schema_atoms:
        args = tuple(binding[v] for v in atom.args)
        aid = index.get((atom.predicate, args))
        if aid is None:
            return None
        out.append(aid)
    return out
