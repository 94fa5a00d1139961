"""Definitions as explicit objects: a domain, a co-domain, and a definiens map.

A definition answers three questions: is an atom in its domain, is a
condition in its co-domain, and what are the ways an atom can be reduced
(its definiens).  ``ClausalDefinition`` realizes the contract over an
ordered store of equations.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable

from .terms import (
    Atom,
    Condition,
    Conj,
    FreshVars,
    Substitution,
    Term,
    TrueCondition,
    Var,
    apply,
    as_condition,
    match,
    rename_apart,
    restrict,
    unify,
    variables,
)

__all__ = [
    "ImmutableDefinition",
    "UnknownClause",
    "Mode",
    "Equation",
    "DefiniensElement",
    "Definition",
    "ClausalDefinition",
    "is_canonical_condition",
]


class ImmutableDefinition(Exception):
    """Raised when mutating a definition that was not created mutable."""


class UnknownClause(Exception):
    """Raised when removing a clause id that is not present."""


class Mode(Enum):
    """How equation heads meet query atoms: two-way or pattern-only."""

    UNIFY = "unify"
    MATCH = "match"


@dataclass(frozen=True)
class Equation:
    """One defining equation ``head = body``; facts carry the body ``true``."""

    head: Atom
    body: Condition
    clause_id: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.head, Atom) or isinstance(self.head.term, Var):
            raise ValueError("equation heads must be non-variable atoms")

    def __str__(self) -> str:
        if isinstance(self.body, TrueCondition):
            return f"{self.head}."
        return f"{self.head} = {self.body}."


@dataclass(frozen=True, eq=True)
class DefiniensElement:
    """One way to reduce an atom: a body, the unifier that enabled it, its clause."""

    body: Condition
    unifier: Substitution
    clause_id: int


def is_canonical_condition(x) -> bool:
    """True for well-formed conditions in canonical (flat, true-free) form."""
    if isinstance(x, TrueCondition) or isinstance(x, Atom):
        return True
    if isinstance(x, Conj):
        return len(x.items) >= 2 and all(isinstance(i, Atom) for i in x.items)
    return False


class Definition(abc.ABC):
    """The definition contract shared by clausal and adapted stores."""

    name: str

    def in_dom(self, atom: Term | Condition) -> bool:
        """Domain membership is semantic: some head accepts the atom."""
        return bool(self.definiens(atom))

    def in_com(self, condition) -> bool:
        """The co-domain is the entire canonical condition language."""
        return is_canonical_condition(condition)

    @abc.abstractmethod
    def definiens(
        self,
        atom: Term | Condition,
        fresh: FreshVars | None = None,
        occurs_check: bool = False,
    ) -> list[DefiniensElement]:
        """All reductions of ``atom``, in clause order."""


class ClausalDefinition(Definition):
    """A named, ordered store of equations served through the definition contract."""

    def __init__(
        self,
        name: str,
        equations: Iterable[Equation] = (),
        mode: Mode = Mode.UNIFY,
        mutable: bool = False,
    ) -> None:
        self.name = name
        self.mode = mode
        self.mutable = mutable
        self._equations: list[Equation] = []
        for equation in equations:
            self._equations.append(equation)
        self._renumber()

    @property
    def equations(self) -> tuple[Equation, ...]:
        return tuple(self._equations)

    def __len__(self) -> int:
        return len(self._equations)

    def __repr__(self) -> str:
        return (
            f"ClausalDefinition({self.name!r}, {len(self._equations)} equations,"
            f" mode={self.mode.value})"
        )

    def definiens(
        self,
        atom: Term | Condition,
        fresh: FreshVars | None = None,
        occurs_check: bool = False,
    ) -> list[DefiniensElement]:
        goal = as_condition(atom)
        if fresh is None:
            fresh = FreshVars()
        goal_vars = variables(goal)
        fresh.avoid(goal_vars)
        out: list[DefiniensElement] = []
        for equation in self._equations:
            # Renaming happens before the mode test so a given counter start
            # replays identically, hit or miss.
            head, body = rename_apart(equation.head, equation.body, fresh)
            if self.mode is Mode.UNIFY:
                sigma = unify(head, goal, occurs_check=occurs_check)
            else:
                sigma = match(head, goal)
            if sigma is None:
                continue
            out.append(
                DefiniensElement(
                    body=apply(body, sigma),
                    unifier=restrict(sigma, goal_vars),
                    clause_id=equation.clause_id,
                )
            )
        return out

    def add_equation(self, equation: Equation, at: int | None = None) -> None:
        """Insert at a position (default: end).  Clause ids are renumbered."""
        if not self.mutable:
            raise ImmutableDefinition(f"definition '{self.name}' is immutable")
        if at is None:
            self._equations.append(equation)
        else:
            if not 0 <= at <= len(self._equations):
                raise UnknownClause(f"no insertion point {at} in '{self.name}'")
            self._equations.insert(at, equation)
        self._renumber()

    def remove_equation(self, clause_id: int) -> Equation:
        """Remove and return the clause with the given id; ids are renumbered."""
        if not self.mutable:
            raise ImmutableDefinition(f"definition '{self.name}' is immutable")
        for index, equation in enumerate(self._equations):
            if equation.clause_id == clause_id:
                removed = self._equations.pop(index)
                self._renumber()
                return removed
        raise UnknownClause(f"no clause {clause_id} in '{self.name}'")

    def _renumber(self) -> None:
        self._equations = [
            replace(equation, clause_id=index)
            for index, equation in enumerate(self._equations)
        ]
