"""Guarded method definitions: computation strategies over state definitions.

A method equation maps the method's name to a sequence of steps (method
words and right-side reduction steps), optionally guarded by a quantified
predicate over the equations of the current state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Mapping, Sequence

from .definitions import Definition
from .terms import Condition, match

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, typing only
    from .machine import StateDefinition

__all__ = [
    "ArityMismatch",
    "UnknownDefinition",
    "Side",
    "MethodWord",
    "SideStep",
    "Step",
    "SideMatches",
    "Not",
    "Some",
    "All",
    "Guard",
    "MethodEquation",
    "MethodDefinition",
    "MethodInstance",
    "instantiate",
    "eval_guard",
    "applicable_equations",
]


class ArityMismatch(Exception):
    """Raised when a method is instantiated with the wrong argument count."""


class UnknownDefinition(Exception):
    """Raised when a name does not resolve to a definition or method."""


class Side(Enum):
    LEFT = "l"
    RIGHT = "r"


@dataclass(frozen=True)
class MethodWord:
    """A step that invokes a method: the enclosing one when unadorned."""

    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.args:
            return f"{self.name}({','.join(self.args)})"
        return self.name


@dataclass(frozen=True)
class SideStep:
    """A step that reduces one side of a state equation via a definition."""

    side: Side
    def_ref: str

    def __str__(self) -> str:
        return f"{self.side.value}:{self.def_ref}"


Step = MethodWord | SideStep


@dataclass(frozen=True)
class SideMatches:
    """Predicate: the given side of a state equation matches a pattern."""

    side: Side
    pattern: Condition

    def __str__(self) -> str:
        return f"{self.side.value}:matches({self.pattern})"


@dataclass(frozen=True)
class Not:
    inner: "Guard"

    def __str__(self) -> str:
        return f"not({self.inner})"


@dataclass(frozen=True)
class Some:
    inner: "Guard"

    def __str__(self) -> str:
        return f"some {self.inner}"


@dataclass(frozen=True)
class All:
    inner: "Guard"

    def __str__(self) -> str:
        return f"all {self.inner}"


Guard = Some | All | Not | SideMatches


@dataclass(frozen=True)
class MethodEquation:
    """``head = [steps] # guard.``; a missing guard is always true."""

    head: str
    body: tuple[Step, ...] = ()
    guard: Guard | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "body", tuple(self.body))

    def __str__(self) -> str:
        steps = ", ".join(str(step) for step in self.body)
        text = f"{self.head} = [{steps}]"
        if self.guard is not None:
            text += f" # {self.guard}"
        return text + "."


@dataclass(frozen=True)
class MethodDefinition:
    """A named method with definition-valued parameters and guarded equations."""

    name: str
    params: tuple[str, ...] = ()
    equations: tuple[MethodEquation, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "equations", tuple(self.equations))
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"method '{self.name}' has duplicate parameters")
        for equation in self.equations:
            if equation.head != self.name:
                raise ValueError(
                    f"equation head '{equation.head}' does not match method "
                    f"'{self.name}'"
                )


@dataclass(frozen=True)
class MethodInstance:
    """A method with its parameters bound to concrete definitions.

    ``definitions`` and ``methods`` are the namespaces used to resolve
    references that are not parameters (for cross-method words and side
    steps naming global definitions directly).
    """

    definition: MethodDefinition
    bindings: Mapping[str, Definition]
    definitions: Mapping[str, Definition] = field(default_factory=dict)
    methods: Mapping[str, MethodDefinition] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.definition.name

    def resolve_ref(self, name: str) -> Definition:
        found = self.bindings.get(name)
        if found is None:
            found = self.definitions.get(name)
        if found is None:
            raise UnknownDefinition(f"'{name}' names no bound or known definition")
        return found

    def resolve_word(self, word: MethodWord) -> "MethodInstance":
        if word.name == self.definition.name and not word.args:
            return self
        if word.name == self.definition.name:
            target = self.definition
        else:
            target = self.methods.get(word.name)
        if target is None:
            raise UnknownDefinition(f"'{word.name}' names no known method")
        return instantiate(
            target,
            [self.resolve_ref(ref) for ref in word.args],
            definitions=self.definitions,
            methods=self.methods,
        )


def instantiate(
    definition: MethodDefinition,
    args: Sequence[Definition],
    definitions: Mapping[str, Definition] | None = None,
    methods: Mapping[str, MethodDefinition] | None = None,
) -> MethodInstance:
    """Bind a method's parameters; every reference must resolve right now."""
    if len(args) != len(definition.params):
        raise ArityMismatch(
            f"method '{definition.name}' takes {len(definition.params)} "
            f"definition(s), got {len(args)}"
        )
    instance = MethodInstance(
        definition=definition,
        bindings=dict(zip(definition.params, args)),
        definitions=dict(definitions or {}),
        methods=dict(methods or {}),
    )
    _check_references(instance)
    return instance


def _check_references(instance: MethodInstance) -> None:
    definition = instance.definition
    for equation in definition.equations:
        for step in equation.body:
            if isinstance(step, SideStep):
                instance.resolve_ref(step.def_ref)
            else:
                if step.name != definition.name and step.name not in instance.methods:
                    raise UnknownDefinition(f"'{step.name}' names no known method")
                target = (
                    definition
                    if step.name == definition.name
                    else instance.methods[step.name]
                )
                if step.args and len(step.args) != len(target.params):
                    raise ArityMismatch(
                        f"word '{step.name}' takes {len(target.params)} "
                        f"definition(s), got {len(step.args)}"
                    )
                for ref in step.args:
                    instance.resolve_ref(ref)


def _holds(predicate: Guard, left: Condition, right: Condition) -> bool:
    if isinstance(predicate, Not):
        return not _holds(predicate.inner, left, right)
    if isinstance(predicate, SideMatches):
        subject = left if predicate.side is Side.LEFT else right
        return match(predicate.pattern, subject) is not None
    raise ValueError("quantifiers are only allowed outermost in guards")


def eval_guard(guard: Guard | None, state: "StateDefinition") -> bool:
    """Evaluate a guard over a state.

    ``some`` is existential and false on the empty state; ``all`` is
    universal and vacuously true there.  An unquantified predicate is
    read existentially.
    """
    if guard is None:
        return True
    if isinstance(guard, All):
        return all(_holds(guard.inner, left, right) for left, right in state.equations)
    inner = guard.inner if isinstance(guard, Some) else guard
    return any(_holds(inner, left, right) for left, right in state.equations)


def applicable_equations(
    instance: MethodInstance, state: "StateDefinition"
) -> list[MethodEquation]:
    """The instance's equations whose guards hold on the state, in source order."""
    return [
        equation
        for equation in instance.definition.equations
        if eval_guard(equation.guard, state)
    ]
