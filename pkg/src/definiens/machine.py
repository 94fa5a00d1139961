"""The definiens machine: backtracking execution of method-driven queries.

A query pairs a method instance with an initial state definition.  The
machine runs the method's steps over the state, branching on applicable
method equations, on the state equations an observer selects, and on the
definiens elements of the reduced atom.  Answers stream out one at a time
and each carries a full, replayable result definition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, NamedTuple, Sequence

from .definitions import Definition, DefiniensElement
from .methods import (
    MethodInstance,
    MethodWord,
    SideStep,
    Step,
    applicable_equations,
)
from .terms import (
    TRUE,
    Atom,
    Condition,
    Conj,
    FreshVars,
    Substitution,
    TrueCondition,
    Var,
    apply,
    as_condition,
    compose,
    conjoin,
    simplify,
    variables,
)

__all__ = [
    "EXHAUSTED",
    "MachineBusy",
    "DepthLimitExceeded",
    "Cancelled",
    "ReplayError",
    "ResultType",
    "MachineConfig",
    "StateDefinition",
    "Query",
    "TraceStep",
    "ResultDefinition",
    "Answer",
    "DefaultObserver",
    "LeftMostObserver",
    "Delegate",
    "Machine",
    "replay",
]


class _Exhausted:
    def __repr__(self) -> str:
        return "EXHAUSTED"


EXHAUSTED = _Exhausted()


class MachineBusy(Exception):
    """Raised on re-entrant machine use while a pull is in progress."""


class DepthLimitExceeded(Exception):
    """The search hit the configured depth bound before it could finish."""


class Cancelled(Exception):
    """The computation was cancelled between trace steps."""


class ReplayError(Exception):
    """A recorded trace does not re-execute to its recorded states."""


class ResultType(Enum):
    VARS_ONLY = "vars_only"
    FINAL = "final"
    TRACE = "trace"

    @classmethod
    def from_name(cls, name: str) -> "ResultType":
        for member in cls:
            if member.value == name:
                return member
        raise ValueError(f"unknown result type '{name}'")


@dataclass(frozen=True)
class MachineConfig:
    result_type: ResultType = ResultType.VARS_ONLY
    answer_limit: int | None = None
    depth_limit: int | None = None
    occurs_check: bool = False

    def __post_init__(self) -> None:
        for label, limit in (
            ("answer_limit", self.answer_limit),
            ("depth_limit", self.depth_limit),
        ):
            if limit is not None and limit < 1:
                raise ValueError(f"{label} must be positive when present")


@dataclass(frozen=True)
class StateDefinition:
    """An ordered store of condition equations ``left = right``."""

    equations: tuple[tuple[Condition, Condition], ...]

    @classmethod
    def make(cls, pairs) -> "StateDefinition":
        return cls(
            tuple(
                (simplify(as_condition(left)), simplify(as_condition(right)))
                for left, right in pairs
            )
        )

    def substituted(self, substitution: Substitution) -> "StateDefinition":
        return StateDefinition(
            tuple(
                (apply(left, substitution), apply(right, substitution))
                for left, right in self.equations
            )
        )

    def variables(self) -> list[str]:
        return variables(self.equations)

    def __str__(self) -> str:
        inside = ", ".join(
            f"{_wrap(left)} = {_wrap(right)}" for left, right in self.equations
        )
        return "{" + inside + "}"


def _wrap(condition: Condition) -> str:
    return f"({condition})" if isinstance(condition, Conj) else str(condition)


@dataclass(frozen=True)
class Query:
    """A method instance applied to an initial state."""

    instance: MethodInstance
    initial_state: StateDefinition
    initial_vars: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "initial_vars", tuple(self.initial_state.variables())
        )


@dataclass(frozen=True)
class TraceStep:
    """One reduction: which equation, which atom, by which clause of what.

    ``fresh_base`` records the machine's fresh-name counter before the
    reduction, which is what makes stored traces re-executable bit for bit.
    """

    equation_index: int
    selected_atom: Atom
    definition_name: str
    clause_id: int
    unifier: Substitution
    resulting_state: StateDefinition
    fresh_base: int


@dataclass(frozen=True)
class ResultDefinition:
    initial_state: StateDefinition
    steps: tuple[TraceStep, ...]
    final_state: StateDefinition

    def __post_init__(self) -> None:
        last = self.steps[-1].resulting_state if self.steps else self.initial_state
        if last != self.final_state:
            raise ValueError("final state does not close the trace")


@dataclass(frozen=True)
class Answer:
    """An answer substitution (restricted to the query's variables) plus its result."""

    substitution: Substitution
    result: ResultDefinition


class DefaultObserver:
    """Considers state equations and definiens elements in their given order."""

    def select_equations(
        self, step: SideStep, state: StateDefinition, hints: Sequence = ()
    ) -> list[int]:
        return list(range(len(state.equations)))

    def order_definiens(self, elements: Sequence[DefiniensElement]) -> list[int]:
        return list(range(len(elements)))

    def transform_result(self, result: ResultDefinition, kind: ResultType):
        """vars_only keeps nothing extra; final keeps the end state; trace keeps all."""
        if kind is ResultType.VARS_ONLY:
            return None
        if kind is ResultType.FINAL:
            return result.final_state
        return result


class LeftMostObserver(DefaultObserver):
    """Only ever selects the first state equation."""

    def select_equations(
        self, step: SideStep, state: StateDefinition, hints: Sequence = ()
    ) -> list[int]:
        return [0] if state.equations else []


class Delegate:
    """Synchronous computation notifications; override what you need."""

    def on_query_set(self, query: Query) -> None:
        pass

    def on_step(self, step: TraceStep) -> None:
        pass

    def on_answer(self, answer: Answer) -> None:
        pass

    def on_exhausted(self) -> None:
        pass


class _Config(NamedTuple):
    state: StateDefinition
    continuation: tuple[tuple[MethodInstance, Step], ...]
    accumulated: Substitution
    trace: tuple[TraceStep, ...]


def _leftmost_atom(condition: Condition) -> Atom | None:
    if isinstance(condition, Atom):
        return condition
    if isinstance(condition, Conj):
        first = condition.items[0]
        return first if isinstance(first, Atom) else None
    return None


def _reduce(
    state: StateDefinition, equation_index: int, element: DefiniensElement
) -> StateDefinition:
    """Replace the leftmost atom of one right side with an element's body."""
    left, right = state.equations[equation_index]
    if isinstance(right, Conj):
        new_right = conjoin([element.body, *right.items[1:]])
    else:
        new_right = element.body
    pairs = list(state.equations)
    pairs[equation_index] = (left, new_right)
    return StateDefinition(tuple(pairs)).substituted(element.unifier)


def _check_indices(indices: Sequence[int], size: int, what: str) -> None:
    seen: set[int] = set()
    for index in indices:
        if not isinstance(index, int) or not 0 <= index < size or index in seen:
            raise ValueError(f"observer returned invalid {what} indices: {indices!r}")
        seen.add(index)


class Machine:
    """Pulls answers for one query at a time; create with config/observer/delegate."""

    def __init__(
        self,
        config: MachineConfig | None = None,
        observer: DefaultObserver | None = None,
        delegate: Delegate | None = None,
    ) -> None:
        self.config = config or MachineConfig()
        self.observer = observer or DefaultObserver()
        self.delegate = delegate
        self._fresh = FreshVars()
        self._query: Query | None = None
        self._generator: Iterator[Answer] | None = None
        self._pulling = False
        self._finished = False
        self._pruned = False
        self._cancel_requested = False
        self._emitted = 0

    # -- control ---------------------------------------------------------

    def set_query(self, query: Query) -> None:
        if self._pulling:
            raise MachineBusy("cannot set a query while a pull is in progress")
        self._query = query
        self._generator = self._solve(query)
        self._finished = False
        self._pruned = False
        self._cancel_requested = False
        self._emitted = 0
        self._notify("on_query_set", query)

    def cancel(self) -> None:
        """Stop the computation at the next trace-step boundary."""
        self._cancel_requested = True

    def next_answer(self) -> Answer | _Exhausted:
        if self._generator is None:
            raise ValueError("no query set")
        if self._pulling:
            raise MachineBusy("a pull is already in progress")
        if self._finished:
            return EXHAUSTED
        limit = self.config.answer_limit
        if limit is not None and self._emitted >= limit:
            self._finish()
            return EXHAUSTED
        self._pulling = True
        try:
            answer = next(self._generator, None)
        finally:
            self._pulling = False
        if answer is None:
            if self._pruned:
                self._finished = True
                raise DepthLimitExceeded(
                    f"search pruned at depth {self.config.depth_limit}"
                )
            self._finish()
            return EXHAUSTED
        self._emitted += 1
        self._notify("on_answer", answer)
        return answer

    def all_answers(self, limit: int | None = None) -> list[Answer]:
        """Pull until exhaustion or a limit; continues from the current point."""
        out: list[Answer] = []
        while limit is None or len(out) < limit:
            answer = self.next_answer()
            if answer is EXHAUSTED:
                break
            out.append(answer)
        return out

    def _finish(self) -> None:
        if not self._finished:
            self._finished = True
            self._notify("on_exhausted")

    def _notify(self, event: str, *args) -> None:
        if self.delegate is not None:
            getattr(self.delegate, event)(*args)

    # -- search ------------------------------------------------------------

    def _solve(self, query: Query) -> Iterator[Answer]:
        start = _Config(
            state=query.initial_state,
            continuation=(
                (query.instance, MethodWord(query.instance.name)),
            ),
            accumulated={},
            trace=(),
        )
        stack: list[Iterator[_Config]] = [iter((start,))]
        while stack:
            if self._cancel_requested:
                raise Cancelled("computation cancelled")
            config = next(stack[-1], None)
            if config is None:
                stack.pop()
                continue
            if not config.continuation:
                yield self._answer_for(query, config)
                continue
            stack.append(self._expand(config))

    def _expand(self, config: _Config) -> Iterator[_Config]:
        instance, step = config.continuation[-1]
        rest = config.continuation[:-1]
        if isinstance(step, MethodWord):
            target = instance.resolve_word(step)
            for equation in applicable_equations(target, config.state):
                pushed = rest + tuple((target, s) for s in equation.body)
                yield config._replace(continuation=pushed)
            return
        if (
            self.config.depth_limit is not None
            and len(config.trace) >= self.config.depth_limit
        ):
            self._pruned = True
            return
        definition = instance.resolve_ref(step.def_ref)
        indices = self.observer.select_equations(step, config.state, ())
        _check_indices(indices, len(config.state.equations), "equation")
        for index in indices:
            _, right = config.state.equations[index]
            if isinstance(right, TrueCondition):
                continue  # nothing left to reduce on this equation
            atom = _leftmost_atom(right)
            if atom is None or isinstance(atom.term, Var):
                continue  # floundering: a bare variable cannot be reduced
            fresh_base = self._fresh.counter
            elements = definition.definiens(
                atom, fresh=self._fresh, occurs_check=self.config.occurs_check
            )
            if not elements:
                continue
            order = self.observer.order_definiens(elements)
            _check_indices(order, len(elements), "definiens")
            for position in order:
                element = elements[position]
                new_state = _reduce(config.state, index, element)
                record = TraceStep(
                    equation_index=index,
                    selected_atom=atom,
                    definition_name=definition.name,
                    clause_id=element.clause_id,
                    unifier=element.unifier,
                    resulting_state=new_state,
                    fresh_base=fresh_base,
                )
                self._notify("on_step", record)
                yield _Config(
                    state=new_state,
                    continuation=rest,
                    accumulated=compose(config.accumulated, element.unifier),
                    trace=config.trace + (record,),
                )

    def _answer_for(self, query: Query, config: _Config) -> Answer:
        substitution = {
            name: config.accumulated[name]
            for name in query.initial_vars
            if name in config.accumulated
        }
        result = ResultDefinition(
            initial_state=query.initial_state,
            steps=config.trace,
            final_state=config.state,
        )
        return Answer(substitution=substitution, result=result)


def replay(
    result: ResultDefinition,
    definitions: Mapping[str, Definition],
    occurs_check: bool = False,
) -> None:
    """Re-execute a recorded trace from its initial state.

    Each step is recomputed from scratch — same definition, same clause,
    same fresh-name base — and must reproduce the recorded unifier and
    resulting state exactly; otherwise ReplayError is raised.
    """
    state = result.initial_state
    for number, step in enumerate(result.steps):
        if not 0 <= step.equation_index < len(state.equations):
            raise ReplayError(f"step {number}: equation index out of range")
        _, right = state.equations[step.equation_index]
        atom = _leftmost_atom(right)
        if atom != step.selected_atom:
            raise ReplayError(
                f"step {number}: selected atom {step.selected_atom} is not "
                f"the leftmost atom of equation {step.equation_index}"
            )
        definition = definitions.get(step.definition_name)
        if definition is None:
            raise ReplayError(
                f"step {number}: unknown definition '{step.definition_name}'"
            )
        elements = definition.definiens(
            atom, fresh=FreshVars(step.fresh_base), occurs_check=occurs_check
        )
        element = next(
            (e for e in elements if e.clause_id == step.clause_id), None
        )
        if element is None:
            raise ReplayError(
                f"step {number}: clause {step.clause_id} no longer reduces {atom}"
            )
        if element.unifier != step.unifier:
            raise ReplayError(f"step {number}: unifier diverged")
        state = _reduce(state, step.equation_index, element)
        if state != step.resulting_state:
            raise ReplayError(f"step {number}: resulting state diverged")
    if state != result.final_state:
        raise ReplayError("final state diverged")
