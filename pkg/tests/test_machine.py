"""Tests for the backtracking machine: answers, traces, limits, hooks."""

import dataclasses

import pytest

import corpus
from definiens import (
    EXHAUSTED,
    TRUE,
    Answer,
    Atom,
    Cancelled,
    Compound,
    Const,
    DefaultObserver,
    Delegate,
    DepthLimitExceeded,
    LeftMostObserver,
    Machine,
    MachineBusy,
    MachineConfig,
    Query,
    ReplayError,
    ResultDefinition,
    ResultType,
    StateDefinition,
    TrueCondition,
    Var,
    instantiate,
    list_term,
    parse_query,
    replay,
)


@pytest.fixture(scope="module")
def namespaces():
    return corpus.build_namespaces()


def make_query(namespaces, text):
    definitions, methods = namespaces
    expr = parse_query(text)
    instance = instantiate(
        methods[expr.method_name],
        [definitions[name] for name in expr.args],
        definitions,
        methods,
    )
    return Query(instance, StateDefinition.make(expr.initial_state))


def run(namespaces, text, config=None, observer=None, delegate=None):
    machine = Machine(config, observer=observer, delegate=delegate)
    machine.set_query(make_query(namespaces, text))
    return machine


PERM_ABC = "prolog(permutation){true = perm([a,b,c],L)}."


# -- answer streams -------------------------------------------------------------


def test_permutations_enumerate_in_clause_order(namespaces):
    machine = run(namespaces, PERM_ABC)
    seen = []
    while True:
        answer = machine.next_answer()
        if answer is EXHAUSTED:
            break
        assert list(answer.substitution) == ["L"]
        seen.append(str(answer.substitution["L"]))
    assert seen == [vector[0] for vector in corpus.PERM_ABC_ANSWERS]
    assert machine.next_answer() is EXHAUSTED  # stays exhausted


def test_first_permutation_answer_is_exact(namespaces):
    machine = run(namespaces, PERM_ABC)
    answer = machine.next_answer()
    expected = list_term([Const("a"), Const("b"), Const("c")])
    assert answer.substitution == {"L": expected}


def test_select_answers(namespaces):
    machine = run(namespaces, "prolog(permutation){true = select(X,[a,b],Zs)}.")
    answers = machine.all_answers()
    got = [(str(a.substitution["X"]), str(a.substitution["Zs"])) for a in answers]
    assert got == corpus.SELECT_AB_ANSWERS


def test_all_answers_continues_from_the_current_point(namespaces):
    machine = run(namespaces, PERM_ABC)
    first = machine.next_answer()
    second = machine.next_answer()
    rest = machine.all_answers()
    assert len(rest) == 4
    assert first not in rest and second not in rest


def test_all_answers_respects_its_limit(namespaces):
    machine = run(namespaces, PERM_ABC)
    assert len(machine.all_answers(limit=2)) == 2
    assert len(machine.all_answers()) == 4


def test_variable_free_success_has_an_empty_substitution(namespaces):
    machine = run(namespaces, "prolog(permutation){true = perm([a],[a])}.")
    answer = machine.next_answer()
    assert answer.substitution == {}
    assert machine.next_answer() is EXHAUSTED


def test_true_goal_succeeds_without_steps(namespaces):
    machine = run(namespaces, "prolog(permutation){true = true}.")
    answer = machine.next_answer()
    assert answer.substitution == {}
    assert answer.result.steps == ()
    assert machine.next_answer() is EXHAUSTED


def test_failing_goal_is_exhausted_without_answers(namespaces):
    machine = run(namespaces, "prolog(permutation){true = perm([a],[b,c])}.")
    assert machine.next_answer() is EXHAUSTED


def test_empty_state_has_no_answers(namespaces):
    machine = run(namespaces, "prolog(permutation){}.")
    assert machine.next_answer() is EXHAUSTED


def test_bare_variable_goals_flounder(namespaces):
    machine = run(namespaces, "prolog(permutation){true = X}.")
    assert machine.next_answer() is EXHAUSTED
    machine = run(namespaces, "prolog(permutation){true = (X, perm([],L))}.")
    assert machine.next_answer() is EXHAUSTED


def test_stop_guard_fires_on_any_true_equation(namespaces):
    # with one equation already true, the stop equation applies immediately
    # and the other goal is never attempted
    machine = run(
        namespaces, "prolog(permutation){true = true, true = select(X,[a],Z)}."
    )
    answer = machine.next_answer()
    assert answer.substitution == {}
    assert answer.result.steps == ()


def test_conjunction_goals_reduce_left_to_right(namespaces):
    machine = run(
        namespaces, "prolog(lists){true = (member(X,[a,b]), member(X,[b,c]))}."
    )
    answers = machine.all_answers()
    assert [str(a.substitution["X"]) for a in answers] == ["b"]


def test_runs_are_deterministic(namespaces):
    first = run(namespaces, PERM_ABC).all_answers()
    second = run(namespaces, PERM_ABC).all_answers()
    assert first == second


# -- queries and configuration -----------------------------------------------------


def test_query_collects_initial_variables_in_order(namespaces):
    query = make_query(
        namespaces, "prolog(permutation){true = select(X,[a,b],Zs)}."
    )
    assert query.initial_vars == ("X", "Zs")


def test_next_answer_requires_a_query():
    with pytest.raises(ValueError):
        Machine().next_answer()


def test_config_rejects_nonpositive_limits():
    with pytest.raises(ValueError):
        MachineConfig(answer_limit=0)
    with pytest.raises(ValueError):
        MachineConfig(depth_limit=-1)
    with pytest.raises(ValueError):
        ResultType.from_name("sideways")


def test_answer_limit_caps_the_stream(namespaces):
    machine = run(namespaces, PERM_ABC, MachineConfig(answer_limit=3))
    answers = machine.all_answers()
    assert len(answers) == 3
    assert machine.next_answer() is EXHAUSTED


def test_set_query_resets_the_machine(namespaces):
    machine = run(namespaces, PERM_ABC, MachineConfig(answer_limit=2))
    machine.all_answers()
    machine.set_query(make_query(namespaces, PERM_ABC))
    assert len(machine.all_answers()) == 2


# -- depth limits -------------------------------------------------------------------


PERM_AB = "prolog(permutation){true = perm([a,b],L)}."


def collect_until_depth_error(machine):
    answers = []
    try:
        while True:
            answer = machine.next_answer()
            if answer is EXHAUSTED:
                return answers, False
            answers.append(str(answer.substitution["L"]))
    except DepthLimitExceeded:
        return answers, True


def test_depth_limit_prunes_everything_when_too_tight(namespaces):
    machine = run(namespaces, PERM_AB, MachineConfig(depth_limit=4))
    assert collect_until_depth_error(machine) == ([], True)


def test_depth_limit_reports_partial_enumerations(namespaces):
    machine = run(namespaces, PERM_AB, MachineConfig(depth_limit=5))
    assert collect_until_depth_error(machine) == (["[a,b]"], True)


def test_generous_depth_limits_stay_silent(namespaces):
    machine = run(namespaces, PERM_AB, MachineConfig(depth_limit=6))
    assert collect_until_depth_error(machine) == (["[a,b]", "[b,a]"], False)
    machine = run(namespaces, PERM_AB, MachineConfig(depth_limit=20))
    assert collect_until_depth_error(machine) == (["[a,b]", "[b,a]"], False)


# -- traces and results ---------------------------------------------------------------


def test_traces_close_on_a_true_state(namespaces):
    machine = run(namespaces, PERM_AB)
    for answer in machine.all_answers():
        result = answer.result
        assert result.steps[-1].resulting_state == result.final_state
        for _, right in result.final_state.equations:
            assert isinstance(right, TrueCondition)
        assert result.steps[0].definition_name == "permutation"
        assert [s.resulting_state for s in result.steps][-1] == result.final_state


def test_trace_fresh_bases_never_decrease(namespaces):
    machine = run(namespaces, PERM_ABC)
    for answer in machine.all_answers():
        bases = [step.fresh_base for step in answer.result.steps]
        assert bases == sorted(bases)


def test_single_step_trace(namespaces):
    machine = run(namespaces, "prolog(permutation){true = perm([],L)}.")
    answer = machine.next_answer()
    (step,) = answer.result.steps
    assert step.equation_index == 0
    assert step.clause_id == 0
    assert step.selected_atom == Atom(Compound("perm", (Const("nil"), Var("L"))))
    assert step.unifier == {"L": Const("nil")}
    assert str(step.resulting_state) == "{true = true}"


def test_result_definition_must_close_its_trace(namespaces):
    machine = run(namespaces, PERM_AB)
    result = machine.next_answer().result
    with pytest.raises(ValueError):
        ResultDefinition(result.initial_state, result.steps, result.initial_state)


def test_state_rendering():
    state = StateDefinition.make(
        [(TRUE, Atom(Compound("p", (Var("X"),))))]
    )
    assert str(state) == "{true = p(X)}"
    both = StateDefinition.make(
        [(TRUE, corpus.parse_query("m{true = (p, q)}.").initial_state[0][1])]
    )
    assert str(both) == "{true = (p, q)}"


# -- replay ----------------------------------------------------------------------------


def test_replay_accepts_every_recorded_answer(namespaces):
    definitions, _ = namespaces
    machine = run(namespaces, PERM_ABC)
    for answer in machine.all_answers():
        replay(answer.result, definitions)


def test_replay_rejects_tampered_unifiers(namespaces):
    definitions, _ = namespaces
    machine = run(namespaces, "prolog(permutation){true = perm([],L)}.")
    result = machine.next_answer().result
    (step,) = result.steps
    forged = dataclasses.replace(step, unifier={"L": Const("a")})
    bad = ResultDefinition(result.initial_state, (forged,), result.final_state)
    with pytest.raises(ReplayError, match="unifier"):
        replay(bad, definitions)


def test_replay_rejects_tampered_states(namespaces):
    definitions, _ = namespaces
    machine = run(namespaces, "prolog(permutation){true = perm([],L)}.")
    result = machine.next_answer().result
    (step,) = result.steps
    wrong_state = StateDefinition.make([(TRUE, Atom(Const("z")))])
    forged = dataclasses.replace(step, resulting_state=wrong_state)
    bad = ResultDefinition(result.initial_state, (forged,), wrong_state)
    with pytest.raises(ReplayError, match="state"):
        replay(bad, definitions)


def test_replay_requires_the_named_definitions(namespaces):
    machine = run(namespaces, "prolog(permutation){true = perm([],L)}.")
    result = machine.next_answer().result
    with pytest.raises(ReplayError, match="unknown definition"):
        replay(result, {})


def test_replay_notices_clause_removal(namespaces):
    definitions, _ = namespaces
    machine = run(namespaces, "prolog(permutation){true = perm([],L)}.")
    result = machine.next_answer().result
    from definiens import ClausalDefinition, Mode

    gutted = ClausalDefinition(
        "permutation", definitions["permutation"].equations[2:], mode=Mode.UNIFY
    )
    with pytest.raises(ReplayError):
        replay(result, {"permutation": gutted})


# -- observers ----------------------------------------------------------------------


def test_leftmost_equals_default_on_single_equation_states(namespaces):
    plain = run(namespaces, PERM_ABC).all_answers()
    leftmost = run(namespaces, PERM_ABC, observer=LeftMostObserver()).all_answers()
    assert plain == leftmost


class ReversingObserver(DefaultObserver):
    def order_definiens(self, elements):
        return list(reversed(range(len(elements))))


def test_reversing_observer_reverses_the_enumeration(namespaces):
    machine = run(namespaces, PERM_ABC, observer=ReversingObserver())
    got = [str(a.substitution["L"]) for a in machine.all_answers()]
    assert got == [vector[0] for vector in reversed(corpus.PERM_ABC_ANSWERS)]


class BrokenSelector(DefaultObserver):
    def select_equations(self, step, state, hints=()):
        return [0, 0]


class BrokenOrderer(DefaultObserver):
    def order_definiens(self, elements):
        return [len(elements)]


@pytest.mark.parametrize("observer", [BrokenSelector(), BrokenOrderer()])
def test_invalid_observer_indices_are_rejected(namespaces, observer):
    machine = run(namespaces, PERM_ABC, observer=observer)
    with pytest.raises(ValueError, match="observer returned invalid"):
        machine.next_answer()


def test_transform_result_controls_presentation(namespaces):
    machine = run(namespaces, "prolog(permutation){true = perm([],L)}.")
    answer = machine.next_answer()
    observer = DefaultObserver()
    assert observer.transform_result(answer.result, ResultType.VARS_ONLY) is None
    final = observer.transform_result(answer.result, ResultType.FINAL)
    assert str(final) == "{true = true}"
    trace = observer.transform_result(answer.result, ResultType.TRACE)
    assert trace is answer.result


# -- delegates and control ------------------------------------------------------------


class Recorder(Delegate):
    def __init__(self):
        self.events = []

    def on_query_set(self, query):
        self.events.append("query_set")

    def on_step(self, step):
        self.events.append("step")

    def on_answer(self, answer):
        self.events.append("answer")

    def on_exhausted(self):
        self.events.append("exhausted")


def test_delegate_event_ordering(namespaces):
    recorder = Recorder()
    machine = run(
        namespaces,
        "prolog(permutation){true = select(X,[a,b],Zs)}.",
        delegate=recorder,
    )
    machine.all_answers()
    events = recorder.events
    assert events[0] == "query_set"
    assert events[-1] == "exhausted"
    assert events.count("answer") == 2
    assert events.count("exhausted") == 1
    assert "step" in events
    assert events.index("step") < events.index("answer")


class Reentrant(Delegate):
    def __init__(self):
        self.machine = None
        self.caught = []

    def on_step(self, step):
        try:
            self.machine.next_answer()
        except MachineBusy:
            self.caught.append("next_answer")
        try:
            self.machine.set_query(self.machine._query)
        except MachineBusy:
            self.caught.append("set_query")
        raise StopIteration  # cut the run short; one step is enough


def test_reentrant_use_raises_machine_busy(namespaces):
    delegate = Reentrant()
    machine = run(namespaces, PERM_ABC, delegate=delegate)
    delegate.machine = machine
    with pytest.raises(RuntimeError):  # StopIteration inside a generator
        machine.next_answer()
    assert delegate.caught == ["next_answer", "set_query"]


class CancelAfter(Delegate):
    def __init__(self, steps):
        self.remaining = steps
        self.machine = None

    def on_step(self, step):
        self.remaining -= 1
        if self.remaining == 0:
            self.machine.cancel()


def test_cancel_stops_at_the_next_step_boundary(namespaces):
    delegate = CancelAfter(3)
    machine = run(namespaces, PERM_ABC, delegate=delegate)
    delegate.machine = machine
    with pytest.raises(Cancelled):
        machine.all_answers()


def test_cancel_before_the_first_pull(namespaces):
    machine = run(namespaces, PERM_ABC)
    machine.cancel()
    with pytest.raises(Cancelled):
        machine.next_answer()
