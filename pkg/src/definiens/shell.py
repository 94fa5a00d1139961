"""Interactive toplevel and batch runner.

The toplevel prompts with ``G3> ``, evaluates one directive or query per
line, and browses answers Prolog-style: ``;`` asks for the next answer, a
bare newline accepts and prints ``yes``, and exhaustion with nothing shown
prints ``no``.
"""

from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

from .definitions import ClausalDefinition, Definition, Mode
from .machine import (
    EXHAUSTED,
    Cancelled,
    DefaultObserver,
    Delegate,
    DepthLimitExceeded,
    Machine,
    MachineConfig,
    Query,
    ResultDefinition,
    ResultType,
    StateDefinition,
)
from .methods import (
    ArityMismatch,
    MethodDefinition,
    UnknownDefinition,
    instantiate,
)
from .syntax import (
    DataDefinitionDecl,
    HaltDirective,
    LoadDirective,
    MethodDefinitionDecl,
    ParseError,
    QueryExpr,
    RestypeDirective,
    parse_directive,
    parse_program,
    parse_query,
)
from .treefile import FormatError, load_tree_file

__all__ = [
    "PROMPT",
    "LoadReport",
    "Session",
    "format_answer",
    "load_resources",
    "eval_line",
    "run_repl",
    "main",
]

PROMPT = "G3> "

_DIRECTIVE_WORDS = ("restype", "load", "halt")
_FIRST_WORD = re.compile(r"^\s*([a-z][A-Za-z0-9_]*)")


@dataclass
class LoadReport:
    """What a load did: one line per loaded item, warning, or failure."""

    lines: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def __str__(self) -> str:
        return "\n".join(self.lines + self.errors)


class Session:
    """Holds the loaded definitions and methods plus the current machine."""

    def __init__(
        self,
        result_type: ResultType = ResultType.VARS_ONLY,
        answer_limit: int | None = None,
        depth_limit: int | None = None,
        occurs_check: bool = False,
        observer: DefaultObserver | None = None,
        delegate: Delegate | None = None,
    ) -> None:
        self.definitions: dict[str, Definition] = {}
        self.methods: dict[str, MethodDefinition] = {}
        self.result_type = result_type
        self.answer_limit = answer_limit
        self.depth_limit = depth_limit
        self.occurs_check = occurs_check
        self.observer = observer or DefaultObserver()
        self.delegate = delegate
        self.machine: Machine | None = None
        self.halted = False
        self._browsing = False
        self._shown = 0

    @property
    def browsing(self) -> bool:
        return self._browsing

    def new_machine(self) -> Machine:
        config = MachineConfig(
            result_type=self.result_type,
            answer_limit=self.answer_limit,
            depth_limit=self.depth_limit,
            occurs_check=self.occurs_check,
        )
        self.machine = Machine(config, self.observer, self.delegate)
        return self.machine

    def resolve_query(self, expr: QueryExpr) -> Query:
        method = self.methods.get(expr.method_name)
        if method is None:
            raise UnknownDefinition(
                f"'{expr.method_name}' names no known method"
            )
        args = []
        for name in expr.args:
            definition = self.definitions.get(name)
            if definition is None:
                raise UnknownDefinition(f"'{name}' names no known definition")
            args.append(definition)
        instance = instantiate(method, args, self.definitions, self.methods)
        return Query(instance, StateDefinition.make(expr.initial_state))


def format_answer(
    answer, kind: ResultType, observer: DefaultObserver | None = None
) -> str:
    """Render one answer for the chosen result type.

    vars_only shows ``Var = term`` lines (nothing for variable-free
    queries), final shows the final state, trace shows the numbered steps.
    """
    observer = observer or DefaultObserver()
    payload = observer.transform_result(answer.result, kind)
    if payload is None:
        return "\n".join(
            f"{name} = {term}" for name, term in answer.substitution.items()
        )
    if isinstance(payload, StateDefinition):
        return str(payload)
    if isinstance(payload, ResultDefinition):
        return "\n".join(
            f"{number}. [{step.equation_index}] {step.selected_atom} -> "
            f"{step.definition_name}:{step.clause_id} {step.resulting_state}"
            for number, step in enumerate(payload.steps, start=1)
        )
    return str(payload)


def _install(session: Session, item, source: str, report: LoadReport) -> None:
    if isinstance(item, DataDefinitionDecl):
        if item.name in session.definitions:
            report.lines.append(f"warning: redefined definition {item.name}")
        session.definitions[item.name] = ClausalDefinition(
            item.name, item.equations, mode=Mode.UNIFY, mutable=True
        )
        report.lines.append(f"loaded definition {item.name} ({source})")
    elif isinstance(item, MethodDefinitionDecl):
        if item.name in session.methods:
            report.lines.append(f"warning: redefined method {item.name}")
        session.methods[item.name] = item.to_method()
        report.lines.append(f"loaded method {item.name} ({source})")


def _load_file(session: Session, path: Path, report: LoadReport) -> None:
    try:
        if path.suffix == ".tree":
            tree = load_tree_file(path)
            if tree.name in session.definitions:
                report.lines.append(f"warning: redefined definition {tree.name}")
            session.definitions[tree.name] = tree
            report.lines.append(f"loaded definition {tree.name} ({path})")
        else:
            for item in parse_program(path.read_text()):
                _install(session, item, str(path), report)
    except (ParseError, FormatError, ValueError, OSError) as exc:
        report.errors.append(f"error: {path}: {exc}")


def load_resources(session: Session, path: str | Path) -> LoadReport:
    """Load a ``.g3``/``.tree`` file, or every such file in a directory."""
    report = LoadReport()
    path = Path(path)
    if path.is_dir():
        files = sorted(
            p for p in path.iterdir() if p.suffix in (".g3", ".tree")
        )
        for file in files:
            _load_file(session, file, report)
    elif path.exists():
        _load_file(session, path, report)
    else:
        report.errors.append(f"error: {path}: no such file or directory")
    return report


def _pull(session: Session) -> str:
    try:
        answer = session.machine.next_answer()
    except DepthLimitExceeded:
        session._browsing = False
        return "error: depth limit exceeded"
    except Cancelled:
        session._browsing = False
        return "cancelled"
    if answer is EXHAUSTED:
        session._browsing = False
        return "no" if session._shown == 0 else "yes"
    session._shown += 1
    session._browsing = True
    block = format_answer(answer, session.result_type, session.observer)
    return f"{block} ?" if block else "?"


def eval_line(session: Session, raw: str) -> str:
    """Evaluate one toplevel line and return the text to display."""
    line = raw.strip()
    if session.halted:
        return ""
    if session._browsing:
        if line == ";":
            return _pull(session)
        session._browsing = False
        accepted = "yes"
        if not line:
            return accepted
        rest = eval_line(session, line)
        return f"{accepted}\n{rest}" if rest else accepted
    if not line:
        return ""
    if line == ";":
        return "error: no answers are being browsed"
    head = _FIRST_WORD.match(line)
    if head and head.group(1) in _DIRECTIVE_WORDS:
        try:
            directive = parse_directive(line)
        except ParseError as exc:
            return f"error: {exc}"
        if isinstance(directive, HaltDirective):
            session.halted = True
            return ""
        if isinstance(directive, RestypeDirective):
            session.result_type = ResultType.from_name(directive.kind)
            return ""
        if isinstance(directive, LoadDirective):
            return str(load_resources(session, directive.path))
    try:
        expr = parse_query(line)
        query = session.resolve_query(expr)
    except (ParseError, UnknownDefinition, ArityMismatch, ValueError) as exc:
        return f"error: {exc}"
    session.new_machine().set_query(query)
    session._shown = 0
    return _pull(session)


def run_repl(
    session: Session, instream: IO[str], outstream: IO[str], echo: bool = False
) -> None:
    """Drive the ``G3>`` loop until halt or end of input.

    With ``echo`` on (the default for piped input), the consumed input is
    written back so the output reads like a terminal transcript.
    """
    while not session.halted:
        outstream.write(PROMPT)
        outstream.flush()
        raw = instream.readline()
        if raw == "":
            break
        if echo:
            outstream.write(raw if raw.endswith("\n") else raw + "\n")
        out = _eval_guarded(session, raw)
        while session._browsing:
            outstream.write(out)
            if not echo:
                outstream.write(" ")
            outstream.flush()
            raw = instream.readline()
            if raw == "":
                outstream.write("\n")
                out = _eval_guarded(session, "")
                break
            token = raw.strip()
            if echo:
                outstream.write((f" {token}" if token else "") + "\n")
            out = _eval_guarded(session, token)
        if out:
            outstream.write(out + "\n")
        outstream.flush()


def _eval_guarded(session: Session, line: str) -> str:
    try:
        return eval_line(session, line)
    except KeyboardInterrupt:
        if session.machine is not None:
            session.machine.cancel()
        session._browsing = False
        return "cancelled"


def _run_batch(session: Session, text: str) -> int:
    try:
        query = session.resolve_query(parse_query(text))
    except (ParseError, UnknownDefinition, ArityMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    machine = session.new_machine()
    machine.set_query(query)
    count = 0
    try:
        while True:
            answer = machine.next_answer()
            if answer is EXHAUSTED:
                break
            block = format_answer(answer, session.result_type, session.observer)
            if count:
                print()
            print(block if block else "yes")
            count += 1
    except DepthLimitExceeded:
        print("error: depth limit exceeded", file=sys.stderr)
        return 0 if count else 2
    if count == 0:
        print("no")
        return 1
    return 0


def _arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="definiens",
        description="Definitional-programming toplevel and batch runner.",
    )
    parser.add_argument(
        "--load",
        action="append",
        default=[],
        metavar="PATH",
        help="load a .g3/.tree file or a directory of them (repeatable)",
    )
    parser.add_argument(
        "--eval",
        dest="eval_query",
        metavar="QUERY",
        help="run one query, print all answers, and exit",
    )
    parser.add_argument(
        "--restype",
        choices=["vars_only", "final", "trace"],
        default="vars_only",
        help="how answers are presented",
    )
    parser.add_argument(
        "--answers", type=int, metavar="N", help="stop after N answers"
    )
    parser.add_argument(
        "--depth", type=int, metavar="N", help="bound the reduction depth"
    )
    parser.add_argument(
        "--echo",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="echo consumed input (default: on when stdin is not a tty)",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _arg_parser().parse_args(argv)
    try:
        session = Session(
            result_type=ResultType.from_name(args.restype),
            answer_limit=args.answers,
            depth_limit=args.depth,
        )
        MachineConfig(answer_limit=args.answers, depth_limit=args.depth)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    batch = args.eval_query is not None
    load_failed = False
    for path in args.load:
        report = load_resources(session, path)
        if report.errors:
            load_failed = True
            print("\n".join(report.errors), file=sys.stderr)
        if not batch and report.lines:
            print("\n".join(report.lines))
    if batch:
        if load_failed:
            return 2
        return _run_batch(session, args.eval_query)
    echo = args.echo if args.echo is not None else not sys.stdin.isatty()
    try:
        run_repl(session, sys.stdin, sys.stdout, echo=echo)
    except KeyboardInterrupt:
        print()
    return 0
