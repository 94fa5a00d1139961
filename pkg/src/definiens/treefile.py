"""Indentation-structured tree files served through the definition contract.

A ``.tree`` file holds one ground label per line; children are indented by
two extra spaces, ``%`` starts a comment, and blank lines are skipped.
Internal nodes are defined by the conjunction of their children; leaves are
outside the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .definitions import (
    ClausalDefinition,
    Definition,
    DefiniensElement,
    Equation,
    Mode,
)
from .syntax import ParseError, parse_term
from .terms import (
    Atom,
    Condition,
    FreshVars,
    Term,
    as_condition,
    conjoin,
    is_ground,
    match,
)

__all__ = ["FormatError", "TreeNode", "TreeDefinition", "load_tree_file", "as_clausal"]

INDENT = 2


class FormatError(Exception):
    """A malformed tree file; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.message = message
        self.line = line


@dataclass
class TreeNode:
    label: Term
    children: list["TreeNode"] = field(default_factory=list)


class TreeDefinition(Definition):
    """A forest of ground-labelled nodes read as a MATCH-mode definition.

    The definiens is computed directly from the tree structure: every
    internal node whose label equals the queried atom contributes its
    children's conjunction, pre-order, with the pre-order ordinal of the
    internal node as the clause id.
    """

    def __init__(
        self, name: str, roots: list[TreeNode], source_path: str | None = None
    ) -> None:
        self.name = name
        self.roots = list(roots)
        self.source_path = source_path

    def __repr__(self) -> str:
        return f"TreeDefinition({self.name!r}, {len(self.roots)} roots)"

    def _internal_nodes(self) -> Iterator[TreeNode]:
        def walk(node: TreeNode) -> Iterator[TreeNode]:
            if node.children:
                yield node
            for child in node.children:
                yield from walk(child)

        for root in self.roots:
            yield from walk(root)

    def definiens(
        self,
        atom: Term | Condition,
        fresh: FreshVars | None = None,
        occurs_check: bool = False,
    ) -> list[DefiniensElement]:
        goal = as_condition(atom)
        out: list[DefiniensElement] = []
        for ordinal, node in enumerate(self._internal_nodes()):
            sigma = match(as_condition(node.label), goal)
            if sigma is None:
                continue
            body = conjoin(as_condition(child.label) for child in node.children)
            out.append(DefiniensElement(body, sigma, ordinal))
        return out


def as_clausal(tree: TreeDefinition) -> ClausalDefinition:
    """The equivalent clausal definition: one MATCH equation per internal node."""
    equations = []
    for ordinal, node in enumerate(tree._internal_nodes()):
        body = conjoin(as_condition(child.label) for child in node.children)
        equations.append(Equation(Atom(node.label), body, ordinal))
    return ClausalDefinition(tree.name, equations, mode=Mode.MATCH, mutable=False)


def load_tree_file(path: str | Path) -> TreeDefinition:
    """Read a ``.tree`` file; indentation must move in whole two-space steps."""
    path = Path(path)
    text = path.read_text()
    roots: list[TreeNode] = []
    stack: list[TreeNode] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip(" "))
        if line.lstrip(" ").startswith("\t"):
            raise FormatError("tabs are not allowed in indentation", line_no)
        if indent % INDENT:
            raise FormatError(
                f"indentation must be a multiple of {INDENT} spaces", line_no
            )
        depth = indent // INDENT
        if depth > len(stack):
            raise FormatError("indentation jumps more than one level", line_no)
        try:
            label = parse_term(line.strip())
        except ParseError as exc:
            raise FormatError(f"bad label: {exc.message}", line_no) from exc
        if not is_ground(label):
            raise FormatError("labels must be ground", line_no)
        node = TreeNode(label)
        if depth == 0:
            roots.append(node)
        else:
            stack[depth - 1].children.append(node)
        del stack[depth:]
        stack.append(node)
    return TreeDefinition(path.stem, roots, source_path=str(path))
