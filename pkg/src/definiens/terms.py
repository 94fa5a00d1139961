"""Term and condition language with substitutions.

Terms are variables, constants, and compounds; conditions are ``true``,
atoms, and flat conjunctions.  All values are immutable; the only mutable
object in this module is the fresh-name counter used for renaming.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = [
    "Var",
    "Const",
    "Compound",
    "Term",
    "TrueCondition",
    "TRUE",
    "Atom",
    "Conj",
    "Condition",
    "Substitution",
    "NIL",
    "cons",
    "list_term",
    "split_list",
    "as_condition",
    "conjoin",
    "simplify",
    "variables",
    "is_ground",
    "occurs_in",
    "apply",
    "compose",
    "restrict",
    "unify",
    "match",
    "FreshVars",
    "rename_apart",
]


@dataclass(frozen=True)
class Var:
    """A logic variable; names start with an uppercase letter or ``_``."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    """A constant: a lowercase identifier or an integer."""

    name: str | int

    def __str__(self) -> str:
        return str(self.name)


@dataclass(frozen=True)
class Compound:
    """A compound term ``functor(arg1, ..., argN)`` with N >= 1."""

    functor: str
    args: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError("compound terms need at least one argument")

    def __str__(self) -> str:
        if self.functor == "cons" and len(self.args) == 2:
            items, tail = split_list(self)
            body = ",".join(str(i) for i in items)
            if tail == NIL:
                return f"[{body}]"
            return f"[{body}|{tail}]"
        return f"{self.functor}({','.join(str(a) for a in self.args)})"


Term = Var | Const | Compound

NIL = Const("nil")
_TRUE_CONST = Const("true")


def cons(head: Term, tail: Term) -> Compound:
    return Compound("cons", (head, tail))


def list_term(items: Iterable[Term], tail: Term = NIL) -> Term:
    """Build the cons/nil encoding of ``[i1, ..., iN | tail]``."""
    out = tail
    for item in reversed(list(items)):
        out = cons(item, out)
    return out


def split_list(term: Term) -> tuple[list[Term], Term]:
    """Unfold a cons chain into (items, tail); tail is NIL for proper lists."""
    items: list[Term] = []
    while isinstance(term, Compound) and term.functor == "cons" and len(term.args) == 2:
        items.append(term.args[0])
        term = term.args[1]
    return items, term


@dataclass(frozen=True)
class TrueCondition:
    """The distinguished trivially-true condition."""

    def __str__(self) -> str:
        return "true"


TRUE = TrueCondition()


@dataclass(frozen=True)
class Atom:
    """A single term used as a condition.

    Canonical definition heads never wrap a variable, but states reached
    during a computation may; reducing such an atom flounders rather than
    erroring, so the representation admits it.
    """

    term: Term

    def __str__(self) -> str:
        return str(self.term)


@dataclass(frozen=True)
class Conj:
    """An ordered conjunction of at least two conditions."""

    items: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        if len(self.items) < 2:
            raise ValueError("conjunctions need at least two conditions")

    def __str__(self) -> str:
        parts = []
        for item in self.items:
            text = str(item)
            if isinstance(item, Conj):
                text = f"({text})"
            parts.append(text)
        return ", ".join(parts)


Condition = TrueCondition | Atom | Conj

Substitution = dict[str, Term]


def as_condition(x: Term | Condition) -> Condition:
    """View a term as a condition; the constant ``true`` becomes TRUE."""
    if isinstance(x, (TrueCondition, Atom, Conj)):
        return x
    if x == _TRUE_CONST:
        return TRUE
    return Atom(x)


def _atom(term: Term) -> Condition:
    return TRUE if term == _TRUE_CONST else Atom(term)


def conjoin(parts: Iterable[Condition]) -> Condition:
    """Combine conditions into canonical form: flat, true-free, never unary."""
    flat: list[Condition] = []
    for part in parts:
        if isinstance(part, TrueCondition):
            continue
        if isinstance(part, Conj):
            sub = conjoin(part.items)
            if isinstance(sub, Conj):
                flat.extend(sub.items)
            elif not isinstance(sub, TrueCondition):
                flat.append(sub)
        else:
            flat.append(part)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return Conj(tuple(flat))


def simplify(condition: Condition) -> Condition:
    """Canonicalize a condition.

    Flattens nested conjunctions, drops ``true`` conjuncts, collapses empty
    conjunctions to ``true`` and singletons to their item.  Idempotent.
    """
    if isinstance(condition, TrueCondition):
        return TRUE
    if isinstance(condition, Atom):
        return _atom(condition.term)
    if isinstance(condition, Conj):
        return conjoin(simplify(item) for item in condition.items)
    raise TypeError(f"not a condition: {condition!r}")


def variables(x) -> list[str]:
    """Variable names occurring in a term/condition/tuple, first occurrence first."""
    seen: set[str] = set()
    out: list[str] = []

    def walk(y) -> None:
        if isinstance(y, Var):
            if y.name not in seen:
                seen.add(y.name)
                out.append(y.name)
        elif isinstance(y, Compound):
            for arg in y.args:
                walk(arg)
        elif isinstance(y, Atom):
            walk(y.term)
        elif isinstance(y, Conj):
            for item in y.items:
                walk(item)
        elif isinstance(y, (tuple, list)):
            for item in y:
                walk(item)

    walk(x)
    return out


def is_ground(x) -> bool:
    return not variables(x)


def occurs_in(name: str, x) -> bool:
    if isinstance(x, Var):
        return x.name == name
    if isinstance(x, Compound):
        return any(occurs_in(name, a) for a in x.args)
    if isinstance(x, Atom):
        return occurs_in(name, x.term)
    if isinstance(x, Conj):
        return any(occurs_in(name, i) for i in x.items)
    return False


def apply(x, substitution: Substitution):
    """Simultaneously replace bound variables in a term or condition.

    Conditions are re-canonicalized on the way out, so substituting the
    constant ``true`` into an atom yields TRUE.
    """
    if isinstance(x, Var):
        return substitution.get(x.name, x)
    if isinstance(x, (Const, TrueCondition)):
        return x
    if isinstance(x, Compound):
        return Compound(x.functor, tuple(apply(a, substitution) for a in x.args))
    if isinstance(x, Atom):
        return _atom(apply(x.term, substitution))
    if isinstance(x, Conj):
        return conjoin(apply(item, substitution) for item in x.items)
    raise TypeError(f"cannot substitute into {x!r}")


def compose(first: Substitution, second: Substitution) -> Substitution:
    """Sequential composition: apply(x, compose(s1, s2)) == apply(apply(x, s1), s2)."""
    out: Substitution = {}
    for name, value in first.items():
        value = apply(value, second)
        if value != Var(name):
            out[name] = value
    for name, value in second.items():
        if name not in first and value != Var(name):
            out[name] = value
    return out


def restrict(substitution: Substitution, names: Iterable[str]) -> Substitution:
    keep = set(names)
    return {name: term for name, term in substitution.items() if name in keep}


def _decompose(a, b) -> list[tuple] | None:
    """Shared structural cases for unify/match; None signals a clash."""
    if isinstance(a, TrueCondition) or isinstance(b, TrueCondition):
        return [] if a == b else None
    if isinstance(a, Atom) and isinstance(b, Atom):
        return [(a.term, b.term)]
    if isinstance(a, Conj) and isinstance(b, Conj):
        if len(a.items) != len(b.items):
            return None
        return list(zip(a.items, b.items))
    if isinstance(a, (Atom, Conj)) or isinstance(b, (Atom, Conj)):
        return None  # mixed condition kinds never agree
    return None


def _coerce_pair(a, b) -> tuple:
    """Lift a mixed term/condition pair so both sides are the same kind."""
    a_cond = isinstance(a, (TrueCondition, Atom, Conj))
    b_cond = isinstance(b, (TrueCondition, Atom, Conj))
    if a_cond != b_cond:
        return as_condition(a), as_condition(b)
    return a, b


def unify(s, t, occurs_check: bool = False) -> Substitution | None:
    """Most general unifier of two terms or conditions, or None.

    Failure is an ordinary result, not an error.  Variables range over
    terms only, so nothing unifies a variable with ``true`` or with a
    conjunction.  With occurs_check off (the default), unify(X, f(X))
    binds X to f(X); cyclic applications are then the caller's risk.
    """
    s, t = _coerce_pair(s, t)
    pending: list[tuple] = [(s, t)]
    sub: Substitution = {}

    def bind(name: str, value) -> bool:
        nonlocal pending
        if occurs_check and occurs_in(name, value):
            return False
        single = {name: value}
        pending = [(apply(a, single), apply(b, single)) for a, b in pending]
        for key in list(sub):
            sub[key] = apply(sub[key], single)
        sub[name] = value
        return True

    while pending:
        a, b = pending.pop()
        if a == b:
            continue
        if isinstance(a, (TrueCondition, Atom, Conj)) or isinstance(
            b, (TrueCondition, Atom, Conj)
        ):
            a, b = _coerce_pair(a, b)
            parts = _decompose(a, b)
            if parts is None:
                return None
            pending.extend(reversed(parts))
            continue
        if isinstance(a, Var):
            if not bind(a.name, b):
                return None
            continue
        if isinstance(b, Var):
            if not bind(b.name, a):
                return None
            continue
        if (
            isinstance(a, Compound)
            and isinstance(b, Compound)
            and a.functor == b.functor
            and len(a.args) == len(b.args)
        ):
            pending.extend(reversed(list(zip(a.args, b.args))))
            continue
        return None
    return sub


def match(pattern, subject) -> Substitution | None:
    """One-way matching: bind pattern variables so the pattern equals the subject.

    The subject is never instantiated; a pattern constant facing a subject
    variable fails, and ``match(true, X)`` fails because ``true`` is not a
    term.  Repeated pattern variables must match equal subterms.
    """
    pattern, subject = _coerce_pair(pattern, subject)
    pending: list[tuple] = [(pattern, subject)]
    sub: Substitution = {}
    while pending:
        p, s = pending.pop()
        if isinstance(p, (TrueCondition, Atom, Conj)) or isinstance(
            s, (TrueCondition, Atom, Conj)
        ):
            p, s = _coerce_pair(p, s)
            parts = _decompose(p, s)
            if parts is None:
                return None
            pending.extend(reversed(parts))
            continue
        if isinstance(p, Var):
            if p.name in sub:
                if sub[p.name] != s:
                    return None
            else:
                sub[p.name] = s
            continue
        if isinstance(p, Const):
            if p != s:
                return None
            continue
        if (
            isinstance(s, Compound)
            and p.functor == s.functor
            and len(p.args) == len(s.args)
        ):
            pending.extend(reversed(list(zip(p.args, s.args))))
            continue
        return None
    return sub


_FRESH_RE = re.compile(r"_G(\d+)$")


class FreshVars:
    """Monotone source of fresh variable names ``_G0, _G1, ...``."""

    def __init__(self, start: int = 0) -> None:
        self._next = start

    @property
    def counter(self) -> int:
        return self._next

    def __call__(self) -> str:
        name = f"_G{self._next}"
        self._next += 1
        return name

    def avoid(self, names: Iterable[str]) -> None:
        """Advance past any already-issued-looking names in ``names``."""
        for name in names:
            hit = _FRESH_RE.match(name)
            if hit:
                self._next = max(self._next, int(hit.group(1)) + 1)


def rename_apart(
    head: Condition, body: Condition, fresh: FreshVars
) -> tuple[Condition, Condition]:
    """Consistently rename all variables of an equation pair to fresh names."""
    mapping: Substitution = {
        name: Var(fresh()) for name in variables((head, body))
    }
    return apply(head, mapping), apply(body, mapping)
