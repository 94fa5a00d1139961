"""definiens: an embeddable definitional-programming engine.

Definitions map atoms to the sets of conditions that define them; guarded
methods drive a backtracking machine over equation states; a small surface
syntax and a ``G3>`` toplevel sit on top.
"""

from .definitions import (
    ClausalDefinition,
    Definition,
    DefiniensElement,
    Equation,
    ImmutableDefinition,
    Mode,
    UnknownClause,
)
from .machine import (
    EXHAUSTED,
    Answer,
    Cancelled,
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
    TraceStep,
    replay,
)
from .methods import (
    All,
    ArityMismatch,
    MethodDefinition,
    MethodEquation,
    MethodInstance,
    MethodWord,
    Not,
    Side,
    SideMatches,
    SideStep,
    Some,
    UnknownDefinition,
    applicable_equations,
    eval_guard,
    instantiate,
)
from .shell import Session, eval_line, format_answer, load_resources, main, run_repl
from .syntax import (
    ParseError,
    QueryExpr,
    parse_condition,
    parse_directive,
    parse_program,
    parse_query,
    parse_term,
    render,
)
from .terms import (
    TRUE,
    Atom,
    Compound,
    Condition,
    Conj,
    Const,
    FreshVars,
    Substitution,
    Term,
    TrueCondition,
    Var,
    apply,
    as_condition,
    compose,
    conjoin,
    list_term,
    match,
    rename_apart,
    restrict,
    simplify,
    unify,
    variables,
)
from .treefile import FormatError, TreeDefinition, TreeNode, as_clausal, load_tree_file

__version__ = "0.1.0"
