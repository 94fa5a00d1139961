"""Tests for the indentation-tree resource format and its definition view."""

import pytest

from definiens import (
    TRUE,
    Atom,
    Compound,
    Conj,
    Const,
    FormatError,
    TreeDefinition,
    TreeNode,
    Var,
    as_clausal,
    load_tree_file,
)

SAMPLE = """\
% a small taxonomy
animal
  bird
    penguin
    sparrow
  mammal
    cat
"""


def write(tmp_path, text, name="sample.tree"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_builds_the_expected_shape(tmp_path):
    tree = load_tree_file(write(tmp_path, SAMPLE))
    assert tree.name == "sample"
    assert tree.source_path.endswith("sample.tree")
    (animal,) = tree.roots
    assert animal.label == Const("animal")
    assert [c.label for c in animal.children] == [Const("bird"), Const("mammal")]
    bird = animal.children[0]
    assert [c.label for c in bird.children] == [Const("penguin"), Const("sparrow")]


def test_definiens_is_the_children_conjunction(tmp_path):
    tree = load_tree_file(write(tmp_path, SAMPLE))
    (animal,) = tree.definiens(Const("animal"))
    assert animal.body == Conj((Atom(Const("bird")), Atom(Const("mammal"))))
    assert animal.unifier == {}
    assert animal.clause_id == 0
    (bird,) = tree.definiens(Const("bird"))
    assert bird.body == Conj((Atom(Const("penguin")), Atom(Const("sparrow"))))


def test_single_children_do_not_become_conjunctions(tmp_path):
    tree = load_tree_file(write(tmp_path, SAMPLE))
    (mammal,) = tree.definiens(Const("mammal"))
    assert mammal.body == Atom(Const("cat"))


def test_leaves_and_strangers_are_outside_the_domain(tmp_path):
    tree = load_tree_file(write(tmp_path, SAMPLE))
    assert tree.definiens(Const("penguin")) == []
    assert tree.definiens(Const("dinosaur")) == []
    assert not tree.in_dom(Const("cat"))
    assert tree.in_dom(Const("animal"))


def test_open_goals_never_match_ground_labels(tmp_path):
    tree = load_tree_file(write(tmp_path, SAMPLE))
    assert tree.definiens(Var("X")) == []


def test_clause_ids_are_preorder_ordinals(tmp_path):
    text = "a\n  b\n    c\n  b\n    d\nb\n  e\n"
    tree = load_tree_file(write(tmp_path, text))
    elements = tree.definiens(Const("b"))
    assert [e.clause_id for e in elements] == [1, 2, 3]
    assert [e.body for e in elements] == [
        Atom(Const("c")),
        Atom(Const("d")),
        Atom(Const("e")),
    ]


def test_compound_labels(tmp_path):
    text = "edge(a,b)\n  edge(b,c)\n"
    tree = load_tree_file(write(tmp_path, text))
    goal = Compound("edge", (Const("a"), Const("b")))
    (element,) = tree.definiens(goal)
    assert element.body == Atom(Compound("edge", (Const("b"), Const("c"))))


def test_forests_are_allowed(tmp_path):
    tree = load_tree_file(write(tmp_path, "a\n  b\nc\n  d\n"))
    assert [r.label for r in tree.roots] == [Const("a"), Const("c")]
    assert tree.in_dom(Const("a")) and tree.in_dom(Const("c"))


def test_comments_and_blank_lines_are_skipped(tmp_path):
    tree = load_tree_file(write(tmp_path, "% top\n\na\n  b % child\n\n"))
    assert [r.label for r in tree.roots] == [Const("a")]
    assert tree.definiens(Const("a"))[0].body == Atom(Const("b"))


def test_empty_files_define_nothing(tmp_path):
    tree = load_tree_file(write(tmp_path, "% nothing here\n\n"))
    assert tree.roots == []
    assert tree.definiens(Const("a")) == []


def test_loading_is_deterministic(tmp_path):
    path = write(tmp_path, SAMPLE)
    assert load_tree_file(path).roots == load_tree_file(path).roots


# -- format errors ------------------------------------------------------------


@pytest.mark.parametrize(
    "text,line,needle",
    [
        ("a\n   b\n", 2, "multiple of 2"),
        ("a\n\tb\n", 2, "tabs"),
        ("a\n    b\n", 2, "jumps"),
        ("a\n  X\n", 2, "ground"),
        ("a\n  f(\n", 2, "bad label"),
        ("  a\n", 1, "jumps"),
    ],
)
def test_malformed_files_are_rejected(tmp_path, text, line, needle):
    with pytest.raises(FormatError) as err:
        load_tree_file(write(tmp_path, text))
    assert err.value.line == line
    assert needle in str(err.value)
    assert f"line {line}:" in str(err.value)


# -- equivalence with the clausal view ------------------------------------------


def test_as_clausal_matches_the_direct_definiens(tmp_path):
    tree = load_tree_file(write(tmp_path, SAMPLE))
    clausal = as_clausal(tree)
    assert clausal.name == tree.name
    labels = ["animal", "bird", "mammal", "penguin", "sparrow", "cat", "other"]
    for label in labels:
        goal = Const(label)
        assert tree.definiens(goal) == clausal.definiens(goal)


def test_as_clausal_is_immutable_match_mode(tmp_path):
    from definiens import Equation, ImmutableDefinition, Mode

    clausal = as_clausal(load_tree_file(write(tmp_path, SAMPLE)))
    assert clausal.mode is Mode.MATCH
    assert len(clausal) == 3  # one equation per internal node
    with pytest.raises(ImmutableDefinition):
        clausal.add_equation(Equation(Atom(Const("x")), TRUE))


def test_hand_built_trees_work_without_files():
    root = TreeNode(Const("a"), [TreeNode(Const("b")), TreeNode(Const("c"))])
    tree = TreeDefinition("adhoc", [root])
    (element,) = tree.definiens(Const("a"))
    assert element.body == Conj((Atom(Const("b")), Atom(Const("c"))))
