"""Bundled input generators with annotated structural and value choice points.

Each generator reads its shape decisions (recursion, child counts, node
types) from the structural stream and everything else from the value stream.
Because no shape decision ever depends on a value choice, rewriting the value
stream in place changes the content of an input but never its skeleton.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from divfuzz.choices import (
    ChoiceKind,
    ChoicePoint,
    SplitParameterSequence,
    StructuralSignature,
    choose_bool,
    choose_from,
    choose_int,
    structural_signature,
)

S = ChoiceKind.STRUCTURAL
V = ChoiceKind.VALUE


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    max_depth: int
    choice_points: tuple[ChoicePoint, ...]
    generate: Callable[..., "GeneratedInput"] = field(compare=False, repr=False)

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")

    def __call__(self, source: SplitParameterSequence, **overrides) -> "GeneratedInput":
        overrides.setdefault("max_depth", self.max_depth)
        return self.generate(source, **overrides)


@dataclass(frozen=True)
class GeneratedInput:
    concrete: bytes
    signature: StructuralSignature
    source_snapshot: SplitParameterSequence

    @property
    def text(self) -> str:
        return self.concrete.decode("ascii")


def _finish(source: SplitParameterSequence, text: str) -> GeneratedInput:
    return GeneratedInput(text.encode("ascii"), structural_signature(source), source.snapshot())


# -- binary tree ---------------------------------------------------------------

TREE_VALUES = range(0, 11)


@dataclass
class Tree:
    value: int
    left: Tree | None = None
    right: Tree | None = None


def _tree(source, depth, max_depth):
    node = Tree(choose_int(source, V, 0, 10))
    if depth >= max_depth:
        return node
    if choose_bool(source, S):
        node.left = _tree(source, depth + 1, max_depth)
    if choose_bool(source, S):
        node.right = _tree(source, depth + 1, max_depth)
    return node


def render_tree(node: Tree, top: bool = True) -> str:
    """Parenthesized preorder; ``_`` marks a missing child next to a present one."""
    if node.left is None and node.right is None:
        return str(node.value) if top else f"({node.value})"
    left = render_tree(node.left, False) if node.left else "_"
    right = render_tree(node.right, False) if node.right else "_"
    return f"({node.value} {left} {right})"


def generate_tree(source: SplitParameterSequence, max_depth: int = 5) -> GeneratedInput:
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    # Depth counts edges from the root, so max_depth + 1 levels at most.
    return _finish(source, render_tree(_tree(source, 0, max_depth)))


# -- XML-like documents ----------------------------------------------------------

XML_TAGS = ("a", "b", "p", "div", "span", "ul", "li", "em", "code", "pre")
XML_ATTR_NAMES = ("id", "class", "href")
XML_ATTR_VALUES = ("x", "main", "nav", "1", "")
XML_TEXTS = ("", "hi", "text", "42", "a b")


def _element(source, depth, max_depth, max_children) -> str:
    tag = choose_from(source, V, XML_TAGS)
    attrs = ""
    if choose_bool(source, S):
        name = choose_from(source, V, XML_ATTR_NAMES)
        attrs = f' {name}="{choose_from(source, V, XML_ATTR_VALUES)}"'
    text = choose_from(source, V, XML_TEXTS)
    children = ""
    if depth < max_depth:
        n = choose_int(source, S, 0, max_children)
        children = "".join(_element(source, depth + 1, max_depth, max_children) for _ in range(n))
    return f"<{tag}{attrs}>{text}{children}</{tag}>"


def generate_xml(source: SplitParameterSequence, max_depth: int = 4, max_children: int = 3) -> GeneratedInput:
    if max_depth < 1 or max_children < 1:
        raise ValueError("bounds must be at least 1")
    return _finish(source, _element(source, 1, max_depth, max_children))


# -- let/arithmetic expressions --------------------------------------------------

EXPR_OPS = ("+", "-", "*", "/", "%")
EXPR_LITERALS = (0, 9)
NODE_LITERAL, NODE_VARIABLE, NODE_BINARY, NODE_LET = "lit", "var", "bin", "let"


def _node_kind(source, depth, max_depth, scope) -> str:
    # A chain of one-octet decisions rather than one 4-octet pick: every
    # structural octet then matters, so byte-level mutations change shapes.
    if depth < max_depth and choose_bool(source, S):
        return NODE_LET if choose_bool(source, S) else NODE_BINARY
    if scope and choose_bool(source, S):
        return NODE_VARIABLE
    return NODE_LITERAL


def _expr(source, depth, max_depth, scope) -> str:
    kind = _node_kind(source, depth, max_depth, scope)
    if kind == NODE_LITERAL:
        return str(choose_int(source, V, *EXPR_LITERALS))
    if kind == NODE_VARIABLE:
        return f"x{choose_int(source, V, 0, scope - 1)}"
    if kind == NODE_BINARY:
        op = choose_from(source, V, EXPR_OPS)
        lhs = _expr(source, depth + 1, max_depth, scope)
        rhs = _expr(source, depth + 1, max_depth, scope)
        return f"({lhs} {op} {rhs})"
    bound = _expr(source, depth + 1, max_depth, scope)
    body = _expr(source, depth + 1, max_depth, scope + 1)
    return f"(let x{scope} = {bound} in {body})"


def generate_expr(source: SplitParameterSequence, max_depth: int = 6) -> GeneratedInput:
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    return _finish(source, _expr(source, 1, max_depth, 0))


# -- registry ----------------------------------------------------------------------

GENERATORS = {
    "tree": GeneratorSpec(
        "tree",
        5,
        (
            ChoicePoint("tree.value", tuple(TREE_VALUES), V),
            ChoicePoint("tree.has_left", (True, False), S),
            ChoicePoint("tree.has_right", (True, False), S),
        ),
        generate_tree,
    ),
    "xml": GeneratorSpec(
        "xml",
        4,
        (
            ChoicePoint("xml.tag", XML_TAGS, V),
            ChoicePoint("xml.has_attr", (True, False), S),
            ChoicePoint("xml.attr_name", XML_ATTR_NAMES, V),
            ChoicePoint("xml.attr_value", XML_ATTR_VALUES, V),
            ChoicePoint("xml.text", XML_TEXTS, V),
            ChoicePoint("xml.num_children", tuple(range(0, 4)), S),
        ),
        generate_xml,
    ),
    "expr": GeneratorSpec(
        "expr",
        6,
        (
            ChoicePoint("expr.is_inner", (True, False), S),
            ChoicePoint("expr.is_let", (True, False), S),
            ChoicePoint("expr.is_variable", (True, False), S),
            ChoicePoint("expr.literal", tuple(range(EXPR_LITERALS[0], EXPR_LITERALS[1] + 1)), V),
            ChoicePoint("expr.variable", ("x0", "x1", "x2", "..."), V),
            ChoicePoint("expr.operator", EXPR_OPS, V),
        ),
        generate_expr,
    ),
}


def get_generator(name: str) -> GeneratorSpec:
    try:
        return GENERATORS[name]
    except KeyError:
        raise KeyError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") from None


def regenerate(generator: GeneratorSpec, params: tuple[bytes, bytes], rng: random.Random | None = None, **overrides) -> GeneratedInput:
    """Run ``generator`` on saved parameters; strict replay unless ``rng`` is given."""
    source = SplitParameterSequence.from_params(params, rng=rng, strict=rng is None)
    return generator(source, **overrides)
