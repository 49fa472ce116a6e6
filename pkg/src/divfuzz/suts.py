"""Probed benchmark programs: a BST checker, an XML schema validator and an
expression evaluator with three seeded faults.

Branch ids are grouped per SUT (1xx, 2xx, 3xx) and never reused.
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from divfuzz.harness import BenchmarkSut, probe


class _Reject(Exception):
    """Input is invalid; caught inside the SUT and reported as Invalid."""


# -- bst_checker ---------------------------------------------------------------------

_TREE_TOKEN = re.compile(r"\(|\)|_|\d+")


@dataclass
class _Node:
    value: int
    left: "_Node | None"
    right: "_Node | None"


def parse_tree(text: str) -> _Node:
    tokens = _TREE_TOKEN.findall(text)
    if "".join(tokens) != text.replace(" ", ""):
        raise _Reject("stray characters")
    pos = 0

    def node():
        nonlocal pos
        if pos >= len(tokens):
            raise _Reject("unexpected end")
        tok = tokens[pos]
        if tok.isdigit():
            pos += 1
            return _Node(int(tok), None, None)
        if tok != "(":
            raise _Reject(f"unexpected {tok!r}")
        pos += 1
        value = tokens[pos] if pos < len(tokens) else ""
        if not value.isdigit():
            raise _Reject("node without value")
        pos += 1
        if tokens[pos] == ")":
            pos += 1
            return _Node(int(value), None, None)
        left, right = child(), child()
        if pos >= len(tokens) or tokens[pos] != ")":
            raise _Reject("unclosed node")
        pos += 1
        return _Node(int(value), left, right)

    def child():
        nonlocal pos
        if pos < len(tokens) and tokens[pos] == "_":
            pos += 1
            return None
        return node()

    root = node()
    if pos != len(tokens):
        raise _Reject("trailing tokens")
    return root


def _bst_walk(node: _Node, lo, hi, depth) -> tuple[bool, int]:
    probe(120 + min(depth, 9))
    probe(140 + node.value % 16)
    ok = True
    if lo is not None:
        if node.value > lo:
            probe(101)
        else:
            probe(102)
            ok = False
    if hi is not None:
        if node.value < hi:
            probe(103)
        else:
            probe(104)
            ok = False
    heights = []
    for side, child, bounds in (
        (105, node.left, (lo, node.value)),
        (107, node.right, (node.value, hi)),
    ):
        if child is None:
            probe(side + 1)
            heights.append(0)
            continue
        probe(side)
        child_ok, h = _bst_walk(child, bounds[0], bounds[1], depth + 1)
        ok = ok and child_ok
        heights.append(h)
    if abs(heights[0] - heights[1]) <= 1:
        probe(110)
    else:
        probe(111)
    return ok, 1 + max(heights)


def _bst_search(root: _Node, key: int) -> bool:
    node, depth = root, 0
    while node is not None:
        d = min(depth, 5)
        if key == node.value:
            probe(170 + d)
            return True
        if key < node.value:
            probe(176 + d)
            node = node.left
        else:
            probe(182 + d)
            node = node.right
        depth += 1
    probe(188)
    return False


def bst_check(text: str) -> bool:
    try:
        root = parse_tree(text)
    except (_Reject, IndexError):
        return False
    ok, height = _bst_walk(root, None, None, 0)
    if not ok:
        probe(113)
        return False
    probe(112)
    probe(160 + min(height, 9))
    size = sum(_bst_search(root, key) for key in range(11))
    probe(189 + min(size, 10))
    return True


# -- xml_validator ---------------------------------------------------------------------

_BLOCK = {"div", "p", "ul", "pre"}
_INLINE = {"span", "em", "code", "a", "b"}
_NEEDS_ATTR = {"a": "href"}
_TAG_INDEX = {t: i for i, t in enumerate(("a", "b", "p", "div", "span", "ul", "li", "em", "code", "pre"))}


def _xml_walk(el: ET.Element, parent: str | None, depth: int, ids: set) -> bool:
    tag = el.tag
    probe(220 + _TAG_INDEX.get(tag, 10))
    probe(240 + min(depth, 9))
    ok = True
    if tag not in _TAG_INDEX:
        probe(201)
        return False
    if tag == "li":
        if parent == "ul":
            probe(202)
        else:
            probe(203)
            ok = False
    if parent == "ul":
        if tag == "li":
            probe(204)
        else:
            probe(205)
            ok = False
    if parent in _INLINE:
        if tag in _BLOCK:
            probe(206)
            ok = False
        else:
            probe(207)
    if parent == "pre":
        probe(208)
        ok = False
    required = _NEEDS_ATTR.get(tag)
    if required is not None:
        if el.get(required):
            probe(209)
        else:
            probe(210)
            ok = False
    for name, value in el.attrib.items():
        probe(260 + ("id", "class", "href").index(name) if name in ("id", "class", "href") else 263)
        if name == "id":
            if not value:
                probe(211)
                ok = False
            elif value in ids:
                probe(212)
                ok = False
            else:
                probe(213)
                ids.add(value)
    if el.text:
        if tag in ("ul",):
            probe(214)
            ok = False
        else:
            probe(215)
    for child in el:
        probe(216)
        ok = _xml_walk(child, tag, depth + 1, ids) and ok
    return ok


def xml_check(text: str) -> bool:
    try:
        root = ET.fromstring(text)
    except ET.ParseError:
        return False
    ids: set = set()
    ok = _xml_walk(root, None, 1, ids)
    probe(217 if ok else 218)
    if ok:
        _xml_outline(root, ids)
    return ok


def _xml_outline(root: ET.Element, ids: set) -> None:
    elements = list(root.iter())
    probe(270 + min(len(elements) - 1, 9))
    depth = _xml_depth(root)
    probe(280 + min(depth, 4))
    probe(285 + min(len(ids), 4))
    with_text = sum(1 for el in elements if el.text)
    probe(290 + min(with_text, 4))
    if any(el.tag == "ul" and len(el) > 1 for el in elements):
        probe(295)
    if any(el.tag == "a" and any(c.tag in _INLINE for c in el) for el in elements):
        probe(296)


def _xml_depth(el: ET.Element) -> int:
    return 1 + max((_xml_depth(c) for c in el), default=0)


# -- expr_eval ------------------------------------------------------------------------

_EXPR_TOKEN = re.compile(r"\s*(\(|\)|let\b|in\b|=|[-+*/%]|x\d+|\d+)")
BOUND = 1000
SCOPE_SLOTS = 3


@dataclass
class Lit:
    value: int


@dataclass
class Var:
    index: int


@dataclass
class Bin:
    op: str
    lhs: object
    rhs: object


@dataclass
class Let:
    index: int
    bound: object
    body: object


def parse_expr(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _EXPR_TOKEN.match(text, pos)
        if not m:
            raise _Reject(f"bad character at {pos}")
        tokens.append(m.group(1))
        pos = m.end()
    at = 0

    def take(expected=None):
        nonlocal at
        if at >= len(tokens):
            raise _Reject("unexpected end")
        tok = tokens[at]
        if expected is not None and tok != expected:
            raise _Reject(f"expected {expected!r}, got {tok!r}")
        at += 1
        return tok

    def expr():
        tok = take()
        if tok.isdigit():
            return Lit(int(tok))
        if tok.startswith("x"):
            return Var(int(tok[1:]))
        if tok != "(":
            raise _Reject(f"unexpected {tok!r}")
        if tokens[at] == "let":
            take("let")
            name = take()
            if not name.startswith("x"):
                raise _Reject("let needs a variable")
            take("=")
            bound = expr()
            take("in")
            body = expr()
            take(")")
            return Let(int(name[1:]), bound, body)
        lhs = expr()
        op = take()
        if op not in "+-*/%":
            raise _Reject(f"unknown operator {op!r}")
        rhs = expr()
        take(")")
        return Bin(op, lhs, rhs)

    tree = expr()
    if at != len(tokens):
        raise _Reject("trailing tokens")
    return tree


class _Evaluator:
    def __init__(self, seeded_faults: bool):
        self.faulty = seeded_faults
        self.slots = [0] * SCOPE_SLOTS if seeded_faults else []
        self.depth = 0

    def bind(self, value):
        if self.faulty:
            # Fixed-size scope stack; a fourth nested binding runs off the end.
            self.slots[self.depth] = value
        elif self.depth < len(self.slots):
            self.slots[self.depth] = value
        else:
            self.slots.append(value)
        self.depth += 1

    def eval(self, node, scope: int):
        if isinstance(node, Lit):
            probe(301)
            probe(330 + node.value % 10)
            return node.value
        if isinstance(node, Var):
            probe(302)
            if node.index >= scope:
                probe(303)
                raise _Reject("unbound variable")
            return self.slots[node.index]
        if isinstance(node, Let):
            probe(304)
            probe(350 + min(scope, 9))
            value = self.eval(node.bound, scope)
            saved = self.depth
            self.depth = scope
            self.bind(value)
            try:
                return self.eval(node.body, scope + 1)
            finally:
                self.depth = saved
        return self.binary(node, scope)

    def binary(self, node: Bin, scope: int):
        probe(310 + "+-*/%".index(node.op))
        a = self.eval(node.lhs, scope)
        b = self.eval(node.rhs, scope)
        if node.op == "+":
            result = a + b
        elif node.op == "-":
            result = a - b
        elif node.op == "*":
            result = a * b
        elif node.op == "/":
            if isinstance(node.rhs, Lit) and self.faulty:
                # Constant divisors skip the zero guard.
                probe(320)
                result = a // node.rhs.value
            elif b == 0:
                probe(321)
                raise _Reject("division by zero")
            else:
                probe(322)
                result = a // b
        else:
            if b == 0:
                probe(323)
                raise _Reject("modulo by zero")
            if isinstance(node.lhs, Bin) and node.lhs.op == "-":
                probe(324)
                result = self.fused_sub_mod(a, b)
            else:
                probe(325)
                result = a % b
        if abs(result) > BOUND:
            probe(326)
            raise _Reject("out of bounds")
        probe(340 + (result > 0) - (result < 0) + 1)
        return result

    def fused_sub_mod(self, diff, m):
        if diff < 0 and self.faulty:
            raise OverflowError("fused sub-mod assumes a non-negative difference")
        return diff % m


def _simplify_scan(node, uses: dict) -> None:
    """Pattern scan of an optimiser pass; only records what it would rewrite."""
    if isinstance(node, Var):
        uses[node.index] = uses.get(node.index, 0) + 1
        return
    if isinstance(node, Let):
        _simplify_scan(node.bound, uses)
        before = uses.get(node.index, 0)
        _simplify_scan(node.body, uses)
        if uses.get(node.index, 0) == before:
            probe(360)  # dead binding
        else:
            probe(361)
        return
    if not isinstance(node, Bin):
        return
    op = "+-*/%".index(node.op)
    if isinstance(node.rhs, Lit):
        if node.rhs.value == 0 and node.op in "+-":
            probe(362)
        elif node.rhs.value == 1 and node.op in "*/":
            probe(363)
    if isinstance(node.lhs, Lit) and node.lhs.value == 0 and node.op in "*/%":
        probe(364)
    for child in (node.lhs, node.rhs):
        if isinstance(child, Bin):
            if child.op == node.op:
                probe(365 + op)
            else:
                probe(370 + op)
    if isinstance(node.lhs, Lit) and isinstance(node.rhs, Lit):
        probe(375)  # foldable
    _simplify_scan(node.lhs, uses)
    _simplify_scan(node.rhs, uses)


def make_expr_check(seeded_faults: bool = True):
    def expr_check(text: str) -> bool:
        try:
            tree = parse_expr(text)
        except (_Reject, IndexError):
            return False
        try:
            value = _Evaluator(seeded_faults).eval(tree, 0)
        except _Reject:
            probe(345)
            return False
        probe(346)
        _simplify_scan(tree, {})
        magnitude = abs(value)
        probe(380 + (0 if magnitude == 0 else len(str(magnitude))))
        return True

    return expr_check


expr_check = make_expr_check(True)

# Exception type of each seeded fault, as reported in ExecutionRecord.fault.
EXPR_FAULTS = {
    "div-by-literal-zero": "ZeroDivisionError",
    "scope-overflow": "IndexError",
    "sub-mod-fusion": "OverflowError",
}


def fault_name(fault: str | None) -> str | None:
    if fault is None:
        return None
    exc_type = fault.split("@", 1)[0]
    for name, t in EXPR_FAULTS.items():
        if t == exc_type:
            return name
    return exc_type


BST_CHECKER = BenchmarkSut(
    "bst", "tree", bst_check,
    frozenset(range(101, 114)) | frozenset(range(120, 130)) | frozenset(range(140, 156)) | frozenset(range(160, 200)),
)
XML_VALIDATOR = BenchmarkSut(
    "xml", "xml", xml_check,
    frozenset(range(201, 219)) | frozenset(range(220, 231)) | frozenset(range(240, 250)) | frozenset(range(260, 264)) | frozenset(range(270, 297)),
)
EXPR_EVAL = BenchmarkSut(
    "expr", "expr", expr_check,
    frozenset(range(301, 305)) | frozenset(range(310, 315)) | frozenset(range(320, 327))
    | frozenset(range(330, 343)) | frozenset({345, 346}) | frozenset(range(350, 376)) | frozenset(range(380, 384)),
    tuple(EXPR_FAULTS),
)
EXPR_EVAL_FIXED = BenchmarkSut("expr-fixed", "expr", make_expr_check(False), EXPR_EVAL.probe_sites)

SUTS = {s.name: s for s in (BST_CHECKER, XML_VALIDATOR, EXPR_EVAL, EXPR_EVAL_FIXED)}


def get_sut(name: str) -> BenchmarkSut:
    try:
        return SUTS[name]
    except KeyError:
        raise KeyError(f"unknown SUT {name!r}; choose from {sorted(SUTS)}") from None
