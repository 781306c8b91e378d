"""Symbolic expression trees over dataset features.

A tree maps a feature vector to one scalar output (one embedding
dimension).  Trees are immutable after construction: variation operators
build new trees instead of mutating in place, so evaluation is pure and
safe to run concurrently.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

# arity table for the full function set
OPERATOR_ARITY: dict[str, int] = {
    "add": 2,
    "sub": 2,
    "mul": 2,
    "pdiv": 2,
    "max": 2,
    "min": 2,
    "abs": 1,
    "relu": 1,
    "sigmoid": 1,
}
OPERATORS: tuple[str, ...] = tuple(OPERATOR_ARITY)

FLOAT_MAX = float(np.finfo(np.float64).max)
PDIV_EPS = 1e-6

_TOKEN_RE = re.compile(r"[()]|[^\s()]+")
_FEATURE_RE = re.compile(r"^f(\d+)$")


class TreeParseError(ValueError):
    """Malformed s-expression; `position` is the char offset of the bad token."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class Node:
    """A tree node: either an operator with children or a feature terminal.

    `size` (node count) and `depth` (edge count to the deepest leaf) are
    computed once at construction; a lone terminal has size 1 and depth 0.
    """

    __slots__ = ("op", "feature", "children", "size", "depth")

    def __init__(self, op: str | None, feature: int, children: tuple["Node", ...]):
        self.op = op
        self.feature = feature
        self.children = children
        if op is None:
            self.size = 1
            self.depth = 0
        else:
            self.size = 1 + sum(c.size for c in children)
            self.depth = 1 + max(c.depth for c in children)

    @staticmethod
    def leaf(feature: int) -> "Node":
        if feature < 0:
            raise ValueError(f"feature index must be >= 0, got {feature}")
        return Node(None, feature, ())

    @staticmethod
    def call(op: str, *children: "Node") -> "Node":
        arity = OPERATOR_ARITY.get(op)
        if arity is None:
            raise ValueError(f"unknown operator {op!r}")
        if len(children) != arity:
            raise ValueError(f"{op} takes {arity} children, got {len(children)}")
        return Node(op, -1, children)

    @property
    def is_terminal(self) -> bool:
        return self.op is None

    def __repr__(self) -> str:
        return f"Node({serialize(self)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Node):
            return NotImplemented
        return (
            self.op == other.op
            and self.feature == other.feature
            and self.children == other.children
        )

    def __hash__(self) -> int:
        return hash((self.op, self.feature, self.children))


@dataclass
class Individual:
    """An ordered collection of trees; one embedding dimension per tree."""

    trees: tuple[Node, ...]
    objectives: tuple[float, float] | None = field(default=None, compare=False)

    @property
    def n_nodes(self) -> int:
        return sum(t.size for t in self.trees)

    def serialized(self) -> tuple[str, ...]:
        return tuple(serialize(t) for t in self.trees)


# ---------------------------------------------------------------------------
# evaluation

def _eval(node: Node, X: np.ndarray) -> np.ndarray:
    if node.op is None:
        return X[:, node.feature]
    a = _eval(node.children[0], X)
    op = node.op
    if op == "abs":
        out = np.abs(a)
    elif op == "relu":
        out = np.maximum(a, 0.0)
    elif op == "sigmoid":
        out = 1.0 / (1.0 + np.exp(-a))
    else:
        b = _eval(node.children[1], X)
        if op == "add":
            out = a + b
        elif op == "sub":
            out = a - b
        elif op == "mul":
            out = a * b
        elif op == "pdiv":
            out = np.where(np.abs(b) >= PDIV_EPS, np.divide(a, b), 1.0)
        elif op == "max":
            out = np.maximum(a, b)
        else:  # min
            out = np.minimum(a, b)
    # saturate overflow so downstream ranks stay well-defined
    return np.clip(out, -FLOAT_MAX, FLOAT_MAX)


def eval_tree_matrix(tree: Node, instances: np.ndarray) -> np.ndarray:
    """Evaluate one tree on every row of an (n, m) matrix; returns shape (n,)."""
    X = np.asarray(instances, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _eval(tree, X)


def eval_tree(tree: Node, instance) -> float:
    """Evaluate one tree on a single feature vector."""
    row = np.asarray(instance, dtype=np.float64).reshape(1, -1)
    return float(eval_tree_matrix(tree, row)[0])


def eval_individual(ind: Individual, data) -> np.ndarray:
    """Embedding matrix (n x n_trees); accepts a Dataset or an instance matrix."""
    X = data.instances if hasattr(data, "instances") else np.asarray(data, dtype=np.float64)
    return np.column_stack([eval_tree_matrix(t, X) for t in ind.trees])


def max_feature_index(tree: Node) -> int:
    if tree.op is None:
        return tree.feature
    return max(max_feature_index(c) for c in tree.children)


# ---------------------------------------------------------------------------
# random generation

def random_tree(
    n_features: int,
    depth_min: int,
    depth_max: int,
    method: str,
    rng: np.random.Generator,
) -> Node:
    """Generate a random tree with depth in [depth_min, depth_max].

    `full` places every leaf at exactly the sampled target depth; `grow`
    stops early below the target, picking a terminal with probability equal
    to the terminal set's share of the combined primitive set, but never
    above depth_min so the bound still holds.
    """
    if not 1 <= depth_min <= depth_max:
        raise ValueError(f"bad depth range [{depth_min}, {depth_max}]")
    if method not in ("grow", "full"):
        raise ValueError(f"method must be 'grow' or 'full', got {method!r}")
    target = int(rng.integers(depth_min, depth_max + 1))
    return _generate(0, target, depth_min, method, n_features, rng)


def grow_subtree(
    n_features: int,
    depth_min: int,
    target: int,
    rng: np.random.Generator,
) -> Node:
    """Grow-method subtree of depth in [depth_min, target]; depth 0 allowed."""
    if not 0 <= depth_min <= target:
        raise ValueError(f"bad depth range [{depth_min}, {target}]")
    return _generate(0, target, depth_min, "grow", n_features, rng)


def _generate(depth, target, depth_min, method, n_features, rng) -> Node:
    if depth == target:
        return Node.leaf(int(rng.integers(n_features)))
    if method == "grow" and depth >= depth_min:
        share = n_features / (n_features + len(OPERATORS))
        if rng.random() < share:
            return Node.leaf(int(rng.integers(n_features)))
    op = OPERATORS[int(rng.integers(len(OPERATORS)))]
    children = tuple(
        _generate(depth + 1, target, depth_min, method, n_features, rng)
        for _ in range(OPERATOR_ARITY[op])
    )
    return Node(op, -1, children)


# ---------------------------------------------------------------------------
# structural surgery (preorder indexing)

def get_subtree(tree: Node, index: int) -> Node:
    """Subtree rooted at preorder position `index` (root is 0)."""
    if index == 0:
        return tree
    offset = 1
    for child in tree.children:
        if index < offset + child.size:
            return get_subtree(child, index - offset)
        offset += child.size
    raise IndexError(f"node index {index} out of range for tree of size {tree.size}")


def replace_subtree(tree: Node, index: int, replacement: Node) -> Node:
    """New tree with the subtree at preorder position `index` replaced."""
    if index == 0:
        return replacement
    offset = 1
    new_children = []
    replaced = False
    for child in tree.children:
        if not replaced and offset <= index < offset + child.size:
            new_children.append(replace_subtree(child, index - offset, replacement))
            replaced = True
        else:
            new_children.append(child)
        offset += child.size
    if not replaced:
        raise IndexError(f"node index {index} out of range for tree of size {tree.size}")
    return Node(tree.op, tree.feature, tuple(new_children))


def node_depth(tree: Node, index: int) -> int:
    """Depth (edges from the root) of the node at preorder position `index`."""
    if index == 0:
        return 0
    offset = 1
    for child in tree.children:
        if index < offset + child.size:
            return 1 + node_depth(child, index - offset)
        offset += child.size
    raise IndexError(f"node index {index} out of range for tree of size {tree.size}")


# ---------------------------------------------------------------------------
# serialization

def serialize(tree: Node) -> str:
    """Canonical s-expression, e.g. ``(sub (add f0 f1) f2)``."""
    if tree.op is None:
        return f"f{tree.feature}"
    return "(" + " ".join([tree.op] + [serialize(c) for c in tree.children]) + ")"


def parse(text: str) -> Node:
    """Parse a single s-expression; raises TreeParseError on the first bad token."""
    tokens = [(m.group(), m.start()) for m in _TOKEN_RE.finditer(text)]
    if not tokens:
        raise TreeParseError("empty input", 0)
    tree, rest = _parse_tokens(tokens)
    if rest:
        raise TreeParseError(f"unexpected trailing token {rest[0][0]!r}", rest[0][1])
    return tree


def _parse_tokens(tokens):
    tok, pos = tokens[0]
    if tok == ")":
        raise TreeParseError("unexpected ')'", pos)
    if tok != "(":
        m = _FEATURE_RE.match(tok)
        if m is None:
            raise TreeParseError(f"expected a feature terminal, got {tok!r}", pos)
        return Node.leaf(int(m.group(1))), tokens[1:]
    if len(tokens) < 2:
        raise TreeParseError("unexpected end of input after '('", pos)
    op, op_pos = tokens[1]
    arity = OPERATOR_ARITY.get(op)
    if arity is None:
        raise TreeParseError(f"unknown operator {op!r}", op_pos)
    rest = tokens[2:]
    children = []
    for _ in range(arity):
        if not rest:
            raise TreeParseError(f"missing operand for {op!r}", op_pos)
        child, rest = _parse_tokens(rest)
        children.append(child)
    if not rest:
        raise TreeParseError(f"missing ')' for {op!r}", op_pos)
    close, close_pos = rest[0]
    if close != ")":
        raise TreeParseError(f"expected ')', got {close!r}", close_pos)
    return Node(op, -1, tuple(children)), rest[1:]


def to_dot(ind: Individual, feature_names=None) -> str:
    """DOT text with one digraph per tree; labels are operator or feature names."""
    graphs = []
    for t, tree in enumerate(ind.trees):
        lines = [f"digraph tree{t} {{"]
        counter = [0]

        def walk(node):
            my_id = counter[0]
            counter[0] += 1
            if node.op is None:
                if feature_names is not None:
                    label = feature_names[node.feature]
                else:
                    label = f"f{node.feature}"
            else:
                label = node.op
            lines.append(f'  n{my_id} [label="{label}"];')
            for child in node.children:
                child_id = counter[0]
                lines.append(f"  n{my_id} -> n{child_id};")
                walk(child)

        walk(tree)
        lines.append("}")
        graphs.append("\n".join(lines))
    return "\n".join(graphs) + "\n"
