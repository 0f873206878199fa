"""Hierarchical Archimedean copula trees.

Leaves hold 0-based asset indices internally. The text form is 1-based, e.g.
``((1 2)@3.31 3)@1.04``: every parenthesized group is an internal node and
``@theta`` annotates its generator parameter. Children are kept in canonical
order, sorted by their smallest leaf.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from errors import DomainError, StructureParseError
from schemas import HacModelPayload, HacNodePayload

from .generators import ArchimedeanGenerator, GeneratorFamily, psi, psi_inverse

logger = logging.getLogger(__name__)

_NUMBER = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
_INTEGER = re.compile(r"\d+")


@dataclass(frozen=True)
class HacLeaf:
    asset_index: int

    @property
    def min_leaf(self) -> int:
        return self.asset_index


@dataclass(frozen=True)
class HacInternal:
    """Internal node: a generator combining two or more children.

    ``tau`` is the Kendall tau the node was calibrated from, when known. It is
    informational and ignored by equality.
    """

    generator: ArchimedeanGenerator
    children: tuple["HacNode", ...]
    tau: float | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        children = tuple(self.children)
        if len(children) < 2:
            raise DomainError("an internal node needs at least two children")
        object.__setattr__(self, "children", tuple(sorted(children, key=lambda c: c.min_leaf)))

    @property
    def min_leaf(self) -> int:
        return self.children[0].min_leaf

    @property
    def theta(self) -> float:
        return self.generator.theta


HacNode = Union[HacLeaf, HacInternal]


def iter_leaves(node: HacNode) -> Iterator[int]:
    if isinstance(node, HacLeaf):
        yield node.asset_index
        return
    for child in node.children:
        yield from iter_leaves(child)


def iter_internal(node: HacNode) -> Iterator[HacInternal]:
    """Internal nodes in pre-order, root first."""

    if isinstance(node, HacInternal):
        yield node
        for child in node.children:
            yield from iter_internal(child)


@dataclass(frozen=True)
class HacModel:
    """A homogeneous hierarchical Archimedean copula over assets ``0 .. d-1``."""

    root: HacInternal

    def __post_init__(self) -> None:
        if not isinstance(self.root, HacInternal):
            raise DomainError("the root of a hierarchical copula must be an internal node")
        leaves = sorted(iter_leaves(self.root))
        if leaves != list(range(len(leaves))):
            raise DomainError(f"leaves must be exactly 0..d-1 once each, got {leaves}")
        families = {node.generator.family for node in iter_internal(self.root)}
        if len(families) != 1:
            names = sorted(f.value for f in families)
            raise DomainError(f"mixed families in one structure: {names}")

    @property
    def family(self) -> GeneratorFamily:
        return self.root.generator.family

    @property
    def dimension(self) -> int:
        return sum(1 for _ in iter_leaves(self.root))

    @property
    def internal_nodes(self) -> list[HacInternal]:
        return list(iter_internal(self.root))

    @property
    def theta_vector(self) -> tuple[float, ...]:
        """Internal thetas in pre-order; root to deepest level for fully nested trees."""

        return tuple(node.theta for node in iter_internal(self.root))

    @property
    def tau_vector(self) -> tuple[float | None, ...]:
        return tuple(node.tau for node in iter_internal(self.root))

    @property
    def is_fully_nested(self) -> bool:
        return all(
            sum(isinstance(c, HacInternal) for c in node.children) <= 1
            for node in iter_internal(self.root)
        )

    @property
    def structure_string(self) -> str:
        return format_structure(self)

    @property
    def topology_string(self) -> str:
        return format_structure(self, with_theta=False)


def check_nesting(model: HacModel) -> bool:
    """True when every internal child has a theta at least as large as its parent's."""

    for node in iter_internal(model.root):
        for child in node.children:
            if isinstance(child, HacInternal):
                if child.generator.family is not node.generator.family:
                    return False
                if child.theta < node.theta:
                    return False
    return True


def _node_cdf(node: HacNode, rows: NDArray[np.float64]) -> NDArray[np.float64]:
    if isinstance(node, HacLeaf):
        return rows[:, node.asset_index]
    values = np.column_stack([_node_cdf(child, rows) for child in node.children])
    values = np.maximum(values, np.finfo(float).tiny)
    total = np.sum(psi(node.generator, values), axis=1)
    out = np.asarray(psi_inverse(node.generator, total), dtype=float)
    trivial = np.sum(values < 1.0, axis=1) <= 1
    return np.where(trivial, values.min(axis=1), out)


def hac_cdf(model: HacModel, u: ArrayLike) -> NDArray[np.float64] | float:
    """Evaluate the nested copula at a d-vector or at each row of an (n, d) matrix."""

    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 1
    rows = np.atleast_2d(arr)
    if rows.ndim != 2 or rows.shape[1] != model.dimension:
        raise DomainError(f"expected {model.dimension} coordinates, got shape {arr.shape}")
    if np.any(~np.isfinite(rows)) or np.any(rows <= 0.0) or np.any(rows > 1.0):
        raise DomainError("u must lie in (0, 1]")
    out = _node_cdf(model.root, rows)
    return float(out[0]) if scalar else out


def format_structure(model: HacModel | HacNode, *, with_theta: bool = True) -> str:
    """Canonical 1-based text form of a structure."""

    node = model.root if isinstance(model, HacModel) else model
    if isinstance(node, HacLeaf):
        return str(node.asset_index + 1)
    inner = " ".join(format_structure(child, with_theta=with_theta) for child in node.children)
    if with_theta:
        return f"({inner})@{node.theta!r}"
    return f"({inner})"


class _Parser:
    def __init__(self, text: str, family: GeneratorFamily) -> None:
        self.text = text
        self.pos = 0
        self.family = family
        self.seen: set[int] = set()

    def skip(self) -> None:
        while self.pos < len(self.text) and (self.text[self.pos].isspace() or self.text[self.pos] == ","):
            self.pos += 1

    def node(self) -> HacNode:
        self.skip()
        if self.pos >= len(self.text):
            raise StructureParseError("unexpected end of structure", self.pos)
        if self.text[self.pos] == "(":
            return self.group()
        match = _INTEGER.match(self.text, self.pos)
        if match is None:
            raise StructureParseError(f"unexpected character {self.text[self.pos]!r}", self.pos)
        index = int(match.group())
        if index < 1:
            raise StructureParseError("leaf indices are 1-based", self.pos)
        if index in self.seen:
            raise StructureParseError(f"duplicate leaf {index}", self.pos)
        self.seen.add(index)
        self.pos = match.end()
        return HacLeaf(index - 1)

    def group(self) -> HacInternal:
        start = self.pos
        self.pos += 1
        children: list[HacNode] = []
        while True:
            self.skip()
            if self.pos >= len(self.text):
                raise StructureParseError("unclosed parenthesis", start)
            if self.text[self.pos] == ")":
                self.pos += 1
                break
            children.append(self.node())
        if len(children) < 2:
            raise StructureParseError("a group needs at least two members", start)
        self.skip()
        if self.pos >= len(self.text) or self.text[self.pos] != "@":
            raise StructureParseError("missing '@theta' after group", self.pos)
        self.pos += 1
        match = _NUMBER.match(self.text, self.pos)
        if match is None:
            raise StructureParseError("expected a number after '@'", self.pos)
        self.pos = match.end()
        try:
            generator = ArchimedeanGenerator(self.family, float(match.group()))
        except DomainError as exc:
            raise StructureParseError(str(exc), match.start()) from exc
        return HacInternal(generator, tuple(children))


def parse_structure(text: str, family: GeneratorFamily | str = GeneratorFamily.GUMBEL) -> HacModel:
    """Parse the 1-based text form into a model of the given family."""

    parser = _Parser(text, GeneratorFamily.parse(family))
    parser.skip()
    if parser.pos >= len(text) or text[parser.pos] != "(":
        raise StructureParseError("structure must start with '('", parser.pos)
    root = parser.group()
    parser.skip()
    if parser.pos != len(text):
        raise StructureParseError("trailing characters after structure", parser.pos)
    try:
        return HacModel(root)
    except DomainError as exc:
        raise StructureParseError(str(exc), 0) from exc


def _node_payload(node: HacNode) -> HacNodePayload:
    if isinstance(node, HacLeaf):
        return HacNodePayload(leaf=node.asset_index + 1)
    return HacNodePayload(
        theta=node.theta,
        tau=node.tau,
        children=[_node_payload(child) for child in node.children],
    )


def model_to_payload(model: HacModel) -> HacModelPayload:
    return HacModelPayload(
        family=model.family.value,
        structure=model.structure_string,
        root=_node_payload(model.root),
    )


def _node_from_payload(payload: HacNodePayload, family: GeneratorFamily) -> HacNode:
    if payload.leaf is not None:
        return HacLeaf(payload.leaf - 1)
    if payload.theta is None or not payload.children:
        raise DomainError("internal node payload needs theta and children")
    return HacInternal(
        ArchimedeanGenerator(family, payload.theta),
        tuple(_node_from_payload(child, family) for child in payload.children),
        tau=payload.tau,
    )


def model_from_payload(payload: HacModelPayload) -> HacModel:
    family = GeneratorFamily.parse(payload.family)
    root = _node_from_payload(payload.root, family)
    if not isinstance(root, HacInternal):
        raise DomainError("root payload must be an internal node")
    return HacModel(root)
