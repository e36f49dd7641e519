"""Combinatorics of collapsing maps, labeled binary trees, and time-order domains.

A collapsing map records, for each index ``j`` in ``{2..k+1}``, the earlier
index ``mu(j) < j`` it collapses onto.  Every such map is equivalent to an
*admissible* labeled binary tree — one whose child labels exceed their parent
labels — and maps whose trees share an unlabeled shape (a skeleton) form one
equivalence class under adjacent-label swap moves.  Each class is represented
by a unique upper-echelon member whose tree carries sequential labels, and the
class as a whole integrates over a single product-form time domain: the union
of the time simplices contributed by the class members equals the region cut
out by one inequality per parent/child edge of the canonical tree.

This module provides the four data types (:class:`CollapsingMap`,
:class:`EchelonTree`, :class:`Skeleton`, :class:`TimeDomain`), the conversions
between them, class enumeration and counting, the swap move with relabeling
bookkeeping, and a Monte Carlo check of the simplex-union/time-domain identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import ConfigError, UnsupportedOperationError

__all__ = [
    "CollapsingMap",
    "EchelonTree",
    "Skeleton",
    "TimeDomain",
    "ClassRecord",
    "ClassTable",
    "RegionCheckReport",
    "mu_to_tree",
    "tree_to_mu",
    "canonicalize",
    "enumerate_class",
    "enumerate_skeletons",
    "count_skeletons",
    "time_domain",
    "km_move",
    "identity_relabeling",
    "all_collapsing_maps",
    "tabulate_classes",
    "region_equality_check",
]

# Class enumeration walks every admissible labeling of a skeleton; the total
# across skeletons is k!, so the exhaustive routines stop at k = 8 (40320
# labelings) to keep worst-case calls interactive.
_MAX_ENUMERATION_ORDER = 8
# Skeleton counting is exact integer arithmetic; the cap mirrors the supported
# envelope of the callers (4^15 ≈ 1.07e9 regions would be unusable anyway).
_MAX_COUNT_ORDER = 15


def _check_int(name: str, value: object, minimum: int, maximum: int | None = None) -> int:
    """Validate an integer argument, rejecting bools and out-of-range values."""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    result = int(value)
    if result < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {result}")
    if maximum is not None and result > maximum:
        raise UnsupportedOperationError(
            f"{name} = {result} is outside the supported range [{minimum}, {maximum}]"
        )
    return result


@dataclass(frozen=True)
class CollapsingMap:
    """A map ``mu: {2..k+1} -> {1..k}`` with ``mu(2) = 1`` and ``mu(j) < j``.

    ``values[i]`` stores ``mu(i + 2)``.  There are exactly ``k!`` such maps of
    order ``k``.
    """

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.values, tuple):
            raise ConfigError("values must be a tuple of integers")
        if not self.values:
            raise ConfigError("a collapsing map needs at least the entry mu(2)")
        for i, value in enumerate(self.values):
            j = i + 2
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"mu({j}) must be an integer, got {value!r}")
            if not 1 <= value < j:
                raise ConfigError(f"mu({j}) must lie in [1, {j - 1}], got {value}")
        if self.values[0] != 1:
            raise ConfigError(f"mu(2) must equal 1, got {self.values[0]}")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    @property
    def k(self) -> int:
        """Order of the map; the domain is ``{2..k+1}``."""
        return len(self.values)

    def value_at(self, j: int) -> int:
        """Return ``mu(j)`` for ``j`` in ``{2..k+1}``."""
        j = _check_int("j", j, 2)
        if j > self.k + 1:
            raise ConfigError(f"j must lie in [2, {self.k + 1}], got {j}")
        return self.values[j - 2]

    @property
    def is_upper_echelon(self) -> bool:
        """True when ``mu(j) <= mu(j+1)`` for all consecutive domain points."""
        return all(a <= b for a, b in zip(self.values, self.values[1:]))


def all_collapsing_maps(k: int) -> Iterator[CollapsingMap]:
    """Yield every collapsing map of order ``k`` in lexicographic order.

    The count is ``k!``: entry ``mu(j)`` ranges freely over ``{1..j-1}``.
    """
    k = _check_int("k", k, 1, _MAX_ENUMERATION_ORDER)

    def rec(prefix: tuple[int, ...], j: int) -> Iterator[CollapsingMap]:
        if j > k + 1:
            yield CollapsingMap(prefix)
            return
        for value in range(1, j):
            yield from rec(prefix + (value,), j + 1)

    yield from rec((1,), 3)


@dataclass(frozen=True)
class EchelonTree:
    """An admissible labeled binary tree on nodes ``{1..k+1}``.

    Node 1 is the root and carries at most a right child; every child label
    strictly exceeds its parent label.  ``left[label]`` / ``right[label]``
    give the child labels (0 when absent); index 0 is an unused sentinel.
    """

    left: tuple[int, ...]
    right: tuple[int, ...]

    def __post_init__(self) -> None:
        for name, arm in (("left", self.left), ("right", self.right)):
            if not isinstance(arm, tuple) or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in arm
            ):
                raise ConfigError(f"{name} must be a tuple of integers")
        if len(self.left) != len(self.right):
            raise ConfigError("left and right child tables must have equal length")
        n = len(self.left) - 1  # largest label, k + 1
        if n < 2:
            raise ConfigError("a tree needs at least nodes 1 and 2")
        if self.left[0] != 0 or self.right[0] != 0:
            raise ConfigError("index 0 is a sentinel and must hold 0")
        if self.left[1] != 0:
            raise ConfigError("node 1 must not have a left child")
        seen_children: set[int] = set()
        for parent in range(1, n + 1):
            for child in (self.left[parent], self.right[parent]):
                if child == 0:
                    continue
                if not 2 <= child <= n:
                    raise ConfigError(f"child label {child} outside [2, {n}]")
                if child <= parent:
                    raise ConfigError(
                        f"child {child} of node {parent} must carry a larger label"
                    )
                if child in seen_children:
                    raise ConfigError(f"node {child} has two parents")
                seen_children.add(child)
        if seen_children != set(range(2, n + 1)):
            missing = sorted(set(range(2, n + 1)) - seen_children)
            raise ConfigError(f"nodes {missing} are not attached to the tree")

    @classmethod
    def from_children(
        cls,
        k: int,
        left: Mapping[int, int] | None = None,
        right: Mapping[int, int] | None = None,
    ) -> "EchelonTree":
        """Build a tree of order ``k`` from sparse child maps ``{parent: child}``."""
        k = _check_int("k", k, 1)
        left_row = [0] * (k + 2)
        right_row = [0] * (k + 2)
        for mapping, row, name in ((left, left_row, "left"), (right, right_row, "right")):
            for parent, child in (mapping or {}).items():
                parent = _check_int(f"{name} parent", parent, 1)
                if parent > k + 1:
                    raise ConfigError(f"{name} parent {parent} outside [1, {k + 1}]")
                row[parent] = _check_int(f"{name} child", child, 2)
        return cls(tuple(left_row), tuple(right_row))

    @property
    def k(self) -> int:
        """Order of the tree; labels run over ``{1..k+1}``."""
        return len(self.left) - 2

    def left_child(self, label: int) -> int | None:
        """Left child of ``label``, or None."""
        return self.left[self._check_label(label)] or None

    def right_child(self, label: int) -> int | None:
        """Right child of ``label``, or None."""
        return self.right[self._check_label(label)] or None

    def parent_of(self, label: int) -> int:
        """Parent label of ``label`` (which must not be the root)."""
        label = self._check_label(label)
        if label == 1:
            raise ConfigError("node 1 is the root and has no parent")
        for parent in range(1, len(self.left)):
            if self.left[parent] == label or self.right[parent] == label:
                return parent
        raise ConfigError(f"node {label} has no parent")  # pragma: no cover

    def edges(self) -> tuple[tuple[int, int], ...]:
        """All (parent, child) pairs, sorted."""
        pairs = []
        for parent in range(1, len(self.left)):
            for child in (self.left[parent], self.right[parent]):
                if child:
                    pairs.append((parent, child))
        return tuple(sorted(pairs))

    def skeleton(self) -> Skeleton:
        """Unlabeled shape of the ``k`` nodes hanging below the root handle."""

        def emit(label: int, out: list[str]) -> None:
            left, right = self.left[label], self.right[label]
            out.append("1" if left else "0")
            out.append("1" if right else "0")
            if left:
                emit(left, out)
            if right:
                emit(right, out)

        bits: list[str] = []
        emit(self.right[1], bits)
        return Skeleton("".join(bits))

    def _check_label(self, label: int) -> int:
        label = _check_int("label", label, 1)
        if label > self.k + 1:
            raise ConfigError(f"label must lie in [1, {self.k + 1}], got {label}")
        return label


@dataclass(frozen=True)
class Skeleton:
    """Unlabeled shape of the ``k`` non-root nodes of an :class:`EchelonTree`.

    ``code`` is the preorder serialization: two presence bits per node (left
    child, right child) followed by the serialized subtrees.  Equal codes mean
    identical shapes, so instances are usable as dictionary keys.  There are
    ``Catalan(k)`` shapes on ``k`` nodes.
    """

    code: str

    def __post_init__(self) -> None:
        if not isinstance(self.code, str) or not self.code:
            raise ConfigError("code must be a non-empty bit string")
        if set(self.code) - {"0", "1"}:
            raise ConfigError(f"code must contain only '0'/'1', got {self.code!r}")
        try:
            _, consumed = _parse_shape(self.code, 0)
        except IndexError:
            raise ConfigError(f"truncated skeleton code {self.code!r}") from None
        if consumed != len(self.code):
            raise ConfigError(f"skeleton code {self.code!r} has trailing bits")

    @property
    def node_count(self) -> int:
        """Number of nodes in the shape (two code bits per node)."""
        return len(self.code) // 2

    def shape(self) -> tuple:
        """Nested ``(left, right)`` tuples with ``None`` for absent children."""
        shape, _ = _parse_shape(self.code, 0)
        return shape


def _parse_shape(code: str, pos: int) -> tuple[tuple, int]:
    """Parse one node at ``pos``; return its nested shape and the next offset."""
    has_left, has_right = code[pos] == "1", code[pos + 1] == "1"
    pos += 2
    left = right = None
    if has_left:
        left, pos = _parse_shape(code, pos)
    if has_right:
        right, pos = _parse_shape(code, pos)
    return (left, right), pos


def _shape_code(shape: tuple | None) -> str:
    if shape is None:
        return ""
    left, right = shape
    bits = ("1" if left else "0") + ("1" if right else "0")
    return bits + _shape_code(left) + _shape_code(right)


@dataclass(frozen=True)
class TimeDomain:
    """A conjunction of inequalities ``t_parent >= t_child``, one per tree edge.

    ``pairs`` holds the (parent, child) index pairs.  Children are exactly
    ``{2..k+1}``, each appearing once, so the domain is the order polytope of
    the tree's ancestry order.
    """

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not isinstance(self.pairs, tuple) or not self.pairs:
            raise ConfigError("pairs must be a non-empty tuple of (parent, child)")
        children = []
        for pair in self.pairs:
            if (
                not isinstance(pair, tuple)
                or len(pair) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in pair)
            ):
                raise ConfigError(f"each pair must be two integers, got {pair!r}")
            parent, child = pair
            if not 1 <= parent < child:
                raise ConfigError(f"pair {pair} must satisfy 1 <= parent < child")
            children.append(child)
        top = len(self.pairs) + 1
        if sorted(children) != list(range(2, top + 1)):
            raise ConfigError(
                f"children must be exactly {{2..{top}}}, got {sorted(children)}"
            )
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))

    @classmethod
    def total_order(cls, k: int) -> "TimeDomain":
        """The chain ``t_1 >= t_2 >= ... >= t_{k+1}``."""
        k = _check_int("k", k, 1)
        return cls(tuple((j, j + 1) for j in range(1, k + 1)))

    @property
    def k(self) -> int:
        """Order; the domain constrains ``t_1 .. t_{k+1}``."""
        return len(self.pairs)

    def contains(self, times: np.ndarray) -> np.ndarray:
        """Membership mask for points with coordinates ``t_1 .. t_{k+1}``.

        ``times`` has shape ``(..., k+1)``; the result has shape ``(...)``.
        """
        times = np.asarray(times, dtype=np.float64)
        if times.ndim < 1 or times.shape[-1] != self.k + 1:
            raise ConfigError(
                f"times must have {self.k + 1} trailing coordinates, got shape {times.shape}"
            )
        mask = np.ones(times.shape[:-1], dtype=bool)
        for parent, child in self.pairs:
            mask &= times[..., parent - 1] >= times[..., child - 1]
        return mask

    def inequality_strings(self) -> tuple[str, ...]:
        """Human/CSV-readable forms, e.g. ``('t1>=t2', 't2>=t3')``."""
        return tuple(f"t{parent}>=t{child}" for parent, child in self.pairs)


def mu_to_tree(mu: CollapsingMap) -> EchelonTree:
    """Convert a collapsing map to its admissible labeled tree.

    For each node ``j``: the left child is the smallest ``a > j`` with
    ``mu(a) = mu(j)``; the right child is the smallest ``b > j`` with
    ``mu(b) = j``.  Node 1 has no left child and its right child is always 2.
    """
    if not isinstance(mu, CollapsingMap):
        raise ConfigError("mu must be a CollapsingMap")
    k = mu.k
    left = [0] * (k + 2)
    right = [0] * (k + 2)
    for j in range(1, k + 2):
        if j >= 2:
            target = mu.value_at(j)
            for a in range(j + 1, k + 2):
                if mu.value_at(a) == target:
                    left[j] = a
                    break
        for b in range(max(j + 1, 2), k + 2):
            if mu.value_at(b) == j:
                right[j] = b
                break
    return EchelonTree(tuple(left), tuple(right))


def tree_to_mu(tree: EchelonTree) -> CollapsingMap:
    """Convert an admissible labeled tree back to its collapsing map.

    Right children collapse onto their parent (``mu(child) = parent``); left
    children inherit their parent's value (``mu(child) = mu(parent)``).
    """
    if not isinstance(tree, EchelonTree):
        raise ConfigError("tree must be an EchelonTree")
    k = tree.k
    mu = [0] * (k + 2)
    for parent in range(1, k + 2):
        right = tree.right[parent]
        if right:
            mu[right] = parent
        left = tree.left[parent]
        if left:
            mu[left] = mu[parent]
    return CollapsingMap(tuple(mu[2:]))


@dataclass
class _ShapeNode:
    """Mutable helper node while labeling a skeleton."""

    left: int = -1  # child position indices, -1 when absent
    right: int = -1
    label: int = 0


def _shape_nodes(skel: Skeleton) -> list[_ShapeNode]:
    """Flatten a skeleton into preorder-indexed nodes with child pointers."""
    nodes: list[_ShapeNode] = []

    def build(shape: tuple) -> int:
        index = len(nodes)
        nodes.append(_ShapeNode())
        left, right = shape
        if left is not None:
            nodes[index].left = build(left)
        if right is not None:
            nodes[index].right = build(right)
        return index

    build(skel.shape())
    return nodes


def _tree_from_labels(nodes: Sequence[_ShapeNode]) -> EchelonTree:
    """Assemble an :class:`EchelonTree` from fully labeled shape nodes."""
    k = len(nodes)
    left = [0] * (k + 2)
    right = [0] * (k + 2)
    right[1] = nodes[0].label
    for node in nodes:
        if node.left >= 0:
            left[node.label] = nodes[node.left].label
        if node.right >= 0:
            right[node.label] = nodes[node.right].label
    return EchelonTree(tuple(left), tuple(right))


def canonicalize(skel: Skeleton) -> EchelonTree:
    """Label a skeleton in the canonical sequential order.

    The top node gets label 2.  After labeling ``j``: if node ``j`` has an
    unlabeled left child it becomes ``j+1``; otherwise the unlabeled right
    child of the smallest-labeled node that has one becomes ``j+1``.  The
    resulting map is the unique upper-echelon member of the skeleton's class
    (``mu(j) <= mu(j+1)`` throughout).
    """
    if not isinstance(skel, Skeleton):
        raise ConfigError("skel must be a Skeleton")
    nodes = _shape_nodes(skel)
    k = len(nodes)
    nodes[0].label = 2
    position_of = {2: 0}
    j = 2
    while j < k + 1:
        current = nodes[position_of[j]]
        if current.left >= 0 and nodes[current.left].label == 0:
            chosen = current.left
        else:
            chosen = -1
            for label in sorted(position_of):
                node = nodes[position_of[label]]
                if node.right >= 0 and nodes[node.right].label == 0:
                    chosen = node.right
                    break
            if chosen < 0:  # pragma: no cover - every node is reachable
                break
        j += 1
        nodes[chosen].label = j
        position_of[j] = chosen
    return _tree_from_labels(nodes)


def _linear_extension_chains(canonical: EchelonTree) -> tuple[tuple[int, ...], ...]:
    """All orderings ``(1, l_2, ..., l_{k+1})`` listing parents before children.

    Each chain corresponds to one admissible labeling of the skeleton: the
    node with canonical label ``chain[i]`` receives member label ``i + 1``.
    """
    chains: list[tuple[int, ...]] = []
    chain = [1]
    available = [canonical.right[1]]

    def extend() -> None:
        if not available:
            chains.append(tuple(chain))
            return
        snapshot = sorted(available)
        for label in snapshot:
            available.remove(label)
            added = [c for c in (canonical.left[label], canonical.right[label]) if c]
            available.extend(added)
            chain.append(label)
            extend()
            chain.pop()
            for c in added:
                available.remove(c)
            available.append(label)
        available.sort()

    extend()
    return tuple(chains)


def enumerate_class(skel: Skeleton) -> tuple[EchelonTree, ...]:
    """All admissible labeled trees sharing the given skeleton.

    The first member is the canonical labeling; the rest follow in the
    deterministic order induced by choosing the smallest feasible label first.
    The class size equals the number of ways to order the nodes so that every
    parent precedes its children.
    """
    if not isinstance(skel, Skeleton):
        raise ConfigError("skel must be a Skeleton")
    if skel.node_count > _MAX_ENUMERATION_ORDER:
        raise UnsupportedOperationError(
            f"class enumeration supports at most {_MAX_ENUMERATION_ORDER} nodes, "
            f"got {skel.node_count}"
        )
    canonical = canonicalize(skel)
    k = canonical.k
    members = []
    for chain in _linear_extension_chains(canonical):
        member_label = {c: i + 1 for i, c in enumerate(chain)}
        left = [0] * (k + 2)
        right = [0] * (k + 2)
        for parent in range(1, k + 2):
            if canonical.left[parent]:
                left[member_label[parent]] = member_label[canonical.left[parent]]
            if canonical.right[parent]:
                right[member_label[parent]] = member_label[canonical.right[parent]]
        members.append(EchelonTree(tuple(left), tuple(right)))
    return tuple(members)


@lru_cache(maxsize=None)
def _shapes(n: int) -> tuple[tuple, ...]:
    """All nested-tuple shapes on ``n`` nodes (Catalan many)."""
    if n == 0:
        return (None,)
    shapes = []
    for left_size in range(n):
        for left in _shapes(left_size):
            for right in _shapes(n - 1 - left_size):
                shapes.append((left, right))
    return tuple(shapes)


def enumerate_skeletons(k: int) -> tuple[Skeleton, ...]:
    """All skeletons on ``k`` nodes, sorted by serialization code."""
    k = _check_int("k", k, 1, _MAX_ENUMERATION_ORDER)
    codes = sorted(_shape_code(shape) for shape in _shapes(k))
    return tuple(Skeleton(code) for code in codes)


def count_skeletons(k: int) -> int:
    """Number of skeletons on ``k`` nodes: the ``k``-th Catalan number.

    Always at most ``4**k``; the supported range stops at ``k = 15``.
    """
    k = _check_int("k", k, 1, _MAX_COUNT_ORDER)
    return math.comb(2 * k, k) // (k + 1)


def time_domain(tree: EchelonTree) -> TimeDomain:
    """The inequality set ``{t_parent >= t_child}`` over the tree's edges.

    Includes the root edge, so ``t_1 >= t_2`` is always present.
    """
    if not isinstance(tree, EchelonTree):
        raise ConfigError("tree must be an EchelonTree")
    return TimeDomain(tree.edges())


def identity_relabeling(k: int) -> tuple[int, ...]:
    """The identity relabeling ``(2, 3, ..., k+1)`` used to seed move tracking."""
    k = _check_int("k", k, 1)
    return tuple(range(2, k + 2))


def _check_relabeling(sigma: Sequence[int], k: int) -> tuple[int, ...]:
    if not isinstance(sigma, tuple):
        raise ConfigError("sigma must be a tuple of integers")
    if len(sigma) != k or sorted(sigma) != list(range(2, k + 2)):
        raise ConfigError(f"sigma must be a permutation of {{2..{k + 1}}}, got {sigma!r}")
    return tuple(int(v) for v in sigma)


def km_move(
    mu: CollapsingMap, sigma: Sequence[int], j: int
) -> tuple[CollapsingMap, tuple[int, ...]]:
    """Swap the roles of labels ``j`` and ``j+1`` in ``mu``, tracking ``sigma``.

    The move is allowed only when ``mu(j) != mu(j+1)`` and ``mu(j+1) < j``;
    it conjugates ``mu`` by the transposition and left-composes the
    transposition onto ``sigma``.  Disallowed moves raise :class:`ConfigError`
    rather than silently returning the input.  Applying the same move twice
    restores the original pair.
    """
    if not isinstance(mu, CollapsingMap):
        raise ConfigError("mu must be a CollapsingMap")
    k = mu.k
    sigma = _check_relabeling(sigma, k)
    j = _check_int("j", j, 2)
    if j > k:
        raise ConfigError(f"j must lie in [2, {k}] so that j+1 is in the domain, got {j}")
    if mu.value_at(j) == mu.value_at(j + 1):
        raise ConfigError(
            f"move at j={j} rejected: mu({j}) == mu({j + 1}) == {mu.value_at(j)}"
        )
    if mu.value_at(j + 1) >= j:
        raise ConfigError(
            f"move at j={j} rejected: mu({j + 1}) = {mu.value_at(j + 1)} is not below {j}"
        )

    def tau(value: int) -> int:
        if value == j:
            return j + 1
        if value == j + 1:
            return j
        return value

    new_values = tuple(tau(mu.value_at(tau(label))) for label in range(2, k + 2))
    new_sigma = tuple(tau(value) for value in sigma)
    return CollapsingMap(new_values), new_sigma


@dataclass(frozen=True)
class ClassRecord:
    """One equivalence class: its skeleton, size, canonical map, and domain."""

    skeleton: Skeleton
    class_size: int
    canonical: CollapsingMap
    domain: TimeDomain


@dataclass(frozen=True)
class ClassTable:
    """All equivalence classes of order ``k``, sorted by skeleton code."""

    k: int
    records: tuple[ClassRecord, ...]

    def to_csv(self) -> str:
        """Render as CSV with columns skeleton_id, class_size, canonical_mu, inequalities."""
        lines = ["skeleton_id,class_size,canonical_mu,inequalities"]
        for record in self.records:
            mu_text = " ".join(str(v) for v in record.canonical.values)
            ineq_text = " ".join(record.domain.inequality_strings())
            lines.append(
                f"{record.skeleton.code},{record.class_size},{mu_text},{ineq_text}"
            )
        return "\n".join(lines) + "\n"


def tabulate_classes(k: int) -> ClassTable:
    """Tabulate every class of order ``k``: sizes partition ``k!``.

    Rows are sorted by skeleton code; the canonical map of each row is the
    class's unique upper-echelon member.
    """
    k = _check_int("k", k, 1, _MAX_ENUMERATION_ORDER)
    records = []
    for skel in enumerate_skeletons(k):
        members = enumerate_class(skel)
        canonical_tree = members[0]
        records.append(
            ClassRecord(
                skeleton=skel,
                class_size=len(members),
                canonical=tree_to_mu(canonical_tree),
                domain=time_domain(canonical_tree),
            )
        )
    return ClassTable(k=k, records=records)


@dataclass(frozen=True)
class RegionCheckReport:
    """Monte Carlo comparison of a class's simplex union with its time domain."""

    points: int
    class_size: int
    union_hits: int
    domain_hits: int
    mismatches: int

    @property
    def agree(self) -> bool:
        """True when the simplex union and the product domain matched pointwise."""
        return self.mismatches == 0


def region_equality_check(
    skel: Skeleton, n_points: int = 100_000, seed: int = 0
) -> RegionCheckReport:
    """Check that member simplices tile the canonical time domain.

    Draws uniform points in ``[0, 1]^{k+1}`` and compares membership in the
    union of per-member simplices ``t_1 >= t_{s(2)} >= ... >= t_{s(k+1)}``
    against membership in the canonical tree's inequality domain.  The two
    regions coincide up to a measure-zero boundary, so the mismatch count of
    a healthy implementation is exactly zero.
    """
    if not isinstance(skel, Skeleton):
        raise ConfigError("skel must be a Skeleton")
    n_points = _check_int("n_points", n_points, 1)
    seed = _check_int("seed", seed, 0)
    canonical = canonicalize(skel)
    chains = _linear_extension_chains(canonical)
    k = canonical.k

    rng = np.random.default_rng(seed)
    times = rng.random((n_points, k + 1))

    union_mask = np.zeros(n_points, dtype=bool)
    for chain in chains:
        columns = np.array(chain) - 1
        ordered = times[:, columns]
        union_mask |= np.all(ordered[:, :-1] >= ordered[:, 1:], axis=1)
    domain_mask = time_domain(canonical).contains(times)

    return RegionCheckReport(
        points=n_points,
        class_size=len(chains),
        union_hits=int(union_mask.sum()),
        domain_hits=int(domain_mask.sum()),
        mismatches=int(np.count_nonzero(union_mask ^ domain_mask)),
    )
