"""Bitset subsets of a finite abelian group, with sumset algebra and layers.

A subset is an immutable ``GroupSubset`` holding a Python int used as a
bitset over the group's flat element indices.  All operations are pure; the
hot paths (sumsets, translates) reduce to a handful of big-int operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, TYPE_CHECKING

if TYPE_CHECKING:  # pragma: no cover
    from .groups import Group, Subgroup


class SubsetError(ValueError):
    """Invalid subset operation."""


class GroupMismatchError(SubsetError):
    """Operands live in different groups."""


class EmptySubsetError(SubsetError):
    """Operation requires a nonempty subset."""


def iter_bits(bits: int) -> Iterator[int]:
    """Yield set bit positions of ``bits`` in ascending order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


class GroupSubset:
    """An immutable subset of a group, stored as a bitset over element indices."""

    __slots__ = ("group", "bits", "_size")

    def __init__(self, group: "Group", bits: int):
        if bits >> group.order:
            raise SubsetError("bitset has bits outside the group")
        self.group = group
        self.bits = bits
        self._size = bits.bit_count()

    @classmethod
    def from_indices(cls, group: "Group", indices: Iterable[int]) -> "GroupSubset":
        bits = 0
        for i in indices:
            if not 0 <= i < group.order:
                raise SubsetError(f"element index {i} out of range for order {group.order}")
            bits |= 1 << i
        return cls(group, bits)

    @classmethod
    def empty(cls, group: "Group") -> "GroupSubset":
        return cls(group, 0)

    @classmethod
    def full(cls, group: "Group") -> "GroupSubset":
        return cls(group, group.full_mask)

    # -- basic protocol ----------------------------------------------------

    def __len__(self) -> int:
        return self._size

    def __bool__(self) -> bool:
        return self.bits != 0

    def __contains__(self, g: int) -> bool:
        return 0 <= g < self.group.order and (self.bits >> g) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GroupSubset)
            and self.group == other.group
            and self.bits == other.bits
        )

    def __hash__(self) -> int:
        return hash((self.group, self.bits))

    def __repr__(self) -> str:
        return f"GroupSubset({self.group!r}, {{{','.join(map(str, self))}}})"

    def to_indices(self) -> tuple[int, ...]:
        return tuple(self)

    def min_element(self) -> int:
        if not self.bits:
            raise EmptySubsetError("empty subset has no minimum")
        return (self.bits & -self.bits).bit_length() - 1

    # -- set algebra ---------------------------------------------------------

    def _check(self, other: "GroupSubset") -> None:
        if self.group != other.group:
            raise GroupMismatchError("subsets belong to different groups")

    def __or__(self, other: "GroupSubset") -> "GroupSubset":
        self._check(other)
        return GroupSubset(self.group, self.bits | other.bits)

    def __and__(self, other: "GroupSubset") -> "GroupSubset":
        self._check(other)
        return GroupSubset(self.group, self.bits & other.bits)

    def setminus(self, other: "GroupSubset") -> "GroupSubset":
        self._check(other)
        return GroupSubset(self.group, self.bits & ~other.bits)

    def complement(self) -> "GroupSubset":
        return GroupSubset(self.group, self.bits ^ self.group.full_mask)

    def with_element(self, g: int) -> "GroupSubset":
        return GroupSubset(self.group, self.bits | (1 << g))

    def without(self, g: int) -> "GroupSubset":
        return GroupSubset(self.group, self.bits & ~(1 << g))

    def is_subset_of(self, other: "GroupSubset") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    # -- group-action operations ----------------------------------------------

    def translate(self, g: int) -> "GroupSubset":
        """The translate X + g."""
        return GroupSubset(self.group, self.group.translate_bits(self.bits, g))

    def negate(self) -> "GroupSubset":
        """The reflection -X = {-x : x in X}."""
        return GroupSubset(self.group, self.group.negate_bits(self.bits))


def parse_subset(group: "Group", text: str) -> GroupSubset:
    """Parse a subset literal: flat indices '0,1,3', tuples '(0,0),(1,3)',
    or either form prefixed by '!' for the complement."""
    text = text.strip()
    complement = text.startswith("!")
    if complement:
        text = text[1:].strip()
    if not text:
        base = GroupSubset.empty(group)
        return base.complement() if complement else base
    bits = 0
    if text.startswith("("):
        chunks = text.replace(" ", "").split("),(")
        for chunk in chunks:
            chunk = chunk.strip("()")
            coords = [int(c) for c in chunk.split(",") if c != ""]
            bits |= 1 << group.index_of(coords)
    else:
        for part in text.split(","):
            part = part.strip()
            if not part.lstrip("-").isdigit():
                raise SubsetError(f"cannot parse subset literal {text!r}")
            idx = int(part)
            if not 0 <= idx < group.order:
                raise SubsetError(f"element index {idx} out of range")
            bits |= 1 << idx
    subset = GroupSubset(group, bits)
    return subset.complement() if complement else subset


def format_subset(x: GroupSubset) -> str:
    return ",".join(map(str, x))


def translate(x: GroupSubset, g: int) -> GroupSubset:
    return x.translate(g)


def negate(x: GroupSubset) -> GroupSubset:
    return x.negate()


def sumset(x: GroupSubset, y: GroupSubset) -> GroupSubset:
    """The sumset X + Y = {a + b : a in X, b in Y}.

    Translate-and-or over the smaller operand; empty if either side is empty.
    """
    x._check(y)
    group = x.group
    if not x.bits or not y.bits:
        return GroupSubset(group, 0)
    small, large = (x, y) if len(x) <= len(y) else (y, x)
    tr = group.translate_bits
    lb = large.bits
    acc = 0
    for g in iter_bits(small.bits):
        acc |= tr(lb, g)
    return GroupSubset(group, acc)


def diffset(x: GroupSubset, y: GroupSubset) -> GroupSubset:
    """The difference set X - Y = {a - b : a in X, b in Y}."""
    return sumset(x, y.negate())


def stabilizer(x: GroupSubset) -> "Subgroup":
    """The subgroup {g : X + g = X}; X is a union of its cosets."""
    from .groups import Subgroup

    if not x.bits:
        raise EmptySubsetError("stabilizer of the empty set is undefined")
    group = x.group
    tr = group.translate_bits
    bits = x.bits
    carrier = 0
    for g in range(group.order):
        if tr(bits, g) == bits:
            carrier |= 1 << g
    return Subgroup(GroupSubset(group, carrier))


def is_periodic(x: GroupSubset) -> bool:
    """True iff the stabilizer of X is nonnull."""
    return len(stabilizer(x)) > 1


def is_quasi_periodic(x: GroupSubset) -> Optional[tuple[int, "Subgroup"]]:
    """Certificate that X is one deleted element short of a periodic set.

    Returns ``(g, H)`` for the smallest g not in X such that X + {g} is
    periodic, with H the full stabilizer of X + {g}; None when no such g
    exists.  The deleted element must be genuinely missing, so a periodic X
    is not quasi-periodic unless some strictly larger X + {g} is periodic.
    """
    if not x.bits:
        raise EmptySubsetError("quasi-periodicity of the empty set is undefined")
    for g in iter_bits(x.bits ^ x.group.full_mask):
        st = stabilizer(x.with_element(g))
        if len(st) > 1:
            return g, st
    return None


@dataclass(frozen=True)
class LayerSequence:
    """Growth shells N_i = (X + iY) \\ (X + (i-1)Y), with N_0 = X."""

    base: GroupSubset
    step: GroupSubset
    layers: tuple[GroupSubset, ...]
    ell: int

    def layer(self, i: int) -> GroupSubset:
        """N_i; empty beyond the last stored layer."""
        if i <= self.ell:
            return self.layers[i]
        return GroupSubset.empty(self.base.group)


def layer_sequence(x: GroupSubset, y: GroupSubset, max_i: Optional[int] = None) -> LayerSequence:
    """Layers of X under repeated addition of Y, up to stabilization or max_i."""
    x._check(y)
    if 0 not in x or 0 not in y:
        raise SubsetError("layer sequence requires 0 in X and 0 in Y")
    if max_i is None:
        max_i = x.group.order
    layers = [x]
    prev = x
    i = 0
    while i < max_i:
        nxt = sumset(prev, y)
        shell = nxt.setminus(prev)
        if not shell:
            break
        layers.append(shell)
        prev = nxt
        i += 1
    return LayerSequence(base=x, step=y, layers=tuple(layers), ell=len(layers) - 1)


def check_layer_descent(seq: LayerSequence, r: int) -> bool:
    """True iff N_r - Y* is contained in N_{r-1}; vacuously true past the last layer."""
    if r < 1:
        raise SubsetError("layer descent index must be >= 1")
    if r > seq.ell:
        return True
    y_star = seq.step.without(0)
    if not y_star:
        return True
    shifted = diffset(seq.layer(r), y_star)
    return shifted.is_subset_of(seq.layer(r - 1))


def big_s_check(s: GroupSubset, a: GroupSubset) -> Optional[bool]:
    """For |A| = 3 with S+A = S+(A \\ {a}) for every a, test 3|S| >= 2|S+A|.

    Returns None when the hypothesis fails, else the truth of the inequality.
    """
    s._check(a)
    if len(a) != 3:
        raise SubsetError("big_s_check requires |A| = 3")
    total = sumset(s, a)
    for g in a:
        if sumset(s, a.without(g)) != total:
            return None
    return 3 * len(s) >= 2 * len(total)
