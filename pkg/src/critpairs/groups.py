"""Finite abelian groups as explicit products of cyclic factors.

Elements are flat indices in ``range(order)``; index ``i`` corresponds to the
mixed-radix coordinate tuple with the last factor varying fastest.  Groups are
kept exactly as presented: ``[2, 2]`` and ``[4]`` are distinct values even
though only one abelian group of order 4 is cyclic.
"""

from __future__ import annotations

import itertools
from math import gcd
from typing import Iterable, Optional, Sequence

from .subsets import GroupSubset, iter_bits

ORDER_CAP = 1 << 20
SUBGROUP_ENUM_CAP = 4096


class GroupError(ValueError):
    """Invalid group construction or element arithmetic."""


class CapExceededError(GroupError):
    """A configured size cap was exceeded."""


class NotASubgroupError(GroupError):
    """A carrier failed the subgroup closure or Lagrange checks."""


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


class Group:
    """A finite abelian group Z/n_1 x ... x Z/n_t with flat element indexing."""

    __slots__ = (
        "moduli",
        "order",
        "full_mask",
        "_strides",
        "_ms",
        "_rot_cache",
        "_neg_cache",
        "_subgroups",
        "_autos",
    )

    def __init__(self, moduli: Sequence[int]):
        mods = tuple(int(m) for m in moduli)
        for m in mods:
            if m < 2:
                raise GroupError(f"modulus {m} is smaller than 2")
        order = 1
        for m in mods:
            order *= m
        self.moduli = mods
        self.order = order
        self.full_mask = (1 << order) - 1
        strides = []
        s = order
        for m in mods:
            s //= m
            strides.append(s)
        self._strides = tuple(strides)
        self._ms = tuple(zip(mods, strides))
        self._rot_cache: dict[tuple[int, int], tuple[int, int, int, int]] = {}
        self._neg_cache: Optional[tuple] = None
        self._subgroups: Optional[tuple] = None
        self._autos: Optional[tuple] = None

    # -- identity -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Group) and self.moduli == other.moduli

    def __hash__(self) -> int:
        return hash(self.moduli)

    def __repr__(self) -> str:
        return f"Group({list(self.moduli)!r})"

    @property
    def spec(self) -> str:
        """CLI spec string, factors joined by 'x': e.g. 'Z7xZ11'."""
        if not self.moduli:
            return "Z1"
        return "x".join(f"Z{m}" for m in self.moduli)

    # -- element indexing ------------------------------------------------------

    def tuple_of(self, a: int) -> tuple[int, ...]:
        if not 0 <= a < self.order:
            raise GroupError(f"element index {a} out of range")
        coords = []
        for m, s in self._ms:
            coords.append((a // s) % m)
        return tuple(coords)

    def index_of(self, coords: Sequence[int]) -> int:
        if len(coords) != len(self.moduli):
            raise GroupError("coordinate tuple has wrong length")
        a = 0
        for c, (m, s) in zip(coords, self._ms):
            a += (int(c) % m) * s
        return a

    def format_element(self, a: int) -> str:
        if len(self.moduli) == 1:
            return str(a)
        return "(" + ",".join(map(str, self.tuple_of(a))) + ")"

    # -- arithmetic ------------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        r = 0
        for m, s in self._ms:
            r += ((a // s + b // s) % m) * s
        return r

    def neg(self, a: int) -> int:
        r = 0
        for m, s in self._ms:
            r += (-(a // s) % m) * s
        return r

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def scalar_mul(self, c: int, a: int) -> int:
        r = 0
        for m, s in self._ms:
            r += (c * (a // s)) % m * s
        return r

    def element_order(self, a: int) -> int:
        """Least k >= 1 with k*a = 0 (lcm of per-coordinate orders)."""
        if not 0 <= a < self.order:
            raise GroupError(f"element index {a} out of range")
        k = 1
        for m, s in self._ms:
            c = (a // s) % m
            k = _lcm(k, m // gcd(m, c)) if c else k
        return k

    @property
    def exponent(self) -> int:
        e = 1
        for m in self.moduli:
            e = _lcm(e, m)
        return e

    @property
    def is_cyclic(self) -> bool:
        return self.exponent == self.order

    # -- bitset engine -----------------------------------------------------------
    #
    # Translation by g decomposes into one rotation per factor.  Rotating
    # factor i (modulus m, stride s) by v moves, inside every block of m*s
    # consecutive bits, the low (m-v)*s bits up and the high v*s bits down.

    def _rot(self, i: int, v: int) -> tuple[int, int, int, int]:
        key = (i, v)
        cached = self._rot_cache.get(key)
        if cached is not None:
            return cached
        m, s = self._ms[i]
        block = m * s
        nblocks = self.order // block
        rep = ((1 << (nblocks * block)) - 1) // ((1 << block) - 1)
        low = ((1 << ((m - v) * s)) - 1) * rep
        high = self.full_mask ^ low
        entry = (low, high, v * s, (m - v) * s)
        self._rot_cache[key] = entry
        return entry

    def translate_bits(self, bits: int, g: int) -> int:
        """Bitset of X + g given the bitset of X."""
        if g == 0 or not bits:
            return bits
        mods = self.moduli
        if len(mods) == 1:
            n = self.order
            return ((bits << g) | (bits >> (n - g))) & self.full_mask
        for i, (m, s) in enumerate(self._ms):
            v = (g // s) % m
            if v:
                low, high, up, down = self._rot(i, v)
                bits = ((bits & low) << up) | ((bits & high) >> down)
        return bits

    def negate_bits(self, bits: int) -> int:
        """Bitset of -X given the bitset of X."""
        out = 0
        for g in iter_bits(bits):
            out |= 1 << self.neg(g)
        return out

    # -- automorphisms --------------------------------------------------------

    def automorphisms(self) -> tuple[tuple[int, ...], ...]:
        """All automorphisms as index permutation tables (brute force)."""
        if self._autos is not None:
            return self._autos
        n = self.order
        t = len(self.moduli)
        if n > 4096:
            raise CapExceededError("automorphism enumeration capped at order 4096")
        basis = list(self._strides)
        candidates: list[list[int]] = []
        for i, m in enumerate(self.moduli):
            ok = [g for g in range(n) if self.element_order(g) and m % self.element_order(g) == 0]
            candidates.append(ok)
        autos = []
        for images in itertools.product(*candidates):
            table = [0] * n
            seen = 0
            bijective = True
            for a in range(n):
                coords = self.tuple_of(a)
                img = 0
                for c, im in zip(coords, images):
                    img = self.add(img, self.scalar_mul(c, im))
                table[a] = img
                bit = 1 << img
                if seen & bit:
                    bijective = False
                    break
                seen |= bit
            if bijective:
                autos.append(tuple(table))
        self._autos = tuple(autos)
        return self._autos


def make_group(moduli: Sequence[int], order_cap: int = ORDER_CAP) -> Group:
    """Build a group from its cyclic factors; moduli are kept as given."""
    mods = tuple(int(m) for m in moduli)
    for m in mods:
        if m < 2:
            raise GroupError(f"modulus {m} is smaller than 2")
    order = 1
    for m in mods:
        order *= m
    if order > order_cap:
        raise CapExceededError(f"group order {order} exceeds cap {order_cap}")
    return Group(mods)


def element_order(group: Group, a: int) -> int:
    return group.element_order(a)


def parse_group(spec: str, order_cap: int = ORDER_CAP) -> Group:
    """Parse a CLI group spec such as 'Z7xZ11' or 'z12'."""
    parts = spec.strip().split("x")
    moduli = []
    for part in parts:
        part = part.strip()
        if not part or part[0] not in "Zz" or not part[1:].isdigit():
            raise GroupError(f"cannot parse group spec {spec!r}")
        moduli.append(int(part[1:]))
    return make_group(moduli, order_cap=order_cap)


class Subgroup:
    """A carrier verified closed under addition and negation, containing 0."""

    __slots__ = ("group", "carrier", "generators")

    def __init__(self, carrier: GroupSubset, generators: Sequence[int] = ()):
        group = carrier.group
        bits = carrier.bits
        if not (bits & 1):
            raise NotASubgroupError("subgroup carrier must contain 0")
        if group.order % len(carrier) != 0:
            raise NotASubgroupError("carrier size does not divide the group order")
        tr = group.translate_bits
        for g in iter_bits(bits):
            if tr(bits, g) != bits:
                raise NotASubgroupError("carrier is not closed under addition")
        self.group = group
        self.carrier = carrier
        self.generators = tuple(generators)

    def __len__(self) -> int:
        return len(self.carrier)

    def __contains__(self, g: int) -> bool:
        return g in self.carrier

    def __iter__(self):
        return iter(self.carrier)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Subgroup) and self.carrier == other.carrier

    def __hash__(self) -> int:
        return hash(("subgroup", self.carrier))

    def __repr__(self) -> str:
        return f"Subgroup({self.group.spec}, {{{','.join(map(str, self.carrier))}}})"

    @property
    def is_trivial(self) -> bool:
        return len(self.carrier) == 1

    def index(self) -> int:
        return self.group.order // len(self.carrier)


def subgroup_generated(group: Group, gens: Iterable[int]) -> Subgroup:
    """Smallest subgroup containing ``gens``; {0} for an empty list."""
    gens = tuple(gens)
    full = group.full_mask
    bits = 1
    for g in gens:
        if not 0 <= g < group.order:
            raise GroupError(f"element index {g} out of range")
        if bits == full:
            break
        acc = bits
        shifted = bits
        for _ in range(group.element_order(g) - 1):
            shifted = group.translate_bits(shifted, g)
            acc |= shifted
            if acc == full:
                break
        bits = acc
    return Subgroup(GroupSubset(group, bits), gens)


def _sum_bits(group: Group, b1: int, b2: int) -> int:
    small, large = (b1, b2) if b1.bit_count() <= b2.bit_count() else (b2, b1)
    acc = 0
    tr = group.translate_bits
    for g in iter_bits(small):
        acc |= tr(large, g)
    return acc


def all_subgroups(group: Group) -> list[Subgroup]:
    """The full subgroup lattice, sorted by order then carrier bitset.

    Closure of all cyclic subgroups under pairwise join (H1 + H2 is again a
    subgroup in the abelian case); exact for orders up to the cap.
    """
    if group.order > SUBGROUP_ENUM_CAP:
        raise CapExceededError(
            f"subgroup enumeration capped at order {SUBGROUP_ENUM_CAP}"
        )
    if group._subgroups is not None:
        return list(group._subgroups)
    gens_of: dict[int, tuple[int, ...]] = {1: ()}
    for g in range(1, group.order):
        sub = subgroup_generated(group, (g,))
        gens_of.setdefault(sub.carrier.bits, (g,))
    frontier = list(gens_of)
    known = set(frontier)
    while frontier:
        new = []
        for b1 in frontier:
            for b2 in list(known):
                joined = _sum_bits(group, b1, b2)
                if joined not in known:
                    known.add(joined)
                    gens_of[joined] = tuple(dict.fromkeys(gens_of[b1] + gens_of[b2]))
                    new.append(joined)
        frontier = new
    subs = [
        Subgroup(GroupSubset(group, bits), gens_of[bits])
        for bits in known
    ]
    subs.sort(key=lambda h: (len(h), h.carrier.bits))
    group._subgroups = tuple(subs)
    return subs


def is_subgroup_bits(group: Group, bits: int) -> bool:
    """Closure test without constructing a Subgroup."""
    if not bits & 1:
        return False
    if group.order % bits.bit_count() != 0:
        return False
    tr = group.translate_bits
    for g in iter_bits(bits):
        if tr(bits, g) != bits:
            return False
    return True


# -- quotients ---------------------------------------------------------------


def _smith_invariants(rows: list[list[int]], t: int) -> list[int]:
    """Diagonal of the Smith normal form of the integer matrix (rows x t)."""
    mat = [row[:] for row in rows if any(row)]
    invariants = []
    col = 0
    while col < t and mat:
        pivot = None
        for ri, row in enumerate(mat):
            for ci in range(col, t):
                if row[ci] and (pivot is None or abs(row[ci]) < pivot[2]):
                    pivot = (ri, ci, abs(row[ci]))
        if pivot is None:
            break
        ri, ci, _ = pivot
        mat[0], mat[ri] = mat[ri], mat[0]
        for row in mat:
            row[col], row[ci] = row[ci], row[col]
        while True:
            p = mat[0][col]
            dirty = False
            for row in mat[1:]:
                if row[col]:
                    q = row[col] // p
                    for c in range(col, t):
                        row[c] -= q * mat[0][c]
                    if row[col]:
                        mat[0], row[:] = row[:], mat[0]
                        dirty = True
            if dirty:
                continue
            for c in range(col + 1, t):
                if mat[0][c]:
                    q = mat[0][c] // p
                    for row in mat:
                        row[c] -= q * row[col]
                    if mat[0][c]:
                        for row in mat:
                            row[col], row[c] = row[c], row[col]
                        dirty = True
            if not dirty:
                break
        d = abs(mat[0][col])
        # enforce divisibility d | later entries by folding remainders back in
        rest = [row[col + 1 :] for row in mat[1:]]
        fixed = True
        for row in mat[1:]:
            for c in range(col + 1, t):
                if row[c] % d:
                    for cc in range(col, t):
                        mat[0][cc] += row[cc]
                    fixed = False
                    break
            if not fixed:
                break
        if not fixed:
            continue
        invariants.append(d)
        mat = [row for row in mat[1:] if any(row[col + 1 :])]
        col += 1
    return invariants


class QuotientMap:
    """Canonical projection sigma: G -> G/Q with an explicit image table."""

    __slots__ = ("source", "subgroup", "target", "image", "_preimages")

    def __init__(self, source: Group, subgroup: Subgroup, target: Group, image: tuple[int, ...]):
        self.source = source
        self.subgroup = subgroup
        self.target = target
        self.image = image
        self._preimages: Optional[tuple[GroupSubset, ...]] = None

    def __call__(self, g: int) -> int:
        return self.image[g]

    def map_subset(self, x: GroupSubset) -> GroupSubset:
        if x.group != self.source:
            raise GroupError("subset is not in the source group")
        bits = 0
        for g in iter_bits(x.bits):
            bits |= 1 << self.image[g]
        return GroupSubset(self.target, bits)

    def preimage(self, ti: int) -> GroupSubset:
        if self._preimages is None:
            buckets = [0] * self.target.order
            for g, img in enumerate(self.image):
                buckets[img] |= 1 << g
            self._preimages = tuple(GroupSubset(self.source, b) for b in buckets)
        return self._preimages[ti]


def quotient(group: Group, q: Subgroup) -> QuotientMap:
    """The quotient G/Q presented as a product of cyclic factors."""
    if q.group != group:
        raise NotASubgroupError("subgroup belongs to a different group")
    n = group.order
    if len(q) == 1:
        target = Group(group.moduli) if group.moduli else Group(())
        return QuotientMap(group, q, target, tuple(range(n)))
    if len(q) == n:
        return QuotientMap(group, q, Group(()), tuple([0] * n))

    # coset partition, ids ordered by minimal representative
    qbits = q.carrier.bits
    cid = [-1] * n
    reps: list[int] = []
    for g in range(n):
        if cid[g] < 0:
            c = len(reps)
            reps.append(g)
            for h in iter_bits(group.translate_bits(qbits, g)):
                cid[h] = c
    m = len(reps)

    def cadd(i: int, j: int) -> int:
        return cid[group.add(reps[i], reps[j])]

    def corder(i: int) -> int:
        k, acc = 1, i
        while acc != 0:
            acc = cadd(acc, i)
            k += 1
        return k

    # isomorphism type via Smith normal form of [diag(moduli); coords(Q gens)]
    t = len(group.moduli)
    rows = [[0] * t for _ in range(t)]
    for i, mod in enumerate(group.moduli):
        rows[i][i] = mod
    qgens = q.generators if q.generators else tuple(q.carrier)
    for g in qgens:
        rows.append(list(group.tuple_of(g)))
    invariants = [d for d in _smith_invariants(rows, t) if d > 1]
    prod = 1
    for d in invariants:
        prod *= d
    if prod != m:
        raise GroupError("internal error: quotient invariants do not match index")
    invariants.sort()
    target = Group(tuple(invariants))

    # match generators: cosets (c_1..c_r) with orders d_i spanning a direct sum
    orders = [corder(i) for i in range(m)]
    span = {0: 0}  # coset id -> target index
    chosen: list[int] = []

    def extend(level: int, cur_span: dict[int, int]) -> Optional[dict[int, int]]:
        if level == len(invariants):
            return cur_span
        d = invariants[level]
        stride = target._strides[level]
        for cand in range(1, m):
            if orders[cand] != d:
                continue
            new_span = dict(cur_span)
            ok = True
            for base, tidx in cur_span.items():
                acc = base
                for a in range(1, d):
                    acc = cadd(acc, cand)
                    if acc in new_span:
                        ok = False
                        break
                    new_span[acc] = tidx + a * stride
                if not ok:
                    break
            if ok and len(new_span) == len(cur_span) * d:
                result = extend(level + 1, new_span)
                if result is not None:
                    return result
        return None

    full_span = extend(0, span)
    if full_span is None or len(full_span) != m:
        raise GroupError("internal error: quotient basis search failed")
    image = tuple(full_span[cid[g]] for g in range(n))
    qm = QuotientMap(group, q, target, image)
    if image[0] != 0:
        raise GroupError("internal error: sigma(0) != 0")
    return qm


def coset_decomposition(s: GroupSubset, h: Subgroup) -> list[GroupSubset]:
    """Minimal partition of S into parts each inside a single H-coset.

    Parts are ordered by their minimal element index.
    """
    if not s.bits:
        raise GroupError("cannot decompose the empty set")
    if s.group != h.group:
        raise GroupError("subset and subgroup belong to different groups")
    group = s.group
    hbits = h.carrier.bits
    parts = []
    remaining = s.bits
    while remaining:
        g = (remaining & -remaining).bit_length() - 1
        coset = group.translate_bits(hbits, g)
        parts.append(GroupSubset(group, s.bits & coset))
        remaining &= ~coset
    return parts
