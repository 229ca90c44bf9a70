"""Isoperimetric numbers kappa_k, fragments, atoms, and atom-structure checks.

For a subset S with 0 in S, kappa_k(S) is the minimum of |X+S| - |X| over
X inside the subgroup H generated by S with |X| >= k and |X+S| <= |H| - k.
When no such X exists (S not k-separable) the conventional value
k|S| - 2k + 1 is reported instead.

The production search anchors 0 in X (translates of fragments are
fragments), explores subsets in increasing-index order with monotone
boundary pruning, and caps the explored cardinality at (|H|-1)//2 on each
of the two sides S and -S: a fragment F of S pairs with the fragment
H \\ (F+S) of -S, and at least one of the pair is that small.  Exceeding
the node budget raises an error rather than returning an estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable, Optional, Sequence

from .groups import Group, Subgroup, is_subgroup_bits, subgroup_generated
from .subsets import GroupSubset, iter_bits, sumset

DEFAULT_NODE_BUDGET = 10**9


class BudgetExceededError(RuntimeError):
    """Raised when the exact search exceeded its node budget."""


class NotSeparableError(ValueError):
    """Raised when an operation requires a k-separable set."""


class NotAnAtomError(ValueError):
    """Raised when a claimed atom fails verification."""


class _Found(Exception):
    """Internal: the search hit the global value floor and cannot improve."""


@dataclass(frozen=True)
class KappaResult:
    """Value of kappa_k(S) with a witnessing fragment when separable."""

    k: int
    value: int
    separable: bool
    witness: Optional[GroupSubset]
    ambient: Subgroup
    set_size: int

    @property
    def m(self) -> int:
        """The excess value - |S| (the paper's m for k = 2)."""
        return self.value - self.set_size


@dataclass(frozen=True)
class AtomSet:
    """All k-atoms containing 0, lexicographically ordered by bitset."""

    k: int
    value: int
    atoms: tuple[GroupSubset, ...]
    normalized: bool = True

    @property
    def cardinality(self) -> int:
        return len(self.atoms[0])

    def translates(self) -> tuple[GroupSubset, ...]:
        """The full atom family, closed under translation."""
        seen = {}
        for a in self.atoms:
            for g in range(a.group.order):
                t = a.translate(g)
                seen[t.bits] = t
        return tuple(seen[b] for b in sorted(seen))


class _Space:
    """<S> remapped to dense bit positions, with per-element shift tables."""

    __slots__ = ("group", "ambient", "elems", "pos", "n", "full", "ss", "sn")

    def __init__(self, s: GroupSubset):
        group = s.group
        ambient = subgroup_generated(group, s.to_indices())
        elems = list(ambient.carrier)
        pos = {g: i for i, g in enumerate(elems)}
        n = len(elems)
        add = group.add
        sub = group.sub
        s_elems = s.to_indices()
        ss = []
        sn = []
        for h in elems:
            acc_p = 0
            acc_n = 0
            for x in s_elems:
                acc_p |= 1 << pos[add(h, x)]
                acc_n |= 1 << pos[sub(h, x)]
            ss.append(acc_p)
            sn.append(acc_n)
        self.group = group
        self.ambient = ambient
        self.elems = elems
        self.pos = pos
        self.n = n
        self.full = (1 << n) - 1
        self.ss = ss
        self.sn = sn

    def subset_of_positions(self, xbits: int) -> GroupSubset:
        bits = 0
        for p in iter_bits(xbits):
            bits |= 1 << self.elems[p]
        return GroupSubset(self.group, bits)

    def boundary_of(self, table: list[int], xbits: int) -> int:
        acc = 0
        for p in iter_bits(xbits):
            acc |= table[p]
        return acc


class _Budget:
    """Mutable node counter; tripping the cap aborts the search."""

    __slots__ = ("used", "cap")

    def __init__(self, cap: int):
        self.used = 0
        self.cap = cap

    def trip(self) -> None:
        raise BudgetExceededError(
            f"exact search exceeded budget ({self.cap} node visits)"
        )


def _min_search(
    table: list[int],
    n: int,
    k: int,
    upper: int,
    cmax: int,
    budget: _Budget,
) -> tuple[Optional[int], Optional[int], Optional[int]]:
    """Minimum of |X+S|-|X| strictly below ``upper`` over anchored subsets.

    X runs over subsets of positions containing 0 with k <= |X| <= cmax and
    |X+S| <= n-k.  Returns (value, x_bits, boundary_bits) of the best find,
    or (None, None, None) when nothing beats ``upper``.
    """
    feas_cap = n - k
    if k > cmax or feas_cap < 1 or upper <= 1:
        return None, None, None
    pool_masks = [((1 << n) - 1) ^ ((1 << s) - 1) for s in range(n + 1)]
    best = upper
    best_x = best_b = None
    cap = budget.cap

    def rec(start: int, count: int, xbits: int, bnd: int, bsize: int) -> None:
        nonlocal best, best_x, best_b
        budget.used += n - start
        if budget.used > cap:
            budget.trip()
        z = (bnd & pool_masks[start]).bit_count()
        room = cmax - count
        zz = z if z < room else room
        if bsize - count - zz >= best:
            return
        if count < k and z < k - count and bsize + (k - count - z) > feas_cap:
            return
        for g in range(start, n):
            new_bnd = bnd | table[g]
            nb = new_bnd.bit_count()
            cnt = count + 1
            if cnt >= k and nb <= feas_cap:
                v = nb - cnt
                if v < best:
                    best = v
                    best_x = xbits | (1 << g)
                    best_b = new_bnd
                    if best <= 1:
                        raise _Found
            if nb > feas_cap or nb - cmax >= best or cnt >= cmax:
                continue
            rec(g + 1, cnt, xbits | (1 << g), new_bnd, nb)

    root_bnd = table[0]
    rb = root_bnd.bit_count()
    if k <= 1 and rb <= feas_cap:
        v = rb - 1
        if v < best:
            best, best_x, best_b = v, 1, root_bnd
    try:
        if best > 1 and cmax >= 1:
            rec(1, 1, 1, root_bnd, rb)
    except _Found:
        pass
    if best_x is None:
        return None, None, None
    return best, best_x, best_b


def _collect_exact(
    table: list[int],
    n: int,
    k: int,
    c: int,
    value: int,
    budget: _Budget,
) -> list[int]:
    """All anchored subsets of size exactly c achieving |X+S|-|X| = value."""
    feas_cap = n - k
    out: list[int] = []
    pool_masks = [((1 << n) - 1) ^ ((1 << s) - 1) for s in range(n + 1)]
    cap = budget.cap

    def rec(start: int, count: int, xbits: int, bnd: int, bsize: int) -> None:
        rem = c - count
        if rem == 0:
            if bsize <= feas_cap and bsize - c == value:
                out.append(xbits)
            return
        if n - start < rem:
            return
        budget.used += n - start
        if budget.used > cap:
            budget.trip()
        z = (bnd & pool_masks[start]).bit_count()
        extra = rem - z
        min_final = bsize + (extra if extra > 0 else 0)
        if min_final - c > value or min_final > feas_cap:
            return
        for g in range(start, n - rem + 1):
            new_bnd = bnd | table[g]
            rec(g + 1, count + 1, xbits | (1 << g), new_bnd, new_bnd.bit_count())

    rec(1, 1, 1, table[0], table[0].bit_count())
    return out


def _validate(s: GroupSubset, k: int) -> None:
    if 0 not in s:
        raise ValueError("kappa requires 0 in S")
    if k < 1:
        raise ValueError("k must be >= 1")


def _canonical_translate(s: GroupSubset) -> GroupSubset:
    """The lexicographically least of the translates S - x over x in S.

    kappa values, witnesses, separability and atoms are identical across
    these translates: |X + (S - x)| = |X + S| for every X, and
    <S - x> = <S> when 0 is in S.
    """
    group = s.group
    tr = group.translate_bits
    neg = group.neg
    best = min(tr(s.bits, neg(x)) for x in iter_bits(s.bits))
    return GroupSubset(group, best)


_CACHE: dict[tuple, tuple[Optional[KappaResult], "_Space"]] = {}
_CACHE_MAX = 1 << 16


def _kappa_search(
    s: GroupSubset, k: int, upper_limit: Optional[int], budget: Optional[int]
) -> tuple[Optional[KappaResult], _Space]:
    """Canonicalize by translation and dispatch to the memoized engine.

    Results are exact regardless of the budget, so a completed search is
    reusable under any later budget.
    """
    _validate(s, k)
    canon = _canonical_translate(s)
    key = (canon.group.moduli, canon.bits, k, upper_limit)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    result = _kappa_search_impl(canon, k, upper_limit, budget)
    if len(_CACHE) >= _CACHE_MAX:
        _CACHE.clear()
    _CACHE[key] = result
    return result


def _kappa_search_impl(
    s: GroupSubset, k: int, upper_limit: Optional[int], budget: Optional[int]
) -> tuple[Optional[KappaResult], _Space]:
    """Shared engine: exact result when a fragment below the cap exists."""
    space = _Space(s)
    n = space.n
    size = len(s)
    conv = k * size - 2 * k + 1
    bound = n - 2 * k
    if size >= k and conv < bound:
        bound = conv  # Remark: separable S with |S| >= k has kappa <= k|S|-2k+1
    if upper_limit is not None and upper_limit < bound:
        bound = upper_limit
    budget_box = _Budget(DEFAULT_NODE_BUDGET if budget is None else budget)
    cmax = (n - 1) // 2
    v1, x1, _ = _min_search(space.ss, n, k, bound + 1, cmax, budget_box)
    upper2 = v1 if v1 is not None else bound + 1
    v2, _, b2 = _min_search(space.sn, n, k, upper2, cmax, budget_box)
    if v2 is not None:
        # dual witness: F = H \ (F' + (-S)) is a fragment of S with the same value
        fbits = space.full ^ b2
        bnd = space.boundary_of(space.ss, fbits)
        fc = fbits.bit_count()
        bc = bnd.bit_count()
        if not (fc >= k and bc <= n - k and bc - fc == v2):
            raise RuntimeError("internal error: dual witness failed recheck")
        value, xbits = v2, fbits
    elif v1 is not None:
        value, xbits = v1, x1
    else:
        return None, space
    witness = space.subset_of_positions(xbits)
    return (
        KappaResult(
            k=k,
            value=value,
            separable=True,
            witness=witness,
            ambient=space.ambient,
            set_size=size,
        ),
        space,
    )


def kappa(s: GroupSubset, k: int, *, budget: Optional[int] = None) -> KappaResult:
    """Exact kappa_k(S), or the conventional value when S is not k-separable."""
    result, space = _kappa_search(s, k, None, budget)
    if result is not None:
        return result
    return KappaResult(
        k=k,
        value=k * len(s) - 2 * k + 1,
        separable=False,
        witness=None,
        ambient=space.ambient,
        set_size=len(s),
    )


def kappa_bounded(
    s: GroupSubset, k: int, bound: int, *, budget: Optional[int] = None
) -> Optional[KappaResult]:
    """Exact result when S is k-separable with kappa_k(S) <= bound, else None.

    Cheap hypothesis filter: a None return means "not separable or above the
    bound" without distinguishing the two.
    """
    if bound < 1:
        return None
    result, _ = _kappa_search(s, k, bound, budget)
    return result


def is_k_separable(s: GroupSubset, k: int, *, budget: Optional[int] = None) -> bool:
    """True iff some X in <S> has |X| >= k and |X+S| <= |<S>| - k."""
    _validate(s, k)
    if len(s) >= k:
        # greedy singleton-extension witness: the first k elements of S
        h = subgroup_generated(s.group, s.to_indices())
        x = GroupSubset.from_indices(s.group, s.to_indices()[:k])
        if len(sumset(x, s)) <= len(h) - k:
            return True
    return kappa(s, k, budget=budget).separable


def atoms(
    s: GroupSubset,
    k: int,
    *,
    budget: Optional[int] = None,
    bound: Optional[int] = None,
) -> AtomSet:
    """All k-atoms of S containing 0 (exhaustive at the minimal cardinality).

    ``bound``, when given, must be a known upper bound on kappa_k(S); it lets
    the call reuse a previous bounded search instead of re-deriving the value.
    """
    result, space = _kappa_search(s, k, bound, budget)
    if result is None:
        raise NotSeparableError(f"S is not {k}-separable")
    value = result.value
    n = space.n
    budget_box = _Budget(DEFAULT_NODE_BUDGET if budget is None else budget)
    for c in range(k, n - k - value + 1):
        found = _collect_exact(space.ss, n, k, c, value, budget_box)
        if found:
            subsets = [space.subset_of_positions(x) for x in found]
            subsets.sort(key=lambda t: t.bits)
            return AtomSet(k=k, value=value, atoms=tuple(subsets))
    raise RuntimeError("internal error: separable set has no fragments")


# -- plain full-enumeration oracle ---------------------------------------------


@dataclass(frozen=True)
class OracleKappa:
    k: int
    separable: bool
    value: int
    atom_size: Optional[int]
    atoms: Optional[tuple[GroupSubset, ...]]
    fragments: Optional[tuple[GroupSubset, ...]]


def kappa_oracle(
    s: GroupSubset,
    ks: Sequence[int] = (1, 2, 3, 4),
    *,
    collect: str = "none",
) -> dict[int, OracleKappa]:
    """Brute-force oracle: enumerate every one of the 2^|H| subsets of H = <S>.

    ``collect`` is "none", "atoms", or "fragments" (atoms plus every
    kappa-attaining subset of any size and position).
    """
    _validate(s, min(ks))
    space = _Space(s)
    n = space.n
    if n > 22:
        raise ValueError("oracle limited to |<S>| <= 22")
    table = space.ss
    kmax = max(ks)
    kset = sorted(ks)
    best: dict[int, list] = {k: [None, None] for k in kset}  # value, min size
    frags: dict[int, list[int]] = {k: [] for k in kset}

    def rec(start: int, count: int, xbits: int, bnd: int, bsize: int) -> None:
        cap = n - bsize
        for k in kset:
            if k > count or k > cap:
                break
            v = bsize - count
            cur = best[k]
            if cur[0] is None or v < cur[0]:
                cur[0] = v
                cur[1] = count
                if collect != "none":
                    frags[k] = [xbits]
            elif v == cur[0]:
                if count < cur[1]:
                    cur[1] = count
                if collect == "fragments":
                    frags[k].append(xbits)
                elif collect == "atoms" and count <= cur[1]:
                    frags[k].append(xbits)
        for g in range(start, n):
            nb = bnd | table[g]
            rec(g + 1, count + 1, xbits | (1 << g), nb, nb.bit_count())

    for g0 in range(n):
        b0 = table[g0]
        rec(g0 + 1, 1, 1 << g0, b0, b0.bit_count())

    out = {}
    for k in kset:
        value, minsize = best[k]
        if value is None:
            out[k] = OracleKappa(k, False, k * len(s) - 2 * k + 1, None, None, None)
            continue
        atom_list = None
        frag_list = None
        if collect != "none":
            all_hits = [
                x for x in frags[k]
            ]
            atom_hits = sorted(
                {x for x in all_hits if x.bit_count() == minsize and x & 1},
            )
            atom_list = tuple(space.subset_of_positions(x) for x in atom_hits)
            if collect == "fragments":
                frag_list = tuple(
                    space.subset_of_positions(x) for x in sorted(set(all_hits))
                )
        out[k] = OracleKappa(k, True, value, minsize, atom_list, frag_list)
    return out


# -- structural lemma checks -----------------------------------------------------


@dataclass(frozen=True)
class CheckRow:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    detail: str = ""


@dataclass(frozen=True)
class LemmaCheckReport:
    rows: tuple[CheckRow, ...]

    @property
    def ok(self) -> bool:
        return all(row.status != "fail" for row in self.rows)

    def row(self, name: str) -> CheckRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def _smallest_prime_divisor(n: int) -> int:
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


def check_atom_lemmas(
    s: GroupSubset, k: int, a: GroupSubset, *, budget: Optional[int] = None
) -> LemmaCheckReport:
    """Check every atom-structure lemma applicable to the verified atom A."""
    group = s.group
    atom_set = atoms(s, k, budget=budget)
    normalized = None
    members = {m.bits for m in atom_set.atoms}
    for x in a:
        shifted = a.translate(group.neg(x))
        if shifted.bits in members:
            normalized = shifted
            break
    if normalized is None:
        raise NotAnAtomError("A is not a k-atom of S")
    a = normalized
    value = atom_set.value
    ambient = subgroup_generated(group, s.to_indices())
    h_elems = tuple(ambient.carrier)
    n = len(ambient)
    rows = []

    # Lemma: removing one point of A (or of S) does not shrink A + S
    if len(a) > k:
        total = sumset(a, s)
        ok = all(sumset(a.without(x), s) == total for x in a) and all(
            sumset(a, s.without(x)) == total for x in s
        )
        rows.append(CheckRow("2surjk", "pass" if ok else "fail"))
    else:
        rows.append(CheckRow("2surjk", "skipped", "|A| == k"))

    # Duality: kappa_k(-S) = kappa_k(S); -A and H \ (A+S) are fragments of -S
    neg_s = s.negate()
    dual = kappa(neg_s, k, budget=budget)
    ok = dual.separable and dual.value == value
    if ok:
        for frag in (a.negate(), GroupSubset(group, ambient.carrier.bits & ~sumset(a, s).bits)):
            bnd = sumset(frag, neg_s)
            if not (len(frag) >= k and len(bnd) <= n - k and len(bnd) - len(frag) == value):
                ok = False
    rows.append(CheckRow("dual", "pass" if ok else "fail"))

    # Intersection property against the translated atom family
    ok = True
    for base in atom_set.atoms:
        for g in h_elems:
            frag = base.translate(g)
            if not a.is_subset_of(frag) and len(a & frag) > k - 1:
                ok = False
                break
        if not ok:
            break
    rows.append(CheckRow("intersection", "pass" if ok else "fail"))

    # 1-atoms containing 0 are the subgroup generated by S ∩ A
    if k == 1:
        gen = subgroup_generated(group, (s & a).to_indices())
        ok = gen.carrier == a and value % len(a) == 0
        rows.append(CheckRow("cay", "pass" if ok else "fail"))
    else:
        rows.append(CheckRow("cay", "skipped", "k != 1"))

    # k-atoms are subgroups or have small self-intersections (p >= k)
    p = _smallest_prime_divisor(n) if n > 1 else 2
    if p >= k:
        if is_subgroup_bits(group, a.bits):
            rows.append(CheckRow("cor2atom", "pass", "subgroup"))
        else:
            ok = all(
                len(a & a.translate(g)) <= k - 1 for g in h_elems if g != 0
            )
            rows.append(CheckRow("cor2atom", "pass" if ok else "fail"))
    else:
        rows.append(CheckRow("cor2atom", "skipped", "p < k"))

    # non-subgroup 2-atoms have |A| <= m + 3
    if k == 2 and len(s) >= 3 and not is_subgroup_bits(group, a.bits):
        m = value - len(s)
        rows.append(CheckRow("m+3", "pass" if len(a) <= m + 3 else "fail"))
    else:
        rows.append(CheckRow("m+3", "skipped"))

    # subgroup 2-atoms of size >= 3 force a small-order element of S
    if k == 2 and is_subgroup_bits(group, a.bits) and len(a) >= 3:
        ok = any(group.element_order(x) <= value for x in s if x != 0)
        rows.append(CheckRow("order", "pass" if ok else "fail"))
    else:
        rows.append(CheckRow("order", "skipped"))

    return LemmaCheckReport(tuple(rows))


def fainting_bound_check(
    x: GroupSubset, y: GroupSubset, *, budget: Optional[int] = None
) -> LemmaCheckReport:
    """Check the fainting bound |X| >= |G| - C(m+4, 2) when its hypotheses hold."""
    from .subsets import check_layer_descent, layer_sequence

    group = x.group
    if 0 not in x or 0 not in y:
        raise ValueError("fainting check requires 0 in X and 0 in Y")
    if len(subgroup_generated(group, y.to_indices())) != group.order:
        raise ValueError("fainting check requires Y to generate the group")
    m = len(sumset(x, y)) - len(x) - len(y)
    rows = []

    y_star = y.without(0)
    hyp_i = 3 <= len(y) <= m + 3
    if hyp_i:
        hyp_i = False
        for yy in y_star:
            shifted = y_star.translate(group.neg(yy))
            res = kappa(shifted, 1, budget=budget)
            if res.value == len(y_star) - 1 >= 1:
                hyp_i = True
                break
    rows.append(CheckRow("size_and_kappa1", "pass" if hyp_i else "fail", f"m={m}"))

    total = sumset(x, y)
    hyp_ii = all(sumset(x, y.without(z)) == total for z in y)
    if hyp_ii:
        seq = layer_sequence(x, y, max_i=2)
        hyp_ii = check_layer_descent(seq, 2)
    rows.append(CheckRow("surjective_and_descent", "pass" if hyp_ii else "fail"))

    if hyp_i and hyp_ii:
        ok = len(x) >= group.order - comb(m + 4, 2)
        rows.append(CheckRow("size_bound", "pass" if ok else "fail"))
    else:
        rows.append(CheckRow("size_bound", "skipped", "hypotheses not met"))
    return LemmaCheckReport(tuple(rows))
