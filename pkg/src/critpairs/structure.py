"""Structural classifiers: Sidon sets, progressions, quasi-progressions.

A quasi-progression of difference r is a set that is not itself a
progression with difference r but becomes one when a single deleted
interior term is reinserted; deleting an end term leaves a progression,
so the missing index of a certificate is always strictly interior.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .groups import Group
from .subsets import GroupSubset, SubsetError, iter_bits


@dataclass(frozen=True, order=True)
class ProgressionCertificate:
    """A replayable (start, difference, length) description of a set.

    For quasi-progressions, ``length`` is the length of the ambient
    progression and ``missing_index`` the interior position of the deleted
    term, so materializing always regenerates the certified set exactly.
    """

    difference: int
    start: int
    length: int
    missing_index: Optional[int] = None

    def materialize(self, group: Group) -> GroupSubset:
        bits = 0
        g = self.start
        for i in range(self.length):
            if i != self.missing_index:
                bits |= 1 << g
            g = group.add(g, self.difference)
        return GroupSubset(group, bits)

    def to_json(self) -> dict:
        return {
            "start": self.start,
            "difference": self.difference,
            "length": self.length,
            "missing_index": self.missing_index,
        }


def is_sidon(x: GroupSubset) -> bool:
    """True iff no two pairs of (not necessarily distinct) elements share a sum.

    Equivalent formulation: |X ∩ (X+g)| <= 1 for every g != 0.
    """
    group = x.group
    bits = x.bits
    tr = group.translate_bits
    for g in range(1, group.order):
        if (bits & tr(bits, g)).bit_count() > 1:
            return False
    return True


def _dlog_table(group: Group, d: int) -> dict[int, int]:
    """Map j*d -> j for j in range(order(d))."""
    table = {}
    acc = 0
    j = 0
    while True:
        table[acc] = j
        acc = group.add(acc, d)
        j += 1
        if acc == 0:
            return table


def find_progressions(x: GroupSubset) -> list[ProgressionCertificate]:
    """All (start, difference) pairs realizing X as an arithmetic progression.

    Reversals appear as separate certificates with difference -d.  A full
    coset of a cyclic subgroup is a progression from every one of its
    elements.  Empty when X is not a progression.
    """
    if len(x) < 2:
        raise SubsetError("progression detection requires |X| >= 2")
    group = x.group
    size = len(x)
    x0 = x.min_element()
    certs = []
    for d in range(1, group.order):
        od = group.element_order(d)
        if size > od:
            continue
        table = _dlog_table(group, d)
        js = []
        ok = True
        for g in iter_bits(x.bits):
            j = table.get(group.sub(g, x0))
            if j is None:
                ok = False
                break
            js.append(j)
        if not ok:
            continue
        if size == od:
            # full coset: every element starts a wrap-around progression
            for g in iter_bits(x.bits):
                certs.append(ProgressionCertificate(d, g, size))
            continue
        present = set(js)
        starts = [j for j in js if (j - 1) % od not in present]
        if len(starts) != 1:
            continue
        breaks = [j for j in js if (j + 1) % od not in present]
        if len(breaks) != 1:
            continue
        start = group.add(x0, group.scalar_mul(starts[0], d))
        certs.append(ProgressionCertificate(d, start, size))
    certs.sort()
    return certs


def is_progression(x: GroupSubset) -> bool:
    return len(x) >= 2 and bool(find_progressions(x))


def progression_differences(x: GroupSubset) -> set[int]:
    """Differences d for which X is a progression (empty set when it is not)."""
    if len(x) < 2:
        return set()
    return {c.difference for c in find_progressions(x)}


def find_quasi_progressions(x: GroupSubset) -> list[ProgressionCertificate]:
    """All quasi-progression certificates of X, per difference.

    For each g outside X whose insertion makes a progression of difference r
    with g strictly interior, and with X itself not a progression of
    difference r, one certificate is emitted.
    """
    if len(x) < 2:
        raise SubsetError("quasi-progression detection requires |X| >= 2")
    group = x.group
    ap_diffs = progression_differences(x)
    seen = set()
    certs = []
    for g in iter_bits(x.bits ^ group.full_mask):
        extended = x.with_element(g)
        for cert in find_progressions(extended):
            d = cert.difference
            if d in ap_diffs:
                continue
            table = _dlog_table(group, d)
            j = table[group.sub(g, cert.start)]
            if 0 < j < cert.length - 1:
                qc = ProgressionCertificate(d, cert.start, cert.length, j)
                if qc not in seen:
                    seen.add(qc)
                    certs.append(qc)
    certs.sort()
    return certs


def is_quasi_progression(x: GroupSubset) -> bool:
    return len(x) >= 2 and bool(find_quasi_progressions(x))


def quasi_progression_differences(x: GroupSubset) -> set[int]:
    if len(x) < 2:
        return set()
    return {c.difference for c in find_quasi_progressions(x)}


def weak_chowla(s: GroupSubset, threshold: int) -> bool:
    """True iff every nonzero element of S has order at least ``threshold``."""
    if 0 not in s:
        raise SubsetError("weak Chowla condition requires 0 in S")
    group = s.group
    return all(group.element_order(g) >= threshold for g in s if g != 0)


def connected_components(x: GroupSubset) -> list[GroupSubset]:
    """Maximal circular runs of consecutive elements (cyclic groups only)."""
    group = x.group
    if len(group.moduli) != 1:
        raise SubsetError("connected components require a cyclic group")
    n = group.order
    bits = x.bits
    if not bits:
        return []
    if bits == group.full_mask:
        return [x]
    shifted = group.translate_bits(bits, 1)
    starts = bits & ~shifted  # elements whose predecessor is absent
    comps = []
    for s in iter_bits(starts):
        comp = 0
        g = s
        while (bits >> g) & 1:
            comp |= 1 << g
            g = g + 1 if g + 1 < n else 0
        comps.append(GroupSubset(group, comp))
    return comps
