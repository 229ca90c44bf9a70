"""Exhaustive scan campaigns over small-group instance families.

A campaign names statements, a group family, and subset size ranges; the
scan enumerates canonical instances (translation, optionally composed with
group automorphisms), runs the statement verifiers on every instance whose
hypotheses can be met, and reports zero-counterexample summaries.

Canonicalization is sound because kappa values, separability, atoms and
generation are identical across the translates S - x (x in S) and covariant
under automorphisms; order conditions are not translation-invariant, so
statements with order hypotheses are re-verified on every 0-containing
translate of a canonical class.
"""

from __future__ import annotations

import itertools
import json
import os
import time
from dataclasses import dataclass, field
from math import gcd
from typing import Callable, Iterator, Optional, Sequence

from .groups import Group, make_group, parse_group, subgroup_generated
from .isoperimetry import DEFAULT_NODE_BUDGET, kappa_bounded
from .structure import is_sidon, weak_chowla
from .subsets import GroupSubset, iter_bits
from .verifiers import STATEMENTS, VerifierReport


# -- group families ------------------------------------------------------------


def _partitions(e: int) -> list[tuple[int, ...]]:
    if e == 0:
        return [()]
    out = []

    def rec(remaining: int, cap: int, acc: tuple[int, ...]) -> None:
        if remaining == 0:
            out.append(acc)
            return
        for part in range(min(cap, remaining), 0, -1):
            rec(remaining - part, part, acc + (part,))

    rec(e, e, ())
    return out


def _factorize(n: int) -> list[tuple[int, int]]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def abelian_groups_of_order(n: int) -> list[tuple[int, ...]]:
    """All abelian groups of order n, one invariant-factor presentation each."""
    if n == 1:
        return [()]
    factored = _factorize(n)
    per_prime = [
        [(p, part) for part in _partitions(e)] for p, e in factored
    ]
    groups = []
    for combo in itertools.product(*per_prime):
        depth = max(len(part) for _, part in combo)
        ds = []
        for j in range(depth):
            d = 1
            for p, part in combo:
                if j < len(part):
                    d *= p ** part[j]
            ds.append(d)
        groups.append(tuple(reversed(ds)))
    groups.sort()
    return groups


def abelian_groups_up_to(
    max_order: int,
    *,
    min_order: int = 2,
    gcd6_coprime: bool = False,
    cyclic_only: bool = False,
) -> list[tuple[int, ...]]:
    out = []
    for n in range(min_order, max_order + 1):
        if gcd6_coprime and gcd(n, 6) != 1:
            continue
        for moduli in abelian_groups_of_order(n):
            if cyclic_only and len(moduli) != 1:
                continue
            out.append(moduli)
    return out


# -- canonical subset enumeration --------------------------------------------------


def _is_translation_canonical(group: Group, bits: int) -> bool:
    tr = group.translate_bits
    neg = group.neg
    for x in iter_bits(bits):
        if x and tr(bits, neg(x)) < bits:
            return False
    return True


def _auto_canonical_part(group: Group, bits: int) -> bool:
    """Automorphism half of canonicity (bits already translation-canonical)."""
    tr = group.translate_bits
    neg = group.neg
    for table in group.automorphisms():
        img = 0
        for g in iter_bits(bits):
            img |= 1 << table[g]
        if img == bits:
            continue
        for x in iter_bits(img):
            if tr(img, neg(x)) < bits:
                return False
    return True


def _is_canonical(group: Group, bits: int, mode: str) -> bool:
    """True iff bits is minimal in its translation (and automorphism) orbit."""
    if not _is_translation_canonical(group, bits):
        return False
    if mode == "translation":
        return True
    return _auto_canonical_part(group, bits)


def _canonical_form(group: Group, bits: int, mode: str) -> int:
    tr = group.translate_bits
    neg = group.neg
    best = min(tr(bits, neg(x)) for x in iter_bits(bits))
    if mode == "translation":
        return best
    for table in group.automorphisms():
        img = 0
        for g in iter_bits(bits):
            img |= 1 << table[g]
        cand = min(tr(img, neg(x)) for x in iter_bits(img))
        if cand < best:
            best = cand
    return best


def canonical_subsets(group: Group, size: int, mode: str) -> Iterator[GroupSubset]:
    """Canonical representatives S with 0 in S and |S| = size."""
    n = group.order
    if size < 1 or size > n:
        return
    if size == 1:
        yield GroupSubset(group, 1)
        return
    cyclic = len(group.moduli) == 1
    auto = mode != "translation"
    for combo in itertools.combinations(range(1, n), size - 1):
        bits = 1
        for g in combo:
            bits |= 1 << g
        if cyclic:
            # the minimal rotation is the one whose trailing circular gap is
            # largest; only gap ties need a full bitset comparison
            wrap = n - combo[-1]
            prev = 0
            widest = 0
            for c in combo:
                gap = c - prev
                if gap > widest:
                    widest = gap
                prev = c
            if widest > wrap:
                continue
            if widest == wrap and not _is_translation_canonical(group, bits):
                continue
            if auto and not _auto_canonical_part(group, bits):
                continue
        elif not _is_canonical(group, bits, mode):
            continue
        yield GroupSubset(group, bits)


def distinct_zero_translates(s: GroupSubset) -> list[GroupSubset]:
    """The distinct translates S - x (x in S), each containing 0."""
    group = s.group
    seen = set()
    out = []
    for x in s:
        t = s.translate(group.neg(x))
        if t.bits not in seen:
            seen.add(t.bits)
            out.append(t)
    return out


# -- campaign model ------------------------------------------------------------


@dataclass
class ScanCampaign:
    """Family description for run_scan; unset sizes fall back to statement plans."""

    statements: tuple[str, ...]
    groups: tuple[tuple[int, ...], ...] = ()
    smin: Optional[int] = None
    smax: Optional[int] = None
    tmin: Optional[int] = None
    tmax: Optional[int] = None
    canonicalize: str = "translation+automorphism"
    budget: int = DEFAULT_NODE_BUDGET
    jobs: int = 1
    shard: Optional[tuple[int, int]] = None
    checkpoint: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "statements": list(self.statements),
            "groups": [list(g) for g in self.groups],
            "smin": self.smin,
            "smax": self.smax,
            "tmin": self.tmin,
            "tmax": self.tmax,
            "canonicalize": self.canonicalize,
            "budget": self.budget,
            "jobs": self.jobs,
            "shard": list(self.shard) if self.shard else None,
        }


def parse_campaign(path: str) -> ScanCampaign:
    """Parse a key = value campaign file (comma lists, '#' comments)."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad campaign line: {raw.rstrip()}")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()

    def _int(key: str) -> Optional[int]:
        return int(values[key]) if key in values else None

    statements = tuple(
        part.strip() for part in values.get("statements", "").split(",") if part.strip()
    )
    for stmt in statements:
        if stmt not in STATEMENTS:
            raise ValueError(f"unknown statement id {stmt!r}")
    groups: list[tuple[int, ...]] = []
    if "groups" in values:
        for part in values["groups"].split(","):
            part = part.strip()
            if part:
                groups.append(parse_group(part).moduli)
    if "order_max" in values:
        groups.extend(
            abelian_groups_up_to(
                int(values["order_max"]),
                min_order=int(values.get("order_min", "2")),
                gcd6_coprime=values.get("gcd6_coprime", "false").lower() == "true",
                cyclic_only=values.get("cyclic_only", "false").lower() == "true",
            )
        )
    shard = None
    if "shard" in values:
        i, n = values["shard"].split("/")
        shard = (int(i), int(n))
    return ScanCampaign(
        statements=statements,
        groups=tuple(dict.fromkeys(groups)),
        smin=_int("smin"),
        smax=_int("smax"),
        tmin=_int("tmin"),
        tmax=_int("tmax"),
        canonicalize=values.get("canonicalize", "translation+automorphism"),
        budget=_int("budget") or DEFAULT_NODE_BUDGET,
        jobs=_int("jobs") or 1,
        shard=shard,
        checkpoint=values.get("checkpoint"),
    )


# -- statement scan plans ----------------------------------------------------------


@dataclass(frozen=True)
class ScanPlan:
    statement: str
    default_groups: tuple[tuple[int, ...], ...]
    s_sizes: tuple[int, Optional[int]]
    t_sizes: tuple[int, Optional[int]] = (1, None)
    # class-level filter, sound under translation (see module docstring)
    class_prefilter: Optional[Callable[[GroupSubset, int], bool]] = None
    # pair statements: monotone boundary cap and per-node hit test
    pair_cap: Optional[Callable[[GroupSubset, int], int]] = None
    pair_hit: Optional[Callable[[int, int, int, int], bool]] = None


def _generating(s: GroupSubset) -> bool:
    return len(subgroup_generated(s.group, s.to_indices())) == s.group.order


def _any_translate_orders(s: GroupSubset, threshold: int) -> bool:
    return any(weak_chowla(t, threshold) for t in distinct_zero_translates(s))


def _pf_chowla(s: GroupSubset, budget: int) -> bool:
    return _generating(s) and _any_translate_orders(s, len(s) - 1)


def _pf_kempermannis(s: GroupSubset, budget: int) -> bool:
    if not _generating(s) or not _any_translate_orders(s, len(s)):
        return False
    return kappa_bounded(s, 2, len(s) - 1, budget=budget) is not None


def _pf_cholaatom(s: GroupSubset, budget: int) -> bool:
    if len(s) < 3 or not _generating(s):
        return False
    kb = kappa_bounded(s, 2, len(s) + 4, budget=budget)
    if kb is None or kb.m < -1:
        return False
    return _any_translate_orders(s, len(s) + kb.m + 1)


def _pf_kempermannis1(s: GroupSubset, budget: int) -> bool:
    group = s.group
    if not (4 <= len(s) <= group.order - 7) or gcd(group.order, 6) != 1:
        return False
    if not _generating(s) or not _any_translate_orders(s, len(s) + 1):
        return False
    kb = kappa_bounded(s, 3, len(s), budget=budget)
    return kb is not None and kb.value == len(s)


def _pf_kemperman1(s: GroupSubset, budget: int) -> bool:
    group = s.group
    if len(s) < 4 or gcd(group.order, 6) != 1:
        return False
    return _generating(s) and _any_translate_orders(s, len(s) + 1)


def _pf_transfer(s: GroupSubset, budget: int) -> bool:
    from .structure import quasi_progression_differences

    return len(s) >= 3 and _generating(s) and bool(quasi_progression_differences(s))


_PRIMES_13 = ((2,), (3,), (5,), (7,), (11,), (13,))
_GCD6_FAMILY = ((25,), (5, 5), (35,), (49,), (7, 7))
_SMALL_CYCLIC_GCD6 = tuple((n,) for n in (5, 7, 11, 13, 17, 19, 23, 25, 29))

SCAN_PLANS: dict[str, ScanPlan] = {
    plan.statement: plan
    for plan in [
        ScanPlan(
            "thm:cauchy-davenport",
            _PRIMES_13,
            (1, None),
            (1, None),
        ),
        ScanPlan(
            "cor:chowla",
            tuple(abelian_groups_up_to(20)),
            (2, None),
            class_prefilter=_pf_chowla,
        ),
        ScanPlan(
            "thm:kemperman",
            ((11,), (13,)),
            (2, None),
            (2, None),
            pair_cap=lambda s, tmax: _smallest_prime(s.group.order) - 2,
            pair_hit=lambda ssize, tsize, b, n: tsize >= 2 and b == ssize + tsize - 1,
        ),
        ScanPlan(
            "thm:hr",
            ((13,),),
            (4, None),
            (3, None),
            pair_cap=lambda s, tmax: s.group.order - 4,
            pair_hit=lambda ssize, tsize, b, n: tsize >= 3 and b == ssize + tsize,
        ),
        ScanPlan(
            "thm:kempermannis",
            tuple(abelian_groups_up_to(16)),
            (2, None),
            class_prefilter=_pf_kempermannis,
        ),
        ScanPlan(
            "prop:fragments",
            tuple(abelian_groups_up_to(12)),
            (2, 6),
            (1, 6),
            pair_cap=lambda s, tmax: s.group.order - 1,
            pair_hit=lambda ssize, tsize, b, n: b <= ssize + tsize - 1 < n - 1,
        ),
        ScanPlan(
            "cor:kemperman+0",
            ((25,), (35,)),
            (2, 5),
            (1, 5),
            pair_cap=lambda s, tmax: s.group.order,
            pair_hit=lambda ssize, tsize, b, n: b <= ssize + tsize - 1,
        ),
        ScanPlan(
            "thm:main",
            tuple(abelian_groups_up_to(21)),
            (3, None),
        ),
        ScanPlan(
            "cor:cholaatom",
            tuple(abelian_groups_up_to(21)),
            (3, None),
            class_prefilter=_pf_cholaatom,
        ),
        ScanPlan(
            "lem:sidon",
            tuple(abelian_groups_up_to(24)),
            (3, None),
        ),
        ScanPlan(
            "lem:4at",
            tuple(dict.fromkeys(_SMALL_CYCLIC_GCD6 + _GCD6_FAMILY)),
            (3, 3),
        ),
        ScanPlan(
            "lem:a3",
            _GCD6_FAMILY,
            (4, 4),
        ),
        ScanPlan(
            "lem:transfer",
            tuple((n,) for n in range(7, 17)),
            (3, None),
            (3, None),
            class_prefilter=_pf_transfer,
            pair_cap=lambda s, tmax: s.group.order - 4,
            pair_hit=lambda ssize, tsize, b, n: tsize >= 3
            and b <= ssize + tsize <= n - 4,
        ),
        ScanPlan(
            "lem:nz",
            ((),),
            (3, 3),
        ),
        ScanPlan(
            "lem:t3",
            tuple(dict.fromkeys(_SMALL_CYCLIC_GCD6 + _GCD6_FAMILY)),
            (3, 3),
        ),
        ScanPlan(
            "thm:kempermannis+1",
            _GCD6_FAMILY,
            (4, 5),
            class_prefilter=_pf_kempermannis1,
        ),
        ScanPlan(
            "thm:kemperman+1",
            _GCD6_FAMILY,
            (4, 4),
            (3, 4),
            class_prefilter=_pf_kemperman1,
            pair_cap=lambda s, tmax: s.group.order - 4,
            pair_hit=lambda ssize, tsize, b, n: tsize >= 3 and b == ssize + tsize,
        ),
    ]
}


def _smallest_prime(n: int) -> int:
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


# -- summary -------------------------------------------------------------------


_COUNT_KEYS = (
    "classes",
    "instances",
    "met",
    "passed",
    "failed",
    "skipped",
    "out_of_statement",
)


def _zero_counts() -> dict[str, int]:
    return {key: 0 for key in _COUNT_KEYS}


@dataclass
class ScanSummary:
    campaign: dict
    per_statement: dict[str, dict[str, int]] = field(default_factory=dict)
    counterexamples: list[dict] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def counterexample_count(self) -> int:
        return len(self.counterexamples)

    def totals(self) -> dict[str, int]:
        total = _zero_counts()
        for counts in self.per_statement.values():
            for key in _COUNT_KEYS:
                total[key] += counts[key]
        return total

    def to_json(self) -> dict:
        return {
            "schema": "critpairs.summary/1",
            "campaign": self.campaign,
            "per_statement": self.per_statement,
            "totals": self.totals(),
            "counterexamples": self.counterexamples,
        }


# -- scan drivers ---------------------------------------------------------------


class _Tally:
    def __init__(self, statement: str, emit: Optional[Callable[[dict], None]]):
        self.statement = statement
        self.counts = _zero_counts()
        self.counterexamples: list[dict] = []
        self.emit = emit

    def record(self, report: VerifierReport) -> None:
        self.counts["instances"] += 1
        if report.conclusion == "skipped":
            self.counts["skipped"] += 1
            return
        self.counts["met"] += 1
        if report.conclusion == "pass":
            self.counts["passed"] += 1
        elif report.conclusion == "out_of_statement":
            self.counts["out_of_statement"] += 1
        else:
            self.counts["failed"] += 1
            self.counterexamples.append(report.to_json())
        if self.emit is not None:
            self.emit(report.to_json())


def _size_range(
    plan_sizes: tuple[int, Optional[int]],
    override_min: Optional[int],
    override_max: Optional[int],
    order: int,
) -> range:
    lo = override_min if override_min is not None else plan_sizes[0]
    hi = override_max if override_max is not None else (plan_sizes[1] or order)
    hi = min(hi, order)
    return range(lo, hi + 1)


def _scan_single_unit(
    statement: str,
    group: Group,
    campaign: ScanCampaign,
    tally: _Tally,
) -> None:
    spec = STATEMENTS[statement]
    plan = SCAN_PLANS[statement]
    sizes = _size_range(plan.s_sizes, campaign.smin, campaign.smax, group.order)
    shard = campaign.shard
    index = -1
    for size in sizes:
        if statement == "lem:sidon":
            iterator = _sidon_canonical(group, size, campaign.canonicalize)
        else:
            iterator = canonical_subsets(group, size, campaign.canonicalize)
        for s in iterator:
            index += 1
            if shard is not None and index % shard[1] != shard[0]:
                continue
            tally.counts["classes"] += 1
            if plan.class_prefilter is not None and not plan.class_prefilter(
                s, campaign.budget
            ):
                tally.counts["instances"] += 1
                tally.counts["skipped"] += 1
                continue
            if spec.translate_sensitive:
                for tx in distinct_zero_translates(s):
                    tally.record(spec.verify(tx, budget=campaign.budget))
            else:
                tally.record(spec.verify(s, budget=campaign.budget))


def _sidon_canonical(group: Group, size: int, mode: str) -> Iterator[GroupSubset]:
    """Canonical Sidon sets containing 0, grown with hereditary pruning."""
    n = group.order
    tr = group.translate_bits

    def extend(bits: int, largest: int, count: int) -> Iterator[int]:
        if count == size:
            yield bits
            return
        for g in range(largest + 1, n - (size - count) + 1):
            cand = bits | (1 << g)
            ok = True
            for d in range(1, n):
                if (cand & tr(cand, d)).bit_count() > 1:
                    ok = False
                    break
            if ok:
                yield from extend(cand, g, count + 1)

    for bits in extend(1, 0, 1):
        if _is_canonical(group, bits, mode):
            yield GroupSubset(group, bits)


def _scan_cauchy_davenport(
    group: Group,
    campaign: ScanCampaign,
    tally: _Tally,
) -> None:
    """Inline exhaustive CD check; failures re-verified for the full payload."""
    from .verifiers import verify_cauchy_davenport

    p = group.order
    tr = group.translate_bits
    shard = campaign.shard
    plan = SCAN_PLANS["thm:cauchy-davenport"]
    sizes = _size_range(plan.s_sizes, campaign.smin, campaign.smax, p)
    index = -1
    for size in sizes:
        for s in canonical_subsets(group, size, "translation"):
            index += 1
            if shard is not None and index % shard[1] != shard[0]:
                continue
            tally.counts["classes"] += 1
            shift = [tr(s.bits, g) for g in range(p)]
            ssize = size
            fails: list[int] = []
            checked = 0

            def rec(last: int, tbits: int, tsize: int, bnd: int) -> None:
                nonlocal checked
                for g in range(last + 1, p):
                    nb = bnd | shift[g]
                    b = nb.bit_count()
                    ts = tsize + 1
                    checked += 1
                    if b < p and b < ssize + ts - 1:
                        fails.append(tbits | (1 << g))
                    if b < p:
                        rec(g, tbits | (1 << g), ts, nb)

            checked += 1  # T = {0}
            if len(s) < min(p, ssize):
                fails.append(1)
            rec(0, 1, 1, s.bits)
            tally.counts["instances"] += checked
            tally.counts["met"] += checked
            tally.counts["passed"] += checked - len(fails)
            for tbits in fails:
                report = verify_cauchy_davenport(s, GroupSubset(group, tbits))
                tally.counts["failed"] += 1
                tally.counterexamples.append(report.to_json())
                if tally.emit is not None:
                    tally.emit(report.to_json())


def _scan_pair_unit(
    statement: str,
    group: Group,
    campaign: ScanCampaign,
    tally: _Tally,
) -> None:
    spec = STATEMENTS[statement]
    plan = SCAN_PLANS[statement]
    n = group.order
    tr = group.translate_bits
    shard = campaign.shard
    s_sizes = _size_range(plan.s_sizes, campaign.smin, campaign.smax, n)
    t_lo, t_hi = plan.t_sizes
    t_lo = campaign.tmin if campaign.tmin is not None else t_lo
    t_hi = min(campaign.tmax if campaign.tmax is not None else (t_hi or n), n)
    index = -1
    for size in s_sizes:
        for s in canonical_subsets(group, size, campaign.canonicalize):
            index += 1
            if shard is not None and index % shard[1] != shard[0]:
                continue
            tally.counts["classes"] += 1
            if plan.class_prefilter is not None and not plan.class_prefilter(
                s, campaign.budget
            ):
                continue
            translates = (
                distinct_zero_translates(s) if spec.translate_sensitive else [s]
            )
            cap = plan.pair_cap(s, t_hi)
            cap = min(cap, n)
            hit = plan.pair_hit
            ssize = size
            shift = [tr(s.bits, g) for g in range(n)]
            hits: list[int] = []

            def rec(last: int, tbits: int, tsize: int, bnd: int, b: int) -> None:
                if tsize >= t_hi:
                    return
                for g in range(last + 1, n):
                    nb = bnd | shift[g]
                    nbc = nb.bit_count()
                    if nbc > cap:
                        continue
                    ts = tsize + 1
                    ntb = tbits | (1 << g)
                    if ts >= t_lo and hit(ssize, ts, nbc, n):
                        hits.append(ntb)
                    rec(g, ntb, ts, nb, nbc)

            b0 = len(s)
            if b0 <= cap:
                if 1 >= t_lo and hit(ssize, 1, b0, n):
                    hits.append(1)
                rec(0, 1, 1, s.bits, b0)
            for tbits in hits:
                t = GroupSubset(group, tbits)
                for tx in translates:
                    tally.record(spec.verify(tx, t, budget=campaign.budget))


def _scan_nz_unit(campaign: ScanCampaign, tally: _Tally) -> None:
    from .verifiers import verify_lemma_nz

    shard = campaign.shard
    index = -1
    for s_rest in itertools.combinations(range(1, 9), 2):
        for t_rest in itertools.combinations(range(1, 11), 3):
            index += 1
            if shard is not None and index % shard[1] != shard[0]:
                continue
            tally.counts["classes"] += 1
            tally.record(verify_lemma_nz((0,) + s_rest, (0,) + t_rest))


def scan_unit(statement: str, moduli: tuple[int, ...], campaign: ScanCampaign,
              emit: Optional[Callable[[dict], None]] = None) -> tuple[dict, list[dict]]:
    """Scan one (statement, group) unit; returns (counts, counterexamples)."""
    tally = _Tally(statement, emit)
    if statement == "lem:nz":
        _scan_nz_unit(campaign, tally)
        return tally.counts, tally.counterexamples
    group = make_group(moduli) if moduli else None
    plan = SCAN_PLANS[statement]
    if statement == "thm:cauchy-davenport":
        _scan_cauchy_davenport(group, campaign, tally)
    elif plan.pair_hit is not None:
        _scan_pair_unit(statement, group, campaign, tally)
    else:
        _scan_single_unit(statement, group, campaign, tally)
    return tally.counts, tally.counterexamples


def _unit_list(campaign: ScanCampaign) -> list[tuple[str, tuple[int, ...]]]:
    units = []
    for statement in campaign.statements:
        if statement not in SCAN_PLANS:
            raise ValueError(f"statement {statement!r} is not scannable")
        groups = campaign.groups or SCAN_PLANS[statement].default_groups
        if statement == "lem:nz":
            units.append((statement, ()))
            continue
        for moduli in groups:
            units.append((statement, tuple(moduli)))
    return units


def _worker(args: tuple) -> tuple[int, dict, list[dict], list[dict]]:
    unit_index, statement, moduli, campaign_json = args
    campaign = _campaign_from_json(campaign_json)
    reports: list[dict] = []
    counts, ces = scan_unit(statement, moduli, campaign, emit=reports.append)
    return unit_index, counts, ces, reports


def _campaign_to_json(campaign: ScanCampaign) -> dict:
    doc = campaign.to_json()
    doc["checkpoint"] = campaign.checkpoint
    return doc


def _campaign_from_json(doc: dict) -> ScanCampaign:
    return ScanCampaign(
        statements=tuple(doc["statements"]),
        groups=tuple(tuple(g) for g in doc["groups"]),
        smin=doc["smin"],
        smax=doc["smax"],
        tmin=doc["tmin"],
        tmax=doc["tmax"],
        canonicalize=doc["canonicalize"],
        budget=doc["budget"],
        jobs=doc["jobs"],
        shard=tuple(doc["shard"]) if doc["shard"] else None,
        checkpoint=doc.get("checkpoint"),
    )


def run_scan(
    campaign: ScanCampaign,
    *,
    sink: Optional[Callable[[dict], None]] = None,
) -> ScanSummary:
    """Run every unit of the campaign; deterministic under sharding and jobs."""
    start = time.perf_counter()
    units = _unit_list(campaign)
    summary = ScanSummary(campaign=_campaign_to_json(campaign))
    for statement in campaign.statements:
        summary.per_statement[statement] = _zero_counts()

    done: dict[str, dict] = {}
    ck_path = campaign.checkpoint
    if ck_path and os.path.exists(ck_path):
        with open(ck_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entry = json.loads(line)
                    done[entry["unit"]] = entry

    def unit_key(statement: str, moduli: tuple[int, ...]) -> str:
        return f"{statement}|{','.join(map(str, moduli))}"

    pending = [
        (i, stmt, moduli)
        for i, (stmt, moduli) in enumerate(units)
        if unit_key(stmt, moduli) not in done
    ]

    results: dict[int, tuple[dict, list[dict], list[dict]]] = {}
    if campaign.jobs > 1 and len(pending) > 1:
        import multiprocessing

        args = [
            (i, stmt, moduli, _campaign_to_json(campaign)) for i, stmt, moduli in pending
        ]
        with multiprocessing.Pool(campaign.jobs) as pool:
            for idx, counts, ces, reports in pool.imap_unordered(_worker, args):
                results[idx] = (counts, ces, reports)
    else:
        for i, stmt, moduli in pending:
            reports: list[dict] = []
            counts, ces = scan_unit(stmt, moduli, campaign, emit=reports.append)
            results[i] = (counts, ces, reports)

    ck_fh = open(ck_path, "a", encoding="utf-8") if ck_path else None
    try:
        for i, (stmt, moduli) in enumerate(units):
            key = unit_key(stmt, moduli)
            if key in done:
                entry = done[key]
                counts, ces, reports = entry["counts"], entry["counterexamples"], entry["reports"]
            else:
                counts, ces, reports = results[i]
                if ck_fh is not None:
                    ck_fh.write(
                        json.dumps(
                            {
                                "unit": key,
                                "counts": counts,
                                "counterexamples": ces,
                                "reports": reports,
                            },
                            sort_keys=True,
                        )
                        + "\n"
                    )
                    ck_fh.flush()
            stats = summary.per_statement[stmt]
            for ck in _COUNT_KEYS:
                stats[ck] += counts[ck]
            summary.counterexamples.extend(ces)
            if sink is not None:
                for rep in reports:
                    sink(rep)
    finally:
        if ck_fh is not None:
            ck_fh.close()
    summary.elapsed = time.perf_counter() - start
    return summary
