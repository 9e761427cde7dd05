"""Finite-sums machinery: IP sequences, certified IP-limits, Hindman search.

FS((n_i)_{i>=k}) is the set of sums over nonempty finite sets of distinct
indices >= k.  The generators here are difference-periodic: finitely many
explicit head terms, then differences repeating from a cycle.  That class
is closed under the constructions below and keeps every membership
question decidable by residue arithmetic (see :mod:`epshift.filters`).

The centerpiece is :func:`ip_sequence_construct`, which builds, for a
verified pair (x, y) with y uniformly recurrent and proximal to x, a
nested chain of cylinders U_0 ⊇ U_1 ⊇ … around y together with generator
terms n_i satisfying T^{n_i} U_{i+1} ⊆ U_i and T^{n_i} x, T^{n_i} y ∈
U_{i+1}, with U_i inside the 2^-i ball at y.  Those conditions force
every finite sum s with least index i₁ to satisfy d(T^s x, y) <= 2^-i₁,
and they are re-verified from scratch on the emitted certificate rather
than trusted from the construction.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

from .epcore import ConstructionError, EpSet, InputError, LiteralError
from .dynamics import (
    Cylinder,
    SymbolicPoint,
    ae_solve,
    distance_exponent,
    encode_point,
    require_aet_pair,
    shift,
)

__all__ = [
    "FsSearchResult",
    "IpConstructionCertificate",
    "IpGenerator",
    "IpLimitVerdict",
    "PartitionError",
    "PipelineResult",
    "aet_to_iht_pipeline",
    "fs_enumerate",
    "hindman_search",
    "iht_search",
    "ip_limit_check",
    "ip_sequence_construct",
    "validate_partition",
    "verify_ip_certificate",
    "verify_iht_witness",
]

_GENERATOR = re.compile(r"^(\d+(?:,\d+)*)\+\((\d+(?:,\d+)*)\)$")


class PartitionError(InputError):
    """Color classes offered as a partition fail to cover some position exactly once."""


@dataclass(frozen=True)
class IpGenerator:
    """A strictly increasing sequence with eventually periodic differences.

    ``head`` lists the explicit terms n_0 .. n_{L-1}; afterwards
    n_{i+1} = n_i + tail_diffs[(i - L + 1) mod len(tail_diffs)], i.e. the
    first continuation step past the head uses tail_diffs[0].
    """

    head: tuple[int, ...]
    tail_diffs: tuple[int, ...]

    def __post_init__(self) -> None:
        head = tuple(int(n) for n in self.head)
        diffs = tuple(int(d) for d in self.tail_diffs)
        if not head:
            raise InputError("generator needs at least one explicit term")
        if head[0] < 1:
            raise InputError("generator terms start at 1")
        if any(b <= a for a, b in zip(head, head[1:])):
            raise InputError("generator head must be strictly increasing")
        if not diffs or any(d < 1 for d in diffs):
            raise InputError("tail differences must be positive")
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "tail_diffs", diffs)

    @classmethod
    def parse(cls, text: str) -> "IpGenerator":
        m = _GENERATOR.match(text)
        if not m:
            raise LiteralError(
                f"bad generator literal {text!r}: expected h0,h1,...+(d0,d1,...)"
            )
        head = tuple(int(t) for t in m.group(1).split(","))
        diffs = tuple(int(t) for t in m.group(2).split(","))
        return cls(head, diffs)

    @property
    def literal(self) -> str:
        return (
            ",".join(str(n) for n in self.head)
            + "+("
            + ",".join(str(d) for d in self.tail_diffs)
            + ")"
        )

    def __str__(self) -> str:
        return self.literal

    def term(self, i: int) -> int:
        if i < 0:
            raise InputError("generator indices are naturals")
        if i < len(self.head):
            return self.head[i]
        k = i - len(self.head) + 1
        q, r = divmod(k, len(self.tail_diffs))
        return self.head[-1] + q * sum(self.tail_diffs) + sum(self.tail_diffs[:r])

    def terms(self, count: int, from_index: int = 0) -> list[int]:
        return [self.term(from_index + i) for i in range(count)]

    def residue_structure(self, p: int) -> tuple[int, tuple[int, ...]]:
        """Phase and cycle of the residue sequence (n_i mod p).

        Returns (start, residues) with n_{start+j} ≡ residues[j mod len]
        (mod p) for all j >= 0.  The walk state (position in the diff
        cycle, current residue) is finite, so the sequence must cycle
        within p·|tail_diffs| steps past the head.
        """
        if p < 1:
            raise InputError("modulus must be positive")
        diffs = self.tail_diffs
        idx = len(self.head) - 1
        state = (0, self.head[-1] % p)
        seen: dict[tuple[int, int], int] = {}
        hist: list[int] = []
        while state not in seen:
            seen[state] = idx
            hist.append(state[1])
            j, r = state
            state = ((j + 1) % len(diffs), (r + diffs[j]) % p)
            idx += 1
        start = seen[state]
        offset = start - (len(self.head) - 1)
        return start, tuple(hist[offset:])


def fs_enumerate(g: IpGenerator, from_index: int, max_terms: int, bound: int) -> list[int]:
    """All finite sums of 1..max_terms distinct-index terms of the tail
    (n_i)_{i>=from_index} that stay <= bound; sorted and deduplicated."""
    if max_terms < 1 or bound < 1:
        raise InputError("need max_terms >= 1 and bound >= 1")
    if from_index < 0:
        raise InputError("generator indices are naturals")
    sums: set[int] = set()

    def walk(i: int, acc: int, used: int) -> None:
        while True:
            t = g.term(i)
            if acc + t > bound:
                return  # terms increase, so no later index fits either
            s = acc + t
            sums.add(s)
            if used + 1 < max_terms:
                walk(i + 1, s, used + 1)
            i += 1

    walk(from_index, 0, 0)
    return sorted(sums)


# -- the certified construction ---------------------------------------------


@dataclass(frozen=True)
class IpConstructionCertificate:
    generator: IpGenerator
    neighborhoods: tuple[Cylinder, ...]
    target: SymbolicPoint
    source: SymbolicPoint


def verify_ip_certificate(cert: IpConstructionCertificate) -> list[str]:
    """Re-check every certificate condition from scratch; list the failures.

    Checks, with L head terms and neighborhoods U_0..U_L: the chain
    U_{i+1} ⊆ U_i, the shift containment T^{n_i} U_{i+1} ⊆ U_i, the orbit
    memberships T^{n_i} x ∈ U_{i+1} and T^{n_i} y ∈ U_{i+1}, and the ball
    bound U_i ⊆ B(y, 2^-i).
    """
    x, y = cert.source, cert.target
    us = cert.neighborhoods
    terms = cert.generator.head
    failures: list[str] = []
    if len(us) != len(terms) + 1:
        failures.append(
            f"expected {len(terms) + 1} neighborhoods for {len(terms)} terms, got {len(us)}"
        )
        return failures
    for i, n in enumerate(terms):
        if not us[i + 1].subset_of(us[i]):
            failures.append(f"U_{i + 1} is not contained in U_{i}")
        if not us[i + 1].shift_image_subset(n, us[i]):
            failures.append(f"T^{n} U_{i + 1} is not contained in U_{i}")
        if not us[i + 1].contains(shift(x, n)):
            failures.append(f"T^{n} x misses U_{i + 1}")
        if not us[i + 1].contains(shift(y, n)):
            failures.append(f"T^{n} y misses U_{i + 1}")
    for i, u in enumerate(us):
        if not u.within_ball(y, i):
            failures.append(f"U_{i} is not inside the 2^-{i} ball at y")
    return failures


def ip_sequence_construct(
    x: SymbolicPoint, y: SymbolicPoint, count: int = 8
) -> IpConstructionCertificate:
    """Build a certified IP sequence witnessing iplim T^n x = y.

    Requires (x, y) to verify as a solution pair (y uniformly recurrent,
    x proximal to y).  Terms are the least multiples of y's period past
    the preperiod join, which makes every condition hold structurally;
    the emitted certificate is still re-verified from scratch and a
    failure raises, since a verifier bug elsewhere must not go quiet.
    """
    if count < 1:
        raise InputError("need at least one generator term")
    require_aet_pair(x, y)
    period = y.lcm_period
    join = max(x.max_preperiod, y.max_preperiod)
    q0 = max(1, -(-join // period))
    terms = tuple(period * (q0 + i) for i in range(count))

    cyls = [Cylinder(y, 0, 0)]
    cdepth = pdepth = 0
    for i, n in enumerate(terms):
        cdepth = min(i + 1, y.coord_count)
        pdepth = max(i + 1, pdepth + n)
        cyls.append(Cylinder(y, cdepth, pdepth))

    cert = IpConstructionCertificate(
        generator=IpGenerator(terms, (period,)),
        neighborhoods=tuple(cyls),
        target=y,
        source=x,
    )
    failures = verify_ip_certificate(cert)
    if failures:
        raise ConstructionError(
            "constructed certificate failed its own audit: " + "; ".join(failures)
        )
    return cert


# -- bounded IP-limit checking ----------------------------------------------


@dataclass(frozen=True)
class IpLimitVerdict:
    """Outcome of a bounded IP-limit check.

    ``kind`` is always "bounded": this is a semidecision over finitely
    many sums, not the genuine limit statement.  ``offset`` is the first
    tail offset whose sampled sums all land within the resolution;
    ``counterexamples`` lists (offset, sum, exponent) refutations, one
    per tested offset, when no offset works.
    """

    passed: bool
    limit: SymbolicPoint
    offset: int | None = None
    counterexamples: tuple[tuple[int, int, int], ...] = ()
    kind: str = "bounded"


def ip_limit_check(
    x: SymbolicPoint,
    g: IpGenerator,
    resolution: int,
    sum_terms: int = 3,
    witness_count: int = 6,
) -> IpLimitVerdict:
    """Test whether iplim T^n x along FS-tails of g looks like ae_solve(x).

    For each tail offset m <= witness_count, every sum of 1..sum_terms
    terms from indices m..m+witness_count-1 must satisfy
    distance_exponent(shift(x, s), y) >= resolution.
    """
    if resolution < 0:
        raise InputError("resolution must be a natural number")
    if sum_terms < 1 or witness_count < 1:
        raise InputError("need sum_terms >= 1 and witness_count >= 1")
    y = ae_solve(x)
    refutations: list[tuple[int, int, int]] = []
    for m in range(witness_count + 1):
        tail = g.terms(witness_count, from_index=m)
        bad = None
        for size in range(1, min(sum_terms, len(tail)) + 1):
            for combo in combinations(tail, size):
                s = sum(combo)
                e = distance_exponent(shift(x, s), y)
                if e < resolution:
                    bad = (m, s, int(e))
                    break
            if bad:
                break
        if bad is None:
            return IpLimitVerdict(passed=True, limit=y, offset=m)
        refutations.append(bad)
    return IpLimitVerdict(passed=False, limit=y, counterexamples=tuple(refutations))


# -- colorings ---------------------------------------------------------------


def validate_partition(classes) -> tuple[EpSet, ...]:
    """Check that the classes partition the naturals; return them as a tuple.

    One preperiod-join-plus-lcm window decides the quantifier: past it
    every class repeats.
    """
    classes = tuple(classes)
    if not classes:
        raise PartitionError("a coloring needs at least one class")
    horizon = max(len(c.pre) for c in classes) + math.lcm(*(len(c.per) for c in classes))
    for n in range(horizon):
        hits = sum(1 for c in classes if c.member(n))
        if hits != 1:
            raise PartitionError(f"position {n} belongs to {hits} classes")
    return classes


def color_of(classes: tuple[EpSet, ...], n: int) -> int:
    for i, c in enumerate(classes):
        if c.member(n):
            return i
    raise PartitionError(f"position {n} belongs to 0 classes")


@dataclass(frozen=True)
class FsSearchResult:
    """Outcome of a Hindman-style search: the least witness, or exhaustion."""

    found: bool
    bound: int
    witness: tuple[int, ...] | None = None
    colors: tuple[int, ...] | None = None
    sums: tuple[int, ...] | None = None


def _color_table(classes: tuple[EpSet, ...], bound: int) -> list[int]:
    table = []
    for n in range(bound + 1):
        table.append(next((i for i, c in enumerate(classes) if c.member(n)), -1))
    return table


def _search_from(
    first: int,
    length: int,
    bound: int,
    tables: list[list[int]],
) -> tuple[int, ...] | None:
    """Least witness (by tuple order) starting with ``first``, or None.

    Suffix-sum sets are grown incrementally: adding v to the witness adds
    v plus v-translates of each tracked suffix set; coloring j's suffix
    starts at element j.  All sums, including cross-suffix ones, must be
    pairwise distinct and <= bound, which the running total guards since
    the total is the largest sum.
    """
    ncols = len(tables)

    def extend(
        chosen: list[int],
        total: int,
        all_sums: frozenset[int],
        suffix: list[frozenset[int]],
        colors: list[int],
    ) -> tuple[int, ...] | None:
        d = len(chosen)
        if d == length:
            return tuple(chosen)
        v = chosen[-1] + 1 if chosen else first
        while total + v <= bound:
            new_suffix = list(suffix)
            new_colors = list(colors)
            new_all: set[int] = set()
            ok = True
            if d < ncols:
                # v opens coloring d's suffix and fixes its color
                new_suffix.append(frozenset())
                new_colors.append(tables[d][v])
            for j in range(len(new_suffix)):
                grown = {v} | {s + v for s in new_suffix[j]}
                if j < ncols:
                    cj = new_colors[j]
                    if any(tables[j][s] != cj for s in grown):
                        ok = False
                        break
                new_all |= grown
                new_suffix[j] = new_suffix[j] | frozenset(grown)
            # old sums are pairwise distinct by induction, so new sums
            # (old + v) are too; only new-vs-old collisions can occur
            if ok and not (new_all & all_sums):
                got = extend(
                    chosen + [v],
                    total + v,
                    all_sums | new_all,
                    new_suffix,
                    new_colors,
                )
                if got is not None:
                    return got
            if d == 0:
                return None  # first element is pinned per search lane
            v += 1
        return None

    return extend([], 0, frozenset(), [], [])


def iht_search(
    colorings, terms: int, bound: int, jobs: int = 1
) -> FsSearchResult:
    """Least ascending witness whose suffix finite sums are homogeneous.

    With k = terms and colorings c_0..c_{r-1}, searches for x_0 < … <
    x_{N-1}, N = k + r - 1, such that FS((x_i)_{i>=j}) is monochromatic
    for c_j for every j, with all sums pairwise distinct and <= bound.
    Returns the lexicographically least witness or exhaustion at bound.
    """
    colorings = [validate_partition(c) for c in colorings]
    if not colorings:
        raise InputError("need at least one coloring")
    if len(colorings) > 8 or any(len(c) > 8 for c in colorings):
        raise InputError("at most 8 colorings of at most 8 classes")
    if terms < 2:
        raise InputError("witness needs at least 2 terms")
    if bound < 1:
        raise InputError("bound must be positive")
    if jobs < 1:
        raise InputError("jobs must be positive")
    length = terms + len(colorings) - 1
    tables = [_color_table(c, bound) for c in colorings]

    firsts = range(1, bound + 1)
    if jobs == 1:
        for first in firsts:
            got = _search_from(first, length, bound, tables)
            if got is not None:
                return _finish(got, colorings, bound)
        return FsSearchResult(found=False, bound=bound)

    # workers take interleaved first-element lanes; the least witness over
    # lanes is the global least because witnesses sort by first element
    def lane(w: int) -> tuple[int, ...] | None:
        best = None
        for first in range(1 + w, bound + 1, jobs):
            got = _search_from(first, length, bound, tables)
            if got is not None and (best is None or got < best):
                best = got
                break  # later firsts in this lane are lexicographically larger
        return best

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(lane, range(jobs)))
    winners = [r for r in results if r is not None]
    if not winners:
        return FsSearchResult(found=False, bound=bound)
    return _finish(min(winners), colorings, bound)


def _finish(
    witness: tuple[int, ...], colorings, bound: int
) -> FsSearchResult:
    sums = sorted(
        sum(combo)
        for size in range(1, len(witness) + 1)
        for combo in combinations(witness, size)
    )
    colors = tuple(color_of(c, witness[j]) for j, c in enumerate(colorings))
    return FsSearchResult(
        found=True,
        bound=bound,
        witness=witness,
        colors=colors,
        sums=tuple(sums),
    )


def hindman_search(classes, terms: int, bound: int, jobs: int = 1) -> FsSearchResult:
    """Least k-term witness with all finite sums in one color class."""
    return iht_search([classes], terms, bound, jobs=jobs)


def verify_iht_witness(witness, colorings, max_sum_terms: int | None = None) -> list[str]:
    """Audit a witness: ascending terms, and for each coloring j the finite
    sums of the suffix (x_i)_{i>=j} all in one class.  Returns failures.

    Sums need not be distinct numbers here; homogeneity is about values,
    and arithmetic-progression witnesses (which the pipeline produces)
    revisit sums freely.
    """
    witness = tuple(witness)
    colorings = [validate_partition(c) for c in colorings]
    failures: list[str] = []
    if len(witness) < len(colorings):
        failures.append(
            f"witness has {len(witness)} terms but there are {len(colorings)} colorings"
        )
        return failures
    if any(n < 1 for n in witness):
        failures.append("witness terms must be positive")
    if any(b <= a for a, b in zip(witness, witness[1:])):
        failures.append("witness terms must be strictly increasing")
    if failures:
        return failures
    for j, classes in enumerate(colorings):
        tail = witness[j:]
        cap = len(tail) if max_sum_terms is None else min(max_sum_terms, len(tail))
        expected = color_of(classes, tail[0])
        for size in range(1, cap + 1):
            for combo in combinations(tail, size):
                s = sum(combo)
                got = color_of(classes, s)
                if got != expected:
                    failures.append(
                        f"coloring {j}: sum {s} has color {got}, expected {expected}"
                    )
                    return failures
    return failures


# -- the end-to-end reduction -----------------------------------------------


@dataclass(frozen=True)
class PipelineResult:
    witness: tuple[int, ...]
    colors: tuple[int, ...]
    certificate: IpConstructionCertificate
    stages: dict = field(repr=False, default_factory=dict)


def aet_to_iht_pipeline(colorings, terms: int) -> PipelineResult:
    """Derive an iterated-Hindman witness from the dynamics, not from search.

    Encodes class 0 of each coloring as a point, solves for a recurrent
    proximal companion, runs the certified IP construction, and emits the
    generator's head as the witness.  Homogeneity of all suffix sums is
    then verified by direct finite-sum evaluation; a failure raises, since
    the construction is supposed to force it.
    """
    colorings = [validate_partition(c) for c in colorings]
    if not colorings:
        raise InputError("need at least one coloring")
    if any(len(c) != 2 for c in colorings):
        raise InputError("pipeline colorings must have exactly 2 classes")
    if terms < len(colorings):
        raise InputError("need at least one term per coloring")
    if terms > 16:
        raise InputError("witness capped at 16 terms")

    x = encode_point([c[0] for c in colorings])
    y = ae_solve(x)
    cert = ip_sequence_construct(x, y, count=terms)
    witness = cert.generator.head
    failures = verify_iht_witness(witness, colorings)
    if failures:
        raise ConstructionError(
            "pipeline witness failed homogeneity audit: " + "; ".join(failures)
        )
    colors = tuple(color_of(c, witness[j]) for j, c in enumerate(colorings))
    stages = {
        "encoded_point": x.literal,
        "ae_point": y.literal,
        "generator": cert.generator.literal,
    }
    return PipelineResult(witness=witness, colors=colors, certificate=cert, stages=stages)
