"""Why small primes cannot help the sieve: splitting-type analysis.

The sieve at p needs at least one residual degree-2 divisor class to sit
outside the torsion ladder, and that fails whenever the auxiliary
imaginary quadratic order has a point-producing prime at p.  Concretely:
a CM point defined over the quadratic field K reduces into the very set
the sieve must rule out whenever p is split or ramified in K, and a
companion fixed point defined over a cubic field B collides mod p
whenever the defining cubic has a root mod p.  Both conditions read off
the factorization type of a defining polynomial mod p, so everything
here is elementary Dedekind-style bookkeeping on degree profiles.

For the record cases the numbers come out to: no odd prime below |d|/4
splits in K = Q(sqrt(d)) when the class number is one (the norm form
a^2 + |d| b^2 = 4p has no small solutions), which dooms every odd
p < 41 for d = -163; the first usable prime is exactly 41.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

from .errors import (
    CompositeLevel,
    EvenPrime,
    IncompatibleFields,
    RamifiedPrime,
    SearchExhausted,
)
from .fields import (
    FactorProfile,
    UnivariatePolynomial,
    factor_degree_profile,
    is_prime,
    legendre_symbol,
)

INERT = "inert"
SPLIT = "split"
RAMIFIED = "ramified"


def _is_squarefree(n: int) -> bool:
    n = abs(n)
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class QuadraticFieldSpec:
    """Imaginary quadratic field Q(sqrt(d)), d squarefree and negative."""

    d: int
    class_number_one: bool = False

    def __post_init__(self):
        if self.d >= 0 or not _is_squarefree(self.d):
            raise ValueError(f"d = {self.d} must be negative and squarefree")

    @property
    def discriminant(self) -> int:
        return self.d if self.d % 4 == 1 else 4 * self.d


@dataclass(frozen=True)
class CubicFieldSpec:
    """Cubic field B = Q[x]/(g) for a monic irreducible integer cubic g."""

    g: UnivariatePolynomial

    def __post_init__(self):
        g = self.g
        if g.degree != 3 or not g.is_monic:
            raise ValueError("defining polynomial must be a monic cubic")
        if not all(isinstance(c, int) for c in g.coeffs):
            raise ValueError("defining polynomial needs integer coefficients")
        const = g.coeffs[0]
        candidates = {0} if const == 0 else set()
        for r in range(1, abs(const) + 1):
            if const % r == 0:
                candidates.update((r, -r))
        for r in candidates:
            if g(r) == 0:
                raise IncompatibleFields(f"cubic has the rational root {r}")

    @property
    def disc(self) -> int:
        c0, c1, c2, _ = self.g.coeffs
        return (
            18 * c2 * c1 * c0
            - 4 * c2 ** 3 * c0
            + c2 ** 2 * c1 ** 2
            - 4 * c1 ** 3
            - 27 * c0 ** 2
        )


@dataclass(frozen=True)
class DoomReport:
    """Verdict on one odd prime: why the sieve cannot succeed there."""

    p: int
    splitting_in_K: str
    profile_in_B: tuple[int, ...] | None
    doomed: bool | None
    reason: str

    def __post_init__(self):
        if self.doomed and self.profile_in_B is not None:
            assert 1 in self.profile_in_B or self.splitting_in_K == INERT


@dataclass(frozen=True)
class RangeReport:
    reports: tuple[DoomReport, ...]
    smallest_not_doomed: int | None


def quadratic_splitting(spec: QuadraticFieldSpec, p: int) -> str:
    """Splitting type of the odd prime p in Q(sqrt(d))."""
    if p == 2:
        raise EvenPrime("splitting analysis works with odd primes only")
    sym = legendre_symbol(spec.d, p)
    if sym == 0:
        return RAMIFIED
    return SPLIT if sym == 1 else INERT


def cubic_profile(spec: CubicFieldSpec, p: int) -> FactorProfile:
    """Factor-degree profile of the defining cubic mod p."""
    return factor_degree_profile(spec.g, p)


def min_split_prime(spec: QuadraticFieldSpec, ceiling: int | None = None) -> int:
    """Smallest odd prime split in Q(sqrt(d)), via the norm-form bound.

    With class number one, p splits exactly when a^2 + |d| b^2 = 4p has
    a solution with b >= 1, which forces p >= |d| / 4.  The scan starts
    there and double-checks on the way out that nothing smaller splits.
    """
    if not spec.class_number_one:
        raise ValueError("norm-form scan requires the class-number-one flag")
    if ceiling is None:
        ceiling = 10 * abs(spec.d)
    start = (abs(spec.d) + 3) // 4
    if start % 2 == 0:
        start += 1
    found = None
    for p in range(max(start, 3), ceiling + 1, 2):
        if not is_prime(p):
            continue
        if legendre_symbol(spec.d, p) != 1:
            continue
        ad = abs(spec.d)
        for b in range(1, isqrt(4 * p // ad) + 1):
            rest = 4 * p - ad * b * b
            if rest >= 0 and isqrt(rest) ** 2 == rest:
                found = p
                break
        if found is not None:
            break
    if found is None:
        raise SearchExhausted(
            f"no split prime below {ceiling} for d = {spec.d}"
        )
    for q in range(3, found, 2):
        if is_prime(q) and legendre_symbol(spec.d, q) == 1:
            raise AssertionError(
                f"norm-form bound violated: {q} splits below {found}"
            )
    return found


def doomed_at(
    qspec: QuadraticFieldSpec, cspec: CubicFieldSpec, p: int
) -> DoomReport:
    """Is the sieve at p doomed by a degree-1 prime of the cubic field?

    Doom means the cubic picks up a root mod p.  An inert p in K forces
    that (p cannot stay inert in B once the compositum contains no
    inertia-degree-6 primes), and the reason string records whether the
    trigger was inertness in K or a directly observed linear factor.
    """
    if p == 2:
        raise EvenPrime("doom analysis works with odd primes only")
    if p == abs(qspec.d) or qspec.d % p == 0:
        raise RamifiedPrime(f"{p} ramifies in the quadratic field")
    if cspec.disc % p == 0:
        raise RamifiedPrime(f"{p} divides the cubic discriminant")
    ktype = quadratic_splitting(qspec, p)
    profile = cubic_profile(cspec, p)
    doomed = 1 in profile.degrees
    if not doomed:
        reason = "inert-in-cubic"
    elif ktype == INERT:
        reason = "inert-in-quadratic"
    elif profile.degrees == (1, 1, 1):
        reason = "totally-split-cubic"
    else:
        reason = "degree-one-prime-in-cubic"
    return DoomReport(
        p=p,
        splitting_in_K=ktype,
        profile_in_B=profile.degrees,
        doomed=doomed,
        reason=reason,
    )


def doom_range_report(
    qspec: QuadraticFieldSpec, cspec: CubicFieldSpec | None, pmax: int
) -> RangeReport:
    """Doom verdicts for every odd unramified prime up to pmax.

    Without cubic data only the quadratic side is analyzed: inert primes
    are still doomed (the compositum argument needs no profile), split
    primes stay undecided.
    """
    reports = []
    smallest = None
    for p in range(3, pmax + 1, 2):
        if not is_prime(p):
            continue
        if p == abs(qspec.d) or qspec.d % p == 0:
            continue
        if cspec is not None:
            if cspec.disc % p == 0:
                continue
            rep = doomed_at(qspec, cspec, p)
        else:
            ktype = quadratic_splitting(qspec, p)
            if ktype == INERT:
                rep = DoomReport(p, ktype, None, True, "inert-in-quadratic")
            else:
                rep = DoomReport(p, ktype, None, None, "undecided-without-cubic")
        reports.append(rep)
        if smallest is None and rep.doomed is False:
            smallest = p
    return RangeReport(tuple(reports), smallest)


def no_degree_six_check(
    qspec: QuadraticFieldSpec, cspec: CubicFieldSpec, pmax: int
) -> bool:
    """No odd unramified p <= pmax is inert in both K and B at once.

    Sanity for the compositum picture: when disc(g)/d is a nonzero
    rational square the sextic closure has Galois group S3 over Q and
    admits no inertia degree 6, so simultaneous inertness is impossible.
    The precondition is checked exactly; the sweep then verifies the
    consequence prime by prime.
    """
    disc = cspec.disc
    if disc == 0 or qspec.d == 0:
        raise IncompatibleFields("degenerate discriminant")
    prod = disc * qspec.d
    if prod < 0 or isqrt(prod) ** 2 != prod:
        raise IncompatibleFields(
            f"disc(g)/d = {Fraction(disc, qspec.d)} is not a rational square"
        )
    for p in range(3, pmax + 1, 2):
        if not is_prime(p):
            continue
        if qspec.d % p == 0 or disc % p == 0 or p == abs(qspec.d):
            continue
        if quadratic_splitting(qspec, p) != INERT:
            continue
        if cubic_profile(cspec, p).degrees == (3,):
            return False
    return True


def x0_torsion_order(N: int) -> int:
    """Order of the class of the marked point difference for prime
    level N >= 11: the numerator of (N - 1) / 12 in lowest terms."""
    if not is_prime(N):
        raise CompositeLevel(f"level {N} is not prime")
    if N < 11:
        raise ValueError(f"level {N} below the genus-positive range")
    return Fraction(N - 1, 12).numerator
