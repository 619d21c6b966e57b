"""The reduction-and-intersection sieve for degree-2 points.

A marked curve carries an involution, a cyclic torsion class generated
by the difference of two swapped rational points, and a list of known
degree-2 divisors.  Per odd prime of good reduction the engine reduces
the known divisors, removes the ones certified lonely, classifies every
surviving degree-2 divisor by the torsion residue its twist hits, and
reports the residue set W_p.  The curve has no unknown degree-2 points
exactly when the W_p intersected over several primes leave only 0.

Loneliness is an input, never computed here: certificates arrive per
prime and the engine refuses sets that are not involution-stable, since
a divisor is lonely iff its involution image is.
"""

from __future__ import annotations

import multiprocessing
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .curves import (
    PlaneCurveModel,
    ProjectivePoint,
    Place,
    apply_matrix_point,
    enumerate_points,
    form_eval_rational,
    matrix_mod_p,
    reduce_mod_p,
    validate_involution,
)
from .divisors import (
    EffectiveDivisor,
    TorsionClassTester,
    TorsionModel,
    _reduce_rational_point,
    involution_image,
    sym2_enumerate,
)
from .errors import (
    DenominatorClash,
    EmptyReportList,
    EvenPrime,
    InputError,
    InvariantViolation,
    InvolutionUnstableCertificates,
    MixedCurves,
    RamifiedCoordinateField,
    UnknownLabel,
)
from .fields import (
    UnivariatePolynomial,
    _pfind_root,
    _proots,
    _ptrim,
    get_field,
    legendre_symbol,
)
from .splitting import CubicFieldSpec, DoomReport, QuadraticFieldSpec, doomed_at


# ----------------------------------------------------------------------
# Exact arithmetic in Q(sqrt(d)), just enough to move points around.

def _is_squarefree(n: int) -> bool:
    n = abs(n)
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def _q_pair(value) -> tuple:
    a, b = value
    return (Fraction(a), Fraction(b))


def _q_add(u, v):
    return (u[0] + v[0], u[1] + v[1])


def _q_scale(c: Fraction, u):
    return (c * u[0], c * u[1])


def _q_mul(d: int, u, v):
    return (u[0] * v[0] + d * u[1] * v[1], u[0] * v[1] + u[1] * v[0])


def _q_conj(u):
    return (u[0], -u[1])


def _q_inv(d: int, u):
    norm = u[0] * u[0] - d * u[1] * u[1]
    if norm == 0:
        raise InputError("zero or non-invertible quadratic number")
    return (u[0] / norm, -u[1] / norm)


def _q_is_zero(u) -> bool:
    return u[0] == 0 and u[1] == 0


def _vp_int(n: int, p: int) -> int:
    if n == 0:
        return 1 << 30
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _vp_frac(x: Fraction, p: int) -> int:
    return _vp_int(x.numerator, p) - _vp_int(x.denominator, p)


def _frac_mod_p(x: Fraction, p: int) -> int:
    den = x.denominator % p
    if den == 0:
        raise DenominatorClash(f"denominator of {x} vanishes mod {p}")
    return x.numerator % p * pow(den, -1, p) % p


# ----------------------------------------------------------------------
# Declared data: known degree-2 divisors and fixed points over Q-bar.

@dataclass(frozen=True)
class KnownDivisor:
    """A degree-2 effective divisor with exact coordinates.

    Either a pair of rational points, or one point over Q(sqrt(d)) whose
    Galois conjugate completes the divisor.  Quadratic coordinates are
    (a, b) pairs meaning a + b*sqrt(d).
    """

    label: str
    points: tuple | None = None
    disc: int | None = None
    coords: tuple | None = None

    def __post_init__(self):
        if not self.label:
            raise InputError("known divisor needs a label")
        if (self.points is None) == (self.disc is None):
            raise InputError(f"divisor {self.label}: exactly one representation expected")
        if self.points is not None:
            pts = tuple(tuple(Fraction(c) for c in pt) for pt in self.points)
            if len(pts) != 2 or any(len(pt) != 3 or not any(pt) for pt in pts):
                raise InputError(f"divisor {self.label}: expected two rational point triples")
            object.__setattr__(self, "points", pts)
        else:
            d = self.disc
            if d == 0 or d == 1 or not _is_squarefree(d):
                raise InputError(f"divisor {self.label}: disc must be squarefree and not 0, 1")
            root = round(abs(d) ** 0.5)
            if d > 0 and root * root == d:
                raise InputError(f"divisor {self.label}: disc {d} is a perfect square")
            cs = tuple(_q_pair(c) for c in self.coords)
            if len(cs) != 3 or all(_q_is_zero(c) for c in cs):
                raise InputError(f"divisor {self.label}: expected three quadratic coordinates")
            object.__setattr__(self, "coords", cs)

    def canonical_key(self):
        """Field-independent key of the divisor, for set comparisons over Q."""
        if self.points is not None:
            keys = sorted(_norm_rat_triple(pt) for pt in self.points)
            return ("pair", keys[0], keys[1])
        cs = _norm_quad_triple(self.disc, self.coords)
        if all(b == 0 for _, b in cs):
            rat = _norm_rat_triple(tuple(a for a, _ in cs))
            return ("pair", rat, rat)
        conj = _norm_quad_triple(self.disc, tuple(_q_conj(c) for c in self.coords))
        return ("quad", self.disc, min(cs, conj))

    def apply_matrix(self, mat) -> "KnownDivisor":
        if self.points is not None:
            imgs = tuple(_mat_apply_rat(mat, pt) for pt in self.points)
            return KnownDivisor(self.label, points=imgs)
        img = tuple(
            _q_add(_q_add(_q_scale(Fraction(mat[i][0]), self.coords[0]),
                          _q_scale(Fraction(mat[i][1]), self.coords[1])),
                   _q_scale(Fraction(mat[i][2]), self.coords[2]))
            for i in range(3)
        )
        return KnownDivisor(self.label, disc=self.disc, coords=img)

    def reduce(self, p: int) -> EffectiveDivisor:
        """Reduction mod an odd prime, unramified in the coordinate field."""
        if self.points is not None:
            acc = {}
            for pt in self.points:
                pl = Place.of_point(_reduce_rational_point(pt, p))
                acc[pl] = acc.get(pl, 0) + 1
            return EffectiveDivisor(acc)
        d = self.disc
        sym = legendre_symbol(d, p)
        if sym == 0:
            raise RamifiedCoordinateField(
                f"divisor {self.label}: {p} ramifies in Q(sqrt({d}))")
        if sym == 1:
            K = get_field(p)
            s = K.encode(_pfind_root(K, [K.element(-d % p).coeffs, K.zero, K.one]))
            acc = {}
            for root in (s, p - s):
                pl = Place.of_point(_reduce_split(d, self.coords, p, root))
                acc[pl] = acc.get(pl, 0) + 1
            return EffectiveDivisor(acc)
        pt = _reduce_inert(d, self.coords, p)
        pl = Place.of_point(pt)
        return EffectiveDivisor({pl: 2 if pl.degree == 1 else 1})


def _norm_rat_triple(pt):
    for c in pt:
        if c:
            return tuple(x / c for x in pt)
    raise InputError("zero projective triple")


def _norm_quad_triple(d, coords):
    for c in coords:
        if not _q_is_zero(c):
            inv = _q_inv(d, c)
            return tuple(_q_mul(d, x, inv) for x in coords)
    raise InputError("zero projective triple")


def _mat_apply_rat(mat, pt):
    return tuple(
        sum(Fraction(mat[i][j]) * pt[j] for j in range(3)) for i in range(3)
    )


def _reduce_split(d: int, coords, p: int, s: int) -> ProjectivePoint:
    """Reduce at a split prime along the root sqrt(d) -> s.

    Rescaling loop: after clearing p-content some coordinate is a p-adic
    unit in the field, but all three can still embed to 0 when they sit
    in the chosen prime above p and not in p itself; dividing the vector
    by sqrt(d) - s (a uniformizer there, a unit at the conjugate prime)
    strictly drops the valuation, so the loop terminates.
    """
    K = get_field(p)
    vec = list(coords)
    for _ in range(64):
        content = min(min(_vp_frac(a, p), _vp_frac(b, p)) for a, b in vec)
        scale = Fraction(1, p) ** content
        vec = [_q_scale(scale, c) for c in vec]
        red = [(_frac_mod_p(a, p) + _frac_mod_p(b, p) * s) % p for a, b in vec]
        if any(red):
            return ProjectivePoint(K, tuple(K.element(r).coeffs for r in red))
        unif_inv = _q_inv(d, (Fraction(-s), Fraction(1)))
        vec = [_q_mul(d, c, unif_inv) for c in vec]
    raise InvariantViolation("split-prime rescaling did not terminate")


def _reduce_inert(d: int, coords, p: int) -> ProjectivePoint:
    K2 = get_field(p, 2)
    w = _pfind_root(K2, [K2.embed_base(-d % p), K2.zero, K2.one])
    content = min(min(_vp_frac(a, p), _vp_frac(b, p)) for a, b in coords)
    scale = Fraction(1, p) ** content
    raw = []
    for c in coords:
        a, b = _q_scale(scale, c)
        val = K2.add(K2.embed_base(_frac_mod_p(a, p)),
                     K2.scalar_mul(_frac_mod_p(b, p), w))
        raw.append(val)
    return ProjectivePoint(K2, tuple(raw))


@dataclass(frozen=True)
class FixedPointDecl:
    """A declared involution-fixed point with exact coordinates.

    The coordinate field is given by the monic integer minimal
    polynomial of a generator t (use the polynomial x for Q itself);
    each projective coordinate is a list of rational coefficients in
    the power basis of t.
    """

    label: str
    minpoly: tuple
    coords: tuple

    def __post_init__(self):
        mp = tuple(int(c) for c in self.minpoly)
        if len(mp) < 2 or mp[-1] != 1:
            raise InputError(f"fixed point {self.label}: minpoly must be monic of degree >= 1")
        deg = len(mp) - 1
        cs = tuple(tuple(Fraction(c) for c in coord) for coord in self.coords)
        if len(cs) != 3 or any(len(c) > deg or not c for c in cs):
            raise InputError(
                f"fixed point {self.label}: coordinates need 1..{deg} basis coefficients")
        if not any(any(c) for c in cs):
            raise InputError(f"fixed point {self.label}: zero coordinate triple")
        object.__setattr__(self, "minpoly", mp)
        object.__setattr__(self, "coords", cs)

    def reductions(self, p: int):
        """One reduced point per degree-1 prime of the field above p."""
        K = get_field(p)
        poly = _ptrim([K.element(c % p).coeffs for c in self.minpoly])
        out = []
        for r in sorted(_proots(K, poly), key=K.encode):
            rint = K.encode(r)
            triple = []
            for coord in self.coords:
                acc = 0
                for j, c in enumerate(coord):
                    acc = (acc + _frac_mod_p(c, p) * pow(rint, j, p)) % p
                triple.append(acc)
            if not any(triple):
                raise DenominatorClash(
                    f"fixed point {self.label} degenerates mod {p}")
            out.append(ProjectivePoint(K, tuple(K.element(t).coeffs for t in triple)))
        return out


# ----------------------------------------------------------------------
# The marked curve bundle.

@dataclass
class MarkedCurveData:
    """Everything the sieve needs, over Q: curve, involution, torsion
    class, known degree-2 divisors, declared fixed points.

    Construction validates the involution (exact, over Q), the swap of
    the two torsion points, and involution-stability of the known set.
    """

    curve: PlaneCurveModel
    involution: tuple
    torsion: TorsionModel
    known_divisors: tuple = ()
    fixed_points: tuple = ()
    assume_rank_zero: bool = True
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.curve.base is not None:
            raise InputError("marked curve must be defined over Q")
        mat = tuple(tuple(Fraction(c) for c in row) for row in self.involution)
        self.involution = mat
        check = validate_involution(self.curve, mat)
        if check.trivial:
            raise InputError("marked involution must be nontrivial")
        c0n = _norm_rat_triple(self.torsion.c0)
        cinfn = _norm_rat_triple(self.torsion.cinf)
        if _norm_rat_triple(_mat_apply_rat(mat, c0n)) != cinfn:
            raise InputError("involution does not swap the torsion points")
        for pt in (self.torsion.c0, self.torsion.cinf):
            if form_eval_rational(self.curve.form, pt) != 0:
                raise InputError("torsion point does not lie on the curve")
        self.known_divisors = tuple(self.known_divisors)
        self.fixed_points = tuple(self.fixed_points)
        labels = [kd.label for kd in self.known_divisors]
        if len(set(labels)) != len(labels):
            raise InputError("known divisor labels must be distinct")
        keys = {kd.canonical_key() for kd in self.known_divisors}
        for kd in self.known_divisors:
            if kd.apply_matrix(mat).canonical_key() not in keys:
                raise InputError(
                    f"known set is not involution-stable: image of {kd.label} missing")

    def known_by_label(self) -> dict:
        return {kd.label: kd for kd in self.known_divisors}


@dataclass(frozen=True)
class LonelyCertificates:
    """Per-prime labels of known divisors asserted p-adically lonely.

    Assertions come from external verification; the engine only checks
    label resolution and involution-stability of each certified set.
    """

    by_prime: dict

    def __post_init__(self):
        norm = {}
        for p, labels in self.by_prime.items():
            norm[int(p)] = tuple(labels)
        object.__setattr__(self, "by_prime", norm)

    @classmethod
    def empty(cls) -> "LonelyCertificates":
        return cls({})

    def labels_for(self, p: int):
        return self.by_prime.get(p, ())


@dataclass(frozen=True)
class SieveReport:
    """Per-prime outcome: sizes, the residue set, witness counts."""

    p: int
    n: int
    sym2_size: int
    hp_size: int
    sp_size: int
    wp: tuple
    witnesses: dict
    assumption_rank_zero: bool
    curve_digest: str
    ms_elapsed: int = 0

    @property
    def unmatched(self) -> int:
        return self.sp_size - sum(self.witnesses.values())

    def to_jsonable(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "sym2_size": self.sym2_size,
            "Hp_size": self.hp_size,
            "Sp_size": self.sp_size,
            "Wp": list(self.wp),
            "witnesses": {str(r): c for r, c in sorted(self.witnesses.items())},
            "assumption_rank_zero": self.assumption_rank_zero,
            "curve_digest": self.curve_digest,
            "ms_elapsed": self.ms_elapsed,
        }

    @classmethod
    def from_jsonable(cls, doc: dict) -> "SieveReport":
        return cls(
            p=doc["p"],
            n=doc["n"],
            sym2_size=doc["sym2_size"],
            hp_size=doc["Hp_size"],
            sp_size=doc["Sp_size"],
            wp=tuple(doc["Wp"]),
            witnesses={int(r): c for r, c in doc["witnesses"].items()},
            assumption_rank_zero=doc["assumption_rank_zero"],
            curve_digest=doc["curve_digest"],
            ms_elapsed=doc["ms_elapsed"],
        )


# ----------------------------------------------------------------------
# Per-prime pipeline.

def _require_odd(p: int):
    if p == 2:
        raise EvenPrime("odd primes required")
    if p < 3:
        raise InputError(f"{p} is not an odd prime")


def reduce_known_divisors(data: MarkedCurveData, p: int):
    """Reductions of all known divisors mod p, in declaration order."""
    _require_odd(p)
    curve_p = reduce_mod_p(data.curve, p)
    out = []
    for kd in data.known_divisors:
        red = kd.reduce(p)
        for pl, _ in red.support:
            if not curve_p.contains(pl.rep):
                raise InvariantViolation(
                    f"reduction of {kd.label} left the curve at {p}")
        out.append(red)
    return out


def build_Hp_Sp(data: MarkedCurveData, p: int, lonely: LonelyCertificates):
    """Certified reductions and their complement in the degree-2 divisors."""
    _require_odd(p)
    labels = lonely.labels_for(p)
    by_label = data.known_by_label()
    for lbl in labels:
        if lbl not in by_label:
            raise UnknownLabel(f"certificate references unknown divisor {lbl!r}")
    mat = data.involution
    cert_keys = {by_label[lbl].canonical_key() for lbl in labels}
    for lbl in labels:
        img = by_label[lbl].apply_matrix(mat).canonical_key()
        if img not in cert_keys:
            raise InvolutionUnstableCertificates(
                f"certified set at {p} omits the involution image of {lbl!r}")
    reductions = reduce_known_divisors(data, p)
    red_by_label = dict(zip([kd.label for kd in data.known_divisors], reductions))
    hp_keys = set()
    hp = []
    for lbl in labels:
        red = red_by_label[lbl]
        if red.key() not in hp_keys:
            hp_keys.add(red.key())
            hp.append(red)
    hp.sort(key=EffectiveDivisor.key)
    curve_p = reduce_mod_p(data.curve, p)
    sym2 = sym2_enumerate(curve_p)
    sym2_keys = {dv.key() for dv in sym2}
    for dv in hp:
        if dv.key() not in sym2_keys:
            raise InvariantViolation(f"certified reduction escapes sym^2 at {p}")
    sp = [dv for dv in sym2 if dv.key() not in hp_keys]
    return hp, sp


# Worker-pool state, populated in the parent right before fork so the
# children inherit the warm tester and divisor list read-only.
_POOL_STATE: dict = {}


def _match_chunk(bounds):
    lo, hi = bounds
    tester = _POOL_STATE["tester"]
    sp = _POOL_STATE["sp"]
    verify = _POOL_STATE["verify"]
    return [tester.class_match(sp[i], verify_unique=verify) for i in range(lo, hi)]


def compute_Wp(data: MarkedCurveData, p: int, lonely: LonelyCertificates,
               workers: int = 1, verify_unique: bool = False) -> SieveReport:
    """Classify every uncertified degree-2 divisor mod p by torsion residue.

    The report's W_p is the set of residues hit; witnesses count the
    divisors behind each residue, and divisors matching no residue
    (their twist class lies outside the reduced torsion line) are
    visible as sp_size minus the witness total.  ms_elapsed is pinned
    to 0 so reports are byte-stable; wall-clock time is the caller's
    business.
    """
    if workers < 1:
        raise InputError("worker count must be >= 1")
    _require_odd(p)
    curve_p = reduce_mod_p(data.curve, p)
    mat_p = matrix_mod_p(data.involution, p)
    c0r, cinfr = data.torsion.reduce(p)
    tester = TorsionClassTester(curve_p, mat_p, data.torsion.order, c0r, cinfr)
    hp, sp = build_Hp_Sp(data, p, lonely)
    n = data.torsion.order

    if workers == 1 or len(sp) < 4 * workers:
        residues = [tester.class_match(q, verify_unique=verify_unique) for q in sp]
    else:
        _POOL_STATE["tester"] = tester
        _POOL_STATE["sp"] = sp
        _POOL_STATE["verify"] = verify_unique
        chunk = -(-len(sp) // (4 * workers))
        bounds = [(lo, min(lo + chunk, len(sp))) for lo in range(0, len(sp), chunk)]
        try:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(processes=workers) as pool:
                parts = pool.map(_match_chunk, bounds)
        finally:
            _POOL_STATE.clear()
        residues = [r for part in parts for r in part]

    witnesses = Counter(r for r in residues if r is not None)
    wp = tuple(sorted(witnesses))
    if any((-r) % n not in witnesses for r in wp):
        raise InvariantViolation(f"W_{p} = {wp} is not closed under negation mod {n}")
    has_fixed = any(q == involution_image(q, mat_p) for q in sp)
    if has_fixed and 0 not in witnesses:
        raise InvariantViolation(
            f"S_{p} contains an involution-fixed divisor but 0 is not in W_{p}")
    return SieveReport(
        p=p,
        n=n,
        sym2_size=len(sp) + len(hp),
        hp_size=len(hp),
        sp_size=len(sp),
        wp=wp,
        witnesses=dict(sorted(witnesses.items())),
        assumption_rank_zero=data.assume_rank_zero,
        curve_digest=data.curve.digest(),
    )


def intersect_and_verdict(reports):
    """Intersect the per-prime residue sets; resolved means only 0 is left."""
    reports = list(reports)
    if not reports:
        raise EmptyReportList("no reports to intersect")
    digests = {r.curve_digest for r in reports}
    orders = {r.n for r in reports}
    if len(digests) > 1 or len(orders) > 1:
        raise MixedCurves("reports mix curves or torsion orders")
    acc = set(reports[0].wp)
    for rep in reports[1:]:
        acc &= set(rep.wp)
    residues = tuple(sorted(acc))
    verdict = "resolved" if residues == (0,) else "failed"
    return residues, verdict


# ----------------------------------------------------------------------
# Failure-condition analysis.

def scan_fixed_points(curve_p: PlaneCurveModel, mat_p):
    """All points of X(F_p) fixed by the reduced involution."""
    return [pt for pt in enumerate_points(curve_p, 1)
            if apply_matrix_point(mat_p, pt) == pt]


def fixed_points_mod_p(data: MarkedCurveData, p: int):
    """Fixed points mod p, and whether any is unexplained by declarations."""
    curve_p = reduce_mod_p(data.curve, p)
    mat_p = matrix_mod_p(data.involution, p)
    fixed = scan_fixed_points(curve_p, mat_p)
    declared = set()
    for decl in data.fixed_points:
        for pt in decl.reductions(p):
            declared.add(pt.key())
    extra = any(pt.key() not in declared for pt in fixed)
    return fixed, extra


@dataclass(frozen=True)
class DoomCheckReport:
    """Structured failure-condition report for one prime.

    Loneliness of the known divisors (the first failure condition) is
    always reported as external: certifying it needs p-adic machinery
    this package deliberately does not contain.
    """

    p: int
    fixed_point_count: int
    extra_fixed_point: bool
    coincidences: tuple
    splitting: DoomReport | None
    loneliness: str = "external"

    @property
    def doomed(self) -> bool:
        if self.extra_fixed_point or self.coincidences:
            return True
        return bool(self.splitting and self.splitting.doomed)

    def to_jsonable(self) -> dict:
        out = {
            "p": self.p,
            "fixed_point_count": self.fixed_point_count,
            "extra_fixed_point": self.extra_fixed_point,
            "coincidences": [list(pair) for pair in self.coincidences],
            "loneliness": self.loneliness,
            "doomed": self.doomed,
        }
        if self.splitting is not None:
            out["splitting"] = {
                "splitting_in_K": self.splitting.splitting_in_K,
                "profile_in_B": list(self.splitting.profile_in_B or ()),
                "doomed": self.splitting.doomed,
                "reason": self.splitting.reason,
            }
        else:
            out["splitting"] = None
        return out


def doom_check(data: MarkedCurveData, p: int,
               fieldspecs: tuple | None = None) -> DoomCheckReport:
    """Check the structural failure conditions at p.

    Reports the extra-fixed-point condition, reduction coincidences
    between declared fixed points whose fields have a degree-1 prime at
    p, and (when quadratic/cubic field specs are supplied) the
    splitting-analyzer verdict.
    """
    _require_odd(p)
    fixed, extra = fixed_points_mod_p(data, p)
    reductions = []
    for decl in data.fixed_points:
        keys = {pt.key() for pt in decl.reductions(p)}
        reductions.append((decl.label, keys))
    coincidences = []
    for i in range(len(reductions)):
        for j in range(i + 1, len(reductions)):
            if reductions[i][1] & reductions[j][1]:
                coincidences.append((reductions[i][0], reductions[j][0]))
    splitting = None
    if fieldspecs is not None:
        qspec, cspec = fieldspecs
        if not isinstance(qspec, QuadraticFieldSpec):
            qspec = QuadraticFieldSpec(qspec)
        if cspec is not None and not isinstance(cspec, CubicFieldSpec):
            cspec = CubicFieldSpec(UnivariatePolynomial(cspec))
        if cspec is not None:
            splitting = doomed_at(qspec, cspec, p)
    return DoomCheckReport(
        p=p,
        fixed_point_count=len(fixed),
        extra_fixed_point=extra,
        coincidences=tuple(coincidences),
        splitting=splitting,
    )
