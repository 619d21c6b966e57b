"""Sieve engine on the frozen toy quartic (order-5 marked class)."""

import pytest

from lonesieve.curves import is_smooth, reduce_mod_p
from lonesieve.divisors import TorsionModel, involution_image, sym2_enumerate
from lonesieve.errors import (
    EmptyReportList,
    EvenPrime,
    InputError,
    InvolutionUnstableCertificates,
    MixedCurves,
    RamifiedCoordinateField,
    UnknownLabel,
)
from lonesieve.fields import UnivariatePolynomial
from lonesieve.sieve import (
    FixedPointDecl,
    KnownDivisor,
    LonelyCertificates,
    MarkedCurveData,
    SieveReport,
    build_Hp_Sp,
    compute_Wp,
    doom_check,
    fixed_points_mod_p,
    intersect_and_verdict,
    reduce_known_divisors,
)
from lonesieve.splitting import CubicFieldSpec, QuadraticFieldSpec

SWAP = ((0, 1, 0), (1, 0, 0), (0, 0, 1))
EMPTY = LonelyCertificates.empty()


@pytest.fixture(scope="module")
def bare_toy(toy_data):
    """The toy marking without declarations or known divisors."""
    return MarkedCurveData(
        curve=toy_data.curve,
        involution=toy_data.involution,
        torsion=toy_data.torsion,
    )


def test_known_divisor_swap_stable(toy_data):
    kd = toy_data.known_by_label()["Z1"]
    assert kd.canonical_key()[0] == "quad"
    assert kd.apply_matrix(SWAP).canonical_key() == kd.canonical_key()


def test_known_divisor_reductions(toy_data):
    kd = toy_data.known_by_label()["Z1"]
    # -7 is inert at 3 and 5: one place of degree 2
    for p in (3, 5):
        red = reduce_known_divisors(toy_data, p)[0]
        assert red.degree == 2
        assert [pl.degree for pl, _ in red.support] == [2]
    # split at 11: two rational points
    assert is_smooth(reduce_mod_p(toy_data.curve, 11))
    red11 = reduce_known_divisors(toy_data, 11)[0]
    assert red11.degree == 2
    assert all(pl.degree == 1 for pl, _ in red11.support)
    with pytest.raises(RamifiedCoordinateField):
        kd.reduce(7)
    with pytest.raises(EvenPrime):
        reduce_known_divisors(toy_data, 2)


def test_marked_data_validation(toy_data):
    with pytest.raises(InputError):
        MarkedCurveData(
            curve=toy_data.curve,
            involution=((1, 0, 0), (0, 1, 0), (0, 0, 1)),
            torsion=toy_data.torsion,
        )
    with pytest.raises(InputError):
        MarkedCurveData(
            curve=toy_data.curve,
            involution=toy_data.involution,
            torsion=TorsionModel(5, (1, 0, 0), (1, 1, 1)),
        )
    # known set must be closed under the involution
    asym = KnownDivisor("A", points=((1, 0, 0), (1, 1, 1)))
    assert asym.apply_matrix(SWAP).canonical_key() != asym.canonical_key()
    with pytest.raises(InputError):
        MarkedCurveData(
            curve=toy_data.curve,
            involution=toy_data.involution,
            torsion=toy_data.torsion,
            known_divisors=(asym,),
        )


def test_hp_sp_partition(toy_data):
    hp0, sp0 = build_Hp_Sp(toy_data, 3, EMPTY)
    assert hp0 == [] and len(sp0) == 24
    certs = LonelyCertificates({3: ("Z1",), 5: ("Z1",)})
    hp, sp = build_Hp_Sp(toy_data, 3, certs)
    assert len(hp) == 1 and len(sp) == 23
    with pytest.raises(UnknownLabel):
        build_Hp_Sp(toy_data, 3, LonelyCertificates({3: ("NOPE",)}))


def test_certified_set_must_be_swap_closed(toy_data):
    a = KnownDivisor("A", points=((1, 0, 0), (1, 1, 1)))
    b = a.apply_matrix(SWAP)
    b = KnownDivisor("B", points=b.points)
    data = MarkedCurveData(
        curve=toy_data.curve,
        involution=toy_data.involution,
        torsion=toy_data.torsion,
        known_divisors=(a, b),
    )
    with pytest.raises(InvolutionUnstableCertificates):
        build_Hp_Sp(data, 3, LonelyCertificates({3: ("A",)}))
    hp, _ = build_Hp_Sp(data, 3, LonelyCertificates({3: ("A", "B")}))
    assert len(hp) == 2


@pytest.fixture(scope="module")
def toy_reports(toy_data):
    return {p: compute_Wp(toy_data, p, EMPTY, verify_unique=True)
            for p in (3, 5)}


def test_report_invariants(toy_reports):
    for p, rep in toy_reports.items():
        assert rep.p == p and rep.n == 5
        assert rep.sym2_size == rep.sp_size + rep.hp_size
        assert all((-r) % rep.n in rep.wp for r in rep.wp)
        assert sum(rep.witnesses.values()) + rep.unmatched == rep.sp_size
    assert toy_reports[3].sym2_size == 24
    assert toy_reports[5].sym2_size == 45


def test_structural_doom_residues(toy_reports):
    """A swap-fixed point T mod p puts c0+T in S_p, forcing 1 and n-1
    into W_p; 0 shows up from the fixed degree-2 divisors."""
    for rep in toy_reports.values():
        assert 1 in rep.wp and (rep.n - 1) in rep.wp
        assert 0 in rep.wp


def test_verdict_failed_on_toy(toy_reports):
    residues, verdict = intersect_and_verdict(toy_reports.values())
    assert verdict == "failed"
    assert 1 in residues
    # order independence
    rev = intersect_and_verdict(list(toy_reports.values())[::-1])
    assert rev == (residues, verdict)


def test_verdict_resolved_on_synthetic_reports():
    mk = lambda wp: SieveReport(
        p=3, n=9, sym2_size=4, hp_size=0, sp_size=4, wp=wp,
        witnesses={r: 1 for r in wp}, assumption_rank_zero=True,
        curve_digest="0" * 64,
    )
    a = mk((0, 1, 8))
    b = SieveReport(
        p=5, n=9, sym2_size=4, hp_size=0, sp_size=4, wp=(0, 2, 7),
        witnesses={0: 1, 2: 1, 7: 1}, assumption_rank_zero=True,
        curve_digest="0" * 64,
    )
    residues, verdict = intersect_and_verdict([a, b])
    assert residues == (0,) and verdict == "resolved"


def test_verdict_guards(toy_reports):
    with pytest.raises(EmptyReportList):
        intersect_and_verdict([])
    other = SieveReport(
        p=3, n=4, sym2_size=1, hp_size=0, sp_size=1, wp=(0,),
        witnesses={0: 1}, assumption_rank_zero=True, curve_digest="deadbeef",
    )
    with pytest.raises(MixedCurves):
        intersect_and_verdict([toy_reports[3], other])


def test_worker_pool_determinism(toy_data, toy_reports):
    rep2 = compute_Wp(toy_data, 3, EMPTY, workers=2)
    assert rep2.to_jsonable() == toy_reports[3].to_jsonable()


def test_lonely_certificates_shrink_sp(toy_data, toy_reports):
    certs = LonelyCertificates({3: ("Z1",)})
    rep = compute_Wp(toy_data, 3, certs)
    assert rep.hp_size == 1
    assert rep.sp_size == toy_reports[3].sp_size - 1


def test_report_round_trip(toy_reports):
    rep = toy_reports[5]
    assert SieveReport.from_jsonable(rep.to_jsonable()) == rep


def test_fixed_points_and_declarations(toy_data, bare_toy):
    fixed, extra = fixed_points_mod_p(bare_toy, 3)
    assert len(fixed) == 2 and extra
    # the shipped declarations explain both reductions
    fixed_d, extra_d = fixed_points_mod_p(toy_data, 3)
    assert [pt.key() for pt in fixed_d] == [pt.key() for pt in fixed]
    assert not extra_d


def test_doom_check_flags(toy_data, bare_toy):
    rep = doom_check(bare_toy, 3)
    assert rep.extra_fixed_point and rep.doomed
    assert rep.splitting is None and rep.loneliness == "external"
    rep_declared = doom_check(toy_data, 3)
    assert not rep_declared.extra_fixed_point
    assert not rep_declared.coincidences
    rep37 = doom_check(
        toy_data,
        37,
        fieldspecs=(
            QuadraticFieldSpec(-163),
            CubicFieldSpec(UnivariatePolynomial((10, -8, 0, 1))),
        ),
    )
    assert rep37.splitting is not None and rep37.splitting.doomed
    assert rep37.doomed


def test_sym2_membership_of_known_reductions(toy_data):
    red = reduce_known_divisors(toy_data, 5)[0]
    assert red.key() in {d.key() for d in sym2_enumerate(
        reduce_mod_p(toy_data.curve, 5))}


def test_involution_stability_of_sp(toy_data):
    from lonesieve.curves import matrix_mod_p

    _, sp = build_Hp_Sp(toy_data, 3, EMPTY)
    mat3 = matrix_mod_p(toy_data.involution, 3)
    keys = {d.key() for d in sp}
    for d in sp:
        assert involution_image(d, mat3).key() in keys
