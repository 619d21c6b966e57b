"""Reproduce the number-theoretic analysis behind the shipped fixtures.

Prints, for each bundled imaginary quadratic field (and the cubic that
goes with -163):

  * the doom table over odd primes up to --pmax,
  * the minimal split prime,
  * the smallest prime the analyzer cannot rule out,

then runs the sieve itself on the toy quartic and, with --full, the
larger mod-41 fixture with the order-27 marked class.
"""
import argparse
import time

from lonesieve.fields import UnivariatePolynomial
from lonesieve.sieve import LonelyCertificates, compute_Wp, intersect_and_verdict
from lonesieve.specio import load_curve_spec
from lonesieve.splitting import (
    CubicFieldSpec,
    QuadraticFieldSpec,
    doom_range_report,
    min_split_prime,
    no_degree_six_check,
)

CASES = (
    (QuadraticFieldSpec(-163, class_number_one=True),
     CubicFieldSpec(UnivariatePolynomial((10, -8, 0, 1)))),
    (QuadraticFieldSpec(-43, class_number_one=True), None),
    (QuadraticFieldSpec(-67, class_number_one=True), None),
)


def splitting_section(pmax: int) -> None:
    for qspec, cspec in CASES:
        cubic = "with cubic data" if cspec else "quadratic side only"
        print(f"\n== d = {qspec.d} ({cubic}) ==")
        rng = doom_range_report(qspec, cspec, pmax)
        for rep in rng.reports:
            profile = (
                "" if rep.profile_in_B is None
                else " profile " + "+".join(map(str, rep.profile_in_B))
            )
            doomed = {True: "doomed", False: "open", None: "undecided"}[rep.doomed]
            print(f"  p={rep.p:<4d} {rep.splitting_in_K:<8s}{profile:<14s}"
                  f" {doomed:<10s} ({rep.reason})")
        print(f"  minimal split prime: {min_split_prime(qspec)}")
        print(f"  smallest not doomed <= {pmax}: {rng.smallest_not_doomed}")
        if cspec is not None:
            ok = no_degree_six_check(qspec, cspec, 1000)
            print(f"  simultaneous inertia impossible up to 1000: {ok}")


def sieve_section(curve_path: str, primes, lonely: LonelyCertificates) -> None:
    data = load_curve_spec(curve_path)
    print(f"\n== sieve on {curve_path} at primes {primes} ==")
    reports = []
    for p in primes:
        t0 = time.monotonic()
        rep = compute_Wp(data, p, lonely)
        dt = time.monotonic() - t0
        print(f"  p={p}: n={rep.n} |sym2|={rep.sym2_size} lonely={rep.hp_size}"
              f" W_p={sorted(rep.wp)} ({dt:.1f}s)")
        reports.append(rep)
    residues, verdict = intersect_and_verdict(reports)
    print(f"  intersection {sorted(residues)} -> verdict: {verdict}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pmax", type=int, default=50)
    ap.add_argument("--full", action="store_true",
                    help="also run the mod-41 fixture (about half a minute)")
    args = ap.parse_args()

    splitting_section(args.pmax)
    sieve_section("tests/data/toy_quartic.json", (3, 5),
                  LonelyCertificates({3: ("Z1",), 5: ("Z1",)}))
    if args.full:
        sieve_section("tests/data/perf_quartic.json", (41,),
                      LonelyCertificates.empty())


if __name__ == "__main__":
    main()
