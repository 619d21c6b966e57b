"""Command-line front end.

Subcommands: sieve (full run over a prime list), analyze-splitting
(doom table from field data), lineq (one equivalence decision with a
printable certificate), curve-validate, points, sym2, fixed-points.

Conventions: data goes to stdout, JSON by default with text as a
derived view; logging, real timing included, goes to stderr.  Exit
codes: 0 success, 1 the sieve ran but did not resolve, 2 bad input,
3 violated internal invariant.  Reports carry ms_elapsed = 0 so that
repeated runs are byte-identical; wall-clock timing is log-only.
"""

import argparse
import json
import logging
import os
import re
import sys
import tempfile
import time
from dataclasses import dataclass

from .curves import (
    PlaneCurveModel,
    Place,
    ProjectivePoint,
    enumerate_points,
    form_eval,
    reduce_mod_p,
)
from .divisors import EffectiveDivisor, lin_equiv, sym2_enumerate
from .errors import InputError, LonesieveError
from .fields import get_field, is_prime
from .sieve import (
    LonelyCertificates,
    SieveReport,
    compute_Wp,
    fixed_points_mod_p,
    intersect_and_verdict,
)
from .specio import (
    canonical_json,
    load_curve_spec,
    load_fieldspecs,
    load_lonely,
    load_plane_curve,
    validate_document,
)
from .splitting import doom_range_report, min_split_prime, quadratic_splitting

log = logging.getLogger("lonesieve")

EXIT_OK = 0
EXIT_UNRESOLVED = 1
EXIT_INPUT = 2
EXIT_INVARIANT = 3


@dataclass
class RunConfig:
    """Parsed command line; one instance drives one subcommand."""

    subcommand: str
    curve_path: str | None = None
    lonely_path: str | None = None
    fields_path: str | None = None
    primes: tuple[int, ...] = ()
    prime: int | None = None
    workers: int = 1
    cache_dir: str | None = None
    fmt: str = "json"
    pmax: int = 50
    divisors: tuple[str, ...] = ()
    verbose: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise InputError("worker count must be at least 1")
        self.primes = tuple(self.primes)


def parse_primes(text: str) -> tuple[int, ...]:
    try:
        primes = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError as exc:
        raise InputError(f"bad prime list {text!r}") from exc
    if not primes:
        raise InputError("empty prime list")
    if any(p == 2 for p in primes):
        raise InputError("odd primes required")
    for p in primes:
        if p < 3 or not is_prime(p):
            raise InputError(f"{p} is not an odd prime")
    if len(set(primes)) != len(primes):
        raise InputError("primes must be distinct")
    return tuple(sorted(primes))


def parse_single_prime(p: int) -> int:
    # p = 2 is fine here: only the sieve itself needs odd primes
    if p < 2 or not is_prime(p):
        raise InputError(f"{p} is not prime")
    return p


_TERM_RE = re.compile(
    r"^(?:(\d+)\*)?\((-?\d+):(-?\d+):(-?\d+)\)$"
)


def parse_divisor_literal(text: str, curve_p: PlaneCurveModel) -> EffectiveDivisor:
    """Parse `3*(0:1:0)+(1:0:0)` into a divisor on the reduced curve.

    Coordinates are integers taken mod p; only rational points can be
    written this way, which covers certificate-style inputs.
    """
    K = curve_p.base
    support: dict[Place, int] = {}
    for term in text.replace(" ", "").split("+"):
        m = _TERM_RE.match(term)
        if not m:
            raise InputError(
                f"bad divisor term {term!r}; expected k*(a:b:c) or (a:b:c)"
            )
        mult = int(m.group(1)) if m.group(1) else 1
        if mult < 1:
            raise InputError(f"multiplicity in {term!r} must be positive")
        coords = tuple(K.embed_base(int(m.group(i))) for i in (2, 3, 4))
        if all(K.is_zero(c) for c in coords):
            raise InputError(f"{term!r} is not a projective point")
        pt = ProjectivePoint(K, coords)
        if not K.is_zero(form_eval(curve_p.form, pt.coords, K)):
            raise InputError(f"point {term!r} does not lie on the curve mod {K.p}")
        pl = Place.of_point(pt)
        support[pl] = support.get(pl, 0) + mult
    return EffectiveDivisor(support)


def form_str(form: dict) -> str:
    """Human form of a homogeneous polynomial over a prime field."""
    names = "xyz"
    parts = []
    for exps, coeff in sorted(form.items(), reverse=True):
        mono = "*".join(
            name if e == 1 else f"{name}^{e}"
            for name, e in zip(names, exps)
            if e
        )
        c = coeff if isinstance(coeff, int) else int(coeff)
        if mono:
            parts.append(mono if c == 1 else f"{c}*{mono}")
        else:
            parts.append(str(c))
    return " + ".join(parts) if parts else "0"


def atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(doc, schema_name: str, fmt: str, text_lines=None) -> None:
    validate_document(doc, schema_name)
    if fmt == "json":
        sys.stdout.write(canonical_json(doc))
    else:
        for line in text_lines or ():
            sys.stdout.write(line + "\n")


# ----------------------------------------------------------------- sieve


def _cached_report(cache_dir, digest, p):
    path = os.path.join(cache_dir, f"{digest}-p{p}.json")
    if not os.path.exists(path):
        return None, path
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        validate_document(doc, "report")
        report = SieveReport.from_jsonable(doc)
    except (OSError, ValueError, LonesieveError):
        log.warning("p=%d: cache file unreadable, recomputing", p)
        return None, path
    if report.curve_digest != digest or report.p != p:
        log.warning("p=%d: cache file stale, recomputing", p)
        return None, path
    return report, path


def cmd_sieve(cfg: RunConfig) -> int:
    data = load_curve_spec(cfg.curve_path)
    lonely = (
        load_lonely(cfg.lonely_path)
        if cfg.lonely_path
        else LonelyCertificates.empty()
    )
    digest = data.curve.digest()
    cache_dir = os.environ.get("LONESIEVE_CACHE") or cfg.cache_dir
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
    reports = []
    for p in cfg.primes:
        report = None
        if cache_dir:
            report, path = _cached_report(cache_dir, digest, p)
        if report is not None:
            log.info("p=%d: cache-hit", p)
        else:
            t0 = time.monotonic()
            report = compute_Wp(data, p, lonely, workers=cfg.workers)
            log.info(
                "p=%d: |S_p|=%d W_p=%s computed in %d ms",
                p, report.sp_size, set(report.wp),
                int((time.monotonic() - t0) * 1000),
            )
            if cache_dir:
                atomic_write(path, canonical_json(report.to_jsonable()))
        reports.append(report)
    residues, verdict = intersect_and_verdict(reports)
    doc = {
        "reports": [r.to_jsonable() for r in reports],
        "intersection": list(residues),
        "verdict": verdict,
    }
    lines = []
    for r in reports:
        lines.append(
            f"p={r.p}: sym2={r.sym2_size} lonely={r.hp_size} "
            f"survivors={r.sp_size} Wp={{{','.join(map(str, r.wp))}}} "
            f"unmatched={r.unmatched}"
        )
    lines.append(f"intersection: {{{','.join(map(str, residues))}}}")
    lines.append(f"verdict: {verdict}")
    emit(doc, "sieve_output", cfg.fmt, lines)
    return EXIT_OK if verdict == "resolved" else EXIT_UNRESOLVED


# ------------------------------------------------------------- splitting


def _direct_min_split(qspec, bound=None):
    bound = bound or 40 * abs(qspec.d)
    p = 3
    while p <= bound:
        if is_prime(p) and qspec.d % p != 0:
            if quadratic_splitting(qspec, p) == "split":
                return p
        p += 2
    return None


def cmd_analyze_splitting(cfg: RunConfig) -> int:
    qspec, cspec = load_fieldspecs(cfg.fields_path)
    rr = doom_range_report(qspec, cspec, cfg.pmax)
    if qspec.class_number_one:
        msp = min_split_prime(qspec)
    else:
        msp = _direct_min_split(qspec)
    rows = [
        {
            "p": rep.p,
            "splitting_in_K": rep.splitting_in_K,
            "profile_in_B": None if rep.profile_in_B is None
            else list(rep.profile_in_B),
            "doomed": rep.doomed,
            "reason": rep.reason,
        }
        for rep in rr.reports
    ]
    doc = {
        "pmax": cfg.pmax,
        "rows": rows,
        "min_split_prime": msp,
        "smallest_not_doomed": rr.smallest_not_doomed,
    }
    lines = [f"{'p':>5}  {'K-splitting':<12} {'B-profile':<10} "
             f"{'doomed':<7} reason"]
    for row in rows:
        profile = (
            "-" if row["profile_in_B"] is None
            else ",".join(map(str, row["profile_in_B"]))
        )
        doomed = {True: "yes", False: "no", None: "?"}[row["doomed"]]
        lines.append(
            f"{row['p']:>5}  {row['splitting_in_K']:<12} {profile:<10} "
            f"{doomed:<7} {row['reason']}"
        )
    lines.append(f"min split prime: {msp}")
    lines.append(
        "smallest not doomed: "
        + ("none found" if rr.smallest_not_doomed is None
           else str(rr.smallest_not_doomed))
    )
    emit(doc, "splitting_output", cfg.fmt, lines)
    return EXIT_OK


# ----------------------------------------------------------------- lineq


def cmd_lineq(cfg: RunConfig) -> int:
    curve, _ = load_plane_curve(cfg.curve_path)
    curve_p = reduce_mod_p(curve, cfg.prime)
    a = parse_divisor_literal(cfg.divisors[0], curve_p)
    b = parse_divisor_literal(cfg.divisors[1], curve_p)
    equivalent, cert = lin_equiv(a, b, curve_p)
    doc = {
        "p": cfg.prime,
        "equivalent": equivalent,
        "certificate": cert.to_jsonable() if cert is not None else None,
    }
    if equivalent:
        lines = [
            "true",
            f"certificate: ({form_str(cert.form_through_b)}, "
            f"{form_str(cert.form_through_a)}) at degree {cert.aux_degree}",
        ]
    else:
        lines = ["false"]
    emit(doc, "lineq_output", cfg.fmt, lines)
    return EXIT_OK


# ------------------------------------------------- inspection subcommands


def cmd_curve_validate(cfg: RunConfig) -> int:
    from .specio import curve_from_doc, marked_data_from_doc, read_json_file

    spec = read_json_file(cfg.curve_path)
    validate_document(spec, "curve")
    curve = curve_from_doc(spec)
    marked = "torsion" in spec
    doc = {
        "ok": True,
        "name": spec.get("name"),
        "degree": curve.degree,
        "digest": curve.digest(),
        "marked": marked,
    }
    lines = [
        f"ok: degree {curve.degree} curve"
        + (f" {spec['name']!r}" if "name" in spec else ""),
        f"digest: {curve.digest()}",
    ]
    if marked:
        data = marked_data_from_doc(spec)
        doc["torsion_order"] = data.torsion.order
        doc["known_divisor_labels"] = [kd.label for kd in data.known_divisors]
        doc["fixed_point_labels"] = [fp.label for fp in data.fixed_points]
        doc["assume_rank_zero"] = data.assume_rank_zero
        lines.append(f"marked: involution ok, torsion order {data.torsion.order}")
        lines.append(
            "known divisors: "
            + (", ".join(doc["known_divisor_labels"]) or "(none)")
        )
    else:
        lines.append("marked: no")
    emit(doc, "curve_validate_output", cfg.fmt, lines)
    return EXIT_OK


def cmd_points(cfg: RunConfig) -> int:
    curve, _ = load_plane_curve(cfg.curve_path)
    curve_p = reduce_mod_p(curve, cfg.prime)
    pts = enumerate_points(curve_p, 1)
    doc = {
        "p": cfg.prime,
        "count": len(pts),
        "points": [list(pt.key()) for pt in pts],
    }
    lines = [f"{len(pts)} points on the curve mod {cfg.prime}"]
    lines += [f"({a}:{b}:{c})" for a, b, c in doc["points"]]
    emit(doc, "points_output", cfg.fmt, lines)
    return EXIT_OK


def cmd_sym2(cfg: RunConfig) -> int:
    curve, _ = load_plane_curve(cfg.curve_path)
    curve_p = reduce_mod_p(curve, cfg.prime)
    n = len(enumerate_points(curve_p, 1))
    size = len(sym2_enumerate(curve_p))
    # size = pairs of rational points + places of degree 2
    m = size - n * (n + 1) // 2
    doc = {
        "p": cfg.prime,
        "rational_points": n,
        "quadratic_places": m,
        "size": size,
    }
    lines = [
        f"mod {cfg.prime}: {n} rational points, {m} quadratic places, "
        f"{size} degree-2 divisors"
    ]
    emit(doc, "sym2_output", cfg.fmt, lines)
    return EXIT_OK


def cmd_fixed_points(cfg: RunConfig) -> int:
    data = load_curve_spec(cfg.curve_path)
    fixed, extra = fixed_points_mod_p(data, cfg.prime)
    doc = {
        "p": cfg.prime,
        "count": len(fixed),
        "points": sorted(list(pt.key()) for pt in fixed),
        "extra_beyond_declared": extra,
    }
    lines = [f"{len(fixed)} fixed points mod {cfg.prime}"
             + ("; some not declared" if extra else "")]
    lines += [f"({a}:{b}:{c})" for a, b, c in doc["points"]]
    emit(doc, "fixed_points_output", cfg.fmt, lines)
    return EXIT_OK


# ------------------------------------------------------------ dispatcher

_HANDLERS = {
    "sieve": cmd_sieve,
    "analyze-splitting": cmd_analyze_splitting,
    "lineq": cmd_lineq,
    "curve-validate": cmd_curve_validate,
    "points": cmd_points,
    "sym2": cmd_sym2,
    "fixed-points": cmd_fixed_points,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json",
                        dest="fmt")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="lonesieve",
        description="Linear-equivalence sieve for degree-2 points on plane "
                    "curves, with a prime-splitting doom analyzer.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sieve = sub.add_parser("sieve", parents=[common],
                             help="run the sieve over a prime list")
    p_sieve.add_argument("--curve", required=True)
    p_sieve.add_argument("--primes", required=True)
    p_sieve.add_argument("--lonely")
    p_sieve.add_argument("--workers", type=int, default=1)
    p_sieve.add_argument("--cache")

    p_split = sub.add_parser("analyze-splitting", parents=[common],
                             help="doom table for field data")
    p_split.add_argument("--fields", required=True)
    p_split.add_argument("--pmax", type=int, default=50)

    p_lineq = sub.add_parser("lineq", parents=[common],
                             help="decide linear equivalence of two divisors")
    p_lineq.add_argument("--curve", required=True)
    p_lineq.add_argument("-p", "--prime", type=int, required=True)
    p_lineq.add_argument("divisor_a")
    p_lineq.add_argument("divisor_b")

    for name in ("curve-validate", "points", "sym2", "fixed-points"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--curve", required=True)
        if name != "curve-validate":
            sp.add_argument("-p", "--prime", type=int, required=True)

    return parser


def config_from_args(args) -> RunConfig:
    primes = parse_primes(args.primes) if getattr(args, "primes", None) else ()
    prime = getattr(args, "prime", None)
    if prime is not None:
        prime = parse_single_prime(prime)
    return RunConfig(
        subcommand=args.subcommand,
        curve_path=getattr(args, "curve", None),
        lonely_path=getattr(args, "lonely", None),
        fields_path=getattr(args, "fields", None),
        primes=primes,
        prime=prime,
        workers=getattr(args, "workers", 1),
        cache_dir=getattr(args, "cache", None),
        fmt=args.fmt,
        pmax=getattr(args, "pmax", 50),
        divisors=(
            (args.divisor_a, args.divisor_b)
            if hasattr(args, "divisor_a")
            else ()
        ),
        verbose=args.verbose,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # configure the package logger, not the root: repeated main() calls
    # rebind to the current stderr, and host handlers stay untouched
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("lonesieve: %(message)s"))
    pkg_log = logging.getLogger(__package__)
    pkg_log.handlers[:] = [handler]
    pkg_log.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    try:
        cfg = config_from_args(args)
        return _HANDLERS[cfg.subcommand](cfg)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except LonesieveError as exc:
        log.error("invariant violated: %s", exc)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
