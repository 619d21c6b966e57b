"""JSON documents: parsing, schema validation, canonical serialization.

Every structured input (curve spec, loneliness certificates, splitting
field data) and every document the command-line front end emits is JSON
with a shipped draft 2020-12 schema.  Validation failures surface as
SpecValidationError carrying a pointer to the offending field, so a
malformed file names its own problem.  canonical_json pins key order,
indentation, and the trailing newline: identical runs emit identical
bytes.

Rational numbers travel as JSON integers or as "a/b" strings; exponent
vectors and matrices are plain nested arrays.  See schemas/ for the
authoritative shapes.
"""

import json
from fractions import Fraction
from importlib import resources

from jsonschema import Draft202012Validator
from jsonschema.exceptions import relevance
from referencing import Registry, Resource

from .curves import PlaneCurveModel
from .divisors import TorsionModel
from .errors import InputError, SpecValidationError
from .fields import UnivariatePolynomial
from .sieve import (
    FixedPointDecl,
    KnownDivisor,
    LonelyCertificates,
    MarkedCurveData,
)
from .splitting import CubicFieldSpec, QuadraticFieldSpec

SCHEMA_NAMES = (
    "curve",
    "lonely",
    "fields",
    "report",
    "sieve_output",
    "lineq_output",
    "splitting_output",
    "points_output",
    "sym2_output",
    "fixed_points_output",
    "curve_validate_output",
)

_schemas: dict[str, dict] = {}
_validators: dict[str, Draft202012Validator] = {}


def load_schema(name: str) -> dict:
    if name not in SCHEMA_NAMES:
        raise KeyError(f"no schema named {name!r}")
    if name not in _schemas:
        text = (
            resources.files("lonesieve") / "schemas" / f"{name}.json"
        ).read_text()
        _schemas[name] = json.loads(text)
    return _schemas[name]


def _validator(name: str) -> Draft202012Validator:
    # one shared registry so sieve_output can $ref the report schema
    if name not in _validators:
        registry = Registry().with_resources(
            (f"lonesieve:{other}.json",
             Resource.from_contents(load_schema(other)))
            for other in SCHEMA_NAMES
        )
        _validators[name] = Draft202012Validator(
            load_schema(name), registry=registry
        )
    return _validators[name]


def validate_document(doc, schema_name: str) -> None:
    """Check doc against a shipped schema; raise with a field pointer."""
    errors = sorted(
        _validator(schema_name).iter_errors(doc), key=relevance, reverse=True
    )
    if errors:
        err = errors[0]
        where = "/" + "/".join(str(part) for part in err.absolute_path)
        raise SpecValidationError(f"{schema_name}.json: {where}: {err.message}")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def parse_rational(value) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InputError(f"expected integer or 'a/b' string, got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational literal {value!r}: {exc}") from exc


def read_json_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _point3(triple) -> tuple[Fraction, Fraction, Fraction]:
    return tuple(parse_rational(c) for c in triple)


def curve_from_doc(doc: dict) -> PlaneCurveModel:
    """The bare curve over Q from a validated spec document."""
    form = {}
    for exps, coeff in doc["form"]:
        key = tuple(exps)
        if key in form:
            raise InputError(f"duplicate monomial exponent {list(key)}")
        form[key] = parse_rational(coeff)
    return PlaneCurveModel.rational(form)


def _known_from_doc(entry: dict) -> KnownDivisor:
    if entry["kind"] == "rational_pair":
        return KnownDivisor(
            entry["label"],
            points=tuple(_point3(pt) for pt in entry["points"]),
        )
    return KnownDivisor(
        entry["label"],
        disc=entry["disc"],
        coords=tuple(
            (parse_rational(a), parse_rational(b)) for a, b in entry["coords"]
        ),
    )


def _fixed_from_doc(entry: dict) -> FixedPointDecl:
    return FixedPointDecl(
        entry["label"],
        tuple(entry["minpoly"]),
        tuple(
            tuple(parse_rational(c) for c in coord)
            for coord in entry["coords"]
        ),
    )


def marked_data_from_doc(doc: dict) -> MarkedCurveData:
    if "torsion" not in doc:
        raise InputError(
            "curve spec has no involution/torsion marking; "
            "this subcommand needs a fully marked curve"
        )
    t = doc["torsion"]
    return MarkedCurveData(
        curve=curve_from_doc(doc),
        involution=tuple(
            tuple(parse_rational(c) for c in row) for row in doc["involution"]
        ),
        torsion=TorsionModel(t["order"], _point3(t["c0"]), _point3(t["cinf"])),
        known_divisors=tuple(
            _known_from_doc(e) for e in doc.get("known_divisors", ())
        ),
        fixed_points=tuple(
            _fixed_from_doc(e) for e in doc.get("fixed_points", ())
        ),
        assume_rank_zero=doc.get("assume_rank_zero", True),
        metadata=doc.get("metadata", {}),
    )


def load_plane_curve(path) -> tuple[PlaneCurveModel, dict]:
    doc = read_json_file(path)
    validate_document(doc, "curve")
    return curve_from_doc(doc), doc


def load_curve_spec(path) -> MarkedCurveData:
    doc = read_json_file(path)
    validate_document(doc, "curve")
    return marked_data_from_doc(doc)


def load_lonely(path) -> LonelyCertificates:
    doc = read_json_file(path)
    validate_document(doc, "lonely")
    return LonelyCertificates(
        {int(p): tuple(labels) for p, labels in doc["by_prime"].items()}
    )


def load_fieldspecs(path) -> tuple[QuadraticFieldSpec, CubicFieldSpec | None]:
    doc = read_json_file(path)
    validate_document(doc, "fields")
    qspec = QuadraticFieldSpec(
        doc["quadratic_disc"],
        class_number_one=doc.get("class_number_one", False),
    )
    cspec = None
    if "cubic_minpoly" in doc:
        cspec = CubicFieldSpec(UnivariatePolynomial(doc["cubic_minpoly"]))
    return qspec, cspec
