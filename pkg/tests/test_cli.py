"""Command-line front end and the JSON document layer behind it."""

import json
import logging
from fractions import Fraction

import pytest

from lonesieve.cli import (
    atomic_write,
    emit,
    main,
    parse_divisor_literal,
    parse_primes,
    parse_single_prime,
)
from lonesieve.errors import InputError, SpecValidationError
from lonesieve.sieve import SieveReport
from lonesieve.specio import (
    canonical_json,
    curve_from_doc,
    load_curve_spec,
    load_fieldspecs,
    load_lonely,
    load_plane_curve,
    parse_rational,
    validate_document,
)


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# ------------------------------------------------------------ document layer


def test_parse_rational():
    assert parse_rational(3) == Fraction(3)
    assert parse_rational("-3/4") == Fraction(-3, 4)
    for bad in (True, "3/0", "x", 1.5):
        with pytest.raises(InputError):
            parse_rational(bad)


def test_validation_error_carries_pointer():
    with pytest.raises(SpecValidationError) as exc:
        validate_document({"name": "k", "form": "nope"}, "curve")
    assert "curve.json: /form" in str(exc.value)


def test_canonical_json_is_stable():
    a = canonical_json({"b": 1, "a": [2, 3]})
    b = canonical_json({"a": [2, 3], "b": 1})
    assert a == b and a.endswith("\n")


def test_duplicate_monomial_rejected():
    doc = {"name": "dup", "form": [[[4, 0, 0], 1], [[4, 0, 0], 2]]}
    with pytest.raises(InputError):
        curve_from_doc(doc)


def test_load_curve_spec(data_dir):
    data = load_curve_spec(data_dir / "toy_quartic.json")
    assert data.torsion.order == 5
    assert sorted(data.known_by_label()) == ["Z1"]
    assert len(data.fixed_points) == 3
    # a bare curve has no marking to load
    with pytest.raises(InputError):
        load_curve_spec(data_dir / "klein.json")


def test_load_lonely(data_dir):
    lonely = load_lonely(data_dir / "lonely_toy.json")
    assert lonely.labels_for(3) == ("Z1",)
    assert lonely.labels_for(7) == ()


def test_load_fieldspecs(data_dir):
    qspec, cspec = load_fieldspecs(data_dir / "fields_163.json")
    assert qspec.d == -163 and qspec.class_number_one
    assert cspec is not None and cspec.g.degree == 3
    qspec43, none = load_fieldspecs(data_dir / "fields_43.json")
    assert qspec43.d == -43 and none is None


def test_emit_validates_before_writing(capsys):
    with pytest.raises(SpecValidationError):
        emit({"bad": 1}, "report", "json")
    assert capsys.readouterr().out == ""


# ----------------------------------------------------------------- arg layer


def test_parse_primes():
    assert parse_primes("5,3") == (3, 5)
    for bad in ("2,3", "4", "3,3", "", "3,x"):
        with pytest.raises(InputError):
            parse_primes(bad)
    assert parse_single_prime(2) == 2
    with pytest.raises(InputError):
        parse_single_prime(9)


def test_parse_divisor_literal(klein2):
    d = parse_divisor_literal("3*(1:0:0)+(0:0:1)", klein2)
    assert d.degree == 4
    with pytest.raises(InputError):
        parse_divisor_literal("(1:1:1)", klein2)  # not on the curve
    with pytest.raises(InputError):
        parse_divisor_literal("bogus", klein2)


# -------------------------------------------------------------- subcommands


def test_curve_validate(data_dir, capsys):
    code, out, _ = run(["curve-validate", "--curve", data_dir / "klein.json"],
                       capsys)
    assert code == 0
    doc = json.loads(out)
    validate_document(doc, "curve_validate_output")
    assert doc["ok"] and doc["degree"] == 4 and not doc["marked"]
    code, out, _ = run(
        ["curve-validate", "--curve", data_dir / "toy_quartic.json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["marked"] and doc["torsion_order"] == 5


def test_points(data_dir, capsys):
    code, out, _ = run(
        ["points", "--curve", data_dir / "klein.json", "-p", "2"], capsys)
    assert code == 0
    doc = json.loads(out)
    validate_document(doc, "points_output")
    assert doc["count"] == 3 and len(doc["points"]) == 3


def test_sym2_counts(data_dir, capsys):
    code, out, _ = run(
        ["sym2", "--curve", data_dir / "toy_quartic.json", "-p", "3"], capsys)
    assert code == 0
    doc = json.loads(out)
    validate_document(doc, "sym2_output")
    n, m = doc["rational_points"], doc["quadratic_places"]
    assert doc["size"] == n * (n + 1) // 2 + m == 24


def test_fixed_points(data_dir, capsys):
    code, out, _ = run(
        ["fixed-points", "--curve", data_dir / "toy_quartic.json", "-p", "3"],
        capsys)
    assert code == 0
    doc = json.loads(out)
    validate_document(doc, "fixed_points_output")
    assert doc["count"] == 2 and not doc["extra_beyond_declared"]


def test_lineq_text(data_dir, capsys):
    argv = ["lineq", "--curve", data_dir / "klein.json", "-p", "2",
            "3*(1:0:0)+(0:0:1)", "3*(0:1:0)+(1:0:0)", "--format", "text"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out == "true\ncertificate: (z, y) at degree 1\n"
    argv[5:7] = ["(0:0:1)", "(0:1:0)"]
    code, out, _ = run(argv, capsys)
    assert code == 0 and out == "false\n"


def test_lineq_json(data_dir, capsys):
    code, out, _ = run(
        ["lineq", "--curve", data_dir / "klein.json", "-p", "2",
         "3*(1:0:0)+(0:0:1)", "3*(0:1:0)+(1:0:0)"], capsys)
    assert code == 0
    doc = json.loads(out)
    validate_document(doc, "lineq_output")
    assert doc["equivalent"] and doc["certificate"] is not None


def test_lineq_degree_mismatch(data_dir, capsys):
    code, out, _ = run(
        ["lineq", "--curve", data_dir / "klein.json", "-p", "2",
         "(0:0:1)", "3*(0:1:0)+(1:0:0)"], capsys)
    assert code == 2 and out == ""


def test_analyze_splitting(data_dir, capsys):
    code, out, _ = run(
        ["analyze-splitting", "--fields", data_dir / "fields_163.json",
         "--pmax", "45"], capsys)
    assert code == 0
    doc = json.loads(out)
    validate_document(doc, "splitting_output")
    assert doc["min_split_prime"] == 41
    assert doc["smallest_not_doomed"] == 41
    assert all(r["doomed"] for r in doc["rows"] if r["p"] < 41)


def test_analyze_splitting_quadratic_only(data_dir, capsys):
    code, out, _ = run(
        ["analyze-splitting", "--fields", data_dir / "fields_43.json",
         "--pmax", "12", "--format", "text"], capsys)
    assert code == 0
    assert "11" in out  # the split prime shows up in the footer


# ------------------------------------------------------------ sieve command


def test_sieve_cache_and_determinism(data_dir, tmp_path, capsys, caplog):
    cache = tmp_path / "cache"
    argv = ["sieve", "--curve", data_dir / "toy_quartic.json",
            "--primes", "3,5", "--lonely", data_dir / "lonely_toy.json",
            "--cache", cache]
    with caplog.at_level(logging.INFO):
        code, out1, _ = run(argv, capsys)
    assert code == 1  # honest failure: residues beyond 0 survive
    doc = json.loads(out1)
    validate_document(doc, "sieve_output")
    assert doc["verdict"] == "failed" and 1 in doc["intersection"]
    assert all(r["ms_elapsed"] == 0 for r in doc["reports"])
    files = sorted(f.name for f in cache.iterdir())
    assert len(files) == 2 and files[0].endswith("-p3.json")

    caplog.clear()
    with caplog.at_level(logging.INFO):
        code, out2, _ = run(argv, capsys)
    assert code == 1 and out2 == out1
    assert caplog.text.count("cache-hit") == 2

    code, out3, _ = run(argv + ["--workers", "2"], capsys)
    assert out3 == out1


def test_sieve_recovers_from_garbage_cache(data_dir, tmp_path, capsys,
                                           caplog):
    digest = load_curve_spec(data_dir / "toy_quartic.json").curve.digest()
    cache = tmp_path
    (cache / f"{digest}-p3.json").write_text("{]")
    with caplog.at_level(logging.WARNING):
        code, out, _ = run(
            ["sieve", "--curve", data_dir / "toy_quartic.json",
             "--primes", "3", "--cache", cache], capsys)
    assert code == 1
    assert "recomputing" in caplog.text
    # the bad file was replaced by a valid report
    doc = json.loads((cache / f"{digest}-p3.json").read_text())
    validate_document(doc, "report")


def test_sieve_env_overrides_cache_flag(data_dir, tmp_path, capsys,
                                        monkeypatch):
    env_dir = tmp_path / "env"
    flag_dir = tmp_path / "flag"
    monkeypatch.setenv("LONESIEVE_CACHE", str(env_dir))
    code, _, _ = run(
        ["sieve", "--curve", data_dir / "toy_quartic.json", "--primes", "3",
         "--cache", flag_dir], capsys)
    assert code == 1
    assert len(list(env_dir.iterdir())) == 1
    assert not flag_dir.exists()


def test_sieve_resolved_exit_zero(data_dir, tmp_path, capsys):
    """Preloaded reports whose residue sets meet in {0} only."""
    data = load_curve_spec(data_dir / "toy_quartic.json")
    digest = data.curve.digest()
    for p, wp in ((3, (0, 1, 4)), (5, (0, 2, 3))):
        rep = SieveReport(
            p=p, n=5, sym2_size=10, hp_size=0, sp_size=10, wp=wp,
            witnesses={r: 1 for r in wp}, assumption_rank_zero=True,
            curve_digest=digest,
        )
        atomic_write(str(tmp_path / f"{digest}-p{p}.json"),
                     canonical_json(rep.to_jsonable()))
    code, out, _ = run(
        ["sieve", "--curve", data_dir / "toy_quartic.json",
         "--primes", "3,5", "--cache", tmp_path], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "resolved" and doc["intersection"] == [0]


def test_sieve_rejects_even_prime(data_dir, capsys, caplog):
    with caplog.at_level(logging.ERROR):
        code, out, _ = run(
            ["sieve", "--curve", data_dir / "toy_quartic.json",
             "--primes", "2,3"], capsys)
    assert code == 2 and out == ""
    assert "odd primes required" in caplog.text


def test_input_errors_exit_two(data_dir, tmp_path, capsys):
    code, out, _ = run(
        ["curve-validate", "--curve", tmp_path / "missing.json"], capsys)
    assert code == 2 and out == ""
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    assert run(["curve-validate", "--curve", bad], capsys)[0] == 2
    bad.write_text('{"name": 3}')
    assert run(["curve-validate", "--curve", bad], capsys)[0] == 2
