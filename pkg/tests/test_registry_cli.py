import json
from decimal import Decimal

import pytest

from hesse_mahler.catalog import CatalogError, cache_catalog, digits_for, load_catalog
from hesse_mahler.cli import main
from hesse_mahler.mpnum import PrecisionContext
from hesse_mahler.registry import (
    UnknownIdError,
    expand_ids,
    parse_printed,
    printed_digits_match,
    registry_ids,
    run,
    table2_rows,
)

REPORT_KEYS = {"id", "lhs", "rhs", "abs_err", "rel_err", "pass", "precision_bits", "wall_ms"}


def test_parse_printed():
    assert parse_printed("15.01873-62.96451i") == (Decimal("15.01873"), Decimal("-62.96451"))
    assert parse_printed("-216.00000") == (Decimal("-216.00000"), Decimal(0))
    assert parse_printed("0.5 + 2.25i") == (Decimal("0.5"), Decimal("2.25"))
    with pytest.raises(ValueError):
        parse_printed("twelve")


def test_printed_digits_match(prec):
    mp = prec.mp
    assert printed_digits_match(mp.mpf("1.234569"), Decimal("1.23456"), mp)
    assert not printed_digits_match(mp.mpf("1.234569"), Decimal("1.23457"), mp)
    assert printed_digits_match(mp.mpf("-2.000009"), Decimal("-2.00000"), mp)
    # exact integers match from either side within noise
    assert printed_digits_match(mp.mpf(-216) + mp.mpf(10) ** -60, Decimal("-216.00000"), mp)
    assert printed_digits_match(mp.mpf(-216) - mp.mpf(10) ** -60, Decimal("-216.00000"), mp)


def test_registry_ids():
    ids = registry_ids()
    assert len(ids) == len(set(ids)) == 16
    for required in ("1.12", "1.18", "1.6", "1.8", "1.9", "thm1.4", "table2", "periods"):
        assert required in ids
    assert expand_ids(["all"]) == ids
    with pytest.raises(UnknownIdError):
        expand_ids(["1.99"])


def test_table_rows():
    rows = table2_rows()
    assert len(rows) == 73
    assert sum(italic for _, _, italic in rows) == 17


def test_run_is_deterministic_apart_from_timing():
    first = [r.as_dict() for r in run(["classpoly", "sturm"], bits=128)]
    second = [r.as_dict() for r in run(["classpoly", "sturm"], bits=128)]
    for d in first + second:
        d.pop("wall_ms")
    assert first == second
    assert all(d["pass"] for d in first)


def test_parallel_run_preserves_order():
    serial = [r.id for r in run(["sturm", "classpoly", "qprefix"], bits=128)]
    parallel = [r.id for r in run(["sturm", "classpoly", "qprefix"], bits=128, jobs=2)]
    assert serial == parallel


def test_cli_json_schema(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["--prec", "128", "run", "classpoly", "--json", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data and all(REPORT_KEYS <= set(d) for d in data)
    assert all(d["precision_bits"] == 128 for d in data)
    assert "passed" in capsys.readouterr().out


def test_cli_csv(capsys):
    assert main(["run", "sturm", "--prec", "128", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("id,lhs,rhs,abs_err,rel_err,pass")
    assert len(lines) == 5


def test_cli_usage_errors(capsys):
    assert main(["run", "nonsense"]) == 2
    assert main(["--prec", "32", "run", "sturm"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["mahler", "cbrt(("]) == 2
    assert main(["lvalue", "F999"]) == 2


def test_cli_mahler_and_domain(capsys):
    assert main(["mahler", "54", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["m3"].startswith("3.8573508371846297882")
    assert out["region"] == "outside"
    assert main(["mahler", "8"]) == 1


def test_cli_lvalue(capsys):
    assert main(["lvalue", "f27", "--prec", "128", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["L2"].startswith("0.87764641804487")


def test_cli_table2(tmp_path):
    path = tmp_path / "t2.csv"
    assert main(["table2", "--prec", "128", "--format", "csv", "--output", str(path)]) == 0
    assert len(path.read_text().strip().splitlines()) == 74


@pytest.fixture(scope="module")
def catalog_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cat") / "catalog.jsonl"
    n = cache_catalog(path, PrecisionContext(128))
    return path, n


def test_catalog_roundtrip(catalog_file, prec128):
    path, n = catalog_file
    rows = load_catalog(path, prec128)
    assert len(rows) == n
    assert all(r.digits == digits_for(prec128) for r in rows)


def test_catalog_detects_tampering(catalog_file, tmp_path, prec128):
    path, _ = catalog_file
    lines = path.read_text().splitlines()
    row = json.loads(lines[5])
    row["h"] += 1
    lines[5] = json.dumps(row)
    bad = tmp_path / "bad.jsonl"
    bad.write_text("\n".join(lines))
    with pytest.raises(CatalogError, match="line 6"):
        load_catalog(bad, prec128)


def test_catalog_detects_wrong_value(catalog_file, tmp_path, prec128):
    path, _ = catalog_file
    rows = [json.loads(l) for l in path.read_text().splitlines()]
    for r in rows:
        r["t_re"] = str(Decimal(r["t_re"]) + 1)
    bad = tmp_path / "wrong.jsonl"
    bad.write_text("\n".join(json.dumps(r) for r in rows))
    with pytest.raises(CatalogError, match="does not match"):
        load_catalog(bad, prec128)


def test_catalog_recomputes_stale_rows(catalog_file):
    path, _ = catalog_file
    hi = PrecisionContext(320)
    rows = load_catalog(path, hi, reverify=0)
    assert all(r.digits == digits_for(hi) for r in rows)


def test_catalog_cli(catalog_file, capsys):
    path, n = catalog_file
    assert main(["catalog", "--load", str(path), "--prec", "128"]) == 0
    assert f"{n} CM points" in capsys.readouterr().out
    assert main(["catalog", "--load", "/nonexistent/catalog.jsonl"]) == 2
