import csv
import math

import pytest

from excursion_credit import cli
from excursion_credit.config import OUTPUT_DIR_ENV


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "out"))
    return tmp_path / "out"


def _config(tmp_path, body=""):
    f = tmp_path / "run.toml"
    f.write_text(
        "schema_version = 1\nalpha = 0.5\nhorizon = 1.0\nstep = 0.002\nn_paths = 3000\n"
        "maturities = [0.1, 0.5, 1.0]\nlaplace_horizon = 30.0\n" + body
    )
    return str(f)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_price_below_trigger_is_riskless(tmp_path, out):
    assert cli.main(["price", "-c", _config(tmp_path)]) == 0
    rows = _rows(out / "term_structure.csv")
    assert list(rows[0]) == list(cli.PRICE_COLUMNS)
    assert rows[0]["T"] == "0.10000000000000001"
    assert float(rows[0]["price"]) == 1.0 and float(rows[0]["spread"]) == 0.0
    assert rows[0]["method"] == "analytic_t0"
    assert float(rows[2]["survival"]) < float(rows[1]["survival"]) < 1


def test_law_export(tmp_path, out):
    assert cli.main(["law", "-c", _config(tmp_path)]) == 0
    rows = _rows(out / "law.csv")
    assert rows[0] == {"t": "0.125", "cdf": "0"}
    cdf = [float(r["cdf"]) for r in rows]
    assert all(b >= a for a, b in zip(cdf, cdf[1:]))


def test_distress_price(tmp_path, out):
    assert cli.main(["distress-price", "-c", _config(tmp_path), "--age", "0.25", "--span", "1"]) == 0
    (row,) = _rows(out / "distress_price.csv")
    assert float(row["survival"]) == pytest.approx(0.5)
    assert cli.main(["distress-price", "-c", _config(tmp_path), "--age", "0.1", "--span", "1"]) == 2


def test_simulate_and_hazard(tmp_path, out):
    cfg = _config(tmp_path)
    assert cli.main(["simulate", "-c", cfg, "--outcomes"]) == 0
    rows = _rows(out / "simulate.csv")
    assert {r["quantity"] for r in rows} == {"prob_tau_alpha", "prob_tau", "adjustment", "survival", "doob_meyer"}
    assert len(_rows(out / "outcomes.csv")) == 3000
    assert cli.main(["hazard", "-c", cfg]) == 0
    assert len(_rows(out / "hazard.csv")) == 8


def test_validate_small_run(tmp_path, out):
    code = cli.main(["validate", "-c", _config(tmp_path, "hazard_bins = 4\n")])
    rows = _rows(out / "validation.csv")
    assert list(rows[0]) == list(cli.REPORT_COLUMNS)
    failed = [r["quantity"] for r in rows if r["verdict"] == "FAIL"]
    assert code == (1 if failed else 0)
    assert any(r["quantity"].startswith("laplace") for r in rows)


def test_validate_fail_exit_code(tmp_path, out, monkeypatch):
    from excursion_credit import validation

    monkeypatch.setattr(validation, "run_validation",
                        lambda cfg: [validation.ReportRow("x", 1.0, 0.0, 0.1, 0.0, 10.0, "FAIL")])
    assert cli.main(["validate", "-c", _config(tmp_path)]) == 1


def test_config_error_exit_code(tmp_path, out, capsys):
    assert cli.main(["price", "-c", _config(tmp_path, "bogus_key = 3\n")]) == 2
    assert "bogus_key" in capsys.readouterr().err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["frobnicate"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["distress-price", "--age", "nan", "--span", "1"])
    assert e.value.code == 2
    with pytest.raises(ValueError):
        cli.run("frobnicate", None)


def test_cells():
    assert cli._cell(0.1) == "0.10000000000000001"
    assert float(cli._cell(math.pi)) == math.pi
    assert cli._cell(True) == "true" and cli._cell(3) == "3"
