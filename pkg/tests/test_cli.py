import csv
import json
from pathlib import Path

import numpy as np
import pytest

from ris_secrecy import cli
from ris_secrecy import monte_carlo as mc
from ris_secrecy.scenario import default_scenario, parse_scenario

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_JSON = ROOT / "configs" / "default.json"


@pytest.fixture
def small_config(tmp_path):
    data = json.loads(DEFAULT_JSON.read_text())
    data.update(K=2, J=2, N=4, M=4)
    data["layout"]["user_pos"] = data["layout"]["user_pos"][:2]
    path = tmp_path / "small.json"
    path.write_text(json.dumps(data))
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def error_code(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert err.startswith("error kind=")
    return err


def test_default_config_parses():
    sc = parse_scenario(DEFAULT_JSON)
    ref = default_scenario()
    assert (sc.K, sc.J, sc.N, sc.M) == (4, 4, 10, 5)
    assert sc.noise_w == pytest.approx(1e-10)
    np.testing.assert_allclose(sc.layout.eave_pos, ref.layout.eave_pos)
    np.testing.assert_allclose(sc.user_powers, 2.0)


def test_run_writes_header_and_rows(tmp_path, small_config):
    out = tmp_path / "run.csv"
    assert cli.main(["run", "--config", str(small_config), "--trials", "400", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == cli.RUN_HEADER
    assert len(rows) == 1 + 3 * 2
    assert {r[0] for r in rows[1:]} == {"passive", "active", "eh"}
    for r in rows[1:]:
        assert float(r[7]) == pytest.approx(max(0.0, float(r[2]) - float(r[5])))


def test_run_byte_identical_across_threads(tmp_path, small_config, monkeypatch):
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("RIS_SEC_THREADS", threads)
        out = tmp_path / f"run{threads}.csv"
        assert cli.main(["run", "--config", str(small_config), "--mode", "active", "--trials", "600",
                         "--seed", "4", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_run_seed_changes_mc_only(tmp_path, small_config):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path, seed in ((a, "1"), (b, "2")):
        cli.main(["run", "--config", str(small_config), "--mode", "passive", "--trials", "300", "--seed", seed,
                  "--out", str(path)])
    ra, rb = read_rows(a), read_rows(b)
    assert [r[2] for r in ra] == [r[2] for r in rb]
    assert [r[3] for r in ra] != [r[3] for r in rb]


def test_run_explicit_phases(tmp_path, small_config):
    out = tmp_path / "x.csv"
    assert cli.main(["run", "--config", str(small_config), "--mode", "passive", "--plan", "explicit",
                     "--phases", "0,1,2,3", "--trials", "200", "--out", str(out)]) == 0


def test_zero_trials_is_validation_error(tmp_path, small_config, capsys):
    code = cli.main(["run", "--config", str(small_config), "--trials", "0", "--out", str(tmp_path / "r.csv")])
    assert code == cli.EXIT_VALIDATION
    assert "code=4" in error_code(capsys)


def test_empty_config_is_parse_error(tmp_path, capsys):
    cfg = tmp_path / "empty.json"
    cfg.write_text("")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "r.csv")]) == cli.EXIT_PARSE
    assert "kind=parse" in error_code(capsys)


def test_missing_key_is_parse_error(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"K": 1}))
    assert cli.main(["ga", "--config", str(cfg), "--out", str(tmp_path / "g.csv")]) == cli.EXIT_PARSE


def test_bad_phase_list_is_parse_error(tmp_path, small_config):
    code = cli.main(["run", "--config", str(small_config), "--plan", "explicit", "--phases", "a,b",
                     "--trials", "200", "--out", str(tmp_path / "r.csv")])
    assert code == cli.EXIT_PARSE


def test_unwritable_output_is_io_error(tmp_path, small_config, capsys):
    out = tmp_path / "missing-dir" / "r.csv"
    code = cli.main(["run", "--config", str(small_config), "--mode", "passive", "--trials", "200",
                     "--out", str(out)])
    assert code == cli.EXIT_IO
    assert "kind=io" in error_code(capsys)


def test_unknown_figure_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["figure", "rate_vs_nothing", "--out", "x"])
    assert exc.value.code == cli.EXIT_USAGE


def test_defaults_echoed(tmp_path, small_config, capsys):
    cli.main(["select", "--config", str(small_config), "--target", "0.1", "--out", str(tmp_path / "s.csv")])
    assert "defaults applied:" in capsys.readouterr().err


def test_verify_small_grid_passes(tmp_path, capsys):
    out = tmp_path / "v.csv"
    code = cli.main(["verify", "--grid", "small", "--trials", "200000", "--out", str(out)])
    printed = capsys.readouterr().out
    assert code == cli.EXIT_OK, printed
    assert printed.count("PASS") == 2
    assert read_rows(out)[0] == cli.VERIFY_HEADER


def test_verify_flags_corrupted_closed_form(monkeypatch, capsys):
    real = mc.closed_moment_vector

    def corrupted(scenario, plan, angles, mode=None):
        v = real(scenario, plan, angles, mode).copy()
        v[: scenario.K] *= 1.1  # signal moments
        return v

    monkeypatch.setattr(mc, "closed_moment_vector", corrupted)
    code = cli.main(["verify", "--grid", "small", "--kappa", "2", "--trials", "200000"])
    assert code == cli.EXIT_VERIFY
    assert "xi_k" in capsys.readouterr().out


def test_select_outputs_labels(tmp_path):
    out = tmp_path / "s.csv"
    assert cli.main(["select", "--target", "0.1,0.3,0.5,2", "--user-budget", "20", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert rows[0] == cli.SELECT_HEADER
    assert [r[1] for r in rows[1:]] == ["passive", "active", "eh", "infeasible"]
    assert rows[-1][5] == "0"


def test_select_bad_target(tmp_path):
    assert cli.main(["select", "--target", "x", "--out", str(tmp_path / "s.csv")]) == cli.EXIT_PARSE
    assert cli.main(["select", "--target", "-1", "--out", str(tmp_path / "s.csv")]) == cli.EXIT_DOMAIN


def test_ga_command(tmp_path, capsys):
    out, hist = tmp_path / "ga.csv", tmp_path / "h.csv"
    code = cli.main(["ga", "--mode", "active", "--generations", "5", "--population", "8", "--out", str(out),
                     "--history", str(hist)])
    assert code == 0
    res = json.loads(capsys.readouterr().out)
    assert res["ga_sum_rate"] >= res["aligned_sum_rate"]
    assert len(read_rows(out)) == 1 + 5
    assert len(read_rows(hist)) == 1 + 6


def test_figure_closed_form_only(tmp_path, capsys):
    code = cli.main(["figure", "rate_vs_kappa", "--mode", "passive", "--grid", "1,4", "--trials", "0",
                     "--out", str(tmp_path)])
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["rate_vs_kappa_passive.csv", "rate_vs_kappa_passive_ideal.csv"]
    rows = read_rows(tmp_path / "rate_vs_kappa_passive.csv")
    assert rows[0][:2] == ["x", "secrecy_closed"] and rows[1][2] == ""


def test_figure_unsorted_grid(tmp_path):
    code = cli.main(["figure", "rate_vs_N", "--grid", "8,4", "--trials", "0", "--out", str(tmp_path)])
    assert code == cli.EXIT_VALIDATION
