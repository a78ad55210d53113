import csv
import io
import json

import pytest

from korobov_ibc.cli import main

UNIT = {"alpha": {"kind": "const", "value": 0}, "beta": {"kind": "const", "value": 1},
        "sigma": {"kind": "const", "value": 2}}
KZ2 = {"alpha": {"kind": "const", "value": 0}, "beta": {"kind": "power", "c": 1, "s": 0.5},
       "sigma": {"kind": "power", "c": 1, "s": -1, "shift": 1}}


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_spectrum_rows(capsys, files):
    code, out, _ = run(capsys, "spectrum", "--family", files("f.json", UNIT), "--d", "2", "--top", "4")
    assert code == 0
    r = rows(out)
    assert len(r) == 4 and r[0]["value"] == "1" and r[2]["j"] == "2"


def test_spectrum_top_zero(capsys, files):
    code, out, _ = run(capsys, "spectrum", "--family", files("f.json", UNIT), "--d", "2", "--top", "0")
    assert code == 0 and out == "rank,value,kind,j,k,parity\n"


def test_invalid_family_exit_two(capsys, files):
    bad = dict(UNIT, beta={"kind": "const", "value": 2})
    code, _, err = run(capsys, "spectrum", "--family", files("b.json", bad), "--d", "1")
    assert code == 2 and "beta_range" in err


def test_complexity_row(capsys, files):
    code, out, _ = run(capsys, "complexity", "--family", files("f.json", UNIT),
                       "--d", "1", "--eps", "0.95", "--crit", "abs")
    assert code == 0
    r, = rows(out)
    assert r["n"] == "4" and r["certified"] == "true" and r["criterion"] == "ABS"


def test_complexity_grid_order_and_empty(capsys, files):
    fam = files("f.json", UNIT)
    code, out, _ = run(capsys, "complexity", "--family", fam, "--d", "1", "2", "--eps", "0.5", "0.9")
    assert [(r["d"], r["eps"]) for r in rows(out)] == [("1", "0.5"), ("1", "0.9"), ("2", "0.5"), ("2", "0.9")]
    code, out, _ = run(capsys, "complexity", "--family", fam, "--d", "--eps", "0.5")
    assert code == 0 and out == "d,eps,criterion,n,certified,n_lo,n_hi\n"


def test_complexity_eps_one_rejected(capsys, files):
    code, _, _ = run(capsys, "complexity", "--family", files("f.json", UNIT), "--d", "1",
                     "--eps", "1", "--crit", "nor")
    assert code == 2


def test_json_format(capsys, files):
    code, out, _ = run(capsys, "complexity", "--family", files("f.json", UNIT), "--d", "1",
                       "--eps", "0.5", "--format", "json")
    data = json.loads(out)
    assert data[0]["n"] == 4 and data[0]["certified"] is True


def test_config_and_unknown_keys(capsys, files, tmp_path):
    fam = files("f.json", UNIT)
    cfg = files("c.json", {"family": fam, "d": [1], "eps": [0.95], "crit": "abs"})
    code, out, _ = run(capsys, "complexity", "--config", cfg)
    assert code == 0 and rows(out)[0]["n"] == "4"
    cfg = files("c2.json", {"family": fam, "d": [1], "eps": [0.95], "epsilon": 0.1})
    code, _, err = run(capsys, "complexity", "--config", cfg)
    assert code == 2 and "epsilon" in err


def test_range_checks(capsys, files):
    fam = files("f.json", UNIT)
    assert run(capsys, "complexity", "--family", fam, "--d", "0", "--eps", "0.5")[0] == 2
    assert run(capsys, "complexity", "--family", fam, "--d", "1", "--eps", "0.5", "--tol", "-1")[0] == 2
    assert run(capsys, "spectrum", "--family", fam, "--d", "1", "--threads", "0")[0] == 2
    assert run(capsys, "spectrum", "--d", "1")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_tractability_json(capsys, files):
    fam = files("p.json", {"alpha": {"kind": "const", "value": 0},
                           "beta": {"kind": "power", "c": 1, "s": 2},
                           "sigma": {"kind": "const", "value": 3}})
    code, out, _ = run(capsys, "tractability", "--family", fam, "--crit", "abs")
    v = json.loads(out)["verdict"]
    assert code == 0 and v["spt"] is True and v["exponent"] == 2


def test_tractability_constant_beta(capsys, files):
    code, out, _ = run(capsys, "tractability", "--family", files("f.json", UNIT))
    v = json.loads(out)["verdict"]
    assert v["spt"] is False and v["pt"] is True


def test_tractability_table_flagged(capsys, files):
    tab = dict(UNIT, beta={"kind": "table", "values": [1.0, 0.25, 0.1, 0.05]},
               sigma={"kind": "const", "value": 3})
    code, out, _ = run(capsys, "tractability", "--family", files("t.json", tab), "--probe", "2", "4")
    data = json.loads(out)
    assert data["heuristic"] is True
    assert data["verdict"]["a_star"]["provenance"] == "empirical"


def test_tractability_scan_csv(capsys, files):
    fam = files("n.json", {"alpha": {"kind": "const", "value": 1},
                           "beta": {"kind": "power", "c": 1, "s": 0.5},
                           "sigma": {"kind": "const", "value": 2}})
    code, out, _ = run(capsys, "tractability", "--family", fam, "--crit", "nor", "--tau", "0.75",
                       "--format", "csv")
    r, = rows(out)
    assert r["bounded"] == "true" and r["rule"] == "plateau"


def test_asymptotics_commands(capsys, files):
    fam = files("k.json", KZ2)
    code, out, _ = run(capsys, "asymptotics", "--family", fam, "--d", "100", "1000", "--eps", "0.6")
    assert code == 0
    r = rows(out)
    assert list(r[0]) == ["d", "n_computed", "n_predicted", "ratio"]
    assert abs(float(r[1]["ratio"]) - 1) < abs(float(r[0]["ratio"]) - 1)
    code, out, _ = run(capsys, "asymptotics", "--family", files("u.json", UNIT), "--d", "10", "--eps", "0.5")
    assert code == 0 and rows(out)[0]["applicable"] == "false"
    bad = dict(KZ2, alpha={"kind": "power", "c": 2, "s": 0.5})  # r = 2, eps0 = 0.707
    code, _, _ = run(capsys, "asymptotics", "--family", files("r.json", bad), "--d", "10", "--eps", "0.8")
    assert code == 2


def test_check_command(capsys):
    code, out, _ = run(capsys, "check", "--cases", "6")
    rep = json.loads(out)
    assert code == 0 and rep["pass"] and rep["mismatches"] == 0
    code, out, _ = run(capsys, "check", "--cases", "6", "--inject-fault")
    assert json.loads(out)["pass"] is False
    code, out, _ = run(capsys, "check", "--cases", "6", "--inject-fault", "--strict")
    assert code == 3
    assert run(capsys, "check", "--d-max", "9")[0] == 2


def test_verify_mc_command(capsys, files, tmp_path):
    fam = files("f.json", UNIT)
    code, out, _ = run(capsys, "verify-mc", "--family", fam, "--d", "1", "--samples", "3000")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert set(rep) == {"family", "d", "K", "n", "samples", "empirical", "analytic_lo",
                        "analytic_hi", "std_error", "pass"}
    assert run(capsys, "verify-mc", "--family", fam, "--samples", "0")[0] == 2


def test_byte_identical_output(capsys, files, tmp_path):
    fam = files("f.json", UNIT)
    outs = []
    for i in range(2):
        path = tmp_path / f"o{i}.json"
        code = main(["verify-mc", "--family", fam, "--d", "2", "--samples", "2500",
                     "--seed", "42", "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_float_rendering(capsys, files):
    code, out, _ = run(capsys, "spectrum", "--family", files("f.json", UNIT), "--d", "1", "--top", "6")
    assert rows(out)[4]["value"] == format(1 / 9, ".15g")
