import json
import os
import subprocess
import sys

import pytest

from arithlab.cli import (
    ExperimentConfig,
    UsageError,
    main,
    parse_int,
    parse_int_list,
    parse_rule,
    parse_set,
)
from arithlab.sieve import build_factor_table, eval_mult, set_indicator


def test_parse_numbers():
    assert parse_int("1e6") == 10**6 and parse_int("2^17") == 2**17 and parse_int("10**3") == 1000
    assert parse_int_list("2048..16384") == [2048, 4096, 8192, 16384]
    assert parse_int_list("1,5,1e2") == [1, 5, 100]


def test_parse_sets_and_rules():
    t = build_factor_table(1000)
    S = parse_set("omega:0:2+1")
    assert S.shift == 1 and S.modulus == 2
    assert set_indicator(parse_set("mod:0:2"), t, 4) == 1
    assert set_indicator(parse_set("all+3"), t, 3) == 0
    assert parse_set("omegafrac:0-0.25:0.5").density == 0.5
    f = parse_rule("chi:4:1*liouville")
    assert eval_mult(f, t, 3) == pytest.approx(1.0)
    assert eval_mult(parse_rule("omega_root:4"), t, 6) == pytest.approx(-1.0)
    for bad in ("omega:0", "nonsense", "mod:x:2"):
        with pytest.raises(UsageError):
            parse_set(bad)
    with pytest.raises(UsageError):
        parse_rule("zeta")


def test_config_round_trip():
    cfg = ExperimentConfig("profile", {"set": "omega:0:2", "s": 2, "N": [2048, 4096]}, None, "json", 7, 2)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(UsageError):
        ExperimentConfig.from_json('{"command": "norm", "bogus": 1}')


def _run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main(list(argv) + ["--out", str(out)])
    return code, (out.read_bytes() if out.exists() else None)


def test_csv_output_has_parameter_echo(tmp_path):
    code, data = _run(tmp_path, "profile", "--set", "omega:0:2", "--N", "256,512")
    assert code == 0
    lines = data.decode().splitlines()
    echo = json.loads(lines[0][2:])
    assert echo["command"] == "profile" and echo["params"]["N"] == [256, 512]
    assert lines[1] == "N,norm" and len(lines) == 4
    float(lines[2].split(",")[1])


def test_json_output(tmp_path):
    code, data = _run(tmp_path, "ipk", "--set", "bigomega:0:2", "--k", "2", "--bound", "100", "--format", "json")
    assert code == 0
    doc = json.loads(data)
    assert doc["summary"]["generators"] == [4, 6] and doc["summary"]["validated"] is True
    assert doc["config"]["params"]["k"] == 2


def test_complex_output_split(tmp_path):
    code, data = _run(tmp_path, "lemma-check", "--lemma", "partial", "--N", "1000")
    text = data.decode()
    assert code == 0 and "mean_re" in text and "mean_im" in text and "j" not in text.split("\n", 1)[1]


def test_reproducible_bytes(tmp_path):
    args = ["simulate", "--N", "1000,5000", "--set", "omega:0:2", "--mode", "restricted", "--seed", "11"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    main(args[:-1] + ["12", "--out", str(c)])
    assert c.read_bytes() != a.read_bytes()


def test_run_config_matches_direct_call(tmp_path):
    direct = tmp_path / "direct.json"
    assert main(["density", "--forms", "1,1;1,2", "--set", "omega:0:2", "--N", "100", "--format", "json", "--out", str(direct)]) == 0
    cfg = ExperimentConfig("density", {"forms": "1,1;1,2", "set": "omega:0:2", "N": [100]}, str(tmp_path / "via.json"), "json")
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    assert main(["run", "--config", str(path)]) == 0
    assert (tmp_path / "via.json").read_bytes() == direct.read_bytes()


def test_exit_codes_and_no_partial_files(tmp_path, capsys):
    assert main(["classify"]) == 2
    assert "usage" in capsys.readouterr().err
    code, data = _run(tmp_path, "norm", "--N", "100")
    assert code == 2 and data is None
    code, data = _run(tmp_path, "norm", "--f", "liouville", "--N", "64", "--s", "5")
    assert code == 1 and data is None
    code, data = _run(tmp_path, "sieve", "--N", "10", "--set", "bogus:1")
    assert code == 2 and data is None
    assert main(["nosuchcommand"]) == 2
    assert not [p for p in os.listdir(tmp_path) if p.startswith(".tmp")]


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ARITHLAB_OUTPUT_DIR", str(tmp_path))
    assert main(["distance", "--f", "liouville", "--P", "100,1000"]) == 0
    assert (tmp_path / "distance.csv").exists()


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "arithlab", "sieve", "--N", "100", "--mode", "table", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    rows = out.read_text().splitlines()
    assert rows[1] == "n,spf,omega,bigomega,liouville,mobius"
    assert rows[2 + 11] == "12,2,2,3,-1,0"
