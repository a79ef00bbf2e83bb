import json
import subprocess
import sys

import pytest

from prismhiggs.cli import CHECKS, main
from prismhiggs.higgs import bk_twist_module
from prismhiggs.modfile import dump_module, dump_stratification, load_module, load_stratification
from prismhiggs.rings import PrimeConfig, make_base_ring
from prismhiggs.stratification import build_stratification, family_from_operators, raw_stratification


@pytest.fixture
def twist_file(tmp_path):
    cfg = PrimeConfig(3, 6, (-3, 1))
    R = make_base_ring(cfg)
    path = tmp_path / "bk_twist_1.json"
    dump_module(cfg, bk_twist_module(1, R), path)
    return path


@pytest.fixture
def ramified_file(tmp_path):
    path = tmp_path / "m2_ram.toml"
    path.write_text(
        "p = 3\nN = 6\nE = [-3, 0, 1]\nd = 1\nrank = 2\n"
        "theta = [ [[0, 1], [0, 0]] ]\nphi = [[0, 0], [0, [0, 2]]]\n"
    )
    return path


def run_cli(*argv):
    return main(list(argv))


def test_verify_twist_passes(twist_file, capsys):
    assert run_cli("verify", "--in", str(twist_file)) == 0
    assert "cocycle-condition" in capsys.readouterr().out


def test_verify_ramified_module(ramified_file):
    assert run_cli("verify", "--in", str(ramified_file)) == 0


def test_stratify_and_cocycle_roundtrip(ramified_file, tmp_path, capsys):
    out = tmp_path / "eps.txt"
    assert run_cli("stratify", "--in", str(ramified_file), "--degree", "4", "--out", str(out)) == 0
    assert run_cli("cocycle", "--in", str(out)) == 0
    # the dump parses back to the same stratification
    cfg, ring, s = load_stratification(out)
    cfg2, ring2, m = load_module(ramified_file)
    s2 = build_stratification(m, 4)
    assert s.eps().eq(s2.eps())


def test_cocycle_broken_exits_1(tmp_path, capsys):
    cfg = PrimeConfig(3, 6, (-3, 1))
    R = make_base_ring(cfg)
    from prismhiggs.generators import mutate_theta
    import numpy as np

    theta, phi = mutate_theta(np.random.default_rng(0), R)
    fam = family_from_operators(R, 3, 2, theta, phi, 20, 4)
    s = raw_stratification(R, 3, 2, 4, fam)
    path = tmp_path / "broken.txt"
    dump_stratification(s, path)
    assert run_cli("cocycle", "--in", str(path)) == 1
    out = capsys.readouterr().out
    assert "witness" in out


def test_schema_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"p": 3, "N": 6, "E": [-3, 1], "d": 0, "rank": 1, "theta": []}))
    assert run_cli("verify", "--in", str(bad)) == 2
    bad2 = tmp_path / "bad2.json"
    bad2.write_text(json.dumps({"p": 3, "N": 6, "E": [-1, 1], "d": 0, "rank": 1, "theta": [], "phi": [[0]]}))
    assert run_cli("verify", "--in", str(bad2)) == 2
    assert run_cli("verify", "--in", str(tmp_path / "missing.json")) == 2


def test_sen_galois_cech_roundtrip_commands(twist_file, ramified_file):
    assert run_cli("sen", "--in", str(twist_file), "--nmax", "3") == 0
    assert run_cli("galois", "--in", str(ramified_file), "--trials", "6") == 0
    assert run_cli("cech", "--in", str(twist_file)) == 0
    assert run_cli("cohomology", "--in", str(twist_file), "--enhanced") == 0
    assert run_cli("roundtrip", "--in", str(ramified_file)) == 0


def test_json_reports_deterministic(twist_file, capsys):
    run_cli("sen", "--in", str(twist_file), "--json")
    first = capsys.readouterr().out
    run_cli("sen", "--in", str(twist_file), "--json")
    second = capsys.readouterr().out
    assert first == second
    rep = json.loads(first)
    assert rep["schema"] == "prismhiggs-report/1"
    assert rep["status"] == "pass"


def test_selftest_list_manifest_unique(capsys):
    assert run_cli("selftest", "--list") == 0
    out = capsys.readouterr().out.strip().splitlines()
    ids = [line.split()[0] for line in out]
    assert len(ids) == len(set(ids))
    assert set(line.split()[1] for line in out) <= {
        "verify", "stratify", "cocycle", "cohomology", "cech", "sen", "galois", "roundtrip", "selftest",
    }
    assert len(CHECKS) == len(ids)


def test_selftest_small_deterministic(capsys):
    code = run_cli("selftest", "--seed", "7", "--trials", "10", "--prime", "3", "--json")
    first = capsys.readouterr().out
    assert code == 0
    run_cli("selftest", "--seed", "7", "--trials", "10", "--prime", "3", "--json")
    assert capsys.readouterr().out == first
