import subprocess
import sys

import pytest

from liebounds.cli import main


def test_metric_su2(capsys):
    assert main(["metric", "--group", "su2", "--g", "0.3,0,0", "--h", "0,0,0"]) == 0
    out = capsys.readouterr().out
    assert "value=" in out


def test_nelson_spin(capsys):
    assert main(["nelson", "--rep", "spin", "--j", "1", "--improved"]) == 0
    assert "improved_available=True" in capsys.readouterr().out


def test_nelson_improved_unavailable(capsys):
    assert main(["nelson", "--rep", "metaplectic", "--cutoff", "24", "--improved"]) == 0
    assert "improved_available=False" in capsys.readouterr().out


@pytest.mark.parametrize("kind", ["state", "channel"])
def test_bound_kinds(kind, capsys):
    code = main(["bound", "--rep", "spin", "--j", "1", "--g", "0.2,0.1,0", "--h", "0,0,0",
                 "--kind", kind, "--state", "random:3"])
    assert code == 0
    assert f"kind={kind}" in capsys.readouterr().out


def test_bound_ecd(capsys):
    code = main(["bound", "--rep", "spin", "--j", "1", "--g", "0.5,0,0", "--h", "0,0,0",
                 "--kind", "ecd", "--energy", "2", "--restarts", "3"])
    assert code == 0
    assert "oracle_kind=pure_state_lower_bound" in capsys.readouterr().out


def test_bad_budget_is_config_error(capsys):
    code = main(["bound", "--rep", "metaplectic", "--m", "1", "--cutoff", "32", "--g", "0.1,0,0",
                 "--h", "0,0,0", "--kind", "ecd", "--energy", "0.01"])
    assert code == 2


def test_bad_state_spec():
    assert main(["bound", "--rep", "spin", "--g", "0.1,0,0", "--h", "0,0,0", "--state", "x:1"]) == 2


def test_config_file_overrides_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ngroup = so2m\nm = 2\ng = 0.1,0,0,0,0,0\nh = 0,0,0,0,0,0\n")
    assert main(["metric", "--config", str(cfg)]) == 0
    assert "so2m" in capsys.readouterr().out


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = red\n")
    assert main(["metric", "--config", str(cfg)]) == 2


def test_so_compare_writes_csv(capsys):
    assert main(["so-compare", "--grid", "0.1,0.2,0.3"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "a,ours,oszmaniec"


def test_trotter_rejects_fractional_grid():
    assert main(["trotter", "--grid", "1,2.5"]) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "liebounds", "metric", "--g", "0.1,0,0", "--h", "0,0,0"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "value=" in r.stdout
