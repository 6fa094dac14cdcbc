from pathlib import Path

import numpy as np
import pytest

from liebounds.errors import ConfigError
from liebounds.experiments import (ExperimentConfig, ResultTable, becker_bound, fit_loglog_slope,
                                   oszmaniec_bound, our_so_bound, our_symplectic_bound,
                                   our_symplectic_bound_sharp, run_experiment, trotter_elements)
from liebounds.groups import make_group

DATA = Path(__file__).parent / "data"


def _read_csv(path):
    lines = Path(path).read_text().splitlines()
    return lines[0], lines[1].split(","), np.loadtxt(lines[2:], delimiter=",", ndmin=2)


def _assert_matches_golden(table, name):
    prov, cols, data = _read_csv(DATA / name)
    assert prov == f"# {table.provenance}"
    assert tuple(cols) == table.columns
    assert np.allclose(np.array(table.rows, dtype=float), data, rtol=1e-9, atol=1e-12)


def test_so_compare_matches_golden_and_ordering():
    table = run_experiment(ExperimentConfig("so_compare"))
    _assert_matches_golden(table, "so_compare.csv")
    assert np.all(table.column("ours") < table.column("oszmaniec"))


def test_trotter_matches_golden_and_slopes():
    table = run_experiment(ExperimentConfig("trotter_compare"))
    _assert_matches_golden(table, "trotter_compare.csv")
    assert fit_loglog_slope(table, "L", "ours") == pytest.approx(-1.0, abs=0.05)
    assert fit_loglog_slope(table, "L", "becker") == pytest.approx(-0.5, abs=0.05)


def test_runs_are_byte_identical():
    cfg = ExperimentConfig("so_compare", grid=(0.1, 0.5, 1.0))
    assert run_experiment(cfg).to_csv() == run_experiment(cfg).to_csv()


def test_so_bounds_vanish_on_equal_elements():
    spec = make_group("so2m", 2)
    g = spec.exp(0.4 * spec.basis[0])
    assert our_so_bound(2, g, g) == pytest.approx(0.0, abs=1e-12)
    assert oszmaniec_bound(2, g, g) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        oszmaniec_bound(2, 2 * g, g)


def test_symplectic_bounds_positive_and_sharp_is_smaller():
    spec = make_group("sp2m", 1)
    X, Y = -spec.omega, -spec.omega @ np.diag([1.0, -1.0])
    g, h = trotter_elements(1.0, 8, X, Y)
    literal = our_symplectic_bound(g, h, 1, 2.0)
    sharp = our_symplectic_bound_sharp(g, h, 1, 2.0)
    assert 0 < sharp <= literal * (1 + 1e-9)
    assert becker_bound(g, h, 1, 2.0) > 0


def test_text_reading_does_not_converge():
    cfg = ExperimentConfig("trotter_compare", omega_reading="text", grid=(1, 4, 16, 64))
    ours = run_experiment(cfg).column("ours")
    assert ours[-1] > 0.5 * ours[0]


@pytest.mark.parametrize("kwargs", [
    dict(experiment="nope"),
    dict(experiment="so_compare", grid=()),
    dict(experiment="so_compare", grid=(0.2, 0.1)),
    dict(experiment="trotter_compare", grid=(1, 2.5)),
    dict(experiment="trotter_compare", cutoff=8),
    dict(experiment="so_compare", m=0),
    dict(experiment="lorentz_demo", axis=4),
    dict(experiment="lorentz_demo", mass=-1.0),
    dict(experiment="trotter_compare", omega_reading="other"),
])
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


def test_digest_ignores_output_path():
    a = ExperimentConfig("so_compare", output="x.csv")
    b = ExperimentConfig("so_compare", output="y.csv")
    assert a.digest() == b.digest()
    assert a.digest() != ExperimentConfig("so_compare", m=3).digest()


def test_result_table_rejects_bad_rows():
    with pytest.raises(ValueError):
        ResultTable(("a", "b"), ((1.0,),), "p")
    with pytest.raises(ValueError):
        ResultTable(("a",), ((np.nan,),), "p")


def test_lorentz_demo_rows_are_sound():
    table = run_experiment(ExperimentConfig("lorentz_demo", grid=(0.05, 0.2)))
    assert np.all(table.column("exact") <= table.column("bound") + 1e-4)


def test_bound_sweep_experiment():
    cfg = ExperimentConfig("bound_sweep", rep="flo", m=2, cases=10, grid=(0.1, 0.3))
    table = run_experiment(cfg)
    assert np.all(table.column("violations") == 0)
