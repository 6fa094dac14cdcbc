"""Figure regenerations, competitor bounds, Trotter words and CSV output.

The competitor formulas (``oszmaniec_bound``, ``becker_bound``) are
evaluated exactly as published and are only used for comparison.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import linalg
from .bounds import EcdSearchConfig, ecd_pure_state_sup, lorentz_state_bound, soundness_sweep
from .errors import BranchFailure, ConfigError, InvalidLog
from .groups import is_member, make_group, named_element
from .lorentz import Wavepacket, boost, rotation
from .metric import distance_best
from .representations import (boson_displacement, boson_ops, flo, metaplectic, spin,
                              su11_sector)

__all__ = [
    "SWEEP_REPRESENTATIONS",
    "oszmaniec_bound",
    "our_so_bound",
    "trotter_word",
    "trotter_elements",
    "becker_bound",
    "our_symplectic_bound",
    "our_symplectic_bound_sharp",
    "fit_loglog_slope",
    "ExperimentConfig",
    "ResultTable",
    "run_experiment",
    "trotter_sandwich",
    "build_representation",
    "EXPERIMENTS",
]

EXPERIMENTS = ("so_compare", "trotter_compare", "bound_sweep", "lorentz_demo")
BOSONIC = ("metaplectic", "su11_sector", "boson_displacement")


# competitor and closed-form bounds


def _check_so(m, *mats):
    spec = make_group("so2m", m)
    for M in mats:
        ok, res = is_member(spec, M)
        if not ok:
            raise ValueError(f"matrix is not in SO({2 * m}) (residual {res:.2e})")
    return spec


def oszmaniec_bound(m: int, g, h) -> float:
    """2m ||g - h||_op, the published diamond bound for fermionic linear optics."""
    _check_so(m, g, h)
    return float(2 * m * linalg.norm(np.asarray(g) - np.asarray(h), "operator"))


def our_so_bound(m: int, g, h) -> float:
    """sqrt(m(2m-1)/2) ||log(g^{-1} h)||_F, or the chordal form when the log fails.

    The chordal form (pi / (2 sqrt 2)) sqrt(m(2m-1)) ||g - h||_F uses
    ||log Q||_F <= (pi/2) ||Q - 1||_F for orthogonal Q.
    """
    spec = _check_so(m, g, h)
    c = np.sqrt(m * (2 * m - 1) / 2)
    try:
        L = linalg.logm_principal(spec.left_quotient(g, h))
        if np.iscomplexobj(L):
            raise InvalidLog("complex logarithm")
        return float(c * linalg.norm(L))
    except (BranchFailure, InvalidLog):
        return float(np.pi / (2 * np.sqrt(2)) * np.sqrt(m * (2 * m - 1))
                     * linalg.norm(np.asarray(g) - np.asarray(h)))


def trotter_word(t: float, L: int, X, Y, omega_reading: str = "caption", omega=None):
    """Words for g = e^{-t(X+Y)} and h = (e^{-tX/L} e^{-tY/L})^L.

    ``omega_reading="text"`` multiplies the product generators by the
    symplectic form, h = (e^{-Omega X t/L} e^{-Omega Y t/L})^L, leaving g
    unchanged.
    """
    if L < 1 or int(L) != L:
        raise ValueError("L must be a positive integer")
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    if omega_reading == "text":
        if omega is None:
            raise ValueError("the text reading needs the symplectic form")
        Xh, Yh = omega @ X, omega @ Y
    elif omega_reading == "caption":
        Xh, Yh = X, Y
    else:
        raise ValueError(f"unknown omega reading {omega_reading!r}")
    g_word = [-t * (X + Y)]
    h_word = [-t * Xh / L, -t * Yh / L] * int(L)
    return g_word, h_word


def trotter_elements(t: float, L: int, X, Y, omega_reading: str = "caption", omega=None):
    """Group matrices g, h of :func:`trotter_word`, with h built by repeated squaring."""
    g_word, h_word = trotter_word(t, 1, X, Y, omega_reading, omega)
    g = linalg.expm(g_word[0])
    step = linalg.expm(h_word[0] / L) @ linalg.expm(h_word[1] / L)
    return g, np.linalg.matrix_power(step, int(L))


def _defect(g, h):
    M = np.linalg.solve(g, h)
    return M, linalg.norm(M, "operator"), linalg.norm(M - np.eye(M.shape[0]))


def becker_bound(g, h, m: int, E: float) -> float:
    """Published bound for symplectic channels, evaluated literally.

    2 sqrt((sqrt6 + sqrt10 + 5 sqrt2 m)(E + 1)) (sqrt(pi/(||M||+1)) + sqrt(2||M||)) sqrt(||M - 1||_2)
    with M = g^{-1} h.
    """
    _, op, defect = _defect(g, h)
    pref = 2 * np.sqrt((np.sqrt(6) + np.sqrt(10) + 5 * np.sqrt(2) * m) * (E + 1))
    return float(pref * (np.sqrt(np.pi / (op + 1)) + np.sqrt(2 * op)) * np.sqrt(defect))


def our_symplectic_bound(g, h, m: int, E: float) -> float:
    """2 sqrt(E + 3m/8) (pi/(||M||+1) + 2||M||) ||M - 1||_2 with M = g^{-1} h."""
    _, op, defect = _defect(g, h)
    return float(2 * np.sqrt(E + 3 * m / 8) * (np.pi / (op + 1) + 2 * op) * defect)


def our_symplectic_bound_sharp(g, h, m: int, E: float, **metric_kwargs) -> float:
    """2 sqrt(E + 3m/8) d_best(g, h), the metric form before the chordal estimate."""
    spec = make_group("sp2m", m)
    return float(2 * np.sqrt(E + 3 * m / 8) * distance_best(spec, g, h, **metric_kwargs).value)


# tables


@dataclass(frozen=True, eq=False)
class ResultTable:
    columns: tuple
    rows: tuple
    provenance: str

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError("row length does not match the header")
            if not all(np.isfinite(v) for v in r):
                raise ValueError("table entries must be finite")

    def column(self, name) -> np.ndarray:
        return np.array([r[self.columns.index(name)] for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        lines = [f"# {self.provenance}", ",".join(self.columns)]
        for r in self.rows:
            lines.append(",".join(_fmt(v) for v in r))
        return "\n".join(lines) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv(), encoding="utf-8")
        return path


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def fit_loglog_slope(table: ResultTable, x_col: str, y_col: str) -> float:
    """Least-squares slope of log y against log x over the upper half of the rows."""
    x, y = table.column(x_col), table.column(y_col)
    if len(x) < 4:
        raise ValueError("need at least 4 rows")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    k = len(x) // 2
    return float(np.polyfit(np.log(x[k:]), np.log(y[k:]), 1)[0])


# configuration


def _default_grid(experiment):
    if experiment == "so_compare":
        return tuple(round(0.05 * k, 10) for k in range(1, 41))
    if experiment == "trotter_compare":
        return tuple(2**k for k in range(11))
    if experiment == "bound_sweep":
        return (0.05, 0.1, 0.2)
    return (0.05, 0.1, 0.2, 0.3)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment run; every field has a default matching the published setup.

    so_compare: m, generators = (base, direction), grid of a values.
    trotter_compare: m, t, generators = (X, Y), grid of L values, energy,
    omega_reading.  bound_sweep: rep with j / m / n / cutoff, grid of
    perturbation scales, cases.  lorentz_demo: mass, sigma, momentum,
    transform (boost or rotation), axis, grid of rapidities or angles.
    """

    experiment: str = "so_compare"
    m: int | None = None
    j: str = "1/2"
    n: int = 0
    rep: str = "spin"
    mass: float = 1.0
    sigma: float = 1.0
    momentum: tuple = (0.0, 0.0, 0.0)
    transform: str = "boost"
    axis: int = 3
    grid: tuple | None = None
    t: float = 1.0
    generators: tuple | None = None
    energy: float = 2.0
    cutoff: int = 64
    cases: int = 200
    seed: int = 0
    omega_reading: str = "caption"
    output: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.m is None:
            object.__setattr__(self, "m", {"so_compare": 2}.get(self.experiment, 1))
        if self.generators is None:
            gens = {"so_compare": ("B21", "B31"), "trotter_compare": ("Omega", "Omega*sigma_x")}
            object.__setattr__(self, "generators", gens.get(self.experiment, ()))
        if self.grid is None:
            object.__setattr__(self, "grid", _default_grid(self.experiment))
        object.__setattr__(self, "grid", tuple(self.grid))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "momentum", tuple(float(p) for p in self.momentum))
        g = np.asarray(self.grid, dtype=float)
        if g.size == 0:
            raise ConfigError("grid must be nonempty")
        if not np.all(np.isfinite(g)) or np.any(np.diff(g) <= 0):
            raise ConfigError("grid must be finite and strictly increasing")
        if self.experiment == "trotter_compare":
            if np.any(g < 1) or np.any(g != np.round(g)):
                raise ConfigError("Trotter grid values must be positive integers")
            object.__setattr__(self, "grid", tuple(int(v) for v in g))
        if self.m < 1:
            raise ConfigError("m must be positive")
        if self.cases < 1:
            raise ConfigError("cases must be positive")
        bosonic = self.experiment == "trotter_compare" or (
            self.experiment == "bound_sweep" and self.rep in BOSONIC)
        if bosonic and self.cutoff < 16:
            raise ConfigError("bosonic experiments need cutoff >= 16")
        if self.omega_reading not in ("caption", "text"):
            raise ConfigError("omega_reading must be caption or text")
        if self.experiment in ("so_compare", "trotter_compare") and len(self.generators) != 2:
            raise ConfigError("this experiment needs exactly two generators")
        if self.transform not in ("boost", "rotation"):
            raise ConfigError("transform must be boost or rotation")
        if self.axis not in (1, 2, 3):
            raise ConfigError("axis must be 1, 2 or 3")
        if len(self.momentum) != 3:
            raise ConfigError("momentum must have three components")
        if not (self.mass > 0 and self.sigma > 0):
            raise ConfigError("mass and sigma must be positive")
        if self.energy < 0:
            raise ConfigError("energy must be non-negative")

    def digest(self) -> str:
        d = asdict(self)
        d.pop("output")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def provenance(self) -> str:
        return f"experiment={self.experiment} config_sha256={self.digest()} seed={self.seed}"


SWEEP_REPRESENTATIONS = (
    ("spin", {"j": "1/2"}), ("spin", {"j": "1"}), ("spin", {"j": "2"}),
    ("flo", {"m": 1}), ("flo", {"m": 2}), ("flo", {"m": 3}),
    ("metaplectic", {"m": 1, "cutoff": 64}),
    ("su11_sector", {"n": 0, "cutoff": 64}), ("su11_sector", {"n": 1, "cutoff": 64}),
    ("su11_sector", {"n": 2, "cutoff": 64}),
    ("boson_displacement", {"m": 1, "cutoff": 64}),
)
"""Representations covered by the soundness sweep, as (name, keyword arguments)."""


def build_representation(rep: str, j="1/2", m: int = 1, n: int = 0, cutoff: int = 64):
    """Representation from a short name: spin, flo, metaplectic, su11_sector, boson_displacement."""
    if rep == "spin":
        return spin(j)
    if rep == "flo":
        return flo(m)
    if rep == "metaplectic":
        return metaplectic(m, cutoff)
    if rep == "su11_sector":
        return su11_sector(n, cutoff)
    if rep == "boson_displacement":
        return boson_displacement(m, cutoff)
    raise ConfigError(f"unknown representation {rep!r}")


def _run_so_compare(cfg: ExperimentConfig):
    spec = make_group("so2m", cfg.m)
    B, D = (named_element(spec, name) for name in cfg.generators)
    g = linalg.expm(B)
    rows = []
    for a in cfg.grid:
        h = linalg.expm(B + a * D)
        rows.append((a, our_so_bound(cfg.m, g, h), oszmaniec_bound(cfg.m, g, h)))
    return ("a", "ours", "oszmaniec"), rows


def _trotter_inputs(cfg: ExperimentConfig):
    spec = make_group("sp2m", cfg.m)
    X, Y = (named_element(spec, name) for name in cfg.generators)
    return spec, X, Y


def _run_trotter(cfg: ExperimentConfig):
    spec, X, Y = _trotter_inputs(cfg)
    rows = []
    for L in cfg.grid:
        g, h = trotter_elements(cfg.t, L, X, Y, cfg.omega_reading, spec.omega)
        rows.append((L, our_symplectic_bound(g, h, cfg.m, cfg.energy),
                     becker_bound(g, h, cfg.m, cfg.energy)))
    return ("L", "ours", "becker"), rows


def _run_bound_sweep(cfg: ExperimentConfig):
    rep = build_representation(cfg.rep, cfg.j, cfg.m, cfg.n, cfg.cutoff)
    rows = []
    for scale in cfg.grid:
        r = soundness_sweep(rep, cfg.cases, cfg.seed, h_scale=scale)
        rows.append((scale, r.max_state_ratio, r.max_channel_ratio, r.violations))
    return ("scale", "max_state_ratio", "max_channel_ratio", "violations"), rows


def _run_lorentz(cfg: ExperimentConfig):
    wp = Wavepacket(cfg.mass, cfg.momentum, cfg.sigma)
    make = boost if cfg.transform == "boost" else rotation
    rows = []
    for x in cfg.grid:
        r = lorentz_state_bound(wp, make(cfg.axis, x), np.eye(4))
        rows.append((x, r.oracle_value, r.bound_value))
    return ("parameter", "exact", "bound"), rows


_RUNNERS = {
    "so_compare": _run_so_compare,
    "trotter_compare": _run_trotter,
    "bound_sweep": _run_bound_sweep,
    "lorentz_demo": _run_lorentz,
}


def run_experiment(config: ExperimentConfig) -> ResultTable:
    """Evaluate the experiment on its grid and write the CSV when ``output`` is set."""
    columns, rows = _RUNNERS[config.experiment](config)
    table = ResultTable(tuple(columns), tuple(tuple(r) for r in rows), config.provenance())
    if config.output:
        table.write(config.output)
    return table


def trotter_sandwich(config: ExperimentConfig | None = None,
                     search: EcdSearchConfig = EcdSearchConfig(restarts=8, nmax=10)) -> ResultTable:
    """Pure-state ECD lower bound against 2 sqrt(E + 3m/8) d_best on the Trotter grid.

    The energy constraint is <H^2> <= E on the metaplectic representation
    truncated at ``cutoff``.  Columns: L, ecd_lower, ecd_bound.
    """
    cfg = config or ExperimentConfig("trotter_compare")
    if cfg.omega_reading != "caption":
        raise ConfigError("the sandwich is defined for the caption reading only")
    spec, X, Y = _trotter_inputs(cfg)
    rep = metaplectic(cfg.m, cfg.cutoff)
    H = boson_ops(cfg.m, cfg.cutoff)["H"]
    H2 = (H @ H).tocsr()
    rows = []
    for L in cfg.grid:
        g_word, h_word = trotter_word(cfg.t, L, X, Y)
        Ug = rep.unitary(g_word)
        step = rep.unitary(h_word[:2])
        W = Ug.conj().T @ np.linalg.matrix_power(step, int(L))
        lower = ecd_pure_state_sup(rep, g_word, h_word, H2, cfg.energy, search, W=W).value
        g, h = trotter_elements(cfg.t, L, X, Y)
        rows.append((L, lower, our_symplectic_bound_sharp(g, h, cfg.m, cfg.energy)))
    return ResultTable(("L", "ecd_lower", "ecd_bound"), tuple(rows),
                       replace(cfg, output=None).provenance() + " table=sandwich")
