"""Command-line interface: metric, nelson, bound, so-compare, trotter, lorentz.

Every subcommand accepts ``--config FILE`` with flat ``key = value`` lines
naming any of its long flags; flags given on the command line win.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 an oracle exceeded a bound.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bounds import (EcdSearchConfig, channel_trace_bound, ecd_bound, ecd_pure_state_sup,
                     laplacian_budget, state_bound)
from .errors import (BranchFailure, ConfigError, InvalidEnergyBudget, InvalidLog, LieBoundsError,
                     LocalRegimeViolation, NoDecomposition, NotApplicable, NotAvailable,
                     QuadratureError)
from .experiments import (ExperimentConfig, build_representation, fit_loglog_slope,
                          run_experiment, trotter_sandwich)
from .groups import GROUP_IDS, make_group
from .metric import distance_best, distance_closed_form, distance_log_bound, distance_refined
from .nelson import certify_energy_operator, improved_k, nelson_basis_sum, nelson_closed_form, valid_block
from .representations import fock_state, load_state, random_state

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_UNSOUND = 0, 2, 3, 4
REPS = ("spin", "flo", "metaplectic", "su11_sector", "boson_displacement")
NUMERIC_ERRORS = (QuadratureError, NoDecomposition, BranchFailure, InvalidLog, NotApplicable,
                  np.linalg.LinAlgError, OverflowError)


def _floats(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _emit(record: dict) -> None:
    for k, v in record.items():
        print(f"{k}={v:.17g}" if isinstance(v, float) else f"{k}={v}")


def _add_rep_flags(p):
    p.add_argument("--rep", choices=REPS, default="spin")
    p.add_argument("--j", default="1/2", help="spin label, e.g. 1/2 or 2")
    p.add_argument("--m", type=int, default=1, help="number of modes or so(2m) rank")
    p.add_argument("--n", type=int, default=0, help="SU(1,1) sector label")
    p.add_argument("--cutoff", type=int, default=64)


def _element(spec, coords):
    if not coords:
        return spec.zero()
    if len(coords) != spec.dim:
        raise ConfigError(f"{spec.label} needs {spec.dim} coordinates, got {len(coords)}")
    return spec.from_coords(np.asarray(coords))


# subcommands


def cmd_metric(args) -> int:
    spec = make_group(args.group, args.m)
    X, Y = _element(spec, args.g), _element(spec, args.h)
    g, h = spec.product_of_exps([X]), spec.product_of_exps([Y])
    method = {"best": distance_best, "closed": distance_closed_form,
              "log": distance_log_bound, "refined": distance_refined}[args.method]
    kwargs = {"segments": args.segments} if args.method in ("best", "refined") else {}
    res = method(spec, g, h, **kwargs)
    _emit({"group": spec.label, "value": res.value, "kind": res.kind,
           "certified_exact": res.certified_exact, "local_regime": res.local_regime,
           "factors": len(res.decomposition),
           "witness_residual": res.witness_residual(spec, g, h)})
    return EXIT_OK


def _rep(args):
    return build_representation(args.rep, args.j, args.m, args.n, args.cutoff)


def cmd_nelson(args) -> int:
    rep = _rep(args)
    basis = nelson_basis_sum(rep)
    closed = nelson_closed_form(rep)
    idx = valid_block(rep)
    dev = float(np.abs(basis.block(idx) - closed.block(idx)).max())
    record = {"rep": rep.label, "closed_form_deviation": dev,
              "min_eigenvalue": closed.min_eigenvalue(),
              "nelson_margin": certify_energy_operator(rep, basis, args.samples, args.seed)}
    if args.improved:
        try:
            K = improved_k(rep, args.samples, args.seed)
            record.update(improved_available=True, improved_certified=K.certified,
                          improved_margin=K.margin)
        except NotAvailable:
            record.update(improved_available=False)
    _emit(record)
    return EXIT_OK


def _state(args, rep):
    kind, _, value = args.state.partition(":")
    if kind == "fock":
        occ = tuple(int(v) for v in value.split(",")) if value else (0,)
        return fock_state(rep, occ if len(occ) > 1 else occ[0])
    if kind == "random":
        return random_state(rep, int(value or 0))
    if kind == "file":
        psi = load_state(value)
        return psi / np.linalg.norm(psi)
    raise ConfigError(f"unknown state spec {args.state!r}; use fock:N, random:SEED or file:PATH")


def cmd_bound(args) -> int:
    rep = _rep(args)
    spec = rep.group
    g_word, h_word = [_element(spec, args.g)], [_element(spec, args.h)]
    if args.kind == "ecd":
        report = ecd_bound(rep, g_word, h_word, args.energy, budget_on=args.budget_on)
        budget = laplacian_budget(rep, args.energy, args.budget_on)
        K = nelson_basis_sum(rep)
        search = EcdSearchConfig(restarts=args.restarts, seed=args.seed,
                                 nmax=None if not rep.truncated else min(10, rep.cutoff // 4))
        lower = ecd_pure_state_sup(rep, g_word, h_word, K, budget, search)
        record = report.to_record()
        record.update(oracle=lower.value, slack=report.bound_value - lower.value,
                      oracle_kind="pure_state_lower_bound", search_warning=lower.warning)
        _emit(record)
        return EXIT_UNSOUND if lower.value > report.bound_value + 1e-6 else EXIT_OK
    psi = _state(args, rep)
    fn = state_bound if args.kind == "state" else channel_trace_bound
    report = fn(rep, g_word, h_word, psi)
    _emit(report.to_record())
    return EXIT_OK if report.sound else EXIT_UNSOUND


def _experiment_output(table, out):
    if out is None:
        sys.stdout.write(table.to_csv())


def cmd_so_compare(args) -> int:
    cfg = ExperimentConfig("so_compare", m=args.m, grid=args.grid or None, output=args.out)
    table = run_experiment(cfg)
    _experiment_output(table, args.out)
    ok = all(r[1] < r[2] for r in table.rows if r[0] > 0)
    print(f"# ours below oszmaniec at every a > 0: {ok}", file=sys.stderr)
    return EXIT_OK


def cmd_trotter(args) -> int:
    cfg = ExperimentConfig("trotter_compare", m=1, t=args.t, grid=args.grid or None, energy=args.energy,
                           cutoff=args.cutoff, omega_reading=args.omega_reading, output=args.out)
    table = run_experiment(cfg)
    _experiment_output(table, args.out)
    if len(table.rows) >= 4:
        print(f"# slope ours={fit_loglog_slope(table, 'L', 'ours'):.4f} "
              f"becker={fit_loglog_slope(table, 'L', 'becker'):.4f}", file=sys.stderr)
    if args.sandwich_out:
        sw = trotter_sandwich(cfg)
        Path(args.sandwich_out).write_text(sw.to_csv(), encoding="utf-8")
        if any(r[1] > r[2] + 1e-6 for r in sw.rows):
            return EXIT_UNSOUND
    return EXIT_OK


def cmd_lorentz(args) -> int:
    cfg = ExperimentConfig("lorentz_demo", mass=args.mass, sigma=args.sigma,
                           momentum=args.momentum, transform=args.transform, axis=args.axis,
                           grid=args.grid or None, output=args.out)
    table = run_experiment(cfg)
    _experiment_output(table, args.out)
    if any(r[1] > r[2] + 1e-4 for r in table.rows):
        return EXIT_UNSOUND
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liebounds", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="distance between exp(g) and exp(h)")
    p.add_argument("--group", choices=GROUP_IDS, default="su2")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--g", type=_floats, default=(), help="orthonormal coordinates of log g")
    p.add_argument("--h", type=_floats, default=(), help="orthonormal coordinates of log h")
    p.add_argument("--method", choices=("best", "closed", "log", "refined"), default="best")
    p.add_argument("--segments", type=int, default=8)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("nelson", help="check the Nelson Laplacian of a representation")
    _add_rep_flags(p)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--improved", action="store_true", help="also certify the improved K")
    p.set_defaults(func=cmd_nelson)

    p = sub.add_parser("bound", help="state, channel or ECD bound with its oracle")
    _add_rep_flags(p)
    p.add_argument("--g", type=_floats, default=())
    p.add_argument("--h", type=_floats, default=())
    p.add_argument("--kind", choices=("state", "channel", "ecd"), default="state")
    p.add_argument("--state", default="fock:0", help="fock:N, random:SEED or file:PATH")
    p.add_argument("--energy", type=float, default=2.0)
    p.add_argument("--budget-on", choices=("laplacian", "quadratic"), default="laplacian")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("so-compare", help="fermionic linear optics bound comparison")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--grid", type=_floats, default=())
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_so_compare)

    p = sub.add_parser("trotter", help="Trotter error bounds for the metaplectic representation")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--grid", type=_floats, default=())
    p.add_argument("--energy", type=float, default=2.0)
    p.add_argument("--cutoff", type=int, default=64)
    p.add_argument("--omega-reading", choices=("caption", "text"), default="caption")
    p.add_argument("--out", default=None)
    p.add_argument("--sandwich-out", default=None, help="also write the ECD sandwich table here")
    p.set_defaults(func=cmd_trotter)

    p = sub.add_parser("lorentz", help="Lorentz wavepacket distance versus bound")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--momentum", type=_floats, default=(0.0, 0.0, 0.0))
    p.add_argument("--transform", choices=("boost", "rotation"), default="boost")
    p.add_argument("--axis", type=int, default=3)
    p.add_argument("--grid", type=_floats, default=())
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_lorentz)

    for sp_ in sub.choices.values():
        sp_.add_argument("--config", default=None, help="flat key = value file supplying flags")
    return parser


def read_config(path) -> dict:
    """Parse ``key = value`` lines; blank lines and lines starting with # are ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _apply_config(subparser, path):
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in read_config(path).items():
        if key not in actions or key in ("help", "config"):
            raise ConfigError(f"unknown config key {key!r}")
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
            continue
        try:
            converted = act.type(value) if act.type else value
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
        if act.choices is not None and converted not in act.choices:
            raise ConfigError(f"{key} must be one of {sorted(act.choices)}")
        defaults[key] = converted
    subparser.set_defaults(**defaults)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            sub = parser._subparsers._group_actions[0].choices[args.command]
            _apply_config(sub, args.config)
            args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigError, InvalidEnergyBudget, LocalRegimeViolation, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LieBoundsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
