"""Command line front end: single runs, parameter sweeps, formula tables.

Subcommands
-----------
rip-estimate / rap-estimate / rop-estimate
    One Monte Carlo estimation run; prints the report as key=value
    lines (wall_time included) and can append a CSV row.
isotropy
    Monte Carlo check that averaging A*A over one dictionary
    reproduces the closed-form expectation.
recover
    Plant a sparse pair, measure it, run the alternating solver.
sweep
    Grid of estimation or recovery cells from a key=value config file.
    The output CSV is a pure function of the resolved config: cell
    seeds are derived from the cell coordinates and rows carry no
    timing, so reruns and different --workers counts produce identical
    bytes. A .meta sidecar records the resolved config.
bounds
    Closed-form sample-complexity and entropy quantities for one
    parameter point.
selftest
    Fast exact identity checks of the operator plumbing.

Exit codes: 0 success, 2 bad arguments or config, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .bounds import (
    _COMPLEXITY_COMBOS,
    BoundQuery,
    angle_preservation_bound,
    dudley_fourier_bound,
    dudley_sparse_bound,
    gamma2_bound,
    maurey_f,
    maurey_h,
    sample_complexity,
    solve_a,
)
from .concentration import (
    CSV_FIELDS,
    estimate_rap,
    estimate_rip,
    estimate_rop,
    isotropy_check,
    polarization_check,
)
from .measurement import (
    DICTIONARY_KINDS,
    OMEGA_MODES,
    Ensemble,
    LiftedPoint,
    forward,
    forward_dense,
    measurement_matrix,
    partial_forward,
    r_matrix,
    xi_vector,
)
from .models import (
    InfeasibleModelError,
    ModelSpec,
    OrthogonalizationError,
    sample_model,
)
from .solver import (
    SolveOptions,
    SolverBreakdownError,
    plant_instance,
    recover,
    success_metric,
)
from .util import complex_gaussian, derive_seed, fmt_float, rng_for

log = logging.getLogger("liftconv")

SWEEP_KINDS = ("rip", "rap", "rop", "recover")
ESTIMATE_FIELDS = tuple(f for f in CSV_FIELDS if f != "wall_time")
RECOVER_FIELDS = (
    "kind", "n", "m", "s1", "s2", "mu1", "mu2", "trials", "noise",
    "success_rate", "rel_q50", "rel_q90", "seed",
)

_NUMERIC_ERRORS = (
    InfeasibleModelError,
    OrthogonalizationError,
    SolverBreakdownError,
    np.linalg.LinAlgError,
    ArithmeticError,
)


class ConfigError(ValueError):
    pass


# -- config parsing -----------------------------------------------------------

_GRID_KEYS = ("n", "m", "s1", "s2", "mu1", "mu2", "noise")

_BASE_KEYS = frozenset(
    ("kind", "n", "m", "s1", "s2", "mu1", "mu2", "trials", "seed",
     "phi", "psi", "flavor", "omega_mode")
)
_KIND_KEYS = {
    "rip": _BASE_KEYS,
    "rap": _BASE_KEYS | {"diagonal"},
    "rop": _BASE_KEYS | {"orthogonality", "decoupled"},
    "recover": _BASE_KEYS | {"noise", "success_threshold", "max_outer_iters",
                             "outer_tol", "enforce_flatness", "restarts"},
}


@dataclasses.dataclass
class SweepConfig:
    """Fully resolved sweep description; one instance defines one CSV."""

    kind: str
    n: list
    m: list
    s1: list
    s2: list
    mu1: list = dataclasses.field(default_factory=lambda: [None])
    mu2: list = dataclasses.field(default_factory=lambda: [None])
    noise: list = dataclasses.field(default_factory=lambda: [0.0])
    trials: int = 100
    seed: int = 0
    phi: str = "gaussian"
    psi: str = "gaussian"
    flavor: str = "exact"
    omega_mode: str = "without_replacement"
    orthogonality: str = "both"
    diagonal: bool = False
    decoupled: bool = False
    success_threshold: float = 1e-4
    max_outer_iters: int = 40
    outer_tol: float = 1e-8
    restarts: int = 14
    enforce_flatness: bool = False

    def cells(self) -> list:
        noise_axis = self.noise if self.kind == "recover" else [None]
        out = []
        for n in self.n:
            for m in self.m:
                for s1 in self.s1:
                    for s2 in self.s2:
                        for mu1 in self.mu1:
                            for mu2 in self.mu2:
                                for noise in noise_axis:
                                    out.append({"n": n, "m": m, "s1": s1,
                                                "s2": s2, "mu1": mu1,
                                                "mu2": mu2, "noise": noise})
        return out

    def cell_seed(self, cell: dict) -> int:
        return derive_seed(
            self.seed, self.kind,
            "n", cell["n"], "m", cell["m"],
            "s1", cell["s1"], "s2", cell["s2"],
            "mu1", cell["mu1"], "mu2", cell["mu2"],
            "noise", cell["noise"], "trials", self.trials,
        )

    def resolved(self) -> dict:
        """Canonical text form of every field, for the .meta sidecar."""
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                out[f.name] = ",".join(_cfg_text(e) for e in v)
            else:
                out[f.name] = _cfg_text(v)
        return out


def _cfg_text(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def _scalar(key: str, tok: str):
    tok = tok.strip()
    if key in ("mu1", "mu2") and tok.lower() == "none":
        return None
    try:
        if key in ("n", "m", "s1", "s2", "trials", "seed", "max_outer_iters",
                   "restarts"):
            return int(tok)
        if key in ("mu1", "mu2", "noise", "success_threshold", "outer_tol"):
            return float(tok)
        if key in ("diagonal", "decoupled", "enforce_flatness"):
            if tok.lower() in ("true", "1", "yes"):
                return True
            if tok.lower() in ("false", "0", "no"):
                return False
            raise ValueError(tok)
        return tok
    except ValueError:
        raise ConfigError(f"bad value {tok!r} for key {key!r}") from None


def _parse_lines(lines, raw: dict, origin: str):
    for idx, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{origin}:{idx}: expected key=value, got {body!r}")
        key, _, value = body.partition("=")
        key = key.strip()
        if key not in _KIND_KEYS["recover"] | _KIND_KEYS["rop"] | _KIND_KEYS["rap"]:
            raise ConfigError(f"{origin}:{idx}: unknown key {key!r}")
        if key in raw:
            log.info("config override %s=%s (was %s, from %s)",
                     key, value.strip(), raw[key], origin)
        raw[key] = value.strip()


def parse_config(text: str, overrides=()) -> SweepConfig:
    """Parse a flat key=value config, then apply --set overrides in order.

    Grid keys (n, m, s1, s2, mu1, mu2, noise) accept comma-separated
    lists; everything else is a scalar. Unknown keys and keys that do
    not apply to the configured kind are rejected.
    """
    raw: dict = {}
    _parse_lines(text.splitlines(), raw, "config")
    _parse_lines(overrides, raw, "--set")

    kind = raw.pop("kind", None)
    if kind not in SWEEP_KINDS:
        raise ConfigError(f"kind must be one of {SWEEP_KINDS}, got {kind!r}")
    allowed = _KIND_KEYS[kind]
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"key {key!r} does not apply to kind {kind!r}")
    for key in ("n", "m", "s1", "s2"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    values: dict = {"kind": kind}
    for key, tok in raw.items():
        if key in _GRID_KEYS:
            values[key] = [_scalar(key, t) for t in tok.split(",") if t.strip()]
            if not values[key]:
                raise ConfigError(f"empty value list for key {key!r}")
        else:
            values[key] = _scalar(key, tok)
    cfg = SweepConfig(**values)
    _validate_cells(cfg)
    return cfg


def _validate_cells(cfg: SweepConfig):
    if cfg.trials < 1:
        raise ConfigError("trials must be positive")
    if cfg.phi not in DICTIONARY_KINDS or cfg.psi not in DICTIONARY_KINDS:
        raise ConfigError(f"dictionaries must be one of {DICTIONARY_KINDS}")
    if cfg.omega_mode not in OMEGA_MODES:
        raise ConfigError(f"omega_mode must be one of {OMEGA_MODES}")
    if cfg.orthogonality not in ("both", "either"):
        raise ConfigError("orthogonality must be 'both' or 'either'")
    for cell in cfg.cells():
        try:
            ModelSpec(cell["n"], cell["s1"], mu=cell["mu1"], flavor=cfg.flavor)
            ModelSpec(cell["n"], cell["s2"], mu=cell["mu2"], flavor=cfg.flavor)
        except ValueError as exc:
            raise ConfigError(f"bad cell {cell}: {exc}") from None
        if cell["m"] > cell["n"] and cfg.omega_mode == "without_replacement":
            raise ConfigError(f"bad cell {cell}: m > n without replacement")
        if (cfg.kind == "recover" and cfg.enforce_flatness
                and cell["mu1"] is None and cell["mu2"] is None):
            raise ConfigError("enforce_flatness needs mu1 or mu2 in every cell")
        if cfg.kind == "recover" and cell["noise"] < 0:
            raise ConfigError("noise must be nonnegative")


# -- sweep execution ----------------------------------------------------------


def _fmt_cell_value(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    return str(v)


def _estimator_for(kind: str):
    return {"rip": estimate_rip, "rap": estimate_rap, "rop": estimate_rop}[kind]


def _execute_cell(payload) -> dict:
    """Run one sweep cell; top level so worker processes can import it."""
    cfg, cell = payload
    seed = cfg.cell_seed(cell)
    if cfg.kind == "recover":
        row = _recover_cell(cfg, cell, seed)
    else:
        ens = Ensemble.generate(cell["n"], cell["m"], cfg.phi, cfg.psi,
                                seed=derive_seed(seed, "ensemble"),
                                omega_mode=cfg.omega_mode)
        spec_u = ModelSpec(cell["n"], cell["s1"], mu=cell["mu1"],
                           flavor=cfg.flavor, side="left")
        spec_v = ModelSpec(cell["n"], cell["s2"], mu=cell["mu2"],
                           flavor=cfg.flavor, side="right")
        kwargs = {}
        if cfg.kind == "rap":
            kwargs["diagonal"] = cfg.diagonal
        elif cfg.kind == "rop":
            kwargs["orthogonality"] = cfg.orthogonality
            kwargs["decoupled"] = cfg.decoupled
        rep = _estimator_for(cfg.kind)(ens, spec_u, spec_v, cfg.trials,
                                       seed=seed, **kwargs)
        row = rep.csv_dict(include_wall_time=False)
    return {k: _fmt_cell_value(v) for k, v in row.items()}


def _recover_cell(cfg: SweepConfig, cell: dict, seed: int) -> dict:
    rels = []
    successes = 0
    for t in range(cfg.trials):
        inst_seed = derive_seed(seed, "instance", t)
        try:
            ens, truth, b, z_norm = plant_instance(
                cell["n"], cell["m"], cell["s1"], cell["s2"], seed=inst_seed,
                phi_kind=cfg.phi, psi_kind=cfg.psi,
                mu1=cell["mu1"], mu2=cell["mu2"],
                noise_level=cell["noise"], flavor=cfg.flavor,
                omega_mode=cfg.omega_mode)
            opts = SolveOptions(s1=cell["s1"], s2=cell["s2"],
                                max_outer_iters=cfg.max_outer_iters,
                                outer_tol=cfg.outer_tol,
                                restarts=cfg.restarts, seed=inst_seed,
                                enforce_flatness=cfg.enforce_flatness,
                                mu1=cell["mu1"] if cfg.enforce_flatness else None,
                                mu2=cell["mu2"] if cfg.enforce_flatness else None)
            res = recover(ens, b, opts)
            rel, _ = success_metric(res.point, truth, b, z_norm, ens)
        except _NUMERIC_ERRORS:
            rel = float("inf")
        rels.append(rel)
        if rel <= cfg.success_threshold:
            successes += 1
    # order statistics, no interpolation: stable under infinite entries
    q50, q90 = np.quantile(rels, [0.5, 0.9], method="lower")
    return {
        "kind": "recover", "n": cell["n"], "m": cell["m"],
        "s1": cell["s1"], "s2": cell["s2"], "mu1": cell["mu1"],
        "mu2": cell["mu2"], "trials": cfg.trials, "noise": cell["noise"],
        "success_rate": successes / cfg.trials,
        "rel_q50": float(q50), "rel_q90": float(q90), "seed": seed,
    }


def run_sweep(cfg: SweepConfig, out_path: str, workers: int = 1) -> int:
    """Execute every cell and write the CSV plus its .meta sidecar.

    Rows appear in cell enumeration order whatever the worker count;
    each cell reseeds from its own coordinates, so the bytes written
    depend only on the resolved config.
    """
    payloads = [(cfg, cell) for cell in cfg.cells()]
    if workers <= 1:
        rows = [_execute_cell(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_execute_cell, payloads))

    fields = RECOVER_FIELDS if cfg.kind == "recover" else ESTIMATE_FIELDS
    with open(out_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)

    from . import __version__

    meta = dict(cfg.resolved())
    meta["version"] = __version__
    meta["cells"] = str(len(rows))
    with open(out_path + ".meta", "w") as fh:
        for key in sorted(meta):
            fh.write(f"{key}={meta[key]}\n")
    return len(rows)


# -- single-shot commands -----------------------------------------------------


def _print_kv(row: dict):
    for key, value in row.items():
        print(f"{key}={_fmt_cell_value(value)}")


def _write_csv_row(path: str, fields, row: dict):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        writer.writeheader()
        writer.writerow({k: _fmt_cell_value(v) for k, v in row.items()})


def _cmd_estimate(args, kind: str) -> int:
    ens = Ensemble.generate(args.n, args.m, args.phi, args.psi,
                            seed=derive_seed(args.seed, "ensemble"),
                            omega_mode=args.omega_mode)
    spec_u = ModelSpec(args.n, args.s1, mu=args.mu1, flavor=args.flavor, side="left")
    spec_v = ModelSpec(args.n, args.s2, mu=args.mu2, flavor=args.flavor, side="right")
    kwargs = {}
    if kind == "rap":
        kwargs["diagonal"] = args.diagonal
    elif kind == "rop":
        kwargs["orthogonality"] = args.orthogonality
        kwargs["decoupled"] = args.decoupled
    rep = _estimator_for(kind)(ens, spec_u, spec_v, args.trials,
                               seed=args.seed, **kwargs)
    row = rep.csv_dict(include_wall_time=True)
    row["resamples"] = rep.resamples
    _print_kv(row)
    if args.csv:
        _write_csv_row(args.csv, CSV_FIELDS, rep.csv_dict(include_wall_time=True))
    return 0


def _cmd_isotropy(args) -> int:
    rng_u = rng_for(args.seed, "iso-u")
    rng_v = rng_for(args.seed, "iso-v")
    u = sample_model(ModelSpec(args.n, args.s1, side="left"), rng_u)
    v = sample_model(ModelSpec(args.n, args.s2, side="right"), rng_v)
    err = isotropy_check(args.n, args.m, LiftedPoint(u, v), args.draws,
                         seed=args.seed, fixed_kind=args.fixed_kind,
                         average_over=args.average_over,
                         omega_mode=args.omega_mode)
    _print_kv({"n": args.n, "m": args.m, "draws": args.draws,
               "average_over": args.average_over, "fixed_kind": args.fixed_kind,
               "seed": args.seed, "rel_error": err})
    return 0


def _cmd_recover(args) -> int:
    t0 = time.perf_counter()
    ens, truth, b, z_norm = plant_instance(
        args.n, args.m, args.s1, args.s2, seed=args.seed,
        phi_kind=args.phi, psi_kind=args.psi, mu1=args.mu1, mu2=args.mu2,
        noise_level=args.noise, flavor=args.flavor, omega_mode=args.omega_mode)
    opts = SolveOptions(s1=args.s1, s2=args.s2,
                        max_outer_iters=args.max_outer_iters,
                        outer_tol=args.outer_tol,
                        restarts=args.restarts, seed=args.seed,
                        enforce_flatness=args.enforce_flatness,
                        mu1=args.mu1 if args.enforce_flatness else None,
                        mu2=args.mu2 if args.enforce_flatness else None)
    res = recover(ens, b, opts)
    rel, noise_ratio = success_metric(res.point, truth, b, z_norm, ens)
    res.relative_error = rel
    row = res.csv_dict(ens, opts, args.seed)
    row["noise_ratio"] = noise_ratio
    row["wall_time"] = time.perf_counter() - t0
    _print_kv(row)
    if args.csv:
        _write_csv_row(args.csv, list(row), row)
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config) as fh:
        text = fh.read()
    cfg = parse_config(text, overrides=args.set or ())
    cells = run_sweep(cfg, args.out, workers=args.workers)
    log.info("wrote %d rows to %s", cells, args.out)
    return 0


def _cmd_bounds(args) -> int:
    query = BoundQuery(n=args.n, m=args.m, s1=args.s1, s2=args.s2,
                       mu1=args.mu1, mu2=args.mu2, delta=args.delta,
                       big_c=args.big_c)
    row: dict = {"a_star": solve_a()}
    for which in _COMPLEXITY_COMBOS:
        sc = sample_complexity(query, which)
        row[f"m_required_{which.replace('-', '_')}"] = sc.m_required
        row[f"feasible_{which.replace('-', '_')}"] = sc.feasible
    row["gamma2"] = gamma2_bound(args.s1, args.s2, args.mu2, args.m, args.n)
    row["angle_bound"] = angle_preservation_bound(args.delta)
    for label, s in (("s1", args.s1), ("s2", args.s2)):
        row[f"maurey_f_{label}"] = maurey_f(s, args.n)
        row[f"maurey_h_{label}"] = maurey_h(s, args.n, args.m)
        if 2 <= s <= args.n and args.n >= 3:
            row[f"dudley_sparse_{label}"] = dudley_sparse_bound(s, args.n)
        if 2 <= s <= args.n and 2 <= args.m <= args.n:
            row[f"dudley_fourier_{label}"] = dudley_fourier_bound(
                s, args.n, args.m, norm_t=1.0)
    _print_kv(row)
    return 0


def _selftest_checks(seed: int):
    """Exact identities on small instances; (name, residual) pairs."""
    out = []
    rng = rng_for(seed, "selftest")

    ens = Ensemble.generate(12, 5, seed=derive_seed(seed, "st-ens"))
    X = complex_gaussian(rng, (12, 12))
    b = complex_gaussian(rng, 5)
    from .measurement import adjoint_apply

    lhs = np.vdot(b, forward_dense(ens, X))
    rhs = np.vdot(adjoint_apply(ens, b), X)
    out.append(("adjoint-balance", abs(lhs - rhs)))

    ens8 = Ensemble.generate(8, 4, seed=derive_seed(seed, "st-ens8"))
    u = complex_gaussian(rng, 8)
    v = complex_gaussian(rng, 8)
    p = LiftedPoint(u, v)
    fwd = forward(ens8, p)
    per_entry = np.array([np.vdot(measurement_matrix(ens8, ell), p.dense())
                          for ell in range(4)])
    out.append(("entrywise-forward", float(np.max(np.abs(fwd - per_entry)))))

    out.append(("factorized-forward",
                float(np.max(np.abs(r_matrix(ens8, p) @ xi_vector(ens8) - fwd)))))

    mp = partial_forward(ens8, "left", v)
    w = complex_gaussian(rng, 8)
    c = complex_gaussian(rng, 4)
    out.append(("partial-adjoint",
                abs(np.vdot(c, mp.apply(w)) - np.vdot(mp.adjoint(c), w))))

    m1 = complex_gaussian(rng, (6, 6))
    m2 = complex_gaussian(rng, (6, 6))
    out.append(("polarization", polarization_check(m1, m2, complex_gaussian(rng, 6))))
    return out


def _cmd_selftest(args) -> int:
    failures = 0
    for name, residual in _selftest_checks(args.seed):
        ok = residual < 1e-10
        print(f"selftest {name} {'ok' if ok else 'FAIL'} residual={residual:.3e}")
        failures += 0 if ok else 1
    return 0 if failures == 0 else 3


# -- argument parsing ---------------------------------------------------------


def _ensemble_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--n", type=int, required=True, help="signal length")
    p.add_argument("--m", type=int, required=True, help="number of samples kept")
    p.add_argument("--phi", choices=DICTIONARY_KINDS, default="gaussian")
    p.add_argument("--psi", choices=DICTIONARY_KINDS, default="gaussian")
    p.add_argument("--omega-mode", choices=OMEGA_MODES,
                   default="without_replacement")
    p.add_argument("--seed", type=int, default=0)
    return p


def _model_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--s1", type=int, required=True, help="left sparsity")
    p.add_argument("--s2", type=int, required=True, help="right sparsity")
    p.add_argument("--mu1", type=float, default=None, help="left flatness cap")
    p.add_argument("--mu2", type=float, default=None, help="right flatness cap")
    p.add_argument("--flavor", choices=("exact", "approximate"), default="exact")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liftconv",
        description="Subsampled convolution measurements of sparse rank-one "
                    "matrices: estimators, recovery, and closed-form bounds.")
    sub = parser.add_subparsers(dest="command", required=True)
    ens_p, mod_p = _ensemble_parent(), _model_parent()

    for kind in ("rip", "rap", "rop"):
        sp = sub.add_parser(f"{kind}-estimate", parents=[ens_p, mod_p],
                            help=f"Monte Carlo {kind} constant estimate")
        sp.add_argument("--trials", type=int, default=100)
        sp.add_argument("--csv", default=None, help="also write a one-row CSV")
        if kind == "rap":
            sp.add_argument("--diagonal", action="store_true",
                            help="alias the second pair to the first")
        if kind == "rop":
            sp.add_argument("--orthogonality", choices=("both", "either"),
                            default="both")
            sp.add_argument("--decoupled", action="store_true",
                            help="independent dictionary copies per side")
        sp.set_defaults(func=lambda a, k=kind: _cmd_estimate(a, k))

    sp = sub.add_parser("isotropy", parents=[ens_p],
                        help="Monte Carlo mean of A*A against its expectation")
    sp.add_argument("--s1", type=int, default=None)
    sp.add_argument("--s2", type=int, default=None)
    sp.add_argument("--draws", type=int, default=1000)
    sp.add_argument("--fixed-kind", choices=DICTIONARY_KINDS, default="gaussian")
    sp.add_argument("--average-over", choices=("phi", "psi"), default="phi")
    sp.set_defaults(func=_cmd_isotropy)

    sp = sub.add_parser("recover", parents=[ens_p, mod_p],
                        help="plant an instance and run the solver")
    sp.add_argument("--noise", type=float, default=0.0,
                    help="noise norm relative to the clean measurement")
    sp.add_argument("--max-outer-iters", type=int, default=40)
    sp.add_argument("--outer-tol", type=float, default=1e-8)
    sp.add_argument("--restarts", type=int, default=14)
    sp.add_argument("--enforce-flatness", action="store_true")
    sp.add_argument("--csv", default=None)
    sp.set_defaults(func=_cmd_recover)

    sp = sub.add_parser("sweep", help="run a config-defined grid to CSV")
    sp.add_argument("--config", required=True, help="key=value config file")
    sp.add_argument("--out", required=True, help="output CSV path")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a config entry (repeatable)")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("bounds", help="closed-form bound table for one point")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--s1", type=int, required=True)
    sp.add_argument("--s2", type=int, required=True)
    sp.add_argument("--mu1", type=float, default=1.0)
    sp.add_argument("--mu2", type=float, default=1.0)
    sp.add_argument("--delta", type=float, default=0.5)
    sp.add_argument("--big-c", type=float, default=1.0)
    sp.set_defaults(func=_cmd_bounds)

    sp = sub.add_parser("selftest", help="fast exact identity checks")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s",
                        level=logging.INFO)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "command", None) == "isotropy":
        if args.s1 is None:
            args.s1 = args.n
        if args.s2 is None:
            args.s2 = args.n
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2
    except _NUMERIC_ERRORS as exc:
        log.error("numeric failure: %s", exc)
        return 3


def main_entry():
    sys.exit(main(argv=None))


if __name__ == "__main__":
    main_entry()
