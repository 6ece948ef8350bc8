"""Command-line front end: ``verify-lax``, ``tables`` and ``semiclassical``.

Exit codes: 0 all checks passed, 1 a named check failed, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import DomainError, TruncationError
from .fock import quasi_ccr_sweep
from .lax import (
    BianchiSpec,
    Family,
    build_M,
    build_mu,
    classical_jacobiator,
    evolve_algebra,
    lax_residual_at,
    lax_spectrum,
    operadic_lax_residual,
    pde_lax_residual,
    solve_constants,
)
from .oscillator import OscParams, analytic_state, quasi_state
from .qjacobi import jacobi_deformation_scaling, select_ordering

log = logging.getLogger("operadic_ho")

OUT_ENV = "OPERADIC_HO_OUT"
SEMICLASSICAL_HEADER = ("hbar", "N", "family", "a", "J1_norm", "J2_norm", "J3_norm",
                        "J1_resid", "J2_resid", "J3_resid", "slope3")
QUASICCR_HEADER = ("hbar", "N", "sym_resid", "comm_ratio")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    omega: float = 1.0
    E: float = 2.0
    family: str = "VII_a"
    a: float = 1.0
    hbar_list: list[float] = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    N_override: int | None = None
    t_periods: float = 2.0
    t_points: int = 64
    dt: float | None = None
    out: str | None = None
    seed: int = 0
    comm_band: float = 0.05
    lax_points: int = 1000

    @property
    def params(self) -> OscParams:
        return OscParams.from_energy(self.E, self.omega)

    @property
    def spec(self) -> BianchiSpec:
        return BianchiSpec(Family(self.family), self.a)

    def validate(self) -> "RunConfig":
        if not (self.E > 0 and self.omega > 0):
            raise ConfigError("E and omega must be positive")
        try:
            self.spec
        except (DomainError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        h = self.hbar_list
        if len(h) < 3 or any(v <= 0 for v in h) or any(b >= a for a, b in zip(h, h[1:])):
            raise ConfigError("hbar_list must be positive, strictly decreasing, with at least three values")
        if self.t_points < 2 or self.t_periods <= 0:
            raise ConfigError("t grid needs at least two points over a positive span")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.N_override is not None and self.N_override < 4:
            raise ConfigError("N_override must be at least 4")
        return self

    def t_grid(self) -> np.ndarray:
        T = self.t_periods * self.params.period
        return np.linspace(0.0, T, self.t_points)

    def out_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUT_ENV) or ".")


def load_config(path: str | None, overrides: dict) -> RunConfig:
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v) + 0.0, ".17g")
    return str(v)


def csv_block(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


class Checks:
    """Collects named threshold checks and remembers the first failure."""

    def __init__(self):
        self.rows: list[dict] = []

    def add(self, name: str, value: float, threshold: float, passed: bool) -> None:
        self.rows.append(dict(name=name, value=float(value), threshold=float(threshold), passed=bool(passed)))

    @property
    def failed(self) -> list[str]:
        return [r["name"] for r in self.rows if not r["passed"]]

    def finish(self) -> int:
        for r in self.rows:
            print(f"{'PASS' if r['passed'] else 'FAIL'} {r['name']}: {r['value']:.3e} (threshold {r['threshold']:.1e})")
        if self.failed:
            print("failed check(s): " + ", ".join(self.failed), file=sys.stderr)
            return 1
        return 0


LAX_FAMILIES = [("VII_a", 0.5), ("VII_a", 1.0), ("VII_a", 2.0), ("III_1", 1.0), ("VI_a", 0.5), ("VI_a", 2.0)]


def cmd_verify_lax(cfg: RunConfig, corrupt_m: bool = False) -> int:
    params = cfg.params
    M = build_M(params)
    if corrupt_m:
        M = -M
    rng = np.random.default_rng(cfg.seed)
    checks = Checks()

    pts = rng.uniform(-3, 3, size=(cfg.lax_points, 2))
    matrix_res = max(lax_residual_at(q, p, params, M) for q, p in pts)
    checks.add("matrix_lax_residual", matrix_res, 1e-12, matrix_res < 1e-12)

    expected = np.sort([-params.p0, params.p0, 1.0])
    spread = 0.0
    for t in cfg.t_grid():
        s = analytic_state(t, params)
        spread = max(spread, float(np.max(np.abs(lax_spectrum(s.q, s.p, params) - expected))))
    checks.add("isospectrality", spread, 1e-10, spread < 1e-10)

    dt = cfg.dt or 1e-3 * params.period
    t0 = 0.7
    richardson = []
    for fam, a in LAX_FAMILIES:
        spec = BianchiSpec(Family(fam), a)
        r1 = operadic_lax_residual(spec, t0, dt, params, M)
        r2 = operadic_lax_residual(spec, t0, dt / 2, params, M)
        ratio = r1 / r2 if r2 > 0 else math.inf
        richardson.append(dict(family=fam, a=a, dt=dt, resid_dt=r1, resid_half=r2, ratio=ratio))
        checks.add(f"richardson_{fam}_a{a:g}", ratio, 4.0, 3.6 <= ratio <= 4.4)

    hp = []
    while len(hp) < 100:
        q, p = rng.uniform(-3, 3, size=2)
        if 0.5 * (p**2 + params.omega**2 * q**2) > 0.1:
            hp.append((q, p))
    pde = max(pde_lax_residual(BianchiSpec(Family(f), a), q, p, params, M) for f, a in LAX_FAMILIES for q, p in hp)
    checks.add("pde_residual", pde, 1e-10, pde < 1e-10)

    report = dict(config=asdict(cfg), checks=checks.rows, richardson=richardson)
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    (out / "lax_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return checks.finish()


def cmd_tables(cfg: RunConfig) -> int:
    params, spec = cfg.params, cfg.spec
    mu0 = spec.initial_table()
    C = solve_constants(mu0, params.p0)
    rng = np.random.default_rng(cfg.seed)
    triples = rng.uniform(-1, 1, size=(8, 3, 3))
    checks = Checks()

    grid_rows = []
    rt_max = jac_max = 0.0
    for t in cfg.t_grid():
        evolved = evolve_algebra(spec, t, params).mu
        built = build_mu(C, analytic_state(t, params), quasi_state(t, params), params).mu
        rt = float(np.max(np.abs(evolved - built)))
        jac = max(float(np.max(np.abs(classical_jacobiator(evolved, *xyz)))) for xyz in triples)
        rt_max, jac_max = max(rt_max, rt), max(jac_max, jac)
        grid_rows.append((t, rt, jac))
    t0_diff = float(np.max(np.abs(evolve_algebra(spec, 0.0, params).mu - mu0.mu)))

    checks.add("eq6_valid", float(C.valid), 1.0, C.valid)
    checks.add("table1_t0_max_abs", t0_diff, 0.0, t0_diff == 0.0)
    checks.add("roundtrip_max_abs", rt_max, 1e-12, rt_max < 1e-12)
    checks.add("jacobiator_max", jac_max, 1e-10, jac_max < 1e-10)

    evolved0 = evolve_algebra(spec, 0.0, params).mu
    entries = [(s + 1, i + 1, j + 1, mu0.mu[s, i, j], evolved0[s, i, j])
               for s in range(3) for i in range(3) for j in range(3)]
    text = "\n".join([
        csv_block(("family", "a", "omega", "p0"), [(spec.family.value, spec.a, params.omega, params.p0)]),
        csv_block(tuple(f"C{k}" for k in range(1, 10)), [C.C]),
        csv_block(("check", "value", "threshold", "passed"),
                  [(r["name"], r["value"], r["threshold"], r["passed"]) for r in checks.rows]),
        csv_block(("t", "roundtrip_max_abs", "jacobiator_norm"), grid_rows),
        csv_block(("s", "i", "j", "table1", "t0"), entries),
    ])
    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    (out / "tables_report.csv").write_text(text)
    return checks.finish()


def _decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def cmd_semiclassical(cfg: RunConfig) -> int:
    spec, omega, E = cfg.spec, cfg.omega, cfg.E
    checks = Checks()
    report = select_ordering(spec, E=E, omega=omega, seed=cfg.seed)
    worst = min(report.residuals.values())
    checks.add("ordering_selection", worst, 1e-8, report.selected is not None)
    ordering = report.selected or min(report.residuals, key=report.residuals.get)

    try:
        ccr = quasi_ccr_sweep(cfg.hbar_list, E, omega, cfg.N_override)
        jac = jacobi_deformation_scaling(spec, E, cfg.hbar_list, omega, N_override=cfg.N_override,
                                         ordering=ordering)
    except TruncationError as exc:
        print(f"truncation failure: {exc}", file=sys.stderr)
        return 1

    sym = [r["sym_resid"] for r in ccr]
    comm = [r["comm_resid"] for r in ccr]
    checks.add("sym_resid_decreasing", sym[-1], sym[0], _decreasing(sym))
    checks.add("comm_resid_decreasing", comm[-1], comm[0], _decreasing(comm))
    checks.add("comm_ratio_band", comm[-1], cfg.comm_band, comm[-1] <= cfg.comm_band)
    for i in (1, 2, 3):
        res = [r[f"J{i}_resid"] for r in jac]
        checks.add(f"J{i}_resid_decreasing", res[-1], res[0], _decreasing(res))

    out = cfg.out_dir()
    out.mkdir(parents=True, exist_ok=True)
    (out / "quasiccr.csv").write_text(csv_block(QUASICCR_HEADER, [[r[k] for k in QUASICCR_HEADER] for r in ccr]))
    (out / "semiclassical.csv").write_text(
        csv_block(SEMICLASSICAL_HEADER, [[r[k] for k in SEMICLASSICAL_HEADER] for r in jac]))
    return checks.finish()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="operadic-ho", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("verify-lax", "matrix and operadic Lax checks"),
                           ("tables", "structure-constant tables and classical Jacobi checks"),
                           ("semiclassical", "quasi-CCR and Jacobi deformation sweeps")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="JSON file with RunConfig fields")
        p.add_argument("--omega", type=float)
        p.add_argument("--energy", type=float, dest="E")
        p.add_argument("--family", choices=[f.value for f in Family])
        p.add_argument("--a", type=float)
        p.add_argument("--hbar", type=float, nargs="+", dest="hbar_list")
        p.add_argument("--N", type=int, dest="N_override")
        p.add_argument("--out")
        p.add_argument("--seed", type=int)
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "verify-lax":
            p.add_argument("--corrupt-m", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    keys = ("omega", "E", "family", "a", "hbar_list", "N_override", "out", "seed")
    overrides = {k: getattr(args, k) for k in keys}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if args.command == "verify-lax":
        return cmd_verify_lax(cfg, corrupt_m=args.corrupt_m)
    if args.command == "tables":
        return cmd_tables(cfg)
    return cmd_semiclassical(cfg)


if __name__ == "__main__":
    sys.exit(main())
