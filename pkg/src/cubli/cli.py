"""Scenario-driven command line front end.

Subcommands::

    cubli simulate --scenario <name> [--config <file>] [--params <file>] --out <dir>
    cubli scenarios
    cubli poinsot --mode H|T --level <v> --n <k> [--out <dir>]

Each run writes ``trace.csv`` (fixed column set, 17 significant digits, so the
output round-trips losslessly and is bit-identical across repeated runs) and
``summary.txt`` with the invariant drifts and PASS/FAIL verdicts.  Poinsot
scenarios write one trace per family member plus a ``family.csv`` index.

Exit codes: 0 scenario PASS, 1 FAIL, 2 configuration error.  The environment
variable ``CUBLI_DT`` overrides the default step size (testing hook).
"""

from __future__ import annotations

import argparse
import difflib
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import analysis, dynamics
from .dynamics import DynamicsFlags, State
from .integrate import (IntegrationError, IntegratorConfig, Trajectory,
                        TrajectorySample, simulate)
from .kinematics import quat_to_euler_zxz
from .model import CubliModel, build_model, equilibria, load_params, tilted_orientation
from .quat import Quaternion

CSV_HEADER = ("t,q0,q1,q2,q3,wx,wy,wz,th1,th2,th3,ww1,ww2,ww3,"
              "E,T,V,Hz,Hdiag,psi,theta,phi,comx,comy,comz")

# Single source of truth for the PASS/FAIL thresholds; the acceptance test
# suite imports these rather than redefining them.
THRESHOLDS = {
    "energy_rel_drift": 1e-6,
    "momentum_drift": 1e-6,           # x max(1, |H(0)|)
    "equilibrium_deviation": 1e-9,    # per state component
    "flat_angle_rate": 1e-3,          # rad/s, precession/nutation in pure spin
    "spin_rate_abs_tol": 0.01,        # rad/s on the 2*pi spin scenario
    "nutation_band": math.radians(0.5),
    "precession_rel_tol": 0.05,
    "poinsot_surface_rel": 1e-6,      # x H^2
    "poinsot_H3_drift": 1e-8,
    "nutation_osc_max": math.radians(15.0),  # excursion above the initial tilt
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    duration: float = 5.0
    dt: float = 1e-3
    record_every: int = 10
    initial_orientation: str = "identity"   # identity|stable|unstable|nutated(deg)|q0,q1,q2,q3
    initial_omega_c: str = "0,0,0"          # x,y,z | rates(psid,thetad,phid)
    gravity_on: bool = True
    wheels_locked: bool = True
    torque: str = "zero"                    # zero | constant(x,y,z)
    poinsot_mode: Optional[str] = None      # H | T
    poinsot_level: float = 0.1
    poinsot_n: int = 9
    out_dir: str = "out"


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class RunSummary:
    scenario: str
    drifts: dict
    euler_extrema: dict
    precession_rate: Optional[float]
    spin_rate: Optional[float]
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


_SCENARIOS = {
    "sim1_energy": (
        "free fall from the identity orientation; total energy must stay flat",
        ScenarioConfig("sim1_energy", duration=5.0, wheels_locked=False),
    ),
    "sim2_momentum": (
        "tumble with unit angular velocity; H_z and H_diag must stay flat",
        ScenarioConfig("sim2_momentum", duration=5.0, initial_omega_c="1,1,1"),
    ),
    "sim3_stable_eq": (
        "rest at the stable equilibrium (diagonal down); state must not move",
        ScenarioConfig("sim3_stable_eq", duration=10.0, initial_orientation="stable"),
    ),
    "sim4_unstable_eq": (
        "rest at the unstable equilibrium (diagonal up); state must not move",
        ScenarioConfig("sim4_unstable_eq", duration=10.0, initial_orientation="unstable"),
    ),
    "sim5_spin": (
        "pure spin about the vertical diagonal at 1 Hz; no precession/nutation",
        ScenarioConfig("sim5_spin", duration=5.0, initial_orientation="unstable",
                       initial_omega_c=f"{2*math.pi/math.sqrt(3)!r},"
                                       f"{2*math.pi/math.sqrt(3)!r},"
                                       f"{2*math.pi/math.sqrt(3)!r}"),
    ),
    "sim6_precession": (
        "fast diagonal spin from a 10 deg tilt; precession-nutation-spin motion",
        ScenarioConfig("sim6_precession", duration=5.0,
                       initial_orientation="nutated(10)",
                       initial_omega_c=f"{20*math.pi/math.sqrt(3)!r},"
                                       f"{20*math.pi/math.sqrt(3)!r},"
                                       f"{20*math.pi/math.sqrt(3)!r}"),
    ),
    "sim8_steady_precession": (
        "steady precession at a 10 deg tilt; constant nutation, linear precession",
        ScenarioConfig("sim8_steady_precession", duration=2.0,
                       initial_orientation="nutated(10)",
                       initial_omega_c="38.47,38.47,39.40"),
    ),
    "sim9_poinsot_H": (
        "torque-free family on a constant angular-momentum sphere",
        ScenarioConfig("sim9_poinsot_H", duration=10.0, gravity_on=False,
                       poinsot_mode="H", poinsot_level=0.1, poinsot_n=9),
    ),
    "sim9_poinsot_T": (
        "torque-free family on a constant kinetic-energy ellipsoid",
        ScenarioConfig("sim9_poinsot_T", duration=10.0, gravity_on=False,
                       poinsot_mode="T", poinsot_level=1.0, poinsot_n=9),
    ),
}


def scenario_names() -> List[str]:
    return list(_SCENARIOS)


def get_scenario(name: str) -> ScenarioConfig:
    try:
        return _SCENARIOS[name][1]
    except KeyError:
        close = difflib.get_close_matches(name, _SCENARIOS, n=1)
        hint = f"; did you mean {close[0]!r}?" if close else ""
        raise ConfigError(f"unknown scenario {name!r}{hint}") from None


def list_scenarios() -> str:
    width = max(map(len, _SCENARIOS))
    return "\n".join(f"{name:<{width}}  {desc}"
                     for name, (desc, _) in _SCENARIOS.items())


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}

_CONFIG_FIELDS = {
    "scenario": str,
    "duration": float,
    "dt": float,
    "record_every": int,
    "initial_orientation": str,
    "initial_omega_c": str,
    "gravity_on": "bool",
    "wheels_locked": "bool",
    "torque": str,
    "poinsot_mode": str,
    "poinsot_level": float,
    "poinsot_n": int,
    "out_dir": str,
}


def load_config(path, base: ScenarioConfig) -> ScenarioConfig:
    """Apply ``key = value`` overrides from a flat text file."""
    overrides = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        conv = _CONFIG_FIELDS[key]
        if conv == "bool":
            if value.lower() not in _BOOL:
                raise ConfigError(f"{path}:{lineno}: {key} must be a boolean, got {value!r}")
            overrides[key] = _BOOL[value.lower()]
        else:
            try:
                overrides[key] = conv(value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return replace(base, **overrides)


def _parse_triple(text: str, what: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"{what} must be three comma-separated numbers, got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigError(f"{what} must be numeric, got {text!r}") from None


def resolve_orientation(spec: str, mdl: CubliModel) -> Quaternion:
    spec = spec.strip()
    if spec == "identity":
        return Quaternion.identity()
    if spec == "stable":
        return equilibria(mdl).q_s
    if spec == "unstable":
        return equilibria(mdl).q_u
    if spec.startswith("nutated(") and spec.endswith(")"):
        try:
            angle_deg = float(spec[len("nutated("):-1])
        except ValueError:
            raise ConfigError(f"bad nutated() angle in {spec!r}") from None
        return tilted_orientation(math.radians(angle_deg))
    parts = spec.split(",")
    if len(parts) == 4:
        try:
            arr = np.array([float(p) for p in parts])
        except ValueError:
            raise ConfigError(f"bad quaternion components in {spec!r}") from None
        n = np.linalg.norm(arr)
        if n == 0:
            raise ConfigError("initial_orientation quaternion must be nonzero")
        return Quaternion.from_array(arr / n)
    raise ConfigError(f"cannot parse initial_orientation {spec!r}")


def resolve_omega(spec: str, q0: Quaternion, mdl: CubliModel) -> np.ndarray:
    from .kinematics import body_rates_from_euler
    spec = spec.strip()
    if spec.startswith("rates(") and spec.endswith(")"):
        rates = _parse_triple(spec[len("rates("):-1], "initial_omega_c rates")
        e = quat_to_euler_zxz(q0, mdl.principal_rotation)
        return body_rates_from_euler(e, rates, mdl.principal_rotation)
    return _parse_triple(spec, "initial_omega_c")


def resolve_torque(spec: str):
    spec = spec.strip()
    if spec == "zero":
        return None
    if spec.startswith("constant(") and spec.endswith(")"):
        tau = _parse_triple(spec[len("constant("):-1], "torque")
        return dynamics.constant_torque(tau)
    raise ConfigError(f"cannot parse torque {spec!r}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trace_csv(path, traj: Trajectory):
    """Write the trace with unwrapped (continuous) psi and phi columns."""
    psi = np.unwrap(np.array([s.observables.euler.psi for s in traj]))
    phi = np.unwrap(np.array([s.observables.euler.phi for s in traj]))
    with open(path, "w") as f:
        f.write(CSV_HEADER + "\n")
        for i, s in enumerate(traj):
            o = s.observables
            row = ([s.t] + list(s.state.as_vector())
                   + [o.E, o.T, o.V, o.H_z, o.H_diag,
                      psi[i], o.euler.theta, phi[i]]
                   + list(o.com_inertial))
            f.write(",".join(_fmt(x) for x in row) + "\n")


def _lsq_slope(t: np.ndarray, y: np.ndarray) -> float:
    t = t - t.mean()
    return float((t @ (y - y.mean())) / (t @ t))


def measure_precession(traj: Trajectory) -> float:
    """Least-squares slope of the unwrapped precession angle, final half."""
    if len(traj) < 10:
        raise ValueError(f"need at least 10 samples to measure precession, got {len(traj)}")
    t = traj.times
    psi = np.unwrap(np.array([s.observables.euler.psi for s in traj]))
    half = len(t) // 2
    return _lsq_slope(t[half:], psi[half:])


def measure_spin(traj: Trajectory) -> float:
    """Least-squares slope of the unwrapped spin angle, final half."""
    if len(traj) < 10:
        raise ValueError(f"need at least 10 samples to measure spin, got {len(traj)}")
    t = traj.times
    phi = np.unwrap(np.array([s.observables.euler.phi for s in traj]))
    half = len(t) // 2
    return _lsq_slope(t[half:], phi[half:])


def _run_trajectory(cfg: ScenarioConfig, mdl: CubliModel, dt: float) -> Trajectory:
    q0 = resolve_orientation(cfg.initial_orientation, mdl)
    omega0 = resolve_omega(cfg.initial_omega_c, q0, mdl)
    s0 = State(q=q0, omega_c=omega0, theta_w=np.zeros(3), omega_w=np.zeros(3))
    flags = DynamicsFlags(gravity_on=cfg.gravity_on, wheels_locked=cfg.wheels_locked)
    deriv = dynamics.derivative_function(mdl, flags, resolve_torque(cfg.torque))
    icfg = IntegratorConfig(dt=dt, t_end=cfg.duration, record_every=cfg.record_every)
    return simulate(s0, icfg, deriv, analysis.observer(mdl))


def _drift(values: np.ndarray) -> float:
    return float(np.abs(values - values[0]).max())


def _summarize(cfg: ScenarioConfig, traj: Trajectory, mdl: CubliModel) -> RunSummary:
    name = cfg.scenario
    E = np.array([s.observables.E for s in traj])
    Hz = np.array([s.observables.H_z for s in traj])
    Hd = np.array([s.observables.H_diag for s in traj])
    Hmag = np.array([np.linalg.norm(s.observables.H_body) for s in traj])
    T = np.array([s.observables.T for s in traj])
    theta = np.array([s.observables.euler.theta for s in traj])
    psi = np.unwrap(np.array([s.observables.euler.psi for s in traj]))
    phi = np.unwrap(np.array([s.observables.euler.phi for s in traj]))

    drifts = {
        "energy": _drift(E),
        "energy_rel": _drift(E) / max(1e-300, abs(E[0])),
        "H_z": _drift(Hz),
        "H_diag": _drift(Hd),
        "H_mag": _drift(Hmag),
        "T": _drift(T),
    }
    extrema = {
        "psi_min": float(psi.min()), "psi_max": float(psi.max()),
        "theta_min": float(theta.min()), "theta_max": float(theta.max()),
        "phi_min": float(phi.min()), "phi_max": float(phi.max()),
    }
    precession = measure_precession(traj) if len(traj) >= 10 else None
    spin = measure_spin(traj) if len(traj) >= 10 else None

    checks = []

    def check(label, value, threshold):
        checks.append(CheckResult(label, float(value), float(threshold),
                                  float(value) <= float(threshold)))

    if name == "sim1_energy":
        check("energy relative drift", drifts["energy_rel"], THRESHOLDS["energy_rel_drift"])
    elif name == "sim2_momentum":
        scale = max(1.0, abs(Hmag[0]))
        check("H_z drift", drifts["H_z"], THRESHOLDS["momentum_drift"] * scale)
        check("H_diag drift", drifts["H_diag"], THRESHOLDS["momentum_drift"] * scale)
    elif name in ("sim3_stable_eq", "sim4_unstable_eq"):
        dev = float(np.abs(traj.states() - traj.states()[0]).max())
        check("max state deviation", dev, THRESHOLDS["equilibrium_deviation"])
    elif name == "sim5_spin":
        t = traj.times
        half = len(t) // 2
        check("precession rate", abs(precession), THRESHOLDS["flat_angle_rate"])
        check("nutation rate", abs(_lsq_slope(t[half:], theta[half:])),
              THRESHOLDS["flat_angle_rate"])
        check("spin rate error", abs(spin - 2.0 * math.pi),
              THRESHOLDS["spin_rate_abs_tol"])
    elif name == "sim6_precession":
        theta0 = theta[0]
        check("nutation dip below start", max(0.0, theta0 - theta.min()),
              THRESHOLDS["nutation_band"])
        check("nutation excursion", theta.max() - theta0,
              THRESHOLDS["nutation_osc_max"])
        # Spinning-top signature: both angles advance, spin faster than precession.
        check("precession reversal", max(0.0, -np.diff(psi).min()), 1e-9)
        check("spin reversal", max(0.0, -np.diff(phi).min()), 1e-9)
        check("precession/spin rate ratio", precession / spin, 1.0)
    elif name == "sim8_steady_precession":
        e0 = traj[0].observables.euler
        from .kinematics import euler_rates_from_body
        psid0, thetad0, spin0 = euler_rates_from_body(e0, traj[0].state.omega_c,
                                                      mdl.principal_rotation)
        slow_root, _ = dynamics.steady_precession_rates(spin0, e0.theta, mdl)
        check("nutation band", max(abs(theta.max() - e0.theta), abs(e0.theta - theta.min())),
              THRESHOLDS["nutation_band"])
        check("precession rate error", abs(precession - slow_root) / abs(slow_root),
              THRESHOLDS["precession_rel_tol"])

    return RunSummary(
        scenario=name, drifts=drifts, euler_extrema=extrema,
        precession_rate=precession, spin_rate=spin, checks=checks,
    )


def _summary_text(summary: RunSummary) -> str:
    lines = [f"scenario: {summary.scenario}"]
    lines.append("invariant drifts (max over recorded samples):")
    for key, value in summary.drifts.items():
        lines.append(f"  {key:<12} {_fmt(value)}")
    lines.append("euler extrema (rad, psi/phi unwrapped):")
    for key, value in summary.euler_extrema.items():
        lines.append(f"  {key:<12} {_fmt(value)}")
    if summary.precession_rate is not None:
        lines.append(f"measured precession rate: {_fmt(summary.precession_rate)} rad/s")
    if summary.spin_rate is not None:
        lines.append(f"measured spin rate: {_fmt(summary.spin_rate)} rad/s")
    lines.append("checks:")
    for c in summary.checks:
        verdict = "PASS" if c.passed else "FAIL"
        lines.append(f"  [{verdict}] {c.name}: {_fmt(c.value)} (threshold {_fmt(c.threshold)})")
    lines.append("PASS" if summary.passed else "FAIL")
    return "\n".join(lines) + "\n"


def _run_poinsot(cfg: ScenarioConfig, mdl: CubliModel, dt: float,
                 out: Path) -> RunSummary:
    family = analysis.poinsot_family(cfg.poinsot_mode, cfg.poinsot_level,
                                     cfg.poinsot_n, mdl)
    icfg = IntegratorConfig(dt=dt, t_end=cfg.duration, record_every=cfg.record_every)
    checks = []
    index_rows = []
    levels = []
    for i, omega0 in enumerate(family):
        run = analysis.poinsot_run(omega0, icfg, mdl)
        # Recompute observables for the CSV (poinsot_run integrates bare).
        obs = analysis.observer(mdl)
        traj = Trajectory([TrajectorySample(s.t, s.state, obs(s.state))
                           for s in run.trajectory])
        write_trace_csv(out / f"member_{i:02d}.csv", traj)
        # Principal-frame angular momentum trace for the 3D surface plots;
        # H and T repeat the member's conserved levels on every row so a
        # downstream consumer never has to rederive them.
        with open(out / f"member_{i:02d}_H.csv", "w") as f:
            f.write("t,H1,H2,H3,H,T\n")
            for s, Hrow in zip(run.trajectory, run.trace):
                f.write(",".join(_fmt(x) for x in
                                 [s.t, *Hrow, run.H_mag, run.T_val]) + "\n")
        limit = THRESHOLDS["poinsot_surface_rel"] * run.H_mag ** 2
        checks.append(CheckResult(f"member {i} sphere residual",
                                  run.max_sphere_residual, limit,
                                  run.max_sphere_residual <= limit))
        checks.append(CheckResult(f"member {i} ellipsoid residual",
                                  run.max_ellipsoid_residual, limit,
                                  run.max_ellipsoid_residual <= limit))
        checks.append(CheckResult(f"member {i} H3 drift",
                                  run.max_H3_drift, THRESHOLDS["poinsot_H3_drift"],
                                  run.max_H3_drift <= THRESHOLDS["poinsot_H3_drift"]))
        index_rows.append([i, *run.omega0, run.H_mag, run.T_val,
                           run.max_sphere_residual, run.max_ellipsoid_residual,
                           run.max_H3_drift])
        levels.append(run.H_mag if cfg.poinsot_mode == "H" else run.T_val)
    with open(out / "family.csv", "w") as f:
        f.write("member,wx0,wy0,wz0,H,T,max_sphere_residual,"
                "max_ellipsoid_residual,max_H3_drift\n")
        for row in index_rows:
            f.write(",".join([str(row[0])] + [_fmt(x) for x in row[1:]]) + "\n")
    level_spread = max(levels) - min(levels)
    checks.append(CheckResult("family level spread", level_spread,
                              1e-9 * max(levels), level_spread <= 1e-9 * max(levels)))
    return RunSummary(scenario=cfg.scenario, drifts={}, euler_extrema={},
                      precession_rate=None, spin_rate=None, checks=checks)


def run_scenario(cfg: ScenarioConfig, mdl: Optional[CubliModel] = None,
                 out_dir=None) -> RunSummary:
    """Run one scenario, writing trace/summary files into its output directory."""
    mdl = mdl or build_model()
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dt = float(os.environ.get("CUBLI_DT", cfg.dt))

    if cfg.poinsot_mode is not None:
        summary = _run_poinsot(cfg, mdl, dt, out)
    else:
        trace_path = out / "trace.csv"
        try:
            traj = _run_trajectory(cfg, mdl, dt)
            write_trace_csv(trace_path, traj)
        except Exception:
            if trace_path.exists():
                trace_path.unlink()
            raise
        summary = _summarize(cfg, traj, mdl)
    (out / "summary.txt").write_text(_summary_text(summary))
    return summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cubli",
                                     description="Reaction-wheel cube simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a named scenario")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--config", help="key = value override file")
    p_sim.add_argument("--params", help="physical parameter file")
    p_sim.add_argument("--out", default=None, help="output directory")

    sub.add_parser("scenarios", help="list built-in scenarios")

    p_poi = sub.add_parser("poinsot", help="run a torque-free Poinsot family")
    p_poi.add_argument("--mode", required=True, choices=["H", "T"])
    p_poi.add_argument("--level", required=True, type=float)
    p_poi.add_argument("--n", required=True, type=int)
    p_poi.add_argument("--params", help="physical parameter file")
    p_poi.add_argument("--out", default="out", help="output directory")

    args = parser.parse_args(argv)

    try:
        if args.command == "scenarios":
            print(list_scenarios())
            return 0
        mdl = build_model(load_params(args.params)) if args.params else build_model()
        if args.command == "simulate":
            cfg = get_scenario(args.scenario)
            if args.config:
                cfg = load_config(args.config, cfg)
            summary = run_scenario(cfg, mdl, out_dir=args.out)
        else:
            cfg = ScenarioConfig(scenario=f"poinsot_{args.mode}", duration=10.0,
                                 gravity_on=False, poinsot_mode=args.mode,
                                 poinsot_level=args.level, poinsot_n=args.n,
                                 out_dir=args.out)
            summary = run_scenario(cfg, mdl, out_dir=args.out)
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(_summary_text(summary), end="")
    return 0 if summary.passed else 1


if __name__ == "__main__":
    sys.exit(main())
