"""Batch front end.

Runs are configured by a flat key=value text file plus command-line flag
overrides (flags win).  Every emitted file carries a header block with
the full configuration and its hash, so identical configurations produce
byte-identical outputs.

Exit codes: 0 success, 1 failed validation checks, 2 configuration or
usage errors, 3 computation failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import correlation_exact_scan, correlation_formula, selection_rule_report
from .density import (
    assemble_state,
    density_matrix,
    embed_active_state,
    entropy_of_density,
    partial_trace_matrix,
    reduced_entropy,
    thermal_ensemble,
)
from .hamiltonian import (
    CouplingParams,
    build_energy_table,
    energy_expectation,
)
from .lattice import build_lattice, geometry_to_json, validate_geometry
from .manifold import (
    FlipConfig,
    build_product_ket,
    enumerate_weight_class,
    excite,
    signature_kernel,
)
from .output import write_csv, write_json, write_plot_script
from .pauli import HILBERT_CAP_SITES
from .perturbation import DriveSpec, connected_targets, evolve_coefficients
from .phase import decompose, decompose_values, effective_level, shifted_transition_frequency, stability_intervals
from .validation import oracle_error_report, run_acceptance

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_COMPUTE = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    nx: int = 2
    ny: int = 2
    jx: float = 1.0
    jy: float = 1.0
    jz: float = 1.0
    d: float = 0.01
    omega: float = 0.5
    drive_file: str = ""
    initial: int = 0
    plaquette: int = 0
    t_max: float = 6.283185307179586
    samples: int = 65
    engine: str = "label"
    quad_tol: float = 1e-10
    evolve_tol: float = 1e-9
    scan_tol: float = 1e-8
    outdir: str = "out"
    seed: int = 12345
    jobs: int = 1
    kt: float = 1.0

    def validate(self) -> None:
        if self.nx < 2 or self.ny < 2:
            raise ConfigError(f"lattice must be at least 2x2, got {self.nx}x{self.ny}")
        n_plaq = self.nx * self.ny
        if not 0 <= self.initial < (1 << n_plaq):
            raise ConfigError(f"initial bitmask 0x{self.initial:x} out of range")
        if not 0 <= self.plaquette < n_plaq:
            raise ConfigError(f"plaquette {self.plaquette} out of range")
        if self.engine not in ("hilbert", "label"):
            raise ConfigError(f"engine must be hilbert or label, got {self.engine!r}")
        if self.d < 0:
            raise ConfigError("drive amplitude must be >= 0")
        if self.t_max <= 0:
            raise ConfigError("t_max must be positive")
        if self.samples < 2:
            raise ConfigError("need at least 2 time samples")
        for name in ("quad_tol", "evolve_tol", "scan_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.kt < 0:
            raise ConfigError("kt must be >= 0")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def parse_config_file(path: str) -> dict:
    """Flat key=value format; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _coerce(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    kind = kinds[name]
    try:
        if kind == "int":
            return int(raw, 0)  # accepts 0x.. bitmask hex
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for key, raw in parse_config_file(args.config).items():
            cfg = replace(cfg, **{key: _coerce(key, raw)})
    for f in fields(RunConfig):
        override = getattr(args, f.name, None)
        if override is not None:
            if f.name == "initial" and isinstance(override, str):
                override = int(override, 0)
            cfg = replace(cfg, **{f.name: override})
    cfg.validate()
    return cfg


def _build_scene(cfg: RunConfig):
    geom = build_lattice(cfg.nx, cfg.ny)
    params = CouplingParams(jx=cfg.jx, jy=cfg.jy, jz=cfg.jz, d=cfg.d, omega=cfg.omega)
    if cfg.drive_file:
        data = np.genfromtxt(cfg.drive_file, delimiter=",", comments="#")
        if data.ndim != 2 or data.shape[1] < 3:
            raise ConfigError("drive file needs columns t, ReB, ImB")
        drive = DriveSpec.custom(
            data[:, 0], data[:, 1] + 1j * data[:, 2], plaquette=cfg.plaquette
        )
    else:
        drive = DriveSpec.exponential(cfg.d, cfg.omega, plaquette=cfg.plaquette)
    initial = FlipConfig(cfg.initial, geom.n_plaquettes)
    times = np.linspace(0.0, cfg.t_max, cfg.samples)
    return geom, params, drive, initial, times


def _outdir(cfg: RunConfig) -> Path:
    path = Path(cfg.outdir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _maybe_plot(args, csv_path: Path) -> None:
    if getattr(args, "emit_plot_script", False):
        write_plot_script(csv_path)


def cmd_lattice(cfg: RunConfig, args) -> int:
    geom = build_lattice(cfg.nx, cfg.ny)
    report = validate_geometry(geom)
    out = _outdir(cfg) / "geometry.json"
    out.write_text(geometry_to_json(geom) + "\n")
    for name, passed, detail in report.checks:
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    kernel = signature_kernel(geom)
    if kernel:
        print(
            f"[WARN] signature_injectivity: {len(kernel)}-dimensional flip "
            f"kernel; distinct configurations can share one product state "
            f"(basis: {', '.join(c.hex for c in kernel)})"
        )
    else:
        print("[PASS] signature_injectivity: flip kernel is trivial")
    print(f"wrote {out}")
    return EXIT_OK if report.ok else EXIT_COMPUTE


def cmd_manifold(cfg: RunConfig, args) -> int:
    n = args.n if args.n is not None else cfg.nx * cfg.ny
    if n < 1:
        raise ConfigError("plaquette count must be >= 1")
    sizes = []
    rows = []
    for k in range(n + 1):
        configs = enumerate_weight_class(n, k)
        sizes.append(len(configs))
        rows.extend((c.hex, c.weight) for c in configs)
    total = sum(sizes)
    print(f"weight-class sizes: {', '.join(str(s) for s in sizes)}")
    print(f"total states: {total}")
    out = _outdir(cfg) / "configs.csv"
    write_csv(out, {**cfg.as_dict(), "n": n}, cfg.engine, ["bitmask", "weight"], rows)
    print(f"wrote {out}")
    return EXIT_OK


def _evolved(cfg: RunConfig, connected_only: bool):
    geom, params, drive, initial, times = _build_scene(cfg)
    if connected_only:
        targets = connected_targets(geom, params, initial, drive.plaquette, cfg.engine)
    else:
        targets = [excite(initial, j) for j in range(geom.n_plaquettes)]
    coeffs = evolve_coefficients(
        geom, params, drive, initial, targets, times,
        engine=cfg.engine, quad_tol=cfg.quad_tol,
    )
    return geom, params, drive, initial, times, targets, coeffs


def cmd_evolve(cfg: RunConfig, args) -> int:
    geom, params, _, initial, times, targets, coeffs = _evolved(cfg, args.connected_only)
    rows = []
    for series in coeffs:
        for t, c in zip(series.times, series.values):
            rows.append((series.label, float(t), float(c.real), float(c.imag)))
    meta = dict(cfg.as_dict())
    for series in coeffs:
        meta[f"omega0[{series.label}]"] = series.omega0
    outdir = _outdir(cfg)
    out = outdir / "coefficients.csv"
    write_csv(out, meta, cfg.engine, ["target", "t", "re_c", "im_c"], rows)
    _maybe_plot(args, out)

    table = build_energy_table(
        geom, params,
        [(initial, None)] + [(tg.base, tg) for tg in targets],
        engine=cfg.engine,
    )
    write_csv(
        outdir / "energies.csv", cfg.as_dict(), cfg.engine,
        ["bitmask", "excited", "plaquette", "energy"], table.rows(),
    )

    # active-basis density matrix of the evolved state at t_max
    state = assemble_state(coeffs, float(times[-1]), initial)
    rho = density_matrix(state)
    write_json(
        outdir / "density.json", cfg.as_dict(), cfg.engine,
        {"t": float(times[-1]), "density": rho.to_payload()},
    )
    print(f"wrote {out} ({len(coeffs)} series), energies.csv, density.json")
    return EXIT_OK


def cmd_phase(cfg: RunConfig, args) -> int:
    geom, params, drive, initial, times, targets, coeffs = _evolved(cfg, True)
    if not coeffs:
        raise RuntimeError("no target is connected to the initial configuration")
    series = coeffs[0]
    phase = decompose(series)
    outdir = _outdir(cfg)

    rows = [
        (float(t), float(a_), float(lm), float(ang), bool(sg))
        for t, a_, lm, ang, sg in zip(
            phase.times, phase.modulus, phase.log_modulus, phase.angle, phase.singular
        )
    ]
    phase_csv = outdir / "phase.csv"
    write_csv(phase_csv, cfg.as_dict(), cfg.engine, ["t", "A", "a", "phi", "singular"], rows)
    _maybe_plot(args, phase_csv)

    intervals = stability_intervals(phase)
    write_csv(
        outdir / "intervals.csv", cfg.as_dict(), cfg.engine,
        ["t_start", "t_end", "label"],
        [(s, e, name) for s, e, name in intervals],
    )

    ref_phase = decompose_values(times, np.ones(len(times), dtype=complex))
    t_eff, e_eff = effective_level(series.e_target, phase)
    t_res, shifted = shifted_transition_frequency(
        series.e_target, phase, series.e_initial, ref_phase
    )
    res_by_t = dict(zip(t_res, shifted))
    rows = [
        (float(t), float(e), float(res_by_t[t]))
        for t, e in zip(t_eff, e_eff)
        if t in res_by_t
    ]
    write_csv(
        outdir / "levels.csv", cfg.as_dict(), cfg.engine,
        ["t", "e_eff_target", "shifted_resonance"], rows,
    )
    print(f"wrote {phase_csv}, intervals.csv, levels.csv "
          f"({len(intervals)} stability intervals)")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    geom, params, drive, initial, times, targets, coeffs = _evolved(cfg, True)
    if not coeffs:
        raise RuntimeError("no target is connected to the initial configuration")
    series = coeffs[0]
    omega0 = series.omega0
    omegas = np.linspace(args.omega_min, args.omega_max, args.omega_steps)
    outdir = _outdir(cfg)

    def point(omega: float):
        params_w = CouplingParams(cfg.jx, cfg.jy, cfg.jz, d=cfg.d, omega=omega)
        drive_w = DriveSpec.exponential(cfg.d, omega, plaquette=cfg.plaquette)
        cs = evolve_coefficients(
            geom, params_w, drive_w, initial, [series.target], times,
            engine=cfg.engine, quad_tol=cfg.quad_tol,
        )[0]
        ph = decompose(cs)
        k = len(times) - 1
        weight = float(np.abs(cs.values[k]) ** 2)
        if ph.singular[k]:
            predicted = float("nan")
        else:
            predicted = omega0 - float(ph.angle[k]) / float(times[k])
        return weight, predicted

    chunks = np.array_split(np.arange(len(omegas)), cfg.jobs)
    shard_paths = []

    def run_chunk(ci: int) -> Path:
        shard = outdir / f"sweep_shard_{ci}.csv"
        lines = []
        for k in chunks[ci]:
            weight, predicted = point(float(omegas[k]))
            lines.append(f"{omegas[k]:.17g},{weight:.17g},{predicted:.17g}")
        shard.write_text("\n".join(lines) + ("\n" if lines else ""))
        return shard

    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        shard_paths = list(pool.map(run_chunk, range(len(chunks))))

    rows = []
    for shard in shard_paths:
        for line in shard.read_text().splitlines():
            w, wt, pred = line.split(",")
            rows.append((float(w), float(wt), float(pred)))
        shard.unlink()
    rows.sort(key=lambda r: r[0])

    out = outdir / "sweep.csv"
    write_csv(
        out, {**cfg.as_dict(), "omega_min": args.omega_min,
              "omega_max": args.omega_max, "omega_steps": args.omega_steps},
        cfg.engine, ["omega", "weight_at_t_max", "predicted_resonance"], rows,
    )
    _maybe_plot(args, out)

    peak = max(rows, key=lambda r: r[1])
    summary = {
        "omega0": omega0,
        "omega_peak": peak[0],
        "weight_at_peak": peak[1],
        "predicted_shifted_peak": peak[2],
        "t_evaluated": float(times[-1]),
    }
    write_json(outdir / "sweep_summary.json", cfg.as_dict(), cfg.engine, summary)
    print(f"wrote {out}; peak at omega={peak[0]:.6g} "
          f"(omega0={omega0:.6g}, predicted shifted {peak[2]:.6g})")
    return EXIT_OK


def cmd_entropy(cfg: RunConfig, args) -> int:
    geom, params, drive, initial, times, targets, coeffs = _evolved(cfg, True)
    if geom.n_sites > HILBERT_CAP_SITES:
        raise RuntimeError("entropy needs the full Hilbert space; lattice too large")
    rows = []
    for t in times:
        state = assemble_state(coeffs, float(t), initial) if coeffs else None
        if state is None:
            raise RuntimeError("no connected targets; nothing to evolve")
        psi = embed_active_state(geom, initial, [c.target for c in coeffs], state)
        _, s = reduced_entropy(geom, psi, "A")
        rows.append((float(t), float(s)))
    out = _outdir(cfg) / "entropy.csv"
    write_csv(out, cfg.as_dict(), cfg.engine, ["t", "s_a"], rows)
    _maybe_plot(args, out)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_correlate(cfg: RunConfig, args) -> int:
    geom, params, drive, initial, times, targets, coeffs = _evolved(cfg, True)
    outdir = _outdir(cfg)
    rows = []

    t = float(times[-1])
    t0 = 0.0 if args.literal_t0 else float(times[1])
    if coeffs:
        phases = [decompose(c) for c in coeffs]
        import warnings

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            val = correlation_formula(coeffs, phases, t, t0)
        degenerate = bool(caught)
        rows.append((-1, -1, "*", "*", t, t0, float(val.real), float(val.imag), "formula"))
        if degenerate:
            print("note: t0 reference amplitudes all vanish; formula value is "
                  "degenerately zero")

    if geom.n_sites <= HILBERT_CAP_SITES:
        pairs = [(i, j) for i, j, _ in geom.bonds]
        comps = [(a, b) for a in "xyz" for b in "xyz"]
        records = correlation_exact_scan(
            geom, params, drive, initial, pairs, comps, t, tol=cfg.scan_tol
        )
        for r in records:
            rows.append(
                (r.site_i, r.site_j, r.alpha, r.beta, r.t, r.t0,
                 float(r.value.real), float(r.value.imag), r.engine)
            )
        report = selection_rule_report(records, tol=cfg.scan_tol)
        verdict = "consistent" if report["consistent"] else "deviations observed"
        print(
            f"selection rule: {verdict} "
            f"(max same-component {report['max_same_component']:.3e}, "
            f"max cross-component {report['max_cross_component']:.3e})"
        )
    else:
        print("lattice beyond the Hilbert cap; exact scan skipped")

    out = outdir / "correlations.csv"
    write_csv(
        out, {**cfg.as_dict(), "t": t, "t0": t0}, cfg.engine,
        ["i", "j", "alpha", "beta", "t", "t0", "re", "im", "source"], rows,
    )
    print(f"wrote {out}")
    return EXIT_OK


def cmd_thermal(cfg: RunConfig, args) -> int:
    geom, params, drive, initial, times, targets, coeffs = _evolved(cfg, True)
    if geom.n_sites > HILBERT_CAP_SITES:
        raise RuntimeError("thermal mixing materializes full kets; lattice too large")
    if args.members == "weight01":
        members_cfg = [FlipConfig(0, geom.n_plaquettes)] + [
            FlipConfig(1 << q, geom.n_plaquettes) for q in range(geom.n_plaquettes)
        ]
    elif args.members == "all":
        members_cfg = [
            FlipConfig(bits, geom.n_plaquettes)
            for bits in range(1 << geom.n_plaquettes)
        ]
    else:
        members_cfg = [
            FlipConfig(int(tok, 0), geom.n_plaquettes)
            for tok in args.members.split(",")
        ]

    t = float(times[-1])
    members = []
    labels = []
    for config in members_cfg:
        tg = connected_targets(geom, params, config, drive.plaquette, cfg.engine)
        cs = evolve_coefficients(
            geom, params, drive, config, tg, times,
            engine=cfg.engine, quad_tol=cfg.quad_tol,
        )
        if cs:
            state = assemble_state(cs, t, config)
            psi = embed_active_state(geom, config, [c.target for c in cs], state)
        else:
            psi = build_product_ket(geom, config)
        e = energy_expectation(geom, params, config, engine=cfg.engine)
        members.append((e, psi))
        labels.append(f"cfg:{config.hex}")

    ensemble = thermal_ensemble(members, cfg.kt)
    rho = ensemble.density()
    keep = [k for k in range(geom.n_sites) if geom.sublattice[k] == "A"]
    rho_a = partial_trace_matrix(rho.matrix, geom.n_sites, keep)
    summary = {
        "kt": cfg.kt,
        "t_evaluated": t,
        "members": labels,
        "energies": [float(e) for e in ensemble.energies],
        "weights": [float(w) for w in ensemble.weights],
        "trace": rho.trace,
        "purity": rho.purity(),
        "mixture_entropy": entropy_of_density(rho.matrix),
        "sublattice_entropy": entropy_of_density(rho_a),
    }
    outdir = _outdir(cfg)
    if args.emit_density:
        summary["density"] = rho.to_payload()
    write_json(outdir / "thermal.json", cfg.as_dict(), cfg.engine, summary)
    write_csv(
        outdir / "thermal_weights.csv", cfg.as_dict(), cfg.engine,
        ["member", "energy", "weight"],
        list(zip(labels, summary["energies"], summary["weights"])),
    )
    print(f"wrote thermal.json ({len(labels)} members, purity {rho.purity():.6f})")
    return EXIT_OK


def cmd_validate(cfg: RunConfig, args) -> int:
    results = run_acceptance(seed=cfg.seed)
    for r in results:
        print(r.line())
    failures = [r for r in results if not r.passed]
    payload = {
        "passed": len(results) - len(failures),
        "failed": len(failures),
        "failures": [
            {"criterion": r.criterion, "name": r.name, "detail": r.detail}
            for r in failures
        ],
    }
    outdir = _outdir(cfg)
    write_json(outdir / "validate.json", cfg.as_dict(), cfg.engine, payload)
    write_json(
        outdir / "oracle_report.json", cfg.as_dict(), cfg.engine,
        oracle_error_report(),
    )
    if failures:
        print(json.dumps({"failures": payload["failures"]}))
        return EXIT_CHECK_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kitaevsim",
        description="Driven Kitaev honeycomb simulator (hbar = 1 units).",
    )
    parser.add_argument("--version", action="version", version=f"kitaevsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--nx", type=int)
        p.add_argument("--ny", type=int)
        p.add_argument("--jx", type=float)
        p.add_argument("--jy", type=float)
        p.add_argument("--jz", type=float)
        p.add_argument("--d", type=float, help="drive amplitude")
        p.add_argument("--omega", type=float, help="drive frequency")
        p.add_argument("--drive-file", dest="drive_file",
                       help="CSV of t,ReB,ImB samples for a custom drive")
        p.add_argument("--initial", help="initial flip configuration (hex bitmask)")
        p.add_argument("--plaquette", type=int, help="driven plaquette index")
        p.add_argument("--t-max", dest="t_max", type=float)
        p.add_argument("--samples", type=int)
        p.add_argument("--engine", choices=("hilbert", "label"))
        p.add_argument("--quad-tol", dest="quad_tol", type=float)
        p.add_argument("--evolve-tol", dest="evolve_tol", type=float)
        p.add_argument("--scan-tol", dest="scan_tol", type=float)
        p.add_argument("--outdir")
        p.add_argument("--seed", type=int)
        p.add_argument("--jobs", type=int)
        p.add_argument("--kt", type=float)
        p.add_argument("--emit-plot-script", action="store_true")

    p = sub.add_parser("lattice", help="build, validate, and dump the geometry")
    add_common(p)
    p.set_defaults(fn=cmd_lattice)

    p = sub.add_parser("manifold", help="enumerate flip configurations")
    add_common(p)
    p.add_argument("--n", type=int, help="plaquette count (default nx*ny)")
    p.set_defaults(fn=cmd_manifold)

    p = sub.add_parser("evolve", help="first-order coefficient series")
    add_common(p)
    p.add_argument("--connected-only", action="store_true",
                   help="emit only targets with nonzero drive elements")
    p.set_defaults(fn=cmd_evolve)

    p = sub.add_parser("phase", help="phase decomposition and stability")
    add_common(p)
    p.set_defaults(fn=cmd_phase)

    p = sub.add_parser("sweep", help="drive-frequency sweep")
    add_common(p)
    p.add_argument("--omega-min", type=float, required=True)
    p.add_argument("--omega-max", type=float, required=True)
    p.add_argument("--omega-steps", type=int, default=41)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("entropy", help="sublattice entanglement entropy series")
    add_common(p)
    p.set_defaults(fn=cmd_entropy)

    p = sub.add_parser("correlate", help="correlation formula and exact scan")
    add_common(p)
    p.add_argument("--literal-t0", action="store_true",
                   help="evaluate the formula at t0 = 0 (degenerately zero)")
    p.set_defaults(fn=cmd_correlate)

    p = sub.add_parser("thermal", help="Boltzmann mixture of evolved states")
    add_common(p)
    p.add_argument("--members", default="weight01",
                   help="'weight01', 'all', or comma-separated hex bitmasks")
    p.add_argument("--emit-density", action="store_true",
                   help="include the full mixture density matrix in thermal.json")
    p.set_defaults(fn=cmd_thermal)

    p = sub.add_parser("validate", help="run the acceptance property suite")
    add_common(p)
    p.set_defaults(fn=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.fn(cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, ValueError, ArithmeticError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
