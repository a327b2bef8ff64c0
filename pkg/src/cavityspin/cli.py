"""Batch command-line front end.

Every subcommand reads one JSON config (``--config``), runs deterministically
given the config and seed, and emits CSV (time series, sweeps) or JSON
(reports).  Result files embed the resolved config, so they can be fed back
as configs to reproduce a run.  Report outputs also render a PNG figure next
to the delimited file unless ``--no-plot`` is given.

Exit codes: 0 success, 1 validation/regime failure, 2 numerical
non-convergence, 3 config error.
"""

from __future__ import annotations

import argparse
import copy
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .analysis import correlation, excitation_gap, extremal_eigenpairs, magnetization_profile
from .config import RunConfig, load_config_file, parse_config, parse_settings, parse_thresholds
from .core import QuantumState
from .dynamics import (
    AdiabaticSchedule,
    adiabatic_prepare,
    compare_full_vs_effective,
    minimum_gap,
    sample_static,
    sample_time_dependent,
)
from .effective import (
    SpinModelParams,
    build_spin_hamiltonian,
    derive_couplings,
    spin_params_full,
    spin_params_simple,
)
from .errors import CavitySpinError, ConfigError, ConvergenceError, RegimeError
from .fullmodel import (
    CavityLayout,
    build_eliminated_hamiltonian,
    build_full_hamiltonian,
    build_intermediate_hamiltonian,
    cavity_spin_pm,
    cavity_spin_z,
    cavity_spin_zz,
    dressed_product_state,
    total_excited_population,
    total_photon_number,
)
from .output import render_csv, render_json
from .regime import check_conditions
from . import plotting

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_CONFIG = 3


@dataclass
class TaskResult:
    table: list[dict]
    summary: dict
    exit_code: int = EXIT_OK
    figure: str | None = None        # plotting routine key
    figure_meta: dict = field(default_factory=dict)


def _complex_fields(prefix: str, value: complex) -> dict:
    return {f"{prefix}_re": value.real, f"{prefix}_im": value.imag}


def _spin_params_from_config(cfg: RunConfig, which: str) -> tuple[SpinModelParams, dict]:
    couplings = derive_couplings(cfg.physical)
    if which == "auto":
        which = "full" if cfg.physical.uses_aux_lasers else "simple"
    if which == "simple":
        sp = spin_params_simple(couplings, cfg.physical.atoms_per_cavity, cfg.graph)
    elif which == "full":
        sp = spin_params_full(couplings, cfg.physical.atoms_per_cavity, cfg.graph)
    else:
        raise ConfigError("map must be auto|simple|full", field="map")
    dump = {
        "photon_shift": couplings.photon_shift,
        "photon_shift_aux": couplings.photon_shift_aux,
        "splitting": couplings.splitting,
        "hopping": couplings.hopping,
        "drive_sum": couplings.drive_sum,
        "drive_diff": couplings.drive_diff,
        "aux_drive_sum": couplings.aux_drive_sum,
        "aux_drive_diff": couplings.aux_drive_diff,
        "stark_drive": couplings.stark_drive,
    }
    return sp, dump


def run_validate(cfg: RunConfig, threads: int) -> TaskResult:
    thresholds = parse_thresholds(cfg.task.get("thresholds"))
    report = check_conditions(cfg.physical, thresholds, n_cavities=cfg.graph.n_cavities)
    table = [
        {"name": c.name, "numerator": c.numerator, "denominator": c.denominator,
         "ratio": c.ratio, "threshold": c.threshold, "ok": c.ok}
        for c in report.ratios
    ]
    summary = {
        "condition1_ok": report.condition1_ok,
        "condition2_ok": report.condition2_ok,
        "condition3_ok": report.condition3_ok,
        "budget_ok": report.budget_ok,
        "all_ok": report.all_ok,
        "messages": report.messages,
        "ratios": table,
    }
    return TaskResult(table, summary, EXIT_OK if report.all_ok else EXIT_VALIDATION)


def run_map_params(cfg: RunConfig, threads: int) -> TaskResult:
    sp, couplings = _spin_params_from_config(cfg, cfg.task.get("map", "auto"))
    row = {
        "casimir": sp.casimir,
        "anisotropy": sp.anisotropy,
        "field": sp.field,
        "exchange_xy": sp.exchange_xy,
        "exchange_z": sp.exchange_z,
        "two_s": sp.two_s,
        "photon_shift": couplings["photon_shift"],
        "splitting": couplings["splitting"],
    }
    for key in ("drive_sum", "drive_diff", "aux_drive_sum", "aux_drive_diff", "stark_drive"):
        row.update(_complex_fields(key, couplings[key]))
    summary = {
        "spin_model": {
            "casimir": sp.casimir, "anisotropy": sp.anisotropy, "field": sp.field,
            "exchange_xy": sp.exchange_xy, "exchange_z": sp.exchange_z,
            "two_s": sp.two_s, "n_cavities": sp.graph.n_cavities,
        },
        "couplings": couplings,
    }
    return TaskResult([row], summary)


def run_ground_state(cfg: RunConfig, threads: int) -> TaskResult:
    if cfg.model != "effective":
        raise ConfigError("ground_state runs on the effective spin model", field="model")
    task = cfg.task
    sp, _ = _spin_params_from_config(cfg, task.get("map", "auto"))
    if task.get("invert", False):
        # study the spectrum-inverted counterpart that this realizable model
        # stands in for: its ground physics sits at the top of our spectrum
        sp = replace(sp, inverted=True)
    h = build_spin_hamiltonian(sp)
    # inverted sets answer low-energy questions from the top of the spectrum;
    # analyzing -H keeps ground-state semantics uniform
    analyzed = -1.0 * h if sp.inverted else h
    k = int(task.get("n_eigenvalues", 4))
    tol = float(task.get("tol", 1e-10))
    spectrum = extremal_eigenpairs(analyzed, k, "lowest", tol=tol, seed=cfg.seed)
    gap = excitation_gap(analyzed, tol=tol, seed=cfg.seed)
    ground = QuantumState(h.space, spectrum.eigenvectors[:, 0])
    mags = magnetization_profile(ground)
    pairs = task.get("correlations", [list(e) for e in sp.graph.edges])

    table = [{"record": "energy", "index": i, "value": float(e)}
             for i, e in enumerate(spectrum.eigenvalues)]
    table.append({"record": "gap", "index": 0, "value": gap.gap})
    table.append({"record": "ground_degeneracy", "index": 0, "value": float(gap.ground_degeneracy)})
    for site, m in enumerate(mags):
        table.append({"record": "magnetization", "index": site, "value": float(m)})
    corr_summary = []
    for i, j in pairs:
        corr = correlation(ground, int(i), int(j), "Z")
        table.append({"record": "correlation_zz_raw", "index": f"{i}-{j}", "value": corr.raw})
        table.append({"record": "correlation_zz_connected", "index": f"{i}-{j}", "value": corr.connected})
        corr_summary.append({"sites": [int(i), int(j)], "raw": corr.raw, "connected": corr.connected})
    summary = {
        "energies": [float(e) for e in spectrum.eigenvalues],
        "residuals": [float(r) for r in spectrum.residuals],
        "gap": gap.gap,
        "ground_energy": gap.ground_energy,
        "ground_degeneracy": gap.ground_degeneracy,
        "magnetization": [float(m) for m in mags],
        "correlations": corr_summary,
        "inverted": sp.inverted,
    }
    return TaskResult(table, summary, figure="ground_state")


def _build_detailed(cfg: RunConfig, n_max: int):
    builders = {
        "full": (build_full_hamiltonian, 3, "bare"),
        "intermediate": (build_intermediate_hamiltonian, 2, "dressed"),
        "eliminated": (build_eliminated_hamiltonian, 2, "bare"),
    }
    builder, atom_dim, basis = builders[cfg.model]
    tdo = builder(cfg.physical, cfg.graph, n_max)
    layout = CavityLayout(cfg.graph.n_cavities, cfg.physical.atoms_per_cavity,
                          atom_dim, n_max, atom_basis=basis)
    return tdo, layout


def _default_pattern(n: int) -> list[str]:
    return ["up" if j % 2 == 0 else "down" for j in range(n)]


def _observables_for(cfg: RunConfig, layout: CavityLayout | None, specs):
    """Name -> operator map from an observable spec list."""
    ops = {}
    n = cfg.graph.n_cavities
    if specs is None:
        specs = [{"kind": "sz", "site": j} for j in range(n)]
        if layout is not None:
            specs.append({"kind": "photon_number"})
            if layout.atom_dim == 3:
                specs.append({"kind": "excited_population"})
    if layout is None:
        sp, _ = _spin_params_from_config(cfg, "auto")
        from .core import embed, uniform_space
        from .spins import spin_operators

        space = uniform_space(sp.two_s + 1, n)
        local = spin_operators(sp.two_s)
        from .core import SparseOperator

        pm_local = SparseOperator(local.z.space, (local.plus @ local.minus).matrix, hermitian=True)

        def site_op(kind, site):
            if kind == "sz":
                return embed(local.z, site, space)
            return embed(pm_local, site, space)

        def zz_op(i, j):
            prod = embed(local.z, i, space) @ embed(local.z, j, space)
            return SparseOperator(space, prod.matrix, hermitian=True)
    else:
        def site_op(kind, site):
            return cavity_spin_z(layout, site) if kind == "sz" else cavity_spin_pm(layout, site)

        def zz_op(i, j):
            return cavity_spin_zz(layout, i, j)

    for spec in specs:
        kind = spec.get("kind")
        if kind in ("sz", "pm"):
            site = int(spec.get("site", 0))
            if not 0 <= site < n:
                raise ConfigError(f"site {site} outside 0..{n - 1}", field="observables")
            ops[f"{kind}[{site}]"] = site_op(kind, site)
        elif kind == "zz":
            i, j = (int(x) for x in spec.get("sites", (0, min(1, n - 1))))
            ops[f"zz[{i},{j}]"] = zz_op(i, j)
        elif kind == "photon_number":
            if layout is None:
                raise ConfigError("photon_number needs a detailed model", field="observables")
            ops["photon_number"] = total_photon_number(layout)
        elif kind == "excited_population":
            if layout is None or layout.atom_dim != 3:
                raise ConfigError("excited_population needs the full model", field="observables")
            ops["excited_population"] = total_excited_population(layout)
        elif kind == "norm":
            ops["norm"] = None
        else:
            raise ConfigError(f"unknown observable kind '{kind}'", field="observables")
    return ops


def run_evolve(cfg: RunConfig, threads: int) -> TaskResult:
    task = cfg.task
    if "t_final" not in task:
        raise ConfigError("evolve needs 't_final'", field="evolve.t_final")
    t_final = float(task["t_final"])
    n_points = int(task.get("n_points", 100))
    settings = parse_settings(task.get("settings"))
    pattern = task.get("initial_pattern") or _default_pattern(cfg.graph.n_cavities)

    if cfg.model == "effective":
        sp, _ = _spin_params_from_config(cfg, task.get("map", "auto"))
        h = build_spin_hamiltonian(sp)
        from .dynamics import spin_basis_state

        psi0 = spin_basis_state(sp, pattern)
        times = np.linspace(0.0, t_final, n_points + 1)
        vectors = sample_static(h, psi0, settings, times)
        ops = _observables_for(cfg, None, task.get("observables"))
    else:
        n_max = int(task.get("n_max", 2))
        tdo, layout = _build_detailed(cfg, n_max)
        psi0 = dressed_product_state(layout, pattern)
        if tdo.is_static:
            times = np.linspace(0.0, t_final, n_points + 1)
            vectors = sample_static(tdo.static_part, psi0, settings, times)
        else:
            times, vectors = sample_time_dependent(tdo, psi0, settings, t_final, n_points)
        ops = _observables_for(cfg, layout, task.get("observables"))

    table = []
    for idx, vec in enumerate(vectors):
        row = {"time": float(times[idx])}
        for name, op in ops.items():
            if op is None:  # norm pseudo-observable
                row["norm"] = float(np.vdot(vec, vec).real)
            else:
                row[name] = float(np.vdot(vec, op.matvec(vec)).real)
        table.append(row)
    summary = {
        "model": cfg.model,
        "times": [float(t) for t in times],
        "series": {name: [row[name] for row in table] for name in table[0] if name != "time"},
    }
    return TaskResult(table, summary, figure="time_series")


def run_compare(cfg: RunConfig, threads: int) -> TaskResult:
    if cfg.model == "effective":
        raise ConfigError("compare needs a detailed reference model (full|intermediate|eliminated)",
                          field="model")
    task = cfg.task
    settings = parse_settings(task.get("settings"))
    thresholds = parse_thresholds(task.get("thresholds"))
    t_grid = None
    if task.get("t_final") is not None:
        n_points = int(task.get("n_points", 160))
        t_grid = np.linspace(0.0, float(task["t_final"]), n_points + 1)
    report = compare_full_vs_effective(
        cfg.physical, cfg.graph,
        n_max=int(task.get("n_max", 2)),
        t_grid=t_grid,
        n_points=int(task.get("n_points", 160)),
        model=cfg.model,
        settings=settings,
        thresholds=thresholds,
        initial_pattern=task.get("initial_pattern"),
    )
    table = []
    for idx, t in enumerate(report.times):
        row = {"time": float(t)}
        for name in report.reference_series:
            row[f"ref_{name}"] = float(report.reference_series[name][idx])
            row[f"eff_{name}"] = float(report.effective_series[name][idx])
        row["photon_number"] = float(report.photon_series[idx])
        if report.excited_series is not None:
            row["excited_population"] = float(report.excited_series[idx])
        table.append(row)
    summary = {
        "model": report.model,
        "deviations": report.deviations,
        "max_deviation": report.max_deviation,
        "max_photon_population": report.max_photon_population,
        "max_excited_population": report.max_excited_population,
        "spin_model": {
            "casimir": report.spin_params.casimir,
            "anisotropy": report.spin_params.anisotropy,
            "field": report.spin_params.field,
            "exchange_xy": report.spin_params.exchange_xy,
            "exchange_z": report.spin_params.exchange_z,
        },
    }
    return TaskResult(table, summary, figure="time_series")


def run_adiabatic(cfg: RunConfig, threads: int) -> TaskResult:
    task = cfg.task
    two_s = int(task.get("two_s", cfg.physical.atoms_per_cavity))
    inverted = bool(task.get("inverted", False))
    points_cfg = task.get("control_points")
    if not points_cfg or len(points_cfg) < 2:
        raise ConfigError("adiabatic needs >= 2 control_points", field="adiabatic.control_points")
    durations = task.get("durations")
    if not durations:
        raise ConfigError("adiabatic needs a 'durations' list", field="adiabatic.durations")
    settings = parse_settings(task.get("settings"))

    def point(p):
        profile = p.get("field_profile")
        return (float(p["s"]), SpinModelParams(
            casimir=float(p.get("casimir", 0.0)),
            anisotropy=float(p.get("anisotropy", 0.0)),
            field=float(p.get("field", 0.0)),
            exchange_xy=float(p.get("exchange_xy", 0.0)),
            exchange_z=float(p.get("exchange_z", 0.0)),
            two_s=two_s,
            graph=cfg.graph,
            field_profile=tuple(profile) if profile else None,
            inverted=inverted,
        ))

    try:
        control_points = tuple(point(p) for p in points_cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad control point: {exc}", field="adiabatic.control_points") from exc

    pattern = task.get("initial_pattern") or _default_pattern(cfg.graph.n_cavities)
    from .dynamics import spin_basis_state

    def run_one(duration):
        schedule = AdiabaticSchedule(float(duration), control_points)
        psi0 = spin_basis_state(schedule.at(0.0), pattern)
        result = adiabatic_prepare(schedule, psi0, settings, n_steps=task.get("n_steps"))
        return {"duration": float(duration), "fidelity": result.fidelity,
                "target_energy": result.target_energy, "n_steps": result.n_steps}

    if threads > 1 and len(durations) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            table = list(pool.map(run_one, durations))
    else:
        table = [run_one(d) for d in durations]
    gap = minimum_gap(AdiabaticSchedule(float(durations[0]), control_points))
    summary = {"rows": table, "minimum_gap": gap, "inverted": inverted}
    return TaskResult(table, summary, figure="fidelity")


def _set_path(data: dict, dotted: str, value):
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value


def run_sweep(cfg: RunConfig, threads: int) -> TaskResult:
    task = cfg.task
    parameter = task.get("parameter")
    values = task.get("values")
    inner = task.get("task")
    if not parameter or not isinstance(parameter, str):
        raise ConfigError("sweep needs a dotted 'parameter' path", field="sweep.parameter")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep needs a nonempty 'values' list", field="sweep.values")
    if not isinstance(inner, dict) or len(inner) != 1:
        raise ConfigError("sweep needs a 'task' object with exactly one task block", field="sweep.task")
    inner_name = next(iter(inner))
    if inner_name not in TASKS or inner_name == "sweep":
        raise ConfigError(f"unsupported inner task '{inner_name}'", field="sweep.task")

    def run_point(value):
        data = copy.deepcopy(cfg.resolved)
        data.pop("sweep", None)
        data[inner_name] = copy.deepcopy(inner[inner_name])
        _set_path(data, parameter, value)
        sub_cfg = parse_config(data, expected_task=inner_name)
        sub_cfg = replace(sub_cfg, seed=cfg.seed)
        return TASKS[inner_name](sub_cfg, 1)

    if threads > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_point, values))  # input order preserved
    else:
        results = [run_point(v) for v in values]

    table = []
    summaries = []
    exit_code = EXIT_OK
    for value, res in zip(values, results):
        for row in res.table:
            merged = {parameter: value}
            merged.update(row)
            table.append(merged)
        summaries.append({"value": value, "results": res.summary})
        exit_code = max(exit_code, res.exit_code)
    summary = {"parameter": parameter, "points": summaries}
    return TaskResult(table, summary, exit_code, figure="sweep",
                      figure_meta={"parameter": parameter})


TASKS = {
    "validate": run_validate,
    "map_params": run_map_params,
    "ground_state": run_ground_state,
    "evolve": run_evolve,
    "compare": run_compare,
    "adiabatic": run_adiabatic,
    "sweep": run_sweep,
}

_SUBCOMMANDS = {
    "validate": "validate",
    "map-params": "map_params",
    "ground-state": "ground_state",
    "evolve": "evolve",
    "compare": "compare",
    "adiabatic": "adiabatic",
    "sweep": "sweep",
}


def _render_figure(result: TaskResult, path: str):
    if not result.table:
        return
    try:
        if result.figure == "time_series":
            plotting.plot_time_series(result.table, path)
        elif result.figure == "fidelity":
            plotting.plot_fidelity_table(result.table, path)
        elif result.figure == "ground_state":
            plotting.plot_ground_state(result.table, path)
        elif result.figure == "sweep":
            plotting.plot_sweep(result.table, result.figure_meta["parameter"], path)
    except Exception as exc:  # figures are best-effort; the data file is canonical
        print(f"warning: figure rendering failed: {exc}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavityspin",
        description="Coupled-cavity spin-model simulator (validate, map, diagonalize, evolve, compare, sweep).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, task in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {task} task from a config file")
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--output", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="override the config's output format")
        p.add_argument("--seed", type=int, default=None, help="override the config's seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for sweeps and duration scans")
        p.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True,
                       help="render a PNG next to the output file (--no-plot to skip)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    task_name = _SUBCOMMANDS[args.command]
    try:
        cfg = load_config_file(args.config, expected_task=task_name)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
            cfg.resolved["seed"] = args.seed
        if args.output is not None:
            cfg = replace(cfg, output_path=args.output)
        if args.format is not None:
            cfg = replace(cfg, output_format=args.format)
        result = TASKS[task_name](cfg, max(1, args.threads))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegimeError as exc:
        print(f"regime violation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CavitySpinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if cfg.output_format == "csv":
        text = render_csv(result.table, cfg.resolved)
    else:
        text = render_json(result.summary, cfg.resolved)
    if cfg.output_path:
        with open(cfg.output_path, "w") as handle:
            handle.write(text)
        if args.plot and result.figure and cfg.output_format == "csv":
            _render_figure(result, cfg.output_path)
    else:
        sys.stdout.write(text)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
