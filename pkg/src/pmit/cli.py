"""Batch experiment driver.

``pmit <command> --config <path> [--seed N] [--out <path>]`` reads a JSON
experiment configuration, runs the experiment, and writes a CSV or JSON
artifact.  Every CSV starts with one comment line carrying the full resolved
configuration and the library version, so outputs are self-describing; the
same configuration and seed produce byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 capacity error, 4 numeric
failure (non-invertible channel).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .channels import ChannelError, NonInvertibleChannelError
from .circuits import (
    build_graph_state_circuit,
    build_grouping_circuit,
    build_ising_trotter,
    random_clifford_circuit,
    transpile_linear,
)
from .engine import (
    InverseOptions,
    ReadoutModel,
    build_global_inverse,
    mcmc_global_estimate,
    pec_total_gamma,
    run_pec,
    run_ppec,
)
from .noise import gate_depolarizing_noise, gate_random_pauli_noise, spl_noise
from .paulis import PauliString
from .sim import (
    CapacityError,
    ObservableSpec,
    exact_density_evolve,
    expectation,
    magnetization_observable,
    observable_from_json,
    run_trajectory,
)

EXPERIMENTS = (
    "gamma_scaling",
    "spl_depth_sweep",
    "distribution",
    "vqe_grouping",
    "mbqc_gamma",
    "ising_magnetization",
    "mcmc_convergence",
)


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _require(cfg: dict, field: str, kind, cond=None, msg=""):
    if field not in cfg:
        raise ConfigError(f"missing required field {field!r}")
    val = cfg[field]
    if not isinstance(val, kind):
        raise ConfigError(f"field {field!r} must be {kind}, got {type(val).__name__}")
    if cond is not None and not cond(val):
        raise ConfigError(f"field {field!r} invalid: {msg} (got {val!r})")
    return val


def _positive_int(cfg, field):
    return _require(cfg, field, int, lambda v: v > 0, "must be positive")


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    exp = _require(cfg, "experiment", str, lambda v: v in EXPERIMENTS,
                   f"must be one of {EXPERIMENTS}")
    return cfg


def _header(cfg: dict) -> str:
    payload = dict(cfg)
    payload["pmit_version"] = __version__
    return "# " + json.dumps(payload, sort_keys=True)


def _write_lines(path: str, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _workers() -> int:
    return max(1, int(os.environ.get("PMIT_THREADS", "1")))


def _spawn_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


# --------------------------------------------------------------------------
# gamma scaling (depolarizing gate noise or sparse-product depth sweep)
# --------------------------------------------------------------------------


def _scaling_point(args):
    cfg, depth, circuit_index = args
    seed = cfg["seed"]
    rng = _spawn_rng(seed, depth, circuit_index)
    circ = random_clifford_circuit(cfg["n_qubits"], depth, rng)
    noise_cfg = cfg["noise"]
    if noise_cfg["kind"] == "depolarizing_gate_level":
        noise = gate_depolarizing_noise(circ, noise_cfg["p"])
    elif noise_cfg["kind"] == "spl_linear_topology":
        noise = spl_noise(circ, noise_cfg["pauli_fidelity"],
                          attach=cfg.get("attach", "device"))
    else:
        raise ConfigError(f"unsupported noise kind {noise_cfg['kind']!r} for scaling")
    opts_common = dict(
        epsilon=cfg.get("epsilon", 0.0),
        expansion_budget=cfg.get("expansion_budget", 4096),
    )
    g_pec = pec_total_gamma(circ, noise)
    g_ppec = build_global_inverse(
        circ, noise, InverseOptions(xi_reduce=False, **opts_common)
    ).gamma
    g_xi = build_global_inverse(
        circ, noise, InverseOptions(xi_reduce=True, **opts_common)
    ).gamma
    noisy_ops = sum(
        len(noise.channels_at(i)) for i in range(len(circ.layers))
    )
    return depth, circuit_index, noisy_ops, g_pec, g_ppec, g_xi


def cmd_gamma_scaling(cfg: dict, out_path: str) -> None:
    _positive_int(cfg, "n_qubits")
    depths = _require(cfg, "depths", list, lambda v: all(isinstance(d, int) and d >= 0 for d in v), "list of ints >= 0")
    n_circuits = _positive_int(cfg, "n_circuits")
    _require(cfg, "noise", dict)
    jobs = [(cfg, d, i) for d in depths for i in range(n_circuits)]
    if _workers() > 1:
        with ProcessPoolExecutor(max_workers=_workers()) as pool:
            results = list(pool.map(_scaling_point, jobs, chunksize=4))
    else:
        results = [_scaling_point(j) for j in jobs]
    results.sort(key=lambda r: (r[0], r[1]))
    per_depth: dict[int, list] = {}
    for depth, _, noisy_ops, g1, g2, g3 in results:
        per_depth.setdefault(depth, []).append((noisy_ops, g1, g2, g3))
    lines = [_header(cfg),
             "depth,mean_noisy_ops,mean_log_gamma_pec,std_log_gamma_pec,"
             "mean_log_gamma_ppec,std_log_gamma_ppec,"
             "mean_log_gamma_ppec_xi,std_log_gamma_ppec_xi"]
    for depth in sorted(per_depth):
        rows = np.array(per_depth[depth])
        logs = np.log(rows[:, 1:4])
        vals = [depth, float(rows[:, 0].mean())]
        for col in range(3):
            vals.extend([float(logs[:, col].mean()), float(logs[:, col].std(ddof=0))])
        lines.append(",".join([str(vals[0])] + [_fmt(v) for v in vals[1:]]))
    _write_lines(out_path, lines)


# --------------------------------------------------------------------------
# distribution of mitigated estimates (three methods)
# --------------------------------------------------------------------------


def _distribution_setup(cfg: dict):
    n = cfg["n_qubits"]
    circ = random_clifford_circuit(
        n, cfg["depth"], np.random.default_rng(cfg["circuit_seed"])
    )
    noise = gate_depolarizing_noise(circ, cfg["noise"]["p"])
    ro_rng = _spawn_rng(cfg["seed"], 999)
    lo, hi = cfg.get("readout_range", [0.01, 0.03])
    readout = ReadoutModel(
        tuple(
            (float(e), float(h))
            for e, h in zip(ro_rng.uniform(lo, hi, n), ro_rng.uniform(lo, hi, n))
        )
    )
    if "observable" in cfg:
        obs = observable_from_json(cfg["observable"])
        if not obs.is_z_diagonal():
            raise ConfigError(
                "the distribution experiment measures in the computational "
                "basis; the observable must contain only Z and I letters"
            )
    else:
        obs = ObservableSpec.single(1.0, PauliString.single(n, 0, "Z"))
    return circ, noise, readout, obs


def _distribution_chunk(args):
    cfg, method, start, count = args
    circ, noise, readout, obs = _distribution_setup(cfg)
    opts = InverseOptions(
        xi_reduce=(method == "ppec_xi"), epsilon=cfg.get("epsilon", 0.0)
    )
    gi = None
    if method in ("ppec", "ppec_xi"):
        gi = build_global_inverse(circ, noise, opts, readout=readout)
    out = []
    for i in range(start, start + count):
        rng = _spawn_rng(cfg["seed"], {"pec": 1, "ppec": 2, "ppec_xi": 3}[method], i)
        if method == "pec":
            est = run_pec(circ, noise, obs, cfg["M"], cfg["shots"], rng, readout=readout)
        else:
            est = run_ppec(
                circ, noise, obs, cfg["M"], cfg["shots"], rng,
                options=opts, readout=readout, global_inverse=gi,
            )
        out.append((method, i, est.mean, est.gamma_total))
    return out


def cmd_distribution(cfg: dict, out_path: str) -> None:
    for f in ("n_qubits", "depth", "M", "shots", "n_estimates", "circuit_seed"):
        _positive_int(cfg, f)
    _require(cfg, "noise", dict)
    n_est = cfg["n_estimates"]
    methods = ("pec", "ppec", "ppec_xi")
    chunk = max(1, n_est // max(1, _workers() * 4))
    jobs = []
    for method in methods:
        start = 0
        while start < n_est:
            cnt = min(chunk, n_est - start)
            jobs.append((cfg, method, start, cnt))
            start += cnt
    if _workers() > 1:
        with ProcessPoolExecutor(max_workers=_workers()) as pool:
            chunks = list(pool.map(_distribution_chunk, jobs))
    else:
        chunks = [_distribution_chunk(j) for j in jobs]
    rows = [r for ch in chunks for r in ch]
    rows.sort(key=lambda r: (methods.index(r[0]), r[1]))
    # exact noiseless reference for the summary
    circ, noise, readout, obs = _distribution_setup(cfg)
    state = run_trajectory(circ, None, np.random.default_rng(0))
    noiseless = expectation(state, obs)
    lines = [_header(cfg), "kind,method,index,value"]
    for method, i, mean, _ in rows:
        lines.append(f"sample,{method},{i},{_fmt(mean)}")
    lines.append(f"summary,noiseless,,{_fmt(noiseless)}")
    for method in methods:
        vals = np.array([r[2] for r in rows if r[0] == method])
        lines.append(f"summary,{method}_mean,,{_fmt(vals.mean())}")
        lines.append(f"summary,{method}_var,,{_fmt(vals.var(ddof=1))}")
        gam = next(r[3] for r in rows if r[0] == method)
        lines.append(f"summary,{method}_gamma,,{_fmt(gam)}")
    _write_lines(out_path, lines)


# --------------------------------------------------------------------------
# application gamma reports
# --------------------------------------------------------------------------


def cmd_vqe_grouping(cfg: dict, out_path: str) -> None:
    f = cfg.get("pauli_fidelity", 0.996)
    if not 0.0 < f <= 1.0:
        raise ConfigError("pauli_fidelity must be in (0, 1]")
    routed = transpile_linear(
        build_grouping_circuit(), policy=cfg.get("routing", "reference_mix")
    )
    noise = spl_noise(routed.circuit, f, attach=cfg.get("attach", "gate"))
    budget = cfg.get("expansion_budget", 4096)
    g_pec = pec_total_gamma(routed.circuit, noise)
    g_ppec = build_global_inverse(
        routed.circuit, noise,
        InverseOptions(xi_reduce=False, expansion_budget=budget),
    ).gamma
    g_xi = build_global_inverse(
        routed.circuit, noise,
        InverseOptions(xi_reduce=True, expansion_budget=budget),
    ).gamma
    report = {
        "config": cfg,
        "two_qubit_gates": routed.circuit.two_qubit_gate_count(),
        "gamma_pec": g_pec,
        "gamma_ppec": g_ppec,
        "gamma_ppec_xi": g_xi,
    }
    _write_lines(out_path, [json.dumps(report, indent=1, sort_keys=True)])


def cmd_mbqc_gamma(cfg: dict, out_path: str) -> None:
    lattices = _require(cfg, "lattices", list, lambda v: len(v) > 0, "nonempty")
    reports = []
    for lat in lattices:
        rows, cols = lat["rows"], lat["cols"]
        f = lat["pauli_fidelity"]
        budget = lat.get("expansion_budget", cfg.get("expansion_budget", 4096))
        gs = build_graph_state_circuit(
            rows, cols, topology="linear",
            policy=cfg.get("routing", "reference_mix"),
        )
        noise = spl_noise(gs.circuit, f, attach=cfg.get("attach", "gate"))
        g_pec = pec_total_gamma(gs.circuit, noise)
        g_xi = build_global_inverse(
            gs.circuit, noise,
            InverseOptions(xi_reduce=True, expansion_budget=budget),
        ).gamma
        reports.append(
            {
                "rows": rows,
                "cols": cols,
                "pauli_fidelity": f,
                "expansion_budget": budget,
                "two_qubit_gates": gs.circuit.two_qubit_gate_count(),
                "gamma_pec": g_pec,
                "gamma_ppec_xi": g_xi,
                "xi_to_pec_ratio": g_xi / g_pec,
            }
        )
    _write_lines(
        out_path,
        [json.dumps({"config": cfg, "lattices": reports}, indent=1, sort_keys=True)],
    )


# --------------------------------------------------------------------------
# Ising magnetization sweep
# --------------------------------------------------------------------------


def _ising_point(args):
    cfg, step = args
    n = cfg["n_qubits"]
    circ = build_ising_trotter(n, cfg["h"], cfg["J"], cfg["dt"], step)
    noise = gate_random_pauli_noise(
        circ, cfg["noise"]["p"], np.random.default_rng(cfg["noise"]["seed"])
    )
    axes = ("y", "z")
    obs = {ax: magnetization_observable(n, ax) for ax in axes}
    noiseless = {ax: exact_density_evolve(circ, None).expectation(obs[ax]) for ax in axes}
    noisy = {ax: exact_density_evolve(circ, noise).expectation(obs[ax]) for ax in axes}
    opts = InverseOptions(
        xi_reduce=cfg.get("xi_reduce", True), epsilon=cfg.get("epsilon", 1e-6)
    )
    gi = build_global_inverse(circ, noise, opts)
    g_pec = pec_total_gamma(circ, noise)
    row = {"step": step, "gamma_pec": g_pec, "gamma_ppec": gi.gamma,
           "gamma_ratio": gi.gamma / g_pec, "dropped_mass": gi.dropped_mass}
    M, shots = cfg["M"], cfg["shots"]
    for ax in axes:
        row[f"noiseless_m{ax}"] = noiseless[ax]
        row[f"noisy_m{ax}"] = noisy[ax]
        pec = run_pec(circ, noise, obs[ax], M, shots,
                      _spawn_rng(cfg["seed"], step, 1, ord(ax)))
        ppec = run_ppec(circ, noise, obs[ax], M, shots,
                        _spawn_rng(cfg["seed"], step, 2, ord(ax)),
                        options=opts, global_inverse=gi)
        row[f"pec_m{ax}"] = pec.mean
        row[f"pec_stderr_m{ax}"] = pec.stderr
        row[f"ppec_m{ax}"] = ppec.mean
        row[f"ppec_stderr_m{ax}"] = ppec.stderr
    return row


_ISING_COLUMNS = [
    "step", "noiseless_my", "noisy_my", "pec_my", "pec_stderr_my",
    "ppec_my", "ppec_stderr_my", "noiseless_mz", "noisy_mz",
    "pec_mz", "pec_stderr_mz", "ppec_mz", "ppec_stderr_mz",
    "gamma_pec", "gamma_ppec", "gamma_ratio", "dropped_mass",
]


def cmd_ising(cfg: dict, out_path: str) -> None:
    for f in ("n_qubits", "steps", "M", "shots"):
        _positive_int(cfg, f)
    for f in ("h", "J", "dt"):
        _require(cfg, f, (int, float))
    noise_cfg = _require(cfg, "noise", dict)
    if noise_cfg.get("kind") != "random_pauli_gate_level":
        raise ConfigError("ising experiment expects random_pauli_gate_level noise")
    jobs = [(cfg, s) for s in range(1, cfg["steps"] + 1)]
    if _workers() > 1:
        with ProcessPoolExecutor(max_workers=_workers()) as pool:
            rows = list(pool.map(_ising_point, jobs))
    else:
        rows = [_ising_point(j) for j in jobs]
    rows.sort(key=lambda r: r["step"])
    lines = [_header(cfg), ",".join(_ISING_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                str(row["step"]) if c == "step" else _fmt(row[c])
                for c in _ISING_COLUMNS
            )
        )
    _write_lines(out_path, lines)


# --------------------------------------------------------------------------
# Monte-Carlo convergence
# --------------------------------------------------------------------------


def cmd_mcmc_convergence(cfg: dict, out_path: str) -> None:
    _positive_int(cfg, "n_qubits")
    _positive_int(cfg, "depth")
    counts = _require(cfg, "sample_counts", list,
                      lambda v: all(isinstance(x, int) and x > 0 for x in v),
                      "positive ints")
    noise_cfg = _require(cfg, "noise", dict)
    circ = random_clifford_circuit(
        cfg["n_qubits"], cfg["depth"], np.random.default_rng(cfg["circuit_seed"])
    )
    if noise_cfg["kind"] != "depolarizing_gate_level":
        raise ConfigError("mcmc experiment expects depolarizing_gate_level noise")
    noise = gate_depolarizing_noise(circ, noise_cfg["p"])
    analytic = build_global_inverse(circ, noise, InverseOptions(xi_reduce=True))
    ana_corr = {p: abs(c) for (p, _), c in analytic.corrections().items()}
    ana_total = sum(ana_corr.values())
    lines = [_header(cfg),
             "n_samples,gamma_ratio,gamma_estimate,analytic_gamma,tv_distance"]
    for idx, n_samples in enumerate(counts):
        est = mcmc_global_estimate(
            circ, noise, n_samples, _spawn_rng(cfg["seed"], idx)
        )
        emp = {p: abs(v) for p, v in est.tallies.items()}
        emp_total = sum(emp.values())
        keys = set(emp) | set(ana_corr)
        tv = 0.5 * sum(
            abs(emp.get(k, 0) / emp_total - ana_corr.get(k, 0) / ana_total)
            for k in keys
        )
        lines.append(
            f"{n_samples},{_fmt(est.gamma_ratio)},{_fmt(est.gamma_estimate)},"
            f"{_fmt(analytic.gamma)},{_fmt(tv)}"
        )
    _write_lines(out_path, lines)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

_COMMANDS = {
    "gamma-scaling": (cmd_gamma_scaling, ("gamma_scaling", "spl_depth_sweep")),
    "distribution": (cmd_distribution, ("distribution",)),
    "vqe-grouping": (cmd_vqe_grouping, ("vqe_grouping",)),
    "mbqc-gamma": (cmd_mbqc_gamma, ("mbqc_gamma",)),
    "ising": (cmd_ising, ("ising_magnetization",)),
    "mcmc-convergence": (cmd_mcmc_convergence, ("mcmc_convergence",)),
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pmit",
        description="quasi-probability error mitigation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
    args = parser.parse_args(argv)
    func, allowed = _COMMANDS[args.command]
    try:
        cfg = load_config(args.config)
        if cfg["experiment"] not in allowed:
            raise ConfigError(
                f"config experiment {cfg['experiment']!r} does not match "
                f"command {args.command!r}"
            )
        if args.seed is not None:
            cfg["seed"] = args.seed
        if "seed" not in cfg:
            raise ConfigError("missing required field 'seed'")
        out = args.out or cfg.get("output_path")
        if not out:
            raise ConfigError("no output path (config output_path or --out)")
        func(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except (NonInvertibleChannelError, ChannelError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
