"""Command-line driver: config validation, artifacts, determinism."""

import json
import math
import os

import numpy as np
import pytest

from pmit.cli import main


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    header_cfg = json.loads(lines[0][2:])
    cols = lines[1].split(",")
    rows = [dict(zip(cols, line.split(","))) for line in lines[2:]]
    return header_cfg, cols, rows


@pytest.fixture
def scaling_cfg(tmp_path):
    return write_config(
        tmp_path,
        "scaling.json",
        {
            "experiment": "gamma_scaling",
            "n_qubits": 4,
            "depths": [0, 2, 3],
            "n_circuits": 4,
            "noise": {"kind": "depolarizing_gate_level", "p": 0.02},
            "seed": 9,
            "output_path": str(tmp_path / "scaling.csv"),
        },
    )


class TestGammaScaling:
    def test_artifact_and_ordering(self, tmp_path, scaling_cfg):
        assert main(["gamma-scaling", "--config", scaling_cfg]) == 0
        cfg, cols, rows = read_csv(tmp_path / "scaling.csv")
        assert cfg["pmit_version"]
        by_depth = {int(r["depth"]): r for r in rows}
        zero = by_depth[0]
        assert float(zero["mean_log_gamma_pec"]) == 0.0
        assert float(zero["mean_log_gamma_ppec_xi"]) == 0.0
        for depth, r in by_depth.items():
            if depth >= 2:
                pec = float(r["mean_log_gamma_pec"])
                ppec = float(r["mean_log_gamma_ppec"])
                xi = float(r["mean_log_gamma_ppec_xi"])
                assert xi <= ppec <= pec

    def test_deterministic_output(self, tmp_path, scaling_cfg):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["gamma-scaling", "--config", scaling_cfg, "--out", str(out1)]) == 0
        assert main(["gamma-scaling", "--config", scaling_cfg, "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_seed_override_changes_output(self, tmp_path, scaling_cfg):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["gamma-scaling", "--config", scaling_cfg, "--out", str(out1)])
        main(["gamma-scaling", "--config", scaling_cfg, "--seed", "77", "--out", str(out2)])
        assert out1.read_bytes() != out2.read_bytes()


class TestVqeGrouping:
    def test_report(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "vqe.json",
            {
                "experiment": "vqe_grouping",
                "pauli_fidelity": 0.996,
                "seed": 1,
                "output_path": str(tmp_path / "vqe.json.out"),
            },
        )
        assert main(["vqe-grouping", "--config", cfg]) == 0
        report = json.loads((tmp_path / "vqe.json.out").read_text())
        assert (
            report["gamma_ppec_xi"] < report["gamma_ppec"] < report["gamma_pec"]
        )


class TestMbqc:
    def test_small_lattice_report(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "mbqc.json",
            {
                "experiment": "mbqc_gamma",
                "lattices": [{"rows": 2, "cols": 2, "pauli_fidelity": 0.99}],
                "seed": 1,
                "output_path": str(tmp_path / "mbqc.json.out"),
            },
        )
        assert main(["mbqc-gamma", "--config", cfg]) == 0
        report = json.loads((tmp_path / "mbqc.json.out").read_text())
        lat = report["lattices"][0]
        assert lat["gamma_ppec_xi"] <= lat["gamma_pec"]
        assert lat["xi_to_pec_ratio"] == pytest.approx(
            lat["gamma_ppec_xi"] / lat["gamma_pec"]
        )


class TestIsing:
    def test_rows_and_dropped_mass(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "ising.json",
            {
                "experiment": "ising_magnetization",
                "n_qubits": 3,
                "h": 1.0,
                "J": 0.15,
                "dt": 0.25,
                "steps": 2,
                "noise": {"kind": "random_pauli_gate_level", "p": 0.01, "seed": 5},
                "M": 30,
                "shots": 32,
                "epsilon": 1e-6,
                "xi_reduce": True,
                "seed": 7,
                "output_path": str(tmp_path / "ising.csv"),
            },
        )
        assert main(["ising", "--config", cfg]) == 0
        _, cols, rows = read_csv(tmp_path / "ising.csv")
        assert [int(r["step"]) for r in rows] == [1, 2]
        assert "dropped_mass" in cols
        for r in rows:
            assert float(r["gamma_ratio"]) <= 1.0 + 1e-12
            assert float(r["gamma_ppec"]) <= float(r["gamma_pec"]) + 1e-9


class TestMcmcConvergence:
    def test_converges(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "mc.json",
            {
                "experiment": "mcmc_convergence",
                "n_qubits": 3,
                "depth": 4,
                "circuit_seed": 11,
                "noise": {"kind": "depolarizing_gate_level", "p": 0.05},
                "sample_counts": [2000, 50000],
                "seed": 3,
                "output_path": str(tmp_path / "mc.csv"),
            },
        )
        assert main(["mcmc-convergence", "--config", cfg]) == 0
        _, _, rows = read_csv(tmp_path / "mc.csv")
        last = rows[-1]
        assert float(last["gamma_estimate"]) == pytest.approx(
            float(last["analytic_gamma"]), rel=0.05
        )


class TestDistribution:
    def test_samples_and_summary(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "dist.json",
            {
                "experiment": "distribution",
                "n_qubits": 4,
                "depth": 2,
                "circuit_seed": 2,
                "noise": {"kind": "depolarizing_gate_level", "p": 0.02},
                "M": 8,
                "shots": 64,
                "n_estimates": 6,
                "seed": 11,
                "output_path": str(tmp_path / "d.csv"),
            },
        )
        assert main(["distribution", "--config", cfg]) == 0
        text = (tmp_path / "d.csv").read_text().splitlines()
        samples = [l for l in text if l.startswith("sample,")]
        assert len(samples) == 3 * 6
        for key in ("pec_mean", "pec_var", "ppec_gamma", "noiseless"):
            assert any(l.startswith(f"summary,{key}") for l in text)


class TestObservableConfig:
    def test_custom_z_diagonal_observable(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "dist.json",
            {
                "experiment": "distribution",
                "n_qubits": 4,
                "depth": 2,
                "circuit_seed": 2,
                "noise": {"kind": "depolarizing_gate_level", "p": 0.02},
                "observable": [{"coef": 0.5, "pauli": "ZIII"},
                               {"coef": 0.5, "pauli": "IZII"}],
                "M": 4,
                "shots": 32,
                "n_estimates": 3,
                "seed": 11,
                "output_path": str(tmp_path / "d.csv"),
            },
        )
        assert main(["distribution", "--config", cfg]) == 0

    def test_rejects_non_diagonal_observable(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "dist.json",
            {
                "experiment": "distribution",
                "n_qubits": 4,
                "depth": 2,
                "circuit_seed": 2,
                "noise": {"kind": "depolarizing_gate_level", "p": 0.02},
                "observable": [{"coef": 1.0, "pauli": "XIII"}],
                "M": 4,
                "shots": 32,
                "n_estimates": 3,
                "seed": 11,
                "output_path": str(tmp_path / "d.csv"),
            },
        )
        assert main(["distribution", "--config", cfg]) == 2


class TestErrors:
    def test_mismatched_experiment(self, tmp_path, scaling_cfg):
        assert main(["ising", "--config", scaling_cfg]) == 2

    def test_missing_field(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "bad.json",
            {"experiment": "gamma_scaling", "n_qubits": 4, "seed": 1,
             "output_path": str(tmp_path / "x.csv")},
        )
        assert main(["gamma-scaling", "--config", cfg]) == 2

    def test_unreadable_config(self, tmp_path):
        assert main(["ising", "--config", str(tmp_path / "nope.json")]) == 2

    def test_capacity_exit(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "big.json",
            {
                "experiment": "distribution",
                "n_qubits": 25,
                "depth": 2,
                "circuit_seed": 1,
                "noise": {"kind": "depolarizing_gate_level", "p": 0.02},
                "M": 2,
                "shots": 8,
                "n_estimates": 2,
                "seed": 1,
                "output_path": str(tmp_path / "x.csv"),
            },
        )
        assert main(["distribution", "--config", cfg]) == 3

    def test_non_invertible_exit(self, tmp_path):
        # p = 15/16 zeroes every non-identity eigenvalue of the two-qubit
        # depolarizing channel
        cfg = write_config(
            tmp_path,
            "noninv.json",
            {
                "experiment": "gamma_scaling",
                "n_qubits": 4,
                "depths": [2],
                "n_circuits": 1,
                "noise": {"kind": "depolarizing_gate_level", "p": 0.9375},
                "seed": 1,
                "output_path": str(tmp_path / "x.csv"),
            },
        )
        assert main(["gamma-scaling", "--config", cfg]) == 4
