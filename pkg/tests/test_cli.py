import numpy as np
import pytest

from ldinfomax.cli import main
from ldinfomax.config import (
    ExperimentConfig,
    experiment_from_mapping,
    experiment_to_mapping,
    load_experiment,
    polytope_from_fields,
    polytope_to_fields,
    read_kv,
    save_experiment,
    write_kv,
)
from ldinfomax.datagen import ScenarioConfig
from ldinfomax.polytopes import PolytopeSpec, preset
from ldinfomax.solver import SolverConfig


def small_experiment(seed=0, **kw):
    scenario = ScenarioConfig(
        r=2, m=4, n=200, rho=0.2, snr_db=30.0,
        polytope=preset("l1_nonneg", 2), seed=seed,
    )
    solver = SolverConfig(iterations=80, record_every=40, seed=seed, mu0=20.0)
    kw.setdefault("trials", 2)
    return ExperimentConfig(scenario=scenario, solver=solver, **kw)


class TestConfigRoundtrip:
    def test_kv_roundtrip(self, tmp_path):
        path = tmp_path / "a.cfg"
        write_kv(path, {"x.y": "1", "z": "hello"})
        assert read_kv(path) == {"x.y": "1", "z": "hello"}

    def test_kv_comments_and_errors(self, tmp_path):
        path = tmp_path / "b.cfg"
        path.write_text("# comment\nscenario.r = 5  # inline\n\n")
        assert read_kv(path) == {"scenario.r": "5"}
        path.write_text("not an assignment\n")
        with pytest.raises(ValueError):
            read_kv(path)

    def test_experiment_roundtrip(self, tmp_path):
        cfg = small_experiment(seed=3, algo="ica", rho_grid=(0.0, 0.5), starts=2)
        path = tmp_path / "exp.cfg"
        save_experiment(cfg, path)
        assert load_experiment(path) == cfg

    def test_noiseless_roundtrip(self):
        cfg = small_experiment()
        from dataclasses import replace

        cfg = replace(cfg, scenario=replace(cfg.scenario, snr_db=None))
        assert experiment_from_mapping(experiment_to_mapping(cfg)) == cfg

    def test_custom_polytope_roundtrip(self):
        p = PolytopeSpec(3, ("signed", "signed", "nonneg"), ((0, 1), (1, 2)))
        fields = polytope_to_fields(p)
        assert fields["scenario.polytope"] == "custom"
        assert polytope_from_fields(fields, 3) == p

    def test_preset_polytope_roundtrip(self):
        p = preset("l1", 4)
        fields = polytope_to_fields(p)
        assert fields == {"scenario.polytope": "l1"}
        assert polytope_from_fields(fields, 4) == p

    def test_defaults_from_empty_mapping(self):
        cfg = experiment_from_mapping({})
        assert cfg == ExperimentConfig()


class TestGen:
    def test_writes_files_and_summary(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.cfg"
        save_experiment(small_experiment(seed=1), cfg_path)
        out = tmp_path / "out"
        assert main(["gen", "--config", str(cfg_path), "--out", str(out)]) == 0
        for name in ("sources.csv", "mixing.csv", "mixtures.csv", "scenario.cfg"):
            assert (out / name).exists()
        text = capsys.readouterr().out
        assert "feasible: True" in text

    def test_noiseless_flag_exact_product(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        save_experiment(small_experiment(seed=2), cfg_path)
        out = tmp_path / "out"
        assert main(["gen", "--config", str(cfg_path), "--out", str(out), "--noiseless"]) == 0
        s = np.loadtxt(out / "sources.csv", delimiter=",")
        h = np.loadtxt(out / "mixing.csv", delimiter=",")
        y = np.loadtxt(out / "mixtures.csv", delimiter=",")
        assert np.allclose(y, h @ s, rtol=1e-9, atol=1e-12)

    def test_same_seed_identical_files(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        save_experiment(small_experiment(seed=3), cfg_path)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["gen", "--config", str(cfg_path), "--out", str(out1)])
        main(["gen", "--config", str(cfg_path), "--out", str(out2)])
        for name in ("sources.csv", "mixing.csv", "mixtures.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestRun:
    def test_convergence_schema_and_rows(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        save_experiment(small_experiment(seed=4, trials=1), cfg_path)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        lines = (out / "convergence.csv").read_text().strip().splitlines()
        assert lines[0] == "iteration,sinr_mean_db,sinr_std_db"
        # iterations=80, record_every=40 -> records at 0, 40, 80
        assert len(lines) == 4
        trials = (out / "trials.csv").read_text().strip().splitlines()
        assert trials[0] == "trial,seed,status,final_objective,final_sinr_db"
        assert (out / "run.cfg").exists()

    def test_deterministic_outputs(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        save_experiment(small_experiment(seed=5), cfg_path)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["run", "--config", str(cfg_path), "--out", str(out1)])
        main(["run", "--config", str(cfg_path), "--out", str(out2)])
        assert (out1 / "convergence.csv").read_bytes() == (out2 / "convergence.csv").read_bytes()
        assert (out1 / "trials.csv").read_bytes() == (out2 / "trials.csv").read_bytes()

    def test_ica_run(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        save_experiment(small_experiment(seed=6, algo="ica", trials=2), cfg_path)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        lines = (out / "convergence.csv").read_text().strip().splitlines()
        assert len(lines) == 2  # single aggregated row for ICA

    def test_run_rejects_both(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.cfg"
        save_experiment(small_experiment(seed=7, algo="both"), cfg_path)
        assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 1
        assert "error" in capsys.readouterr().err


class TestSweep:
    def test_two_rows_for_single_rho_both_algos(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        save_experiment(
            small_experiment(seed=8, algo="both", rho_grid=(0.0,), trials=1), cfg_path
        )
        out = tmp_path / "out"
        assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "rho,algo,sinr_mean_db,sinr_std_db"
        assert len(lines) == 3
        assert lines[1].startswith("0,ld_infomax")
        assert lines[2].startswith("0,ica")

    def test_deterministic(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        save_experiment(
            small_experiment(seed=9, algo="both", rho_grid=(0.0, 0.3), trials=1),
            cfg_path,
        )
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["sweep", "--config", str(cfg_path), "--out", str(out1)])
        main(["sweep", "--config", str(cfg_path), "--out", str(out2)])
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()


class TestEval:
    def test_exact_estimate_inf(self, tmp_path, capsys):
        rng = np.random.default_rng(10)
        truth = rng.standard_normal((3, 40))
        np.savetxt(tmp_path / "t.csv", truth, delimiter=",", fmt="%.17g")
        np.savetxt(tmp_path / "e.csv", truth, delimiter=",", fmt="%.17g")
        assert main(["eval", str(tmp_path / "e.csv"), str(tmp_path / "t.csv"),
                     "--out", str(tmp_path / "o")]) == 0
        assert "SINR: inf" in capsys.readouterr().out

    def test_permuted_negated_estimate_inf(self, tmp_path, capsys):
        rng = np.random.default_rng(11)
        truth = rng.standard_normal((3, 40))
        est = -truth[[2, 0, 1]]
        np.savetxt(tmp_path / "t.csv", truth, delimiter=",", fmt="%.17g")
        np.savetxt(tmp_path / "e.csv", est, delimiter=",", fmt="%.17g")
        assert main(["eval", str(tmp_path / "e.csv"), str(tmp_path / "t.csv"),
                     "--out", str(tmp_path / "o")]) == 0
        assert "SINR: inf" in capsys.readouterr().out

    def test_zero_estimate_closed_form(self, tmp_path, capsys):
        rng = np.random.default_rng(12)
        truth = rng.standard_normal((4, 60))
        est = np.zeros_like(truth)
        np.savetxt(tmp_path / "t.csv", truth, delimiter=",", fmt="%.17g")
        np.savetxt(tmp_path / "e.csv", est, delimiter=",", fmt="%.17g")
        assert main(["eval", str(tmp_path / "e.csv"), str(tmp_path / "t.csv"),
                     "--out", str(tmp_path / "o")]) == 0
        out = capsys.readouterr().out
        value = float([l for l in out.splitlines() if l.startswith("SINR:")][0].split()[1])
        assert value == pytest.approx(10 * np.log10(1 / 4), abs=1e-6)
        report = (tmp_path / "o" / "report.csv").read_text().splitlines()
        assert report[0] == "field,value"

    def test_missing_file_exit_code(self, tmp_path, capsys):
        assert main(["eval", str(tmp_path / "nope.csv"), str(tmp_path / "nope2.csv")]) == 1
        assert "error" in capsys.readouterr().err
