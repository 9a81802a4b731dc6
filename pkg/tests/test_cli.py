"""CLI tests: schemas, determinism, exit codes, round-trip precision."""

import csv
import json
import math

import numpy as np
import pytest

from sptgame import spin_model as sm
from sptgame.cli import main
from sptgame.game import GameSpec, win_probability
from sptgame.pauli import from_label
from sptgame.thermal_cluster import ThermalPoint, critical_temperature, min_win


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestClusterExact:
    def test_schema_and_anchor_values(self, tmp_path):
        code = main([
            "cluster-exact", "--n", "64", "--tmin", "0.327", "--tmax", "0.327",
            "--tsteps", "1", "--out", str(tmp_path),
        ])
        assert code == 0
        rows = read_csv(tmp_path / "cluster_exact.csv")
        assert list(rows[0]) == ["n", "T", "P_min", "T_c"]
        assert abs(float(rows[0]["P_min"]) - 7 / 8) < 1e-3
        assert abs(float(rows[0]["T_c"]) - 0.327) < 5e-3

    def test_round_trip_precision(self, tmp_path):
        main(["cluster-exact", "--n", "10", "--tmin", "0.2", "--tmax", "0.9",
              "--tsteps", "5", "--out", str(tmp_path)])
        for record in read_csv(tmp_path / "cluster_exact.csv"):
            temperature = float(record["T"])
            expected = min_win(ThermalPoint(10, 1.0 / temperature, 2.0))
            assert float(record["P_min"]) == expected  # shortest round trip is exact

    def test_manifest_written(self, tmp_path):
        main(["cluster-exact", "--n", "8", "--tmin", "0.5", "--tmax", "0.5",
              "--tsteps", "1", "--out", str(tmp_path)])
        manifest = json.loads((tmp_path / "cluster_exact.manifest.json").read_text())
        assert manifest["command"] == "cluster-exact"
        assert manifest["outputs"] == [str(tmp_path / "cluster_exact.csv")]
        assert manifest["seed"] == 0
        assert "wall_time_s" in manifest


class TestGame:
    def test_cluster_rows_and_determinism(self, tmp_path):
        args = ["game", "--n", "6", "--source", "cluster", "--trials", "400",
                "--seed", "3", "--out", str(tmp_path)]
        assert main(args) == 0
        body1 = (tmp_path / "game.csv").read_bytes()
        rows = read_csv(tmp_path / "game.csv")
        assert len(rows) == 6
        for record in rows:
            assert float(record["empirical"]) == 1.0
            assert float(record["analytic"]) == 1.0
        assert main(args) == 0
        assert (tmp_path / "game.csv").read_bytes() == body1

    def test_thermal_rows_match_direct_evaluation(self, tmp_path):
        code = main(["game", "--n", "6", "--source", "thermal-dense", "--t", "0.6",
                     "--trials", "300", "--seed", "1", "--out", str(tmp_path)])
        assert code == 0
        rho = sm.gibbs_density(sm.ModelParams(6, 0.0, 0.0), 0.6)
        for record in read_csv(tmp_path / "game.csv"):
            pair = (from_label(record["g"]), from_label(record["h"]))
            spec = GameSpec.equidistant(3, pair)
            assert abs(float(record["analytic"]) - win_probability(rho, spec)) < 1e-12
            assert abs(float(record["empirical"]) - float(record["analytic"])) \
                < 4 * float(record["sigma"])


class TestAxis:
    def test_schema_and_closed_form_column(self, tmp_path):
        code = main(["axis", "--axis", "X", "--jx", "0", "--n", "16",
                     "--tmin", "0.4", "--tmax", "0.4", "--tsteps", "1",
                     "--out", str(tmp_path)])
        assert code == 0
        rows = read_csv(tmp_path / "axis.csv")
        assert len(rows) == 6
        ref = min_win(ThermalPoint(16, 1.0 / 0.4, 2.0))
        for record in rows:
            assert abs(float(record["P_min"]) - ref) < 1e-12

    def test_zz_delegates(self, tmp_path):
        main(["axis", "--axis", "ZZ", "--jzz", "0.5", "--n", "12",
              "--tmin", "0.5", "--tmax", "0.5", "--tsteps", "1",
              "--out", str(tmp_path)])
        rows = read_csv(tmp_path / "axis.csv")
        assert rows[0]["axis"] == "ZZ"


class TestMetts:
    def test_schema_and_win_rows(self, tmp_path):
        code = main(["metts", "--n", "6", "--point", "0:0:0.5", "--iters", "20",
                     "--warmup", "3", "--seed", "2", "--out", str(tmp_path)])
        assert code == 0
        rows = read_csv(tmp_path / "metts.csv")
        labels = {record["observable"] for record in rows}
        assert "U(z)" in labels and "P_min" in labels
        assert any(label.startswith("T(") for label in labels)
        p_min_rows = [r for r in rows if r["observable"] == "P_min"]
        assert len(p_min_rows) == 1
        assert 0.0 <= float(p_min_rows[0]["mean"]) <= 1.0 + 1e-9

    def test_missing_point_is_validation_error(self, tmp_path):
        assert main(["metts", "--n", "4", "--out", str(tmp_path)]) == 2


class TestPhaseDiagram:
    def test_corner_cells(self, tmp_path):
        code = main(["phase-diagram", "--n", "6", "--jx", "0,2.5", "--jzz", "0",
                     "--out", str(tmp_path)])
        assert code == 0
        rows = read_csv(tmp_path / "phase_diagram.csv")
        origin = [r for r in rows if float(r["J_X"]) == 0.0][0]
        assert abs(float(origin["min_sop"]) - 1.0) < 1e-9
        assert abs(float(origin["P_min"]) - 1.0) < 1e-9
        trivial = [r for r in rows if float(r["J_X"]) == 2.5][0]
        assert float(trivial["min_sop"]) < 1 / 3
        assert float(trivial["P_min"]) < 7 / 8

    def test_guard_exit_code(self, tmp_path):
        assert main(["phase-diagram", "--n", "14", "--out", str(tmp_path)]) == 3

    def test_odd_block_count_rejected(self, tmp_path):
        assert main(["phase-diagram", "--n", "8", "--out", str(tmp_path)]) == 2


class TestClassical:
    def test_report(self, tmp_path):
        assert main(["classical", "--out", str(tmp_path)]) == 0
        record = read_csv(tmp_path / "classical.csv")[0]
        assert float(record["optimum"]) == 0.875
        assert float(record["optimum_fixed_b"]) == 0.875
        assert int(record["strategies_enumerated"]) == 262_144
