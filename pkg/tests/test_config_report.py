import json

import numpy as np
import pytest

from qbrisk.closed_form import direct_bound
from qbrisk.config import config_hash, load_scenario, scenario_from_config
from qbrisk.errors import InvalidInput, ToolkitError
from qbrisk.models import compute_averages, get_scenario
from qbrisk.report import RunPlan, flat_rows, report_json, rows_csv, run, sweep


def coin_table_config():
    up = [[[0.75, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.25, 0.0]]]
    down = [[[0.25, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.75, 0.0]]]
    return {
        "name": "coin_inline",
        "model": {"table": [{"theta": [1.0], "state": up},
                            {"theta": [-1.0], "state": down}]},
        "prior": {"nodes": [{"theta": [1.0], "weight": 0.5},
                            {"theta": [-1.0], "weight": 0.5}]},
        "weight": {"constant": [[1.0]]},
    }


class TestConfig:
    def test_inline_table_matches_catalog_coin(self):
        sc = scenario_from_config(coin_table_config())
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        assert direct_bound(avg).value == pytest.approx(0.75, abs=1e-12)

    def test_named_model_with_params(self):
        doc = {
            "model": "qubit_zrotation",
            "model_params": {"bloch_x": 0.8},
            "prior": {"density": {"kind": "gaussian", "mean": [0.0], "sigma": [0.4]},
                      "box": [[-1.2, 1.2]], "rule": "gauss_legendre", "points": 21},
            "weight": {"constant": [[1.0]]},
        }
        sc = scenario_from_config(doc, name="from_config")
        reference = get_scenario("rotation_gaussian")
        ref_avg = compute_averages(reference.model, reference.prior, reference.weight)
        avg = compute_averages(sc.model, sc.prior, sc.weight)
        assert direct_bound(avg).value == pytest.approx(
            direct_bound(ref_avg).value, abs=1e-12)

    def test_varying_weight_table(self):
        doc = coin_table_config()
        doc["weight"] = {"varying": [[[1.0]], [[2.0]]]}
        sc = scenario_from_config(doc)
        assert not sc.weight.is_constant
        assert sc.weight.at([-1.0])[0, 0] == 2.0

    def test_varying_weight_table_length_checked(self):
        doc = coin_table_config()
        doc["weight"] = {"varying": [[[1.0]]]}
        with pytest.raises(InvalidInput):
            scenario_from_config(doc)

    def test_prior_node_missing_from_table(self):
        doc = coin_table_config()
        doc["prior"]["nodes"].append({"theta": [0.0], "weight": 0.1})
        doc["prior"]["nodes"][0]["weight"] = 0.45
        doc["prior"]["nodes"][1]["weight"] = 0.45
        with pytest.raises(InvalidInput):
            scenario_from_config(doc)

    def test_density_prior_requires_named_model(self):
        doc = coin_table_config()
        doc["prior"] = {"density": {"kind": "uniform"}, "box": [[-1, 1]], "points": 5}
        with pytest.raises(InvalidInput):
            scenario_from_config(doc)

    def test_missing_key(self):
        doc = coin_table_config()
        del doc["weight"]
        with pytest.raises(InvalidInput):
            scenario_from_config(doc)

    def test_unknown_model_name(self):
        doc = coin_table_config()
        doc["model"] = "mystery"
        with pytest.raises(InvalidInput):
            scenario_from_config(doc)

    def test_hash_sensitivity(self):
        a = coin_table_config()
        b = coin_table_config()
        assert config_hash(a) == config_hash(b)
        b["weight"]["constant"][0][0] = 2.0
        assert config_hash(a) != config_hash(b)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "coin.json"
        path.write_text(json.dumps(coin_table_config()))
        sc, digest = load_scenario(path)
        assert sc.name == "coin_inline"
        assert digest == config_hash(coin_table_config())


class TestRun:
    def test_direct_only_point_mass_like(self):
        plan = RunPlan(scenarios=(get_scenario("coin_two_point"),), bounds=("direct",))
        report = run(plan)
        entries = report["scenarios"][0]["bounds"]
        assert len(entries) == 1
        assert entries[0]["name"] == "direct"
        assert entries[0]["value"] == pytest.approx(0.75, abs=1e-12)

    def test_full_plan_on_coin_everything_075(self):
        plan = RunPlan(scenarios=(get_scenario("coin_two_point"),),
                       lambda_grid=(-1.0, 0.0, 1.0))
        report = run(plan)
        sc_rep = report["scenarios"][0]
        for entry in sc_rep["bounds"]:
            assert entry["status"] == "ok", entry
            if entry["name"] != "personick_matrix":
                assert entry["value"] == pytest.approx(0.75, abs=1e-5), entry
        assert all(chk["passed"] for chk in sc_rep["ordering_checks"])
        assert sc_rep["oracle_comparisons"]
        for cmp_ in sc_rep["oracle_comparisons"]:
            assert cmp_["gap"] <= 1e-6

    def test_error_isolation_varying_weight(self):
        plan = RunPlan(scenarios=(get_scenario("displacement_weighted"),),
                       bounds=("direct", "bld", "bnh"), lambda_grid=(0.0,))
        report = run(plan)
        entries = {(e["name"], e.get("lambda")): e for e in report["scenarios"][0]["bounds"]}
        assert entries[("bld", 0.0)]["status"] == "error"
        assert "UnsupportedWeight" in entries[("bld", 0.0)]["error"]
        assert entries[("direct", None)]["status"] == "ok"
        assert entries[("bnh", None)]["status"] == "ok"

    def test_determinism_byte_identical(self):
        plan = RunPlan(scenarios=(get_scenario("coin_two_point"),),
                       bounds=("direct", "bld", "bnh"), lambda_grid=(0.0, 1.0))
        assert report_json(run(plan)) == report_json(run(plan))

    def test_personick_matrix_entry_carries_matrix(self):
        plan = RunPlan(scenarios=(get_scenario("displacement_2param"),),
                       bounds=("personick_matrix",))
        entry = run(plan)["scenarios"][0]["bounds"][0]
        assert np.asarray(entry["matrix"]).shape == (2, 2)

    def test_unknown_bound_rejected(self):
        with pytest.raises(ToolkitError):
            RunPlan(scenarios=(get_scenario("coin_two_point"),), bounds=("qcrb",))

    def test_csv_rows(self):
        plan = RunPlan(scenarios=(get_scenario("coin_two_point"),),
                       bounds=("direct", "bld"), lambda_grid=(0.0,))
        report = run(plan)
        text = rows_csv(flat_rows(report))
        lines = text.splitlines()
        assert lines[0] == "axis,axis_value,scenario,bound,lambda,value,status"
        assert any("coin_two_point,direct" in line for line in lines)
        # 17 significant digits
        assert "0.75" in text


class TestSweep:
    def test_lambda_sweep_symmetric(self):
        plan = RunPlan(scenarios=(get_scenario("displacement_2param"),),
                       bounds=("bld",), sweep_axis="lambda",
                       sweep_values=(-1.0, -0.5, 0.0, 0.5, 1.0))
        _, rows = sweep(plan)
        values = {r["axis_value"]: r["value"] for r in rows}
        for lam in (0.5, 1.0):
            assert values[lam] == pytest.approx(values[-lam], abs=1e-9)

    def test_prior_width_shrinks_bounds(self):
        plan = RunPlan(scenarios=(get_scenario("rotation_gaussian"),),
                       bounds=("bld",), lambda_grid=(0.0,),
                       sweep_axis="prior_width", sweep_values=(0.4, 0.1, 0.02))
        _, rows = sweep(plan)
        values = [r["value"] for r in rows]
        assert values[0] > values[1] > values[2]
        assert values[2] < 1e-3

    def test_node_sweep_converges(self):
        plan = RunPlan(scenarios=(get_scenario("rotation_gaussian"),),
                       bounds=("bld",), lambda_grid=(0.0,),
                       sweep_axis="nodes", sweep_values=(31, 41))
        _, rows = sweep(plan)
        assert abs(rows[0]["value"] - rows[1]["value"]) <= 1e-6

    def test_sweep_needs_two_values(self):
        plan = RunPlan(scenarios=(get_scenario("rotation_gaussian"),),
                       bounds=("bld",), sweep_axis="lambda", sweep_values=(0.0,))
        with pytest.raises(ToolkitError):
            sweep(plan)

    def test_non_rebuildable_scenario_rejected(self):
        plan = RunPlan(scenarios=(get_scenario("coin_two_point"),),
                       bounds=("bld",), sweep_axis="nodes", sweep_values=(3, 5))
        with pytest.raises(ToolkitError):
            sweep(plan)
