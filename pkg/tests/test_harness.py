"""Seed derivation, Monte-Carlo tallies, presets, and output formats."""

import json
import math

import numpy as np
import pytest

from fbbai.bounds import BoundInputs, bound_glm_gopt, bound_linear_gopt, oracle_c_min
from fbbai.errors import ConfigurationError
from fbbai.harness import (CSV_COLUMNS, PRESETS, VARIANTS, McResult, SweepRow,
                           VariantSpec, bound_for_source, family_source,
                           format_csv, format_json, mc_accuracy, read_csv,
                           rep_seed, run_point, run_preset, write_csv)
from fbbai.instances import (BanditInstance, gen_logistic_instance,
                             gen_static_instance, noiseless)


def states(ss):
    return tuple(ss.generate_state(4))


class TestRepSeed:
    def test_stable_for_identical_inputs(self):
        a = rep_seed(7, "static", "gse-fwg", 100, 3)
        b = rep_seed(7, "static", "gse-fwg", 100, 3)
        assert states(a) == states(b)

    def test_any_coordinate_changes_the_stream(self):
        base = states(rep_seed(7, "static", "gse-fwg", 100, 3))
        assert states(rep_seed(8, "static", "gse-fwg", 100, 3)) != base
        assert states(rep_seed(7, "sphere", "gse-fwg", 100, 3)) != base
        assert states(rep_seed(7, "static", "gse-fwd", 100, 3)) != base
        assert states(rep_seed(7, "static", "gse-fwg", 101, 3)) != base
        assert states(rep_seed(7, "static", "gse-fwg", 100, 4)) != base


class TestMcResult:
    def test_accuracy_and_stderr(self):
        res = McResult(replications=16, successes=12, aborts=0)
        assert res.accuracy == pytest.approx(0.75)
        assert res.stderr == pytest.approx(math.sqrt(0.75 * 0.25 / 16))


class TestMcAccuracy:
    def test_noiseless_instance_always_succeeds(self):
        inst = noiseless(gen_static_instance(1.0, K=4))
        res = mc_accuracy(inst, "gse-fwg", 40, 8, 0, workers=1)
        assert res.successes == 8 and res.aborts == 0
        assert res.accuracy == 1.0

    def test_same_seed_gives_identical_tallies(self):
        inst = gen_static_instance(1.0, K=4, sigma2=4.0)
        a = mc_accuracy(inst, "gse-uniform", 40, 64, 5, workers=1)
        b = mc_accuracy(inst, "gse-uniform", 40, 64, 5, workers=1)
        assert (a.successes, a.aborts) == (b.successes, b.aborts)

    def test_worker_count_does_not_change_the_tally(self):
        inst = gen_static_instance(0.5, K=4, sigma2=4.0)
        serial = mc_accuracy(inst, "gse-fwg", 40, 40, 9, workers=1)
        pooled3 = mc_accuracy(inst, "gse-fwg", 40, 40, 9, workers=3)
        pooled4 = mc_accuracy(inst, "gse-fwg", 40, 40, 9, workers=4)
        assert serial.successes == pooled3.successes == pooled4.successes
        assert serial.aborts == pooled3.aborts == pooled4.aborts

    def test_tiny_jobs_skip_the_pool(self):
        inst = noiseless(gen_static_instance(1.0, K=4))
        res = mc_accuracy(inst, "gse-fwg", 40, 4, 0, workers=8)
        assert res.successes == 4

    def test_generator_source_draws_fresh_instances(self):
        src = family_source("logistic", {"K": 4, "d": 2})
        res = mc_accuracy(src, "gse-fwg", 40, 6, 2, family="logistic", workers=1)
        assert res.replications == 6
        assert 0 <= res.successes <= 6

    def test_overwhelming_noise_reduces_to_guessing(self):
        """With variance 1e6 the sixteen arms are exchangeable to the
        estimator, so the hit rate sits at 1/16 up to binomial error."""
        inst = gen_static_instance(1.0, K=16, sigma2=1e6)
        res = mc_accuracy(inst, "gse-uniform", 320, 2000, 4, workers=1)
        p = 1.0 / 16.0
        assert abs(res.accuracy - p) <= 3.0 * math.sqrt(p * (1 - p) / 2000)

    def test_infeasible_budget_counts_as_abort(self):
        inst = gen_static_instance(1.0, K=16)
        res = mc_accuracy(inst, "gse-uniform", 3, 5, 0, workers=1)
        assert res.aborts == 5 and res.successes == 0
        assert res.accuracy == 0.0

    def test_unknown_variant_rejected(self):
        inst = gen_static_instance(1.0, K=4)
        with pytest.raises(ConfigurationError):
            mc_accuracy(inst, "gse-sgd", 40, 2, 0, workers=1)

    def test_zero_replications_rejected(self):
        inst = gen_static_instance(1.0, K=4)
        with pytest.raises(ConfigurationError):
            mc_accuracy(inst, "gse-fwg", 40, 0, 0, workers=1)

    def test_custom_variant_spec_accepted(self):
        inst = noiseless(gen_static_instance(1.0, K=4))
        spec = VariantSpec("mine", "uniform", "linear")
        res = mc_accuracy(inst, spec, 40, 3, 0, workers=1)
        assert res.successes == 3


class TestFamilySource:
    def test_fixed_families_return_instances(self):
        assert isinstance(family_source("adaptive", {"d": 4}), BanditInstance)
        assert isinstance(family_source("static", {"delta": 1.0}), BanditInstance)

    def test_randomized_families_return_generators(self):
        src = family_source("sphere", {"K": 6, "d": 3})
        assert callable(src)
        inst = src(np.random.default_rng(0))
        assert inst.n_arms == 6 and inst.dim == 3

    def test_corner_generator_accepts_sigma(self):
        src = family_source("corner", {"K": 5, "sigma2": 2.0})
        assert src(np.random.default_rng(1)).noise_sigma2 == 2.0

    def test_unknown_family_rejected(self):
        with pytest.raises(ConfigurationError):
            family_source("pyramid", {})


class TestBoundForSource:
    def test_linear_instance_uses_the_linear_bound(self):
        inst = gen_static_instance(1.0, K=4)
        expected = bound_linear_gopt(BoundInputs(
            K=4, d=4, eta=2.0, sigma2=10.0, delta_min=1.0, budget=200))
        assert bound_for_source(inst, 200, 2.0) == pytest.approx(expected)

    def test_glm_instance_uses_the_glm_bound_with_the_oracle_floor(self):
        inst = gen_logistic_instance(6, 3, np.random.default_rng(8))
        expected = bound_glm_gopt(BoundInputs(
            K=6, d=3, eta=2.0, sigma2=0.25,
            delta_min=inst.linear_delta_min, budget=500,
            c_min=oracle_c_min(inst)))
        assert bound_for_source(inst, 500, 2.0) == pytest.approx(expected)

    def test_generator_source_has_no_single_bound(self):
        src = family_source("sphere", {"K": 6, "d": 3})
        assert math.isnan(bound_for_source(src, 100, 2.0))

    def test_tied_best_arm_gives_nan(self):
        inst = BanditInstance(features=np.array([[1.0, 0.0], [1.0, 0.0],
                                                 [0.0, 1.0]]),
                              theta_star=np.array([1.0, 0.0]))
        assert math.isnan(bound_for_source(inst, 100, 2.0))


class TestPresets:
    def test_catalog_names(self):
        assert set(PRESETS) == {"adaptive", "static", "sphere", "logistic",
                                "corner"}

    def test_grid_sizes(self):
        sizes = {name: len(p.points) for name, p in PRESETS.items()}
        assert sizes == {"adaptive": 16, "static": 20, "sphere": 12,
                         "logistic": 24, "corner": 12}

    def test_default_replication_count(self):
        assert all(p.default_replications == 1000 for p in PRESETS.values())

    def test_sphere_budget_scales_with_arm_count(self):
        for point in PRESETS["sphere"].points:
            assert point.budget == 40 * point.params["K"]

    def test_logistic_grid_labels_carry_the_dimension(self):
        labels = {p.family_label for p in PRESETS["logistic"].points}
        assert labels == {"logistic-d5", "logistic-d7", "logistic-d10",
                          "logistic-d12"}

    def test_every_variant_name_is_known(self):
        for preset in PRESETS.values():
            for point in preset.points:
                assert point.variant in VARIANTS


class TestRunPointAndPreset:
    def test_run_point_populates_the_row(self):
        point = PRESETS["static"].points[0]
        row = run_point(point, replications=5, seed=2, workers=1)
        assert row.family == "static" and row.variant == point.variant
        assert row.R == 5 and 0 <= row.successes <= 5
        assert row.accuracy == pytest.approx(row.successes / 5)
        assert row.wall_time_s >= 0.0
        assert not math.isnan(row.bound_delta)

    def test_unknown_preset_rejected(self):
        with pytest.raises(ConfigurationError):
            run_preset("galaxy")

    def test_preset_writes_both_formats(self, tmp_path):
        result = run_preset("corner", out_dir=str(tmp_path), replications=2,
                            seed=3, workers=1)
        assert len(result.rows) == 12
        rows = read_csv(tmp_path / "corner.csv")
        assert len(rows) == 12
        assert list(rows[0]) == list(CSV_COLUMNS)
        parsed = json.loads((tmp_path / "corner.json").read_text())
        assert len(parsed) == 12
        assert parsed[0]["R"] == 2

    def test_rerun_is_byte_identical_without_wall_time(self):
        a = run_preset("corner", replications=2, seed=3, workers=1)
        b = run_preset("corner", replications=2, seed=3, workers=1)
        assert (format_csv(a.rows, include_wall_time=False)
                == format_csv(b.rows, include_wall_time=False))


def sample_row(**overrides):
    base = dict(family="static", variant="gse-fwg", param_name="budget",
                param_value=40.0, R=3, successes=1, accuracy=1.0 / 3.0,
                stderr=0.27216552697590873, bound_delta=float("nan"),
                aborts=0, wall_time_s=0.125)
    base.update(overrides)
    return SweepRow(**base)


class TestFormats:
    def test_csv_header_and_float_formatting(self):
        text = format_csv([sample_row()])
        lines = text.strip().split("\n")
        assert lines[0] == ",".join(CSV_COLUMNS)
        cells = lines[1].split(",")
        assert cells[6] == "0.333333333333"  # twelve significant digits
        assert cells[8] == ""  # NaN bound renders as an empty cell

    def test_wall_time_column_is_excludable(self):
        text = format_csv([sample_row()], include_wall_time=False)
        lines = text.strip().split("\n")
        assert lines[0].endswith("aborts")
        assert len(lines[1].split(",")) == len(CSV_COLUMNS) - 1

    def test_json_uses_null_for_nan(self):
        parsed = json.loads(format_json([sample_row()]))
        assert parsed[0]["bound_delta"] is None
        assert parsed[0]["successes"] == 1

    def test_csv_roundtrip_through_files(self, tmp_path):
        path = tmp_path / "rows.csv"
        write_csv(path, [sample_row(bound_delta=0.25)])
        back = read_csv(path)
        assert back[0]["bound_delta"] == "0.25"
        assert back[0]["family"] == "static"
