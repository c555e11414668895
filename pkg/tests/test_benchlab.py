"""Tests for the benchmark catalog, data collection, tuning, and grading."""

import numpy as np
import pytest

from fritpid.benchlab import (
    CASE_NAMES,
    BenchmarkCase,
    FoIoComparison,
    ValidationReport,
    builtin_case,
    collect_data,
    compare_fo_io,
    discretized_plant,
    discretized_reference_model,
    make_evaluator,
    reference_targets,
    tune_case,
    unit_step,
    validate,
)
from fritpid.folib import ControllerKind
from fritpid.lti_core import DiscreteTf, feedback_unity, simulate
from fritpid.swarm_opt import PsoConfig

SMOKE_PSO = PsoConfig(swarm_size=8, max_iterations=10, stall_iterations=10)


class TestCaseCatalog:
    def test_case_names(self):
        assert CASE_NAMES == ("example1", "example2", "example3_io", "example3_fo")

    @pytest.mark.parametrize("name", CASE_NAMES)
    def test_cases_are_consistently_wired(self, name):
        case = builtin_case(name)
        assert isinstance(case, BenchmarkCase)
        assert case.name == name
        assert case.bounds.dim == case.template.theta_dim
        assert case.bounds.contains(case.theta0)
        assert case.reference_signal == "unit_step"
        assert case.n_samples == int(round(case.sim_time / case.sample_time)) + 1

    def test_controller_families(self):
        assert builtin_case("example1").template.kind is ControllerKind.FOPID
        assert builtin_case("example2").template.kind is ControllerKind.FOPID
        assert builtin_case("example3_io").template.kind is ControllerKind.IOPID
        assert builtin_case("example3_fo").template.kind is ControllerKind.FOPID

    def test_horizons(self):
        assert builtin_case("example1").n_samples == 1001
        assert builtin_case("example3_fo").n_samples == 81

    def test_unknown_name_lists_the_catalog(self):
        with pytest.raises(KeyError, match="example1"):
            builtin_case("example9")
        with pytest.raises(KeyError, match="example1"):
            reference_targets("example9")

    def test_published_targets(self):
        t1 = reference_targets("example1")
        assert t1.j_theta0 == pytest.approx(496.1250)
        assert t1.j_star_max == 0.6
        t2 = reference_targets("example2")
        assert t2.j_star_min == 10.0 and t2.j_star_max == 60.0
        assert reference_targets("example3_io").j_theta0 == reference_targets(
            "example3_fo"
        ).j_theta0

    def test_dead_time_is_the_only_example2_difference(self):
        p1 = discretized_plant(builtin_case("example1"))
        p2 = discretized_plant(builtin_case("example2"))
        assert p1.delay_samples == 0
        assert p2.delay_samples == 50  # 5 time units at ts = 0.1
        assert p1.num.coeffs == p2.num.coeffs
        assert p1.den.coeffs == p2.den.coeffs

    def test_discrete_plant_passes_through_untouched(self):
        case = builtin_case("example3_fo")
        assert discretized_plant(case) is case.plant

    @pytest.mark.parametrize("name", CASE_NAMES)
    def test_reference_models_have_unit_dc_gain(self, name):
        md = discretized_reference_model(builtin_case(name))
        assert md.dc_gain() == pytest.approx(1.0, abs=1e-12)

    def test_example3_reference_model_is_deadbeat_like(self):
        # second-order pole pair at exp(-0.5) with a 3-sample transport delay
        md = discretized_reference_model(builtin_case("example3_fo"))
        alpha = np.exp(-0.5)
        assert md.delay_samples == 3
        roots = np.roots(md.den.as_array())
        np.testing.assert_allclose(roots, [alpha, alpha], rtol=1e-9)


class TestUnitStep:
    def test_shape_and_value(self):
        r = unit_step(11, 0.1)
        assert len(r) == 11
        assert r.sample_time == 0.1
        assert np.all(r.samples == 1.0)


class TestDataCollection:
    def test_record_matches_the_case_horizon(self):
        case = builtin_case("example3_io")
        rec = collect_data(case)
        assert len(rec) == case.n_samples
        assert np.all(rec.r0.samples == 1.0)

    def test_loop_data_matches_the_closed_loop_transfer(self):
        # for the polynomial controller the co-simulated record must agree
        # with simulating the algebraic closed-loop TF
        case = builtin_case("example3_io")
        rec = collect_data(case)
        from fritpid.folib import realize

        cl = feedback_unity(discretized_plant(case), realize(case.theta0, case.template))
        y = simulate(cl, rec.r0)
        scale = np.max(np.abs(y.samples))
        assert np.max(np.abs(y.samples - rec.y0.samples)) <= 1e-8 * scale

    def test_unity_start_controller_records_the_error_as_input(self):
        # example1 starts from theta0 = [1, 0, 1, 0, 1], i.e. C = 1, so the
        # recorded input is exactly the tracking error
        case = builtin_case("example1")
        rec = collect_data(case)
        want = rec.r0.samples - rec.y0.samples
        assert np.max(np.abs(rec.u0.samples - want)) <= 1e-12

    @pytest.mark.parametrize("name", CASE_NAMES)
    def test_initial_loss_reproduces_the_published_value(self, name):
        case = builtin_case(name)
        t = reference_targets(name)
        j0 = make_evaluator(case)(case.theta0)
        assert j0 == pytest.approx(t.j_theta0, rel=t.j_theta0_rtol)

    @pytest.mark.parametrize("name", CASE_NAMES)
    def test_loss_at_theta0_equals_the_true_tracking_error(self, name):
        # the fictitious-reference fixed point: with the data-collection
        # controller the predicted loop is the recorded loop
        case = builtin_case(name)
        j0 = make_evaluator(case)(case.theta0)
        rep = validate(case, case.theta0)
        assert j0 == pytest.approx(rep.tracking_error_l1, rel=1e-9)


class TestValidate:
    def test_report_flag_must_mirror_the_poles(self):
        from fritpid.benchlab import StepTraces
        from fritpid.lti_core import Signal

        s = Signal(np.zeros(3), 0.1)
        traces = StepTraces(r=s, y_model=s, y_closed_loop=s, u=s)
        with pytest.raises(ValueError, match="mirror"):
            ValidationReport(
                closed_loop_poles=(0.5 + 0j,),
                stable=False,
                tracking_error_l1=0.0,
                max_abs_input=0.0,
                step_traces=traces,
            )

    def test_max_pole_magnitude_of_a_static_loop_is_zero(self):
        from fritpid.benchlab import StepTraces
        from fritpid.lti_core import Signal

        s = Signal(np.zeros(3), 0.1)
        traces = StepTraces(r=s, y_model=s, y_closed_loop=s, u=s)
        rep = ValidationReport((), True, 0.0, 0.0, traces)
        assert rep.max_pole_magnitude == 0.0

    def test_example1_start_loop_is_stable(self):
        case = builtin_case("example1")
        rep = validate(case, case.theta0)
        assert rep.stable
        assert rep.max_pole_magnitude < 1.0
        assert len(rep.step_traces.y_closed_loop) == case.n_samples

    def test_example3_start_loop_is_unstable(self):
        # the oscillatory plant is not stabilized by the small starting
        # gains; the report says so instead of raising
        case = builtin_case("example3_io")
        rep = validate(case, case.theta0)
        assert not rep.stable
        assert rep.max_pole_magnitude > 1.0
        assert np.isfinite(rep.tracking_error_l1)

    def test_model_trace_is_the_reference_model_response(self):
        case = builtin_case("example3_io")
        rep = validate(case, case.theta0)
        md = discretized_reference_model(case)
        want = simulate(md, rep.step_traces.r)
        np.testing.assert_allclose(rep.step_traces.y_model.samples, want.samples, atol=1e-12)


class TestTuneCase:
    def tune_smoke(self, name="example3_fo", seeds=(0, 1)):
        return tune_case(builtin_case(name), seeds=seeds, pso=SMOKE_PSO)

    def test_result_is_never_worse_than_the_start(self):
        res = self.tune_smoke()
        assert res.j_star <= res.j_theta0

    def test_best_seed_selection_and_bookkeeping(self):
        res = self.tune_smoke()
        best = min(res.seed_results, key=lambda r: (r.best_value, r.seed))
        assert res.best_seed == best.seed
        assert res.j_star == best.best_value
        np.testing.assert_array_equal(res.theta_star, best.best_theta)
        assert res.breakdown_star.j == res.j_star
        assert not res.breakdown_star.penalized

    def test_evaluation_accounting_covers_the_whole_campaign(self):
        # one call for j_theta0, the seed sweeps, then the breakdown and
        # the bound report at the winner
        res = self.tune_smoke()
        swept = sum(r.evaluations for r in res.seed_results)
        assert res.evaluations == 1 + swept + 2
        assert res.bound_violations == 0

    def test_bound_report_is_satisfied_at_the_winner(self):
        res = self.tune_smoke()
        assert res.bound_report.satisfied
        assert res.bound_report.t_l1 <= res.bound_report.bound

    def test_tuning_is_deterministic(self):
        a = self.tune_smoke()
        b = self.tune_smoke()
        assert a.j_star == b.j_star
        np.testing.assert_array_equal(a.theta_star, b.theta_star)
        assert [r.best_value for r in a.seed_results] == [
            r.best_value for r in b.seed_results
        ]

    def test_empty_seed_list_rejected(self):
        with pytest.raises(ValueError, match="seed"):
            tune_case(builtin_case("example3_fo"), seeds=())


class TestCompareFoIo:
    def test_comparison_wires_both_results(self):
        fo = tune_case(builtin_case("example3_fo"), seeds=(0,), pso=SMOKE_PSO)
        io = tune_case(builtin_case("example3_io"), seeds=(0,), pso=SMOKE_PSO)
        cmp = compare_fo_io(fo, io)
        assert isinstance(cmp, FoIoComparison)
        assert cmp.j_fo == fo.j_star
        assert cmp.j_io == io.j_star
        assert cmp.fo_beats_io == (fo.j_star < io.j_star)
        assert cmp.tracking_error_fo == fo.validation.tracking_error_l1
        assert cmp.max_input_io == io.validation.max_abs_input
        assert cmp.input_l1_fo == fo.validation.step_traces.u.l1()
        assert cmp.theta_fo == tuple(float(x) for x in fo.theta_star)

    def test_family_order_is_enforced(self):
        fo = tune_case(builtin_case("example3_fo"), seeds=(0,), pso=SMOKE_PSO)
        io = tune_case(builtin_case("example3_io"), seeds=(0,), pso=SMOKE_PSO)
        with pytest.raises(ValueError, match="FOPID"):
            compare_fo_io(io, io)
        with pytest.raises(ValueError, match="IOPID"):
            compare_fo_io(fo, fo)
