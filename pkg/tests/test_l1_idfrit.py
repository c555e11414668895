"""Tests for the fictitious-reference l1 matching pipeline."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import linalg as sla

from fritpid.folib import ControllerKind, ControllerTemplate, realize, realize_fopid, FopidParams
from fritpid.l1_idfrit import (
    PENALTY,
    ExperimentRecord,
    FictitiousHeadZeroError,
    LossBreakdown,
    LossEvaluator,
    PenaltyReason,
    evaluate_loss,
    fictitious_reference,
    reconstruct_output,
    stability_bound_report,
    toeplitz_solve,
)
from fritpid.lti_core import (
    DiscreteTf,
    SampleTimeError,
    Signal,
    co_simulate,
    impulse_response,
    invert,
    simulate,
)

from .strategies import bounded_floats, signals, stable_discrete_tfs

TS = 0.1
N = 200
IOPID_T = ControllerTemplate(ControllerKind.IOPID, TS)
FOPID_T = ControllerTemplate(ControllerKind.FOPID, TS)
MD = DiscreteTf([0.5], [1.0, -0.5], TS)


def step(n=N, ts=TS):
    return Signal(np.ones(n), ts)


def closed_loop_record(plant: DiscreteTf, theta0, template=IOPID_T, n=N) -> ExperimentRecord:
    """Collect (r0, u0, y0) from the unity loop of plant and C(theta0)."""
    c0 = realize(theta0, template)
    r0 = step(n, plant.sample_time)
    y0, u0 = co_simulate(plant, c0, r0)
    return ExperimentRecord(r0, u0, y0)


# this pair closes a stable loop with signals of order one, so the
# fixed-point identities below can be checked at tight tolerances
PLANT = DiscreteTf([0.2, 0.1], [1.0, -1.2, 0.35], TS)
THETA0 = np.array([0.3, 0.1, 0.0])


class TestExperimentRecord:
    def test_valid_record(self):
        rec = closed_loop_record(PLANT, THETA0)
        assert len(rec) == N
        assert rec.sample_time == TS

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="equal lengths"):
            ExperimentRecord(step(), step(), step(N - 1))

    def test_sample_time_mismatch_rejected(self):
        with pytest.raises(SampleTimeError):
            ExperimentRecord(step(), Signal(np.ones(N), 0.2), step())

    def test_nonfinite_reference_rejected(self):
        bad = np.ones(N)
        bad[3] = np.nan
        with pytest.raises(ValueError, match="finite"):
            ExperimentRecord(Signal(bad, TS), step(), step())

    def test_zero_reference_head_rejected(self):
        bad = np.ones(N)
        bad[0] = 0.0
        with pytest.raises(ValueError, match="head"):
            ExperimentRecord(Signal(bad, TS), step(), step())

    def test_non_signal_rejected(self):
        with pytest.raises(TypeError):
            ExperimentRecord(np.ones(N), step(), step())


class TestToeplitzSolve:
    @given(
        head=bounded_floats(0.5, 2.0),
        tail=st.lists(bounded_floats(-1.0, 1.0), min_size=4, max_size=49),
        rhs=st.lists(bounded_floats(-5.0, 5.0), min_size=5, max_size=50),
    )
    @settings(max_examples=50, deadline=None)
    def test_matches_the_dense_triangular_solve(self, head, tail, rhs):
        n = min(len(tail) + 1, len(rhs))
        col = np.array([head] + tail[: n - 1])
        y = np.array(rhs[:n])
        t = toeplitz_solve(Signal(col, TS), Signal(y, TS)).samples
        dense = sla.solve_triangular(
            sla.toeplitz(col, np.zeros(n)), y, lower=True
        )
        scale = max(np.max(np.abs(dense)), 1.0)
        assert np.max(np.abs(t - dense)) <= 1e-10 * scale

    def test_solution_convolves_back_to_the_rhs(self):
        # minimum-phase column, so the triangular inverse stays bounded
        # and the roundtrip can be held to a tight absolute tolerance
        rng = np.random.default_rng(7)
        col = impulse_response(DiscreteTf([1.0, 0.4], [1.0, -0.5], TS), N - 1).samples
        y = rng.standard_normal(N)
        t = toeplitz_solve(Signal(col, TS), Signal(y, TS)).samples
        back = np.convolve(col, t)[:N]
        assert np.max(np.abs(back - y)) <= 1e-10 * np.max(np.abs(y))

    def test_zero_head_raises(self):
        col = np.ones(N)
        col[0] = 0.0
        with pytest.raises(FictitiousHeadZeroError):
            toeplitz_solve(Signal(col, TS), step())

    def test_length_mismatch_raises(self):
        with pytest.raises(ValueError):
            toeplitz_solve(step(), step(N - 1))


class TestReconstructOutput:
    @given(pair=st.tuples(signals(min_len=3, max_len=40), signals(min_len=3, max_len=40)))
    @settings(max_examples=50, deadline=None)
    def test_is_the_truncated_convolution(self, pair):
        a, b = pair
        n = min(len(a), len(b))
        r = Signal(a.samples[:n], a.sample_time)
        t = Signal(b.samples[:n], a.sample_time)
        got = reconstruct_output(r, t).samples
        want = np.convolve(r.samples, t.samples)[:n]
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-12 * (1 + np.max(np.abs(want))))

    def test_length_mismatch_raises(self):
        with pytest.raises(ValueError):
            reconstruct_output(step(), step(N - 1))


class TestFictitiousReference:
    def test_controller_maps_it_back_to_the_recorded_input(self):
        # C(r~ - y0) = u0 is the defining property of r~
        rec = closed_loop_record(PLANT, THETA0)
        c = realize(THETA0, IOPID_T)
        rt = fictitious_reference(c, rec)
        u_back = simulate(c, rt - rec.y0)
        scale = np.max(np.abs(rec.u0.samples))
        assert np.max(np.abs(u_back.samples - rec.u0.samples)) <= 1e-8 * scale

    def test_equals_the_true_reference_at_the_recording_controller(self):
        # with the controller that produced the data, C^-1 u0 = r0 - y0
        rec = closed_loop_record(PLANT, THETA0)
        c = realize(THETA0, IOPID_T)
        rt = fictitious_reference(c, rec)
        assert np.max(np.abs(rt.samples - rec.r0.samples)) <= 1e-8


class TestFixedPoint:
    """At the recording parameters the pipeline reproduces the data."""

    def test_reconstruction_returns_the_recorded_output(self):
        rec = closed_loop_record(PLANT, THETA0)
        c = realize(THETA0, IOPID_T)
        rt = fictitious_reference(c, rec)
        t = toeplitz_solve(rt, rec.y0)
        y = reconstruct_output(rec.r0, t)
        assert np.max(np.abs(y.samples - rec.y0.samples)) <= 1e-6

    def test_loss_at_theta0_is_the_true_tracking_error(self):
        rec = closed_loop_record(PLANT, THETA0)
        ev = LossEvaluator(IOPID_T, rec, MD)
        b = ev.evaluate(THETA0)
        assert not b.penalized
        true_err = (rec.y0 - ev.target).l1()
        assert b.j == pytest.approx(true_err, rel=1e-6)

    @given(plant=stable_discrete_tfs(max_order=3, margin=0.15, sample_time=TS))
    @settings(max_examples=25, deadline=None)
    def test_fixed_point_holds_across_plants(self, plant):
        theta0 = np.array([0.5, 0.3, 0.05])
        rec = closed_loop_record(plant, theta0, n=80)
        if np.max(np.abs(rec.y0.samples)) > 1e6:
            return  # closed loop happened to be violently unstable
        ev = LossEvaluator(IOPID_T, rec, MD)
        b = ev.evaluate(theta0)
        if b.penalized:
            return  # e.g. fictitious head cancellation on a sign-flipping loop
        true_err = (rec.y0 - ev.target).l1()
        assert b.j == pytest.approx(true_err, rel=1e-5, abs=1e-9)


class TestPenalties:
    def make_evaluator(self):
        return LossEvaluator(IOPID_T, closed_loop_record(PLANT, THETA0), MD)

    def test_nonfinite_theta(self):
        b = self.make_evaluator().evaluate([np.nan, 0.0, 0.0])
        assert b.penalized
        assert b.penalty_reason is PenaltyReason.NONFINITE_SIGNAL
        assert b.j == PENALTY
        assert math.isnan(b.epsilon_l1) and math.isnan(b.t_l1)

    def test_zero_controller_is_non_invertible(self):
        b = self.make_evaluator().evaluate([0.0, 0.0, 0.0])
        assert b.penalty_reason is PenaltyReason.NON_INVERTIBLE_CONTROLLER

    def test_cancelled_fractional_feedthrough_is_non_invertible(self):
        branch = realize_fopid(FopidParams(0.0, 1.0, 0.5, 0.0, 1.0), FOPID_T)
        rec = closed_loop_record(PLANT, THETA0)
        ev = LossEvaluator(FOPID_T, rec, MD)
        b = ev.evaluate([-branch.gain, 1.0, 0.5, 0.0, 1.0])
        assert b.penalty_reason is PenaltyReason.NON_INVERTIBLE_CONTROLLER

    def test_unstable_inverse_blows_up_to_a_penalty(self):
        # the candidate's zero lies outside the unit circle, so C^-1 u0
        # overflows the well-scaled range and trips the finite check
        rec = ExperimentRecord(step(), Signal(0.1 * np.sin(np.arange(N)), TS), Signal(0.5 * np.ones(N), TS))
        ev = LossEvaluator(IOPID_T, rec, MD)
        b = ev.evaluate([1.0, -100.0, 0.0])
        assert b.penalty_reason is PenaltyReason.NONFINITE_SIGNAL

    def test_vanishing_fictitious_head(self):
        # u0[0] = -k * y0[0] makes r~[0] = u0[0]/k + y0[0] = 0 for the
        # static controller with gain k
        k = 2.0
        u0 = np.full(N, 0.3)
        u0[0] = -k * 0.5
        rec = ExperimentRecord(step(), Signal(u0, TS), Signal(np.full(N, 0.5), TS))
        ev = LossEvaluator(IOPID_T, rec, MD)
        b = ev.evaluate([k, 0.0, 0.0])
        assert b.penalty_reason is PenaltyReason.FICTITIOUS_HEAD_ZERO

    def test_counters_track_outcomes(self):
        ev = self.make_evaluator()
        ev.evaluate(THETA0)
        ev.evaluate([np.nan, 0.0, 0.0])
        ev.evaluate([0.0, 0.0, 0.0])
        assert ev.evaluations == 3
        assert ev.penalties == 2
        assert ev.penalty_counts[PenaltyReason.NONFINITE_SIGNAL] == 1
        assert ev.penalty_counts[PenaltyReason.NON_INVERTIBLE_CONTROLLER] == 1
        assert ev.bound_checks == 1
        assert ev.bound_violations == 0

    def test_wrong_dimension_raises_instead_of_penalizing(self):
        with pytest.raises(ValueError, match="expected 3 parameters"):
            self.make_evaluator().evaluate([1.0, 2.0])


class TestLossBreakdown:
    def test_flag_must_mirror_reason(self):
        with pytest.raises(ValueError, match="mirror"):
            LossBreakdown(1.0, 1.0, 1.0, penalized=True, penalty_reason=PenaltyReason.NONE)
        with pytest.raises(ValueError, match="mirror"):
            LossBreakdown(
                PENALTY, math.nan, math.nan,
                penalized=False, penalty_reason=PenaltyReason.NONFINITE_SIGNAL,
            )

    def test_clean_loss_must_equal_the_matching_error(self):
        with pytest.raises(ValueError, match="matching error"):
            LossBreakdown(2.0, 1.0, 1.0, penalized=False, penalty_reason=PenaltyReason.NONE)


class TestStabilityBound:
    def test_gamma_is_the_dense_inverse_column_norm(self):
        rec = closed_loop_record(PLANT, THETA0)
        ev = LossEvaluator(IOPID_T, rec, MD)
        n = len(rec)
        dense = sla.solve_triangular(
            sla.toeplitz(rec.r0.samples, np.zeros(n)), np.eye(n)[:, 0], lower=True
        )
        assert ev.gamma_r0 == pytest.approx(np.sum(np.abs(dense)), rel=1e-10)

    def test_report_reproduces_the_bound_formula(self):
        rec = closed_loop_record(PLANT, THETA0)
        ev = LossEvaluator(IOPID_T, rec, MD)
        rep = ev.bound_report(THETA0)
        m_d_l1 = impulse_response(MD, len(rec) - 1).l1()
        b = ev.evaluate(THETA0)
        assert rep.bound == pytest.approx(ev.gamma_r0 * b.j + m_d_l1, rel=1e-12)
        assert rep.t_l1 <= rep.bound
        assert rep.satisfied

    def test_bound_holds_for_arbitrary_clean_candidates(self):
        # the constant makes the inequality an algebraic identity, so any
        # candidate that evaluates cleanly must satisfy it
        rec = closed_loop_record(PLANT, THETA0)
        ev = LossEvaluator(IOPID_T, rec, MD)
        for theta in ([0.5, 0.2, 0.0], [2.0, 1.0, 0.3], [0.1, 0.9, 0.6]):
            b = ev.evaluate(theta)
            if b.penalized:
                continue
            rep = ev.bound_report(theta)
            assert rep.satisfied
        assert ev.bound_violations == 0

    def test_bound_report_refuses_penalized_candidates(self):
        rec = closed_loop_record(PLANT, THETA0)
        ev = LossEvaluator(IOPID_T, rec, MD)
        with pytest.raises(ValueError, match="penalized"):
            ev.bound_report([0.0, 0.0, 0.0])

    def test_standalone_report_matches_the_evaluator(self):
        rec = closed_loop_record(PLANT, THETA0)
        ev = LossEvaluator(IOPID_T, rec, MD)
        c = realize(THETA0, IOPID_T)
        rt = fictitious_reference(c, rec)
        t = toeplitz_solve(rt, rec.y0)
        y = reconstruct_output(rec.r0, t)
        rep = stability_bound_report(rec, MD, t, y - ev.target)
        assert rep.gamma_r0 == pytest.approx(ev.gamma_r0, rel=1e-12)


class TestEvaluatorInit:
    def test_template_sample_time_must_match(self):
        rec = closed_loop_record(PLANT, THETA0)
        with pytest.raises(SampleTimeError, match="template"):
            LossEvaluator(ControllerTemplate(ControllerKind.IOPID, 0.2), rec, MD)

    def test_reference_model_sample_time_must_match(self):
        rec = closed_loop_record(PLANT, THETA0)
        with pytest.raises(SampleTimeError, match="reference model"):
            LossEvaluator(IOPID_T, rec, DiscreteTf([0.5], [1.0, -0.5], 0.2))

    def test_reference_model_must_be_stable(self):
        rec = closed_loop_record(PLANT, THETA0)
        with pytest.raises(ValueError, match="BIBO stable"):
            LossEvaluator(IOPID_T, rec, DiscreteTf([1.0], [1.0, -1.5], TS))

    def test_target_is_the_reference_model_response(self):
        rec = closed_loop_record(PLANT, THETA0)
        ev = LossEvaluator(IOPID_T, rec, MD)
        want = simulate(MD, rec.r0)
        assert np.max(np.abs(ev.target.samples - want.samples)) <= 1e-9

    def test_callable_form_returns_the_loss(self):
        rec = closed_loop_record(PLANT, THETA0)
        ev = LossEvaluator(IOPID_T, rec, MD)
        assert ev(THETA0) == ev.evaluate(THETA0).j

    def test_one_shot_helper_agrees(self):
        rec = closed_loop_record(PLANT, THETA0)
        ev = LossEvaluator(IOPID_T, rec, MD)
        assert evaluate_loss(THETA0, IOPID_T, rec, MD).j == ev.evaluate(THETA0).j
