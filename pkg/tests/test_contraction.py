import numpy as np
import pytest

from presic_lab import (
    Box,
    DegenerateDomainError,
    UsageError,
    affine,
    averaging,
    banach,
    ciric_max,
    constant,
    diagonal_phi,
    diagonal_strict,
    estimate_constant,
    euclidean,
    from_dsl,
    kannan,
    lambda_max,
    linear_phi,
    piecewise_phi,
    presic_sum,
    squared_euclidean,
    verify,
    verify_diagonal,
    weak_phi,
)
from presic_lab.contraction import ConditionSpec, dsl_phi


class TestPhi:
    def test_linear(self):
        phi = linear_phi(0.2)
        assert phi(0.0) == 0.0
        assert phi(5.0) == 1.0

    def test_linear_requires_open_interval(self):
        with pytest.raises(UsageError):
            linear_phi(1.0)
        with pytest.raises(UsageError):
            linear_phi(0.0)

    def test_piecewise_low_band(self):
        phi = piecewise_phi()
        assert phi(0.0) == 0.0
        assert phi(1.0) == 0.2
        assert phi(2.4999) == pytest.approx(2.4999 / 5)

    def test_piecewise_band_values(self):
        phi = piecewise_phi()
        # first band edge and interior of the n=1 band
        assert phi(2.5) == pytest.approx(4.0)
        assert phi(4.0) == pytest.approx(52.0 / 7.0)
        # shared endpoint 17/4: lower band wins (8, not the n=2 value 16)
        assert phi(4.25) == pytest.approx(8.0)
        # strictly inside the n=2 band
        assert phi(5.0) == pytest.approx(16 * (8 * 5.0 - 3) / 31)

    def test_piecewise_nonnegative_sampled(self):
        phi = piecewise_phi()
        t = np.linspace(0, 40, 4001)
        assert np.all(phi(t) >= 0)

    def test_dsl_phi(self):
        phi = dsl_phi("t/5")
        assert phi(2.0) == pytest.approx(0.4)

    def test_dsl_phi_must_vanish_at_zero(self):
        with pytest.raises(UsageError):
            dsl_phi("t + 1")


class TestConditionValidation:
    def test_presic_sum_must_sum_below_one(self):
        with pytest.raises(UsageError):
            presic_sum([0.6, 0.5]).validate(k=2)

    def test_ciric_bounds(self):
        with pytest.raises(UsageError):
            ciric_max(1.0).validate()
        with pytest.raises(UsageError):
            ciric_max(0.0).validate()

    def test_lambda_accepts_zero(self):
        lambda_max(0.0).validate()

    def test_kannan_needs_small_akb(self):
        # a k b^(k+1) = (2/3)*1*2^2 = 8/3 >= 1
        with pytest.raises(UsageError):
            kannan(2 / 3).validate(k=1, b=2.0)
        kannan(2 / 3).validate(k=1, b=1.0)

    def test_banach_bounds(self):
        with pytest.raises(UsageError):
            banach(1.0).validate()


class TestVerify:
    def test_ciric_exact_quarter_passes(self, sq_space):
        cert = verify(averaging(1), sq_space, ciric_max(0.25), 2000, seed=7)
        assert cert.passed
        assert cert.slack_min >= -1e-12

    def test_ciric_below_sharp_falsifies(self, sq_space):
        cert = verify(averaging(1), sq_space, ciric_max(0.2), 2000, seed=7)
        assert cert.verdict == "falsified"
        assert cert.witness is not None

    def test_constant_operator_passes_everything(self, sq_space):
        op = constant([1.0], k=2)
        for cond in (ciric_max(0.5), lambda_max(0.3), presic_sum([0.2, 0.2]),
                     kannan(0.05), weak_phi(linear_phi(0.5))):
            cert = verify(op, sq_space, cond, 500, seed=1)
            assert cert.passed, cond.kind

    def test_presic_sum_averaging(self, sq_space):
        cert = verify(averaging(2), sq_space, presic_sum([0.25, 0.25]), 2000, seed=2)
        assert cert.passed

    def test_weak_phi_piecewise_small_box_passes(self):
        # with M < 5/2 the gauge is M/5, so rhs = 4M/5 >= lhs = M/4
        space = squared_euclidean(Box(np.zeros(1), np.full(1, 1.5)))
        for k in (1, 2):
            cert = verify(averaging(k), space, weak_phi(piecewise_phi()), 2000, seed=3)
            assert cert.passed, k

    def test_weak_phi_piecewise_full_box_falsified(self, sq_space):
        cert = verify(averaging(1), sq_space, weak_phi(piecewise_phi()), 3000, seed=3)
        assert cert.verdict == "falsified"
        w = cert.witness
        big = sq_space.distance(w.window[0], w.window[1])
        assert 2.5 <= big <= 4.0
        assert w.rhs < 0.0 < w.lhs

    def test_weak_phi_window_zero_two(self, sq_space):
        # direct evaluation of the documented witness window (0, 2)
        phi = piecewise_phi()
        lhs = sq_space.distance(averaging(1).apply([[0.0]]), averaging(1).apply([[2.0]]))
        big = sq_space.distance([0.0], [2.0])
        rhs = big - phi(big)
        assert lhs == 1.0
        assert phi(4.0) == pytest.approx(52 / 7)
        assert rhs < 0.0

    def test_kannan_quarter_map(self, eu_space):
        cert = verify(affine([0.25]), eu_space, kannan(2 / 3), 2000, seed=5)
        assert cert.passed

    def test_rejects_diagonal_condition(self, sq_space):
        with pytest.raises(UsageError):
            verify(averaging(1), sq_space, banach(0.5), 100, seed=0)

    def test_witness_reproduces(self, sq_space):
        cert = verify(averaging(1), sq_space, ciric_max(0.2), 2000, seed=7)
        w = cert.witness
        op = averaging(1)
        lhs = sq_space.distance(op.apply(w.window[:1]), op.apply(w.window[1:]))
        rhs = 0.2 * sq_space.distance(w.window[0], w.window[1])
        assert lhs == pytest.approx(w.lhs)
        assert rhs == pytest.approx(w.rhs)
        assert lhs > rhs + 1e-9 * (1 + abs(rhs))

    def test_monotone_in_the_constant(self, sq_space):
        op = averaging(2)
        for c in (0.26, 0.4, 0.7, 0.99):
            assert verify(op, sq_space, ciric_max(c), 1000, seed=9).passed

    def test_grid_mode(self, sq_space):
        cert = verify(averaging(1), sq_space, ciric_max(0.25), 0, seed=0, grid_points=40)
        assert cert.passed


class TestVerifyDiagonal:
    def test_banach_quarter(self, sq_space):
        cert = verify_diagonal(averaging(1), sq_space, banach(0.25), 2000, seed=1)
        assert cert.passed

    def test_identity_strict_falsified_with_tie(self, sq_space):
        ident = from_dsl(["x1"], k=1)
        cert = verify_diagonal(ident, sq_space, diagonal_strict(), 500, seed=2)
        assert cert.verdict == "falsified"
        assert cert.witness.tie

    def test_averaging_strict_passes(self, sq_space):
        cert = verify_diagonal(averaging(3), sq_space, diagonal_strict(), 2000, seed=3)
        assert cert.passed

    def test_diagonal_phi_example(self, sq_space):
        # d(Fx, Fy) = d(x,y)/4 <= 4 d(x,y)/5
        for k in (1, 2, 3):
            cert = verify_diagonal(averaging(k), sq_space, diagonal_phi(linear_phi(0.2)),
                                   2000, seed=4)
            assert cert.passed, k

    def test_rejects_window_condition(self, sq_space):
        with pytest.raises(UsageError):
            verify_diagonal(averaging(1), sq_space, ciric_max(0.5), 100, seed=0)


class TestEstimateConstant:
    def test_averaging_k1_closed_form(self, sq_space):
        est = estimate_constant(averaging(1), sq_space, "ciric_max", 3000, seed=1)
        assert est["constant_hat"] == pytest.approx(0.25, abs=1e-9)

    def test_averaging_k2_grid(self, sq_space):
        est = estimate_constant(averaging(2), sq_space, "ciric_max", 0, seed=0,
                                grid_points=40)
        assert est["constant_hat"] == pytest.approx(0.25, abs=5e-3)

    def test_constant_operator_is_zero(self, sq_space):
        est = estimate_constant(constant([1.0], k=2), sq_space, "ciric_max", 500, seed=2)
        assert est["constant_hat"] == 0.0

    def test_banach_kind(self, sq_space):
        est = estimate_constant(averaging(1), sq_space, "banach", 2000, seed=3)
        assert est["constant_hat"] == pytest.approx(0.25, abs=1e-9)

    def test_kannan_kind_below_admissible(self, eu_space):
        est = estimate_constant(affine([0.25]), eu_space, "kannan", 3000, seed=4)
        assert est["constant_hat"] <= 2 / 3 + 1e-9

    def test_consistency_with_verify(self, sq_space):
        op = averaging(2)
        est = estimate_constant(op, sq_space, "ciric_max", 2000, seed=5)
        cert = verify(op, sq_space, ciric_max(est["constant_hat"] + 1e-6), 2000, seed=5)
        assert cert.passed

    def test_more_samples_never_decrease(self, sq_space):
        op = averaging(2)
        prev = -np.inf
        for n in (100, 500, 2500):
            est = estimate_constant(op, sq_space, "ciric_max", n, seed=6)
            assert est["constant_hat"] >= prev - 1e-15
            prev = est["constant_hat"]

    def test_degenerate_domain(self):
        space = squared_euclidean(Box(np.ones(1), np.ones(1)))
        with pytest.raises(DegenerateDomainError):
            estimate_constant(averaging(1), space, "ciric_max", 100, seed=0)

    def test_unknown_kind(self, sq_space):
        with pytest.raises(UsageError):
            estimate_constant(averaging(1), sq_space, "weak_phi", 100, seed=0)


class TestCertificateSerialization:
    def test_schema_fields(self, sq_space):
        cert = verify(averaging(1), sq_space, ciric_max(0.2), 1000, seed=7)
        d = cert.to_dict()
        assert d["verdict"] == "falsified"
        assert d["samples"] == 1000
        assert d["seed"] == 7
        assert isinstance(d["witness"]["window"], list)
        assert set(d) == {"condition", "verdict", "samples", "seed", "slack_min",
                          "estimated_constant", "witness"}

    def test_condition_dict(self):
        spec = ConditionSpec("weak_phi", phi=piecewise_phi())
        assert spec.to_dict() == {"kind": "weak_phi", "phi": {"kind": "paper_piecewise"}}
