import numpy as np
import pytest

from regsys import (
    AdmissibilityError,
    BoundaryTriple,
    ShapeError,
    SpectrumError,
    close_boundary_loop,
    control_operator_from_triple,
    default_shift_sweep,
    dirichlet_map,
    feed_in_control,
    feed_in_full,
    feed_in_observe,
    feedthrough_estimate,
    laplacian_triple,
    restrict_generator,
    wave_triple,
)


def selector_triple(n=5):
    """Dense random interior dynamics with the last coordinate as the
    boundary channel; the restriction must be the leading block exactly."""
    rng = np.random.default_rng(42)
    L = rng.standard_normal((n, n))
    G = np.zeros((1, n))
    G[0, -1] = 1.0
    K = rng.standard_normal((1, n))
    return BoundaryTriple(L=L, G=G, K=K)


class TestBoundaryTriple:
    def test_dimensions(self):
        bt = selector_triple(5)
        assert bt.dim == 5
        assert bt.n_interior == 4

    def test_rank_deficient_traces_refused(self):
        L = np.eye(4)
        G = np.zeros((2, 4))
        G[0, -1] = 1.0
        G[1, -1] = 1.0  # duplicate row
        with pytest.raises(ShapeError):
            BoundaryTriple(L=L, G=G, K=np.zeros((1, 4)))

    def test_no_interior_left_refused(self):
        with pytest.raises(ShapeError):
            BoundaryTriple(L=np.eye(2), G=np.eye(2), K=np.zeros((1, 2)))

    def test_json_round_trip_with_optional_blocks(self, tmp_path):
        bt = wave_triple(6)
        path = tmp_path / "triple.json"
        bt.save_json(path)
        back = BoundaryTriple.load_json(path)
        np.testing.assert_array_equal(back.L, bt.L)
        np.testing.assert_array_equal(back.G2, bt.G2)
        np.testing.assert_array_equal(back.W, bt.W)

    def test_json_round_trip_without_optional_blocks(self):
        bt = selector_triple()
        back = BoundaryTriple.from_json_dict(bt.to_json_dict())
        assert back.G2 is None and back.W is None
        np.testing.assert_array_equal(back.K, bt.K)


class TestRestriction:
    def test_selector_restriction_is_leading_block(self):
        bt = selector_triple(6)
        rg = restrict_generator(bt)
        np.testing.assert_allclose(rg.a, bt.L[:5, :5], atol=1e-12)
        # basis charts the kernel with an identity interior block
        np.testing.assert_allclose(rg.basis[:5, :], np.eye(5), atol=1e-12)
        np.testing.assert_allclose(rg.basis[5, :], 0.0, atol=1e-12)

    def test_laplacian_spectrum(self):
        # clamped-clamped second difference: the dispersion relation
        # -4 n^2 sin^2(j pi / 2n) is exact, and the continuum -(j pi)^2
        # is approached at order dx^2
        n = 60
        bt = laplacian_triple(n)
        rg = restrict_generator(bt)
        ev = np.sort(np.linalg.eigvals(rg.a).real)[::-1]
        for j in (1, 2, 3):
            exact = -4.0 * n * n * np.sin(j * np.pi / (2 * n)) ** 2
            assert ev[j - 1] == pytest.approx(exact, rel=1e-9)
            assert ev[j - 1] == pytest.approx(-((j * np.pi) ** 2), rel=3e-3 * j * j)


class TestDirichletMap:
    def test_sinh_profile_oracle(self):
        # z'' = lam z, z(0) = 0, z(1) = 1 has z = sinh(sqrt(lam) x)/sinh(sqrt(lam));
        # the second-difference lift converges at order dx^2
        lam = 4.0
        errors = []
        for n in (50, 100):
            bt = laplacian_triple(n)
            d = dirichlet_map(bt, lam).matrix[:, 0]
            x = np.arange(1, n + 1) / n
            exact = np.sinh(np.sqrt(lam) * x) / np.sinh(np.sqrt(lam))
            errors.append(np.max(np.abs(d - exact)))
        assert errors[1] < 1e-4
        assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.15)

    def test_defining_relations(self):
        bt = wave_triple(8)
        d = dirichlet_map(bt, 3.0, "secondary")
        traces = bt.traces()
        np.testing.assert_allclose(traces[1:2, :] @ d.matrix, np.eye(1), atol=1e-10)
        np.testing.assert_allclose(traces[0:1, :] @ d.matrix, 0.0, atol=1e-10)

    def test_decomposition_splits_any_vector(self):
        # z - D_lam G z always lies in ker G since G D = I
        bt = laplacian_triple(30)
        d = dirichlet_map(bt, 2.0).matrix
        rng = np.random.default_rng(0)
        z = rng.standard_normal(bt.dim)
        z0 = z - d[:, 0] * (bt.G @ z).item()
        assert abs((bt.G @ z0).item()) < 1e-12 * max(np.max(np.abs(z)), 1.0)

    def test_eigenvalue_shift_refused(self):
        bt = laplacian_triple(20)
        rg = restrict_generator(bt)
        lam1 = float(np.sort(np.linalg.eigvals(rg.a).real)[-1])
        with pytest.raises(SpectrumError):
            dirichlet_map(bt, lam1)

    def test_channel_validation(self):
        bt = laplacian_triple(10)
        with pytest.raises(ShapeError):
            dirichlet_map(bt, 1.0, "secondary")
        with pytest.raises(ValueError):
            dirichlet_map(bt, 1.0, "tertiary")


class TestControlOperator:
    def test_shift_independence(self):
        bt = laplacian_triple(40)
        b3 = control_operator_from_triple(bt, 3.0)
        b12 = control_operator_from_triple(bt, 12.0)
        assert np.max(np.abs(b3 - b12)) <= 1e-8 * max(np.max(np.abs(b3)), 1.0)

    def test_laplacian_control_column(self):
        # only the last interior row couples to the boundary node: B is
        # the single stencil entry 1/dx^2 in the last position
        n = 20
        bt = laplacian_triple(n)
        b = control_operator_from_triple(bt, 2.0)
        expect = np.zeros((n - 1, 1))
        expect[-1, 0] = float(n * n)
        np.testing.assert_allclose(b, expect, rtol=1e-7, atol=1e-5)


class TestFeedthrough:
    def test_laplacian_feedthrough_vanishes(self):
        # K D_lam = sinh(sqrt(lam) dx)/sinh(sqrt(lam)) -> 0
        bt = laplacian_triple(30)
        est = feedthrough_estimate(bt)
        assert est.converged
        assert abs(est.value[0, 0]) < 1e-3
        assert est.residuals[-1] < est.residuals[0]

    def test_wave_feedthroughs_are_the_gains(self):
        bt = wave_triple(16, k_gains=(0.4, 0.3), w_gains=(0.2, 0.5))
        sweep = default_shift_sweep(bt, 18)
        cases = [
            ("primary", "K", 0.4), ("secondary", "K", 0.3),
            ("primary", "W", 0.2), ("secondary", "W", 0.5),
        ]
        for channel, obs, expect in cases:
            est = feedthrough_estimate(bt, sweep, channel, obs)
            assert est.converged, f"{channel}/{obs} did not converge"
            assert est.value[0, 0] == pytest.approx(expect, abs=1e-8)

    def test_short_sweep_withholds_value(self):
        # the tail rule needs at least three residuals
        bt = wave_triple(8)
        est = feedthrough_estimate(bt, np.array([10.0, 20.0]))
        assert not est.converged
        assert est.value is None

    def test_sweep_validation(self):
        bt = wave_triple(8)
        with pytest.raises(ValueError):
            feedthrough_estimate(bt, np.array([20.0, 10.0]))
        with pytest.raises(ValueError):
            feedthrough_estimate(bt, observation="Q")

    def test_missing_w_refused(self):
        bt = laplacian_triple(10)
        with pytest.raises(ShapeError):
            feedthrough_estimate(bt, observation="W")

    def test_json_dict(self):
        bt = wave_triple(8)
        doc = feedthrough_estimate(bt).to_json_dict()
        assert doc["converged"] is True
        assert len(doc["lambdas"]) == len(doc["residuals"])


class TestFeedIn:
    def test_full_composite_on_wave(self):
        bt = wave_triple(16, k_gains=(0.4, 0.3), w_gains=(0.2, 0.5))
        rep = feed_in_full(bt, lambda_sweep=default_shift_sweep(bt, 18))
        assert rep.deviation_b <= 1e-6
        assert rep.deviation_c <= 1e-6
        assert rep.deviation_d <= 1e-6
        # composite feedthrough: w1 (1 - k1)^-1 k2 + w2 = 0.2/0.6*0.3 + 0.5
        assert rep.realization_matrices["d"][0, 0] == pytest.approx(0.6, abs=1e-6)
        doc = rep.to_json_dict()
        assert doc["deviations"]["b"] == rep.deviation_b
        assert "composite" in rep.residual_traces

    def test_control_composite_on_wave(self):
        bt = wave_triple(12)
        rep = feed_in_control(bt, lambda_sweep=default_shift_sweep(bt, 18))
        assert rep.deviation_b <= 1e-6
        assert rep.deviation_c is None

    def test_observe_composite_on_wave(self):
        bt = wave_triple(12)
        rep = feed_in_observe(bt, lambda_sweep=default_shift_sweep(bt, 18))
        assert rep.deviation_c <= 1e-6
        assert rep.feedthroughs["q_bar"][0, 0] == pytest.approx(0.2, abs=1e-7)

    def test_feed_in_control_needs_secondary_trace(self):
        with pytest.raises(ShapeError):
            feed_in_control(laplacian_triple(10))

    def test_feed_in_observe_needs_w(self):
        with pytest.raises(ShapeError):
            feed_in_observe(laplacian_triple(10))

    def test_nonconvergent_sweep_refused(self):
        bt = wave_triple(8)
        with pytest.raises(AdmissibilityError):
            feed_in_control(bt, lambda_sweep=np.array([10.0, 20.0]))


class TestClosedLoopRestriction:
    def test_laplacian_robin_closure_oracle(self):
        # loop z_n = k z_1: the last interior row picks up k/dx^2 on the
        # first interior coordinate, nothing else moves
        n, k = 12, 0.7
        bt = laplacian_triple(n)
        rg = close_boundary_loop(bt, gain=k, observation="K")
        expect = bt.L[: n - 1, : n - 1].copy()
        expect[-1, 0] += k * n * n
        np.testing.assert_allclose(rg.a, expect, rtol=1e-10, atol=1e-8)

    def test_zero_gain_is_open_loop(self):
        bt = laplacian_triple(15)
        rg0 = close_boundary_loop(bt, gain=0.0)
        rg = restrict_generator(bt)
        np.testing.assert_allclose(rg0.a, rg.a, atol=1e-12)

    def test_secondary_trace_refused(self):
        with pytest.raises(ShapeError):
            close_boundary_loop(wave_triple(8))

    def test_gain_shape_checked(self):
        bt = laplacian_triple(10)
        with pytest.raises(ShapeError):
            close_boundary_loop(bt, gain=np.ones((2, 2)))
