"""Error-bound constants, directional bounds, and the measurement helpers."""

import numpy as np
import pytest

from dfoq import bounds, linalg, testbed
from dfoq.errors import DirectionDomainError, InvalidInputError, NotPoisedError
from dfoq.models import qs_preset, solve_mfn, solve_mn
from dfoq.sample_sets import SampleSet, StructuredSet, kkt_matrices
from dfoq.simplex import DirectionPack


def plus_minus_axes(n, count=None):
    E = np.eye(n)[:, : (count or n)]
    return SampleSet(np.zeros(n), np.hstack([E, -E]))


def test_kappa_generic_identity_frame():
    Y = SampleSet(np.zeros(2), np.eye(2))
    consts = bounds.kappa_generic(2.0, 2.0, Y)
    assert consts.kappa_ef == pytest.approx(2.0 * (np.sqrt(2.0) + 1.0), rel=1e-14)
    assert consts.kappa_eg == pytest.approx(2.0 * consts.kappa_ef + 4.0, rel=1e-14)
    assert consts.kappa_mH == 2.0

    zero = bounds.kappa_generic(0.0, 0.0, Y)
    assert zero.kappa_ef == 0.0 and zero.kappa_eg == 0.0

    with pytest.raises(InvalidInputError):
        bounds.kappa_generic(-1.0, 0.0, Y)


def test_kappa_mfn_single_direction():
    Y = SampleSet(np.zeros(1), np.array([[1.0]]))
    # F = [[1/4, 1], [1, 0]], inverse [[0, 1], [1, -1/4]], inf-norm 5/4
    assert bounds.kappa_mH_mfn(16.0, Y) == pytest.approx(5.0, rel=1e-14)


def test_kappa_mfn_full_plus_minus_set():
    Y = plus_minus_axes(2)
    F = kkt_matrices(Y).F_unit
    expected = 0.5 * 4 * np.linalg.norm(np.linalg.inv(F), np.inf)
    assert bounds.kappa_mH_mfn(2.0, Y) == pytest.approx(expected, rel=1e-12)


def test_kappa_mfn_scale_invariant():
    rng = np.random.default_rng(5)
    Y = SampleSet(rng.standard_normal(2), rng.standard_normal((2, 5)))
    base = bounds.kappa_mH_mfn(3.0, Y)
    for t in (0.25, 1e-3, 40.0):
        assert bounds.kappa_mH_mfn(3.0, Y.scale(t)) == pytest.approx(base, rel=1e-9)


def test_kappa_mfn_rejects_degenerate_set():
    with pytest.raises(NotPoisedError):
        bounds.kappa_mH_mfn(1.0, plus_minus_axes(3, count=2))


def test_kappa_mn_combinations():
    assert bounds.kappa_mH_mn(0.0, 0.0, 1.0, 7.5) == 7.5
    assert bounds.kappa_mH_mn(1.0, 1.0, 2.0, 4.0) == pytest.approx(5.0, rel=1e-14)
    kg, keg, db, kmh = 0.7, 1.3, 2.2, 0.9
    assert bounds.kappa_mH_mn(kg, keg, db, kmh) == pytest.approx(
        np.hypot(kg + keg * db, kmh), rel=1e-14
    )
    Y = SampleSet(np.zeros(2), 2.0 * np.eye(2))
    with pytest.raises(InvalidInputError):
        bounds.kappa_mH_mn(1.0, 1.0, 1.0, 1.0, Y=Y)
    bounds.kappa_mH_mn(1.0, 1.0, 2.0, 1.0, Y=Y)


def test_kappa_qs_fixtures():
    from dfoq.models import GradTerm, HessTerm, QSSpec

    n = 3
    eye_cols = tuple(np.eye(n)[:, i : i + 1] for i in range(n))
    pack = DirectionPack(np.eye(n), eye_cols)
    grad = (GradTerm(1.0, np.zeros(n), np.eye(n)),)
    one_term = QSSpec(grad, (HessTerm(1.0, pack),))
    assert bounds.kappa_mH_qs(5.0, one_term) == pytest.approx(5.0 * np.sqrt(n), rel=1e-14)

    st = StructuredSet(np.zeros(2), np.eye(2))
    assert bounds.kappa_mH_qs(2.0, qs_preset("centred", st)) == pytest.approx(
        2.0 * np.sqrt(2.0), rel=1e-14
    )

    zero_term = QSSpec(grad, (HessTerm(0.0, pack),))
    assert bounds.kappa_mH_qs(9.0, zero_term) == 0.0


def test_aligned_bound():
    assert bounds.directional_bound_aligned(3.0, 1.0) == 1.0
    assert bounds.directional_bound_aligned(0.0, 0.5) == 0.0
    with pytest.raises(InvalidInputError):
        bounds.directional_bound_aligned(1.0, 0.0)


def test_aligned_bound_covers_quartic_models():
    # even function on a plus-minus pair: the fitted curvature is
    # (f(d) + f(-d)) / ||d||^2 = 2 delta^2 while the true Hessian vanishes
    tf = testbed.get("quartic", dim=1, x0=np.zeros(1))
    for delta in (1.0, 0.5, 0.125):
        Y = SampleSet(np.zeros(1), np.array([[delta, -delta]]))
        L = tf.lipschitz_on(Y.x0, delta).L_hess
        assert L == pytest.approx(24.0 * delta)
        bound = bounds.directional_bound_aligned(L, delta)
        assert bound == pytest.approx(8.0 * delta ** 2)
        for solver in (solve_mn, solve_mfn):
            model, _ = solver(tf.f, Y)
            err = abs(model.H[0, 0] - tf.hess(Y.x0)[0, 0])
            assert err == pytest.approx(2.0 * delta ** 2, rel=1e-9)
            assert err <= bound


def test_cross_bound():
    assert bounds.directional_bound_cross(1.5, 3.0, 1.0, 1.0, 1.0) == pytest.approx(
        4.0 * 1.5 + 2.0
    )
    assert bounds.directional_bound_cross(0.0, 0.0, 1.0, 1.0, 1.0) == 0.0
    kef, L, d, ni, nj = 2.0, 5.0, 0.5, 0.5, 0.25
    assert bounds.directional_bound_cross(kef, L, d, ni, nj) == pytest.approx(
        4 * kef * d ** 2 / (ni * nj) + (2 * L / 3) * d ** 3 / (ni * nj)
    )
    with pytest.raises(InvalidInputError):
        bounds.directional_bound_cross(1.0, 1.0, 1.0, 0.0, 1.0)


def test_general_bound_at_sample_direction():
    # square frame: the expansion of d^i is exactly e^i, so the opening
    # term of the bound drops out
    rng = np.random.default_rng(8)
    D = rng.standard_normal((3, 3)) + 3.0 * np.eye(3)
    radius = np.max(np.linalg.norm(D, axis=0))
    pinv_sq = linalg.matrix_norm(linalg.pinv(D / radius), "spectral") ** 2
    kef, L = 1.7, 2.4
    for i in range(D.shape[1]):
        got = bounds.directional_bound_general(kef, L, D, D[:, i])
        assert got == pytest.approx((L / 3.0) * pinv_sq * radius, rel=1e-12)


def test_general_bound_single_direction_matches_global():
    # p = 1 forces the coefficient ratio to zero, so both forms coincide
    D = np.array([[0.7]])
    kef, L = 2.0, 3.0
    at_d = bounds.directional_bound_general(kef, L, D, D[:, 0])
    assert at_d == pytest.approx(bounds.hess_error_bound_global(kef, L, D), rel=1e-12)
    assert at_d == pytest.approx(L / 3.0 * 0.7, rel=1e-12)


def test_general_bound_diagonal_direction():
    # v = (1,1)/sqrt(2): ratio (||v||_1^2 - ||v||_inf^2)/||v||^2 = 3/2
    kef, L = 1.0, 3.0
    d = np.array([1.0, 1.0]) / np.sqrt(2.0)
    got = bounds.directional_bound_general(kef, L, np.eye(2), d)
    assert got == pytest.approx(6.0 * kef + (4.0 / 3.0) * L, rel=1e-12)


def test_global_bound_dominates_directional():
    rng = np.random.default_rng(21)
    D = rng.standard_normal((3, 5))
    kef, L = 1.3, 0.8
    glob = bounds.hess_error_bound_global(kef, L, D)
    for _ in range(50):
        d = rng.standard_normal(3)
        assert bounds.directional_bound_general(kef, L, D, d) <= glob * (1 + 1e-12)


def test_general_bound_domain_errors():
    D_flat = np.array([[1.0, 2.0], [0.0, 0.0]])
    with pytest.raises(DirectionDomainError):
        bounds.directional_bound_general(1.0, 1.0, D_flat, np.array([1.0, 0.0]))
    with pytest.raises(DirectionDomainError):
        bounds.hess_error_bound_global(1.0, 1.0, D_flat)
    with pytest.raises(InvalidInputError):
        bounds.directional_bound_general(1.0, 1.0, np.eye(2), np.zeros(2))


def test_gsh_bounds():
    assert bounds.directional_bound_gsh_cross(4.0, 3.0, 1.0) == pytest.approx(5.0)

    S = np.eye(3)[:, :2]
    hn, L = 2.0, 3.0
    # sample direction: ratio 0, bound (L/3) ||Sbar^+||^2 Delta_S
    got = bounds.directional_bound_gsh_general(hn, L, S, S[:, 0])
    assert got == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(DirectionDomainError):
        bounds.directional_bound_gsh_general(hn, L, S, np.array([0.0, 0.0, 1.0]))

    p = S.shape[1]
    expected = (p - 1.0 / p) * hn + (L / 3.0) * (p - 1.0 / p + 1.0)
    assert bounds.gsh_error_bound_global(hn, L, S) == pytest.approx(expected, rel=1e-12)

    rng = np.random.default_rng(33)
    glob = bounds.gsh_error_bound_global(hn, L, S)
    for _ in range(50):
        d = S @ rng.standard_normal(2)
        assert bounds.directional_bound_gsh_general(hn, L, S, d) <= glob * (1 + 1e-12)


def test_ball_points_contract():
    x0 = np.array([1.0, -2.0, 0.5])
    pts = bounds.ball_points(x0, 0.75, n_samples=100)
    assert pts.shape == (101, 3)
    assert np.array_equal(pts[0], x0)
    assert np.all(np.linalg.norm(pts - x0, axis=1) <= 0.75 * (1 + 1e-12))
    again = bounds.ball_points(x0, 0.75, n_samples=100)
    assert np.array_equal(pts, again)
    with pytest.raises(InvalidInputError):
        bounds.ball_points(x0, 0.75, n_samples=0)


def test_measure_errors_exact_quadratic():
    tf = testbed.get("sphere", dim=2)
    Y = SampleSet(tf.x0, np.hstack([np.eye(2), -np.eye(2)]))
    model, _ = solve_mn(tf.f, Y)
    meas = bounds.measure_errors(tf, model, Y, n_samples=64)
    assert meas.err_f <= 1e-12
    assert meas.err_g <= 1e-12
    assert meas.aligned_max <= 1e-12
    assert meas.cross_max <= 1e-12


def test_measure_errors_crafted_gap():
    from dfoq.models import QuadraticModel

    tf = testbed.get("sphere", dim=2)
    model = QuadraticModel(tf.x0, 0.0, np.zeros(2), np.diag([2.0, 0.0]))
    Y = SampleSet(tf.x0, np.eye(2))
    meas = bounds.measure_errors(tf, model, Y, n_samples=16)
    assert np.allclose(meas.aligned, [0.0, 2.0])
    assert meas.cross_max == 0.0
    assert np.isnan(meas.cross[0, 0]) and np.isnan(meas.cross[1, 1])
    assert meas.err_g > 0


def test_fit_slope():
    deltas = np.array([1.0, 0.5, 0.25, 0.125])
    assert bounds.fit_slope(deltas, 3.0 * deltas ** 2) == pytest.approx(2.0, abs=1e-12)
    assert bounds.fit_slope(deltas, 0.5 * deltas) == pytest.approx(1.0, abs=1e-12)
    # everything at the roundoff floor: no informative points left
    assert np.isnan(bounds.fit_slope(deltas, np.full(4, 1e-16)))
    assert np.isnan(bounds.fit_slope(deltas[:1], np.array([1.0])))
    with pytest.raises(InvalidInputError):
        bounds.fit_slope(deltas, np.ones(3))
