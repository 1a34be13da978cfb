"""Interpolation model solvers and the simplex-derivative model builder."""

import numpy as np
import pytest

from dfoq import linalg
from dfoq.errors import InfeasibleError, InvalidInputError
from dfoq.models import (
    GradTerm,
    HessTerm,
    QSSpec,
    QuadraticModel,
    build_qs,
    interpolation_check,
    qs_preset,
    solve_mfn,
    solve_mn,
)
from dfoq.sample_sets import SampleSet, StructuredSet, kkt_matrices
from dfoq.simplex import DirectionPack, Oracle, delta_f

GOLD_TOL = 1e-10

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


def sphere(x):
    return float(np.dot(x, x))


def five_point_set():
    D = np.column_stack([E1, E2, 2 * E1, E1 + E2])
    return SampleSet(np.zeros(2), D)


def degenerate_axes_set():
    e = np.eye(3)
    D = np.column_stack([e[:, 0], -e[:, 0], e[:, 1], -e[:, 1]])
    return SampleSet(np.zeros(3), D)


def test_solve_mn_golden_pairs():
    model, diag = solve_mn(sphere, five_point_set())
    assert np.allclose(model.g, [0.0, 0.8], atol=GOLD_TOL)
    assert np.allclose(model.H, np.diag([2.0, 0.4]), atol=GOLD_TOL)
    assert model.c == 0.0
    assert model.symmetric
    assert diag.kkt_residual <= 1e-9
    assert diag.feasibility_residual <= 1e-9

    model, _ = solve_mn(sphere, degenerate_axes_set())
    assert np.allclose(model.g, np.zeros(3), atol=GOLD_TOL)
    assert np.allclose(model.H, np.diag([2.0, 2.0, 0.0]), atol=GOLD_TOL)

    Y1 = SampleSet(np.zeros(1), np.array([[1.0, -1.0]]))
    model, _ = solve_mn(lambda x: float(x[0] ** 2), Y1)
    assert abs(model.g[0]) <= GOLD_TOL
    assert model.H[0, 0] == pytest.approx(2.0, abs=GOLD_TOL)


def test_solve_mfn_golden_pairs():
    model, diag = solve_mfn(sphere, five_point_set())
    assert np.allclose(model.g, [0.0, 1.0], atol=GOLD_TOL)
    assert np.allclose(model.H, np.diag([2.0, 0.0]), atol=GOLD_TOL)
    assert diag.alpha_unique and diag.hessian_unique

    model, diag = solve_mfn(sphere, degenerate_axes_set())
    assert np.allclose(model.H, np.diag([2.0, 2.0, 0.0]), atol=GOLD_TOL)
    assert not diag.alpha_unique
    # minimum-norm representative of the gradient family
    assert np.allclose(model.g, np.zeros(3), atol=GOLD_TOL)


def test_solver_stationarity():
    # the returned multipliers must reproduce the model: alpha = D lam,
    # H = (1/2) sum lam_i d^i d^iT, and satisfy G lam = delta_f
    Y = five_point_set()
    for solver in (solve_mn, solve_mfn):
        model, diag = solver(sphere, Y)
        lam = np.asarray(diag.multipliers)
        H = 0.5 * (Y.D * lam) @ Y.D.T
        assert np.allclose(H, model.H, atol=1e-10)
        if solver is solve_mn:
            assert np.allclose(Y.D @ lam, model.g, atol=1e-10)
            gram = Y.D.T @ Y.D
            G = gram + 0.25 * gram ** 2
            delta = delta_f(sphere, Y.x0, Y.D)
            assert np.linalg.norm(G @ lam - delta) <= 1e-9 * (1.0 + np.linalg.norm(delta))


def test_solvers_interpolate_own_set():
    rng = np.random.default_rng(14)
    for _ in range(5):
        Y = SampleSet(rng.standard_normal(3), rng.standard_normal((3, 4)))

        def f(x):
            return float(np.sin(x[0]) + x[1] ** 2 - 0.5 * x[2])

        for solver in (solve_mn, solve_mfn):
            model, _ = solver(f, Y)
            report = interpolation_check(model, f, Y)
            assert report.passed
            assert report.max_violation <= 1e-9


def test_infeasible_raises():
    # more plus-minus pairs than gradient unknowns, with cubic content that
    # no quadratic can match
    rng = np.random.default_rng(7)
    U = rng.standard_normal((3, 4))
    U /= np.linalg.norm(U, axis=0)
    Y = SampleSet(np.zeros(3), 0.25 * np.hstack([U, -U]))

    def f(x):
        return float(np.sin(x[0]) + np.cos(2 * x[1]) + x[2] ** 3 + x[0] * x[1])

    with pytest.raises(InfeasibleError):
        solve_mn(f, Y)
    with pytest.raises(InfeasibleError):
        solve_mfn(f, Y)


def test_mfn_hessian_ignores_multiplier_family():
    # feasible but not poised: every multiplier in the solution family must
    # give the same Hessian
    Y = degenerate_axes_set()
    model, diag = solve_mfn(sphere, Y)
    F = kkt_matrices(Y).F_unit
    N = linalg.null_space_basis(F)
    assert N.shape[1] > 0
    rng = np.random.default_rng(3)
    r = Y.radius
    for _ in range(10):
        z = np.concatenate([np.asarray(diag.multipliers) * r ** 4, model.g * r])
        z = z + N @ rng.standard_normal(N.shape[1])
        lam = z[: Y.m] / r ** 4
        H = 0.5 * (Y.D * lam) @ Y.D.T
        assert np.linalg.norm(H - model.H, "fro") <= 1e-9


def _objective_mn(model):
    return 0.5 * float(model.g @ model.g) + 0.5 * np.linalg.norm(model.H, "fro") ** 2


def test_objective_ordering():
    rng = np.random.default_rng(19)
    kept = 0
    while kept < 10:
        Y = SampleSet(rng.standard_normal(2), rng.standard_normal((2, 4)))

        def f(x):
            return float(np.exp(0.3 * x[0]) + x[1] ** 2)

        try:
            mn, _ = solve_mn(f, Y)
            mfn, _ = solve_mfn(f, Y)
        except InfeasibleError:
            continue
        kept += 1
        assert np.linalg.norm(mfn.H, "fro") <= np.linalg.norm(mn.H, "fro") + 1e-9
        assert _objective_mn(mn) <= _objective_mn(mfn) + 1e-9


def _constraint_matrix(Y):
    """Rows of the interpolation system over z = (alpha, diag H, upper H)."""
    n, m = Y.n, Y.m
    slots = [(a, a) for a in range(n)] + [(a, b) for a in range(n) for b in range(a + 1, n)]
    A = np.zeros((m, n + len(slots)))
    for i in range(m):
        d = Y.D[:, i]
        A[i, :n] = d
        for col, (a, b) in enumerate(slots):
            A[i, n + col] = 0.5 * d[a] ** 2 if a == b else d[a] * d[b]
    return A, slots


def test_mn_objective_is_optimal_over_feasible_set():
    Y = five_point_set()
    model, _ = solve_mn(sphere, Y)
    A, slots = _constraint_matrix(Y)
    n = Y.n
    z_star = np.concatenate(
        [model.g, [model.H[a, b] for (a, b) in slots]]
    )
    weights = np.concatenate([np.ones(n), [1.0 if a == b else 2.0 for (a, b) in slots]])
    N = linalg.null_space_basis(A)
    rng = np.random.default_rng(23)
    best = float(z_star @ (weights * z_star))
    for _ in range(20):
        z = z_star + N @ rng.standard_normal(N.shape[1])
        assert float(z @ (weights * z)) >= best - 1e-9


def test_model_evaluation_fixtures():
    flat = QuadraticModel(np.zeros(2), 3.5, np.zeros(2), np.zeros((2, 2)))
    assert flat.value(np.array([4.0, -1.0])) == 3.5

    mn, _ = solve_mn(sphere, five_point_set())
    assert mn.value(2 * E1) == pytest.approx(4.0, abs=1e-10)

    skew = QuadraticModel(np.zeros(2), 0.0, np.zeros(2), np.array([[2.0, 0.0], [2.0, 0.0]]))
    assert not skew.symmetric
    d = np.array([1.0, 1.0])
    assert skew.value(d) == pytest.approx(2.0)
    assert np.allclose(skew.gradient(d), [3.0, 1.0])
    assert np.array_equal(skew.hessian(), np.array([[2.0, 1.0], [1.0, 0.0]]))


def test_model_many_point_forms_agree():
    rng = np.random.default_rng(2)
    model = QuadraticModel(
        rng.standard_normal(3), 1.2, rng.standard_normal(3), rng.standard_normal((3, 3))
    )
    X = rng.standard_normal((6, 3))
    assert np.allclose(model.value_many(X), [model.value(x) for x in X])
    assert np.allclose(model.gradient_many(X), [model.gradient(x) for x in X])


def test_model_validation():
    with pytest.raises(InvalidInputError):
        QuadraticModel(np.zeros(2), 0.0, np.zeros(3), np.zeros((2, 2)))
    with pytest.raises(InvalidInputError):
        QuadraticModel(np.zeros(2), 0.0, np.zeros(2), np.zeros((3, 3)))


def test_interpolation_check_center_mismatch():
    model = QuadraticModel(np.ones(2), 0.0, np.zeros(2), np.zeros((2, 2)))
    with pytest.raises(InvalidInputError):
        interpolation_check(model, sphere, five_point_set())


def test_forward_preset_misses_centred_set():
    # forward differences never see x0 - d, so an odd function breaks the fit
    st = StructuredSet(np.zeros(1), np.array([[1.0]]))
    spec = qs_preset("forward", st)
    model = build_qs(lambda x: float(x[0] ** 3), st.x0, spec)
    report = interpolation_check(model, lambda x: float(x[0] ** 3), st.expand())
    assert not report.passed
    assert report.max_violation == pytest.approx(3.0, abs=1e-12)


def test_qs_centred_matches_mn_fixture():
    st = StructuredSet(np.zeros(3), np.eye(3)[:, :2])
    model = build_qs(sphere, st.x0, qs_preset("centred", st))
    assert np.allclose(model.g, np.zeros(3), atol=1e-12)
    assert np.allclose(model.H, np.diag([2.0, 2.0, 0.0]), atol=1e-12)
    mn, _ = solve_mn(sphere, st.expand())
    assert np.allclose(model.g, mn.g, atol=1e-10)
    assert np.allclose(model.H, mn.H, atol=1e-10)


def test_qs_forward_gradient_alone_differs():
    spec = QSSpec(
        (GradTerm(1.0, np.zeros(3), np.eye(3)[:, :1]),),
        (HessTerm(1.0, StructuredSet(np.zeros(3), np.eye(3)[:, :2]).as_gsh_pack()),),
    )
    model = build_qs(sphere, np.zeros(3), spec)
    assert np.allclose(model.g, np.eye(3)[:, 0], atol=1e-12)
    assert np.linalg.norm(model.g) > 0


def test_qs_linear_function():
    a = np.array([2.0, -1.0])
    st = StructuredSet(np.zeros(2), np.eye(2))
    for preset in ("centred", "forward", "adapted-0", "adapted-1"):
        model = build_qs(lambda x: float(a @ x), st.x0, qs_preset(preset, st))
        assert np.allclose(model.g, a, atol=1e-11)
        assert np.allclose(model.H, np.zeros((2, 2)), atol=1e-11)


def test_qs_preset_validation():
    st = StructuredSet(np.zeros(2), np.eye(2))
    with pytest.raises(InvalidInputError):
        qs_preset("midpoint", st)
    with pytest.raises(InvalidInputError):
        qs_preset("adapted-7", st)
    with pytest.raises(InvalidInputError):
        qs_preset("adapted-x", st)
    with pytest.raises(InvalidInputError):
        QSSpec((), (HessTerm(1.0, st.as_gsh_pack()),))


def test_qs_point_audit():
    st = StructuredSet(np.zeros(2), 0.5 * np.eye(2))
    Y = st.expand()
    centred = qs_preset("centred", st)
    _, ok = centred.audit_points(st.x0, Y)
    assert ok
    forward = qs_preset("forward", st)
    _, ok = forward.audit_points(st.x0, Y)
    # forward stencils use x0 + d^i + d^j, which the plus-minus set lacks
    assert not ok


def test_solver_oracle_call_budget():
    # both solvers need exactly the m+1 sample values
    Y = five_point_set()
    for solver in (solve_mn, solve_mfn):
        f = Oracle(sphere)
        solver(f, Y)
        assert f.calls == Y.m + 1
