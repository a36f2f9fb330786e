import numpy as np
import pytest

from gmemi.design import StepParams, design_B_identity_L
from gmemi.seeds import make_lop_seed, make_plain_seed, make_tgv_seed, difference_matrix_1d
from gmemi.solver import (
    Constraint,
    ConvexityError,
    GMEMIOperator,
    ProblemSpec,
    SolverState,
    apply_T,
    averagedness_check,
    certify_inner_optimality,
    evaluate_objective,
    solve,
)


def _lop_spec(rng, n=20, d=15, lam=0.5, theta=0.8, alpha=1.0, constraint=None):
    A = rng.standard_normal((d, n))
    x = np.zeros(n)
    x[1:4] = rng.standard_normal(3)
    y = A @ x + 0.01 * rng.standard_normal(d)
    B = design_B_identity_L(A, lam, theta)
    return ProblemSpec(A, y, np.eye(n), lam, make_lop_seed(n, alpha), B.T @ B,
                       constraint or Constraint.whole_space())


# -- problem spec and state -------------------------------------------------------


def test_spec_validation(rng):
    A = rng.standard_normal((4, 3))
    seed = make_plain_seed(3)
    with pytest.raises(ValueError):
        ProblemSpec(A, np.zeros(3), np.eye(3), 1.0, seed, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        ProblemSpec(A, np.zeros(4), np.eye(3), 0.0, seed, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        ProblemSpec(A, np.zeros(4), np.eye(2, 3), 1.0, seed, np.zeros((2, 2)))
    with pytest.raises(ConvexityError):
        ProblemSpec(A, np.zeros(4), np.eye(3), 1.0, seed, 100 * np.eye(3))
    spec = ProblemSpec(A, np.zeros(4), np.eye(3), 1.0, seed, 100 * np.eye(3), check_convexity=False)
    assert spec.n == 3


def test_state_roundtrip(rng):
    spec = _lop_spec(rng, n=6, d=5)
    z = SolverState.random(spec, rng)
    v = z.to_vector()
    assert v.size == sum(SolverState.sizes_for(spec))
    np.testing.assert_array_equal(SolverState.from_vector(v, spec).to_vector(), v)
    with pytest.raises(ValueError):
        SolverState.from_vector(v[:-1], spec)


def test_constraints():
    box = Constraint.box(-1, 1)
    np.testing.assert_array_equal(box.project(np.array([2.0, -0.5])), [1.0, -0.5])
    assert box.contains(np.array([1.0, -1.0]), 0.0)
    assert not box.contains(np.array([1.1]), 1e-12)
    whole = Constraint.whole_space()
    assert whole.contains(np.array([1e9]), 0.0)
    ball = Constraint.custom(lambda x: x / max(1.0, np.linalg.norm(x)))
    assert ball.contains(np.array([0.6, 0.8]), 1e-12)
    assert not ball.contains(np.array([1.0, 1.0]), 1e-12)


# -- operator --------------------------------------------------------------------


def test_zero_is_fixed_point_without_data(rng):
    spec = _lop_spec(rng, n=8, d=6)
    spec = ProblemSpec(spec.A, np.zeros(6), spec.L, spec.lam, spec.seed, spec.BtB)
    z = SolverState.zeros(spec)
    out = apply_T(z, spec, spec.default_step_params())
    np.testing.assert_array_equal(out.to_vector(), 0.0)


def test_single_step_hand_trace():
    # plain l1 seed, A = L = I, BtB = 0, lam = 1, y = (2, 0.5)
    spec = ProblemSpec(np.eye(2), np.array([2.0, 0.5]), np.eye(2), 1.0, make_plain_seed(2), np.zeros((2, 2)))
    params = StepParams(kappa=2.0, gamma1=0.25, gamma2=0.5, gamma3=0.2, gamma4=1.0)
    z = SolverState(np.array([0.3, -0.2]), np.zeros(0), np.array([0.1, 0.4]), np.zeros(0),
                    np.array([0.5, -2.0]), np.zeros(0), np.zeros(0), np.zeros(0))
    out = apply_T(z, spec, params)
    # grad = x - y + r = (-1.2, -2.7); x+ = x - grad / 4
    np.testing.assert_allclose(out.x, [0.6, 0.475])
    # v+ = soft(v, 0.2)
    np.testing.assert_allclose(out.v, [0.0, 0.2])
    # r+ = clip(r + 2 x+ - x, -1, 1)
    np.testing.assert_allclose(out.r, [1.0, -0.85])


def test_operator_is_deterministic(rng):
    spec = _lop_spec(rng, n=8, d=6)
    p = spec.default_step_params()
    z = SolverState.random(spec, rng)
    a, b = GMEMIOperator(spec, p)(z).to_vector(), GMEMIOperator(spec, p)(z).to_vector()
    np.testing.assert_array_equal(a, b)


# -- solve -----------------------------------------------------------------------


def test_solve_l1_soft_threshold_closed_form():
    spec = ProblemSpec(np.eye(2), np.array([2.0, 0.5]), np.eye(2), 1.0, make_plain_seed(2), np.zeros((2, 2)))
    sol = solve(spec, threshold=1e-10, max_iters=100000)
    assert sol.converged and sol.final_residual < 1e-10
    np.testing.assert_allclose(sol.x_star, [1.0, 0.0], atol=1e-8)


def test_solve_gmc_matches_scalar_grid():
    theta, lam = 0.9, 1.0
    y = np.array([2.0, 0.5])
    spec = ProblemSpec(np.eye(2), y, np.eye(2), lam, make_plain_seed(2), theta * np.eye(2))
    sol = solve(spec, threshold=1e-10, max_iters=200000)

    def huber(t, c):
        # min_v |v| + c/2 (t - v)^2
        return t * t * c / 2 if abs(t) <= 1 / c else abs(t) - 1 / (2 * c)

    grid = np.linspace(-4, 4, 800001)
    for i in range(2):
        vals = [0.5 * (y[i] - t) ** 2 + lam * (abs(t) - huber(t, theta)) for t in grid[::100]]
        t0 = grid[::100][int(np.argmin(vals))]
        fine = grid[np.abs(grid - t0) <= 1e-3]
        vals = [0.5 * (y[i] - t) ** 2 + lam * (abs(t) - huber(t, theta)) for t in fine]
        assert sol.x_star[i] == pytest.approx(fine[int(np.argmin(vals))], abs=1e-5)


def test_solve_lop_local_optimality(rng):
    spec = _lop_spec(rng)
    sol = solve(spec, threshold=1e-8, max_iters=200000)
    assert sol.converged
    j0 = evaluate_objective(spec, sol.x_star, 1e-9)
    for _ in range(10):
        dlt = rng.standard_normal(20)
        dlt *= 1e-2 / np.linalg.norm(dlt)
        assert j0 <= evaluate_objective(spec, sol.x_star + dlt, 1e-7) + 1e-6


def test_solve_reports_nonconvergence_and_history(rng):
    spec = _lop_spec(rng, n=8, d=6)
    sol = solve(spec, threshold=1e-14, max_iters=25, record_history=True)
    assert not sol.converged
    assert sol.iterations == 25 and len(sol.history) == 25
    assert sol.final_residual == sol.history[-1]


def test_solve_converged_residual_below_threshold(rng):
    spec = _lop_spec(rng, n=10, d=8)
    sol = solve(spec, threshold=1e-5, max_iters=50000)
    assert sol.converged and sol.final_residual < 1e-5


def test_solve_options(rng):
    spec = _lop_spec(rng, n=8, d=6)
    with pytest.raises(ValueError):
        solve(spec, relaxation=1.5)
    with pytest.raises(ValueError):
        solve(spec, stop_blocks="v")
    a = solve(spec, threshold=1e-6, max_iters=50000, relaxation=0.8)
    b = solve(spec, threshold=1e-6, max_iters=50000, stop_blocks="x")
    np.testing.assert_allclose(a.x_star, b.x_star, atol=1e-3)


def test_solve_respects_box(rng):
    spec = _lop_spec(rng, n=10, d=8, constraint=Constraint.box(-0.2, 0.2))
    sol = solve(spec, threshold=1e-6, max_iters=50000)
    assert np.all(np.abs(sol.x_star) <= 0.2 + 1e-15)


def test_solve_deterministic(rng):
    spec = _lop_spec(rng, n=10, d=8)
    a = solve(spec, threshold=1e-6, max_iters=2000, record_history=True)
    b = solve(spec, threshold=1e-6, max_iters=2000, record_history=True)
    np.testing.assert_array_equal(a.x_star, b.x_star)
    assert a.history == b.history


def test_fixed_point_residual_monotone_in_p_norm(rng):
    spec = _lop_spec(rng, n=10, d=8)
    p = spec.default_step_params()
    metric = spec.p_metric(p)
    T = GMEMIOperator(spec, p)
    z = SolverState.zeros(spec)
    prev = np.inf
    for _ in range(300):
        tz = T(z)
        res = metric.p_norm(tz.to_vector() - z.to_vector())
        assert res <= prev * (1 + 1e-9) + 1e-13
        prev, z = res, tz


def test_scaling_consistency(rng):
    spec = _lop_spec(rng, n=10, d=8)
    c = 3.0
    scaled = ProblemSpec(c * spec.A, c * spec.y, spec.L, c * c * spec.lam, spec.seed, spec.BtB)
    for _ in range(3):
        x = rng.standard_normal(10)
        assert evaluate_objective(scaled, x, 1e-9) == pytest.approx(c * c * evaluate_objective(spec, x, 1e-9),
                                                                    rel=1e-6)
    a = solve(spec, threshold=1e-9, max_iters=300000).x_star
    b = solve(scaled, threshold=1e-9, max_iters=300000).x_star
    np.testing.assert_allclose(a, b, atol=1e-6)


# -- objective and certificates ----------------------------------------------------


def test_objective_basic_cases(rng):
    A = rng.standard_normal((5, 4))
    for seed in (make_lop_seed(4, 1.0), make_tgv_seed(3, 0.4), make_plain_seed(4)):
        L = np.eye(4) if seed.m == 4 else difference_matrix_1d(4)
        spec = ProblemSpec(A, np.zeros(5), L, 1.0, seed, np.zeros((seed.m, seed.m)))
        assert evaluate_objective(spec, np.zeros(4)) == pytest.approx(0.0, abs=1e-6)
    spec = _lop_spec(rng, n=6, d=5, theta=0.0)
    x = rng.standard_normal(6)
    r = spec.y - spec.A @ x
    from gmemi.seeds import eval_mi_penalty
    assert evaluate_objective(spec, x, 1e-9) == pytest.approx(
        0.5 * r @ r + spec.lam * eval_mi_penalty(spec.seed, x, 1e-9), abs=1e-7)
    box = _lop_spec(rng, n=6, d=5, constraint=Constraint.box(-1, 1))
    assert evaluate_objective(box, np.full(6, 1.5)) == np.inf
    with pytest.raises(ValueError):
        evaluate_objective(box, np.zeros(5))


def test_certificate(rng):
    spec = _lop_spec(rng)
    tol = 1e-6
    sol = solve(spec, threshold=tol, max_iters=200000)
    assert sol.converged
    gap = certify_inner_optimality(spec, sol, tol)
    assert gap <= 10 * tol
    st = sol.state
    _, sig = spec.seed.prox_f(st.r + spec.L @ st.x, st.eta + st.sigma, 1.0)
    noisy = np.abs(sig + 1e-2 * rng.standard_normal(sig.size))
    assert certify_inner_optimality(spec, sol, tol, sigma=noisy) > gap


def test_certificate_plain_seed_is_zero():
    spec = ProblemSpec(np.eye(2), np.array([2.0, 0.5]), np.eye(2), 1.0, make_plain_seed(2), np.zeros((2, 2)))
    assert certify_inner_optimality(spec, solve(spec)) == 0.0


# -- averagedness ----------------------------------------------------------------


def test_averagedness_holds(rng):
    spec = _lop_spec(rng, n=8, d=6)
    rep = averagedness_check(spec, spec.default_step_params(), trials=100, rng=rng)
    assert rep.passed, (rep.worst_margin, rep.worst_ratio)
    assert rep.alpha == pytest.approx(2 / 3)


def test_averagedness_negative_control(rng):
    spec = _lop_spec(rng, n=8, d=6)
    p = spec.default_step_params()
    bad = StepParams(p.kappa, 10 * p.gamma1, p.gamma2, p.gamma3, p.gamma4, p.delta)
    rep = averagedness_check(spec, bad, trials=50, rng=rng, metric=spec.p_metric(p))
    assert rep.failures > 0


def test_averagedness_equal_states_trivial(rng):
    spec = _lop_spec(rng, n=6, d=5)
    p = spec.default_step_params()
    metric = spec.p_metric(p)
    T = GMEMIOperator(spec, p)
    z = SolverState.random(spec, rng).to_vector()
    t = T(SolverState.from_vector(z, spec)).to_vector()
    assert metric.p_norm(t - t) == 0.0 and metric.p_norm(z - z) == 0.0
