import math

import numpy as np
import pytest

from pegbench.core import (CompositeProblem, Counters, MonotoneMap,
                           SolverConfig, SolverState, VIProblem)
from pegbench.prox import simplex_prox, product_prox, zero_prox
from pegbench.solvers import (GOLDEN, LinesearchError, alg1_linesearch,
                              alg1_solve, alg2_linesearch, alg2_solve,
                              alg3_linesearch, alg3_solve, fixed_step_solve,
                              max_feasible_lambda)
from pegbench.metrics import matrix_game_gap
from pegbench.problems import make_cons_min, make_geo_prog, make_lp_min, \
    make_matrix_game


def vec(*xs):
    return np.array(xs, dtype=float)


def identity_problem(dim=1):
    return VIProblem(MonotoneMap(lambda v: v), zero_prox(), dim)


def state_from(x, x_prev, y_prev, F, lam_prev=1.0, tau_prev=1.0):
    return SolverState(x_curr=vec(*x), x_prev=vec(*x_prev), y_prev=vec(*y_prev),
                       F_y_prev=F(vec(*y_prev)), lambda_prev=lam_prev,
                       tau_prev=tau_prev, ergodic_sum=np.zeros(len(x)))


def brute_force_max_lambda(u, c, r, bound, step=1e-4):
    grid = np.arange(step, bound + step / 2, step)
    feas = np.abs(grid * u - c) <= r
    return float(grid[feas][-1]) if feas.any() else None


class TestMaxFeasibleLambda:
    def test_centered_interval(self):
        assert max_feasible_lambda(vec(1.0), vec(0.0), 0.5, 10.0) == pytest.approx(0.5)

    def test_bound_clips(self):
        # feasible interval [0.25, 0.75] intersected with (0, 0.6]
        assert max_feasible_lambda(vec(2.0), vec(1.0), 0.5, 0.6) == pytest.approx(0.6)

    def test_zero_operator_infeasible(self):
        assert max_feasible_lambda(vec(0.0, 0.0), vec(3.0, 0.0), 1.0, 5.0) is None

    def test_zero_operator_feasible_returns_bound(self):
        assert max_feasible_lambda(vec(0.0, 0.0), vec(0.5, 0.0), 1.0, 5.0) == 5.0

    def test_shifted_interval(self):
        # |lam - 5| <= 1 -> [4, 6]
        assert max_feasible_lambda(vec(1.0), vec(5.0), 1.0, 10.0) == pytest.approx(6.0)

    def test_interval_above_bound_is_empty(self):
        assert max_feasible_lambda(vec(1.0), vec(5.0), 1.0, 3.0) is None

    def test_negative_discriminant(self):
        # || lam u - c || >= distance of c from span(u) = 1 > r
        assert max_feasible_lambda(vec(1.0, 0.0), vec(0.0, 1.0), 0.5, 10.0) is None

    def test_brute_force_agreement_scalar(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            u = float(rng.uniform(0.1, 2.0)) * float(rng.choice([-1.0, 1.0]))
            c = float(rng.uniform(-2.0, 2.0))
            r = float(rng.uniform(0.05, 1.0))
            bound = float(rng.uniform(0.5, 3.0))
            closed = max_feasible_lambda(vec(u), vec(c), r, bound)
            brute = brute_force_max_lambda(u, c, r, bound)
            if brute is None:
                # interval may be narrower than the grid; closed form may
                # still find it, but existence must agree when brute does
                continue
            assert closed is not None
            assert abs(closed - brute) <= 2e-4

    def test_validates_inputs(self):
        with pytest.raises(ValueError):
            max_feasible_lambda(vec(1.0), vec(0.0), -1.0, 1.0)
        with pytest.raises(ValueError):
            max_feasible_lambda(vec(1.0), vec(0.0), 1.0, 0.0)


class TestAlg1Linesearch:
    def test_scalar_identity_case(self):
        # x=1, x_prev=0, y_prev=0, lam_prev=1, tau_prev=1, F=id, alpha=0.41:
        # trial i=0 has tau=1, y=2, u=F(y)=2, c=1*1*F(0)=0, r=0.41*2=0.82,
        # bound=2; the largest lam with |2 lam| <= 0.82 is 0.41 (hand oracle)
        F = MonotoneMap(lambda v: v)
        cfg = SolverConfig(alpha=0.41, sigma=0.7)
        st = state_from([1.0], [0.0], [0.0], F)
        out = alg1_linesearch(st, F, cfg)
        assert out.inner_iters == 1
        assert out.tau == 1.0
        assert out.lam == pytest.approx(0.41)
        np.testing.assert_allclose(out.y, [2.0])

    def test_degenerate_trial_reuses_cached_value(self):
        # x_curr == x_prev makes y == y_prev: equality case, lam = lam_prev*tau
        F = MonotoneMap(lambda v: v + 1.0)
        counters = Counters()
        cfg = SolverConfig(alpha=0.41, sigma=0.7)
        st = state_from([2.0], [2.0], [2.0], F, lam_prev=0.8)
        out = alg1_linesearch(st, F, cfg, counters=counters)
        assert out.lam == pytest.approx(0.8)
        assert counters.n_F == 0  # no evaluation needed
        np.testing.assert_array_equal(out.F_y, st.F_y_prev)

    def test_zero_operator_degenerate_takes_bound(self):
        F = MonotoneMap(lambda v: np.zeros_like(v))
        cfg = SolverConfig(alpha=0.41, sigma=0.7, lambda_max=5.0)
        st = state_from([1.0], [1.0], [1.0], F, lam_prev=1.0, tau_prev=1.0)
        out = alg1_linesearch(st, F, cfg)
        assert out.lam == pytest.approx(2.0)  # min((1+1)/1 * 1, 5)

    def test_accepted_inequality_holds(self):
        rng = np.random.default_rng(11)
        A = rng.standard_normal((4, 4))
        A = A @ A.T + np.eye(4)  # monotone linear map
        F = MonotoneMap(lambda v: A @ v)
        cfg = SolverConfig(alpha=0.41, sigma=0.7)
        for _ in range(50):
            st = state_from(rng.standard_normal(4), rng.standard_normal(4),
                            rng.standard_normal(4), F,
                            lam_prev=float(rng.uniform(0.01, 2.0)))
            out = alg1_linesearch(st, F, cfg)
            lhs = np.linalg.norm(out.lam * out.F_y
                                 - st.lambda_prev * out.tau * st.F_y_prev)
            rhs = cfg.alpha * np.linalg.norm(out.y - st.y_prev)
            scale = out.lam * np.linalg.norm(out.F_y) + \
                st.lambda_prev * out.tau * np.linalg.norm(st.F_y_prev)
            assert lhs <= rhs + 1e-12 * max(1.0, lhs, rhs, scale)

    def test_one_eval_per_trial(self):
        calls = []
        F = MonotoneMap(lambda v: (calls.append(1), 100.0 * v)[1])
        cfg = SolverConfig(alpha=0.41, sigma=0.7)
        counters = Counters()
        st = state_from([1.0], [0.0], [0.5], F, lam_prev=1.0)
        calls.clear()  # state construction evaluated F(y_prev) once
        out = alg1_linesearch(st, F, cfg, counters=counters)
        assert counters.n_F == len(calls) == out.inner_iters

    def test_exhaustion_raises(self):
        F = MonotoneMap(lambda v: np.full_like(v, np.nan))
        cfg = SolverConfig(alpha=0.41, sigma=0.7, max_ls_iter=5)
        st = state_from([1.0], [0.0], [0.0], F)
        st.F_y_prev = vec(0.0)
        with pytest.raises(LinesearchError):
            alg1_linesearch(st, F, cfg)


class TestAlg2Linesearch:
    def test_immediate_accept_on_zero_displacement(self):
        F = MonotoneMap(lambda v: v * v)
        cfg = SolverConfig(alpha=0.41, sigma=0.7)
        st = state_from([1.0], [1.0], [1.0], F)
        out = alg2_linesearch(st, F, cfg)
        assert out.inner_iters == 1
        assert out.tau == pytest.approx(math.sqrt(2.0))
        assert out.lam == pytest.approx(math.sqrt(2.0))

    def test_lipschitz_bound_accepts_first_trial(self):
        # F = L x with tau * lam_prev * L <= alpha accepts at i = 0
        L = 2.0
        F = MonotoneMap(lambda v: L * v)
        cfg = SolverConfig(alpha=0.41, sigma=0.7)
        lam_prev = 0.41 / L / math.sqrt(2.0) * 0.99
        st = state_from([1.0], [0.0], [0.0], F, lam_prev=lam_prev)
        out = alg2_linesearch(st, F, cfg)
        assert out.inner_iters == 1

    def test_scalar_square_map_against_brute_force_oracle(self):
        # state: x=1, x_prev=0, y_prev=0, lam_prev=1, tau_prev=1, F(x)=x^2;
        # trial i accepts iff tau_i (1 + tau_i) <= alpha with
        # tau_i = sqrt(2) * sigma^i (oracle evaluated by brute force)
        alpha, sigma = 0.41, 0.7
        taus = [math.sqrt(2.0) * sigma ** i for i in range(60)]
        accept = [i for i, t in enumerate(taus) if t * (1.0 + t) <= alpha]
        i_star = accept[0]
        assert i_star == 5  # frozen from the oracle above

        F = MonotoneMap(lambda v: v * v)
        cfg = SolverConfig(alpha=alpha, sigma=sigma)
        st = state_from([1.0], [0.0], [0.0], F)
        out = alg2_linesearch(st, F, cfg)
        assert out.inner_iters == i_star + 1
        assert out.tau == pytest.approx(taus[i_star])
        assert out.lam == pytest.approx(taus[i_star])

    def test_tau_capped_by_golden_ratio(self):
        F = MonotoneMap(lambda v: np.zeros_like(v))
        cfg = SolverConfig(alpha=0.41, sigma=0.7)
        st = state_from([1.0], [0.0], [0.0], F, tau_prev=GOLDEN)
        out = alg2_linesearch(st, F, cfg)
        assert out.tau <= GOLDEN + 1e-12


class TestAlg3Linesearch:
    def test_theta_one_identical_to_alg2(self):
        rng = np.random.default_rng(23)
        A = rng.standard_normal((3, 3))
        spd = A @ A.T + np.eye(3)
        F = MonotoneMap(lambda v: spd @ v + np.sin(v))
        for trial in range(25):
            st1 = state_from(rng.standard_normal(3), rng.standard_normal(3),
                             rng.standard_normal(3), F,
                             lam_prev=float(rng.uniform(0.01, 1.0)),
                             tau_prev=float(rng.uniform(0.2, 1.5)))
            st2 = state_from(st1.x_curr, st1.x_prev, st1.y_prev, F,
                             lam_prev=st1.lambda_prev, tau_prev=st1.tau_prev)
            cfg2 = SolverConfig(alpha=0.41, sigma=0.7)
            cfg3 = SolverConfig(alpha=0.41, sigma=0.7, theta=1.0)
            a = alg2_linesearch(st1, F, cfg2)
            b = alg3_linesearch(st2, F, cfg3)
            assert a.tau == b.tau and a.lam == b.lam  # bitwise identical
            np.testing.assert_array_equal(a.y, b.y)
            assert a.inner_iters == b.inner_iters

    def test_theta_two_example(self):
        # tau cap sqrt((1+2)/3) = 1, lam = 1.5 * tau * lam_prev = 0.3;
        # identity gradient accepts since 0.3 <= 0.41 * 1.5 = 0.615
        F = MonotoneMap(lambda v: v)
        cfg = SolverConfig(alpha=0.41, sigma=0.7, theta=2.0)
        st = state_from([1.0], [0.0], [0.0], F, lam_prev=0.2)
        out = alg3_linesearch(st, F, cfg)
        assert out.inner_iters == 1
        assert out.tau == pytest.approx(1.0)
        assert out.lam == pytest.approx(0.3)

    def test_zero_displacement_accepts(self):
        F = MonotoneMap(lambda v: np.exp(v))
        cfg = SolverConfig(alpha=0.41, sigma=0.7, theta=2.0)
        st = state_from([1.0], [1.0], [1.0], F)
        assert alg3_linesearch(st, F, cfg).inner_iters == 1

    def test_tau_below_two(self):
        F = MonotoneMap(lambda v: np.zeros_like(v))
        cfg = SolverConfig(alpha=0.41, sigma=0.7, theta=1.0)
        st = state_from([1.0], [0.0], [0.0], F, tau_prev=1.99)
        assert alg3_linesearch(st, F, cfg).tau < 2.0


class TestAlg1Solve:
    def test_identity_unconstrained_converges_to_zero(self):
        # the unique solution of <x*, x - x*> >= 0 over the whole space is 0
        prob = identity_problem()
        cfg = SolverConfig(max_iter=200, tol=1e-6)
        rep = alg1_solve(prob, cfg, vec(10.0))
        assert rep.termination == "tol_reached"
        assert np.linalg.norm(rep.final_x) <= 1e-6

    def test_prox_count_equals_iterations(self):
        prob = identity_problem()
        cfg = SolverConfig(max_iter=37)
        rep = alg1_solve(prob, cfg, vec(10.0))
        assert rep.counters.n_prox == len(rep.trace) == 37

    def test_eval_accounting_matches_trials(self):
        inst = make_cons_min(d=6, seed=1)
        cfg = SolverConfig(max_iter=50)
        rep = alg1_solve(inst.vi, cfg, inst.x0)
        # probe costs 2; the first iteration's zero-displacement trial is
        # free; every other trial costs one evaluation
        trials = sum(t.ls_inner for t in rep.trace[1:])
        assert rep.counters.n_F == 2 + trials
        assert rep.shadow.n_F == len(rep.trace)  # residual diagnostics


class TestAlg2Solve:
    def test_two_by_two_game(self):
        A = np.array([[1.0, -1.0], [-1.0, 1.0]])
        g = product_prox([(simplex_prox(), slice(0, 2)),
                          (simplex_prox(), slice(2, 4))], 4)
        F = MonotoneMap(lambda z: np.concatenate([A.T @ z[2:], -(A @ z[:2])]),
                        is_affine=True, mult_per_eval=2)
        prob = VIProblem(F, g, 4)
        cfg = SolverConfig(max_iter=500)
        rep = alg2_solve(prob, cfg, vec(0.5, 0.5, 0.5, 0.5))
        gap = matrix_game_gap(A, rep.final_x[:2], rep.final_x[2:])
        assert gap.value <= 1e-6
        np.testing.assert_allclose(rep.final_x, [0.5, 0.5, 0.5, 0.5], atol=1e-4)

    def test_geo_objective_decreases_to_tolerance(self):
        inst = make_geo_prog(d=15, m=8, seed=2)
        comp = inst.composite
        cfg = SolverConfig(max_iter=3000, tol=1e-6)
        rep = alg2_solve(inst.vi, cfg, inst.x0)
        assert rep.termination == "tol_reached"
        assert comp.objective(rep.final_x) < comp.objective(inst.x0)

    def test_lambda_max_respected(self):
        inst = make_cons_min(d=6, seed=3)
        lams = []
        cfg = SolverConfig(max_iter=80, lambda_max=0.05)
        rep = alg2_solve(inst.vi, cfg, inst.x0,
                         iterate_hook=lambda s: lams.append(s.lam))
        assert max(lams) <= 0.05 * (1 + 1e-12)

    def test_ergodic_point_feasible_for_indicator(self):
        inst = make_matrix_game(k=6, l=9, seed=5)
        cfg = SolverConfig(max_iter=120)
        rep = alg2_solve(inst.vi, cfg, inst.x0)
        x, y = rep.ergodic_x[:9], rep.ergodic_x[9:]
        assert abs(x.sum() - 1.0) <= 1e-9 and abs(y.sum() - 1.0) <= 1e-9
        assert x.min() >= -1e-9 and y.min() >= -1e-9


class TestAlg3Solve:
    def test_single_anchor_lp_problem(self):
        inst = make_lp_min(d=4, m=1, seed=4)
        comp = inst.composite
        cfg = SolverConfig(max_iter=400, tol=1e-9, theta=2.0)
        rep = alg3_solve(comp, cfg, inst.x0)
        np.testing.assert_allclose(rep.final_x, inst.data["anchors"][0], atol=1e-5)

    def test_stepsize_formula_exact_for_theta_two(self):
        inst = make_cons_min(d=5, seed=6)
        snaps = []
        cfg = SolverConfig(max_iter=40, theta=2.0)
        alg3_solve(inst.composite, cfg, inst.x0, iterate_hook=snaps.append)
        for s in snaps:
            assert s.lam == 1.5 * s.tau * s.lam_prev  # exact formula

    def test_rejects_vi_problem(self):
        with pytest.raises(TypeError):
            alg3_solve(identity_problem(), SolverConfig(max_iter=5), vec(1.0))

    def test_theta_one_trajectory_equals_alg2(self):
        inst = make_cons_min(d=5, seed=7)
        cfg2 = SolverConfig(max_iter=60)
        cfg3 = SolverConfig(max_iter=60, theta=1.0)
        r2 = alg2_solve(inst.vi, cfg2, inst.x0)
        r3 = alg3_solve(inst.composite, cfg3, inst.x0)
        np.testing.assert_array_equal(r2.final_x, r3.final_x)
        assert [t.lam for t in r2.trace] == [t.lam for t in r3.trace]


class TestFixedStep:
    def test_identity_converges(self):
        prob = identity_problem()
        cfg = SolverConfig(max_iter=400, tol=1e-8)
        rep = fixed_step_solve(prob, cfg, vec(1.0), 0.4, "alg2")
        assert np.linalg.norm(rep.final_x) <= 1e-8

    def test_theta_one_equals_alg2_variant(self):
        inst = make_cons_min(d=5, seed=8)
        cfg = SolverConfig(max_iter=50, theta=1.0)
        a = fixed_step_solve(inst.vi, cfg, inst.x0, 1e-9, "alg2")
        b = fixed_step_solve(inst.composite, cfg, inst.x0, 1e-9, "alg3")
        np.testing.assert_array_equal(a.final_x, b.final_x)

    def test_theta_two_extrapolation_coefficient(self):
        # y_n = x_n + (2/3)(x_n - x_{n-1}) for theta = 2
        snaps = []
        cfg = SolverConfig(max_iter=10, theta=2.0)
        comp = CompositeProblem(lambda x: 0.5 * float(x @ x),
                                MonotoneMap(lambda v: v), zero_prox(), 1)
        fixed_step_solve(comp, cfg, vec(1.0), 0.3, "alg3",
                         iterate_hook=snaps.append)
        xs = [vec(1.0)] + [s.x_next for s in snaps]
        for i, s in enumerate(snaps):
            prev = xs[i - 1] if i > 0 else xs[0]
            np.testing.assert_allclose(s.y, xs[i] + (2.0 / 3.0) * (xs[i] - prev),
                                       rtol=1e-12)

    def test_one_eval_one_prox_per_iteration(self):
        prob = identity_problem()
        cfg = SolverConfig(max_iter=25)
        rep = fixed_step_solve(prob, cfg, vec(1.0), 0.4, "alg2")
        assert rep.counters.n_F == 25 and rep.counters.n_prox == 25

    def test_bad_variant(self):
        with pytest.raises(ValueError):
            fixed_step_solve(identity_problem(), SolverConfig(max_iter=5),
                             vec(1.0), 0.4, "nope")


class TestReportPlumbing:
    def test_determinism_bitwise(self):
        inst = make_cons_min(d=8, seed=9)
        cfg = SolverConfig(max_iter=60, seed=42)
        r1 = alg2_solve(inst.vi, cfg, inst.x0)
        r2 = alg2_solve(inst.vi, cfg, inst.x0)
        np.testing.assert_array_equal(r1.final_x, r2.final_x)
        assert [(t.residual, t.lam, t.tau) for t in r1.trace] == \
               [(t.residual, t.lam, t.tau) for t in r2.trace]

    def test_zero_iterations(self):
        prob = identity_problem()
        cfg = SolverConfig(max_iter=0)
        rep = alg2_solve(prob, cfg, vec(3.0))
        assert rep.trace == [] and rep.counters.n_F == 0
        np.testing.assert_array_equal(rep.final_x, vec(3.0))

    def test_counters_match_trace_tail(self):
        inst = make_cons_min(d=6, seed=10)
        cfg = SolverConfig(max_iter=30)
        rep = alg2_solve(inst.vi, cfg, inst.x0)
        last = rep.trace[-1]
        c = rep.counters
        assert (last.n_F, last.n_f, last.n_prox, last.n_mult) == \
               (c.n_F, c.n_f, c.n_prox, c.n_mult)

    def test_linesearch_failure_propagates(self):
        bad = VIProblem(MonotoneMap(lambda v: np.full_like(v, np.nan)),
                        zero_prox(), 1)
        cfg = SolverConfig(max_iter=10, lambda0=1.0)
        with pytest.raises(LinesearchError):
            alg2_solve(bad, cfg, vec(1.0))

    def test_run_init_recorded_at_second_iteration(self):
        inst = make_cons_min(d=4, seed=11)
        snaps = []
        cfg = SolverConfig(max_iter=5)
        rep = alg2_solve(inst.vi, cfg, inst.x0, iterate_hook=snaps.append)
        ri = rep.run_init
        np.testing.assert_array_equal(ri.x1, snaps[0].x_next)
        np.testing.assert_array_equal(ri.y0, snaps[0].y)
        assert ri.lam1 == snaps[1].lam and ri.tau1 == snaps[1].tau
        np.testing.assert_array_equal(ri.x0, inst.x0)
