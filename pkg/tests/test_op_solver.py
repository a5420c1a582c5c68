import math

import numpy as np
import pytest

from octl import ControlSignal, ModelConfig, OpProblem, build_model, r_of, solve_op
from octl import verify_certificates
from octl.op_solver import OpSolution, cached_solve, pairing_gap, reaches
from oracles import r_closed, two_mode_oracle

# Accelerated projected-gradient optimum on the same instance, computed with a
# quadrature-built reach map (see oracles.two_mode_oracle, 20000 iterations).
TWO_MODE_R_K512 = 0.6565740059778252
TWO_MODE_R_K4 = 0.6595853033597979

Y0_2, ZD_2 = np.array([1.0, 0.0]), np.array([0.0, 0.3j])


@pytest.mark.parametrize("M", [0.0, 0.5, 1.0, 1.5])
def test_single_mode_closed_form(single, M):
    sol = solve_op(OpProblem(single, [1.0], [0.0], M))
    assert sol.converged
    # exact integrator: the only error is the piecewise-constant phase of the control
    assert sol.r_value == pytest.approx(r_closed(M), abs=1e-5)


def test_zero_bound_gives_free_distance(pair):
    sol = solve_op(OpProblem(pair, Y0_2, ZD_2, 0.0))
    assert sol.r_value == pytest.approx(np.linalg.norm(pair.free_propagate(Y0_2, 1) - ZD_2))
    assert not np.any(sol.control.values)


def test_reachable_target_gives_zero(single):
    assert r_of(single, [1.0], [0.0], 2.0, 0.0) <= 1e-5


def test_two_mode_matches_frozen_oracle():
    m = build_model(ModelConfig(num_modes=2, omega=((0.0, math.pi / 2),),
                                num_time_intervals=512))
    sol = solve_op(OpProblem(m, Y0_2, ZD_2, 0.8))
    assert sol.converged
    assert sol.r_value == pytest.approx(TWO_MODE_R_K512, abs=1e-4)


def test_coarse_two_mode_matches_live_oracle():
    m = build_model(ModelConfig(num_modes=2, omega=((0.0, math.pi / 2),),
                                num_time_intervals=4))
    sol = solve_op(OpProblem(m, Y0_2, ZD_2, 0.8))
    assert sol.r_value == pytest.approx(TWO_MODE_R_K4, abs=1e-9)
    assert sol.r_value == pytest.approx(two_mode_oracle(4, 2000), abs=1e-4)


def test_certificates_on_converged_solve(single, pair):
    sol = solve_op(OpProblem(single, [1.0], [0.0], 1.0))
    assert sol.bang_bang_deviation <= 1e-6
    problem = OpProblem(pair, Y0_2, ZD_2, 0.8, 0.2)
    sol = solve_op(problem)
    assert sol.fw_gap <= pair.config.fw_gap_tolerance
    dev, res = verify_certificates(sol, problem)
    assert dev <= 1e-4 * 0.8 and res <= 1e-8
    assert pairing_gap(problem, sol) == pytest.approx(sol.fw_gap, abs=1e-9)


def test_certificates_of_vertex_and_half_control(pair):
    problem = OpProblem(pair, Y0_2, ZD_2, 0.8)
    sol = solve_op(problem)
    # build the exact vertex for the final residual and certify it
    from octl.dynamics import interval_pairings
    g = interval_pairings(pair, -(sol.terminal - ZD_2), 0.0)
    vertex = ControlSignal(0.8 * g / np.linalg.norm(g, axis=1, keepdims=True), 0.0, pair.time_grid)
    fake = OpSolution(vertex, 0, 0, 0, 0, 0, True, sol.terminal)
    land_dev, land_res = verify_certificates(fake, problem)
    assert land_dev <= 1e-12
    half = OpSolution(ControlSignal(0.5 * vertex.values, 0.0, pair.time_grid), 0, 0, 0, 0, 0,
                      True, sol.terminal)
    assert verify_certificates(half, problem)[0] == pytest.approx(0.4, abs=1e-12)


def test_duality_lower_bound(pair, rng):
    problem = OpProblem(pair, Y0_2, ZD_2, 0.6, 0.1)
    sol = solve_op(problem)
    # no feasible control may beat the certified bound
    bound = 0.5 * sol.r_value ** 2 - sol.fw_gap
    from octl import terminal_state
    for _ in range(50):
        v = rng.standard_normal((pair.num_intervals, 2)) + 1j * rng.standard_normal(
            (pair.num_intervals, 2))
        v *= 0.6 / np.linalg.norm(v, axis=1, keepdims=True)
        y = terminal_state(pair, Y0_2, ControlSignal(v, 0.1, pair.time_grid))
        assert 0.5 * np.linalg.norm(y - ZD_2) ** 2 >= bound - 1e-12


def test_monotone_and_lipschitz_in_M(pair):
    Ms = np.linspace(0.0, 1.0, 6)
    rs = [r_of(pair, Y0_2, ZD_2, M, 0.3) for M in Ms]
    assert all(a > b for a, b in zip(rs, rs[1:]))
    assert all(abs(a - b) <= 0.7 * (Ms[1] - Ms[0]) + 2e-4 for a, b in zip(rs, rs[1:]))


def test_uniqueness_from_random_starts(pair, rng):
    problem = OpProblem(pair, Y0_2, ZD_2, 0.5, 0.2)
    base = solve_op(problem)
    for _ in range(3):
        start = rng.standard_normal((pair.num_intervals, 2)) + 0j
        other = solve_op(problem, start)
        d = np.linalg.norm(base.control.values - other.control.values, axis=1)[
            base.control.active].max()
        assert d <= 1e-4 * 0.5


def test_iteration_cap_flags_non_convergence():
    m = build_model(ModelConfig(num_modes=2, omega=((0.0, math.pi / 2),), max_fw_iterations=2))
    sol = solve_op(OpProblem(m, Y0_2, ZD_2, 0.8))
    assert not sol.converged and sol.iterations == 2


def test_argument_errors(pair):
    with pytest.raises(ValueError):
        OpProblem(pair, Y0_2, ZD_2, -1.0)
    with pytest.raises(ValueError):
        OpProblem(pair, Y0_2, ZD_2, 1.0, tau=1.0)
    with pytest.raises(ValueError):
        OpProblem(pair, [1.0], ZD_2, 1.0)


def test_reaches_agrees_with_r(pair):
    for M in (0.3, 0.9, 1.8):
        r = r_of(pair, Y0_2, ZD_2, M, 0.0)
        assert reaches(pair, Y0_2, ZD_2, M, 0.0, r + 1e-6)
        assert not reaches(pair, Y0_2, ZD_2, M, 0.0, r - 1e-3) or r < 1e-3


def test_cache_returns_same_solution(pair):
    a = cached_solve(pair, Y0_2, ZD_2, 0.7, 0.0)
    assert cached_solve(pair, Y0_2, ZD_2, 0.7, 0.0) is a
