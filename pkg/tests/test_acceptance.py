"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected and shown in the terminal summary under
"acceptance criteria" (visible with or without ``-s``).
"""
import math
from pathlib import Path
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, HALF
from octl import (ModelConfig, OpProblem, build_model, check_target_norm_time,
                  check_time_reversal, m_tau, r_of, solve_nocp, solve_np, solve_op, solve_tocp,
                  solve_tp)
from octl.cli import run
from octl.harness import CONTROL_FACTOR
from octl.op_solver import clear_cache
import oracles

SCENARIOS = Path(__file__).parent.parent / "demos" / "scenarios"

TWO_MODE = dict(omega=HALF, y0=np.array([1.0, 0.0]), z_d=np.array([0.0, 0.3j]))


def report(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def model(n, omega=HALF, **kw):
    return build_model(ModelConfig(num_modes=n, omega=omega, **kw))


def test_criterion_01_single_mode_closed_forms():
    clear_cache()
    start = time.perf_counter()
    m = model(1)
    one, zero = np.array([1.0]), np.array([0.0])
    errors = {}
    for M in (0.0, 0.5, 1.0, 1.5, 2.0, 3.0):
        errors[f"r({M},0)"] = abs(r_of(m, one, zero, M, 0.0) - oracles.r_closed(M))
    errors["M^0"] = abs(m_tau(m, one, zero, 0.0).value - oracles.m_tau_closed(0.0))
    errors["M(0,0.5)"] = abs(solve_np(m, one, zero, 0.0, 0.5).value - oracles.np_closed(0, 0.5))
    errors["tau(2,0.5)"] = abs(solve_tp(m, one, zero, 2.0, 0.5).value
                               - oracles.tp_closed(2.0, 0.5))
    for M in (0.5, 1.0, 2.0, 4.0):
        errors[f"T_{M}"] = abs(solve_tocp(m, one, M).value - oracles.t_min_closed(M))
    for T in (0.5, 1.0, 2.0, 4.0):
        errors[f"M_{T}"] = abs(solve_nocp(m, one, T).value - oracles.m_min_closed(T))
    elapsed = time.perf_counter() - start
    worst = max(errors, key=errors.get)
    ok = errors[worst] <= 1e-4 and elapsed < 10
    assert report(1, ok, f"max error {errors[worst]:.2e} at {worst} (tol 1e-4); "
                         f"{elapsed:.2f}s (limit 10s)"), errors


INSTANCES = {
    1: (HALF, [1], [0]),
    2: (HALF, [1, 0.5j], [0, 0.3j]),
    4: (((0.0, 1.0), (2.0, 2.8)), [1, 0.5, 0.25j, -0.2], [0.3 + 0.2j, -0.1j, 0, 0.1]),
}


def identity_residuals(m, y0, z_d, T=1.5, M=1.0, tau=0.2):
    r_T = np.linalg.norm(m.free_propagate(y0, m.horizon) - z_d)
    r = 0.5 * r_T
    res = {}
    M_T = solve_nocp(m, y0, T).value
    res["T=T_{M_T}"] = abs(solve_tocp(m, y0, M_T).value - T)
    T_M = solve_tocp(m, y0, M).value
    res["M=M_{T_M}"] = abs(solve_nocp(m, y0, T_M).value - M)
    M_np = solve_np(m, y0, z_d, tau, r).value
    res["r=r(M(tau,r),tau)"] = abs(r_of(m, y0, z_d, M_np, tau) - r)
    M_half = 0.5 * m_tau(m, y0, z_d, tau).value
    res["M=M(tau,r(M,tau))"] = abs(
        solve_np(m, y0, z_d, tau, r_of(m, y0, z_d, M_half, tau)).value - M_half)
    M_big = 1.5 * solve_np(m, y0, z_d, 0.0, r).value
    res["M=M(tau(M,r),r)"] = abs(
        solve_np(m, y0, z_d, solve_tp(m, y0, z_d, M_big, r).value, r).value - M_big)
    res["tau=tau(M(tau,r),r)"] = abs(solve_tp(m, y0, z_d, M_np, r).value - tau)
    return res


def test_criterion_02_inverse_identities():
    clear_cache()
    start = time.perf_counter()
    worst = (0.0, "")
    for n, (omega, y0, z_d) in INSTANCES.items():
        res = identity_residuals(model(n, omega, num_time_intervals=128),
                                 np.array(y0, complex), np.array(z_d, complex))
        for name, value in res.items():
            worst = max(worst, (value, f"N={n} {name}"))
    elapsed = time.perf_counter() - start
    ok = worst[0] <= 1e-3 and elapsed < 120
    assert report(2, ok, f"max residual {worst[0]:.2e} at {worst[1]} (tol 1e-3); "
                         f"{elapsed:.1f}s (limit 120s)")


EQUIVALENCE_INSTANCES = [
    ("half-domain", HALF, [1, 0], [0, 0.3j]),
    ("two-pieces", ((0.0, 1.0), (2.0, 2.8)), [1, 0.5j], [0.3 + 0.2j, -0.1j]),
    ("offset", ((0.5, 2.0),), [1, 0.5], [0.2, 0]),
]


def test_criterion_03_target_norm_time_equivalence():
    """Controls must agree within 10x the largest bang-bang deviation of the three solves.

    The reports' own control checks use 10x max(deviation, bisection
    resolution); both verdicts are printed.  The literal bound is not met:
    the induced parameters are bisection midpoints, so the three controls
    differ at the bracket width even when each is exactly bang-bang.
    """
    clear_cache()
    start = time.perf_counter()
    identity_failures, literal_failures, report_failures, rows = [], [], [], []
    tau = 0.2
    for name, omega, y0, z_d in EQUIVALENCE_INSTANCES:
        m = model(2, omega)
        y0, z_d = np.array(y0, complex), np.array(z_d, complex)
        r = 0.5 * np.linalg.norm(m.free_propagate(y0, 1.0) - z_d)
        cases = {
            "i": {"M": 0.5 * m_tau(m, y0, z_d, tau).value, "tau": tau},
            "ii": {"tau": tau, "r": r},
            "iii": {"M": 1.5 * solve_np(m, y0, z_d, 0.0, r).value, "r": r},
        }
        for case, params in cases.items():
            rep = check_target_norm_time(m, y0, z_d, case, params)
            bb = rep.parameters.get("max_bang_bang_deviation", math.nan)
            dist = max((d["distance"] for d in rep.control_distances), default=math.nan)
            literal = CONTROL_FACTOR * bb
            if not dist <= literal:
                literal_failures.append(f"{name}/{case}")
            if not rep.passed:
                report_failures.append(f"{name}/{case}")
            identity_failures += [f"{name}/{case}:{c['name']}" for c in rep.checks
                                  if not c["name"].startswith("control_agreement")
                                  and not c["pass"]]
            floor = rep.parameters.get("control_tolerance", math.nan)
            rows.append(f"{name}/{case}: distance {dist:.2e}, 10*bb {literal:.1e}, "
                        f"report tolerance {floor:.1e}")
    elapsed = time.perf_counter() - start
    for row in rows:
        print("   ", row)
    ok = not identity_failures and not literal_failures and elapsed < 300
    bad_cases = {f.rsplit(":", 1)[0] for f in identity_failures}
    assert report(3, ok, f"identities pass in {9 - len(bad_cases)}/9; "
                         f"distance <= 10*bang-bang deviation in {9 - len(literal_failures)}/9; "
                         f"with bisection-resolution floor {9 - len(report_failures)}/9; "
                         f"{elapsed:.1f}s (limit 300s)"), rows


def test_criterion_04_bang_bang_certificates():
    m = model(2)
    y0, z_d = TWO_MODE["y0"], TWO_MODE["z_d"]
    rng = np.random.default_rng(2024)
    worst_dev, worst_res = 0.0, 0.0
    for _ in range(10):
        tau = rng.uniform(0.0, 0.8)
        M = rng.uniform(0.0, 0.9) * m_tau(m, y0, z_d, tau).value
        sol = solve_op(OpProblem(m, y0, z_d, M, tau))
        assert sol.converged
        worst_dev = max(worst_dev, sol.bang_bang_deviation / M)
        worst_res = max(worst_res, sol.max_principle_residual)
    ok = worst_dev <= 1e-4 and worst_res <= 1e-8
    assert report(4, ok, f"max deviation/M {worst_dev:.1e} (tol 1e-4), "
                         f"max residual {worst_res:.1e} (tol 1e-8)")


def test_criterion_05_lipschitz():
    m = model(2)
    y0, z_d = TWO_MODE["y0"], TWO_MODE["z_d"]
    worst = -math.inf
    for tau in (0.0, 0.3, 0.6):
        Ms = np.linspace(0.0, 0.95 * m_tau(m, y0, z_d, tau).value, 6)
        rs = [r_of(m, y0, z_d, M, tau) for M in Ms]
        for i in range(6):
            for j in range(i + 1, 6):
                excess = abs(rs[i] - rs[j]) - (1.0 - tau) * abs(Ms[i] - Ms[j])
                worst = max(worst, excess)
    ok = worst <= 2e-4
    assert report(5, ok, f"max |dr| - (T-tau)|dM| = {worst:.2e} (slack 2e-4)")


def test_criterion_06_monotonicity():
    m = model(2)
    y0, z_d = TWO_MODE["y0"], TWO_MODE["z_d"]
    slack = 2e-4
    r_T = np.linalg.norm(m.free_propagate(y0, 1.0) - z_d)
    seqs = {
        "r(.,0.3) decreasing": (-1, [r_of(m, y0, z_d, M, 0.3)
                                     for M in np.linspace(0, 0.9 * m_tau(m, y0, z_d, 0.3).value,
                                                          5)]),
        "M(.,r) increasing": (1, [solve_np(m, y0, z_d, tau, 0.5 * r_T).value
                                  for tau in np.linspace(0, 0.8, 5)]),
        "M^tau increasing": (1, [m_tau(m, y0, z_d, tau).value for tau in np.linspace(0, 0.8, 5)]),
        "T_M decreasing": (-1, [solve_tocp(m, y0, M).value for M in (0.5, 1.0, 1.5, 2.0, 3.0)]),
    }
    bad = []
    for name, (sign, vals) in seqs.items():
        steps = sign * np.diff(vals)
        if not np.all(steps > -slack) or not np.all(steps > 0):
            bad.append(name)
    assert report(6, not bad, f"{4 - len(bad)}/4 maps strictly monotone on 5-point grids "
                              f"(slack 2e-4){'; failing: ' + ', '.join(bad) if bad else ''}")


def test_criterion_07_time_reversal():
    m = model(2)
    worst = 0.0
    for tau in (0.0, 0.25, 0.5):
        rep = check_time_reversal(m, TWO_MODE["y0"], TWO_MODE["z_d"], tau)
        assert rep.passed, rep.to_dict()
        worst = max(worst, rep.checks[0]["residual"])
    tol = 2 * m.config.bisection_tolerance
    assert report(7, worst <= tol, f"max |M^tau - reversed M_(T-tau)| = {worst:.2e} "
                                   f"(tol {tol:.0e})")


def test_criterion_08_oracle():
    m = model(2, num_time_intervals=4)
    sol = solve_op(OpProblem(m, TWO_MODE["y0"], TWO_MODE["z_d"], 0.8))
    budget = max(2000, 10 * sol.iterations)
    ref = oracles.two_mode_oracle(4, budget, M=0.8, cells=512)
    err = abs(sol.r_value - ref)
    assert report(8, err <= 1e-4, f"|r - oracle| = {err:.1e} (tol 1e-4); solver "
                                  f"{sol.iterations} iterations, oracle {budget}")


def test_criterion_09_grid_refinement():
    one, zero = np.array([1.0]), np.array([0.0])
    values = [r_of(model(1, num_time_intervals=K), one, zero, 1.0, 0.0)
              for K in (32, 64, 128, 256)]
    change = abs(values[-1] - values[-2])
    seq = ", ".join(f"{v:.9f}" for v in values)
    assert report(9, change <= 1e-6, f"r(1,0) at K=32..256: {seq}; last change "
                                     f"{change:.2e} (tol 1e-6)")


@pytest.mark.parametrize("scenario", ["two_mode_verify.yaml", "single_mode_verify.yaml"])
def test_criterion_10_determinism(tmp_path, scenario):
    blobs = []
    for name in ("first", "second"):
        clear_cache()
        assert run(SCENARIOS / scenario, out_dir=tmp_path / name) == 0
        blobs.append((tmp_path / name / "report.json").read_bytes())
    assert report(10, blobs[0] == blobs[1], f"{scenario}: two runs give byte-identical "
                                            f"reports ({len(blobs[0])} bytes)")
