"""Acceptance gate: one test per shipped criterion, at stated tolerances.

Each test prints a single ``[criterion N] PASS/FAIL`` line with its
runtime (run pytest with ``-s`` to see the lines for passing tests too).

Known state: criterion 4 asserts an order slope >= 1.9 for the 3-stage
stepper in rescaled-difference (m3) mode. On state-free polynomial
models the rescaling biases the quadrature weights at second order, so
the measured slope sits near 1.0 and the sub-check fails; the other four
slope gates hold. See the README's verification notes.
"""
import math
import time
from fractions import Fraction

import numpy as np

from scire import (NoiseSchedule, Phi1Mode, ReferenceConfig, SolverConfig,
                   SyntheticEpsModel, SyntheticModel, TrajectorySpec,
                   agile_plan, build_trajectory, ddim_step, empirical_order,
                   phi, phi_fraction, reference_solve, relative_error,
                   sample)
from scire.cli import main as cli_main
from scire.models import eval_synthetic

LINEAR = NoiseSchedule.linear()        # beta0=0.1, beta1=20, T=1
COSINE = NoiseSchedule.cosine()        # s=0.008, T=0.9946


def finish(num: int, label: str, checks, budget_s: float, started: float):
    elapsed = time.perf_counter() - started
    failures = [msg for ok, msg in checks if not ok]
    time_ok = elapsed < budget_s
    status = "PASS" if not failures and time_ok else "FAIL"
    print(f"[criterion {num}] {status} {label} "
          f"({elapsed:.2f}s, budget {budget_s:g}s)")
    for msg in failures:
        print(f"    failed: {msg}")
    assert not failures, f"criterion {num}: {failures}"
    assert time_ok, f"criterion {num}: took {elapsed:.2f}s >= {budget_s}s"


def uniform_spec(n, t_start=1.0, t_end=1e-3):
    return TrajectorySpec(kind="uniform", n_steps=n, t_start=t_start,
                          t_end=t_end)


def test_criterion_1_schedule_closed_forms():
    started = time.perf_counter()
    checks = []
    for sched in (LINEAR, COSINE):
        grid = np.linspace(0.0, sched.t_max, 1000)
        vp = max(abs(sched.alpha(t) ** 2 + sched.sigma(t) ** 2 - 1.0)
                 for t in grid)
        checks.append((vp < 1e-12, f"{sched.kind}: VP identity off by {vp}"))
        dense = np.linspace(1e-4, sched.t_max, 1000)
        nsrs = [sched.nsr(t) for t in dense]
        mono = all(b > a for a, b in zip(nsrs, nsrs[1:]))
        checks.append((mono, f"{sched.kind}: NSR not strictly increasing"))
        worst_t = max(abs(sched.rnsr(tau) - t)
                      for t, tau in zip(dense, nsrs))
        checks.append((worst_t < 1e-9,
                       f"{sched.kind}: rNSR round trip {worst_t} >= 1e-9"))
        worst_tau = max(abs(sched.nsr(sched.rnsr(tau)) - tau) / max(tau, 1.0)
                        for tau in nsrs)
        checks.append((worst_tau < 1e-9,
                       f"{sched.kind}: NSR round trip {worst_tau} >= 1e-9"))
    finish(1, "schedule closed forms", checks, 1.0, started)


def test_criterion_2_ddim_identity():
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        t_from = rng.uniform(0.05, 1.0)
        t_to = rng.uniform(1e-3, 0.95 * t_from)
        x = rng.normal(size=3)
        eps = rng.normal(size=3)
        model = SyntheticEpsModel(SyntheticModel.constant(eps), LINEAR)
        stepped = ddim_step(x, t_from, t_to, model, LINEAR)
        a_from, a_to = LINEAR.alpha(t_from), LINEAR.alpha(t_to)
        classic = (a_to * (x - LINEAR.sigma(t_from) * eps) / a_from
                   + LINEAR.sigma(t_to) * eps)
        worst = max(worst, relative_error(stepped, classic))
    checks = [(worst <= 1e-12, f"identity violated: {worst} > 1e-12")]
    finish(2, "ddim algebraic identity", checks, 1.0, started)


def _exact_constant(c, x0, t0, t1):
    gap = LINEAR.nsr(t1) - LINEAR.nsr(t0)
    return LINEAR.alpha(t1) * (x0 / LINEAR.alpha(t0) + c * gap)


def _exact_poly_gain(coeffs, t0, t1):
    anti = lambda u: sum(c * u ** (j + 1) / (j + 1)
                         for j, c in enumerate(coeffs))
    return anti(LINEAR.nsr(t1)) - anti(LINEAR.nsr(t0))


def test_criterion_3_exactness_suite():
    started = time.perf_counter()
    checks = []
    c = np.array([0.4, -0.9])
    x0 = np.array([1.0, 2.0])
    exact = _exact_constant(c, x0, 1.0, 1e-3)
    for n in (2, 5, 10, 50):
        for method in ("ddim", "scire2", "scire3", "agile"):
            if method == "agile" and n < 3:
                continue  # agile needs a budget of at least 3 evaluations
            model = SyntheticEpsModel(SyntheticModel.constant(c), LINEAR)
            cfg = SolverConfig(method=method, trajectory=uniform_spec(n),
                               nfe_budget=n if method == "agile" else 0)
            res = sample(cfg, model, LINEAR, x0)
            err = relative_error(res.x_final, exact)
            checks.append((err < 1e-10,
                           f"constant {method} N={n}: err {err}"))

    lin_coeffs = [0.3, 2.0]
    quad_coeffs = [0.3, 2.0, 1.7]
    for n in (2, 5, 10, 50):
        for method, coeffs in (("scire2", lin_coeffs),
                               ("scire3", quad_coeffs)):
            model = SyntheticEpsModel(
                SyntheticModel.tau_poly(coeffs, dim=2), LINEAR)
            cfg = SolverConfig(method=method, trajectory=uniform_spec(n),
                               phi1=Phi1Mode.fde())
            res = sample(cfg, model, LINEAR, x0)
            gain = _exact_poly_gain(coeffs, 1.0, 1e-3)
            exact_poly = LINEAR.alpha(1e-3) * (x0 / LINEAR.alpha(1.0) + gain)
            err = relative_error(res.x_final, exact_poly)
            checks.append((err < 1e-10,
                           f"fde {method} deg={len(coeffs) - 1} N={n}: "
                           f"err {err}"))
    finish(3, "exactness suite", checks, 5.0, started)


def test_criterion_4_order_suite():
    started = time.perf_counter()
    synth = SyntheticModel.tau_poly([1.0, 1.0, 1.0, 1.0], dim=2)
    x0 = np.ones(2)
    ref = reference_solve(synth, LINEAR, x0, 1.0, 1e-3, ReferenceConfig())
    ns = [8, 16, 32, 64, 128]

    cases = [
        ("ddim", Phi1Mode.finite(3), 0.8),
        ("scire2", Phi1Mode.fde(), 1.8),
        ("scire3", Phi1Mode.fde(), 2.6),
        ("scire2", Phi1Mode.finite(3), 0.9),
        ("scire3", Phi1Mode.finite(3), 1.9),
    ]
    checks = []
    for method, mode, bound in cases:
        errs = []
        for n in ns:
            model = SyntheticEpsModel(synth, LINEAR)
            cfg = SolverConfig(method=method, trajectory=uniform_spec(n),
                               phi1=mode)
            res = sample(cfg, model, LINEAR, x0)
            errs.append(relative_error(res.x_final, ref))
        slope = empirical_order(ns, errs)
        label = f"{method}({mode.kind}{mode.m if mode.kind == 'finite' else ''})"
        print(f"    order {label}: slope {slope:.3f} (bound {bound})")
        checks.append((slope >= bound,
                       f"{label} slope {slope:.3f} < {bound}"))
    finish(4, "convergence order suite", checks, 30.0, started)


def test_criterion_5_nfe_accounting():
    started = time.perf_counter()
    synth = SyntheticModel.tau_poly([1.0, 0.5], dim=1)
    x0 = np.ones(1)
    checks = []
    bad = []
    for n in range(6, 101):
        plan = agile_plan(n)
        if plan.total_nfe != n:
            bad.append(f"plan({n}).total_nfe={plan.total_nfe}")
        model = SyntheticEpsModel(synth, LINEAR)
        res = sample(SolverConfig(method="agile", trajectory=uniform_spec(1),
                                  nfe_budget=n), model, LINEAR, x0)
        if res.nfe != n or model.eval_count != n:
            bad.append(f"agile N={n}: nfe={res.nfe} evals={model.eval_count}")
        for method, per_step in (("scire2", 2), ("scire3", 3)):
            model = SyntheticEpsModel(synth, LINEAR)
            res = sample(SolverConfig(method=method,
                                      trajectory=uniform_spec(n)),
                         model, LINEAR, x0)
            if res.nfe != per_step * n or model.eval_count != per_step * n:
                bad.append(f"{method} N={n}: nfe={res.nfe} "
                           f"evals={model.eval_count}")
    checks.append((not bad, "; ".join(bad[:5])))
    finish(5, "evaluation accounting N in [6,100]", checks, 10.0, started)


def test_criterion_6_trajectory_transform_uniformity():
    started = time.perf_counter()
    checks = []
    for k in (2.0, 3.1, 7.0):
        for n in (10, 100):
            spec = TrajectorySpec(kind="nsr", n_steps=n, t_start=1.0,
                                  t_end=1e-3, k_param=k)
            traj = build_trajectory(LINEAR, spec)
            trans = -np.log(traj.nsr_values + k * LINEAR.nsr(1e-3))
            gaps = np.diff(trans)
            dev = float(np.max(np.abs(gaps - gaps[0])))
            checks.append((dev < 1e-9, f"nsr k={k} N={n}: spacing dev {dev}"))
    for n in (10, 100):
        spec = TrajectorySpec(kind="lognsr", n_steps=n, t_start=1.0,
                              t_end=1e-3)
        traj = build_trajectory(LINEAR, spec)
        gaps = np.diff(np.log(traj.nsr_values))
        dev = float(np.max(np.abs(gaps - gaps[0])))
        checks.append((dev < 1e-9, f"lognsr N={n}: spacing dev {dev}"))
    finish(6, "transform uniformity", checks, 1.0, started)


def test_criterion_7_phi_coefficients():
    started = time.perf_counter()
    checks = [
        (phi_fraction(1, 3) == Fraction(2, 3), "phi1(3) != 2/3"),
        (phi_fraction(2, 3) == Fraction(1, 3), "phi2(3) != 1/3"),
        (phi_fraction(3, 3) == Fraction(1, 6), "phi3(3) != 1/6"),
        (phi(1, Phi1Mode.finite(3)) == 2.0 / 3.0, "float phi1(3) != 2/3"),
        (abs(phi(1, Phi1Mode.limit()) - (math.e - 1.0) / math.e) <= 1e-12,
         "phi1 limit != (e-1)/e"),
    ]
    finish(7, "phi coefficient table", checks, 1.0, started)


def test_criterion_8_compare_csv(tmp_path):
    started = time.perf_counter()
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["compare", "--methods", "scire2,scire3", "--ns", "8,16,32",
            "--seed", "11"]
    rc1 = cli_main(argv + ["--out", str(out1)])
    rc2 = cli_main(argv + ["--out", str(out2)])
    lines = out1.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    combos = {(r[0], r[1], r[2]) for r in rows}
    checks = [
        (rc1 == 0 and rc2 == 0, f"exit codes {rc1}, {rc2}"),
        (header == ["mode", "method", "N", "error"], f"header {header}"),
        (len(rows) == 2 * 2 * 3, f"row count {len(rows)} != 12"),
        (combos == {(m, meth, str(n)) for m in ("rde", "fde")
                    for meth in ("scire2", "scire3") for n in (8, 16, 32)},
         "missing mode/method/N combinations"),
        (out1.read_bytes() == out2.read_bytes(), "reruns differ byte-wise"),
    ]
    finish(8, "rde-vs-fde comparison csv", checks, 10.0, started)


def test_criterion_cross_check_eval_synthetic():
    # shared plumbing the criteria rely on: synthetic eval is deterministic
    out1 = eval_synthetic(SyntheticModel.tau_poly([1.0, 1.0], dim=2), LINEAR,
                          np.zeros(2), 0.5)
    out2 = eval_synthetic(SyntheticModel.tau_poly([1.0, 1.0], dim=2), LINEAR,
                          np.zeros(2), 0.5)
    np.testing.assert_array_equal(out1, out2)
