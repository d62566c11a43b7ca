"""Acceptance criteria, one test each.  Tolerances are fixed by the build contract."""

import csv
import itertools
import math
import time

import numpy as np
from su11dpso import fock
from su11dpso.cli import main
from su11dpso.moments import moment_table, q_moment
from su11dpso.observables import SensitivityCurve, phase_sensitivity
from su11dpso.optimizer import optimize_dpso_t, optimize_phi
from su11dpso.params import InterferometerParams as P
from su11dpso.qfi import limits, qfi_ideal, qfi_lossy
from su11dpso.validate import MOMENT_INDICES, ValidationGrid

GRID = ValidationGrid(phi=1.0)


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_standard_optimum(record):
    t0 = time.perf_counter()
    r = optimize_phi(P(m=0, alpha=1.0, g=1.0, T=1.0))
    ok = abs(r.value - 0.25) <= 0.03 and abs(abs(r.argmin) - 0.7) <= 0.1
    record(1, ok, f"min dphi {r.value:.5f} at |phi*| {abs(r.argmin):.4f} (want 0.25+-0.03 at 0.7+-0.1)",
           time.perf_counter() - t0, 1)


def test_criterion_02_localized_optimum(record):
    t0 = time.perf_counter()
    base = P(m=1, alpha=1.0, g=1.0, T=1.0)
    best = {mode: optimize_phi(base.for_mode(mode)) for mode in ("mode_a", "mode_b")}
    mode = min(best, key=lambda k: best[k].value)
    value = best[mode].value
    ok = abs(value - 0.18) <= 0.03
    record(2, ok, f"best single-mode subtraction {mode}: min dphi {value:.5f} at phi* {best[mode].argmin:.4f} "
                  f"(want 0.18+-0.03)", time.perf_counter() - t0, 5)


def test_criterion_03_dpso_envelope(record):
    t0 = time.perf_counter()
    base = P(g=1.0, alpha=1.0, T=1.0, phi=1.0)
    standard = phase_sensitivity(base.replace(m=0))
    parts, ok = [], True
    for m in (1, 2, 3):
        p = base.replace(m=m)
        best = optimize_dpso_t(p).value
        ends = min(phase_sensitivity(p.for_mode("mode_a")), phase_sensitivity(p.for_mode("mode_b")))
        ok &= best <= ends + 1e-12 and best < standard
        parts.append(f"m={m} {best:.5f}<={ends:.5f}")
    record(3, ok, f"{', '.join(parts)}; standard {standard:.5f}", time.perf_counter() - t0, 30)


def test_criterion_04_q_moment_oracle(record):
    t0 = time.perf_counter()
    worst, where = 0.0, None
    for p in GRID.points():
        oracle = fock.oracle_q_moments(p, MOMENT_INDICES)
        for idx, o in zip(MOMENT_INDICES, oracle):
            d = abs(q_moment((p.m,) + idx, p) - o) / abs(o)
            if d > worst:
                worst, where = d, (p.m, p.t, p.g, p.alpha, p.T, idx)
    n = len(GRID.points()) * len(MOMENT_INDICES)
    record(4, worst <= 1e-8, f"{n} moments, worst relative error {worst:.2e} at (m,t,g,alpha,T,idx)={where}",
           time.perf_counter() - t0, 600)


def _subsample():
    points = GRID.points()
    pick = np.random.default_rng(20240601).choice(len(points), size=40, replace=False)
    return [points[i] for i in sorted(pick)]


def test_criterion_05_sensitivity_oracle(record):
    t0 = time.perf_counter()
    worst, where = 0.0, None
    phis = (0.5, 1.0)
    for p in _subsample():
        oracle = fock.oracle_sensitivity_curve(p, phis)
        curve = SensitivityCurve(p)
        for phi, o in zip(phis, oracle):
            d = _rel(curve.delta_phi(phi), o)
            if d > worst:
                worst, where = d, (p.m, p.t, p.g, p.alpha, p.T, phi)
    record(5, worst <= 1e-6, f"40 points x 2 phases, worst relative error {worst:.2e} at "
                             f"(m,t,g,alpha,T,phi)={where}", time.perf_counter() - t0, 600)


def test_criterion_06_qfi_consistency(record):
    t0 = time.perf_counter()
    worst_var = worst_overlap = 0.0
    points = [p for p in GRID.points() if p.T == 1.0]
    for p in points:
        var_route, overlap_route = fock.oracle_qfi_pure(p, delta=1e-3, both=True)
        f = qfi_ideal(p)
        worst_var = max(worst_var, _rel(f, var_route))
        worst_overlap = max(worst_overlap, _rel(f, overlap_route))
    ok = worst_var <= 1e-8 and worst_overlap <= 1e-3
    record(6, ok, f"{len(points)} points, variance route {worst_var:.2e}, overlap route {worst_overlap:.2e}",
           time.perf_counter() - t0, 300)


def test_criterion_07_lossy_limits(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    etas = np.linspace(0, 1, 50)
    ok, worst_top, drops = True, 0.0, 0
    for _ in range(10):
        t = rng.uniform(0, 1)
        p = P(m=int(rng.integers(0, 4)), s=1 - t, t=t, g=rng.uniform(0.2, 1.5), alpha=rng.uniform(0.2, 3))
        vals = [qfi_lossy(p, eta=e) for e in etas]
        worst_top = max(worst_top, _rel(vals[-1], qfi_ideal(p)))
        ok &= vals[0] == 0.0
        drops += sum(b < a for a, b in zip(vals, vals[1:]))
    ok &= worst_top <= 1e-12 and drops == 0
    record(7, ok, f"F_L(1) vs F rel {worst_top:.1e}, F_L(0)=0, {drops} decreases on 10x50 grid",
           time.perf_counter() - t0, 60)


def test_criterion_08_cramer_rao_ordering(record):
    t0 = time.perf_counter()
    bound_breaks, sql_misses, n = [], [], 0
    for a, m, T in itertools.product((0.5, 1.0, 2.0, 3.0), (1, 2, 3), (1.0, 0.7)):
        p = P(m=m, g=1.0, alpha=a, T=T, phi=1.0)
        best = optimize_dpso_t(p)
        dphi = best.value
        rep = limits(p.replace(s=1 - best.argmin, t=best.argmin))
        n += 1
        if not rep.qcrb <= dphi:
            bound_breaks.append((a, m, T))
        if not dphi < rep.sql:
            sql_misses.append((a, m, T, round(dphi, 4), round(rep.sql, 4)))
    ok = not bound_breaks and not sql_misses
    record(8, ok, f"{n} points: QCRB above D-PSO at {len(bound_breaks)}, D-PSO not below SQL at "
                  f"{len(sql_misses)} e.g. {sql_misses[:3]}", time.perf_counter() - t0, 120)


def test_criterion_09_structural_invariants(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    fails = []
    for _ in range(25):
        t = rng.uniform(0, 1)
        p = P(m=int(rng.integers(0, 4)), s=1 - t, t=t, g=rng.uniform(0.1, 1.5), alpha=rng.uniform(0.2, 3),
              T=rng.uniform(0.1, 1), phi=rng.uniform(0.05, 3))
        tab = moment_table(p, 2)
        for x1, y1, x2, y2 in itertools.product(range(3), repeat=4):
            a, b = tab.q(x1, y1, x2, y2), tab.q(y1, x1, y2, x2).conjugate()
            if abs(a - b) > 1e-12 * abs(a):
                fails.append("hermiticity")
        if _rel(q_moment((p.m,), p.replace(T=1.0)).real, q_moment((p.m,), p.replace(T=0.3)).real) > 1e-12:
            fails.append("norm vs T")
        c = SensitivityCurve(p, tab)
        for f in (c.mean_X, c.mean_X2):
            v = f(p.phi)
            if abs(v.imag) >= 1e-10 * max(1.0, abs(v)):
                fails.append("reality")
        if _rel(c.delta_phi(p.phi), c.delta_phi(-p.phi)) > 1e-9:
            fails.append("phi symmetry")
    for _ in range(10):
        amps = np.zeros((61, 61), dtype=complex)
        amps[:4, :4] = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        st = fock.TwoModeState(60, amps / np.linalg.norm(amps))
        g = rng.uniform(0, 0.6)
        back = fock.apply_two_mode_squeeze(fock.apply_two_mode_squeeze(st, g, 0.0), g, math.pi)
        if np.max(np.abs(back.amps - st.amps)) >= 1e-10:
            fails.append("balanced squeezers")
    record(9, not fails, f"25 closed-form points, 10 oracle states, failures: {sorted(set(fails)) or 'none'}",
           time.perf_counter() - t0, 120)


def test_criterion_10_printed_variance_flagged(record, tmp_path, capsys):
    t0 = time.perf_counter()
    out = tmp_path / "validate.csv"
    code = main(["validate", "--printed-variance", "--ms", "0,1,2", "--ts", "0.5", "--gs", "1", "--alphas", "1",
                 "--Ts", "1", "--out", str(out), "--quiet"])
    capsys.readouterr()
    devs = [float(r["d_F_L"]) for r in csv.DictReader(out.open())]
    ok = code == 3 and max(devs) > 1e-2
    record(10, ok, f"validate exit {code}, largest F_L deviation {max(devs):.3g}", time.perf_counter() - t0, 60)
