"""End-to-end acceptance checks over the full shipped study.

Each test prints one "check N (name): PASS/FAIL - detail" line.  The
heavy simulations (n = 129 and n = 257 across the shipped spec lists)
run once into a module cache shared by all checks, so the whole module
takes minutes while any single re-run stays cheap.
"""

import time

import numpy as np
import pytest
from scipy.integrate import quad

from nflow.diagnostics import (
    conserved_integral,
    dissipation_rate,
    energy,
    ls_constant,
    lyapunov_value,
)
from nflow.errors import ExponentOutOfRange
from nflow.evolution import SolverConfig, rhs, simulate, step
from nflow.experiments import (
    convergence_specs,
    dichotomy_specs,
    reconstruct_curve,
    run_ls_suite,
)
from nflow.spectral import make_field, make_grid
from nflow.steady import Constant, compute_A0, cosine_family_integral, solve_BA

PI = np.pi

_CACHE: dict = {}


def _entry(spec, project_tag):
    key = (spec.name, spec.n, project_tag)
    if key not in _CACHE:
        _, u0 = spec.build()
        snaps = []
        t0 = time.perf_counter()
        out = simulate(u0, spec.config, on_record=lambda rec, f: snaps.append((rec, f)))
        wall = time.perf_counter() - t0
        _CACHE[key] = {
            "spec": spec,
            "u0": u0,
            "out": out,
            "snaps": snaps,
            "wall": wall,
        }
    return _CACHE[key]


def _conv(n, project=False):
    return [_entry(s, project) for s in convergence_specs(n=n, project=project)]


def _dich():
    return [_entry(s, False) for s in dichotomy_specs(n=129)]


def _fixed_traj(p):
    """200 accepted steps at fixed dt = 1e-5 on a smooth two-mode field."""
    key = ("traj", p)
    if key not in _CACHE:
        g = make_grid(PI, 65)
        f = make_field(g, 2.0 + 0.3 * np.cos(g.nodes) + 0.2 * np.cos(2.0 * g.nodes))
        cfg = SolverConfig(p=p)
        dt = 1e-5
        fields = [f]
        t = 0.0
        for _ in range(200):
            f, t, _, accepted = step(f, t, dt, cfg)
            assert accepted
            fields.append(f)
        _CACHE[key] = {"fields": fields, "dt": dt, "E": [energy(f) for f in fields]}
    return _CACHE[key]


def _report(capsys, num, name, ok, detail):
    with capsys.disabled():
        print(f"check {num:2d} ({name}): {'PASS' if ok else 'FAIL'} - {detail}")


def _oracle_family_integral(A, B, p, k=1):
    alpha = abs(A)

    def h(s):
        return 2.0 * (B - alpha + 2.0 * alpha * np.sin(s) ** 2) ** (1.0 - p)

    val, _ = quad(h, 0.0, PI / 2.0, points=[0.0], limit=400, epsabs=1e-13, epsrel=1e-13)
    return k * val


def test_01_conservation(capsys):
    worst_plain = worst_proj = 0.0
    slowest = 0.0
    ok = True
    notes = []
    for project in (False, True):
        for entry in _conv(129, project=project):
            out = entry["out"]
            recs = [rec for rec, _ in entry["snaps"]]
            I0 = recs[0].conserved
            drift = max(abs(r.conserved - I0) for r in recs) / abs(I0)
            slowest = max(slowest, entry["wall"])
            limit = 1e-14 if project else 1e-6
            good = out.tag == "converged" and drift <= limit and entry["wall"] <= 60.0
            if project:
                worst_proj = max(worst_proj, drift)
            else:
                worst_plain = max(worst_plain, drift)
            if not good:
                notes.append(
                    f"{entry['spec'].name} project={project}: tag={out.tag} "
                    f"drift={drift:.3g} wall={entry['wall']:.1f}s"
                )
            ok &= good
    detail = (
        f"drift plain <= {worst_plain:.2e}, projected <= {worst_proj:.2e}, "
        f"slowest run {slowest:.1f}s"
    )
    _report(capsys, 1, "conserved integral", ok, detail)
    assert ok, notes


def test_02_energy_dissipation(capsys):
    # every recorded trajectory is non-increasing in E up to 10*step_tol
    uptick = 0.0
    for entry in _conv(129) + _conv(129, project=True) + _dich():
        E = [rec.energy for rec, _ in entry["snaps"]]
        if len(E) > 1:
            uptick = max(uptick, max(eb - ea for ea, eb in zip(E, E[1:])))
    mono_ok = uptick <= 10.0 * 1e-8

    # central differences of E along fixed-dt trajectories match the
    # dissipation integral -2 * integral(u^-p u_t^2)
    worst = 0.0
    for p in (1.5, 2.0):
        traj = _fixed_traj(p)
        E, dt, fields = traj["E"], traj["dt"], traj["fields"]
        for k in range(1, len(fields) - 1):
            fd = (E[k + 1] - E[k - 1]) / (2.0 * dt)
            model = dissipation_rate(fields[k], rhs(fields[k], p), p)
            worst = max(worst, abs(fd - model) / abs(model))
    fd_ok = worst <= 1e-3

    ok = mono_ok and fd_ok
    _report(
        capsys, 2, "energy dissipation", ok,
        f"max uptick {uptick:.2e}, worst dE/dt relative error {worst:.2e}",
    )
    assert ok


def test_03_lyapunov_descent(capsys):
    worst = 0.0
    for p, slope in ((1.5, lambda E: -(2.0 - 1.5) * E), (2.0, lambda E: -E)):
        traj = _fixed_traj(p)
        E, dt, fields = traj["E"], traj["dt"], traj["fields"]
        L = [lyapunov_value(f, p) for f in fields]
        for k in range(1, len(fields) - 1):
            fd = (L[k + 1] - L[k - 1]) / (2.0 * dt)
            model = slope(E[k])
            worst = max(worst, abs(fd - model) / abs(model))
    ok = worst <= 1e-3
    _report(capsys, 3, "lyapunov descent", ok,
            f"worst dL/dt relative error {worst:.2e}")
    assert ok


def test_04_energy_sign_dichotomy(capsys):
    blow, bounded = _dich()

    E0_blow = energy(blow["u0"])
    out_blow = blow["out"]
    blow_ok = (
        E0_blow == pytest.approx(-0.1875 * PI, rel=1e-14)
        and out_blow.tag == "blowup"
        and float(out_blow.final_field.values.max()) > 1e8
        and out_blow.t_end <= blow["spec"].config.t_max
    )

    E0_bdd = energy(bounded["u0"])
    out_bdd = bounded["out"]
    peak = max(rec.max_u for rec, _ in bounded["snaps"])
    cap = 2.0 * float(bounded["u0"].values.max())
    bdd_ok = E0_bdd == 0.0 and out_bdd.tag == "converged" and peak <= cap

    ok = blow_ok and bdd_ok
    _report(
        capsys, 4, "energy-sign dichotomy", ok,
        f"E0<0 run: {out_blow.tag} at t={out_blow.t_end:.3f}; "
        f"E0=0 run: {out_bdd.tag}, peak/cap = {peak / cap:.3f}",
    )
    assert ok


def test_05_constant_limit(capsys):
    entry = next(
        e for e in _conv(129) if e["spec"].name == "conv-a1-p2"
    )
    out = entry["out"]
    target = np.sqrt(3.75)
    sup_err = float(np.abs(out.final_field.values - target).max())
    I0 = conserved_integral(entry["u0"], 2.0)
    oracle_ok = abs(I0 - 1.0 / target) <= 1e-12 / target
    ok = (
        out.tag == "converged"
        and isinstance(out.state, Constant)
        and sup_err <= 1e-5
        and oracle_ok
    )
    _report(capsys, 5, "constant limit", ok,
            f"sup error {sup_err:.2e} against sqrt(3.75)")
    assert ok


def test_06_family_root_solve(capsys):
    closed = abs(solve_BA(1.0, 2.0, PI, PI) - np.sqrt(2.0))
    rng = np.random.default_rng(101)
    worst = 0.0
    for i in range(100):
        A = rng.uniform(-2.0, 2.0)
        p = rng.uniform(1.05, 1.45) if i % 2 == 0 else rng.uniform(1.5, 3.0)
        B_true = abs(A) + rng.uniform(0.05, 3.0)
        k = 1 if i % 3 else 2
        I0 = _oracle_family_integral(A, B_true, p, k)
        B = solve_BA(A, p, k * PI, I0)
        back = _oracle_family_integral(A, B, p, k)
        worst = max(worst, abs(back - I0) / I0)
    ok = closed <= 1e-10 and worst <= 1e-10
    _report(capsys, 6, "family root solve", ok,
            f"closed-form error {closed:.2e}, worst round-trip {worst:.2e}")
    assert ok


def test_07_amplitude_cap(capsys):
    ratio_exact = True
    for p in (1.05, 1.25, 1.45):
        numerator = cosine_family_integral(1.0, 1.0, p, 1)
        ratio_exact &= compute_A0(p, PI, numerator) == 1.0

    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(50):
        p = rng.uniform(1.05, 1.45)
        I0 = rng.uniform(0.2, 5.0)
        s = rng.uniform(0.3, 4.0)
        base = compute_A0(p, PI, I0)
        scaled = compute_A0(p, PI, s ** (1.0 - p) * I0)
        worst = max(worst, abs(scaled - s * base) / (s * base))

    raised = 0
    for p in (1.5, 2.0):
        with pytest.raises(ExponentOutOfRange):
            compute_A0(p, PI, 1.0)
        raised += 1

    ok = ratio_exact and worst <= 1e-10 and raised == 2
    _report(capsys, 7, "amplitude cap", ok,
            f"ratio case exact: {ratio_exact}, scaling error {worst:.2e}")
    assert ok


def test_08_gap_inequality(capsys):
    a_list = [PI / 2.0, PI, 2.0 * PI, 1.0, 2.5]
    rep = run_ls_suite(a_list, trials=1000, seed=11, n=129)
    constants = {round(r["a"], 12): r["C_a"] for r in rep["results"]}
    const_ok = (
        constants[round(PI / 2.0, 12)] == 1.0 / 3.0
        and constants[round(PI, 12)] == 1.0 / 3.0
        and constants[round(2.0 * PI, 12)] == 0.8
    )
    ratio_dev = max(abs(r["extremal_ratio"] - 1.0) for r in rep["results"])
    ok = rep["violations_total"] == 0 and const_ok and ratio_dev <= 1e-12
    _report(
        capsys, 8, "gap inequality", ok,
        f"0 violations in {len(a_list) * 1000} fields, extremal ratio "
        f"deviation {ratio_dev:.2e}",
    )
    assert ok


def test_09_steady_preservation(capsys):
    g = make_grid(PI, 129)
    worst = 0.0
    for values in (np.full(g.n, 3.0), 0.5 * np.cos(g.nodes) + 2.0):
        f0 = make_field(g, values)
        cfg = SolverConfig(p=2.0)
        f, t, dt = f0, 0.0, 1e-5
        for _ in range(10_000):
            f, t, dt, accepted = step(f, t, dt, cfg)
            assert accepted
        worst = max(worst, float(np.abs(f.values - f0.values).max()))
    ok = worst <= 1e-8
    _report(capsys, 9, "steady preservation", ok,
            f"sup drift {worst:.2e} after 10^4 steps")
    assert ok


def test_10_curve_reconstruction(capsys):
    g = make_grid(PI, 129)
    circle = reconstruct_curve(make_field(g, np.ones(g.n)), 2.0)
    radial = float(np.abs(np.hypot(circle.points[:, 0], circle.points[:, 1] - 1.0) - 1.0).max())
    circle_ok = radial <= 1e-8 and circle.closure_gap <= 1e-10

    entry = next(e for e in _conv(129) if e["spec"].name == "conv-api-p1.25")
    lengths = []
    worst_2I = 0.0
    for _, f in entry["snaps"]:
        cur = reconstruct_curve(f, 1.25)
        lengths.append(cur.length)
        I = conserved_integral(f, 1.25)
        worst_2I = max(worst_2I, abs(cur.length - 2.0 * I) / (2.0 * I))
    drift = max(abs(L - lengths[0]) for L in lengths) / abs(lengths[0])

    ok = circle_ok and worst_2I <= 1e-10 and drift <= 1e-6
    _report(
        capsys, 10, "curve reconstruction", ok,
        f"radial dev {radial:.2e}, length vs 2I {worst_2I:.2e}, "
        f"L(t) drift {drift:.2e}",
    )
    assert ok


def test_11_resolution_doubling(capsys):
    worst = 0.0
    ok = True
    notes = []
    for e129, e257 in zip(_conv(129), _conv(257)):
        assert e129["spec"].name == e257["spec"].name
        v129 = e129["out"].final_field.values
        v257 = e257["out"].final_field.values
        diff = float(np.abs(v129 - v257[::2]).max())
        worst = max(worst, diff)
        good = (
            e129["out"].tag == "converged"
            and e257["out"].tag == "converged"
            and diff <= 1e-6
        )
        if not good:
            notes.append(
                f"{e129['spec'].name}: tags {e129['out'].tag}/{e257['out'].tag}, "
                f"sup diff {diff:.3g}"
            )
        ok &= good
    _report(capsys, 11, "resolution doubling", ok,
            f"worst sup change 129 -> 257: {worst:.2e}")
    assert ok, notes
