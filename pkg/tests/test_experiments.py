"""Experiment drivers: dichotomy, convergence, sweep, gap suite, curves."""

import numpy as np
import pytest

from nflow.diagnostics import closure_integral, conserved_integral
from nflow.errors import ConfigError, DomainNotMultipleOfPi, NonPositiveField
from nflow.evolution import SolverConfig
from nflow.experiments import (
    ExperimentSpec,
    convergence_specs,
    dichotomy_specs,
    reconstruct_curve,
    run_convergence,
    run_dichotomy,
    run_ls_suite,
    run_sweep,
)
from nflow.spectral import from_coeffs, make_field, make_grid

PI = np.pi


def test_spec_build_validates_modes():
    base = dict(name="x", a=1.0, config=SolverConfig(p=2.0), u0_constant=2.0, n=17)
    with pytest.raises(ConfigError):
        ExperimentSpec(u0_modes=[(0, 0.5)], **base).build()
    with pytest.raises(ConfigError):
        ExperimentSpec(u0_modes=[(17, 0.5)], **base).build()


def test_spec_build_rejects_non_positive_u0():
    spec = ExperimentSpec(
        name="x", a=1.0, config=SolverConfig(p=2.0),
        u0_constant=1.0, u0_modes=[(1, 1.5)], n=17,
    )
    with pytest.raises(ConfigError, match="not positive at node"):
        spec.build()


def test_spec_build_synthesizes_modes():
    spec = ExperimentSpec(
        name="x", a=2.0, config=SolverConfig(p=2.0),
        u0_constant=2.0, u0_modes=[(1, 0.5), (3, -0.1)], n=33,
    )
    grid, u0 = spec.build()
    expected = (
        2.0
        + 0.5 * np.cos(PI * grid.nodes / 2.0)
        - 0.1 * np.cos(3.0 * PI * grid.nodes / 2.0)
    )
    assert np.abs(u0.values - expected).max() <= 1e-13


def test_dichotomy_negative_energy_blows_up():
    rep = run_dichotomy(dichotomy_specs(n=33)[0])
    assert rep["E0"] == pytest.approx(-0.1875 * PI, rel=1e-14)
    assert rep["outcome"] == "blowup"
    assert rep["trigger"] == "threshold"
    assert not rep["bounded_within_10x"]
    assert rep["passed"]
    assert rep["assertions"][0]["name"] == "negative energy blows up"
    assert rep["trace"] and all("max_u" in r for r in rep["trace"])


def test_dichotomy_zero_energy_stays_bounded():
    rep = run_dichotomy(dichotomy_specs(n=33)[1])
    assert rep["E0"] == 0.0
    assert rep["outcome"] == "converged"
    assert rep["bounded_within_10x"]
    assert rep["passed"]
    assert rep["assertions"][0]["name"] == "nonnegative energy stays bounded"


def test_dichotomy_off_resonance_converges():
    spec = ExperimentSpec(
        name="conv-a1", a=1.0, config=SolverConfig(p=1.5),
        u0_constant=1.0, u0_modes=[(1, 0.5)], n=33,
    )
    rep = run_dichotomy(spec)
    assert rep["E0"] > 0.0
    assert rep["outcome"] == "converged"
    assert rep["passed"]


def _spec_by_name(specs, name):
    return next(s for s in specs if s.name == name)


def test_convergence_constant_limit():
    spec = _spec_by_name(convergence_specs(n=33), "conv-a1-p2")
    rep = run_convergence(spec)
    assert rep["passed"], [c for c in rep["checks"] if not c["passed"]]
    assert rep["prediction_kind"] == "unique"
    assert rep["fitted"]["kind"] == "constant"
    assert abs(rep["fitted"]["c"] - np.sqrt(3.75)) <= 1e-6
    assert rep["conserved_drift_rel"] <= 1e-4
    assert len(rep["tail_sup_diffs"]) >= 2


def test_convergence_family_limit():
    spec = _spec_by_name(convergence_specs(n=33), "conv-api-p2")
    rep = run_convergence(spec)
    assert rep["passed"], [c for c in rep["checks"] if not c["passed"]]
    assert rep["prediction_kind"] == "family"
    assert rep["fitted"]["kind"] == "cosine"
    assert rep["A0"] is None  # no amplitude cap at p = 2
    assert rep["conserved_drift_rel"] <= 1e-4


def test_convergence_already_stationary_constant():
    spec = ExperimentSpec(
        name="const3", a=PI, config=SolverConfig(p=2.0), u0_constant=3.0, n=33,
    )
    rep = run_convergence(spec)
    assert rep["passed"], [c for c in rep["checks"] if not c["passed"]]
    assert rep["fitted"] == {"kind": "constant", "c": pytest.approx(3.0, abs=1e-12)}
    assert rep["t_end"] < 0.1


def test_shipped_spec_lists():
    convs = convergence_specs(n=17)
    assert len(convs) == 6
    assert len({s.name for s in convs}) == 6
    assert all(s.n == 17 for s in convs)
    assert {s.a for s in convs} == {1.0, PI}
    assert {s.config.p for s in convs} == {1.25, 1.5, 2.0}

    dich = dichotomy_specs(n=17)
    assert len(dich) == 2
    assert all(s.n == 17 for s in dich)


def test_sweep_grid_outcomes_and_determinism():
    p_grid = [1.5, 0.5]
    a_grid = [2.5, 2.0 * PI]
    amp_grid = [0.5]
    base = SolverConfig(p=2.0, blowup_threshold=1e5, record_every=500)
    sw = run_sweep(p_grid, a_grid, amp_grid, base, n=33)

    assert [(c["p"], c["a"], c["amp"]) for c in sw.cells] == [
        (p, a, amp) for p in p_grid for a in a_grid for amp in amp_grid
    ]
    for cell in sw.cells:
        if cell["p"] == 0.5:
            assert cell["outcome"] is None
            assert cell["error"].startswith("ConfigError")
        else:
            assert cell["error"] is None
            expected_E0 = 0.25 * (cell["a"] / 2.0) * ((PI / cell["a"]) ** 2 - 1.0)
            assert cell["E0"] == pytest.approx(expected_E0, rel=1e-12)

    by_a = {round(c["a"], 6): c for c in sw.cells if c["p"] == 1.5}
    assert by_a[2.5]["outcome"] == "converged"  # a < pi and p <= 2
    assert by_a[round(2.0 * PI, 6)]["outcome"] == "blowup"  # E0 < 0

    sw2 = run_sweep(p_grid, a_grid, amp_grid, base, n=33, workers=2)
    assert sw2.cells == sw.cells


def test_sweep_rejects_non_positive_amplitude():
    with pytest.raises(ConfigError):
        run_sweep([2.0], [1.0], [1.0], SolverConfig(p=2.0))


def test_ls_suite_no_violations_and_sharp_extremal():
    rep = run_ls_suite([PI, 2.5], trials=50, seed=1, n=65)
    assert rep["violations_total"] == 0
    modes = {}
    for row in rep["results"]:
        assert row["violations"] == 0
        assert row["max_excess"] <= 0.0
        assert abs(row["extremal_ratio"] - 1.0) <= 1e-12
        modes[round(row["a"], 6)] = row["extremal_mode"]
    assert modes == {round(PI, 6): 2, 2.5: 1}

    again = run_ls_suite([PI, 2.5], trials=50, seed=1, n=65)
    assert again == rep


def test_curve_unit_circle():
    g = make_grid(PI, 33)
    cur = reconstruct_curve(make_field(g, np.ones(g.n)), 2.0, samples=257)
    assert cur.closure_gap <= 1e-12
    assert cur.length == pytest.approx(2.0 * PI, rel=1e-14)
    radius = np.hypot(cur.points[:, 0], cur.points[:, 1] - 1.0)
    assert np.abs(radius - 1.0).max() <= 1e-12
    assert cur.points.shape == (258, 2)


def test_curve_gap_matches_closure_integral():
    g = make_grid(PI, 33)
    f = make_field(g, 2.0 + np.cos(g.nodes))
    cur = reconstruct_curve(f, 2.0)
    J = closure_integral(f, 2.0)
    assert abs(cur.closure_gap - 2.0 * abs(J)) <= 1e-12
    assert cur.closure_gap == pytest.approx(2.0 * PI * (2.0 / np.sqrt(3.0) - 1.0), rel=1e-10)


def test_curve_length_is_twice_conserved_integral():
    g = make_grid(PI, 33)
    rng = np.random.default_rng(5)
    for _ in range(10):
        c = np.zeros(g.n)
        c[0] = 2.0
        c[1:5] = 0.3 * rng.uniform(-1.0, 1.0, 4)
        f = from_coeffs(c, g)
        for p in (1.5, 2.0, 2.5):
            cur = reconstruct_curve(f, p, samples=1025)
            I = conserved_integral(f, p)
            assert abs(cur.length - 2.0 * I) <= 1e-10 * 2.0 * I


def test_curve_guards():
    g1 = make_grid(1.0, 33)
    with pytest.raises(DomainNotMultipleOfPi):
        reconstruct_curve(make_field(g1, np.ones(33)), 2.0)

    g = make_grid(PI, 33)
    dips = make_field(g, 0.5 + 0.6 * np.cos(2.0 * g.nodes))
    with pytest.raises(NonPositiveField):
        reconstruct_curve(dips, 2.0)

    with pytest.raises(ValueError):
        reconstruct_curve(make_field(g, np.ones(33)), 2.0, samples=32)


def test_curve_even_sample_count_is_bumped():
    g = make_grid(PI, 33)
    cur = reconstruct_curve(make_field(g, np.ones(g.n)), 2.0, samples=256)
    assert cur.points.shape == (258, 2)
