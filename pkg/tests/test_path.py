import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact import mutation, path
from artifact.errors import GapViolation, PlanInfeasible
from artifact.rings import KClass

from conftest import REF_THETA


@given(st.floats(-50, 50, allow_nan=False))
def test_gluing_shift_lands_in_unit_interval(phi):
    p = int(path.gluing_shift(phi))
    assert 0 < phi + p <= 1


def test_gap_condition():
    assert list(path.gap_holds(np.array([0.2, 1.5, 2.1]))) == [True, True]
    assert list(path.gap_holds(np.array([0.2, 0.9, 2.1]))) == [False, True]
    # integral phases: ceil(1.0) = 1 is not below 1.0
    assert list(path.gap_holds(np.array([1.0, 1.0]))) == [False]


def _separating_trace():
    r = np.linspace(1, 10, 91)
    phi = np.stack([-0.5 * np.ones_like(r), 0.05 * r + 0.5, 0.3 * r], axis=1)
    return path.PhaseTrace.from_phases(r, ("A", "B", "C"), phi)


def test_gap_report_and_gluing():
    tr = _separating_trace()
    r_star, table = path.gap_report(tr)
    # pair (B, C) needs 1 = ceil(0.05 r + 0.5) < 0.3 r, true from r = 3.4 on the grid
    assert r_star == pytest.approx(3.4)
    assert len(table) == len(tr.r)
    entries = path.gluing_data(tr, 10.0)
    assert [e.p for e in entries] == [1 - math.ceil(f) for f in tr.phi[-1]]
    assert path.sod_descriptor(entries) == "<A*Rep(T)[1], B*Rep(T)[0], C*Rep(T)[-2]>"
    with pytest.raises(GapViolation):
        path.gluing_data(tr, 1.0)


def test_gap_report_without_finite_radius():
    r = np.linspace(1, 2, 20)
    tr = path.PhaseTrace.from_phases(r, ("A", "B"), np.stack([r, r], axis=1))
    assert path.gap_report(tr)[0] is None


def test_trace_accessors_and_csv():
    tr = _separating_trace()
    assert np.allclose(tr.mass, 1.0)
    assert np.allclose(np.angle(tr.z[5]), np.angle(np.exp(1j * math.pi * tr.phi[5])))
    rows = tr.csv_rows()
    assert len(rows) == 3 * len(tr.r)
    assert rows[0][1] == "A" and rows[0][-1] == 1
    assert tr.index_of(4.06) == 31


def test_estimator_on_exact_asymptotics():
    m, theta, sigma = 3, REF_THETA, (2, 0, 1)
    v = mutation.rotated_roots(theta, m)
    r = np.geomspace(5, 50, 64)
    logz = np.stack([m * r * v[s] for s in sigma], axis=1)
    tr = path.PhaseTrace(r, ("a", "b", "c"), logz)
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            est = path.quasi_convergence_estimator(tr, i, j, theta, sigma, m)
            d = abs(v[sigma[i]] - v[sigma[j]])
            # l / (1 + |l|) misses the unit direction by 1 / (1 + |l|)
            assert est.tail_error == pytest.approx(1 / (1 + m * 50 * d), rel=1e-9)
            assert np.all(np.abs(est.values) < 1)
    plain = path.quasi_convergence_estimator(tr, 0, 1)
    assert plain.predicted is None and plain.tail_error is None


def test_path_config_validation_and_eval_tuple(tp3):
    with pytest.raises(ValueError):
        path.PathConfig(REF_THETA, 5.0, 1.0, tp3)
    with pytest.raises(ValueError):
        path.PathConfig(REF_THETA, 1.0, 5.0, tp3, samples=4)
    with pytest.raises(ValueError):
        path.PathConfig(REF_THETA, 1.0, 5.0, tp3, s_convention="other")
    half = path.PathConfig(REF_THETA, 1.0, 5.0, tp3).eval_tuple()
    direct = path.PathConfig(REF_THETA, 1.0, 5.0, tp3, s_convention="direct").eval_tuple()
    assert half.s == tuple(2 * z for z in tp3.z)
    assert direct.s == tp3.z
    assert half.torus("half") == tp3


@pytest.fixture(scope="module")
def short_run():
    from artifact.rings import make_torus_params
    tp = make_torus_params(3, (0.1, 0.37 + 0.2j, -0.45))
    res = mutation.sort_collection(mutation.beilinson_collection(3, -3), REF_THETA)
    pc = path.PathConfig(REF_THETA, 2.0, 12.0, tp, 32)
    return tp, res, pc, path.phase_trace(res.collection, pc)


def test_phase_trace_matches_pointwise_charges(short_run):
    tp, res, pc, tr = short_run
    assert tr.logz.shape[1] == 3
    assert tr.labels == tuple(o.label for o in res.collection.objects)
    k = tr.index_of(7.0)
    for b, obj in enumerate(res.collection.objects):
        cc = path.central_charge(obj.kclass, tr.r[k], REF_THETA, tp)
        assert abs(cc.value - tr.z[k, b]) <= 1e-9 * abs(cc.value)
    # phases never jump by half a unit between stored samples
    assert np.max(np.abs(np.diff(tr.phi, axis=0))) < 0.5


def test_support_ratio(short_run):
    tp, res, pc, tr = short_run
    assert len(path.twist_sample(3)) == 7
    c = path.support_ratio(res.collection, tr, pc.eval_tuple(), tp)
    assert c.shape == tr.r.shape
    assert np.all(np.isfinite(c)) and np.all(c > 0)
    only_zero = path.support_ratio(res.collection, tr, pc.eval_tuple(), tp, twists=[(0, 0, 0)])
    assert np.all(only_zero <= c)


def _synthetic_inputs():
    res = mutation.sort_collection(mutation.beilinson_collection(3, -3), REF_THETA)
    u = [float(mutation.rotated_roots(REF_THETA, 3)[s].imag) for s in res.sigma]
    grid = np.geomspace(1.0, 50.0, 256)
    return res.sigma, path.linear_phase_trace(u, grid)


def test_geometric_start_synthetic_model_passes():
    sigma, tr = _synthetic_inputs()
    plan = path.geometric_start_plan(tr, sigma, REF_THETA)
    assert plan.ok
    assert plan.delta > 0
    assert plan.epsilon == pytest.approx(math.pi / (16 * max(abs(x) for x in plan.u)))
    assert -0.5 < plan.mu < 0 < plan.mu_prime < 0.5
    assert set(plan.to_json()) >= {"checks", "violations", "delta", "beta"}


def test_geometric_start_literal_reading_lists_every_violation():
    sigma, tr = _synthetic_inputs()
    plan = path.geometric_start_plan(tr, sigma, REF_THETA, reading="literal")
    failed = sorted(k for k, v in plan.checks.items() if v == "FAIL")
    assert failed
    assert sorted(v.split(":")[0] for v in plan.violations) == failed
    with pytest.raises(PlanInfeasible):
        path.geometric_start_plan(tr, sigma, REF_THETA, reading="literal", strict=True)


def test_geometric_start_argument_checks():
    sigma, tr = _synthetic_inputs()
    with pytest.raises(ValueError):
        path.geometric_start_plan(tr, sigma, REF_THETA, reading="loose")
    with pytest.raises(ValueError):
        path.geometric_start_plan(tr, (0, 1), REF_THETA)
    with pytest.raises(ValueError):
        path.geometric_start_plan(tr, sigma, 0.0)


def test_central_charge_of_zero_class(tp3):
    cc = path.central_charge(KClass.from_terms({}), 3.0, REF_THETA, tp3)
    assert cc.value == 0


def test_estimator_on_a_linear_log_tends_to_its_direction():
    r = np.geomspace(1, 1e3, 200)
    logz = np.stack([r * (1 + 1j), np.zeros_like(r, dtype=complex)], axis=1)
    tr = path.PhaseTrace(r, ("a", "b"), logz)
    est = path.quasi_convergence_estimator(tr, 0, 1)
    assert abs(est.tail - (1 + 1j) / math.sqrt(2)) < 1e-3


def test_real_parameters_make_twists_irrelevant():
    from artifact.rings import make_torus_params
    tp = make_torus_params(3, (0.1, 0.3, -0.4))
    res = mutation.sort_collection(mutation.beilinson_collection(3, -3), REF_THETA)
    pc = path.PathConfig(REF_THETA, 2.0, 6.0, tp, 16)
    tr = path.phase_trace(res.collection, pc)
    every = path.support_ratio(res.collection, tr, pc.eval_tuple(), tp)
    only_zero = path.support_ratio(res.collection, tr, pc.eval_tuple(), tp, twists=[(0, 0, 0)])
    assert np.allclose(every, only_zero, rtol=1e-12)
