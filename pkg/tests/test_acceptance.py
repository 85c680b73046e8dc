"""Acceptance suite.  Each criterion prints PASS/FAIL lines while it runs and
the session ends with a per-criterion summary (see conftest.py)."""

import json
import time

import numpy as np
import pytest

from artifact import groups, mutation, path, qde
from artifact.cli import main as cli_main
from artifact.rings import (KClass, coh_from_poly, euler_pairing, integrate,
                            make_torus_params, unit_class)


from conftest import REF_THETA, REF_Z, random_torus

C1 = "C1 QDE solutions"
C2 = "C2 residue oracle"
C3 = "C3 asymptotic growth"
C4 = "C4 mutation sorting"
C5 = "C5 path diagnostics"
C6 = "C6 geometric start"
C7 = "C7 Euler/localization identities"
C8 = "C8 group induction"
C9 = "C9 determinism"


def _random_q(rng, qmax=10.0):
    return float(rng.uniform(0.1, qmax)) * np.exp(1j * float(rng.uniform(-np.pi, np.pi)))


def test_qde_solutions(acceptance):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for m in (2, 3):
        for _ in range(5):
            tp = random_torus(rng, m)
            q = _random_q(rng)
            L = complex(np.log(q))
            for J in range(1, m + 1):
                w = np.zeros(m, dtype=complex)
                w[J - 1] = 1.0

                def f(LL, w=w, tp=tp):
                    return qde.fundamental_apply(w, None, tp, logq=LL).values()

                worst = max(worst, qde.qde_residual(f, L, tp))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and dt <= 30
    acceptance(C1, "relative residual, m in {2,3}, 5 z each, |q| <= 10", ok,
               f"max {worst:.2e} (tol 1e-6)", dt)
    assert worst <= 1e-6
    assert dt <= 30


def test_residue_oracle(acceptance):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for m in (2, 3):
        for _ in range(5):
            tp = random_torus(rng, m)
            q = _random_q(rng)
            for J in range(1, m + 1):
                for rt in range(6):
                    a = qde.jackson_term(J, rt, q, tp).values
                    b = qde.residue_by_quadrature(J, rt, q, tp).values
                    worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt <= 10
    acceptance(C2, "closed form vs contour quadrature, J <= m, rterm <= 5", ok,
               f"max rel {worst:.2e} (tol 1e-8)", dt)
    assert worst <= 1e-8
    assert dt <= 10


def test_asymptotic_growth(acceptance):
    tp = make_torus_params(3, REF_Z)
    grid = np.linspace(20.0, 50.0, 64)
    t0 = time.perf_counter()
    ns = [0, 1, 2, 3]
    fits = qde.fit_solutions(tp, [KClass.line(-n) for n in ns], REF_THETA, grid)
    dt = time.perf_counter() - t0
    errs = [abs(f.c - qde.zeta(3, n % 3)) / abs(qde.zeta(3, n % 3)) for f, n in zip(fits, ns)]
    ok = max(errs) <= 0.01 and dt <= 60
    detail = ", ".join(f"n={n}: {e:.1e}" for n, e in zip(ns, errs))
    acceptance(C3, "growth coefficient vs root of unity, r in [20,50]", ok,
               f"{detail} (tol 1e-2)", dt)
    assert max(errs) <= 0.01
    assert dt <= 60


def _admissible_angles(count, m=3):
    out = []
    k = 0
    while len(out) < count:
        theta = (k + 0.5) / (2 * count)
        if mutation.is_admissible(theta, m)[0]:
            out.append(theta)
        k += 1
    return out


def test_mutation_sorting(acceptance):
    t0 = time.perf_counter()
    res = mutation.sort_collection(mutation.beilinson_collection(3, 0), REF_THETA)
    dt_single = time.perf_counter() - t0
    steps_ok = (len(res.steps) == 1 and res.steps[0].position == 0 and res.steps[0].side == "right")
    produced = res.collection[1].kclass.terms()
    class_ok = produced == {0: 1, 1: -3}
    v = mutation.rotated_roots(REF_THETA, 3)
    im = [v[s].imag for s in res.sigma]
    order_ok = all(a < b for a, b in zip(im, im[1:]))
    det = mutation.integer_det(res.collection.coefficient_matrix())
    dec_ok = all(b < a for a, b in zip(res.inversions, res.inversions[1:]))
    acceptance(C4, "theta=0.05 single right mutation at 0", steps_ok and class_ok,
               f"steps={[s.to_json() for s in res.steps]}, new class {res.collection[1].label}", dt_single)
    acceptance(C4, "Im-order strictly increasing, |det| = 1, inversions decreasing",
               order_ok and abs(det) == 1 and dec_ok,
               f"Im={np.round(im, 4).tolist()}, det={det}, inversions={list(res.inversions)}")

    t0 = time.perf_counter()
    worst_steps, failures = 0, []
    angles = _admissible_angles(100)
    for theta in angles:
        for offset in (0, mutation.sector_offset(theta, 3)):
            try:
                r = mutation.sort_collection(mutation.beilinson_collection(3, offset), theta)
            except Exception as exc:  # noqa: BLE001 - every failure is reported
                failures.append((theta, offset, repr(exc)))
                continue
            worst_steps = max(worst_steps, len(r.steps))
            if not mutation.verify_exceptional(r.collection).ok:
                failures.append((theta, offset, "not exceptional"))
    dt = time.perf_counter() - t0
    sweep_ok = not failures and worst_steps <= 3 and dt_single + dt <= 10
    acceptance(C4, "sweep over 100 admissible angles", sweep_ok,
               f"max steps {worst_steps} (limit 3), failures {len(failures)}", dt)
    assert steps_ok and class_ok and order_ok and abs(det) == 1 and dec_ok
    assert sweep_ok, failures[:5]


@pytest.fixture(scope="module")
def path_run():
    tp = make_torus_params(3, REF_Z)
    theta = REF_THETA
    t0 = time.perf_counter()
    res = mutation.sort_collection(
        mutation.beilinson_collection(3, mutation.sector_offset(theta, 3)), theta)
    traces = {}
    for n in (256, 512):
        pc = path.PathConfig(theta, 5.0, 50.0, tp, n)
        traces[n] = path.phase_trace(res.collection, pc)
    return res, traces, time.perf_counter() - t0


def test_path_gap_radius(acceptance, path_run):
    res, traces, dt = path_run
    r1, _ = path.gap_report(traces[256])
    r2, _ = path.gap_report(traces[512])
    g = traces[256].r
    if r1 is not None and r2 is not None:
        i = int(np.searchsorted(g, r1))
        spacing = g[min(i + 1, len(g) - 1)] - g[max(i - 1, 0)]
        stable = abs(r1 - r2) <= spacing
    else:
        stable = False
    ok = stable and dt <= 120
    acceptance(C5, "finite R* stable under 2x refinement", ok,
               f"R*={r1} (256 pts), {r2} (512 pts)", dt)
    assert r1 is not None and r2 is not None
    assert stable
    assert dt <= 120


@pytest.mark.xfail(strict=True, reason="estimator tails carry an O(1/r) offset that exceeds "
                   "1e-2 at r = 50; see the decisions ledger")
def test_path_estimator_tails(acceptance, path_run):
    res, traces, _ = path_run
    tr = traces[256]
    t0 = time.perf_counter()
    errs, scaled = [], []
    for i in range(3):
        for j in range(i + 1, 3):
            est = path.quasi_convergence_estimator(tr, i, j, REF_THETA, res.sigma, 3)
            errs.append(est.tail_error)
            # error times r at r = 25 and r = 50: roughly constant means O(1/r) decay
            k25 = tr.index_of(25.0)
            e25 = abs(est.values[k25] - est.predicted)
            scaled.append((round(float(e25 * tr.r[k25]), 2), round(float(est.tail_error * tr.r[-1]), 2)))
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-2
    acceptance(C5, "estimator tails at r=50 vs predicted unit directions", ok,
               f"errors {[f'{e:.3f}' for e in errs]} (tol 1e-2); error*r at r=25,50: {scaled}", dt)
    assert ok


def test_geometric_start(acceptance):
    theta = REF_THETA
    res = mutation.sort_collection(
        mutation.beilinson_collection(3, mutation.sector_offset(theta, 3)), theta)
    grid = np.geomspace(1.0, 50.0, 256)
    u = [float(mutation.rotated_roots(theta, 3)[s].imag) for s in res.sigma]
    t0 = time.perf_counter()
    syn = path.geometric_start_plan(path.linear_phase_trace(u, grid), res.sigma, theta)
    syn_ok = syn.ok and all(v == "PASS" for v in syn.checks.values())
    acceptance(C6, "synthetic linear-phase model: every inequality", syn_ok,
               f"{len(syn.checks)} checks, violations {list(syn.violations)}, delta={syn.delta:.4g}",
               time.perf_counter() - t0)

    t0 = time.perf_counter()
    tp = make_torus_params(3, REF_Z)
    trace = path.phase_trace(res.collection, path.PathConfig(theta, 1.0, 50.0, tp, 256))
    real = path.geometric_start_plan(trace, res.sigma, theta)
    failed = {k for k, v in real.checks.items() if v == "FAIL"}
    listed = {v.split(":")[0] for v in real.violations}
    real_ok = real.delta > 0 and failed == listed
    acceptance(C6, "real m=3 run: plan with delta > 0, violations enumerated", real_ok,
               f"delta={real.delta:.4g}, violations {list(real.violations)}",
               time.perf_counter() - t0)
    assert syn_ok
    assert real_ok


def test_euler_localization(acceptance):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = 0.0
    for m in (2, 3, 4):
        for _ in range(10):
            tp = random_torus(rng, m)
            worst = max(worst, abs(integrate(unit_class(tp))))
            top = coh_from_poly([0] * (m - 1) + [1], tp)
            worst = max(worst, abs(integrate(top) - (-1) ** (m - 1)))
    acceptance(C7, "integral of 1 and of x^(m-1), m in {2,3,4}", worst <= 1e-10,
               f"max deviation {worst:.1e} (tol 1e-10)", time.perf_counter() - t0)

    t0 = time.perf_counter()
    bad = []
    direction = np.array([0.31, -0.17 + 0.05j, 0.43, -0.29])
    for m in (2, 3, 4):
        for a in range(-2, 3):
            for b in range(a - 4, a + 5):
                # Richardson extrapolation of the t -> 0 limit (error is O(t))
                vals = [euler_pairing(KClass.line(a), KClass.line(b),
                                      make_torus_params(m, list(t * direction[:m])))
                        for t in (2e-3, 1e-3)]
                lim = 2 * vals[1] - vals[0]
                want = mutation.chi_lines(a, b, m)
                if abs(lim - want) > 1e-4 * max(1, abs(want)):
                    bad.append((m, a, b, lim, want))
    acceptance(C7, "Euler pairing z->0 limits equal binomials, |b-a| <= 4", not bad,
               f"{len(bad)} mismatches", time.perf_counter() - t0)
    assert worst <= 1e-10
    assert not bad, bad[:5]


def _monomial_hom(d, k):
    """Hom multiplicities for the regular representation of Z/k on P^{k-1}
    by counting degree-d monomials by weight."""
    from itertools import combinations_with_replacement
    counts = np.zeros(k, dtype=int)
    for mono in combinations_with_replacement(range(k), d):
        counts[(-sum(mono)) % k] += 1  # weights of V* are the negated weights of V
    return np.array([[counts[(p - q) % k] for q in range(k)] for p in range(k)])


def test_group_induction(acceptance):
    t0 = time.perf_counter()
    G = groups.load_group("cyclic_3")
    blocks = [groups.Block(1, "whole")] * 3
    coll = groups.induced_collection(G, blocks)
    rep = groups.verify_g_sod_projective(G, [3, 0, 0], 3, maxdeg=2)
    hom_ok = all(np.array_equal(rep.hom[d], _monomial_hom(d, 3)) for d in range(3))
    expected_ok = (np.array_equal(rep.hom[0], np.eye(3, dtype=int))
                   and np.array_equal(rep.hom[1], np.ones((3, 3), dtype=int))
                   and np.array_equal(rep.hom[2], 2 * np.ones((3, 3), dtype=int)))
    acceptance(C8, "Z/3 on P^2: 9 objects, Hom^0 identity/all-ones/all-twos matching monomials",
               len(coll) == 9 and hom_ok and expected_ok,
               f"{len(coll)} objects, deg1={rep.hom[1].tolist()}, deg2={rep.hom[2].tolist()}",
               time.perf_counter() - t0)

    t0 = time.perf_counter()
    worst, n = 0.0, 0
    for name in groups.bundled_groups():
        G = groups.load_group(name)
        for sub in sorted(G.subgroups):
            H, fusion = groups.subgroup(G, sub)
            worst = max(worst, groups.frobenius_discrepancy(G, H, fusion, trials=50, seed=11))
            n += 1
    acceptance(C8, "Frobenius reciprocity, 50 random pairs per bundled subgroup", worst <= 1e-9,
               f"{n} (group, subgroup) pairs, max discrepancy {worst:.1e} (tol 1e-9)",
               time.perf_counter() - t0)
    assert len(coll) == 9 and hom_ok and expected_ok
    assert worst <= 1e-9


COMMANDS = [
    ("qde-check", "qde_m3"),
    ("path-run", "path_m2"),
    ("geometric-start", "geometric_m3_synthetic"),
    ("induce", "induce_s3_p2"),
    ("mutate", "mutate_m3"),
]


def test_determinism(acceptance, tmp_path):
    t0 = time.perf_counter()
    diffs = []
    for cmd, cfg in COMMANDS:
        outs = []
        for k in range(2):
            d = tmp_path / f"{cmd}-{k}"
            code = cli_main([cmd, "--config", cfg, "--out", str(d), "--seed", "3"])
            assert code == 0, (cmd, code)
            outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
        if outs[0] != outs[1]:
            diffs.append(cmd)
        # every output file names the resolved configuration
        manifest = json.loads(outs[0]["manifest.json"])
        assert manifest["config_hash"]
    acceptance(C9, "byte-identical reruns of every command", not diffs,
               f"{len(COMMANDS)} commands, differing: {diffs}", time.perf_counter() - t0)
    assert not diffs
