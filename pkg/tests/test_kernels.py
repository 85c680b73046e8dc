import os
import subprocess
import sys

import mpmath
import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import _kernels
from artifact.qde import relation_coefficients
from artifact.rings import make_torus_params

BACKENDS = [pytest.param(_kernels.python_backend, id="python")]
if _kernels.compiled_backend is not None:
    BACKENDS.append(pytest.param(_kernels.compiled_backend, id="compiled"))


def test_compiled_backend_is_selected_when_built():
    if _kernels.compiled_backend is None:
        pytest.skip("extension not built")
    assert _kernels.BACKEND == "cython"
    assert _kernels.cgamma is _kernels.compiled_backend.cgamma


def test_environment_forces_fallback():
    code = "from artifact import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, ARTIFACT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=300, deadline=None)
@given(st.floats(-14.4, 14.4), st.floats(-20, 20))
def test_cgamma_accuracy_on_strip(backend, x, y):
    z = complex(x, y)
    if abs(z - round(x)) < 1e-3 and round(x) <= 0:
        return  # next to a pole
    with mpmath.workprec(120):
        want = complex(mpmath.gamma(mpmath.mpc(z)))
    assert abs(backend.cgamma(z) - want) <= 1e-13 * abs(want)


@pytest.mark.parametrize("backend", BACKENDS)
def test_cgamma_matches_scipy(backend):
    rng = np.random.default_rng(3)
    zs = rng.uniform(-10, 10, 200) + 1j * rng.uniform(-10, 10, 200)
    got = np.array([backend.cgamma(z) for z in zs])
    want = scipy.special.gamma(zs)
    assert np.max(np.abs(got - want) / np.abs(want)) < 1e-13


def test_cgamma_recurrence_across_the_stirling_radius():
    # Gamma(z + 1) = z Gamma(z) with z and z + 1 on opposite sides of |z| = 8
    for z in [7.5 + 0.3j, 2.0 + 7.9j, 7.3 - 2.5j]:
        assert abs(_kernels.cgamma(z + 1) - z * _kernels.cgamma(z)) <= 1e-13 * abs(_kernels.cgamma(z + 1))


@pytest.mark.parametrize("backend", BACKENDS)
def test_cgamma_against_mpmath_reflection_region(backend):
    for z in [-3.7 + 0.2j, -0.5 + 0j, -7.25 - 1.5j, 0.01 + 0.01j, 5.5 - 9j]:
        want = complex(mpmath.gamma(mpmath.mpc(z)))
        assert abs(backend.cgamma(z) - want) <= 1e-13 * abs(want)


def _jackson_case():
    tp = make_torus_params(3, [0.1, 0.37 + 0.2j, -0.45])
    w = np.exp(2j * np.pi * tp.zarr)
    return tp, w


@pytest.mark.skipif(_kernels.compiled_backend is None, reason="extension not built")
def test_backend_parity():
    py, cy = _kernels.python_backend, _kernels.compiled_backend
    tp, w = _jackson_case()
    for logq in [0.3 - 0.1j, 3 * (np.log(4.0) - 2j * np.pi * 0.05), -2.0 + 1.0j]:
        a = py.jackson_apply(tp.zarr, w, logq, 1e-12, 500)
        b = cy.jackson_apply(tp.zarr, w, logq, 1e-12, 500)
        assert np.allclose(a[0], b[0], rtol=1e-13, atol=0)
        assert a[2] == b[2] and a[3] == b[3]
    coefs = relation_coefficients(tp)
    Y0 = np.eye(3, dtype=complex)
    ln0 = np.zeros(3, dtype=complex)
    args = (Y0, ln0, 1.0, 3.0, 0.05, coefs, 1e-10, 1e-12, 1e-2, 1e2, False)
    ra, rb = py.dp45_extend(*args), cy.dp45_extend(*args)
    assert np.allclose(ra[0], rb[0], rtol=1e-12)
    assert np.allclose(ra[1], rb[1], rtol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_jackson_apply_reports_non_convergence(backend):
    tp, w = _jackson_case()
    out = backend.jackson_apply(tp.zarr, w, 3 * np.log(40.0) + 0j, 1e-12, 20)
    assert out[3] is False or out[3] == 0


@pytest.mark.skipif(_kernels.compiled_backend is None, reason="extension not built")
def test_benchmark_script_reports_parity(tmp_path):
    from pathlib import Path
    import json
    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    out = tmp_path / "bench.json"
    subprocess.run([sys.executable, str(script), "--repeat", "1", "--json", str(out)],
                   check=True, capture_output=True)
    rows = json.loads(out.read_text())
    assert {r["kernel"] for r in rows} == {"cgamma", "jackson_apply", "dp45_extend"}
    assert all(r["max_rel_diff"] <= 1e-12 for r in rows)
