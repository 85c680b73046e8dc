import math
from itertools import combinations_with_replacement

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.errors import DimensionMismatch, OmegaViolation
from artifact.rings import (CohClass, EvalTuple, KClass, chern_character, coh_from_poly,
                            coh_from_roots, coh_to_poly, euler_pairing, ev_k, integrate,
                            knorm, make_torus_params, torus_from_s, unit_class)

from conftest import random_torus


def complete_homogeneous(z, k):
    if k < 0:
        return 0
    return sum(math.prod(c) for c in combinations_with_replacement(z, k))


def test_rejects_integral_differences():
    with pytest.raises(OmegaViolation):
        make_torus_params(3, [0.1, 1.1, 0.3])
    with pytest.raises(OmegaViolation):
        make_torus_params(2, [0.2 + 0.1j, -0.8 + 0.1j])


def test_dimension_and_size_checks():
    with pytest.raises(DimensionMismatch):
        make_torus_params(3, [0.1, 0.2])
    with pytest.raises(ValueError):
        make_torus_params(1, [0.1])


def test_margin_is_distance_to_nearest_wall():
    tp = make_torus_params(2, [0.0, 0.9])
    assert tp.margin == pytest.approx(0.1)


def test_s_conventions():
    s = [0.4, -0.2 + 0.1j]
    assert torus_from_s(s, "half").z == (0.2, -0.1 + 0.05j)
    assert torus_from_s(s, "direct").z == (0.4, -0.2 + 0.1j)
    assert EvalTuple.of(s).torus("half") == torus_from_s(s)
    with pytest.raises(ValueError):
        torus_from_s(s, "quarter")


def test_json_round_trip(tp3):
    assert make_torus_params(3, tp3.z) == type(tp3).from_json(tp3.to_json())


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_integral_of_monomials(m, rng):
    for _ in range(3):
        tp = random_torus(rng, m)
        z = tp.zarr
        for k in range(m + 3):
            got = integrate(CohClass(tp, z ** k))
            want = (-1) ** (m - 1) * complete_homogeneous(tp.z, k - m + 1)
            assert abs(got - want) <= 1e-10 * max(1, abs(want))


def test_polynomial_round_trip(tp3):
    coeffs = [1 - 2j, 0.5, 3.0]
    c = coh_from_poly(coeffs, tp3)
    assert np.allclose(coh_to_poly(c), coeffs)


def test_product_of_roots_vanishes_at_those_points(tp3):
    c = coh_from_roots([tp3.z[0], tp3.z[2]], tp3)
    assert abs(c.values[0]) < 1e-15 and abs(c.values[2]) < 1e-15
    assert abs(c.values[1]) > 0.1


def test_point_class_integrates_to_one(tp3):
    # the class supported at one fixed point with value equal to the tangent
    # Euler class there
    for J in range(3):
        vals = np.zeros(3, dtype=complex)
        vals[J] = np.prod([tp3.z[i] - tp3.z[J] for i in range(3) if i != J])
        assert integrate(CohClass(tp3, vals)) == pytest.approx(1.0)


def test_class_arithmetic_checks_torus(tp3, tp2):
    with pytest.raises(DimensionMismatch):
        unit_class(tp3) + unit_class(make_torus_params(3, [0.2, 0.3, 0.45]))
    with pytest.raises(DimensionMismatch):
        CohClass(tp2, [1, 2, 3])


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.integers(-6, 6), st.integers(-5, 5), max_size=5),
       st.dictionaries(st.integers(-6, 6), st.integers(-5, 5), max_size=5))
def test_kclass_group_laws(a, b):
    A, B = KClass.from_terms(a), KClass.from_terms(b)
    assert A + B == B + A
    assert (A + B) - B == A
    assert A.dual().dual() == A
    assert KClass.from_json(A.to_json()) == A
    assert -(-A) == A
    assert (A - A).is_zero()


def test_kclass_labels():
    assert KClass.from_terms({0: 1, 1: -3}).label() == "[O]-3[O(1)]"
    assert KClass.line(-2).label() == "[O(-2)]"
    assert KClass.line(0, twist=(1, 0)).label() == "[O]*1^(1,0)"
    with pytest.raises(ValueError):
        KClass.line(0, (1, 0)) + KClass.line(0)


def test_window_support():
    k = KClass.from_terms({1: 2, 3: -1})
    assert k.window(1, 3) == (2, 0, -1)
    with pytest.raises(ValueError):
        k.window(2, 3)


def test_chern_character_is_multiplicative(tp3):
    a, b = KClass.line(2), KClass.line(-5)
    lhs = chern_character(a, tp3) * chern_character(b, tp3)
    assert lhs.allclose(chern_character(KClass.line(-3), tp3))


def test_twist_character(tp3):
    w = (1, -2, 0)
    k = KClass.line(0).tensor_twist(w)
    vals = chern_character(k, tp3).values
    expect = np.exp(2j * np.pi * np.dot(w, tp3.zarr))
    assert np.allclose(vals, expect)


def test_euler_pairing_of_beilinson_lines_is_triangular(tp3):
    # chi(O(b), O(a)) = 0 for 0 < b - a < m in the equivariant setting too
    for a in range(-2, 2):
        for d in (1, 2):
            assert abs(euler_pairing(KClass.line(a + d), KClass.line(a), tp3)) < 1e-10
        assert euler_pairing(KClass.line(a), KClass.line(a), tp3) == pytest.approx(1.0)


def test_evaluation_maps():
    s = [0.5, -0.25]
    # T_1 T_2^{-1} at T_i = exp(i pi s_i)
    val = ev_k({(1, -1): 2.0}, s)
    assert val == pytest.approx(2 * np.exp(1j * np.pi * 0.75))
    assert ev_k(3.0, s) == 3.0
    with pytest.raises(DimensionMismatch):
        ev_k({(1,): 1.0}, s)


def test_knorm():
    s = EvalTuple.of([0.0, 0.0 + 1j])
    a = KClass.from_terms({0: 3, 1: 4})
    assert knorm(a, s) == pytest.approx(5.0)
    twisted = KClass.line(0, twist=(0, 1))
    # |exp(i pi * i)| = exp(-pi)
    assert knorm(twisted, s) == pytest.approx(math.exp(-math.pi))
