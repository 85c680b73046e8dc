"""Equivariant cohomology and K-theory of the projective space P^{m-1}.

Everything is evaluated at a fixed numeric point ``z`` of the equivariant
parameter space.  A cohomology class is stored by its restrictions to the m
torus-fixed points; the cup product is then pointwise and integration is the
fixed-point (localization) sum.

Conventions
-----------
* The tautological class ``x = c_1(O(-1))`` restricts to ``z_J`` at the J-th
  fixed point.
* Tangent weights at the J-th fixed point are ``z_i - z_J`` (i != J), so the
  equivariant integral is ``sum_J c_J / prod_{i != J} (z_i - z_J)``.
* ``O(n)`` restricts to the character ``exp(-2 pi i n z_J)`` and the
  one-dimensional representation of weight ``w`` to ``exp(2 pi i <w, z>)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, IllConditioned, OmegaViolation

OMEGA_TOL = 1e-9
COND_LIMIT = 1e12

S_CONVENTIONS = ("half", "direct")


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex number must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def dist_to_integer(w: complex) -> float:
    """Distance from a complex number to the nearest integer."""
    return abs(w - round(w.real))


@dataclass(frozen=True)
class TorusParams:
    """Dimension ``m`` of the ambient vector space and a generic point ``z``."""

    m: int
    z: tuple
    margin: float = field(compare=False)

    @property
    def zarr(self) -> np.ndarray:
        return np.array(self.z, dtype=complex)

    def elementary_symmetric(self, k: int) -> complex:
        if k == 0:
            return 1.0 + 0j
        return complex(sum(math.prod(c) for c in combinations(self.z, k)))

    def to_json(self) -> dict:
        return {"m": self.m, "z": [[v.real, v.imag] for v in self.z]}

    @classmethod
    def from_json(cls, data: Mapping) -> "TorusParams":
        return make_torus_params(int(data["m"]), [_as_complex(v) for v in data["z"]])


def make_torus_params(m: int, z: Sequence) -> TorusParams:
    """Validate ``z`` as a point of the complement of the hyperplanes
    ``z_i - z_j in Z`` and record the distance to them as ``margin``."""
    m = int(m)
    if m < 2:
        raise ValueError("m must be at least 2")
    z = tuple(_as_complex(v) for v in z)
    if len(z) != m:
        raise DimensionMismatch(f"expected {m} equivariant parameters, got {len(z)}")
    margin = math.inf
    for i in range(m):
        for j in range(i + 1, m):
            d = dist_to_integer(z[i] - z[j])
            if d < OMEGA_TOL:
                raise OmegaViolation(
                    f"OmegaViolation: z_{i + 1} - z_{j + 1} = {z[i] - z[j]} is integral"
                )
            margin = min(margin, d)
    return TorusParams(m=m, z=z, margin=margin)


def torus_from_s(s: Sequence, convention: str = "half") -> TorusParams:
    """Equivariant parameters attached to a stability tuple ``s``.

    ``half`` sets ``z = s/2`` so that ``exp(2 pi i z_i) = exp(i pi s_i)``;
    ``direct`` sets ``z = s``.
    """
    s = [_as_complex(v) for v in s]
    if convention == "half":
        z = [v / 2 for v in s]
    elif convention == "direct":
        z = list(s)
    else:
        raise ValueError(f"unknown s-convention {convention!r}")
    return make_torus_params(len(s), z)


@dataclass(frozen=True)
class EvalTuple:
    s: tuple

    @classmethod
    def of(cls, s: Sequence) -> "EvalTuple":
        return cls(tuple(_as_complex(v) for v in s))

    def torus(self, convention: str = "half") -> TorusParams:
        return torus_from_s(self.s, convention)


# ---------------------------------------------------------------- cohomology


@dataclass(frozen=True, eq=False)
class CohClass:
    """Equivariant cohomology class given by its fixed-point restrictions."""

    tp: TorusParams
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.tp.m,):
            raise DimensionMismatch(f"class needs {self.tp.m} values, got shape {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def _check(self, other: "CohClass"):
        if not isinstance(other, CohClass) or other.tp != self.tp:
            raise DimensionMismatch("classes live over different torus parameters")

    def __add__(self, other):
        self._check(other)
        return CohClass(self.tp, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return CohClass(self.tp, self.values - other.values)

    def __neg__(self):
        return CohClass(self.tp, -self.values)

    def __mul__(self, other):
        if isinstance(other, CohClass):
            return coh_mul(self, other)
        return CohClass(self.tp, self.values * complex(other))

    __rmul__ = __mul__

    def allclose(self, other: "CohClass", rtol=1e-10, atol=0.0) -> bool:
        self._check(other)
        scale = max(np.max(np.abs(self.values)), np.max(np.abs(other.values)), 1e-300)
        return bool(np.max(np.abs(self.values - other.values)) <= rtol * scale + atol)


def unit_class(tp: TorusParams) -> CohClass:
    return CohClass(tp, np.ones(tp.m, dtype=complex))


def coh_from_poly(coeffs: Sequence, tp: TorusParams) -> CohClass:
    """Class of ``sum_k coeffs[k] x^k``."""
    coeffs = [complex(c) for c in coeffs]
    if len(coeffs) > tp.m:
        raise DimensionMismatch(f"at most {tp.m} coefficients, got {len(coeffs)}")
    z = tp.zarr
    vals = np.zeros(tp.m, dtype=complex)
    for c in reversed(coeffs):
        vals = vals * z + c
    return CohClass(tp, vals)


def coh_from_roots(roots: Sequence, tp: TorusParams) -> CohClass:
    """Class of ``prod_k (x - roots[k])`` evaluated pointwise (any degree)."""
    z = tp.zarr
    vals = np.ones(tp.m, dtype=complex)
    for a in roots:
        vals = vals * (z - complex(a))
    return CohClass(tp, vals)


def vandermonde(tp: TorusParams) -> np.ndarray:
    return np.vander(tp.zarr, tp.m, increasing=True)


def coh_to_poly(c: CohClass) -> np.ndarray:
    """Coefficients ``c_0..c_{m-1}`` in the monomial basis ``1, x, ..., x^{m-1}``."""
    V = vandermonde(c.tp)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditioned(f"Vandermonde condition number {cond:.3g} exceeds {COND_LIMIT:.0e}")
    return np.linalg.solve(V, c.values)


def coh_mul(a: CohClass, b: CohClass) -> CohClass:
    a._check(b)
    return CohClass(a.tp, a.values * b.values)


def euler_denominators(tp: TorusParams) -> np.ndarray:
    """``prod_{i != J} (z_i - z_J)`` for every fixed point J."""
    z = tp.zarr
    out = np.ones(tp.m, dtype=complex)
    for J in range(tp.m):
        for i in range(tp.m):
            if i != J:
                out[J] *= z[i] - z[J]
    return out


def integrate_values(values, tp: TorusParams) -> complex:
    return complex(np.sum(np.asarray(values, dtype=complex) / euler_denominators(tp)))


def integrate(c: CohClass) -> complex:
    """Equivariant integral over P^{m-1} by fixed-point localization."""
    return integrate_values(c.values, c.tp)


# ------------------------------------------------------------------ K-theory


@dataclass(frozen=True, eq=False)
class KClass:
    """Integer combination of line bundles ``O(offset + k)`` twisted by the
    one-dimensional representation of weight ``twist``.

    ``twist`` may be ``None`` for a class whose weight is left implicit (it is
    treated as the zero vector of the right length).
    """

    beilinson: tuple
    offset: int = 0
    twist: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "beilinson", tuple(int(c) for c in self.beilinson))
        object.__setattr__(self, "offset", int(self.offset))
        if self.twist is not None:
            object.__setattr__(self, "twist", tuple(int(w) for w in self.twist))

    @classmethod
    def line(cls, n: int, twist=None) -> "KClass":
        """The class of ``O(n)``."""
        return cls((1,), n, twist)

    @classmethod
    def from_terms(cls, terms: Mapping[int, int], twist=None) -> "KClass":
        terms = {int(n): int(c) for n, c in terms.items() if int(c) != 0}
        if not terms:
            return cls((), 0, twist)
        lo, hi = min(terms), max(terms)
        return cls(tuple(terms.get(n, 0) for n in range(lo, hi + 1)), lo, twist)

    def terms(self) -> dict:
        """Nonzero coefficients keyed by the line-bundle degree."""
        return {self.offset + k: c for k, c in enumerate(self.beilinson) if c != 0}

    def twist_vector(self, m: int) -> tuple:
        if self.twist is None:
            return (0,) * m
        if len(self.twist) != m:
            raise DimensionMismatch(f"twist has length {len(self.twist)}, expected {m}")
        return self.twist

    def _twist_key(self):
        if self.twist is None or not any(self.twist):
            return None
        return self.twist

    def is_zero(self) -> bool:
        return not self.terms()

    def __eq__(self, other):
        if not isinstance(other, KClass):
            return NotImplemented
        return self.terms() == other.terms() and self._twist_key() == other._twist_key()

    def __hash__(self):
        return hash((tuple(sorted(self.terms().items())), self._twist_key()))

    def _combine(self, other: "KClass", sign: int) -> "KClass":
        if self._twist_key() != other._twist_key():
            raise ValueError("cannot add K-classes with different twists into one KClass")
        terms = self.terms()
        for n, c in other.terms().items():
            terms[n] = terms.get(n, 0) + sign * c
        return KClass.from_terms(terms, self.twist if self.twist is not None else other.twist)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return KClass(tuple(-c for c in self.beilinson), self.offset, self.twist)

    def __mul__(self, k):
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        return KClass(tuple(int(k) * c for c in self.beilinson), self.offset, self.twist)

    __rmul__ = __mul__

    def tensor_twist(self, w: Sequence[int]) -> "KClass":
        """Tensor with the one-dimensional representation of weight ``w``."""
        w = tuple(int(v) for v in w)
        base = self.twist if self.twist is not None else (0,) * len(w)
        if len(base) != len(w):
            raise DimensionMismatch("twist length mismatch")
        return KClass(self.beilinson, self.offset, tuple(a + b for a, b in zip(base, w)))

    def dual(self) -> "KClass":
        terms = {-n: c for n, c in self.terms().items()}
        tw = None if self.twist is None else tuple(-w for w in self.twist)
        return KClass.from_terms(terms, tw)

    def window(self, offset: int, length: int) -> tuple:
        """Coefficients over ``O(offset), ..., O(offset + length - 1)``."""
        terms = self.terms()
        if any(n < offset or n >= offset + length for n in terms):
            raise ValueError(f"class {self} has support outside the window [{offset}, {offset + length})")
        return tuple(terms.get(offset + k, 0) for k in range(length))

    def label(self) -> str:
        parts = []
        for n, c in sorted(self.terms().items()):
            name = "O" if n == 0 else f"O({n})"
            if c == 1:
                parts.append(f"+[{name}]")
            elif c == -1:
                parts.append(f"-[{name}]")
            else:
                parts.append(f"{c:+d}[{name}]")
        s = "".join(parts).lstrip("+") or "0"
        if self._twist_key() is not None:
            s += "*1^(" + ",".join(str(w) for w in self.twist) + ")"
        return s

    __str__ = label

    def to_json(self) -> dict:
        return {
            "beilinson": list(self.beilinson),
            "offset": self.offset,
            "twist": list(self.twist) if self.twist is not None else [],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "KClass":
        tw = data.get("twist") or None
        return cls(tuple(data["beilinson"]), int(data.get("offset", 0)), tw)


def character_values(k: KClass, tp: TorusParams) -> np.ndarray:
    """Values of the class of ``k`` as a Laurent polynomial at each fixed
    point: ``O(n) -> exp(-2 pi i n z_J)`` and ``1^w -> exp(2 pi i <w, z>)``."""
    z = tp.zarr
    w = np.array(k.twist_vector(tp.m), dtype=float)
    vals = np.zeros(tp.m, dtype=complex)
    for n, c in k.terms().items():
        vals += c * np.exp(-2j * np.pi * n * z)
    return vals * np.exp(2j * np.pi * np.dot(w, z))


def chern_character(k: KClass, tp: TorusParams) -> CohClass:
    """Equivariant Chern character, in the fixed-point basis."""
    return CohClass(tp, character_values(k, tp))


def todd_denominators(tp: TorusParams) -> np.ndarray:
    """``prod_{i != J} (1 - exp(-2 pi i (z_i - z_J)))``."""
    z = tp.zarr
    out = np.ones(tp.m, dtype=complex)
    for J in range(tp.m):
        for i in range(tp.m):
            if i != J:
                out[J] *= 1.0 - cmath.exp(-2j * math.pi * (z[i] - z[J]))
    return out


def euler_pairing(a: KClass, b: KClass, tp: TorusParams) -> complex:
    """Equivariant Euler pairing ``chi(a, b) = chi(a^dual (x) b)`` by the
    K-theoretic fixed-point formula."""
    num = character_values(a.dual(), tp) * character_values(b, tp)
    return complex(np.sum(num / todd_denominators(tp)))


# ---------------------------------------------------------- evaluation maps


def ev_k(poly: Mapping[tuple, complex] | complex, s: EvalTuple | Sequence) -> complex:
    """Evaluate a Laurent polynomial in ``T_1..T_m`` at ``T_i = exp(i pi s_i)``.

    ``poly`` maps exponent tuples to coefficients; a bare number is a constant.
    """
    if not isinstance(poly, Mapping):
        return complex(poly)
    svec = np.array(s.s if isinstance(s, EvalTuple) else [_as_complex(v) for v in s])
    total = 0j
    for expo, coef in poly.items():
        expo = np.array(expo, dtype=float)
        if expo.shape != svec.shape:
            raise DimensionMismatch("exponent length differs from the tuple length")
        total += complex(coef) * cmath.exp(1j * math.pi * np.dot(expo, svec))
    return total


def knorm(a: KClass | Iterable[KClass], s: EvalTuple | Sequence) -> float:
    """Norm of ``sum_i T^{k_i} alpha_i``: ``sum_i |ev(T^{k_i})| * ||alpha_i||``.

    ``||alpha||`` is the Euclidean norm of the line-bundle coefficients.
    Summands sharing a twist are merged before taking norms.
    """
    items = [a] if isinstance(a, KClass) else list(a)
    svec = s.s if isinstance(s, EvalTuple) else tuple(_as_complex(v) for v in s)
    m = len(svec)
    grouped: dict = {}
    for k in items:
        w = k.twist_vector(m)
        untwisted = KClass(k.beilinson, k.offset, None)
        grouped[w] = grouped[w] + untwisted if w in grouped else untwisted
    total = 0.0
    for w, alpha in grouped.items():
        coeffs = np.array(list(alpha.terms().values()), dtype=float)
        scale = abs(ev_k({w: 1.0}, svec))
        total += scale * float(np.linalg.norm(coeffs))
    return total
