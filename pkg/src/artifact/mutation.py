"""Exceptional collections of line-bundle classes on P^{m-1} and their mutations.

Objects are carried as K-classes; the solution attached to an object is read
off through ``[O(-n)] -> Phi^n`` so it moves in lockstep with the class.
Growth labels ``sigma(i)`` index the root of unity ``zeta_m^{sigma(i)}`` in
the leading asymptotics ``log Phi ~ m s zeta_m^{sigma(i)}``.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import GrowthCollision, IndexOutOfRange, NonTermination
from .rings import KClass, TorusParams

log = logging.getLogger(__name__)

ADMISSIBLE_TOL = 1e-6


# ------------------------------------------------------------- Euler form


def binomial_poly(x: int, k: int) -> int:
    """``x (x-1) ... (x-k+1) / k!`` for any integer ``x``."""
    num = Fraction(1)
    for i in range(k):
        num *= x - i
    return int(num / math.factorial(k))


def chi_lines(a: int, b: int, m: int) -> int:
    """``chi(O(a), O(b))`` on P^{m-1}."""
    return binomial_poly(b - a + m - 1, m - 1)


def euler_gram(m: int, offsets: Sequence[int]) -> np.ndarray:
    offsets = [int(o) for o in offsets]
    return np.array([[chi_lines(a, b, m) for b in offsets] for a in offsets], dtype=np.int64)


def euler_form(a: KClass, b: KClass, m: int) -> int:
    """Non-equivariant Euler form; representation twists are forgotten."""
    return sum(ca * cb * chi_lines(na, nb, m)
               for na, ca in a.terms().items() for nb, cb in b.terms().items())


def to_window(k: KClass, offset: int, m: int) -> tuple:
    """Coefficients of ``k`` over ``O(offset), ..., O(offset+m-1)``, using the
    Koszul relation ``sum_j (-1)^j binom(m, j) [O(n-j)] = 0`` to move terms
    into the window."""
    terms = dict(k.terms())
    hi_end = offset + m - 1
    while terms and max(terms) > hi_end:
        n = max(terms)
        c = terms.pop(n)
        for j in range(1, m + 1):
            terms[n - j] = terms.get(n - j, 0) - c * (-1) ** j * math.comb(m, j)
        terms = {d: v for d, v in terms.items() if v}
    while terms and min(terms) < offset:
        n = min(terms)
        c = terms.pop(n)
        for j in range(0, m):
            terms[n + m - j] = terms.get(n + m - j, 0) - c * (-1) ** (m + j) * math.comb(m, j)
        terms = {d: v for d, v in terms.items() if v}
    return tuple(terms.get(offset + i, 0) for i in range(m))


# ------------------------------------------------------------ admissibility


def rotated_roots(theta: float, m: int) -> np.ndarray:
    """``e^{-2 pi i theta} zeta_m^n`` for n = 0..m-1."""
    return np.array([cmath.exp(2j * math.pi * (n / m - theta)) for n in range(m)])


def is_admissible(theta: float, m: int) -> tuple:
    """Whether real parts and imaginary parts of the rotated roots are each
    pairwise distinct; the margin is the smallest pairwise gap of either."""
    v = rotated_roots(theta, m)
    gaps = [min(abs(v[a].real - v[b].real), abs(v[a].imag - v[b].imag))
            for a in range(m) for b in range(a + 1, m)]
    margin = float(min(gaps)) if gaps else math.inf
    return margin >= ADMISSIBLE_TOL, margin


def sector_offset(theta: float, m: int) -> int:
    """Degree ``d`` such that ``O(d), ..., O(d+m-1)`` correspond to solutions
    ``Phi^n`` whose n all satisfy ``n/m - 1 < theta < n/m``."""
    return -math.floor(m * theta) - m


# ---------------------------------------------------------------- objects


@dataclass(frozen=True)
class ExcObject:
    kclass: KClass
    label: str = ""
    growth: int | None = None

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.kclass.label())

    @property
    def solcoef(self) -> dict:
        """Coefficients over the ``Phi^n`` basis."""
        return {-d: c for d, c in sorted(self.kclass.terms().items(), reverse=True)}

    def to_json(self) -> dict:
        out = {"label": self.label, **self.kclass.to_json()}
        if self.growth is not None:
            out["growth"] = self.growth
        return out

    @classmethod
    def from_json(cls, data) -> "ExcObject":
        return cls(KClass.from_json(data), data.get("label", ""), data.get("growth"))


@dataclass(frozen=True)
class MutationStep:
    position: int
    side: str
    chi: int

    def to_json(self) -> dict:
        return {"position": self.position, "side": self.side, "chi": self.chi}


@dataclass(frozen=True)
class Collection:
    m: int
    objects: tuple
    log: tuple = field(default=())

    def __len__(self):
        return len(self.objects)

    def __getitem__(self, i):
        return self.objects[i]

    @property
    def kclasses(self) -> list:
        return [o.kclass for o in self.objects]

    @property
    def sigma(self) -> tuple | None:
        g = tuple(o.growth for o in self.objects)
        return None if any(x is None for x in g) else g

    def with_growth(self, sigma: Sequence[int]) -> "Collection":
        if len(sigma) != len(self.objects):
            raise ValueError("growth assignment length differs from collection length")
        objs = tuple(replace(o, growth=int(s)) for o, s in zip(self.objects, sigma))
        return replace(self, objects=objs)

    def coefficient_matrix(self, offset: int | None = None) -> np.ndarray:
        """Rows: objects; columns: ``O(offset), ..., O(offset+m-1)``."""
        if offset is None:
            degs = [d for k in self.kclasses for d in k.terms()]
            offset = min(degs) if degs else 0
        return np.array([to_window(k, offset, self.m) for k in self.kclasses], dtype=np.int64)

    def to_json(self) -> dict:
        return {"m": self.m, "objects": [o.to_json() for o in self.objects],
                "log": [s.to_json() for s in self.log]}

    @classmethod
    def from_json(cls, data) -> "Collection":
        steps = tuple(MutationStep(int(s["position"]), str(s["side"]), int(s["chi"]))
                      for s in data.get("log", []))
        return cls(int(data["m"]), tuple(ExcObject.from_json(o) for o in data["objects"]), steps)


def beilinson_collection(m: int, offset: int = 0) -> Collection:
    """``(O(offset), ..., O(offset+m-1))``."""
    return Collection(m, tuple(ExcObject(KClass.line(offset + i)) for i in range(m)))


def integer_det(M: np.ndarray) -> int:
    """Exact determinant of a small integer matrix (fraction-free elimination)."""
    A = [[Fraction(int(x)) for x in row] for row in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            for k in range(c, n):
                A[r][k] -= f * A[c][k]
    return int(det)


# --------------------------------------------------------------- mutations


def _check_position(c: Collection, j: int):
    if not 0 <= j < len(c) - 1:
        raise IndexOutOfRange(f"mutation position {j} outside 0..{len(c) - 2}")


def _dominant(a: int | None, b: int | None, theta: float | None, m: int):
    """Growth label with the larger real part (``a`` when undecidable)."""
    if a is None or b is None or theta is None:
        return a
    v = rotated_roots(theta, m)
    return a if v[a].real >= v[b].real else b


def _mutate(c: Collection, j: int, side: str, theta: float | None) -> Collection:
    _check_position(c, j)
    E, F = c.objects[j], c.objects[j + 1]
    chi = euler_form(E.kclass, F.kclass, c.m)
    if chi < 0:
        warnings.warn(f"negative Euler form {chi} at position {j}: the pair may not be strong",
                      RuntimeWarning, stacklevel=3)
    if side == "right":
        new_k = E.kclass - chi * F.kclass
        g = E.growth if chi == 0 else _dominant(E.growth, F.growth, theta, c.m)
        pair = (F, ExcObject(new_k, growth=g))
    else:
        new_k = F.kclass - chi * E.kclass
        g = F.growth if chi == 0 else _dominant(F.growth, E.growth, theta, c.m)
        pair = (ExcObject(new_k, growth=g), E)
    objs = c.objects[:j] + pair + c.objects[j + 2:]
    log.debug("%s mutation at %d with chi=%d", side, j, chi)
    return Collection(c.m, objs, c.log + (MutationStep(j, side, chi),))


def right_mutation(c: Collection, j: int, theta: float | None = None) -> Collection:
    """``(E_j, E_{j+1}) -> (E_{j+1}, R)`` with ``[R] = [E_j] - chi(E_j, E_{j+1}) [E_{j+1}]``.

    The new object keeps ``E_j``'s growth label unless ``theta`` is given and
    ``E_{j+1}`` dominates.
    """
    return _mutate(c, j, "right", theta)


def left_mutation(c: Collection, j: int, theta: float | None = None) -> Collection:
    """``(E_j, E_{j+1}) -> (L, E_j)`` with ``[L] = [E_{j+1}] - chi(E_j, E_{j+1}) [E_j]``."""
    return _mutate(c, j, "left", theta)


# ------------------------------------------------------------------ growth


def rule_growth(k: KClass, theta: float, m: int) -> int:
    """Leading direction read from the solution combination: each ``Phi^n``
    contributes ``zeta_m^{n mod m}`` and the constituent with the largest
    real part after rotation wins."""
    v = rotated_roots(theta, m)
    labels = {(-d) % m for d in k.terms()}
    if not labels:
        raise ValueError("zero class has no growth direction")
    return max(labels, key=lambda n: v[n].real)


def assign_growth(c: Collection, theta: float, tp: TorusParams | None = None,
                  rgrid: Sequence[float] | None = None, cfg=None) -> Collection:
    """Attach growth labels to every object.

    Without ``tp`` the labels come from :func:`rule_growth`.  With ``tp`` the
    solution of each object is traced along the ray over ``rgrid`` and fitted
    (see :func:`artifact.qde.asymptotic_fit`).  Labels must be a bijection onto
    ``0..m-1`` when the collection has m objects.
    """
    if tp is None:
        sigma = [rule_growth(o.kclass, theta, c.m) for o in c.objects]
    else:
        from . import qde
        from .series import DEFAULT_CONFIG
        grid = rgrid if rgrid is not None else np.linspace(20.0, 50.0, 64)
        fits = qde.fit_solutions(tp, c.kclasses, theta, grid, cfg or DEFAULT_CONFIG)
        sigma = [f.n for f in fits]
    if len(set(sigma)) != len(sigma):
        raise GrowthCollision(f"objects share a growth direction: sigma={sigma}")
    return c.with_growth(sigma)


def inversion_count(c: Collection, theta: float) -> int:
    sig = c.sigma
    if sig is None:
        raise ValueError("growth labels are not assigned")
    im = rotated_roots(theta, c.m).imag
    return sum(1 for a in range(len(sig)) for b in range(a + 1, len(sig)) if im[sig[a]] > im[sig[b]])


@dataclass(frozen=True)
class SortResult:
    collection: Collection
    sigma: tuple
    steps: tuple
    inversions: tuple


def sort_collection(c: Collection, theta: float) -> SortResult:
    """Mutate adjacent inverted pairs until ``Im e^{-2 pi i theta} zeta^{sigma(i)}``
    increases along the collection.

    A pair is right-mutated when the left object has the larger rotated real
    part, otherwise left-mutated.  Each step must lower the inversion count.
    """
    ok, margin = is_admissible(theta, c.m)
    if not ok:
        raise ValueError(f"theta={theta} is not admissible (margin {margin:.3g})")
    if c.sigma is None:
        c = assign_growth(c, theta)
    v = rotated_roots(theta, c.m)
    start_len = len(c.log)
    counts = [inversion_count(c, theta)]
    for _ in range(c.m * c.m):
        sig = c.sigma
        j = next((i for i in range(len(sig) - 1) if v[sig[i]].imag > v[sig[i + 1]].imag), None)
        if j is None:
            return SortResult(c, sig, c.log[start_len:], tuple(counts))
        if v[sig[j]].real > v[sig[j + 1]].real:
            c = right_mutation(c, j, theta)
        else:
            c = left_mutation(c, j, theta)
        counts.append(inversion_count(c, theta))
        if counts[-1] >= counts[-2]:
            raise NonTermination(f"inversion count did not decrease: {counts}")
    raise NonTermination(f"no sorted order after {c.m * c.m} mutations")


# ---------------------------------------------------------------- checking


@dataclass(frozen=True)
class ExceptionalReport:
    ok: bool
    det: int
    violations: tuple

    def to_json(self) -> dict:
        return {"ok": self.ok, "det": self.det, "violations": list(self.violations)}


def verify_exceptional(c: Collection) -> ExceptionalReport:
    """Euler-form proxy for exceptionality plus unimodularity of the classes."""
    bad = []
    ks = c.kclasses
    for i, a in enumerate(ks):
        if euler_form(a, a, c.m) != 1:
            bad.append(f"chi(E{i},E{i}) = {euler_form(a, a, c.m)} != 1")
        for j in range(i + 1, len(ks)):
            v = euler_form(ks[j], a, c.m)
            if v != 0:
                bad.append(f"chi(E{j},E{i}) = {v} != 0")
    det = integer_det(c.coefficient_matrix()) if len(ks) == c.m else 0
    if abs(det) != 1:
        bad.append(f"|det| = {abs(det)} != 1")
    return ExceptionalReport(not bad, det, tuple(bad))
