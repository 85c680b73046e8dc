"""Character arithmetic for finite groups acting linearly on P(V).

Groups come as character-table files (class sizes, power maps, irreducible
characters, subgroup fusions); nothing is computed from generators at run
time.  Class functions are numpy vectors indexed by conjugacy class.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BadFusion, InvalidGroupData, MissingPowerMap, NonIntegral, PatternViolation

ORTHO_TOL = 1e-9
INTEGRAL_TOL = 1e-6


def _complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]))
    return complex(x)


@dataclass(frozen=True, eq=False)
class FiniteGroupData:
    name: str
    order: int
    class_sizes: tuple
    powermaps: tuple
    chartable: np.ndarray
    class_names: tuple = ()
    subgroups: dict = field(default_factory=dict)

    @property
    def nclasses(self) -> int:
        return len(self.class_sizes)

    @property
    def sizes(self) -> np.ndarray:
        return np.array(self.class_sizes, dtype=float)

    @property
    def degrees(self) -> np.ndarray:
        return self.chartable[:, 0].real.round().astype(int)

    def irr(self, p: int) -> np.ndarray:
        return self.chartable[p]

    def power_class(self, c: int, j: int) -> int:
        """Class of ``g^j`` for ``g`` in class ``c`` (``j >= 1``)."""
        pm = self.powermaps[c] if c < len(self.powermaps) else None
        if not pm:
            raise MissingPowerMap(f"{self.name}: no power map for class {c}")
        return pm[(j - 1) % len(pm)]

    def trivial(self) -> np.ndarray:
        return np.ones(self.nclasses, dtype=complex)

    def regular(self) -> np.ndarray:
        out = np.zeros(self.nclasses, dtype=complex)
        out[0] = self.order
        return out

    def validate(self) -> "FiniteGroupData":
        k = self.nclasses
        if sum(self.class_sizes) != self.order:
            raise InvalidGroupData(f"{self.name}: class sizes sum to {sum(self.class_sizes)}, not {self.order}")
        if self.chartable.shape != (k, k):
            raise InvalidGroupData(f"{self.name}: character table must be {k}x{k}")
        if self.class_sizes[0] != 1:
            raise InvalidGroupData(f"{self.name}: class 0 must be the identity")
        gram = (self.chartable * self.sizes) @ self.chartable.conj().T / self.order
        err = float(np.max(np.abs(gram - np.eye(k))))
        if err > ORTHO_TOL:
            raise InvalidGroupData(f"{self.name}: row orthogonality fails (max deviation {err:.3g})")
        for c, pm in enumerate(self.powermaps):
            if pm and (pm[-1] != 0 or any(not 0 <= x < k for x in pm)):
                raise InvalidGroupData(f"{self.name}: power map of class {c} is inconsistent")
        return self

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "order": self.order,
            "classes": [{"size": s, "powermap": list(pm), **({"representative": n} if n else {})}
                        for s, pm, n in zip(self.class_sizes, self.powermaps,
                                            self.class_names or [""] * self.nclasses)],
            "chartable": [[[float(x.real), float(x.imag)] for x in row] for row in self.chartable],
            "subgroups": [{"name": k, "group": g, "fusion": list(f)} for k, (g, f) in self.subgroups.items()],
        }


def group_from_json(data: dict) -> FiniteGroupData:
    try:
        classes = data["classes"]
        g = FiniteGroupData(
            name=str(data.get("name", "unnamed")),
            order=int(data["order"]),
            class_sizes=tuple(int(c["size"]) for c in classes),
            powermaps=tuple(tuple(int(x) for x in c.get("powermap", [])) for c in classes),
            chartable=np.array([[_complex(x) for x in row] for row in data["chartable"]], dtype=complex),
            class_names=tuple(str(c.get("representative", "")) for c in classes),
            subgroups={s["name"]: (s["group"], tuple(int(x) for x in s["fusion"]))
                       for s in data.get("subgroups", [])},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidGroupData(f"malformed group data: {exc}") from exc
    return g.validate()


def bundled_groups() -> list:
    root = resources.files("artifact") / "data" / "groups"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


@lru_cache(maxsize=None)
def _load_bundled(name: str) -> FiniteGroupData:
    path = resources.files("artifact") / "data" / "groups" / f"{name}.json"
    if not path.is_file():
        raise InvalidGroupData(f"no bundled group named {name!r}")
    return group_from_json(json.loads(path.read_text()))


def load_group(name_or_path: str | Path) -> FiniteGroupData:
    """A bundled group by name (``cyclic_3``, ``symmetric_3``, ...) or a JSON file."""
    p = Path(name_or_path)
    if p.suffix == ".json" or p.exists():
        return group_from_json(json.loads(p.read_text()))
    return _load_bundled(str(name_or_path))


# --------------------------------------------------------- class functions


def inner(chi, psi, G: FiniteGroupData) -> complex:
    """``(1/|G|) sum_c |c| chi(c) conj(psi(c))``."""
    chi = np.asarray(chi, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    return complex(np.sum(G.sizes * chi * psi.conj()) / G.order)


def mult(chi, psi, G: FiniteGroupData) -> int:
    """Multiplicity ``<chi, psi>`` rounded to a nonnegative integer."""
    v = inner(chi, psi, G)
    n = round(v.real)
    if abs(v - n) > INTEGRAL_TOL or n < 0:
        raise NonIntegral(f"inner product {v:.9g} is not a nonnegative integer")
    return int(n)


def decompose(chi, G: FiniteGroupData) -> list:
    return [mult(chi, G.irr(p), G) for p in range(G.nclasses)]


def power_character(chi, G: FiniteGroupData, j: int) -> np.ndarray:
    """``c -> chi(c^j)``."""
    chi = np.asarray(chi, dtype=complex)
    return np.array([chi[G.power_class(c, j)] for c in range(G.nclasses)])


def sym_power_character(chi_v, G: FiniteGroupData, k: int) -> np.ndarray:
    """Character of ``Sym^k V*`` via ``h_k = (1/k) sum_{j<=k} p_j h_{k-j}``
    with power sums ``p_j(c) = conj(chi_V)(c^j)``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    dual = np.conj(np.asarray(chi_v, dtype=complex))
    p = [None] + [power_character(dual, G, j) for j in range(1, k + 1)]
    h = [G.trivial()]
    for n in range(1, k + 1):
        h.append(sum(p[j] * h[n - j] for j in range(1, n + 1)) / n)
    return h[k]


def restrict(psi, fusion: Sequence[int]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.array([psi[f] for f in fusion])


def check_fusion(G: FiniteGroupData, H: FiniteGroupData, fusion: Sequence[int]):
    fusion = list(fusion)
    if len(fusion) != H.nclasses:
        raise BadFusion(f"fusion has {len(fusion)} entries for {H.nclasses} classes of {H.name}")
    if any(not 0 <= f < G.nclasses for f in fusion):
        raise BadFusion("fusion target outside the classes of G")
    if fusion[0] != 0:
        raise BadFusion("the identity class must fuse to the identity class")
    if G.order % H.order:
        raise BadFusion(f"|H| = {H.order} does not divide |G| = {G.order}")
    hit = np.zeros(G.nclasses)
    for c, f in enumerate(fusion):
        hit[f] += H.class_sizes[c]
    if np.any(hit > G.sizes):
        raise BadFusion("more H-elements fuse into a G-class than it contains")
    for c, f in enumerate(fusion):
        for j in range(1, len(H.powermaps[c]) + 1):
            if fusion[H.power_class(c, j)] != G.power_class(f, j):
                raise BadFusion(f"fusion does not commute with the {j}-th power map on class {c}")


def induced_character(G: FiniteGroupData, H: FiniteGroupData, fusion: Sequence[int], chi) -> np.ndarray:
    """``Ind(chi)(c) = [G:H] / |c| * sum_{d -> c} |d| chi(d)``."""
    check_fusion(G, H, fusion)
    chi = np.asarray(chi, dtype=complex)
    out = np.zeros(G.nclasses, dtype=complex)
    for d, c in enumerate(fusion):
        out[c] += H.class_sizes[d] * chi[d]
    return out * (G.order / H.order) / G.sizes


def subgroup(G: FiniteGroupData, name: str) -> tuple:
    """``(H, fusion)`` for a subgroup listed in the group file."""
    if name not in G.subgroups:
        raise KeyError(f"{G.name} lists no subgroup {name!r}; known: {sorted(G.subgroups)}")
    gname, fusion = G.subgroups[name]
    H = G if gname == G.name else load_group(gname)
    return H, fusion


def frobenius_discrepancy(G: FiniteGroupData, H: FiniteGroupData, fusion, trials: int = 50,
                          seed: int = 0) -> float:
    """Largest ``|<Ind chi, psi>_G - <chi, Res psi>_H|`` over random class
    functions."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        chi = rng.normal(size=H.nclasses) + 1j * rng.normal(size=H.nclasses)
        psi = rng.normal(size=G.nclasses) + 1j * rng.normal(size=G.nclasses)
        lhs = inner(induced_character(G, H, fusion, chi), psi, G)
        rhs = inner(chi, restrict(psi, fusion), H)
        worst = max(worst, abs(lhs - rhs))
    return worst


# ------------------------------------------------------------ collections


@dataclass(frozen=True)
class Block:
    """An orbit of exceptional objects with stabiliser ``H``."""

    orbit_length: int
    subgroup: str
    lift: bool = True


@dataclass(frozen=True)
class InducedObject:
    block: int
    irrep: int
    character: tuple

    def to_json(self) -> dict:
        return {"block": self.block, "irrep": self.irrep,
                "induced_character": [[x.real, x.imag] for x in self.character]}


def induced_collection(G: FiniteGroupData, blocks: Sequence[Block]) -> list:
    """Block-major list of ``(block, irreducible of H)`` with ``Ind_H^G`` of
    each irreducible."""
    out = []
    for b, blk in enumerate(blocks):
        H, fusion = subgroup(G, blk.subgroup)
        if blk.orbit_length * H.order != G.order:
            raise BadFusion(f"block {b}: orbit length {blk.orbit_length} times |H| = {H.order} "
                            f"differs from |G| = {G.order}")
        if not blk.lift:
            raise ValueError(f"block {b} has no equivariant lift of its leader")
        for p in range(H.nclasses):
            ind = induced_character(G, H, fusion, H.irr(p))
            out.append(InducedObject(b, p, tuple(complex(x) for x in ind)))
    return out


@dataclass(frozen=True)
class RankReport:
    count: int
    expected: int | None

    @property
    def ok(self) -> bool:
        return self.expected is None or self.count == self.expected

    def to_json(self) -> dict:
        return {"count": self.count, "expected": self.expected, "ok": self.ok}


def block_rank_check(G: FiniteGroupData, blocks: Sequence[Block], expected: int | None = None) -> RankReport:
    count = 0
    for blk in blocks:
        H, _ = subgroup(G, blk.subgroup)
        count += H.nclasses
    return RankReport(count, expected)


@dataclass(frozen=True)
class GHomReport:
    """``hom[d][p][q] = dim Hom_G(O (x) V_p, O(d) (x) V_q)`` for ``d = 0..maxdeg``."""

    group: str
    m: int
    hom: dict
    violations: tuple
    strongness: str = "assumed (Beilinson)"

    def to_json(self) -> dict:
        return {"group": self.group, "m": self.m,
                "hom0": {str(d): mat.tolist() for d, mat in self.hom.items()},
                "violations": list(self.violations), "strongness": self.strongness,
                "lower_to_higher_only": True}


def verify_g_sod_projective(G: FiniteGroupData, chi_v, m: int, maxdeg: int | None = None) -> GHomReport:
    """Equivariant Hom pattern of ``O(i) (x) V_p`` for the action on ``P(V)``.

    ``Hom^0(O(i) (x) V_p, O(j) (x) V_q)`` depends on ``d = j - i`` and equals
    the multiplicity of ``V_p`` in ``Sym^d V* (x) V_q``.  Degree 0 must give the
    identity matrix, and every row must account for ``dim Sym^d V* . dim V_p``.
    Homs from a higher twist to a lower one vanish for any group, so they are
    not tabulated.
    """
    chi_v = np.asarray(chi_v, dtype=complex)
    if round(chi_v[0].real) != m:
        raise ValueError(f"character value at the identity is {chi_v[0]}, expected m = {m}")
    maxdeg = m - 1 if maxdeg is None else maxdeg
    if maxdeg < m - 1:
        raise ValueError("maxdeg must be at least m - 1")
    k = G.nclasses
    dims = G.degrees
    hom, bad = {}, []
    for d in range(maxdeg + 1):
        s = sym_power_character(chi_v, G, d)
        mat = np.array([[mult(s * G.irr(q), G.irr(p), G) for q in range(k)] for p in range(k)], dtype=int)
        hom[d] = mat
        sdim = math.comb(d + m - 1, m - 1)
        for p in range(k):
            if int(mat[p] @ dims) != sdim * dims[p]:
                bad.append((d, p, None, f"row {p} accounts for {int(mat[p] @ dims)} dimensions, "
                                        f"expected {sdim * dims[p]}"))
        if d == 0:
            for p in range(k):
                for q in range(k):
                    if mat[p, q] != (p == q):
                        bad.append((0, p, q, f"hom0 = {mat[p, q]} at degree 0"))
    report = GHomReport(G.name, m, hom, tuple(bad))
    if bad:
        raise PatternViolation(f"{len(bad)} Hom-pattern violations", bad)
    return report
