"""Regenerate the bundled character-table files under src/artifact/data/groups.

Groups are built from explicit multiplication rules; conjugacy classes, power
maps and class fusions come from the tables, and character tables come from
Burnside's simultaneous diagonalisation of class-sum matrices (cyclic groups
use the closed form so that irreducible ``p`` is ``k -> exp(2 pi i p k / n)``).

    python tools/make_group_data.py
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "artifact" / "data" / "groups"


class TableGroup:
    def __init__(self, name, elements, mul, element_names):
        self.name = name
        self.elements = list(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        self.n = len(self.elements)
        self.table = np.array([[self.index[mul(a, b)] for b in self.elements] for a in self.elements])
        self.names = element_names
        self.identity = next(i for i in range(self.n) if all(self.table[i, j] == j for j in range(self.n)))
        self.inverse = [int(np.where(self.table[i] == self.identity)[0][0]) for i in range(self.n)]
        self._classes()

    def power(self, g, j):
        x = self.identity
        for _ in range(j):
            x = self.table[x, g]
        return int(x)

    def order(self, g):
        j, x = 1, g
        while x != self.identity:
            x = self.table[x, g]
            j += 1
        return j

    def _classes(self):
        seen, classes = set(), []
        for g in range(self.n):
            if g in seen:
                continue
            cls = sorted({int(self.table[self.table[h, g], self.inverse[h]]) for h in range(self.n)})
            seen.update(cls)
            classes.append(cls)
        classes.sort(key=lambda c: (self.order(c[0]), min(c)))
        self.classes = classes
        self.class_of = {g: i for i, c in enumerate(classes) for g in c}

    def powermaps(self):
        return [[self.class_of[self.power(c[0], j)] for j in range(1, self.order(c[0]) + 1)]
                for c in self.classes]


def _clean(table, tol):
    re = np.where(np.abs(table.real) < tol, 0.0, table.real)
    im = np.where(np.abs(table.imag) < tol, 0.0, table.imag)
    return re + 1j * im


def burnside_table(G: TableGroup) -> np.ndarray:
    k = len(G.classes)
    reps = [c[0] for c in G.classes]
    # a[i][j][l] = #{(x in C_i, y in C_j) : x y = rep_l}
    a = np.zeros((k, k, k))
    for i, Ci in enumerate(G.classes):
        for j, Cj in enumerate(G.classes):
            for x in Ci:
                for y in Cj:
                    l = G.class_of[int(G.table[x, y])]
                    if G.table[x, y] == reps[l]:
                        a[i, j, l] += 1
    rng = np.random.default_rng(12345)
    coeff = rng.normal(size=k)
    M = sum(coeff[i] * a[i] for i in range(k))
    _, vecs = np.linalg.eig(M)
    sizes = np.array([len(c) for c in G.classes], dtype=float)
    rows = []
    for v in vecs.T:
        w = v / v[0]  # w_j = |C_j| chi(g_j) / chi(1)
        deg2 = G.n / np.sum(w * np.conj(w) / sizes).real
        deg = round(math.sqrt(deg2))
        rows.append(w * deg / sizes)
    table = _clean(np.array(rows), 1e-12)
    order = sorted(range(k), key=lambda r: (round(table[r, 0].real),
                                            tuple(round(-x, 6) for x in table[r].real),
                                            tuple(round(-x, 6) for x in table[r].imag)))
    return table[order]


def cyclic(n):
    G = TableGroup(f"cyclic_{n}", range(n), lambda a, b: (a + b) % n, [f"r^{k}" for k in range(n)])
    # classes are singletons sorted by (order, element); reorder by element value
    G.classes = [[k] for k in range(n)]
    G.class_of = {k: k for k in range(n)}
    table = np.array([[np.exp(2j * np.pi * p * k / n) for k in range(n)] for p in range(n)])
    return G, _clean(table, 1e-15)


def dihedral(n):
    """Order 2n; elements (k, f) = s^f r^k."""
    elems = [(k, f) for f in (0, 1) for k in range(n)]

    def mul(a, b):
        k1, f1 = a
        k2, f2 = b
        return ((k2 + (k1 if f2 == 0 else -k1)) % n, (f1 + f2) % 2)

    names = [("s" if f else "") + (f"r^{k}" if k or not f else "") or "1" for k, f in elems]
    G = TableGroup(f"dihedral_{2 * n}" if n != 3 else "symmetric_3", elems, mul, names)
    return G, burnside_table(G)


def to_json(G, table, subgroups=()):
    return {
        "name": G.name,
        "order": G.n,
        "classes": [{"size": len(c), "representative": G.names[c[0]], "powermap": pm}
                    for c, pm in zip(G.classes, G.powermaps())],
        "chartable": [[[float(x.real), float(x.imag)] for x in row] for row in table],
        "subgroups": list(subgroups),
    }


def fusion(G, H, embed):
    """Class fusion of H into G given an element map H -> G."""
    return [G.class_of[G.index[embed(H.elements[c[0]])]] for c in H.classes]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    files = {}
    cyc = {n: cyclic(n) for n in range(1, 13)}
    for n, (G, T) in cyc.items():
        subs = [{"name": "trivial", "group": "cyclic_1", "fusion": [0]},
                {"name": "whole", "group": G.name, "fusion": list(range(n))}]
        for d in range(2, n):
            if n % d == 0:
                H = cyc[d][0]
                subs.append({"name": f"C{d}", "group": H.name,
                             "fusion": fusion(G, H, lambda k, s=n // d: (k * s) % n)})
        files[G.name] = to_json(G, T, subs if n > 1 else [])
    for n in range(2, 7):
        G, T = dihedral(n)
        Cn = cyc[n][0]
        C2 = cyc[2][0]
        subs = [{"name": "trivial", "group": "cyclic_1", "fusion": [0]},
                {"name": "whole", "group": G.name, "fusion": list(range(len(G.classes)))},
                {"name": f"C{n}", "group": Cn.name, "fusion": fusion(G, Cn, lambda k: (k, 0))},
                {"name": "C2_reflection", "group": C2.name, "fusion": fusion(G, C2, lambda k: (0, k))}]
        files[G.name] = to_json(G, T, subs)
    for name, data in files.items():
        (OUT / f"{name}.json").write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    print(f"wrote {len(files)} group files to {OUT}")


if __name__ == "__main__":
    main()
