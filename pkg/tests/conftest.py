import math
from collections import OrderedDict

import numpy as np
import pytest

from artifact.rings import make_torus_params

# Reference point used throughout: generic, with a complex coordinate so that
# no accidental real symmetry hides sign errors.
REF_Z = (0.1, 0.37 + 0.2j, -0.45)
REF_THETA = 0.05


def random_torus(rng, m, margin=0.05, spread=0.45):
    """A point of the parameter space at least ``margin`` away from the
    walls ``z_i - z_j in Z``."""
    while True:
        z = rng.uniform(-spread, spread, m) + 1j * rng.uniform(-0.3, 0.3, m)
        try:
            tp = make_torus_params(m, list(z))
        except ValueError:
            continue
        if tp.margin >= margin:
            return tp


@pytest.fixture
def tp3():
    return make_torus_params(3, REF_Z)


@pytest.fixture
def tp2():
    return make_torus_params(2, (0.15, -0.3 + 0.1j))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# ------------------------------------------------------- acceptance ledger

_RESULTS: "OrderedDict[str, list]" = OrderedDict()


class AcceptanceRecorder:
    """Collects sub-results per criterion; a criterion passes only if every
    part passes.  The summary is printed at the end of the session."""

    def __call__(self, criterion, part, ok, detail="", seconds=None):
        entry = (part, bool(ok), detail, seconds)
        _RESULTS.setdefault(criterion, []).append(entry)
        status = "PASS" if ok else "FAIL"
        t = "" if seconds is None else f" [{seconds:.1f}s]"
        print(f"{status} {criterion} / {part}: {detail}{t}")


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion, parts in _RESULTS.items():
        ok = all(p[1] for p in parts)
        total = sum(p[3] for p in parts if p[3] is not None)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}  ({total:.1f}s)")
        for part, pok, detail, _ in parts:
            tr.write_line(f"        {'pass' if pok else 'FAIL'}  {part}: {detail}")


def finite(x):
    return x is not None and math.isfinite(x)
