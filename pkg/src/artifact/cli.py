"""Command-line entry point: ``artifact <command> --config FILE [--out DIR]``.

Exit codes: 0 success, 1 domain failure (a check failed or a domain error was
raised), 2 usage or configuration error.  Every output file carries the hash
of the resolved configuration; identical configurations give byte-identical
files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, groups, mutation, path, qde
from .errors import (ArtifactError, GrowthCollision, InvalidGroupData, OmegaViolation,
                     PatternViolation)
from .rings import make_torus_params, torus_from_s
from .series import SeriesConfig

log = logging.getLogger("artifact")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_COMPLEX = {"oneOf": [{"type": "number"},
                      {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}
_TORUS = {
    "m": {"type": "integer", "minimum": 2},
    "z": {"type": "array", "items": _COMPLEX},
    "s": {"type": "array", "items": _COMPLEX},
}
_SERIES = {
    "tol": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "max_terms": {"type": "integer", "minimum": 10},
    "precision": {"enum": ["double", "dd"]},
}
_RAY = {
    "theta": {"type": "number"},
    "r_min": {"type": "number", "exclusiveMinimum": 0},
    "r_max": {"type": "number", "exclusiveMinimum": 0},
    "samples": {"type": "integer", "minimum": 16},
}

SCHEMAS = {
    "qde-check": {
        "type": "object",
        "properties": {**_TORUS, **_SERIES, "theta": {"type": "number"},
                       "r0": {"type": "number", "exclusiveMinimum": 0},
                       "points": {"type": "integer", "minimum": 1},
                       "max_abs_q": {"type": "number", "exclusiveMinimum": 0},
                       "residue_tol": {"type": "number", "exclusiveMinimum": 0},
                       "residual_tol": {"type": "number", "exclusiveMinimum": 0},
                       "overlap_tol": {"type": "number", "exclusiveMinimum": 0}},
        "required": ["m"],
        "additionalProperties": False,
    },
    "path-run": {
        "type": "object",
        "properties": {**_TORUS, **_SERIES, **_RAY,
                       "offset": {"oneOf": [{"type": "integer"}, {"const": "sector"}]},
                       "verify_growth": {"type": "boolean"}},
        "required": ["m", "theta", "r_min", "r_max"],
        "additionalProperties": False,
    },
    "geometric-start": {
        "type": "object",
        "properties": {**_TORUS, **_SERIES, **_RAY,
                       "reading": {"enum": ["literal", "consistent"]},
                       "synthetic": {"type": "boolean"},
                       "strict": {"type": "boolean"}},
        "required": ["m", "theta", "r_min", "r_max"],
        "additionalProperties": False,
    },
    "induce": {
        "type": "object",
        "properties": {
            "group": {"type": "string"},
            "chi_v": {"type": "array", "items": _COMPLEX},
            "m": {"type": "integer", "minimum": 2},
            "maxdeg": {"type": "integer", "minimum": 0},
            "blocks": {"type": "array", "items": {
                "type": "object",
                "properties": {"orbit_length": {"type": "integer", "minimum": 1},
                               "subgroup": {"type": "string"},
                               "lift": {"type": "boolean"}},
                "required": ["orbit_length", "subgroup"],
                "additionalProperties": False}},
            "expected_rank": {"type": "integer", "minimum": 0},
            "frobenius_trials": {"type": "integer", "minimum": 0},
        },
        "required": ["group", "chi_v", "m"],
        "additionalProperties": False,
    },
    "mutate": {
        "type": "object",
        "properties": {
            "m": {"type": "integer", "minimum": 2},
            "theta": {"type": "number"},
            "offset": {"oneOf": [{"type": "integer"}, {"const": "sector"}]},
            "objects": {"type": "array", "items": {
                "type": "object",
                "properties": {"beilinson": {"type": "array", "items": {"type": "integer"}},
                               "offset": {"type": "integer"},
                               "twist": {"type": "array", "items": {"type": "integer"}},
                               "label": {"type": "string"},
                               "growth": {"type": "integer", "minimum": 0}},
                "required": ["beilinson"]}},
            "fit": {"type": "object", "properties": {
                **_TORUS, "r_min": {"type": "number"}, "r_max": {"type": "number"},
                "samples": {"type": "integer", "minimum": 8}}},
        },
        "required": ["m", "theta"],
        "additionalProperties": False,
    },
}

DEFAULTS = {
    "qde-check": {"theta": 0.05, "r0": 3.0, "points": 5, "max_abs_q": 10.0, "tol": 1e-12,
                  "max_terms": 500, "precision": "double", "residue_tol": 1e-8,
                  "residual_tol": 1e-6, "overlap_tol": 1e-6},
    "path-run": {"samples": 256, "offset": "sector", "tol": 1e-12, "max_terms": 500,
                 "precision": "double", "verify_growth": False},
    "geometric-start": {"samples": 256, "reading": "consistent", "synthetic": False, "strict": False,
                        "tol": 1e-12, "max_terms": 500, "precision": "double"},
    "induce": {"frobenius_trials": 50},
    "mutate": {"offset": 0},
}


class UsageError(Exception):
    pass


# -------------------------------------------------------------- utilities


def _c(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def _cj(x: complex) -> list:
    return [float(x.real), float(x.imag)]


def _finite(x):
    """JSON-safe float."""
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")


def _load_config(spec: str) -> dict:
    p = Path(spec)
    if p.is_file():
        text = p.read_text()
    else:
        bundled = resources.files("artifact") / "data" / "configs" / f"{spec}.json"
        if not bundled.is_file():
            raise UsageError(f"config {spec!r} is neither a file nor a bundled config")
        text = bundled.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def resolve_config(command: str, raw: dict, args) -> dict:
    cfg = {**DEFAULTS.get(command, {}), **raw}
    if getattr(args, "precision", None) and "precision" in SCHEMAS[command]["properties"]:
        cfg["precision"] = args.precision
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        raise UsageError(f"config error: {exc.message}") from exc
    cfg["_flags"] = {"s_convention": args.s_convention, "seed": args.seed}
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps({"version": __version__, "config": cfg}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _torus(cfg: dict):
    m = cfg["m"]
    if "z" in cfg:
        z = [_c(v) for v in cfg["z"]]
        if len(z) != m:
            raise UsageError(f"z has {len(z)} entries, expected m = {m}")
        return make_torus_params(m, z)
    if "s" in cfg:
        s = [_c(v) for v in cfg["s"]]
        if len(s) != m:
            raise UsageError(f"s has {len(s)} entries, expected m = {m}")
        return torus_from_s(s, cfg["_flags"]["s_convention"])
    raise UsageError("config needs either 'z' or 's'")


def _series(cfg: dict) -> SeriesConfig:
    return SeriesConfig(tol=cfg["tol"], max_terms=cfg["max_terms"], precision=cfg["precision"])


class Output:
    """Collects output files and writes each atomically."""

    def __init__(self, outdir: Path, digest: str, command: str, cfg: dict):
        self.outdir = outdir
        self.digest = digest
        self.manifest = {"tool": "artifact", "version": __version__, "command": command,
                         "config": cfg, "config_hash": digest}

    def _write(self, name: str, text: str):
        self.outdir.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.outdir, prefix=f".{name}.")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, self.outdir / name)

    def json(self, name: str, payload: dict):
        body = {"manifest": {"config_hash": self.digest, "version": __version__}, **payload}
        self._write(name, json.dumps(body, indent=2, sort_keys=True, ensure_ascii=False) + "\n")

    def csv(self, name: str, header: list, rows: list):
        buf = io.StringIO()
        buf.write(f"# config_hash={self.digest}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["%.17g" % x if isinstance(x, float) else x for x in row])
        self._write(name, buf.getvalue())

    def finish(self):
        self._write("manifest.json", json.dumps(self.manifest, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------- commands


def cmd_qde_check(cfg: dict, out: Output) -> int:
    tp = _torus(cfg)
    sc = _series(cfg)
    rng = np.random.default_rng(cfg["_flags"]["seed"])
    m = tp.m
    qs = [float(rng.uniform(0.1, cfg["max_abs_q"])) * np.exp(1j * float(rng.uniform(-np.pi, np.pi)))
          for _ in range(cfg["points"])]

    worst_res = 0.0
    for q in qs:
        for J in range(1, m + 1):
            for rt in range(6):
                a = qde.jackson_term(J, rt, q, tp).values
                b = qde.residue_by_quadrature(J, rt, q, tp).values
                worst_res = max(worst_res, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))

    worst_qde = 0.0
    for q in qs:
        L = complex(np.log(q))
        for J in range(1, m + 1):
            w = np.zeros(m, dtype=complex)
            w[J - 1] = 1.0

            def f(LL, w=w):
                return qde.fundamental_apply(w, None, tp, sc, logq=LL).values()

            worst_qde = max(worst_qde, qde.qde_residual(f, L, tp))

    worst_overlap = 0.0
    for r in (2.25, 2.5, 2.75, 3.0):
        a = qde.fundamental_frame(cfg["theta"], r, tp, sc)
        b = qde.fundamental_frame(cfg["theta"], r, tp, sc, strategy="hybrid", r0=2.0)
        for i in range(len(a.columns)):
            va, vb = a.values(i), b.values(i)
            worst_overlap = max(worst_overlap, float(np.max(np.abs(va - vb)) / np.max(np.abs(va))))

    checks = {
        "residue_vs_quadrature": {"max_rel_error": worst_res, "tol": cfg["residue_tol"],
                                  "pass": worst_res <= cfg["residue_tol"]},
        "qde_residual": {"max_rel_residual": worst_qde, "tol": cfg["residual_tol"],
                         "pass": worst_qde <= cfg["residual_tol"]},
        "series_vs_ode": {"max_rel_error": worst_overlap, "tol": cfg["overlap_tol"],
                          "pass": worst_overlap <= cfg["overlap_tol"]},
    }
    ok = all(c["pass"] for c in checks.values())
    out.json("qde_check.json", {"torus": tp.to_json(), "q_points": [_cj(q) for q in qs],
                                "checks": checks, "pass": ok})
    return EXIT_OK if ok else EXIT_FAIL


def _offset(cfg, m):
    off = cfg.get("offset", 0)
    return mutation.sector_offset(cfg["theta"], m) if off == "sector" else int(off)


def cmd_path_run(cfg: dict, out: Output) -> int:
    tp = _torus(cfg)
    theta = cfg["theta"]
    ok, margin = mutation.is_admissible(theta, tp.m)
    if not ok:
        print(f"theta={theta} is inadmissible (margin {margin:.3g})", file=sys.stderr)
        out.json("path_summary.json", {"admissible": False, "margin": margin})
        return EXIT_FAIL
    pc = path.PathConfig(theta, cfg["r_min"], cfg["r_max"], tp, cfg["samples"],
                         cfg["_flags"]["s_convention"], _series(cfg))
    start = mutation.beilinson_collection(tp.m, _offset(cfg, tp.m))
    res = mutation.sort_collection(start, theta)
    coll = res.collection
    fitted = None
    if cfg["verify_growth"]:
        grid = np.linspace(0.4 * cfg["r_max"], cfg["r_max"], 64)
        fitted = list(mutation.assign_growth(coll, theta, tp, grid, pc.series).sigma)
    trace = path.phase_trace(coll, pc)
    r_star, _ = path.gap_report(trace)
    try:
        glue = path.gluing_data(trace, cfg["r_max"])
        gluing = {"r": float(trace.r[-1]), "shifts": [e.p for e in glue],
                  "descriptor": path.sod_descriptor(glue)}
    except ArtifactError as exc:
        gluing = {"error": str(exc)}
    tails = []
    n = len(coll)
    for i in range(n):
        for j in range(n):
            if i != j:
                est = path.quasi_convergence_estimator(trace, i, j, theta, res.sigma, tp.m)
                tails.append({"pair": [i, j], "tail": _cj(est.tail), "predicted": _cj(est.predicted),
                              "error": est.tail_error})
    support = path.support_ratio(coll, trace, pc.eval_tuple(), tp)
    out.csv("trace.csv", ["r", "label", "re_z", "im_z", "log_abs_z", "phi", "p"], trace.csv_rows())
    out.csv("support.csv", ["r", "support_ratio"], [[float(r), float(c)] for r, c in zip(trace.r, support)])
    out.json("path_summary.json", {
        "admissible": True, "margin": margin, "theta": theta, "torus": tp.to_json(),
        "start": [o.label for o in start.objects],
        "mutation_log": [s.to_json() for s in res.steps],
        "inversions": list(res.inversions),
        "sorted": [o.label for o in coll.objects], "sigma": list(res.sigma),
        "fitted_sigma": fitted,
        "r_star": r_star, "gluing": gluing, "estimator_tails": tails,
        "support_ratio_max": _finite(np.max(support)), "grid_points": len(trace.r),
        "exceptional": mutation.verify_exceptional(coll).to_json(),
    })
    return EXIT_OK


def cmd_geometric_start(cfg: dict, out: Output) -> int:
    if cfg["m"] != 3:
        raise UsageError("geometric-start: m=3 only")
    theta = cfg["theta"]
    ok, margin = mutation.is_admissible(theta, 3)
    if not ok:
        print(f"theta={theta} is inadmissible (margin {margin:.3g})", file=sys.stderr)
        return EXIT_FAIL
    res = mutation.sort_collection(mutation.beilinson_collection(3, mutation.sector_offset(theta, 3)), theta)
    grid = np.geomspace(cfg["r_min"], cfg["r_max"], cfg["samples"])
    if cfg["synthetic"]:
        u = [float(mutation.rotated_roots(theta, 3)[s].imag) for s in res.sigma]
        trace = path.linear_phase_trace(u, grid, tuple(o.label for o in res.collection.objects))
        torus = None
    else:
        tp = _torus(cfg)
        torus = tp.to_json()
        pc = path.PathConfig(theta, cfg["r_min"], cfg["r_max"], tp, cfg["samples"],
                             cfg["_flags"]["s_convention"], _series(cfg))
        trace = path.phase_trace(res.collection, pc)
    plan = path.geometric_start_plan(trace, res.sigma, theta, cfg["reading"], cfg["strict"])
    out.json("plan.json", {"torus": torus, "synthetic": cfg["synthetic"],
                           "collection": [o.label for o in res.collection.objects], **plan.to_json()})
    return EXIT_OK


def cmd_induce(cfg: dict, out: Output) -> int:
    G = groups.load_group(cfg["group"])
    chi_v = np.array([_c(v) for v in cfg["chi_v"]])
    if len(chi_v) != G.nclasses:
        raise UsageError(f"chi_v has {len(chi_v)} entries for {G.nclasses} classes")
    m = cfg["m"]
    blocks = [groups.Block(b["orbit_length"], b["subgroup"], b.get("lift", True))
              for b in cfg.get("blocks", [{"orbit_length": 1, "subgroup": "whole"}] * m)]
    expected = cfg.get("expected_rank", m * G.nclasses)
    frob = {}
    for name in sorted(G.subgroups):
        H, fusion = groups.subgroup(G, name)
        frob[name] = groups.frobenius_discrepancy(G, H, fusion, cfg["frobenius_trials"],
                                                  cfg["_flags"]["seed"])
    payload = {"group": G.name, "m": m,
               "decomposition_of_v": groups.decompose(chi_v, G),
               "frobenius_max_discrepancy": frob}
    try:
        report = groups.verify_g_sod_projective(G, chi_v, m, cfg.get("maxdeg"))
        payload["hom"] = report.to_json()
        violations = []
    except PatternViolation as exc:
        violations = [list(v) for v in exc.violations]
        payload["hom"] = None
    coll = groups.induced_collection(G, blocks)
    rank = groups.block_rank_check(G, blocks, expected)
    payload.update({"violations": violations,
                    "induced_collection": [o.to_json() for o in coll],
                    "count": len(coll), "rank_check": rank.to_json()})
    out.json("induce_report.json", payload)
    return EXIT_OK if not violations and rank.ok else EXIT_FAIL


def cmd_mutate(cfg: dict, out: Output) -> int:
    m, theta = cfg["m"], cfg["theta"]
    ok, margin = mutation.is_admissible(theta, m)
    if not ok:
        print(f"theta={theta} is inadmissible (margin {margin:.3g})", file=sys.stderr)
        return EXIT_FAIL
    if "objects" in cfg:
        coll = mutation.Collection.from_json({"m": m, "objects": cfg["objects"]})
    else:
        coll = mutation.beilinson_collection(m, _offset(cfg, m))
    if "fit" in cfg:
        fit = {**cfg["fit"], "_flags": cfg["_flags"]}
        fit.setdefault("m", m)
        tp = _torus(fit)
        grid = np.linspace(fit.get("r_min", 20.0), fit.get("r_max", 50.0), fit.get("samples", 64))
        coll = mutation.assign_growth(coll, theta, tp, grid)
    res = mutation.sort_collection(coll, theta)
    rep = mutation.verify_exceptional(res.collection)
    out.json("collection.json", {"theta": theta, "margin": margin,
                                 "input": [o.label for o in coll.objects],
                                 "collection": res.collection.to_json(), "sigma": list(res.sigma),
                                 "inversions": list(res.inversions),
                                 "exceptional": rep.to_json()})
    return EXIT_OK if rep.ok else EXIT_FAIL


COMMANDS = {
    "qde-check": cmd_qde_check,
    "path-run": cmd_path_run,
    "geometric-start": cmd_geometric_start,
    "induce": cmd_induce,
    "mutate": cmd_mutate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"artifact {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True,
                        help="JSON config file, or the name of a bundled config")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--s-convention", choices=["half", "direct"], default="half",
                        help="map a supplied s to z by z = s/2 (half) or z = s (direct)")
        sp.add_argument("--precision", choices=["double", "dd"], default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args.command, _load_config(args.config), args)
        digest = config_hash(cfg)
        out = Output(Path(args.out), digest, args.command, cfg)
        code = COMMANDS[args.command](cfg, out)
        out.finish()
        return code
    except (UsageError, OmegaViolation, InvalidGroupData) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GrowthCollision as exc:
        print(f"GrowthCollision: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ArtifactError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
