"""Scenario runner: generate -> couple -> profile -> assemble -> integrate.

A scenario is one JSON document::

    {"name": ..., "family": ..., "params": {...},
     "schedule": {"param": "r", "values": [0.05, 0.02]},
     "h": {"factor": 0.25} | {"value": 0.02},
     "basepoints": [{"x": 0.0, "tag": "endpoint"}, ...],
     "delta_pairs": [[0.05, 0.1], ...], "fields": [2, 3],
     "relaxed_grid": true,
     "expect": {"h": {tag: [h0, h1, h2] | {p: [...]}}, "chi": 2,
                "min_conclusive": {"0.02": 0.9}}}

Delta pairs with delta2 >= length/100 of the limit form the relaxed grid;
they are evaluated only when the scenario or the caller asks for it.
"""
from __future__ import annotations

import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .complexes import is_prime
from .gh import coupling_from_map, natural_projection
from .surfaces import (ConfigError, FamilySpec, gen_double_cover, gen_flat_klein, gen_flat_torus,
                       gen_rp2_tube, gen_sphere_tube)
from .surfaces.base import FAMILIES, scaled
from .topology import (CONCLUSIVE, AssemblyError, HProfile, assemble_constructible,
                       euler_integral, h_profiles)

CSV_HEADER = "scenario,i_param,basepoint,point_tag,delta1,delta2,field_p,h0,h1,h2,F,status"
POINT_TYPES = {"sphere": 2, "torus": 0, "rp2": 1, "klein": 0}
SUITE = (
    ("sphere -> segment", ("sphere_to_segment",)),
    ("torus -> circle", ("torus_to_circle",)),
    ("rp2 -> segment", ("rp2_to_segment",)),
    ("klein -> circle / segment", ("klein_to_circle", "klein_to_segment")),
    ("no collapse", ("no_collapse",)),
    ("point collapse", ("point_collapse_sphere", "point_collapse_torus",
                        "point_collapse_rp2", "point_collapse_klein")),
)


def fmt(x):
    return f"{float(x):.9g}"


@dataclass
class Scenario:
    name: str
    family: str
    params: dict
    schedule_param: str
    schedule: list
    h_rule: dict
    basepoints: list
    delta_pairs: list
    fields: list
    relaxed_grid: bool = False
    expect: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc):
        try:
            sched = doc["schedule"]
            sc = cls(
                name=str(doc["name"]), family=str(doc["family"]), params=dict(doc.get("params", {})),
                schedule_param=str(sched["param"]), schedule=[float(v) for v in sched["values"]],
                h_rule=dict(doc["h"]), basepoints=[dict(b) for b in doc["basepoints"]],
                delta_pairs=[(float(a), float(b)) for a, b in doc["delta_pairs"]],
                fields=[int(p) for p in doc.get("fields", [2, 3])],
                relaxed_grid=bool(doc.get("relaxed_grid", False)), expect=dict(doc.get("expect", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed scenario: {exc!r}") from exc
        sc.validate()
        return sc

    @classmethod
    def load(cls, path):
        p = Path(path)
        if not p.exists():
            bundled = resources.files("ghcollapse") / "scenarios" / f"{path}.json"
            if not bundled.is_file():
                raise ConfigError(f"no scenario file or bundled scenario named {path!r}")
            text = bundled.read_text()
        else:
            text = p.read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def validate(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if not self.schedule:
            raise ConfigError("empty collapse schedule")
        if any(b >= a for a, b in zip(self.schedule, self.schedule[1:])):
            raise ConfigError("collapse schedule must be strictly decreasing")
        if not ("factor" in self.h_rule or "value" in self.h_rule):
            raise ConfigError("h needs 'factor' or 'value'")
        for a, b in self.delta_pairs:
            if not 0 < a < b:
                raise ConfigError(f"bad delta pair ({a}, {b})")
        for p in self.fields:
            if not is_prime(p):
                raise ConfigError(f"{p} is not prime")
        if not self.basepoints:
            raise ConfigError("no basepoints")

    def h_for(self, value):
        if "value" in self.h_rule:
            return float(self.h_rule["value"])
        return float(self.h_rule["factor"]) * value

    def family_spec(self, value):
        prm = dict(self.params)
        prm[self.schedule_param] = value
        return FamilySpec(self.family, {k: v for k, v in prm.items() if isinstance(v, (int, float))},
                          h=self.h_for(value), schedule=tuple(self.schedule))


def build_surface(family, params, h):
    """Generator dispatch by family name."""
    if family in ("sphere_tube", "no_collapse"):
        return gen_sphere_tube(params["ell"], params["r"], h)
    if family == "rp2_tube":
        return gen_rp2_tube(params["ell"], params["r"], h)
    if family == "flat_torus":
        return gen_flat_torus(params["L"], params["w"], h)
    if family == "flat_klein_circle":
        return gen_flat_klein(params["L"], params["w"], "circle", h)
    if family == "flat_klein_segment":
        return gen_flat_klein(params["L"], params["w"], "segment", h)
    if family == "double_cover":
        return gen_double_cover(params["polygon"], h)
    if family == "point_collapse":
        kind = params.get("type")
        if kind not in POINT_TYPES:
            raise ConfigError(f"point collapse type must be one of {sorted(POINT_TYPES)}")
        base = {"sphere": "sphere_tube", "torus": "flat_torus", "rp2": "rp2_tube",
                "klein": "flat_klein_circle"}[kind]
        return scaled(build_surface(base, params, h), float(params["scale"]))
    raise ConfigError(f"unknown family {family!r}")


@dataclass
class Row:
    i_param: float
    basepoint: float
    tag: str
    deltas: tuple
    p: int
    h: tuple | None
    F: int | None
    status: str
    grid: str

    def csv(self, scenario):
        hs = ("", "", "") if self.h is None else tuple(str(v) for v in self.h)
        F = "" if self.F is None else str(self.F)
        return ",".join([scenario, fmt(self.i_param), fmt(self.basepoint), self.tag,
                         fmt(self.deltas[0]), fmt(self.deltas[1]), str(self.p), *hs, F, self.status])


@dataclass
class Report:
    scenario: Scenario
    rows: list
    integrals: dict          # (i, deltas, p) -> int
    mismatches: list
    skipped_pairs: list
    chi_expected: int | None

    @property
    def chi_integral(self):
        vals = sorted(set(self.integrals.values()))
        if len(vals) == 1:
            return vals[0]
        return vals or None

    @property
    def match(self):
        return not self.mismatches

    def summary(self):
        return {
            "scenario": self.scenario.name,
            "chi_expected": self.chi_expected,
            "chi_integral": self.chi_integral,
            "match": self.match,
            "cells_total": len(self.rows),
            "cells_conclusive": sum(r.status == CONCLUSIVE for r in self.rows),
        }

    def csv(self, grid=None):
        out = io.StringIO()
        out.write(CSV_HEADER + "\n")
        for r in self.rows:
            if grid is None or r.grid == grid:
                out.write(r.csv(self.scenario.name) + "\n")
        return out.getvalue()


def limit_length(limit):
    return limit.length if limit.kind in ("segment", "circle") else None


def _resolve_basepoint(S, limit, bp):
    if limit.kind == "surface":
        # nearest cylinder vertex to the axial parameter s and angle theta
        c = S.coords
        s = np.asarray(c["s"])
        th = np.asarray(c.get("theta", np.zeros(S.n)))
        cost = np.abs(s - bp["s"]) + np.abs(np.angle(np.exp(1j * (th - bp.get("theta", 0.0)))))
        cost = np.where(np.asarray(c.get("part", np.zeros(S.n))) == 0, cost, np.inf)
        return float(np.argmin(cost))
    x = float(bp["x"])
    if limit.kind == "segment" and bp.get("at") == "end":
        x = limit.length
    if limit.kind == "segment" and bp.get("at") == "mid":
        x = limit.length / 2
    limit.check_param(x)
    return x


def run_scenario(sc: Scenario, fields=None, threads=1, relaxed=None):
    fields = list(fields or sc.fields)
    relaxed = sc.relaxed_grid if relaxed is None else relaxed
    rows, mismatches, skipped = [], [], []
    integrals = {}
    expect_h = sc.expect.get("h", {})
    for value in sc.schedule:
        fam = sc.family_spec(value)
        prm = dict(sc.params)
        prm[sc.schedule_param] = value
        S = build_surface(sc.family, prm, fam.h)
        f = natural_projection(S, fam)
        C = coupling_from_map(f)
        X = C.limit
        length = limit_length(X)
        pairs = []
        for d in sc.delta_pairs:
            grid = "relaxed" if (length is not None and d[1] >= length / 100) else "safe"
            if grid == "relaxed" and not relaxed:
                skipped.append((value, d))
                continue
            pairs.append((d, grid))
        points = [(_resolve_basepoint(S, X, bp), bp.get("tag", "interior")) for bp in sc.basepoints]
        tasks = [(x, tag, d, grid) for x, tag in points for d, grid in pairs]

        def work(task):
            x, tag, d, grid = task
            return [(pr, grid) for pr in h_profiles(C, x, d[0], d[1], fields, tag=tag, collapse_index=value)]

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(work, tasks))
        else:
            results = [work(t) for t in tasks]
        cell_rows = []
        for res in results:
            for pr, grid in res:
                cell_rows.append(Row(value, pr.basepoint, pr.tag, pr.deltas, pr.field_p,
                                     pr.h, pr.F, pr.status, grid))
        cell_rows.sort(key=lambda r: (r.basepoint, r.deltas, r.p))
        rows += cell_rows
        # expectations on conclusive cells
        for r in cell_rows:
            if r.status != CONCLUSIVE or r.tag not in expect_h:
                continue
            want = expect_h[r.tag]
            if isinstance(want, dict):
                want = want.get(str(r.p))
            if want is not None and list(r.h) != list(want):
                mismatches.append(f"i={fmt(value)} x={fmt(r.basepoint)} ({r.tag}) "
                                  f"delta=({fmt(r.deltas[0])},{fmt(r.deltas[1])}) p={r.p}: "
                                  f"expected h={list(want)} got h={list(r.h)}")
        mc = sc.expect.get("min_conclusive", {})
        for key, frac in mc.items():
            if abs(float(key) - value) < 1e-12:
                got = np.mean([r.status == CONCLUSIVE for r in cell_rows]) if cell_rows else 0.0
                if got < frac:
                    mismatches.append(f"i={fmt(value)}: conclusive fraction {got:.3f} < {frac}")
        # assemble F per (delta pair, p)
        for d, _ in pairs:
            for p in fields:
                profs = [HProfile(r.h, r.F, r.p, r.basepoint, r.deltas, value, r.status, r.tag)
                         for r in cell_rows if r.deltas == d and r.p == p]
                if not _assemblable(profs, X):
                    continue
                try:
                    F = assemble_constructible(profs, X)
                except AssemblyError as exc:
                    mismatches.append(f"i={fmt(value)} delta={d} p={p}: {exc}")
                    continue
                integrals[(value, d, p)] = euler_integral(F)
    chi = sc.expect.get("chi")
    for key, val in sorted(integrals.items()):
        if chi is not None and val != chi:
            mismatches.append(f"i={fmt(key[0])} delta={key[1]} p={key[2]}: integral {val} != chi {chi}")
    if chi is not None and not integrals:
        mismatches.append("no (i, delta, p) cell had enough conclusive profiles to integrate F")
    return Report(sc, rows, integrals, mismatches, skipped, chi)


def _assemblable(profs, X):
    good = [p for p in profs if p.conclusive]
    if X.kind != "segment":
        return bool(good)
    inner = [p for p in good if 1e-12 < p.basepoint < X.length - 1e-12]
    ends = [any(abs(p.basepoint - e) <= 1e-12 for p in good) for e in (0.0, X.length)]
    return bool(inner) and all(ends)


def write_report(rep: Report, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = rep.scenario.name
    (out / f"{name}_safe.csv").write_text(rep.csv("safe"))
    (out / f"{name}_relaxed.csv").write_text(rep.csv("relaxed"))
    (out / f"{name}_summary.json").write_text(json.dumps(rep.summary(), sort_keys=True) + "\n")


def verify_all(fields=None, threads=1, out_dir=None, relaxed=None, stream=None):
    """Run the bundled suite; returns (ok, lines, reports)."""
    lines, reports, ok = [], [], True
    for label, names in SUITE:
        parts = []
        for nm in names:
            rep = run_scenario(Scenario.load(nm), fields=fields, threads=threads, relaxed=relaxed)
            reports.append(rep)
            if out_dir is not None:
                write_report(rep, out_dir)
            parts.append(rep)
        good = all(r.match for r in parts)
        ok &= good
        desc = "; ".join(f"{r.scenario.name}: ∫F dχ = {r.chi_integral} = χ = {r.chi_expected}"
                         for r in parts)
        line = f"{label:<26} {desc}  [{'ok' if good else 'MISMATCH'}]"
        lines.append(line)
        if stream is not None:
            print(line, file=stream, flush=True)
    return ok, lines, reports
