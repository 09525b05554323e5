"""Recipe runner: checked-in experiment configs paired with accepted ranges.

A recipe is a JSON file with these keys:

``criterion``
    Integer id of the acceptance row the recipe covers.
``title``, ``probes``
    Free text naming the result being checked.
``budget_seconds``
    Wall-clock limit for the whole recipe; exceeding it fails the recipe.
``experiments``
    Mapping ``label -> experiment config`` in the format read by
    :func:`latticespec.harness.config_from_dict`.
``checks``
    List of range checks evaluated against the experiment reports (see
    :func:`evaluate_check` for the supported ``op`` values).
``builtin``
    Optional name of a non-Monte-Carlo check: ``exact_identities``,
    ``oracle_equivalence`` or ``suite``.

Ranges live in the JSON files, so tightening a tolerance never needs a code
change.
"""
from __future__ import annotations

import glob
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import harness
from .fields import FieldGrid
from .lattice import LatticeSpec, build_partition, reflect_index
from .spectra import (
    autocovariance_brute_force,
    dft_naive_oracle,
    fourier_coefficients,
    sample_autocovariance,
)

RECIPE_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), "recipes")


@dataclass
class CheckResult:
    name: str
    passed: bool
    observed: object
    expected: str

    def line(self) -> str:
        return f"{'ok  ' if self.passed else 'FAIL'} {self.name}: observed {self.observed}, expected {self.expected}"


@dataclass
class RecipeResult:
    criterion: int
    title: str
    path: str
    checks: List[CheckResult]
    elapsed: float
    budget: float
    reports: Dict[str, harness.ExperimentReport] = field(default_factory=dict)

    @property
    def within_budget(self) -> bool:
        return self.elapsed < self.budget

    @property
    def passed(self) -> bool:
        return self.within_budget and all(c.passed for c in self.checks)

    def summary(self) -> str:
        failed = [c.name for c in self.checks if not c.passed]
        if not self.within_budget:
            failed.append(f"budget {self.elapsed:.1f}s >= {self.budget:g}s")
        status = "PASS" if self.passed else "FAIL"
        detail = "" if self.passed else f" [failed: {', '.join(failed)}]"
        return f"criterion {self.criterion:>2} {status} {self.title} ({self.elapsed:.2f}s){detail}"


def load_recipe(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("criterion", "title", "budget_seconds"):
        if key not in doc:
            raise harness.ConfigError(key, f"missing in recipe {os.path.basename(path)}")
    if "builtin" not in doc and not doc.get("checks"):
        raise harness.ConfigError("checks", f"recipe {os.path.basename(path)} has neither checks nor a builtin")
    return doc


def recipe_paths(directory: str = RECIPE_DIR) -> List[str]:
    return sorted(glob.glob(os.path.join(directory, "*.json")), key=lambda p: load_recipe(p)["criterion"])


# ---------------------------------------------------------------------------
# checks over reports


def _row(reports, chk) -> harness.ReportRow:
    return reports[chk["experiment"]].get(chk["statistic"], chk.get("lattice"))


def _metric(row: harness.ReportRow, metric: str) -> float:
    if metric == "mean":
        return row.estimate
    if metric == "median":
        return row.median
    raise harness.ConfigError("metric", f"expected mean or median, got {metric!r}")


def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def evaluate_check(reports: Dict[str, harness.ExperimentReport], chk: dict) -> CheckResult:
    """Evaluate one check.

    Supported ``op`` values:

    ``range``
        ``metric`` (mean or median) of one row lies in ``[min, max]``; either
        bound may be omitted, and ``strict: true`` makes them exclusive.
    ``count_below``
        At least ``min_count`` replication values are ``<= threshold``
        (``< threshold`` with ``strict: true``).
    ``decreasing``
        ``metric`` is strictly decreasing along ``lattices``.
    ``ratio_range``
        ``metric`` at ``lattices[1]`` over ``metric`` at ``lattices[0]`` lies in
        ``[min, max]``; both values must be finite.
    ``all_decreasing``
        Every statistic starting with ``prefix`` is strictly decreasing in
        ``metric`` along ``lattices``.
    """
    op = chk["op"]
    name = chk.get("name", f"{op}:{chk.get('statistic', chk.get('prefix', ''))}")
    metric = chk.get("metric", "median")
    strict = bool(chk.get("strict", False))
    if op == "range":
        val = _metric(_row(reports, chk), metric)
        lo, hi = chk.get("min", -math.inf), chk.get("max", math.inf)
        ok = math.isfinite(val) and ((lo < val < hi) if strict else (lo <= val <= hi))
        bounds = f"{'(' if strict else '['}{_fmt(lo)}, {_fmt(hi)}{')' if strict else ']'}"
        return CheckResult(name, ok, _fmt(val), f"{metric} in {bounds}")
    if op == "count_below":
        vals = np.asarray(_row(reports, chk).values)
        thr = chk["threshold"]
        hits = int(np.sum(vals < thr) if strict else np.sum(vals <= thr))
        return CheckResult(name, hits >= chk["min_count"], f"{hits}/{vals.size}",
                           f">= {chk['min_count']} values {'<' if strict else '<='} {thr}")
    if op in ("decreasing", "all_decreasing"):
        rep = reports[chk["experiment"]]
        if op == "decreasing":
            stats = [chk["statistic"]]
        else:
            stats = sorted({r.statistic for r in rep.rows if r.statistic.startswith(chk["prefix"])})
        bad, seen = [], []
        for s in stats:
            seq = [_metric(rep.get(s, lat), metric) for lat in chk["lattices"]]
            seen.append(f"{s}=" + ">".join(_fmt(x) for x in seq))
            if not all(b < a for a, b in zip(seq, seq[1:])):
                bad.append(s)
        observed = "; ".join(seen) if op == "decreasing" else (f"not decreasing: {bad}" if bad else f"{len(stats)} decreasing")
        return CheckResult(name, not bad and bool(stats), observed,
                           f"{metric} strictly decreasing over {' -> '.join(chk['lattices'])}")
    if op == "ratio_range":
        rep = reports[chk["experiment"]]
        a = _metric(rep.get(chk["statistic"], chk["lattices"][0]), metric)
        b = _metric(rep.get(chk["statistic"], chk["lattices"][1]), metric)
        ratio = b / a if a != 0 else math.inf
        ok = math.isfinite(a) and math.isfinite(b) and chk["min"] <= ratio <= chk["max"]
        return CheckResult(name, ok, _fmt(ratio), f"ratio in [{chk['min']}, {chk['max']}]")
    raise harness.ConfigError("op", f"unknown check op {op!r}")


# ---------------------------------------------------------------------------
# builtin checks


def _random_field(rng: np.random.Generator, spec: LatticeSpec) -> FieldGrid:
    return FieldGrid(spec, rng.normal(size=spec.shape) + rng.normal())


def builtin_exact_identities(params: dict) -> List[CheckResult]:
    """Partition counts, coefficient symmetry, M-point closed forms and mean-shift invariance."""
    lo, hi = params.get("d_range", [2, 12])
    tol = params.get("tol", 1e-10)
    shift_tol = params.get("shift_tol", 1e-12)
    rng = np.random.default_rng(params.get("seed", 0))
    bad = {"partition": [], "symmetry": [], "m_points": [], "mean_shift": []}
    worst = {"symmetry": 0.0, "m_points": 0.0, "mean_shift": 0.0}
    for d1 in range(lo, hi + 1):
        for d2 in range(lo, hi + 1):
            spec = LatticeSpec(d1, d2)
            part = build_partition(spec)
            n, nt, m = set(part.n_set), set(part.n_tilde_set), set(part.m_set)
            if (n & nt or n & m or nt & m or (n | nt | m) != set(spec.indices())
                    or 2 * len(n) + len(m) != spec.size or len(n) != len(nt)):
                bad["partition"].append(spec.label())
            v = _random_field(rng, spec)
            tab = fourier_coefficients(v)
            x, y = tab.x, tab.y
            err = 0.0
            for j in part.n_set:
                r = reflect_index(spec, j)
                a, b = (j[0] - 1, j[1] - 1), (r[0] - 1, r[1] - 1)
                err = max(err, abs(x[a] - x[b]), abs(y[a] + y[b]))
            worst["symmetry"] = max(worst["symmetry"], err)
            if err > tol:
                bad["symmetry"].append(spec.label())
            t1 = np.arange(1, d1 + 1)[:, None]
            t2 = np.arange(1, d2 + 1)[None, :]
            root = math.sqrt(spec.size)
            closed = {
                (d1, d2): v.values.sum() / root,
                (d1 // 2, d2): np.sum((-1.0) ** t1 * v.values) / root,
                (d1, d2 // 2): np.sum((-1.0) ** t2 * v.values) / root,
                (d1 // 2, d2 // 2): np.sum((-1.0) ** (t1 + t2) * v.values) / root,
            }
            err = 0.0
            for j in part.m_set:
                err = max(err, abs(x[j[0] - 1, j[1] - 1] - closed[j]), abs(y[j[0] - 1, j[1] - 1]))
            worst["m_points"] = max(worst["m_points"], err)
            if err > tol:
                bad["m_points"].append(spec.label())
            shifted = fourier_coefficients(v + 3.7)
            idx = part.n_index
            err = float(max(np.max(np.abs(shifted.x[idx] - x[idx]), initial=0.0),
                            np.max(np.abs(shifted.y[idx] - y[idx]), initial=0.0)))
            worst["mean_shift"] = max(worst["mean_shift"], err)
            if err > shift_tol:
                bad["mean_shift"].append(spec.label())
    size = f"d in {{{lo}..{hi}}}^2"
    return [
        CheckResult("partition identities", not bad["partition"], bad["partition"] or "all hold",
                    f"disjoint cover with 2|N|+|M|=|T| for {size}"),
        CheckResult("coefficient symmetry", not bad["symmetry"], f"max err {worst['symmetry']:.2e}", f"<= {tol:g}"),
        CheckResult("M-point closed forms", not bad["m_points"], f"max err {worst['m_points']:.2e}", f"<= {tol:g}"),
        CheckResult("mean-shift invariance on N", not bad["mean_shift"], f"max err {worst['mean_shift']:.2e}",
                    f"<= {shift_tol:g}"),
    ]


def builtin_oracle_equivalence(params: dict) -> List[CheckResult]:
    """FFT against the direct coefficient sums, FFT autocovariance against the double loop."""
    rng = np.random.default_rng(params.get("seed", 0))
    shapes = [tuple(s) for s in params.get("shapes", [[7, 7], [7, 8], [8, 7], [8, 8]])]
    nfields = params.get("fields", 50)
    worst = 0.0
    for k in range(nfields):
        spec = LatticeSpec(*shapes[k % len(shapes)])
        v = _random_field(rng, spec)
        fast, slow = fourier_coefficients(v), dft_naive_oracle(v)
        scale = max(np.max(np.abs(slow.x)), np.max(np.abs(slow.y)))
        worst = max(worst, np.max(np.abs(fast.x - slow.x)) / scale, np.max(np.abs(fast.y - slow.y)) / scale)
    acov_worst = 0.0
    for _ in range(params.get("autocov_fields", 5)):
        v = _random_field(rng, LatticeSpec(6, 6))
        acov_worst = max(acov_worst, float(np.max(np.abs(sample_autocovariance(v).r_hat
                                                          - autocovariance_brute_force(v).r_hat))))
    dtol = params.get("dft_tol", 1e-9)
    atol = params.get("autocov_tol", 1e-12)
    return [
        CheckResult("FFT vs direct sums", worst < dtol, f"{worst:.2e}", f"< {dtol:g} over {nfields} fields"),
        CheckResult("autocovariance vs double loop", acov_worst < atol, f"{acov_worst:.2e}", f"< {atol:g} on 6x6"),
    ]


def _reports_equal(a: harness.ExperimentReport, b: harness.ExperimentReport) -> bool:
    return json.dumps(a.as_dict(include_clock=False), sort_keys=True) == \
        json.dumps(b.as_dict(include_clock=False), sort_keys=True)


def builtin_suite(params: dict, directory: str, threads: Optional[int] = None,
                  first: Optional[List[RecipeResult]] = None) -> List[CheckResult]:
    """Total wall clock of every other recipe, then a second run compared bit for bit."""
    if first is None:
        first = [run_recipe(p, threads) for p in recipe_paths(directory)
                 if load_recipe(p).get("builtin") != "suite"]
    total = sum(r.elapsed for r in first)
    budget = params.get("suite_budget_seconds", 300)
    mismatched = []
    for res in first:
        if not res.reports:
            continue
        doc = load_recipe(res.path)
        for label, cfg in doc["experiments"].items():
            again = harness.run_experiment(harness.config_from_dict(cfg, os.path.dirname(res.path)), threads)
            if not _reports_equal(res.reports[label], again):
                mismatched.append(f"{os.path.basename(res.path)}:{label}")
    return [
        CheckResult("suite wall clock", total < budget, f"{total:.1f}s", f"< {budget}s"),
        CheckResult("bit-reproducible reruns", not mismatched, mismatched or "all identical",
                    "identical reports apart from wall clock"),
    ]


# ---------------------------------------------------------------------------
# driver


def run_recipe(path: str, threads: Optional[int] = None, prior: Optional[List[RecipeResult]] = None) -> RecipeResult:
    doc = load_recipe(path)
    start = time.perf_counter()
    reports: Dict[str, harness.ExperimentReport] = {}
    checks: List[CheckResult] = []
    builtin = doc.get("builtin")
    params = doc.get("params", {})
    if builtin == "exact_identities":
        checks += builtin_exact_identities(params)
    elif builtin == "oracle_equivalence":
        checks += builtin_oracle_equivalence(params)
    elif builtin == "suite":
        checks += builtin_suite(params, os.path.dirname(path), threads, prior)
    elif builtin is not None:
        raise harness.ConfigError("builtin", f"unknown builtin {builtin!r}")
    for label, cfg in doc.get("experiments", {}).items():
        reports[label] = harness.run_experiment(harness.config_from_dict(cfg, os.path.dirname(path)), threads)
    for chk in doc.get("checks", []):
        checks.append(evaluate_check(reports, chk))
    elapsed = time.perf_counter() - start
    return RecipeResult(int(doc["criterion"]), doc["title"], path, checks, elapsed,
                        float(doc["budget_seconds"]), reports)


def run_all(directory: str = RECIPE_DIR, threads: Optional[int] = None) -> List[RecipeResult]:
    results: List[RecipeResult] = []
    suite_paths = []
    for p in recipe_paths(directory):
        if load_recipe(p).get("builtin") == "suite":
            suite_paths.append(p)
        else:
            results.append(run_recipe(p, threads))
    prior = list(results)
    for p in suite_paths:
        results.append(run_recipe(p, threads, prior=prior))
    return results
