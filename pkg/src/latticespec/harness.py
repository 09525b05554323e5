"""Monte Carlo experiment engine.

Each replication simulates a field, computes its transforms once and then
evaluates every requested statistic.  Replication ``r`` draws from the seed
``split_seed(seed, r)``, so the report does not depend on how many worker
threads ran the replications.
"""
from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy import special

from . import fields as fm
from .estimators import (
    FOUR_PI2,
    detrend_least_squares,
    equivalence_gap,
    estimated_field_report,
    kernel_density_grid,
    polynomial_trend,
    uniform_axis,
)
from .kernels import FAMILIES, KernelSpec, WeightTable, build_weights, make_kernel, _ALIASES
from .lattice import LatticeSpec, Partition, build_partition, fourier_grid
from .rng import split_seed
from .spectra import FourierTable, PeriodogramGrid, fourier_coefficients, periodogram

PER_REP_STATS = (
    "thm2a", "thm2c", "thm2d", "thm2e", "coro1_ks",
    "thm3a", "thm3b", "thm3c", "thm3d", "thm4_sup", "thm4_rel",
    "lemma8_gap", "thm5_suite",
)
STATISTICS = PER_REP_STATS + ("gmc",)
THM5_ROWS = ("mse", "a", "a_rel", "b_i", "b_ii", "b_iii", "b_iv", "c_i", "c_ii", "c_iii", "c_iv")
LOW_N = 8
MAX_ASPECT = 8.0
DEFAULT_TREND = ((1, 0, 2.0), (0, 1, -1.0), (2, 0, 1.5), (1, 1, 1.0), (0, 2, -2.0))


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# ---------------------------------------------------------------------------
# statistics


def normal_cdf(z):
    """Standard normal CDF via the complementary error function."""
    return 0.5 * special.erfc(-np.asarray(z, dtype=float) / math.sqrt(2.0))


def _n(table_or_pg, part: Optional[Partition]) -> Partition:
    return part if part is not None else build_partition(table_or_pg.spec)


def stat_thm2a(table: FourierTable, f_grid: np.ndarray, part: Optional[Partition] = None) -> float:
    """``(1/2|N|) sum_N (x + y) / sqrt(f)``; tends to zero."""
    part = _n(table, part)
    if not part.n_set:
        return 0.0
    idx = part.n_index
    return float(np.sum(((table.x + table.y) / np.sqrt(f_grid))[idx]) / (2 * len(part.n_set)))


def _ratio_mean(pg: PeriodogramGrid, f_grid, power: float, part) -> float:
    part = _n(pg, part)
    if not part.n_set:
        return 0.0
    return float(np.mean(((pg.values / f_grid) ** power)[part.n_index]))


def stat_thm2c(pg: PeriodogramGrid, f_grid, part: Optional[Partition] = None) -> float:
    """``(1/(4 pi^2 |N|)) sum_N I / f``; tends to one."""
    return _ratio_mean(pg, f_grid, 1.0, part) / FOUR_PI2


def stat_thm2d(pg: PeriodogramGrid, f_grid, part: Optional[Partition] = None) -> float:
    """``(1/|N|) sum_N I^2 / f^2``, unnormalized; tends to ``2 (4 pi^2)^2``."""
    return _ratio_mean(pg, f_grid, 2.0, part)


def stat_thm2e(pg: PeriodogramGrid, f_grid, q: float = 4.5, part: Optional[Partition] = None) -> float:
    """``(1/|N|) sum_N (I / f)^q``, unnormalized; stays bounded."""
    return _ratio_mean(pg, f_grid, q, part)


def thm2d_scale() -> float:
    return 2.0 * FOUR_PI2**2


def thm2e_scale(q: float) -> float:
    """q-th moment of ``4 pi^2 f`` times a unit exponential."""
    return FOUR_PI2**q * math.gamma(q + 1.0)


def stat_coro1_ks(table: FourierTable, f_grid, weights=None, part: Optional[Partition] = None) -> float:
    """Exact sup distance between the weighted coefficient CDF and the normal CDF.

    Every coefficient pair contributes two atoms of mass ``w/2`` at
    ``x / sqrt(2 pi^2 f)`` and ``y / sqrt(2 pi^2 f)``.  The supremum over z
    is attained at an atom, approached from the left or from the right.
    """
    part = _n(table, part)
    n = len(part.n_set)
    if n == 0:
        raise ValueError("empty N set: the empirical distribution is undefined")
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (n,):
            raise ValueError(f"need {n} weights, got {w.size}")
    idx = part.n_index
    scale = np.sqrt(2.0 * np.pi**2 * f_grid[idx])
    z = np.concatenate([table.x[idx] / scale, table.y[idx] / scale])
    mass = np.concatenate([w, w]) / 2.0
    order = np.argsort(z, kind="stable")
    z = z[order]
    cdf_right = np.cumsum(mass[order])
    # tied atoms: only the last position of each run is a genuine right limit
    last = np.append(z[1:] != z[:-1], True)
    first = np.insert(z[1:] != z[:-1], 0, True)
    cdf_left = np.concatenate([[0.0], cdf_right[:-1]])
    phi = normal_cdf(z)
    right = np.abs(cdf_right[last] - phi[last])
    left = np.abs(cdf_left[first] - phi[first])
    return float(max(right.max(), left.max()))


def thm1_combination(table: FourierTable, f_grid, atoms: Sequence, c) -> float:
    """``sum_i c_i s(a_i)`` for normalized coefficients ``s(j, 1) = x(j) / sqrt(2 pi^2 f)``
    and ``s(j, 2) = y(j) / sqrt(2 pi^2 f)``; ``atoms`` lists ``((j1, j2), k)``."""
    c = np.asarray(c, dtype=float)
    if len(atoms) != c.size:
        raise ValueError("one coefficient per atom required")
    out = 0.0
    for (j, k), ci in zip(atoms, c):
        i1, i2 = j[0] - 1, j[1] - 1
        val = table.x[i1, i2] if k == 1 else table.y[i1, i2]
        out += ci * val / math.sqrt(2.0 * math.pi**2 * f_grid[i1, i2])
    return float(out)


def stat_thm3(source: Union[FourierTable, PeriodogramGrid], weights: WeightTable, which: str,
              f_grid=None, q: float = 4.5, part: Optional[Partition] = None) -> float:
    """Weighted local averages of the coefficients or periodogram, sup over N.

    ``a``: ``|sum_s p_s (x + y)(j + s)|``, needs a FourierTable.
    ``b``: ``|sum_s p_s I(j + s) - 4 pi^2 f(lambda_j)|``.
    ``c``: ``sum_s p_s I(j + s)^2``.  ``d``: ``sum_s p_s I(j + s)^q``.
    """
    part = _n(source, part)
    if weights.spec != source.spec:
        raise ValueError("weights were built for a different lattice")
    if not part.n_set:
        return 0.0
    idx = part.n_index
    if which == "a":
        if not isinstance(source, FourierTable):
            raise TypeError("statistic (a) needs Fourier coefficients")
        return float(np.max(np.abs(weights.smooth(source.x + source.y)[idx])))
    pg = periodogram(source) if isinstance(source, FourierTable) else source
    if which == "b":
        if f_grid is None:
            raise ValueError("statistic (b) needs the reference spectrum")
        return float(np.max(np.abs(weights.smooth(pg.values) - FOUR_PI2 * np.asarray(f_grid))[idx]))
    if which == "c":
        return float(np.max(weights.smooth(pg.values**2)[idx]))
    if which == "d":
        return float(np.max(weights.smooth(pg.values**q)[idx]))
    raise ValueError(f"unknown item {which!r}; expected a, b, c or d")


def thm4_axes(spec: LatticeSpec, m: int = 64):
    """Fourier frequencies merged with a uniform m-point grid, per axis."""
    l1, l2 = fourier_grid(spec)
    u = uniform_axis(m)
    return np.unique(np.concatenate([l1, u])), np.unique(np.concatenate([l2, u]))


def stat_thm4_sup(estimate_values: np.ndarray, f_true: np.ndarray) -> float:
    """Sup over the evaluation grid of ``|f_hat - f|``."""
    return float(np.max(np.abs(np.asarray(estimate_values) - np.asarray(f_true))))


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    model: object
    lattices: List[LatticeSpec]
    kernel_family: str = "epanechnikov"
    bandwidth: Union[str, tuple] = (0.4, 0.4)
    replications: int = 20
    seed: int = 1
    statistics: List[str] = field(default_factory=lambda: ["thm2c"])
    weights_coro1: Union[str, list] = "equal"
    q: float = 4.5
    trend: tuple = DEFAULT_TREND
    detrend_degree: int = 2
    gmc_radii: List[int] = field(default_factory=lambda: [1, 2, 3, 4])
    gmc_alpha: float = 2.0
    grid_uniform: int = 64
    label: str = ""

    def __post_init__(self):
        if int(self.replications) < 1:
            raise ConfigError("replications", "must be at least 1")
        if not self.lattices and set(self.statistics) - {"gmc"}:
            raise ConfigError("lattices", "at least one lattice required")
        for spec in self.lattices:
            if max(spec.shape) / min(spec.shape) > MAX_ASPECT:
                raise ConfigError("lattices", f"{spec.label()} exceeds aspect ratio {MAX_ASPECT:g}")
        bad = [s for s in self.statistics if s not in STATISTICS]
        if bad:
            raise ConfigError("statistics", f"unknown {bad}; valid names: {', '.join(STATISTICS)}")
        fam = _ALIASES.get(str(self.kernel_family).lower(), str(self.kernel_family).lower())
        if fam not in FAMILIES:
            raise ConfigError("kernel.family", f"expected one of {', '.join(FAMILIES)}")
        if not isinstance(self.weights_coro1, str):
            w = np.asarray(self.weights_coro1, dtype=float)
            if abs(w.sum() - 1.0) > 1e-9:
                raise ConfigError("weights_coro1", f"custom weights sum to {w.sum():g}, not 1")
        elif self.weights_coro1 != "equal":
            raise ConfigError("weights_coro1", "expected 'equal' or a list of weights")
        needs_f = {"thm2a", "thm2c", "thm2d", "thm2e", "coro1_ks", "thm3b", "thm4_sup", "thm4_rel", "thm5_suite"}
        if needs_f & set(self.statistics) and not fm.has_closed_form(self.model):
            raise ConfigError("model", f"{type(self.model).__name__} has no closed-form spectrum, "
                                       f"required by {sorted(needs_f & set(self.statistics))}")

    def kernel_for(self, spec: LatticeSpec) -> KernelSpec:
        return make_kernel(self.kernel_family, self.bandwidth, spec)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "model": fm.model_to_dict(self.model),
            "lattices": [[s.d1, s.d2] for s in self.lattices],
            "kernel": {"family": self.kernel_family,
                       "bandwidth": self.bandwidth if isinstance(self.bandwidth, str) else list(self.bandwidth)},
            "replications": self.replications,
            "seed": self.seed,
            "statistics": list(self.statistics),
            "weights_coro1": self.weights_coro1 if isinstance(self.weights_coro1, str) else list(self.weights_coro1),
            "q": self.q,
            "trend": [list(t) for t in self.trend],
            "detrend_degree": self.detrend_degree,
            "gmc": {"radii": list(self.gmc_radii), "alpha": self.gmc_alpha},
            "grid_uniform": self.grid_uniform,
        }


def _lattice(item, where) -> LatticeSpec:
    try:
        if isinstance(item, str):
            a, b = item.lower().split("x")
            return LatticeSpec(int(a), int(b))
        a, b = item
        return LatticeSpec(int(a), int(b))
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, f"expected [d1, d2] or 'd1xd2' with d >= 2, got {item!r} ({exc})") from None


def config_from_dict(doc: dict, base_dir: Optional[str] = None) -> ExperimentConfig:
    """Build a config from parsed JSON; ``model_file`` paths resolve against ``base_dir``."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a JSON object")
    known = {"label", "model", "model_file", "lattices", "kernel", "replications", "seed", "statistics",
             "weights_coro1", "q", "trend", "detrend_degree", "gmc", "grid_uniform"}
    extra = sorted(set(doc) - known)
    if extra:
        raise ConfigError(extra[0], f"unknown key; valid keys: {', '.join(sorted(known))}")
    if "model" in doc:
        try:
            model = fm.model_from_dict(doc["model"])
        except fm.ModelSpecError as exc:
            raise ConfigError(f"model.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    elif "model_file" in doc:
        path = doc["model_file"]
        if base_dir and not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        model = fm.load_model(path)
    else:
        raise ConfigError("model", "missing (give 'model' or 'model_file')")
    if not isinstance(doc.get("lattices", []), list):
        raise ConfigError("lattices", "expected a list of lattices")
    lattices = [_lattice(x, f"lattices[{i}]") for i, x in enumerate(doc.get("lattices", []))]
    kern = doc.get("kernel", {})
    if not isinstance(kern, dict):
        raise ConfigError("kernel", "expected an object with family and bandwidth")
    bw = kern.get("bandwidth", [0.4, 0.4])
    if isinstance(bw, str):
        if not bw.startswith("pow:"):
            raise ConfigError("kernel.bandwidth", f"expected 'pow:<beta>' or a pair, got {bw!r}")
        try:
            float(bw[4:])
        except ValueError:
            raise ConfigError("kernel.bandwidth", f"bad exponent in {bw!r}") from None
    else:
        try:
            bw = tuple(float(v) for v in bw)
        except (TypeError, ValueError):
            raise ConfigError("kernel.bandwidth", f"expected a numeric pair, got {bw!r}") from None
        if len(bw) != 2 or min(bw) <= 0:
            raise ConfigError("kernel.bandwidth", "expected two positive numbers")
    stats = doc.get("statistics", ["thm2c"])
    if isinstance(stats, str) or not isinstance(stats, list):
        raise ConfigError("statistics", "expected a list of names")
    gmc = doc.get("gmc", {})
    try:
        return ExperimentConfig(
            model=model,
            lattices=lattices,
            kernel_family=str(kern.get("family", "epanechnikov")),
            bandwidth=bw,
            replications=_int(doc.get("replications", 20), "replications"),
            seed=_int(doc.get("seed", 1), "seed"),
            statistics=list(stats),
            weights_coro1=doc.get("weights_coro1", "equal"),
            q=float(doc.get("q", 4.5)),
            trend=tuple(tuple(t) for t in doc.get("trend", DEFAULT_TREND)),
            detrend_degree=_int(doc.get("detrend_degree", 2), "detrend_degree"),
            gmc_radii=[_int(r, "gmc.radii") for r in gmc.get("radii", [1, 2, 3, 4])],
            gmc_alpha=float(gmc.get("alpha", 2.0)),
            grid_uniform=_int(doc.get("grid_uniform", 64), "grid_uniform"),
            label=str(doc.get("label", "")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("<config>", str(exc)) from None


def _int(value, name) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(name, f"expected an integer, got {value!r}")
    return int(value)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        doc = json.load(fh)
    return config_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------------------
# engine


@dataclass
class ReportRow:
    lattice: str
    statistic: str
    estimate: float
    se: Optional[float]
    reps: int
    median: float
    values: List[float]
    low_n: bool = False

    def as_dict(self) -> dict:
        return {
            "lattice": self.lattice,
            "statistic": self.statistic,
            "estimate": _json_number(self.estimate),
            "se": None if self.se is None else _json_number(self.se),
            "reps": self.reps,
            "median": _json_number(self.median),
            "low_n": self.low_n,
            "values": [_json_number(v) for v in self.values],
        }


def _json_number(x: float):
    # strict JSON has no infinities; a vanishing coupling difference gives slope -inf
    return x if math.isfinite(x) else repr(float(x))


@dataclass
class ExperimentReport:
    config: dict
    rows: List[ReportRow]
    wall_clock: float = 0.0

    def get(self, statistic: str, lattice: Optional[str] = None) -> ReportRow:
        for row in self.rows:
            if row.statistic == statistic and (lattice is None or row.lattice == lattice):
                return row
        raise KeyError(f"no row for {statistic!r} on {lattice!r}")

    def as_dict(self, include_clock: bool = True) -> dict:
        out = {"config": self.config, "rows": [r.as_dict() for r in self.rows]}
        if include_clock:
            out["wall_clock_seconds"] = self.wall_clock
        return out

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.as_dict(), fh, indent=2, allow_nan=False)
            fh.write("\n")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lattice", "statistic", "estimate", "se", "reps", "median", "low_n"])
            for r in self.rows:
                w.writerow([r.lattice, r.statistic, repr(r.estimate), "" if r.se is None else repr(r.se),
                            r.reps, repr(r.median), int(r.low_n)])


def _summarize(lattice: str, name: str, values: Sequence[float], low_n: bool) -> ReportRow:
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else None
    return ReportRow(lattice, name, float(v.mean()), se, int(v.size), float(np.median(v)),
                     [float(x) for x in v], low_n)


class _LatticeContext:
    """Per-lattice objects shared read-only by all replications."""

    def __init__(self, config: ExperimentConfig, spec: LatticeSpec):
        self.spec = spec
        self.part = build_partition(spec)
        self.kernel = config.kernel_for(spec)
        stats = set(config.statistics)
        self.weights = None
        if stats & {"thm3a", "thm3b", "thm3c", "thm3d", "thm5_suite"}:
            self.weights = build_weights(spec, self.kernel)
        self.f_grid = None
        if fm.has_closed_form(config.model):
            l1, l2 = fourier_grid(spec)
            self.f_grid = np.asarray(fm.theoretical_spectrum(config.model, l1[:, None], l2[None, :]))
        self.coro_weights = None
        if "coro1_ks" in stats and not isinstance(config.weights_coro1, str):
            w = np.asarray(config.weights_coro1, dtype=float)
            if w.size != len(self.part.n_set):
                raise ConfigError("weights_coro1", f"{spec.label()} has |N|={len(self.part.n_set)}, got {w.size} weights")
            self.coro_weights = w
        if stats & {"thm4_sup", "thm4_rel"}:
            self.t4_axes = thm4_axes(spec, config.grid_uniform)
            self.t4_truth = np.asarray(fm.theoretical_spectrum(config.model, self.t4_axes[0][:, None],
                                                               self.t4_axes[1][None, :]))
        if "thm5_suite" in stats:
            self.trend = polynomial_trend(spec, config.trend)


def _replicate(config: ExperimentConfig, ctx: _LatticeContext, rep: int) -> Dict[str, float]:
    stats = config.statistics
    v = fm.simulate(config.model, ctx.spec, seed=split_seed(config.seed, rep))
    table = fourier_coefficients(v)
    pg = periodogram(table)
    f = ctx.f_grid
    out: Dict[str, float] = {}
    for name in stats:
        if name == "thm2a":
            out[name] = stat_thm2a(table, f, ctx.part)
        elif name == "thm2c":
            out[name] = stat_thm2c(pg, f, ctx.part)
        elif name == "thm2d":
            out[name] = stat_thm2d(pg, f, ctx.part) / thm2d_scale()
        elif name == "thm2e":
            out[name] = stat_thm2e(pg, f, config.q, ctx.part) / thm2e_scale(config.q)
        elif name == "coro1_ks":
            out[name] = stat_coro1_ks(table, f, ctx.coro_weights, ctx.part)
        elif name in ("thm3a", "thm3b", "thm3c", "thm3d"):
            src = table if name == "thm3a" else pg
            out[name] = stat_thm3(src, ctx.weights, name[-1], f, config.q, ctx.part)
        elif name in ("thm4_sup", "thm4_rel"):
            if "thm4_sup" not in out:
                est = kernel_density_grid(pg, ctx.kernel, *ctx.t4_axes)
                out["thm4_sup"] = stat_thm4_sup(est, ctx.t4_truth)
            if name == "thm4_rel":
                out[name] = out["thm4_sup"] / float(np.max(ctx.t4_truth))
        elif name == "lemma8_gap":
            out[name] = equivalence_gap(v, ctx.kernel)
        elif name == "thm5_suite":
            y = v + ctx.trend
            det = detrend_least_squares(y, config.detrend_degree)
            rep5 = estimated_field_report(v, det.v_hat, ctx.kernel, ctx.weights, f, config.q)
            rep5["a_rel"] = rep5["a"] / float(np.max(f))
            for key in THM5_ROWS:
                out[f"thm5_{key}"] = rep5[key]
    if "thm4_sup" in out and "thm4_sup" not in stats:
        del out["thm4_sup"]
    return out


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit count, else ``LATTICESPEC_THREADS``, else one."""
    if threads is None:
        env = os.environ.get("LATTICESPEC_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ConfigError("threads", "must be at least 1")
    return int(threads)


def _row_order(stats: Sequence[str]) -> List[str]:
    names = []
    for s in stats:
        if s == "thm5_suite":
            names.extend(f"thm5_{k}" for k in THM5_ROWS)
        elif s != "gmc":
            names.append(s)
    return names


def run_experiment(config: ExperimentConfig, threads: Optional[int] = None,
                   progress: Optional[Callable[[str], None]] = None) -> ExperimentReport:
    start = time.perf_counter()
    threads = resolve_threads(threads)
    rows: List[ReportRow] = []
    per_rep = [s for s in config.statistics if s != "gmc"]
    if per_rep:
        for spec in config.lattices:
            ctx = _LatticeContext(config, spec)
            reps = range(config.replications)
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    results = list(pool.map(lambda r: _replicate(config, ctx, r), reps))
            else:
                results = [_replicate(config, ctx, r) for r in reps]
            low = len(ctx.part.n_set) < LOW_N
            for name in _row_order(per_rep):
                rows.append(_summarize(spec.label(), name, [res[name] for res in results], low))
            if progress:
                progress(f"{spec.label()}: {config.replications} replications done")
    if "gmc" in config.statistics:
        g = fm.gmc_decay_estimate(config.model, config.gmc_radii, config.replications, config.gmc_alpha,
                                  seed=config.seed)
        for r, m, se in zip(g.radii, g.mean, g.se):
            rows.append(ReportRow("Z2", f"gmc_r{int(r)}", float(m), None if g.reps == 1 else float(se),
                                  g.reps, float(m), [float(m)]))
        slope = g.log_slope()
        rows.append(ReportRow("Z2", "gmc_slope", slope, None, g.reps, slope, [slope]))
    return ExperimentReport(config.to_dict(), rows, time.perf_counter() - start)
