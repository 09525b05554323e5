"""Random-field models on Z^2: simulation, couplings and closed-form spectra.

Models are finite-window moving averages, second-order Volterra fields and
contractive spatial autoregressions driven by i.i.d. innovations.  The
innovation at site ``i`` is a pure function of ``(seed, stream, i)``; see
:mod:`latticespec.rng`.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np
from scipy import special

from . import rng
from .lattice import LatticeSpec

Site = Tuple[int, int]

SWEEP_TOL = 1e-10
MAX_SWEEPS = 100_000


class ModelSpecError(ValueError):
    """Invalid model definition; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


def sup_norm(s) -> int:
    return max(abs(int(s[0])), abs(int(s[1])))


# ---------------------------------------------------------------------------
# innovations


@dataclass(frozen=True)
class InnovationSpec:
    """Centered i.i.d. innovation law.

    ``scale`` is sigma (gaussian), the half-width b (uniform on [-b, b]) or
    the scale of a Student-t with ``df`` degrees of freedom.
    """

    distribution: str = "gaussian"
    scale: float = 1.0
    df: Optional[float] = None
    seed: int = 0
    allow_low_df: bool = False

    def __post_init__(self):
        if self.distribution not in ("gaussian", "uniform", "student_t"):
            raise ModelSpecError("innovation.distribution", f"unknown distribution {self.distribution!r}")
        if not self.scale > 0:
            raise ModelSpecError("innovation.scale", "must be positive")
        if self.distribution == "student_t":
            if self.df is None:
                raise ModelSpecError("innovation.df", "required for student_t")
            floor = 2.0 if self.allow_low_df else 8.0
            if not self.df > floor:
                raise ModelSpecError("innovation.df", f"must exceed {floor:g}")

    @property
    def variance(self) -> float:
        if self.distribution == "gaussian":
            return self.scale**2
        if self.distribution == "uniform":
            return self.scale**2 / 3.0
        return self.scale**2 * self.df / (self.df - 2.0)

    def draw(self, seed: int, stream: int, i1, i2) -> np.ndarray:
        u = rng.uniform_at(seed, stream, i1, i2)
        if self.distribution == "gaussian":
            return self.scale * special.ndtri(u)
        if self.distribution == "uniform":
            return self.scale * (2.0 * u - 1.0)
        return self.scale * special.stdtrit(self.df, u)


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class WhiteNoise:
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    mean: float = 0.0
    variant = "WhiteNoise"

    @property
    def coefficients(self) -> Dict[Site, float]:
        return {(0, 0): 1.0}


@dataclass(frozen=True)
class LinearMA:
    """``V(t) = mean + sum_s a_s eps(t - s)`` over a finite window."""

    coefficients: Dict[Site, float]
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    mean: float = 0.0
    variant = "LinearMA"

    def __post_init__(self):
        if not self.coefficients:
            raise ModelSpecError("coefficients", "empty coefficient support")
        coeffs = {(int(s[0]), int(s[1])): float(a) for s, a in self.coefficients.items()}
        object.__setattr__(self, "coefficients", coeffs)


@dataclass(frozen=True)
class Volterra2:
    """``V(t) = mean + sum a_{s1,s2} eps(t - s1) eps(t - s2)`` with ``a_{s,s} = 0``."""

    coefficients: Dict[Tuple[Site, Site], float]
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    mean: float = 0.0
    variant = "Volterra2"

    def __post_init__(self):
        if not self.coefficients:
            raise ModelSpecError("coefficients", "empty coefficient support")
        coeffs = {}
        for (s1, s2), a in self.coefficients.items():
            s1, s2 = (int(s1[0]), int(s1[1])), (int(s2[0]), int(s2[1]))
            if s1 == s2 and a != 0:
                raise ModelSpecError("coefficients", f"diagonal entry {s1} must be zero")
            coeffs[(s1, s2)] = float(a)
        object.__setattr__(self, "coefficients", coeffs)


@dataclass(frozen=True)
class NonlinearAR:
    """``V(t) = mean + G({V(t - s)}; eps(t))`` with a contraction ``G``.

    form ``affine``:  G = sum_s u_s v(-s) + eps
    form ``tanh``:    G = sum_s u_s tanh(v(-s)) + eps
    The recursion acts on the centered field.
    """

    weights: Dict[Site, float]
    form: str = "affine"
    innovation: InnovationSpec = field(default_factory=InnovationSpec)
    mean: float = 0.0
    variant = "NonlinearAR"

    def __post_init__(self):
        if not self.weights:
            raise ModelSpecError("weights", "empty neighbourhood")
        w = {(int(s[0]), int(s[1])): float(u) for s, u in self.weights.items()}
        if (0, 0) in w:
            raise ModelSpecError("weights", "neighbourhood must not contain the origin")
        if any(u < 0 for u in w.values()):
            raise ModelSpecError("weights", "weights must be nonnegative")
        if not sum(w.values()) < 1.0:
            raise ModelSpecError("weights", "weights must sum to less than 1")
        if self.form not in ("affine", "tanh"):
            raise ModelSpecError("form", f"unknown form {self.form!r}")
        object.__setattr__(self, "weights", w)

    @property
    def margin(self) -> int:
        """Expansion of the simulation box needed for 1e-10 boundary error."""
        total = sum(self.weights.values())
        reach = max(sup_norm(s) for s in self.weights)
        if total == 0:
            return reach
        return int(math.ceil(math.log(SWEEP_TOL) / math.log(total))) * reach


FieldModel = Union[WhiteNoise, LinearMA, Volterra2, NonlinearAR]


def geometric_ma(rho: float, radius: int, **kwargs) -> LinearMA:
    """Moving average with ``a_s = rho ** ||s||`` on the window ``||s|| <= radius``."""
    coeffs = {
        (s1, s2): rho ** max(abs(s1), abs(s2))
        for s1 in range(-radius, radius + 1)
        for s2 in range(-radius, radius + 1)
    }
    return LinearMA(coeffs, **kwargs)


# ---------------------------------------------------------------------------
# field container


@dataclass(frozen=True)
class FieldGrid:
    """Observations on T, stored as ``values[t1 - 1, t2 - 1]``."""

    spec: LatticeSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.spec.shape:
            raise ValueError(f"values shape {v.shape} does not match lattice {self.spec.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def flat(self) -> np.ndarray:
        """Row-major vector with t1 fastest."""
        return self.values.ravel(order="F")

    @classmethod
    def from_flat(cls, spec: LatticeSpec, flat) -> "FieldGrid":
        flat = np.asarray(flat, dtype=float)
        if flat.size != spec.size:
            raise ValueError(f"expected {spec.size} values, got {flat.size}")
        return cls(spec, flat.reshape(spec.shape, order="F"))

    def __add__(self, other):
        if isinstance(other, FieldGrid):
            _check_same(self, other)
            return FieldGrid(self.spec, self.values + other.values)
        return FieldGrid(self.spec, self.values + other)

    def __sub__(self, other):
        if isinstance(other, FieldGrid):
            _check_same(self, other)
            return FieldGrid(self.spec, self.values - other.values)
        return FieldGrid(self.spec, self.values - other)

    def __neg__(self):
        return FieldGrid(self.spec, -self.values)

    def scaled(self, c: float) -> "FieldGrid":
        return FieldGrid(self.spec, c * self.values)

    def mean(self) -> float:
        return float(self.values.mean())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t1", "t2", "value"])
            for t2 in range(1, self.spec.d2 + 1):
                for t1 in range(1, self.spec.d1 + 1):
                    w.writerow([t1, t2, f"{self.values[t1 - 1, t2 - 1]:.17g}"])

    @classmethod
    def from_csv(cls, path, spec: Optional[LatticeSpec] = None) -> "FieldGrid":
        """Read a ``t1,t2,value`` file; the lattice is inferred unless given."""
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or set(rows[0]) != {"t1", "t2", "value"}:
            raise ValueError("field CSV must have header t1,t2,value")
        t1 = np.array([int(r["t1"]) for r in rows])
        t2 = np.array([int(r["t2"]) for r in rows])
        vals = np.array([float(r["value"]) for r in rows])
        inferred = (int(t1.max()), int(t2.max()))
        if spec is None:
            spec = LatticeSpec(*inferred)
        elif inferred != spec.shape or len(rows) != spec.size:
            raise ValueError(f"CSV covers {inferred[0]}x{inferred[1]} ({len(rows)} rows), declared lattice is {spec.label()}")
        if len(rows) != spec.size or t1.min() < 1 or t2.min() < 1:
            raise ValueError("CSV does not cover the lattice exactly once")
        out = np.full(spec.shape, np.nan)
        out[t1 - 1, t2 - 1] = vals
        if np.isnan(out).any():
            raise ValueError("CSV has duplicate or missing sites")
        return cls(spec, out)


def _check_same(a: FieldGrid, b: FieldGrid):
    if a.spec != b.spec:
        raise ValueError(f"lattice mismatch: {a.spec.label()} vs {b.spec.label()}")


# ---------------------------------------------------------------------------
# innovation providers


class _Innovations:
    """Innovation lookup with an optional coupling.

    ``at(i1, i2, t1, t2)`` returns the innovation at positions ``i`` as seen
    by the value at site ``t`` (arrays broadcast).  The target site only
    matters for the ``replace_far`` coupling.
    """

    def __init__(self, innovation: InnovationSpec, seed: int, mode=None, origin: Site = (0, 0)):
        if mode not in (None, "replace_origin", "replace_far"):
            raise ValueError(f"unknown coupling mode {mode!r}")
        self.innovation = innovation
        self.seed = seed
        self.mode = mode
        self.origin = origin

    def at(self, i1, i2, t1=None, t2=None):
        e = self.innovation.draw(self.seed, 0, i1, i2)
        if self.mode is None:
            return e
        alt = self.innovation.draw(self.seed, 1, i1, i2)
        if self.mode == "replace_origin":
            swap = (np.asarray(i1) == self.origin[0]) & (np.asarray(i2) == self.origin[1])
        else:
            t1 = np.asarray(t1)
            t2 = np.asarray(t2)
            lag = np.maximum(np.abs(t1 - i1), np.abs(t2 - i2))
            swap = lag >= np.maximum(np.abs(t1), np.abs(t2))
        return np.where(swap, alt, e)


def _site_grid(spec: LatticeSpec):
    t1, t2 = np.meshgrid(np.arange(1, spec.d1 + 1), np.arange(1, spec.d2 + 1), indexing="ij")
    return t1, t2


def _eval_moving(model, t1, t2, eps: _Innovations) -> np.ndarray:
    """Evaluate a LinearMA / WhiteNoise / Volterra2 model at sites (t1, t2)."""
    out = np.full(np.shape(t1), float(model.mean))
    if isinstance(model, Volterra2):
        for (s, r), a in model.coefficients.items():
            if a == 0.0:
                continue
            e1 = eps.at(t1 - s[0], t2 - s[1], t1, t2)
            e2 = eps.at(t1 - r[0], t2 - r[1], t1, t2)
            out += a * e1 * e2
        return out
    for s, a in model.coefficients.items():
        if a == 0.0:
            continue
        out += a * eps.at(t1 - s[0], t2 - s[1], t1, t2)
    return out


def _eval_autoregressive(model: NonlinearAR, lo: Site, hi: Site, eps: _Innovations, target=None):
    """Sweep the contraction to its fixed point on the box ``lo..hi`` expanded by the margin.

    Returns the centered-plus-mean field on ``lo..hi`` (inclusive).
    """
    m = model.margin
    a1 = np.arange(lo[0] - m, hi[0] + m + 1)
    a2 = np.arange(lo[1] - m, hi[1] + m + 1)
    g1, g2 = np.meshgrid(a1, a2, indexing="ij")
    if target is None:
        e = eps.at(g1, g2, g1, g2)
    else:
        e = eps.at(g1, g2, target[0], target[1])
    n1, n2 = g1.shape
    v = np.zeros_like(e)
    transform = np.tanh if model.form == "tanh" else None
    for _ in range(MAX_SWEEPS):
        src = transform(v) if transform is not None else v
        new = e.copy()
        for (s1, s2), u in model.weights.items():
            # new[t] += u * src[t - s], zero outside the box
            dst_1 = slice(max(s1, 0), n1 + min(s1, 0))
            src_1 = slice(max(-s1, 0), n1 - max(s1, 0))
            dst_2 = slice(max(s2, 0), n2 + min(s2, 0))
            src_2 = slice(max(-s2, 0), n2 - max(s2, 0))
            new[dst_1, dst_2] += u * src[src_1, src_2]
        diff = np.max(np.abs(new - v))
        v = new
        if diff < SWEEP_TOL:
            break
    else:  # pragma: no cover - the contraction guarantees convergence
        raise RuntimeError("autoregressive sweep did not converge")
    return model.mean + v[m : n1 - m, m : n2 - m]


def _evaluate(model: FieldModel, spec: LatticeSpec, eps: _Innovations) -> np.ndarray:
    if isinstance(model, NonlinearAR):
        if eps.mode == "replace_far":
            out = np.empty(spec.shape)
            for t1 in range(1, spec.d1 + 1):
                for t2 in range(1, spec.d2 + 1):
                    out[t1 - 1, t2 - 1] = _eval_autoregressive(model, (t1, t2), (t1, t2), eps, target=(t1, t2))[0, 0]
            return out
        return _eval_autoregressive(model, (1, 1), spec.shape, eps)
    t1, t2 = _site_grid(spec)
    return _eval_moving(model, t1, t2, eps)


def _resolve_seed(model, seed):
    return model.innovation.seed if seed is None else int(seed)


def simulate(model: FieldModel, spec: LatticeSpec, seed: Optional[int] = None) -> FieldGrid:
    """One realization of the model on ``spec``; deterministic in ``seed``."""
    eps = _Innovations(model.innovation, _resolve_seed(model, seed))
    return FieldGrid(spec, _evaluate(model, spec, eps))


def coupled_simulate(model: FieldModel, spec: LatticeSpec, seed: Optional[int] = None,
                     mode: str = "replace_origin", origin: Site = (0, 0)):
    """Return ``(V, V_coupled)`` sharing innovations except at the replaced positions.

    ``replace_origin`` swaps the innovation at ``origin`` for an independent
    copy.  ``replace_far`` builds, for every site t, the value obtained when
    all innovations at ``t - s`` with ``||s|| >= ||t||`` are replaced.
    """
    seed = _resolve_seed(model, seed)
    v = simulate(model, spec, seed)
    eps = _Innovations(model.innovation, seed, mode=mode, origin=origin)
    return v, FieldGrid(spec, _evaluate(model, spec, eps))


def _site_value(model: FieldModel, site: Site, eps: _Innovations) -> float:
    if isinstance(model, NonlinearAR):
        return float(_eval_autoregressive(model, site, site, eps, target=site)[0, 0])
    if isinstance(model, Volterra2):
        t1 = np.array([[site[0]]])
        t2 = np.array([[site[1]]])
        return float(_eval_moving(model, t1, t2, eps)[0, 0])
    # one vectorized draw over all coefficient offsets
    offs = np.array(list(model.coefficients.keys()), dtype=int).reshape(-1, 2)
    a = np.array(list(model.coefficients.values()), dtype=float)
    e = eps.at(site[0] - offs[:, 0], site[1] - offs[:, 1], site[0], site[1])
    return float(model.mean + np.dot(a, e))


@dataclass
class GMCEstimate:
    radii: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    reps: int
    alpha: float

    def log_slope(self) -> float:
        return fit_log_slope(self.radii, self.mean)


def fit_log_slope(radii, values) -> float:
    """Least-squares slope of log(values) against radius."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0):
        return float("-inf")
    return float(np.polyfit(radii, np.log(values), 1)[0])


def gmc_decay_estimate(model: FieldModel, radii: Iterable[int], reps: int, alpha: float = 2.0,
                       seed: int = 0) -> GMCEstimate:
    """Monte Carlo estimate of ``E|V(j) - V_far(j)|^alpha`` at ``j = (r, 0)`` per radius."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    radii = np.array(list(radii), dtype=int)
    samples = np.empty((reps, radii.size))
    for k in range(reps):
        s = rng.split_seed(seed, k)
        plain = _Innovations(model.innovation, s)
        far = _Innovations(model.innovation, s, mode="replace_far")
        for i, r in enumerate(radii):
            site = (int(r), 0)
            samples[k, i] = abs(_site_value(model, site, plain) - _site_value(model, site, far)) ** alpha
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(reps) if reps > 1 else np.full(radii.size, np.nan)
    return GMCEstimate(radii, mean, se, reps, alpha)


# ---------------------------------------------------------------------------
# closed forms


def _linear_coeffs(model) -> Dict[Site, float]:
    if isinstance(model, (WhiteNoise, LinearMA)):
        return model.coefficients
    raise TypeError(f"no closed-form second-order structure for {type(model).__name__}")


def theoretical_autocovariance(model: FieldModel, h) -> float:
    coeffs = _linear_coeffs(model)
    h = (int(h[0]), int(h[1]))
    total = 0.0
    for (s1, s2), a in coeffs.items():
        b = coeffs.get((s1 + h[0], s2 + h[1]))
        if b is not None:
            total += a * b
    return model.innovation.variance * total


def autocovariance_support(model: FieldModel):
    """All lags with possibly nonzero autocovariance (Minkowski difference of the support)."""
    coeffs = _linear_coeffs(model)
    return sorted({(r[0] - s[0], r[1] - s[1]) for s in coeffs for r in coeffs})


def theoretical_spectrum(model: FieldModel, lam1, lam2=None):
    """Spectral density at ``(lam1, lam2)``; arrays broadcast.

    ``theoretical_spectrum(model, (l1, l2))`` is also accepted.
    """
    coeffs = _linear_coeffs(model)
    if lam2 is None:
        lam1, lam2 = lam1
    lam1 = np.asarray(lam1, dtype=float)
    lam2 = np.asarray(lam2, dtype=float)
    transfer = np.zeros(np.broadcast(lam1, lam2).shape, dtype=complex)
    for (s1, s2), a in coeffs.items():
        transfer = transfer + a * np.exp(-1j * (s1 * lam1 + s2 * lam2))
    out = model.innovation.variance * np.abs(transfer) ** 2 / (4.0 * np.pi**2)
    return float(out) if out.ndim == 0 else out


def has_closed_form(model) -> bool:
    return isinstance(model, (WhiteNoise, LinearMA))


# ---------------------------------------------------------------------------
# JSON


def _pair(value, name) -> Site:
    if not (isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, int) for v in value)):
        raise ModelSpecError(name, f"expected an integer pair, got {value!r}")
    return (value[0], value[1])


def _number(doc, key, name, default=None):
    if key not in doc:
        if default is None:
            raise ModelSpecError(name, "missing")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ModelSpecError(name, f"expected a number, got {v!r}")
    return float(v)


def innovation_from_dict(doc) -> InnovationSpec:
    if not isinstance(doc, dict):
        raise ModelSpecError("innovation", "expected an object")
    known = {"distribution", "scale", "sigma", "df", "seed", "allow_low_df"}
    extra = set(doc) - known
    if extra:
        raise ModelSpecError(f"innovation.{sorted(extra)[0]}", "unknown field")
    scale = doc.get("scale", doc.get("sigma", 1.0))
    if isinstance(scale, bool) or not isinstance(scale, (int, float)):
        raise ModelSpecError("innovation.scale", f"expected a number, got {scale!r}")
    df = doc.get("df")
    if df is not None and (isinstance(df, bool) or not isinstance(df, (int, float))):
        raise ModelSpecError("innovation.df", f"expected a number, got {df!r}")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ModelSpecError("innovation.seed", "expected a nonnegative integer")
    return InnovationSpec(
        distribution=doc.get("distribution", "gaussian"),
        scale=float(scale),
        df=None if df is None else float(df),
        seed=seed,
        allow_low_df=bool(doc.get("allow_low_df", False)),
    )


def model_from_dict(doc) -> FieldModel:
    if not isinstance(doc, dict):
        raise ModelSpecError("model", "expected an object")
    variant = doc.get("variant")
    innov = innovation_from_dict(doc.get("innovation", {}))
    mean = _number(doc, "mean", "mean", 0.0)
    if variant == "WhiteNoise":
        return WhiteNoise(innovation=innov, mean=mean)
    if variant == "LinearMA":
        if "geometric" in doc:
            g = doc["geometric"]
            if not isinstance(g, dict):
                raise ModelSpecError("geometric", "expected an object")
            radius = g.get("radius")
            if not isinstance(radius, int) or radius < 0:
                raise ModelSpecError("geometric.radius", "expected a nonnegative integer")
            return geometric_ma(_number(g, "rho", "geometric.rho"), radius, innovation=innov, mean=mean)
        items = doc.get("coefficients")
        if not isinstance(items, list) or not items:
            raise ModelSpecError("coefficients", "expected a non-empty list")
        coeffs = {}
        for k, item in enumerate(items):
            if not isinstance(item, dict):
                raise ModelSpecError(f"coefficients[{k}]", "expected an object")
            coeffs[_pair(item.get("s"), f"coefficients[{k}].s")] = _number(item, "a", f"coefficients[{k}].a")
        return LinearMA(coeffs, innovation=innov, mean=mean)
    if variant == "Volterra2":
        items = doc.get("coefficients")
        if not isinstance(items, list) or not items:
            raise ModelSpecError("coefficients", "expected a non-empty list")
        coeffs = {}
        for k, item in enumerate(items):
            if not isinstance(item, dict):
                raise ModelSpecError(f"coefficients[{k}]", "expected an object")
            s1 = _pair(item.get("s1"), f"coefficients[{k}].s1")
            s2 = _pair(item.get("s2"), f"coefficients[{k}].s2")
            coeffs[(s1, s2)] = _number(item, "a", f"coefficients[{k}].a")
        return Volterra2(coeffs, innovation=innov, mean=mean)
    if variant == "NonlinearAR":
        items = doc.get("weights")
        if not isinstance(items, list) or not items:
            raise ModelSpecError("weights", "expected a non-empty list")
        weights = {}
        for k, item in enumerate(items):
            if not isinstance(item, dict):
                raise ModelSpecError(f"weights[{k}]", "expected an object")
            weights[_pair(item.get("s"), f"weights[{k}].s")] = _number(item, "u", f"weights[{k}].u")
        return NonlinearAR(weights, form=doc.get("form", "affine"), innovation=innov, mean=mean)
    raise ModelSpecError("variant", f"expected one of WhiteNoise, LinearMA, Volterra2, NonlinearAR, got {variant!r}")


def model_to_dict(model: FieldModel) -> dict:
    inn = model.innovation
    doc = {
        "variant": model.variant,
        "mean": model.mean,
        "innovation": {"distribution": inn.distribution, "scale": inn.scale, "seed": inn.seed},
    }
    if inn.df is not None:
        doc["innovation"]["df"] = inn.df
    if inn.allow_low_df:
        doc["innovation"]["allow_low_df"] = True
    if isinstance(model, LinearMA):
        doc["coefficients"] = [{"s": list(s), "a": a} for s, a in model.coefficients.items()]
    elif isinstance(model, Volterra2):
        doc["coefficients"] = [{"s1": list(s), "s2": list(r), "a": a} for (s, r), a in model.coefficients.items()]
    elif isinstance(model, NonlinearAR):
        doc["form"] = model.form
        doc["weights"] = [{"s": list(s), "u": u} for s, u in model.weights.items()]
    return doc


def load_model(path) -> FieldModel:
    """Load a model JSON file.  Syntax errors surface as ``json.JSONDecodeError``."""
    with open(path) as fh:
        doc = json.load(fh)
    return model_from_dict(doc)
