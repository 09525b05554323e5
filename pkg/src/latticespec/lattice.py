"""Lattice geometry: Fourier frequencies and the N / N-tilde / M partition.

All indices at the API boundary are 1-based, ``j = (j1, j2)`` with
``1 <= jk <= dk``.  Arrays indexed by ``j`` are stored 0-based with
``arr[j1 - 1, j2 - 1]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Tuple

import numpy as np

FreqIndex = Tuple[int, int]

PARITY_CASES = ("odd-odd", "odd-even", "even-odd", "even-even")


@dataclass(frozen=True)
class LatticeSpec:
    """Rectangular lattice ``T = {1..d1} x {1..d2}``."""

    d1: int
    d2: int

    def __post_init__(self):
        for name in ("d1", "d2"):
            v = getattr(self, name)
            if int(v) != v or v < 2:
                raise ValueError(f"{name} must be an integer >= 2, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def size(self) -> int:
        return self.d1 * self.d2

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.d1, self.d2)

    @property
    def parity_case(self) -> str:
        a = "even" if self.d1 % 2 == 0 else "odd"
        b = "even" if self.d2 % 2 == 0 else "odd"
        return f"{a}-{b}"

    def indices(self) -> List[FreqIndex]:
        """All of T in row-major order (j1 fastest)."""
        return [(j1, j2) for j2 in range(1, self.d2 + 1) for j1 in range(1, self.d1 + 1)]

    def contains(self, j) -> bool:
        return 1 <= j[0] <= self.d1 and 1 <= j[1] <= self.d2

    def reduce(self, j) -> FreqIndex:
        """Map any integer pair to its representative in T (periodic reduction)."""
        return ((int(j[0]) - 1) % self.d1 + 1, (int(j[1]) - 1) % self.d2 + 1)

    def label(self) -> str:
        return f"{self.d1}x{self.d2}"


@dataclass(frozen=True)
class Partition:
    n_set: List[FreqIndex]
    n_tilde_set: List[FreqIndex]
    m_set: List[FreqIndex]
    parity_case: str
    spec: LatticeSpec = field(repr=False)

    @cached_property
    def n_mask(self) -> np.ndarray:
        """Boolean (d1, d2) mask of N, 0-based storage."""
        return _mask(self.spec, self.n_set)

    @cached_property
    def n_index(self) -> Tuple[np.ndarray, np.ndarray]:
        """0-based index arrays of N in the stored order, for fancy indexing."""
        a = np.array(self.n_set, dtype=int).reshape(-1, 2)
        return a[:, 0] - 1, a[:, 1] - 1


def _mask(spec: LatticeSpec, js) -> np.ndarray:
    m = np.zeros(spec.shape, dtype=bool)
    for j1, j2 in js:
        m[j1 - 1, j2 - 1] = True
    return m


def reflect_index(spec: LatticeSpec, j) -> FreqIndex:
    """Index carrying the mirrored coefficient: x equal, y negated."""
    out = []
    for s, d in zip(j, spec.shape):
        out.append(d - s if s < d else d)
    return (out[0], out[1])


def frequency(spec: LatticeSpec, j) -> Tuple[float, float]:
    return (2.0 * np.pi * j[0] / spec.d1, 2.0 * np.pi * j[1] / spec.d2)


def in_D(spec: LatticeSpec, j) -> bool:
    return int(j[0]) % spec.d1 == 0 and int(j[1]) % spec.d2 == 0


def m_set(spec: LatticeSpec) -> List[FreqIndex]:
    d1, d2 = spec.shape
    case = spec.parity_case
    if case == "odd-odd":
        return [(d1, d2)]
    if case == "even-odd":
        return [(d1, d2), (d1 // 2, d2)]
    if case == "odd-even":
        return [(d1, d2), (d1, d2 // 2)]
    return [(d1, d2), (d1 // 2, d2), (d1, d2 // 2), (d1 // 2, d2 // 2)]


def _n_set(spec: LatticeSpec) -> List[FreqIndex]:
    d1, d2 = spec.shape
    case = spec.parity_case
    out: List[FreqIndex] = []
    if case == "odd-odd":
        out += [(t1, t2) for t2 in range(1, (d2 - 1) // 2 + 1) for t1 in range(1, d1 + 1)]
        out += [(t1, d2) for t1 in range(1, (d1 - 1) // 2 + 1)]
    elif case == "odd-even":
        out += [(t1, t2) for t2 in range(1, d2 // 2) for t1 in range(1, d1 + 1)]
        for t2 in (d2 // 2, d2):
            out += [(t1, t2) for t1 in range(1, (d1 - 1) // 2 + 1)]
    elif case == "even-odd":
        # odd-even with the roles of the two axes exchanged
        out += [(t1, t2) for t2 in range(1, d2 + 1) for t1 in range(1, d1 // 2)]
        for t1 in (d1 // 2, d1):
            out += [(t1, t2) for t2 in range(1, (d2 - 1) // 2 + 1)]
    else:
        out += [(t1, t2) for t2 in range(1, d2 // 2) for t1 in range(1, d1 + 1)]
        for t2 in (d2 // 2, d2):
            out += [(t1, t2) for t1 in range(1, d1 // 2)]
    return out


def build_partition(spec: LatticeSpec) -> Partition:
    n = _n_set(spec)
    return Partition(
        n_set=n,
        n_tilde_set=[reflect_index(spec, j) for j in n],
        m_set=m_set(spec),
        parity_case=spec.parity_case,
        spec=spec,
    )


def fourier_grid(spec: LatticeSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Per-axis Fourier frequencies for j = 1..d, in (0, 2pi]."""
    l1 = 2.0 * np.pi * np.arange(1, spec.d1 + 1) / spec.d1
    l2 = 2.0 * np.pi * np.arange(1, spec.d2 + 1) / spec.d2
    return l1, l2
