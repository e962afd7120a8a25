"""Closed-form eigenvalue families of the Heisenberg form Laplacian and their audit.

Families (1 <= p <= n, g >= 1, r = 1..p, c = n - p):

    F1  2k(g-1) + k^2 + c k
    F2  k^2 + (c+r+1) k + fl((r+1)/2) (c + fl(r/2) + 1)
    F3  2k(g-1) + k^2 + (c+r) k + fl(r/2) (c + fl((r+1)/2))
    F4  2kg + k^2 + (c+r) k + (c+r)/2 + fl((r-1)/2)(c + fl(r/2))
          +- sqrt((c+r)^2/4 + (c+r) k + 2kg + k^2)

Degree 0 is F1 alone and degrees above n are reflected to 2n+1-p.  F1 is the
function spectrum on a space with n-p ladder pairs, so for p = n only g = 1
occurs; ``literal=True`` drops that restriction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import heisenberg as hz
from .core import SparseVector, compress


def floor_standard(x: float) -> int:
    return math.floor(x)


def floor_strict(x: float) -> int:
    """Greatest integer strictly below x."""
    f = math.floor(x)
    return f - 1 if f == x else f


FLOORS = {"standard": floor_standard, "strict": floor_strict}


@dataclass(frozen=True)
class Source:
    family: int
    g: int | None
    r: int | None
    sign: int = 0


@dataclass
class CatalogEntry:
    value: float
    sources: list = field(default_factory=list)


def reflect_degree(n: int, p: int) -> int:
    if not 0 <= p <= 2 * n + 1:
        raise ValueError(f"degree {p} outside 0..{2 * n + 1}")
    return 2 * n + 1 - p if p > n else p


def raw_values(n: int, p: int, k: float, g_max: int, floor: str = "standard",
               literal: bool = False) -> list[tuple[float, Source]]:
    if n < 1:
        raise ValueError("n must be positive")
    if not k > 0:
        raise ValueError("k must be positive")
    if g_max < 1:
        raise ValueError("g_max must be at least 1")
    p = reflect_degree(n, p)
    fl = FLOORS[floor]
    c = n - p
    out = []
    for g in range(1, (g_max if c or literal else 1) + 1):
        out.append((2 * k * (g - 1) + k * k + c * k, Source(1, g, None)))
    for r in range(1, p + 1):
        out.append((k * k + (c + r + 1) * k + fl((r + 1) / 2) * (c + fl(r / 2) + 1), Source(2, None, r)))
        for g in range(1, g_max + 1):
            out.append((2 * k * (g - 1) + k * k + (c + r) * k + fl(r / 2) * (c + fl((r + 1) / 2)),
                        Source(3, g, r)))
            base = 2 * k * g + k * k + (c + r) * k + (c + r) / 2 + fl((r - 1) / 2) * (c + fl(r / 2))
            root = math.sqrt((c + r) ** 2 / 4 + (c + r) * k + 2 * k * g + k * k)
            out.append((base + root, Source(4, g, r, +1)))
            out.append((base - root, Source(4, g, r, -1)))
    return out


def eigenvalues(n: int, p: int, k: float, g_max: int, floor: str = "standard",
                tol: float = 1e-9, literal: bool = False) -> list[CatalogEntry]:
    """Catalog values up to ``g_max``, coincident values merged with all their sources."""
    merged: list[CatalogEntry] = []
    for v, src in sorted(raw_values(n, p, k, g_max, floor, literal), key=lambda t: t[0]):
        if merged and abs(v - merged[-1].value) <= tol * max(1.0, abs(v)):
            merged[-1].sources.append(src)
        else:
            merged.append(CatalogEntry(v, [src]))
    return merged


def lowest(n: int, p: int, k: float) -> tuple[float, int]:
    p = reflect_degree(n, p)
    return k * k + (n - p) * k, math.comb(n, p)


# symmetric subspace

def symmetric_epsilon(p: int, n: int, gamma_abs: int) -> SparseVector:
    """The vector eps(p, n) in the block gamma = |gamma| e_1."""
    if n < 2:
        raise ValueError("needs n >= 2")
    if p < 0 or gamma_abs < 0:
        raise ValueError("p and |gamma| must be non-negative")
    o = hz.ops(n)
    beta = (gamma_abs,) + (0,) * (n - 1)
    v = SparseVector.basis(o.f.element(beta))
    for q in range(1, p + 1):
        acc = SparseVector()
        for j in range(2, n + 1):
            if q % 2:
                acc = acc + (o.ad[j] @ o.e[j]).apply(v)
            else:
                acc = acc + (o.a[j] @ o.eb[j]).apply(v)
        v = acc if q % 2 else (-2.0 / q) * acc
    return v


def symmetric_basis(q: int, n: int, gamma_abs: int) -> list[SparseVector]:
    """The four spanning vectors of the symmetric subspace in degree 2q (q >= 2)."""
    if q < 2:
        raise ValueError("needs q >= 2")
    o = hz.ops(n)
    eps = {r: symmetric_epsilon(r, n, gamma_abs) for r in range(2 * q - 3, 2 * q + 1)}
    e1, eb1, ew, a1, ad1 = o.e[1], o.eb[1], o.ew, o.a[1], o.ad[1]
    b1 = (-gamma_abs) * (e1 @ eb1).apply(eps[2 * q - 2]) + (a1 @ eb1).apply(eps[2 * q - 1])
    b2 = (e1 @ eb1).apply(eps[2 * q - 2]) + eps[2 * q]
    b3 = (ew @ e1 @ eb1).apply(eps[2 * q - 3]) + (ad1 @ ew @ e1).apply(eps[2 * q - 2]) + ew.apply(eps[2 * q - 1])
    b4 = (a1 @ ew @ eb1).apply(eps[2 * q - 2])
    return [b1, b2, b3, b4]


def symmetric_matrix(q: int, n: int, k: float, gamma_abs: int, printed: bool = False):
    """4x4 matrix of the Laplacian on ``symmetric_basis`` (column j = image of b_j) and its eigenvalues.

    The default form has entry (2,2) equal to q(n-q+1) and the split pair
    centred at base + n/2 + (q-1)(n-q); it agrees with direct compression and
    with family F4.  ``printed=True`` returns the variant with q(n-q-1) in both
    places, whose matrix and eigenvalue list are not consistent with each other.
    """
    if q < 2 or n < 2:
        raise ValueError(f"need q >= 2 and n >= 2, got q={q} n={n}")
    if gamma_abs < 1:
        raise ValueError("needs |gamma| >= 1")
    g = gamma_abs
    s = math.sqrt(k)
    base = 2 * k * g + k * k + n * k
    d22 = q * (n - q - 1) if printed else q * (n - q + 1)
    M = np.array([
        [(q - 1) * (n - q), 0.0, s, s],
        [-q * g, d22, -q * s, 0.0],
        [s * g, -s, k + q * (n - q), 0.0],
        [s * (g + n - q), -s, 0.0, -k + q * (n - q)],
    ]) + base * np.eye(4)
    root = math.sqrt(n * n / 4 + n * k + 2 * k * g + k * k)
    mid = base + n / 2 + (q * (n - q - 1) if printed else (q - 1) * (n - q))
    evals = sorted([base + q * (n - q)] * 2 + [mid - root, mid + root])
    return M, np.array(evals)


def compressed_symmetric(q: int, n: int, k: float, gamma_abs: int, mode: str = "explicit"):
    """Laplacian on the span of ``symmetric_basis``: coefficient matrix and invariance residual."""
    vecs = symmetric_basis(q, n, gamma_abs)
    lap = hz.build_laplacian(hz.Context(n, 2 * q, k), mode)
    return compress(lap, vecs)


def in_kernels_and_symmetric(vectors: list[SparseVector], n: int) -> float:
    """Largest norm of U_1j v and (chi_2j - 1) v over the given vectors."""
    ctx = hz.Context(n, 0, 1.0)
    worst = 0.0
    for v in vectors:
        for j in range(2, n + 1):
            worst = max(worst, hz.build_Uij(1, j, ctx).apply(v).norm())
            if j > 2:
                worst = max(worst, (hz.build_chi(2, j, ctx).apply(v) - v).norm())
    return worst


# audit

@dataclass
class CoverageReport:
    n: int
    p: int
    k: float
    numeric_orphans: list
    catalog_orphans: list
    matches: list

    @property
    def ok(self) -> bool:
        return not self.numeric_orphans and not self.catalog_orphans


def match_spectrum(numeric: list, n: int, p: int, k: float, tol: float = 1e-8,
                   gamma_max: int | None = None, g_hit: int | None = None,
                   floor: str = "standard", literal: bool = False) -> CoverageReport:
    """Two-way audit of block spectra against the catalog.

    Every numeric eigenvalue must equal a catalog value, and every catalog value
    whose g is at most ``g_hit`` (default gamma_max - 2) must occur numerically.
    """
    if gamma_max is None:
        gamma_max = max((sum(s.gamma) for s in numeric), default=0)
    if g_hit is None:
        g_hit = gamma_max - 2
    catalog = eigenvalues(n, p, k, gamma_max + 2 * n + 4, floor, literal=literal)
    cvals = np.array([c.value for c in catalog])
    hit = np.zeros(len(catalog), dtype=bool)
    numeric_orphans, matches = [], []
    for res in numeric:
        for v in res.values:
            idx = int(np.argmin(np.abs(cvals - v)))
            if abs(cvals[idx] - v) <= tol * max(1.0, abs(v)):
                hit[idx] = True
                matches.append((res.gamma, float(v), catalog[idx].sources[0]))
            else:
                numeric_orphans.append((res.gamma, float(v)))
    catalog_orphans = []
    for c, h in zip(catalog, hit):
        relevant = any(s.g is None or s.g <= g_hit for s in c.sources)
        if relevant and not h:
            catalog_orphans.append((c.value, c.sources))
    return CoverageReport(n, p, k, numeric_orphans, catalog_orphans, matches)


def numeric_spectra(n: int, p: int, k: float, gamma_max: int) -> list:
    ctx = hz.Context(n, p, k)
    return [hz.block_spectrum(ctx, g) for g in hz.enumerate_gammas(n, p, gamma_max)]
