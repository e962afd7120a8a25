"""Hodge Laplacian on forms of the Heisenberg group in the anti-Fock model.

In the representation with parameter k > 0 the left-invariant frame acts by

    Z_j -> -i sqrt(k) a_j*,   Z_jbar -> -i sqrt(k) a_j,   W -> -i k.

Every operator here is a polynomial in sqrt(k).  Laplacians are stored as
``{e: rule}`` with ``Delta(k) = sum_e k**(e/2) rule_e`` so that block matrices
can be built once and evaluated at any k.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .core import (BasisElement, Frame, LeakageError, LinearRule, SparseVector, Sum, annihilation,
                   contract, creation, identity, matrix_of, swap_pairs, wedge)

MODES = ("composed", "explicit")


class EmptyBlockError(ValueError):
    pass


class NonHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class Context:
    n: int
    p: int = 0
    k: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0 <= self.p <= 2 * self.n + 1:
            raise ValueError(f"degree {self.p} outside 0..{2 * self.n + 1}")
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k}")

    @property
    def frame(self) -> Frame:
        return _frame(self.n)


@lru_cache(maxsize=None)
def _frame(n: int) -> Frame:
    return Frame(n, 1)


class _Ops:
    """Short names for the elementary rules of a frame."""

    def __init__(self, n: int):
        f = self.f = _frame(n)
        self.n = n
        self.ad = [None] + [creation(f, j) for j in range(1, n + 1)]
        self.a = [None] + [annihilation(f, j) for j in range(1, n + 1)]
        self.e = [None] + [wedge(f, f.holo(j)) for j in range(1, n + 1)]
        self.eb = [None] + [wedge(f, f.anti(j)) for j in range(1, n + 1)]
        self.i = [None] + [contract(f, f.holo(j)) for j in range(1, n + 1)]
        self.ib = [None] + [contract(f, f.anti(j)) for j in range(1, n + 1)]
        self.ew = wedge(f, f.central(1))
        self.iw = contract(f, f.central(1))
        self.one = identity(f)


@lru_cache(maxsize=None)
def ops(n: int) -> _Ops:
    return _Ops(n)


def poly_at(parts: dict, k: float) -> LinearRule:
    terms = [k ** (e / 2) * r for e, r in sorted(parts.items())]
    return Sum(terms)


# d and its adjoint

def theta_parts(j: int, n: int) -> dict:
    o = ops(n)
    return {
        0: -1j * (o.e[j] @ o.eb[j] @ o.iw),
        1: -1j * (o.e[j] @ o.ad[j]) + (-1j) * (o.eb[j] @ o.a[j]),
    }


def theta_star_parts(j: int, n: int) -> dict:
    o = ops(n)
    return {
        0: 1j * (o.ew @ o.ib[j] @ o.i[j]),
        1: 1j * (o.i[j] @ o.a[j]) + 1j * (o.ib[j] @ o.ad[j]),
    }


def build_theta(j: int, ctx: Context) -> LinearRule:
    return poly_at(theta_parts(j, ctx.n), ctx.k)


def build_theta_star(j: int, ctx: Context) -> LinearRule:
    return poly_at(theta_star_parts(j, ctx.n), ctx.k)


@lru_cache(maxsize=None)
def d_parts(n: int) -> dict:
    o = ops(n)
    parts = {0: [], 1: [], 2: [-1j * o.ew]}
    for j in range(1, n + 1):
        for e, r in theta_parts(j, n).items():
            parts[e].append(r)
    return {e: Sum(rs) for e, rs in parts.items()}


@lru_cache(maxsize=None)
def d_star_parts(n: int) -> dict:
    o = ops(n)
    parts = {0: [], 1: [], 2: [1j * o.iw]}
    for j in range(1, n + 1):
        for e, r in theta_star_parts(j, n).items():
            parts[e].append(r)
    return {e: Sum(rs) for e, rs in parts.items()}


def build_d(ctx: Context) -> LinearRule:
    return poly_at(d_parts(ctx.n), ctx.k)


def build_d_star(ctx: Context) -> LinearRule:
    return poly_at(d_star_parts(ctx.n), ctx.k)


@lru_cache(maxsize=None)
def laplacian_parts(n: int, mode: str = "explicit") -> dict:
    """``{e: rule}`` with ``Delta(k) = sum_e k**(e/2) rule_e``."""
    if mode == "composed":
        D, Ds = d_parts(n), d_star_parts(n)
        out: dict = {}
        for a, b in itertools.product(D, Ds):
            out.setdefault(a + b, []).extend([D[a] @ Ds[b], Ds[b] @ D[a]])
        return {e: Sum(rs) for e, rs in sorted(out.items())}
    if mode != "explicit":
        raise ValueError(f"unknown mode {mode!r}")
    o = ops(n)
    L0, L1, L2 = [], [], []
    for j in range(1, n + 1):
        L2 += [2.0 * (o.ad[j] @ o.a[j]), o.i[j] @ o.e[j], o.eb[j] @ o.ib[j]]
        L1 += [o.ew @ o.ib[j] @ o.ad[j], -(o.ew @ o.i[j] @ o.a[j]),
               o.iw @ o.e[j] @ o.ad[j], -(o.iw @ o.eb[j] @ o.a[j])]
        for l in range(1, n + 1):
            if l != j:
                L0.append(o.e[j] @ o.eb[j] @ o.ib[l] @ o.i[l])
        L0.append(o.e[j] @ o.i[j] @ o.eb[j] @ o.ib[j] @ o.iw @ o.ew)
        L0.append(o.i[j] @ o.e[j] @ o.ib[j] @ o.eb[j] @ o.ew @ o.iw)
    parts = {1: Sum(L1), 2: Sum(L2), 4: o.one}
    if L0:
        parts[0] = Sum(L0)
    return dict(sorted(parts.items()))


def build_laplacian(ctx: Context, mode: str = "explicit") -> LinearRule:
    return poly_at(laplacian_parts(ctx.n, mode), ctx.k)


# symmetry operators

def build_Ujj(j: int, ctx: Context) -> LinearRule:
    o = ops(ctx.n)
    return o.ad[j] @ o.a[j] - o.e[j] @ o.i[j] + o.eb[j] @ o.ib[j]


def build_Uij(i: int, j: int, ctx: Context) -> LinearRule:
    if i == j:
        return build_Ujj(j, ctx)
    o = ops(ctx.n)
    return o.ad[i] @ o.a[j] - o.e[j] @ o.i[i] + o.eb[i] @ o.ib[j]


def build_chi(i: int, j: int, ctx: Context) -> LinearRule:
    return swap_pairs(ctx.frame, i, j)


# blocks

def gamma_of(x: BasisElement, n: int) -> tuple:
    f = _frame(n)
    return tuple(x.beta[j] - (x.form >> f.holo(j + 1) & 1) + (x.form >> f.anti(j + 1) & 1) for j in range(n))


def validate_gamma(n: int, p: int, gamma) -> tuple:
    gamma = tuple(int(g) for g in gamma)
    if len(gamma) != n:
        raise ValueError(f"gamma {gamma} has length {len(gamma)}, expected {n}")
    if min(gamma) < -1:
        raise ValueError(f"gamma {gamma} has an entry below -1")
    if sum(1 for g in gamma if g == -1) > p:
        raise ValueError(f"gamma {gamma} has more than p={p} entries equal to -1")
    return gamma


@lru_cache(maxsize=None)
def block_basis(n: int, p: int, gamma: tuple) -> tuple:
    """Ordered basis of the joint U_jj eigenspace, possibly empty."""
    f = _frame(n)
    out = []
    pairs = range(1, n + 1)
    for w in (0, 1):
        rest = p - w
        if rest < 0:
            continue
        for ni in range(0, min(n, rest) + 1):
            nj = rest - ni
            if nj > n:
                continue
            for I in itertools.combinations(pairs, ni):
                for J in itertools.combinations(pairs, nj):
                    beta = list(gamma)
                    for j in I:
                        beta[j - 1] += 1
                    for j in J:
                        beta[j - 1] -= 1
                    if min(beta) < 0:
                        continue
                    key = (w, I, J)
                    out.append((key, BasisElement(tuple(beta), f.mask(I, J, (1,) if w else ()))))
    out.sort(key=lambda t: t[0])
    return tuple(x for _, x in out)


@dataclass
class Block:
    n: int
    p: int
    gamma: tuple
    basis: list

    @property
    def dim(self) -> int:
        return len(self.basis)


def enumerate_block(ctx: Context, gamma) -> Block:
    gamma = validate_gamma(ctx.n, ctx.p, gamma)
    basis = block_basis(ctx.n, ctx.p, gamma)
    if not basis:
        raise EmptyBlockError(f"block n={ctx.n} p={ctx.p} gamma={gamma} is empty")
    return Block(ctx.n, ctx.p, gamma, list(basis))


def enumerate_gammas(n: int, p: int, gamma_max: int, gamma_min: int | None = None) -> list[tuple]:
    """All admissible gamma with nonempty block and gamma_min <= |gamma| <= gamma_max."""
    out = []
    for shifted in itertools.product(range(gamma_max + n + 1), repeat=n):
        if sum(shifted) > gamma_max + n:
            continue
        gamma = tuple(s - 1 for s in shifted)
        s = sum(gamma)
        if gamma_min is not None and s < gamma_min:
            continue
        if sum(1 for g in gamma if g == -1) > p:
            continue
        if block_basis(n, p, gamma):
            out.append(gamma)
    out.sort(key=lambda g: (sum(g), g))
    return out


@lru_cache(maxsize=None)
def block_parts(n: int, p: int, gamma: tuple, mode: str = "explicit") -> dict:
    """Matrices ``{e: M_e}`` of the Laplacian parts on a block (leakage checked)."""
    basis = list(block_basis(n, p, gamma))
    if not basis:
        raise EmptyBlockError(f"block n={n} p={p} gamma={gamma} is empty")
    return {e: matrix_of(r, basis) for e, r in laplacian_parts(n, mode).items()}


def parts_at(parts: dict, k: float) -> np.ndarray:
    return sum(k ** (e / 2) * M for e, M in parts.items())


def block_matrix(ctx: Context, gamma, mode: str = "explicit") -> np.ndarray:
    gamma = validate_gamma(ctx.n, ctx.p, gamma)
    return parts_at(block_parts(ctx.n, ctx.p, gamma, mode), ctx.k)


@dataclass
class SpectrumResult:
    """Eigenvalues of one block; ``values`` keeps repeats, ``eigenvalues`` is grouped."""

    gamma: tuple
    values: np.ndarray
    residual: float
    vectors: np.ndarray | None = field(default=None, repr=False)
    group_tol: float = 1e-8

    @property
    def eigenvalues(self) -> list[float]:
        return [v for v, _ in group_values(self.values, self.group_tol)]

    @property
    def multiplicities(self) -> list[int]:
        return [m for _, m in group_values(self.values, self.group_tol)]


def group_values(values, tol: float = 1e-8) -> list[tuple[float, int]]:
    out: list[list] = []
    for v in sorted(values):
        if out and abs(v - out[-1][0]) <= tol * max(1.0, abs(v)):
            out[-1][1] += 1
        else:
            out.append([v, 1])
    return [(float(v), m) for v, m in out]


def hermitian_eig(M: np.ndarray, what: str = "block"):
    dev = np.abs(M - M.conj().T).max() if M.size else 0.0
    if dev > 1e-10:
        raise NonHermitianError(f"{what} is not Hermitian (deviation {dev:.3e})")
    vals, vecs = np.linalg.eigh(M)
    residual = float(np.abs(M @ vecs - vecs * vals).max()) if M.size else 0.0
    return vals, vecs, residual


def block_spectrum(ctx: Context, gamma, mode: str = "explicit") -> SpectrumResult:
    gamma = validate_gamma(ctx.n, ctx.p, gamma)
    M = block_matrix(ctx, gamma, mode)
    vals, vecs, residual = hermitian_eig(M, f"block {gamma}")
    return SpectrumResult(gamma, vals, residual, vecs)


def shifted(gamma: tuple, i: int, j: int) -> tuple:
    g = list(gamma)
    g[i - 1] += 1
    g[j - 1] -= 1
    return tuple(g)


def swapped(gamma: tuple, i: int, j: int) -> tuple:
    g = list(gamma)
    g[i - 1], g[j - 1] = g[j - 1], g[i - 1]
    return tuple(g)


@lru_cache(maxsize=None)
def _op_matrix(n: int, p: int, kind: str, i: int, j: int, gamma: tuple):
    ctx = Context(n, p, 1.0)
    if kind == "U":
        rule, target = build_Uij(i, j, ctx), shifted(gamma, i, j)
    else:
        rule, target = build_chi(i, j, ctx), swapped(gamma, i, j)
    dom = list(block_basis(n, p, gamma))
    cod = list(block_basis(n, p, target)) if min(target) >= -1 else []
    return matrix_of(rule, dom, cod), target


def operator_between_blocks(ctx: Context, kind: str, i: int, j: int, gamma) -> tuple[np.ndarray, tuple]:
    """Matrix of U_ij (kind 'U') or chi_ij (kind 'chi') from block gamma to its image block."""
    return _op_matrix(ctx.n, ctx.p, kind, i, j, tuple(gamma))


def commutator_norm(ctx: Context, kind: str, i: int, j: int, gamma, mode: str = "explicit") -> float:
    """Spectral norm of [A, Delta] restricted to block gamma, A = U_ij or chi_ij."""
    A, target = operator_between_blocks(ctx, kind, i, j, gamma)
    src = block_matrix(ctx, gamma, mode)
    if A.shape[0] == 0:
        return 0.0
    dst = block_matrix(ctx, target, mode)
    C = A @ src - dst @ A
    return float(np.linalg.norm(C, 2)) if C.size else 0.0


def spectral_equivalence_check(ctx: Context, gamma, gamma2, tol: float = 1e-10) -> dict:
    """Compare the spectra of two blocks related by a permutation or by U_ij."""
    g1 = validate_gamma(ctx.n, ctx.p, gamma)
    g2 = validate_gamma(ctx.n, ctx.p, gamma2)
    related = sorted(g1) == sorted(g2)
    if not related:
        for i in range(1, ctx.n + 1):
            for j in range(1, ctx.n + 1):
                if i != j and shifted(g1, i, j) == g2 and g1[i - 1] >= 1 and g1[j - 1] >= 2:
                    related = True
    if not related:
        raise ValueError(f"{g1} and {g2} are not related by a permutation or an admissible U_ij shift")
    s1 = np.sort(block_spectrum(ctx, g1).values)
    s2 = np.sort(block_spectrum(ctx, g2).values)
    same = len(s1) == len(s2) and (len(s1) == 0 or float(np.abs(s1 - s2).max()) < tol)
    diff = float(np.abs(s1 - s2).max()) if len(s1) == len(s2) and len(s1) else math.inf
    return {"equivalent": bool(same), "dims": (len(s1), len(s2)), "max_diff": diff}


def kernel_lemma_check(ctx: Context, gamma) -> float:
    """Smallest singular value of U_12 on block gamma (zero if it cannot be injective)."""
    if ctx.n < 2:
        raise ValueError("needs n >= 2")
    gamma = validate_gamma(ctx.n, ctx.p, gamma)
    A, _ = operator_between_blocks(ctx, "U", 1, 2, gamma)
    rows, cols = A.shape
    if cols == 0:
        raise EmptyBlockError(f"block {gamma} is empty")
    if rows < cols:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False).min())


def low_spectrum(ctx: Context, gamma_max: int, cutoff: float, mode: str = "explicit") -> list[float]:
    """All eigenvalues below ``cutoff`` over blocks with |gamma| <= gamma_max."""
    out = []
    for g in enumerate_gammas(ctx.n, ctx.p, gamma_max):
        vals = block_spectrum(ctx, g, mode).values
        out.extend(float(v) for v in vals if v < cutoff)
    return sorted(out)


def chi_relations_check(n: int, gamma_max: int = 6) -> dict:
    """Largest deviation in chi^2 = Id, chi_ij chi_ik chi_ij = chi_jk and chi_jk U_1j = U_1k chi_jk.

    Checked on every basis element of every block with |gamma| <= gamma_max, all degrees.
    """
    ctx = Context(n, 0, 1.0)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    triples = [(i, j, k) for i in range(1, n + 1) for j in range(1, n + 1) for k in range(1, n + 1)
               if len({i, j, k}) == 3]
    worst = {"square": 0.0, "conjugation": 0.0, "intertwining": 0.0}
    for p in range(2 * n + 2):
        for g in enumerate_gammas(n, p, gamma_max):
            for x in block_basis(n, p, g):
                v = SparseVector.basis(x)
                for i, j in pairs:
                    chi = build_chi(i, j, ctx)
                    worst["square"] = max(worst["square"], ((chi @ chi).apply(v) - v).norm())
                for i, j, k in triples:
                    lhs = (build_chi(i, j, ctx) @ build_chi(i, k, ctx) @ build_chi(i, j, ctx)).apply(v)
                    worst["conjugation"] = max(worst["conjugation"], (lhs - build_chi(j, k, ctx).apply(v)).norm())
                    if i == 1:
                        lhs = (build_chi(j, k, ctx) @ build_Uij(1, j, ctx)).apply(v)
                        rhs = (build_Uij(1, k, ctx) @ build_chi(j, k, ctx)).apply(v)
                        worst["intertwining"] = max(worst["intertwining"], (lhs - rhs).norm())
    return worst


def hodge_pair_check(n: int, p: int, k: float, gamma_max: int = 8, tol: float = 1e-8) -> dict:
    """Compare low spectra in degrees p and 2n+1-p below k^2 + (n+2)k.

    The cutoff is itself an eigenvalue, so values within 1e-9 (relative) of it
    are left out.  Each list is also recomputed with gamma_max + 2 to confirm
    the truncation does not change it.
    """
    cut = k * k + (n + 2) * k
    below = cut * (1 - 1e-9)
    lists = {}
    for q in (p, 2 * n + 1 - p):
        a = low_spectrum(Context(n, q, k), gamma_max, below)
        b = low_spectrum(Context(n, q, k), gamma_max + 2, below)
        if len(a) != len(b) or (a and max(abs(x - y) for x, y in zip(a, b)) > tol):
            raise ValueError(f"low spectrum in degree {q} is not settled at gamma_max={gamma_max}")
        lists[q] = np.array(a)
    a, b = lists[p], lists[2 * n + 1 - p]
    same = len(a) == len(b)
    diff = float(np.abs(a - b).max()) if same and len(a) else (0.0 if same else math.inf)
    return {"n": n, "p": p, "k": k, "cutoff": cut, "count": (len(a), len(b)), "max_diff": diff,
            "ok": bool(same and diff < tol)}


__all__ = [
    "Context", "Block", "SpectrumResult", "EmptyBlockError", "NonHermitianError", "LeakageError",
    "build_theta", "build_theta_star", "build_d", "build_d_star", "build_laplacian", "laplacian_parts",
    "build_Ujj", "build_Uij", "build_chi", "enumerate_block", "enumerate_gammas", "block_basis",
    "block_parts", "block_matrix", "block_spectrum", "commutator_norm", "spectral_equivalence_check",
    "kernel_lemma_check", "low_spectrum", "chi_relations_check", "hodge_pair_check", "gamma_of", "group_values",
]
