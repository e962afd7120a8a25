"""Laplacian on 1-forms of the double Heisenberg group D^{4n+2}.

There are 2n ladder pairs.  The frame for lambda = (l1, l2), r = |lambda|, is
built block by block from X_{4b+1..4b+4}:

    Z_{2b+1} = (i l1 X_{4b+1} + i l2 X_{4b+2} + r X_{4b+3}) / (sqrt2 r)
    Z_{2b+2} = (i l2 X_{4b+1} - i l1 X_{4b+2} + r X_{4b+4}) / (sqrt2 r)

with Zbar the complex conjugate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import nilpotent as nl
from .core import (LinearRule, SparseVector, annihilation, commutator, compress, contract,
                   creation, wedge)

FAMILIES = ("u", "v", "w", "w'")


@dataclass(frozen=True)
class DContext:
    n: int
    lam: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        lam = tuple(float(x) for x in self.lam)
        if len(lam) != 2:
            raise ValueError("lambda must have two components")
        if math.hypot(*lam) == 0:
            raise ValueError("lambda must be nonzero")
        object.__setattr__(self, "lam", lam)

    @property
    def r(self) -> float:
        return math.hypot(*self.lam)

    @property
    def pairs(self) -> int:
        return 2 * self.n

    @cached_property
    def algebra(self) -> nl.StepTwoAlgebra:
        return nl.dgroup_algebra(self.n)

    @cached_property
    def model(self) -> nl.LaplacianModel:
        return nl.laplacian_model(self.algebra, np.array(self.lam), frame(self))


def frame(ctx: DContext) -> np.ndarray:
    """Rows Z_1..Z_{2n}, then their conjugates, as coefficient vectors over X_1..X_{4n}."""
    l1, l2 = ctx.lam
    r = ctx.r
    m = 4 * ctx.n
    Z = np.zeros((2 * ctx.n, m), dtype=complex)
    for b in range(ctx.n):
        Z[2 * b, 4 * b:4 * b + 3] = [1j * l1, 1j * l2, r]
        Z[2 * b + 1, [4 * b, 4 * b + 1, 4 * b + 3]] = [1j * l2, -1j * l1, r]
    Z /= math.sqrt(2) * r
    return np.vstack([Z, Z.conj()])


def frame_deviation(ctx: DContext) -> float:
    """Orthonormality and Darboux relations of ``frame`` (as X - iY pairs)."""
    V = frame(ctx)
    n2 = ctx.pairs
    Z = V[:n2]
    X = (Z.real * math.sqrt(2))
    Y = (-Z.imag * math.sqrt(2))
    return nl.frame_deviation(ctx.algebra, nl.SymplecticFrame(X, Y, np.array(ctx.lam)))


def _check_beta(ctx: DContext, beta) -> tuple:
    beta = tuple(int(b) for b in beta)
    if len(beta) != ctx.pairs:
        raise ValueError(f"beta must have length {ctx.pairs}, got {len(beta)}")
    if min(beta) < 0:
        raise ValueError("beta entries must be non-negative")
    return beta


def paper_vectors(ctx: DContext, beta, family: str, j: int) -> SparseVector:
    """u_j, v_j, w_j or w'_j built on psi_beta, j = 1..n."""
    beta = _check_beta(ctx, beta)
    if not 1 <= j <= ctx.n:
        raise ValueError(f"j must lie in 1..{ctx.n}")
    f = ctx.model.frame
    x = f.element(beta)
    s, t = 2 * j - 1, 2 * j
    if family == "u":
        rule = annihilation(f, t) @ wedge(f, f.holo(s)) - annihilation(f, s) @ wedge(f, f.holo(t))
    elif family == "v":
        rule = creation(f, t) @ wedge(f, f.anti(s)) - creation(f, s) @ wedge(f, f.anti(t))
    elif family == "w":
        rule = creation(f, s) @ wedge(f, f.holo(s)) + creation(f, t) @ wedge(f, f.holo(t))
    elif family == "w'":
        rule = annihilation(f, s) @ wedge(f, f.anti(s)) + annihilation(f, t) @ wedge(f, f.anti(t))
    else:
        raise ValueError(f"unknown family {family!r}")
    return rule.apply(x)


def mu_prime(ctx: DContext, beta) -> float:
    r = ctx.r
    return r * (2 * ctx.n + 2 * sum(beta)) + r * r


FAMILY_SHIFT = {"u": -3, "v": 3, "w": 1, "w'": -1}


def family_vector(ctx: DContext, beta, family: str, j: int, weights: str = "stated") -> SparseVector:
    """(b_{2j+1} + b_{2j+2}) x_j - (b_{2j-1} + b_{2j}) x_{j+1} for j = 1..n-1.

    The raising families v and w are eigenvectors only when both weights are
    shifted by 2 (the pair occupation after raising); ``weights="shifted"``
    applies that shift to v and w and leaves u and w' alone.
    """
    beta = _check_beta(ctx, beta)
    if not 1 <= j < ctx.n:
        raise ValueError(f"j must lie in 1..{ctx.n - 1}")
    if weights not in ("stated", "shifted"):
        raise ValueError("weights must be 'stated' or 'shifted'")
    shift = 2 if weights == "shifted" and family in ("v", "w") else 0
    left = beta[2 * j] + beta[2 * j + 1] + shift
    right = beta[2 * j - 2] + beta[2 * j - 1] + shift
    return left * paper_vectors(ctx, beta, family, j) - right * paper_vectors(ctx, beta, family, j + 1)


@dataclass
class FamilyResult:
    family: str
    j: int
    target: float
    residual: float


def family_eigencheck(ctx: DContext, beta, weights: str = "stated") -> list[FamilyResult]:
    """Relative residual |Delta v - mu v| / |v| of every family vector at its predicted eigenvalue.

    Vanishing vectors are skipped.
    """
    beta = _check_beta(ctx, beta)
    if ctx.n < 2:
        return []
    lap = ctx.model.lap
    mu0 = mu_prime(ctx, beta)
    out = []
    for fam in FAMILIES:
        mu = mu0 + FAMILY_SHIFT[fam] * ctx.r
        for j in range(1, ctx.n):
            v = family_vector(ctx, beta, fam, j, weights)
            nv = v.norm()
            if nv == 0:
                continue
            out.append(FamilyResult(fam, j, mu, (lap.apply(v) - mu * v).norm() / nv))
    return out


def subspace_vectors(ctx: DContext, beta, which: str) -> list[SparseVector]:
    beta = _check_beta(ctx, beta)
    f = ctx.model.frame
    l1, l2 = ctx.lam
    x = f.element(beta)
    t1 = wedge(f, f.central(1)).apply(x)
    t2 = wedge(f, f.central(2)).apply(x)
    if which == "first":
        fams, tail = ("u", "v"), l2 * t1 - l1 * t2
    elif which == "second":
        fams, tail = ("w", "w'"), l1 * t1 + l2 * t2
    else:
        raise ValueError("which must be 'first' or 'second'")
    vecs = []
    for fam in fams:
        acc = SparseVector()
        for j in range(1, ctx.n + 1):
            acc = acc + paper_vectors(ctx, beta, fam, j)
        vecs.append(acc)
    vecs.append(tail)
    return vecs


def printed_3x3(n: int, r: float, b: int, which: str) -> np.ndarray:
    """The 3x3 matrices in their stated form (column j = image of vector j)."""
    base = 2 * r * (n + b) + r * r
    s, t = r ** 1.5, 1 / math.sqrt(r)
    if which == "first":
        M = [[-3 * r, 0, -s], [0, 3 * r, s], [-t * b, -t * (b + 2 * n), 2 * n]]
    else:
        M = [[r, 0, -s], [0, -r, s], [-t * (b + 2 * n), -t * b, 2 * n]]
    return np.array(M, dtype=float) + base * np.eye(3)


def cubic(n: int, r: float, b: int) -> np.poly1d:
    """p(mu) = mu^3 - 2n mu^2 - r(2b + 9r + 2n) mu + 12 n r^2."""
    return np.poly1d([1.0, -2.0 * n, -r * (2 * b + 9 * r + 2 * n), 12.0 * n * r * r])


def second_closed_form(n: int, r: float, b: int) -> np.ndarray:
    base = 2 * r * (n + b) + r * r
    root = math.sqrt(n * n + base)
    return np.sort([base + n - root, base, base + n + root])


@dataclass
class InvariantBlock:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    residual: float
    dim: int
    dropped: list

    def shifted_charpoly(self, base: float) -> np.ndarray:
        """Monic characteristic polynomial coefficients of matrix - base*Id."""
        return np.real_if_close(np.poly(self.matrix - base * np.eye(len(self.matrix))))


def invariant_3x3(ctx: DContext, beta, which: str) -> InvariantBlock:
    """Laplacian on the first or second three-vector subspace.

    Vanishing spanning vectors (beta = 0 cases) are dropped and the reduced
    span is used.  ``residual`` measures failure of invariance.
    """
    vecs = subspace_vectors(ctx, beta, which)
    keep = [i for i, v in enumerate(vecs) if v.norm() > 0]
    dropped = [i for i in range(3) if i not in keep]
    C, res = compress(ctx.model.lap, [vecs[i] for i in keep])
    return InvariantBlock(C, np.sort(np.linalg.eigvals(C).real), res, len(keep), dropped)


@dataclass
class ThreeByThreeReport:
    which: str
    beta: tuple
    residual: float
    charpoly_error: float
    eigenvalue_error: float
    printed_mismatch: float
    mismatched_entries: list


def check_3x3(ctx: DContext, beta, which: str) -> ThreeByThreeReport:
    """Compare the compressed 3x3 block with the cubic p(mu), the closed form and the printed matrix.

    The first block is checked through its shifted characteristic polynomial
    against p(mu), the second through its closed-form eigenvalues.  The entrywise
    comparison allows for the sign of the central vector (a diagonal similarity).
    """
    beta = _check_beta(ctx, beta)
    b = sum(beta)
    if b < 1:
        raise ValueError("needs |beta| >= 1 (use invariant_3x3 for the reduced beta = 0 case)")
    n, r = ctx.n, ctx.r
    blk = invariant_3x3(ctx, beta, which)
    base = 2 * r * (n + b) + r * r
    if which == "first":
        target = cubic(n, r, b).coeffs
        cp = blk.shifted_charpoly(base)
        cp_err = float(np.max(np.abs(cp - target)))
        ev_err = float(np.max(np.abs(np.sort(np.roots(target).real) + base - blk.eigenvalues)))
    else:
        cp_err = float("nan")
        ev_err = float(np.max(np.abs(second_closed_form(n, r, b) - blk.eigenvalues)))
    P = printed_3x3(n, r, b, which)
    best, where = math.inf, None
    for sgn in (1.0, -1.0):
        S = np.diag([1.0, 1.0, sgn])
        D = np.abs(S @ blk.matrix @ S - P)
        bad = [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(D > 1e-9))]
        if where is None or len(bad) < len(where):
            best, where = float(D.max()), bad
    return ThreeByThreeReport(which, beta, blk.residual, cp_err, ev_err, best, where)


@dataclass
class CubicBounds:
    mu_low: float
    mu_high: float
    p_low: float
    p_high: float
    p_zero: float

    @property
    def certified(self) -> bool:
        return self.p_low < 0 < self.p_high and self.p_zero > 0


def mu_low(b: int, n: int, r: float) -> float:
    return -((b + n + math.sqrt((b + n) ** 2 + 24 * n * n)) / (2 * n)) * r


def cubic_bounds(b: int, n: int, r: float) -> CubicBounds:
    if b < 1 or n < 1 or not r > 0:
        raise ValueError("need b >= 1, n >= 1 and r > 0")
    p = cubic(n, r, b)
    lo, hi = mu_low(b, n, r), -3.0 * r
    return CubicBounds(lo, hi, float(p(lo)), float(p(hi)), float(p(0.0)))


def bracket_coefficients(n: int) -> tuple[float, float]:
    """Coefficients of |lambda| in the bounds for the lowest eigenvalue."""
    lower = 2 * (n + 1) - (n + 1 + math.sqrt((n + 1) ** 2 + 24 * n * n)) / (2 * n)
    return lower, 2 * n - 1.0


def lowest_bracket(n: int, r: float) -> tuple[float, float]:
    if n < 1 or not r > 0:
        raise ValueError("need n >= 1 and r > 0")
    lo, hi = bracket_coefficients(n)
    return lo * r + r * r, hi * r + r * r


def truncated_spectrum(ctx: DContext, max_level: int, count: int | None = None) -> np.ndarray:
    """Ritz values of Delta_1 on the span of 1-forms with |beta| <= max_level."""
    basis = nl.degree_basis(ctx.model.frame, 1, max_level)
    M = nl.compressed_laplacian(ctx.model, basis)
    vals = np.linalg.eigvalsh(M)
    return vals if count is None else vals[:count]


@dataclass
class LowestReport:
    value: float
    multiplicity: int
    bracket: tuple
    inside: bool
    converged: bool
    spectrum: np.ndarray


def lowest_eigenvalue(ctx: DContext, max_level: int | None = None, window: float = 1e-6) -> LowestReport:
    """Lowest eigenvalue of Delta_1 from two nested truncations.

    Truncated compressions give upper bounds; ``converged`` is set when the two
    levels agree to 1e-10, which happens once the exact low-lying invariant
    subspaces fit inside the truncation.
    """
    if max_level is None:
        max_level = 8 if ctx.n == 1 else 4
    lo = truncated_spectrum(ctx, max_level - 1, 8)
    hi = truncated_spectrum(ctx, max_level, 8)
    v = float(hi[0])
    mult = int(np.sum(np.abs(hi - v) <= window * max(1.0, ctx.r)))
    br = lowest_bracket(ctx.n, ctx.r)
    return LowestReport(v, mult, br, br[0] < v < br[1], bool(abs(lo[0] - v) < 1e-10), hi)


# commuting operators

def transposition(ctx: DContext, i: int, j: int) -> LinearRule:
    """U_ij = a_i* a_j - e(tau^j) i(Z_i) + e(tau^ibar) i(Z_jbar)."""
    f = ctx.model.frame
    for x in (i, j):
        if not 1 <= x <= ctx.pairs:
            raise ValueError(f"index {x} outside 1..{ctx.pairs}")
    return (creation(f, i) @ annihilation(f, j)
            - wedge(f, f.holo(j)) @ contract(f, f.holo(i))
            + wedge(f, f.anti(i)) @ contract(f, f.anti(j)))


COMMUTING = {"U13-U42": ((1, 3), (4, 2)), "U31-U24": ((3, 1), (2, 4)), "U11-U22": ((1, 1), (2, 2))}
EXPLORATORY = {"U23-U41": ((2, 3), (4, 1))}


def commutator_norm(ctx: DContext, name: str, max_level: int = 3) -> float:
    """Largest |[Delta_1, U] x| over 1-form basis elements x with |beta| <= max_level."""
    table = {**COMMUTING, **EXPLORATORY}
    if name not in table:
        raise ValueError(f"unknown operator {name!r}; choose from {sorted(table)}")
    if ctx.n < 2 and name != "U11-U22":
        raise ValueError("this operator needs n >= 2")
    (a, b), (c, d) = table[name]
    U = transposition(ctx, a, b) - transposition(ctx, c, d)
    C = commutator(ctx.model.lap, U)
    worst = 0.0
    for x in nl.degree_basis(ctx.model.frame, 1, max_level):
        worst = max(worst, SparseVector(C.act(x)).norm())
    return worst


def rotation_deviation(n: int, r: float, phi: float, max_level: int = 3, count: int = 12) -> float:
    """Difference of the low truncated spectra at lambda = (r, 0) and its rotation by phi."""
    a = truncated_spectrum(DContext(n, (r, 0.0)), max_level, count)
    b = truncated_spectrum(DContext(n, (r * math.cos(phi), r * math.sin(phi))), max_level, count)
    return float(np.max(np.abs(a - b)))
