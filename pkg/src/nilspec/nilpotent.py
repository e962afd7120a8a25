"""Step-2 nilpotent Lie algebras, H-type tests, Darboux frames and form Laplacians.

An algebra is ``g = v + z`` with orthonormal bases X_1..X_m of v and W_1..W_l
of the centre, and brackets ``[X_i, X_j] = sum_q C[i, j, q] W_q``.

For a functional lambda on the centre the Laplacian is built from

    d = sum_a e(tau^a) pi(E_a) + sum_q e(tau^{w_q}) pi(W_q)
        - 1/2 sum_{a,b,q} c_ab^q e(tau^a) e(tau^b) i(W_q)

in a complex frame E_a = Z_j, Z_jbar adapted to lambda, with
pi(Z_j) = -i sqrt|lambda| a_j*, pi(Z_jbar) = -i sqrt|lambda| a_j and
pi(W_q) = -i lambda_q.  The Laplacian is d d* + d* d.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (BasisElement, Cached, Frame, LinearRule, Sum, annihilation, contract, creation, identity,
                   matrix_of, wedge)


class DegenerateFormError(ValueError):
    def __init__(self, msg, kernel_vector=None):
        super().__init__(msg)
        self.kernel_vector = kernel_vector


@dataclass
class StepTwoAlgebra:
    m: int
    l: int
    C: np.ndarray
    name: str = "algebra"

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=float)
        if self.C.shape != (self.m, self.m, self.l):
            raise ValueError(f"structure constants have shape {self.C.shape}, expected {(self.m, self.m, self.l)}")
        dev = np.abs(self.C + self.C.transpose(1, 0, 2)).max() if self.C.size else 0.0
        if dev > 1e-12:
            raise ValueError(f"structure constants are not antisymmetric (deviation {dev:.3e})")

    @classmethod
    def from_brackets(cls, m: int, l: int, entries, name: str = "algebra") -> "StepTwoAlgebra":
        """Build from 1-based ``(i, j, q, value)`` entries meaning [X_i, X_j] has W_q-component value."""
        C = np.zeros((m, m, l))
        seen: dict = {}
        for i, j, q, val in entries:
            i, j, q = int(i), int(j), int(q)
            if not (1 <= i <= m and 1 <= j <= m and 1 <= q <= l):
                raise ValueError(f"bracket index ({i}, {j}, {q}) out of range")
            if i == j and val != 0:
                raise ValueError(f"[X_{i}, X_{i}] must vanish")
            key, sval = ((i, j, q), float(val)) if i < j else ((j, i, q), -float(val))
            if key in seen and seen[key] != sval:
                raise ValueError(f"inconsistent entries for [X_{key[0]}, X_{key[1]}] along W_{q}")
            seen[key] = sval
        for (i, j, q), v in seen.items():
            C[i - 1, j - 1, q - 1] = v
            C[j - 1, i - 1, q - 1] = -v
        return cls(m, l, C, name)

    @classmethod
    def from_json(cls, source) -> "StepTwoAlgebra":
        if isinstance(source, (str, Path)) and Path(source).exists():
            data = json.loads(Path(source).read_text())
        elif isinstance(source, str):
            data = json.loads(source)
        else:
            data = source
        return cls.from_brackets(data["m"], data["l"], data["C"], data.get("name", "algebra"))

    def to_json(self) -> str:
        entries = [[i + 1, j + 1, q + 1, float(self.C[i, j, q])]
                   for i, j, q in itertools.product(range(self.m), range(self.m), range(self.l))
                   if i < j and self.C[i, j, q] != 0]
        return json.dumps({"m": self.m, "l": self.l, "C": entries, "name": self.name}, sort_keys=True)

    def bracket(self, x, y) -> np.ndarray:
        """Centre component of [x, y] for (possibly complex) coefficient vectors x, y."""
        return np.einsum("i,j,ijq->q", x, y, self.C)


def heisenberg_algebra(n: int) -> StepTwoAlgebra:
    """Basis X_1..X_n, Y_1..Y_n with [X_j, Y_j] = W."""
    return StepTwoAlgebra.from_brackets(2 * n, 1, [(j, n + j, 1, 1.0) for j in range(1, n + 1)], f"H{2 * n + 1}")


def dgroup_algebra(n: int) -> StepTwoAlgebra:
    """The 4n + 2 dimensional algebra with two-dimensional centre."""
    entries = []
    for b in range(n):
        x1, x2, x3, x4 = 4 * b + 1, 4 * b + 2, 4 * b + 3, 4 * b + 4
        entries += [(x1, x3, 1, 1.0), (x1, x4, 2, 1.0), (x2, x3, 2, 1.0), (x2, x4, 1, -1.0)]
    return StepTwoAlgebra.from_brackets(4 * n, 2, entries, f"D{4 * n + 2}")


def degenerate_algebra() -> StepTwoAlgebra:
    """m = 2, l = 2, [X_1, X_2] = W_1: J(W_2) vanishes."""
    return StepTwoAlgebra.from_brackets(2, 2, [(1, 2, 1, 1.0)], "degenerate")


def j_map(algebra: StepTwoAlgebra, W) -> np.ndarray:
    """Matrix J(W) on v with <J(W) X, Y> = <W, [X, Y]>."""
    W = np.asarray(W, dtype=float)
    if W.shape != (algebra.l,):
        raise ValueError(f"centre vector has shape {W.shape}, expected ({algebra.l},)")
    return -np.einsum("ijq,q->ij", algebra.C, W)


def is_htype(algebra: StepTwoAlgebra, samples: int = 16, seed: int = 0, tol: float = 1e-12):
    """Check J(W)^2 = -|W|^2 and J(W)J(W') + J(W')J(W) = -2<W,W'> on basis and random vectors."""
    rng = np.random.default_rng(seed)
    vecs = [np.eye(algebra.l)[q] for q in range(algebra.l)]
    for _ in range(samples):
        w = rng.normal(size=algebra.l)
        vecs.append(w / np.linalg.norm(w))
    I = np.eye(algebra.m)
    dev = 0.0
    for W in vecs:
        J = j_map(algebra, W)
        dev = max(dev, np.abs(J @ J + (W @ W) * I).max())
    for W, W2 in itertools.combinations(vecs, 2):
        A, B = j_map(algebra, W), j_map(algebra, W2)
        dev = max(dev, np.abs(A @ B + B @ A + 2 * (W @ W2) * I).max())
    return bool(dev < tol), float(dev)


def bracket_form(algebra: StepTwoAlgebra, lam) -> np.ndarray:
    """B_lambda[i, j] = lambda([X_i, X_j])."""
    lam = np.asarray(lam, dtype=float)
    return np.einsum("ijq,q->ij", algebra.C, lam)


@dataclass
class SymplecticFrame:
    """Orthonormal X_1..X_n, Y_1..Y_n (rows) with lambda([X_j, Y_k]) = delta_jk |lambda|."""

    X: np.ndarray
    Y: np.ndarray
    lam: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def complex_frame(self) -> np.ndarray:
        """Rows Z_1..Z_n, Z_1bar..Z_nbar with Z = (X - iY)/sqrt2, Zbar = (X + iY)/sqrt2."""
        Z = (self.X - 1j * self.Y) / math.sqrt(2)
        return np.vstack([Z, Z.conj()])


def symplectic_frame(algebra: StepTwoAlgebra, lam, tol: float = 1e-10) -> SymplecticFrame:
    lam = np.asarray(lam, dtype=float)
    r = float(np.linalg.norm(lam))
    if r == 0:
        raise ValueError("lambda must be nonzero")
    J = j_map(algebra, lam)
    s = np.linalg.svd(J, compute_uv=False)
    if s.min() < tol * r:
        _, _, vh = np.linalg.svd(J)
        raise DegenerateFormError("bracket form is degenerate on v", kernel_vector=vh[-1])
    if np.abs(J @ J + r * r * np.eye(algebra.m)).max() > 1e-9 * max(1.0, r * r):
        raise DegenerateFormError("J(lambda)^2 is not -|lambda|^2; the frame needs an H-type algebra")
    Xs, Ys, chosen = [], [], []
    for i in range(algebra.m):
        x = np.eye(algebra.m)[i]
        for u in chosen:
            x = x - (u @ x) * u
        nx = np.linalg.norm(x)
        if nx < 1e-8:
            continue
        x = x / nx
        y = J @ x / r
        Xs.append(x)
        Ys.append(y)
        chosen += [x, y]
        if len(Xs) * 2 == algebra.m:
            break
    return SymplecticFrame(np.array(Xs), np.array(Ys), lam)


def frame_deviation(algebra: StepTwoAlgebra, frame: SymplecticFrame) -> float:
    """Largest violation of the Darboux relations and of orthonormality."""
    lam = frame.lam
    r = np.linalg.norm(lam)
    B = bracket_form(algebra, lam)
    X, Y = frame.X, frame.Y
    n = frame.n
    dev = np.abs(X @ B @ Y.T - r * np.eye(n)).max()
    dev = max(dev, np.abs(X @ B @ X.T).max(), np.abs(Y @ B @ Y.T).max())
    V = np.vstack([X, Y])
    dev = max(dev, np.abs(V @ V.T - np.eye(2 * n)).max())
    target = lam / r
    for j in range(n):
        dev = max(dev, np.abs(algebra.bracket(X[j], Y[j]) - target).max())
    return float(dev)


def pfaffian_skew(A: np.ndarray) -> float:
    """Pfaffian of a real skew-symmetric matrix by pivoted elimination."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("square matrix expected")
    if n % 2:
        return 0.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.abs(A[k + 1:, k]).argmax())
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0.0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2:] / A[k, k + 1]
            col = A[k + 2:, k + 1].copy()
            A[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(pf)


def pfaffian(algebra: StepTwoAlgebra, lam, tol: float = 1e-12) -> float:
    """Pfaffian of the bracket form on v modulo its radical (0 if lambda = 0)."""
    B = bracket_form(algebra, lam)
    if not np.any(np.asarray(lam)):
        return 0.0
    u, s, vh = np.linalg.svd(B)
    rank = int((s > tol * max(1.0, s.max())).sum())
    if rank == 0:
        return 0.0
    Q = vh[:rank].T
    return pfaffian_skew(Q.T @ B @ Q)


# Laplacian

@dataclass
class LaplacianModel:
    algebra: StepTwoAlgebra
    lam: np.ndarray
    frame: Frame
    vectors: np.ndarray
    d: LinearRule
    d_star: LinearRule
    lap: LinearRule
    structure: np.ndarray = field(repr=False)

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.lam))


def frame_structure(algebra: StepTwoAlgebra, vectors: np.ndarray) -> np.ndarray:
    """c[a, b, q] with [E_a, E_b] = sum_q c[a, b, q] W_q for rows E_a of ``vectors``."""
    return np.einsum("ai,bj,ijq->abq", vectors, vectors, algebra.C)


def laplacian_model(algebra: StepTwoAlgebra, lam, vectors: np.ndarray | None = None,
                    cache: bool = True) -> LaplacianModel:
    """d, d* and d d* + d* d in the ladder model for ``lam``.

    ``vectors`` optionally fixes the complex frame (rows Z_1..Z_n, Z_1bar..Z_nbar);
    by default it is the Darboux frame from ``symplectic_frame``.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (algebra.l,):
        raise ValueError(f"lambda has shape {lam.shape}, expected ({algebra.l},)")
    if vectors is None:
        vectors = symplectic_frame(algebra, lam).complex_frame()
    vectors = np.asarray(vectors, dtype=complex)
    if algebra.m % 2 or vectors.shape != (algebra.m, algebra.m):
        raise ValueError("frame must have m rows of length m, m even")
    n = algebra.m // 2
    f = Frame(n, algebra.l)
    r = float(np.linalg.norm(lam))
    s = math.sqrt(r)
    c = frame_structure(algebra, vectors)
    terms = []
    for j in range(1, n + 1):
        terms.append(wedge(f, f.holo(j)) @ creation(f, j, -1j * s))
        terms.append(wedge(f, f.anti(j)) @ annihilation(f, j, -1j * s))
    for q in range(1, algebra.l + 1):
        if lam[q - 1] != 0:
            terms.append((-1j * lam[q - 1]) * wedge(f, f.central(q)))
    # the pair (a, b) and (b, a) give equal contributions
    for a, b in itertools.combinations(range(2 * n), 2):
        for q in range(algebra.l):
            coef = c[a, b, q]
            if abs(coef) > 1e-15:
                terms.append((-coef) * (wedge(f, a) @ wedge(f, b) @ contract(f, f.central(q + 1))))
    d = Sum(terms)
    d_star = d.adjoint()
    if cache:
        d, d_star = Cached(d), Cached(d_star)
    lap = d @ d_star + d_star @ d
    return LaplacianModel(algebra, lam, f, vectors, d, d_star, lap, c)


def build_lap(algebra: StepTwoAlgebra, lam, degree: int = 1, vectors=None) -> LinearRule:
    if degree not in (0, 1):
        raise ValueError(f"degree {degree} is not supported for generic algebras (0 or 1)")
    return laplacian_model(algebra, lam, vectors).lap


def degree_basis(frame: Frame, degree: int, max_level: int, min_level: int = 0) -> list[BasisElement]:
    """Basis elements of the given form degree with min_level <= |beta| <= max_level."""
    out = []
    for level in range(min_level, max_level + 1):
        for beta in compositions(level, frame.n):
            for gens in itertools.combinations(range(frame.rank), degree):
                m = 0
                for g in gens:
                    m |= 1 << g
                out.append(BasisElement(beta, m))
    return out


def compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _support(rule: LinearRule, basis) -> list:
    seen = set()
    for x in basis:
        seen.update(rule.act(x))
    return sorted(seen)


def compressed_laplacian(model: LaplacianModel, basis: list[BasisElement]) -> np.ndarray:
    """P (d d* + d* d) P on span(basis), assembled as A^H A + B^H B with A = dP, B = d*P."""
    A = matrix_of(model.d, basis, _support(model.d, basis))
    B = matrix_of(model.d_star, basis, _support(model.d_star, basis))
    return A.conj().T @ A + B.conj().T @ B


def three_vectors(model: LaplacianModel, beta):
    """v1 = sum_j e(tau^j) a_j* psi, v2 = sum_j e(tau^jbar) a_j psi, v3 = sum_q lambda_q tau^{w_q} psi."""
    from .core import SparseVector
    f = model.frame
    x = f.element(beta)
    v1 = SparseVector()
    v2 = SparseVector()
    for j in range(1, f.n + 1):
        v1 = v1 + (wedge(f, f.holo(j)) @ creation(f, j)).apply(x)
        v2 = v2 + (wedge(f, f.anti(j)) @ annihilation(f, j)).apply(x)
    v3 = SparseVector()
    for q in range(1, f.n_central + 1):
        v3 = v3 + float(model.lam[q - 1]) * wedge(f, f.central(q)).apply(x)
    return [v1, v2, v3]


def three_block(n: int, r: float, b: int):
    """Closed form of the Laplacian on span(v1, v2, v3) and its eigenvalues."""
    base = r * (2 * b + n) + r * r
    M = np.array([
        [r, 0.0, -r ** 1.5],
        [0.0, -r, r ** 1.5],
        [-(b + n) / math.sqrt(r), b / math.sqrt(r), n],
    ]) + base * np.eye(3)
    root = math.sqrt(n * n / 4 + r * (2 * b + n) + r * r)
    return M, np.array(sorted([base, base + n / 2 - root, base + n / 2 + root]))


def lower_bound_check(algebra: StepTwoAlgebra, lam, degree: int = 1, max_level: int = 3) -> dict:
    """Smallest eigenvalue of the compressed Laplacian against |lambda|^2."""
    if degree not in (0, 1):
        raise ValueError("degree must be 0 or 1")
    model = laplacian_model(algebra, lam)
    basis = degree_basis(model.frame, degree, max_level)
    M = compressed_laplacian(model, basis)
    vals = np.linalg.eigvalsh(M)
    r = model.r
    return {"min_eigenvalue": float(vals.min()), "bound": r * r, "ok": bool(vals.min() >= r * r - 1e-9),
            "dim": len(basis)}
