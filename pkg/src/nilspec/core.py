"""Sparse operator algebra on (ladder states) x (exterior words).

A basis element is a pair ``(beta, form)``: ``beta`` is a tuple of occupation
numbers and ``form`` is a bitmask over the exterior generators, stored in the
canonical order holomorphic < antiholomorphic < central.  Operators are
``LinearRule`` objects that act on single basis elements and return a dict
``{BasisElement: coefficient}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, NamedTuple

import numpy as np


class LeakageError(ValueError):
    """An operator produced a term outside the declared codomain."""


class DimensionError(ValueError):
    pass


class BasisElement(NamedTuple):
    beta: tuple
    form: int


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class Frame:
    """Index bookkeeping for ``n`` ladder pairs and ``n_central`` central generators.

    Generators are numbered 0..rank-1: holomorphic ``tau^j`` at ``j-1``,
    antiholomorphic ``tau^{jbar}`` at ``n+j-1`` and central ``tau^{w_q}`` at
    ``2n+q-1``.  Pair indices ``j`` and central indices ``q`` are 1-based.
    """

    n: int
    n_central: int = 1

    def __post_init__(self):
        if self.n < 1 or self.n_central < 0:
            raise DimensionError(f"bad frame sizes n={self.n} n_central={self.n_central}")

    @property
    def rank(self) -> int:
        return 2 * self.n + self.n_central

    def _pair(self, j: int) -> int:
        if not 1 <= j <= self.n:
            raise DimensionError(f"pair index {j} outside 1..{self.n}")
        return j - 1

    def holo(self, j: int) -> int:
        return self._pair(j)

    def anti(self, j: int) -> int:
        return self.n + self._pair(j)

    def central(self, q: int = 1) -> int:
        if not 1 <= q <= self.n_central:
            raise DimensionError(f"central index {q} outside 1..{self.n_central}")
        return 2 * self.n + q - 1

    def mask(self, holo: Iterable[int] = (), anti: Iterable[int] = (), central: Iterable[int] = ()) -> int:
        m = 0
        for j in holo:
            m |= 1 << self.holo(j)
        for j in anti:
            m |= 1 << self.anti(j)
        for q in central:
            m |= 1 << self.central(q)
        return m

    def word(self, mask: int) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        """Split a mask into (I, J, central indices), all 1-based."""
        n = self.n
        I = tuple(j + 1 for j in range(n) if mask >> j & 1)
        J = tuple(j + 1 for j in range(n) if mask >> (n + j) & 1)
        W = tuple(q + 1 for q in range(self.n_central) if mask >> (2 * n + q) & 1)
        return I, J, W

    def label(self, g: int) -> str:
        if g < self.n:
            return f"t{g + 1}"
        if g < 2 * self.n:
            return f"t{g - self.n + 1}b"
        if self.n_central == 1:
            return "tw"
        return f"tw{g - 2 * self.n + 1}"

    def element(self, beta, holo=(), anti=(), central=()) -> BasisElement:
        beta = tuple(int(b) for b in beta)
        if len(beta) != self.n:
            raise DimensionError(f"beta has length {len(beta)}, expected {self.n}")
        if min(beta) < 0:
            raise ValueError(f"negative occupation in {beta}")
        return BasisElement(beta, self.mask(holo, anti, central))

    def describe(self, x: BasisElement) -> str:
        gens = [self.label(g) for g in range(self.rank) if x.form >> g & 1]
        return "psi" + str(x.beta) + ("*" + "^".join(gens) if gens else "")


class SparseVector:
    """Finite linear combination of basis elements."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[BasisElement, complex] | None = None):
        self.terms = {x: complex(c) for x, c in (terms or {}).items() if c != 0}

    @classmethod
    def basis(cls, x: BasisElement) -> "SparseVector":
        return cls({x: 1.0})

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __getitem__(self, x):
        return self.terms.get(x, 0j)

    def __add__(self, other: "SparseVector") -> "SparseVector":
        out = dict(self.terms)
        for x, c in other.terms.items():
            out[x] = out.get(x, 0) + c
        return SparseVector(out)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + (-1) * other

    def __rmul__(self, c) -> "SparseVector":
        return SparseVector({x: c * v for x, v in self.terms.items()})

    def __neg__(self):
        return (-1) * self

    def inner(self, other: "SparseVector") -> complex:
        """<self, other>, antilinear in ``self``."""
        small, big = (self.terms, other.terms)
        return sum((small[x].conjugate() * big[x] for x in small if x in big), 0j)

    def norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.terms.values()))

    def prune(self, tol: float = 0.0) -> "SparseVector":
        return SparseVector({x: c for x, c in self.terms.items() if abs(c) > tol})

    def support(self) -> list[BasisElement]:
        return sorted(self.terms)

    def __repr__(self):
        return f"SparseVector({len(self.terms)} terms)"


def _accumulate(out: dict, terms: Mapping, scale: complex = 1.0) -> None:
    for y, d in terms.items():
        out[y] = out.get(y, 0) + scale * d


def _drop_zeros(d: dict) -> dict:
    return {x: c for x, c in d.items() if c != 0}


class LinearRule:
    """Operator defined by its action on basis elements.

    Subclasses implement ``act``.  Rules combine with ``+``, ``-``, scalar
    ``*`` and ``@`` (composition, right factor applied first).
    """

    name = "rule"
    frame: Frame | None = None

    def act(self, x: BasisElement) -> dict:
        raise NotImplementedError

    def adjoint(self) -> "LinearRule":
        raise NotImplementedError

    @property
    def H(self) -> "LinearRule":
        return self.adjoint()

    def apply(self, v) -> SparseVector:
        if isinstance(v, BasisElement):
            return SparseVector(self.act(v))
        out: dict = {}
        for x, c in v.terms.items():
            _accumulate(out, self.act(x), c)
        return SparseVector(_drop_zeros(out))

    __call__ = apply

    def _check(self, other: "LinearRule"):
        if self.frame is not None and other.frame is not None and self.frame != other.frame:
            raise DimensionError(f"cannot combine {self.name} on {self.frame} with {other.name} on {other.frame}")
        return self.frame if self.frame is not None else other.frame

    def __add__(self, other: "LinearRule") -> "LinearRule":
        return Sum([self, other])

    def __sub__(self, other: "LinearRule") -> "LinearRule":
        return Sum([self, Scaled(-1.0, other)])

    def __neg__(self):
        return Scaled(-1.0, self)

    def __mul__(self, c) -> "LinearRule":
        if isinstance(c, LinearRule):
            return Product([self, c])
        return Scaled(c, self)

    def __rmul__(self, c) -> "LinearRule":
        return Scaled(c, self)

    def __matmul__(self, other: "LinearRule") -> "LinearRule":
        return Product([self, other])

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class Elementary(LinearRule):
    def __init__(self, name: str, action: Callable[[BasisElement], dict],
                 adjoint: Callable[[], LinearRule] | None, frame: Frame | None = None):
        self.name = name
        self._action = action
        self._adjoint = adjoint
        self.frame = frame

    def act(self, x):
        return self._action(x)

    def adjoint(self):
        if self._adjoint is None:
            raise NotImplementedError(f"{self.name} has no adjoint")
        return self._adjoint()


class Scaled(LinearRule):
    def __init__(self, c, rule: LinearRule):
        self.c = complex(c)
        self.rule = rule
        self.frame = rule.frame
        self.name = f"({c:g})*{rule.name}" if self.c.imag == 0 else f"({c})*{rule.name}"

    def act(self, x):
        c = self.c
        if c == 0:
            return {}
        return {y: c * d for y, d in self.rule.act(x).items()}

    def adjoint(self):
        return Scaled(self.c.conjugate(), self.rule.adjoint())


class Sum(LinearRule):
    def __init__(self, rules: list[LinearRule]):
        flat = []
        frame = None
        for r in rules:
            if frame is not None and r.frame is not None and r.frame != frame:
                raise DimensionError(f"frame mismatch in sum: {frame} vs {r.frame}")
            frame = frame or r.frame
            flat.extend(r.rules if isinstance(r, Sum) else [r])
        self.rules = flat
        self.frame = frame
        self.name = " + ".join(r.name for r in flat) if len(flat) < 6 else f"sum[{len(flat)}]"

    def act(self, x):
        out: dict = {}
        for r in self.rules:
            _accumulate(out, r.act(x))
        return _drop_zeros(out)

    def adjoint(self):
        return Sum([r.adjoint() for r in self.rules])


class Product(LinearRule):
    """Composition; ``Product([A, B])`` applies ``B`` first."""

    def __init__(self, rules: list[LinearRule]):
        flat = []
        frame = None
        for r in rules:
            if frame is not None and r.frame is not None and r.frame != frame:
                raise DimensionError(f"frame mismatch in composition: {frame} vs {r.frame}")
            frame = frame or r.frame
            flat.extend(r.rules if isinstance(r, Product) else [r])
        self.rules = flat
        self.frame = frame
        self.name = "".join(r.name for r in flat) if len(flat) < 6 else f"prod[{len(flat)}]"

    def act(self, x):
        cur = {x: 1.0}
        for r in reversed(self.rules):
            nxt: dict = {}
            for y, c in cur.items():
                _accumulate(nxt, r.act(y), c)
            cur = nxt
            if not cur:
                return {}
        return _drop_zeros(cur)

    def adjoint(self):
        return Product([r.adjoint() for r in reversed(self.rules)])


class Cached(LinearRule):
    """Memoize the action of an immutable rule."""

    def __init__(self, rule: LinearRule):
        self.rule = rule
        self.frame = rule.frame
        self.name = rule.name
        self._memo: dict = {}

    def act(self, x):
        got = self._memo.get(x)
        if got is None:
            got = self._memo[x] = self.rule.act(x)
        return got

    def adjoint(self):
        return Cached(self.rule.adjoint())


def compose(*rules: LinearRule) -> LinearRule:
    return Product(list(rules))


def add(*rules: LinearRule) -> LinearRule:
    return Sum(list(rules))


def scale(c, rule: LinearRule) -> LinearRule:
    return Scaled(c, rule)


def adjoint(rule: LinearRule) -> LinearRule:
    return rule.adjoint()


def commutator(A: LinearRule, B: LinearRule) -> LinearRule:
    return A @ B - B @ A


def anticommutator(A: LinearRule, B: LinearRule) -> LinearRule:
    return A @ B + B @ A


def identity(frame: Frame | None = None) -> LinearRule:
    rule = Elementary("1", lambda x: {x: 1.0}, None, frame)
    rule._adjoint = lambda: rule
    return rule


def zero(frame: Frame | None = None) -> LinearRule:
    rule = Elementary("0", lambda x: {}, None, frame)
    rule._adjoint = lambda: rule
    return rule


# ladder operators

def creation(frame: Frame, j: int, scale: complex = 1.0) -> LinearRule:
    i = frame._pair(j)
    s = complex(scale)

    def action(x):
        b = x.beta
        nb = b[:i] + (b[i] + 1,) + b[i + 1:]
        return {BasisElement(nb, x.form): s * math.sqrt(b[i] + 1)}

    return Elementary(f"a{j}*", action, lambda: annihilation(frame, j, s.conjugate()), frame)


def annihilation(frame: Frame, j: int, scale: complex = 1.0) -> LinearRule:
    i = frame._pair(j)
    s = complex(scale)

    def action(x):
        b = x.beta
        if b[i] == 0:
            return {}
        nb = b[:i] + (b[i] - 1,) + b[i + 1:]
        return {BasisElement(nb, x.form): s * math.sqrt(b[i])}

    return Elementary(f"a{j}", action, lambda: creation(frame, j, s.conjugate()), frame)


def number(frame: Frame, j: int) -> LinearRule:
    i = frame._pair(j)
    rule = Elementary(f"N{j}", lambda x: {x: float(x.beta[i])} if x.beta[i] else {}, None, frame)
    rule._adjoint = lambda: rule
    return rule


# exterior operators

def _check_generator(frame: Frame, g: int) -> int:
    if not 0 <= g < frame.rank:
        raise DimensionError(f"generator {g} outside 0..{frame.rank - 1}")
    return g


def wedge(frame: Frame, g: int) -> LinearRule:
    """Exterior multiplication from the left by generator ``g``."""
    _check_generator(frame, g)
    bit = 1 << g
    below = bit - 1

    def action(x):
        m = x.form
        if m & bit:
            return {}
        sign = -1.0 if bin(m & below).count("1") & 1 else 1.0
        return {BasisElement(x.beta, m | bit): sign}

    return Elementary(f"e({frame.label(g)})", action, lambda: contract(frame, g), frame)


def contract(frame: Frame, g: int) -> LinearRule:
    """Interior product with the vector dual to generator ``g``."""
    _check_generator(frame, g)
    bit = 1 << g
    below = bit - 1

    def action(x):
        m = x.form
        if not m & bit:
            return {}
        sign = -1.0 if bin(m & below).count("1") & 1 else 1.0
        return {BasisElement(x.beta, m ^ bit): sign}

    return Elementary(f"i({frame.label(g)})", action, lambda: wedge(frame, g), frame)


def permutation_sign(seq: list[int]) -> int:
    """Sign of the permutation sorting ``seq`` (distinct entries)."""
    inv = 0
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                inv += 1
    return -1 if inv & 1 else 1


def swap_pairs(frame: Frame, i: int, j: int) -> LinearRule:
    """Exchange ladder pairs i and j in states and in forms (multiplicatively)."""
    a, b = frame._pair(i), frame._pair(j)
    n = frame.n
    perm = list(range(frame.rank))
    perm[a], perm[b] = b, a
    perm[n + a], perm[n + b] = n + b, n + a

    def action(x):
        beta = list(x.beta)
        beta[a], beta[b] = beta[b], beta[a]
        gens = [perm[g] for g in range(frame.rank) if x.form >> g & 1]
        m = 0
        for g in gens:
            m |= 1 << g
        return {BasisElement(tuple(beta), m): float(permutation_sign(gens))}

    rule = Elementary(f"chi{i}{j}", action, None, frame)
    rule._adjoint = lambda: rule
    return rule


# matrices

def matrix_of(A: LinearRule, domain: list[BasisElement], codomain: list[BasisElement] | None = None) -> np.ndarray:
    """Matrix of ``A`` with columns indexed by ``domain``.

    Raises ``LeakageError`` if some output term is not in ``codomain``.
    """
    if codomain is None:
        codomain = domain
    index = {x: r for r, x in enumerate(codomain)}
    M = np.zeros((len(codomain), len(domain)), dtype=complex)
    for col, x in enumerate(domain):
        for y, c in A.act(x).items():
            r = index.get(y)
            if r is None:
                if abs(c) == 0:
                    continue
                raise LeakageError(f"{A.name} maps {x} to {y} outside the codomain")
            M[r, col] += c
    return M


def vectors_to_matrix(vectors: list[SparseVector], support: list[BasisElement] | None = None):
    """Stack sparse vectors as columns over a common support."""
    if support is None:
        seen = set()
        for v in vectors:
            seen.update(v.terms)
        support = sorted(seen)
    index = {x: r for r, x in enumerate(support)}
    M = np.zeros((len(support), len(vectors)), dtype=complex)
    for col, v in enumerate(vectors):
        for x, c in v.terms.items():
            M[index[x], col] = c
    return M, support


def compress(A: LinearRule, basis_vectors: list[SparseVector]):
    """Coefficients C with A b_j = sum_i C_ij b_i, plus the least-squares residual.

    A nonzero residual means the span is not invariant.
    """
    images = [A.apply(v) for v in basis_vectors]
    B, support = vectors_to_matrix(basis_vectors + images)
    k = len(basis_vectors)
    basis_cols, image_cols = B[:, :k], B[:, k:]
    C, *_ = np.linalg.lstsq(basis_cols, image_cols, rcond=None)
    resid = np.linalg.norm(basis_cols @ C - image_cols)
    return C, float(resid)
