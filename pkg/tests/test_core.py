from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilspec.core import (BasisElement, DimensionError, Frame, LeakageError, SparseVector, anticommutator,
                          annihilation, commutator, compress, contract, creation, identity, matrix_of,
                          number, permutation_sign, swap_pairs, wedge)

N = 3
F = Frame(N)


@st.composite
def elements(draw, frame=F, max_occ=4):
    beta = tuple(draw(st.integers(0, max_occ)) for _ in range(frame.n))
    form = draw(st.integers(0, (1 << frame.rank) - 1))
    return BasisElement(beta, form)


@st.composite
def vectors(draw, frame=F):
    xs = draw(st.lists(elements(frame), min_size=1, max_size=5))
    cs = draw(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                       min_size=len(xs), max_size=len(xs)))
    return SparseVector(dict(zip(xs, cs)))


def test_frame_layout():
    assert F.rank == 2 * N + 1
    assert [F.holo(1), F.anti(1), F.central()] == [0, N, 2 * N]
    x = F.element((1, 0, 2), holo=[2], anti=[1], central=[1])
    assert F.word(x.form) == ((2,), (1,), (1,))
    assert F.describe(x) == "psi(1, 0, 2)*t2^t1b^tw"


def test_frame_errors():
    with pytest.raises(DimensionError):
        Frame(0)
    with pytest.raises(DimensionError):
        F.holo(4)
    with pytest.raises(DimensionError):
        F.element((1, 2))
    with pytest.raises(ValueError):
        F.element((1, -1, 0))


def test_ladder_action():
    x = F.element((2, 0, 1))
    assert creation(F, 1).apply(x)[F.element((3, 0, 1))] == pytest.approx(math.sqrt(3))
    assert annihilation(F, 1).apply(x)[F.element((1, 0, 1))] == pytest.approx(math.sqrt(2))
    assert len(annihilation(F, 2).apply(x)) == 0
    assert number(F, 1).apply(x)[x] == 2


def test_wedge_signs():
    x = F.element((0, 0, 0), holo=[1], central=[1])
    y = wedge(F, F.anti(2)).apply(x)
    assert y[F.element((0, 0, 0), holo=[1], anti=[2], central=[1])] == -1
    assert len(wedge(F, F.holo(1)).apply(x)) == 0


@settings(max_examples=60, deadline=None)
@given(elements(), st.integers(1, N), st.integers(1, N))
def test_canonical_commutation(x, i, j):
    v = SparseVector.basis(x)
    lhs = commutator(annihilation(F, i), creation(F, j)).apply(v)
    rhs = v if i == j else SparseVector()
    assert (lhs - rhs).norm() < 1e-12


@settings(max_examples=60, deadline=None)
@given(elements(), st.integers(0, 2 * N), st.integers(0, 2 * N))
def test_canonical_anticommutation(x, g, h):
    v = SparseVector.basis(x)
    assert anticommutator(wedge(F, g), wedge(F, h)).apply(v).norm() == 0
    lhs = anticommutator(contract(F, g), wedge(F, h)).apply(v)
    assert (lhs - (v if g == h else SparseVector())).norm() == 0


@settings(max_examples=40, deadline=None)
@given(vectors(), vectors(), st.integers(1, N), st.integers(0, 2 * N))
def test_adjoint_pairing(u, v, j, g):
    A = 0.7j * creation(F, j) @ wedge(F, g) + 1.3 * annihilation(F, j) @ contract(F, g)
    assert abs(u.inner(A.apply(v)) - A.adjoint().apply(u).inner(v)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(elements(), st.integers(1, N), st.integers(1, N))
def test_swap_is_involution(x, i, j):
    chi = swap_pairs(F, i, j)
    v = SparseVector.basis(x)
    assert ((chi @ chi).apply(v) - v).norm() == 0


def test_permutation_sign():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([2, 0, 1]) == 1


def test_rule_algebra():
    x = SparseVector.basis(F.element((1, 1, 0)))
    a, ad = annihilation(F, 1), creation(F, 1)
    assert ((ad @ a).apply(x) - number(F, 1).apply(x)).norm() < 1e-12
    assert ((2 * identity(F) - identity(F)).apply(x) - x).norm() == 0
    assert ((-a).apply(x) + a.apply(x)).norm() == 0


def test_vector_arithmetic():
    x, y = F.element((0, 0, 0)), F.element((1, 0, 0))
    u = SparseVector({x: 1, y: 2j})
    assert u.norm() == pytest.approx(math.sqrt(5))
    assert u.inner(u) == pytest.approx(5)
    assert (u - u).norm() == 0
    assert SparseVector({x: 1e-20}).prune(1e-15).terms == {}


def test_matrix_of_and_leakage():
    basis = [F.element((b, 0, 0)) for b in range(3)]
    M = matrix_of(number(F, 1), basis)
    assert np.allclose(M, np.diag([0, 1, 2]))
    with pytest.raises(LeakageError):
        matrix_of(creation(F, 1), basis)


def test_compress_residual():
    vecs = [SparseVector.basis(F.element((b, 0, 0))) for b in range(3)]
    C, res = compress(number(F, 1), vecs)
    assert res < 1e-14 and np.allclose(C, np.diag([0, 1, 2]))
    _, res = compress(creation(F, 1), vecs)
    assert res > 0.5
