from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilspec import heisenberg as hz
from nilspec.core import SparseVector


def test_context_validation():
    with pytest.raises(ValueError):
        hz.Context(0)
    with pytest.raises(ValueError):
        hz.Context(1, 4)
    with pytest.raises(ValueError):
        hz.Context(1, 0, 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 7), st.floats(0.2, 3.0), st.data())
def test_d_squares_to_zero(n, p, k, data):
    p = min(p, 2 * n)
    ctx = hz.Context(n, p, k)
    gammas = hz.enumerate_gammas(n, p, 3)
    g = data.draw(st.sampled_from(gammas))
    d = hz.build_d(ctx)
    for x in hz.block_basis(n, p, g):
        assert (d @ d).apply(SparseVector.basis(x)).norm() < 1e-12


def test_block_examples():
    b = hz.enumerate_block(hz.Context(1, 1, 1.0), (0,))
    f = hz.Context(1).frame
    assert list(b.basis) == [f.element((1,), holo=[1]), f.element((0,), central=[1])]
    np.testing.assert_allclose(hz.block_spectrum(hz.Context(1, 1, 1.0), (0,)).values, [2, 4], atol=1e-12)
    b = hz.enumerate_block(hz.Context(1, 1, 1.0), (-1,))
    assert list(b.basis) == [f.element((0,), holo=[1])]
    np.testing.assert_allclose(hz.block_spectrum(hz.Context(1, 1, 1.0), (-1,)).values, [1], atol=1e-12)
    b = hz.enumerate_block(hz.Context(2, 0, 1.0), (3, 1))
    assert b.dim == 1


def test_empty_and_invalid_blocks():
    with pytest.raises(ValueError):
        hz.validate_gamma(2, 1, (-1, -1))
    with pytest.raises(ValueError):
        hz.validate_gamma(2, 1, (0,))
    with pytest.raises(hz.EmptyBlockError):
        hz.enumerate_block(hz.Context(2, 4, 1.0), (-1, -1))
    assert hz.block_basis(2, 4, (-1, -1)) == ()


def test_blocks_partition_low_states():
    # blocks are disjoint and stay within the requested |gamma|
    n, p = 2, 1
    seen = []
    for g in hz.enumerate_gammas(n, p, 3):
        seen.extend(hz.block_basis(n, p, g))
    assert len(seen) == len(set(seen))
    for x in seen:
        assert sum(hz.gamma_of(x, n)) <= 3


def test_Ujj_eigenvalue():
    ctx = hz.Context(2, 1, 1.0)
    f = ctx.frame
    x = SparseVector.basis(f.element((2, 0), holo=[1]))
    assert (hz.build_Ujj(1, ctx).apply(x) - 1 * x).norm() < 1e-12


def test_composed_matches_explicit_small():
    for n in (1, 2):
        for p in range(2 * n + 2):
            for g in hz.enumerate_gammas(n, p, 3):
                a = hz.parts_at(hz.block_parts(n, p, g, "composed"), 0.7)
                b = hz.parts_at(hz.block_parts(n, p, g, "explicit"), 0.7)
                assert np.abs(a - b).max() < 1e-12


def test_commutators_vanish():
    ctx = hz.Context(2, 2, 0.5)
    for g in hz.enumerate_gammas(2, 2, 3):
        for i in (1, 2):
            for j in (1, 2):
                assert hz.commutator_norm(ctx, "U", i, j, g) < 1e-10
        assert hz.commutator_norm(ctx, "chi", 1, 2, g) < 1e-10


def test_spectral_equivalence():
    ctx = hz.Context(2, 2, 1.0)
    assert hz.spectral_equivalence_check(ctx, (1, 2), (2, 1))["equivalent"]
    assert hz.spectral_equivalence_check(ctx, (0, 0), (0, 0))["equivalent"]
    with pytest.raises(ValueError):
        hz.spectral_equivalence_check(ctx, (0, 0), (3, 1))


def test_kernel_lemma():
    assert hz.kernel_lemma_check(hz.Context(2, 1, 1.0), (1, 2)) > 1e-8
    assert hz.kernel_lemma_check(hz.Context(2, 0, 1.0), (0, 2)) > 0
    assert hz.kernel_lemma_check(hz.Context(2, 1, 1.0), (1, 1)) >= 0
    with pytest.raises(ValueError):
        hz.kernel_lemma_check(hz.Context(1, 1, 1.0), (1,))


def test_chi_relations():
    rel = hz.chi_relations_check(3, 2)
    assert max(rel.values()) == 0.0


def test_hodge_pairing_small():
    r = hz.hodge_pair_check(1, 1, 0.5)
    assert r["ok"] and r["count"][0] == r["count"][1]


def test_hermitian_blocks():
    ctx = hz.Context(2, 2, 1.3)
    for g in hz.enumerate_gammas(2, 2, 2):
        M = hz.block_matrix(ctx, g)
        assert np.abs(M - M.conj().T).max() < 1e-12
        assert hz.block_spectrum(ctx, g).values.min() >= ctx.k ** 2 - 1e-9
