"""The eleven acceptance criteria, each at its stated tolerance.

Each test prints one PASS/FAIL line (also collected in the terminal summary).
Run directly with ``python3 tests/test_acceptance.py`` or through pytest.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from nilspec import catalog, dgroup, heat
from nilspec import heisenberg as hz
from nilspec import nilpotent as nl
from nilspec.core import SparseVector, matrix_of
from nilspec.nilpotent import compositions

KS = (0.5, 1.0, 2.0)


def test_functions_baseline(record):
    t0 = time.perf_counter()
    worst = 0.0
    for n in (1, 2, 3):
        for k in KS:
            ctx = hz.Context(n, 0, k)
            lap = hz.build_laplacian(ctx)
            for size in range(9):
                for beta in compositions(size, n):
                    x = SparseVector.basis(ctx.frame.element(beta))
                    lam = 2 * k * size + n * k + k * k
                    worst = max(worst, (lap.apply(x) - lam * x).norm())
    dt = time.perf_counter() - t0
    ok = worst < 1e-12
    record(1, ok, f"function eigenvalues 2k|b|+nk+k^2, max residual {worst:.2e} ({dt:.1f}s)")
    assert ok


def test_composed_equals_explicit(record):
    t0 = time.perf_counter()
    worst, blocks = 0.0, 0
    for n in (1, 2, 3):
        for p in range(2 * n + 2):
            for g in hz.enumerate_gammas(n, p, 6):
                comp = hz.block_parts(n, p, g, "composed")
                expl = hz.block_parts(n, p, g, "explicit")
                for k in KS:
                    worst = max(worst, float(np.abs(hz.parts_at(comp, k) - hz.parts_at(expl, k)).max()))
                blocks += 1
    dt = time.perf_counter() - t0
    ok = worst < 1e-10
    record(2, ok, f"dd*+d*d vs explicit Laplacian on {blocks} blocks, max entry diff {worst:.2e} ({dt:.1f}s)")
    assert ok


def test_commutator_suite(record):
    t0 = time.perf_counter()
    worst = 0.0
    for n in (1, 2, 3):
        for p in range(2 * n + 2):
            for k in KS:
                ctx = hz.Context(n, p, k)
                for g in hz.enumerate_gammas(n, p, 6):
                    for i in range(1, n + 1):
                        for j in range(1, n + 1):
                            worst = max(worst, hz.commutator_norm(ctx, "U", i, j, g))
                            if i < j:
                                worst = max(worst, hz.commutator_norm(ctx, "chi", i, j, g))
    rel = {n: hz.chi_relations_check(n, 6) for n in (1, 2, 3)}
    rel_worst = max(max(r.values()) for r in rel.values())
    dt = time.perf_counter() - t0
    ok = worst < 1e-10 and rel_worst == 0.0
    record(3, ok, f"[U_ij,D], [chi_ij,D] max {worst:.2e}; chi relations max deviation {rel_worst:.1e} ({dt:.1f}s)")
    assert ok


def test_lowest_eigenvalue_and_multiplicity(record):
    t0 = time.perf_counter()
    bad = []
    for n in (1, 2, 3):
        for p in range(n + 1):
            for k in KS:
                ctx = hz.Context(n, p, k)
                vals = np.concatenate([hz.block_spectrum(ctx, g).values for g in hz.enumerate_gammas(n, p, 8)])
                target = k * k + (n - p) * k
                low = float(vals.min())
                mult = int(np.sum(np.abs(vals - low) < 1e-6))
                if abs(low - target) > 1e-8 or mult != math.comb(n, p):
                    bad.append((n, p, k, low, mult))
    dt = time.perf_counter() - t0
    ok = not bad
    record(4, ok, f"min eigenvalue k^2+(n-p)k with multiplicity C(n,p); failures {bad} ({dt:.1f}s)")
    assert ok


def test_catalog_coverage(record):
    t0 = time.perf_counter()
    bad = []
    for n, p in [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)]:
        for k in (0.5, 1.0):
            rep = catalog.match_spectrum(catalog.numeric_spectra(n, p, k, 6), n, p, k,
                                         tol=1e-8, gamma_max=6, g_hit=4)
            if not rep.ok:
                bad.append((n, p, k, len(rep.numeric_orphans), len(rep.catalog_orphans)))
    dt = time.perf_counter() - t0
    ok = not bad
    record(5, ok, f"catalog vs numeric spectra, orphans {bad or 'none'} ({dt:.1f}s)")
    assert ok


def test_symmetric_subspace(record):
    t0 = time.perf_counter()
    lit_mat = lit_ev = cor_mat = cor_ev = inv = 0.0
    for q in (2, 3):
        for n in (4, 5):
            for g in (1, 2, 3):
                for k in (0.5, 1.0):
                    C, res = catalog.compressed_symmetric(q, n, k, g)
                    ev = np.sort(np.linalg.eigvals(C).real)
                    P, P_ev = catalog.symmetric_matrix(q, n, k, g, printed=True)
                    M, M_ev = catalog.symmetric_matrix(q, n, k, g)
                    inv = max(inv, res)
                    lit_mat = max(lit_mat, float(np.abs(C - P).max()))
                    lit_ev = max(lit_ev, float(np.abs(ev - P_ev).max()))
                    cor_mat = max(cor_mat, float(np.abs(C - M).max()))
                    cor_ev = max(cor_ev, float(np.abs(ev - M_ev).max()))
    dt = time.perf_counter() - t0
    ok = inv < 1e-9 and lit_mat < 1e-9 and lit_ev < 1e-9
    record(6, ok, f"printed 4x4 matrix diff {lit_mat:.2e}, printed eigenvalue diff {lit_ev:.2e}; "
                  f"invariance {inv:.1e}; corrected form: matrix {cor_mat:.1e}, eigenvalues {cor_ev:.1e} ({dt:.1f}s)")
    assert ok


def test_hodge_pairing(record):
    t0 = time.perf_counter()
    results = [hz.hodge_pair_check(n, p, k) for n in (1, 2) for p in range(n + 1) for k in KS]
    worst = max(r["max_diff"] for r in results)
    dt = time.perf_counter() - t0
    ok = all(r["ok"] for r in results)
    record(7, ok, f"low spectra of degrees p and 2n+1-p, {len(results)} pairs, max diff {worst:.1e} ({dt:.1f}s)")
    assert ok


def test_step_two_generics(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    dev = 0.0
    for n in (1, 2, 3):
        flag, d = nl.is_htype(nl.heisenberg_algebra(n))
        dev = max(dev, d if flag else math.inf)
    for n in (1, 2):
        flag, d = nl.is_htype(nl.dgroup_algebra(n))
        dev = max(dev, d if flag else math.inf)
    degenerate, _ = nl.is_htype(nl.degenerate_algebra())
    pf = 0.0
    for n in (1, 2, 3):
        k = float(rng.uniform(0.3, 3.0))
        pf = max(pf, abs(abs(nl.pfaffian(nl.heisenberg_algebra(n), [k])) - k ** n) / k ** n)
    for n in (1, 2):
        lam = rng.normal(size=2)
        r = float(np.linalg.norm(lam))
        pf = max(pf, abs(abs(nl.pfaffian(nl.dgroup_algebra(n), lam)) - r ** (2 * n)) / r ** (2 * n))
    gen = 0.0
    for n in (1, 2, 3):
        for k in KS:
            model = nl.laplacian_model(nl.heisenberg_algebra(n), [k])
            for g in hz.enumerate_gammas(n, 1, 4):
                A = matrix_of(model.lap, list(hz.block_basis(n, 1, g)))
                gen = max(gen, float(np.abs(A - hz.block_matrix(hz.Context(n, 1, k), g)).max()))
    low = []
    for alg, lam in [(nl.heisenberg_algebra(1), [1.3]), (nl.heisenberg_algebra(2), [0.7]),
                     (nl.dgroup_algebra(1), [0.6, 0.8]), (nl.dgroup_algebra(2), [1.5, -0.4])]:
        for degree in (0, 1):
            low.append(nl.lower_bound_check(alg, lam, degree, 3 if alg.m <= 4 else 2))
    dt = time.perf_counter() - t0
    low_ok = all(c["ok"] for c in low)
    ok = dev < 1e-12 and not degenerate and pf < 1e-10 and gen < 1e-10 and low_ok
    record(8, ok, f"H-type deviation {dev:.1e}, degenerate rejected {not degenerate}, Pfaffian rel err {pf:.1e}, "
                  f"generic vs Heisenberg blocks {gen:.1e}, lower bound {low_ok} ({dt:.1f}s)")
    assert ok


def test_dgroup_eigenstructure(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    fam_worst, fam_bad, cp_worst = 0.0, set(), 0.0
    for n in (2, 3):
        for lam in [(1.0, 0.0), tuple(np.array([3.0, 4.0]) / 5 * 1.7)]:
            ctx = dgroup.DContext(n, lam)
            for _ in range(2):
                beta = tuple(int(b) for b in rng.integers(1, 5, 2 * n))
                for f in dgroup.family_eigencheck(ctx, beta):
                    fam_worst = max(fam_worst, f.residual)
                    if f.residual >= 1e-9:
                        fam_bad.add(f.family)
                rep = dgroup.check_3x3(ctx, beta, "first")
                cp_worst = max(cp_worst, rep.charpoly_error)
    certs = all(dgroup.cubic_bounds(b, n, r).certified
                for b in range(1, 11) for n in range(1, 11) for r in (0.5, 1.0, 3.0))
    lowest = [dgroup.lowest_eigenvalue(dgroup.DContext(n, (0.6, 0.8))) for n in (1, 2)]
    inside = all(lo.inside and lo.converged for lo in lowest)
    simple = all(lo.multiplicity == 1 for lo in lowest)
    r = 1.7
    ident = max(abs(dgroup.bracket_coefficients(1)[0] - (3 - math.sqrt(7))),
                abs((dgroup.mu_low(1, 1, r) + 4 * r) - (3 - math.sqrt(7)) * r))
    dt = time.perf_counter() - t0
    fam_ok = fam_worst < 1e-9
    ok = fam_ok and cp_worst < 1e-10 and certs and inside and simple and ident < 1e-12
    record(9, ok, f"family residual max {fam_worst:.2e} (failing: {sorted(fam_bad) or 'none'}), "
                  f"cubic coefficients {cp_worst:.1e}, sign certificates {certs}, "
                  f"lowest in bracket {inside}, simple {simple} "
                  f"(multiplicities {[lo.multiplicity for lo in lowest]}), 3-sqrt7 identity {ident:.1e} ({dt:.1f}s)")
    assert ok


def test_laplace_asymptotics(record):
    t0 = time.perf_counter()
    rows = [row for m in range(5) for a in (0.5, 1.0, 2.0) for row in heat.laplace_asymptotics_check(m, a, [1e3])]
    literal_bad = [(r.m, r.a, round(r.ratio_literal, 4)) for r in rows if abs(r.ratio_literal - 1) > 0.02]
    factorial_bad = [(r.m, r.a, round(r.ratio, 4)) for r in rows if abs(r.ratio - 1) > 0.02]
    slopes = [heat.quadratic_slope(m, np.logspace(1, 4, 10)) for m in range(5)]
    slope_err = max(abs(s + (m + 1) / 2) for m, s in enumerate(slopes))
    dt = time.perf_counter() - t0
    ok = not literal_bad and slope_err < 0.02
    record(10, ok, f"ratio at T=1e3 outside 2%: {literal_bad or 'none'}; with m! restored: "
                   f"{factorial_bad or 'none'}; quadratic slope err {slope_err:.1e} ({dt:.1f}s)")
    assert ok


def test_novikov_shubin(record):
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    for n in (1, 2):
        for p in range(2 * n + 2):
            est, _ = heat.estimate_heisenberg(n, p)
            worst = max(worst, est.relative_error)
            if est.relative_error > 0.05:
                bad.append((n, p, est.alpha_hat))
    d_err = {}
    for e in ("lower", "upper"):
        est, _ = heat.estimate_dgroup(1, e)
        d_err[e] = est.relative_error
    dt = time.perf_counter() - t0
    ok = not bad and max(d_err.values()) < 0.05
    record(11, ok, f"Heisenberg n<=2 all p worst rel err {worst:.1e}; D^6 alpha_1 rel err "
                   f"lower {d_err['lower']:.1e} upper {d_err['upper']:.1e} ({dt:.1f}s)")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
