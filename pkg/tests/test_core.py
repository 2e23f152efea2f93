import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import with_spectrum
from topola.core import (SeriesDivergenceWarning, TopoLaParams, cn_matrix, distance_eigenvalues,
                         fastnr_enhance, gap_bound, lambda_grid, nr_enhance, perturbation_bounds,
                         singular_transform, theorem3_max_violation, topola_distance,
                         topola_series, triangle_violations)
from topola.spectral import full_svd, sin_theta


def solve_oracle(A, lam):
    """AA^T (lam I + AA^T)^-1 by a direct linear solve."""
    M = A @ A.T
    return np.linalg.solve((lam * np.eye(M.shape[0]) + M).T, M.T).T


def scaled_for_series(rng, n, m, lam, ratio=0.9):
    A = rng.standard_normal((n, m))
    smax = np.linalg.norm(A, 2)
    return A * math.sqrt(ratio * lam) / smax


@pytest.mark.parametrize("bad", [0, -1, float("nan"), float("inf")])
def test_params_reject(bad):
    with pytest.raises(ValueError):
        TopoLaParams(bad)
    with pytest.raises(ValueError):
        topola_distance(np.eye(2), bad)


def test_distance_identity():
    np.testing.assert_allclose(topola_distance(np.eye(2), 1.0).values, 0.5 * np.eye(2), atol=1e-15)


def test_distance_swap():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(topola_distance(A, TopoLaParams(3)).values, 0.25 * np.eye(2),
                               atol=1e-15)


@pytest.mark.parametrize("shape", [(10, 8), (8, 10), (12, 12)])
def test_distance_matches_solve_oracle(rng, shape):
    A = rng.standard_normal(shape)
    for lam in (0.1, 1.0, 10.0):
        D = topola_distance(A, lam).values
        assert np.max(np.abs(D - solve_oracle(A, lam))) <= 1e-10


def test_distance_invariants(rng):
    A = rng.standard_normal((9, 6))
    lam = 0.7
    D = topola_distance(A, lam).values
    assert np.max(np.abs(D - D.T)) <= 1e-10 * np.max(np.abs(D))
    eig = np.sort(np.linalg.eigvalsh(D))
    sigma = np.concatenate([np.linalg.svd(A, compute_uv=False), np.zeros(3)])
    np.testing.assert_allclose(eig, np.sort(distance_eigenvalues(sigma, lam)), atol=1e-9)
    assert eig.min() > -1e-12 and eig.max() < 1
    M = A @ A.T
    assert np.max(np.abs(D @ M - M @ D)) <= 1e-10 * np.max(np.abs(M))


def test_series_first_term(rng):
    A = rng.standard_normal((5, 4))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeriesDivergenceWarning)
        np.testing.assert_array_equal(topola_series(A, 2.0, 1), (A @ A.T) / 2.0)


def test_series_scalar_geometric():
    assert topola_series(np.array([[1.0]]), 2.0, 50)[0, 0] == pytest.approx(1 / 3, abs=1e-12)
    assert topola_distance(np.array([[1.0]]), 2.0).values[0, 0] == pytest.approx(1 / 3, abs=1e-15)


def test_series_matches_closed_form(rng):
    lam = 2.0
    A = scaled_for_series(rng, 10, 8, lam, ratio=0.5)
    diff = np.abs(topola_series(A, lam, 60) - topola_distance(A, lam).values)
    assert diff.max() <= 1e-8


def test_series_remainder_is_exact_tail(rng):
    # after T terms the gap along each left singular direction is
    # (-1)^T r^(T+1) / (1 + r) with r = sigma^2 / lam
    lam, terms = 2.0, 60
    A = scaled_for_series(rng, 10, 8, lam, ratio=0.9)
    svd = full_svd(A)
    r = svd.S ** 2 / lam
    tail = (-1) ** terms * r ** (terms + 1) / (1 + r)
    expected = (svd.U * tail) @ svd.U.T
    got = topola_distance(A, lam).values - topola_series(A, lam, terms)
    assert np.max(np.abs(got - expected)) <= 1e-12


def test_series_error_decreases(rng):
    lam = 1.5
    A = scaled_for_series(rng, 10, 8, lam, ratio=0.6)
    D = topola_distance(A, lam).values
    errs = [np.max(np.abs(topola_series(A, lam, t) - D)) for t in (10, 20, 40)]
    assert errs[0] > errs[1] > errs[2]


def test_series_warns_when_divergent():
    with pytest.warns(SeriesDivergenceWarning):
        topola_series(np.array([[2.0]]), 1.0, 3)
    with pytest.raises(ValueError):
        topola_series(np.array([[0.1]]), 1.0, 0)


def test_singular_transform_values():
    assert singular_transform(0.0, 1.0) == 0.0
    assert singular_transform(2.0, 1.0) == pytest.approx(1.6)
    np.testing.assert_allclose(singular_transform([3, 2, 1], 1.0), [2.7, 1.6, 0.5])
    with pytest.raises(ValueError):
        singular_transform(-1.0, 1.0)


def test_nr_scalar():
    np.testing.assert_allclose(nr_enhance(np.array([[2.0]]), 1.0), [[1.6]])


def test_nr_diagonal_spectrum():
    out = nr_enhance(np.diag([3.0, 2.0, 1.0]), 1.0)
    s = np.linalg.svd(out, compute_uv=False)
    np.testing.assert_allclose(s, [2.7, 1.6, 0.5], atol=1e-14)
    assert s[0] - s[1] == pytest.approx(1.1)


def test_nr_equals_distance_times_a(rng):
    A = rng.standard_normal((7, 5))
    np.testing.assert_allclose(nr_enhance(A, 0.5), solve_oracle(A, 0.5) @ A, atol=1e-10)


def test_nr_preserves_symmetry_and_subspaces(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((10, 10)))
    eig = np.array([9.0, 7, 5, 3, 1, -2, -4, -6, -8, -10])
    A = (Q * eig) @ Q.T
    out = nr_enhance(A, 1.0)
    assert np.max(np.abs(out - out.T)) <= 1e-10 * np.max(np.abs(out))
    before, after = full_svd(A), full_svd(out)
    for k in range(1, 10):
        assert sin_theta(before.U[:, :k], after.U[:, :k]) <= 1e-8
        assert sin_theta(before.Vt[:k].T, after.Vt[:k].T) <= 1e-8


def test_nr_contracts(rng):
    for _ in range(10):
        A = rng.standard_normal((8, 6))
        assert np.linalg.norm(nr_enhance(A, 0.3), 2) < np.linalg.norm(A, 2)


def test_fastnr_exact_rank_two(rng):
    A = with_spectrum(rng, 50, 40, [6.0, 2.0])
    ref = nr_enhance(A, 1.0)
    out = fastnr_enhance(A, 1.0, rank=2, seed=0)
    assert np.linalg.norm(out - ref) <= 1e-8 * np.linalg.norm(ref)


def test_fastnr_identity():
    np.testing.assert_allclose(fastnr_enhance(np.eye(6), 2.0, rank=6, seed=1),
                               nr_enhance(np.eye(6), 2.0), atol=1e-12)


def test_fastnr_full_rank_truncation(rng):
    sigma = np.concatenate([[40.0, 30, 20], 5 * 0.5 ** np.arange(27)])
    A = with_spectrum(rng, 40, 30, sigma)
    svd = full_svd(A)
    best3 = (svd.U[:, :3] * svd.S[:3]) @ svd.Vt[:3]
    ref = nr_enhance(best3, 2.0)
    out = fastnr_enhance(A, 2.0, rank=3, seed=5)
    assert np.linalg.norm(out - ref) <= 1e-6 * np.linalg.norm(ref)


def test_fastnr_tolerance_mode(rng):
    A = with_spectrum(rng, 60, 45, [9.0, 4.0, 1.0])
    out = fastnr_enhance(A, 1.0, tol=1e-9 * np.linalg.norm(A), block=2, seed=3)
    ref = nr_enhance(A, 1.0)
    assert np.linalg.norm(out - ref) <= 1e-8 * np.linalg.norm(ref)


def test_cn(figs9):
    A, ix = figs9
    C = cn_matrix(A)
    assert C[ix.index("D"), ix.index("E")] == 1
    np.testing.assert_array_equal(cn_matrix(np.eye(3)), np.eye(3))
    K3 = np.ones((3, 3)) - np.eye(3)
    np.testing.assert_array_equal(cn_matrix(K3), np.eye(3) + 1)


def test_lambda_grid():
    grid = lambda_grid(np.diag([4.0, 3.0, 2.0]))
    assert grid[3] == pytest.approx(9.0)
    assert grid[0] == pytest.approx(9e-3)
    assert grid[-1] == pytest.approx(9e3)
    # zero singular values are ignored when taking the median
    assert lambda_grid(np.diag([4.0, 0.0, 0.0]), [0]) == [pytest.approx(16.0)]
    with pytest.raises(ValueError):
        lambda_grid(np.zeros((3, 3)))


def test_row_bound_identical_rows():
    A = np.array([[1.0, 0, 1], [1.0, 0, 1], [0, 1, 0]])
    D = topola_distance(A, 1.0).values
    np.testing.assert_allclose(D[:, 0], D[:, 1], atol=1e-14)
    assert theorem3_max_violation(A, 1.0) <= 1e-10 * np.sum(A * A)


def test_row_bound_large_lambda(rng):
    A = rng.standard_normal((6, 6))
    lam = 1e6 * np.linalg.norm(A, 2) ** 2
    assert np.max(np.abs(topola_distance(A, lam).values)) < 1e-5
    assert theorem3_max_violation(A, lam) <= 0.0


def test_row_bound_random(rng):
    for lam in (0.1, 1.0, 10.0):
        A = rng.standard_normal((20, 20))
        assert theorem3_max_violation(A, lam) <= 1e-10 * np.sum(A * A)


def test_gap_bound():
    assert gap_bound(0.0, 1.0) == 1.0
    assert gap_bound(10.0, 1.0) == pytest.approx(0.2)
    assert gap_bound(1.0, 5.0) == 1.0
    orig, enh = perturbation_bounds(3.0, 2.0, 0.1, 1.0)
    assert orig == pytest.approx(0.2)
    assert enh == pytest.approx(0.2 / 1.1)


def test_triangle_diagnostic_counts():
    assert triangle_violations(np.eye(3)) == 0
    D = np.array([[1.0, 0.9, 0.0], [0.9, 1.0, 0.9], [0.0, 0.9, 1.0]])
    # 1-D: d(0,2)=1 > d(0,1)+d(1,2)=0.2, counted for both orientations
    assert triangle_violations(D) == 2


sigmas = st.floats(0.0, 1e3, allow_nan=False)
lams = st.floats(1e-3, 1e3, allow_nan=False)


@given(sigmas, sigmas, lams)
def test_transform_monotone_and_contracting(a, b, lam):
    lo, hi = sorted((a, b))
    flo, fhi = singular_transform(lo, lam), singular_transform(hi, lam)
    assert flo <= fhi
    assert fhi <= hi
    if hi > 0:
        assert fhi < hi


@given(st.floats(1e-3, 1e3), st.floats(1.0, 30.0), st.floats(0.0, 1.0))
def test_gap_grows_above_sqrt_lambda(lam, hi_scale, frac):
    root = math.sqrt(lam)
    s1 = root * hi_scale
    s2 = root + frac * (s1 - root)
    f1, f2 = singular_transform([s1, s2], lam)
    assert f1 - f2 >= (s1 - s2) - 1e-12 * s1


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(-5, 5, allow_nan=False)),
       st.floats(0.01, 100))
def test_distance_properties(A, lam):
    D = topola_distance(A, lam).values
    assert np.allclose(D, D.T, atol=1e-12)
    eig = np.linalg.eigvalsh(D)
    assert eig.min() >= -1e-12 and eig.max() < 1
    assert np.max(np.abs(D - solve_oracle(A, lam))) <= 1e-9
