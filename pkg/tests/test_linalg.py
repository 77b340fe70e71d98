import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from bvmbounds.errors import NotPositiveDefinite
from bvmbounds.linalg import SymMatrix, eigen_sym, inf_norm, matrix_norms, row_sum_scalars, spd_sqrt


def spd_matrices(max_k=8):
    @st.composite
    def build(draw):
        k = draw(st.integers(1, max_k))
        a = draw(arrays(np.float64, (k, k), elements=st.floats(-3, 3)))
        shift = draw(st.floats(1e-3, 10.0))
        return a @ a.T + shift * np.eye(k)

    return build()


def test_symmatrix_rejects_asymmetric():
    with pytest.raises(ValueError, match="not symmetric"):
        SymMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_symmatrix_is_immutable():
    m = SymMatrix(np.eye(2))
    with pytest.raises(ValueError):
        m.entries[0, 0] = 3.0


def test_scalar_becomes_one_by_one():
    assert SymMatrix(np.array(4.0)).dim == 1


def test_not_positive_definite_carries_eigenvalue():
    with pytest.raises(NotPositiveDefinite) as info:
        spd_sqrt(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert info.value.lambda_min == pytest.approx(-1.0)


def test_ill_scaled_matrix_converges():
    # entries spanning many decades used to stall the stopping rule
    a = np.array([[1e6, 1e-3, 0.0], [1e-3, 1.0, 1e-9], [0.0, 1e-9, 1e-4]])
    w, v = eigen_sym(a)
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(a), rtol=1e-10)
    np.testing.assert_allclose(v.T @ v, np.eye(3), atol=1e-12)


@given(spd_matrices())
def test_eigen_matches_lapack(m):
    w, v = eigen_sym(m)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(m), rtol=1e-9, atol=1e-9 * np.abs(m).max())
    np.testing.assert_allclose(v @ np.diag(w) @ v.T, m, atol=1e-9 * np.abs(m).max())


@given(spd_matrices())
def test_square_root_round_trip(m):
    f = spd_sqrt(m)
    s, si = np.asarray(f.sqrt), np.asarray(f.inv_sqrt)
    scale = np.abs(m).max()
    np.testing.assert_allclose(s @ s, m, atol=1e-8 * scale)
    np.testing.assert_allclose(s @ si, np.eye(len(m)), atol=1e-7 * math.sqrt(np.linalg.cond(m)))


@given(spd_matrices())
def test_row_sum_chain(m):
    f = spd_sqrt(m)
    k = len(m)
    rs = row_sum_scalars(f.inv_sqrt)
    norm = inf_norm(f.inv_sqrt)
    slack = 1e-9 * max(1.0, norm)
    assert np.all(rs.R <= rs.R_tilde + slack)
    assert np.all(rs.R_tilde <= norm + slack)
    assert norm <= math.sqrt(k / f.lambda_min) + slack
    assert 1.0 / math.sqrt(f.lambda_min) <= norm + slack


@given(spd_matrices())
def test_spectral_norm_below_inf_norm(m):
    inf, spec = matrix_norms(m)
    assert spec <= inf * (1 + 1e-12)
    assert spec == pytest.approx(np.linalg.norm(m, 2), rel=1e-9)
