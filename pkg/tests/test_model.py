import numpy as np
import pytest

from ridge_equality import ModelTruth, RidgeSpec, Tolerances, rank_with_tol, validate_design
from ridge_equality.errors import NotPositiveDefiniteError, ValidationError
from ridge_equality.generators import X_REF, random_orthogonal


def test_reference_design(x_ref):
    np.testing.assert_allclose(x_ref.X.T @ x_ref.X, 3 * np.eye(2))
    assert (x_ref.n, x_ref.k) == (4, 2)
    assert np.linalg.norm(x_ref.X.T @ x_ref.Z) < 1e-12


def test_coordinate_design():
    d = validate_design(np.vstack([np.eye(2), np.zeros((2, 2))]))
    np.testing.assert_allclose(np.abs(d.Z), np.vstack([np.zeros((2, 2)), np.eye(2)]), atol=1e-15)


def test_duplicated_columns():
    x = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    with pytest.raises(ValidationError):
        validate_design(x)


@pytest.mark.parametrize("shape", [(2, 2), (2, 3)])
def test_too_few_rows(shape):
    with pytest.raises(ValidationError):
        validate_design(np.ones(shape))


def test_basis_nonsingular_and_deterministic(rng):
    x = rng.standard_normal((9, 4))
    d1, d2 = validate_design(x), validate_design(x)
    np.testing.assert_array_equal(d1.Z, d2.Z)
    assert rank_with_tol(d1.basis) == 9


def test_explicit_complement(rng, x_ref):
    zq = x_ref.Z @ random_orthogonal(rng, 2)
    d = validate_design(X_REF, Z=zq)
    np.testing.assert_array_equal(d.Z, zq)
    with pytest.raises(ValidationError):
        validate_design(X_REF, Z=2 * zq)
    with pytest.raises(ValidationError):
        validate_design(X_REF, Z=np.eye(4)[:, :2])


def test_design_is_immutable(x_ref):
    with pytest.raises(ValueError):
        x_ref.X[0, 0] = 5.0


def test_truth_validation():
    with pytest.raises(ValidationError):
        ModelTruth.create([1.0], 0.0, np.eye(3))
    with pytest.raises(NotPositiveDefiniteError):
        ModelTruth.create([1.0], 1.0, -np.eye(3))
    t = ModelTruth.create([1.0, 2.0], 2.0, np.eye(4))
    assert t.sigma2 == 2.0


def test_ridge_spec_validation():
    with pytest.raises(ValidationError):
        RidgeSpec.identity(-np.eye(2))
    with pytest.raises(NotPositiveDefiniteError):
        RidgeSpec.explicit(np.zeros((3, 3)), np.eye(2))
    assert RidgeSpec.identity(np.zeros((2, 2))).is_identity


def test_custom_tolerance_controls_rank():
    x = np.array([[1.0, 0.0], [0.0, 1e-9], [0.0, 0.0]])
    validate_design(x)
    with pytest.raises(ValidationError):
        validate_design(x, Tolerances(rank_rel=1e-8))
