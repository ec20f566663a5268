import numpy as np
import pytest

from dsmbayes.errors import ContractError, DomainError
from dsmbayes.expansion import (BasisIndex, CoefficientVector, assemble_forward_operator,
                                basis_matrix, eval_f_be, load_coefficients, operator_mesh,
                                project, save_coefficients)
from dsmbayes.forward import aperture, generate_dataset
from dsmbayes.geometry import Disc
from dsmbayes.sources import build_mesh, example_source
from dsmbayes.special import COSINE, SINE, DiscEigenfunction

DISC = Disc((0.0, 0.0), 0.9)


@pytest.fixture(scope="module")
def op_g3():
    return assemble_forward_operator(BasisIndex(), DISC, aperture("G3"), [1.0, 2.0, 3.0])


class TestBasisIndex:
    def test_order_and_length(self):
        b = BasisIndex(5, 2)
        assert len(b) == 25 == len(b.terms)
        assert b.terms[:4] == [(1, 0, COSINE), (1, 1, COSINE), (1, 2, COSINE), (2, 0, COSINE)]
        assert b.terms[15:17] == [(1, 1, SINE), (1, 2, SINE)]
        assert b.position(5, 2, SINE) == 24

    def test_invalid(self):
        with pytest.raises(DomainError):
            BasisIndex(0, 2)


class TestBasisMatrix:
    def test_matches_eigenfunctions(self, rng):
        disc = Disc((0.2, -0.1), 0.7)
        pts = rng.uniform(-1, 1, size=(50, 2))
        mat = basis_matrix(BasisIndex(3, 2), disc, pts)
        for c, (m, n, p) in enumerate(BasisIndex(3, 2).terms):
            np.testing.assert_allclose(mat[:, c], DiscEigenfunction(m, n, p, disc)(pts), atol=1e-14)

    def test_full_gram(self):
        mesh = build_mesh(DISC, 0.01)
        q = basis_matrix(BasisIndex(), DISC, mesh.centroids)
        np.testing.assert_allclose((q * mesh.areas[:, None]).T @ q, np.eye(25), atol=1e-3)


class TestProjection:
    def test_eigenmode_source(self):
        coeffs = project(example_source(1), BasisIndex(), DISC)
        assert coeffs[1, 1, COSINE] == pytest.approx(3.0, abs=1e-3)
        rest = np.delete(coeffs.values, BasisIndex().position(1, 1, COSINE))
        assert np.max(np.abs(rest)) < 1e-3

    def test_eval_f_be(self):
        coeffs = project(example_source(1), BasisIndex(), DISC)
        x = np.array([[0.3, 0.2], [-0.5, 0.1]])
        np.testing.assert_allclose(eval_f_be(coeffs, x), example_source(1)(x), atol=5e-3)
        assert eval_f_be(coeffs, np.array([2.0, 0.0])) == 0.0

    def test_operator_mesh_differs(self):
        a, b = build_mesh(DISC, 0.05), operator_mesh(DISC, 0.05)
        assert a.area == pytest.approx(b.area)
        assert not np.allclose(a.centroids, b.centroids)

    def test_truncation_monotone(self):
        src = example_source(3)
        disc = src.support
        mesh = build_mesh(src.data_region, 0.01)
        f = src(mesh.centroids)
        errs = []
        for m_count in range(1, 6):
            coeffs = project(src, BasisIndex(m_count, 2), disc)
            diff = f - basis_matrix(coeffs.basis, disc, mesh.centroids) @ coeffs.values
            errs.append(np.sqrt(np.sum(mesh.areas * diff**2)))
        assert all(a >= b for a, b in zip(errs, errs[1:]))


class TestForwardOperator:
    def test_layout(self, op_g3):
        assert op_g3.matrix.shape == (39, 25)
        assert op_g3.matrix.dtype == np.complex128

    def test_reproduces_data(self):
        ks = [1.0, 2.0, 5.0]
        data = generate_dataset(example_source(1), aperture("G2"), ks)
        op = assemble_forward_operator(BasisIndex(), DISC, aperture("G2"), ks)
        a = np.zeros(25)
        a[BasisIndex().position(1, 1, COSINE)] = 3.0
        u = data.vector()
        assert np.linalg.norm(op(a) - u) / np.linalg.norm(u) < 1e-4

    def test_linearity(self, op_g3, rng):
        a, b = rng.normal(size=(2, 25))
        s, t = rng.normal(size=2)
        lhs = op_g3.apply(s * a + t * b)
        rhs = s * op_g3.apply(a) + t * op_g3.apply(b)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))

    def test_shape_contract(self, op_g3):
        with pytest.raises(ContractError):
            op_g3.apply(np.zeros(24))

    def test_threads_identical(self):
        a = assemble_forward_operator(BasisIndex(), DISC, aperture("G3"), [1.0, 2.0], threads=1)
        b = assemble_forward_operator(BasisIndex(), DISC, aperture("G3"), [1.0, 2.0], threads=4)
        np.testing.assert_array_equal(a.matrix, b.matrix)


class TestCoefficientFile:
    def test_round_trip(self, tmp_path, rng):
        coeffs = CoefficientVector(rng.normal(size=25), BasisIndex(), Disc((0.1, 0.2), 1.3))
        save_coefficients(coeffs, tmp_path / "c.txt")
        back = load_coefficients(tmp_path / "c.txt")
        np.testing.assert_array_equal(back.values, coeffs.values)
        assert back.disc == coeffs.disc

    def test_wrong_length(self):
        with pytest.raises(ContractError):
            CoefficientVector(np.zeros(3), BasisIndex(), DISC)
