import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dsmbayes.errors import ConfigError, DomainError
from dsmbayes.geometry import Disc, Ellipse, Square
from dsmbayes.sources import (TriangleMesh, build_mesh, custom_source, evaluate_source,
                              example_source, load_mesh, quadrature, save_mesh,
                              source_values_on)


def gauss_tensor(func, lo, hi, order=200):
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * w
    gx, gy = np.meshgrid(x, x, indexing="ij")
    return float(np.sum(np.outer(w, w) * func(np.stack([gx, gy], axis=-1))))


class TestMesh:
    @pytest.mark.parametrize("region", [Disc((0.2, -0.1), 0.9), Ellipse((0, 0), 0.9, 1.08),
                                        Square(-1.0, 1.0)])
    @pytest.mark.parametrize("h", [0.1, 0.03])
    def test_area_and_edge_bound(self, region, h):
        mesh = build_mesh(region, h)
        assert mesh.h <= 1.5 * h
        assert mesh.area == pytest.approx(region.area, rel=2 * h * h)
        assert np.all(mesh.areas > 0)

    def test_area_converges(self):
        errs = [abs(build_mesh(Disc(), h).area - np.pi) for h in (0.08, 0.04, 0.02)]
        assert errs[0] > errs[1] > errs[2]

    def test_centroids_inside_disc(self):
        disc = Disc((0.0, 0.0), 0.9)
        mesh = build_mesh(disc, 0.05)
        assert np.all(np.hypot(*mesh.centroids.T) < 0.9)

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            build_mesh(Disc(), 0.0)
        with pytest.raises(DomainError):
            TriangleMesh(np.zeros((3, 2)), np.array([[0, 1, 5]]))
        with pytest.raises(DomainError):
            Disc((0, 0), -1.0)

    def test_round_trip(self, tmp_path):
        mesh = build_mesh(Disc((0.1, 0.2), 0.5), 0.1)
        save_mesh(mesh, tmp_path / "m.txt")
        back = load_mesh(tmp_path / "m.txt")
        np.testing.assert_array_equal(back.vertices, mesh.vertices)
        np.testing.assert_array_equal(back.triangles, mesh.triangles)


class TestQuadrature:
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=25, deadline=None)
    def test_affine_exact(self, a, b, c):
        mesh = build_mesh(Square(-1.0, 2.0), 0.3)
        exact = 9.0 * a + b * 4.5 + c * 4.5  # integral of a + b x + c y on [-1, 2]^2
        assert quadrature(mesh, lambda p: a + b * p[:, 0] + c * p[:, 1]) == pytest.approx(exact, abs=1e-12)

    def test_gaussian_against_tensor_gauss(self):
        src = example_source(3)
        reference = gauss_tensor(lambda x: evaluate_source(src, x), -1.5, 1.5)
        assert reference == pytest.approx(5 * np.pi / np.sqrt(45 * 30), rel=1e-12)
        mesh = build_mesh(src.data_region, 0.01)
        assert quadrature(mesh, src) == pytest.approx(reference, rel=1e-4)

    def test_array_values(self):
        mesh = build_mesh(Disc(), 0.2)
        assert quadrature(mesh, np.ones(len(mesh))) == pytest.approx(mesh.area)


class TestSources:
    def test_examples_at_points(self):
        assert example_source(2)(np.array([0.0, 0.0])) == pytest.approx(1.62)
        assert example_source(2)(np.array([0.95, 0.0])) == 0.0
        assert example_source(3)(np.array([0.0, 0.0])) == pytest.approx(5.0)
        assert example_source(4)(np.array([0.3, 0.4])) == pytest.approx(
            15 * 0.12 * (0.81 - 0.09 - (0.4 / 1.2) ** 2))
        assert example_source(5)(np.array([0.5, 0.5])) == 1.0
        assert example_source(5)(np.array([0.7, 0.7])) == 0.0

    def test_eigenmode_example_norm(self):
        src = example_source(1)
        mesh = build_mesh(src.support, 0.01)
        assert np.sqrt(quadrature(mesh, lambda p: evaluate_source(src, p) ** 2)) == pytest.approx(3.0, rel=1e-3)

    def test_unknown_example(self):
        with pytest.raises(ConfigError):
            example_source(6)

    def test_custom_callable_and_samples(self):
        mesh = build_mesh(Disc(), 0.2)
        f = custom_source(lambda x: x[..., 0] ** 2, support=Disc())
        np.testing.assert_allclose(source_values_on(f, mesh), mesh.centroids[:, 0] ** 2)
        g = custom_source(mesh=mesh, samples=np.arange(len(mesh), dtype=float), support=Disc())
        np.testing.assert_array_equal(source_values_on(g, mesh), np.arange(len(mesh)))
        assert g(mesh.centroids[3]) == 3.0
        assert g(np.array([5.0, 5.0])) == 0.0

    def test_custom_needs_payload(self):
        with pytest.raises(ConfigError):
            custom_source()
        with pytest.raises(ConfigError):
            custom_source(mesh=build_mesh(Disc(), 0.5), samples=np.zeros(2))
