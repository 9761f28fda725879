import numpy as np
import pytest

from projsym.errors import CompatibilityFailure, NotQuasiUnitary
from projsym.projective_core import Ray, make_rng, sample_ray, transition_probability
from projsym.ray_maps import MatrixInduced
from projsym.testkit import (
    gram_probabilities,
    haar_unitary,
    perturb_ray_map,
    random_invertible,
    random_ray,
)
from projsym.wigner_lift import lift_symmetry


class TestHaar:
    def test_scalar(self):
        u = haar_unitary(1, 3)
        assert u.shape == (1, 1) and abs(abs(u[0, 0]) - 1) <= 1e-15

    def test_unitary(self):
        u = haar_unitary(8, 1)
        assert np.max(np.abs(u.conj().T @ u - np.eye(8))) <= 1e-12

    def test_deterministic(self):
        np.testing.assert_array_equal(haar_unitary(5, 42), haar_unitary(5, 42))
        assert not np.array_equal(haar_unitary(5, 42), haar_unitary(5, 43))

    def test_phase_fixed_qr(self):
        # the triangular factor of a Haar sample's generating matrix has a
        # positive real diagonal once the phases are moved into Q
        rng = make_rng(7)
        z = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / np.sqrt(2)
        u = haar_unitary(4, 7)
        r = u.conj().T @ z
        assert np.allclose(np.tril(r, -1), 0, atol=1e-12)
        assert np.all(np.diag(r).real > 0) and np.allclose(np.diag(r).imag, 0, atol=1e-12)

    def test_first_moment(self):
        # E|U_00|^2 = 1/n under Haar measure
        n, m = 4, 4000
        vals = [abs(haar_unitary(n, s)[0, 0]) ** 2 for s in range(m)]
        se = np.std(vals) / np.sqrt(m)
        assert abs(np.mean(vals) - 1 / n) <= 4 * se


class TestRandomRay:
    def test_deterministic(self):
        np.testing.assert_array_equal(random_ray(4, 5).vector, random_ray(4, 5).vector)

    def test_unit_norm(self):
        assert abs(np.linalg.norm(random_ray(9, 1).vector) - 1) <= 1e-12

    def test_mean_overlap(self):
        # Monte-Carlo: the uniform measure on rays gives E[P(A, x)] = 1/n
        n, m = 3, 100_000
        fixed = Ray([1, 2j, -0.5])
        rng = make_rng(12345)
        vals = np.array([transition_probability(fixed, sample_ray(rng, n)) for _ in range(m)])
        se = vals.std() / np.sqrt(m)
        assert abs(vals.mean() - 1 / n) <= 3 * se


class TestGram:
    def test_onb_identity(self):
        rays = [Ray(e) for e in np.eye(5)]
        np.testing.assert_array_equal(gram_probabilities(rays), np.eye(5))

    def test_single(self):
        np.testing.assert_array_equal(gram_probabilities([Ray([1, 1j])]), [[1.0]])

    def test_invariant_under_symmetry(self):
        rng = make_rng(3)
        rays = [sample_ray(rng, 5) for _ in range(12)]
        t = MatrixInduced(haar_unitary(5, 6), True)
        g0 = gram_probabilities(rays)
        g1 = gram_probabilities([t.apply(r) for r in rays])
        assert np.max(np.abs(g0 - g1)) <= 1e-10
        assert np.allclose(g0, g0.T) and np.all((g0 >= 0) & (g0 <= 1))


class TestPerturb:
    def test_zero(self):
        t = MatrixInduced(haar_unitary(3, 1), True)
        p = perturb_ray_map(t, 0.0, 5)
        np.testing.assert_array_equal(p.matrix, t.matrix)
        assert p.conjugate_first

    def test_tiny_noise_keeps_lift(self):
        t = perturb_ray_map(MatrixInduced(haar_unitary(4, 1)), 1e-12, 5)
        lift_symmetry(t, tol=1e-8)

    def test_large_noise_breaks_lift(self):
        t = perturb_ray_map(MatrixInduced(haar_unitary(4, 1)), 1e-2, 5)
        with pytest.raises((NotQuasiUnitary, CompatibilityFailure)):
            lift_symmetry(t, tol=1e-8)

    def test_noise_scale(self):
        base = MatrixInduced(np.eye(50))
        d = perturb_ray_map(base, 1e-3, 1).matrix - base.matrix
        assert np.std(np.abs(d)) > 0 and np.sqrt(np.mean(np.abs(d) ** 2)) == pytest.approx(1e-3, rel=0.05)


def test_random_invertible_condition():
    for s in range(10):
        assert np.linalg.cond(random_invertible(4, s, 1e3)) <= 1e3
