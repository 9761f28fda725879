import threading
import time

import numpy as np
import pytest

from projsym.errors import (
    DimensionMismatch,
    DimensionTooSmall,
    IllConditioned,
    ProbeNotTabulated,
)
from projsym.projective_core import (
    Field,
    Ray,
    join,
    make_rng,
    rays_equal,
    sample_ray,
    sample_vector,
)
from projsym.ray_maps import (
    MatrixInduced,
    OracleMap,
    Tabulated,
    check_collineation,
    check_quasi_unitary,
    coefficient_magnitudes,
    probe_images,
    probe_set,
)
from projsym.testkit import haar_unitary, random_invertible, tabulate


class TestApply:
    def test_identity(self, rng):
        a = sample_ray(rng, 4)
        np.testing.assert_allclose(MatrixInduced(np.eye(4)).apply(a).vector, a.vector)

    def test_conjugation(self):
        out = MatrixInduced(np.eye(2), True).apply(Ray([1, 1j]))
        assert rays_equal(out, Ray([1, -1j]), 1e-14)
        np.testing.assert_allclose(out.vector, np.array([1, -1j]) / np.sqrt(2))

    def test_diag(self):
        out = MatrixInduced(np.diag([1, 2])).apply(Ray([1, 1]))
        np.testing.assert_allclose(out.vector, Ray([1, 2]).vector, atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            MatrixInduced(np.eye(3)).apply(Ray([1, 0]))

    def test_singular_rejected(self):
        with pytest.raises(IllConditioned):
            MatrixInduced(np.diag([1.0, 1e-14]))

    def test_nonsquare_rejected(self):
        with pytest.raises(DimensionMismatch):
            MatrixInduced(np.ones((2, 3)))

    def test_respects_ray_equality(self, rng):
        t = MatrixInduced(random_invertible(5, 4))
        for _ in range(20):
            v = sample_vector(rng, 5)
            a, b = Ray(v), Ray(np.exp(0.7j) * 3.1 * v)
            assert rays_equal(t.apply(a), t.apply(b), 1e-12)

    def test_vectorized_matches_single(self, rng):
        t = MatrixInduced(haar_unitary(3, 2), True)
        rays = [sample_ray(rng, 3) for _ in range(5)]
        cols = t.image_vectors(rays)
        for j, r in enumerate(rays):
            np.testing.assert_allclose(cols[:, j], t.image_vector(r), atol=1e-15)


class TestTabulated:
    def test_lookup_up_to_phase(self):
        t = Tabulated(2, [([1, 0], [0, 1]), ([0, 1], [1, 0])])
        assert rays_equal(t.apply(Ray([1j, 0])), Ray([0, 1]))

    def test_missing(self):
        t = Tabulated(2, [([1, 0], [0, 1])])
        with pytest.raises(ProbeNotTabulated):
            t.apply(Ray([1, 1]))

    def test_duplicate_inputs_rejected(self):
        with pytest.raises(DimensionMismatch):
            Tabulated(2, [([1, 0], [0, 1]), ([2j, 0], [1, 0])])

    def test_outputs_keep_their_phase(self):
        t = Tabulated(2, [([1, 0], [0, 1j])])
        np.testing.assert_allclose(t.image_vector(Ray([1, 0])), [0, 1j])


class TestOracle:
    def test_apply(self):
        t = OracleMap(2, lambda r: r.vector[::-1])
        assert rays_equal(t.apply(Ray([1, 0])), Ray([0, 1]))

    def test_non_reentrant_calls_are_serialized(self):
        active, peak = [0], [0]

        def fn(r):
            active[0] += 1
            peak[0] = max(peak[0], active[0])
            time.sleep(0.002)
            active[0] -= 1
            return r.vector

        t = OracleMap(2, fn)
        threads = [threading.Thread(target=t.apply, args=(Ray([1, k]),)) for k in range(8)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        assert peak[0] == 1


class TestProbes:
    def test_counts(self):
        assert len(probe_set(5, Field.COMPLEX)) == 3 * 5 - 2
        assert len(probe_set(5, Field.REAL)) == 2 * 5 - 1

    def test_identity_images(self):
        pairs = probe_images(MatrixInduced(np.eye(2)))
        assert len(pairs) == 4
        expected = [Ray([1, 0]), Ray([0, 1]), Ray([1, 1]), Ray([1, 1j])]
        for (p, img), e in zip(pairs, expected):
            assert rays_equal(p, e, 1e-15)
            np.testing.assert_allclose(img.vector, p.vector, atol=1e-15)

    def test_matrix_images(self):
        u = haar_unitary(3, 11)
        for p, img in probe_images(MatrixInduced(u)):
            np.testing.assert_allclose(img.vector, Ray(u @ p.vector).vector, atol=1e-14)

    def test_missing_probe_named(self):
        full = tabulate(MatrixInduced(np.eye(2)))
        pairs = [(x, y) for x, y in zip(full.inputs, full.outputs)
                 if not rays_equal(x, Ray([1, 1j]))]
        t = Tabulated(2, pairs)
        with pytest.raises(ProbeNotTabulated, match=r"e1\+i\*e2") as info:
            probe_images(t)
        assert len(info.value.missing) == 1
        assert rays_equal(info.value.missing[0], Ray([1, 1j]))


class TestQuasiUnitary:
    def test_haar_passes(self):
        rep = check_quasi_unitary(MatrixInduced(haar_unitary(5, 1)), trials=200, seed=3)
        assert rep.passed and rep.worst_residual <= 1e-12
        assert rep.seed == 3

    def test_diag_fails_with_hand_witness(self):
        rep = check_quasi_unitary(MatrixInduced(np.diag([1, 2])), trials=200, tol=1e-8)
        assert not rep.passed
        a, b = rep.witness.inputs
        assert {round(abs(a.vector[1]), 6), round(abs(b.vector[1]), 6)} == {0.0, 0.707107}
        # |<(1,2),(1,0)>|^2 / (5 * 1)
        assert rep.witness.expected == pytest.approx(0.5, abs=1e-14)
        assert rep.witness.observed == pytest.approx(1 / 5, abs=1e-14)

    def test_antiunitary_passes(self):
        rep = check_quasi_unitary(MatrixInduced(haar_unitary(4, 2), True), trials=200)
        assert rep.passed

    def test_unitaries_all_dims(self):
        total = 0
        for n in range(2, 17):
            rep = check_quasi_unitary(MatrixInduced(haar_unitary(n, n), n % 2 == 0),
                                      trials=67, tol=1e-10, seed=n)
            assert rep.passed
            total += 67
        assert total >= 1000

    def test_non_unitary_fails_quickly(self):
        rep = check_quasi_unitary(MatrixInduced(np.diag([1, 2])), trials=50, tol=1e-6, seed=9)
        assert not rep.passed

    def test_tabulated_pairwise(self):
        u = haar_unitary(3, 5)
        rng = make_rng(1)
        t = tabulate(MatrixInduced(u), [sample_ray(rng, 3) for _ in range(10)], phase_seed=2)
        rep = check_quasi_unitary(t)
        assert rep.passed
        assert rep.trials == len(t) * (len(t) - 1) // 2

    def test_verdict_matches_tolerance(self):
        rep = check_quasi_unitary(MatrixInduced(np.diag([1, 1.001])), trials=20, tol=1e-2)
        assert rep.passed == (rep.worst_residual <= 1e-2)


def abs_oracle(r):
    return np.abs(r.vector)


class TestCollineation:
    def test_invertible_passes(self):
        rep = check_collineation(MatrixInduced(random_invertible(4, 8)), trials=200, tol=1e-8)
        assert rep.passed

    def test_conjugated_unitary_passes(self):
        rep = check_collineation(MatrixInduced(haar_unitary(4, 8), True), trials=200, tol=1e-8)
        assert rep.passed

    def test_every_matrix_map_passes(self):
        for seed in range(20):
            m = random_invertible(3 + seed % 4, seed, 1e4)
            rep = check_collineation(MatrixInduced(m, seed % 2 == 1), trials=30, tol=1e-8,
                                     seed=seed)
            assert rep.passed, seed

    def test_abs_oracle_leaves_span(self):
        # hand-picked line: [1,1,0] v [0,1,1] contains [1,0,-1]; |.| sends that
        # point to [1,0,1], which is off the image line since
        # det([[1,1,0],[0,1,1],[1,0,1]]) = 2.
        t = OracleMap(3, abs_oracle)
        img_line = join(t.apply(Ray([1, 1, 0])), t.apply(Ray([0, 1, 1])))
        assert img_line.residual(t.apply(Ray([1, 0, -1])).vector) > 0.5
        rep = check_collineation(t, trials=50, tol=1e-8)
        assert not rep.passed and rep.witness is not None

    def test_dim_two_rejected(self):
        with pytest.raises(DimensionTooSmall):
            check_collineation(MatrixInduced(np.eye(2)))

    def test_tabulated_triples(self):
        m = random_invertible(3, 1)
        rng = make_rng(4)
        a, b = sample_vector(rng, 3), sample_vector(rng, 3)
        extra = [Ray(a), Ray(b)] + [Ray(a + z * b) for z in (0.5, 1j, -2 + 1j)]
        t = tabulate(MatrixInduced(m), extra, phase_seed=5)
        rep = check_collineation(t)
        assert rep.passed and rep.trials > 0


def test_coefficient_magnitudes_preserved(rng):
    t = MatrixInduced(haar_unitary(5, 3), True)
    basis = haar_unitary(5, 4)
    c = basis[:, 0] * 0.3 + basis[:, 1] * (0.2 - 1j)
    before, after = coefficient_magnitudes(t, basis, c)
    np.testing.assert_allclose(after, before, atol=1e-12)
    assert np.all(before[2:] < 1e-25)
