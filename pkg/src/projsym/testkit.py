"""Seeded generators for tests and acceptance runs.

Every generator takes an explicit integer seed and draws from numpy's PCG64
bit generator (see :func:`projsym.projective_core.make_rng`), so a seed
reproduces the same object on every run.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from projsym.errors import DimensionMismatch
from projsym.projective_core import Field, Ray, make_rng, sample_ray
from projsym.ray_maps import MatrixInduced, Tabulated, probe_set


def _ginibre(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def haar_unitary(n: int, seed: int) -> np.ndarray:
    """Haar-distributed n x n unitary.

    QR-factorizes a complex Ginibre matrix and moves the phases of R's
    diagonal into Q, which makes the factorization unique and the result
    Haar-distributed.
    """
    q, r = np.linalg.qr(_ginibre(make_rng(seed), n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_invertible(n: int, seed: int, max_condition: float = 1e3) -> np.ndarray:
    """Complex Gaussian matrix, redrawn until its condition number is at most ``max_condition``."""
    rng = make_rng(seed)
    while True:
        m = _ginibre(rng, n)
        if np.linalg.cond(m) <= max_condition:
            return m


def random_ray(n: int, seed: int, field: Field = Field.COMPLEX) -> Ray:
    return sample_ray(make_rng(seed), n, field)


def gram_probabilities(rays: Sequence[Ray]) -> np.ndarray:
    """Matrix of pairwise transition probabilities (unit diagonal)."""
    if len({r.dim for r in rays}) > 1:
        raise DimensionMismatch("rays have differing dimensions")
    x = np.column_stack([r.vector for r in rays])
    g = np.minimum(1.0, np.abs(x.conj().T @ x) ** 2)
    np.fill_diagonal(g, 1.0)
    return g


def perturb_ray_map(t: MatrixInduced, eps: float, seed: int) -> MatrixInduced:
    """Add complex Gaussian noise of standard deviation ``eps`` to every matrix entry."""
    if eps == 0:
        return MatrixInduced(t.matrix, t.conjugate_first)
    noise = _ginibre(make_rng(seed), t.dim)
    return MatrixInduced(t.matrix + eps * noise, t.conjugate_first)


def tabulate(t, extra_rays: Sequence[Ray] = (), field: Field = Field.COMPLEX,
             phase_seed: int | None = None) -> Tabulated:
    """Tabulate ``t`` on the probe set plus ``extra_rays``.

    With ``phase_seed`` set, each stored output representative is multiplied
    by an independent random phase (real field: a random sign).
    """
    rays = [r for _, r in probe_set(t.dim, field)] + list(extra_rays)
    outs = t.image_vectors(rays)
    if phase_seed is not None:
        rng = make_rng(phase_seed)
        if field is Field.REAL:
            phases = rng.choice([-1.0, 1.0], size=len(rays))
        else:
            phases = np.exp(2j * np.pi * rng.random(len(rays)))
        outs = outs * phases
    return Tabulated(t.dim, list(zip(rays, outs.T)))
