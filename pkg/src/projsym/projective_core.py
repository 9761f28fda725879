"""Rays, projective subspaces and transition probabilities over R and C.

All vectors are stored as complex128 arrays. Real-field data is complex data
whose imaginary parts are exactly zero; nothing in this module introduces a
nonzero imaginary part into such data.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from projsym.errors import (
    DegenerateJoin,
    DimensionMismatch,
    TooFewRays,
    WrongFrameSize,
    ZeroVector,
)

ZERO_THRESHOLD = 1e-300
RANK_RTOL = 1e-10
# magnitudes within this relative distance of the maximum count as tied
GAUGE_TIE_RTOL = 1e-9


class Field(enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


def as_state_vector(v) -> np.ndarray:
    """Coerce ``v`` to a 1-d complex128 array of length >= 1."""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1:
        raise DimensionMismatch(f"state vector must be 1-d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ZeroVector("state vector has non-finite components")
    return arr


def gauge_index(v: np.ndarray) -> int:
    """Index of the gauge pivot: the largest-magnitude entry, lowest index on ties."""
    mags = np.abs(v)
    return int(np.argmax(mags >= mags.max() * (1.0 - GAUGE_TIE_RTOL)))


def canonical_phase(v: np.ndarray) -> complex:
    """Unit-modulus factor that makes the gauge pivot of ``v`` real and positive."""
    p = v[gauge_index(v)]
    return np.conj(p) / abs(p)


def gauge_columns(m: np.ndarray) -> np.ndarray:
    """Normalize and phase-gauge every column of ``m`` (columns must be nonzero)."""
    m = np.array(m, dtype=np.complex128)
    mags = np.abs(m)
    m /= mags.max(axis=0)
    m /= np.linalg.norm(m, axis=0)
    mags = np.abs(m)
    piv = np.argmax(mags >= mags.max(axis=0) * (1.0 - GAUGE_TIE_RTOL), axis=0)
    cols = np.arange(m.shape[1])
    p = m[piv, cols]
    m *= np.conj(p) / np.abs(p)
    m[piv, cols] = mags[piv, cols]
    return m


@dataclass(frozen=True, eq=False)
class Ray:
    """A one-dimensional subspace, held by its unit-norm, phase-gauged representative.

    Constructing a ``Ray`` from any nonzero vector normalizes it and fixes the
    phase so that the largest-magnitude component is real and >= 0.
    """

    vector: np.ndarray

    def __post_init__(self):
        v = as_state_vector(self.vector)
        if v.size == 0 or not np.abs(v).max() > ZERO_THRESHOLD:
            raise ZeroVector("cannot form a ray from the zero vector")
        v = gauge_columns(v[:, None])[:, 0]
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @classmethod
    def _trusted(cls, v: np.ndarray) -> "Ray":
        """Wrap an already gauged unit vector without recomputing the gauge."""
        r = object.__new__(cls)
        v = np.array(v, dtype=np.complex128)
        v.setflags(write=False)
        object.__setattr__(r, "vector", v)
        return r

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def __repr__(self):
        return f"Ray({np.array2string(self.vector, precision=4)})"


def ray_from_vector(v) -> Ray:
    return Ray(v)


def basis_ray(n: int, k: int) -> Ray:
    e = np.zeros(n, dtype=np.complex128)
    e[k] = 1.0
    return Ray(e)


def _check_dims(*rays: Ray) -> int:
    dims = {r.dim for r in rays}
    if len(dims) != 1:
        raise DimensionMismatch(f"rays have differing dimensions {sorted(dims)}")
    return dims.pop()


def overlap_probability(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2 / (|a|^2 |b|^2) for arbitrary nonzero vectors, clipped to [0, 1]."""
    num = abs(np.vdot(a, b)) ** 2
    den = np.vdot(a, a).real * np.vdot(b, b).real
    return float(min(1.0, max(0.0, num / den)))


def transition_probability(a: Ray, b: Ray) -> float:
    """Transition probability |<a|b>|^2 between two rays.

    Symmetric in its arguments; equals 1 exactly when the rays coincide and 0
    when their representatives are orthogonal.
    """
    _check_dims(a, b)
    return float(min(1.0, abs(np.vdot(a.vector, b.vector)) ** 2))


def rays_equal(a: Ray, b: Ray, tol: float = 1e-10) -> bool:
    return transition_probability(a, b) >= 1.0 - tol


@dataclass(frozen=True, eq=False)
class ProjectiveSubspace:
    """Projective subspace stored as an orthonormal basis (columns of ``basis``)."""

    ambient_dim: int
    basis: np.ndarray

    @property
    def projective_dim(self) -> int:
        return self.basis.shape[1] - 1

    @property
    def span_dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def residual(self, v: np.ndarray) -> float:
        """Norm of the part of unit(``v``) orthogonal to the subspace."""
        v = as_state_vector(v)
        v = v / np.linalg.norm(v)
        return float(np.linalg.norm(v - self.basis @ (self.basis.conj().T @ v)))

    def same_as(self, other: "ProjectiveSubspace", tol: float = 1e-10) -> bool:
        if self.ambient_dim != other.ambient_dim or self.span_dim != other.span_dim:
            return False
        return bool(np.max(np.abs(self.projector() - other.projector())) <= tol)


def span(vectors: Sequence[np.ndarray]) -> ProjectiveSubspace:
    """Orthonormalize ``vectors`` into a subspace; rank decided at ``RANK_RTOL``."""
    m = np.column_stack([as_state_vector(v) for v in vectors])
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    rank = int(np.sum(s > RANK_RTOL * s[0]))
    return ProjectiveSubspace(m.shape[0], u[:, :rank])


def join(a: Ray, b: Ray) -> ProjectiveSubspace:
    """The projective line through two distinct rays.

    Raises:
        DegenerateJoin: if the rays coincide within 1e-10.
    """
    n = _check_dims(a, b)
    if rays_equal(a, b, 1e-10):
        raise DegenerateJoin("join of equal rays is not a line")
    x = a.vector
    y = b.vector - np.vdot(x, b.vector) * x
    y = y / np.linalg.norm(y)
    return ProjectiveSubspace(n, np.column_stack([x, y]))


def contains(s: ProjectiveSubspace, c: Ray, tol: float = 1e-10) -> bool:
    if s.ambient_dim != c.dim:
        raise DimensionMismatch(f"subspace lives in dim {s.ambient_dim}, ray in {c.dim}")
    return s.residual(c.vector) <= tol


def _representatives(rays: Sequence[Ray]) -> np.ndarray:
    return np.column_stack([r.vector for r in rays])


def projectively_independent(rays: Sequence[Ray]) -> bool:
    if len(rays) < 2:
        raise TooFewRays("projective independence needs at least two rays")
    n = _check_dims(*rays)
    if len(rays) > n:
        return False
    s = np.linalg.svd(_representatives(rays), compute_uv=False)
    return bool(s[-1] > RANK_RTOL * s[0])


def collinear(points: Sequence[Ray], tol: float = 1e-10) -> bool:
    """True iff every point lies on the line through the first two."""
    if len(points) < 3:
        raise TooFewRays("collinearity needs at least three points")
    line = join(points[0], points[1])
    return all(contains(line, p, tol) for p in points[2:])


def is_projective_frame(rays: Sequence[Ray]) -> bool:
    """Check whether ``rays`` form a projective frame (base) of PV.

    For vector-space dimension n the frame has n + 1 rays, and every subset of
    n of them must be projectively independent.
    """
    if not rays:
        raise WrongFrameSize("empty ray list")
    n = _check_dims(*rays)
    if len(rays) != n + 1:
        raise WrongFrameSize(f"a frame in dimension {n} has {n + 1} rays, got {len(rays)}")
    return all(projectively_independent(sub) for sub in itertools.combinations(rays, n))


def standard_frame(n: int) -> list[Ray]:
    return [basis_ray(n, k) for k in range(n)] + [Ray(np.ones(n))]


def make_rng(seed: int) -> np.random.Generator:
    """The package-wide PRNG: numpy's PCG64 seeded with a 64-bit unsigned integer."""
    return np.random.Generator(np.random.PCG64(seed))


def sample_vector(rng: np.random.Generator, n: int, field: Field = Field.COMPLEX) -> np.ndarray:
    """Standard Gaussian vector; gauging it gives a uniformly distributed ray."""
    if field is Field.REAL:
        return rng.standard_normal(n).astype(np.complex128)
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)


def sample_ray(rng: np.random.Generator, n: int, field: Field = Field.COMPLEX) -> Ray:
    return Ray(sample_vector(rng, n, field))


def sample_rays(rng: np.random.Generator, n: int, count: int,
                field: Field = Field.COMPLEX) -> np.ndarray:
    """``count`` uniformly random rays as the gauged unit columns of an (n, count) array."""
    if field is Field.REAL:
        m = rng.standard_normal((n, count)).astype(np.complex128)
    else:
        m = (rng.standard_normal((n, count)) + 1j * rng.standard_normal((n, count))) / np.sqrt(2.0)
    return gauge_columns(m) if count else m
