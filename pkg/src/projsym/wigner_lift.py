"""Lifting a transition-probability preserving ray map to a (anti-)unitary operator.

The construction mirrors the collineation lift but exploits the inner
product: images of the basis rays are orthonormal, so expansion
coefficients come from inner products instead of a linear solve, and the
basis rescaling reduces to pure phases.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from projsym.artin_lift import (
    SIGMA_TOL,
    Sigma,
    compatibility_report,
    detect_automorphism,
)
from projsym.errors import (
    CoefficientMagnitudeViolation,
    CompatibilityFailure,
    DimensionMismatch,
    DimensionTooSmall,
    FieldMismatch,
    ImageNotOrthonormal,
    InputError,
    KindMismatch,
    NotQuasiUnitary,
)
from projsym.projective_core import Field, Ray, gauge_index
from projsym.ray_maps import (
    RayMap,
    VerificationReport,
    Witness,
    check_quasi_unitary,
    probe_vectors,
)

ORTHONORMAL_TOL = 1e-10


class Kind(enum.Enum):
    UNITARY = "unitary"
    ANTIUNITARY = "antiunitary"

    @property
    def sigma(self) -> Sigma:
        return Sigma.CONJUGATION if self is Kind.ANTIUNITARY else Sigma.IDENTITY

    @classmethod
    def from_sigma(cls, sigma: Sigma) -> "Kind":
        return cls.ANTIUNITARY if sigma is Sigma.CONJUGATION else cls.UNITARY


def orthonormality_residual(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[1]))))


@dataclass(frozen=True, eq=False)
class SemiUnitary:
    """Unitary (``kind=UNITARY``) or anti-unitary operator ``x -> matrix @ sigma(x)``.

    The stored matrix is phase-gauged: the largest-magnitude entry of the first
    column is real and non-negative.
    """

    matrix: np.ndarray
    kind: Kind = Kind.UNITARY

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"matrix must be square, got shape {m.shape}")
        dev = orthonormality_residual(m)
        if dev > ORTHONORMAL_TOL:
            raise InputError(f"matrix columns are not orthonormal (deviation {dev:.3g})")
        p = gauge_index(m[:, 0])
        m = m * (np.conj(m[p, 0]) / abs(m[p, 0]))
        m[p, 0] = abs(m[p, 0])
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def sigma(self) -> Sigma:
        return self.kind.sigma

    @property
    def conjugate(self) -> bool:
        return self.kind is Kind.ANTIUNITARY

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ self.sigma(np.asarray(x, dtype=np.complex128))


@dataclass(frozen=True)
class SymmetryCertificate:
    quasi_unitarity: VerificationReport
    compatibility: VerificationReport
    kind: Kind
    sigma_residual: float
    mu_values: tuple = ()
    orthonormality_residual: float = 0.0
    coefficient_residual: float = 0.0

    @property
    def valid(self) -> bool:
        return self.quasi_unitarity.passed and self.compatibility.passed


def _image_basis(images: dict, n: int, orth_tol: float) -> tuple[np.ndarray, float]:
    b = np.column_stack([images[f"e{k + 1}"] for k in range(n)])
    dev = orthonormality_residual(b)
    if dev > orth_tol:
        raise ImageNotOrthonormal(f"basis images deviate from orthonormal by {dev:.3g}")
    return b, dev


def _two_term_coefficients(b: np.ndarray, c: np.ndarray, k: int, tol: float, label: str):
    """Coefficients of ``c`` on b_1 and b_k, checking the squared magnitudes.

    A probe [e_1 + lambda e_k] with |lambda| = 1 has squared coefficients 1/2
    on e_1 and e_k and 0 elsewhere; a transition-probability preserving map
    keeps those values.
    """
    g = b.conj().T @ c
    mags = np.abs(g) ** 2
    expected = np.zeros_like(mags)
    expected[[0, k]] = 0.5
    dev = float(np.max(np.abs(mags - expected)))
    if dev > tol:
        raise CoefficientMagnitudeViolation(
            f"image of {label}: squared coefficients deviate by {dev:.3g}")
    return g[0], g[k], dev


def lift_symmetry(t: RayMap, field: Field = Field.COMPLEX, tol: float = 1e-8,
                  trials: int = 200, seed: int = 0, orth_tol: float = ORTHONORMAL_TOL,
                  sigma_tol: float = SIGMA_TOL) -> tuple[SemiUnitary, SymmetryCertificate]:
    """Construct the semi-unitary operator U with ``t[x] = [U sigma(x)]``.

    Steps: verify quasi-unitarity; take the unit images of [e_k] (checked to
    be orthonormal); fix their relative phases with the images of
    [e_1 + e_k]; detect sigma from [e_1 + i e_k]; gauge the global phase and
    confirm compatibility on sample rays.

    Works for n >= 2.

    Raises:
        NotQuasiUnitary, ImageNotOrthonormal, CoefficientMagnitudeViolation,
        CompatibilityFailure: the map does not preserve transition
            probabilities (detected at the named stage).
        AutomorphismUndetermined: sigma cannot be classified.
        ProbeNotTabulated: a tabulated map misses probes.
    """
    n = t.dim
    if n < 2:
        raise DimensionTooSmall(f"symmetry lift needs dim >= 2, got {n}")
    quasi = check_quasi_unitary(t, trials, tol, seed, field)
    if not quasi.passed:
        raise NotQuasiUnitary(
            f"map changes transition probabilities by up to {quasi.worst_residual:.3g}",
            witness=quasi.witness)

    _, images = probe_vectors(t, field)
    if field is Field.REAL:
        images = {lab: Ray(v).vector for lab, v in images.items()}
        imag = max(float(np.max(np.abs(v.imag))) for v in images.values())
        if imag > tol:
            raise FieldMismatch(f"real-field lift met imaginary parts up to {imag:.3g}")
        images = {lab: v.real.astype(np.complex128) for lab, v in images.items()}
    b, orth_dev = _image_basis(images, n, orth_tol)
    b = b.copy()

    coeff_dev = 0.0
    for k in range(1, n):
        g1, gk, dev = _two_term_coefficients(b, images[f"e1+e{k + 1}"], k, tol,
                                             f"e1+e{k + 1}")
        phase = gk / g1
        b[:, k] *= phase / abs(phase)
        coeff_dev = max(coeff_dev, dev)

    mus: list[complex] = []
    if field is Field.REAL:
        sigma, sigma_residual = Sigma.IDENTITY, 0.0
    else:
        for k in range(1, n):
            g1, gk, dev = _two_term_coefficients(b, images[f"e1+i*e{k + 1}"], k, tol,
                                                 f"e1+i*e{k + 1}")
            mus.append(complex(gk / g1))
            coeff_dev = max(coeff_dev, dev)
        sigma, sigma_residual = detect_automorphism(mus, sigma_tol)

    u = SemiUnitary(b, Kind.from_sigma(sigma))
    compat = compatibility_report(t, u, trials, tol, seed, field)
    if not compat.passed:
        raise CompatibilityFailure(
            f"[U sigma(x)] misses t[x] by up to {compat.worst_residual:.3g}",
            witness=compat.witness)
    return u, SymmetryCertificate(quasi_unitarity=quasi, compatibility=compat,
                                  kind=u.kind, sigma_residual=sigma_residual,
                                  mu_values=tuple(mus), orthonormality_residual=orth_dev,
                                  coefficient_residual=coeff_dev)


_CLASSIFY_PROBES = ("e1", "e2", "e1+e2", "e1+i*e2")


def classify(t: RayMap, field: Field = Field.COMPLEX, tol: float = 1e-8,
             sigma_tol: float = SIGMA_TOL) -> Kind:
    """Unitary or anti-unitary, decided from four probes only.

    Uses [e1], [e2], [e1+e2] and [e1+i e2]; transition probabilities among
    them are checked first. Over the real field the answer is always UNITARY.
    """
    if t.dim < 2:
        raise DimensionTooSmall(f"classification needs dim >= 2, got {t.dim}")
    if field is Field.REAL:
        return Kind.UNITARY
    probes, images = probe_vectors(t, field, labels=_CLASSIFY_PROBES)
    x = np.column_stack([r.vector for _, r in probes])
    y = np.column_stack([images[lab] for lab, _ in probes])
    before = np.abs(x.conj().T @ x) ** 2
    after = np.abs(y.conj().T @ y) ** 2
    diff = np.abs(before - after)
    if diff.max() > tol:
        i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
        raise NotQuasiUnitary(
            f"probes {probes[i][0]} and {probes[j][0]} change transition probability "
            f"from {before[i, j]:.6g} to {after[i, j]:.6g}",
            witness=Witness((probes[i][1], probes[j][1]), float(before[i, j]),
                            float(after[i, j])))
    b = np.column_stack([images["e1"], images["e2"]])
    g1, g2, _ = _two_term_coefficients(b, images["e1+e2"], 1, tol, "e1+e2")
    phase = g2 / g1
    b[:, 1] *= phase / abs(phase)
    g1, g2, _ = _two_term_coefficients(b, images["e1+i*e2"], 1, tol, "e1+i*e2")
    sigma, _ = detect_automorphism([g2 / g1], sigma_tol)
    return Kind.from_sigma(sigma)


def phase_align(u: SemiUnitary, v: SemiUnitary) -> tuple[float, float]:
    """Phase theta with ``u.matrix ~ exp(i theta) v.matrix``.

    Theta is read from the ratio of the entries at the position of v's
    largest-magnitude entry, so the residual does not depend on global phases
    applied to either operator beforehand.

    Returns:
        ``(theta, residual)``, theta in (-pi, pi], residual the largest
        entrywise deviation of ``u.matrix - exp(i theta) v.matrix``.
    """
    if u.kind is not v.kind:
        raise KindMismatch(f"cannot align {u.kind.value} with {v.kind.value}")
    if u.dim != v.dim:
        raise DimensionMismatch(f"dims {u.dim} and {v.dim} differ")
    flat_v = v.matrix.ravel()
    p = gauge_index(flat_v)
    theta = float(np.angle(u.matrix.ravel()[p] / flat_v[p]))
    residual = float(np.max(np.abs(u.matrix - np.exp(1j * theta) * v.matrix)))
    return theta, residual


def verify_compatibility(t: RayMap, u, trials: int = 200, tol: float = 1e-8,
                         seed: int = 0, field: Field = Field.COMPLEX) -> VerificationReport:
    """Residual ``1 - P(t[x], [U sigma(x)])`` over sample rays; ``u`` may also be a SemiLinearMap."""
    if u.dim != t.dim:
        raise DimensionMismatch(f"operator dim {u.dim} differs from map dim {t.dim}")
    return compatibility_report(t, u, trials, tol, seed, field)
