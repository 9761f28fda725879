"""Lifting a collineation to a compatible semi-linear map.

Given a collineation f of PV (dim V = n >= 3), the lift:

1. takes representatives w_k of the images f[e_k];
2. rescales them so that f[e_1 + e_k] = [w_1 + w_k];
3. reads the field automorphism off f[e_1 + i e_k] = [w_1 + sigma(i) w_k];
4. assembles F with columns w_k and checks f[x] = [F sigma(x)] on samples.

Only the identity and complex conjugation are admitted as automorphisms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field

import numpy as np

from projsym.errors import (
    AutomorphismUndetermined,
    DimensionMismatch,
    DimensionTooSmall,
    FieldMismatch,
    IllConditioned,
    NotACollineation,
    SigmaMismatch,
)
from projsym.projective_core import Field, Ray, as_state_vector, make_rng
from projsym.ray_maps import (
    MAX_CONDITION,
    RayMap,
    VerificationReport,
    Witness,
    _finish_report,
    input_output_samples,
    probe_vectors,
)

SIGMA_TOL = 1e-6
SIGMA_SEPARATION = 0.5


class Sigma(enum.Enum):
    IDENTITY = "identity"
    CONJUGATION = "conjugation"

    def __call__(self, x):
        return np.conj(x) if self is Sigma.CONJUGATION else x


@dataclass(frozen=True, eq=False)
class SemiLinearMap:
    """``x -> matrix @ sigma(x)`` with sigma applied componentwise."""

    matrix: np.ndarray
    sigma: Sigma = Sigma.IDENTITY

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"matrix must be square, got shape {m.shape}")
        cond = np.linalg.cond(m)
        if not cond <= MAX_CONDITION:
            raise IllConditioned(f"condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def conjugate(self) -> bool:
        return self.sigma is Sigma.CONJUGATION


@dataclass(frozen=True)
class LiftDiagnostics:
    rescale_factors: np.ndarray
    sigma_residual: float
    mu_values: tuple
    verification: VerificationReport
    stray_coefficient: float = 0.0
    extras: dict = dc_field(default_factory=dict)


def apply_semilinear(f: SemiLinearMap, x) -> np.ndarray:
    x = as_state_vector(x)
    if x.shape[0] != f.dim:
        raise DimensionMismatch(f"map acts in dim {f.dim}, vector has dim {x.shape[0]}")
    return f.matrix @ f.sigma(x)


def scalar_align(f: SemiLinearMap, g: SemiLinearMap) -> tuple[complex, float]:
    """Least-squares scalar with ``f.matrix ~ lam * g.matrix``.

    Returns ``(lam, residual)`` where residual is the largest entrywise
    deviation of ``f.matrix - lam * g.matrix``.
    """
    if f.sigma is not g.sigma:
        raise SigmaMismatch(f"cannot align {f.sigma.value} with {g.sigma.value}")
    if f.dim != g.dim:
        raise DimensionMismatch(f"dims {f.dim} and {g.dim} differ")
    lam = np.vdot(g.matrix, f.matrix) / np.vdot(g.matrix, g.matrix)
    residual = float(np.max(np.abs(f.matrix - lam * g.matrix)))
    return complex(lam), residual


def detect_automorphism(mus, sigma_tol: float = SIGMA_TOL,
                        separation: float = SIGMA_SEPARATION) -> tuple[Sigma, float]:
    """Decide sigma from the observed images mu = sigma(i) of the imaginary unit.

    Every mu must sit within ``sigma_tol`` of +i (identity) or -i
    (conjugation), at least ``separation`` away from the other candidate, and
    all must give the same verdict.

    Returns:
        ``(sigma, residual)`` with residual the largest distance to the chosen
        candidate.
    """
    verdicts, residuals = [], []
    for k, mu in enumerate(mus):
        d_id, d_conj = abs(mu - 1j), abs(mu + 1j)
        if d_id <= sigma_tol and d_conj >= separation:
            verdicts.append(Sigma.IDENTITY)
            residuals.append(d_id)
        elif d_conj <= sigma_tol and d_id >= separation:
            verdicts.append(Sigma.CONJUGATION)
            residuals.append(d_conj)
        else:
            raise AutomorphismUndetermined(
                f"probe {k + 2}: mu = {complex(mu):.6g} is neither i nor -i "
                f"(distances {d_id:.3g}, {d_conj:.3g})")
    if not verdicts:
        raise AutomorphismUndetermined("no automorphism probes supplied")
    if len(set(verdicts)) > 1:
        raise AutomorphismUndetermined(
            "automorphism probes disagree: " + ", ".join(v.value for v in verdicts))
    return verdicts[0], float(max(residuals))


def _expand(w: np.ndarray, c: np.ndarray, k: int, tol: float, label: str):
    """Solve w @ coeffs = c and return the (first, k-th) coefficients.

    Raises NotACollineation when any other coefficient is non-negligible or
    one of the two expected ones vanishes.
    """
    coeffs = np.linalg.solve(w, c)
    alpha, beta = coeffs[0], coeffs[k]
    scale = max(abs(alpha), abs(beta))
    stray = np.delete(coeffs, [0, k])
    stray_max = float(np.max(np.abs(stray))) / scale if stray.size else 0.0
    if stray_max > tol:
        raise NotACollineation(
            f"image of {label} leaves the image line (stray coefficient {stray_max:.3g})")
    if min(abs(alpha), abs(beta)) <= tol * scale:
        raise NotACollineation(f"image of {label} collapses onto a basis image")
    return alpha, beta, stray_max


def _real_part_checked(m: np.ndarray, tol: float) -> np.ndarray:
    imag = float(np.max(np.abs(m.imag))) if m.size else 0.0
    if imag > tol:
        raise FieldMismatch(f"real-field lift met imaginary parts up to {imag:.3g}")
    return m.real.astype(np.complex128)


def lift_collineation(f: RayMap, field: Field = Field.COMPLEX, tol: float = 1e-8,
                      trials: int = 200, seed: int = 0,
                      sigma_tol: float = SIGMA_TOL) -> tuple[SemiLinearMap, LiftDiagnostics]:
    """Construct a semi-linear map compatible with the collineation ``f``.

    The result is unique up to one overall scalar; the first column is the
    image representative of e_1 as returned by ``f``.

    Args:
        f: the collineation, able to answer the probe set.
        field: REAL skips automorphism detection (sigma is the identity).
        tol: bound for stray expansion coefficients and for the
            ``1 - P(f[x], [F sigma(x)])`` residual in the final check.
        trials: random rays in the final check (tabulated maps use their table).
        seed: PRNG seed for the final check.
        sigma_tol: acceptance radius around +-i for the automorphism test.

    Raises:
        DimensionTooSmall: n < 3.
        ProbeNotTabulated: the map cannot answer every probe.
        NotACollineation: stray coefficients, dependent basis images, or a
            failed final check.
        AutomorphismUndetermined: a probe gives neither i nor -i, or probes disagree.
    """
    n = f.dim
    if n < 3:
        raise DimensionTooSmall(f"collineation lift needs dim >= 3, got {n}")
    _, images = probe_vectors(f, field)
    if field is Field.REAL:
        # gauged representatives of real rays are real
        images = {lab: Ray(v).vector for lab, v in images.items()}

    w = np.column_stack([images[f"e{k + 1}"] for k in range(n)])
    cond = np.linalg.cond(w)
    if not cond <= MAX_CONDITION:
        raise NotACollineation(f"images of the basis rays are dependent (cond {cond:.3g})")

    factors = np.ones(n, dtype=np.complex128)
    stray_worst = 0.0
    for k in range(1, n):
        alpha, beta, stray = _expand(w, images[f"e1+e{k + 1}"], k, tol, f"e1+e{k + 1}")
        factors[k] = beta / alpha
        stray_worst = max(stray_worst, stray)
    w = w * factors

    mus: list[complex] = []
    if field is Field.REAL:
        w = _real_part_checked(w, tol)
        sigma, sigma_residual = Sigma.IDENTITY, 0.0
    else:
        for k in range(1, n):
            alpha, mu_raw, stray = _expand(w, images[f"e1+i*e{k + 1}"], k, tol,
                                           f"e1+i*e{k + 1}")
            mus.append(complex(mu_raw / alpha))
            stray_worst = max(stray_worst, stray)
        sigma, sigma_residual = detect_automorphism(mus, sigma_tol)

    lifted = SemiLinearMap(w, sigma)
    report = compatibility_report(f, lifted, trials, tol, seed, field)
    if not report.passed:
        raise NotACollineation(
            f"lifted map disagrees with f (worst 1 - P = {report.worst_residual:.3g})",
            witness=report.witness)
    return lifted, LiftDiagnostics(rescale_factors=factors, sigma_residual=sigma_residual,
                                   mu_values=tuple(mus), verification=report,
                                   stray_coefficient=stray_worst)


def compatibility_report(t: RayMap, op, trials: int, tol: float, seed: int,
                         field: Field) -> VerificationReport:
    """Residual ``1 - P(t[x], [op.matrix sigma(x)])`` over sample rays."""
    rng = make_rng(seed)
    x, y = input_output_samples(t, trials, rng, field)
    z = op.matrix @ (x.conj() if op.conjugate else x)
    z = z / np.linalg.norm(z, axis=0)
    probs = np.minimum(1.0, np.abs(np.sum(y.conj() * z, axis=0)) ** 2)
    return _finish_report("compatibility", 1.0 - probs,
                          lambda k: Witness((Ray._trusted(x[:, k]),), 1.0, float(probs[k])),
                          tol, seed)
