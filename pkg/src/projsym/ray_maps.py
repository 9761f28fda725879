"""Ray transformations and the checks that form the premises of the lifting theorems.

Three representations are supported:

* :class:`MatrixInduced` -- ``[x] -> [M x]`` or ``[x] -> [M conj(x)]``.
* :class:`Tabulated` -- a finite list of input/output correspondences.
* :class:`OracleMap` -- an arbitrary callable on rays.

Every map exposes ``image_vector`` (a unit-norm representative of the image
ray in whatever phase the map naturally produces) and ``apply`` (the
phase-gauged image ray). The lifts work from ``image_vector`` so that the
phase freedom of representatives is actually exercised.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from projsym.errors import (
    DimensionMismatch,
    DimensionTooSmall,
    IllConditioned,
    ProbeNotTabulated,
)
from projsym.projective_core import (
    Field,
    Ray,
    as_state_vector,
    gauge_columns,
    make_rng,
    sample_rays,
)

MAX_CONDITION = 1e12
TABLE_MATCH_TOL = 1e-10


class RayMap:
    """Base class. Subclasses set ``dim`` and implement ``image_vector``."""

    dim: int
    samplable = True

    def image_vector(self, ray: Ray) -> np.ndarray:
        raise NotImplementedError

    def image_vectors(self, rays: Sequence[Ray]) -> np.ndarray:
        """Unit image representatives as the columns of an ``(n, len(rays))`` array."""
        return np.column_stack([self.image_vector(r) for r in rays])

    def image_matrix(self, x: np.ndarray) -> np.ndarray:
        """Like ``image_vectors`` for rays given as gauged unit columns of ``x``."""
        return self.image_vectors([Ray._trusted(x[:, j]) for j in range(x.shape[1])])

    def apply(self, ray: Ray) -> Ray:
        self._check_dim(ray)
        return Ray(self.image_vector(ray))

    def _check_dim(self, ray: Ray):
        if ray.dim != self.dim:
            raise DimensionMismatch(f"map acts in dim {self.dim}, ray has dim {ray.dim}")


def _unit_columns(m: np.ndarray) -> np.ndarray:
    return m / np.linalg.norm(m, axis=0)


@dataclass(frozen=True, eq=False)
class MatrixInduced(RayMap):
    matrix: np.ndarray
    conjugate_first: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise IllConditioned("matrix has non-finite entries")
        cond = np.linalg.cond(m)
        if not cond <= MAX_CONDITION:
            raise IllConditioned(f"condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def image_vector(self, ray: Ray) -> np.ndarray:
        self._check_dim(ray)
        x = ray.vector.conj() if self.conjugate_first else ray.vector
        y = self.matrix @ x
        return y / np.linalg.norm(y)

    def image_vectors(self, rays: Sequence[Ray]) -> np.ndarray:
        return self.image_matrix(np.column_stack([r.vector for r in rays]))

    def image_matrix(self, x: np.ndarray) -> np.ndarray:
        if x.shape[0] != self.dim:
            raise DimensionMismatch(f"map acts in dim {self.dim}, rays have dim {x.shape[0]}")
        if self.conjugate_first:
            x = x.conj()
        return _unit_columns(self.matrix @ x)


class Tabulated(RayMap):
    """A ray map known only on finitely many rays.

    Outputs are kept as given (normalized, phase untouched); inputs are stored
    as gauged rays and looked up by transition probability.
    """

    samplable = False

    def __init__(self, dim: int, pairs: Sequence[tuple]):
        self.dim = int(dim)
        inputs, outputs = [], []
        for x, y in pairs:
            x = x if isinstance(x, Ray) else Ray(x)
            y = y.vector if isinstance(y, Ray) else as_state_vector(y)
            if x.dim != self.dim or y.shape[0] != self.dim:
                raise DimensionMismatch(f"tabulated pair does not live in dim {self.dim}")
            norm = np.linalg.norm(y)
            if not norm > 0:
                raise DimensionMismatch("tabulated output is the zero vector")
            inputs.append(x)
            outputs.append(y / norm)
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)
        self._in_matrix = (np.column_stack([r.vector for r in inputs])
                           if inputs else np.zeros((self.dim, 0), dtype=np.complex128))
        if inputs:
            gram = np.abs(self._in_matrix.conj().T @ self._in_matrix) ** 2
            np.fill_diagonal(gram, 0.0)
            if np.any(gram >= 1.0 - TABLE_MATCH_TOL):
                i, j = np.argwhere(gram >= 1.0 - TABLE_MATCH_TOL)[0]
                raise DimensionMismatch(f"tabulated inputs {i} and {j} are the same ray")

    def __len__(self):
        return len(self.inputs)

    def lookup(self, ray: Ray) -> Optional[int]:
        if not self.inputs:
            return None
        probs = np.abs(self._in_matrix.conj().T @ ray.vector) ** 2
        k = int(np.argmax(probs))
        return k if probs[k] >= 1.0 - TABLE_MATCH_TOL else None

    def image_vector(self, ray: Ray) -> np.ndarray:
        self._check_dim(ray)
        k = self.lookup(ray)
        if k is None:
            raise ProbeNotTabulated(f"ray {ray!r} is not tabulated", missing=[ray])
        return self.outputs[k]


class OracleMap(RayMap):
    """Black-box ray map. Calls are serialized unless ``reentrant`` is declared."""

    def __init__(self, dim: int, fn: Callable[[Ray], object], reentrant: bool = False):
        self.dim = int(dim)
        self.fn = fn
        self.reentrant = reentrant
        self._lock = threading.Lock()

    def image_vector(self, ray: Ray) -> np.ndarray:
        self._check_dim(ray)
        if self.reentrant:
            out = self.fn(ray)
        else:
            with self._lock:
                out = self.fn(ray)
        v = out.vector if isinstance(out, Ray) else as_state_vector(out)
        if v.shape[0] != self.dim:
            raise DimensionMismatch(f"oracle returned a vector of dim {v.shape[0]}")
        return v / np.linalg.norm(v)


def probe_set(n: int, field: Field = Field.COMPLEX) -> list[tuple[str, Ray]]:
    """Labelled probe rays: e_k, then e_1 + e_k, then (complex only) e_1 + i e_k."""
    probes = []
    eye = np.eye(n, dtype=np.complex128)
    for k in range(n):
        probes.append((f"e{k + 1}", Ray(eye[k])))
    for k in range(1, n):
        probes.append((f"e1+e{k + 1}", Ray(eye[0] + eye[k])))
    if field is Field.COMPLEX:
        for k in range(1, n):
            probes.append((f"e1+i*e{k + 1}", Ray(eye[0] + 1j * eye[k])))
    return probes


def _missing_probes(t: RayMap, probes) -> list[tuple[str, Ray]]:
    if not isinstance(t, Tabulated):
        return []
    return [(label, r) for label, r in probes if t.lookup(r) is None]


def probe_vectors(t: RayMap, field: Field = Field.COMPLEX, labels=None):
    """Probe rays and the unit image representatives the map returns for them.

    Args:
        t: the ray map.
        field: selects the probe set.
        labels: optional subset of probe labels to evaluate (order preserved).

    Returns:
        ``(probes, images)`` where ``probes`` is a list of ``(label, Ray)``
        and ``images`` is a dict from label to unit vector.

    Raises:
        ProbeNotTabulated: naming every probe a tabulated map cannot answer.
    """
    probes = probe_set(t.dim, field)
    if labels is not None:
        wanted = set(labels)
        probes = [(lab, r) for lab, r in probes if lab in wanted]
    missing = _missing_probes(t, probes)
    if missing:
        names = ", ".join(lab for lab, _ in missing)
        raise ProbeNotTabulated(f"map does not answer probes: {names}",
                                missing=[r for _, r in missing])
    cols = t.image_vectors([r for _, r in probes])
    return probes, {lab: cols[:, j] for j, (lab, _) in enumerate(probes)}


def probe_images(t: RayMap, field: Field = Field.COMPLEX) -> list[tuple[Ray, Ray]]:
    probes, images = probe_vectors(t, field)
    return [(r, Ray(images[lab])) for lab, r in probes]


@dataclass(frozen=True)
class Witness:
    """Inputs where a check failed: ``expected`` is the value the check required,
    ``observed`` the value obtained."""

    inputs: tuple
    expected: float
    observed: float


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    trials: int
    worst_residual: float
    tol: float
    seed: Optional[int] = None
    witness: Optional[Witness] = None
    name: str = ""
    details: dict = dc_field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


def _finish_report(name, residuals, witnesses, tol, seed):
    """Build a report; the witness is the first violation in evaluation order."""
    residuals = np.asarray(residuals, dtype=float)
    worst = float(residuals.max()) if residuals.size else 0.0
    witness = None
    bad = np.flatnonzero(residuals > tol)
    if bad.size:
        witness = witnesses(int(bad[0]))
    return VerificationReport(passed=worst <= tol, trials=int(residuals.size),
                              worst_residual=worst, tol=tol, seed=seed,
                              witness=witness, name=name)


def _columns(rays: Sequence[Ray], n: int) -> np.ndarray:
    return (np.column_stack([r.vector for r in rays]) if rays
            else np.zeros((n, 0), dtype=np.complex128))


def input_output_samples(t: RayMap, trials: int, rng, field: Field = Field.COMPLEX):
    """Rays to test a map on, with their unit image representatives.

    Samplable maps get ``trials`` uniformly random rays; tabulated maps
    contribute every stored pair. Both are returned as column matrices.
    """
    if isinstance(t, Tabulated):
        return t._in_matrix, _columns_raw(t.outputs, t.dim)
    x = sample_rays(rng, t.dim, trials, field)
    return x, (t.image_matrix(x) if trials else x.copy())


def _columns_raw(vectors, n: int) -> np.ndarray:
    return np.column_stack(vectors) if vectors else np.zeros((n, 0), dtype=np.complex128)


def _probabilities(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Columnwise |<a_j|b_j>|^2 for unit columns."""
    return np.abs(np.sum(a.conj() * b, axis=0)) ** 2


def check_quasi_unitary(t: RayMap, trials: int = 200, tol: float = 1e-8, seed: int = 0,
                        field: Field = Field.COMPLEX) -> VerificationReport:
    """Compare transition probabilities before and after applying ``t``.

    For samplable maps all pairs of probe rays are compared first, followed by
    ``trials`` random pairs. A tabulated map is checked on every pair of its
    stored inputs. The residual of a pair is ``|P(A, B) - P(TA, TB)|``; the
    witness is the first pair, in that order, whose residual exceeds ``tol``.
    """
    rng = make_rng(seed)
    if isinstance(t, Tabulated):
        x, y = t._in_matrix, _columns_raw(t.outputs, t.dim)
    else:
        x = _columns([r for _, r in probe_set(t.dim, field)], t.dim)
        y = t.image_matrix(x)
    iu, ju = np.triu_indices(x.shape[1], k=1)
    exp = (np.abs(x.conj().T @ x) ** 2)[iu, ju]
    obs = (np.abs(y.conj().T @ y) ** 2)[iu, ju]
    pairs = [(x[:, iu], x[:, ju])]

    if t.samplable and trials > 0:
        a = sample_rays(rng, t.dim, trials, field)
        b = sample_rays(rng, t.dim, trials, field)
        exp = np.concatenate([exp, _probabilities(a, b)])
        obs = np.concatenate([obs, _probabilities(t.image_matrix(a), t.image_matrix(b))])
        pairs.append((a, b))
    left = np.concatenate([p[0] for p in pairs], axis=1)
    right = np.concatenate([p[1] for p in pairs], axis=1)

    return _finish_report(
        "quasi_unitarity", np.abs(exp - obs),
        lambda k: Witness((Ray._trusted(left[:, k]), Ray._trusted(right[:, k])),
                          float(exp[k]), float(obs[k])), tol, seed)


def _line_residuals(ya: np.ndarray, yb: np.ndarray, yc: np.ndarray) -> np.ndarray:
    """Columnwise distance of unit ``yc`` from span(ya, yb); 1.0 where that span collapses.

    All arguments are (n, m) arrays of unit columns, or ``ya``/``yb`` single
    columns broadcast against ``yc``.
    """
    q1 = ya
    v = yb - q1 * np.sum(q1.conj() * yb, axis=0)
    vn = np.linalg.norm(v, axis=0)
    q2 = v / np.where(vn > 1e-12, vn, 1.0)
    r = yc - q1 * np.sum(q1.conj() * yc, axis=0)
    r = r - q2 * np.sum(q2.conj() * r, axis=0)
    res = np.linalg.norm(r, axis=0)
    return np.where(vn > 1e-12, res, 1.0)


def check_collineation(t: RayMap, trials: int = 200, tol: float = 1e-8, seed: int = 0,
                       field: Field = Field.COMPLEX) -> VerificationReport:
    """Test that images of points on a line stay on the image line.

    Each trial draws independent rays A, B and a point C = [alpha a + beta b],
    then measures how far T C lies from the join of T A and T B. This checks
    the inclusion T(A v B) in TA v TB; the reverse inclusion follows from
    bijectivity, which is assumed.

    Tabulated maps are checked on every stored triple whose inputs are
    collinear.

    Raises:
        DimensionTooSmall: for dim < 3, where the whole space is one line.
    """
    if t.dim < 3:
        raise DimensionTooSmall(f"collineation check needs dim >= 3, got {t.dim}")
    if isinstance(t, Tabulated):
        return _check_collineation_table(t, tol, seed)
    rng = make_rng(seed)
    a = sample_rays(rng, t.dim, trials, field)
    b = sample_rays(rng, t.dim, trials, field)
    coef = sample_rays(rng, 2, trials, field)
    c = gauge_columns(coef[0] * a + coef[1] * b) if trials else a
    residuals = _line_residuals(t.image_matrix(a), t.image_matrix(b), t.image_matrix(c))
    return _finish_report(
        "collineation", residuals,
        lambda k: Witness(tuple(Ray._trusted(m[:, k]) for m in (a, b, c)), 0.0,
                          float(residuals[k])), tol, seed)


def _check_collineation_table(t: Tabulated, tol: float, seed) -> VerificationReport:
    x = t._in_matrix
    y = _columns_raw(t.outputs, t.dim)
    m = len(t)
    residuals, triples = [], []
    for i in range(m):
        for j in range(i + 1, m):
            off = _line_residuals(x[:, [i]], x[:, [j]], x)
            on_line = [k for k in np.flatnonzero(off <= 1e-10) if k != i and k != j]
            if not on_line:
                continue
            res = _line_residuals(y[:, [i]], y[:, [j]], y[:, on_line])
            for k, rk in zip(on_line, res):
                residuals.append(float(rk))
                triples.append((t.inputs[i], t.inputs[j], t.inputs[k]))
    return _finish_report("collineation", residuals,
                          lambda k: Witness(triples[k], 0.0, residuals[k]), tol, seed)


def coefficient_magnitudes(t: RayMap, basis: np.ndarray, c) -> tuple[np.ndarray, np.ndarray]:
    """Squared expansion coefficients of a ray before and after mapping.

    ``basis`` holds an orthonormal basis {b_k} as columns. Returns
    ``(|gamma_k|^2, |gamma'_k|^2)`` where gamma are the coefficients of unit(c)
    in {b_k} and gamma' those of the unit image of c in the unit images of the
    b_k. For a transition-probability preserving map the two agree.
    """
    basis = np.asarray(basis, dtype=np.complex128)
    c = as_state_vector(c)
    c = c / np.linalg.norm(c)
    before = np.abs(basis.conj().T @ c) ** 2
    b_img = t.image_vectors([Ray(basis[:, k]) for k in range(basis.shape[1])])
    c_img = t.image_vector(Ray(c))
    after = np.abs(b_img.conj().T @ c_img) ** 2
    return before, after
