"""Worst-case error constants, directional Hessian bounds, and the
measurement side that checks them.

Constant conventions: ``kappa_ef`` bounds ``|f - m|`` by ``kappa_ef * Delta^2``
and ``kappa_eg`` bounds ``||grad f - grad m||`` by ``kappa_eg * Delta`` over
the ball ``B(x0, Delta)`` whose radius is the sample-set radius.  Hessian-side
constants ``kappa_mH`` bound the model curvature along unit directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc
from scipy.special import ndtri

from . import linalg
from .errors import DirectionDomainError, InvalidInputError, NotPoisedError
from .sample_sets import SampleSet, kkt_matrices

__all__ = [
    "LipschitzData",
    "BoundConstants",
    "ErrorMeasurement",
    "kappa_mH_mfn",
    "kappa_mH_mn",
    "kappa_mH_qs",
    "kappa_generic",
    "directional_bound_aligned",
    "directional_bound_cross",
    "directional_bound_general",
    "hess_error_bound_global",
    "directional_bound_gsh_cross",
    "directional_bound_gsh_general",
    "gsh_error_bound_global",
    "ball_points",
    "measure_errors",
    "fit_slope",
]

# Frozen scramble seed: the ball sample is part of the reproducible surface.
_HALTON_SEED = 54709
DEFAULT_SAMPLES = 512

# Measured errors at or below this multiple of eps*|f| are roundoff, not signal.
ROUNDOFF_FLOOR = 1e3 * float(np.finfo(float).eps)


@dataclass(frozen=True)
class LipschitzData:
    """Derivative bounds valid on a ball of ``region_radius`` around a center."""

    L_grad: float
    L_hess: float
    kappa_g: float
    region_radius: float

    def __post_init__(self):
        for name in ("L_grad", "L_hess", "kappa_g", "region_radius"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise InvalidInputError(f"{name} must be finite and nonnegative")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class BoundConstants:
    kappa_mH: float
    kappa_ef: float
    kappa_eg: float
    family: str


def _positive(x, name):
    x = float(x)
    if not np.isfinite(x) or x <= 0:
        raise InvalidInputError(f"{name} must be positive and finite")
    return x


def _nonnegative(x, name):
    x = float(x)
    if not np.isfinite(x) or x < 0:
        raise InvalidInputError(f"{name} must be nonnegative and finite")
    return x


def kappa_mH_mfn(L_grad, Y: SampleSet):
    """Curvature constant of the minimum-Frobenius model: (L/4) m ||F^-1||_inf.

    ``F`` is the bordered system on normalized directions, so the value is
    invariant under scaling of the set.  Raises NotPoisedError when F is
    singular at the rank tolerance.
    """
    L = _nonnegative(L_grad, "L_grad")
    F = kkt_matrices(Y).F_unit
    s = np.linalg.svd(F, compute_uv=False)
    if s[-1] <= linalg.rank_tolerance(F) * s[0]:
        raise NotPoisedError("bordered system singular: set not poised")
    return 0.25 * L * Y.m * float(np.linalg.norm(np.linalg.inv(F), np.inf))


def kappa_mH_mn(kappa_g, kappa_eg_mfn, delta_bar, kappa_mH_mfn_value, Y: SampleSet | None = None):
    """Curvature constant of the minimum-norm model.

    ``delta_bar`` must dominate the set radius; asserted when Y is supplied.
    """
    kg = _nonnegative(kappa_g, "kappa_g")
    keg = _nonnegative(kappa_eg_mfn, "kappa_eg_mfn")
    db = _positive(delta_bar, "delta_bar")
    kmh = _nonnegative(kappa_mH_mfn_value, "kappa_mH_mfn_value")
    if Y is not None and db < Y.radius * (1.0 - 1e-12):
        raise InvalidInputError("delta_bar must be at least the sample-set radius")
    return float(np.hypot(kg + keg * db, kmh))


def kappa_mH_qs(L_grad, spec):
    """Curvature constant of a simplex-derivative model.

    Sums ``|coeff| * ||pinv(Sbar)|| * sqrt(sum_i q_i ||pinv(Tbar_i)||^2)`` over
    the Hessian terms, each frame normalized by its own radius.
    """
    L = _nonnegative(L_grad, "L_grad")
    total = 0.0
    for term in spec.hess_terms:
        pack = term.pack
        Sbar = pack.S / np.max(np.linalg.norm(pack.S, axis=0))
        inner = 0.0
        for T in pack.Ts:
            Tbar = T / np.max(np.linalg.norm(T, axis=0))
            inner += T.shape[1] * linalg.matrix_norm(linalg.pinv(Tbar), "spectral") ** 2
        total += abs(float(term.coeff)) * linalg.matrix_norm(linalg.pinv(Sbar), "spectral") * np.sqrt(inner)
    return L * total


def kappa_generic(L_grad, kappa_mH, Y: SampleSet):
    """Value/gradient constants shared by every interpolating model family.

    kappa_ef = (L + kappa_mH)/2 * (sqrt(n) ||pinv(Dbar)||_1 + 1)
    kappa_eg = 2 kappa_ef + 2 kappa_mH
    """
    L = _nonnegative(L_grad, "L_grad")
    kmh = _nonnegative(kappa_mH, "kappa_mH")
    pinv_norm = linalg.matrix_norm(linalg.pinv(Y.normalized()), "op1")
    kappa_ef = 0.5 * (L + kmh) * np.sqrt(Y.n) * pinv_norm + 0.5 * (L + kmh)
    kappa_eg = 2.0 * kappa_ef + 2.0 * kmh
    return BoundConstants(kappa_mH=kmh, kappa_ef=float(kappa_ef), kappa_eg=float(kappa_eg), family="generic")


def directional_bound_aligned(L_hess, delta):
    """Bound along a sampled direction of a plus-minus symmetric set: L Delta / 3."""
    return _nonnegative(L_hess, "L_hess") * _positive(delta, "delta") / 3.0


def directional_bound_cross(kappa_ef, L_hess, delta, norm_di, norm_dj):
    """Bound between two distinct sampled directions of a symmetric set."""
    kef = _nonnegative(kappa_ef, "kappa_ef")
    L = _nonnegative(L_hess, "L_hess")
    d = _positive(delta, "delta")
    ni = _positive(norm_di, "norm_di")
    nj = _positive(norm_dj, "norm_dj")
    return 4.0 * kef * d ** 2 / (ni * nj) + (2.0 * L / 3.0) * d ** 3 / (ni * nj)


def _coefficient_ratio(v):
    """(||v||_1^2 - ||v||_inf^2) / ||v||_2^2 for the expansion coefficients."""
    nrm2 = float(np.dot(v, v))
    if nrm2 == 0.0:
        raise InvalidInputError("direction expands to the zero coefficient vector")
    n1 = float(np.sum(np.abs(v)))
    ninf = float(np.max(np.abs(v)))
    return (n1 ** 2 - ninf ** 2) / nrm2


def _pinv_sq_and_radius(frame):
    radius = float(np.max(np.linalg.norm(frame, axis=0)))
    bar = frame / radius
    return linalg.matrix_norm(linalg.pinv(bar), "spectral") ** 2, radius


def directional_bound_general(kappa_ef, L_hess, Dhalf, d):
    """Interpolation-model bound along an arbitrary nonzero direction ``d``.

    ``Dhalf`` is the half frame of the symmetric set and must have full row
    rank so that every direction expands as ``d = Dhalf v``.
    """
    kef = _nonnegative(kappa_ef, "kappa_ef")
    L = _nonnegative(L_hess, "L_hess")
    D = linalg.as_matrix(Dhalf, "Dhalf")
    dvec = linalg.as_vector(d, "d")
    if linalg.numerical_rank(D) < D.shape[0]:
        raise DirectionDomainError("half frame must have full row rank")
    v = linalg.pinv(D) @ dvec
    ratio = _coefficient_ratio(v)
    pinv_sq, radius = _pinv_sq_and_radius(D)
    return 4.0 * ratio * kef * pinv_sq + (L / 3.0) * pinv_sq * (2.0 * ratio + 1.0) * radius


def hess_error_bound_global(kappa_ef, L_hess, Dhalf):
    """Worst case of :func:`directional_bound_general` over all directions.

    The coefficient ratio maximizes at ``p - 1/p`` (attained by the uniform
    expansion), giving a direction-free bound.
    """
    kef = _nonnegative(kappa_ef, "kappa_ef")
    L = _nonnegative(L_hess, "L_hess")
    D = linalg.as_matrix(Dhalf, "Dhalf")
    if linalg.numerical_rank(D) < D.shape[0]:
        raise DirectionDomainError("half frame must have full row rank")
    p = D.shape[1]
    ratio = p - 1.0 / p
    pinv_sq, radius = _pinv_sq_and_radius(D)
    return 4.0 * ratio * kef * pinv_sq + (L / 3.0) * pinv_sq * (2.0 * ratio + 1.0) * radius


def directional_bound_gsh_cross(hess_norm, L_hess, delta):
    """Centred simplex-Hessian bound between distinct directions."""
    return _nonnegative(hess_norm, "hess_norm") + _nonnegative(L_hess, "L_hess") * _positive(delta, "delta") / 3.0


def directional_bound_gsh_general(hess_norm, L_hess, S, d, rtol=1e-8):
    """Centred simplex-Hessian bound along ``d`` in the span of the frame."""
    hn = _nonnegative(hess_norm, "hess_norm")
    L = _nonnegative(L_hess, "L_hess")
    frame = linalg.as_matrix(S, "S")
    dvec = linalg.as_vector(d, "d")
    v = linalg.pinv(frame) @ dvec
    if np.linalg.norm(frame @ v - dvec) > rtol * np.linalg.norm(dvec):
        raise DirectionDomainError("direction lies outside the span of the frame")
    ratio = _coefficient_ratio(v)
    pinv_sq, radius = _pinv_sq_and_radius(frame)
    return ratio * hn * pinv_sq + (L / 3.0) * pinv_sq * (ratio + 1.0) * radius


def gsh_error_bound_global(hess_norm, L_hess, S):
    """Worst case of the centred simplex-Hessian bound over the frame's span."""
    hn = _nonnegative(hess_norm, "hess_norm")
    L = _nonnegative(L_hess, "L_hess")
    frame = linalg.as_matrix(S, "S")
    p = frame.shape[1]
    ratio = p - 1.0 / p
    pinv_sq, radius = _pinv_sq_and_radius(frame)
    return ratio * hn * pinv_sq + (L / 3.0) * pinv_sq * (ratio + 1.0) * radius


def ball_points(x0, delta, n_samples=DEFAULT_SAMPLES):
    """Deterministic low-discrepancy sample of the closed ball B(x0, delta).

    A scrambled Halton stream with a frozen seed feeds a normal-direction /
    power-radius map; the center is always included as the first row.
    """
    x0 = linalg.as_vector(x0, "x0")
    delta = _positive(delta, "delta")
    n = x0.size
    k = int(n_samples)
    if k < 1:
        raise InvalidInputError("n_samples must be at least 1")
    u = qmc.Halton(d=n + 1, scramble=True, seed=_HALTON_SEED).random(k)
    u = np.clip(u, 1e-12, 1.0 - 1e-12)
    z = ndtri(u[:, :n])
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0.0] = 1.0
    radii = delta * u[:, n] ** (1.0 / n)
    pts = x0[None, :] + (z / norms[:, None]) * radii[:, None]
    return np.vstack([x0[None, :], pts])


@dataclass(frozen=True)
class ErrorMeasurement:
    """Measured worst-case errors of one model against one function."""

    err_f: float
    err_g: float
    aligned: np.ndarray        # per sampled direction
    cross: np.ndarray          # (i, j) entries for i != j, nan on the diagonal

    @property
    def aligned_max(self):
        return float(np.max(self.aligned))

    @property
    def cross_max(self):
        if self.cross.shape[0] < 2:
            return float("nan")
        off = self.cross[~np.eye(self.cross.shape[0], dtype=bool)]
        return float(np.max(off))


def measure_errors(tf, model, Y: SampleSet, n_samples=DEFAULT_SAMPLES):
    """Sup-style error estimates over ``B(x0, Y.radius)`` plus the set's points.

    ``tf`` provides broadcastable ``f``/``grad`` and a pointwise ``hess``.
    Directional errors compare the model's stored curvature matrix against the
    true Hessian at the center, along and across the set's directions.
    """
    pts = np.vstack([ball_points(Y.x0, Y.radius, n_samples), Y.points()])
    err_f = float(np.max(np.abs(tf.f(pts) - model.value_many(pts))))
    err_g = float(np.max(np.linalg.norm(tf.grad(pts) - model.gradient_many(pts), axis=1)))

    H_gap = model.H - tf.hess(Y.x0)
    unit = Y.D / np.linalg.norm(Y.D, axis=0)
    table = np.abs(unit.T @ H_gap @ unit)
    aligned = np.diag(table).copy()
    cross = table.copy()
    np.fill_diagonal(cross, np.nan)
    return ErrorMeasurement(err_f=err_f, err_g=err_g, aligned=aligned, cross=cross)


def fit_slope(deltas, errors, f_scale=1.0):
    """Least-squares slope of log(error) against log(delta).

    Points at or below the roundoff floor ``1e3 * eps * f_scale`` are dropped;
    returns nan when fewer than two informative points remain.
    """
    d = np.asarray(deltas, dtype=float)
    e = np.asarray(errors, dtype=float)
    if d.shape != e.shape or d.ndim != 1:
        raise InvalidInputError("deltas and errors must be 1-d arrays of equal length")
    keep = (e > ROUNDOFF_FLOOR * max(float(f_scale), 1.0)) & (d > 0)
    if np.count_nonzero(keep) < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(d[keep]), np.log(e[keep]), 1)
    return float(slope)
