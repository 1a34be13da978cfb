"""Quadratic model solvers: minimum-norm, minimum-Frobenius-norm, and
simplex-derivative compositions.

Both interpolation solvers reduce to small dense linear systems through the
stationarity structure of their objectives: multipliers weight the rank-one
matrices ``d^i d^iT``, so the Hessian never appears as an unknown.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import InfeasibleError, InvalidInputError
from .sample_sets import SampleSet, kkt_matrices
from .simplex import DirectionPack, as_oracle, delta_f, gsg, gsh, shifted_frame

__all__ = [
    "QuadraticModel",
    "SolveDiagnostics",
    "InterpolationReport",
    "GradTerm",
    "HessTerm",
    "QSSpec",
    "solve_mn",
    "solve_mfn",
    "build_qs",
    "interpolation_check",
    "qs_preset",
    "QS_PRESETS",
]

_SYM_RTOL = 1e-10


@dataclass(frozen=True)
class QuadraticModel:
    """``m(x) = c + g.(x - x0) + 0.5 (x - x0).H.(x - x0)``.

    ``symmetric`` is computed, not supplied: true when ``||H - H^T||_F``
    is within 1e-10 relative of zero.
    """

    x0: np.ndarray
    c: float
    g: np.ndarray
    H: np.ndarray
    symmetric: bool = field(init=False)

    def __post_init__(self):
        x0 = linalg.as_vector(self.x0, "x0")
        g = linalg.as_vector(self.g, "g")
        H = linalg.as_matrix(self.H, "H")
        if g.size != x0.size or H.shape != (x0.size, x0.size):
            raise InvalidInputError("model pieces disagree on dimension")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "H", H)
        skew = np.linalg.norm(H - H.T, "fro")
        object.__setattr__(self, "symmetric", bool(skew <= _SYM_RTOL * (1.0 + np.linalg.norm(H, "fro"))))

    @property
    def n(self):
        return self.x0.size

    def value(self, x):
        d = np.asarray(x, dtype=float) - self.x0
        return float(self.c + d @ self.g + 0.5 * d @ self.H @ d)

    def value_many(self, X):
        """Model values at the rows of ``X``."""
        Dm = np.asarray(X, dtype=float) - self.x0[None, :]
        return self.c + Dm @ self.g + 0.5 * np.einsum("ki,ij,kj->k", Dm, self.H, Dm)

    def gradient(self, x):
        d = np.asarray(x, dtype=float) - self.x0
        return self.g + 0.5 * (self.H + self.H.T) @ d

    def gradient_many(self, X):
        Dm = np.asarray(X, dtype=float) - self.x0[None, :]
        return self.g[None, :] + Dm @ (0.5 * (self.H + self.H.T)).T

    def hessian(self):
        """Effective (symmetrized) second-derivative matrix of the model."""
        return 0.5 * (self.H + self.H.T)

    def to_json_dict(self):
        return {
            "x0": self.x0.tolist(),
            "c": self.c,
            "g": self.g.tolist(),
            "H": self.H.tolist(),
            "symmetric": self.symmetric,
        }


@dataclass(frozen=True)
class SolveDiagnostics:
    """Solver byproducts.

    ``kkt_residual`` is the consistency residual of the stationarity system
    (component of the data outside the system's range), ``feasibility_residual``
    the worst interpolation miss of the returned model on the sample points.
    """

    multipliers: np.ndarray
    kkt_residual: float
    feasibility_residual: float
    alpha_unique: bool
    hessian_unique: bool

    def to_json_dict(self):
        return {
            "multipliers": np.asarray(self.multipliers).tolist(),
            "kkt_residual": self.kkt_residual,
            "feasibility_residual": self.feasibility_residual,
            "alpha_unique": self.alpha_unique,
            "hessian_unique": self.hessian_unique,
        }


class InterpolationReport(NamedTuple):
    max_violation: float
    passed: bool


def _feasibility_tol(tol, delta):
    base = linalg.DEFAULT_RESIDUAL_TOL if tol is None else float(tol)
    return base * (1.0 + float(np.linalg.norm(delta)))


def _hessian_from_multipliers(D, lam):
    H = 0.5 * (D * lam) @ D.T
    return 0.5 * (H + H.T)  # kill roundoff skew; exact value is symmetric


def _interp_residual(model, f, Y):
    pts = Y.points()
    fvals = np.array([f(p) for p in pts])
    worst = float(np.max(np.abs(model.value_many(pts) - fvals)))
    return max(worst, abs(model.c - f(Y.x0)))


def solve_mn(f, Y: SampleSet, tol=None):
    """Quadratic minimizing ``||g||^2 + ||H||_F^2`` among interpolants of f on Y.

    Returns ``(QuadraticModel, SolveDiagnostics)``.  Raises
    :class:`InfeasibleError` when no quadratic interpolates the data.
    """
    f = as_oracle(f)
    delta = delta_f(f, Y.x0, Y.D)
    r = Y.radius
    Dbar = Y.normalized()
    gram = Dbar.T @ Dbar
    P = 0.25 * gram ** 2
    # The multiplier matrix D'D + (1/4)(D'D)^o2 carries gradient content at
    # radius^2 and curvature content at radius^4, so solving it head-on loses
    # accuracy like radius^-2.  Split along an eigenbasis of the normalized
    # Gram matrix and rescale each block to O(1).  The basis change is
    # orthogonal, so the minimum-norm multiplier is preserved, and feasibility
    # is decided by the part of the data outside the system's range (the
    # recomputed solve residual would inflate with the condition number).
    w, V = np.linalg.eigh(gram)
    hi = w > linalg.rank_tolerance(gram) * max(float(w[-1]), 0.0)
    Vr, Vp = V[:, hi], V[:, ~hi]
    M = np.block([
        [np.diag(w[hi]) + r ** 2 * (Vr.T @ P @ Vr), r ** 2 * (Vr.T @ P @ Vp)],
        [Vp.T @ P @ Vr, np.diag(w[~hi]) / r ** 2 + Vp.T @ P @ Vp],
    ])
    rhs = np.concatenate([Vr.T @ delta / r ** 2, Vp.T @ delta / r ** 4])
    kkt_residual = linalg.range_residual(M, rhs)
    if kkt_residual > _feasibility_tol(tol, rhs):
        raise InfeasibleError(
            f"no interpolating quadratic: multiplier system residual {kkt_residual:.3e}"
        )
    z, _ = linalg.solve_min_norm(M, rhs)
    lam = Vr @ z[: Vr.shape[1]] + Vp @ z[Vr.shape[1]:]
    model = QuadraticModel(Y.x0, f(Y.x0), Y.D @ lam, _hessian_from_multipliers(Y.D, lam))
    diag = SolveDiagnostics(
        multipliers=lam,
        kkt_residual=float(kkt_residual),
        feasibility_residual=_interp_residual(model, f, Y),
        alpha_unique=True,
        hessian_unique=True,
    )
    return model, diag


def solve_mfn(f, Y: SampleSet, tol=None):
    """Quadratic minimizing ``||H||_F^2`` among interpolants of f on Y.

    The gradient is unique only when the bordered system is invertible; the
    returned gradient is always the minimum-norm representative and
    ``alpha_unique`` records the distinction.
    """
    f = as_oracle(f)
    delta = delta_f(f, Y.x0, Y.D)
    km = kkt_matrices(Y)
    rhs = np.concatenate([delta, np.zeros(Y.n)])
    # The raw bordered system mixes radius^4 and radius^1 blocks, so its
    # conditioning degrades like radius^-3.  The problem is scale-equivariant:
    # solve on unit-normalized directions (condition independent of radius)
    # and map the solution back.
    kkt_residual = linalg.range_residual(km.F_unit, rhs)
    if kkt_residual > _feasibility_tol(tol, delta):
        raise InfeasibleError(
            f"no interpolating quadratic: bordered system residual {kkt_residual:.3e}"
        )
    z, _ = linalg.solve_min_norm(km.F_unit, rhs)
    r = Y.radius
    lam, alpha = z[: Y.m] / r ** 4, z[Y.m:] / r
    s = np.linalg.svd(km.F_scaled, compute_uv=False)
    poised = bool(s[-1] > linalg.rank_tolerance(km.F_scaled) * s[0])
    model = QuadraticModel(Y.x0, f(Y.x0), alpha, _hessian_from_multipliers(Y.D, lam))
    diag = SolveDiagnostics(
        multipliers=lam,
        kkt_residual=float(kkt_residual),
        feasibility_residual=_interp_residual(model, f, Y),
        alpha_unique=poised,
        hessian_unique=True,
    )
    return model, diag


def interpolation_check(model: QuadraticModel, f, Y: SampleSet, tol=None):
    """Largest |model - f| over the points of Y (center included)."""
    f = as_oracle(f)
    if np.linalg.norm(model.x0 - Y.x0) > 0:
        raise InvalidInputError("model and sample set have different centers")
    pts = np.vstack([Y.x0[None, :], Y.points()])
    fvals = np.array([f(p) for p in pts])
    worst = float(np.max(np.abs(model.value_many(pts) - fvals)))
    scale = 1.0 + float(np.max(np.abs(fvals)))
    base = linalg.DEFAULT_RESIDUAL_TOL if tol is None else float(tol)
    return InterpolationReport(worst, bool(worst <= base * scale))


@dataclass(frozen=True)
class GradTerm:
    """One gradient contribution: ``coeff * gsg(f, base, scale * S)``."""

    coeff: float
    base: np.ndarray
    S: np.ndarray
    scale: float = 1.0


@dataclass(frozen=True)
class HessTerm:
    """One Hessian contribution: ``coeff * gsh(f, x0, pack)``."""

    coeff: float
    pack: DirectionPack


@dataclass(frozen=True)
class QSSpec:
    """Recipe for a model whose g and H are simplex-derivative combinations."""

    grad_terms: tuple
    hess_terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "grad_terms", tuple(self.grad_terms))
        object.__setattr__(self, "hess_terms", tuple(self.hess_terms))
        if not self.grad_terms or not self.hess_terms:
            raise InvalidInputError("a QS spec needs at least one gradient and one Hessian term")

    def points(self, x0):
        """Every evaluation point the recipe touches (rows)."""
        x0 = linalg.as_vector(x0, "x0")
        pts = [x0]
        for term in self.grad_terms:
            base = linalg.as_vector(term.base, "base")
            frame = float(term.scale) * linalg.as_matrix(term.S, "S")
            pts.append(base)
            for i in range(frame.shape[1]):
                pts.append(base + frame[:, i])
        chunks = [np.asarray(pts)]
        for term in self.hess_terms:
            chunks.append(term.pack.points(x0))
        return np.unique(np.vstack(chunks), axis=0)

    def audit_points(self, x0, Y: SampleSet, rtol=1e-10):
        """Report whether every point used lies in ``Y ∪ {x0}`` (not enforced)."""
        used = self.points(x0)
        allowed = np.vstack([np.asarray(Y.x0)[None, :], Y.points()])
        scale = max(1.0, float(np.max(np.abs(allowed))))
        ok = all(
            np.min(np.linalg.norm(allowed - u[None, :], axis=1)) <= rtol * scale for u in used
        )
        return used, bool(ok)


def build_qs(f, x0, spec: QSSpec):
    """Assemble the quadratic whose g and H follow the recipe in ``spec``."""
    f = as_oracle(f)
    x0 = linalg.as_vector(x0, "x0")
    g = np.zeros(x0.size)
    for term in spec.grad_terms:
        frame = float(term.scale) * linalg.as_matrix(term.S, "S")
        g = g + float(term.coeff) * gsg(f, term.base, frame)
    H = np.zeros((x0.size, x0.size))
    for term in spec.hess_terms:
        H = H + float(term.coeff) * gsh(f, x0, term.pack)
    return QuadraticModel(x0, f(x0), g, H)


def qs_preset(name, structured):
    """Named recipes on a structured set: centred | forward | adapted-<ell>."""
    S = structured.Dhalf
    x0 = structured.x0
    if name == "centred":
        grads = (GradTerm(0.5, x0, S, 1.0), GradTerm(0.5, x0, -S, 1.0))
        return QSSpec(grads, (HessTerm(1.0, structured.as_gsh_pack()),))
    if name == "forward":
        return QSSpec(
            (GradTerm(1.0, x0, S, 1.0),),
            (HessTerm(1.0, DirectionPack.shared(S, S)),),
        )
    if name.startswith("adapted-"):
        try:
            ell = int(name.split("-", 1)[1])
        except ValueError:
            raise InvalidInputError(f"bad preset name {name!r}")
        if not (0 <= ell <= S.shape[1]):
            raise InvalidInputError(f"adapted preset index out of range: {ell}")
        if ell == 0:
            grads = (GradTerm(2.0, x0, S, 1.0), GradTerm(-1.0, x0, S, 2.0))
        else:
            base = x0 - S[:, ell - 1]
            grads = (
                GradTerm(1.0, x0, S, 1.0),
                GradTerm(1.0, base, S, 1.0),
                GradTerm(-1.0, base, S, 2.0),
            )
        pack = DirectionPack.shared(S, shifted_frame(S, ell))
        return QSSpec(grads, (HessTerm(1.0, pack),))
    raise InvalidInputError(f"unknown QS preset {name!r}")


QS_PRESETS = ("centred", "forward", "adapted-<ell>")
