"""Sample sets around a center point, and their poisedness diagnostics.

A sample set stores the center ``x0`` and the nonzero displacement directions
``D`` (one column per interpolation point ``x0 + d^i``).  A structured set
stores only the half frame of a plus-minus symmetric set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import InvalidInputError

__all__ = [
    "SampleSet",
    "StructuredSet",
    "PoisednessReport",
    "KKTMatrices",
    "kkt_matrices",
    "poisedness",
]

# Relative separation below which two directions count as duplicates.
_DUP_RTOL = 1e-12


def _validate_directions(D):
    if D.shape[1] < 1:
        raise InvalidInputError("a sample set needs at least one direction")
    norms = np.linalg.norm(D, axis=0)
    if np.any(norms == 0.0):
        raise InvalidInputError("zero direction in sample set")
    for i in range(D.shape[1]):
        for j in range(i + 1, D.shape[1]):
            gap = np.linalg.norm(D[:, i] - D[:, j])
            if gap <= _DUP_RTOL * max(norms[i], norms[j]):
                raise InvalidInputError(f"duplicate directions at columns {i} and {j}")


@dataclass(frozen=True)
class SampleSet:
    """Center ``x0`` and direction matrix ``D`` (n x m, one point per column)."""

    x0: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        x0 = linalg.as_vector(self.x0, "x0")
        D = linalg.as_matrix(self.D, "D")
        if D.shape[0] != x0.size:
            raise InvalidInputError(f"D has {D.shape[0]} rows but x0 has length {x0.size}")
        _validate_directions(D)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "D", D)

    @property
    def n(self):
        return self.x0.size

    @property
    def m(self):
        return self.D.shape[1]

    @property
    def radius(self):
        """Largest direction length (the set radius Delta)."""
        return float(np.max(np.linalg.norm(self.D, axis=0)))

    def normalized(self):
        """Directions divided by the set radius."""
        return self.D / self.radius

    def scale(self, t):
        """Same geometry with every direction multiplied by ``t > 0``."""
        t = float(t)
        if not (t > 0) or not np.isfinite(t):
            raise InvalidInputError("scale factor must be positive and finite")
        return SampleSet(self.x0, t * self.D)

    def points(self):
        """Interpolation points ``x0 + d^i`` as rows (m x n); excludes x0."""
        return self.x0[None, :] + self.D.T

    def to_json_dict(self):
        return {"x0": self.x0.tolist(), "directions": self.D.T.tolist()}

    @classmethod
    def from_points(cls, x0, points):
        """Set whose directions are ``point - x0`` with near-duplicates merged.

        Offsets indistinguishable at relative 1e-10 collapse to one direction
        and offsets of relative length below 1e-14 (the center) are dropped.
        """
        x0 = linalg.as_vector(x0, "x0")
        offsets = np.asarray(points, dtype=float) - x0[None, :]
        if offsets.ndim != 2 or offsets.shape[1] != x0.size:
            raise InvalidInputError("points must be rows of the same dimension as x0")
        scale = float(np.max(np.linalg.norm(offsets, axis=1), initial=0.0))
        if scale == 0.0:
            raise InvalidInputError("no nonzero offsets among the points")
        kept = []
        for off in offsets:
            if np.linalg.norm(off) <= 1e-14 * scale:
                continue
            if any(np.linalg.norm(off - k) <= 1e-10 * scale for k in kept):
                continue
            kept.append(off)
        return cls(x0, np.asarray(kept).T)

    @classmethod
    def from_json_dict(cls, doc):
        try:
            x0 = doc["x0"]
            directions = doc["directions"]
        except (KeyError, TypeError) as exc:
            raise InvalidInputError("sample set JSON needs 'x0' and 'directions'") from exc
        D = np.asarray(directions, dtype=float)
        if D.ndim != 2:
            raise InvalidInputError("'directions' must be a list of equal-length rows")
        return cls(np.asarray(x0, dtype=float), D.T)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class StructuredSet:
    """Half frame of a plus-minus symmetric set: points ``x0 +- d^i``."""

    x0: np.ndarray
    Dhalf: np.ndarray

    def __post_init__(self):
        x0 = linalg.as_vector(self.x0, "x0")
        Dhalf = linalg.as_matrix(self.Dhalf, "Dhalf")
        if Dhalf.shape[0] != x0.size:
            raise InvalidInputError("Dhalf row count must match len(x0)")
        _validate_directions(Dhalf)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "Dhalf", Dhalf)

    @property
    def n(self):
        return self.x0.size

    @property
    def p(self):
        return self.Dhalf.shape[1]

    @property
    def radius(self):
        return float(np.max(np.linalg.norm(self.Dhalf, axis=0)))

    def scale(self, t):
        t = float(t)
        if not (t > 0) or not np.isfinite(t):
            raise InvalidInputError("scale factor must be positive and finite")
        return StructuredSet(self.x0, t * self.Dhalf)

    def expand(self):
        """Full symmetric SampleSet with directions ``[Dhalf, -Dhalf]``."""
        return SampleSet(self.x0, np.hstack([self.Dhalf, -self.Dhalf]))

    def as_gsh_pack(self):
        """Direction pack ``(S, T_i = [-d^i])`` for the centred simplex Hessian."""
        from .simplex import DirectionPack

        Ts = [-self.Dhalf[:, i:i + 1].copy() for i in range(self.p)]
        return DirectionPack(self.Dhalf, tuple(Ts))


class KKTMatrices(NamedTuple):
    """Blocks of the minimum-Frobenius interpolation system.

    P        : m x m quadratic-term Gram block on normalized directions,
               P_ij = ((dbar^i . dbar^j)^2) / 4.
    F_scaled : (m+n) x (m+n) system matrix on raw directions,
               [[radius^4 * P, D^T], [D, 0]].
    F_unit   : same bordered matrix built from normalized directions.
    """

    P: np.ndarray
    F_scaled: np.ndarray
    F_unit: np.ndarray


def kkt_matrices(Y: SampleSet) -> KKTMatrices:
    """Build the quadratic Gram block and both bordered system matrices."""
    Dbar = Y.normalized()
    P = 0.25 * (Dbar.T @ Dbar) ** 2
    n, m = Y.n, Y.m

    def bordered(Dmat, Pblock):
        F = np.zeros((m + n, m + n))
        F[:m, :m] = Pblock
        F[:m, m:] = Dmat.T
        F[m:, :m] = Dmat
        return F

    F_unit = bordered(Dbar, P)
    F_scaled = bordered(Y.D, Y.radius ** 4 * P)
    return KKTMatrices(P, F_scaled, F_unit)


@dataclass(frozen=True)
class PoisednessReport:
    mn_feasible: bool
    mfn_poised: bool
    F_cond: float
    rank_D: int
    residual: float = field(default=0.0)


def poisedness(Y: SampleSet, fvals, tol=None) -> PoisednessReport:
    """Feasibility / poisedness diagnostics for the set with values ``fvals``.

    ``fvals`` are the shifted values ``f(x0 + d^i) - f(x0)``.
    """
    delta = linalg.as_vector(fvals, "fvals")
    if delta.size != Y.m:
        raise InvalidInputError("fvals length must equal the number of directions")

    # Consistency of the multiplier system, judged on radius-normalized
    # directions so the verdict does not degrade with the set radius.
    r = Y.radius
    gram = Y.normalized().T @ Y.normalized()
    rhs = delta / r ** 2
    residual = linalg.range_residual(gram + 0.25 * r ** 2 * gram ** 2, rhs)
    feas_tol = (linalg.DEFAULT_RESIDUAL_TOL if tol is None else float(tol)) * (
        1.0 + np.linalg.norm(rhs)
    )
    mn_feasible = residual <= feas_tol

    F_scaled = kkt_matrices(Y).F_scaled
    s = np.linalg.svd(F_scaled, compute_uv=False)
    mfn_poised = bool(s[-1] > linalg.rank_tolerance(F_scaled) * s[0])
    if mfn_poised:
        F_cond = float(
            np.linalg.norm(F_scaled, np.inf) * np.linalg.norm(np.linalg.inv(F_scaled), np.inf)
        )
    else:
        F_cond = float("inf")

    return PoisednessReport(
        mn_feasible=bool(mn_feasible),
        mfn_poised=mfn_poised,
        F_cond=F_cond,
        rank_D=linalg.numerical_rank(Y.D),
        residual=float(residual),
    )
