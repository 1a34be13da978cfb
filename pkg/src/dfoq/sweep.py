"""Radius-sweep harness: measure model errors against their bounds per delta.

A sweep fixes a test function, a direction frame, and a model family, then
rebuilds the model at each radius of a decreasing geometric grid.  Every row
reports measured errors next to the theoretical bounds computed from
Lipschitz data on that row's own ball (the tightest ball containing all
evaluation and measurement points, so each row's inequality is sound on its
own).  Cells whose bound theory does not apply to the requested family stay
blank rather than carrying a number that proves nothing.

Violation counting applies a roundoff floor per quantity: second differences
of O(1) function values carry irreducible eps*|f|/delta^2 noise, so errors
below the floor are treated as numerically zero.  CSV cells always keep the
raw measurements.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bounds, linalg, testbed
from .errors import InvalidInputError
from .models import build_qs, interpolation_check, qs_preset, solve_mfn, solve_mn
from .sample_sets import SampleSet, StructuredSet, poisedness
from .simplex import Oracle, delta_f

CSV_HEADER = (
    "delta,err_f,bound_f,err_g,bound_g,err_dir_aligned_max,"
    "bound_dir_aligned,err_dir_cross_max,bound_dir_cross,poised"
)

FLOOR_FACTOR = 1e3  # same constant the slope fitter uses for its noise floor


@dataclass(frozen=True)
class SweepConfig:
    """Inputs of one sweep; hashable and JSON-roundtrippable."""

    function: str
    set_spec: str
    model: str
    deltas: tuple
    x0: tuple | None = None
    samples: int = bounds.DEFAULT_SAMPLES
    seed: int | None = None
    jobs: int = 1
    tol: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        if self.x0 is not None:
            object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        if len(self.deltas) < 3:
            raise InvalidInputError("delta grid needs at least 3 values")
        if any(d <= 0 for d in self.deltas):
            raise InvalidInputError("deltas must be positive")
        if any(b >= a for a, b in zip(self.deltas, self.deltas[1:])):
            raise InvalidInputError("deltas must be strictly decreasing")
        if self.samples < 1:
            raise InvalidInputError("samples must be positive")
        if self.jobs < 1:
            raise InvalidInputError("jobs must be positive")

    def to_json_dict(self):
        return {
            "function": self.function,
            "set": self.set_spec,
            "model": self.model,
            "deltas": list(self.deltas),
            "x0": None if self.x0 is None else list(self.x0),
            "samples": self.samples,
            "seed": self.seed,
            "jobs": self.jobs,
            "tol": self.tol,
        }


@dataclass(frozen=True)
class SweepRow:
    """One grid radius; None marks a bound the theory does not supply here."""

    delta: float
    err_f: float
    bound_f: float | None
    err_g: float
    bound_g: float | None
    err_dir_aligned_max: float
    bound_dir_aligned: float | None
    err_dir_cross_max: float
    bound_dir_cross: float | None
    poised: bool


def parse_deltas(text):
    """Grid spec "start:factor:count" -> tuple of radii."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidInputError(f"bad delta grid {text!r}, want start:factor:count")
    try:
        start, factor, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise InvalidInputError(f"bad delta grid {text!r}: {exc}") from None
    if not 0 < factor < 1:
        raise InvalidInputError("grid factor must be in (0,1) for a decreasing grid")
    return tuple(start * factor ** k for k in range(count))


def resolve_frame(set_spec, n, fallback_seed=None):
    """Unit direction frame for a set spec.

    "structured:p" gives the first p coordinate directions, "random:p:seed"
    p uniform unit-sphere draws, "file:path" the stored set's directions
    rescaled to unit length.  The sweep multiplies the frame by each radius.
    """
    kind, _, rest = set_spec.partition(":")
    if kind == "structured":
        p = _parse_count(rest, set_spec)
        if p > n:
            raise InvalidInputError(f"structured:{p} exceeds dimension {n}")
        return np.eye(n)[:, :p]
    if kind == "random":
        bits = rest.split(":") if rest else []
        if len(bits) not in (1, 2):
            raise InvalidInputError(f"bad set spec {set_spec!r}, want random:p[:seed]")
        p = _parse_count(bits[0], set_spec)
        seed = int(bits[1]) if len(bits) == 2 else fallback_seed
        if seed is None:
            raise InvalidInputError("random set needs a seed (random:p:seed or --seed)")
        rng = np.random.default_rng(seed)
        U = rng.standard_normal((n, p))
        return U / np.linalg.norm(U, axis=0)
    if kind == "file":
        if not rest:
            raise InvalidInputError("file set spec needs a path: file:<path>")
        stored = SampleSet.load(rest)
        if stored.n != n:
            raise InvalidInputError(
                f"stored set is {stored.n}-dimensional, function wants {n}"
            )
        return stored.D / np.linalg.norm(stored.D, axis=0)
    raise InvalidInputError(f"unknown set spec {set_spec!r}")


def _parse_count(text, spec):
    try:
        p = int(text)
    except ValueError:
        raise InvalidInputError(f"bad direction count in {spec!r}") from None
    if p < 1:
        raise InvalidInputError("direction count must be positive")
    return p


def _fmt(value):
    if value is None:
        return ""
    return "%.17g" % value


def rows_to_csv(rows):
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in rows:
        cells = [
            _fmt(r.delta), _fmt(r.err_f), _fmt(r.bound_f), _fmt(r.err_g),
            _fmt(r.bound_g), _fmt(r.err_dir_aligned_max), _fmt(r.bound_dir_aligned),
            _fmt(r.err_dir_cross_max), _fmt(r.bound_dir_cross),
            "true" if r.poised else "false",
        ]
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def row_to_json_dict(r):
    return {
        "delta": r.delta,
        "err_f": r.err_f,
        "bound_f": r.bound_f,
        "err_g": r.err_g,
        "bound_g": r.bound_g,
        "err_dir_aligned_max": r.err_dir_aligned_max,
        "bound_dir_aligned": r.bound_dir_aligned,
        "err_dir_cross_max": r.err_dir_cross_max,
        "bound_dir_cross": r.bound_dir_cross,
        "poised": r.poised,
    }


def _worst_cross_pair(cross, bound_table):
    """(err, bound) of the pair with the largest err/bound ratio.

    Reporting the binding pair keeps the row's err<=bound comparison exact;
    on equal-norm frames every pair shares one bound so this reduces to the
    plain maximum error.
    """
    finite = np.isfinite(cross)
    if not finite.any():
        return 0.0, None
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(finite, cross / bound_table, -np.inf)
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return float(cross[i, j]), float(bound_table[i, j])


def _build_row(tf, frame, family, delta, samples, tol):
    st = StructuredSet(tf.x0, delta * frame)
    f = Oracle(tf.f)
    interp_violation = None

    if family in ("mn", "mfn"):
        Y = st.expand()
        model, _ = (solve_mn if family == "mn" else solve_mfn)(f, Y, tol=tol)
        meas_Y = Y
        report = poisedness(Y, delta_f(f, Y.x0, Y.D))
        poised = report.mfn_poised
    else:
        preset = family.split(":", 1)[1]
        spec = qs_preset(preset, st)
        model = build_qs(f, tf.x0, spec)
        meas_Y = SampleSet.from_points(tf.x0, spec.points(tf.x0))
        check = interpolation_check(model, f, meas_Y, tol=tol)
        poised = check.passed
        interp_violation = check.max_violation

    radius = meas_Y.radius
    if radius > tf.region_radius:
        raise InvalidInputError(
            f"radius {radius:g} leaves the region of {tf.name} "
            f"(limit {tf.region_radius:g})"
        )
    lip = tf.lipschitz_on(tf.x0, radius)

    bound_f = bound_g = bound_aligned = None
    cross_bound_table = None
    if family in ("mn", "mfn"):
        bound_aligned = bounds.directional_bound_aligned(lip.L_hess, radius)
        if poised:
            kmfn = bounds.kappa_mH_mfn(lip.L_grad, meas_Y)
            consts = bounds.kappa_generic(lip.L_grad, kmfn, meas_Y)
            if family == "mn":
                kmn = bounds.kappa_mH_mn(
                    lip.kappa_g, consts.kappa_eg, radius, kmfn, meas_Y
                )
                consts = bounds.kappa_generic(lip.L_grad, kmn, meas_Y)
            bound_f = consts.kappa_ef * radius ** 2
            bound_g = consts.kappa_eg * radius
            norms = np.linalg.norm(meas_Y.D, axis=0)
            cross_bound_table = np.array([
                [bounds.directional_bound_cross(
                    consts.kappa_ef, lip.L_hess, radius, norms[i], norms[j])
                 for j in range(meas_Y.m)]
                for i in range(meas_Y.m)
            ])
    else:
        preset = family.split(":", 1)[1]
        if poised:
            kqs = bounds.kappa_mH_qs(lip.L_grad, spec)
            consts = bounds.kappa_generic(lip.L_grad, kqs, meas_Y)
            bound_f = consts.kappa_ef * radius ** 2
            bound_g = consts.kappa_eg * radius
        if preset == "centred":
            # the centred preset's H is the structured-pack GSH, the one
            # case the directional theory covers among the presets
            hess_norm = linalg.matrix_norm(tf.hess(tf.x0), "spectral")
            bound_aligned = bounds.directional_bound_aligned(lip.L_hess, delta)
            cross_bound_table = np.full(
                (meas_Y.m, meas_Y.m),
                bounds.directional_bound_gsh_cross(hess_norm, lip.L_hess, delta),
            )

    meas = bounds.measure_errors(tf, model, meas_Y, n_samples=samples)
    if cross_bound_table is not None:
        err_cross, bound_cross = _worst_cross_pair(meas.cross, cross_bound_table)
    else:
        err_cross, bound_cross = meas.cross_max, None

    row = SweepRow(
        delta=radius,
        err_f=meas.err_f,
        bound_f=bound_f,
        err_g=meas.err_g,
        bound_g=bound_g,
        err_dir_aligned_max=meas.aligned_max,
        bound_dir_aligned=bound_aligned,
        err_dir_cross_max=err_cross,
        bound_dir_cross=bound_cross,
        poised=poised,
    )
    return row, interp_violation


def _noise_floors(tf, radius):
    scale = FLOOR_FACTOR * np.finfo(float).eps * (1.0 + abs(tf.f(tf.x0)))
    return scale, scale / radius, scale / radius ** 2


def count_violations(tf, rows):
    """Bound violations above the per-quantity roundoff floor."""
    hits = []
    for r in rows:
        floor_f, floor_g, floor_dir = _noise_floors(tf, r.delta)
        checks = (
            ("err_f", r.err_f, r.bound_f, floor_f),
            ("err_g", r.err_g, r.bound_g, floor_g),
            ("err_dir_aligned_max", r.err_dir_aligned_max, r.bound_dir_aligned, floor_dir),
            ("err_dir_cross_max", r.err_dir_cross_max, r.bound_dir_cross, floor_dir),
        )
        for name, err, bound, floor in checks:
            if bound is not None and err > max(bound, floor):
                hits.append({"delta": r.delta, "quantity": name,
                             "error": err, "bound": bound})
    return hits


def run_sweep(config: SweepConfig):
    """Execute a sweep; returns (rows, summary dict)."""
    dim = len(config.x0) if config.x0 is not None else None
    tf = testbed.get(config.function, dim=dim, x0=config.x0)
    for known in ("mn", "mfn"):
        if config.model == known:
            break
    else:
        if not config.model.startswith("qs:"):
            raise InvalidInputError(
                f"unknown model {config.model!r}, want mn, mfn, or qs:<preset>"
            )
    frame = resolve_frame(config.set_spec, tf.dim, fallback_seed=config.seed)

    def work(delta):
        return _build_row(tf, frame, config.model, delta, config.samples, config.tol)

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(work, config.deltas))
    else:
        results = [work(d) for d in config.deltas]
    rows = [r for r, _ in results]
    interp = [v for _, v in results if v is not None]

    deltas = [r.delta for r in rows]
    fscale = 1.0 + abs(tf.f(tf.x0))
    violations = count_violations(tf, rows)
    summary = {
        "config": config.to_json_dict(),
        "function": tf.name,
        "dim": tf.dim,
        "x0": tf.x0.tolist(),
        "slope_err_f": bounds.fit_slope(deltas, [r.err_f for r in rows], fscale),
        "slope_err_g": bounds.fit_slope(deltas, [r.err_g for r in rows], fscale),
        "slope_err_dir_aligned": bounds.fit_slope(
            deltas, [r.err_dir_aligned_max for r in rows], fscale
        ),
        "all_bounds_hold": not violations,
        "violations": violations,
        "rows_poised": sum(1 for r in rows if r.poised),
    }
    if interp:
        summary["max_interpolation_violation"] = max(interp)
    return rows, summary
