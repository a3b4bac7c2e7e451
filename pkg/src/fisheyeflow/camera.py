"""Parametric radial distortion models.

A radial model maps the distorted radius r_d (distance from the distortion
center in a fisheye image) to the undistorted radius r_u (distance in the
perspective image).  Two families are supported:

* polynomial:  r_u = sum_i k_i * r_d**(2i - 1)
* division:    r_u = r_d / (1 + sum_i k_i * r_d**(2i - 1))

Radii are normalized: pixel distances are divided by ``norm_radius`` (half
the working image width by convention), which keeps coefficients O(1) and
resolution independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

MAX_COEFFS = 8
MONOTONE_SAMPLES = 1024
DIVISION_EPS = 1e-12
_BISECT_WIDTH = 1e-6
_NEWTON_STEPS = 20
_BRACKET_LIMIT = 1e9


class ModelKind(Enum):
    POLYNOMIAL = "polynomial"
    DIVISION = "division"


class SingularityError(ValueError):
    """Division-model denominator collapsed to (near) zero."""


class InversionError(ValueError):
    """The requested undistorted radius is not attainable by the model."""


class SamplingError(RuntimeError):
    """Rejection sampling exhausted its attempt budget."""


def frame_center(size: int) -> tuple[float, float]:
    """Geometric center of a size x size pixel grid (pixel-center coords)."""
    return ((size - 1) / 2.0, (size - 1) / 2.0)


@dataclass(frozen=True)
class RadialModel:
    """Radial mapping between distorted and undistorted radius.

    ``coeffs`` are dimensionless and act on the normalized radius.
    ``center`` (pixels) and ``norm_radius`` (pixels) anchor the model to a
    reference pixel frame; rendering code rescales both when the model is
    evaluated on a grid of a different size.
    """

    kind: ModelKind
    coeffs: tuple[float, ...]
    center: tuple[float, float] = (127.5, 127.5)
    norm_radius: float = 128.0

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("coeffs must be non-empty")
        if len(self.coeffs) > MAX_COEFFS:
            raise ValueError(f"at most {MAX_COEFFS} coefficients supported")
        if not all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")
        if not (np.isfinite(self.norm_radius) and self.norm_radius > 0):
            raise ValueError("norm_radius must be positive and finite")
        object.__setattr__(self, "coeffs", tuple(float(k) for k in self.coeffs))
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        object.__setattr__(self, "norm_radius", float(self.norm_radius))

    @property
    def is_identity(self) -> bool:
        return (
            self.kind is ModelKind.POLYNOMIAL
            and self.coeffs[0] == 1.0
            and all(k == 0.0 for k in self.coeffs[1:])
        )

    def rescaled(self, size: int) -> "RadialModel":
        """Rebind the model to a size x size pixel frame.

        Continuous pixel coordinate x in a frame of width 2*norm_radius maps
        to (x + 0.5) * s - 0.5 in the target frame, with s the ratio of
        frame widths.  Coefficients are untouched (they live in normalized
        units).
        """
        s = (size / 2.0) / self.norm_radius
        cx = (self.center[0] + 0.5) * s - 0.5
        cy = (self.center[1] + 0.5) * s - 0.5
        return RadialModel(self.kind, self.coeffs, (cx, cy), size / 2.0)


def identity_model(size: int = 256, n_coeffs: int = 4) -> RadialModel:
    """Polynomial model with k = (1, 0, ..., 0): r_u == r_d."""
    coeffs = (1.0,) + (0.0,) * (n_coeffs - 1)
    return RadialModel(ModelKind.POLYNOMIAL, coeffs, frame_center(size), size / 2.0)


@dataclass(frozen=True)
class ParamRanges:
    """Closed per-coefficient sampling intervals for :func:`sample_model`."""

    intervals: tuple[tuple[float, float], ...]
    max_attempts: int = 1000

    def __post_init__(self):
        for lo, hi in self.intervals:
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ValueError(f"invalid interval [{lo}, {hi}]")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")


# Barrel-distorting, invertible defaults; a draw is rejected unless it is
# monotone over [0, sqrt(2)] and its forward map reaches the grid corner.
DEFAULT_RANGES = ParamRanges(
    intervals=((0.9, 1.1), (0.1, 0.6), (-0.05, 0.2), (-0.05, 0.1)),
)
DEFAULT_R_MAX = float(np.sqrt(2.0))


def _odd_poly(coeffs, r):
    """sum_i k_i * r**(2i-1), evaluated as r * horner(r**2)."""
    r2 = r * r
    acc = np.zeros_like(r)
    for k in reversed(coeffs):
        acc = acc * r2 + k
    return r * acc


def _odd_poly_derivative(coeffs, r):
    """d/dr of sum_i k_i * r**(2i-1) = sum_i (2i-1) k_i r**(2i-2)."""
    r2 = r * r
    acc = np.zeros_like(r)
    for i in range(len(coeffs) - 1, -1, -1):
        acc = acc * r2 + (2 * i + 1) * coeffs[i]
    return acc


def _check_radius(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)):
        raise ValueError("radius must be finite")
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    return r


def forward_radius(model: RadialModel, r_d):
    """Map distorted radius to undistorted radius (normalized units).

    Accepts scalars or arrays; returns the same shape.
    """
    r = _check_radius(r_d)
    if model.kind is ModelKind.POLYNOMIAL:
        out = _odd_poly(model.coeffs, r)
    else:
        den = 1.0 + _odd_poly(model.coeffs, r)
        if np.any(den <= DIVISION_EPS):
            raise SingularityError("division-model denominator <= 1e-12")
        out = r / den
    return float(out) if np.isscalar(r_d) or np.ndim(r_d) == 0 else out


def radius_derivative(model: RadialModel, r_d):
    """Analytic derivative d(r_u)/d(r_d)."""
    r = _check_radius(r_d)
    if model.kind is ModelKind.POLYNOMIAL:
        out = _odd_poly_derivative(model.coeffs, r)
    else:
        den = 1.0 + _odd_poly(model.coeffs, r)
        if np.any(den <= DIVISION_EPS):
            raise SingularityError("division-model denominator <= 1e-12")
        out = (den - r * _odd_poly_derivative(model.coeffs, r)) / (den * den)
    return float(out) if np.isscalar(r_d) or np.ndim(r_d) == 0 else out


def is_monotone(model: RadialModel, r_max: float) -> bool:
    """True iff the analytic derivative is positive on a dense grid [0, r_max]."""
    if not (np.isfinite(r_max) and r_max > 0):
        raise ValueError("r_max must be positive and finite")
    grid = np.linspace(0.0, r_max, MONOTONE_SAMPLES)
    if model.kind is ModelKind.DIVISION:
        den = 1.0 + _odd_poly(model.coeffs, grid)
        if np.any(den <= DIVISION_EPS):
            return False
    try:
        deriv = radius_derivative(model, grid)
    except SingularityError:
        return False
    return bool(np.all(deriv > 0.0))


def _forward_unsafe(model: RadialModel, r: np.ndarray) -> np.ndarray:
    """forward_radius without validation; a singular division denominator
    evaluates to +inf (the attainable supremum below the pole)."""
    if model.kind is ModelKind.POLYNOMIAL:
        return _odd_poly(model.coeffs, r)
    den = 1.0 + _odd_poly(model.coeffs, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > DIVISION_EPS, r / np.where(den > DIVISION_EPS, den, 1.0), np.inf)


def _deriv_unsafe(model: RadialModel, r: np.ndarray) -> np.ndarray:
    if model.kind is ModelKind.POLYNOMIAL:
        return _odd_poly_derivative(model.coeffs, r)
    den = 1.0 + _odd_poly(model.coeffs, r)
    safe = np.where(den > DIVISION_EPS, den, 1.0)
    out = (safe - r * _odd_poly_derivative(model.coeffs, r)) / (safe * safe)
    return np.where(den > DIVISION_EPS, out, np.inf)


def _invert_grid(model: RadialModel, r_u: np.ndarray, tol: float):
    """Vectorized inverse of forward_radius.

    Returns (r_d, ok) where ok flags elements whose residual met ``tol``.
    The identity model short-circuits so its inverse is bit-exact.
    """
    r_u = np.asarray(r_u, dtype=float)
    if model.is_identity:
        return r_u.copy(), np.ones(r_u.shape, dtype=bool)

    rd = np.zeros_like(r_u)
    ok = np.ones(r_u.shape, dtype=bool)
    pos = r_u > 0
    if not np.any(pos):
        return rd, ok
    target = r_u[pos]

    # Grow the bracket geometrically until the forward map clears the target.
    hi = np.maximum(target, 1e-3)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(48):
            short = (_forward_unsafe(model, hi) < target) & (hi < _BRACKET_LIMIT)
            if not np.any(short):
                break
            hi = np.where(short, hi * 2.0, hi)
        unresolved = _forward_unsafe(model, hi) < target
        if np.any(unresolved):
            # Growth overshot into a non-increasing tail: cap the bracket at
            # the top of the increasing branch (derivative sign change).
            lo_c = np.zeros_like(hi)
            hi_c = hi.copy()
            for _ in range(60):
                mid = 0.5 * (lo_c + hi_c)
                rising = _deriv_unsafe(model, mid) > 0.0
                lo_c = np.where(rising, mid, lo_c)
                hi_c = np.where(rising, hi_c, mid)
            rescue_ok = _forward_unsafe(model, lo_c) >= target
            hi = np.where(unresolved & rescue_ok, lo_c, hi)
        reachable = _forward_unsafe(model, hi) >= target

        # Bisection down to a narrow bracket.
        lo = np.zeros_like(hi)
        for _ in range(64):
            if np.max(hi - lo) <= _BISECT_WIDTH:
                break
            mid = 0.5 * (lo + hi)
            above = _forward_unsafe(model, mid) >= target
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)

        # Safeguarded Newton refinement inside the bracket.
        r = 0.5 * (lo + hi)
        for _ in range(_NEWTON_STEPS):
            f = _forward_unsafe(model, r) - target
            if np.all(np.abs(f) <= tol):
                break
            above = f >= 0
            hi = np.where(above, r, hi)
            lo = np.where(above, lo, r)
            d = _deriv_unsafe(model, r)
            step = np.where(np.abs(d) > 1e-300, f / d, np.inf)
            cand = r - step
            bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
            r = np.where(bad, 0.5 * (lo + hi), cand)

        converged = np.abs(_forward_unsafe(model, r) - target) <= tol
    rd[pos] = r
    ok[pos] = reachable & converged
    return rd, ok


def invert_radius(model: RadialModel, r_u, tol: float = 1e-9):
    """Solve forward_radius(model, r_d) == r_u for r_d >= 0.

    The root is isolated by bisection on a geometrically grown bracket and
    refined by safeguarded Newton steps.  The model must be monotone over
    the bracket; r_u == 0 maps to 0 exactly.
    """
    if not (np.isfinite(tol) and tol > 0):
        raise ValueError("tol must be positive")
    ru = _check_radius(r_u)
    rd, ok = _invert_grid(model, np.atleast_1d(ru), tol)
    if not np.all(ok):
        bad = np.atleast_1d(ru)[~ok]
        raise InversionError(
            f"failed to invert {bad.size} radius value(s), first r_u={bad.flat[0]!r}"
        )
    if np.isscalar(r_u) or np.ndim(r_u) == 0:
        return float(rd[0])
    return rd.reshape(np.shape(r_u))


def sample_model(
    rng,
    ranges: ParamRanges = DEFAULT_RANGES,
    r_max: float = DEFAULT_R_MAX,
    size: int = 256,
    kind: ModelKind = ModelKind.POLYNOMIAL,
) -> RadialModel:
    """Draw a random monotone model, rejecting unusable draws.

    A draw is kept when it is monotone over [0, r_max] and (for polynomial
    models) its forward map attains r_max, so every radius on a square grid
    can be inverted without leaving the validated domain.  ``rng`` is an int
    seed or a ``numpy.random.Generator``; results are deterministic per seed.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    center = frame_center(size)
    for _ in range(ranges.max_attempts):
        coeffs = tuple(rng.uniform(lo, hi) for lo, hi in ranges.intervals)
        model = RadialModel(kind, coeffs, center, size / 2.0)
        if not is_monotone(model, r_max):
            continue
        if kind is ModelKind.POLYNOMIAL and forward_radius(model, r_max) < r_max:
            continue
        return model
    raise SamplingError(
        f"no acceptable model within {ranges.max_attempts} attempts"
    )


def save_model(path, model: RadialModel) -> None:
    """Write the four-line UTF-8 model parameter file."""
    lines = [
        f"kind {model.kind.value}",
        "coeffs " + " ".join(f"{k:.17g}" for k in model.coeffs),
        f"center {model.center[0]:.17g} {model.center[1]:.17g}",
        f"norm_radius {model.norm_radius:.17g}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> RadialModel:
    """Parse a model parameter file written by :func:`save_model`."""
    with open(path, "r", encoding="utf-8") as fh:
        rows = [ln.split() for ln in fh.read().splitlines() if ln.strip()]
    fields = {row[0]: row[1:] for row in rows}
    try:
        kind = ModelKind(fields["kind"][0])
        coeffs = tuple(float(t) for t in fields["coeffs"])
        cx, cy = (float(t) for t in fields["center"])
        norm_radius = float(fields["norm_radius"][0])
    except (KeyError, IndexError, ValueError) as exc:
        raise ValueError(f"malformed model file {path}: {exc}") from exc
    return RadialModel(kind, coeffs, (cx, cy), norm_radius)
