"""Dense appearance flows derived from radial models.

A flow field is an (H, W, 2) array of per-pixel displacements (du, dv) in
pixels at that resolution, defined on the corrected grid and pointing into
the distorted image: sample source = target + displacement.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .camera import RadialModel, ModelKind, _invert_grid, frame_center

FLOW_MAGIC = b"PCNF"
DEFAULT_INVERT_TOL = 1e-9


class FlowGenerationError(RuntimeError):
    """Radius inversion failed while rendering a flow field."""


class FitError(RuntimeError):
    """Least-squares model fit could not be solved."""


def _grid_geometry(model: RadialModel, width: int, height: int):
    """Rescale the model to the target grid and return radial quantities."""
    scaled = model.rescaled(width)
    cx, cy = scaled.center
    norm = scaled.norm_radius
    dx = np.arange(width, dtype=float)[None, :] - cx
    dy = np.arange(height, dtype=float)[:, None] - cy
    dx, dy = np.broadcast_arrays(dx, dy)
    r_px = np.hypot(dx, dy)
    return scaled, dx, dy, r_px, norm


def gt_flow(model: RadialModel, width: int, height: int) -> np.ndarray:
    """Analytic ground-truth flow of a radial model on a width x height grid.

    Each corrected-grid pixel at normalized radius r_u is displaced radially
    to its distorted source at radius r_d = invert(r_u).  The identity model
    yields an exactly zero field.
    """
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be positive")
    scaled, dx, dy, r_px, norm = _grid_geometry(model, width, height)
    r_u = r_px / norm
    r_d, ok = _invert_grid(scaled, r_u, DEFAULT_INVERT_TOL)
    if not np.all(ok):
        v, u = np.argwhere(~ok)[0]
        raise FlowGenerationError(
            f"radius inversion failed at pixel (u={u}, v={v}), r_u={r_u[v, u]:.6g}"
        )
    # (r_d - r_u) == 0 exactly for the identity model, keeping the flow zero.
    with np.errstate(invalid="ignore"):
        t = np.where(r_px > 0.0, (r_d - r_u) * norm / np.where(r_px > 0.0, r_px, 1.0), 0.0)
    return np.stack([t * dx, t * dy], axis=-1)


def max_displacement(flow: np.ndarray) -> float:
    """Largest per-pixel displacement magnitude of a flow field."""
    if flow.ndim != 3 or flow.shape[-1] != 2:
        raise ValueError(f"flow must be (H, W, 2), got {flow.shape}")
    if flow.size == 0:
        return 0.0
    return float(np.hypot(flow[..., 0], flow[..., 1]).max())


def downsample_flow(flow: np.ndarray) -> np.ndarray:
    """Halve a flow's resolution: 2x2 mean pooling, then scale by 0.5.

    The 0.5 factor keeps displacements expressed in pixels of the coarser
    grid.  Both dimensions must be even.
    """
    if flow.ndim != 3 or flow.shape[-1] != 2:
        raise ValueError(f"flow must be (H, W, 2), got {flow.shape}")
    h, w = flow.shape[:2]
    if h % 2 or w % 2:
        raise ValueError(f"flow dims must be even, got {h}x{w}")
    pooled = flow.reshape(h // 2, 2, w // 2, 2, 2).mean(axis=(1, 3))
    return pooled * 0.5


def build_pyramid(model: RadialModel, base: int, levels: int) -> list[np.ndarray]:
    """Render a flow pyramid, finest first, halving the side per level.

    Each level is generated analytically at its own resolution rather than
    pooled from the finest one, so no pooling error compounds.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if base % (1 << (levels - 1)):
        raise ValueError(f"base {base} not divisible by 2**{levels - 1}")
    return [gt_flow(model, base >> i, base >> i) for i in range(levels)]


@dataclass(frozen=True)
class FitResult:
    model: RadialModel
    rms_residual: float
    n_points: int


def fit_model_to_flow(
    flow: np.ndarray,
    degree: int = 4,
    center: tuple[float, float] | None = None,
    norm_radius: float | None = None,
) -> FitResult:
    """Least-squares projection of a flow onto the polynomial radial family.

    Radial correspondences (r_d, r_u) are read off every informative pixel
    (the flow's radial component plus the pixel's own radius) and the
    coefficients of r_u = sum_i k_i r_d**(2i-1) are solved linearly.  The
    RMS residual is reported in normalized radius units.
    """
    if flow.ndim != 3 or flow.shape[-1] != 2:
        raise ValueError(f"flow must be (H, W, 2), got {flow.shape}")
    if not 1 <= degree <= 8:
        raise ValueError("degree must be in [1, 8]")
    h, w = flow.shape[:2]
    if center is None:
        center = ((w - 1) / 2.0, (h - 1) / 2.0)
    if norm_radius is None:
        norm_radius = w / 2.0

    dx = np.arange(w, dtype=float)[None, :] - center[0]
    dy = np.arange(h, dtype=float)[:, None] - center[1]
    dx, dy = np.broadcast_arrays(dx, dy)
    r_px = np.hypot(dx, dy)
    keep = r_px >= 1.0  # pixels too close to the center carry no radial signal
    if int(keep.sum()) < degree:
        raise FitError(f"need at least {degree} radially-informative pixels")

    radial = (flow[..., 0] * dx + flow[..., 1] * dy)[keep] / r_px[keep]
    r_u = r_px[keep] / norm_radius
    r_d = r_u + radial / norm_radius

    cols = [r_d ** (2 * i + 1) for i in range(degree)]
    a = np.stack(cols, axis=1)
    coeffs, _, rank, _ = np.linalg.lstsq(a, r_u, rcond=None)
    if rank < degree:
        raise FitError(f"rank-deficient fit (rank {rank} < degree {degree})")
    rms = float(np.sqrt(np.mean((a @ coeffs - r_u) ** 2)))
    model = RadialModel(ModelKind.POLYNOMIAL, tuple(coeffs), center, norm_radius)
    return FitResult(model=model, rms_residual=rms, n_points=int(keep.sum()))


def write_flow(path, flow: np.ndarray) -> None:
    """Serialize a flow field: b"PCNF", u32 width, u32 height, f32 pairs."""
    if flow.ndim != 3 or flow.shape[-1] != 2:
        raise ValueError(f"flow must be (H, W, 2), got {flow.shape}")
    h, w = flow.shape[:2]
    data = np.ascontiguousarray(flow, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(FLOW_MAGIC)
        fh.write(struct.pack("<II", w, h))
        fh.write(data.tobytes())


def read_flow(path) -> np.ndarray:
    """Read a flow file written by :func:`write_flow` (values exactly f32)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != FLOW_MAGIC:
        raise ValueError(f"{path}: bad magic {blob[:4]!r}")
    w, h = struct.unpack_from("<II", blob, 4)
    expected = 12 + 8 * w * h
    if len(blob) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, got {len(blob)}")
    data = np.frombuffer(blob, dtype="<f4", offset=12)
    return data.reshape(h, w, 2).astype(float)
