"""Bilinear spatial transformation of images and feature maps by a flow field.

Convention: pixel (u, v) sits at continuous coordinate (u, v); a flow field
stores per-pixel displacements (du, dv) and the warp samples the input at
(u + du, v + dv).  Sub-pixel cells are chosen as x0 = ceil(x) - 1, so an
exact integer coordinate reproduces the input value bit-for-bit while its
sub-gradient uses the left/top cell.
"""

from __future__ import annotations

import numpy as np

BORDER_ZEROS = "zeros"
BORDER_CLAMP = "clamp"


def _check_pair(image: np.ndarray, flow: np.ndarray):
    if flow.ndim != 3 or flow.shape[-1] != 2:
        raise ValueError(f"flow must be (H, W, 2), got {flow.shape}")
    if image.ndim not in (2, 3):
        raise ValueError(f"image must be (H, W) or (H, W, C), got {image.shape}")
    if image.shape[:2] != flow.shape[:2]:
        raise ValueError(f"shape mismatch: image {image.shape} vs flow {flow.shape}")


def _sample_coords(flow: np.ndarray, border: str):
    h, w = flow.shape[:2]
    x = np.arange(w, dtype=float)[None, :] + flow[..., 0]
    y = np.arange(h, dtype=float)[:, None] + flow[..., 1]
    if border == BORDER_CLAMP:
        xs = np.clip(x, 0.0, w - 1.0)
        ys = np.clip(y, 0.0, h - 1.0)
    elif border == BORDER_ZEROS:
        xs, ys = x, y
    else:
        raise ValueError(f"unknown border mode {border!r}")
    # Left/top cell: x0 = ceil(x) - 1 puts integer coordinates at weight 1
    # on their own pixel while anchoring the cell to the left.
    x0 = np.ceil(xs) - 1.0
    y0 = np.ceil(ys) - 1.0
    return x, y, xs, ys, x0.astype(np.int64), y0.astype(np.int64), xs - x0, ys - y0


def _gather(image: np.ndarray, ix: np.ndarray, iy: np.ndarray, border: str):
    h, w = image.shape[:2]
    if border == BORDER_ZEROS:
        valid = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
        vals = image[np.clip(iy, 0, h - 1), np.clip(ix, 0, w - 1)]
        mask = valid if image.ndim == 2 else valid[..., None]
        return np.where(mask, vals, 0.0)
    return image[np.clip(iy, 0, h - 1), np.clip(ix, 0, w - 1)]


def warp_bilinear(image: np.ndarray, flow: np.ndarray, border: str = BORDER_ZEROS) -> np.ndarray:
    """Sample ``image`` at positions displaced by ``flow``.

    out(u, v) = image(u + du, v + dv) with bilinear interpolation.
    Out-of-bounds samples read zero (``zeros``) or the clamped edge value
    (``clamp``).  A zero flow is an exact identity.
    """
    image = np.asarray(image, dtype=float)
    flow = np.asarray(flow, dtype=float)
    _check_pair(image, flow)
    _, _, _, _, x0, y0, wx, wy = _sample_coords(flow, border)

    g00 = _gather(image, x0, y0, border)
    g10 = _gather(image, x0 + 1, y0, border)
    g01 = _gather(image, x0, y0 + 1, border)
    g11 = _gather(image, x0 + 1, y0 + 1, border)

    if image.ndim == 3:
        wx = wx[..., None]
        wy = wy[..., None]
    return (
        (1.0 - wx) * (1.0 - wy) * g00
        + wx * (1.0 - wy) * g10
        + (1.0 - wx) * wy * g01
        + wx * wy * g11
    )


def warp_backward(
    image: np.ndarray,
    flow: np.ndarray,
    grad_output: np.ndarray,
    border: str = BORDER_ZEROS,
):
    """Exact gradients of :func:`warp_bilinear` w.r.t. image and flow.

    Returns (grad_image, grad_flow).  grad_flow at a pixel is the product of
    the local bilinear intensity gradient with grad_output, summed over
    channels; with ``clamp`` borders, saturated coordinates get zero flow
    gradient.
    """
    image = np.asarray(image, dtype=float)
    flow = np.asarray(flow, dtype=float)
    grad_output = np.asarray(grad_output, dtype=float)
    _check_pair(image, flow)
    if grad_output.shape != image.shape:
        raise ValueError(
            f"grad_output shape {grad_output.shape} != image shape {image.shape}"
        )
    h, w = image.shape[:2]
    x, y, _, _, x0, y0, wx, wy = _sample_coords(flow, border)

    g00 = _gather(image, x0, y0, border)
    g10 = _gather(image, x0 + 1, y0, border)
    g01 = _gather(image, x0, y0 + 1, border)
    g11 = _gather(image, x0 + 1, y0 + 1, border)

    wxc = wx[..., None] if image.ndim == 3 else wx
    wyc = wy[..., None] if image.ndim == 3 else wy

    # d(out)/dx and d(out)/dy within the active cell.
    dx = (1.0 - wyc) * (g10 - g00) + wyc * (g11 - g01)
    dy = (1.0 - wxc) * (g01 - g00) + wxc * (g11 - g10)
    if image.ndim == 3:
        gx = np.sum(grad_output * dx, axis=-1)
        gy = np.sum(grad_output * dy, axis=-1)
    else:
        gx = grad_output * dx
        gy = grad_output * dy
    if border == BORDER_CLAMP:
        gx = np.where((x < 0.0) | (x > w - 1.0), 0.0, gx)
        gy = np.where((y < 0.0) | (y > h - 1.0), 0.0, gy)
    grad_flow = np.stack([gx, gy], axis=-1)

    grad_image = np.zeros_like(image)
    corners = (
        (x0, y0, (1.0 - wxc) * (1.0 - wyc)),
        (x0 + 1, y0, wxc * (1.0 - wyc)),
        (x0, y0 + 1, (1.0 - wxc) * wyc),
        (x0 + 1, y0 + 1, wxc * wyc),
    )
    for ix, iy, weight in corners:
        if border == BORDER_CLAMP:
            cx = np.clip(ix, 0, w - 1)
            cy = np.clip(iy, 0, h - 1)
            np.add.at(grad_image, (cy, cx), weight * grad_output)
        else:
            valid = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
            contrib = weight * grad_output
            np.add.at(
                grad_image,
                (iy[valid], ix[valid]),
                contrib[valid] if image.ndim == 2 else contrib[valid, :],
            )
    return grad_image, grad_flow


def pool2x2(x: np.ndarray) -> np.ndarray:
    """One 2x2 mean-pooling step over the spatial axes.

    Spatial axes are the last two for rank-2 arrays and the two before the
    channel axis otherwise, so (H, W), (H, W, C) and (N, H, W, C) all work.
    """
    ax = x.ndim - 2 if x.ndim == 2 else x.ndim - 3
    h, w = x.shape[ax], x.shape[ax + 1]
    if h % 2 or w % 2:
        raise ValueError(f"spatial dims must be even, got {h}x{w}")
    shape = x.shape[:ax] + (h // 2, 2, w // 2, 2) + x.shape[ax + 2:]
    return x.reshape(shape).mean(axis=(ax + 1, ax + 3))


def downsample_avg(image: np.ndarray, levels: int = 1) -> np.ndarray:
    """Repeated 2x2 mean pooling, ``levels`` times.

    Implements the pyramid operator S(x, n): the input shrinks to 1/2**n of
    its original side.  Dimensions must be divisible by 2**levels.
    """
    if levels < 0:
        raise ValueError("levels must be >= 0")
    out = np.asarray(image, dtype=float)
    for _ in range(levels):
        out = pool2x2(out)
    return out
