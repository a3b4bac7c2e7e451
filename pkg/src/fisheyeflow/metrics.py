"""Image-quality and protocol metrics: PSNR, SSIM, corner stratification, AVP.

Images are (H, W) or (H, W, C) arrays with intensities in [0, 1].
"""

from __future__ import annotations

from enum import Enum

import numpy as np
from scipy import ndimage

PSNR_SENTINEL = 99.0
_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03
_GRAY_WEIGHTS = (0.299, 0.587, 0.114)


class Bucket(Enum):
    LOW = "low"
    MID = "mid"
    HIGH = "high"


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs report 99.0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_SENTINEL
    return float(10.0 * np.log10(peak * peak / mse))


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size, dtype=float) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    pad = (kernel.size - 1) // 2
    out = ndimage.correlate1d(plane, kernel, axis=0, mode="reflect")
    out = ndimage.correlate1d(out, kernel, axis=1, mode="reflect")
    return out[pad:-pad, pad:-pad]


def _ssim_plane(a: np.ndarray, b: np.ndarray) -> float:
    kernel = _gaussian_window(_SSIM_WINDOW, _SSIM_SIGMA)
    c1 = _SSIM_K1 ** 2
    c2 = _SSIM_K2 ** 2
    mu_a = _filter_valid(a, kernel)
    mu_b = _filter_valid(b, kernel)
    var_a = _filter_valid(a * a, kernel) - mu_a * mu_a
    var_b = _filter_valid(b * b, kernel) - mu_b * mu_b
    cov = _filter_valid(a * b, kernel) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local SSIM, 11x11 Gaussian window (sigma 1.5) on a [0, 1] range.

    Windows are evaluated fully inside the image; channels are averaged.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.shape[0], a.shape[1]) < _SSIM_WINDOW:
        raise ValueError(f"images must be at least {_SSIM_WINDOW} px per side")
    if a.ndim == 2:
        return _ssim_plane(a, b)
    return float(np.mean([_ssim_plane(a[..., c], b[..., c]) for c in range(a.shape[-1])]))


def _to_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=float)
    if img.ndim == 2:
        return img
    if img.shape[-1] == 1:
        return img[..., 0]
    r, g, b = _GRAY_WEIGHTS
    return r * img[..., 0] + g * img[..., 1] + b * img[..., 2]


def harris_count(img: np.ndarray, k: float = 0.04, response_thresh: float = 0.01) -> int:
    """Number of Harris corners: local response maxima above a relative bar.

    3x3 Sobel gradients, 3x3 box-averaged structure tensor, response
    det(M) - k * trace(M)**2, 3x3 non-maximum suppression, threshold
    ``response_thresh`` times the peak response.
    """
    gray = _to_gray(img)
    ix = ndimage.sobel(gray, axis=1, mode="reflect")
    iy = ndimage.sobel(gray, axis=0, mode="reflect")
    sxx = ndimage.uniform_filter(ix * ix, size=3, mode="reflect")
    syy = ndimage.uniform_filter(iy * iy, size=3, mode="reflect")
    sxy = ndimage.uniform_filter(ix * iy, size=3, mode="reflect")
    response = sxx * syy - sxy * sxy - k * (sxx + syy) ** 2
    peak = float(response.max())
    if peak <= 0.0:
        return 0
    is_max = response == ndimage.maximum_filter(response, size=3, mode="reflect")
    return int(np.count_nonzero(is_max & (response > response_thresh * peak)))


def stratify(n: int) -> Bucket:
    """Scene-complexity bucket from a corner count (boundaries: 200, 400)."""
    if n < 0:
        raise ValueError("corner count must be >= 0")
    if n <= 200:
        return Bucket.LOW
    if n < 400:
        return Bucket.MID
    return Bucket.HIGH


def avp(psnr_db: float, model_size: float) -> float:
    """Average parameter performance: PSNR divided by model size."""
    if not (np.isfinite(model_size) and model_size > 0):
        raise ValueError("model_size must be positive")
    return float(psnr_db / model_size)


def flow_epe(pred: np.ndarray, gt: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Mean end-point error between two flow fields, optionally masked."""
    pred = np.asarray(pred, dtype=float)
    gt = np.asarray(gt, dtype=float)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {gt.shape}")
    err = np.hypot(pred[..., 0] - gt[..., 0], pred[..., 1] - gt[..., 1])
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != err.shape:
            raise ValueError(f"mask shape {mask.shape} != flow grid {err.shape}")
        if not mask.any():
            raise ValueError("mask selects no pixels")
        err = err[mask]
    return float(np.mean(err))


def image_record(
    image_id: str,
    pred: np.ndarray,
    gt: np.ndarray,
    count_corners_on: str = "gt",
    epe: float | None = None,
) -> dict:
    """Per-image evaluation record for the JSON report."""
    if count_corners_on not in ("gt", "pred"):
        raise ValueError("count_corners_on must be 'gt' or 'pred'")
    corners = harris_count(gt if count_corners_on == "gt" else pred)
    rec = {
        "id": image_id,
        "psnr": psnr(pred, gt),
        "ssim": ssim(pred, gt),
        "corner_count": corners,
        "bucket": stratify(corners).value,
    }
    if epe is not None:
        rec["epe"] = float(epe)
    return rec


def evaluation_report(records: list[dict]) -> dict:
    """Aggregate per-image records into the evaluation report object."""
    buckets = {}
    for bucket in Bucket:
        rows = [r for r in records if r["bucket"] == bucket.value]
        buckets[bucket.value] = {
            "count": len(rows),
            "mean_psnr": float(np.mean([r["psnr"] for r in rows])) if rows else None,
            "mean_ssim": float(np.mean([r["ssim"] for r in rows])) if rows else None,
        }
    report = {
        "images": records,
        "buckets": buckets,
        "mean_psnr": float(np.mean([r["psnr"] for r in records])) if records else None,
        "mean_ssim": float(np.mean([r["ssim"] for r in records])) if records else None,
    }
    return report
