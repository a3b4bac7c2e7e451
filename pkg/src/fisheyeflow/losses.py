"""Scalar loss functions for training and evaluating the correction network.

All norms are implemented as means over elements rather than sums, so the
default weighting constants stay scale-free across resolutions.  Gradient
helpers are provided for the terms the trainer backpropagates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .warp import downsample_avg

SCORE_EPS = 1e-7


@dataclass(frozen=True)
class LossWeights:
    """Weighting coefficients and toggles of the overall training loss."""

    lambda_r: float = 60.0
    lambda_m: float = 5.0
    lambda_s: float = 2500.0
    include_adv: bool = False
    include_enhanced: bool = False

    def __post_init__(self):
        for name in ("lambda_r", "lambda_m", "lambda_s"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0")


def _check_same_shape(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def l1_loss(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute difference over all elements."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_same_shape(a, b)
    return float(np.mean(np.abs(a - b)))


def l1_loss_grad(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """d l1_loss / d a; the subgradient at zero difference is fixed to 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_same_shape(a, b)
    return np.sign(a - b) / a.size


def multi_scale_l1(preds: list[np.ndarray], gt: np.ndarray) -> float:
    """Sum of per-level L1 losses against progressively downsampled gt.

    ``preds`` are ordered finest first; level i (1-based) must have side
    gt_side / 2**i.
    """
    gt = np.asarray(gt, dtype=float)
    total = 0.0
    ref = gt
    for i, pred in enumerate(preds, start=1):
        ref = downsample_avg(ref, 1)
        pred = np.asarray(pred, dtype=float)
        if pred.shape != ref.shape:
            raise ValueError(
                f"level {i} prediction has shape {pred.shape}, expected {ref.shape}"
            )
        total += l1_loss(pred, ref)
    return float(total)


def multi_scale_l1_grads(preds: list[np.ndarray], gt: np.ndarray) -> list[np.ndarray]:
    """Per-level gradients of :func:`multi_scale_l1` w.r.t. each prediction."""
    gt = np.asarray(gt, dtype=float)
    grads = []
    ref = gt
    for i, pred in enumerate(preds, start=1):
        ref = downsample_avg(ref, 1)
        grads.append(l1_loss_grad(np.asarray(pred, dtype=float), ref))
    return grads


@dataclass(frozen=True)
class AdversarialLoss:
    d_loss: float
    g_loss: float
    clamped: bool


def adversarial_loss(real_scores: np.ndarray, fake_scores: np.ndarray) -> AdversarialLoss:
    """Minimax GAN objective over post-sigmoid score tensors.

    d_loss = -mean(log real) - mean(log(1 - fake)); g_loss = -mean(log fake).
    Scores outside (0, 1) are clamped to [1e-7, 1 - 1e-7] and flagged.
    """
    real = np.asarray(real_scores, dtype=float)
    fake = np.asarray(fake_scores, dtype=float)
    clamped = bool(
        np.any(real <= 0) or np.any(real >= 1) or np.any(fake <= 0) or np.any(fake >= 1)
    )
    real = np.clip(real, SCORE_EPS, 1.0 - SCORE_EPS)
    fake = np.clip(fake, SCORE_EPS, 1.0 - SCORE_EPS)
    d_loss = float(-np.mean(np.log(real)) - np.mean(np.log(1.0 - fake)))
    g_loss = float(-np.mean(np.log(fake)))
    return AdversarialLoss(d_loss=d_loss, g_loss=g_loss, clamped=clamped)


def content_loss(fa: np.ndarray, fb: np.ndarray) -> float:
    """Normalized squared L2 distance between two feature tensors."""
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    _check_same_shape(fa, fb)
    return float(np.sum((fa - fb) ** 2) / fa.size)


def content_loss_grad(fa: np.ndarray, fb: np.ndarray) -> np.ndarray:
    """d content_loss / d fa."""
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    _check_same_shape(fa, fb)
    return 2.0 * (fa - fb) / fa.size


def gram(f: np.ndarray) -> np.ndarray:
    """Channel inner-product matrix, normalized by C*H*W.

    G[c, c'] = (1 / (C*H*W)) * sum_{h,w} f[h, w, c] * f[h, w, c'].
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 3:
        raise ValueError(f"feature tensor must be (H, W, C), got {f.shape}")
    flat = f.reshape(-1, f.shape[-1])
    return flat.T @ flat / f.size


def style_loss(fa: np.ndarray, fb: np.ndarray) -> float:
    """Squared Frobenius distance between the two Gram matrices."""
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    _check_same_shape(fa, fb)
    diff = gram(fa) - gram(fb)
    return float(np.sum(diff * diff))


def style_loss_grad(fa: np.ndarray, fb: np.ndarray) -> np.ndarray:
    """d style_loss / d fa = (4 / (C*H*W)) * fa @ (G(fa) - G(fb))."""
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    _check_same_shape(fa, fb)
    diff = gram(fa) - gram(fb)
    flat = fa.reshape(-1, fa.shape[-1])
    return (4.0 / fa.size) * (flat @ diff).reshape(fa.shape)


def enhanced_loss(
    content_terms: list[float],
    style_terms: list[float],
    lambda_s: float = 2500.0,
) -> float:
    """Content terms plus weighted style terms; empty lists contribute 0."""
    return float(sum(content_terms) + lambda_s * sum(style_terms))


def overall_loss(
    l_r: float,
    l_adv: float,
    l_m: float,
    l_e: float,
    weights: LossWeights = LossWeights(),
) -> float:
    """Weighted combination of the four training terms.

    lambda_r * l_r + l_adv + lambda_m * l_m + l_e, with the adversarial and
    enhanced contributions dropped when their toggles are off.
    """
    total = weights.lambda_r * l_r + weights.lambda_m * l_m
    if weights.include_adv:
        total += l_adv
    if weights.include_enhanced:
        total += l_e
    return float(total)
