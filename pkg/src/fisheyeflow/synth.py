"""Synthetic fisheye dataset pipeline.

Perspective images are distorted into fisheye views by a backward warp of
the radial model; the untouched perspective image is the rectification
ground truth.  All arithmetic happens on float arrays in [0, 1];
quantization occurs only when PNG files are written.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from . import camera
from .camera import RadialModel, SamplingError
from .flowfield import FlowGenerationError, gt_flow, max_displacement, write_flow
from .warp import warp_bilinear

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}
MANIFEST_NAME = "manifest.tsv"
MANIFEST_COLUMNS = ("index", "src_path", "k1", "k2", "k3", "k4", "max_displacement_px")


@dataclass(frozen=True)
class Sample:
    """One synthesized training sample."""

    fisheye: np.ndarray
    gt: np.ndarray
    pyramid: list[np.ndarray]
    model: RadialModel
    valid_mask: np.ndarray


def load_image(path) -> np.ndarray:
    """Read an image file as (H, W, 3) floats in [0, 1]."""
    with PILImage.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=float)
    return arr / 255.0


def save_image(path, img: np.ndarray) -> None:
    """Write floats in [0, 1] as an 8-bit PNG (grayscale or RGB)."""
    img = np.asarray(img, dtype=float)
    data = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    PILImage.fromarray(data).save(path)


def center_crop_resize(path, size: int) -> np.ndarray:
    """Load a source image, center-crop it square, and resize to size x size."""
    with PILImage.open(path) as im:
        im = im.convert("RGB")
        w, h = im.size
        side = min(w, h)
        left = (w - side) // 2
        top = (h - side) // 2
        im = im.crop((left, top, left + side, top + side))
        im = im.resize((size, size), PILImage.BILINEAR)
        arr = np.asarray(im, dtype=float)
    return arr / 255.0


def _source_coords(model: RadialModel, size: int):
    """Backward-map fisheye grid pixels to perspective source coordinates."""
    scaled = model.rescaled(size)
    cx, cy = scaled.center
    norm = scaled.norm_radius
    dx = np.arange(size, dtype=float)[None, :] - cx
    dy = np.arange(size, dtype=float)[:, None] - cy
    dx, dy = np.broadcast_arrays(dx, dy)
    r_px = np.hypot(dx, dy)
    r_d = r_px / norm
    r_u = camera.forward_radius(scaled, r_d)
    t = r_u * norm / np.where(r_px > 0.0, r_px, 1.0)
    return cx + t * dx, cy + t * dy, r_d


def distort_image(
    persp: np.ndarray,
    model: RadialModel,
    circular_mask: bool = False,
):
    """Render the fisheye view of a square perspective image.

    Each fisheye pixel at normalized radius r_d samples the perspective
    image at radius forward(r_d) along the same ray.  Returns the fisheye
    image and a validity mask; pixels whose source leaves the image by more
    than the bilinear footprint are black with mask False.  With
    ``circular_mask`` the output is additionally confined to the unit
    normalized-radius disk.
    """
    persp = np.asarray(persp, dtype=float)
    if persp.ndim not in (2, 3) or persp.shape[0] != persp.shape[1]:
        raise ValueError(f"perspective image must be square, got {persp.shape}")
    size = persp.shape[0]
    src_x, src_y, r_d = _source_coords(model, size)

    u = np.arange(size, dtype=float)[None, :]
    v = np.arange(size, dtype=float)[:, None]
    flow = np.stack(np.broadcast_arrays(src_x - u, src_y - v), axis=-1)
    fisheye = warp_bilinear(persp, flow, border="zeros")

    lim = float(size)
    mask = (src_x >= -1.0) & (src_x <= lim) & (src_y >= -1.0) & (src_y <= lim)
    if circular_mask:
        mask &= r_d <= 1.0
    fisheye = fisheye.copy()
    fisheye[~mask] = 0.0
    return fisheye, mask


def rectify_image(fisheye: np.ndarray, model: RadialModel) -> np.ndarray:
    """Undistort a fisheye image by warping it with the model's flow field."""
    fisheye = np.asarray(fisheye, dtype=float)
    h, w = fisheye.shape[:2]
    return warp_bilinear(fisheye, gt_flow(model, w, h), border="zeros")


def make_sample(persp: np.ndarray, model: RadialModel, circular_mask: bool = False) -> Sample:
    """Distort a prepared perspective image and build its flow pyramid."""
    size = persp.shape[0]
    fisheye, mask = distort_image(persp, model, circular_mask=circular_mask)
    levels = max(1, size.bit_length() - 4)  # finest side/2 down to side 8
    pyramid = [gt_flow(model, size >> i, size >> i) for i in range(1, levels + 1)]
    return Sample(fisheye=fisheye, gt=persp, pyramid=pyramid, model=model, valid_mask=mask)


def list_source_images(src_dir) -> list[Path]:
    src_dir = Path(src_dir)
    files = sorted(
        p for p in src_dir.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    )
    return files


def make_dataset(
    src_dir,
    out_dir,
    count: int,
    seed: int,
    size: int = 256,
    circular_mask: bool = False,
) -> Path:
    """Synthesize ``count`` samples into ``out_dir`` and write the manifest.

    Per sample: {index:06}_fish.png, _gt.png, _model.txt and _flow.pcnf
    (the finest pyramid level).  The whole run is deterministic in
    (source bytes, seed, config).  Unreadable sources and sampling failures
    are recorded as comment lines and skipped.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    files = list_source_images(src_dir)
    if not files:
        raise ValueError(f"no readable images found in {src_dir}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    rows: list[str] = []
    for index in range(count):
        src = files[int(rng.integers(len(files)))]
        try:
            persp = center_crop_resize(src, size)
        except Exception as exc:  # unreadable file: log and move on
            print(f"warning: skipping {src}: {exc}", file=sys.stderr)
            rows.append(f"# skipped {index:06d} {src}: unreadable ({exc})")
            continue
        try:
            model = camera.sample_model(rng, size=size)
        except SamplingError as exc:
            print(f"warning: sample {index:06d} aborted: {exc}", file=sys.stderr)
            rows.append(f"# skipped {index:06d} {src}: sampling failure")
            continue
        fisheye, _ = distort_image(persp, model, circular_mask=circular_mask)
        finest = gt_flow(model, size // 2, size // 2)

        stem = out_dir / f"{index:06d}"
        save_image(f"{stem}_fish.png", fisheye)
        save_image(f"{stem}_gt.png", persp)
        camera.save_model(f"{stem}_model.txt", model)
        write_flow(f"{stem}_flow.pcnf", finest)
        k = list(model.coeffs) + [0.0] * (4 - len(model.coeffs))
        rows.append(
            "\t".join(
                [str(index), str(src)]
                + [f"{v:.17g}" for v in k[:4]]
                + [f"{max_displacement(finest):.17g}"]
            )
        )

    manifest = out_dir / MANIFEST_NAME
    header = "\t".join(MANIFEST_COLUMNS)
    manifest.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
    return manifest
