"""Mirror-pupil compositing: carve a region of interest out of a camera
frame, scale it down to the pupil raster, mirror it horizontally, and blend
it into a rendered eye as the pupil disc.

Conventions
-----------
Image buffers are ``(height, width, 4)`` uint8 RGBA with row 0 at the top.
Continuous image coordinates put pixel ``(i, j)`` over the unit square
``[j, j+1) x [i, i+1)``, so the center of that pixel is ``(j + 0.5, i + 0.5)``.
Sizes are ``(width, height)`` pairs throughout.

The crop never upscales: the shared scale factor is capped at 1, so a region
smaller than the pupil raster is padded with surrounding context instead of
being blown up. When a requested region is larger than the camera frame
itself the crop falls back to the largest window the frame can provide and
marks the result ``resized``; when centering the window would push it past a
frame edge the window slides inward and marks the result ``shifted``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import cv2
import numpy as np

__all__ = [
    "CameraFrame",
    "RegionOfInterest",
    "CropSpec",
    "OverlayFilters",
    "compute_scale",
    "compute_crop",
    "extract_flip",
    "composite",
    "flash_envelope",
]


def _round(x: float) -> int:
    # round-half-up, so results don't flip-flop on exact halves the way
    # banker's rounding does
    return int(math.floor(x + 0.5))


@dataclass(eq=False)
class CameraFrame:
    """One rendered camera image plus the tick counter it came from."""

    width: int
    height: int
    pixels: np.ndarray
    frame_id: int

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 4):
            raise ValueError(
                f"pixel buffer shape {self.pixels.shape} does not match "
                f"(height, width, 4) = ({self.height}, {self.width}, 4)")
        if self.pixels.dtype != np.uint8:
            raise ValueError("pixel buffer must be uint8 RGBA")


@dataclass
class RegionOfInterest:
    """What the mirror should show: a point of interest in camera pixels and
    the extent around it worth capturing, with an optional privacy blur."""

    point: tuple[float, float]
    size: tuple[float, float]
    blur: bool = False

    def __post_init__(self):
        if self.size[0] <= 0 or self.size[1] <= 0:
            raise ValueError("region size must be positive")


@dataclass(frozen=True)
class CropSpec:
    """Resolved crop window: integer origin and size in the source frame, the
    shared scale factor, and flags recording any forced deviation from the
    centered, aspect-true ideal."""

    top_left: tuple[int, int]
    crop_size: tuple[int, int]
    scale: float
    target_size: tuple[int, int]
    shifted: bool = False
    resized: bool = False


@dataclass
class OverlayFilters:
    """Post-processing applied to the mirrored patch before blending."""

    opacity: float = 0.8
    blur_radius: float = 0.0
    exposure_gain: float = 2.5
    flash_decay_tau: float = 0.15

    def __post_init__(self):
        if not 0.0 <= self.opacity <= 1.0:
            raise ValueError("opacity must lie in [0, 1]")
        if self.blur_radius < 0:
            raise ValueError("blur radius must be non-negative")
        if self.exposure_gain < 1.0:
            raise ValueError("exposure gain must be at least 1")
        if self.flash_decay_tau <= 0:
            raise ValueError("flash decay time constant must be positive")


def compute_scale(region: RegionOfInterest,
                  target_size: tuple[int, int]) -> float:
    """Shared downscale factor fitting the region into the target raster.

    One factor serves both axes so the patch is never stretched, and it is
    capped at 1 so the patch is never upscaled.
    """
    return min(target_size[0] / region.size[0],
               target_size[1] / region.size[1],
               1.0)


def compute_crop(frame_dims: tuple[int, int],
                 region: RegionOfInterest,
                 target_size: tuple[int, int]) -> CropSpec:
    """Resolve an integer crop window for ``region`` inside a frame.

    The window is sized ``round(target / scale)`` so it resamples to exactly
    the target raster, and placed so the point of interest maps to the
    center of the output. Windows that would overhang the frame slide
    inward (``shifted``); regions too large for the frame fall back to the
    biggest aspect-true window available (``resized``).
    """
    fw, fh = frame_dims
    tw, th = target_size
    scale = compute_scale(region, target_size)
    cw, ch = _round(tw / scale), _round(th / scale)
    resized = False
    if cw > fw or ch > fh:
        resized = True
        scale = min(1.0, max(tw / fw, th / fh, scale))
        cw = min(_round(tw / scale), fw)
        ch = min(_round(th / scale), fh)

    px, py = region.point
    tlx = _round(px - cw / 2.0)
    tly = _round(py - ch / 2.0)
    clamped_x = min(max(tlx, 0), fw - cw)
    clamped_y = min(max(tly, 0), fh - ch)
    shifted = (clamped_x, clamped_y) != (tlx, tly)
    return CropSpec(top_left=(clamped_x, clamped_y), crop_size=(cw, ch),
                    scale=scale, target_size=(tw, th),
                    shifted=shifted, resized=resized)


def extract_flip(frame: CameraFrame, spec: CropSpec) -> np.ndarray:
    """Cut the crop window out of the frame, resample it to the target size,
    and mirror it horizontally. Returns a fresh contiguous RGBA buffer."""
    x0, y0 = spec.top_left
    cw, ch = spec.crop_size
    tw, th = spec.target_size
    region = frame.pixels[y0:y0 + ch, x0:x0 + cw]
    if (cw, ch) == (tw, th):
        patch = region.copy()
    else:
        patch = cv2.resize(region, (tw, th), interpolation=cv2.INTER_LINEAR)
    return np.ascontiguousarray(patch[:, ::-1])


def composite(eye_base: np.ndarray,
              pupil_image: np.ndarray,
              filters: OverlayFilters,
              pupil_center: tuple[float, float],
              pupil_radius: float) -> np.ndarray:
    """Blend the mirrored patch into a rendered eye as the pupil disc.

    Only pixels whose centers fall inside the disc change; everything else
    keeps the base rendering, so iris and highlights survive. The patch is
    optionally box-blurred, multiplied by the exposure gain (clamped at
    white), and alpha-blended at the configured opacity. Callers animating
    a registration flash substitute ``flash_envelope(t, filters)`` for the
    gain tick by tick. A new buffer is returned; neither input is modified.
    """
    out = eye_base.copy()
    h, w = out.shape[:2]
    ph, pw = pupil_image.shape[:2]
    cx, cy = pupil_center
    r = pupil_radius

    patch = pupil_image.astype(np.float64)
    if filters.blur_radius > 0:
        k = 2 * int(round(filters.blur_radius)) + 1
        if k >= 3:
            patch = cv2.blur(patch, (k, k))
    if filters.exposure_gain != 1.0:
        patch[..., :3] = np.clip(patch[..., :3] * filters.exposure_gain, 0.0, 255.0)

    y0 = max(0, int(math.floor(cy - r)))
    y1 = min(h, int(math.ceil(cy + r)) + 1)
    x0 = max(0, int(math.floor(cx - r)))
    x1 = min(w, int(math.ceil(cx + r)) + 1)
    if y0 >= y1 or x0 >= x1:
        return out

    ys, xs = np.mgrid[y0:y1, x0:x1]
    inside = (xs + 0.5 - cx) ** 2 + (ys + 0.5 - cy) ** 2 <= r * r

    # patch pixel (i, j) sits at eye pixel (anchor + (i, j)); anchor centers
    # the patch on the pupil
    ax = _round(cx - pw / 2.0)
    ay = _round(cy - ph / 2.0)
    src_y = ys - ay
    src_x = xs - ax
    inside &= (src_y >= 0) & (src_y < ph) & (src_x >= 0) & (src_x < pw)
    if not inside.any():
        return out

    base_block = out[y0:y1, x0:x1].astype(np.float64)
    src = patch[src_y[inside], src_x[inside]]
    blended = (filters.opacity * src
               + (1.0 - filters.opacity) * base_block[inside])
    base_block[inside] = blended
    out[y0:y1, x0:x1] = np.rint(np.clip(base_block, 0.0, 255.0)).astype(np.uint8)
    return out


def flash_envelope(t: float, filters: OverlayFilters) -> float:
    """Exposure multiplier ``t`` seconds after a registration flash fires:
    jumps to ``exposure_gain`` and decays exponentially back to 1."""
    if t < 0:
        return 1.0
    return 1.0 + (filters.exposure_gain - 1.0) * math.exp(-t / filters.flash_decay_tau)
