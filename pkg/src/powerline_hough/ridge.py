"""Hessian ridge enhancement and a Canny baseline.

Thin bright (or dark) wires show up as one strong, signed second derivative
across the wire and a weak one along it.  The Hessian of the smoothed image
therefore has one eigenvalue much larger in magnitude than the other, and its
sign gives the polarity.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import BinaryImage

POLARITIES = ("bright", "dark", "both")


@dataclass(frozen=True)
class HessianField:
    width: int
    height: int
    fxx: np.ndarray
    fxy: np.ndarray
    fyy: np.ndarray
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class RidgeParams:
    sigma: float = 1.0
    response_threshold: float = 0.3
    polarity: str = "bright"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.response_threshold <= 1:
            raise ValueError("response_threshold must lie in (0, 1]")
        if self.polarity not in POLARITIES:
            raise ValueError(f"polarity must be one of {POLARITIES}")


def gaussian_kernel(sigma):
    """Normalized sampled Gaussian with radius ``ceil(3 * sigma)``."""
    radius = int(math.ceil(3 * sigma))
    k = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (k / sigma) ** 2)
    return g / g.sum()


def smooth(pixels, sigma):
    """Separable Gaussian smoothing with replicate padding."""
    g = gaussian_kernel(sigma)
    f = np.asarray(pixels, dtype=np.float64)
    f = ndimage.correlate1d(f, g, axis=0, mode="nearest")
    return ndimage.correlate1d(f, g, axis=1, mode="nearest")


def hessian_field(img, sigma):
    """Second derivatives of the Gaussian-smoothed image.

    The Gaussian is followed by central second differences, so on interior
    pixels the result is exactly the finite-difference Hessian of the
    smoothed image.  Both stages pad by edge replication.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    s = np.pad(smooth(img.pixels, sigma), 1, mode="edge")
    c = s[1:-1, 1:-1]
    fxx = s[1:-1, 2:] - 2.0 * c + s[1:-1, :-2]
    fyy = s[2:, 1:-1] - 2.0 * c + s[:-2, 1:-1]
    fxy = 0.25 * (s[2:, 2:] - s[2:, :-2] - s[:-2, 2:] + s[:-2, :-2])
    return HessianField(img.width, img.height, fxx, fxy, fyy, float(sigma))


def eigenvalues(fxx, fxy, fyy):
    """Eigenvalues of ``[[fxx, fxy], [fxy, fyy]]`` ordered ``|l1| <= |l2|``.

    Works on scalars or arrays.  Uses ``tr/2 +- sqrt((tr/2)**2 - det)`` with
    the radicand written as ``((fxx - fyy)/2)**2 + fxy**2``, which is the same
    quantity but never negative.
    """
    fxx, fxy, fyy = np.asarray(fxx, float), np.asarray(fxy, float), np.asarray(fyy, float)
    half_tr = 0.5 * (fxx + fyy)
    disc = np.hypot(0.5 * (fxx - fyy), fxy)
    lo, hi = half_tr - disc, half_tr + disc
    swap = np.abs(lo) > np.abs(hi)
    l1 = np.where(swap, hi, lo)
    l2 = np.where(swap, lo, hi)
    if l1.ndim == 0:
        return float(l1), float(l2)
    return l1, l2


# neighbour offsets (dx, dy) for the four quantized directions
_DIRS = ((1, 0), (1, 1), (0, 1), (-1, 1))


def _quantize_direction(vx, vy):
    ang = np.mod(np.degrees(np.arctan2(vy, vx)), 180.0)
    return (np.floor((ang + 22.5) / 45.0).astype(np.int64)) % 4


def _shifted(a, dx, dy, fill=0.0):
    """``out[y, x] = a[y + dy, x + dx]`` with ``fill`` outside the array."""
    h, w = a.shape
    out = np.full_like(a, fill)
    ys0, ys1 = max(0, -dy), min(h, h - dy)
    xs0, xs1 = max(0, -dx), min(w, w - dx)
    out[ys0:ys1, xs0:xs1] = a[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
    return out


def _nms(resp, direction, strict_before):
    """Keep pixels whose response is a maximum along their quantized direction."""
    keep = np.zeros(resp.shape, dtype=bool)
    for d, (dx, dy) in enumerate(_DIRS):
        sel = direction == d
        if not sel.any():
            continue
        fwd = _shifted(resp, dx, dy)
        back = _shifted(resp, -dx, -dy)
        if strict_before:
            ok = (resp > back) & (resp >= fwd)
        else:
            ok = (resp >= back) & (resp >= fwd)
        keep |= sel & ok
    return keep


def ridge_response(field, polarity="bright"):
    """Signed-to-polarity ridge strength and the cross-ridge direction per pixel."""
    l1, l2 = eigenvalues(field.fxx, field.fxy, field.fyy)
    if polarity == "bright":
        resp = np.where(l2 < 0, -l2, 0.0)
    elif polarity == "dark":
        resp = np.where(l2 > 0, l2, 0.0)
    else:
        resp = np.abs(l2)
    # eigenvector of l2, from whichever row of (H - l2 I) is better conditioned
    ax, ay = l2 - field.fyy, field.fxy
    bx, by = field.fxy, l2 - field.fxx
    use_a = np.hypot(ax, ay) >= np.hypot(bx, by)
    vx = np.where(use_a, ax, bx)
    vy = np.where(use_a, ay, by)
    return resp, np.abs(l2), _quantize_direction(vx, vy)


def ridge_map(img, params=RidgeParams()):
    """Binary map of thin ridges of the requested polarity.

    A pixel is marked when its dominant eigenvalue has the right sign, its
    magnitude reaches ``response_threshold`` times the image-wide maximum of
    ``|l2|`` and it is a local maximum across the ridge.
    """
    field = hessian_field(img, params.sigma)
    resp, mag, direction = ridge_response(field, params.polarity)
    peak = float(mag.max())
    if peak <= 0:
        return BinaryImage.empty(img.width, img.height)
    strong = (resp > 0) & (resp >= params.response_threshold * peak)
    return BinaryImage(strong & _nms(resp, direction, strict_before=False))


CANNY_SIGMA = 1.4


def canny_baseline(img, low, high):
    """Classic Canny detector on Sobel gradients of the smoothed image."""
    if low < 0 or high < 0:
        raise ValueError("thresholds must be non-negative")
    if low > high:
        raise ValueError(f"low threshold {low} exceeds high threshold {high}")
    s = smooth(img.pixels, CANNY_SIGMA)
    gx = ndimage.sobel(s, axis=1, mode="nearest")
    gy = ndimage.sobel(s, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    direction = _quantize_direction(gx, gy)
    # ties along a symmetric ramp keep only the first pixel
    thin = _nms(mag, direction, strict_before=True) & (mag > 0)
    weak = thin & (mag >= low)
    strong = thin & (mag >= high)
    if not strong.any():
        return BinaryImage.empty(img.width, img.height)
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    keep = np.unique(labels[strong])
    keep = keep[keep > 0]
    return BinaryImage(np.isin(labels, keep))
