"""Grayscale and binary rasters, PGM I/O and line overlays.

Coordinates follow the image convention used throughout the package:
``x`` is the column index (rightward), ``y`` the row index (downward),
origin at the top-left pixel.  Arrays are stored ``[y, x]``.
"""

import math
import re

import numpy as np


class GrayImage:
    """Immutable 8-bit grayscale image.

    Parameters
    ----------
    pixels : array_like
        2-D array of intensities in [0, 255], indexed ``[y, x]``.
    """

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D array, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255):
                raise ValueError("pixel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    def __setattr__(self, name, value):
        raise AttributeError("GrayImage is immutable")

    @classmethod
    def from_rows(cls, width, height, values):
        return cls(np.asarray(values, dtype=np.int64).reshape(height, width))

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


class BinaryImage:
    """Immutable edge map with an O(1) edge-pixel count.

    Parameters
    ----------
    mask : array_like of bool
        2-D array, True marks an edge pixel.
    """

    __slots__ = ("mask", "count")

    def __init__(self, mask):
        arr = np.array(mask, dtype=bool, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected a non-empty 2-D array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "mask", arr)
        object.__setattr__(self, "count", int(np.count_nonzero(arr)))

    def __setattr__(self, name, value):
        raise AttributeError("BinaryImage is immutable")

    @classmethod
    def empty(cls, width, height):
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def width(self):
        return self.mask.shape[1]

    @property
    def height(self):
        return self.mask.shape[0]

    def coords(self):
        """Edge pixel coordinates as ``(xs, ys)`` int64 arrays in row-major order."""
        idx = np.flatnonzero(self.mask)
        ys, xs = np.divmod(idx, self.mask.shape[1])
        return xs.astype(np.int64), ys.astype(np.int64)

    def to_gray(self):
        return GrayImage(np.where(self.mask, 255, 0).astype(np.uint8))

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return self.mask.shape == other.mask.shape and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((self.mask.shape, np.packbits(self.mask).tobytes()))

    def __repr__(self):
        return f"BinaryImage({self.width}x{self.height}, edges={self.count})"


class PgmError(ValueError):
    """Malformed PGM data; ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class BadMagicError(PgmError):
    pass


class TruncatedError(PgmError):
    pass


class MaxvalError(PgmError):
    pass


class DimensionError(PgmError):
    pass


class PixelValueError(PgmError):
    pass


_WS = b" \t\r\n\v\f"


def _next_token(data, pos):
    """Return ``(token, start, end)`` of the next header token, skipping comments."""
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in _WS:
            pos += 1
        elif c == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos] not in _WS and data[pos] != ord("#"):
        pos += 1
    if start == pos:
        raise TruncatedError("header ends early", start)
    return data[start:pos], start, pos


def _header_int(data, pos, what):
    tok, start, end = _next_token(data, pos)
    if not tok.isdigit():
        raise PgmError(f"expected {what}, got {tok[:16]!r}", start)
    return int(tok), start, end


def read_pgm(data):
    """Parse a P5 (binary) or P2 (ASCII) PGM with maxval <= 255.

    Pixel values are returned as stored; no rescaling by maxval is applied.
    """
    data = bytes(data)
    if len(data) < 2:
        raise TruncatedError("missing magic number", 0)
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise BadMagicError(f"unsupported magic {magic!r}", 0)
    if len(data) > 2 and data[2] not in _WS and data[2] != ord("#"):
        raise BadMagicError("magic number not followed by whitespace", 2)

    width, wpos, pos = _header_int(data, 2, "width")
    height, hpos, pos = _header_int(data, pos, "height")
    maxval, mpos, pos = _header_int(data, pos, "maxval")
    if width == 0:
        raise DimensionError("zero width", wpos)
    if height == 0:
        raise DimensionError("zero height", hpos)
    if maxval == 0 or maxval > 255:
        raise MaxvalError(f"maxval {maxval} outside 1..255", mpos)

    count = width * height
    if magic == b"P5":
        if pos >= len(data) or data[pos] not in _WS:
            raise TruncatedError("missing whitespace after maxval", pos)
        start = pos + 1
        if len(data) - start < count:
            raise TruncatedError(f"payload has {len(data) - start} of {count} bytes", len(data))
        values = np.frombuffer(data, dtype=np.uint8, count=count, offset=start)
        bad = np.flatnonzero(values > maxval)
        if bad.size:
            raise PixelValueError(f"pixel value exceeds maxval {maxval}", start + int(bad[0]))
        return GrayImage(values.reshape(height, width))

    # P2: whitespace separated decimal values, comments tolerated
    body = data[pos:]
    values = []
    for m in re.finditer(rb"#[^\r\n]*|[^\s#]+", body):
        tok = m.group()
        if tok.startswith(b"#"):
            continue
        off = pos + m.start()
        if not tok.isdigit():
            raise PgmError(f"non-numeric pixel token {tok[:16]!r}", off)
        v = int(tok)
        if v > maxval:
            raise PixelValueError(f"pixel value {v} exceeds maxval {maxval}", off)
        values.append(v)
        if len(values) == count:
            break
    if len(values) < count:
        raise TruncatedError(f"payload has {len(values)} of {count} values", len(data))
    return GrayImage(np.asarray(values, dtype=np.uint8).reshape(height, width))


def write_pgm(img):
    """Encode as binary P5 with maxval 255 and no comments."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def load_pgm(path):
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(path, img):
    with open(path, "wb") as fh:
        fh.write(write_pgm(img))


def _round_half_up(v):
    return int(math.floor(v + 0.5))


def clip_line(theta, rho, width, height):
    """Endpoints of the line's intersection with the pixel-center rectangle.

    Returns ``None`` when the line misses ``[0, width-1] x [0, height-1]``.
    """
    c, s = math.cos(theta), math.sin(theta)
    # point on the line closest to the origin, and the direction along it
    px, py = rho * c, rho * s
    dx, dy = -s, c
    t0, t1 = -math.inf, math.inf
    for p, d, lo, hi in ((px, dx, 0.0, width - 1.0), (py, dy, 0.0, height - 1.0)):
        if abs(d) < 1e-12:
            if p < lo - 1e-9 or p > hi + 1e-9:
                return None
            continue
        a, b = (lo - p) / d, (hi - p) / d
        if a > b:
            a, b = b, a
        t0, t1 = max(t0, a), min(t1, b)
    if t0 > t1 + 1e-9:
        return None
    return (px + t0 * dx, py + t0 * dy), (px + t1 * dx, py + t1 * dy)


def bresenham(x0, y0, x1, y1):
    """Integer midpoint traversal from ``(x0, y0)`` to ``(x1, y1)`` inclusive."""
    pts = []
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        pts.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return pts
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def render_overlay(img, lines, value=255):
    """Copy of ``img`` with every line drawn 1 px wide across the image."""
    out = np.array(img.pixels, copy=True)
    h, w = out.shape
    for line in lines:
        seg = clip_line(line.theta, line.rho, w, h)
        if seg is None:
            continue
        (ax, ay), (bx, by) = seg
        x0, y0 = min(max(_round_half_up(ax), 0), w - 1), min(max(_round_half_up(ay), 0), h - 1)
        x1, y1 = min(max(_round_half_up(bx), 0), w - 1), min(max(_round_half_up(by), 0), h - 1)
        for x, y in bresenham(x0, y0, x1, y1):
            out[y, x] = value
    return GrayImage(out)
