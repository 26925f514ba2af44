"""PNG decoding, pixel access and RGB-to-HSV conversion.

Everything downstream consumes :class:`RasterImage`, an immutable 8-bit RGB
pixel grid. PNG is the only supported container; 16-bit channels are
truncated to their high byte and alpha is discarded.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import MalformedImage, UnsupportedFormat

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class HsvPixel(NamedTuple):
    """Hexcone HSV triple: h in [0, 360) degrees, s and v in [0, 1]."""

    h: float
    s: float
    v: float


@dataclass(frozen=True)
class RasterImage:
    """Decoded 8-bit RGB image, stored row-major as a (height, width, 3) array."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) pixel array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if arr.dtype != np.uint8:
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("channel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def pixel_count(self) -> int:
        return self.width * self.height


def decode_image(data: bytes) -> RasterImage:
    """Decode PNG bytes into a RasterImage.

    Accepts 8- and 16-bit RGB/RGBA (and, leniently, grayscale/palette)
    PNGs. 16-bit channels are truncated to 8 bits; alpha is dropped.

    Raises UnsupportedFormat for non-PNG input and MalformedImage for
    undecodable PNG streams.
    """
    if not data.startswith(PNG_MAGIC):
        raise UnsupportedFormat("input is not a PNG byte stream")
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            arr = _to_rgb_array(im)
    except UnidentifiedImageError as exc:
        raise MalformedImage(f"undecodable PNG: {exc}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise MalformedImage(f"undecodable PNG: {exc}") from exc
    return RasterImage(arr)


def _to_rgb_array(im: Image.Image) -> np.ndarray:
    # Pillow already truncates 16-bit RGB/RGBA to 8-bit on load; only the
    # 16/32-bit grayscale modes need explicit handling.
    if im.mode in ("I;16", "I;16B", "I;16L", "I"):
        gray = (np.asarray(im, dtype=np.uint32) >> 8).astype(np.uint8)
        return np.repeat(gray[:, :, None], 3, axis=2)
    if im.mode != "RGB":
        im = im.convert("RGB")
    return np.asarray(im, dtype=np.uint8)


def load_image(path: str | Path) -> RasterImage:
    """Read and decode a PNG file."""
    return decode_image(Path(path).read_bytes())


def encode_png(image: RasterImage) -> bytes:
    """Encode a RasterImage as PNG bytes with pinned, reproducible settings."""
    buf = io.BytesIO()
    Image.fromarray(image.pixels, mode="RGB").save(buf, format="PNG", compress_level=6, optimize=False)
    return buf.getvalue()


def save_png(image: RasterImage, path: str | Path) -> None:
    Path(path).write_bytes(encode_png(image))


def rgb_to_hsv_unit(r: float, g: float, b: float) -> HsvPixel:
    """Hexcone conversion on real-valued channels in [0, 1].

    h is 0 by convention on achromatic input (max == min).
    """
    mx = max(r, g, b)
    mn = min(r, g, b)
    v = mx
    s = 0.0 if mx == 0.0 else (mx - mn) / mx
    d = mx - mn
    if d == 0.0:
        h = 0.0
    elif mx == r:
        h = (60.0 * (g - b) / d) % 360.0
    elif mx == g:
        h = 60.0 * (b - r) / d + 120.0
    else:
        h = 60.0 * (r - g) / d + 240.0
    return HsvPixel(h, s, v)


def rgb_to_hsv(r: int, g: int, b: int) -> HsvPixel:
    """Convert 8-bit RGB channels to HSV (pure red -> h=0, green -> 120, blue -> 240)."""
    for name, c in (("r", r), ("g", g), ("b", b)):
        if not 0 <= c <= 255:
            raise ValueError(f"channel {name}={c} outside [0, 255]")
    return rgb_to_hsv_unit(r / 255.0, g / 255.0, b / 255.0)


def image_to_hsv(image: RasterImage) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized per-pixel HSV conversion.

    Returns (h, s, v) float64 arrays of shape (height, width). Bit-identical
    to applying :func:`rgb_to_hsv` to every pixel in sequence.
    """
    rgb = image.pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = np.max(rgb, axis=-1)
    mn = np.min(rgb, axis=-1)
    d = mx - mn
    v = mx
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(mx == 0.0, 0.0, d / mx)
        h_r = (60.0 * (g - b) / d) % 360.0
        h_g = 60.0 * (b - r) / d + 120.0
        h_b = 60.0 * (r - g) / d + 240.0
    # case order matters for ties: r wins over g wins over b, as in the scalar path
    h = np.where(d == 0.0, 0.0, np.where(mx == r, h_r, np.where(mx == g, h_g, h_b)))
    return h, s, v
