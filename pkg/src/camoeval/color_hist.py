"""HSV quantization, normalized color histograms and Bhattacharyya scoring.

The default scheme splits hue into 16 equal bins and saturation/value into
4 each; histograms are joint H x S by default (value is carried through
quantization but excluded from binning unless ``include_v`` is set).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BadWeights, BinMismatch, EmptyImage
from .image_io import HsvPixel, RasterImage, image_to_hsv

WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class QuantizationScheme:
    """Equal-width bin layout over the HSV axes.

    The last S and V intervals are closed above, so s=1 and v=1 clamp into
    the final bin instead of opening a new one.
    """

    h_bins: int = 16
    s_bins: int = 4
    v_bins: int = 4
    include_v: bool = False

    def __post_init__(self):
        if self.h_bins < 1 or self.s_bins < 1 or self.v_bins < 1:
            raise ValueError("bin counts must be >= 1")

    @property
    def bin_count(self) -> int:
        n = self.h_bins * self.s_bins
        return n * self.v_bins if self.include_v else n

    def to_json(self) -> dict:
        return {
            "hBins": self.h_bins,
            "sBins": self.s_bins,
            "vBins": self.v_bins,
            "includeV": self.include_v,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QuantizationScheme":
        return cls(
            h_bins=int(obj["hBins"]),
            s_bins=int(obj["sBins"]),
            v_bins=int(obj["vBins"]),
            include_v=bool(obj["includeV"]),
        )


@dataclass(frozen=True)
class ColorHistogram:
    """Normalized bin frequencies: values[i] == count_i / pixel_total.

    Flat storage is h-bin-major: index = h*sBins + s, times vBins plus v
    when value is included.
    """

    values: np.ndarray
    pixel_total: int
    scheme: Optional[QuantizationScheme] = None

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("histogram values must be a flat vector")
        if (arr < 0).any():
            raise ValueError("histogram values must be non-negative")
        if self.scheme is not None and arr.size != self.scheme.bin_count:
            raise ValueError(
                f"{arr.size} values do not match scheme bin count {self.scheme.bin_count}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def bin_count(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class SimilarityScore:
    """Bhattacharyya coefficient in [0, 1], its -ln distance, and the coefficient as a percent."""

    coefficient: float
    distance: float
    percent: float


def quantize(pixel: HsvPixel, scheme: QuantizationScheme) -> tuple[int, int, int]:
    """Map one HSV pixel to its (hBin, sBin, vBin) indices."""
    h_bin = min(int(pixel.h / (360.0 / scheme.h_bins)), scheme.h_bins - 1)
    s_bin = min(int(pixel.s * scheme.s_bins), scheme.s_bins - 1)
    v_bin = min(int(pixel.v * scheme.v_bins), scheme.v_bins - 1)
    return h_bin, s_bin, v_bin


def quantize_image(image: RasterImage, scheme: QuantizationScheme) -> np.ndarray:
    """Per-pixel flat bin indices for an entire image, shape (height, width)."""
    h, s, v = image_to_hsv(image)
    h_bin = np.minimum((h / (360.0 / scheme.h_bins)).astype(np.int64), scheme.h_bins - 1)
    s_bin = np.minimum((s * scheme.s_bins).astype(np.int64), scheme.s_bins - 1)
    flat = h_bin * scheme.s_bins + s_bin
    if scheme.include_v:
        v_bin = np.minimum((v * scheme.v_bins).astype(np.int64), scheme.v_bins - 1)
        flat = flat * scheme.v_bins + v_bin
    return flat


def build_histogram(image: RasterImage, scheme: QuantizationScheme | None = None) -> ColorHistogram:
    """Count quantized pixels and normalize by the pixel total."""
    scheme = scheme or QuantizationScheme()
    shape = np.asarray(image.pixels).shape
    n = int(shape[0] * shape[1])
    if n == 0:
        raise EmptyImage("cannot normalize a histogram over zero pixels")
    flat = quantize_image(image, scheme)
    counts = np.bincount(flat.ravel(), minlength=scheme.bin_count)
    return ColorHistogram(values=counts / n, pixel_total=n, scheme=scheme)


def bhattacharyya(p: ColorHistogram, q: ColorHistogram) -> SimilarityScore:
    """Score two histograms: coefficient sum(sqrt(p_i q_i)), distance -ln of it."""
    _check_compatible(p, q)
    coeff = float(np.sum(np.sqrt(p.values * q.values)))
    coeff = min(max(coeff, 0.0), 1.0)  # guard rounding at the boundaries
    distance = math.inf if coeff == 0.0 else -math.log(coeff)
    return SimilarityScore(coefficient=coeff, distance=distance, percent=100.0 * coeff)


def merge_histograms(
    histograms: Sequence[ColorHistogram],
    weights: Sequence[float] | None = None,
) -> ColorHistogram:
    """Weighted per-bin mean of several histograms (equal weights by default).

    The result's pixel_total is the sum of the inputs' totals and is
    informational only; merged values are generally no longer exact
    count/total rationals.
    """
    if not histograms:
        raise ValueError("need at least one histogram to merge")
    first = histograms[0]
    for h in histograms[1:]:
        _check_compatible(first, h)
    if weights is None:
        weights = [1.0 / len(histograms)] * len(histograms)
    if len(weights) != len(histograms):
        raise BadWeights(f"{len(weights)} weights for {len(histograms)} histograms")
    w = np.asarray(weights, dtype=np.float64)
    if (w < 0).any():
        raise BadWeights("weights must be non-negative")
    if abs(float(w.sum()) - 1.0) > WEIGHT_TOL:
        raise BadWeights(f"weights sum to {w.sum()!r}, expected 1")
    merged = np.zeros(first.bin_count, dtype=np.float64)
    for wk, h in zip(w, histograms):
        merged += wk * h.values
    return ColorHistogram(
        values=merged,
        pixel_total=sum(h.pixel_total for h in histograms),
        scheme=first.scheme,
    )


def _check_compatible(p: ColorHistogram, q: ColorHistogram) -> None:
    if p.bin_count != q.bin_count:
        raise BinMismatch(f"bin counts differ: {p.bin_count} vs {q.bin_count}")
    if p.scheme is not None and q.scheme is not None and p.scheme != q.scheme:
        raise BinMismatch(f"schemes differ: {p.scheme} vs {q.scheme}")


def histogram_to_json(hist: ColorHistogram) -> dict:
    """Serializable form: {scheme, pixelTotal, values} with flat h-major values."""
    if hist.scheme is None:
        raise ValueError("cannot serialize a histogram without a quantization scheme")
    return {
        "scheme": hist.scheme.to_json(),
        "pixelTotal": hist.pixel_total,
        "values": [float(v) for v in hist.values],
    }


def histogram_from_json(obj: dict) -> ColorHistogram:
    return ColorHistogram(
        values=np.asarray(obj["values"], dtype=np.float64),
        pixel_total=int(obj["pixelTotal"]),
        scheme=QuantizationScheme.from_json(obj["scheme"]),
    )


def dump_histogram(hist: ColorHistogram) -> str:
    """JSON text with full double precision (shortest round-trip floats)."""
    return json.dumps(histogram_to_json(hist), indent=2)


def load_histogram(text: str) -> ColorHistogram:
    return histogram_from_json(json.loads(text))
