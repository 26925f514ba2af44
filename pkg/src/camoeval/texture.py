"""Gray-level co-occurrence matrices and the four derived texture features.

Per direction a GLCM yields energy, entropy, correlation and moment of
inertia; aggregating mean and population standard deviation over the four
standard directions gives the 8-value texture vector
(a1, b1, a2, b2, a3, b3, a4, b4) used for texture comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateImage
from .image_io import RasterImage

# 0, 45, 90, 135 degrees as (row, col) offsets; rows grow downward
STANDARD_DIRECTIONS: tuple[tuple[int, int], ...] = ((0, 1), (-1, 1), (-1, 0), (-1, -1))

FEATURE_NAMES = ("energy", "entropy", "correlation", "inertia")


@dataclass(frozen=True)
class GlcmConfig:
    gray_levels: int = 16
    distance: int = 1
    directions: tuple[tuple[int, int], ...] = STANDARD_DIRECTIONS
    symmetric: bool = True

    def __post_init__(self):
        if self.gray_levels < 2:
            raise ValueError("gray_levels must be >= 2")
        if self.distance < 1:
            raise ValueError("distance must be >= 1")
        if not self.directions:
            raise ValueError("need at least one direction")
        object.__setattr__(self, "directions", tuple(tuple(d) for d in self.directions))

    def to_json(self) -> dict:
        return {
            "grayLevels": self.gray_levels,
            "distance": self.distance,
            "directions": [list(d) for d in self.directions],
            "symmetric": self.symmetric,
        }


@dataclass(frozen=True)
class Glcm:
    """Joint gray-pair probabilities, levels x levels, summing to 1."""

    levels: int
    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.float64)
        if arr.shape != (self.levels, self.levels):
            raise ValueError(f"entries shape {arr.shape} does not match levels {self.levels}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)


@dataclass(frozen=True)
class TextureFeatures:
    energy: float
    entropy: float
    correlation: float
    inertia: float


@dataclass(frozen=True)
class TextureVector:
    """Means (a_k) and population stds (b_k) of the four features over directions."""

    a1: float
    b1: float
    a2: float
    b2: float
    a3: float
    b3: float
    a4: float
    b4: float

    def as_row(self) -> tuple[float, ...]:
        return (self.a1, self.b1, self.a2, self.b2, self.a3, self.b3, self.a4, self.b4)

    @property
    def means(self) -> tuple[float, float, float, float]:
        return (self.a1, self.a2, self.a3, self.a4)

    def csv_row(self) -> str:
        return ",".join(format(v, ".9g") for v in self.as_row())


@dataclass(frozen=True)
class TextureComparison:
    """Per-feature mean ratios and an order-of-magnitude verdict for each.

    A ratio is NaN (and its flag False) when the denominator is zero or the
    ratio is not positive, since a decade comparison is undefined there.
    """

    ratios: tuple[float, float, float, float]
    same_order: tuple[bool, bool, bool, bool]

    def to_json(self) -> dict:
        out = {}
        for name, ratio, flag in zip(FEATURE_NAMES, self.ratios, self.same_order):
            out[name] = {
                "ratio": None if math.isnan(ratio) else ratio,
                "sameOrderOfMagnitude": flag,
            }
        return out


def to_gray(image: RasterImage, gray_levels: int = 16) -> np.ndarray:
    """Quantize luma (0.299 R + 0.587 G + 0.114 B, rounded) into gray indices."""
    if gray_levels < 2:
        raise ValueError("gray_levels must be >= 2")
    rgb = image.pixels.astype(np.float64)
    luma = np.rint(0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2])
    idx = np.minimum((luma * gray_levels / 256.0).astype(np.int64), gray_levels - 1)
    return idx


def compute_glcm(gray: np.ndarray, config: GlcmConfig, direction: tuple[int, int]) -> Glcm:
    """Co-occurrence probabilities for one (row, col) offset at the configured distance."""
    gray = np.asarray(gray)
    h, w = gray.shape
    dr = direction[0] * config.distance
    dc = direction[1] * config.distance
    r0, r1 = max(0, -dr), min(h, h - dr)
    c0, c1 = max(0, -dc), min(w, w - dc)
    if r1 <= r0 or c1 <= c0:
        raise DegenerateImage(f"no co-occurring pairs for offset {direction} at distance {config.distance}")
    a = gray[r0:r1, c0:c1].ravel()
    b = gray[r0 + dr : r1 + dr, c0 + dc : c1 + dc].ravel()
    levels = config.gray_levels
    counts = np.bincount(a * levels + b, minlength=levels * levels).reshape(levels, levels)
    if config.symmetric:
        counts = counts + counts.T
    total = counts.sum()
    return Glcm(levels=levels, entries=counts / total)


def glcm_features(glcm: Glcm) -> TextureFeatures:
    """Energy, entropy (nats), correlation and moment of inertia of one GLCM."""
    p = glcm.entries
    i = np.arange(glcm.levels, dtype=np.float64)
    energy = float(np.sum(p * p))
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log(nz)))
    inertia = float(np.sum((i[:, None] - i[None, :]) ** 2 * p))
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float(np.sum(i * px))
    mu_y = float(np.sum(i * py))
    sigma_x = math.sqrt(float(np.sum((i - mu_x) ** 2 * px)))
    sigma_y = math.sqrt(float(np.sum((i - mu_y) ** 2 * py)))
    denom = sigma_x * sigma_y
    if denom == 0.0:
        correlation = 0.0
    else:
        correlation = (float(np.sum(i[:, None] * i[None, :] * p)) - mu_x * mu_y) / denom
    return TextureFeatures(energy=energy, entropy=entropy, correlation=correlation, inertia=inertia)


def texture_vector(image: RasterImage, config: GlcmConfig | None = None) -> TextureVector:
    """Aggregate per-direction GLCM features into the 8-value vector."""
    config = config or GlcmConfig()
    gray = to_gray(image, config.gray_levels)
    per_direction = []
    for direction in config.directions:
        feats = glcm_features(compute_glcm(gray, config, direction))
        per_direction.append([feats.energy, feats.entropy, feats.correlation, feats.inertia])
    mat = np.asarray(per_direction, dtype=np.float64)  # (directions, 4)
    means = mat.mean(axis=0)
    stds = mat.std(axis=0)  # population std
    return TextureVector(
        a1=float(means[0]), b1=float(stds[0]),
        a2=float(means[1]), b2=float(stds[1]),
        a3=float(means[2]), b3=float(stds[2]),
        a4=float(means[3]), b4=float(stds[3]),
    )


def texture_compare(v1: TextureVector, v2: TextureVector) -> TextureComparison:
    """Ratio a_k(v1)/a_k(v2) per feature, flagged when within one decade."""
    ratios = []
    flags = []
    for x, y in zip(v1.means, v2.means):
        if y == 0.0:
            ratios.append(math.nan)
            flags.append(False)
            continue
        ratio = x / y
        ratios.append(ratio)
        flags.append(ratio > 0.0 and abs(math.log10(ratio)) <= 1.0)
    return TextureComparison(ratios=tuple(ratios), same_order=tuple(flags))


def texture_vector_to_json(vector: TextureVector, config: GlcmConfig) -> dict:
    """JSON form embedding the GLCM configuration that produced the vector."""
    return {
        "glcmConfig": config.to_json(),
        "values": list(vector.as_row()),
    }
